//! Homogeneous affine systems `T_j x = A⁻¹x + u_j` with translations in
//! `∪ A⁻ᵐℤᵈ`: validation, normalization, word composition and digit sums.

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intlinalg::{ExpandingMatrix, LinalgError, RatMatrix};

/// Default cap on the number of words enumerated at one depth.
pub const DEFAULT_SUM_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("expected {expected} digits (|det A|), found {found}")]
    WrongDigitCount { expected: usize, found: usize },
    #[error("vector has dimension {found}, matrix has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation requires a normalized system (integer digits, first digit 0)")]
    NotNormalized,
    #[error("letter {letter} outside 1..={alphabet}")]
    LetterOutOfRange { letter: usize, alphabet: usize },
    #[error("words must be nonempty")]
    EmptyWord,
    #[error("{requested} words requested, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `A⁻ˢᶜᵃˡᵉ·vec`, kept with the least possible scale.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaledVector {
    pub scale: u32,
    pub vec: Vec<i64>,
}

impl ScaledVector {
    /// Builds and canonicalizes `A⁻ᵐv`.
    pub fn new(scale: u32, vec: Vec<i64>, matrix: &ExpandingMatrix) -> Result<Self, SystemError> {
        if vec.len() != matrix.dim() {
            return Err(SystemError::DimensionMismatch {
                expected: matrix.dim(),
                found: vec.len(),
            });
        }
        let mut out = ScaledVector { scale, vec };
        while out.scale > 0 {
            match matrix.divide_i64(&out.vec) {
                Some(v) => {
                    out.vec = v;
                    out.scale -= 1;
                }
                None => break,
            }
        }
        Ok(out)
    }

    pub fn integer(vec: Vec<i64>) -> Self {
        ScaledVector { scale: 0, vec }
    }

    pub fn is_canonical(&self, matrix: &ExpandingMatrix) -> bool {
        self.scale == 0 || matrix.divide_i64(&self.vec).is_none()
    }

    pub fn to_rational(&self, matrix: &ExpandingMatrix) -> Vec<BigRational> {
        let big: Vec<BigRational> = self.vec.iter().map(|&x| BigRational::from(BigInt::from(x))).collect();
        matrix.inverse_power(self.scale).mul_vec(&big)
    }

    pub fn to_f64(&self, matrix: &ExpandingMatrix) -> Vec<f64> {
        self.to_rational(matrix).iter().map(rational_to_f64).collect()
    }

    /// The integer vector `Aᵗ·(A⁻ˢᶜᵃˡᵉ vec)` for `t >= scale`.
    pub fn lift(&self, matrix: &ExpandingMatrix, t: u32) -> Result<Vec<i64>, SystemError> {
        assert!(t >= self.scale);
        let mut v = self.vec.clone();
        for _ in self.scale..t {
            v = matrix.apply_i64(&v).ok_or(SystemError::Overflow)?;
        }
        Ok(v)
    }
}

pub(crate) fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back to integer division for huge numerators/denominators.
        let scale = BigInt::from(1u64 << 53);
        let q: BigInt = (x.numer() * &scale) / x.denom();
        q.to_f64().unwrap_or(f64::NAN) / (1u64 << 53) as f64
    })
}

/// A nonempty word over `{1, …, N}`; letter `j` selects the map `T_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>, alphabet: usize) -> Result<Self, SystemError> {
        if letters.is_empty() {
            return Err(SystemError::EmptyWord);
        }
        if let Some(&letter) = letters.iter().find(|&&l| l == 0 || l > alphabet) {
            return Err(SystemError::LetterOutOfRange { letter, alphabet });
        }
        Ok(Word { letters })
    }

    /// The `rank`-th word of length `len` in lexicographic order.
    pub fn from_rank(mut rank: u64, len: usize, alphabet: usize) -> Self {
        let mut letters = vec![1; len];
        for slot in letters.iter_mut().rev() {
            *slot = (rank % alphabet as u64) as usize + 1;
            rank /= alphabet as u64;
        }
        Word { letters }
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn reversed(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// `x ↦ Lx + t` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub linear: RatMatrix,
    pub translation: Vec<BigRational>,
}

impl AffineMap {
    pub fn apply(&self, x: &[BigRational]) -> Vec<BigRational> {
        self.linear
            .mul_vec(x)
            .into_iter()
            .zip(&self.translation)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// The change of co-ordinates `x ↦ Aᵖᵒʷᵉʳx − shift` that carries a system to
/// its normalized form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjugacy {
    pub power: u32,
    pub shift: Vec<BigRational>,
}

impl Conjugacy {
    pub fn is_identity(&self) -> bool {
        self.power == 0 && self.shift.iter().all(Zero::is_zero)
    }

    pub fn forward(&self, matrix: &ExpandingMatrix, x: &[BigRational]) -> Vec<BigRational> {
        let mut y = x.to_vec();
        for _ in 0..self.power {
            y = apply_rational(matrix, &y);
        }
        y.iter().zip(&self.shift).map(|(a, c)| a - c).collect()
    }

    pub fn backward(&self, matrix: &ExpandingMatrix, z: &[BigRational]) -> Vec<BigRational> {
        let y: Vec<BigRational> = z.iter().zip(&self.shift).map(|(a, c)| a + c).collect();
        matrix.inverse_power(self.power).mul_vec(&y)
    }

    /// Express a map of normalized co-ordinates in the original ones:
    /// `φ⁻¹ ∘ F ∘ φ`.
    pub fn pull_back(&self, matrix: &ExpandingMatrix, map: &AffineMap) -> AffineMap {
        // Linear parts are powers of A⁻¹ and commute with Aᵐ.
        let lc = map.linear.mul_vec(&self.shift);
        let inner: Vec<BigRational> = map
            .translation
            .iter()
            .zip(&self.shift)
            .zip(&lc)
            .map(|((t, c), l)| t + c - l)
            .collect();
        AffineMap {
            linear: map.linear.clone(),
            translation: matrix.inverse_power(self.power).mul_vec(&inner),
        }
    }
}

fn apply_rational(matrix: &ExpandingMatrix, x: &[BigRational]) -> Vec<BigRational> {
    RatMatrix::scaled(matrix.entries(), &BigInt::from(1)).mul_vec(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSystem {
    matrix: ExpandingMatrix,
    digits: Vec<ScaledVector>,
}

/// Validate a matrix and translation list.
pub fn build_system(matrix: ExpandingMatrix, digits: Vec<ScaledVector>) -> Result<AffineSystem, SystemError> {
    AffineSystem::new(matrix, digits)
}

impl AffineSystem {
    /// Digits are canonicalized; duplicates are allowed.
    pub fn new(matrix: ExpandingMatrix, digits: Vec<ScaledVector>) -> Result<Self, SystemError> {
        let n = matrix.det_abs() as usize;
        if digits.len() != n {
            return Err(SystemError::WrongDigitCount {
                expected: n,
                found: digits.len(),
            });
        }
        let digits = digits
            .into_iter()
            .map(|u| ScaledVector::new(u.scale, u.vec, &matrix))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AffineSystem { matrix, digits })
    }

    /// Convenience constructor for integer digits.
    pub fn from_integer_digits(matrix: ExpandingMatrix, digits: &[Vec<i64>]) -> Result<Self, SystemError> {
        Self::new(matrix, digits.iter().cloned().map(ScaledVector::integer).collect())
    }

    pub fn matrix(&self) -> &ExpandingMatrix {
        &self.matrix
    }

    pub fn digits(&self) -> &[ScaledVector] {
        &self.digits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `N`, the number of maps.
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn max_scale(&self) -> u32 {
        self.digits.iter().map(|u| u.scale).max().unwrap_or(0)
    }

    pub fn is_normalized(&self) -> bool {
        self.digits.iter().all(|u| u.scale == 0) && self.digits[0].vec.iter().all(|&x| x == 0)
    }

    pub(crate) fn require_normalized(&self) -> Result<(), SystemError> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(SystemError::NotNormalized)
        }
    }

    /// Integer digit vectors; only meaningful when every scale is 0.
    pub fn integer_digits(&self) -> Vec<Vec<i64>> {
        self.digits.iter().map(|u| u.vec.clone()).collect()
    }

    pub fn rational_digits(&self) -> Vec<Vec<BigRational>> {
        self.digits.iter().map(|u| u.to_rational(&self.matrix)).collect()
    }

    pub fn word(&self, letters: Vec<usize>) -> Result<Word, SystemError> {
        Word::new(letters, self.len())
    }

    /// Conjugate to integer digits with `u₁ = 0`.
    pub fn normalize(&self) -> Result<(AffineSystem, Conjugacy), SystemError> {
        let m = self.max_scale();
        let lifted = self
            .digits
            .iter()
            .map(|u| u.lift(&self.matrix, m))
            .collect::<Result<Vec<_>, _>>()?;
        let first = lifted[0].clone();
        let digits = lifted
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&first)
                    .map(|(a, b)| a.checked_sub(*b).ok_or(SystemError::Overflow))
                    .collect::<Result<Vec<_>, _>>()
                    .map(ScaledVector::integer)
            })
            .collect::<Result<Vec<_>, _>>()?;

        // The shift is the fixed point c = A⁻¹c + v₁, i.e. (A − I)c = A v₁.
        let v1: Vec<BigRational> = first.iter().map(|&x| BigRational::from(BigInt::from(x))).collect();
        let a = RatMatrix::scaled(self.matrix.entries(), &BigInt::from(1));
        let shift = if v1.iter().all(Zero::is_zero) {
            v1
        } else {
            a.sub(&RatMatrix::identity(self.dim()))
                .solve(&a.mul_vec(&v1))
                .expect("A − I is invertible for expanding A")
        };
        let normalized = AffineSystem {
            matrix: self.matrix.clone(),
            digits,
        };
        Ok((normalized, Conjugacy { power: m, shift }))
    }

    /// `T_{j₁}⋯T_{jₙ}x = A⁻ⁿx + Σ_r A^{1−r}u_{j_r}`.
    pub fn compose_word(&self, word: &Word) -> AffineMap {
        let n = word.len() as u32;
        let digits = self.rational_digits();
        let letters = word.letters();
        let mut t = digits[letters[letters.len() - 1] - 1].clone();
        for &l in letters[..letters.len() - 1].iter().rev() {
            t = self
                .matrix
                .apply_inverse(&t)
                .into_iter()
                .zip(&digits[l - 1])
                .map(|(a, b)| a + b)
                .collect();
        }
        AffineMap {
            linear: self.matrix.inverse_power(n),
            translation: t,
        }
    }

    /// Table `Aᵗ·u_j` for `t < n`, as `i128` vectors. Requires integer digits.
    pub(crate) fn power_table(&self, n: usize) -> Result<Vec<Vec<Vec<i128>>>, SystemError> {
        let mut row: Vec<Vec<i64>> = self.integer_digits();
        let mut table = Vec::with_capacity(n);
        for t in 0..n {
            if t > 0 {
                row = row
                    .iter()
                    .map(|v| self.matrix.apply_i64(v).ok_or(SystemError::Overflow))
                    .collect::<Result<_, _>>()?;
            }
            table.push(row.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect());
        }
        Ok(table)
    }

    /// All `Nⁿ` sums `Σ_{t<n} Aᵗ u_{j_{t+1}}`, with a first witness per value.
    pub fn digit_sums(&self, n: usize, budget: u64) -> Result<DigitSumSet, SystemError> {
        self.require_normalized()?;
        let total = check_budget(self.len(), n, budget)?;
        let table = self.power_table(n)?;
        let mut sums: IndexMap<Vec<i64>, SumEntry> = IndexMap::new();
        let mut first_collision = None;
        walk_words(&table, self.len(), |rank, letters, sum| {
            let key: Vec<i64> = match sum.iter().map(|&x| i64::try_from(x).ok()).collect() {
                Some(k) => k,
                None => return ControlFlow::Break(()),
            };
            let entry = sums.entry(key).or_insert(SumEntry {
                first_rank: rank,
                multiplicity: 0,
            });
            entry.multiplicity += 1;
            if entry.multiplicity == 2 && first_collision.is_none() {
                first_collision = Some((entry.first_rank, Word { letters: to_letters(letters) }));
            }
            ControlFlow::Continue(())
        })?;
        let seen: u64 = sums.values().map(|e| e.multiplicity).sum();
        if seen != total {
            return Err(SystemError::Overflow);
        }
        let alphabet = self.len();
        Ok(DigitSumSet {
            depth: n,
            alphabet,
            total,
            sums,
            first_collision: first_collision.map(|(r, w)| (Word::from_rank(r, n, alphabet), w)),
        })
    }

    /// First colliding pair of sum-words at depth `n` in lexicographic order,
    /// stopping at the first collision.
    pub fn first_sum_collision(&self, n: usize, budget: u64) -> Result<Option<(Word, Word)>, SystemError> {
        self.require_normalized()?;
        check_budget(self.len(), n, budget)?;
        let table = self.power_table(n)?;
        let mut seen: HashMap<Vec<i128>, u64> = HashMap::new();
        let mut hit = None;
        walk_words(&table, self.len(), |rank, letters, sum| {
            if let Some(&first) = seen.get(sum) {
                hit = Some((first, Word { letters: to_letters(letters) }));
                return ControlFlow::Break(());
            }
            seen.insert(sum.to_vec(), rank);
            ControlFlow::Continue(())
        })?;
        Ok(hit.map(|(r, w)| (Word::from_rank(r, n, self.len()), w)))
    }
}

fn to_letters(zero_based: &[usize]) -> Vec<usize> {
    zero_based.iter().map(|l| l + 1).collect()
}

pub(crate) fn check_budget(alphabet: usize, n: usize, budget: u64) -> Result<u64, SystemError> {
    let requested = (alphabet as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if requested > budget as u128 {
        return Err(SystemError::BudgetExceeded { requested, budget });
    }
    Ok(requested as u64)
}

/// Visit `Σ_t table[t][letter_t]` for every word in lexicographic order (first
/// position most significant). Letters passed to `visit` are 0-based.
pub(crate) fn walk_words<F>(table: &[Vec<Vec<i128>>], alphabet: usize, mut visit: F) -> Result<(), SystemError>
where
    F: FnMut(u64, &[usize], &[i128]) -> ControlFlow<()>,
{
    let n = table.len();
    if n == 0 {
        return Ok(());
    }
    let d = table[0][0].len();
    let mut letters = vec![0usize; n];
    let mut partial = vec![0i128; (n + 1) * d];
    let mut from = 0;
    let mut rank: u64 = 0;
    loop {
        for t in from..n {
            let add = &table[t][letters[t]];
            for i in 0..d {
                partial[(t + 1) * d + i] = partial[t * d + i]
                    .checked_add(add[i])
                    .ok_or(SystemError::Overflow)?;
            }
        }
        if visit(rank, &letters, &partial[n * d..]).is_break() {
            return Ok(());
        }
        rank += 1;
        let mut p = n;
        loop {
            if p == 0 {
                return Ok(());
            }
            p -= 1;
            if letters[p] + 1 < alphabet {
                letters[p] += 1;
                break;
            }
            letters[p] = 0;
        }
        from = p;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SumEntry {
    pub first_rank: u64,
    pub multiplicity: u64,
}

/// The multiset `D_n`, stored as distinct values with multiplicities.
#[derive(Clone, Debug)]
pub struct DigitSumSet {
    depth: usize,
    alphabet: usize,
    total: u64,
    sums: IndexMap<Vec<i64>, SumEntry>,
    first_collision: Option<(Word, Word)>,
}

impl DigitSumSet {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `Nⁿ`, the multiset size.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct_count(&self) -> usize {
        self.sums.len()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.sums.contains_key(v)
    }

    pub fn first_witness(&self, v: &[i64]) -> Option<Word> {
        self.sums
            .get(v)
            .map(|e| Word::from_rank(e.first_rank, self.depth, self.alphabet))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &SumEntry)> {
        self.sums.iter()
    }

    /// `(first witness, colliding word)` for the first repeated value.
    pub fn first_collision(&self) -> Option<&(Word, Word)> {
        self.first_collision.as_ref()
    }
}
