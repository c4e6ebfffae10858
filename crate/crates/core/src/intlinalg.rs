//! Exact integer and rational linear algebra for expanding integer matrices.
//!
//! Everything here runs on arbitrary-precision integers. The operator norm used
//! throughout is the induced ∞-norm (maximum absolute row sum), which is
//! submultiplicative and dominates the entrywise maximum, so the geometric
//! tail bounds derived from it are valid in every dimension.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of powers tried by [`certify_expanding`].
pub const DEFAULT_MAX_ITER: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix must be square and non-empty")]
    NotSquare,
    #[error("matrix is not invertible (det = 0)")]
    NotInvertible,
    #[error("|det A| = {0}, but at least 3 is required")]
    DeterminantTooSmall(BigInt),
    #[error("|det A| = {0} does not fit in 64 bits")]
    DeterminantTooLarge(BigInt),
    #[error("no k <= {max_iter} with ||A^-k|| < 1/2; expansion is inconclusive")]
    NotCertifiedExpanding { max_iter: u32 },
}

/// Square matrix over the integers, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = BigInt::one();
        }
        IntMatrix { dim, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(LinalgError::NotSquare);
        }
        let data = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        Ok(IntMatrix { dim, data })
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(LinalgError::NotSquare);
        }
        Ok(IntMatrix {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.dim + j]
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Rows as `i64`, or `None` if an entry does not fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut data = vec![BigInt::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.get(k, j);
                }
            }
        }
        IntMatrix { dim: d, data }
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.dim, x.len());
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let d = self.dim;
        let mut data = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                data.push(self.get(i, j).clone());
            }
        }
        IntMatrix { dim: d, data }
    }

    pub fn pow(&self, n: u32) -> IntMatrix {
        let mut acc = IntMatrix::identity(self.dim);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> BigInt {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|x| x.abs()).sum::<BigInt>())
            .max()
            .unwrap_or_default()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let d = self.dim;
        let mut m = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if m[k * d + k].is_zero() {
                let Some(p) = (k + 1..d).find(|&i| !m[i * d + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..d {
                    m.swap(k * d + j, p * d + j);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &m[i * d + j] * &m[k * d + k] - &m[i * d + k] * &m[k * d + j];
                    m[i * d + j] = v / &prev;
                }
            }
            prev = m[k * d + k].clone();
        }
        sign * &m[d * d - 1]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.dim {
                self.data.swap(a * self.dim + j, b * self.dim + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.dim {
                self.data.swap(i * self.dim + a, i * self.dim + b);
            }
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.dim {
            let v = self.get(src, j) * factor;
            *self.get_mut(dst, j) += v;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.dim {
            let v = self.get(i, src) * factor;
            *self.get_mut(i, dst) += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.dim {
            let v = -self.get(i, j).clone();
            *self.get_mut(i, j) = v;
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.data.chunks(self.dim).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Square matrix over the rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    dim: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn identity(dim: usize) -> Self {
        RatMatrix::scaled(&IntMatrix::identity(dim), &BigInt::one())
    }

    /// `m / denom` entrywise.
    pub fn scaled(m: &IntMatrix, denom: &BigInt) -> Self {
        RatMatrix {
            dim: m.dim,
            data: m
                .data
                .iter()
                .map(|x| BigRational::new(x.clone(), denom.clone()))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<BigRational>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut data = vec![BigRational::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.get(k, j);
                }
            }
        }
        RatMatrix { dim: d, data }
    }

    pub fn mul_vec(&self, x: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.dim, x.len());
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_int(&self, m: &IntMatrix) -> RatMatrix {
        self.mul(&RatMatrix::scaled(m, &BigInt::one()))
    }

    pub fn norm_inf(&self) -> BigRational {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|x| x.abs()).sum::<BigRational>())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        RatMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Solve `self · x = b`; `None` if singular.
    pub fn solve(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut rhs = b.to_vec();
        for col in 0..d {
            let p = (col..d).find(|&r| !a[r * d + col].is_zero())?;
            if p != col {
                for j in 0..d {
                    a.swap(col * d + j, p * d + j);
                }
                rhs.swap(col, p);
            }
            for r in 0..d {
                if r == col || a[r * d + col].is_zero() {
                    continue;
                }
                let f = &a[r * d + col] / &a[col * d + col];
                for j in col..d {
                    let t = &f * &a[col * d + j];
                    a[r * d + j] -= t;
                }
                let t = &f * &rhs[col];
                rhs[r] -= t;
            }
        }
        Some((0..d).map(|i| &rhs[i] / &a[i * d + i]).collect())
    }
}

/// Smith normal form `U·A·V = S` with `S = diag(s_1 | s_2 | ... | s_d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithData {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub diagonal: Vec<BigInt>,
}

impl SmithData {
    pub fn s_matrix(&self) -> IntMatrix {
        let d = self.diagonal.len();
        let mut m = IntMatrix {
            dim: d,
            data: vec![BigInt::zero(); d * d],
        };
        for (i, s) in self.diagonal.iter().enumerate() {
            *m.get_mut(i, i) = s.clone();
        }
        m
    }

    /// Diagonal entries as machine integers; each divides `|det A|`.
    pub fn moduli(&self) -> Vec<i64> {
        self.diagonal
            .iter()
            .map(|s| s.to_i64().expect("Smith invariant divides |det A|"))
            .collect()
    }
}

/// Residues of `U·x` modulo the Smith diagonal: a complete invariant of the
/// coset `x + Aℤᵈ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CosetLabel {
    pub residues: Vec<i64>,
}

/// A `d×d` integer matrix whose inverse powers provably decay.
#[derive(Clone, Debug)]
pub struct ExpandingMatrix {
    entries: IntMatrix,
    det: BigInt,
    det_abs: u64,
    adjugate: IntMatrix,
    inv: RatMatrix,
    expansion_index: u32,
    contraction: BigRational,
    smith: SmithData,
}

impl PartialEq for ExpandingMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for ExpandingMatrix {}

/// Certify that `entries` is expanding: find the least `k <= max_iter` with
/// `||A^-k|| < 1/2`.
pub fn certify_expanding(entries: &[Vec<i64>], max_iter: u32) -> Result<ExpandingMatrix, LinalgError> {
    ExpandingMatrix::certify(IntMatrix::from_rows(entries)?, max_iter)
}

/// Smith normal form of a certified matrix (computed once at certification).
pub fn smith_normal_form(m: &ExpandingMatrix) -> SmithData {
    m.smith.clone()
}

/// Coset label of an integer vector in `ℤᵈ/Aℤᵈ`.
pub fn coset_label(x: &[i64], m: &ExpandingMatrix) -> CosetLabel {
    m.coset_label(x)
}

/// Upper bound on `Σ_{n >= from_n} ||A^-n||`.
pub fn inverse_power_tail(m: &ExpandingMatrix, from_n: u32) -> BigRational {
    m.inverse_power_tail(from_n)
}

impl ExpandingMatrix {
    pub fn certify(entries: IntMatrix, max_iter: u32) -> Result<Self, LinalgError> {
        let det = entries.det();
        if det.is_zero() {
            return Err(LinalgError::NotInvertible);
        }
        let abs = det.abs();
        if abs <= BigInt::from(2) {
            return Err(LinalgError::DeterminantTooSmall(abs));
        }
        let det_abs = abs.to_u64().ok_or(LinalgError::DeterminantTooLarge(abs.clone()))?;
        let adjugate = adjugate(&entries, &det);

        // ||A^-k|| = ||adj^k|| / N^k; look for 2·||adj^k|| < N^k.
        let mut power = IntMatrix::identity(entries.dim);
        let mut nk = BigInt::one();
        let mut found = None;
        for k in 1..=max_iter {
            power = power.mul(&adjugate);
            nk *= &abs;
            let norm = power.norm_inf();
            if BigInt::from(2) * &norm < nk {
                found = Some((k, BigRational::new(norm, nk.clone())));
                break;
            }
        }
        let (expansion_index, contraction) =
            found.ok_or(LinalgError::NotCertifiedExpanding { max_iter })?;

        let inv = RatMatrix::scaled(&adjugate, &det);
        let smith = compute_smith(&entries);
        Ok(ExpandingMatrix {
            entries,
            det,
            det_abs,
            adjugate,
            inv,
            expansion_index,
            contraction,
            smith,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.dim
    }

    pub fn entries(&self) -> &IntMatrix {
        &self.entries
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    /// `N = |det A|`.
    pub fn det_abs(&self) -> u64 {
        self.det_abs
    }

    pub fn inv(&self) -> &RatMatrix {
        &self.inv
    }

    /// `det(A)·A⁻¹`, an integer matrix.
    pub fn adjugate(&self) -> &IntMatrix {
        &self.adjugate
    }

    pub fn expansion_index(&self) -> u32 {
        self.expansion_index
    }

    /// `||A^-k||` for `k` the expansion index; strictly below 1/2.
    pub fn contraction(&self) -> &BigRational {
        &self.contraction
    }

    pub fn smith(&self) -> &SmithData {
        &self.smith
    }

    pub fn rows_i64(&self) -> Vec<Vec<i64>> {
        self.entries.to_i64_rows().expect("constructed from i64 rows")
    }

    /// `A⁻ⁿ` as exact rationals.
    pub fn inverse_power(&self, n: u32) -> RatMatrix {
        let denom = self.det.pow(n);
        RatMatrix::scaled(&self.adjugate.pow(n), &denom)
    }

    pub fn inverse_power_norm(&self, n: u32) -> BigRational {
        BigRational::new(self.adjugate.pow(n).norm_inf(), BigInt::from(self.det_abs).pow(n))
    }

    /// Norms `||A^-n||` for `n` in `from..from+count`.
    fn inverse_power_norms(&self, from: u32, count: u32) -> Vec<BigRational> {
        let mut power = self.adjugate.pow(from);
        let mut denom = BigInt::from(self.det_abs).pow(from);
        let mut out = Vec::with_capacity(count as usize);
        for i in 0..count {
            if i > 0 {
                power = power.mul(&self.adjugate);
                denom *= self.det_abs;
            }
            out.push(BigRational::new(power.norm_inf(), denom.clone()));
        }
        out
    }

    /// Upper bound on `Σ_{n >= from_n} ||A^-n||`: a block of `k` consecutive
    /// norms divided by `1 - ||A^-k||`.
    pub fn inverse_power_tail(&self, from_n: u32) -> BigRational {
        let block: BigRational = self
            .inverse_power_norms(from_n, self.expansion_index)
            .into_iter()
            .sum();
        block / (BigRational::one() - &self.contraction)
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.entries.mul_vec(x)
    }

    /// `A·x` with overflow checking.
    pub fn apply_i64(&self, x: &[i64]) -> Option<Vec<i64>> {
        let d = self.dim();
        let mut out = vec![0i64; d];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc: i64 = 0;
            for (j, xj) in x.iter().enumerate() {
                let a = self.entries.get(i, j).to_i64()?;
                acc = acc.checked_add(a.checked_mul(*xj)?)?;
            }
            *o = acc;
        }
        Some(out)
    }

    /// `A⁻¹x` if it is an integer vector.
    pub fn divide(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let y = self.adjugate.mul_vec(x);
        let mut out = Vec::with_capacity(y.len());
        for v in y {
            let (q, r) = v.div_rem(&self.det);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }

    pub fn divide_i64(&self, x: &[i64]) -> Option<Vec<i64>> {
        let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.divide(&big)?.into_iter().map(|v| v.to_i64()).collect()
    }

    /// `x ∈ Aℤᵈ`.
    pub fn in_image(&self, x: &[BigInt]) -> bool {
        self.divide(x).is_some()
    }

    pub fn apply_inverse(&self, x: &[BigRational]) -> Vec<BigRational> {
        self.inv.mul_vec(x)
    }

    pub fn coset_label_big(&self, x: &[BigInt]) -> CosetLabel {
        let ux = self.smith.u.mul_vec(x);
        let residues = ux
            .iter()
            .zip(&self.smith.diagonal)
            .map(|(v, s)| v.mod_floor(s).to_i64().expect("residue below |det A|"))
            .collect();
        CosetLabel { residues }
    }

    pub fn coset_label(&self, x: &[i64]) -> CosetLabel {
        let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.coset_label_big(&big)
    }
}

/// `det(A)·A⁻¹` via Gauss–Jordan over the rationals.
fn adjugate(m: &IntMatrix, det: &BigInt) -> IntMatrix {
    let d = m.dim;
    let mut a: Vec<BigRational> = m.data.iter().map(|x| BigRational::from(x.clone())).collect();
    let mut inv: Vec<BigRational> = IntMatrix::identity(d)
        .data
        .into_iter()
        .map(BigRational::from)
        .collect();
    for col in 0..d {
        let p = (col..d)
            .find(|&r| !a[r * d + col].is_zero())
            .expect("nonsingular matrix");
        if p != col {
            for j in 0..d {
                a.swap(col * d + j, p * d + j);
                inv.swap(col * d + j, p * d + j);
            }
        }
        let pivot = a[col * d + col].clone();
        for j in 0..d {
            a[col * d + j] /= &pivot;
            inv[col * d + j] /= &pivot;
        }
        for r in 0..d {
            if r == col || a[r * d + col].is_zero() {
                continue;
            }
            let f = a[r * d + col].clone();
            for j in 0..d {
                let t = &f * &a[col * d + j];
                a[r * d + j] -= t;
                let t = &f * &inv[col * d + j];
                inv[r * d + j] -= t;
            }
        }
    }
    let data = inv
        .into_iter()
        .map(|x| {
            let y = x * BigRational::from(det.clone());
            debug_assert!(y.is_integer());
            y.to_integer()
        })
        .collect();
    IntMatrix { dim: d, data }
}

/// Smith normal form with a fixed pivot rule: smallest nonzero absolute value
/// in the trailing block, ties broken by row-major position.
fn compute_smith(a: &IntMatrix) -> SmithData {
    let d = a.dim;
    let mut s = a.clone();
    let mut u = IntMatrix::identity(d);
    let mut v = IntMatrix::identity(d);
    for t in 0..d {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..d {
                for j in t..d {
                    let x = s.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < s.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let (pi, pj) = best.expect("nonsingular matrix has a nonzero pivot");
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let pivot = s.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..d {
                let q = s.get(i, t).div_floor(&pivot);
                if !q.is_zero() {
                    s.add_row(i, t, &-q.clone());
                    u.add_row(i, t, &-q);
                }
                clean &= s.get(i, t).is_zero();
            }
            for j in t + 1..d {
                let q = s.get(t, j).div_floor(&pivot);
                if !q.is_zero() {
                    s.add_col(j, t, &-q.clone());
                    v.add_col(j, t, &-q);
                }
                clean &= s.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..d)
                .flat_map(|i| (t + 1..d).map(move |j| (i, j)))
                .find(|&(i, j)| !s.get(i, j).is_multiple_of(&pivot));
            match offender {
                Some((i, _)) => {
                    s.add_row(t, i, &BigInt::one());
                    u.add_row(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    let diagonal = (0..d).map(|i| s.get(i, i).clone()).collect();
    SmithData { u, v, diagonal }
}
