//! Character sums, the `V_w` membership test, and evaluation of the Fourier
//! transform of the uniform self-affine measure `ν`.
//!
//! Conventions: `ν̂(ξ) = ∫ e^{i⟨x,ξ⟩} dν(x)` with no `2π` in the kernel.
//! `S_n(w) = Σ_j e^{2πi⟨Aⁿu_j,w⟩}` and the bi-infinite product is indexed as
//! `Π_n g_n(w)` with `g_n(w) = S_{−n}(w) / N`, i.e. the exponent carries
//! `A^{−n}`. With this indexing `ν̂(2π(Aᵀ)ʳw) = Π_{n ≥ −r} g_n(w)`.

mod cyclotomic;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{attractor_radius, ChaosGame};
use crate::intlinalg::IntMatrix;
use crate::system::{rational_to_f64, AffineSystem, SystemError};

pub(crate) use cyclotomic::prime_factors;

/// Largest radical of a denominator for which zero tests stay exact.
pub const DEFAULT_Q_MAX: u64 = 10_000;
/// Default search radius `‖w‖∞ <= W_MAX` for singularity certificates.
pub const DEFAULT_W_MAX: i64 = 5;
/// Chaos-game steps per sample.
pub const BURN_IN: usize = 100;
pub const MIN_SAMPLES: usize = 1_000;

const NUMERIC_MARGIN: f64 = 1e-9;

/// Rational upper bound `710/113 > 2π`.
fn two_pi_upper() -> BigRational {
    BigRational::new(710.into(), 113.into())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("frequency must be nonzero")]
    ZeroFrequency,
    #[error("frequency has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("S_{n} is numerically indistinguishable from zero and its denominator is too large for an exact test")]
    DenominatorOverflow { n: i64 },
    #[error("truncation depth must be at least 1")]
    InvalidDepth,
    #[error("at least {MIN_SAMPLES} samples are required")]
    TooFewSamples,
    #[error("precision must be positive")]
    InvalidPrecision,
}

/// Outcome of a zero test on a root-of-unity sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    /// Denominator too large for the exact test; the value is far from zero
    /// numerically but that is not a proof.
    NumericOnly,
}

/// `S_n(w)` stored exactly as `Σ_j ζ_q^{a_j}` alongside its numeric value.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterSum {
    pub n: i64,
    pub w: Vec<i64>,
    pub denominator: BigInt,
    pub exponents: Vec<BigInt>,
    pub value: Complex64,
    pub zero: ZeroTest,
}

impl CharacterSum {
    pub fn is_exact(&self) -> bool {
        self.zero != ZeroTest::NumericOnly
    }
}

/// Proof that `S_n(w) ≠ 0` for every `n ∈ ℤ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularityCertificate {
    pub w: Vec<i64>,
    /// `[n₋, n₊]`, checked exactly.
    pub window: (i64, i64),
    pub window_sums: Vec<CharacterSum>,
    /// Lower bound on `|Π_n S_n / N|` over all `n`.
    pub product_lower_bound: BigRational,
    /// Bound on `Σ_{n < n₋} |S_n / N − 1|`.
    pub truncation_error: BigRational,
}

impl SingularityCertificate {
    pub const ABOVE_REASON: &'static str = "integer phases";
    pub const BELOW_REASON: &'static str = "perturbation bound";
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    Certified(SingularityCertificate),
    FailingPower { n: i64, sum: CharacterSum },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SingularitySearch {
    Found(SingularityCertificate),
    /// Nothing certified within the radius. Not a proof of nonexistence.
    NotFound { tried: usize, inconclusive: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductValue {
    pub w: Vec<i64>,
    pub from: i64,
    /// Last factor index included before the tail bound takes over.
    pub last: i64,
    pub value: Complex64,
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformValue {
    pub xi: Vec<f64>,
    pub depth: usize,
    pub value: Complex64,
    /// Bound on `|value − ν̂(ξ)|`.
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalValue {
    pub xi: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub estimate: Complex64,
    pub std_error: f64,
}

/// Powers `(adjᵀ)^k w` and `det^k`, so that
/// `⟨A^{−k}v, w⟩ = ⟨v, (adjᵀ)^k w⟩ / det^k`.
struct DualPowers {
    adj_t: IntMatrix,
    det: BigInt,
    ys: Vec<Vec<BigInt>>,
    dets: Vec<BigInt>,
}

impl DualPowers {
    fn new(sys: &AffineSystem, w: &[i64]) -> Self {
        DualPowers {
            adj_t: sys.matrix().adjugate().transpose(),
            det: sys.matrix().det().clone(),
            ys: vec![w.iter().map(|&x| BigInt::from(x)).collect()],
            dets: vec![BigInt::one()],
        }
    }

    fn get(&mut self, k: usize) -> (&[BigInt], &BigInt) {
        while self.ys.len() <= k {
            let y = self.adj_t.mul_vec(self.ys.last().unwrap());
            let d = self.dets.last().unwrap() * &self.det;
            self.ys.push(y);
            self.dets.push(d);
        }
        (&self.ys[k], &self.dets[k])
    }

    /// `⟨Aⁿu, w⟩ mod 1` in `[0, 1)` for the digit `u = A^{−s}v`.
    fn phase(&mut self, s: u32, v: &[i64], n: i64) -> BigRational {
        let k = s as i64 - n;
        if k <= 0 {
            return BigRational::zero();
        }
        let (y, d) = self.get(k as usize);
        let num: BigInt = v.iter().zip(y).map(|(&a, b)| BigInt::from(a) * b).sum();
        let x = BigRational::new(num, d.clone());
        &x - x.floor()
    }

    fn phases(&mut self, sys: &AffineSystem, n: i64) -> Vec<BigRational> {
        sys.digits().iter().map(|u| self.phase(u.scale, &u.vec, n)).collect()
    }
}

fn check_frequency(sys: &AffineSystem, w: &[i64]) -> Result<(), FourierError> {
    if w.len() != sys.dim() {
        return Err(FourierError::DimensionMismatch { expected: sys.dim(), found: w.len() });
    }
    if w.iter().all(|&x| x == 0) {
        return Err(FourierError::ZeroFrequency);
    }
    Ok(())
}

fn numeric_sum(phases: &[BigRational]) -> Complex64 {
    phases
        .iter()
        .map(|t| Complex64::from_polar(1.0, std::f64::consts::TAU * rational_to_f64(t)))
        .sum()
}

fn build_sum(
    phases: Vec<BigRational>,
    n: i64,
    w: &[i64],
    primes: &[u64],
    q_max: u64,
) -> Result<CharacterSum, FourierError> {
    let q = phases.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.denom()));
    let exponents: Vec<BigInt> = phases.iter().map(|t| t.numer() * (&q / t.denom())).collect();
    let value = numeric_sum(&phases);
    let zero = match cyclotomic::root_sum_vanishes(&exponents, &q, primes, q_max) {
        Some(true) => ZeroTest::Zero,
        Some(false) => ZeroTest::NonZero,
        None if perturbation_nonzero(&phases) => ZeroTest::NonZero,
        None if value.norm() >= NUMERIC_MARGIN => ZeroTest::NumericOnly,
        None => return Err(FourierError::DenominatorOverflow { n }),
    };
    Ok(CharacterSum { n, w: w.to_vec(), denominator: q, exponents, value, zero })
}

/// `|Σ e^{2πiθ_j} − N| <= 2π Σ dist(θ_j, ℤ)`, so the sum is nonzero when the
/// right side is below `N`.
fn perturbation_nonzero(phases: &[BigRational]) -> bool {
    let half = BigRational::new(1.into(), 2.into());
    let total: BigRational = phases
        .iter()
        .map(|t| if *t > half { BigRational::one() - t } else { t.clone() })
        .sum();
    two_pi_upper() * total < BigRational::from_integer(phases.len().into())
}

/// `S_n(w) = Σ_j e^{2πi⟨Aⁿu_j,w⟩}` with an exact zero test.
pub fn character_sum(sys: &AffineSystem, w: &[i64], n: i64) -> Result<CharacterSum, FourierError> {
    character_sum_with(sys, w, n, DEFAULT_Q_MAX)
}

pub fn character_sum_with(sys: &AffineSystem, w: &[i64], n: i64, q_max: u64) -> Result<CharacterSum, FourierError> {
    check_frequency(sys, w)?;
    let primes = prime_factors(sys.matrix().det_abs());
    let phases = DualPowers::new(sys, w).phases(sys, n);
    build_sum(phases, n, w, &primes, q_max)
}

fn sup_norm(v: &[BigRational]) -> BigRational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigRational::zero)
}

/// `U = ‖w‖₁ · Σ_j ‖u_j‖∞`, so `Σ_j |⟨A^{−k}u_j, w⟩| <= U ‖A^{−k}‖`.
fn phase_mass(sys: &AffineSystem, w: &[i64]) -> BigRational {
    let w1: i64 = w.iter().map(|x| x.abs()).sum();
    let digits: BigRational = sys.rational_digits().iter().map(|u| sup_norm(u)).sum();
    digits * BigRational::from_integer(w1.into())
}

/// Decide whether `S_n(w) ≠ 0` for all `n`. Powers `n >= 0` give integer
/// phases; below `n₋` the perturbation bound applies; the finite window in
/// between is checked exactly.
pub fn v_w_membership(sys: &AffineSystem, w: &[i64]) -> Result<Membership, FourierError> {
    v_w_membership_with(sys, w, DEFAULT_Q_MAX)
}

pub fn v_w_membership_with(sys: &AffineSystem, w: &[i64], q_max: u64) -> Result<Membership, FourierError> {
    sys.require_normalized()?;
    check_frequency(sys, w)?;
    let m = sys.matrix();
    let big_n = BigRational::from_integer(sys.len().into());
    let mass = phase_mass(sys, w);
    let mut k: u32 = 1;
    while two_pi_upper() * m.inverse_power_tail(k) * &mass >= big_n {
        k += 1;
    }
    let n_minus = -(k as i64);
    let primes = prime_factors(m.det_abs());
    let mut powers = DualPowers::new(sys, w);
    let mut sums = Vec::new();
    let mut bound = BigRational::one();
    for n in (n_minus..=0).rev() {
        let sum = build_sum(powers.phases(sys, n), n, w, &primes, q_max)?;
        match sum.zero {
            ZeroTest::Zero => return Ok(Membership::FailingPower { n, sum }),
            ZeroTest::NumericOnly => return Err(FourierError::DenominatorOverflow { n }),
            ZeroTest::NonZero => {}
        }
        let margin = sys.len() as f64 * 1e-15 + 1e-12;
        let factor = (sum.value.norm() / sys.len() as f64 - margin).max(0.0);
        bound *= BigRational::from_float(factor).unwrap_or_else(BigRational::zero);
        sums.push(sum);
    }
    let truncation_error = two_pi_upper() * m.inverse_power_tail(k + 1) * &mass / &big_n;
    let product_lower_bound = round_down(bound * (BigRational::one() - &truncation_error));
    Ok(Membership::Certified(SingularityCertificate {
        w: w.to_vec(),
        window: (n_minus, 0),
        window_sums: sums,
        product_lower_bound,
        truncation_error,
    }))
}

/// Floor to 15 decimals when that stays positive.
fn round_down(x: BigRational) -> BigRational {
    let scale = BigInt::from(10u64.pow(15));
    let r = BigRational::new((&x * BigRational::from_integer(scale.clone())).floor().to_integer(), scale);
    if r.is_positive() {
        r
    } else {
        x
    }
}

/// Frequencies with `‖w‖∞ <= radius`, by sup norm then lexicographically,
/// one of each `±w` pair (the sums are complex conjugates).
pub fn frequencies(dim: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for r in 1..=radius {
        let side = (2 * r + 1) as usize;
        for idx in 0..side.pow(dim as u32) {
            let mut rest = idx;
            let mut w = vec![0i64; dim];
            for slot in w.iter_mut().rev() {
                *slot = (rest % side) as i64 - r;
                rest /= side;
            }
            let sup = w.iter().map(|x| x.abs()).max().unwrap_or(0);
            let first = w.iter().find(|&&x| x != 0).copied().unwrap_or(0);
            if sup == r && first > 0 {
                out.push(w);
            }
        }
    }
    out
}

/// First `w` with `‖w‖∞ <= w_max` that certifies membership in `V_w`.
pub fn search_singularity_certificate(sys: &AffineSystem, w_max: i64) -> Result<SingularitySearch, FourierError> {
    sys.require_normalized()?;
    let mut tried = 0;
    let mut inconclusive = 0;
    for w in frequencies(sys.dim(), w_max) {
        tried += 1;
        match v_w_membership(sys, &w) {
            Ok(Membership::Certified(c)) => return Ok(SingularitySearch::Found(c)),
            Ok(Membership::FailingPower { .. }) => {}
            Err(FourierError::DenominatorOverflow { .. }) => inconclusive += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(SingularitySearch::NotFound { tried, inconclusive })
}

/// `Π_{n >= from} g_n(w)` with `g_n(w) = (1/N) Σ_j e^{2πi⟨A^{−n}u_j,w⟩}`,
/// truncated once the tail contributes at most `precision / 2`.
pub fn fourier_product(sys: &AffineSystem, w: &[i64], from: i64, precision: f64) -> Result<ProductValue, FourierError> {
    if w.len() != sys.dim() {
        return Err(FourierError::DimensionMismatch { expected: sys.dim(), found: w.len() });
    }
    if precision.is_nan() || precision <= 0.0 {
        return Err(FourierError::InvalidPrecision);
    }
    let m = sys.matrix();
    let big_n = sys.len() as f64;
    let scale = two_pi_upper() * phase_mass(sys, w) / BigRational::from_integer(sys.len().into());
    // Factors with n <= −max_scale have integer phases and equal 1.
    let start = from.max(1 - sys.max_scale() as i64);
    let mut last = start.max(1);
    loop {
        let tau = rational_to_f64(&(&scale * m.inverse_power_tail(last as u32 + 1)));
        if tau.exp_m1() <= precision / 2.0 {
            break;
        }
        last += 1;
    }
    let primes = prime_factors(m.det_abs());
    let mut powers = DualPowers::new(sys, w);
    let mut value = Complex64::new(1.0, 0.0);
    for n in start..=last {
        let phases = powers.phases(sys, -n);
        if phases.iter().all(Zero::is_zero) {
            continue;
        }
        let q = phases.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.denom()));
        let exps: Vec<BigInt> = phases.iter().map(|t| t.numer() * (&q / t.denom())).collect();
        if cyclotomic::root_sum_vanishes(&exps, &q, &primes, DEFAULT_Q_MAX) == Some(true) {
            return Ok(ProductValue { w: w.to_vec(), from, last: n, value: Complex64::new(0.0, 0.0), error_bound: 0.0 });
        }
        value *= numeric_sum(&phases) / big_n;
    }
    let tau = rational_to_f64(&(&scale * m.inverse_power_tail(last as u32 + 1)));
    let rounding = (last - start + 1).max(0) as f64 * 4.0 * f64::EPSILON * big_n;
    Ok(ProductValue { w: w.to_vec(), from, last, value, error_bound: tau.exp_m1() + rounding })
}

/// The full bi-infinite product for a certified `w`; equals
/// `lim_r ν̂(2π(Aᵀ)ʳw)`.
pub fn fourier_product_limit(
    cert: &SingularityCertificate,
    sys: &AffineSystem,
    precision: f64,
) -> Result<ProductValue, FourierError> {
    fourier_product(sys, &cert.w, i64::MIN / 2, precision)
}

fn check_xi(sys: &AffineSystem, xi: &[f64]) -> Result<(), FourierError> {
    if xi.len() != sys.dim() {
        return Err(FourierError::DimensionMismatch { expected: sys.dim(), found: xi.len() });
    }
    Ok(())
}

/// `Π_{n<m} (1/N) Σ_j e^{i⟨A^{−n}u_j,ξ⟩}`; the omitted factor
/// `ν̂((Aᵀ)^{−m}ξ)` is within `‖A^{−m}‖ R ‖ξ‖₁` of 1, `R` the attractor radius.
pub fn transform_truncated(sys: &AffineSystem, xi: &[f64], m: usize) -> Result<TransformValue, FourierError> {
    check_xi(sys, xi)?;
    if m == 0 {
        return Err(FourierError::InvalidDepth);
    }
    let mat = sys.matrix();
    let big_n = sys.len() as f64;
    let mut digits = sys.rational_digits();
    let mut value = Complex64::new(1.0, 0.0);
    for _ in 0..m {
        let factor: Complex64 = digits
            .iter()
            .map(|u| {
                let t: f64 = u.iter().zip(xi).map(|(a, x)| rational_to_f64(a) * x).sum();
                Complex64::from_polar(1.0, t)
            })
            .sum();
        value *= factor / big_n;
        digits = digits.iter().map(|u| mat.apply_inverse(u)).collect();
    }
    let xi1: f64 = xi.iter().map(|x| x.abs()).sum();
    let radius = rational_to_f64(&attractor_radius(sys));
    let norm = rational_to_f64(&mat.inverse_power_norm(m as u32));
    let tail_bound = norm * radius * xi1 + m as f64 * 8.0 * f64::EPSILON;
    Ok(TransformValue { xi: xi.to_vec(), depth: m, value, tail_bound })
}

/// Monte Carlo estimate of `ν̂(ξ)` from independent chaos-game samples.
pub fn transform_empirical(sys: &AffineSystem, xi: &[f64], samples: usize, seed: u64) -> Result<EmpiricalValue, FourierError> {
    check_xi(sys, xi)?;
    if samples < MIN_SAMPLES {
        return Err(FourierError::TooFewSamples);
    }
    let mut game = ChaosGame::new(sys, ChaCha8Rng::seed_from_u64(seed));
    let mut x = vec![0.0; sys.dim()];
    let (mut sc, mut ss, mut sc2, mut ss2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        game.sample(&mut x, BURN_IN);
        let t: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        let (s, c) = t.sin_cos();
        sc += c;
        ss += s;
        sc2 += c * c;
        ss2 += s * s;
    }
    let n = samples as f64;
    let (mc, ms) = (sc / n, ss / n);
    let var = ((sc2 / n - mc * mc) + (ss2 / n - ms * ms)).max(0.0) * n / (n - 1.0);
    Ok(EmpiricalValue {
        xi: xi.to_vec(),
        samples,
        seed,
        estimate: Complex64::new(mc, ms),
        std_error: (var / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::certify_expanding;
    use crate::system::ScaledVector;

    fn sys1(digits: &[i64]) -> AffineSystem {
        let a = certify_expanding(&[vec![3]], 64).unwrap();
        let d: Vec<Vec<i64>> = digits.iter().map(|&x| vec![x]).collect();
        AffineSystem::from_integer_digits(a, &d).unwrap()
    }

    fn f1() -> AffineSystem {
        sys1(&[0, 1, 2])
    }

    fn f2() -> AffineSystem {
        sys1(&[0, 1, 3])
    }

    #[test]
    fn f1_cube_roots_vanish() {
        let s = character_sum(&f1(), &[1], -1).unwrap();
        assert_eq!(s.zero, ZeroTest::Zero);
        assert_eq!(s.denominator, BigInt::from(3));
        assert_eq!(s.exponents, vec![BigInt::from(0), BigInt::from(1), BigInt::from(2)]);
        assert!(s.value.norm() < 1e-12);
    }

    #[test]
    fn f2_sum_is_two_plus_zeta() {
        let s = character_sum(&f2(), &[1], -1).unwrap();
        assert_eq!(s.zero, ZeroTest::NonZero);
        assert_eq!(s.exponents, vec![BigInt::from(0), BigInt::from(1), BigInt::from(0)]);
        let zeta = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        assert!((s.value - (zeta + 2.0)).norm() < 1e-12);
        assert!((s.value.norm_sqr() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_powers_give_n() {
        for n in 0..4 {
            let s = character_sum(&f2(), &[2], n).unwrap();
            assert_eq!(s.zero, ZeroTest::NonZero);
            assert_eq!(s.denominator, BigInt::one());
            assert!((s.value - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_frequency_rejected() {
        assert_eq!(character_sum(&f2(), &[0], -1).unwrap_err(), FourierError::ZeroFrequency);
        assert_eq!(v_w_membership(&f2(), &[0]).unwrap_err(), FourierError::ZeroFrequency);
    }

    #[test]
    fn f1_fails_at_minus_one() {
        match v_w_membership(&f1(), &[1]).unwrap() {
            Membership::FailingPower { n, sum } => {
                assert_eq!(n, -1);
                assert_eq!(sum.zero, ZeroTest::Zero);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn f2_certificate() {
        let Membership::Certified(c) = v_w_membership(&f2(), &[1]).unwrap() else {
            panic!("expected certificate");
        };
        assert_eq!(c.window.1, 0);
        assert!(c.window.0 <= -1);
        assert!(c.product_lower_bound > BigRational::zero());
        assert!(c.truncation_error < BigRational::one());
        let p = fourier_product_limit(&c, &f2(), 1e-6).unwrap();
        assert!(p.error_bound <= 1e-6);
        assert!(p.value.norm() >= rational_to_f64(&c.product_lower_bound));
    }

    #[test]
    fn f1_product_has_zero_factor() {
        let p = fourier_product(&f1(), &[1], i64::MIN / 2, 1e-6).unwrap();
        assert_eq!(p.value, Complex64::new(0.0, 0.0));
        assert_eq!(p.last, 1);
    }

    #[test]
    fn all_zero_digits_give_unit_product() {
        let sys = sys1(&[0, 0, 0]);
        let p = fourier_product(&sys, &[1], i64::MIN / 2, 1e-6).unwrap();
        assert_eq!(p.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn product_matches_direct_sums() {
        // g_n = S_{−n} / N
        let sys = f2();
        let p = fourier_product(&sys, &[2], 1, 1e-9).unwrap();
        let mut direct = Complex64::new(1.0, 0.0);
        for n in 1..=p.last {
            direct *= character_sum(&sys, &[2], -n).unwrap().value / 3.0;
        }
        assert!((p.value - direct).norm() < 1e-12);
    }

    #[test]
    fn fractional_digits_shift_the_product() {
        // Same attractor scaled by 1/3: ν̂'(2πw) = ν̂(2πw/3).
        let a = certify_expanding(&[vec![3]], 64).unwrap();
        let digits = vec![
            ScaledVector::new(1, vec![0], &a).unwrap(),
            ScaledVector::new(1, vec![1], &a).unwrap(),
            ScaledVector::new(1, vec![3], &a).unwrap(),
        ];
        let scaled = AffineSystem::new(a, digits).unwrap();
        let p = fourier_product(&scaled, &[3], i64::MIN / 2, 1e-9).unwrap();
        let q = fourier_product(&f2(), &[1], i64::MIN / 2, 1e-9).unwrap();
        assert!((p.value - q.value).norm() < 1e-8);
    }

    #[test]
    fn truncated_transform_basics() {
        let t = transform_truncated(&f2(), &[0.0], 5).unwrap();
        assert_eq!(t.value, Complex64::new(1.0, 0.0));
        assert_eq!(transform_truncated(&f2(), &[0.0], 0).unwrap_err(), FourierError::InvalidDepth);
        let xi = std::f64::consts::TAU * 27.0;
        let t = transform_truncated(&f1(), &[xi], 20).unwrap();
        assert!(t.value.norm() <= 1e-3);
    }

    #[test]
    fn truncated_matches_product_reindexing() {
        let sys = f2();
        for r in 2..=4 {
            let xi = std::f64::consts::TAU * 3f64.powi(r);
            let t = transform_truncated(&sys, &[xi], 25).unwrap();
            let p = fourier_product(&sys, &[1], -(r as i64), 1e-9).unwrap();
            assert!((t.value - p.value).norm() <= 1e-3, "r={r}");
        }
    }

    #[test]
    fn empirical_checks() {
        let e = transform_empirical(&f2(), &[0.0], 2000, 7).unwrap();
        assert_eq!(e.estimate, Complex64::new(1.0, 0.0));
        assert_eq!(e.std_error, 0.0);
        assert_eq!(transform_empirical(&f2(), &[1.0], 10, 7).unwrap_err(), FourierError::TooFewSamples);
        // uniform measure on [0, 3]: ν̂(ξ) = (e^{3iξ} − 1) / (3iξ), which is 0 at 2π
        let e = transform_empirical(&f1(), &[std::f64::consts::TAU], 20_000, 11).unwrap();
        assert!(e.estimate.norm() <= 3.0 * e.std_error);
        let a = transform_empirical(&f1(), &[1.3], 5000, 3).unwrap();
        let b = transform_empirical(&f1(), &[1.3], 5000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frequency_enumeration() {
        assert_eq!(frequencies(1, 2), vec![vec![1], vec![2]]);
        assert_eq!(frequencies(2, 1), vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        assert_eq!(frequencies(2, 2).len(), 12);
    }
}
