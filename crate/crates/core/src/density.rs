//! Constructive density: systems close to arbitrary real targets that carry
//! either a residue certificate or a singularity certificate.
//!
//! Distances are Euclidean per digit and maximal over digits; candidate
//! order is (distance, lexicographic) and all comparisons are exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::fourier::{v_w_membership, FourierError, Membership, SingularityCertificate};
use crate::intlinalg::{CosetLabel, ExpandingMatrix, RatMatrix};
use crate::overlap::{bandt_criterion, OscCertificate};
use crate::system::{rational_to_f64, AffineSystem, Conjugacy, ScaledVector, SystemError};

/// Largest scale tried before giving up.
pub const MAX_SCALE: u32 = 40;
/// Default number of `u_N` candidates tried by [`singular_near`].
pub const DEFAULT_CANDIDATE_BUDGET: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("frequency must be nonzero")]
    ZeroFrequency,
    #[error("search exhausted after {scanned} candidates")]
    SearchExhausted { scanned: usize },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// `N` real target vectors and a tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetTuple {
    pub vectors: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl TargetTuple {
    pub fn new(vectors: Vec<Vec<f64>>, epsilon: f64) -> Result<Self, DensityError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(DensityError::InvalidTarget("epsilon must be positive".into()));
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(DensityError::InvalidTarget("coordinates must be finite".into()));
        }
        Ok(TargetTuple { vectors, epsilon })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Digit count and dimensions must match the matrix.
    pub fn check(&self, m: &ExpandingMatrix) -> Result<(), DensityError> {
        let n = m.det_abs() as usize;
        if self.vectors.len() != n {
            return Err(SystemError::WrongDigitCount { expected: n, found: self.vectors.len() }.into());
        }
        if let Some(v) = self.vectors.iter().find(|v| v.len() != m.dim()) {
            return Err(SystemError::DimensionMismatch { expected: m.dim(), found: v.len() }.into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscNear {
    pub system: AffineSystem,
    pub certificate: OscCertificate,
    pub distance: f64,
    pub scale: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularNear {
    pub system: AffineSystem,
    /// Normalized form of `system`; the certificate refers to it.
    pub normalized: AffineSystem,
    pub conjugacy: Conjugacy,
    pub certificate: SingularityCertificate,
    pub distance: f64,
    /// Index (0-based) of the digit that was searched.
    pub perturbed: usize,
    pub scanned: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingularOptions {
    pub budget: usize,
    /// Also search the other digits, last to first, if `u_N` alone fails.
    pub perturb_all: bool,
}

impl Default for SingularOptions {
    fn default() -> Self {
        SingularOptions { budget: DEFAULT_CANDIDATE_BUDGET, perturb_all: false }
    }
}

struct Candidate {
    dist2: BigRational,
    w: Vec<i64>,
}

/// Per-scale data: `A^{−s}` exactly and `A^s` in floating point.
struct Scale {
    inv: RatMatrix,
    fwd: Vec<Vec<f64>>,
    fwd_norm: f64,
}

impl Scale {
    fn new(m: &ExpandingMatrix, s: u32) -> Self {
        let fwd: Vec<Vec<f64>> = m
            .entries()
            .pow(s)
            .rows()
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect())
            .collect();
        let fwd_norm = fwd.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        Scale { inv: m.inverse_power(s), fwd, fwd_norm }
    }

    fn point(&self, w: &[i64]) -> Vec<BigRational> {
        let big: Vec<BigRational> = w.iter().map(|&x| BigRational::from(BigInt::from(x))).collect();
        self.inv.mul_vec(&big)
    }

    /// Integer `w` with `‖A^{−s}w − v‖₂ <= ε`, sorted by (distance, lex).
    fn candidates(&self, v: &[BigRational], vf: &[f64], eps2: &BigRational, eps: f64) -> Option<Vec<Candidate>> {
        let centre: Vec<f64> = self.fwd.iter().map(|r| r.iter().zip(vf).map(|(a, b)| a * b).sum()).collect();
        let radius = self.fwd_norm * eps + 1.0;
        let lo: Vec<f64> = centre.iter().map(|c| (c - radius).floor()).collect();
        let hi: Vec<f64> = centre.iter().map(|c| (c + radius).ceil()).collect();
        if lo.iter().chain(&hi).any(|x| x.abs() > 1e15) {
            return None;
        }
        let count: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a + 1.0).product();
        if count > 1e6 {
            return None;
        }
        let lo: Vec<i64> = lo.iter().map(|&x| x as i64).collect();
        let hi: Vec<i64> = hi.iter().map(|&x| x as i64).collect();
        let mut out = Vec::new();
        let mut w = lo.clone();
        loop {
            let d2 = dist2(&self.point(&w), v);
            if d2 <= *eps2 {
                out.push(Candidate { dist2: d2, w: w.clone() });
            }
            let mut i = 0;
            loop {
                if i == w.len() {
                    out.sort_by(|a, b| a.dist2.cmp(&b.dist2).then_with(|| a.w.cmp(&b.w)));
                    return Some(out);
                }
                if w[i] < hi[i] {
                    w[i] += 1;
                    break;
                }
                w[i] = lo[i];
                i += 1;
            }
        }
    }
}

fn dist2(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).fold(BigRational::zero(), |acc, t| acc + t)
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn exact_vec(v: &[f64]) -> Vec<BigRational> {
    v.iter().map(|&x| exact(x)).collect()
}

fn build(m: &ExpandingMatrix, digits: Vec<(u32, Vec<i64>)>) -> Result<AffineSystem, DensityError> {
    let digits = digits
        .into_iter()
        .map(|(s, w)| ScaledVector::new(s, w, m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AffineSystem::new(m.clone(), digits)?)
}

/// Greedy lattice search at increasing scales: each target takes its nearest
/// candidate whose coset of `Aℤᵈ` is still unused, so the digits satisfy the
/// residue criterion at `m₀ = s`.
pub fn osc_near(m: &ExpandingMatrix, target: &TargetTuple) -> Result<OscNear, DensityError> {
    target.check(m)?;
    let eps2 = exact(target.epsilon) * exact(target.epsilon);
    let targets: Vec<Vec<BigRational>> = target.vectors.iter().map(|v| exact_vec(v)).collect();
    let mut scanned = 0;
    for s in 0..=MAX_SCALE {
        let scale = Scale::new(m, s);
        let mut used: Vec<CosetLabel> = Vec::new();
        let mut chosen: Vec<(u32, Vec<i64>)> = Vec::new();
        let mut worst = BigRational::zero();
        for (v, vf) in targets.iter().zip(&target.vectors) {
            let Some(cands) = scale.candidates(v, vf, &eps2, target.epsilon) else {
                return Err(DensityError::SearchExhausted { scanned });
            };
            scanned += cands.len();
            let pick = cands.into_iter().find(|c| !used.contains(&m.coset_label(&c.w)));
            let Some(c) = pick else { break };
            used.push(m.coset_label(&c.w));
            if c.dist2 > worst {
                worst = c.dist2.clone();
            }
            chosen.push((s, c.w));
        }
        if chosen.len() < target.len() {
            continue;
        }
        let system = build(m, chosen)?;
        let certificate = bandt_criterion(&system).expect("distinct cosets at the chosen scale");
        return Ok(OscNear { system, certificate, distance: rational_to_f64(&worst).sqrt(), scale: s });
    }
    Err(DensityError::SearchExhausted { scanned })
}

/// Round the targets at the smallest scale keeping every error within `bound`.
fn round_at_common_scale(
    m: &ExpandingMatrix,
    vs: &[&[f64]],
    bound2: &BigRational,
) -> Result<(u32, Vec<(Vec<i64>, BigRational)>), DensityError> {
    for s in 0..=MAX_SCALE {
        let scale = Scale::new(m, s);
        let mut out = Vec::new();
        for vf in vs {
            let centre: Vec<f64> = scale.fwd.iter().map(|r| r.iter().zip(vf.iter()).map(|(a, b)| a * b).sum()).collect();
            if centre.iter().any(|c| c.abs() > 1e15) {
                return Err(DensityError::SearchExhausted { scanned: 0 });
            }
            let w: Vec<i64> = centre.iter().map(|c| c.round() as i64).collect();
            let d2 = dist2(&scale.point(&w), &exact_vec(vf));
            if d2 > *bound2 {
                break;
            }
            out.push((w, d2));
        }
        if out.len() == vs.len() {
            return Ok((s, out));
        }
    }
    Err(DensityError::SearchExhausted { scanned: 0 })
}

/// Fix the other digits within `ε/2`, then scan candidates for one digit
/// (scale by scale, each in (distance, lex) order) until the normalized system
/// passes [`v_w_membership`].
pub fn singular_near(
    m: &ExpandingMatrix,
    target: &TargetTuple,
    w: &[i64],
    opts: SingularOptions,
) -> Result<SingularNear, DensityError> {
    target.check(m)?;
    if w.iter().all(|&x| x == 0) {
        return Err(DensityError::ZeroFrequency);
    }
    if w.len() != m.dim() {
        return Err(FourierError::DimensionMismatch { expected: m.dim(), found: w.len() }.into());
    }
    let n = target.len();
    let order: Vec<usize> = if opts.perturb_all { (0..n).rev().collect() } else { vec![n - 1] };
    let mut scanned = 0;
    for k in order {
        match search_digit(m, target, w, k, opts.budget, &mut scanned)? {
            Some(found) => return Ok(found),
            None => continue,
        }
    }
    Err(DensityError::SearchExhausted { scanned })
}

fn search_digit(
    m: &ExpandingMatrix,
    target: &TargetTuple,
    w: &[i64],
    k: usize,
    budget: usize,
    scanned: &mut usize,
) -> Result<Option<SingularNear>, DensityError> {
    let eps = target.epsilon;
    let half2 = exact(eps / 2.0) * exact(eps / 2.0);
    let eps2 = exact(eps) * exact(eps);
    let others: Vec<&[f64]> = (0..target.len()).filter(|&j| j != k).map(|j| target.vectors[j].as_slice()).collect();
    let (s, fixed) = round_at_common_scale(m, &others, &half2)?;
    let fixed_worst = fixed.iter().map(|(_, d)| d.clone()).max().unwrap_or_else(BigRational::zero);
    let v = exact_vec(&target.vectors[k]);
    let mut tried = 0;
    for t in 0..=MAX_SCALE {
        let scale = Scale::new(m, t);
        let Some(cands) = scale.candidates(&v, &target.vectors[k], &eps2, eps) else {
            break;
        };
        for c in cands {
            if t > 0 && m.divide_i64(&c.w).is_some() {
                continue;
            }
            if tried == budget {
                return Ok(None);
            }
            tried += 1;
            *scanned += 1;
            let mut digits: Vec<(u32, Vec<i64>)> = fixed.iter().map(|(x, _)| (s, x.clone())).collect();
            digits.insert(k, (t, c.w.clone()));
            let system = build(m, digits)?;
            let (normalized, conjugacy) = system.normalize()?;
            match v_w_membership(&normalized, w) {
                Ok(Membership::Certified(certificate)) => {
                    let worst = if c.dist2 > fixed_worst { c.dist2 } else { fixed_worst.clone() };
                    return Ok(Some(SingularNear {
                        system,
                        normalized,
                        conjugacy,
                        certificate,
                        distance: rational_to_f64(&worst).sqrt(),
                        perturbed: k,
                        scanned: *scanned,
                    }));
                }
                Ok(Membership::FailingPower { .. }) | Err(FourierError::DenominatorOverflow { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::certify_expanding;
    use crate::overlap::{decide_overlaps, OverlapDecision, DEFAULT_STATE_BUDGET};

    fn three() -> ExpandingMatrix {
        certify_expanding(&[vec![3]], 64).unwrap()
    }

    fn twisted() -> ExpandingMatrix {
        certify_expanding(&[vec![1, -2], vec![2, 1]], 64).unwrap()
    }

    fn fig1(sign: f64) -> Vec<Vec<f64>> {
        [(-1.0, -1.0), (-1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]
            .iter()
            .map(|&(a, b)| vec![a, sign * b])
            .collect()
    }

    #[test]
    fn zero_targets_at_scale_three() {
        let t = TargetTuple::new(vec![vec![0.0]; 3], 0.1).unwrap();
        let r = osc_near(&three(), &t).unwrap();
        assert_eq!(r.scale, 3);
        let got: Vec<(u32, Vec<i64>)> = r.system.digits().iter().map(|d| (d.scale, d.vec.clone())).collect();
        assert_eq!(got, vec![(0, vec![0]), (3, vec![-1]), (3, vec![1])]);
        assert!((r.distance - 1.0 / 27.0).abs() < 1e-15);
        assert_eq!(r.certificate.m0, 3);
    }

    #[test]
    fn certified_targets_are_kept() {
        let t = TargetTuple::new(fig1(1.0), 0.5).unwrap();
        let r = osc_near(&twisted(), &t).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.system.integer_digits(), vec![vec![-1, -1], vec![-1, 0], vec![0, 0], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn overlapping_targets_are_perturbed() {
        let m = twisted();
        let t = TargetTuple::new(fig1(-1.0), 0.3).unwrap();
        let r = osc_near(&m, &t).unwrap();
        assert!(r.distance <= 0.3);
        assert!(r.scale > 0);
        let (norm, _) = r.system.normalize().unwrap();
        assert!(matches!(decide_overlaps(&norm, DEFAULT_STATE_BUDGET).unwrap(), OverlapDecision::NoOverlap(_)));
    }

    #[test]
    fn singular_near_moves_off_the_zero() {
        let t = TargetTuple::new(vec![vec![0.0], vec![1.0 / 3.0], vec![2.0 / 3.0]], 0.2).unwrap();
        let r = singular_near(&three(), &t, &[1], SingularOptions::default()).unwrap();
        assert!(r.distance <= 0.2);
        assert_eq!(r.perturbed, 2);
        assert!(matches!(v_w_membership(&r.normalized, &[1]).unwrap(), Membership::Certified(_)));
    }

    #[test]
    fn singular_near_keeps_member() {
        let t = TargetTuple::new(vec![vec![0.0], vec![1.0], vec![3.0]], 0.1).unwrap();
        let r = singular_near(&three(), &t, &[1], SingularOptions::default()).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.system.integer_digits(), vec![vec![0], vec![1], vec![3]]);
    }

    #[test]
    fn rejects_bad_input() {
        let t = TargetTuple::new(vec![vec![0.0]; 3], 0.1).unwrap();
        assert_eq!(singular_near(&three(), &t, &[0], SingularOptions::default()).unwrap_err(), DensityError::ZeroFrequency);
        assert!(TargetTuple::new(vec![vec![0.0]; 3], 0.0).is_err());
        let short = TargetTuple::new(vec![vec![0.0]; 2], 0.1).unwrap();
        assert!(osc_near(&three(), &short).is_err());
    }

    #[test]
    fn halving_epsilon_never_increases_distance() {
        let t = vec![vec![0.3], vec![0.31], vec![1.7]];
        let mut prev = f64::INFINITY;
        for k in 0..8 {
            let eps = 0.5 / 2f64.powi(k);
            let r = osc_near(&three(), &TargetTuple::new(t.clone(), eps).unwrap()).unwrap();
            assert!(r.distance <= eps && r.distance <= prev);
            prev = r.distance;
        }
    }
}
