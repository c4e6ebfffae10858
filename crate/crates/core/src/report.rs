//! Classification into the two branches of the dichotomy and the JSON forms
//! of systems, targets and certificates.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::fourier::{fourier_product_limit, search_singularity_certificate, CharacterSum, SingularityCertificate, SingularitySearch, ZeroTest};
use crate::geometry::{box_dimension_estimate, matched_scales, measure_estimate};
use crate::intlinalg::{certify_expanding, RatMatrix, DEFAULT_MAX_ITER};
use crate::overlap::{
    bandt_criterion, decide_overlaps, find_overlap_up_to, NoOverlapProof, OscCertificate, OverlapCertificate,
    OverlapDecision, OverlapError, DEFAULT_STATE_BUDGET,
};
use crate::system::{AffineMap, AffineSystem, Conjugacy, ScaledVector, SystemError, DEFAULT_SUM_BUDGET};

/// Depth of the enumeration used when the difference graph is too large.
pub const FALLBACK_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// No exact overlaps: tile, open set condition, absolutely continuous `ν`.
    Osc,
    /// Exact overlaps: null attractor, singular `ν`.
    Overlap,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Osc => "osc",
            Branch::Overlap => "overlap",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Definitive,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Definitive => "definitive",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Osc(OscCertificate),
    NoOverlap(NoOverlapProof),
    Overlap(OverlapCertificate),
    Singularity(SingularityCertificate),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Osc(_) => "osc",
            Certificate::NoOverlap(_) => "no_overlap",
            Certificate::Overlap(_) => "overlap",
            Certificate::Singularity(_) => "singularity",
        }
    }
}

/// Optional extras computed after the branch is known.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Annexes {
    /// `(depth, resolution)` for a measure estimate.
    pub measure: Option<(usize, usize)>,
    /// Depths for a box-counting estimate at matched scales.
    pub dimension: Option<Vec<usize>>,
    /// Search radius for a singularity certificate (overlap branch only).
    pub fourier_wmax: Option<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub state_budget: u64,
    pub fallback_depth: usize,
    pub sum_budget: u64,
    pub annexes: Annexes,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            state_budget: DEFAULT_STATE_BUDGET,
            fallback_depth: FALLBACK_DEPTH,
            sum_budget: DEFAULT_SUM_BUDGET,
            annexes: Annexes::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub branch: Option<Branch>,
    pub status: Status,
    pub certificates: Vec<Certificate>,
    pub estimates: BTreeMap<String, Value>,
    pub reason: Option<String>,
    pub normalized: AffineSystem,
    pub conjugacy: Conjugacy,
}

/// Normalize, try the residue criterion, then decide overlaps exactly. A
/// budget overflow falls back to bounded enumeration, which can only prove
/// overlaps; otherwise the report is inconclusive.
pub fn classify(sys: &AffineSystem, opts: &ClassifyOptions) -> Result<ClassificationReport, SystemError> {
    let (normalized, conjugacy) = sys.normalize()?;
    let mut report = ClassificationReport {
        branch: None,
        status: Status::Inconclusive,
        certificates: Vec::new(),
        estimates: BTreeMap::new(),
        reason: None,
        normalized,
        conjugacy,
    };
    let norm = &report.normalized;
    if let Some(cert) = bandt_criterion(norm) {
        report.branch = Some(Branch::Osc);
        report.certificates.push(Certificate::Osc(cert));
    } else {
        match decide_overlaps(norm, opts.state_budget) {
            Ok(OverlapDecision::Overlap(c)) => {
                report.branch = Some(Branch::Overlap);
                report.certificates.push(Certificate::Overlap(c));
            }
            Ok(OverlapDecision::NoOverlap(p)) => {
                report.branch = Some(Branch::Osc);
                report.certificates.push(Certificate::NoOverlap(p));
            }
            Err(OverlapError::StateBudgetExceeded { bound, explored, budget }) => {
                match find_overlap_up_to(norm, opts.fallback_depth, opts.sum_budget) {
                    Ok(Some(c)) => {
                        report.branch = Some(Branch::Overlap);
                        report.certificates.push(Certificate::Overlap(c));
                    }
                    Ok(None) | Err(OverlapError::System(SystemError::BudgetExceeded { .. })) => {
                        report.reason = Some(format!(
                            "difference graph exceeds the state budget ({explored} > {budget}, radius {bound}); \
                             no overlap up to the enumeration depth"
                        ));
                    }
                    Err(OverlapError::System(e)) => return Err(e),
                    Err(e) => report.reason = Some(e.to_string()),
                }
            }
            Err(OverlapError::System(e)) => return Err(e),
            Err(e) => report.reason = Some(e.to_string()),
        }
    }
    if report.branch.is_some() {
        report.status = Status::Definitive;
    }
    add_annexes(sys, &mut report, &opts.annexes);
    Ok(report)
}

fn add_annexes(sys: &AffineSystem, report: &mut ClassificationReport, annexes: &Annexes) {
    if let Some((depth, res)) = annexes.measure {
        let v = match measure_estimate(sys, depth, res) {
            Ok(m) => json!({ "depth": depth, "resolution": res, "value": m, "note": "upper estimate of the Lebesgue measure" }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        report.estimates.insert("measure".into(), v);
    }
    if let Some(depths) = &annexes.dimension {
        let res = matched_scales(sys, depths);
        let v = match box_dimension_estimate(sys, depths, &res) {
            Ok(b) => json!({
                "depths": depths,
                "resolutions": res,
                "slope": b.slope,
                "ci95": [b.ci.0, b.ci.1],
                "ambient_dimension": sys.dim(),
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        report.estimates.insert("box_dimension".into(), v);
    }
    if let (Some(wmax), Some(Branch::Overlap)) = (annexes.fourier_wmax, report.branch) {
        match search_singularity_certificate(&report.normalized, wmax) {
            Ok(SingularitySearch::Found(c)) => {
                if let Ok(p) = fourier_product_limit(&c, &report.normalized, 1e-6) {
                    report.estimates.insert("fourier_limit".into(), json!({
                        "w": c.w, "value": complex_json(p.value), "error_bound": p.error_bound,
                    }));
                }
                report.certificates.push(Certificate::Singularity(c));
            }
            Ok(SingularitySearch::NotFound { tried, inconclusive }) => {
                report.estimates.insert("fourier_search".into(), json!({
                    "wmax": wmax, "tried": tried, "inconclusive": inconclusive, "result": "no certificate found",
                }));
            }
            Err(e) => {
                report.estimates.insert("fourier_search".into(), json!({ "error": e.to_string() }));
            }
        }
    }
}

impl ClassificationReport {
    pub fn to_json(&self, original: &AffineSystem) -> Value {
        json!({
            "branch": self.branch.map(Branch::as_str),
            "status": self.status.as_str(),
            "certificates": self.certificates.iter().map(|c| certificate_json(c, original, &self.conjugacy)).collect::<Vec<_>>(),
            "estimates": self.estimates,
            "reason": self.reason,
            "normalized_system": system_json(&self.normalized),
            "conjugacy": conjugacy_json(&self.conjugacy),
        })
    }
}

/// `{re, im}` as decimal strings with 17 significant digits.
pub fn complex_json(z: Complex64) -> Value {
    json!({ "re": format!("{:.16e}", z.re), "im": format!("{:.16e}", z.im) })
}

pub fn rational_json(x: &BigRational) -> Value {
    Value::String(x.to_string())
}

fn rat_matrix_json(m: &RatMatrix) -> Value {
    Value::Array(m.rows().iter().map(|r| Value::Array(r.iter().map(rational_json).collect())).collect())
}

pub fn map_json(m: &AffineMap) -> Value {
    json!({
        "linear": rat_matrix_json(&m.linear),
        "translation": m.translation.iter().map(rational_json).collect::<Vec<_>>(),
    })
}

pub fn conjugacy_json(c: &Conjugacy) -> Value {
    json!({ "power": c.power, "shift": c.shift.iter().map(rational_json).collect::<Vec<_>>() })
}

fn sum_json(s: &CharacterSum) -> Value {
    let zero = match s.zero {
        ZeroTest::Zero => "zero",
        ZeroTest::NonZero => "nonzero",
        ZeroTest::NumericOnly => "numeric_only",
    };
    json!({
        "n": s.n,
        "denominator": s.denominator.to_string(),
        "exponents": s.exponents.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "value": complex_json(s.value),
        "zero": zero,
    })
}

pub fn singularity_json(c: &SingularityCertificate) -> Value {
    json!({
        "kind": "singularity",
        "w": c.w,
        "window": [c.window.0, c.window.1],
        "outside_window_reason": {
            "above": SingularityCertificate::ABOVE_REASON,
            "below": SingularityCertificate::BELOW_REASON,
        },
        "window_sums": c.window_sums.iter().map(sum_json).collect::<Vec<_>>(),
        "product_lower_bound": rational_json(&c.product_lower_bound),
        "truncation_error": rational_json(&c.truncation_error),
    })
}

pub fn character_sum_json(s: &CharacterSum) -> Value {
    sum_json(s)
}

pub fn osc_json(c: &OscCertificate) -> Value {
    json!({
        "kind": "osc",
        "m0": c.m0,
        "labels": c.labels.iter().map(|l| l.residues.clone()).collect::<Vec<_>>(),
    })
}

/// Certificates as JSON; overlap maps are also given in the original
/// co-ordinates.
pub fn certificate_json(c: &Certificate, original: &AffineSystem, conj: &Conjugacy) -> Value {
    match c {
        Certificate::Osc(o) => osc_json(o),
        Certificate::NoOverlap(p) => json!({
            "kind": "no_overlap",
            "state_bound": rational_json(&p.state_bound),
            "explored_states": p.explored_states,
            "reached_zero": p.reached_zero,
        }),
        Certificate::Overlap(o) => json!({
            "kind": "overlap",
            "depth": o.depth,
            "word_a": o.word_a.letters(),
            "word_b": o.word_b.letters(),
            "map": map_json(&o.map),
            "original_map": map_json(&conj.pull_back(original.matrix(), &o.map)),
        }),
        Certificate::Singularity(s) => singularity_json(s),
    }
}

/// The on-disk system format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub matrix: Vec<Vec<i64>>,
    pub digits: Vec<ScaledVector>,
}

/// The on-disk target format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub matrix: Vec<Vec<i64>>,
    pub targets: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl SystemFile {
    pub fn from_system(sys: &AffineSystem) -> Self {
        SystemFile { matrix: sys.matrix().rows_i64(), digits: sys.digits().to_vec() }
    }

    pub fn into_system(self) -> Result<AffineSystem, SystemError> {
        let m = certify_expanding(&self.matrix, DEFAULT_MAX_ITER)?;
        AffineSystem::new(m, self.digits)
    }
}

pub fn system_json(sys: &AffineSystem) -> Value {
    serde_json::to_value(SystemFile::from_system(sys)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(rows: &[Vec<i64>], digits: &[Vec<i64>]) -> AffineSystem {
        AffineSystem::from_integer_digits(certify_expanding(rows, 64).unwrap(), digits).unwrap()
    }

    #[test]
    fn f1_is_osc() {
        let r = classify(&sys(&[vec![3]], &[vec![0], vec![1], vec![2]]), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.branch, Some(Branch::Osc));
        assert_eq!(r.certificates.len(), 1);
        assert_eq!(r.certificates[0].kind(), "osc");
    }

    #[test]
    fn f2_overlap_map() {
        let s = sys(&[vec![3]], &[vec![0], vec![1], vec![3]]);
        let r = classify(&s, &ClassifyOptions::default()).unwrap();
        assert_eq!(r.branch, Some(Branch::Overlap));
        let v = r.to_json(&s);
        let c = &v["certificates"][0];
        assert_eq!(c["kind"], "overlap");
        assert_eq!(c["depth"], 2);
        assert_eq!(c["original_map"]["linear"], json!([["1/9"]]));
        assert_eq!(c["original_map"]["translation"], json!(["1"]));
    }

    #[test]
    fn shifted_system_reports_original_map() {
        // F2 translated by 5: digits 5, 6, 8.
        let s = sys(&[vec![3]], &[vec![5], vec![6], vec![8]]);
        let r = classify(&s, &ClassifyOptions::default()).unwrap();
        let Certificate::Overlap(c) = &r.certificates[0] else { panic!() };
        let v = r.to_json(&s);
        assert!(c.verify(&r.normalized));
        let orig = r.conjugacy.pull_back(s.matrix(), &c.map);
        assert_eq!(orig, s.compose_word(&c.word_a));
        assert_eq!(v["certificates"][0]["original_map"], map_json(&orig));
    }

    #[test]
    fn budget_overflow_is_inconclusive_or_enumerated() {
        let s = sys(&[vec![3]], &[vec![0], vec![1], vec![3]]);
        let opts = ClassifyOptions { state_budget: 0, ..Default::default() };
        let r = classify(&s, &opts).unwrap();
        assert_eq!(r.branch, Some(Branch::Overlap));
        let opts = ClassifyOptions { state_budget: 0, fallback_depth: 1, ..Default::default() };
        let r = classify(&s, &opts).unwrap();
        assert_eq!(r.status, Status::Inconclusive);
        assert_eq!(r.branch, None);
        assert!(r.certificates.is_empty());
    }

    #[test]
    fn complex_format() {
        assert_eq!(complex_json(Complex64::new(1.5, -0.0)), json!({"re": "1.5000000000000000e0", "im": "-0.0000000000000000e0"}));
    }

    #[test]
    fn system_round_trip() {
        let s = sys(&[vec![1, -2], vec![2, 1]], &[vec![-1, -1], vec![-1, 0], vec![0, 0], vec![1, 0], vec![1, 1]]);
        let text = serde_json::to_string(&SystemFile::from_system(&s)).unwrap();
        let back: SystemFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_system().unwrap(), s);
    }
}
