//! Exact-overlap detection, the residue (Bandt) criterion, and a complete
//! decision procedure over the integer difference graph.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::intlinalg::CosetLabel;
use crate::system::{AffineMap, AffineSystem, ScaledVector, SystemError, Word};

/// Default cap on difference-graph states visited by [`decide_overlaps`].
pub const DEFAULT_STATE_BUDGET: u64 = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OverlapError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("difference graph exceeds the state budget ({explored} > {budget}; ball radius {bound})")]
    StateBudgetExceeded {
        bound: BigRational,
        explored: u64,
        budget: u64,
    },
    #[error("words {0} and {1} do not compose to the same map")]
    CertificateMismatch(Word, Word),
}

/// Two distinct words of equal length whose composed maps coincide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapCertificate {
    pub depth: usize,
    pub word_a: Word,
    pub word_b: Word,
    pub map: AffineMap,
}

impl OverlapCertificate {
    /// Checks the identity by exact composition before accepting it. The pair
    /// is stored with `word_a < word_b` lexicographically.
    pub fn new(sys: &AffineSystem, word_a: Word, word_b: Word) -> Result<Self, OverlapError> {
        let (word_a, word_b) = if word_b < word_a { (word_b, word_a) } else { (word_a, word_b) };
        let map = sys.compose_word(&word_a);
        if word_a == word_b || word_a.len() != word_b.len() || map != sys.compose_word(&word_b) {
            return Err(OverlapError::CertificateMismatch(word_a, word_b));
        }
        Ok(OverlapCertificate {
            depth: word_a.len(),
            word_a,
            word_b,
            map,
        })
    }

    pub fn verify(&self, sys: &AffineSystem) -> bool {
        self.word_a != self.word_b
            && self.word_a.len() == self.depth
            && self.word_b.len() == self.depth
            && self.word_a.letters().iter().chain(self.word_b.letters()).all(|&l| l >= 1 && l <= sys.len())
            && sys.compose_word(&self.word_a) == self.map
            && sys.compose_word(&self.word_b) == self.map
    }
}

/// `A^{m₀}u_j ∈ ℤᵈ` for every `j`, with pairwise distinct cosets mod `Aℤᵈ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OscCertificate {
    pub m0: i64,
    pub labels: Vec<CosetLabel>,
}

impl OscCertificate {
    pub fn verify(&self, sys: &AffineSystem) -> bool {
        if self.labels.len() != sys.len() {
            return false;
        }
        let Some(vs) = scaled_digits(sys, self.m0) else {
            return false;
        };
        let labels: Vec<CosetLabel> = vs.iter().map(|v| sys.matrix().coset_label(v)).collect();
        labels == self.labels && all_distinct(&labels)
    }
}

/// Outcome of an exhaustive difference-graph search that never reached 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoOverlapProof {
    pub state_bound: BigRational,
    pub explored_states: u64,
    pub reached_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OverlapDecision {
    Overlap(OverlapCertificate),
    NoOverlap(NoOverlapProof),
}

impl OverlapDecision {
    pub fn certificate(&self) -> Option<&OverlapCertificate> {
        match self {
            OverlapDecision::Overlap(c) => Some(c),
            OverlapDecision::NoOverlap(_) => None,
        }
    }
}

fn all_distinct<T: std::hash::Hash + Eq>(items: &[T]) -> bool {
    let mut seen = HashSet::new();
    items.iter().all(|x| seen.insert(x))
}

/// `A^{m}u` as an integer vector, if it is one.
fn scaled_digit(sys: &AffineSystem, u: &ScaledVector, m: i64) -> Option<Vec<i64>> {
    let shift = m - u.scale as i64;
    if shift >= 0 {
        return u.lift(sys.matrix(), m as u32).ok();
    }
    let mut v = u.vec.clone();
    for _ in 0..(-shift) {
        v = sys.matrix().divide_i64(&v)?;
    }
    Some(v)
}

fn scaled_digits(sys: &AffineSystem, m: i64) -> Option<Vec<Vec<i64>>> {
    sys.digits().iter().map(|u| scaled_digit(sys, u, m)).collect()
}

/// Residue criterion: look for `m₀` (starting from the largest digit scale and
/// descending while all `A^{m₀}u_j` stay integral) at which the digits occupy
/// `N` distinct cosets of `Aℤᵈ`.
pub fn bandt_criterion(sys: &AffineSystem) -> Option<OscCertificate> {
    if !all_distinct(sys.digits()) {
        return None;
    }
    let mut m0 = sys.max_scale() as i64;
    loop {
        let vs = scaled_digits(sys, m0)?;
        let labels: Vec<CosetLabel> = vs.iter().map(|v| sys.matrix().coset_label(v)).collect();
        if all_distinct(&labels) {
            return Some(OscCertificate { m0, labels });
        }
        // Distinct digits cannot all stay integral forever under A⁻¹.
        m0 -= 1;
    }
}

/// Depth-minimal overlap among depths `<= n_max`, found by enumerating digit
/// sums. Sum-words index `D_n` in reverse composition order.
pub fn find_overlap_up_to(
    sys: &AffineSystem,
    n_max: usize,
    budget: u64,
) -> Result<Option<OverlapCertificate>, OverlapError> {
    sys.require_normalized()?;
    for n in 1..=n_max {
        if let Some((p, q)) = sys.first_sum_collision(n, budget)? {
            return OverlapCertificate::new(sys, p.reversed(), q.reversed()).map(Some);
        }
    }
    Ok(None)
}

fn max_norm(v: &[i64]) -> i64 {
    v.iter().map(|x| x.saturating_abs()).max().unwrap_or(0)
}

fn state_order(a: &[i64], b: &[i64]) -> Ordering {
    max_norm(a).cmp(&max_norm(b)).then_with(|| a.cmp(b))
}

/// Complete decision: `0` is reachable from `Δ = {u_j − u_k} \ {0}` under
/// `z ↦ Az + e` (`e ∈ Δ ∪ {0}`) iff an exact overlap exists. Every state on a
/// path to `0` lies in the ball of radius `max_Δ ||e|| · Σ_{n>=1} ||A⁻ⁿ||`.
pub fn decide_overlaps(sys: &AffineSystem, state_budget: u64) -> Result<OverlapDecision, OverlapError> {
    sys.require_normalized()?;
    let digits = sys.integer_digits();
    let n = digits.len();
    let zero = vec![0i64; sys.dim()];

    // Lexicographically first letter pair realizing each difference.
    let mut pair_of: HashMap<Vec<i64>, (usize, usize)> = HashMap::new();
    pair_of.insert(zero.clone(), (0, 0));
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let diff: Vec<i64> = digits[j]
                .iter()
                .zip(&digits[k])
                .map(|(a, b)| a.checked_sub(*b).ok_or(SystemError::Overflow))
                .collect::<Result<_, _>>()?;
            if diff == zero {
                let a = Word::new(vec![j + 1], n)?;
                let b = Word::new(vec![k + 1], n)?;
                return Ok(OverlapDecision::Overlap(OverlapCertificate::new(sys, a, b)?));
            }
            pair_of.entry(diff).or_insert((j, k));
        }
    }
    let mut transitions: Vec<Vec<i64>> = pair_of.keys().cloned().collect();
    transitions.sort_by(|a, b| state_order(a, b));

    let max_delta = transitions.iter().map(|e| max_norm(e)).max().unwrap_or(0);
    let bound = BigRational::from(BigInt::from(max_delta)) * sys.matrix().inverse_power_tail(1);
    let radius = bound.floor().to_integer().to_i64().ok_or(SystemError::Overflow)?;

    let mut layers = LayerMap::new(sys.dim(), radius)?;
    let mut frontier: Vec<Vec<i64>> = transitions
        .iter()
        .filter(|e| **e != zero && max_norm(e) <= radius)
        .cloned()
        .collect();
    for s in &frontier {
        layers.insert(s, 1);
    }
    let mut explored = frontier.len() as u64;
    if explored > state_budget {
        return Err(OverlapError::StateBudgetExceeded { bound, explored, budget: state_budget });
    }

    let a = sys.matrix().rows_i64();
    let mut az = vec![0i64; sys.dim()];
    let mut z2 = vec![0i64; sys.dim()];
    let mut depth = 1;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for z in &frontier {
            for (out, row) in az.iter_mut().zip(&a) {
                let v: i128 = row.iter().zip(z).map(|(x, y)| *x as i128 * *y as i128).sum();
                *out = i64::try_from(v).map_err(|_| SystemError::Overflow)?;
            }
            for e in &transitions {
                for ((out, x), y) in z2.iter_mut().zip(&az).zip(e) {
                    *out = x.saturating_add(*y);
                }
                if z2 == zero {
                    let path = decode_path(sys, &layers, &transitions, z, depth, e);
                    let (a, b): (Vec<usize>, Vec<usize>) =
                        path.iter().map(|e| pair_of[e]).map(|(j, k)| (j + 1, k + 1)).unzip();
                    let cert = OverlapCertificate::new(sys, Word::new(a, n)?, Word::new(b, n)?)?;
                    return Ok(OverlapDecision::Overlap(cert));
                }
                if max_norm(&z2) <= radius && layers.get(&z2).is_none() {
                    layers.insert(&z2, depth + 1);
                    next.push(z2.clone());
                    explored += 1;
                    if explored > state_budget {
                        return Err(OverlapError::StateBudgetExceeded {
                            bound,
                            explored,
                            budget: state_budget,
                        });
                    }
                }
            }
        }
        next.sort_by(|a, b| state_order(a, b));
        frontier = next;
        depth += 1;
    }
    Ok(OverlapDecision::NoOverlap(NoOverlapProof {
        state_bound: bound,
        explored_states: explored,
        reached_zero: false,
    }))
}

/// Largest ball (in cells) tracked with a dense array.
const DENSE_LIMIT: u128 = 1 << 25;

/// BFS layer of each visited state in the ball `‖z‖∞ <= radius`.
enum LayerMap {
    Dense { radius: i64, layers: Vec<u32> },
    Sparse { radius: i64, layers: HashMap<u128, u32> },
}

impl LayerMap {
    fn new(dim: usize, radius: i64) -> Result<Self, SystemError> {
        let width = 2 * radius as u128 + 1;
        let volume = (0..dim).try_fold(1u128, |acc, _| acc.checked_mul(width)).ok_or(SystemError::Overflow)?;
        Ok(if volume <= DENSE_LIMIT {
            LayerMap::Dense { radius, layers: vec![0; volume as usize] }
        } else {
            LayerMap::Sparse { radius, layers: HashMap::new() }
        })
    }

    fn key(radius: i64, z: &[i64]) -> u128 {
        let width = 2 * radius as u128 + 1;
        z.iter().rev().fold(0u128, |acc, &x| acc * width + (x + radius) as u128)
    }

    fn get(&self, z: &[i64]) -> Option<u32> {
        match self {
            LayerMap::Dense { radius, layers } => Some(layers[Self::key(*radius, z) as usize]).filter(|&l| l > 0),
            LayerMap::Sparse { radius, layers } => layers.get(&Self::key(*radius, z)).copied(),
        }
    }

    fn insert(&mut self, z: &[i64], layer: u32) {
        match self {
            LayerMap::Dense { radius, layers } => layers[Self::key(*radius, z) as usize] = layer,
            LayerMap::Sparse { radius, layers } => {
                layers.insert(Self::key(*radius, z), layer);
            }
        }
    }
}

/// Differences `[e_{n−1}, …, e_0]` along a path ending with `end → 0` via
/// `last`, recovered layer by layer (first transition in order).
fn decode_path(
    sys: &AffineSystem,
    layers: &LayerMap,
    transitions: &[Vec<i64>],
    end: &[i64],
    depth: u32,
    last: &[i64],
) -> Vec<Vec<i64>> {
    let radius = match layers {
        LayerMap::Dense { radius, .. } | LayerMap::Sparse { radius, .. } => *radius,
    };
    let mut rev = vec![last.to_vec()];
    let mut cur = end.to_vec();
    for layer in (1..depth).rev() {
        let (prev, e) = transitions
            .iter()
            .find_map(|e| {
                let diff: Vec<i64> = cur.iter().zip(e).map(|(a, b)| a - b).collect();
                let p = sys.matrix().divide_i64(&diff)?;
                (max_norm(&p) <= radius && layers.get(&p) == Some(layer)).then_some((p, e))
            })
            .expect("every state past the first layer has a parent one layer up");
        rev.push(e.clone());
        cur = prev;
    }
    // The start state is itself the leading difference.
    rev.push(cur);
    rev.reverse();
    rev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::certify_expanding;
    use crate::system::DEFAULT_SUM_BUDGET;

    fn sys1(digits: &[i64]) -> AffineSystem {
        let m = certify_expanding(&[vec![3]], 64).unwrap();
        let d: Vec<Vec<i64>> = digits.iter().map(|&x| vec![x]).collect();
        AffineSystem::from_integer_digits(m, &d).unwrap()
    }

    fn fivefold(digits: &[[i64; 2]]) -> AffineSystem {
        let m = certify_expanding(&[vec![1, -2], vec![2, 1]], 64).unwrap();
        let d: Vec<Vec<i64>> = digits.iter().map(|v| v.to_vec()).collect();
        AffineSystem::from_integer_digits(m, &d).unwrap()
    }

    #[test]
    fn f2_overlap_by_enumeration() {
        let f2 = sys1(&[0, 1, 3]);
        let c = find_overlap_up_to(&f2, 3, DEFAULT_SUM_BUDGET).unwrap().unwrap();
        assert_eq!(c.depth, 2);
        assert_eq!(c.word_a.letters(), &[1, 3]);
        assert_eq!(c.word_b.letters(), &[2, 1]);
        assert_eq!(c.map.translation, vec![BigRational::from(BigInt::from(1))]);
        assert!(c.verify(&f2));
    }

    #[test]
    fn f1_no_overlap() {
        let f1 = sys1(&[0, 1, 2]);
        assert_eq!(find_overlap_up_to(&f1, 4, DEFAULT_SUM_BUDGET).unwrap(), None);
        match decide_overlaps(&f1, DEFAULT_STATE_BUDGET).unwrap() {
            OverlapDecision::NoOverlap(p) => {
                assert_eq!(p.state_bound, BigRational::from(BigInt::from(1)));
                assert!(!p.reached_zero);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn f2_decision_matches_enumeration() {
        let f2 = sys1(&[0, 1, 3]);
        let c = decide_overlaps(&f2, DEFAULT_STATE_BUDGET).unwrap();
        let c = c.certificate().unwrap();
        assert_eq!(c.depth, 2);
        assert_eq!(c, &find_overlap_up_to(&f2, 3, DEFAULT_SUM_BUDGET).unwrap().unwrap());
    }

    #[test]
    fn duplicate_digits_overlap_at_depth_one() {
        let s = sys1(&[0, 2, 2]);
        let c = find_overlap_up_to(&s, 1, DEFAULT_SUM_BUDGET).unwrap().unwrap();
        assert_eq!(c.depth, 1);
        let d = decide_overlaps(&s, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(d.certificate().unwrap().depth, 1);
        assert!(bandt_criterion(&s).is_none());
    }

    #[test]
    fn bandt_examples() {
        let f1 = sys1(&[0, 1, 2]);
        let c = bandt_criterion(&f1).unwrap();
        assert_eq!(c.m0, 0);
        let res: Vec<_> = c.labels.iter().map(|l| l.residues.clone()).collect();
        assert_eq!(res, vec![vec![0], vec![1], vec![2]]);
        assert!(c.verify(&f1));

        let fig_i = fivefold(&[[-1, -1], [-1, 0], [0, 0], [1, 0], [1, 1]]);
        assert!(bandt_criterion(&fig_i).unwrap().verify(&fig_i));
        let fig_ii = fivefold(&[[-1, 1], [-1, 0], [0, 0], [1, 0], [1, -1]]);
        assert!(bandt_criterion(&fig_ii).is_none());
    }

    #[test]
    fn bandt_descends_below_zero() {
        // 0, 3, 6 are a scaled copy of 0, 1, 2.
        let s = sys1(&[0, 3, 6]);
        let c = bandt_criterion(&s).unwrap();
        assert_eq!(c.m0, -1);
        assert!(c.verify(&s));
    }

    #[test]
    fn figure_ii_has_overlaps() {
        let fig_ii = fivefold(&[[-1, 1], [-1, 0], [0, 0], [1, 0], [1, -1]]);
        let (n, _) = fig_ii.normalize().unwrap();
        let d = decide_overlaps(&n, DEFAULT_STATE_BUDGET).unwrap();
        let c = d.certificate().expect("overlap");
        assert!(c.verify(&n));
        // Words are co-ordinate free: the same pair overlaps in the original system.
        assert_eq!(fig_ii.compose_word(&c.word_a), fig_ii.compose_word(&c.word_b));
        let e = find_overlap_up_to(&n, 8, DEFAULT_SUM_BUDGET).unwrap().unwrap();
        assert_eq!(e.depth, c.depth);
    }
}
