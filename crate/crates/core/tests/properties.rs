mod common;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

use common::*;
use dichotomy::fourier::{character_sum, transform_empirical, transform_truncated, v_w_membership, Membership, ZeroTest};
use dichotomy::geometry::{anchor_points, attractor_radius, chaos_game_histogram, Viewport};
use dichotomy::intlinalg::certify_expanding;
use dichotomy::overlap::{bandt_criterion, decide_overlaps, OverlapDecision, DEFAULT_STATE_BUDGET};
use dichotomy::report::SystemFile;
use dichotomy::system::{AffineSystem, ScaledVector};

fn f64_of(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::sample::select(test_matrices())
}

/// A normalized system: `u_1 = 0` and small integer digits.
fn normalized_system() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    matrix().prop_flat_map(|a| {
        let d = a.len();
        let n = det(&a).unsigned_abs() as usize;
        prop::collection::vec(prop::collection::vec(-4i64..=4, d), n - 1).prop_map(move |rest| {
            let mut digits = vec![vec![0; d]];
            digits.extend(rest);
            (a.clone(), digits)
        })
    })
}

/// A system with scaled digits, not necessarily normalized.
fn scaled_system() -> impl Strategy<Value = AffineSystem> {
    matrix().prop_flat_map(|a| {
        let d = a.len();
        let n = det(&a).unsigned_abs() as usize;
        prop::collection::vec((0u32..3, prop::collection::vec(-6i64..=6, d)), n).prop_map(move |ds| {
            let m = certify_expanding(&a, 64).unwrap();
            let digits = ds.into_iter().map(|(s, v)| ScaledVector::new(s, v, &m).unwrap()).collect();
            AffineSystem::new(m, digits).unwrap()
        })
    })
}

fn inverse_transpose(sys: &AffineSystem) -> Vec<Vec<f64>> {
    let inv = sys.matrix().inv();
    let d = sys.dim();
    (0..d).map(|i| (0..d).map(|j| f64_of(inv.get(j, i))).collect()).collect()
}

fn first_factor(sys: &AffineSystem, xi: &[f64]) -> Complex64 {
    sys.rational_digits()
        .iter()
        .map(|u| Complex64::from_polar(1.0, u.iter().zip(xi).map(|(a, b)| f64_of(a) * b).sum()))
        .sum::<Complex64>()
        / sys.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coset_labels_match_lattice_membership(a in matrix(), x in prop::collection::vec(-20i64..=20, 2), y in prop::collection::vec(-20i64..=20, 2)) {
        let d = a.len();
        let (x, y) = (&x[..d], &y[..d]);
        let m = certify_expanding(&a, 64).unwrap();
        let diff: Vec<i64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
        prop_assert_eq!(m.coset_label(x) == m.coset_label(y), in_image(&a, &diff));
        let shifted: Vec<i64> = x.iter().zip(mat_vec(&a, y)).map(|(p, q)| p + q).collect();
        prop_assert_eq!(m.coset_label(x), m.coset_label(&shifted));
    }

    #[test]
    fn smith_form_reconstructs(a in matrix()) {
        let m = certify_expanding(&a, 64).unwrap();
        let s = m.smith();
        let (u, v) = (s.u.to_i64_rows().unwrap(), s.v.to_i64_rows().unwrap());
        prop_assert_eq!(mat_mul(&mat_mul(&u, &a), &v), s.s_matrix().to_i64_rows().unwrap());
        prop_assert_eq!(s.moduli().iter().product::<i64>(), det(&a).abs());
    }

    #[test]
    fn tail_dominates_each_norm(a in matrix(), n in 1u32..12) {
        let m = certify_expanding(&a, 64).unwrap();
        let tail = m.inverse_power_tail(n);
        prop_assert!(tail >= m.inverse_power_norm(n));
        prop_assert!(&tail - m.inverse_power_tail(n + 1) >= m.inverse_power_norm(n));
    }

    #[test]
    fn inverse_power_matches_repeated_inverse(a in matrix(), n in 0u32..6) {
        let m = certify_expanding(&a, 64).unwrap();
        let p = m.inverse_power(n);
        let x: Vec<BigRational> = (1..=a.len() as i64).map(|k| BigRational::from_integer(BigInt::from(k))).collect();
        let mut y = x.clone();
        for _ in 0..n {
            y = m.apply_inverse(&y);
        }
        prop_assert_eq!(p.mul_vec(&x), y);
    }

    #[test]
    fn normalization_is_idempotent_and_conjugates(sys in scaled_system()) {
        let (norm, conj) = sys.normalize().unwrap();
        prop_assert!(norm.is_normalized());
        let (again, conj2) = norm.normalize().unwrap();
        prop_assert_eq!(&again, &norm);
        prop_assert!(conj2.is_identity());
        let m = sys.matrix();
        for (u, v) in sys.rational_digits().iter().zip(norm.rational_digits()) {
            let x: Vec<BigRational> = vec![BigRational::new(1.into(), 7.into()); sys.dim()];
            let original: Vec<BigRational> = m.apply_inverse(&x).into_iter().zip(u).map(|(p, q)| p + q).collect();
            let fx = conj.forward(m, &x);
            let mapped: Vec<BigRational> = m.apply_inverse(&fx).into_iter().zip(&v).map(|(p, q)| p + q).collect();
            prop_assert_eq!(conj.backward(m, &mapped), original);
        }
    }

    #[test]
    fn decision_is_exclusive_and_agrees_with_enumeration((a, digits) in normalized_system()) {
        let sys = system(&a, &digits);
        let decision = decide_overlaps(&sys, DEFAULT_STATE_BUDGET).unwrap();
        let oracle = first_collision_depth(&a, &digits, 6);
        match decision {
            OverlapDecision::Overlap(c) => {
                prop_assert!(c.verify(&sys));
                prop_assert!(bandt_criterion(&sys).is_none());
                if let Some(n) = oracle {
                    prop_assert!(c.depth <= n);
                }
            }
            OverlapDecision::NoOverlap(p) => {
                prop_assert!(!p.reached_zero);
                prop_assert_eq!(oracle, None);
            }
        }
    }

    #[test]
    fn self_similarity_within_tails(sys in scaled_system(), raw in prop::collection::vec(-40.0f64..40.0, 2), m in 5usize..30) {
        let xi = &raw[..sys.dim()];
        let t = transform_truncated(&sys, xi, m).unwrap();
        let inv_t = inverse_transpose(&sys);
        let xi2: Vec<f64> = inv_t.iter().map(|r| r.iter().zip(xi).map(|(a, b)| a * b).sum()).collect();
        let t2 = transform_truncated(&sys, &xi2, m).unwrap();
        let lhs = (t.value - first_factor(&sys, xi) * t2.value).norm();
        prop_assert!(lhs <= t.tail_bound + t2.tail_bound + 1e-12, "{} > {}", lhs, t.tail_bound + t2.tail_bound);
    }

    #[test]
    fn transform_symmetry_and_bound(sys in scaled_system(), raw in prop::collection::vec(-40.0f64..40.0, 2)) {
        let xi = &raw[..sys.dim()];
        let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
        let t = transform_truncated(&sys, xi, 25).unwrap();
        let tn = transform_truncated(&sys, &neg, 25).unwrap();
        prop_assert!((tn.value - t.value.conj()).norm() <= 1e-12);
        prop_assert!(t.value.norm() <= 1.0 + 1e-12);
        let zero = transform_truncated(&sys, &vec![0.0; sys.dim()], 25).unwrap();
        prop_assert!((zero.value - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn character_sum_exact_matches_numeric((a, digits) in normalized_system(), wraw in prop::collection::vec(-3i64..=3, 2), n in -4i64..=0) {
        let d = a.len();
        let w = &wraw[..d];
        prop_assume!(w.iter().any(|&x| x != 0));
        let sys = system(&a, &digits);
        let s = character_sum(&sys, w, n).unwrap();
        let inv_t = inverse_transpose(&sys);
        let mut wf: Vec<f64> = w.iter().map(|&x| x as f64).collect();
        for _ in 0..(-n) {
            wf = inv_t.iter().map(|r| r.iter().zip(&wf).map(|(a, b)| a * b).sum()).collect();
        }
        let direct: Complex64 = digits
            .iter()
            .map(|u| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * u.iter().zip(&wf).map(|(a, b)| *a as f64 * b).sum::<f64>()))
            .sum();
        prop_assert!((s.value - direct).norm() <= 1e-9);
        match s.zero {
            ZeroTest::Zero => prop_assert!(direct.norm() <= 1e-9),
            ZeroTest::NonZero => prop_assert!(direct.norm() > 1e-12),
            ZeroTest::NumericOnly => {}
        }
    }

    #[test]
    fn certified_window_sums_are_nonzero((a, digits) in normalized_system(), wraw in prop::collection::vec(-2i64..=2, 2)) {
        let d = a.len();
        let w = &wraw[..d];
        prop_assume!(w.iter().any(|&x| x != 0));
        let sys = system(&a, &digits);
        if let Ok(Membership::Certified(cert)) = v_w_membership(&sys, w) {
            let (lo, hi) = cert.window;
            prop_assert!(cert.window_sums.iter().all(|s| s.zero != ZeroTest::Zero));
            for n in (lo - 2)..=(hi + 2).min(0) {
                if let Ok(s) = character_sum(&sys, w, n) {
                    prop_assert!(s.zero != ZeroTest::Zero, "S_{} vanishes", n);
                }
            }
        }
    }

    #[test]
    fn anchors_lie_in_viewport(sys in scaled_system(), n in 1usize..5) {
        let view = Viewport::for_system(&sys);
        let r = attractor_radius(&sys);
        for p in anchor_points(&sys, n, 1_000_000).unwrap() {
            prop_assert!(view.contains(&p));
            prop_assert!(p.iter().all(|x| x.abs() <= r));
        }
    }

    #[test]
    fn system_file_round_trip(sys in scaled_system()) {
        let text = serde_json::to_string(&SystemFile::from_system(&sys)).unwrap();
        let back: SystemFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.into_system().unwrap(), sys);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn histogram_keeps_every_sample(sys in scaled_system(), seed in any::<u64>(), samples in 10_000usize..20_000) {
        let h = chaos_game_histogram(&sys, samples, 32, seed).unwrap();
        prop_assert_eq!(h.total(), samples as u64);
    }

    #[test]
    fn empirical_transform_is_bounded(sys in scaled_system(), seed in any::<u64>(), raw in prop::collection::vec(-10.0f64..10.0, 2)) {
        let xi = &raw[..sys.dim()];
        let e = transform_empirical(&sys, xi, 2_000, seed).unwrap();
        prop_assert!(e.estimate.norm() <= 1.0 + 1e-12);
        let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
        let en = transform_empirical(&sys, &neg, 2_000, seed).unwrap();
        prop_assert!((en.estimate - e.estimate.conj()).norm() <= 1e-12);
    }
}
