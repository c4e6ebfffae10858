//! Fourier side of the overlap branch: character sums, the window
//! certificate, the infinite product, and both transform evaluators.
//!
//! ```text
//! cargo run --release --example singularity
//! ```

use std::f64::consts::PI;

use dichotomy::fourier::{
    character_sum, fourier_product, fourier_product_limit, transform_empirical, transform_truncated, v_w_membership,
    Membership,
};
use dichotomy::intlinalg::certify_expanding;
use dichotomy::system::AffineSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let three = certify_expanding(&[vec![3]], 64)?;
    let tile = AffineSystem::from_integer_digits(three.clone(), &[vec![0], vec![1], vec![2]])?;
    let overlap = AffineSystem::from_integer_digits(three, &[vec![0], vec![1], vec![3]])?;

    for n in [0, -1, -2] {
        let s = character_sum(&overlap, &[1], n)?;
        println!("S_{n}(1) = {:.6} ({:?})", s.value, s.zero);
    }
    if let Membership::FailingPower { n, sum } = v_w_membership(&tile, &[1])? {
        println!("tile: w = 1 fails at n = {n}, S = {:.3}", sum.value);
    }
    let Membership::Certified(cert) = v_w_membership(&overlap, &[1])? else {
        return Err("expected a certificate".into());
    };
    println!("overlap: window {:?}, truncation error {}", cert.window, cert.truncation_error);
    let limit = fourier_product_limit(&cert, &overlap, 1e-12)?;
    println!("lim nu^(2 pi 3^r) = {:.6} +- {:.1e}", limit.value, limit.error_bound);

    for r in 1..=5 {
        let xi = [2.0 * PI * 3f64.powi(r)];
        let t = transform_truncated(&overlap, &xi, 60)?;
        let p = fourier_product(&overlap, &[1], -(r as i64), 1e-12)?;
        println!("r = {r}: truncated {:.6}, product {:.6}", t.value, p.value);
    }
    let e = transform_empirical(&overlap, &[2.0 * PI * 9.0], 200_000, 1)?;
    println!("empirical at 2 pi 9: {:.4} (se {:.1e})", e.estimate, e.std_error);
    Ok(())
}
