//! Perturb a target digit tuple into a tile and into a system with a singular
//! measure, both within a chosen distance.
//!
//! ```text
//! cargo run --release --example density_search -- 0.01
//! ```

use dichotomy::density::{osc_near, singular_near, SingularOptions, TargetTuple};
use dichotomy::intlinalg::certify_expanding;
use dichotomy::overlap::{decide_overlaps, DEFAULT_STATE_BUDGET};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps: f64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(0.01);
    let a = certify_expanding(&[vec![1, -2], vec![2, 1]], 64)?;
    let targets = vec![vec![-1.0, 1.0], vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, -1.0]];
    let tuple = TargetTuple::new(targets, eps)?;

    let osc = osc_near(&a, &tuple)?;
    println!("tile within {:.2e} at scale {}: m0 = {}", osc.distance, osc.scale, osc.certificate.m0);
    for u in osc.system.digits() {
        println!("    A^-{} {:?}", u.scale, u.vec);
    }
    let (normalized, _) = osc.system.normalize()?;
    println!("    overlap decision: {:?}", decide_overlaps(&normalized, DEFAULT_STATE_BUDGET)?.certificate().is_some());

    let sing = singular_near(&a, &tuple, &[1, 0], SingularOptions::default())?;
    println!(
        "singular within {:.2e}: digit {} moved, {} candidates, window {:?}",
        sing.distance,
        sing.perturbed + 1,
        sing.scanned,
        sing.certificate.window
    );
    Ok(())
}
