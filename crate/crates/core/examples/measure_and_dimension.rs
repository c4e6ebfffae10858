//! Lebesgue measure estimates by depth and box-counting dimension at matched
//! scales, for a tile and for an overlapping system.
//!
//! ```text
//! cargo run --release --example measure_and_dimension
//! ```

use dichotomy::geometry::{box_dimension_estimate, matched_scales, measure_estimate};
use dichotomy::intlinalg::certify_expanding;
use dichotomy::system::AffineSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let three = certify_expanding(&[vec![3]], 64)?;
    let systems = [
        ("{0,1,2}", AffineSystem::from_integer_digits(three.clone(), &[vec![0], vec![1], vec![2]])?),
        ("{0,1,3}", AffineSystem::from_integer_digits(three, &[vec![0], vec![1], vec![3]])?),
    ];
    let depths = [5, 6, 7, 8, 9];
    for (name, sys) in &systems {
        let ms: Vec<f64> = (4..=9).map(|n| measure_estimate(sys, n, 4096)).collect::<Result<_, _>>()?;
        println!("{name}: measure by depth 4..9 {ms:.3?}");
        let dim = box_dimension_estimate(sys, &depths, &matched_scales(sys, &depths))?;
        println!("{name}: box dimension {:.4} (95% CI {:.4}..{:.4})", dim.slope, dim.ci.0, dim.ci.1);
        for p in &dim.points {
            println!("    depth {} cell {:.2e}: {} cells", p.depth, p.cell_size, p.occupied);
        }
    }
    Ok(())
}
