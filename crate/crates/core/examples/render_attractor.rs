//! Rasterize an attractor and a chaos-game histogram to PGM and PNG.
//!
//! ```text
//! cargo run --release --example render_attractor -- out_dir
//! ```

use std::path::PathBuf;

use dichotomy::geometry::{chaos_game_histogram, rasterize_attractor, Viewport};
use dichotomy::intlinalg::certify_expanding;
use dichotomy::system::AffineSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "attractor_out".into()));
    std::fs::create_dir_all(&out)?;
    let a = certify_expanding(&[vec![1, -2], vec![2, 1]], 64)?;
    let digits = [vec![-1, -1], vec![-1, 0], vec![0, 0], vec![1, 0], vec![1, 1]];
    let sys = AffineSystem::from_integer_digits(a, &digits)?;

    println!("viewport half-width {}", Viewport::for_system(&sys).half_width);
    let raster = rasterize_attractor(&sys, 8, 512)?;
    raster.write_pgm(&out.join("attractor.pgm"))?;
    raster.write_png(&out.join("attractor.png"))?;
    raster.write_sidecar(&out.join("attractor.json"))?;
    println!("attractor: {} of {} cells occupied", raster.occupied(), raster.cell_count());

    let hist = chaos_game_histogram(&sys, 200_000, 256, 42)?;
    hist.write_pgm(&out.join("histogram.pgm"))?;
    hist.write_sidecar(&out.join("histogram.json"))?;
    println!("histogram: {} samples in {} cells, written to {}", hist.total(), hist.occupied(), out.display());
    Ok(())
}
