//! Rasters of the attractor and of the measure: exact anchor occupancy,
//! covering-based Lebesgue estimates, box counting, and chaos-game histograms.
//!
//! Grid convention: the viewport is `[−R', R']ᵈ` with
//! `R' = ⌈64 R⌉ / 64`, `R = max_j ‖u_j‖∞ (1 + tail(1))`; `res − 4` cells span it
//! and two padding cells sit on each side, so cell `c` covers
//! `[−R' + (c − 2)h, −R' + (c − 1)h)` with `h = 2R' / (res − 4)`.

use std::io::Write as _;
use std::ops::ControlFlow;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::system::{check_budget, rational_to_f64, walk_words, AffineSystem, SystemError};

pub const DEFAULT_ANCHOR_BUDGET: u64 = 50_000_000;
pub const MIN_HISTOGRAM_SAMPLES: usize = 10_000;
pub const MIN_RESOLUTION: usize = 8;
const MAX_CELLS: u128 = 1 << 28;
const STRIP_HEIGHT: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("resolution must be at least {MIN_RESOLUTION}")]
    ResolutionTooSmall,
    #[error("grid of {0} cells is too large")]
    GridTooLarge(u128),
    #[error("exact cell arithmetic overflowed")]
    Overflow,
    #[error("box counting needs at least 3 scales, got {0}")]
    InsufficientScales(usize),
    #[error("depths and resolutions differ in length")]
    ScaleMismatch,
    #[error("at least {MIN_HISTOGRAM_SAMPLES} samples are required")]
    TooFewSamples,
    #[error("images are only produced for dimension 1 or 2")]
    UnsupportedDimension,
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for GeometryError {
    fn from(e: std::io::Error) -> Self {
        GeometryError::Io(e.to_string())
    }
}

fn sup_norm(v: &[BigRational]) -> BigRational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigRational::zero)
}

fn max_digit_norm(sys: &AffineSystem) -> BigRational {
    sys.rational_digits().iter().map(|u| sup_norm(u)).max().unwrap_or_else(BigRational::zero)
}

/// Every attractor point has sup norm at most `max_j ‖u_j‖∞ (1 + tail(1))`.
pub fn attractor_radius(sys: &AffineSystem) -> BigRational {
    max_digit_norm(sys) * (BigRational::one() + sys.matrix().inverse_power_tail(1))
}

/// The cube `[−half_width, half_width]ᵈ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Viewport {
    pub dim: usize,
    pub half_width: BigRational,
}

impl Viewport {
    pub fn for_system(sys: &AffineSystem) -> Self {
        let scaled = (attractor_radius(sys) * BigRational::from_integer(64.into())).ceil();
        let p = scaled.to_integer().max(BigInt::one());
        Viewport {
            dim: sys.dim(),
            half_width: BigRational::new(p, 64.into()),
        }
    }

    pub fn contains(&self, x: &[BigRational]) -> bool {
        x.len() == self.dim && x.iter().all(|c| c.abs() <= self.half_width)
    }

    /// Side length of one cell at the given resolution.
    pub fn cell_size(&self, resolution: usize) -> f64 {
        2.0 * rational_to_f64(&self.half_width) / (resolution - 4) as f64
    }

    fn numerator(&self) -> i128 {
        (&self.half_width * BigRational::from_integer(64.into()))
            .to_integer()
            .to_i128()
            .expect("viewport numerator fits i128")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cells {
    Occupancy(Vec<u64>),
    Counts(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub resolution: usize,
    pub viewport: Viewport,
    pub depth: Option<usize>,
    pub seed: Option<u64>,
    pub cells: Cells,
}

impl Raster {
    fn new(resolution: usize, viewport: Viewport, cells: Cells) -> Self {
        Raster { resolution, viewport, depth: None, seed: None, cells }
    }

    pub fn dim(&self) -> usize {
        self.viewport.dim
    }

    pub fn cell_count(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    /// Flat index of a multi-index (first coordinate fastest).
    pub fn index(&self, cell: &[usize]) -> usize {
        cell.iter().rev().fold(0, |acc, &c| acc * self.resolution + c)
    }

    /// Occupancy (or `count > 0`) of the flat cell `i`.
    pub fn is_occupied(&self, i: usize) -> bool {
        match &self.cells {
            Cells::Occupancy(bits) => bits[i / 64] >> (i % 64) & 1 == 1,
            Cells::Counts(c) => c[i] > 0,
        }
    }

    pub fn count(&self, i: usize) -> u64 {
        match &self.cells {
            Cells::Occupancy(_) => self.is_occupied(i) as u64,
            Cells::Counts(c) => c[i],
        }
    }

    pub fn occupied(&self) -> usize {
        match &self.cells {
            Cells::Occupancy(bits) => bits.iter().map(|b| b.count_ones() as usize).sum(),
            Cells::Counts(c) => c.iter().filter(|&&x| x > 0).count(),
        }
    }

    pub fn total(&self) -> u64 {
        (0..self.cell_count()).map(|i| self.count(i)).sum()
    }

    pub fn cell_size(&self) -> f64 {
        self.viewport.cell_size(self.resolution)
    }

    /// Lower corner of a cell in the plane of real coordinates.
    pub fn cell_origin(&self, cell: &[usize]) -> Vec<f64> {
        let h = self.cell_size();
        let r = rational_to_f64(&self.viewport.half_width);
        cell.iter().map(|&c| -r + (c as f64 - 2.0) * h).collect()
    }

    /// Cell containing a floating-point point, clamped to the grid.
    pub fn cell_of_f64(&self, x: &[f64]) -> Vec<usize> {
        let h = self.cell_size();
        let r = rational_to_f64(&self.viewport.half_width);
        x.iter()
            .map(|&v| (((v + r) / h).floor() + 2.0).clamp(0.0, (self.resolution - 1) as f64) as usize)
            .collect()
    }

    /// Grayscale pixels, row-major from the top. Occupied cells are black on
    /// white; counts use `255 (1 − ln(1 + c) / ln(1 + max))`. One-dimensional
    /// rasters become a horizontal strip.
    pub fn pixels(&self) -> Result<(usize, usize, Vec<u8>), GeometryError> {
        let max = (0..self.cell_count()).map(|i| self.count(i)).max().unwrap_or(0);
        let shade = |i: usize| -> u8 {
            match &self.cells {
                Cells::Occupancy(_) => {
                    if self.is_occupied(i) {
                        0
                    } else {
                        255
                    }
                }
                Cells::Counts(c) => {
                    if max == 0 {
                        255
                    } else {
                        let t = (1.0 + c[i] as f64).ln() / (1.0 + max as f64).ln();
                        (255.0 * (1.0 - t)).round() as u8
                    }
                }
            }
        };
        let res = self.resolution;
        match self.dim() {
            1 => {
                let row: Vec<u8> = (0..res).map(shade).collect();
                Ok((res, STRIP_HEIGHT, row.repeat(STRIP_HEIGHT)))
            }
            2 => {
                let mut px = Vec::with_capacity(res * res);
                for y in (0..res).rev() {
                    px.extend((0..res).map(|x| shade(self.index(&[x, y]))));
                }
                Ok((res, res, px))
            }
            _ => Err(GeometryError::UnsupportedDimension),
        }
    }

    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self) -> Result<Vec<u8>, GeometryError> {
        let (w, h, px) = self.pixels()?;
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        out.extend_from_slice(&px);
        Ok(out)
    }

    pub fn write_pgm(&self, path: &Path) -> Result<(), GeometryError> {
        std::fs::write(path, self.to_pgm()?)?;
        Ok(())
    }

    pub fn write_png(&self, path: &Path) -> Result<(), GeometryError> {
        let (w, h, px) = self.pixels()?;
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        let mut enc = png::Encoder::new(file, w as u32, h as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let io = |e: png::EncodingError| GeometryError::Io(e.to_string());
        let mut writer = enc.write_header().map_err(io)?;
        writer.write_image_data(&px).map_err(io)?;
        writer.finish().map_err(io)?;
        Ok(())
    }

    /// Sidecar metadata: depth, resolution, viewport, seed.
    pub fn sidecar(&self) -> serde_json::Value {
        let kind = match self.cells {
            Cells::Occupancy(_) => "occupancy",
            Cells::Counts(_) => "histogram",
        };
        json!({
            "kind": kind,
            "dimension": self.dim(),
            "depth": self.depth,
            "resolution": self.resolution,
            "viewport": {
                "half_width": self.viewport.half_width.to_string(),
                "cell_size": self.cell_size(),
            },
            "seed": self.seed,
            "occupied_cells": self.occupied(),
            "total": self.total(),
        })
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<(), GeometryError> {
        let mut f = std::fs::File::create(path)?;
        let text = serde_json::to_string_pretty(&self.sidecar()).map_err(|e| GeometryError::Io(e.to_string()))?;
        writeln!(f, "{text}")?;
        Ok(())
    }
}

fn check_grid(dim: usize, resolution: usize) -> Result<(), GeometryError> {
    if resolution < MIN_RESOLUTION {
        return Err(GeometryError::ResolutionTooSmall);
    }
    let cells = (resolution as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if cells > MAX_CELLS {
        return Err(GeometryError::GridTooLarge(cells));
    }
    Ok(())
}

/// Exact cell arithmetic for a fixed depth: anchors are `B·D / den` with
/// `B = adj(A)^K`, `den = det^K`, `K = n − 1 + m` and `D` a sum of lifted digits.
struct AnchorGrid {
    table: Vec<Vec<Vec<i128>>>,
    b: Vec<Vec<i128>>,
    den: i128,
    p: i128,
    res: i128,
}

fn checked(x: Option<i128>) -> Result<i128, GeometryError> {
    x.ok_or(GeometryError::Overflow)
}

impl AnchorGrid {
    fn new(sys: &AffineSystem, n: usize, viewport: &Viewport, resolution: usize) -> Result<Self, GeometryError> {
        let m = sys.max_scale();
        let mat = sys.matrix();
        let mut row: Vec<Vec<i64>> = sys
            .digits()
            .iter()
            .map(|u| u.lift(mat, m))
            .collect::<Result<_, _>>()?;
        let mut table = Vec::with_capacity(n);
        for t in 0..n {
            if t > 0 {
                row = row
                    .iter()
                    .map(|v| mat.apply_i64(v).ok_or(GeometryError::Overflow))
                    .collect::<Result<_, _>>()?;
            }
            table.push(row.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect());
        }
        let k = (n as u32 - 1) + m;
        let to_i128 = |x: &BigInt| x.to_i128().ok_or(GeometryError::Overflow);
        let b = mat
            .adjugate()
            .pow(k)
            .rows()
            .iter()
            .map(|r| r.iter().map(to_i128).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let den = to_i128(&num_traits::pow(mat.det().clone(), k as usize))?;
        Ok(AnchorGrid {
            table,
            b,
            den,
            p: viewport.numerator(),
            res: resolution as i128,
        })
    }

    /// Numerators of `B·D` with the denominator made positive.
    fn numerators(&self, sum: &[i128]) -> Result<(Vec<i128>, i128), GeometryError> {
        let sign = self.den.signum();
        let mut out = Vec::with_capacity(sum.len());
        for row in &self.b {
            let mut acc: i128 = 0;
            for (a, s) in row.iter().zip(sum) {
                acc = checked(acc.checked_add(checked(a.checked_mul(*s))?))?;
            }
            out.push(acc * sign);
        }
        Ok((out, self.den.abs()))
    }

    /// `⌊(a/b + R') / h⌋ + 2` for `b > 0`, clamped to the grid.
    fn cell(&self, a: i128, b: i128) -> Result<usize, GeometryError> {
        let num = checked(checked(a.checked_mul(64))?.checked_add(checked(self.p.checked_mul(b))?))?;
        let num = checked(num.checked_mul(self.res - 4))?;
        let den = checked(checked(self.p.checked_mul(2))?.checked_mul(b))?;
        let c = num.div_euclid(den) + 2;
        Ok(c.clamp(0, self.res - 1) as usize)
    }
}

fn empty_bits(cells: usize) -> Vec<u64> {
    vec![0u64; cells.div_ceil(64)]
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

/// Cells containing the anchors `T_{j₁}⋯T_{j_n}(0) = Σ_r A^{1−r}u_{j_r}`.
pub fn rasterize_attractor(sys: &AffineSystem, n: usize, resolution: usize) -> Result<Raster, GeometryError> {
    rasterize_attractor_with(sys, n, resolution, DEFAULT_ANCHOR_BUDGET)
}

pub fn rasterize_attractor_with(sys: &AffineSystem, n: usize, resolution: usize, budget: u64) -> Result<Raster, GeometryError> {
    cover(sys, n, resolution, budget, false)
}

/// Upper estimate of the Lebesgue measure of the attractor: the volume of
/// all cells meeting the boxes `anchor ± ρ_n`, `ρ_n = max‖u_j‖∞ tail(n)`,
/// which cover it. The boxes nest, so the estimate never increases with `n`.
pub fn measure_estimate(sys: &AffineSystem, n: usize, resolution: usize) -> Result<f64, GeometryError> {
    let r = cover(sys, n, resolution, DEFAULT_ANCHOR_BUDGET, true)?;
    Ok(r.occupied() as f64 * r.cell_size().powi(sys.dim() as i32))
}

/// Occupancy grid of the cover used by [`measure_estimate`].
pub fn cover_raster(sys: &AffineSystem, n: usize, resolution: usize) -> Result<Raster, GeometryError> {
    cover(sys, n, resolution, DEFAULT_ANCHOR_BUDGET, true)
}

fn cover(sys: &AffineSystem, n: usize, resolution: usize, budget: u64, dilate: bool) -> Result<Raster, GeometryError> {
    let n = n.max(1);
    let dim = sys.dim();
    check_grid(dim, resolution)?;
    check_budget(sys.len(), n, budget)?;
    let viewport = Viewport::for_system(sys);
    let grid = AnchorGrid::new(sys, n, &viewport, resolution)?;
    let rho = if dilate {
        max_digit_norm(sys) * sys.matrix().inverse_power_tail(n as u32)
    } else {
        BigRational::zero()
    };
    let rho_num = rho.numer().to_i128().ok_or(GeometryError::Overflow)?;
    let rho_den = rho.denom().to_i128().ok_or(GeometryError::Overflow)?;
    let cells = resolution.pow(dim as u32);
    let mut bits = empty_bits(cells);
    let mut raster = Raster::new(resolution, viewport, Cells::Occupancy(Vec::new()));
    let mut err = None;
    let mut lo = vec![0usize; dim];
    let mut hi = vec![0usize; dim];
    walk_words(&grid.table, sys.len(), |_, _, sum| {
        let step = (|| -> Result<(), GeometryError> {
            let (nums, den) = grid.numerators(sum)?;
            let b = checked(den.checked_mul(rho_den))?;
            for i in 0..dim {
                let centre = checked(nums[i].checked_mul(rho_den))?;
                let spread = checked(rho_num.checked_mul(den))?;
                lo[i] = grid.cell(centre - spread, b)?;
                hi[i] = grid.cell(centre + spread, b)?;
            }
            mark_box(&mut bits, &raster, &lo, &hi);
            Ok(())
        })();
        match step {
            Ok(()) => ControlFlow::Continue(()),
            Err(e) => {
                err = Some(e);
                ControlFlow::Break(())
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    raster.cells = Cells::Occupancy(bits);
    raster.depth = Some(n);
    Ok(raster)
}

fn mark_box(bits: &mut [u64], raster: &Raster, lo: &[usize], hi: &[usize]) {
    let mut cur = lo.to_vec();
    loop {
        set_bit(bits, raster.index(&cur));
        let mut i = 0;
        loop {
            if i == cur.len() {
                return;
            }
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

/// Exact anchors `T_{j₁}⋯T_{j_n}(0)` for small `n`, in lexicographic word order.
pub fn anchor_points(sys: &AffineSystem, n: usize, budget: u64) -> Result<Vec<Vec<BigRational>>, GeometryError> {
    check_budget(sys.len(), n, budget)?;
    let mut out = Vec::new();
    for rank in 0..(sys.len() as u64).pow(n as u32) {
        let word = crate::system::Word::from_rank(rank, n, sys.len());
        out.push(sys.compose_word(&word).translation);
    }
    Ok(out)
}

/// One point of a box-counting regression.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxCount {
    pub depth: usize,
    pub resolution: usize,
    pub cell_size: f64,
    pub occupied: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxDimension {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval for the slope.
    pub ci: (f64, f64),
    pub points: Vec<BoxCount>,
}

/// Resolutions matching cell size `2 N^{−(n−1)/d}` to each depth, about the
/// spacing of depth-`n` anchors.
pub fn matched_scales(sys: &AffineSystem, depths: &[usize]) -> Vec<usize> {
    let vp = Viewport::for_system(sys);
    let width = 2.0 * rational_to_f64(&vp.half_width);
    let big_n = sys.len() as f64;
    let d = sys.dim() as f64;
    depths
        .iter()
        .map(|&n| {
            let h = 2.0 * big_n.powf(-((n.max(1) - 1) as f64) / d);
            (4 + (width / h).ceil() as usize).max(MIN_RESOLUTION)
        })
        .collect()
}

/// Least-squares slope of `log(occupied)` against `log(1/cell size)`.
pub fn box_dimension_estimate(sys: &AffineSystem, depths: &[usize], resolutions: &[usize]) -> Result<BoxDimension, GeometryError> {
    if depths.len() != resolutions.len() {
        return Err(GeometryError::ScaleMismatch);
    }
    if depths.len() < 3 {
        return Err(GeometryError::InsufficientScales(depths.len()));
    }
    let mut points = Vec::new();
    for (&n, &res) in depths.iter().zip(resolutions) {
        let r = rasterize_attractor(sys, n, res)?;
        points.push(BoxCount { depth: n, resolution: res, cell_size: r.cell_size(), occupied: r.occupied() });
    }
    let xs: Vec<f64> = points.iter().map(|p| -p.cell_size.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.occupied.max(1) as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(GeometryError::InsufficientScales(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (rss / (k - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, k - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::INFINITY);
    Ok(BoxDimension { slope, intercept, ci: (slope - t * se, slope + t * se), points })
}

/// Floating-point chaos game with uniform letter choice.
pub struct ChaosGame {
    dim: usize,
    inv: Vec<f64>,
    digits: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    tmp: Vec<f64>,
}

impl ChaosGame {
    pub fn new(sys: &AffineSystem, rng: ChaCha8Rng) -> Self {
        let dim = sys.dim();
        let inv = sys.matrix().inv().rows().iter().flatten().map(rational_to_f64).collect();
        let digits = sys.digits().iter().map(|u| u.to_f64(sys.matrix())).collect();
        ChaosGame { dim, inv, digits, rng, tmp: vec![0.0; dim] }
    }

    /// `x = T_{j_steps} ⋯ T_{j_1}(0)` for independent uniform letters.
    pub fn sample(&mut self, x: &mut [f64], steps: usize) {
        x.fill(0.0);
        for _ in 0..steps {
            let u = &self.digits[self.rng.random_range(0..self.digits.len())];
            for i in 0..self.dim {
                let row = &self.inv[i * self.dim..(i + 1) * self.dim];
                self.tmp[i] = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + u[i];
            }
            x.copy_from_slice(&self.tmp);
        }
    }
}

/// Empirical `ν` on the attractor grid from independent chaos-game samples.
pub fn chaos_game_histogram(sys: &AffineSystem, samples: usize, resolution: usize, seed: u64) -> Result<Raster, GeometryError> {
    if samples < MIN_HISTOGRAM_SAMPLES {
        return Err(GeometryError::TooFewSamples);
    }
    check_grid(sys.dim(), resolution)?;
    let mut raster = Raster::new(resolution, Viewport::for_system(sys), Cells::Counts(Vec::new()));
    let mut counts = vec![0u64; raster.cell_count()];
    let mut game = ChaosGame::new(sys, ChaCha8Rng::seed_from_u64(seed));
    let mut x = vec![0.0; sys.dim()];
    for _ in 0..samples {
        game.sample(&mut x, crate::fourier::BURN_IN);
        counts[raster.index(&raster.cell_of_f64(&x))] += 1;
    }
    raster.cells = Cells::Counts(counts);
    raster.seed = Some(seed);
    Ok(raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::certify_expanding;

    fn sys(rows: &[Vec<i64>], digits: &[Vec<i64>]) -> AffineSystem {
        AffineSystem::from_integer_digits(certify_expanding(rows, 64).unwrap(), digits).unwrap()
    }

    fn f1() -> AffineSystem {
        sys(&[vec![3]], &[vec![0], vec![1], vec![2]])
    }

    fn f2() -> AffineSystem {
        sys(&[vec![3]], &[vec![0], vec![1], vec![3]])
    }

    fn zeros() -> AffineSystem {
        sys(&[vec![3]], &[vec![0], vec![0], vec![0]])
    }

    #[test]
    fn f1_viewport_is_tight() {
        assert_eq!(attractor_radius(&f1()), BigRational::from_integer(3.into()));
        assert_eq!(Viewport::for_system(&f1()).half_width, BigRational::from_integer(3.into()));
    }

    #[test]
    fn f1_raster_is_contiguous_interval() {
        let r = rasterize_attractor(&f1(), 8, 1024).unwrap();
        let occ: Vec<usize> = (0..1024).filter(|&i| r.is_occupied(i)).collect();
        let (a, b) = (occ[0], *occ.last().unwrap());
        assert_eq!(occ.len(), b - a + 1);
        let o = r.cell_origin(&[a])[0];
        let e = r.cell_origin(&[b])[0] + r.cell_size();
        assert!(o <= 0.0 && o > -r.cell_size());
        assert!(e >= 3.0 - 3f64.powi(-7) && e < 3.0 + r.cell_size());
    }

    #[test]
    fn zero_digits_single_cell() {
        let r = rasterize_attractor(&zeros(), 5, 64).unwrap();
        assert_eq!(r.occupied(), 1);
        let h = Viewport::for_system(&zeros()).cell_size(64);
        assert!(measure_estimate(&zeros(), 5, 64).unwrap() <= h);
        let hist = chaos_game_histogram(&zeros(), 10_000, 64, 1).unwrap();
        assert_eq!(hist.occupied(), 1);
        assert_eq!(hist.total(), 10_000);
    }

    #[test]
    fn f1_measure_close_to_three() {
        let m = measure_estimate(&f1(), 10, 2048).unwrap();
        assert!((m - 3.0).abs() <= 0.15, "{m}");
    }

    #[test]
    fn f2_measure_decreases() {
        let ms: Vec<f64> = (4..=9).map(|n| measure_estimate(&f2(), n, 4096).unwrap()).collect();
        assert!(ms.windows(2).all(|w| w[1] <= w[0]), "{ms:?}");
        assert!(ms[5] < 0.75 * ms[0], "{ms:?}");
    }

    #[test]
    fn box_dimensions() {
        let depths = [5, 6, 7, 8, 9];
        let f1d = box_dimension_estimate(&f1(), &depths, &matched_scales(&f1(), &depths)).unwrap();
        assert!((0.95..=1.05).contains(&f1d.slope), "{f1d:?}");
        let f2d = box_dimension_estimate(&f2(), &depths, &matched_scales(&f2(), &depths)).unwrap();
        assert!(f2d.slope <= 0.98, "{f2d:?}");
        assert!(box_dimension_estimate(&f1(), &[3, 4], &[16, 32]).is_err());
    }

    #[test]
    fn pgm_layout() {
        let r = rasterize_attractor(&f1(), 3, 16).unwrap();
        let pgm = r.to_pgm().unwrap();
        let header = b"P5\n16 32\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 16 * 32);
    }

    #[test]
    fn budget_exceeded() {
        assert!(matches!(
            rasterize_attractor_with(&f1(), 10, 64, 100),
            Err(GeometryError::System(SystemError::BudgetExceeded { .. }))
        ));
    }

    #[test]
    fn histogram_deterministic() {
        let a = chaos_game_histogram(&f2(), 10_000, 64, 5).unwrap();
        let b = chaos_game_histogram(&f2(), 10_000, 64, 5).unwrap();
        assert_eq!(a, b);
    }
}
