//! Synthetic wafer maps and FPGA ring-oscillator maps.
//!
//! Both generators build values from a smooth spatially correlated field,
//! drawn from a unit-variance RBF Gaussian process on a coarse lattice and
//! bilinearly interpolated onto the integer grid, plus independent noise.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Dataset, DatasetMeta, GridBounds, SpatialSample};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::seeded_rng;

/// Coarse lattice cap per axis for field synthesis.
const MAX_LATTICE: usize = 48;

/// A smooth random field sampled on a coarse lattice covering
/// `[0, width-1] × [0, height-1]`.
#[derive(Debug, Clone)]
pub struct SmoothField {
    spacing: f64,
    nx: usize,
    ny: usize,
    nodes: Vec<f64>,
}

impl SmoothField {
    /// Draws a field with unit marginal variance and RBF correlation at
    /// `length_scale` grid units.
    pub fn sample<R: Rng>(width: u32, height: u32, length_scale: f64, rng: &mut R) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::InvalidConfig("field length scale must be positive".into()));
        }
        let span = f64::from(width.max(height).max(2) - 1);
        let spacing = (length_scale / 2.0).max(span / (MAX_LATTICE - 1) as f64);
        let nx = libm::ceil(f64::from(width.max(1) - 1) / spacing) as usize + 1;
        let ny = libm::ceil(f64::from(height.max(1) - 1) / spacing) as usize + 1;
        let pos = |k: usize| ((k % nx) as f64 * spacing, (k / nx) as f64 * spacing);
        let inv_2l2 = 1.0 / (2.0 * length_scale * length_scale);
        let mut cov = Matrix::from_fn(nx * ny, |a, b| {
            let (ax, ay) = pos(a);
            let (bx, by) = pos(b);
            libm::exp(-((ax - bx) * (ax - bx) + (ay - by) * (ay - by)) * inv_2l2)
        });
        let mut jitter = 1e-10;
        cov.add_diagonal(jitter);
        let chol = loop {
            if let Some(c) = Cholesky::factor(&cov) {
                break c;
            }
            if jitter >= 1e-2 {
                return Err(Error::NotPositiveDefinite { jitter });
            }
            cov.add_diagonal(jitter * 9.0);
            jitter *= 10.0;
        };
        let z: Vec<f64> = (0..nx * ny).map(|_| rng.sample(StandardNormal)).collect();
        let l = chol.lower();
        let nodes = (0..nx * ny)
            .map(|i| l.row(i)[..=i].iter().zip(&z).map(|(a, b)| a * b).sum())
            .collect();
        Ok(Self { spacing, nx, ny, nodes })
    }

    /// Bilinear interpolation at grid coordinate `(x, y)`.
    pub fn at(&self, x: f64, y: f64) -> f64 {
        let fx = (x / self.spacing).clamp(0.0, (self.nx - 1) as f64);
        let fy = (y / self.spacing).clamp(0.0, (self.ny - 1) as f64);
        let i0 = (libm::floor(fx) as usize).min(self.nx.saturating_sub(2));
        let j0 = (libm::floor(fy) as usize).min(self.ny.saturating_sub(2));
        let i1 = (i0 + 1).min(self.nx - 1);
        let j1 = (j0 + 1).min(self.ny - 1);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let n = |i: usize, j: usize| self.nodes[j * self.nx + i];
        (1.0 - ty) * ((1.0 - tx) * n(i0, j0) + tx * n(i1, j0)) + ty * ((1.0 - tx) * n(i0, j1) + tx * n(i1, j1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaferSynthConfig {
    pub approx_devices: usize,
    pub base_value: f64,
    /// Value added at the wafer edge by the quadratic radial trend.
    pub radial_trend_amplitude: f64,
    /// Standard deviation of the smooth correlated field.
    pub field_amplitude: f64,
    pub field_length_scale: f64,
    pub noise_std: f64,
    /// Fraction of dies flagged faulty (`valid = false`).
    pub faulty_fraction: f64,
    pub seed: u64,
}

impl Default for WaferSynthConfig {
    fn default() -> Self {
        Self {
            approx_devices: 6000,
            base_value: 10.0,
            radial_trend_amplitude: 1.0,
            field_amplitude: 0.5,
            field_length_scale: 4.0,
            noise_std: 0.01,
            faulty_fraction: 0.0,
            seed: 0,
        }
    }
}

impl WaferSynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.approx_devices < 100 {
            return Err(Error::InvalidConfig("approx_devices must be at least 100".into()));
        }
        if !(self.field_length_scale > 0.0) {
            return Err(Error::InvalidConfig("field_length_scale must be positive".into()));
        }
        if !(self.noise_std >= 0.0) || !(self.field_amplitude >= 0.0) {
            return Err(Error::InvalidConfig(
                "noise_std and field_amplitude must be non-negative".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.faulty_fraction) {
            return Err(Error::InvalidConfig("faulty_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Circular wafer on a square grid, about `approx_devices` dies.
pub fn gen_wafer(cfg: &WaferSynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let target = cfg.approx_devices;
    let side = libm::ceil(libm::sqrt(4.0 * target as f64 / core::f64::consts::PI)) as i32 + 2;
    let c = f64::from(side - 1) / 2.0;
    let mut cells: Vec<(f64, i32, i32)> = (0..side)
        .flat_map(|y| (0..side).map(move |x| (x, y)))
        .map(|(x, y)| {
            let dx = f64::from(x) - c;
            let dy = f64::from(y) - c;
            (dx * dx + dy * dy, x, y)
        })
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));
    // Ties make the disk grow a ring at a time: take whichever of the ring
    // containing the target-th cell or the one before lands closer.
    let mut r2 = cells[target - 1].0;
    let below = cells.partition_point(|c| c.0 < r2);
    let through = cells.partition_point(|c| c.0 <= r2);
    if below > 0 && target - below < through - target {
        r2 = cells[below - 1].0;
    }
    let mut die: Vec<(i32, i32, f64)> = cells
        .iter()
        .filter(|cell| cell.0 <= r2)
        .map(|&(d2, x, y)| (x, y, d2))
        .collect();
    let count = die.len();
    if count.abs_diff(target) * 20 > target {
        return Err(Error::InfeasibleLayout(format!(
            "disk holds {count} dies, more than 5% away from {target}"
        )));
    }
    die.sort_by_key(|&(x, y, _)| (y, x));

    let mut rng = seeded_rng(cfg.seed);
    let field = SmoothField::sample(side as u32, side as u32, cfg.field_length_scale, &mut rng)?;
    let mut samples: Vec<SpatialSample> = die
        .iter()
        .map(|&(x, y, d2)| {
            let rho2 = if r2 > 0.0 { d2 / r2 } else { 0.0 };
            let noise: f64 = rng.sample(StandardNormal);
            let value = cfg.base_value
                + cfg.radial_trend_amplitude * rho2
                + cfg.field_amplitude * field.at(f64::from(x), f64::from(y))
                + cfg.noise_std * noise;
            SpatialSample::new(x, y, value)
        })
        .collect();
    let faulty = libm::round(cfg.faulty_fraction * samples.len() as f64) as usize;
    for i in index::sample(&mut rng, samples.len(), faulty) {
        samples[i].valid = false;
    }
    let bounds = GridBounds {
        x_min: 0,
        x_max: side - 1,
        y_min: 0,
        y_max: side - 1,
    };
    Dataset::with_bounds(
        samples,
        bounds,
        DatasetMeta {
            source: format!("synthetic-wafer-{}", cfg.seed),
            measurement: "idd_dynamic".into(),
            unit: "mA".into(),
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpgaSynthConfig {
    pub width: u32,
    pub height: u32,
    pub n_points: usize,
    pub n_paths: usize,
    pub base_frequency: f64,
    /// Standard deviation of the field shared by all paths.
    pub field_amplitude: f64,
    pub field_length_scale: f64,
    /// Standard deviation of the constant offset drawn per path.
    pub path_offset_std: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for FpgaSynthConfig {
    fn default() -> Self {
        Self {
            width: 33,
            height: 120,
            n_points: 3173,
            n_paths: 32,
            base_frequency: 400.0,
            field_amplitude: 6.0,
            field_length_scale: 8.0,
            path_offset_std: 3.0,
            noise_std: 0.3,
            seed: 0,
        }
    }
}

impl FpgaSynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.n_points == 0 || self.n_paths == 0 {
            return Err(Error::InvalidConfig("FPGA dimensions and counts must be positive".into()));
        }
        if self.n_points > self.width as usize * self.height as usize {
            return Err(Error::InfeasibleLayout(format!(
                "{} ROs do not fit on a {}x{} grid",
                self.n_points, self.width, self.height
            )));
        }
        if !(self.field_length_scale > 0.0) || !(self.noise_std >= 0.0) || !(self.path_offset_std >= 0.0) {
            return Err(Error::InvalidConfig("invalid FPGA field parameters".into()));
        }
        Ok(())
    }
}

/// RO placement: whole empty columns (hard-block columns on the die) spread
/// evenly across the width, then random holes for the remainder.
fn fpga_layout<R: Rng>(cfg: &FpgaSynthConfig, rng: &mut R) -> Vec<(i32, i32)> {
    let (w, h) = (cfg.width as usize, cfg.height as usize);
    let empty = w * h - cfg.n_points;
    let empty_cols = (empty / h).min(w.saturating_sub(1));
    let mut skip = vec![false; w];
    for i in 0..empty_cols {
        let col = ((i + 1) * w) / (empty_cols + 1);
        skip[col.min(w - 1)] = true;
    }
    let mut cells: Vec<(i32, i32)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, _)| !skip[x])
        .map(|(x, y)| (x as i32, y as i32))
        .collect();
    let holes = cells.len() - cfg.n_points;
    let mut drop: Vec<usize> = index::sample(rng, cells.len(), holes).into_vec();
    drop.sort_unstable_by(|a, b| b.cmp(a));
    for i in drop {
        cells.remove(i);
    }
    cells
}

/// One dataset per RO path, all on the same layout.
pub fn gen_fpga(cfg: &FpgaSynthConfig) -> Result<Vec<Dataset>> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let layout = fpga_layout(cfg, &mut rng);
    let field = SmoothField::sample(cfg.width, cfg.height, cfg.field_length_scale, &mut rng)?;
    let shared: Vec<f64> = layout
        .iter()
        .map(|&(x, y)| cfg.field_amplitude * field.at(f64::from(x), f64::from(y)))
        .collect();
    let bounds = GridBounds {
        x_min: 0,
        x_max: cfg.width as i32 - 1,
        y_min: 0,
        y_max: cfg.height as i32 - 1,
    };
    let mut paths = Vec::with_capacity(cfg.n_paths);
    for path in 0..cfg.n_paths {
        let offset = cfg.path_offset_std * rng.sample::<f64, _>(StandardNormal);
        let samples = layout
            .iter()
            .zip(&shared)
            .map(|(&(x, y), s)| {
                let noise: f64 = rng.sample(StandardNormal);
                SpatialSample::new(x, y, cfg.base_frequency + s + offset + cfg.noise_std * noise)
            })
            .collect();
        let meta = DatasetMeta {
            source: path_id(cfg.seed, path),
            measurement: "ro_frequency".into(),
            unit: "MHz".into(),
        };
        paths.push(Dataset::with_bounds(samples, bounds, meta)?);
    }
    Ok(paths)
}

fn path_id(seed: u64, path: usize) -> String {
    format!("synthetic-fpga-{seed}-path-{:02}", path + 1)
}
