//! Measurement datasets on an integer grid.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Integer grid coordinate: die column/row on a wafer, CLB column/row on an FPGA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridPoint {
    pub x: i32,
    pub y: i32,
}

impl GridPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

/// One measured point. `valid == false` marks a faulty die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialSample {
    pub x: i32,
    pub y: i32,
    pub value: f64,
    pub valid: bool,
}

impl SpatialSample {
    pub const fn new(x: i32, y: i32, value: f64) -> Self {
        Self {
            x,
            y,
            value,
            valid: true,
        }
    }

    pub const fn point(&self) -> GridPoint {
        GridPoint::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetMeta {
    /// File name, wafer id or FPGA path id.
    pub source: String,
    /// Measured quantity, e.g. "idd_dynamic" or "ro_frequency".
    pub measurement: String,
    pub unit: String,
}

/// Inclusive coordinate bounds of the grid a dataset lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridBounds {
    pub x_min: i32,
    pub x_max: i32,
    pub y_min: i32,
    pub y_max: i32,
}

impl GridBounds {
    pub fn width(&self) -> u32 {
        (self.x_max - self.x_min) as u32 + 1
    }

    pub fn height(&self) -> u32 {
        (self.y_max - self.y_min) as u32 + 1
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    /// Tightest bounds around `points`, `None` when empty.
    pub fn enclosing(points: impl IntoIterator<Item = GridPoint>) -> Option<Self> {
        points.into_iter().fold(None, |acc, p| {
            Some(match acc {
                None => GridBounds {
                    x_min: p.x,
                    x_max: p.x,
                    y_min: p.y,
                    y_max: p.y,
                },
                Some(b) => GridBounds {
                    x_min: b.x_min.min(p.x),
                    x_max: b.x_max.max(p.x),
                    y_min: b.y_min.min(p.y),
                    y_max: b.y_max.max(p.y),
                },
            })
        })
    }
}

/// A validated, immutable collection of samples on a grid.
///
/// Invariants checked at construction: at least one sample, no repeated
/// `(x, y)`, finite values on valid samples, every sample inside the bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<SpatialSample>,
    bounds: GridBounds,
    meta: DatasetMeta,
}

impl Dataset {
    /// Builds a dataset whose bounds are inferred from the samples.
    pub fn new(samples: Vec<SpatialSample>, meta: DatasetMeta) -> Result<Self> {
        let bounds = GridBounds::enclosing(samples.iter().map(SpatialSample::point)).ok_or(Error::Empty)?;
        Self::with_bounds(samples, bounds, meta)
    }

    pub fn with_bounds(samples: Vec<SpatialSample>, bounds: GridBounds, meta: DatasetMeta) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        if bounds.x_min > bounds.x_max || bounds.y_min > bounds.y_max {
            return Err(Error::InvalidConfig("grid bounds are inverted".into()));
        }
        let mut seen = BTreeSet::new();
        for (index, s) in samples.iter().enumerate() {
            if s.valid && !s.value.is_finite() {
                return Err(Error::NonFiniteValue { index });
            }
            if !bounds.contains(s.point()) {
                return Err(Error::OutOfBounds { index, x: s.x, y: s.y });
            }
            if !seen.insert(s.point()) {
                return Err(Error::DuplicateCoordinate { x: s.x, y: s.y });
            }
        }
        Ok(Self { samples, bounds, meta })
    }

    pub fn samples(&self) -> &[SpatialSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn bounds(&self) -> GridBounds {
        self.bounds
    }

    pub fn grid_width(&self) -> u32 {
        self.bounds.width()
    }

    pub fn grid_height(&self) -> u32 {
        self.bounds.height()
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    pub fn points(&self) -> Vec<GridPoint> {
        self.samples.iter().map(SpatialSample::point).collect()
    }

    pub fn with_meta(mut self, meta: DatasetMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Same coordinates and metadata, values replaced element-wise.
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| SpatialSample { value: f(s.value), ..*s })
            .collect();
        Self::with_bounds(samples, self.bounds, self.meta.clone())
    }

    /// Drops samples flagged invalid, keeping order and bounds.
    pub fn filter_faulty(&self) -> Result<Self> {
        let samples: Vec<_> = self.samples.iter().copied().filter(|s| s.valid).collect();
        if samples.len() < 2 {
            return Err(Error::TooFewSamples {
                n: samples.len(),
                min: 2,
            });
        }
        Self::with_bounds(samples, self.bounds, self.meta.clone())
    }

    /// Standardizes values to zero mean and unit population standard deviation.
    pub fn normalize_values(&self) -> Result<(Self, NormParams)> {
        let params = NormParams::fit(&self.values())?;
        Ok((self.map_values(|v| params.normalize(v))?, params))
    }
}

/// Affine value standardization `z = (v - mean) / std`.
///
/// `std` uses the population (divide by N) convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParams {
    pub mean: f64,
    pub std: f64,
}

impl NormParams {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewSamples {
                n: values.len(),
                min: 2,
            });
        }
        let first = values[0];
        if values.iter().all(|&v| v == first) {
            return Err(Error::ZeroVariance);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = libm::sqrt(var);
        if !(std > 0.0 && std.is_finite()) {
            return Err(Error::ZeroVariance);
        }
        Ok(Self { mean, std })
    }

    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn denormalize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ds(values: &[f64]) -> Dataset {
        let samples = values
            .iter()
            .enumerate()
            .map(|(i, &v)| SpatialSample::new(i as i32, 0, v))
            .collect();
        Dataset::new(samples, DatasetMeta::default()).unwrap()
    }

    #[test]
    fn bounds_are_inferred() {
        let d = ds(&[1.5, 2.5]);
        assert_eq!(d.len(), 2);
        assert_eq!((d.grid_width(), d.grid_height()), (2, 1));
    }

    #[test]
    fn duplicate_coordinates_rejected() {
        let s = vec![SpatialSample::new(3, 4, 1.0), SpatialSample::new(3, 4, 2.0)];
        assert_eq!(
            Dataset::new(s, DatasetMeta::default()),
            Err(Error::DuplicateCoordinate { x: 3, y: 4 })
        );
    }

    #[test]
    fn nan_only_allowed_on_invalid_samples() {
        let mut s = vec![SpatialSample::new(0, 0, f64::NAN), SpatialSample::new(1, 0, 2.0)];
        assert_eq!(
            Dataset::new(s.clone(), DatasetMeta::default()),
            Err(Error::NonFiniteValue { index: 0 })
        );
        s[0].valid = false;
        assert!(Dataset::new(s, DatasetMeta::default()).is_ok());
    }

    #[test]
    fn explicit_bounds_checked() {
        let b = GridBounds {
            x_min: 0,
            x_max: 1,
            y_min: 0,
            y_max: 1,
        };
        let s = vec![SpatialSample::new(2, 0, 1.0)];
        assert!(matches!(
            Dataset::with_bounds(s, b, DatasetMeta::default()),
            Err(Error::OutOfBounds { index: 0, .. })
        ));
    }

    #[test]
    fn filter_faulty_counts() {
        let mut samples: Vec<_> = (0..10).map(|i| SpatialSample::new(i, 0, i as f64)).collect();
        for s in samples.iter_mut().take(3) {
            s.valid = false;
        }
        let d = Dataset::new(samples.clone(), DatasetMeta::default()).unwrap();
        let f = d.filter_faulty().unwrap();
        assert_eq!(f.len(), 7);
        assert!(f.samples().iter().all(|s| s.valid));
        assert_eq!(f.samples()[0].x, 3);
        assert_eq!(f.filter_faulty().unwrap(), f);

        let all_valid = ds(&[1.0, 2.0, 3.0]);
        assert_eq!(all_valid.filter_faulty().unwrap(), all_valid);

        for s in samples.iter_mut().take(9) {
            s.valid = false;
        }
        let d = Dataset::new(samples, DatasetMeta::default()).unwrap();
        assert_eq!(d.filter_faulty(), Err(Error::TooFewSamples { n: 1, min: 2 }));
    }

    #[test]
    fn normalize_two_values() {
        let (n, p) = ds(&[1.0, 3.0]).normalize_values().unwrap();
        assert_eq!(n.values(), vec![-1.0, 1.0]);
        assert_eq!(p, NormParams { mean: 2.0, std: 1.0 });
    }

    #[test]
    fn normalize_is_idempotent_on_standard_input() {
        let (once, _) = ds(&[0.3, -1.2, 4.0, 2.2, 0.0]).normalize_values().unwrap();
        let (twice, p) = once.normalize_values().unwrap();
        assert!(p.mean.abs() < 1e-9 && (p.std - 1.0).abs() < 1e-9);
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_variance_rejected() {
        assert_eq!(ds(&[5.0, 5.0, 5.0]).normalize_values(), Err(Error::ZeroVariance));
    }
}
