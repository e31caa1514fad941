//! Gaussian process regression on 2-D grid coordinates.
//!
//! Zero prior mean, squared-exponential (RBF) covariance
//! `k(a, b) = σ_f² exp(-‖a - b‖² / 2l²)` and i.i.d. Gaussian observation
//! noise `σ_n²`. Hyperparameters are fitted by maximizing the log marginal
//! likelihood with projected gradient ascent in log-parameter space.
//!
//! Training values are expected to be standardized (see
//! [`crate::dataset::NormParams`]); coordinates are used as-is.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::GridPoint;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

impl From<GridPoint> for Point2 {
    fn from(p: GridPoint) -> Self {
        Point2::new(f64::from(p.x), f64::from(p.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GprHyperparams {
    /// `l`, in grid units.
    pub length_scale: f64,
    /// `σ_f²`.
    pub signal_variance: f64,
    /// `σ_n²`.
    pub noise_variance: f64,
}

impl GprHyperparams {
    pub fn new(length_scale: f64, signal_variance: f64, noise_variance: f64) -> Self {
        Self {
            length_scale,
            signal_variance,
            noise_variance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.length_scale) && ok(self.signal_variance) && self.noise_variance.is_finite() && self.noise_variance >= 0.0
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig("hyperparameters must be finite, l and σ_f² positive".into()))
        }
    }

    fn to_log(self) -> [f64; 3] {
        [
            libm::log(self.length_scale),
            libm::log(self.signal_variance),
            libm::log(self.noise_variance),
        ]
    }

    fn from_log(theta: [f64; 3]) -> Self {
        Self::new(libm::exp(theta[0]), libm::exp(theta[1]), libm::exp(theta[2]))
    }
}

/// `σ_f² exp(-‖a - b‖² / 2l²)`.
#[inline]
pub fn rbf_kernel(a: Point2, b: Point2, hp: &GprHyperparams) -> f64 {
    let l2 = hp.length_scale * hp.length_scale;
    hp.signal_variance * libm::exp(-a.dist2(b) / (2.0 * l2))
}

/// Covariance matrix of `points` without the noise term.
pub fn kernel_matrix(points: &[Point2], hp: &GprHyperparams) -> Matrix {
    let n = points.len();
    let mut k = Matrix::zeros(n);
    for i in 0..n {
        k.set(i, i, hp.signal_variance);
        for j in 0..i {
            let v = rbf_kernel(points[i], points[j], hp);
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

/// Extra diagonal jitter tried, in order, when `K + σ_n² I` fails to factor.
const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Factors `K + σ_n² I`, escalating jitter on failure. Returns the factor and
/// the extra jitter that was needed.
fn factor_with_jitter(points: &[Point2], hp: &GprHyperparams) -> Result<(Cholesky, f64)> {
    let mut k = kernel_matrix(points, hp);
    k.add_diagonal(hp.noise_variance);
    let mut applied = 0.0;
    for &jitter in &JITTER_LADDER {
        k.add_diagonal(jitter - applied);
        applied = jitter;
        if let Some(c) = Cholesky::factor(&k) {
            return Ok((c, jitter));
        }
    }
    Err(Error::NotPositiveDefinite {
        jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
    })
}

/// Log marginal likelihood and its gradient with respect to
/// `(log l, log σ_f², log σ_n²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmlEval {
    pub value: f64,
    pub gradient: [f64; 3],
}

struct LmlState {
    chol: Cholesky,
    alpha: Vec<f64>,
    value: f64,
    jitter: f64,
}

fn lml_state(points: &[Point2], values: &[f64], hp: &GprHyperparams) -> Result<LmlState> {
    let (chol, jitter) = factor_with_jitter(points, hp)?;
    let alpha = chol.solve(values);
    let fit: f64 = values.iter().zip(&alpha).map(|(v, a)| v * a).sum();
    let m = values.len() as f64;
    let value = -0.5 * fit - 0.5 * chol.log_det() - 0.5 * m * LN_2PI;
    Ok(LmlState {
        chol,
        alpha,
        value,
        jitter,
    })
}

fn lml_gradient(points: &[Point2], hp: &GprHyperparams, state: &LmlState) -> [f64; 3] {
    // dLML/dθ = ½ tr((ααᵀ - A⁻¹) ∂A/∂θ), with W = ααᵀ - A⁻¹ symmetric.
    let inv = state.chol.inverse();
    let n = points.len();
    let l2 = hp.length_scale * hp.length_scale;
    let alpha = &state.alpha;
    let (mut g_len, mut g_sig, mut trace_w) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let inv_row = inv.row(i);
        let w_ii = alpha[i] * alpha[i] - inv_row[i];
        trace_w += w_ii;
        g_sig += w_ii * hp.signal_variance;
        for j in 0..i {
            let w = alpha[i] * alpha[j] - inv_row[j];
            let d2 = points[i].dist2(points[j]);
            let kf = hp.signal_variance * libm::exp(-d2 / (2.0 * l2));
            // Off-diagonal terms appear twice in the trace.
            g_sig += 2.0 * w * kf;
            g_len += 2.0 * w * kf * d2 / l2;
        }
    }
    [0.5 * g_len, 0.5 * g_sig, 0.5 * trace_w * hp.noise_variance]
}

/// Log marginal likelihood `-½ vᵀA⁻¹v - ½ log|A| - (M/2) log 2π` with
/// `A = K + σ_n² I`, plus its analytic gradient in log-parameters.
pub fn log_marginal_likelihood(hp: &GprHyperparams, points: &[Point2], values: &[f64]) -> Result<LmlEval> {
    check_training(points, values)?;
    hp.validate()?;
    let state = lml_state(points, values, hp)?;
    let gradient = lml_gradient(points, hp, &state);
    Ok(LmlEval {
        value: state.value,
        gradient,
    })
}

fn check_training(points: &[Point2], values: &[f64]) -> Result<()> {
    if points.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: values.len(),
        });
    }
    if points.len() < 2 {
        return Err(Error::TooFewSamples {
            n: points.len(),
            min: 2,
        });
    }
    Ok(())
}

/// Settings for maximum-likelihood hyperparameter fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub restarts: usize,
    /// Initial length scales as fractions of the training-point extent.
    /// Restart `i` uses entry `i`; restarts past the end keep doubling the last one.
    pub length_scale_multipliers: Vec<f64>,
    pub max_iterations: usize,
    /// Stop once an accepted step improves the LML by less than
    /// `tolerance * max(1, |LML|)`.
    pub tolerance: f64,
    /// Lower bound on `σ_n²`.
    pub jitter_floor: f64,
    pub initial_signal_variance: f64,
    pub initial_noise_variance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 3,
            length_scale_multipliers: vec![0.05, 0.1, 0.3],
            max_iterations: 200,
            tolerance: 1e-6,
            jitter_floor: 1e-10,
            initial_signal_variance: 1.0,
            initial_noise_variance: 0.1,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.length_scale_multipliers.is_empty() || self.length_scale_multipliers.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::InvalidConfig("length-scale multipliers must be positive".into()));
        }
        if !(self.jitter_floor > 0.0) || !(self.tolerance >= 0.0) {
            return Err(Error::InvalidConfig("jitter floor must be positive, tolerance non-negative".into()));
        }
        Ok(())
    }

    fn multiplier(&self, restart: usize) -> f64 {
        let m = &self.length_scale_multipliers;
        match m.get(restart) {
            Some(&v) => v,
            None => m[m.len() - 1] * libm::pow(2.0, (restart + 1 - m.len()) as f64),
        }
    }
}

/// Box constraints on log-parameters.
struct LogBounds {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl LogBounds {
    fn new(extent: f64, cfg: &FitConfig) -> Self {
        Self {
            lo: [libm::log(1e-2), libm::log(1e-6), libm::log(cfg.jitter_floor)],
            hi: [libm::log(1e3 * extent), libm::log(1e6), libm::log(1e2)],
        }
    }

    fn project(&self, mut theta: [f64; 3]) -> [f64; 3] {
        for k in 0..3 {
            theta[k] = theta[k].clamp(self.lo[k], self.hi[k]);
        }
        theta
    }
}

/// One restart of projected gradient ascent with Armijo backtracking.
/// Trial steps start from the Barzilai-Borwein length of the previous step.
fn ascend(
    points: &[Point2],
    values: &[f64],
    start: [f64; 3],
    bounds: &LogBounds,
    cfg: &FitConfig,
) -> Result<([f64; 3], f64)> {
    let mut theta = bounds.project(start);
    let hp = GprHyperparams::from_log(theta);
    let state = lml_state(points, values, &hp)?;
    let mut value = state.value;
    let mut grad = lml_gradient(points, &hp, &state);
    let gnorm = norm_inf(&grad);
    let mut step = if gnorm > 0.0 { 0.5 / gnorm } else { 1.0 };

    for _ in 0..cfg.max_iterations {
        let mut accepted = None;
        let mut s = step;
        while s > 1e-14 {
            let trial = bounds.project(add_scaled(theta, s, grad));
            let delta = sub(trial, theta);
            let predicted: f64 = dot3(grad, delta);
            if predicted <= 0.0 {
                break;
            }
            let trial_hp = GprHyperparams::from_log(trial);
            if let Ok(st) = lml_state(points, values, &trial_hp) {
                if st.value.is_finite() && st.value >= value + 1e-4 * predicted {
                    accepted = Some((trial, trial_hp, st));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((next, next_hp, next_state)) = accepted else {
            break;
        };
        let next_grad = lml_gradient(points, &next_hp, &next_state);
        let improvement = next_state.value - value;
        let ds = sub(next, theta);
        let dg = sub(next_grad, grad);
        theta = next;
        value = next_state.value;
        grad = next_grad;
        if improvement < cfg.tolerance * value.abs().max(1.0) {
            break;
        }
        // Ascent on a locally concave objective gives ds·dg < 0.
        let curvature = -dot3(ds, dg);
        step = if curvature > 0.0 {
            dot3(ds, ds) / curvature
        } else {
            s * 2.0
        };
    }
    Ok((theta, value))
}

fn norm_inf(v: &[f64; 3]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add_scaled(a: [f64; 3], s: f64, d: [f64; 3]) -> [f64; 3] {
    [a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]]
}

fn extent(points: &[Point2]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0).max(y1 - y0).max(1.0)
}

/// Fits hyperparameters by maximum marginal likelihood and returns the
/// conditioned model with the best likelihood over all restarts.
pub fn fit(points: &[Point2], values: &[f64], cfg: &FitConfig) -> Result<GprModel> {
    check_training(points, values)?;
    cfg.validate()?;
    let ext = extent(points);
    let bounds = LogBounds::new(ext, cfg);
    let mut best: Option<([f64; 3], f64)> = None;
    for r in 0..cfg.restarts {
        let start = GprHyperparams::new(
            cfg.multiplier(r) * ext,
            cfg.initial_signal_variance,
            cfg.initial_noise_variance.max(cfg.jitter_floor),
        )
        .to_log();
        if let Ok((theta, value)) = ascend(points, values, start, &bounds, cfg) {
            if best.map_or(true, |(_, v)| value > v) {
                best = Some((theta, value));
            }
        }
    }
    let (theta, _) = best.ok_or(Error::FitFailed { restarts: cfg.restarts })?;
    GprModel::new(points, values, GprHyperparams::from_log(theta))
}

/// A GP conditioned on training data under fixed hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GprModel {
    train_points: Vec<Point2>,
    hyperparams: GprHyperparams,
    chol: Cholesky,
    weights: Vec<f64>,
    jitter: f64,
    log_likelihood: f64,
}

impl GprModel {
    /// Conditions on `(points, values)` without fitting.
    pub fn new(points: &[Point2], values: &[f64], hyperparams: GprHyperparams) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: values.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::Empty);
        }
        hyperparams.validate()?;
        let state = lml_state(points, values, &hyperparams)?;
        if state.alpha.iter().any(|w| !w.is_finite()) {
            return Err(Error::NotPositiveDefinite { jitter: state.jitter });
        }
        Ok(Self {
            train_points: points.to_vec(),
            hyperparams,
            chol: state.chol,
            weights: state.alpha,
            jitter: state.jitter,
            log_likelihood: state.value,
        })
    }

    pub fn hyperparams(&self) -> &GprHyperparams {
        &self.hyperparams
    }

    pub fn train_points(&self) -> &[Point2] {
        &self.train_points
    }

    /// Lower Cholesky factor of `K + (σ_n² + jitter) I`.
    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    /// `(K + σ_n² I)⁻¹ v`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Extra diagonal jitter that was needed to factor the covariance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    fn cross_cov(&self, q: Point2) -> Vec<f64> {
        self.train_points
            .iter()
            .map(|&p| rbf_kernel(q, p, &self.hyperparams))
            .collect()
    }

    /// Predictive mean `k_*ᵀ (K + σ_n² I)⁻¹ v` at each query.
    pub fn predict_mean(&self, queries: &[Point2]) -> Vec<f64> {
        queries
            .iter()
            .map(|&q| {
                self.train_points
                    .iter()
                    .zip(&self.weights)
                    .map(|(&p, w)| rbf_kernel(q, p, &self.hyperparams) * w)
                    .sum()
            })
            .collect()
    }

    /// Latent predictive variance `σ_f² - k_*ᵀ (K + σ_n² I)⁻¹ k_*`.
    pub fn predict_variance(&self, queries: &[Point2]) -> Vec<f64> {
        queries
            .iter()
            .map(|&q| {
                let v = self.chol.forward(&self.cross_cov(q));
                let reduction: f64 = v.iter().map(|x| x * x).sum();
                (self.hyperparams.signal_variance - reduction).max(0.0)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use rand::Rng;

    fn hp(l: f64, sf: f64, sn: f64) -> GprHyperparams {
        GprHyperparams::new(l, sf, sn)
    }

    #[test]
    fn kernel_values() {
        let h = hp(1.5, 1.0, 0.0);
        let a = Point2::new(0.3, -1.0);
        assert_eq!(rbf_kernel(a, a, &h), 1.0);
        // ‖a-b‖² = 2l² gives e⁻¹.
        let b = Point2::new(0.3 + 1.5 * libm::sqrt(2.0), -1.0);
        assert!((rbf_kernel(a, b, &h) - 0.367_879_441_171_442_33).abs() < 1e-12);
        let mut rng = seeded_rng(3);
        for _ in 0..100 {
            let p = Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let q = Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let k = rbf_kernel(p, q, &h);
            assert_eq!(k, rbf_kernel(q, p, &h));
            assert!(k > 0.0 && k <= 1.0);
        }
    }

    #[test]
    fn kernel_matrix_shapes() {
        let h = hp(2.0, 0.7, 0.0);
        let one = kernel_matrix(&[Point2::new(1.0, 1.0)], &h);
        assert_eq!(one.dim(), 1);
        assert_eq!(one.get(0, 0), 0.7);

        let p = Point2::new(2.0, 3.0);
        let dup = kernel_matrix(&[p, p, Point2::new(0.0, 0.0)], &h);
        assert_eq!(dup.row(0), dup.row(1));
        // Rank deficient: the factorization fails or hits a vanishing pivot.
        assert!(Cholesky::factor(&dup).map_or(true, |c| c.lower().get(1, 1) < 1e-6));

        let mut rng = seeded_rng(5);
        let pts: Vec<_> = (0..5)
            .map(|_| Point2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
            .collect();
        let k = kernel_matrix(&pts, &h);
        assert!(k.is_symmetric());
        for i in 0..5 {
            for j in 0..5 {
                let dx = pts[i].x - pts[j].x;
                let dy = pts[i].y - pts[j].y;
                let oracle = 0.7 * std::primitive::f64::exp(-(dx * dx + dy * dy) / 8.0);
                assert!((k.get(i, j) - oracle).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lml_needs_two_points() {
        let r = log_marginal_likelihood(&hp(1.0, 1.0, 0.1), &[Point2::new(0.0, 0.0)], &[1.0]);
        assert_eq!(r, Err(Error::TooFewSamples { n: 1, min: 2 }));
    }

    #[test]
    fn lml_falls_as_signal_variance_shrinks() {
        let pts: Vec<_> = (0..6).map(|i| Point2::new(i as f64, 0.0)).collect();
        let v = [1.0, -0.5, 0.8, 1.2, -1.0, 0.3];
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let sf = libm::pow(10.0, -(k as f64) / 3.0);
            let lml = log_marginal_likelihood(&hp(1.0, sf, 1e-3), &pts, &v).unwrap().value;
            assert!(lml < prev);
            prev = lml;
        }
    }

    #[test]
    fn single_point_closed_form() {
        let m = GprModel::new(&[Point2::new(0.0, 0.0)], &[2.5], hp(1.7, 1.0, 0.0)).unwrap();
        for d in [0.0, 0.5, 1.0, 3.0] {
            let got = m.predict_mean(&[Point2::new(d, 0.0)])[0];
            let expect = std::primitive::f64::exp(-d * d / (2.0 * 1.7 * 1.7)) * 2.5;
            assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
        }
    }

    #[test]
    fn far_query_returns_prior_mean() {
        let pts: Vec<_> = (0..10).map(|i| Point2::new(i as f64, (i % 3) as f64)).collect();
        let v: Vec<_> = (0..10).map(|i| (i as f64).sin()).collect();
        let m = GprModel::new(&pts, &v, hp(1.0, 1.0, 1e-4)).unwrap();
        assert!(m.predict_mean(&[Point2::new(500.0, 500.0)])[0].abs() < 1e-6);
        let var = m.predict_variance(&[Point2::new(500.0, 500.0), pts[3]]);
        assert!((var[0] - 1.0).abs() < 1e-9);
        assert!(var[1] < 1e-3);
    }

    #[test]
    fn jitter_escalation_handles_duplicates() {
        let p = Point2::new(1.0, 1.0);
        let m = GprModel::new(&[p, p], &[1.0, 1.0], hp(1.0, 1.0, 0.0)).unwrap();
        assert!(m.jitter() > 0.0);
    }

    #[test]
    fn fit_is_deterministic() {
        let mut rng = seeded_rng(9);
        let pts: Vec<_> = (0..30)
            .map(|i| Point2::new((i % 6) as f64 * 2.0, (i / 6) as f64 * 2.0))
            .collect();
        let v: Vec<_> = pts
            .iter()
            .map(|p| libm::sin(p.x / 3.0) + libm::cos(p.y / 4.0) + 0.05 * rng.random::<f64>())
            .collect();
        let a = fit(&pts, &v, &FitConfig::default()).unwrap();
        let b = fit(&pts, &v, &FitConfig::default()).unwrap();
        assert_eq!(a.hyperparams(), b.hyperparams());
        assert!(a.hyperparams().noise_variance >= 1e-10);
    }
}
