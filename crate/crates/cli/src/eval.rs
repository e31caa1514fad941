//! Experiment engine: sample, fit, predict, score.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use spatial_sde_core::gpr::{self, FitConfig, GprHyperparams, GprModel, Point2};
use spatial_sde_core::sampling::{self, Method, SamplingConfig, SamplingPlan, SdeThresholds};
use spatial_sde_core::{improvement_pct, rmsd, Dataset, NormParams};

use crate::error::Result;

/// Outcome of fitting on a plan's training points and predicting its test points.
#[derive(Debug, Clone)]
pub struct PlanEvaluation {
    /// Statistics of the training values only.
    pub norm: NormParams,
    pub model: GprModel,
    /// `(dataset index, predicted value in raw units)` for each test point, ascending.
    pub predictions: Vec<(usize, f64)>,
    pub rmsd_raw: f64,
    pub rmsd_normalized: f64,
}

/// Fits a GP on the plan's training points and scores it on the test points.
pub fn evaluate_plan(d: &Dataset, plan: &SamplingPlan, fit: &FitConfig) -> Result<PlanEvaluation> {
    let samples = d.samples();
    let mut train = plan.train_indices();
    train.sort_unstable();
    let train_values: Vec<f64> = train.iter().map(|&i| samples[i].value).collect();
    let norm = NormParams::fit(&train_values)?;
    let points: Vec<Point2> = train.iter().map(|&i| samples[i].point().into()).collect();
    let z: Vec<f64> = train_values.iter().map(|&v| norm.normalize(v)).collect();
    let model = gpr::fit(&points, &z, fit)?;

    let test = plan.test_indices();
    let queries: Vec<Point2> = test.iter().map(|&i| samples[i].point().into()).collect();
    let pred_z = model.predict_mean(&queries);
    let truth: Vec<f64> = test.iter().map(|&i| samples[i].value).collect();
    let truth_z: Vec<f64> = truth.iter().map(|&v| norm.normalize(v)).collect();
    let pred: Vec<f64> = pred_z.iter().map(|&p| norm.denormalize(p)).collect();
    Ok(PlanEvaluation {
        rmsd_raw: rmsd(&pred, &truth)?,
        rmsd_normalized: rmsd(&pred_z, &truth_z)?,
        norm,
        model,
        predictions: test.iter().copied().zip(pred).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub dataset_id: String,
    pub method: Method,
    pub seed: u64,
    pub rmsd_raw: f64,
    pub rmsd_normalized: f64,
    pub train_size: usize,
    pub hyperparams: GprHyperparams,
    pub wall_time: Duration,
}

/// Everything besides the dataset and method that a run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub sampling: SamplingConfig,
    pub thresholds: SdeThresholds,
    pub fit: FitConfig,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            sampling: SamplingConfig::default(),
            thresholds: SdeThresholds::default(),
            fit: FitConfig::default(),
        }
    }
}

/// Sample, normalize on training statistics, fit, predict the rest, score.
pub fn run_pipeline(d: &Dataset, method: Method, settings: &RunSettings) -> Result<RunResult> {
    let start = Instant::now();
    let plan = sampling::sample(d, method, &settings.sampling, settings.thresholds)?;
    let eval = evaluate_plan(d, &plan, &settings.fit)?;
    Ok(RunResult {
        dataset_id: d.meta().source.clone(),
        method,
        seed: settings.sampling.seed,
        rmsd_raw: eval.rmsd_raw,
        rmsd_normalized: eval.rmsd_normalized,
        train_size: plan.train().len(),
        hyperparams: *eval.model.hyperparams(),
        wall_time: start.elapsed(),
    })
}

fn rep_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_add(rep as u64)
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Mean RMSD over `(α, β) ∈ {0..4}² \ {(0,0)}` for SDE-only sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// `cells[alpha][beta]`, `None` at `(0, 0)`.
    pub cells: [[Option<SweepCell>; 5]; 5],
    pub reps: usize,
    pub argmin: SdeThresholds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub rmsd_raw: f64,
    pub rmsd_normalized: f64,
}

impl SweepResult {
    pub fn populated(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }

    pub fn get(&self, t: SdeThresholds) -> Option<SweepCell> {
        self.cells[t.alpha() as usize][t.beta() as usize]
    }
}

/// Runs SDE-only sampling for each of the 24 threshold cells, `reps` seeds
/// each (`seed, seed+1, ...`), and averages the RMSD.
pub fn sweep_alpha_beta(d: &Dataset, settings: &RunSettings, reps: usize) -> Result<SweepResult> {
    if reps == 0 {
        return Err(spatial_sde_core::Error::InvalidConfig("reps must be at least 1".into()).into());
    }
    let jobs: Vec<(SdeThresholds, usize)> = SdeThresholds::sweep_grid()
        .flat_map(|t| (0..reps).map(move |r| (t, r)))
        .collect();
    let runs: Vec<RunResult> = jobs
        .par_iter()
        .map(|&(t, r)| {
            let s = RunSettings {
                sampling: settings.sampling.with_seed(rep_seed(settings.sampling.seed, r)),
                thresholds: t,
                fit: settings.fit.clone(),
            };
            run_pipeline(d, Method::Sde, &s)
        })
        .collect::<Result<_>>()?;

    let mut cells = [[None; 5]; 5];
    let mut argmin: Option<(SdeThresholds, f64)> = None;
    for (chunk, t) in runs.chunks(reps).zip(SdeThresholds::sweep_grid()) {
        let cell = SweepCell {
            rmsd_raw: mean(chunk.iter().map(|r| r.rmsd_raw)),
            rmsd_normalized: mean(chunk.iter().map(|r| r.rmsd_normalized)),
        };
        cells[t.alpha() as usize][t.beta() as usize] = Some(cell);
        if argmin.map_or(true, |(_, best)| cell.rmsd_raw < best) {
            argmin = Some((t, cell.rmsd_raw));
        }
    }
    Ok(SweepResult {
        cells,
        reps,
        argmin: argmin.map(|(t, _)| t).unwrap_or_default(),
    })
}

/// A dataset tagged with an id and a family ("wafer", "fpga-01", ...).
#[derive(Debug, Clone)]
pub struct ExperimentInput {
    pub id: String,
    pub family: String,
    pub dataset: Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodMean {
    pub method: Method,
    pub rmsd_raw: f64,
    pub rmsd_normalized: f64,
    pub runs: usize,
}

/// Improvement of an SDE hybrid over its baseline, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct Improvement {
    pub baseline: Method,
    pub improved: Method,
    pub baseline_mean: f64,
    pub improved_mean: f64,
    pub pct: f64,
}

impl Improvement {
    fn between(means: &[MethodMean], baseline: Method, improved: Method) -> Option<Self> {
        let find = |m: Method| means.iter().find(|x| x.method == m).map(|x| x.rmsd_raw);
        let (b, i) = (find(baseline)?, find(improved)?);
        Some(Self {
            baseline,
            improved,
            baseline_mean: b,
            improved_mean: i,
            pct: improvement_pct(b, i),
        })
    }

    fn pairs(means: &[MethodMean]) -> Vec<Self> {
        [(Method::KMeans, Method::KSde), (Method::Stratified, Method::SSde)]
            .into_iter()
            .filter_map(|(b, i)| Self::between(means, b, i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    /// Family name, or dataset id for per-dataset rows.
    pub key: String,
    pub family: String,
    pub means: Vec<MethodMean>,
    pub improvements: Vec<Improvement>,
}

impl GroupSummary {
    pub fn mean_of(&self, m: Method) -> Option<&MethodMean> {
        self.means.iter().find(|x| x.method == m)
    }

    fn from_runs<'a>(key: String, family: String, methods: &[Method], runs: impl Iterator<Item = &'a RunResult> + Clone) -> Self {
        let means: Vec<MethodMean> = methods
            .iter()
            .map(|&m| {
                let rs: Vec<&RunResult> = runs.clone().filter(|r| r.method == m).collect();
                MethodMean {
                    method: m,
                    rmsd_raw: mean(rs.iter().map(|r| r.rmsd_raw)),
                    rmsd_normalized: mean(rs.iter().map(|r| r.rmsd_normalized)),
                    runs: rs.len(),
                }
            })
            .collect();
        let improvements = Improvement::pairs(&means);
        Self {
            key,
            family,
            means,
            improvements,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub methods: Vec<Method>,
    pub reps: usize,
    /// Ordered by (dataset, method, rep).
    pub runs: Vec<RunResult>,
    /// One summary per input dataset, in input order.
    pub per_dataset: Vec<GroupSummary>,
    /// Per family, in first-appearance order.
    pub per_family: Vec<GroupSummary>,
}

/// Runs every method on every dataset for `reps` seeds and aggregates mean RMSD.
///
/// All methods share the same seed sequence. Runs execute in parallel; the
/// reduction follows `(dataset, method, rep)` order so results do not depend
/// on scheduling.
pub fn compare_methods(
    inputs: &[ExperimentInput],
    methods: &[Method],
    settings: &RunSettings,
    reps: usize,
) -> Result<ExperimentReport> {
    if inputs.is_empty() {
        return Err(spatial_sde_core::Error::Empty.into());
    }
    if reps == 0 || methods.is_empty() {
        return Err(spatial_sde_core::Error::InvalidConfig("reps and methods must be non-empty".into()).into());
    }
    let jobs: Vec<(usize, Method, usize)> = (0..inputs.len())
        .flat_map(|d| methods.iter().flat_map(move |&m| (0..reps).map(move |r| (d, m, r))))
        .collect();
    let runs: Vec<RunResult> = jobs
        .par_iter()
        .map(|&(d, m, r)| {
            let s = RunSettings {
                sampling: settings.sampling.with_seed(rep_seed(settings.sampling.seed, r)),
                ..settings.clone()
            };
            let mut res = run_pipeline(&inputs[d].dataset, m, &s)?;
            res.dataset_id = inputs[d].id.clone();
            Ok(res)
        })
        .collect::<Result<_>>()?;

    let per_run = methods.len() * reps;
    let per_dataset = inputs
        .iter()
        .zip(runs.chunks(per_run))
        .map(|(inp, chunk)| GroupSummary::from_runs(inp.id.clone(), inp.family.clone(), methods, chunk.iter()))
        .collect();

    let mut families: Vec<String> = Vec::new();
    for inp in inputs {
        if !families.contains(&inp.family) {
            families.push(inp.family.clone());
        }
    }
    let per_family = families
        .iter()
        .map(|f| {
            let fam_runs = inputs
                .iter()
                .zip(runs.chunks(per_run))
                .filter(|(inp, _)| &inp.family == f)
                .flat_map(|(_, chunk)| chunk.iter());
            GroupSummary::from_runs(f.clone(), f.clone(), methods, fam_runs)
        })
        .collect();

    Ok(ExperimentReport {
        methods: methods.to_vec(),
        reps,
        runs,
        per_dataset,
        per_family,
    })
}
