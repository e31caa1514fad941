//! Command-line interface. Every command's options double as its manifest
//! record, so a run can be replayed from the manifest alone.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use spatial_sde_core::gpr::FitConfig;
use spatial_sde_core::sampling::{self, Method, SamplingConfig, SdeThresholds};
use spatial_sde_core::synth::{gen_fpga, gen_wafer, FpgaSynthConfig, WaferSynthConfig};
use spatial_sde_core::Dataset;

use crate::csvio::{self, CsvSchema};
use crate::error::{Error, Result};
use crate::eval::{self, ExperimentInput, RunResult, RunSettings};
use crate::heatmap::{self, HeatmapOptions};
use crate::manifest::{seed_repr, RunManifest, SeedSource};
use crate::output::{write_atomic, write_string};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "spatial-sde", version, about = "Partial spatial measurement: sample, fit a GP, predict the rest")]
pub struct Cli {
    /// Fail instead of drawing a random seed when --seed is missing.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic datasets.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
    /// Select training points and write a sampling plan.
    Sample(SampleArgs),
    /// Fit a GP on a plan's training points and predict its test points.
    Predict(PredictArgs),
    /// Mean RMSD of SDE-only sampling over the (α, β) grid.
    Sweep(SweepArgs),
    /// Compare sampling methods across datasets and seeds.
    Compare(CompareArgs),
    /// Render a dataset as an SVG heatmap.
    Heatmap(HeatmapArgs),
    /// Re-run a command from its manifest.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SynthKind {
    /// Circular wafer map of dies.
    Wafer(WaferArgs),
    /// FPGA ring-oscillator grids, one CSV per path per device.
    Fpga(FpgaArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SchemaArgs {
    #[arg(long, default_value = "x")]
    pub x_col: String,
    #[arg(long, default_value = "y")]
    pub y_col: String,
    #[arg(long, default_value = "value")]
    pub value_col: String,
    /// Pass/fail column; when the file has no such column all rows are valid.
    #[arg(long, default_value = "valid")]
    pub valid_col: String,
}

impl SchemaArgs {
    fn schema(&self) -> CsvSchema {
        CsvSchema {
            x: self.x_col.clone(),
            y: self.y_col.clone(),
            value: self.value_col.clone(),
            valid: Some(self.valid_col.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SamplingArgs {
    /// Training fraction.
    #[arg(long = "p", default_value_t = SamplingConfig::default().fraction)]
    pub fraction: f64,
    /// Quantile strata for stratified and S-SDE sampling.
    #[arg(long, default_value_t = SamplingConfig::default().strata_count)]
    pub strata: usize,
    /// Value clusters for k-means and K-SDE sampling.
    #[arg(long, default_value_t = SamplingConfig::default().cluster_count)]
    pub clusters: usize,
}

impl SamplingArgs {
    fn config(&self, seed: u64) -> SamplingConfig {
        SamplingConfig {
            fraction: self.fraction,
            seed,
            strata_count: self.strata,
            cluster_count: self.clusters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = SdeThresholds::default().alpha())]
    pub alpha: u32,
    #[arg(long, default_value_t = SdeThresholds::default().beta())]
    pub beta: u32,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Result<SdeThresholds> {
        Ok(SdeThresholds::new(self.alpha, self.beta)?)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Optimizer restarts; the best log marginal likelihood wins.
    #[arg(long, default_value_t = FitConfig::default().restarts)]
    pub restarts: usize,
    /// Initial length scales per restart, as fractions of the point extent.
    #[arg(long, value_delimiter = ',', default_values_t = FitConfig::default().length_scale_multipliers)]
    pub length_scale_multipliers: Vec<f64>,
    #[arg(long, default_value_t = FitConfig::default().max_iterations)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = FitConfig::default().tolerance)]
    pub tolerance: f64,
    /// Lower bound on the noise variance.
    #[arg(long, default_value_t = FitConfig::default().jitter_floor)]
    pub jitter_floor: f64,
    #[arg(long, default_value_t = FitConfig::default().initial_signal_variance)]
    pub initial_signal_variance: f64,
    #[arg(long, default_value_t = FitConfig::default().initial_noise_variance)]
    pub initial_noise_variance: f64,
}

impl FitArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            restarts: self.restarts,
            length_scale_multipliers: self.length_scale_multipliers.clone(),
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            jitter_floor: self.jitter_floor,
            initial_signal_variance: self.initial_signal_variance,
            initial_noise_variance: self.initial_noise_variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WaferArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    #[serde(default, with = "seed_repr")]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = WaferSynthConfig::default().approx_devices)]
    pub devices: usize,
    #[arg(long, default_value_t = WaferSynthConfig::default().base_value)]
    pub base_value: f64,
    #[arg(long, default_value_t = WaferSynthConfig::default().radial_trend_amplitude)]
    pub trend: f64,
    #[arg(long, default_value_t = WaferSynthConfig::default().field_amplitude)]
    pub field_amplitude: f64,
    #[arg(long, default_value_t = WaferSynthConfig::default().field_length_scale)]
    pub length_scale: f64,
    #[arg(long, default_value_t = WaferSynthConfig::default().noise_std)]
    pub noise: f64,
    /// Fraction of dies flagged as failing.
    #[arg(long, default_value_t = WaferSynthConfig::default().faulty_fraction)]
    pub faulty: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FpgaArgs {
    /// Directory receiving `fpga-NN/path-MM.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    #[serde(default, with = "seed_repr")]
    pub seed: Option<u64>,
    /// Number of devices; device `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 5)]
    pub devices: usize,
    #[arg(long, default_value_t = FpgaSynthConfig::default().n_paths)]
    pub paths: usize,
    #[arg(long, default_value_t = FpgaSynthConfig::default().width)]
    pub width: u32,
    #[arg(long, default_value_t = FpgaSynthConfig::default().height)]
    pub height: u32,
    #[arg(long, default_value_t = FpgaSynthConfig::default().n_points)]
    pub points: usize,
    #[arg(long, default_value_t = FpgaSynthConfig::default().base_frequency)]
    pub base_frequency: f64,
    #[arg(long, default_value_t = FpgaSynthConfig::default().field_amplitude)]
    pub field_amplitude: f64,
    #[arg(long, default_value_t = FpgaSynthConfig::default().field_length_scale)]
    pub length_scale: f64,
    #[arg(long, default_value_t = FpgaSynthConfig::default().path_offset_std)]
    pub path_offset: f64,
    #[arg(long, default_value_t = FpgaSynthConfig::default().noise_std)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// random, stratified, kmeans, sde, s-sde or k-sde.
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    #[serde(default, with = "seed_repr")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    /// Per-point predictions for the test set.
    #[arg(long)]
    pub out: PathBuf,
    /// One-row run summary.
    #[arg(long)]
    pub metrics: PathBuf,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    pub input: PathBuf,
    /// Grid of mean raw-unit RMSD, α rows by β columns.
    #[arg(long)]
    pub out: PathBuf,
    /// Same grid in normalized units.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_normalized: Option<PathBuf>,
    #[arg(long)]
    #[serde(default, with = "seed_repr")]
    pub seed: Option<u64>,
    /// Seeds per cell: seed, seed+1, ...
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    /// Dataset files, or directories whose `*.csv` files are all used.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Family for every input; by default each file's parent directory name.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    #[serde(default, with = "seed_repr")]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, value_delimiter = ',', default_values_t = Method::COMPARED.map(|m| m.name().to_string()))]
    pub methods: Vec<String>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HeatmapArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Outline the plan's training cells.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PathBuf>,
    /// Color test cells by predicted rather than measured value.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<PathBuf>,
    #[arg(long, default_value_t = HeatmapOptions::default().cell_size)]
    pub cell_size: u32,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

/// A fully resolved command, as recorded in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Invocation {
    SynthWafer(WaferArgs),
    SynthFpga(FpgaArgs),
    Sample(SampleArgs),
    Predict(PredictArgs),
    Sweep(SweepArgs),
    Compare(CompareArgs),
    Heatmap(HeatmapArgs),
}

impl Invocation {
    fn seed_mut(&mut self) -> Option<&mut Option<u64>> {
        match self {
            Invocation::SynthWafer(a) => Some(&mut a.seed),
            Invocation::SynthFpga(a) => Some(&mut a.seed),
            Invocation::Sample(a) => Some(&mut a.seed),
            Invocation::Sweep(a) => Some(&mut a.seed),
            Invocation::Compare(a) => Some(&mut a.seed),
            Invocation::Predict(_) | Invocation::Heatmap(_) => None,
        }
    }

    /// Fills in a missing seed from OS entropy, unless `strict`.
    pub fn resolve_seed(&mut self, strict: bool) -> Result<Option<SeedSource>> {
        let Some(seed) = self.seed_mut() else {
            return Ok(None);
        };
        if seed.is_some() {
            return Ok(Some(SeedSource::Flag));
        }
        if strict {
            return Err(Error::Usage("--seed is required in --strict mode".into()));
        }
        *seed = Some(rand::random());
        Ok(Some(SeedSource::Entropy))
    }
}

fn seed_of(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::Manifest("seed was not resolved".into()))
}

pub fn run(cli: Cli) -> Result<()> {
    let invocation = match cli.command {
        Command::Replay { manifest } => {
            let m = RunManifest::read(&manifest)?;
            return execute(m.invocation, m.seed_source);
        }
        Command::Synth { kind: SynthKind::Wafer(a) } => Invocation::SynthWafer(a),
        Command::Synth { kind: SynthKind::Fpga(a) } => Invocation::SynthFpga(a),
        Command::Sample(a) => Invocation::Sample(a),
        Command::Predict(a) => Invocation::Predict(a),
        Command::Sweep(a) => Invocation::Sweep(a),
        Command::Compare(a) => Invocation::Compare(a),
        Command::Heatmap(a) => Invocation::Heatmap(a),
    };
    let mut invocation = invocation;
    let source = invocation.resolve_seed(cli.strict)?;
    execute(invocation, source)
}

/// Where the manifest of a run with primary output `out` goes.
pub fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.toml")
    } else {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.toml");
        PathBuf::from(s)
    }
}

/// Runs a resolved invocation and writes its outputs plus manifest.
pub fn execute(invocation: Invocation, seed_source: Option<SeedSource>) -> Result<()> {
    let start = Instant::now();
    let (inputs, outputs, manifest_at) = match &invocation {
        Invocation::SynthWafer(a) => synth_wafer(a)?,
        Invocation::SynthFpga(a) => synth_fpga(a)?,
        Invocation::Sample(a) => sample(a)?,
        Invocation::Predict(a) => predict(a)?,
        Invocation::Sweep(a) => sweep(a)?,
        Invocation::Compare(a) => compare(a)?,
        Invocation::Heatmap(a) => heatmap_cmd(a)?,
    };
    RunManifest::new(invocation, seed_source, inputs, outputs).write(&manifest_at)?;
    println!("manifest: {}", manifest_at.display());
    println!("wall time: {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}

type Written = (Vec<PathBuf>, Vec<PathBuf>, PathBuf);

/// Reads a dataset and drops failing samples, so plan indices always refer
/// to the valid points in file order.
pub fn load_dataset(path: &Path, schema: &SchemaArgs) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let d = csvio::parse_csv(std::io::BufReader::new(file), &schema.schema())?;
    let d = if d.meta().source.is_empty() {
        let mut meta = d.meta().clone();
        meta.source = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        d.with_meta(meta)
    } else {
        d
    };
    Ok(d.filter_faulty()?)
}

fn synth_wafer(a: &WaferArgs) -> Result<Written> {
    let cfg = WaferSynthConfig {
        approx_devices: a.devices,
        base_value: a.base_value,
        radial_trend_amplitude: a.trend,
        field_amplitude: a.field_amplitude,
        field_length_scale: a.length_scale,
        noise_std: a.noise,
        faulty_fraction: a.faulty,
        seed: seed_of(a.seed)?,
    };
    let d = gen_wafer(&cfg)?;
    write_atomic(&a.out, |w| csvio::write_dataset(w, &d))?;
    println!("wrote {} dies to {}", d.len(), a.out.display());
    Ok((vec![], vec![a.out.clone()], manifest_path(&a.out, false)))
}

pub fn fpga_path_file(dir: &Path, device: usize, path: usize) -> PathBuf {
    dir.join(format!("fpga-{:02}", device + 1)).join(format!("path-{:02}.csv", path + 1))
}

fn synth_fpga(a: &FpgaArgs) -> Result<Written> {
    if a.devices == 0 {
        return Err(Error::Usage("--devices must be at least 1".into()));
    }
    let seed = seed_of(a.seed)?;
    let mut outputs = Vec::new();
    for device in 0..a.devices {
        let cfg = FpgaSynthConfig {
            width: a.width,
            height: a.height,
            n_points: a.points,
            n_paths: a.paths,
            base_frequency: a.base_frequency,
            field_amplitude: a.field_amplitude,
            field_length_scale: a.length_scale,
            path_offset_std: a.path_offset,
            noise_std: a.noise,
            seed: seed.wrapping_add(device as u64),
        };
        for (p, d) in gen_fpga(&cfg)?.iter().enumerate() {
            let file = fpga_path_file(&a.out, device, p);
            write_atomic(&file, |w| csvio::write_dataset(w, d))?;
            outputs.push(file);
        }
    }
    println!("wrote {} path files for {} device(s) under {}", outputs.len(), a.devices, a.out.display());
    Ok((vec![], outputs, manifest_path(&a.out, true)))
}

fn sample(a: &SampleArgs) -> Result<Written> {
    let method: Method = a.method.parse()?;
    let t = a.thresholds.thresholds()?;
    let d = load_dataset(&a.input, &a.schema)?;
    let seed = seed_of(a.seed)?;
    let plan = sampling::sample(&d, method, &a.sampling.config(seed), t)?;
    let header = [
        ("method", method.name().to_string()),
        ("seed", seed.to_string()),
        ("alpha", t.alpha().to_string()),
        ("beta", t.beta().to_string()),
        ("p", a.sampling.fraction.to_string()),
    ];
    write_atomic(&a.out, |w| {
        for (k, v) in &header {
            writeln!(w, "# {k}: {v}").map_err(|e| Error::io(&a.out, e))?;
        }
        csvio::write_plan(w, &d, &plan)
    })?;
    let backfill = plan.train().len() - plan.primary_picks().count();
    println!(
        "{}: {} train ({} backfill), {} test -> {}",
        method,
        plan.train().len(),
        backfill,
        plan.test_indices().len(),
        a.out.display()
    );
    Ok((vec![a.input.clone()], vec![a.out.clone()], manifest_path(&a.out, false)))
}

fn plan_header(text: &str, key: &str) -> Option<String> {
    text.lines()
        .map_while(|l| l.trim_start().strip_prefix('#'))
        .filter_map(|l| l.split_once(':'))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim().to_string())
}

fn predict(a: &PredictArgs) -> Result<Written> {
    let start = Instant::now();
    let d = load_dataset(&a.input, &a.schema)?;
    let text = fs::read_to_string(&a.plan).map_err(|e| Error::io(&a.plan, e))?;
    let plan = csvio::read_plan(text.as_bytes(), &d)?;
    let method: Method = plan_header(&text, "method")
        .ok_or_else(|| Error::PlanMismatch("plan has no `# method:` header line".into()))?
        .parse()?;
    let seed: u64 = plan_header(&text, "seed")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::PlanMismatch("plan has no valid `# seed:` header line".into()))?;
    let ev = eval::evaluate_plan(&d, &plan, &a.fit.config())?;

    let samples = d.samples();
    write_atomic(&a.out, |w| {
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(["index", "x", "y", "truth", "prediction"])?;
        for &(i, p) in &ev.predictions {
            let s = &samples[i];
            cw.write_record([i.to_string(), s.x.to_string(), s.y.to_string(), s.value.to_string(), p.to_string()])?;
        }
        cw.flush().map_err(|e| Error::io(&a.out, e))?;
        Ok(())
    })?;
    let result = RunResult {
        dataset_id: d.meta().source.clone(),
        method,
        seed,
        rmsd_raw: ev.rmsd_raw,
        rmsd_normalized: ev.rmsd_normalized,
        train_size: plan.train().len(),
        hyperparams: *ev.model.hyperparams(),
        wall_time: start.elapsed(),
    };
    write_atomic(&a.metrics, |w| report::write_run_rows(w, std::slice::from_ref(&result)))?;
    println!(
        "rmsd {:.6} (normalized {:.6}); l={:.4} σf²={:.4} σn²={:.3e}",
        result.rmsd_raw,
        result.rmsd_normalized,
        result.hyperparams.length_scale,
        result.hyperparams.signal_variance,
        result.hyperparams.noise_variance
    );
    Ok((
        vec![a.input.clone(), a.plan.clone()],
        vec![a.out.clone(), a.metrics.clone()],
        manifest_path(&a.out, false),
    ))
}

fn sweep(a: &SweepArgs) -> Result<Written> {
    let d = load_dataset(&a.input, &a.schema)?;
    let settings = RunSettings {
        sampling: a.sampling.config(seed_of(a.seed)?),
        thresholds: SdeThresholds::default(),
        fit: a.fit.config(),
    };
    let res = eval::sweep_alpha_beta(&d, &settings, a.reps)?;
    write_atomic(&a.out, |w| report::write_sweep_grid(w, &res, false))?;
    let mut outputs = vec![a.out.clone()];
    if let Some(p) = &a.out_normalized {
        write_atomic(p, |w| report::write_sweep_grid(w, &res, true))?;
        outputs.push(p.clone());
    }
    print!("{}", report::sweep_table(&res));
    Ok((vec![a.input.clone()], outputs, manifest_path(&a.out, false)))
}

/// Expands directories to their `*.csv` files, sorted by name.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::Usage("no input datasets found".into()));
    }
    Ok(files)
}

fn family_of(path: &Path) -> String {
    path.parent()
        .and_then(Path::file_name)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into())
}

fn compare(a: &CompareArgs) -> Result<Written> {
    let methods: Vec<Method> = a.methods.iter().map(|m| m.parse()).collect::<std::result::Result<_, _>>()?;
    let files = expand_inputs(&a.inputs)?;
    let inputs: Vec<ExperimentInput> = files
        .iter()
        .map(|f| {
            Ok(ExperimentInput {
                id: f.display().to_string(),
                family: a.family.clone().unwrap_or_else(|| family_of(f)),
                dataset: load_dataset(f, &a.schema)?,
            })
        })
        .collect::<Result<_>>()?;
    let settings = RunSettings {
        sampling: a.sampling.config(seed_of(a.seed)?),
        thresholds: a.thresholds.thresholds()?,
        fit: a.fit.config(),
    };
    let rep = eval::compare_methods(&inputs, &methods, &settings, a.reps)?;
    let out = |name: &str| a.out_dir.join(name);
    write_atomic(&out("runs.csv"), |w| report::write_run_rows(w, &rep.runs))?;
    write_atomic(&out("summary.csv"), |w| report::write_summary(w, &rep))?;
    write_atomic(&out("per_dataset.csv"), |w| report::write_per_dataset(w, &rep))?;
    write_atomic(&out("improvements.csv"), |w| report::write_improvements(w, &rep))?;
    print!("{}", report::summary_table(&rep));
    let outputs = ["runs.csv", "summary.csv", "per_dataset.csv", "improvements.csv"].map(out).to_vec();
    Ok((files, outputs, manifest_path(&a.out_dir, true)))
}

fn read_predictions(path: &Path, n: usize) -> Result<Vec<(usize, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.into()))
    };
    let (ii, pi) = (col("index")?, col("prediction")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |column: &str| Error::Field {
            line,
            column: column.into(),
            message: "cannot parse".into(),
        };
        let i: usize = rec.get(ii).and_then(|s| s.parse().ok()).ok_or_else(|| bad("index"))?;
        let p: f64 = rec.get(pi).and_then(|s| s.parse().ok()).ok_or_else(|| bad("prediction"))?;
        if i >= n {
            return Err(Error::PlanMismatch(format!("prediction index {i} out of range for {n} points")));
        }
        out.push((i, p));
    }
    Ok(out)
}

fn heatmap_cmd(a: &HeatmapArgs) -> Result<Written> {
    let d = load_dataset(&a.input, &a.schema)?;
    let mut inputs = vec![a.input.clone()];
    let mut values = d.values();
    if let Some(p) = &a.predictions {
        for (i, v) in read_predictions(p, d.len())? {
            values[i] = v;
        }
        inputs.push(p.clone());
    }
    let train = match &a.plan {
        Some(p) => {
            let file = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            inputs.push(p.clone());
            Some(csvio::read_plan(file, &d)?.train_indices())
        }
        None => None,
    };
    let opts = HeatmapOptions {
        cell_size: a.cell_size,
        title: a.title.clone(),
    };
    let svg = heatmap::render(&d, &values, train.as_deref(), &opts)?;
    write_string(&a.out, &svg)?;
    println!("wrote {} cells to {}", d.len(), a.out.display());
    Ok((inputs, vec![a.out.clone()], manifest_path(&a.out, false)))
}
