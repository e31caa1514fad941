//! CSV and plain-text renderings of experiment results.
//!
//! Files never contain wall-clock times, so reruns are byte-identical.

use std::io::Write;

use crate::error::Result;
use crate::eval::{ExperimentReport, RunResult, SweepResult};

/// Marker for the sweep cell that does not exist.
pub const ABSENT_CELL: &str = "—";

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(out)
}

pub fn write_run_rows(out: &mut dyn Write, runs: &[RunResult]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record([
        "dataset",
        "method",
        "seed",
        "train_size",
        "rmsd_raw",
        "rmsd_normalized",
        "length_scale",
        "signal_variance",
        "noise_variance",
    ])?;
    for r in runs {
        w.write_record([
            r.dataset_id.clone(),
            r.method.name().into(),
            r.seed.to_string(),
            r.train_size.to_string(),
            r.rmsd_raw.to_string(),
            r.rmsd_normalized.to_string(),
            r.hyperparams.length_scale.to_string(),
            r.hyperparams.signal_variance.to_string(),
            r.hyperparams.noise_variance.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary(out: &mut dyn Write, report: &ExperimentReport) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["family", "method", "runs", "rmsd_raw", "rmsd_normalized"])?;
    for g in &report.per_family {
        for m in &g.means {
            w.write_record([
                g.key.clone(),
                m.method.name().into(),
                m.runs.to_string(),
                m.rmsd_raw.to_string(),
                m.rmsd_normalized.to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_per_dataset(out: &mut dyn Write, report: &ExperimentReport) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["dataset", "family", "method", "runs", "rmsd_raw", "rmsd_normalized"])?;
    for g in &report.per_dataset {
        for m in &g.means {
            w.write_record([
                g.key.clone(),
                g.family.clone(),
                m.method.name().into(),
                m.runs.to_string(),
                m.rmsd_raw.to_string(),
                m.rmsd_normalized.to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Per-family and per-dataset improvements of each hybrid over its baseline.
pub fn write_improvements(out: &mut dyn Write, report: &ExperimentReport) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["scope", "key", "baseline", "improved", "baseline_mean", "improved_mean", "improvement_pct"])?;
    let scoped = report
        .per_family
        .iter()
        .map(|g| ("family", g))
        .chain(report.per_dataset.iter().map(|g| ("dataset", g)));
    for (scope, g) in scoped {
        for i in &g.improvements {
            w.write_record([
                scope.to_string(),
                g.key.clone(),
                i.baseline.name().into(),
                i.improved.name().into(),
                i.baseline_mean.to_string(),
                i.improved_mean.to_string(),
                i.pct.to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Rows are α, columns β, with [`ABSENT_CELL`] at (0, 0).
pub fn write_sweep_grid(out: &mut dyn Write, sweep: &SweepResult, normalized: bool) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["alpha\\beta", "0", "1", "2", "3", "4"])?;
    for (alpha, row) in sweep.cells.iter().enumerate() {
        let mut rec = vec![alpha.to_string()];
        rec.extend(row.iter().map(|c| match c {
            Some(c) if normalized => c.rmsd_normalized.to_string(),
            Some(c) => c.rmsd_raw.to_string(),
            None => ABSENT_CELL.into(),
        }));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn sweep_table(sweep: &SweepResult) -> String {
    let mut s = format!("{:>6}", "α\\β");
    for beta in 0..5 {
        s += &format!("{beta:>10}");
    }
    s.push('\n');
    for (alpha, row) in sweep.cells.iter().enumerate() {
        s += &format!("{alpha:>6}");
        for c in row {
            match c {
                Some(c) => s += &format!("{:>10.4}", c.rmsd_raw),
                None => s += &format!("{ABSENT_CELL:>10}"),
            }
        }
        s.push('\n');
    }
    s += &format!("argmin (α, β) = {} over {} rep(s)\n", sweep.argmin, sweep.reps);
    s
}

pub fn summary_table(report: &ExperimentReport) -> String {
    let mut s = String::new();
    for g in &report.per_family {
        s += &format!("{}\n", g.key);
        s += &format!("  {:<12}{:>12}{:>16}{:>7}\n", "method", "rmsd_raw", "rmsd_normalized", "runs");
        for m in &g.means {
            s += &format!(
                "  {:<12}{:>12.5}{:>16.5}{:>7}\n",
                m.method.name(),
                m.rmsd_raw,
                m.rmsd_normalized,
                m.runs
            );
        }
        for i in &g.improvements {
            s += &format!("  {} vs {}: {:.2}%\n", i.improved, i.baseline, i.pct);
        }
    }
    s
}
