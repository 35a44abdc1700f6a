//! Machine-readable run artifacts: the resolved manifest, the JSON report,
//! and the per-iteration history CSV.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::driver::{ConvergenceCase, DriverConfig, EigResult, Mode};
use crate::error::Result;
use crate::filters::FilterKind;
use crate::harness::{GroupPlan, RunReport, ScalePoint};
use crate::precond::PrecondKind;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Fully resolved run configuration. Re-running a manifest reproduces the
/// eigenvalues bit for bit: the starting block is seeded and every reduction
/// is index-ordered.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub problem: String,
    pub filter: FilterKind,
    pub n_poles: usize,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub nev: usize,
    pub l: usize,
    pub gamma: f64,
    pub n_part: usize,
    pub workers_per_group: usize,
    pub mode: Mode,
    pub it_max_linear: Option<usize>,
    pub tol_eig: f64,
    pub tol_lin: f64,
    pub max_outer: usize,
    pub restart: usize,
    pub precond: PrecondKind,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(
        problem: String,
        filter: FilterKind,
        n_poles: usize,
        alpha: Option<f64>,
        beta: Option<f64>,
        cfg: &DriverConfig,
        plan: &GroupPlan,
    ) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            problem,
            filter,
            n_poles,
            alpha,
            beta,
            nev: cfg.nev,
            l: cfg.subspace_size(),
            gamma: cfg.gamma,
            n_part: plan.n_part,
            workers_per_group: plan.workers_per_group,
            mode: cfg.mode,
            it_max_linear: cfg.it_max_linear,
            tol_eig: cfg.tol_eig,
            tol_lin: cfg.solver.rel_tol,
            max_outer: cfg.max_outer,
            restart: cfg.solver.restart,
            precond: cfg.solver.precond,
            seed: cfg.seed,
        }
    }

    /// Rebuild the driver configuration this manifest pins down.
    pub fn driver_config(&self) -> DriverConfig {
        DriverConfig {
            nev: self.nev,
            l: Some(self.l),
            gamma: self.gamma,
            tol_eig: self.tol_eig,
            max_outer: self.max_outer,
            mode: self.mode,
            it_max_linear: self.it_max_linear,
            seed: self.seed,
            solver: crate::gcr::SolverConfig {
                rel_tol: self.tol_lin,
                restart: self.restart,
                precond: self.precond,
                ..crate::gcr::SolverConfig::default()
            },
        }
    }

    pub fn plan(&self) -> Result<GroupPlan> {
        GroupPlan::partition(self.n_poles, self.n_part, self.workers_per_group)
    }
}

/// Everything `solve` writes to `report.json`.
#[derive(Debug, Serialize)]
pub struct SolveReport<'a> {
    pub manifest: &'a RunManifest,
    pub converged: bool,
    pub case: ConvergenceCase,
    pub outer_iters: usize,
    pub capped_solves: usize,
    pub thetas: &'a [f64],
    pub residuals: &'a [f64],
    pub run_report: &'a RunReport,
}

/// Minimal view of a report for re-running and diffing.
#[derive(Debug, Deserialize)]
pub struct LoadedReport {
    pub manifest: RunManifest,
    pub converged: bool,
    pub thetas: Vec<f64>,
}

pub fn write_report(path: impl AsRef<Path>, manifest: &RunManifest, result: &EigResult) -> Result<()> {
    let report = SolveReport {
        manifest,
        converged: result.converged,
        case: result.case,
        outer_iters: result.outer_iters,
        capped_solves: result.capped_solves,
        thetas: &result.thetas,
        residuals: &result.residuals,
        run_report: &result.report,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| crate::error::Error::Config(format!("report serialization: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<LoadedReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| crate::error::Error::Config(format!("report parse: {e}")))
}

/// History CSV: `outer_iter, n_conv, max_residual, group_busy_1..n_part,
/// max_wait`.
pub fn write_history_csv(path: impl AsRef<Path>, result: &EigResult) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let n_part = result.report.n_part;
    write!(out, "outer_iter,n_conv,max_residual")?;
    for g in 1..=n_part {
        write!(out, ",group_busy_{g}")?;
    }
    writeln!(out, ",max_wait")?;
    for row in &result.history {
        write!(out, "{},{},{:e}", row.outer_iter, row.n_conv, row.max_residual)?;
        for b in &row.group_busy_seconds {
            write!(out, ",{b:e}")?;
        }
        writeln!(out, ",{:e}", row.max_wait_seconds)?;
    }
    Ok(())
}

/// Long-format timing CSV: one row per `(group, iter)` with that group's
/// busy and wait seconds.
pub fn write_timing_csv(path: impl AsRef<Path>, report: &RunReport) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "group,iter,busy,wait")?;
    for it in &report.iterations {
        for (g, (busy, wait)) in it
            .busy_seconds
            .iter()
            .zip(&it.wait_seconds)
            .enumerate()
        {
            writeln!(out, "{},{},{busy:e},{wait:e}", g + 1, it.outer_iter)?;
        }
    }
    Ok(())
}

/// Filter response CSV with header `lambda,phi`, sorted by lambda.
pub fn write_filter_csv(
    path: impl AsRef<Path>,
    spec: &crate::filters::FilterSpec,
    grid: &[f64],
) -> Result<()> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "lambda,phi")?;
    for l in sorted {
        writeln!(out, "{:e},{:e}", l, crate::filters::eval_filter(spec, l))?;
    }
    Ok(())
}

/// Scaling CSV: `n_part, workers_per_group, wall_seconds, speedup`.
pub fn write_scale_csv(path: impl AsRef<Path>, points: &[ScalePoint]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "n_part,workers_per_group,wall_seconds,speedup")?;
    for p in points {
        writeln!(
            out,
            "{},{},{:e},{:e}",
            p.n_part, p.workers_per_group, p.wall_seconds, p.speedup
        )?;
    }
    Ok(())
}

/// Sweep CSV: `it_max_linear, outer_iters (DNF when unconverged),
/// total_inner_iters, wall_seconds`.
pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[crate::driver::SweepPoint]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "it_max_linear,outer_iters,total_inner_iters,wall_seconds")?;
    for r in rows {
        let outer = r
            .outer_iters
            .map(|v| v.to_string())
            .unwrap_or_else(|| "DNF".to_string());
        writeln!(
            out,
            "{},{},{},{:e}",
            r.it_max_linear, outer, r.total_inner_iters, r.wall_seconds
        )?;
    }
    Ok(())
}
