//! Command-line front end: eigen-runs, inner-cap sweeps, filter dumps,
//! scaling studies, and pencil export.
//!
//! Exit codes: 0 success (all wanted pairs converged), 2 configuration
//! error, 3 non-convergence within the outer-iteration budget.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use paraslrf::driver::{self, DriverConfig, Mode};
use paraslrf::error::Error;
use paraslrf::filters::{self, FilterKind, FilterSpec};
use paraslrf::harness::{scalability_run, GroupPlan};
use paraslrf::precond::PrecondKind;
use paraslrf::problems;
use paraslrf::report::{self, RunManifest};
use paraslrf::{Pencil, SolverConfig};

#[derive(Parser)]
#[command(name = "paraslrf", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute all eigenpairs in (0, gamma] and write report.json + history.csv.
    Solve(SolveArgs),
    /// Re-run the enhanced driver over a list of inner-iteration caps.
    SweepItmax(SweepArgs),
    /// Tabulate the filter response as CSV (lambda, phi).
    FilterDump(FilterDumpArgs),
    /// Run the same problem under several (n_part, workers) plans.
    Scale(ScaleArgs),
    /// Problem utilities.
    #[command(subcommand)]
    Problems(ProblemsCmd),
}

#[derive(Args, Clone)]
struct ProblemArg {
    /// fem1d:n=N | laplace3d:nx=NX,ny=NY,nz=NZ | files:A=PATH,B=PATH
    #[arg(long)]
    problem: String,
}

#[derive(Args, Clone)]
struct FilterArgs {
    /// slrf | midpoint | gauss-legendre | gauss-chebyshev
    #[arg(long, default_value = "slrf")]
    filter: String,
    /// Upper-half-plane pole count N.
    #[arg(long, default_value_t = 4)]
    npoles: usize,
    /// Interval bound: eigenvalues sought in (0, gamma].
    #[arg(long)]
    gamma: f64,
    /// Pole-line slope (slrf).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Passband relaxation (slrf).
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Eigenpair residual target.
    #[arg(long, default_value_t = 1e-8)]
    tol_eig: f64,
    /// Linear-solver relative residual target.
    #[arg(long, default_value_t = 1e-10)]
    tol_lin: f64,
    #[arg(long, default_value_t = 100)]
    max_outer: usize,
    /// GCR restart length.
    #[arg(long, default_value_t = 30)]
    restart: usize,
    /// jacobi | ilu0
    #[arg(long, default_value = "ilu0")]
    precond: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Clone)]
struct PlanArgs {
    /// Level-1 pole groups.
    #[arg(long, default_value_t = 1)]
    nparts: usize,
    /// Level-2 workers per group.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// fem1d:n=N | laplace3d:nx=NX,ny=NY,nz=NZ | files:A=PATH,B=PATH
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = "slrf")]
    filter: String,
    #[arg(long, default_value_t = 4)]
    npoles: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    #[arg(long)]
    nev: Option<usize>,
    /// Subspace size; defaults to ceil(1.2 nev).
    #[arg(long)]
    l: Option<usize>,
    #[command(flatten)]
    plan: PlanArgs,
    /// basic | enhanced
    #[arg(long, default_value = "basic")]
    mode: String,
    /// Inner-iteration cap (enhanced mode).
    #[arg(long)]
    it_max_linear: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Re-run the manifest embedded in an earlier report; other flags ignored.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    /// Report path; history.csv is written beside it.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[command(flatten)]
    filter: FilterArgs,
    #[arg(long)]
    nev: usize,
    #[arg(long)]
    l: Option<usize>,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Comma-separated it_max_linear values, e.g. 5,10,15.
    #[arg(long, value_delimiter = ',')]
    it_max_list: Vec<usize>,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct FilterDumpArgs {
    #[command(flatten)]
    filter: FilterArgs,
    #[arg(long, allow_negative_numbers = true)]
    lambda_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_max: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    points: usize,
    #[arg(long, default_value = "filter.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ScaleArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[command(flatten)]
    filter: FilterArgs,
    #[arg(long)]
    nev: usize,
    #[arg(long)]
    l: Option<usize>,
    /// basic | enhanced
    #[arg(long, default_value = "basic")]
    mode: String,
    #[arg(long)]
    it_max_linear: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Comma-separated plans as NPARTxWORKERS, e.g. 1x4,2x2,4x1.
    #[arg(long, value_delimiter = ',')]
    plans: Vec<String>,
    #[arg(long, default_value = "scale.csv")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ProblemsCmd {
    /// Export a generated pencil as two Matrix Market files.
    Dump {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, default_value = "A.mtx")]
        out_a: PathBuf,
        #[arg(long, default_value = "B.mtx")]
        out_b: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::SweepItmax(args) => cmd_sweep_itmax(args),
        Cmd::FilterDump(args) => cmd_filter_dump(args),
        Cmd::Scale(args) => cmd_scale(args),
        Cmd::Problems(ProblemsCmd::Dump { problem, out_a, out_b }) => {
            cmd_problems_dump(problem, out_a, out_b)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_)
                | Error::IndivisiblePoles { .. }
                | Error::DimensionMismatch(_)
                | Error::NotSymmetric(_)
                | Error::NotPositiveDefinite(_)
                | Error::MatrixMarket(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_problem(spec: &str) -> Result<Pencil, Error> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("malformed problem spec: {spec}")))?;
    let mut params = std::collections::BTreeMap::new();
    for part in rest.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("malformed problem parameter: {part}")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get_usize = |key: &str| -> Result<usize, Error> {
        params
            .get(key)
            .ok_or_else(|| Error::Config(format!("problem spec missing {key}")))?
            .parse()
            .map_err(|_| Error::Config(format!("problem parameter {key} is not an integer")))
    };
    match kind {
        "fem1d" => Ok(problems::gen_fem1d(get_usize("n")?)?.pencil),
        "laplace3d" => Ok(problems::gen_laplace3d(
            get_usize("nx")?,
            get_usize("ny")?,
            get_usize("nz")?,
        )?
        .pencil),
        "files" => {
            let a = params
                .get("A")
                .ok_or_else(|| Error::Config("files problem needs A=".into()))?;
            let b = params
                .get("B")
                .ok_or_else(|| Error::Config("files problem needs B=".into()))?;
            problems::load_pencil(a, b)
        }
        other => Err(Error::Config(format!("unknown problem kind: {other}"))),
    }
}

fn build_filter(kind: &str, gamma: f64, n: usize, alpha: f64, beta: f64) -> Result<FilterSpec, Error> {
    match FilterKind::from_str(kind)? {
        FilterKind::Midpoint => filters::build_midpoint(gamma, n),
        FilterKind::GaussLegendre => filters::build_gauss_legendre(gamma, n),
        FilterKind::GaussChebyshev => filters::build_gauss_chebyshev(gamma, n),
        FilterKind::Slrf => filters::build_slrf(gamma, n, alpha, beta),
    }
}

fn solver_config(s: &SolverArgs) -> Result<SolverConfig, Error> {
    Ok(SolverConfig {
        rel_tol: s.tol_lin,
        restart: s.restart,
        precond: PrecondKind::from_str(&s.precond)?,
        ..SolverConfig::default()
    })
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let (manifest, pencil) = if let Some(path) = &args.from_manifest {
        let loaded = report::read_report(path)?;
        let pencil = load_problem(&loaded.manifest.problem)?;
        (loaded.manifest, pencil)
    } else {
        let problem = args
            .problem
            .clone()
            .ok_or_else(|| Error::Config("--problem is required".into()))?;
        let gamma = args
            .gamma
            .ok_or_else(|| Error::Config("--gamma is required".into()))?;
        let nev = args
            .nev
            .ok_or_else(|| Error::Config("--nev is required".into()))?;
        let pencil = load_problem(&problem)?;
        let mode = Mode::from_str(&args.mode)?;
        let cfg = DriverConfig {
            nev,
            l: args.l,
            gamma,
            tol_eig: args.solver.tol_eig,
            max_outer: args.solver.max_outer,
            mode,
            it_max_linear: args.it_max_linear,
            seed: args.solver.seed,
            solver: solver_config(&args.solver)?,
        };
        let plan = GroupPlan::partition(args.npoles, args.plan.nparts, args.plan.workers)?;
        let kind = FilterKind::from_str(&args.filter)?;
        let (alpha, beta) = match kind {
            FilterKind::Slrf => (Some(args.alpha), Some(args.beta)),
            _ => (None, None),
        };
        let manifest = RunManifest::new(problem, kind, args.npoles, alpha, beta, &cfg, &plan);
        (manifest, pencil)
    };

    let cfg = manifest.driver_config();
    let plan = manifest.plan()?;
    let spec = build_filter(
        &manifest.filter.to_string(),
        manifest.gamma,
        manifest.n_poles,
        manifest.alpha.unwrap_or(1.0),
        manifest.beta.unwrap_or(0.01),
    )?;

    let result = driver::run(&pencil, &spec, &cfg, &plan)?;
    report::write_report(&args.out, &manifest, &result)?;
    report::write_history_csv(args.out.with_file_name("history.csv"), &result)?;
    report::write_timing_csv(args.out.with_file_name("timing.csv"), &result.report)?;

    println!(
        "{}: {} pairs in {} outer iterations (case: {:?}, ratio {:.2})",
        if result.converged { "converged" } else { "NOT converged" },
        result.thetas.len(),
        result.outer_iters,
        result.case,
        result.report.ratio,
    );
    for (t, r) in result.thetas.iter().zip(&result.residuals) {
        println!("  theta = {t:.12e}  residual = {r:.3e}");
    }
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

fn cmd_sweep_itmax(args: SweepArgs) -> Result<ExitCode, Error> {
    if args.it_max_list.is_empty() {
        return Err(Error::Config("--it-max-list needs at least one value".into()));
    }
    let pencil = load_problem(&args.problem.problem)?;
    let spec = build_filter(
        &args.filter.filter,
        args.filter.gamma,
        args.filter.npoles,
        args.filter.alpha,
        args.filter.beta,
    )?;
    let plan = GroupPlan::partition(args.filter.npoles, args.plan.nparts, args.plan.workers)?;
    let cfg = DriverConfig {
        nev: args.nev,
        l: args.l,
        gamma: args.filter.gamma,
        tol_eig: args.solver.tol_eig,
        max_outer: args.solver.max_outer,
        mode: Mode::Enhanced,
        it_max_linear: None, // set per sweep point
        seed: args.solver.seed,
        solver: solver_config(&args.solver)?,
    };
    let rows = driver::sweep_itmax(&pencil, &spec, &cfg, &plan, &args.it_max_list)?;
    report::write_sweep_csv(&args.out, &rows)?;
    for r in &rows {
        let outer = r
            .outer_iters
            .map(|v| v.to_string())
            .unwrap_or_else(|| "DNF".into());
        println!(
            "it_max={:<6} outer={:<5} inner_total={:<10} wall={:.3}s",
            r.it_max_linear, outer, r.total_inner_iters, r.wall_seconds
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_filter_dump(args: FilterDumpArgs) -> Result<ExitCode, Error> {
    if args.points < 1 {
        return Err(Error::Config("--points must be at least 1".into()));
    }
    let spec = build_filter(
        &args.filter.filter,
        args.filter.gamma,
        args.filter.npoles,
        args.filter.alpha,
        args.filter.beta,
    )?;
    let lo = args.lambda_min.unwrap_or(0.0);
    let hi = args.lambda_max.unwrap_or(2.0 * args.filter.gamma);
    let grid = filters::linspace(lo, hi, args.points);
    report::write_filter_csv(&args.out, &spec, &grid)?;
    println!("wrote {} points to {}", grid.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_plan(s: &str, n_poles: usize) -> Result<GroupPlan, Error> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| Error::Config(format!("plan must look like 2x2, got {s}")))?;
    let n_part = a
        .parse()
        .map_err(|_| Error::Config(format!("bad group count in plan {s}")))?;
    let workers = b
        .parse()
        .map_err(|_| Error::Config(format!("bad worker count in plan {s}")))?;
    GroupPlan::partition(n_poles, n_part, workers)
}

fn cmd_scale(args: ScaleArgs) -> Result<ExitCode, Error> {
    if args.plans.is_empty() {
        return Err(Error::Config("--plans needs at least one plan".into()));
    }
    let pencil = load_problem(&args.problem.problem)?;
    let spec = build_filter(
        &args.filter.filter,
        args.filter.gamma,
        args.filter.npoles,
        args.filter.alpha,
        args.filter.beta,
    )?;
    let plans = args
        .plans
        .iter()
        .map(|s| parse_plan(s, args.filter.npoles))
        .collect::<Result<Vec<_>, _>>()?;
    let cores = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    for p in &plans {
        if p.n_part * p.workers_per_group > cores {
            eprintln!(
                "warning: plan {}x{} oversubscribes {cores} cores",
                p.n_part, p.workers_per_group
            );
        }
    }
    let cfg = DriverConfig {
        nev: args.nev,
        l: args.l,
        gamma: args.filter.gamma,
        tol_eig: args.solver.tol_eig,
        max_outer: args.solver.max_outer,
        mode: Mode::from_str(&args.mode)?,
        it_max_linear: args.it_max_linear,
        seed: args.solver.seed,
        solver: solver_config(&args.solver)?,
    };
    let mut thetas: Vec<Vec<f64>> = Vec::new();
    let points = scalability_run(&plans, |plan| {
        let result = driver::run(&pencil, &spec, &cfg, plan)?;
        thetas.push(result.thetas);
        Ok(())
    })?;
    report::write_scale_csv(&args.out, &points)?;
    for p in &points {
        println!(
            "n_part={:<3} workers={:<3} wall={:.3}s speedup={:.2}",
            p.n_part, p.workers_per_group, p.wall_seconds, p.speedup
        );
    }
    // eigenvalues must be plan-independent
    if let Some(first) = thetas.first() {
        for other in &thetas[1..] {
            if other.len() != first.len()
                || first
                    .iter()
                    .zip(other)
                    .any(|(a, b)| (a - b).abs() > 1e-10 * a.abs().max(1.0))
            {
                eprintln!("warning: eigenvalues differ across plans");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_problems_dump(problem: ProblemArg, out_a: PathBuf, out_b: PathBuf) -> Result<ExitCode, Error> {
    if problem.problem.starts_with("files:") {
        return Err(Error::Config(
            "dump exports generated problems only (fem1d, laplace3d)".into(),
        ));
    }
    let pencil = load_problem(&problem.problem)?;
    problems::dump_pencil(&pencil, &out_a, &out_b)?;
    println!("wrote {} and {}", out_a.display(), out_b.display());
    Ok(ExitCode::SUCCESS)
}
