//! Subspace iteration with rational filtering.
//!
//! Each outer iteration applies the filter to the active block (one complex
//! solve per pole against the common right-hand side `B V`), reduces the
//! per-pole solutions into the filtered block `U`, extracts Ritz pairs from
//! the projected pencil, and checks convergence against the relative
//! residual `||(A - theta B) v|| / (theta ||v||_B)`.
//!
//! The basic variant iterates the full block. The enhanced variant locks
//! converged pairs (keeping later filtered blocks B-orthogonal to them),
//! shrinks the active block, caps the inner solves at `it_max_linear`
//! iterations, and seeds the next round of solves with the scaled Ritz
//! vectors `v / (theta - sigma)`, whose Krylov space matches the Cayley
//! system started from zero.

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::dense::{solve_dense_gep, DenseBlock};
use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::gcr::{cayley_initial_guess, solve_block, SolveStats, SolverConfig};
use crate::harness::{execute_filter, reduce_sum, GroupPlan, GroupTiming, RunReport};
use crate::pencil::{b_norm, b_orthonormalize, b_project_out, Pencil};
use crate::precond::{build_preconditioner, Preconditioner};

/// Ritz values above `gamma * (1 + GAMMA_SLACK)` do not count as wanted.
const GAMMA_SLACK: f64 = 1e-8;
/// Rank-truncation threshold for the projected mass matrix.
const PROJECTED_DROP_TOL: f64 = 1e-12;
/// Consecutive iterations with no in-interval active Ritz value before the
/// interval is declared exhausted.
const EXHAUSTED_STREAK: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Basic,
    Enhanced,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Basic => "basic",
            Mode::Enhanced => "enhanced",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Mode::Basic),
            "enhanced" => Ok(Mode::Enhanced),
            other => Err(Error::Config(format!("unknown mode: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriverConfig {
    /// Wanted eigenpair count.
    pub nev: usize,
    /// Subspace size; defaults to `ceil(1.2 * nev)`.
    pub l: Option<usize>,
    /// Interval bound: eigenvalues sought in `(0, gamma]`.
    pub gamma: f64,
    pub tol_eig: f64,
    pub max_outer: usize,
    pub mode: Mode,
    /// Inner-iteration cap, required in enhanced mode.
    pub it_max_linear: Option<usize>,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl DriverConfig {
    pub fn new(nev: usize, gamma: f64) -> Self {
        Self {
            nev,
            l: None,
            gamma,
            tol_eig: 1e-8,
            max_outer: 100,
            mode: Mode::Basic,
            it_max_linear: None,
            seed: 1,
            solver: SolverConfig::default(),
        }
    }

    pub fn subspace_size(&self) -> usize {
        self.l.unwrap_or((self.nev * 12).div_ceil(10))
    }

    fn validate(&self, spec: &FilterSpec, plan: &GroupPlan) -> Result<()> {
        if self.nev < 1 {
            return Err(Error::Config("nev must be at least 1".into()));
        }
        if self.subspace_size() < self.nev {
            return Err(Error::Config(format!(
                "subspace size {} below nev {}",
                self.subspace_size(),
                self.nev
            )));
        }
        if self.gamma <= 0.0 {
            return Err(Error::Config("gamma must be positive".into()));
        }
        if self.tol_eig <= 0.0 {
            return Err(Error::Config("tol_eig must be positive".into()));
        }
        if self.max_outer < 1 {
            return Err(Error::Config("max_outer must be at least 1".into()));
        }
        if self.mode == Mode::Enhanced && self.it_max_linear.is_none_or(|v| v < 1) {
            return Err(Error::Config(
                "enhanced mode needs it_max_linear >= 1".into(),
            ));
        }
        if plan.n_poles != spec.n_poles() {
            return Err(Error::Config(format!(
                "plan covers {} poles, filter has {}",
                plan.n_poles,
                spec.n_poles()
            )));
        }
        Ok(())
    }
}

/// Ritz pairs extracted from one projected solve, ascending in theta, with
/// unit B-norm vectors and their relative residuals.
#[derive(Debug, Clone)]
pub struct RitzSet {
    pub thetas: Vec<f64>,
    pub vectors: DenseBlock<f64>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceCase {
    /// The `nev` smallest wanted pairs all converged.
    NevConverged,
    /// Every value in the interval converged but there were fewer than `nev`.
    IntervalExhausted,
    /// Outer-iteration budget exhausted first.
    MaxOuterReached,
}

/// Per-outer-iteration convergence record.
#[derive(Debug, Clone, Serialize)]
pub struct HistoryRow {
    pub outer_iter: usize,
    pub n_conv: usize,
    /// Largest residual among the tracked pairs (NaN when none tracked yet).
    pub max_residual: f64,
    pub group_busy_seconds: Vec<f64>,
    pub max_wait_seconds: f64,
    /// Ritz values of the active block this iteration.
    pub active_thetas: Vec<f64>,
    /// Values locked so far (enhanced mode; empty in basic mode).
    pub locked_thetas: Vec<f64>,
}

#[derive(Debug)]
pub struct EigResult {
    pub thetas: Vec<f64>,
    pub vectors: DenseBlock<f64>,
    pub residuals: Vec<f64>,
    pub outer_iters: usize,
    pub converged: bool,
    pub case: ConvergenceCase,
    /// Inner solves that stopped at the iteration cap instead of tolerance.
    pub capped_solves: usize,
    pub report: RunReport,
    pub history: Vec<HistoryRow>,
    /// Outer iterations in which the filtered block lost rank.
    pub rank_loss_iters: Vec<usize>,
}

/// One pole's reusable solve machinery: the shifted matrix on the pencil's
/// union pattern and the preconditioner built once for it.
struct PoleSolver {
    sigma: Complex64,
    weight: Complex64,
    shifted: crate::pencil::ShiftedMatrix,
    precond: Preconditioner,
}

/// Filter application harness: canonically ordered poles with their factored
/// preconditioners, plus the execution plan.
pub struct FilterApplicator {
    poles: Vec<PoleSolver>,
    plan: GroupPlan,
}

impl FilterApplicator {
    pub fn new(
        pencil: &Pencil,
        spec: &FilterSpec,
        plan: GroupPlan,
        precond: crate::precond::PrecondKind,
    ) -> Result<Self> {
        if plan.n_poles != spec.n_poles() {
            return Err(Error::Config(format!(
                "plan covers {} poles, filter has {}",
                plan.n_poles,
                spec.n_poles()
            )));
        }
        // canonical pole order: the reduction accumulates by this index, so
        // results do not depend on the order poles were listed in
        let mut order: Vec<usize> = (0..spec.n_poles()).collect();
        order.sort_by(|&i, &j| {
            let (a, b) = (spec.poles[i], spec.poles[j]);
            (a.re, a.im).partial_cmp(&(b.re, b.im)).expect("finite poles")
        });
        let poles = order
            .into_iter()
            .map(|i| {
                let shifted = pencil.form_shifted(spec.poles[i]);
                let precond = build_preconditioner(&shifted, precond)?;
                Ok(PoleSolver {
                    sigma: spec.poles[i],
                    weight: spec.weights[i],
                    shifted,
                    precond,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { poles, plan })
    }

    pub fn plan(&self) -> &GroupPlan {
        &self.plan
    }

    pub fn sigmas(&self) -> Vec<Complex64> {
        self.poles.iter().map(|p| p.sigma).collect()
    }

    /// Apply the filter to `v`: solve `(A - sigma_j B) Y_j = B V` for every
    /// pole (optionally from per-pole initial-guess blocks) and reduce
    /// `U = sum_j 2 Re(w_j Y_j)`. `U` is real.
    pub fn apply_filter_block(
        &self,
        pencil: &Pencil,
        v: &DenseBlock<f64>,
        guesses: Option<&[DenseBlock<Complex64>]>,
        cfg: &SolverConfig,
    ) -> Result<(DenseBlock<f64>, GroupTiming, Vec<Vec<SolveStats>>)> {
        if let Some(g) = guesses {
            if g.len() != self.poles.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} guess blocks for {} poles",
                    g.len(),
                    self.poles.len()
                )));
            }
        }
        let rhs = pencil.mass_times_block(v);
        let (solved, timing) = execute_filter(&self.plan, |i| {
            let pole = &self.poles[i];
            solve_block(
                &pole.shifted,
                &pole.precond,
                &rhs,
                guesses.map(|g| &g[i]),
                cfg,
            )
        })?;
        let mut blocks = Vec::with_capacity(solved.len());
        let mut stats = Vec::with_capacity(solved.len());
        for (y, st) in solved {
            blocks.push(y);
            stats.push(st);
        }
        let weights: Vec<Complex64> = self.poles.iter().map(|p| p.weight).collect();
        let u = reduce_sum(&blocks, &weights)?;
        Ok((u, timing, stats))
    }
}

/// Rayleigh-Ritz extraction from the projected pencil
/// `(U^T A U, U^T B U)`, both symmetrized to scrub roundoff.
pub fn rayleigh_ritz(pencil: &Pencil, u: &DenseBlock<f64>) -> Result<RitzSet> {
    if u.ncols() == 0 {
        return Err(Error::SubspaceCollapsed);
    }
    let n = pencil.n();
    let mut au = DenseBlock::zeros(n, u.ncols());
    let mut bu = DenseBlock::zeros(n, u.ncols());
    for j in 0..u.ncols() {
        pencil.a().spmv_into(u.col(j), au.col_mut(j));
        pencil.b().spmv_into(u.col(j), bu.col_mut(j));
    }
    let ahat = u.transpose_mul(&au).symmetrized();
    let bhat = u.transpose_mul(&bu).symmetrized();
    let (thetas, s) = solve_dense_gep(&ahat, &bhat, PROJECTED_DROP_TOL)?;

    let mut vectors = u.mul(&s);
    let mut residuals = Vec::with_capacity(thetas.len());
    for (m, &theta) in thetas.iter().enumerate() {
        let nb = b_norm(pencil.b(), vectors.col(m))?;
        if nb > 0.0 {
            let inv = 1.0 / nb;
            for x in vectors.col_mut(m) {
                *x *= inv;
            }
        }
        residuals.push(residual_check(pencil, theta, vectors.col(m)).unwrap_or(f64::INFINITY));
    }
    Ok(RitzSet {
        thetas,
        vectors,
        residuals,
    })
}

/// Relative residual `||(A - theta B) v||_2 / (theta ||v||_B)`.
///
/// Nonpositive `theta` is a spurious Ritz value for an SPD pencil and is
/// reported as an error so it can never count as converged.
pub fn residual_check(pencil: &Pencil, theta: f64, v: &[f64]) -> Result<f64> {
    if theta <= 0.0 {
        return Err(Error::Config(format!(
            "spurious nonpositive Ritz value {theta}"
        )));
    }
    let av = pencil.a().spmv(v)?;
    let bv = pencil.b().spmv(v)?;
    let num: f64 = av
        .iter()
        .zip(&bv)
        .map(|(a, b)| {
            let r = a - theta * b;
            r * r
        })
        .sum::<f64>()
        .sqrt();
    let vb = b_norm(pencil.b(), v)?;
    Ok(num / (theta * vb))
}

fn random_block(n: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseBlock<f64> {
    let dist = Uniform::new_inclusive(-1.0f64, 1.0);
    let mut v = DenseBlock::zeros(n, cols);
    for j in 0..cols {
        for x in v.col_mut(j) {
            *x = dist.sample(rng);
        }
    }
    v
}

pub fn run_basic(
    pencil: &Pencil,
    spec: &FilterSpec,
    cfg: &DriverConfig,
    plan: &GroupPlan,
) -> Result<EigResult> {
    let mut cfg = cfg.clone();
    cfg.mode = Mode::Basic;
    run(pencil, spec, &cfg, plan)
}

pub fn run_enhanced(
    pencil: &Pencil,
    spec: &FilterSpec,
    cfg: &DriverConfig,
    plan: &GroupPlan,
) -> Result<EigResult> {
    let mut cfg = cfg.clone();
    cfg.mode = Mode::Enhanced;
    run(pencil, spec, &cfg, plan)
}

struct Outcome {
    case: ConvergenceCase,
    thetas: Vec<f64>,
    vectors: DenseBlock<f64>,
}

pub fn run(
    pencil: &Pencil,
    spec: &FilterSpec,
    cfg: &DriverConfig,
    plan: &GroupPlan,
) -> Result<EigResult> {
    cfg.validate(spec, plan)?;
    let start = Instant::now();
    let n = pencil.n();
    let l = cfg.subspace_size();
    let gamma_hi = cfg.gamma * (1.0 + GAMMA_SLACK);
    let enhanced = cfg.mode == Mode::Enhanced;

    let applicator = FilterApplicator::new(pencil, spec, *plan, cfg.solver.precond)?;
    let sigmas = applicator.sigmas();
    let mut report = RunReport::new(plan);
    let mut history: Vec<HistoryRow> = Vec::new();
    let mut rank_loss_iters: Vec<usize> = Vec::new();
    let mut capped_solves = 0usize;

    let mut solver_cfg = cfg.solver.clone();
    if enhanced {
        let cap = cfg.it_max_linear.expect("validated");
        solver_cfg.max_iters = solver_cfg.max_iters.min(cap);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v = random_block(n, l, &mut rng);
    let mut guesses: Option<Vec<DenseBlock<Complex64>>> = None;

    // locked pairs (enhanced)
    let mut locked_thetas: Vec<f64> = Vec::new();
    let mut locked_x = DenseBlock::<f64>::zeros(n, 0);

    let mut partial_set_streak = 0usize;
    let mut exhausted_streak = 0usize;
    let mut outcome: Option<Outcome> = None;
    let mut basic_partial: Option<(Vec<f64>, DenseBlock<f64>)> = None;
    let mut outer = 0usize;

    while outer < cfg.max_outer {
        outer += 1;
        let (mut u, timing, stats) =
            applicator.apply_filter_block(pencil, &v, guesses.as_deref(), &solver_cfg)?;
        capped_solves += stats
            .iter()
            .flatten()
            .filter(|s| !s.converged)
            .count();
        let pole_column_iters: Vec<Vec<usize>> = stats
            .iter()
            .map(|cols| cols.iter().map(|s| s.iterations).collect())
            .collect();
        report.record_iteration(outer, &timing, pole_column_iters);

        if enhanced && locked_x.ncols() > 0 {
            u = b_project_out(pencil.b(), &locked_x, &u)?;
        }

        let ritz = rayleigh_ritz(pencil, &u)?;
        if ritz.thetas.len() < u.ncols() {
            rank_loss_iters.push(outer);
        }

        let inside =
            |m: usize| ritz.thetas[m] > 0.0 && ritz.thetas[m] <= gamma_hi;
        let converged_pair = |m: usize| ritz.residuals[m] < cfg.tol_eig;
        let inside_idx: Vec<usize> = (0..ritz.thetas.len()).filter(|&m| inside(m)).collect();

        if enhanced {
            let newly: Vec<usize> = inside_idx
                .iter()
                .copied()
                .filter(|&m| converged_pair(m))
                .collect();
            let still_active: Vec<usize> = (0..ritz.thetas.len())
                .filter(|m| !newly.contains(m))
                .collect();

            if !newly.is_empty() {
                let mut candidate = locked_x.clone();
                let mut candidate_thetas = locked_thetas.clone();
                for &m in &newly {
                    candidate.push_column(ritz.vectors.col(m));
                    candidate_thetas.push(ritz.thetas[m]);
                }
                let ortho = b_orthonormalize(pencil.b(), &candidate)?;
                if ortho.dropped > 0 {
                    // a duplicate direction slipped through the projection;
                    // discard its theta as well to keep pairs aligned
                    for &d in ortho.dropped_indices.iter().rev() {
                        candidate_thetas.remove(d);
                    }
                }
                locked_x = ortho.q;
                locked_thetas = candidate_thetas;
            }

            let tracked_res = inside_idx
                .iter()
                .filter(|m| !newly.contains(m))
                .map(|&m| ritz.residuals[m])
                .fold(f64::NAN, f64::max);
            history.push(HistoryRow {
                outer_iter: outer,
                n_conv: locked_thetas.len(),
                max_residual: tracked_res,
                group_busy_seconds: timing.busy_seconds.clone(),
                max_wait_seconds: timing
                    .wait_seconds
                    .iter()
                    .copied()
                    .fold(0.0f64, f64::max),
                active_thetas: still_active.iter().map(|&m| ritz.thetas[m]).collect(),
                locked_thetas: locked_thetas.clone(),
            });

            if locked_thetas.len() >= cfg.nev {
                outcome = Some(sorted_outcome(
                    ConvergenceCase::NevConverged,
                    &locked_thetas,
                    &locked_x,
                ));
                break;
            }
            let inside_active = still_active.iter().any(|&m| inside(m));
            if !inside_active && !locked_thetas.is_empty() {
                exhausted_streak += 1;
                if exhausted_streak >= EXHAUSTED_STREAK {
                    outcome = Some(sorted_outcome(
                        ConvergenceCase::IntervalExhausted,
                        &locked_thetas,
                        &locked_x,
                    ));
                    break;
                }
            } else {
                exhausted_streak = 0;
            }

            // resize the active block to L - n_conv, padding with fresh
            // random directions if the filtered block lost rank
            let n_act = l - locked_thetas.len();
            let keep: Vec<usize> = still_active.iter().copied().take(n_act).collect();
            let mut next_v = ritz.vectors.select_columns(&keep);
            let mut next_thetas: Vec<Option<f64>> =
                keep.iter().map(|&m| Some(ritz.thetas[m])).collect();
            while next_v.ncols() < n_act {
                let pad = random_block(n, 1, &mut rng);
                next_v.push_column(pad.col(0));
                next_thetas.push(None);
            }
            guesses = Some(build_guesses(&sigmas, &next_thetas, &next_v));
            v = next_v;
        } else {
            // basic: track the nev smallest wanted values
            let tracked: Vec<usize> =
                inside_idx.iter().copied().take(cfg.nev).collect();
            let n_conv = tracked.iter().filter(|&&m| converged_pair(m)).count();
            let tracked_res = tracked
                .iter()
                .map(|&m| ritz.residuals[m])
                .fold(f64::NAN, f64::max);
            history.push(HistoryRow {
                outer_iter: outer,
                n_conv,
                max_residual: tracked_res,
                group_busy_seconds: timing.busy_seconds.clone(),
                max_wait_seconds: timing
                    .wait_seconds
                    .iter()
                    .copied()
                    .fold(0.0f64, f64::max),
                active_thetas: ritz.thetas.clone(),
                locked_thetas: Vec::new(),
            });

            // remember the converged part of the tracked set in case the
            // outer budget runs out
            let tracked_done: Vec<usize> = tracked
                .iter()
                .copied()
                .filter(|&m| converged_pair(m))
                .collect();
            basic_partial = Some((
                tracked_done.iter().map(|&m| ritz.thetas[m]).collect(),
                ritz.vectors.select_columns(&tracked_done),
            ));

            if inside_idx.len() >= cfg.nev && tracked.iter().all(|&m| converged_pair(m)) {
                let thetas: Vec<f64> = tracked.iter().map(|&m| ritz.thetas[m]).collect();
                let vectors = ritz.vectors.select_columns(&tracked);
                outcome = Some(Outcome {
                    case: ConvergenceCase::NevConverged,
                    thetas,
                    vectors,
                });
                break;
            }
            if !inside_idx.is_empty()
                && inside_idx.len() < cfg.nev
                && inside_idx.iter().all(|&m| converged_pair(m))
            {
                partial_set_streak += 1;
                if partial_set_streak >= 2 {
                    let thetas: Vec<f64> =
                        inside_idx.iter().map(|&m| ritz.thetas[m]).collect();
                    let vectors = ritz.vectors.select_columns(&inside_idx);
                    outcome = Some(Outcome {
                        case: ConvergenceCase::IntervalExhausted,
                        thetas,
                        vectors,
                    });
                    break;
                }
            } else {
                partial_set_streak = 0;
            }

            let mut next_v = ritz.vectors;
            while next_v.ncols() < l {
                let pad = random_block(n, 1, &mut rng);
                next_v.push_column(pad.col(0));
            }
            v = next_v;
        }
    }

    let outcome = outcome.unwrap_or_else(|| {
        // budget exhausted: return whatever has converged
        if enhanced {
            sorted_outcome(ConvergenceCase::MaxOuterReached, &locked_thetas, &locked_x)
        } else {
            let (thetas, vectors) = basic_partial
                .unwrap_or_else(|| (Vec::new(), DenseBlock::zeros(n, 0)));
            Outcome {
                case: ConvergenceCase::MaxOuterReached,
                thetas,
                vectors,
            }
        }
    });

    let mut residuals = Vec::with_capacity(outcome.thetas.len());
    for (m, &theta) in outcome.thetas.iter().enumerate() {
        residuals.push(residual_check(pencil, theta, outcome.vectors.col(m))?);
    }
    report.finalize(start.elapsed().as_secs_f64());
    let converged = outcome.case != ConvergenceCase::MaxOuterReached;
    Ok(EigResult {
        thetas: outcome.thetas,
        vectors: outcome.vectors,
        residuals,
        outer_iters: outer,
        converged,
        case: outcome.case,
        capped_solves,
        report,
        history,
        rank_loss_iters,
    })
}

fn sorted_outcome(case: ConvergenceCase, thetas: &[f64], x: &DenseBlock<f64>) -> Outcome {
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&i, &j| thetas[i].partial_cmp(&thetas[j]).expect("finite"));
    Outcome {
        case,
        thetas: order.iter().map(|&i| thetas[i]).collect(),
        vectors: x.select_columns(&order),
    }
}

/// Initial-guess blocks for the next outer iteration: pole `i` column `m` is
/// `v_m / (theta_m - sigma_i)`; padded columns without a Ritz value get zero.
fn build_guesses(
    sigmas: &[Complex64],
    thetas: &[Option<f64>],
    v: &DenseBlock<f64>,
) -> Vec<DenseBlock<Complex64>> {
    sigmas
        .iter()
        .map(|&sigma| {
            let mut g = DenseBlock::zeros(v.nrows(), v.ncols());
            for (m, th) in thetas.iter().enumerate() {
                if let Some(theta) = th {
                    let col = cayley_initial_guess(*theta, sigma, v.col(m));
                    g.col_mut(m).copy_from_slice(&col);
                }
            }
            g
        })
        .collect()
}

/// One row of an inner-cap sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub it_max_linear: usize,
    /// Outer iterations to convergence; `None` marks a DNF at `max_outer`.
    pub outer_iters: Option<usize>,
    pub total_inner_iters: usize,
    pub wall_seconds: f64,
}

/// Run the enhanced driver once per cap value and tabulate the cost. A
/// non-converging point is recorded as DNF and the sweep continues.
pub fn sweep_itmax(
    pencil: &Pencil,
    spec: &FilterSpec,
    base: &DriverConfig,
    plan: &GroupPlan,
    caps: &[usize],
) -> Result<Vec<SweepPoint>> {
    let mut rows = Vec::with_capacity(caps.len());
    for &cap in caps {
        let started = Instant::now();
        let mut cfg = base.clone();
        cfg.mode = Mode::Enhanced;
        cfg.it_max_linear = Some(cap);
        let result = run(pencil, spec, &cfg, plan)?;
        rows.push(SweepPoint {
            it_max_linear: cap,
            outer_iters: result.converged.then_some(result.outer_iters),
            total_inner_iters: result.report.pole_iteration_totals().iter().sum(),
            wall_seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}
