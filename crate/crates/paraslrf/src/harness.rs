//! Two-level execution of per-pole work: Level 1 runs pole groups
//! concurrently, Level 2 bounds the data-parallel width inside each group.
//! A barrier (the joins) precedes every reduction, and the reduction itself
//! accumulates in ascending pole order, so numerical output never depends on
//! scheduling.
//!
//! Group busy times are measured from group start to its last pole
//! completing; wait time is derived as `max busy - own busy` rather than
//! clocked at the barrier, which keeps the accounting immune to timer
//! preemption.

use num_complex::Complex64;
use serde::Serialize;
use std::ops::Range;
use std::time::Instant;

use crate::dense::DenseBlock;
use crate::error::{Error, Result};

/// Partition of `n_poles` across `n_part` concurrent groups, each running
/// `workers_per_group` data-parallel workers for its solves. Group `j` owns
/// the contiguous pole indices `j*n_sub .. (j+1)*n_sub`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupPlan {
    pub n_poles: usize,
    pub n_part: usize,
    pub workers_per_group: usize,
}

impl GroupPlan {
    pub fn partition(n_poles: usize, n_part: usize, workers_per_group: usize) -> Result<Self> {
        if n_part == 0 || workers_per_group == 0 {
            return Err(Error::Config(
                "group count and worker count must be positive".into(),
            ));
        }
        if n_poles == 0 || !n_poles.is_multiple_of(n_part) {
            return Err(Error::IndivisiblePoles { n_poles, n_part });
        }
        Ok(Self {
            n_poles,
            n_part,
            workers_per_group,
        })
    }

    /// Poles per group.
    pub fn n_sub(&self) -> usize {
        self.n_poles / self.n_part
    }

    pub fn group_poles(&self, group: usize) -> Range<usize> {
        let n_sub = self.n_sub();
        group * n_sub..(group + 1) * n_sub
    }

    /// Group owning a pole index.
    pub fn group_of(&self, pole: usize) -> usize {
        pole / self.n_sub()
    }
}

/// Per-group timings of one filter application.
#[derive(Debug, Clone, Serialize)]
pub struct GroupTiming {
    pub busy_seconds: Vec<f64>,
    pub wait_seconds: Vec<f64>,
}

impl GroupTiming {
    fn from_busy(busy: Vec<f64>) -> Self {
        let max = busy.iter().copied().fold(0.0f64, f64::max);
        let wait = busy.iter().map(|b| max - b).collect();
        GroupTiming {
            busy_seconds: busy,
            wait_seconds: wait,
        }
    }
}

/// Per-group outcome: one result per owned pole plus the group's busy time.
type GroupOutcome<T> = std::result::Result<(Vec<Result<T>>, f64), Error>;

fn run_group<T, F>(poles: Range<usize>, task: &F, workers: usize) -> GroupOutcome<T>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let start = Instant::now();
    let mut out = Vec::with_capacity(poles.len());

    #[cfg(feature = "parallel")]
    {
        // a dedicated pool caps the data-parallel width of everything the
        // task fans out (column solves), including the width-1 case
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        for i in poles {
            out.push(pool.install(|| task(i)));
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        for i in poles {
            out.push(task(i));
        }
    }
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Run one task per pole under the plan. Groups execute concurrently (with
/// the `parallel` feature), poles within a group sequentially. Results come
/// back keyed by pole index; a failing pole aborts with a diagnostic naming
/// it.
pub fn execute_filter<T, F>(plan: &GroupPlan, task: F) -> Result<(Vec<T>, GroupTiming)>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let groups: Vec<GroupOutcome<T>>;

    #[cfg(feature = "parallel")]
    {
        if plan.n_part == 1 {
            groups = vec![run_group(plan.group_poles(0), &task, plan.workers_per_group)];
        } else {
            let task_ref = &task;
            groups = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..plan.n_part)
                    .map(|j| {
                        let poles = plan.group_poles(j);
                        let workers = plan.workers_per_group;
                        scope.spawn(move || run_group(poles, task_ref, workers))
                    })
                    .collect();
                handles
                    .into_iter()
                    .enumerate()
                    .map(|(j, h)| {
                        h.join().unwrap_or_else(|_| {
                            Err(Error::Config(format!("group {j} panicked")))
                        })
                    })
                    .collect()
            });
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        groups = (0..plan.n_part)
            .map(|j| run_group(plan.group_poles(j), &task, plan.workers_per_group))
            .collect();
    }

    let mut busy = Vec::with_capacity(plan.n_part);
    let mut results = Vec::with_capacity(plan.n_poles);
    for (j, g) in groups.into_iter().enumerate() {
        let (items, secs) = g?;
        for (offset, item) in items.into_iter().enumerate() {
            let pole = plan.group_poles(j).start + offset;
            results.push(item.map_err(|e| Error::GroupFailure {
                group: j,
                pole,
                source: Box::new(e),
            })?);
        }
        busy.push(secs);
    }
    Ok((results, GroupTiming::from_busy(busy)))
}

/// `U = sum_j 2 Re(w_j Y_j)`, accumulated in ascending pole index so the
/// result is bitwise reproducible regardless of completion order.
pub fn reduce_sum(results: &[DenseBlock<Complex64>], weights: &[Complex64]) -> Result<DenseBlock<f64>> {
    if results.len() != weights.len() {
        return Err(Error::MissingPoleResult(results.len().min(weights.len())));
    }
    let first = results.first().ok_or(Error::MissingPoleResult(0))?;
    let (n, cols) = (first.nrows(), first.ncols());
    let mut u = DenseBlock::zeros(n, cols);
    for (y, &w) in results.iter().zip(weights) {
        if y.nrows() != n || y.ncols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "reduce_sum: block {}x{} against {}x{}",
                y.nrows(),
                y.ncols(),
                n,
                cols
            )));
        }
        for j in 0..cols {
            let yc = y.col(j);
            let uc = u.col_mut(j);
            for (ui, yi) in uc.iter_mut().zip(yc) {
                *ui += 2.0 * (w * yi).re;
            }
        }
    }
    Ok(u)
}

/// Per-outer-iteration load-balance record.
#[derive(Debug, Clone, Serialize)]
pub struct IterationBalance {
    pub outer_iter: usize,
    pub busy_seconds: Vec<f64>,
    pub wait_seconds: Vec<f64>,
    /// Inner iterations per pole and right-hand-side column.
    pub pole_column_iters: Vec<Vec<usize>>,
    /// Per-pole sums of the above.
    pub pole_inner_iters: Vec<usize>,
}

/// Load-balance instrumentation over a whole run.
///
/// `ratio` is max over min cumulative group busy time; `max_wait_seconds` the
/// largest cumulative wait; `wait_proportion` that wait against total wall
/// time.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub n_part: usize,
    pub workers_per_group: usize,
    pub iterations: Vec<IterationBalance>,
    pub cumulative_busy_seconds: Vec<f64>,
    pub ratio: f64,
    pub max_wait_seconds: f64,
    pub wait_proportion: f64,
    pub total_wall_seconds: f64,
}

impl RunReport {
    pub fn new(plan: &GroupPlan) -> Self {
        Self {
            n_part: plan.n_part,
            workers_per_group: plan.workers_per_group,
            iterations: Vec::new(),
            cumulative_busy_seconds: vec![0.0; plan.n_part],
            ratio: 1.0,
            max_wait_seconds: 0.0,
            wait_proportion: 0.0,
            total_wall_seconds: 0.0,
        }
    }

    pub fn record_iteration(
        &mut self,
        outer_iter: usize,
        timing: &GroupTiming,
        pole_column_iters: Vec<Vec<usize>>,
    ) {
        for (acc, b) in self
            .cumulative_busy_seconds
            .iter_mut()
            .zip(&timing.busy_seconds)
        {
            *acc += b;
        }
        let pole_inner_iters = pole_column_iters
            .iter()
            .map(|cols| cols.iter().sum())
            .collect();
        self.iterations.push(IterationBalance {
            outer_iter,
            busy_seconds: timing.busy_seconds.clone(),
            wait_seconds: timing.wait_seconds.clone(),
            pole_column_iters,
            pole_inner_iters,
        });
    }

    /// Close the report once the run's wall time is known.
    pub fn finalize(&mut self, total_wall_seconds: f64) {
        self.total_wall_seconds = total_wall_seconds;
        let max = self
            .cumulative_busy_seconds
            .iter()
            .copied()
            .fold(0.0f64, f64::max);
        let min = self
            .cumulative_busy_seconds
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        self.ratio = if min > 0.0 { max / min } else { 1.0 };
        let mut cumulative_wait = vec![0.0f64; self.n_part];
        for it in &self.iterations {
            for (acc, w) in cumulative_wait.iter_mut().zip(&it.wait_seconds) {
                *acc += w;
            }
        }
        self.max_wait_seconds = cumulative_wait.iter().copied().fold(0.0f64, f64::max);
        self.wait_proportion = if total_wall_seconds > 0.0 {
            (self.max_wait_seconds / total_wall_seconds).min(1.0 - f64::EPSILON)
        } else {
            0.0
        };
    }

    /// Total inner iterations per pole across the run.
    pub fn pole_iteration_totals(&self) -> Vec<usize> {
        let n_poles = self
            .iterations
            .first()
            .map(|it| it.pole_inner_iters.len())
            .unwrap_or(0);
        let mut totals = vec![0usize; n_poles];
        for it in &self.iterations {
            for (t, &v) in totals.iter_mut().zip(&it.pole_inner_iters) {
                *t += v;
            }
        }
        totals
    }
}

/// One row of a strong-scaling study.
#[derive(Debug, Clone, Serialize)]
pub struct ScalePoint {
    pub n_part: usize,
    pub workers_per_group: usize,
    pub wall_seconds: f64,
    pub speedup: f64,
}

/// Run the same task under each plan and report wall times plus speedups
/// relative to the first plan.
pub fn scalability_run<F>(plans: &[GroupPlan], mut task: F) -> Result<Vec<ScalePoint>>
where
    F: FnMut(&GroupPlan) -> Result<()>,
{
    let mut points = Vec::with_capacity(plans.len());
    let mut base = None;
    for plan in plans {
        let start = Instant::now();
        task(plan)?;
        let wall = start.elapsed().as_secs_f64();
        let base_wall = *base.get_or_insert(wall);
        points.push(ScalePoint {
            n_part: plan.n_part,
            workers_per_group: plan.workers_per_group,
            wall_seconds: wall,
            speedup: base_wall / wall,
        });
    }
    Ok(points)
}
