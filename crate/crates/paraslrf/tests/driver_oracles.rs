//! End-to-end driver runs cross-checked against the dense oracle and the
//! analytic spectra.

mod common;

use paraslrf::driver::{run_basic, run_enhanced, ConvergenceCase, DriverConfig};
use paraslrf::filters::{build_midpoint, build_slrf};
use paraslrf::harness::GroupPlan;
use paraslrf::pencil::b_inner;
use paraslrf::problems::{fem1d_eigenvalue, gen_fem1d, gen_laplace3d, laplace3d_eigenvalues};

fn fem1d_gamma(n: usize, nev: usize) -> f64 {
    0.5 * (fem1d_eigenvalue(n, nev) + fem1d_eigenvalue(n, nev + 1))
}

#[test]
fn fem1d_analytic_formula_matches_dense_oracle() {
    for n in [10usize, 50, 200] {
        let g = gen_fem1d(n).unwrap();
        let oracle = common::pencil_eigenvalues(&g.pencil);
        for (k, want) in oracle.iter().enumerate() {
            let have = fem1d_eigenvalue(n, k + 1);
            assert!(
                (have - want).abs() < 1e-9 * want,
                "n={n} k={k}: {have} vs {want}"
            );
        }
    }
}

#[test]
fn laplace3d_analytic_formula_matches_dense_oracle() {
    let g = gen_laplace3d(2, 2, 2).unwrap();
    let oracle = common::pencil_eigenvalues(&g.pencil);
    let mut analytic = laplace3d_eigenvalues(2, 2, 2);
    analytic.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (have, want) in analytic.iter().zip(&oracle) {
        assert!((have - want).abs() < 1e-9 * want, "{have} vs {want}");
    }
}

#[test]
fn basic_matches_dense_oracle_on_fem1d() {
    let n = 200;
    let nev = 10;
    let g = gen_fem1d(n).unwrap();
    let gamma = fem1d_gamma(n, nev);
    let spec = build_slrf(gamma, 4, 1.0, 0.01).unwrap();
    let plan = GroupPlan::partition(4, 2, 1).unwrap();
    let cfg = DriverConfig::new(nev, gamma);

    let result = run_basic(&g.pencil, &spec, &cfg, &plan).unwrap();
    assert!(result.converged, "case {:?}", result.case);
    assert_eq!(result.thetas.len(), nev);
    assert!(result.residuals.iter().all(|&r| r < cfg.tol_eig));

    let oracle = common::pencil_eigenvalues(&g.pencil);
    for (k, t) in result.thetas.iter().enumerate() {
        let want = oracle[k];
        assert!(
            (t - want).abs() < 1e-7 * want,
            "theta[{k}] = {t} vs oracle {want}"
        );
    }
}

#[test]
fn different_seeds_agree() {
    let n = 150;
    let nev = 6;
    let g = gen_fem1d(n).unwrap();
    let gamma = fem1d_gamma(n, nev);
    let spec = build_slrf(gamma, 4, 1.0, 0.01).unwrap();
    let plan = GroupPlan::partition(4, 1, 1).unwrap();

    let mut cfg = DriverConfig::new(nev, gamma);
    cfg.seed = 7;
    let a = run_basic(&g.pencil, &spec, &cfg, &plan).unwrap();
    cfg.seed = 4242;
    let b = run_basic(&g.pencil, &spec, &cfg, &plan).unwrap();
    assert!(a.converged && b.converged);
    for (x, y) in a.thetas.iter().zip(&b.thetas) {
        assert!((x - y).abs() < 1e-9 * x, "{x} vs {y}");
    }
}

#[test]
fn enhanced_agrees_with_basic() {
    let n = 200;
    let nev = 10;
    let g = gen_fem1d(n).unwrap();
    let gamma = fem1d_gamma(n, nev);
    let spec = build_slrf(gamma, 4, 1.0, 0.01).unwrap();
    let plan = GroupPlan::partition(4, 2, 1).unwrap();

    let cfg = DriverConfig::new(nev, gamma);
    let basic = run_basic(&g.pencil, &spec, &cfg, &plan).unwrap();

    let mut cfg_e = cfg.clone();
    cfg_e.it_max_linear = Some(20);
    let enhanced = run_enhanced(&g.pencil, &spec, &cfg_e, &plan).unwrap();

    assert!(basic.converged && enhanced.converged);
    assert_eq!(basic.thetas.len(), enhanced.thetas.len());
    for (x, y) in basic.thetas.iter().zip(&enhanced.thetas) {
        assert!((x - y).abs() < 1e-6 * x, "{x} vs {y}");
    }
}

#[test]
fn multiplicities_resolved_on_laplace3d() {
    // 6x6x6 grid: the second eigenvalue level is threefold
    let g = gen_laplace3d(6, 6, 6).unwrap();
    let mut lams = laplace3d_eigenvalues(6, 6, 6);
    lams.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nev = 4; // (1,1,1) plus the full (1,1,2) multiplet
    assert!((lams[1] - lams[3]).abs() < 1e-9 * lams[1]);
    assert!(lams[4] > lams[3] * 1.05);
    let gamma = 0.5 * (lams[3] + lams[4]);

    let spec = build_slrf(gamma, 4, 1.0, 0.01).unwrap();
    let plan = GroupPlan::partition(4, 2, 1).unwrap();
    let cfg = DriverConfig::new(nev, gamma);
    let result = run_basic(&g.pencil, &spec, &cfg, &plan).unwrap();
    assert!(result.converged);
    assert_eq!(result.thetas.len(), nev);

    let gamma_hi = gamma * (1.0 + 1e-8);
    for (k, &t) in result.thetas.iter().enumerate() {
        assert!(t > 0.0 && t <= gamma_hi);
        assert!(
            (t - lams[k]).abs() < 1e-6 * lams[k],
            "theta[{k}] = {t} vs analytic {}",
            lams[k]
        );
    }

    // returned block is B-orthonormal with no duplicate directions
    let x = &result.vectors;
    for i in 0..x.ncols() {
        for j in 0..x.ncols() {
            let gij = b_inner(g.pencil.b(), x.col(j), x.col(i)).unwrap();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((gij - want).abs() < 1e-8, "gram[{i}][{j}] = {gij}");
        }
    }
}

#[test]
fn tracked_residuals_contract_monotonically() {
    // sharp midpoint filter and tight solves: the worst tracked residual may
    // rise at most once, and never by more than 10x
    let n = 120;
    let nev = 8;
    let g = gen_fem1d(n).unwrap();
    let gamma = fem1d_gamma(n, nev);
    let spec = build_midpoint(gamma, 8).unwrap();
    let plan = GroupPlan::partition(8, 2, 1).unwrap();
    let mut cfg = DriverConfig::new(nev, gamma);
    cfg.tol_eig = 1e-10;
    let result = run_basic(&g.pencil, &spec, &cfg, &plan).unwrap();
    assert!(result.converged);

    let series: Vec<f64> = result
        .history
        .iter()
        .map(|h| h.max_residual)
        .filter(|r| r.is_finite())
        .collect();
    assert!(series.len() >= 3, "too short: {series:?}");
    let mut rises = 0;
    for w in series.windows(2) {
        if w[1] > w[0] {
            rises += 1;
            assert!(w[1] <= 10.0 * w[0], "rise {} -> {}", w[0], w[1]);
        }
    }
    assert!(rises <= 1, "{rises} rises in {series:?}");
}

#[test]
fn spurious_values_above_gamma_are_not_reported() {
    let n = 80;
    let nev = 5;
    let g = gen_fem1d(n).unwrap();
    let gamma = fem1d_gamma(n, nev);
    let spec = build_slrf(gamma, 4, 1.0, 0.01).unwrap();
    let plan = GroupPlan::partition(4, 1, 1).unwrap();
    let cfg = DriverConfig::new(nev, gamma);
    let result = run_basic(&g.pencil, &spec, &cfg, &plan).unwrap();
    assert!(result.converged);
    let gamma_hi = gamma * (1.0 + 1e-8);
    assert!(result.thetas.iter().all(|&t| t > 0.0 && t <= gamma_hi));
    assert!(result.thetas.len() <= cfg.subspace_size());
}

#[test]
fn enhanced_guesses_cut_inner_work() {
    // the Cayley-derived guesses should make later outer iterations cheaper
    // than the first one
    let n = 400;
    let nev = 8;
    let g = gen_fem1d(n).unwrap();
    let gamma = fem1d_gamma(n, nev);
    let spec = build_slrf(gamma, 4, 1.0, 0.01).unwrap();
    let plan = GroupPlan::partition(4, 1, 1).unwrap();
    let mut cfg = DriverConfig::new(nev, gamma);
    cfg.it_max_linear = Some(10_000);
    cfg.solver.precond = paraslrf::PrecondKind::Jacobi;
    let result = run_enhanced(&g.pencil, &spec, &cfg, &plan).unwrap();
    assert!(result.converged);
    let per_iter: Vec<usize> = result
        .report
        .iterations
        .iter()
        .map(|it| it.pole_inner_iters.iter().sum())
        .collect();
    assert!(per_iter.len() >= 2);
    let later_max = per_iter[1..].iter().copied().max().unwrap();
    assert!(
        later_max < per_iter[0],
        "first {} vs later max {later_max}",
        per_iter[0]
    );
}

#[test]
fn exhausted_interval_matches_oracle_count() {
    // gamma covers exactly 3 eigenvalues; asking for 6 must return the 3
    let n = 100;
    let g = gen_fem1d(n).unwrap();
    let gamma = fem1d_gamma(n, 3);
    let spec = build_slrf(gamma, 4, 1.0, 0.01).unwrap();
    let plan = GroupPlan::partition(4, 1, 1).unwrap();
    let cfg = DriverConfig::new(6, gamma);
    let result = run_basic(&g.pencil, &spec, &cfg, &plan).unwrap();
    assert!(result.converged);
    assert_eq!(result.case, ConvergenceCase::IntervalExhausted);
    assert_eq!(result.thetas.len(), 3);
    for (k, &t) in result.thetas.iter().enumerate() {
        let want = fem1d_eigenvalue(n, k + 1);
        assert!((t - want).abs() < 1e-7 * want);
    }
}
