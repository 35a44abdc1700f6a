//! Property tests for the filter constructions and the symmetric kernels.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use paraslrf::filters::{
    build_gauss_chebyshev, build_gauss_legendre, build_midpoint, build_slrf, eval_filter,
};
use paraslrf::gcr::solve_block;
use paraslrf::precond::{build_preconditioner, PrecondKind};
use paraslrf::problems::{gen_laplace3d, laplace3d_eigenvalues};
use paraslrf::sparse::CsrMatrix;
use paraslrf::{DenseBlock, SolverConfig};

fn any_filter(kind: u8, gamma: f64, n: usize) -> paraslrf::FilterSpec {
    match kind % 4 {
        0 => build_midpoint(gamma, n),
        1 => build_gauss_legendre(gamma, n),
        2 => build_gauss_chebyshev(gamma, n),
        _ => build_slrf(gamma, n, 1.0, 0.01),
    }
    .expect("valid filter")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The folded evaluation equals the full conjugate-pair pole sum, whose
    /// imaginary part cancels on the real axis.
    #[test]
    fn folding_matches_full_pole_sum(
        kind in 0u8..4,
        gamma in 0.5f64..50.0,
        n in 1usize..9,
        lambda in -2.0f64..6.0,
    ) {
        let spec = any_filter(kind, gamma, n);
        let l = lambda * gamma;
        let mut full = Complex64::new(0.0, 0.0);
        for (&sigma, &w) in spec.poles.iter().zip(&spec.weights) {
            full += w / (Complex64::new(l, 0.0) - sigma);
            full += w.conj() / (Complex64::new(l, 0.0) - sigma.conj());
        }
        let folded = eval_filter(&spec, l);
        let scale = spec.weights.iter().map(|w| w.norm()).sum::<f64>() / gamma;
        prop_assert!(full.im.abs() <= 1e-12 * scale.max(1e-30));
        prop_assert!((full.re - folded).abs() <= 1e-12 * (folded.abs() + scale).max(1e-30));
    }

    /// Symmetric matrices commute with the dot product:
    /// u^T M v == v^T M u up to roundoff.
    #[test]
    fn symmetric_bilinear_form_commutes(seed in 1u64..5000) {
        let n = 24;
        let mut s = seed;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut trip = Vec::new();
        for i in 0..n {
            for j in i..n {
                if (i + j) % 3 == 0 {
                    let v = next();
                    trip.push((i, j, v));
                    if i != j {
                        trip.push((j, i, v));
                    }
                }
            }
        }
        let m = CsrMatrix::from_triplets(n, n, trip).unwrap();
        let u: Vec<f64> = (0..n).map(|_| next()).collect();
        let v: Vec<f64> = (0..n).map(|_| next()).collect();
        let mu = m.spmv(&u).unwrap();
        let mv = m.spmv(&v).unwrap();
        let a: f64 = u.iter().zip(&mv).map(|(x, y)| x * y).sum();
        let b: f64 = v.iter().zip(&mu).map(|(x, y)| x * y).sum();
        let unorm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((a - b).abs() <= 1e-13 * m.fro_norm() * unorm * vnorm);
    }

    /// Shifting by the conjugate pole conjugates the shifted matrix.
    #[test]
    fn conjugate_shift_conjugates_matrix(re in 0.1f64..5.0, im in 0.1f64..5.0) {
        let g = paraslrf::problems::gen_fem1d(10).unwrap();
        let sigma = Complex64::new(re, im);
        let c1 = g.pencil.form_shifted(sigma);
        let c2 = g.pencil.form_shifted(sigma.conj());
        for ((_, _, a), (_, _, b)) in c1.matrix().iter().zip(c2.matrix().iter()) {
            prop_assert_eq!(a.conj(), b);
        }
    }
}

#[test]
fn folded_evaluation_is_real_on_dense_grid() {
    // the conjugate-pair fold leaves no imaginary part anywhere on the axis
    let gamma = 3.0;
    let specs = [
        build_midpoint(gamma, 6).unwrap(),
        build_gauss_legendre(gamma, 6).unwrap(),
        build_gauss_chebyshev(gamma, 6).unwrap(),
        build_slrf(gamma, 6, 1.0, 0.01).unwrap(),
    ];
    let mut s = 0x12345u64;
    for _ in 0..10_000 {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        let l = ((s >> 11) as f64 / (1u64 << 53) as f64) * 8.0 * gamma - gamma;
        for spec in &specs {
            let mut full = Complex64::new(0.0, 0.0);
            for (&sigma, &w) in spec.poles.iter().zip(&spec.weights) {
                full += w / (Complex64::new(l, 0.0) - sigma);
                full += w.conj() / (Complex64::new(l, 0.0) - sigma.conj());
            }
            let scale = spec.weights.iter().map(|w| w.norm()).sum::<f64>() / gamma;
            assert!(full.im.abs() <= 1e-11 * scale.max(1e-30), "at {l}");
            assert!(eval_filter(spec, l).is_finite());
        }
    }
}

#[test]
fn equal_statistics_columns_solve_in_equal_iterations() {
    // four random right-hand sides on the shifted 3D Laplacian: iteration
    // counts agree within +-1
    let g = gen_laplace3d(8, 8, 8).unwrap();
    let mut lams = laplace3d_eigenvalues(8, 8, 8);
    lams.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mu = lams[lams.len() / 4];
    let c = g.pencil.form_shifted(Complex64::new(mu, mu));
    let p = build_preconditioner(&c, PrecondKind::Ilu0).unwrap();

    let n = g.pencil.n();
    let mut s = 0xc0ffee_u64;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let cols: Vec<Vec<Complex64>> = (0..4)
        .map(|_| (0..n).map(|_| Complex64::new(next(), 0.0)).collect())
        .collect();
    let f = DenseBlock::from_columns(n, &cols);
    let (_, stats) = solve_block(&c, &p, &f, None, &SolverConfig::default()).unwrap();
    let iters: Vec<usize> = stats.iter().map(|s| s.iterations).collect();
    let (lo, hi) = (
        *iters.iter().min().unwrap(),
        *iters.iter().max().unwrap(),
    );
    assert!(hi - lo <= 1, "iteration spread {iters:?}");
}
