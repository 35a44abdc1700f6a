//! Test-only dense oracles, written independently of the library kernels:
//! plain textbook Cholesky reduction plus an unoptimized Jacobi loop.

#![allow(dead_code)]

use paraslrf::sparse::CsrMatrix;

pub fn to_dense(m: &CsrMatrix<f64>) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; m.ncols()]; m.nrows()];
    for (i, j, v) in m.iter() {
        d[i][j] += v;
    }
    d
}

/// Eigenvalues of a dense symmetric matrix by an exhaustive Jacobi loop.
pub fn jacobi_eigenvalues(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    let fro: f64 = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    for _sweep in 0..400 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[p][q].abs());
            }
        }
        if off <= 1e-15 * fro.max(1e-300) {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for i in 0..n {
                    let mpi = m[p][i];
                    let mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    vals
}

fn cholesky(b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = b[i][j];
            for k in 0..j {
                acc -= l[i][k] * l[j][k];
            }
            if i == j {
                assert!(acc > 0.0, "oracle Cholesky hit a nonpositive pivot");
                l[i][j] = acc.sqrt();
            } else {
                l[i][j] = acc / l[j][j];
            }
        }
    }
    l
}

fn solve_lower_inplace(l: &[Vec<f64>], rhs: &mut [f64]) {
    for i in 0..rhs.len() {
        for k in 0..i {
            rhs[i] = rhs[i] - l[i][k] * rhs[k];
        }
        rhs[i] /= l[i][i];
    }
}

/// Sorted generalized eigenvalues of a dense symmetric-definite pair via
/// `L = chol(B)` and Jacobi on `L^{-1} A L^{-T}`.
pub fn generalized_eigenvalues(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let l = cholesky(b);
    // X = L^{-1} A (column by column)
    let mut x = vec![vec![0.0f64; n]; n];
    for col in 0..n {
        let mut rhs: Vec<f64> = (0..n).map(|i| a[i][col]).collect();
        solve_lower_inplace(&l, &mut rhs);
        for i in 0..n {
            x[i][col] = rhs[i];
        }
    }
    // C = X L^{-T}: row r of C is L^{-1} applied to row r of X
    let mut c = vec![vec![0.0f64; n]; n];
    for r in 0..n {
        let mut rhs = x[r].clone();
        solve_lower_inplace(&l, &mut rhs);
        c[r] = rhs;
    }
    jacobi_eigenvalues(c)
}

/// Sorted generalized eigenvalues of a pencil given in sparse form.
pub fn pencil_eigenvalues(pencil: &paraslrf::Pencil) -> Vec<f64> {
    generalized_eigenvalues(&to_dense(pencil.a()), &to_dense(pencil.b()))
}
