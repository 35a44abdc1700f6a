//! Column-major dense blocks and the small dense kernels used on projected
//! problems: a cyclic Jacobi eigensolver, Householder least squares, and the
//! symmetric-definite projected eigensolver with spectral truncation of a
//! near-singular mass matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::Scalar;

/// Column-major block of vectors (also used as a small dense matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseBlock<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn from_columns(nrows: usize, cols: &[Vec<T>]) -> Self {
        let mut block = Self::zeros(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nrows, "column length");
            block.col_mut(j).copy_from_slice(c);
        }
        block
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.nrows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.nrows + i] = v;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// New block with the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let mut out = Self::zeros(self.nrows, keep.len());
        for (dst, &src) in keep.iter().enumerate() {
            out.col_mut(dst).copy_from_slice(self.col(src));
        }
        out
    }

    pub fn push_column(&mut self, c: &[T]) {
        assert_eq!(c.len(), self.nrows, "column length");
        self.data.extend_from_slice(c);
        self.ncols += 1;
    }
}

impl DenseBlock<f64> {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn to_complex(&self) -> DenseBlock<Complex64> {
        DenseBlock {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// C = self^T * other (self is n x k, other is n x m, result k x m).
    pub fn transpose_mul(&self, other: &DenseBlock<f64>) -> DenseBlock<f64> {
        assert_eq!(self.nrows, other.nrows, "transpose_mul row count");
        let mut out = DenseBlock::zeros(self.ncols, other.ncols);
        for j in 0..other.ncols {
            let oc = other.col(j);
            for k in 0..self.ncols {
                let sc = self.col(k);
                let mut acc = 0.0;
                for i in 0..self.nrows {
                    acc += sc[i] * oc[i];
                }
                out.set(k, j, acc);
            }
        }
        out
    }

    /// C = self * other (n x k times k x m).
    pub fn mul(&self, other: &DenseBlock<f64>) -> DenseBlock<f64> {
        assert_eq!(self.ncols, other.nrows, "mul inner dimension");
        let mut out = DenseBlock::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            let oc = other.col(j);
            let outc = out.col_mut(j);
            for k in 0..self.ncols {
                let f = oc[k];
                if f == 0.0 {
                    continue;
                }
                let sc = self.col(k);
                for i in 0..self.nrows {
                    outc[i] += sc[i] * f;
                }
            }
        }
        out
    }

    /// (M + M^T) / 2, scrubbing roundoff asymmetry.
    pub fn symmetrized(&self) -> DenseBlock<f64> {
        assert_eq!(self.nrows, self.ncols, "symmetrized: square");
        let mut out = self.clone();
        for i in 0..self.nrows {
            for j in (i + 1)..self.ncols {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }
}

/// Eigendecomposition of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps run until every off-diagonal magnitude drops below
/// `1e-14 * ||M||_F`. Returns eigenvalues ascending with matching
/// eigenvector columns.
pub fn jacobi_eigh(m: &DenseBlock<f64>) -> (Vec<f64>, DenseBlock<f64>) {
    assert_eq!(m.nrows(), m.ncols(), "jacobi_eigh: square input");
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DenseBlock::identity(n);
    if n <= 1 {
        return ((0..n).map(|i| a.get(i, i)).collect(), v);
    }
    let tol = 1e-14 * m.fro_norm();

    // cyclic sweeps over the upper triangle
    for _sweep in 0..200 {
        let mut largest = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                largest = largest.max(a.get(p, q).abs());
            }
        }
        if largest <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let s = theta.signum();
                    s / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for i in 0..n {
                    let api = a.get(p, i);
                    let aqi = a.get(q, i);
                    a.set(p, i, c * api - s * aqi);
                    a.set(q, i, s * api + c * aqi);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).expect("finite"));
    let eigvals: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    (eigvals, v.select_columns(&order))
}

/// Least squares `min ||M w - b||_2` by Householder QR, `m >= k`.
///
/// Rank deficiency (an R diagonal below `1e-13` of the largest) is an error.
pub fn householder_lsq(m: &DenseBlock<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if b.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "lsq: rhs of length {} against {rows}x{cols}",
            b.len()
        )));
    }
    if rows < cols {
        return Err(Error::DimensionMismatch(format!(
            "lsq: underdetermined {rows}x{cols}"
        )));
    }
    let mut a = m.clone();
    let mut rhs = b.to_vec();

    for j in 0..cols {
        // Householder vector for column j, rows j..
        let mut norm = 0.0f64;
        for i in j..rows {
            norm += a.get(i, j) * a.get(i, j);
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue; // leaves a zero diagonal; caught by the rank check below
        }
        let ajj = a.get(j, j);
        let alpha = if ajj >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0f64; rows - j];
        v[0] = ajj - alpha;
        for i in j + 1..rows {
            v[i - j] = a.get(i, j);
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        a.set(j, j, alpha);
        for i in j + 1..rows {
            a.set(i, j, 0.0);
        }
        if vtv == 0.0 {
            continue;
        }
        for col in j + 1..cols {
            let mut dot = 0.0;
            for i in j..rows {
                dot += v[i - j] * a.get(i, col);
            }
            let f = 2.0 * dot / vtv;
            for i in j..rows {
                a.set(i, col, a.get(i, col) - f * v[i - j]);
            }
        }
        let mut dot = 0.0;
        for i in j..rows {
            dot += v[i - j] * rhs[i];
        }
        let f = 2.0 * dot / vtv;
        for i in j..rows {
            rhs[i] -= f * v[i - j];
        }
    }

    let rmax = (0..cols).fold(0.0f64, |acc, j| acc.max(a.get(j, j).abs()));
    for j in 0..cols {
        if a.get(j, j).abs() < 1e-13 * rmax {
            return Err(Error::RankDeficient {
                index: j,
                value: a.get(j, j).abs(),
            });
        }
    }

    let mut w = vec![0.0f64; cols];
    for j in (0..cols).rev() {
        let mut acc = rhs[j];
        for k in j + 1..cols {
            acc -= a.get(j, k) * w[k];
        }
        w[j] = acc / a.get(j, j);
    }
    Ok(w)
}

/// Solve the dense symmetric-definite problem `Ahat s = theta Bhat s`.
///
/// A near-singular `Bhat` is handled by symmetric eigendecomposition and
/// truncation: modes with eigenvalue below `drop_tol` times the largest are
/// discarded and the problem is solved in the retained subspace. Returned
/// `thetas` are ascending; `s` holds one column per retained pair and
/// satisfies `S^T Bhat S = I`.
pub fn solve_dense_gep(
    ahat: &DenseBlock<f64>,
    bhat: &DenseBlock<f64>,
    drop_tol: f64,
) -> Result<(Vec<f64>, DenseBlock<f64>)> {
    let n = ahat.nrows();
    if ahat.ncols() != n || bhat.nrows() != n || bhat.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "projected pencil {}x{} vs {}x{}",
            ahat.nrows(),
            ahat.ncols(),
            bhat.nrows(),
            bhat.ncols()
        )));
    }
    let (mu, q) = jacobi_eigh(bhat);
    let mu_max = mu.last().copied().unwrap_or(0.0);
    if let Some(&lo) = mu.first() {
        if lo < -drop_tol * mu_max.max(f64::MIN_POSITIVE) {
            return Err(Error::ProjectedMassNotPsd(lo));
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| mu[i] >= drop_tol * mu_max).collect();
    if keep.is_empty() {
        return Err(Error::SubspaceCollapsed);
    }

    // W = Q_kept * diag(mu^{-1/2}); reduces to a standard symmetric problem
    let mut w = q.select_columns(&keep);
    for (c, &i) in keep.iter().enumerate() {
        let scale = 1.0 / mu[i].sqrt();
        for v in w.col_mut(c) {
            *v *= scale;
        }
    }
    let reduced = w.transpose_mul(&ahat.mul(&w)).symmetrized();
    let (thetas, s_reduced) = jacobi_eigh(&reduced);
    let s = w.mul(&s_reduced);
    Ok((thetas, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(rows: usize, cols: usize, entries: &[f64]) -> DenseBlock<f64> {
        // entries row-major for readability
        let mut m = DenseBlock::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, entries[i * cols + j]);
            }
        }
        m
    }

    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn jacobi_diagonal_is_fixed_point() {
        let m = block(2, 2, &[5.0, 0.0, 0.0, 2.0]);
        let (vals, vecs) = jacobi_eigh(&m);
        assert_eq!(vals, vec![2.0, 5.0]);
        assert_eq!(vecs.get(0, 1).abs(), 1.0);
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let mut st = 7u64;
        let n = 12;
        let mut m = DenseBlock::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = splitmix(&mut st);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let (vals, vecs) = jacobi_eigh(&m);
        // M v_k = lambda_k v_k
        for k in 0..n {
            let vk = vecs.col(k);
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += m.get(i, j) * vk[j];
                }
                assert!((acc - vals[k] * vk[i]).abs() < 1e-12 * m.fro_norm());
            }
        }
        for k in 1..n {
            assert!(vals[k] >= vals[k - 1]);
        }
    }

    #[test]
    fn lsq_identity_returns_rhs() {
        let m = DenseBlock::identity(4);
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let w = householder_lsq(&m, &b).unwrap();
        for (a, b) in w.iter().zip(&b) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn lsq_recovers_consistent_solution() {
        let mut st = 11u64;
        let (rows, cols) = (15, 4);
        let mut m = DenseBlock::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, splitmix(&mut st));
            }
        }
        let w_true: Vec<f64> = (0..cols).map(|_| splitmix(&mut st)).collect();
        let mut b = vec![0.0; rows];
        for j in 0..cols {
            for i in 0..rows {
                b[i] += m.get(i, j) * w_true[j];
            }
        }
        let w = householder_lsq(&m, &b).unwrap();
        for (a, b) in w.iter().zip(&w_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lsq_matches_normal_equations_oracle() {
        let mut st = 1234u64;
        let (rows, cols) = (40, 6);
        let mut m = DenseBlock::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, splitmix(&mut st));
            }
        }
        let b: Vec<f64> = (0..rows).map(|_| splitmix(&mut st)).collect();
        let w = householder_lsq(&m, &b).unwrap();

        // oracle: M^T M w = M^T b by dense Cholesky
        let mtm = m.transpose_mul(&m);
        let mut mtb = vec![0.0; cols];
        for j in 0..cols {
            for i in 0..rows {
                mtb[j] += m.get(i, j) * b[i];
            }
        }
        let mut l = vec![vec![0.0f64; cols]; cols];
        for i in 0..cols {
            for j in 0..=i {
                let mut acc = mtm.get(i, j);
                for k in 0..j {
                    acc -= l[i][k] * l[j][k];
                }
                if i == j {
                    l[i][j] = acc.sqrt();
                } else {
                    l[i][j] = acc / l[j][j];
                }
            }
        }
        let mut y = vec![0.0; cols];
        for i in 0..cols {
            let mut acc = mtb[i];
            for k in 0..i {
                acc -= l[i][k] * y[k];
            }
            y[i] = acc / l[i][i];
        }
        let mut w_ref = vec![0.0; cols];
        for i in (0..cols).rev() {
            let mut acc = y[i];
            for k in i + 1..cols {
                acc -= l[k][i] * w_ref[k];
            }
            w_ref[i] = acc / l[i][i];
        }
        for (a, b) in w.iter().zip(&w_ref) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        // residual orthogonality
        let mut worst = 0.0f64;
        for j in 0..cols {
            let mut acc = 0.0;
            for i in 0..rows {
                let mut mi = 0.0;
                for k in 0..cols {
                    mi += m.get(i, k) * w[k];
                }
                acc += m.get(i, j) * (mi - b[i]);
            }
            worst = worst.max(acc.abs());
        }
        let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(worst < 1e-10 * m.fro_norm() * bnorm);
    }

    #[test]
    fn lsq_rank_deficiency_detected() {
        let mut m = DenseBlock::zeros(5, 2);
        for i in 0..5 {
            m.set(i, 0, 1.0 + i as f64);
            m.set(i, 1, 2.0 * (1.0 + i as f64)); // duplicate direction
        }
        let r = householder_lsq(&m, &[1.0; 5]);
        assert!(matches!(r, Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn gep_diagonal_cases() {
        let a = block(2, 2, &[2.0, 0.0, 0.0, 5.0]);
        let (t, s) = solve_dense_gep(&a, &DenseBlock::identity(2), 1e-12).unwrap();
        assert!((t[0] - 2.0).abs() < 1e-13 && (t[1] - 5.0).abs() < 1e-13);
        assert!((s.get(0, 0).abs() - 1.0).abs() < 1e-13);

        let a = block(1, 1, &[4.0]);
        let b = block(1, 1, &[2.0]);
        let (t, _) = solve_dense_gep(&a, &b, 1e-12).unwrap();
        assert!((t[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gep_matches_cholesky_reduction_oracle() {
        let n = 8;
        let mut st = 99u64;
        let mut a = DenseBlock::zeros(n, n);
        let mut g = DenseBlock::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g.set(i, j, splitmix(&mut st));
                let v = splitmix(&mut st);
                a.set(i, j, a.get(i, j) + v);
                a.set(j, i, a.get(j, i) + v);
            }
        }
        let a = a.symmetrized();
        // B = G^T G + n I, safely SPD
        let mut b = g.transpose_mul(&g);
        for i in 0..n {
            b.set(i, i, b.get(i, i) + n as f64);
        }

        let (thetas, s) = solve_dense_gep(&a, &b, 1e-12).unwrap();
        assert_eq!(thetas.len(), n);

        // oracle: L = chol(B), eigendecompose L^{-1} A L^{-T} with an
        // independent plain Jacobi loop
        let mut l = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = b.get(i, j);
                for k in 0..j {
                    acc -= l[i][k] * l[j][k];
                }
                if i == j {
                    l[i][j] = acc.sqrt();
                } else {
                    l[i][j] = acc / l[j][j];
                }
            }
        }
        // columns of L^{-T}: solve L^T z = e_k  =>  C = L^{-1} A L^{-T}
        let mut c = vec![vec![0.0f64; n]; n];
        let solve_lower = |l: &Vec<Vec<f64>>, rhs: &mut Vec<f64>| {
            for i in 0..n {
                for k in 0..i {
                    rhs[i] = rhs[i] - l[i][k] * rhs[k];
                }
                rhs[i] /= l[i][i];
            }
        };
        let mut linv_a = vec![vec![0.0f64; n]; n];
        for col in 0..n {
            let mut rhs: Vec<f64> = (0..n).map(|i| a.get(i, col)).collect();
            solve_lower(&l, &mut rhs);
            for i in 0..n {
                linv_a[i][col] = rhs[i];
            }
        }
        for row in 0..n {
            let mut rhs: Vec<f64> = linv_a[row].clone();
            solve_lower(&l, &mut rhs); // uses symmetry: (L^{-1} A L^{-T})^T
            c[row] = rhs;
        }
        // plain Jacobi on c
        let mut evals: Vec<f64> = Vec::new();
        {
            let mut m = c.clone();
            for _ in 0..300 {
                let mut off = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        if p != q {
                            off += m[p][q] * m[p][q];
                        }
                    }
                }
                if off.sqrt() < 1e-15 {
                    break;
                }
                for p in 0..n - 1 {
                    for q in p + 1..n {
                        if m[p][q].abs() < 1e-300 {
                            continue;
                        }
                        let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                        let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                        let cc = 1.0 / (1.0 + t * t).sqrt();
                        let ss = t * cc;
                        for i in 0..n {
                            let mip = m[i][p];
                            let miq = m[i][q];
                            m[i][p] = cc * mip - ss * miq;
                            m[i][q] = ss * mip + cc * miq;
                        }
                        for i in 0..n {
                            let mpi = m[p][i];
                            let mqi = m[q][i];
                            m[p][i] = cc * mpi - ss * mqi;
                            m[q][i] = ss * mpi + cc * mqi;
                        }
                    }
                }
            }
            for i in 0..n {
                evals.push(m[i][i]);
            }
            evals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        for k in 0..n {
            assert!(
                (thetas[k] - evals[k]).abs() < 1e-10 * (1.0 + evals[k].abs()),
                "theta[{k}] = {} vs oracle {}",
                thetas[k],
                evals[k]
            );
        }
        // S^T B S = I
        let bs = b.mul(&s);
        let gram = s.transpose_mul(&bs);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram.get(i, j) - want).abs() < 1e-10);
            }
        }
        // pair residuals ||A s - theta B s||
        let as_ = a.mul(&s);
        let scale = a.fro_norm();
        for k in 0..n {
            let mut rnorm = 0.0f64;
            for i in 0..n {
                let r = as_.get(i, k) - thetas[k] * bs.get(i, k);
                rnorm += r * r;
            }
            let bound = 1e-10 * (scale + thetas[k].abs() * b.fro_norm());
            assert!(rnorm.sqrt() <= bound, "pair {k} residual {}", rnorm.sqrt());
        }
    }

    #[test]
    fn gep_truncates_singular_mass() {
        // Bhat rank 1: only one retained mode
        let a = block(2, 2, &[3.0, 0.0, 0.0, 7.0]);
        let b = block(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let (t, s) = solve_dense_gep(&a, &b, 1e-12).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0] - 3.0).abs() < 1e-12);
        assert_eq!(s.ncols(), 1);
    }

    #[test]
    fn gep_rejects_indefinite_mass() {
        let a = DenseBlock::identity(2);
        let b = block(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        assert!(matches!(
            solve_dense_gep(&a, &b, 1e-12),
            Err(Error::ProjectedMassNotPsd(_))
        ));
    }

    #[test]
    fn gep_on_identity_mass_matches_jacobi() {
        let mut st = 5u64;
        let n = 10;
        let mut a = DenseBlock::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = splitmix(&mut st);
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
        let (t1, _) = solve_dense_gep(&a, &DenseBlock::identity(n), 1e-12).unwrap();
        let (t2, _) = jacobi_eigh(&a);
        for (x, y) in t1.iter().zip(&t2) {
            assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
    }
}
