//! The matrix pencil `(A, B)` and geometry under the B-inner product.

use num_complex::Complex64;

use crate::dense::DenseBlock;
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, UnionPattern};

const SYMMETRY_TOL: f64 = 1e-14;

/// Symmetric definite pencil: sparse symmetric `A` and SPD `B` of equal size.
///
/// The union sparsity pattern of `A` and `B` is computed once here and reused
/// by every shifted matrix `A - sigma B`; the shift changes values, never
/// structure.
#[derive(Debug, Clone)]
pub struct Pencil {
    a: CsrMatrix<f64>,
    b: CsrMatrix<f64>,
    union: UnionPattern,
    n: usize,
}

impl Pencil {
    /// Validates symmetry of both matrices (to `1e-14` relative) and positive
    /// definiteness of `B` by a handful of seeded probe vectors.
    pub fn new(a: CsrMatrix<f64>, b: CsrMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "pencil of {}x{} and {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        let n = a.nrows();
        let da = a.symmetry_defect();
        if da > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(format!("A deviates by {da:.3e}")));
        }
        let db = b.symmetry_defect();
        if db > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(format!("B deviates by {db:.3e}")));
        }
        // Gershgorin prefilter: a non-positive diagonal can never be SPD.
        for i in 0..n {
            if b.get(i, i) <= 0.0 {
                return Err(Error::NotPositiveDefinite(format!(
                    "B[{i},{i}] = {} <= 0",
                    b.get(i, i)
                )));
            }
        }
        let mut state = 0x853c49e6748fea9bu64;
        let mut probe = vec![0.0f64; n];
        for _ in 0..8 {
            for x in probe.iter_mut() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(11);
                *x = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            }
            let bx = b.spmv(&probe)?;
            let quad: f64 = probe.iter().zip(&bx).map(|(x, y)| x * y).sum();
            if quad <= 0.0 {
                return Err(Error::NotPositiveDefinite(format!(
                    "probe gave x^T B x = {quad:.3e}"
                )));
            }
        }
        let union = UnionPattern::build(&a, &b)?;
        Ok(Self { a, b, union, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &CsrMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &CsrMatrix<f64> {
        &self.b
    }

    /// `C = A - sigma B` on the shared union pattern.
    pub fn form_shifted(&self, sigma: Complex64) -> ShiftedMatrix {
        let values = self.union.shifted_values(sigma);
        let matrix = CsrMatrix::from_sorted_parts(
            self.n,
            self.n,
            self.union.row_ptr.clone(),
            self.union.col_idx.clone(),
            values,
        );
        ShiftedMatrix { matrix, sigma }
    }

    /// `B V` column by column, lifted to complex storage.
    pub fn mass_times_block(&self, v: &DenseBlock<f64>) -> DenseBlock<Complex64> {
        let mut out = DenseBlock::zeros(self.n, v.ncols());
        let mut tmp = vec![0.0f64; self.n];
        for j in 0..v.ncols() {
            self.b.spmv_into(v.col(j), &mut tmp);
            let col = out.col_mut(j);
            for (c, &r) in col.iter_mut().zip(&tmp) {
                *c = Complex64::new(r, 0.0);
            }
        }
        out
    }
}

/// `A - sigma B`: complex symmetric (not Hermitian) for off-axis shifts.
#[derive(Debug, Clone)]
pub struct ShiftedMatrix {
    matrix: CsrMatrix<Complex64>,
    sigma: Complex64,
}

impl ShiftedMatrix {
    /// Wrap an already-assembled complex matrix with its shift.
    pub fn from_matrix(matrix: CsrMatrix<Complex64>, sigma: Complex64) -> Self {
        Self { matrix, sigma }
    }

    pub fn matrix(&self) -> &CsrMatrix<Complex64> {
        &self.matrix
    }

    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// B-inner product `<u, v>_B = v^T B u`.
pub fn b_inner(b: &CsrMatrix<f64>, u: &[f64], v: &[f64]) -> Result<f64> {
    let bu = b.spmv(u)?;
    if v.len() != bu.len() {
        return Err(Error::DimensionMismatch(format!(
            "b_inner: v of length {}, B u of length {}",
            v.len(),
            bu.len()
        )));
    }
    Ok(v.iter().zip(&bu).map(|(x, y)| x * y).sum())
}

/// `||v||_B`.
pub fn b_norm(b: &CsrMatrix<f64>, v: &[f64]) -> Result<f64> {
    Ok(b_inner(b, v, v)?.max(0.0).sqrt())
}

/// Outcome of [`b_orthonormalize`]: the kept columns and which input columns
/// were dropped as numerically dependent.
#[derive(Debug)]
pub struct OrthoResult {
    pub q: DenseBlock<f64>,
    pub dropped: usize,
    pub dropped_indices: Vec<usize>,
}

const DROP_RATIO: f64 = 1e-12;

/// B-orthonormalize the columns of `v` by modified Gram-Schmidt with one
/// reorthogonalization pass. A column whose post-projection B-norm falls
/// below `1e-12` of its pre-projection B-norm is dropped.
pub fn b_orthonormalize(b: &CsrMatrix<f64>, v: &DenseBlock<f64>) -> Result<OrthoResult> {
    let n = v.nrows();
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "b_orthonormalize: block rows {n} vs B {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(v.ncols());
    let mut bq: Vec<Vec<f64>> = Vec::with_capacity(v.ncols());
    let mut dropped_indices = Vec::new();

    for j in 0..v.ncols() {
        let mut w = v.col(j).to_vec();
        let pre = b_norm(b, &w)?;
        if pre == 0.0 {
            dropped_indices.push(j);
            continue;
        }
        for _pass in 0..2 {
            for (qi, bqi) in q.iter().zip(&bq) {
                let coef: f64 = w.iter().zip(bqi).map(|(x, y)| x * y).sum();
                for (wk, qk) in w.iter_mut().zip(qi) {
                    *wk -= coef * qk;
                }
            }
        }
        let post = b_norm(b, &w)?;
        if post < DROP_RATIO * pre {
            dropped_indices.push(j);
            continue;
        }
        let inv = 1.0 / post;
        for x in w.iter_mut() {
            *x *= inv;
        }
        let bw = b.spmv(&w)?;
        q.push(w);
        bq.push(bw);
    }
    Ok(OrthoResult {
        q: DenseBlock::from_columns(n, &q),
        dropped: dropped_indices.len(),
        dropped_indices,
    })
}

/// Remove the B-components of `u` along the B-orthonormal block `x`:
/// `U' = U - X (X^T B U)`, applied twice (classical Gram-Schmidt with
/// reorthogonalization).
pub fn b_project_out(
    b: &CsrMatrix<f64>,
    x: &DenseBlock<f64>,
    u: &DenseBlock<f64>,
) -> Result<DenseBlock<f64>> {
    if x.ncols() == 0 {
        return Ok(u.clone());
    }
    if x.nrows() != u.nrows() || b.nrows() != u.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "b_project_out: X {}x{}, U {}x{}, B {}x{}",
            x.nrows(),
            x.ncols(),
            u.nrows(),
            u.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut out = u.clone();
    let mut bu_col = vec![0.0f64; u.nrows()];
    for _pass in 0..2 {
        for j in 0..out.ncols() {
            b.spmv_into(out.col(j), &mut bu_col);
            let mut coefs = vec![0.0f64; x.ncols()];
            for (k, c) in coefs.iter_mut().enumerate() {
                *c = x.col(k).iter().zip(&bu_col).map(|(a, b)| a * b).sum();
            }
            let col = out.col_mut(j);
            for (k, &c) in coefs.iter().enumerate() {
                let xk = x.col(k);
                for (o, &xv) in col.iter_mut().zip(xk) {
                    *o -= c * xv;
                }
            }
        }
    }
    Ok(out)
}
