//! Compressed sparse row matrices over `f64` or `Complex64`.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Minimal scalar bound for CSR storage and matrix-vector products.
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Send
    + Sync
    + Zero
    + std::ops::Mul<Output = Self>
    + std::ops::AddAssign
    + 'static
{
}

impl Scalar for f64 {}
impl Scalar for Complex64 {}

/// Sparse matrix in CSR form with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Assemble from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, T)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
            entries.push((i, j, v));
        }
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("entry present") += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Build directly from CSR arrays. The caller guarantees sorted, in-range
    /// column indices per row and consistent offsets.
    pub(crate) fn from_sorted_parts(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), nrows + 1);
        debug_assert_eq!(*row_ptr.last().expect("nonempty row_ptr"), col_idx.len());
        debug_assert_eq!(col_idx.len(), values.len());
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// Value at (i, j), or zero when outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// y = M x, rows traversed in order, entries within a row in column order.
    pub fn spmv_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols, "spmv: x length");
        assert_eq!(y.len(), self.nrows, "spmv: y length");
        for i in 0..self.nrows {
            let mut acc = T::zero();
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "spmv: vector of length {} against {}x{} matrix",
                x.len(),
                self.nrows,
                self.ncols
            )));
        }
        let mut y = vec![T::zero(); self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }
}

impl CsrMatrix<f64> {
    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest relative deviation |M_ij - M_ji| / scale over the pattern.
    /// `usize::MAX` rows means a structurally missing mirror entry.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for (i, j, v) in self.iter() {
            if j < i {
                continue;
            }
            let mirrored = self.get(j, i);
            worst = worst.max((v - mirrored).abs() / scale);
        }
        worst
    }
}

/// Union of two sparsity patterns with both value arrays aligned to it.
///
/// Shifted matrices `A - sigma B` share this structure for every shift, so it
/// is computed once per pencil.
#[derive(Debug, Clone)]
pub struct UnionPattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
}

impl UnionPattern {
    pub fn build(a: &CsrMatrix<f64>, b: &CsrMatrix<f64>) -> Result<Self> {
        if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "union pattern of {}x{} and {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        let n = a.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut a_values = Vec::new();
        let mut b_values = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let (ac, av) = a.row(i);
            let (bc, bv) = b.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                let ja = ac.get(p).copied().unwrap_or(usize::MAX);
                let jb = bc.get(q).copied().unwrap_or(usize::MAX);
                if ja < jb {
                    col_idx.push(ja);
                    a_values.push(av[p]);
                    b_values.push(0.0);
                    p += 1;
                } else if jb < ja {
                    col_idx.push(jb);
                    a_values.push(0.0);
                    b_values.push(bv[q]);
                    q += 1;
                } else {
                    col_idx.push(ja);
                    a_values.push(av[p]);
                    b_values.push(bv[q]);
                    p += 1;
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            a_values,
            b_values,
        })
    }

    /// Values of `A - sigma B` on the union pattern.
    pub fn shifted_values(&self, sigma: Complex64) -> Vec<Complex64> {
        self.a_values
            .iter()
            .zip(&self.b_values)
            .map(|(&a, &b)| Complex64::new(a, 0.0) - sigma * b)
            .collect()
    }
}
