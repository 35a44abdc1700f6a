//! Synthetic SPD pencils with known spectra, and pencil loading from files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::mm::{read_matrix_market, write_matrix_market};
use crate::pencil::Pencil;
use crate::sparse::CsrMatrix;

/// A generated pencil with its provenance and, when available, the full
/// analytic spectrum.
#[derive(Debug, Clone)]
pub struct GeneratedPencil {
    pub pencil: Pencil,
    pub name: String,
    pub dims: Vec<usize>,
    /// Mesh width of the leading dimension.
    pub h: f64,
    pub has_analytic_spectrum: bool,
}

impl GeneratedPencil {
    /// Full generalized spectrum in ascending order, if known in closed form.
    pub fn analytic_eigenvalues(&self) -> Option<Vec<f64>> {
        if !self.has_analytic_spectrum {
            return None;
        }
        match self.name.as_str() {
            "fem1d" => {
                let n = self.dims[0];
                Some((1..=n).map(|k| fem1d_eigenvalue(n, k)).collect())
            }
            "laplace3d" => {
                let (nx, ny, nz) = (self.dims[0], self.dims[1], self.dims[2]);
                let mut vals = laplace3d_eigenvalues(nx, ny, nz);
                vals.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                Some(vals)
            }
            _ => None,
        }
    }
}

/// k-th generalized eigenvalue of the 1D linear-element pencil on the unit
/// interval: `(6/h^2) (1 - cos(k pi h)) / (2 + cos(k pi h))`, `h = 1/(n+1)`.
pub fn fem1d_eigenvalue(n: usize, k: usize) -> f64 {
    let h = 1.0 / (n as f64 + 1.0);
    let c = (k as f64 * std::f64::consts::PI * h).cos();
    6.0 / (h * h) * (1.0 - c) / (2.0 + c)
}

/// 1D linear finite elements on the unit interval with homogeneous Dirichlet
/// ends: stiffness `(1/h) tridiag(-1, 2, -1)`, consistent mass
/// `(h/6) tridiag(1, 4, 1)`.
pub fn gen_fem1d(n: usize) -> Result<GeneratedPencil> {
    if n < 2 {
        return Err(Error::Config(format!("fem1d needs n >= 2, got {n}")));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let mut ta = Vec::with_capacity(3 * n);
    let mut tb = Vec::with_capacity(3 * n);
    for i in 0..n {
        ta.push((i, i, 2.0 / h));
        tb.push((i, i, 4.0 * h / 6.0));
        if i + 1 < n {
            ta.push((i, i + 1, -1.0 / h));
            ta.push((i + 1, i, -1.0 / h));
            tb.push((i, i + 1, h / 6.0));
            tb.push((i + 1, i, h / 6.0));
        }
    }
    let pencil = Pencil::new(
        CsrMatrix::from_triplets(n, n, ta)?,
        CsrMatrix::from_triplets(n, n, tb)?,
    )?;
    Ok(GeneratedPencil {
        pencil,
        name: "fem1d".into(),
        dims: vec![n],
        h,
        has_analytic_spectrum: true,
    })
}

/// Generalized eigenvalues of the 3D pencil as sums of 1D Dirichlet
/// difference eigenvalues over the per-axis spacings, divided by the lumped
/// mass scale.
pub fn laplace3d_eigenvalues(nx: usize, ny: usize, nz: usize) -> Vec<f64> {
    let mu = |m: usize, k: usize| {
        let h = 1.0 / (m as f64 + 1.0);
        (2.0 - 2.0 * (k as f64 * std::f64::consts::PI * h).cos()) / (h * h)
    };
    let mass = cell_volume(nx, ny, nz);
    let mut vals = Vec::with_capacity(nx * ny * nz);
    for i in 1..=nx {
        for j in 1..=ny {
            for k in 1..=nz {
                vals.push((mu(nx, i) + mu(ny, j) + mu(nz, k)) / mass);
            }
        }
    }
    vals
}

fn cell_volume(nx: usize, ny: usize, nz: usize) -> f64 {
    let h = |m: usize| 1.0 / (m as f64 + 1.0);
    h(nx) * h(ny) * h(nz)
}

/// 7-point Laplacian on an `nx x ny x nz` interior grid of the unit cube
/// (per-axis spacings `1/(n+1)`), with a lumped diagonal mass `hx hy hz I`.
pub fn gen_laplace3d(nx: usize, ny: usize, nz: usize) -> Result<GeneratedPencil> {
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(Error::Config(format!(
            "laplace3d needs every dimension >= 2, got {nx}x{ny}x{nz}"
        )));
    }
    let n = nx * ny * nz;
    let (hx, hy, hz) = (
        1.0 / (nx as f64 + 1.0),
        1.0 / (ny as f64 + 1.0),
        1.0 / (nz as f64 + 1.0),
    );
    let (cx, cy, cz) = (1.0 / (hx * hx), 1.0 / (hy * hy), 1.0 / (hz * hz));
    let idx = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    let mut ta = Vec::with_capacity(7 * n);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let r = idx(i, j, k);
                ta.push((r, r, 2.0 * (cx + cy + cz)));
                if i > 0 {
                    ta.push((r, idx(i - 1, j, k), -cx));
                }
                if i + 1 < nx {
                    ta.push((r, idx(i + 1, j, k), -cx));
                }
                if j > 0 {
                    ta.push((r, idx(i, j - 1, k), -cy));
                }
                if j + 1 < ny {
                    ta.push((r, idx(i, j + 1, k), -cy));
                }
                if k > 0 {
                    ta.push((r, idx(i, j, k - 1), -cz));
                }
                if k + 1 < nz {
                    ta.push((r, idx(i, j, k + 1), -cz));
                }
            }
        }
    }
    let mass = cell_volume(nx, ny, nz);
    let tb = (0..n).map(|i| (i, i, mass));
    let pencil = Pencil::new(
        CsrMatrix::from_triplets(n, n, ta)?,
        CsrMatrix::from_triplets(n, n, tb)?,
    )?;
    Ok(GeneratedPencil {
        pencil,
        name: "laplace3d".into(),
        dims: vec![nx, ny, nz],
        h: hx,
        has_analytic_spectrum: true,
    })
}

/// Load a pencil from two Matrix Market files; runs the full symmetry and
/// definiteness checks.
pub fn load_pencil(path_a: impl AsRef<Path>, path_b: impl AsRef<Path>) -> Result<Pencil> {
    let a = read_matrix_market(path_a)?;
    let b = read_matrix_market(path_b)?;
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "pencil files: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Pencil::new(a, b)
}

/// Export a pencil as two symmetric-storage Matrix Market files.
pub fn dump_pencil(
    pencil: &Pencil,
    path_a: impl AsRef<Path>,
    path_b: impl AsRef<Path>,
) -> Result<()> {
    write_matrix_market(path_a, pencil.a(), true)?;
    write_matrix_market(path_b, pencil.b(), true)
}
