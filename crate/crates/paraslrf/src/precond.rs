//! Preconditioners for the complex-shifted systems: diagonal (Jacobi) and
//! zero-fill incomplete LU on the matrix pattern.
//!
//! A preconditioner is built once per pole and reused across every outer
//! iteration and right-hand side of that pole.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pencil::ShiftedMatrix;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondKind {
    Jacobi,
    Ilu0,
}

impl std::fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrecondKind::Jacobi => "jacobi",
            PrecondKind::Ilu0 => "ilu0",
        })
    }
}

impl std::str::FromStr for PrecondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jacobi" => Ok(PrecondKind::Jacobi),
            "ilu0" => Ok(PrecondKind::Ilu0),
            other => Err(Error::Config(format!("unknown preconditioner: {other}"))),
        }
    }
}

/// Factor data for one pole. `apply` computes `z = P^{-1} f` and is linear.
#[derive(Debug, Clone)]
pub enum Preconditioner {
    Identity,
    Jacobi {
        inv_diag: Vec<Complex64>,
        sigma: Complex64,
    },
    Ilu0 {
        /// L and U share the matrix pattern; L has an implicit unit diagonal.
        factors: CsrMatrix<Complex64>,
        diag_pos: Vec<usize>,
        sigma: Complex64,
    },
}

/// Relative floor under which a pivot or diagonal is considered zero.
const PIVOT_FLOOR: f64 = 1e-14;

pub fn build_preconditioner(c: &ShiftedMatrix, kind: PrecondKind) -> Result<Preconditioner> {
    let m = c.matrix();
    let n = m.nrows();
    let mut diag_pos = vec![usize::MAX; n];
    let mut diag_max = 0.0f64;
    for i in 0..n {
        let (cols, vals) = m.row(i);
        if let Ok(k) = cols.binary_search(&i) {
            diag_pos[i] = m.row_ptr()[i] + k;
            diag_max = diag_max.max(vals[k].norm());
        } else {
            return Err(Error::EmptyDiagonal(i));
        }
    }
    let floor = PIVOT_FLOOR * diag_max;

    match kind {
        PrecondKind::Jacobi => {
            let inv_diag = (0..n)
                .map(|i| {
                    let d = guard_pivot(m.values()[diag_pos[i]], floor);
                    Complex64::new(1.0, 0.0) / d
                })
                .collect();
            Ok(Preconditioner::Jacobi {
                inv_diag,
                sigma: c.sigma(),
            })
        }
        PrecondKind::Ilu0 => {
            let mut factors = m.clone();
            ilu0_factorize(&mut factors, &diag_pos, floor);
            Ok(Preconditioner::Ilu0 {
                factors,
                diag_pos,
                sigma: c.sigma(),
            })
        }
    }
}

/// Replace a vanishing pivot by the floor magnitude, keeping its phase. The
/// absolute fallback keeps complex division (which squares the magnitude)
/// away from underflow.
fn guard_pivot(p: Complex64, floor: f64) -> Complex64 {
    let floor = floor.max(1e-150);
    let mag = p.norm();
    if mag >= floor {
        p
    } else if mag == 0.0 {
        Complex64::new(floor, 0.0)
    } else {
        p * (floor / mag)
    }
}

/// In-place IKJ zero-fill factorization on the CSR pattern (Saad, ILU(0)).
fn ilu0_factorize(m: &mut CsrMatrix<Complex64>, diag_pos: &[usize], floor: f64) {
    let n = m.nrows();
    let row_ptr = m.row_ptr().to_vec();
    let col_idx = m.col_idx().to_vec();
    // position of column j inside the current row, usize::MAX if absent
    let mut pos = vec![usize::MAX; n];

    for i in 0..n {
        let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
        for p in lo..hi {
            pos[col_idx[p]] = p;
        }
        for p in lo..hi {
            let k = col_idx[p];
            if k >= i {
                break;
            }
            // l_ik = c_ik / u_kk, then eliminate row k from row i
            let ukk = guard_pivot(m.values()[diag_pos[k]], floor);
            let lik = m.values()[p] / ukk;
            m.values_mut()[p] = lik;
            for q in diag_pos[k] + 1..row_ptr[k + 1] {
                let j = col_idx[q];
                let t = pos[j];
                if t != usize::MAX {
                    let ukj = m.values()[q];
                    m.values_mut()[t] -= lik * ukj;
                }
            }
        }
        let d = guard_pivot(m.values()[diag_pos[i]], floor);
        m.values_mut()[diag_pos[i]] = d;
        for p in lo..hi {
            pos[col_idx[p]] = usize::MAX;
        }
    }
}

impl Preconditioner {
    pub fn n(&self) -> Option<usize> {
        match self {
            Preconditioner::Identity => None,
            Preconditioner::Jacobi { inv_diag, .. } => Some(inv_diag.len()),
            Preconditioner::Ilu0 { factors, .. } => Some(factors.nrows()),
        }
    }

    /// `z = P^{-1} f`.
    pub fn apply(&self, f: &[Complex64], z: &mut [Complex64]) {
        match self {
            Preconditioner::Identity => z.copy_from_slice(f),
            Preconditioner::Jacobi { inv_diag, .. } => {
                for ((zi, fi), di) in z.iter_mut().zip(f).zip(inv_diag) {
                    *zi = fi * di;
                }
            }
            Preconditioner::Ilu0 {
                factors, diag_pos, ..
            } => {
                let n = factors.nrows();
                // forward solve L z = f (unit diagonal)
                for i in 0..n {
                    let mut acc = f[i];
                    let (cols, vals) = factors.row(i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        if j >= i {
                            break;
                        }
                        acc -= v * z[j];
                    }
                    z[i] = acc;
                }
                // backward solve U z = z
                for i in (0..n).rev() {
                    let hi = factors.row_ptr()[i + 1];
                    let mut acc = z[i];
                    for p in diag_pos[i] + 1..hi {
                        acc -= factors.values()[p] * z[factors.col_idx()[p]];
                    }
                    z[i] = acc / factors.values()[diag_pos[i]];
                }
            }
        }
    }

    pub fn apply_alloc(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0); f.len()];
        self.apply(f, &mut z);
        z
    }
}
