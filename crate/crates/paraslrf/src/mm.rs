//! Matrix Market coordinate files, real general or symmetric, 1-based indices.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Read a real coordinate-format file. Symmetric storage is expanded to the
/// full pattern; duplicate entries are summed.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix<f64>> {
    let file = File::open(path.as_ref())?;
    let mut lines = BufReader::new(file).lines();

    let header = lines
        .next()
        .ok_or_else(|| Error::MatrixMarket("empty file".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%MatrixMarket" || fields[1] != "matrix" {
        return Err(Error::MatrixMarket(format!("bad header line: {header}")));
    }
    if fields[2] != "coordinate" {
        return Err(Error::MatrixMarket(format!(
            "unsupported format {}, expected coordinate",
            fields[2]
        )));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::MatrixMarket(format!(
            "unsupported field {}, expected real",
            fields[3]
        )));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(Error::MatrixMarket(format!(
                "unsupported symmetry {other}, expected general or symmetric"
            )))
        }
    };

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match dims {
            None => {
                if parts.len() != 3 {
                    return Err(Error::MatrixMarket(format!("bad size line: {t}")));
                }
                let m = parse_usize(parts[0])?;
                let n = parse_usize(parts[1])?;
                let nnz = parse_usize(parts[2])?;
                dims = Some((m, n, nnz));
                triplets.reserve(if symmetric { 2 * nnz } else { nnz });
            }
            Some((m, n, _)) => {
                if parts.len() != 3 {
                    return Err(Error::MatrixMarket(format!("bad entry line: {t}")));
                }
                let i = parse_usize(parts[0])?;
                let j = parse_usize(parts[1])?;
                let v: f64 = parts[2]
                    .parse()
                    .map_err(|_| Error::MatrixMarket(format!("bad value: {}", parts[2])))?;
                if i < 1 || i > m || j < 1 || j > n {
                    return Err(Error::MatrixMarket(format!(
                        "index ({i}, {j}) outside {m}x{n}"
                    )));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (m, n, nnz) = dims.ok_or_else(|| Error::MatrixMarket("missing size line".into()))?;
    let seen = if symmetric {
        triplets.iter().filter(|(i, j, _)| i <= j).count()
    } else {
        triplets.len()
    };
    if seen != nnz {
        return Err(Error::MatrixMarket(format!(
            "declared {nnz} entries, found {seen}"
        )));
    }
    CsrMatrix::from_triplets(m, n, triplets)
}

/// Write in coordinate format. With `symmetric`, only the lower triangle is
/// stored. Values print in round-trip-exact shortest form.
pub fn write_matrix_market(
    path: impl AsRef<Path>,
    m: &CsrMatrix<f64>,
    symmetric: bool,
) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut out = BufWriter::new(file);
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(out, "%%MatrixMarket matrix coordinate real {kind}")?;
    let entries: Vec<(usize, usize, f64)> = m
        .iter()
        .filter(|&(i, j, _)| !symmetric || j <= i)
        .collect();
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::MatrixMarket(format!("bad integer: {s}")))
}
