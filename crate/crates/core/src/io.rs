//! Plain-text formats.
//!
//! A matrix is a header line `rows cols p` followed by `rows` lines of
//! `cols` space-separated residues in `[0, p)`. A pair is two matrices one
//! after the other (first member first). Blank lines and lines starting
//! with `#` are ignored everywhere. A matrix with zero columns has no row
//! lines.
//!
//! A polynomial is one `coeff i j` triple per line, meaning
//! `coeff * x^i * y^j`; the field comes from the caller.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::construction::{BasePair, ConstructionError};
use crate::field::{FieldCtx, FieldError};
use crate::matrix::Mat;
use crate::pair::{BivarPoly, MatPair, PairError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: entry {value} outside [0, {p})")]
    EntryRange { line: usize, value: u64, p: u64 },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error("expected {expected} matrices, found {got}")]
    MatrixCount { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_numbers(line: usize, s: &str) -> Result<Vec<u64>, IoError> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>().map_err(|e| IoError::Parse {
                line,
                msg: format!("{tok:?}: {e}"),
            })
        })
        .collect()
}

/// Renders a matrix; [`parse_matrix`] inverts this exactly.
pub fn write_matrix(m: &Mat) -> String {
    let mut out = format!("{} {} {}\n", m.rows(), m.cols(), m.ctx().modulus());
    // Rows of a zero-column matrix would be blank lines; omit them.
    let body_rows = if m.cols() == 0 { 0 } else { m.rows() };
    for i in 0..body_rows {
        let row: Vec<String> = m.row(i).iter().map(u32::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses every matrix in `text`, in order.
pub fn parse_matrices(text: &str) -> Result<Vec<Mat>, IoError> {
    let mut lines = content_lines(text);
    let mut out = Vec::new();
    while let Some((line, header)) = lines.next() {
        let h = parse_numbers(line, header)?;
        let [rows, cols, p] = h[..] else {
            return Err(IoError::Parse {
                line,
                msg: "header must be `rows cols p`".into(),
            });
        };
        let ctx = FieldCtx::new(p)?;
        let (rows, cols) = (rows as usize, cols as usize);
        let mut entries = Vec::with_capacity(rows * cols);
        let body_rows = if cols == 0 { 0 } else { rows };
        for r in 0..body_rows {
            let (line, body) = lines
                .next()
                .ok_or_else(|| IoError::Truncated(format!("matrix row {} of {rows} missing", r + 1)))?;
            let vals = parse_numbers(line, body)?;
            if vals.len() != cols {
                return Err(IoError::Parse {
                    line,
                    msg: format!("expected {cols} entries, found {}", vals.len()),
                });
            }
            if let Some(&value) = vals.iter().find(|&&v| v >= p) {
                return Err(IoError::EntryRange { line, value, p });
            }
            entries.extend(vals);
        }
        out.push(Mat::from_vec(ctx, rows, cols, entries).expect("entry count checked"));
    }
    Ok(out)
}

/// Parses exactly one matrix.
pub fn parse_matrix(text: &str) -> Result<Mat, IoError> {
    let mut ms = parse_matrices(text)?;
    if ms.len() != 1 {
        return Err(IoError::MatrixCount {
            expected: 1,
            got: ms.len(),
        });
    }
    Ok(ms.remove(0))
}

pub fn write_pair(pair: &MatPair) -> String {
    write_matrix(pair.a()) + &write_matrix(pair.b())
}

/// Parses exactly two matrices forming a pair.
pub fn parse_pair(text: &str) -> Result<MatPair, IoError> {
    let ms = parse_matrices(text)?;
    if ms.len() != 2 {
        return Err(IoError::MatrixCount {
            expected: 2,
            got: ms.len(),
        });
    }
    let mut it = ms.into_iter();
    let (a, b) = (it.next().unwrap(), it.next().unwrap());
    Ok(MatPair::new(a, b)?)
}

/// Parses a pair and checks it is a valid base `(M, N)`.
pub fn parse_base(text: &str) -> Result<BasePair, IoError> {
    let (m, n) = parse_pair(text)?.into_parts();
    Ok(BasePair::new(m, n)?)
}

/// One `coeff i j` line per nonzero term, in increasing `(i, j)` order.
pub fn write_poly(f: &BivarPoly) -> String {
    f.terms()
        .map(|((i, j), c)| format!("{} {i} {j}\n", c.value()))
        .collect()
}

/// Parses `coeff i j` lines; repeated monomials accumulate.
pub fn parse_poly(ctx: FieldCtx, text: &str) -> Result<BivarPoly, IoError> {
    let mut f = BivarPoly::zero(ctx);
    for (line, body) in content_lines(text) {
        let vals = parse_numbers(line, body)?;
        let [c, i, j] = vals[..] else {
            return Err(IoError::Parse {
                line,
                msg: "expected `coeff i j`".into(),
            });
        };
        if c >= ctx.order() {
            return Err(IoError::EntryRange {
                line,
                value: c,
                p: ctx.order(),
            });
        }
        let exp = |e: u64| {
            u32::try_from(e).map_err(|_| IoError::Parse {
                line,
                msg: format!("exponent {e} too large"),
            })
        };
        f.add_term(ctx.elem(c), exp(i)?, exp(j)?);
    }
    Ok(f)
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}
