//! Matrix Market coordinate format.
//!
//! Only `matrix coordinate real|integer general|symmetric` is accepted.
//! Symmetric files are expanded to general storage on read. Entries are
//! returned canonical: sorted row-major, duplicates summed, zeros dropped.

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use fixpoint_core::sparse::CooMatrix;

use crate::FormatError;

const BANNER: &str = "%%matrixmarket";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_banner(line: &str) -> Result<Symmetry, FormatError> {
    let lower = line.trim().to_ascii_lowercase();
    let mut tokens = lower.split_whitespace();
    if tokens.next() != Some(BANNER) {
        return Err(FormatError::parse(1, "missing %%MatrixMarket header"));
    }
    let object = tokens.next();
    let format = tokens.next();
    let field = tokens.next();
    let symmetry = tokens.next();
    let unsupported = |what: &str| FormatError::Unsupported {
        line: 1,
        what: what.to_string(),
    };
    match object {
        Some("matrix") => {}
        Some(other) => return Err(unsupported(other)),
        None => return Err(FormatError::parse(1, "header is missing the object type")),
    }
    match format {
        Some("coordinate") => {}
        Some(other) => return Err(unsupported(other)),
        None => return Err(FormatError::parse(1, "header is missing the storage format")),
    }
    match field {
        Some("real") | Some("integer") => {}
        Some(other) => return Err(unsupported(other)),
        None => return Err(FormatError::parse(1, "header is missing the field type")),
    }
    let symmetry = match symmetry {
        Some("general") => Symmetry::General,
        Some("symmetric") => Symmetry::Symmetric,
        Some(other) => return Err(unsupported(other)),
        None => return Err(FormatError::parse(1, "header is missing the symmetry type")),
    };
    if tokens.next().is_some() {
        return Err(FormatError::parse(1, "trailing tokens in header"));
    }
    Ok(symmetry)
}

fn parse_index(token: Option<&str>, line: usize, what: &str, bound: usize) -> Result<usize, FormatError> {
    let token = token.ok_or_else(|| FormatError::parse(line, format!("missing {what}")))?;
    let idx: usize = token
        .parse()
        .map_err(|_| FormatError::parse(line, format!("invalid {what} `{token}`")))?;
    if idx == 0 || idx > bound {
        return Err(FormatError::parse(line, format!("{what} {idx} outside 1..={bound}")));
    }
    Ok(idx - 1)
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<CooMatrix, FormatError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let symmetry = match lines.next() {
        Some((_, line)) => parse_banner(&line?)?,
        None => return Err(FormatError::parse(1, "empty input")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut coo: Option<CooMatrix> = None;
    let mut seen = 0usize;
    let mut last_line = 1usize;

    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match (size, coo.as_mut()) {
            (None, _) => {
                let mut dim = |what: &str| -> Result<usize, FormatError> {
                    let t = tokens
                        .next()
                        .ok_or_else(|| FormatError::parse(no, format!("size line is missing {what}")))?;
                    t.parse()
                        .map_err(|_| FormatError::parse(no, format!("invalid {what} `{t}`")))
                };
                let rows = dim("rows")?;
                let cols = dim("cols")?;
                let nnz = dim("nnz")?;
                if tokens.next().is_some() {
                    return Err(FormatError::parse(no, "trailing tokens on size line"));
                }
                if symmetry == Symmetry::Symmetric && rows != cols {
                    return Err(FormatError::parse(no, "symmetric matrix must be square"));
                }
                size = Some((rows, cols, nnz));
                coo = Some(CooMatrix::new(rows, cols));
            }
            (Some((rows, cols, nnz)), Some(coo)) => {
                if seen == nnz {
                    return Err(FormatError::parse(no, format!("more than the declared {nnz} entries")));
                }
                let i = parse_index(tokens.next(), no, "row index", rows)?;
                let j = parse_index(tokens.next(), no, "column index", cols)?;
                let token = tokens
                    .next()
                    .ok_or_else(|| FormatError::parse(no, "missing value"))?;
                let value: f64 = token
                    .parse()
                    .map_err(|_| FormatError::parse(no, format!("invalid value `{token}`")))?;
                if !value.is_finite() {
                    return Err(FormatError::parse(no, "non-finite value"));
                }
                if tokens.next().is_some() {
                    return Err(FormatError::parse(no, "trailing tokens on entry line"));
                }
                if symmetry == Symmetry::Symmetric && j > i {
                    return Err(FormatError::parse(no, "symmetric storage expects the lower triangle"));
                }
                coo.push(i, j, value).expect("indices validated");
                if symmetry == Symmetry::Symmetric && i != j {
                    coo.push(j, i, value).expect("indices validated");
                }
                seen += 1;
            }
            (Some(_), None) => unreachable!("matrix allocated with size line"),
        }
    }

    match (size, coo) {
        (Some((_, _, nnz)), Some(coo)) => {
            if seen != nnz {
                return Err(FormatError::parse(
                    last_line + 1,
                    format!("expected {nnz} entries, found {seen}"),
                ));
            }
            Ok(coo.canonicalized())
        }
        _ => Err(FormatError::parse(last_line + 1, "missing size line")),
    }
}

pub fn parse_matrix_market(text: &str) -> Result<CooMatrix, FormatError> {
    read_matrix_market(text.as_bytes())
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<CooMatrix, FormatError> {
    let file = std::fs::File::open(path)?;
    read_matrix_market(std::io::BufReader::new(file))
}

/// General real coordinate output, values with 17 significant digits.
pub fn write_matrix_market(a: &CooMatrix) -> String {
    let canonical = a.clone().canonicalized();
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", canonical.n_rows(), canonical.n_cols(), canonical.nnz());
    for &(i, j, v) in canonical.entries() {
        let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v);
    }
    out
}
