//! Matrix Market coordinate format.

use crate::matrix::{Matrix, MatrixError, SparseMatrixCsc};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed header: {message}")]
    Header { line: usize, message: String },
    #[error("line {line}: unsupported field '{field}'")]
    UnsupportedField { line: usize, field: String },
    #[error("line {line}: unsupported layout: {message}")]
    Unsupported { line: usize, message: String },
    #[error("line {line}: malformed size line: {message}")]
    Size { line: usize, message: String },
    #[error("line {line}: malformed entry: {message}")]
    Entry { line: usize, message: String },
    #[error("line {line}: index ({row}, {col}) outside {rows}x{cols}")]
    IndexOutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected {expected} entries, found {actual}")]
    EntryCount { expected: usize, actual: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Reads a coordinate-format file. With `transpose` the stored matrix is
/// returned transposed.
pub fn read_matrix_market(path: impl AsRef<Path>, transpose: bool) -> Result<Matrix, MarketError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MarketError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_matrix_market_str(&text, transpose)
}

pub fn read_matrix_market_str(text: &str, transpose: bool) -> Result<Matrix, MarketError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or(MarketError::Header {
        line: 1,
        message: "empty file".into(),
    })?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(MarketError::Header {
            line: hline,
            message: format!(
                "expected '%%MatrixMarket matrix <format> <field> <symmetry>', got '{header}'"
            ),
        });
    }
    if tokens[2] != "coordinate" {
        return Err(MarketError::Unsupported {
            line: hline,
            message: format!("format '{}' (only coordinate is read)", tokens[2]),
        });
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => {
            return Err(MarketError::UnsupportedField {
                line: hline,
                field: other.to_string(),
            })
        }
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => {
            return Err(MarketError::Unsupported {
                line: hline,
                message: format!("symmetry '{other}'"),
            })
        }
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = body.next().ok_or(MarketError::Size {
        line: hline + 1,
        message: "missing size line".into(),
    })?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| MarketError::Size {
            line: sline,
            message: e.to_string(),
        })?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(MarketError::Size {
            line: sline,
            message: format!("expected 'rows cols entries', got '{size}'"),
        });
    };
    if symmetry != Symmetry::General && rows != cols {
        return Err(MarketError::Size {
            line: sline,
            message: format!("{rows}x{cols} cannot be symmetric"),
        });
    }

    let mut triplets = Vec::with_capacity(if symmetry == Symmetry::General {
        nnz
    } else {
        2 * nnz
    });
    let mut count = 0;
    for (line, entry) in body {
        count += 1;
        if count > nnz {
            continue;
        }
        let mut it = entry.split_whitespace();
        let mut index = |name: &str| -> Result<usize, MarketError> {
            it.next()
                .ok_or_else(|| MarketError::Entry {
                    line,
                    message: format!("missing {name} index"),
                })?
                .parse::<usize>()
                .map_err(|e| MarketError::Entry {
                    line,
                    message: format!("{name} index: {e}"),
                })
        };
        let i = index("row")?;
        let j = index("column")?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(MarketError::IndexOutOfBounds {
                line,
                row: i,
                col: j,
                rows,
                cols,
            });
        }
        let v = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => {
                let tok = it.next().ok_or_else(|| MarketError::Entry {
                    line,
                    message: "missing value".into(),
                })?;
                if field == Field::Integer {
                    tok.parse::<i64>().map_err(|e| MarketError::Entry {
                        line,
                        message: format!("integer value: {e}"),
                    })? as f64
                } else {
                    tok.parse::<f64>().map_err(|e| MarketError::Entry {
                        line,
                        message: format!("value: {e}"),
                    })?
                }
            }
        };
        if it.next().is_some() {
            return Err(MarketError::Entry {
                line,
                message: "trailing tokens".into(),
            });
        }
        let (r, c) = (i - 1, j - 1);
        triplets.push((r, c, v));
        if r != c {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((c, r, v)),
                Symmetry::SkewSymmetric => triplets.push((c, r, -v)),
            }
        }
    }
    if count != nnz {
        return Err(MarketError::EntryCount {
            expected: nnz,
            actual: count,
        });
    }
    let (rows, cols) = if transpose {
        (cols, rows)
    } else {
        (rows, cols)
    };
    if transpose {
        for t in triplets.iter_mut() {
            *t = (t.1, t.0, t.2);
        }
    }
    Ok(SparseMatrixCsc::from_triplets(rows, cols, &triplets)?.into())
}

/// Writes `a` as `coordinate real general`, values in shortest round-trip
/// form.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &Matrix) -> Result<(), MarketError> {
    let path = path.as_ref();
    let sp = a.to_sparse();
    let mut out = String::with_capacity(32 * (sp.nnz() + 2));
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", sp.rows(), sp.cols(), sp.nnz());
    for j in 0..sp.cols() {
        let (ri, vals) = sp.column(j);
        for (&i, &v) in ri.iter().zip(vals) {
            let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
        }
    }
    std::fs::write(path, out).map_err(|source| MarketError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    #[test]
    fn golden_identity() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 1.0\n";
        let a = read_matrix_market_str(text, false).unwrap();
        assert_eq!(a.to_dense(), DenseMatrix::identity(2).unwrap());
    }

    #[test]
    fn comments_pattern_and_integer() {
        let text = "%%MatrixMarket matrix coordinate pattern general\n% note\n\n2 3 2\n1 3\n2 1\n";
        let a = read_matrix_market_str(text, false).unwrap().to_dense();
        assert_eq!(a.get(0, 2), 1.0);
        assert_eq!(a.get(1, 0), 1.0);
        let text = "%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 -4\n";
        assert_eq!(
            read_matrix_market_str(text, false)
                .unwrap()
                .to_dense()
                .get(0, 0),
            -4.0
        );
    }

    #[test]
    fn symmetric_expansion() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 2\n2 1 -1\n3 2 0.5\n3 3 7\n";
        let a = read_matrix_market_str(text, false).unwrap().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 2), 0.5);
    }

    #[test]
    fn duplicates_are_summed() {
        let text =
            "%%MatrixMarket matrix coordinate real general\n2 1 3\n1 1 1.5\n1 1 2.5\n2 1 1\n";
        let a = read_matrix_market_str(text, false).unwrap();
        assert_eq!(a.to_dense().get(0, 0), 4.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn transpose_flag() {
        let text = "%%MatrixMarket matrix coordinate real general\n1 3 2\n1 2 5\n1 3 6\n";
        let a = read_matrix_market_str(text, true).unwrap();
        assert_eq!((a.rows(), a.cols()), (3, 1));
        assert_eq!(a.to_dense().column(0), &[0.0, 5.0, 6.0]);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let bad_header = "%%MatrixMarket matrix\n1 1 1\n1 1 1\n";
        assert!(matches!(
            read_matrix_market_str(bad_header, false),
            Err(MarketError::Header { line: 1, .. })
        ));
        let complex = "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n";
        assert!(matches!(
            read_matrix_market_str(complex, false),
            Err(MarketError::UnsupportedField { line: 1, .. })
        ));
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n% c\n3 1 1.0\n";
        assert!(matches!(
            read_matrix_market_str(oob, false),
            Err(MarketError::IndexOutOfBounds {
                line: 4,
                row: 3,
                ..
            })
        ));
        let bad_value = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n";
        assert!(matches!(
            read_matrix_market_str(bad_value, false),
            Err(MarketError::Entry { line: 3, .. })
        ));
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n";
        assert!(matches!(
            read_matrix_market_str(short, false),
            Err(MarketError::EntryCount {
                expected: 2,
                actual: 1
            })
        ));
    }
}
