//! Matrix Market reading (array and coordinate, real or integer, general,
//! symmetric or skew-symmetric) and writing (array, general).

use std::fmt::Write as _;
use std::path::Path;

use rinv_core::DenseMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Matrix(#[from] rinv_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn parse_err(line: usize, message: impl Into<String>) -> MmError {
    MmError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn parse_header(line: &str) -> Result<(Layout, Symmetry), MmError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, "expected a %%MatrixMarket header"));
    }
    if words.len() != 5 || words[1] != "matrix" {
        return Err(parse_err(
            1,
            "header must read: %%MatrixMarket matrix <format> <field> <symmetry>",
        ));
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(1, format!("unknown format '{other}'"))),
    };
    match words[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    }
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok((layout, symmetry))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, MmError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, MmError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid value '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix, MmError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (layout, symmetry) = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let expected = if layout == Layout::Array { 2 } else { 3 };
    if dims.len() != expected {
        return Err(parse_err(
            size_line,
            format!("size line needs {expected} integers"),
        ));
    }
    let rows = parse_usize(dims[0], size_line, "row count")?;
    let cols = parse_usize(dims[1], size_line, "column count")?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(
            size_line,
            "symmetric storage requires a square matrix",
        ));
    }
    let mut m = vec![0.0; rows * cols];
    let mut set = |i: usize, j: usize, v: f64| {
        m[i * cols + j] = v;
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric => m[j * cols + i] = v,
            Symmetry::Skew => m[j * cols + i] = -v,
        }
    };

    match layout {
        Layout::Array => {
            // Column-major; symmetric forms list the lower triangle only
            // (strictly lower for skew-symmetric).
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::Symmetric => j,
                        Symmetry::Skew => j + 1,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut k = 0;
            let mut last_line = size_line;
            for (line, text) in body {
                last_line = line;
                for tok in text.split_whitespace() {
                    let &(i, j) = positions.get(k).ok_or_else(|| {
                        parse_err(line, format!("more than {} entries", positions.len()))
                    })?;
                    set(i, j, parse_f64(tok, line)?);
                    k += 1;
                }
            }
            if k != positions.len() {
                return Err(parse_err(
                    last_line,
                    format!("expected {} entries, found {k}", positions.len()),
                ));
            }
        }
        Layout::Coordinate => {
            let nnz = parse_usize(dims[2], size_line, "entry count")?;
            let mut count = 0;
            let mut last_line = size_line;
            for (line, text) in body {
                last_line = line;
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(parse_err(line, "coordinate entry needs 'row col value'"));
                }
                let i = parse_usize(toks[0], line, "row index")?;
                let j = parse_usize(toks[1], line, "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(
                        line,
                        format!("index ({i}, {j}) outside a {rows}x{cols} matrix"),
                    ));
                }
                count += 1;
                if count > nnz {
                    return Err(parse_err(line, format!("more than {nnz} entries")));
                }
                set(i - 1, j - 1, parse_f64(toks[2], line)?);
            }
            if count != nnz {
                return Err(parse_err(
                    last_line,
                    format!("expected {nnz} entries, found {count}"),
                ));
            }
        }
    }
    Ok(DenseMatrix::from_row_major(rows, cols, &m)?)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, MmError> {
    let text = std::fs::read_to_string(path).map_err(|source| MmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text)
}

/// Array form, column-major, values in shortest round-trip notation.
pub fn format_array(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let _ = writeln!(out, "{:e}", m.get(i, j));
        }
    }
    out
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<(), MmError> {
    std::fs::write(path, format_array(m)).map_err(|source| MmError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn array_is_column_major() {
        let m =
            parse_matrix("%%MatrixMarket matrix array real general\n% c\n2 3\n1\n2\n3\n4\n5\n6\n")
                .unwrap();
        assert_eq!(m.to_row_major(), vec![1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn symmetric_array() {
        let m = parse_matrix("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(m.to_row_major(), vec![1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn coordinate_forms() {
        let m = parse_matrix(
            "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1.0\n2 2 1\n3 3 1e0\n",
        )
        .unwrap();
        assert_eq!(m, DenseMatrix::identity(3));
        let s = parse_matrix("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 5\n")
            .unwrap();
        assert_eq!(s.to_row_major(), vec![0.0, 5.0, 5.0, 0.0]);
        let k =
            parse_matrix("%%MatrixMarket matrix coordinate integer skew-symmetric\n2 2 1\n2 1 5\n")
                .unwrap();
        assert_eq!(k.to_row_major(), vec![0.0, -5.0, 5.0, 0.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_matrix("%%MatrixMarket matrix array real general\n2 2\n1\n2\nx\n4\n")
            .unwrap_err();
        assert!(matches!(err, MmError::Parse { line: 5, .. }), "{err}");
        let err = parse_matrix("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n")
            .unwrap_err();
        assert!(matches!(err, MmError::Parse { line: 3, .. }), "{err}");
        let err =
            parse_matrix("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").unwrap_err();
        assert!(err.to_string().contains("expected 4 entries"));
        assert!(parse_matrix("hello\n").is_err());
        assert!(parse_matrix("%%MatrixMarket matrix array complex general\n1 1\n1 0\n").is_err());
        assert!(parse_matrix("%%MatrixMarket matrix array real general\n1 1\nnan\n").is_err());
    }

    proptest! {
        #[test]
        fn array_roundtrip_is_bit_exact(
            rows in 1usize..6,
            cols in 1usize..6,
            vals in prop::collection::vec(-1e12f64..1e12, 36),
        ) {
            let m = DenseMatrix::from_row_major(rows, cols, &vals[..rows * cols]).unwrap();
            let back = parse_matrix(&format_array(&m)).unwrap();
            prop_assert_eq!(back.to_row_major(), m.to_row_major());
        }
    }
}
