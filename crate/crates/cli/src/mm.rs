//! Matrix Market readers and writers for the block data: coordinate format
//! for matrices (`complex general` or `complex hermitian`, lower triangle
//! only for the latter) and array format for vectors. Values are written with
//! shortest round-trip precision so write-then-read is bit-exact. All writes
//! go through a temp file plus rename.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gspp_core::matrix::CMat;
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum MmError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl MmError {
    fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        MmError::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        MmError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    SkewSymmetric,
}

/// Writes a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), MmError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| MmError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| MmError::io(path, e))
}

fn fmt_value(v: f64) -> String {
    format!("{:?}", v)
}

/// Writes a dense complex matrix in coordinate format, storing structural
/// nonzeros only. With `hermitian` set, stores the lower triangle under the
/// `hermitian` symmetry qualifier.
pub fn write_matrix(path: &Path, m: &CMat, hermitian: bool) -> Result<(), MmError> {
    let mut entries = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if hermitian && j > i {
                continue;
            }
            let v = m[(i, j)];
            if v.re != 0.0 || v.im != 0.0 {
                entries.push((i + 1, j + 1, v));
            }
        }
    }
    let mut out = String::new();
    let sym = if hermitian { "hermitian" } else { "general" };
    writeln!(out, "%%MatrixMarket matrix coordinate complex {}", sym).unwrap();
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), entries.len()).unwrap();
    for (i, j, v) in entries {
        writeln!(out, "{} {} {} {}", i, j, fmt_value(v.re), fmt_value(v.im)).unwrap();
    }
    write_atomic(path, &out)
}

/// Writes a complex vector as an n-by-1 dense array.
pub fn write_vector(path: &Path, v: &[Complex64]) -> Result<(), MmError> {
    let mut out = String::new();
    writeln!(out, "%%MatrixMarket matrix array complex general").unwrap();
    writeln!(out, "{} 1", v.len()).unwrap();
    for x in v {
        writeln!(out, "{} {}", fmt_value(x.re), fmt_value(x.im)).unwrap();
    }
    write_atomic(path, &out)
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-comment, non-empty line with its 1-based number.
    fn next_data(&mut self) -> Option<(usize, &'a str)> {
        for (idx, line) in self.iter.by_ref() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            return Some((idx + 1, trimmed));
        }
        None
    }
}

fn parse_header(path: &Path, text: &str) -> Result<(bool, Field, Symmetry), MmError> {
    let first = text
        .lines()
        .next()
        .ok_or_else(|| MmError::parse(path, 1, "empty file"))?;
    let tokens: Vec<String> = first.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(MmError::parse(
            path,
            1,
            "expected header '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => {
            return Err(MmError::parse(path, 1, format!("unknown format '{}'", other)));
        }
    };
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        other => {
            return Err(MmError::parse(path, 1, format!("unsupported field '{}'", other)));
        }
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => {
            return Err(MmError::parse(path, 1, format!("unsupported symmetry '{}'", other)));
        }
    };
    Ok((coordinate, field, symmetry))
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64, MmError> {
    tok.parse::<f64>()
        .map_err(|_| MmError::parse(path, line, format!("invalid number '{}'", tok)))
}

fn parse_usize(path: &Path, line: usize, tok: &str) -> Result<usize, MmError> {
    tok.parse::<usize>()
        .map_err(|_| MmError::parse(path, line, format!("invalid index '{}'", tok)))
}

/// Reads a Matrix Market file into a dense complex matrix. Coordinate and
/// array formats, real/complex/integer fields, and general/symmetric/
/// hermitian/skew-symmetric qualifiers are accepted.
pub fn read_matrix(path: &Path) -> Result<CMat, MmError> {
    let text = fs::read_to_string(path).map_err(|e| MmError::io(path, e))?;
    let (coordinate, field, symmetry) = parse_header(path, &text)?;
    // The header starts with '%', so the data iterator skips it on its own.
    let mut lines = Lines {
        iter: text.lines().enumerate(),
    };
    let (size_line_no, size_line) = lines
        .next_data()
        .ok_or_else(|| MmError::parse(path, 1, "missing size line"))?;
    let toks: Vec<&str> = size_line.split_whitespace().collect();

    let value_count = |field: Field| match field {
        Field::Complex => 2,
        _ => 1,
    };

    if coordinate {
        if toks.len() != 3 {
            return Err(MmError::parse(
                path,
                size_line_no,
                "coordinate size line must be 'rows cols nnz'",
            ));
        }
        let rows = parse_usize(path, size_line_no, toks[0])?;
        let cols = parse_usize(path, size_line_no, toks[1])?;
        let nnz = parse_usize(path, size_line_no, toks[2])?;
        let mut m = CMat::zeros(rows, cols);
        for k in 0..nnz {
            let (line_no, line) = lines.next_data().ok_or_else(|| {
                MmError::parse(
                    path,
                    size_line_no,
                    format!("expected {} entries, file ends after {}", nnz, k),
                )
            })?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 + value_count(field) {
                return Err(MmError::parse(
                    path,
                    line_no,
                    format!("expected 'i j value' with {} value field(s)", value_count(field)),
                ));
            }
            let i = parse_usize(path, line_no, toks[0])?;
            let j = parse_usize(path, line_no, toks[1])?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(MmError::parse(
                    path,
                    line_no,
                    format!("entry ({}, {}) outside {}x{}", i, j, rows, cols),
                ));
            }
            let re = parse_f64(path, line_no, toks[2])?;
            let im = if field == Field::Complex {
                parse_f64(path, line_no, toks[3])?
            } else {
                0.0
            };
            let v = Complex64::new(re, im);
            m[(i - 1, j - 1)] = v;
            if i != j {
                match symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric => m[(j - 1, i - 1)] = v,
                    Symmetry::Hermitian => m[(j - 1, i - 1)] = v.conj(),
                    Symmetry::SkewSymmetric => m[(j - 1, i - 1)] = -v,
                }
            }
        }
        Ok(m)
    } else {
        if toks.len() != 2 {
            return Err(MmError::parse(
                path,
                size_line_no,
                "array size line must be 'rows cols'",
            ));
        }
        let rows = parse_usize(path, size_line_no, toks[0])?;
        let cols = parse_usize(path, size_line_no, toks[1])?;
        if symmetry != Symmetry::General {
            return Err(MmError::parse(
                path,
                size_line_no,
                "array format is only supported with 'general' symmetry",
            ));
        }
        let mut m = CMat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                let (line_no, line) = lines.next_data().ok_or_else(|| {
                    MmError::parse(
                        path,
                        size_line_no,
                        format!("file ends before {} array values are read", rows * cols),
                    )
                })?;
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != value_count(field) {
                    return Err(MmError::parse(
                        path,
                        line_no,
                        format!("expected {} value field(s)", value_count(field)),
                    ));
                }
                let re = parse_f64(path, line_no, toks[0])?;
                let im = if field == Field::Complex {
                    parse_f64(path, line_no, toks[1])?
                } else {
                    0.0
                };
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        Ok(m)
    }
}

/// Reads an n-by-1 (or 1-by-n) Matrix Market file as a vector.
pub fn read_vector(path: &Path) -> Result<Vec<Complex64>, MmError> {
    let m = read_matrix(path)?;
    if m.ncols() == 1 {
        Ok(m.data().to_vec())
    } else if m.nrows() == 1 {
        Ok((0..m.ncols()).map(|j| m[(0, j)]).collect())
    } else {
        Err(MmError::parse(
            path,
            1,
            format!("expected a vector, got a {}x{} matrix", m.nrows(), m.ncols()),
        ))
    }
}
