//! Dense datasets and the LIBSVM sparse text format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::Rng;

/// Design matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vector,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vector) -> Result<Self> {
        if features.rows() == 0 || features.cols() == 0 {
            return Err(Error::Data(
                "dataset needs at least one row and one feature".into(),
            ));
        }
        if features.rows() != labels.len() {
            return Err(Error::Data(format!(
                "{} rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(Dataset { features, labels })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &Vector {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn dx(&self) -> usize {
        self.features.cols()
    }

    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&b| b == 1.0 || b == -1.0)
    }

    /// Pads with zero columns up to `dx` features.
    pub fn with_dims(&self, dx: usize) -> Result<Dataset> {
        if dx < self.dx() {
            return Err(Error::Data(format!(
                "cannot shrink {} features to {dx}",
                self.dx()
            )));
        }
        let f = Matrix::from_fn(self.n(), dx, |i, j| {
            if j < self.dx() {
                self.features[(i, j)]
            } else {
                0.0
            }
        });
        Dataset::new(f, self.labels.clone())
    }

    /// Standard-normal features and labels, for synthetic validation sets.
    pub fn random_normal(n: usize, dx: usize, seed: u64) -> Result<Dataset> {
        let mut rng = Rng::new(seed);
        let features = rng.normal_matrix(n, dx);
        let labels = rng.normal_vector(n);
        Dataset::new(features, labels)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_float(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite {what} '{tok}'")));
    }
    Ok(v)
}

/// Parses LIBSVM text; the feature count is the largest index seen.
pub fn parse_libsvm(text: &[u8]) -> Result<Dataset> {
    parse_libsvm_with_dims(text, None)
}

/// Parses LIBSVM text, padding to `dims` features when given.
pub fn parse_libsvm_with_dims(text: &[u8], dims: Option<usize>) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_idx = 0usize;
    let mut line_no = 0usize;
    for raw in text.split(|&b| b == b'\n') {
        line_no += 1;
        let line = std::str::from_utf8(raw).map_err(|_| parse_err(line_no, "invalid UTF-8"))?;
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        let mut toks = line.split_ascii_whitespace();
        let Some(label_tok) = toks.next() else {
            continue;
        };
        let label = parse_float(label_tok, line_no, "label")?;
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in toks {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(line_no, format!("expected idx:val, got '{tok}'")))?;
            let idx: usize = i
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid index '{i}'")))?;
            if idx == 0 {
                return Err(parse_err(line_no, "indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(
                    line_no,
                    format!("index {idx} does not increase past {last}"),
                ));
            }
            last = idx;
            entries.push((idx, parse_float(v, line_no, "value")?));
        }
        max_idx = max_idx.max(last);
        labels.push(label);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(parse_err(line_no.max(1), "empty file"));
    }
    let dx = match dims {
        Some(d) if d < max_idx => {
            return Err(Error::Data(format!(
                "feature index {max_idx} exceeds declared dimension {d}"
            )))
        }
        Some(d) => d,
        None => max_idx,
    };
    if dx == 0 {
        return Err(Error::Data("no features present".into()));
    }
    let mut data = vec![0.0; rows.len() * dx];
    for (r, entries) in rows.iter().enumerate() {
        for &(idx, v) in entries {
            data[r * dx + idx - 1] = v;
        }
    }
    let n = rows.len();
    Dataset::new(Matrix::new(n, dx, data)?, Vector::new(labels)?)
}

pub fn load_libsvm(path: &Path, dims: Option<usize>) -> Result<Dataset> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_libsvm_with_dims(&bytes, dims)
}

/// Writes LIBSVM text with shortest round-trip floats; zero entries are omitted.
pub fn serialize_libsvm(ds: &Dataset) -> String {
    let mut out = String::new();
    for i in 0..ds.n() {
        write!(out, "{}", ds.labels[i]).unwrap();
        for (j, &v) in ds.features.row(i).iter().enumerate() {
            if v != 0.0 {
                write!(out, " {}:{}", j + 1, v).unwrap();
            }
        }
        out.push('\n');
    }
    out
}
