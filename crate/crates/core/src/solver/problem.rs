//! Problem containers and their text format.
//!
//! A problem file starts with a one-line JSON header
//! `{"m": .., "n": .., "realified": bool}` (matrix problems add
//! `"shape": [rows, cols]` with `rows·cols = n`), followed by the `m × n`
//! matrix in row-major order and the `m` entries of `b`, all as
//! whitespace-separated numbers.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SolverError;

/// `min_x R(x) + ‖Ax − b‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorProblem {
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    /// Rows are stacked real parts then imaginary parts of a complex system.
    pub realified: bool,
}

impl VectorProblem {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>) -> Result<Self, SolverError> {
        Self::with_pairing(a, b, false)
    }

    pub fn with_pairing(a: DMatrix<f64>, b: Vec<f64>, realified: bool) -> Result<Self, SolverError> {
        if a.nrows() != b.len() {
            return Err(SolverError::DimensionMismatch {
                what: "b",
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if realified && !a.nrows().is_multiple_of(2) {
            return Err(SolverError::Format(format!(
                "realified problem needs an even row count, got {}",
                a.nrows()
            )));
        }
        Ok(Self { a, b, realified })
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }
}

/// `min_X R(σ(X)) + ‖op·vec(X) − b‖²` with column-major `vec`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProblem {
    pub op: DMatrix<f64>,
    pub b: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl MatrixProblem {
    pub fn new(op: DMatrix<f64>, b: Vec<f64>, rows: usize, cols: usize) -> Result<Self, SolverError> {
        if op.ncols() != rows * cols {
            return Err(SolverError::DimensionMismatch {
                what: "operator columns",
                expected: rows * cols,
                got: op.ncols(),
            });
        }
        if op.nrows() != b.len() {
            return Err(SolverError::DimensionMismatch {
                what: "b",
                expected: op.nrows(),
                got: b.len(),
            });
        }
        Ok(Self { op, b, rows, cols })
    }

    /// The same data viewed as a vector problem over `vec(X)`.
    pub fn as_vector(&self) -> VectorProblem {
        VectorProblem {
            a: self.op.clone(),
            b: self.b.clone(),
            realified: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    m: usize,
    n: usize,
    #[serde(default)]
    realified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<(usize, usize)>,
}

/// Either kind of problem, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemFile {
    Vector(VectorProblem),
    Matrix(MatrixProblem),
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, SolverError> {
        let (head, body) = text.split_once('\n').unwrap_or((text, ""));
        let header: Header = serde_json::from_str(head.trim())
            .map_err(|e| SolverError::Format(format!("bad header: {e}")))?;
        let nums: Vec<f64> = body
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| SolverError::Format(format!("not a number: {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        let want = header.m * header.n + header.m;
        if nums.len() != want {
            return Err(SolverError::Format(format!(
                "expected {want} numbers for a {}x{} system, found {}",
                header.m,
                header.n,
                nums.len()
            )));
        }
        let a = DMatrix::from_row_slice(header.m, header.n, &nums[..header.m * header.n]);
        let b = nums[header.m * header.n..].to_vec();
        match header.shape {
            Some((r, c)) => Ok(ProblemFile::Matrix(MatrixProblem::new(a, b, r, c)?)),
            None => Ok(ProblemFile::Vector(VectorProblem::with_pairing(
                a,
                b,
                header.realified,
            )?)),
        }
    }

    pub fn read(path: &Path) -> Result<Self, SolverError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        let (a, b, header) = match self {
            ProblemFile::Vector(p) => (
                &p.a,
                &p.b,
                Header {
                    m: p.a.nrows(),
                    n: p.a.ncols(),
                    realified: p.realified,
                    shape: None,
                },
            ),
            ProblemFile::Matrix(p) => (
                &p.op,
                &p.b,
                Header {
                    m: p.op.nrows(),
                    n: p.op.ncols(),
                    realified: false,
                    shape: Some((p.rows, p.cols)),
                },
            ),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for i in 0..a.nrows() {
            let row: Vec<String> = a.row(i).iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        let bs: Vec<String> = b.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&bs.join(" "));
        out.push('\n');
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), SolverError> {
        std::fs::write(path, self.render())
            .map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, -0.1, 1e-17, 3.5, 0.0, 2.0 / 3.0]);
        let p = ProblemFile::Vector(VectorProblem::new(a, vec![0.3, -7.0]).unwrap());
        assert_eq!(ProblemFile::parse(&p.render()).unwrap(), p);
        let m = ProblemFile::Matrix(
            MatrixProblem::new(DMatrix::identity(4, 4), vec![1.0, 0.0, 0.0, 2.0], 2, 2).unwrap(),
        );
        assert_eq!(ProblemFile::parse(&m.render()).unwrap(), m);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(ProblemFile::parse("{\"m\":1,\"n\":2}\n1 2").is_err());
        assert!(ProblemFile::parse("{\"m\":1,\"n\":1}\n1 x").is_err());
        assert!(ProblemFile::parse("not json\n1 2").is_err());
        assert!(ProblemFile::parse("{\"m\":1,\"n\":1,\"realified\":true}\n1 2").is_err());
        assert!(ProblemFile::parse("{\"m\":1,\"n\":4,\"shape\":[3,1]}\n1 2 3 4 5").is_err());
    }
}
