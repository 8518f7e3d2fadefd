//! On-disk JSON shapes shared by the CLI and the circuit serializer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, check_unitary, identity, kron, ComplexMatrix, UNITARITY_TOL};

/// `{"rows": r, "cols": c, "entries": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        Self { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.rows * self.cols != self.entries.len() || self.rows == 0 || self.cols == 0 {
            return Err(Error::Parse(format!(
                "matrix declares {}x{} but holds {} entries",
                self.rows,
                self.cols,
                self.entries.len()
            )));
        }
        Ok(ComplexMatrix::from_row_iterator(self.rows, self.cols, self.entries.iter().map(|&[re, im]| c64(re, im))))
    }
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        Self::from_matrix(m)
    }
}

/// Optional sandwich locals `(U_A ⊗ U_B) · G · (V_A ⊗ V_B)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalsFile {
    #[serde(default, rename = "UA", skip_serializing_if = "Option::is_none")]
    pub u_a: Option<MatrixFile>,
    #[serde(default, rename = "UB", skip_serializing_if = "Option::is_none")]
    pub u_b: Option<MatrixFile>,
    #[serde(default, rename = "VA", skip_serializing_if = "Option::is_none")]
    pub v_a: Option<MatrixFile>,
    #[serde(default, rename = "VB", skip_serializing_if = "Option::is_none")]
    pub v_b: Option<MatrixFile>,
}

impl LocalsFile {
    pub fn to_locals(&self) -> Result<Locals> {
        let conv = |m: &Option<MatrixFile>| m.as_ref().map(MatrixFile::to_matrix).transpose();
        Ok(Locals { u_a: conv(&self.u_a)?, u_b: conv(&self.u_b)?, v_a: conv(&self.v_a)?, v_b: conv(&self.v_b)? })
    }

    pub fn from_locals(l: &Locals) -> Self {
        let conv = |m: &Option<ComplexMatrix>| m.as_ref().map(MatrixFile::from_matrix);
        Self { u_a: conv(&l.u_a), u_b: conv(&l.u_b), v_a: conv(&l.v_a), v_b: conv(&l.v_b) }
    }
}

/// In-memory sandwich locals; `None` stands for the identity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Locals {
    pub u_a: Option<ComplexMatrix>,
    pub u_b: Option<ComplexMatrix>,
    pub v_a: Option<ComplexMatrix>,
    pub v_b: Option<ComplexMatrix>,
}

impl Locals {
    pub fn is_empty(&self) -> bool {
        self.u_a.is_none() && self.u_b.is_none() && self.v_a.is_none() && self.v_b.is_none()
    }

    /// Checks shapes against `dims` and unitarity of every supplied local.
    pub fn validate(&self, dims: (usize, usize)) -> Result<()> {
        let slots = [
            (&self.u_a, "U_A", dims.0),
            (&self.u_b, "U_B", dims.1),
            (&self.v_a, "V_A", dims.0),
            (&self.v_b, "V_B", dims.1),
        ];
        for (m, name, d) in slots {
            if let Some(m) = m {
                if m.shape() != (d, d) {
                    return Err(Error::DimensionMismatch(format!(
                        "{name} is {}x{}, expected {d}x{d}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                check_unitary(m, UNITARITY_TOL)?;
            }
        }
        Ok(())
    }

    pub fn get(slot: &Option<ComplexMatrix>, dim: usize) -> ComplexMatrix {
        slot.clone().unwrap_or_else(|| identity(dim))
    }

    /// `(U_A ⊗ U_B) · g · (V_A ⊗ V_B)`.
    pub fn sandwich(&self, dims: (usize, usize), g: &ComplexMatrix) -> ComplexMatrix {
        let (m, n) = dims;
        let left = kron(&Self::get(&self.u_a, m), &Self::get(&self.u_b, n));
        let right = kron(&Self::get(&self.v_a, m), &Self::get(&self.v_b, n));
        left * g * right
    }
}

/// Input of `synthesize`: controlled mode carries `blocks`, diagonal mode
/// carries `phases` (and `dims`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SynthesisInput {
    Controlled {
        blocks: Vec<MatrixFile>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        locals: Option<LocalsFile>,
    },
    Diagonal {
        dims: (usize, usize),
        phases: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        locals: Option<LocalsFile>,
    },
}

/// Input of `expand`: canonical core angles, a-major for `M ⊗ N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreFile {
    pub dims: (usize, usize),
    pub theta: Vec<f64>,
}
