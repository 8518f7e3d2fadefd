//! Generators of `u(N)`, rotation-types, and the generalized controlled-X gate.
//!
//! Generator indices are 1-based, as in the usual `T_ab` notation; basis-state
//! indices (control values, swap pairs) are 0-based.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, cis, expm_i_hermitian, from_diagonal, identity, kron, real_part, ComplexMatrix};

/// Which party of the bipartite register `C^M ⊗ C^N` a gate acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    /// Dimension of this party for register dims `(m, n)`.
    pub fn dim(self, dims: (usize, usize)) -> usize {
        match self {
            Side::A => dims.0,
            Side::B => dims.1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// Real symmetric off-diagonal pair, `T^(N,1)_ab`.
    X,
    /// Imaginary antisymmetric pair, `T^(N,2)_ab`.
    Y,
    /// Diagonal `T^(N,3)_1a = |1><1| − |a><a|`.
    Z,
}

/// A basis element of `u(N)` other than the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub dim: usize,
    pub kind: GeneratorKind,
    pub a: usize,
    /// Second index for X/Y types; unused (kept equal to `a`) for Z types.
    pub b: usize,
}

impl Generator {
    pub fn x(dim: usize, a: usize, b: usize) -> Result<Self> {
        Self { dim, kind: GeneratorKind::X, a, b }.validated()
    }

    pub fn y(dim: usize, a: usize, b: usize) -> Result<Self> {
        Self { dim, kind: GeneratorKind::Y, a, b }.validated()
    }

    pub fn z(dim: usize, a: usize) -> Result<Self> {
        Self { dim, kind: GeneratorKind::Z, a, b: a }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidGenerator(format!("dimension {} < 2", self.dim)));
        }
        let ok = match self.kind {
            GeneratorKind::X | GeneratorKind::Y => 1 <= self.a && self.a < self.b && self.b <= self.dim,
            GeneratorKind::Z => 2 <= self.a && self.a <= self.dim,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGenerator(format!(
                "{:?} indices ({}, {}) out of range for N = {}",
                self.kind, self.a, self.b, self.dim
            )))
        }
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        generator_matrix(self)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            GeneratorKind::X => 1,
            GeneratorKind::Y => 2,
            GeneratorKind::Z => 3,
        };
        match self.kind {
            GeneratorKind::Z => write!(f, "T({},{})_1{}", self.dim, k, self.a),
            _ => write!(f, "T({},{})_{}{}", self.dim, k, self.a, self.b),
        }
    }
}

pub fn generator_matrix(g: &Generator) -> Result<ComplexMatrix> {
    g.validate()?;
    let mut m = ComplexMatrix::zeros(g.dim, g.dim);
    let (a, b) = (g.a - 1, g.b - 1);
    match g.kind {
        GeneratorKind::X => {
            m[(a, b)] = c64(1.0, 0.0);
            m[(b, a)] = c64(1.0, 0.0);
        }
        GeneratorKind::Y => {
            m[(a, b)] = c64(0.0, -1.0);
            m[(b, a)] = c64(0.0, 1.0);
        }
        GeneratorKind::Z => {
            m[(0, 0)] = c64(1.0, 0.0);
            m[(a, a)] = c64(-1.0, 0.0);
        }
    }
    Ok(m)
}

/// Ordered `(a, b)` pairs (1-based, `a < b`) indexing y-rotation angles:
/// `(1,2), (1,3), …, (N−1,N)`.
pub fn y_pairs(dim: usize) -> Vec<(usize, usize)> {
    (1..=dim).flat_map(|a| (a + 1..=dim).map(move |b| (a, b))).collect()
}

/// All `N² − 1` non-identity generators: X-types, Y-types, then Z-types.
pub fn all_generators(dim: usize) -> Vec<Generator> {
    let pairs = y_pairs(dim);
    let mut out = Vec::with_capacity(dim * dim - 1);
    out.extend(pairs.iter().map(|&(a, b)| Generator { dim, kind: GeneratorKind::X, a, b }));
    out.extend(pairs.iter().map(|&(a, b)| Generator { dim, kind: GeneratorKind::Y, a, b }));
    out.extend((2..=dim).map(|a| Generator { dim, kind: GeneratorKind::Z, a, b: a }));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Y,
    Z,
}

impl Axis {
    pub fn angle_count(self, dim: usize) -> usize {
        match self {
            Axis::Y => dim * (dim - 1) / 2,
            Axis::Z => dim - 1,
        }
    }
}

/// A single-partite rotation-type: `exp(i Σ ϑ_j T^(N,2)_{pair j})` for the y
/// axis, `exp(i Σ θ_k T^(N,3)_{1,k+1})` for the z axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationType {
    pub dim: usize,
    pub axis: Axis,
    pub angles: Vec<f64>,
}

impl RotationType {
    pub fn new(dim: usize, axis: Axis, angles: Vec<f64>) -> Result<Self> {
        let r = Self { dim, axis, angles };
        r.validate()?;
        Ok(r)
    }

    pub fn y(dim: usize, angles: Vec<f64>) -> Result<Self> {
        Self::new(dim, Axis::Y, angles)
    }

    pub fn z(dim: usize, angles: Vec<f64>) -> Result<Self> {
        Self::new(dim, Axis::Z, angles)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidGenerator(format!("dimension {} < 2", self.dim)));
        }
        let expected = self.axis.angle_count(self.dim);
        if self.angles.len() != expected {
            return Err(Error::AngleCount { expected, got: self.angles.len() });
        }
        Ok(())
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.angles.iter().all(|a| a.abs() <= tol)
    }

    /// Hermitian generator sum `Σ angle · T`.
    pub fn generator_sum(&self) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(self.dim, self.dim);
        match self.axis {
            Axis::Y => {
                for (&(a, b), &t) in y_pairs(self.dim).iter().zip(&self.angles) {
                    h[(a - 1, b - 1)] += c64(0.0, -t);
                    h[(b - 1, a - 1)] += c64(0.0, t);
                }
            }
            Axis::Z => {
                for (k, &t) in self.angles.iter().enumerate() {
                    h[(0, 0)] += t;
                    h[(k + 1, k + 1)] -= t;
                }
            }
        }
        h
    }

    /// Diagonal phases of a z rotation-type: `(Σθ, −θ_1, …, −θ_{N−1})`.
    pub fn z_phases(&self) -> Vec<f64> {
        debug_assert_eq!(self.axis, Axis::Z);
        let mut p = Vec::with_capacity(self.dim);
        p.push(self.angles.iter().sum());
        p.extend(self.angles.iter().map(|t| -t));
        p
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        rotation_matrix(self)
    }
}

pub fn rotation_matrix(r: &RotationType) -> Result<ComplexMatrix> {
    r.validate()?;
    Ok(match r.axis {
        Axis::Z => {
            let d: Vec<Complex64> = r.z_phases().into_iter().map(cis).collect();
            from_diagonal(&d)
        }
        // i·T^(2) is real antisymmetric, so the exponential is real orthogonal.
        Axis::Y => real_part(&expm_i_hermitian(&r.generator_sum())),
    })
}

/// The transposition `X^(ij)` on `C^dim`, 0-based.
pub fn transposition(dim: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = identity(dim);
    m[(i, i)] = c64(0.0, 0.0);
    m[(j, j)] = c64(0.0, 0.0);
    m[(i, j)] = c64(1.0, 0.0);
    m[(j, i)] = c64(1.0, 0.0);
    m
}

/// Generalized controlled-X: applies `X^(ij)` to the target party iff the
/// control party is in `|control_value>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GcxGate {
    pub control_dim: usize,
    pub target_dim: usize,
    pub control_value: usize,
    pub swap: (usize, usize),
    pub control_side: Side,
}

impl GcxGate {
    /// GCX on a register with dims `(m, n)`, control on `control_side`.
    pub fn on_register(
        dims: (usize, usize),
        control_side: Side,
        control_value: usize,
        swap: (usize, usize),
    ) -> Result<Self> {
        let g = Self {
            control_dim: control_side.dim(dims),
            target_dim: control_side.other().dim(dims),
            control_value,
            swap,
            control_side,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let (i, j) = self.swap;
        if self.control_value >= self.control_dim || !(i < j && j < self.target_dim) {
            return Err(Error::InvalidGate(format!(
                "GCX control value {} (dim {}), swap ({}, {}) (dim {})",
                self.control_value, self.control_dim, i, j, self.target_dim
            )));
        }
        Ok(())
    }

    /// Register dims `(M, N)` this gate acts on.
    pub fn dims(&self) -> (usize, usize) {
        match self.control_side {
            Side::A => (self.control_dim, self.target_dim),
            Side::B => (self.target_dim, self.control_dim),
        }
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        gcx_matrix(self)
    }
}

pub fn gcx_matrix(g: &GcxGate) -> Result<ComplexMatrix> {
    g.validate()?;
    let x = transposition(g.target_dim, g.swap.0, g.swap.1);
    Ok(controlled_on(g.control_side, g.control_value, g.control_dim, &x))
}

/// `Σ_k |k><k| ⊗ (k == value ? U : I)` with the control on `side`, embedded
/// in A ⊗ B order.
pub fn controlled_on(side: Side, value: usize, control_dim: usize, target: &ComplexMatrix) -> ComplexMatrix {
    let t = target.nrows();
    let mut out = ComplexMatrix::zeros(control_dim * t, control_dim * t);
    for k in 0..control_dim {
        let mut proj = ComplexMatrix::zeros(control_dim, control_dim);
        proj[(k, k)] = c64(1.0, 0.0);
        let op = if k == value { target.clone() } else { identity(t) };
        out += match side {
            Side::A => kron(&proj, &op),
            Side::B => kron(&op, &proj),
        };
    }
    out
}

/// `Λ(m → R)` with `R` a z rotation-type on B and the control on A.
pub fn controlled_zrot_matrix(control_value: usize, r: &RotationType, control_dim: usize) -> Result<ComplexMatrix> {
    if r.axis != Axis::Z {
        return Err(Error::InvalidGate("controlled rotation must be z-axis".into()));
    }
    if control_value >= control_dim {
        return Err(Error::InvalidGate(format!(
            "control value {control_value} out of range for dimension {control_dim}"
        )));
    }
    Ok(controlled_on(Side::A, control_value, control_dim, &rotation_matrix(r)?))
}

/// The two-qubit CNOT, control on the first qubit.
pub fn cnot() -> ComplexMatrix {
    GcxGate::on_register((2, 2), Side::A, 1, (0, 1)).and_then(|g| g.matrix()).expect("static CNOT parameters are valid")
}
