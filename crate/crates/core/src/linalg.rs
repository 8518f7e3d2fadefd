//! Dense complex matrix arithmetic and the factorizations the compilers rely on.
//!
//! Matrices are plain `nalgebra::DMatrix<Complex64>`. Every function here is a
//! pure function of its inputs.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Default bound on `‖U†U − I‖_F` for inputs treated as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Default bound on global-phase-free reconstruction distances.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Default relative cutoff for numeric rank.
pub const RANK_TOL: f64 = 1e-8;

const SCHUR_MAX_ITER_PER_DIM: usize = 10_000;
const EIG_TIE_TOL: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{iθ}`
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Builds a matrix from row-major real entries.
pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(rows * cols, entries.len());
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c64(x, 0.0)))
}

pub fn from_diagonal(diag: &[Complex64]) -> ComplexMatrix {
    let n = diag.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] = d;
    }
    m
}

/// Diagonal matrix `diag(e^{iφ_0}, e^{iφ_1}, ...)`.
pub fn phase_diagonal(phases: &[f64]) -> ComplexMatrix {
    let diag: Vec<_> = phases.iter().map(|&p| cis(p)).collect();
    from_diagonal(&diag)
}

pub fn pauli_x() -> ComplexMatrix {
    from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Block-diagonal matrix with the given square blocks.
pub fn block_diagonal(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut offset = 0;
    for b in blocks {
        let n = b.nrows();
        out.view_mut((offset, offset), (n, n)).copy_from(b);
        offset += n;
    }
    out
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}

/// `‖U†U − I‖_F`; infinite for non-square input.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    (u.adjoint() * u - identity(n)).norm()
}

pub fn check_unitary(u: &ComplexMatrix, tolerance: f64) -> Result<()> {
    let residual = unitarity_residual(u);
    if residual <= tolerance {
        Ok(())
    } else {
        Err(Error::NotUnitary { residual, tolerance })
    }
}

/// Principal argument in `(−π, π]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// The phase `φ` minimizing `‖a − e^{iφ} b‖_F`, i.e. `arg tr(b†a)`.
pub fn phase_alignment(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    if overlap.norm() == 0.0 {
        0.0
    } else {
        overlap.arg()
    }
}

/// `min_φ ‖a − e^{iφ} b‖_F`.
pub fn dist_up_to_global_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let phi = phase_alignment(a, b);
    Ok((a - b * cis(phi)).norm())
}

/// Eigendecomposition of a unitary matrix, `u = V · diag(λ) · V†`.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    /// Sorted by principal argument, ascending.
    pub values: Vec<Complex64>,
    /// Columns are the eigenvectors, in the same order as `values`.
    pub vectors: ComplexMatrix,
}

impl UnitaryEigen {
    pub fn phases(&self) -> Vec<f64> {
        self.values.iter().map(|&z| principal_arg(z)).collect()
    }

    pub fn recompose(&self) -> ComplexMatrix {
        &self.vectors * from_diagonal(&self.values) * self.vectors.adjoint()
    }
}

/// Fixes the free phase of an eigenvector: the first component of maximal
/// modulus becomes real and positive.
fn normalize_vector_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        let n = z.norm();
        if n > best_norm + 1e-12 {
            best = i;
            best_norm = n;
        }
    }
    if best_norm > 0.0 {
        let phase = v[best] / best_norm;
        let fix = phase.conj();
        for z in v.iter_mut() {
            *z *= fix;
        }
    }
}

fn lexicographic(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Eigendecomposition of a unitary (hence normal) matrix via the complex
/// Schur form, whose triangular factor is diagonal for normal input.
pub fn eig_unitary(u: &ComplexMatrix) -> Result<UnitaryEigen> {
    check_unitary(u, UNITARITY_TOL)?;
    let n = u.nrows();
    let schur =
        Schur::try_new(u.clone(), f64::EPSILON, SCHUR_MAX_ITER_PER_DIM * n.max(1)).ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();

    let mut pairs: Vec<(f64, Complex64, Vec<Complex64>)> = (0..n)
        .map(|j| {
            let mut v: Vec<Complex64> = q.column(j).iter().copied().collect();
            normalize_vector_phase(&mut v);
            (principal_arg(t[(j, j)]), t[(j, j)], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Runs of (numerically) equal phases are ordered by eigenvector.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 - pairs[end - 1].0 <= EIG_TIE_TOL {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lexicographic(&a.2, &b.2));
        start = end;
    }

    let values = pairs.iter().map(|p| p.1).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| pairs[j].2[i]);
    Ok(UnitaryEigen { values, vectors })
}

/// Singular value decomposition `m = U · diag(σ) · V†`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    pub v_adjoint: ComplexMatrix,
}

impl Svd {
    pub fn recompose(&self) -> ComplexMatrix {
        let k = self.singular_values.len();
        let sigma =
            ComplexMatrix::from_fn(k, k, |i, j| if i == j { c64(self.singular_values[i], 0.0) } else { c64(0.0, 0.0) });
        &self.u * sigma * &self.v_adjoint
    }
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let dec = SVD::new(m.clone(), true, true);
    Svd {
        u: dec.u.expect("requested U"),
        singular_values: dec.singular_values.iter().copied().collect(),
        v_adjoint: dec.v_t.expect("requested V†"),
    }
}

/// `exp(i·h)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let phases: Vec<_> = eig.eigenvalues.iter().map(|&l| cis(l)).collect();
    &eig.eigenvectors * from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

/// Solves the real square system `a·x = b` by LU.
pub fn solve_real(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    let lu = a.clone().lu();
    lu.solve(&rhs).map(|x| x.iter().copied().collect()).ok_or(Error::SingularSystem)
}

/// Largest absolute imaginary part over all entries.
pub fn max_imag(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

pub fn real_part(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| c64(z.re, 0.0))
}
