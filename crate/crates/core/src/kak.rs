//! Single-party KAK factorization `U = e^{iθ_N} · O₁ · D · O₂` with `O₁, O₂`
//! real special-orthogonal (y rotation-types) and `D` a unit-determinant
//! diagonal (a z rotation-type).
//!
//! Construction: strip a global phase so `det V = 1`, factor the complex
//! symmetric unitary `S = V Vᵀ` as `O₁ D² O₁ᵀ` with `O₁` real, then
//! `O₂ = D† O₁ᵀ V` is real as well.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gates::{y_pairs, RotationType};
use crate::linalg::{
    c64, check_unitary, cis, dist_up_to_global_phase, eig_unitary, from_diagonal, max_imag, phase_diagonal,
    principal_arg, real_part, ComplexMatrix, UNITARITY_TOL,
};

/// Eigenvalues of `S` closer than this share one real eigenbasis.
const GROUPING_TOL: f64 = 1e-8;
/// Bound on the imaginary residue tolerated before dropping it from `O₂`.
const REALNESS_TOL: f64 = 1e-7;
/// Eigenphases of an orthogonal matrix this close to ±π have no principal real log.
const PRINCIPAL_LOG_MARGIN: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct KakFactorization {
    pub dim: usize,
    /// Global phase `θ_N`.
    pub phase: f64,
    pub o1: ComplexMatrix,
    /// `θ_1..θ_{N−1}` of the middle z rotation-type.
    pub z_angles: Vec<f64>,
    pub o2: ComplexMatrix,
    /// Angles of `O₁` as a y rotation-type, when its principal log is real.
    pub y_angles1: Option<Vec<f64>>,
    pub y_angles2: Option<Vec<f64>>,
}

impl KakFactorization {
    pub fn diagonal(&self) -> ComplexMatrix {
        RotationType::z(self.dim, self.z_angles.clone()).and_then(|r| r.matrix()).expect("z angle count matches dim")
    }

    pub fn recompose(&self) -> ComplexMatrix {
        &self.o1 * self.diagonal() * &self.o2 * cis(self.phase)
    }

    /// Both orthogonal factors are expressible as y rotation-types.
    pub fn has_rotation_angles(&self) -> bool {
        self.y_angles1.is_some() && self.y_angles2.is_some()
    }
}

pub fn kak_decompose(u: &ComplexMatrix) -> Result<KakFactorization> {
    check_unitary(u, UNITARITY_TOL)?;
    let n = u.nrows();
    if n < 2 {
        return Err(Error::DimensionMismatch(format!("single-party dimension {n} < 2")));
    }

    let phase = principal_arg(u.determinant()) / n as f64;
    let v = u * cis(-phase);
    let s = &v * v.transpose();
    let s = (&s + s.transpose()) * c64(0.5, 0.0);

    let mut o1 = real_symmetric_eigenbasis(&s)?;
    canonicalize_columns(&mut o1);
    let o1c = o1.map(|x| c64(x, 0.0));

    let d2 = o1c.transpose() * &s * &o1c;
    let off_diag = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| d2[(i, j)].norm())
        .fold(0.0, f64::max);
    if off_diag > REALNESS_TOL {
        return Err(Error::RealBasis(format!("O₁ᵀ S O₁ off-diagonal residual {off_diag:.3e}")));
    }

    let mut half: Vec<f64> = (0..n).map(|j| principal_arg(d2[(j, j)]) / 2.0).collect();
    // det(S) = 1 fixes Σ half ≡ 0 (mod π); an odd multiple needs one sign flip.
    let k = (half.iter().sum::<f64>() / PI).round() as i64;
    if k.rem_euclid(2) == 1 {
        half[0] += PI;
    }
    let d = phase_diagonal(&half);

    let o2c = d.adjoint() * o1c.transpose() * &v;
    let imag = max_imag(&o2c);
    if imag > REALNESS_TOL {
        return Err(Error::RealBasis(format!("O₂ imaginary residual {imag:.3e}")));
    }
    let mut o1c = o1c;
    let mut o2c = real_part(&o2c);

    // diag(−1, 1, …, 1) commutes with D
    if o1.determinant() < 0.0 {
        o1c.column_mut(0).neg_mut();
        o2c.row_mut(0).neg_mut();
    }

    let z_angles = half[1..].iter().map(|d| -d).collect();
    let y_angles1 = extract_y_angles(&o1c).ok();
    let y_angles2 = extract_y_angles(&o2c).ok();

    Ok(KakFactorization { dim: n, phase, o1: o1c, z_angles, o2: o2c, y_angles1, y_angles2 })
}

/// Real orthonormal eigenbasis of a complex symmetric unitary. Each eigenspace
/// is closed under conjugation, so the real and imaginary parts of its
/// eigenvectors span a real basis of it.
fn real_symmetric_eigenbasis(s: &ComplexMatrix) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    let eig = eig_unitary(s)?;

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        match groups.last_mut() {
            Some(g) if (eig.values[j] - eig.values[*g.last().unwrap()]).norm() <= GROUPING_TOL => g.push(j),
            _ => groups.push(vec![j]),
        }
    }
    // phases near ±π wrap around
    if groups.len() > 1 {
        let first = eig.values[groups[0][0]];
        let last = eig.values[*groups.last().unwrap().last().unwrap()];
        if (first - last).norm() <= GROUPING_TOL {
            let head = groups.remove(0);
            groups.last_mut().unwrap().extend(head);
        }
    }

    let mut basis = DMatrix::<f64>::zeros(n, n);
    let mut col = 0;
    for g in &groups {
        let k = g.len();
        let stacked = DMatrix::from_fn(n, 2 * k, |i, j| {
            let z = eig.vectors[(i, g[j % k])];
            if j < k {
                z.re
            } else {
                z.im
            }
        });
        let svd = stacked.svd(true, false);
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let sk = svd.singular_values[order[k - 1]];
        if sk < 1e-6 {
            return Err(Error::RealBasis(format!("eigenspace of dimension {k} has real rank deficit ({sk:.3e})")));
        }
        let left = svd.u.as_ref().expect("requested U");
        let span = DMatrix::from_fn(n, k, |i, j| left[(i, order[j])]);
        for v in pivoted_basis(&span) {
            basis.set_column(col, &v);
            col += 1;
        }
    }
    Ok(basis)
}

/// A basis of the column span of `q` (orthonormal columns) that depends only
/// on the span: pivoted Gram-Schmidt on the columns of the projector `q qᵀ`.
fn pivoted_basis(q: &DMatrix<f64>) -> Vec<nalgebra::DVector<f64>> {
    let k = q.ncols();
    if k == 1 {
        return vec![q.column(0).into_owned()];
    }
    let mut residual = q * q.transpose();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = 0;
        let mut best_norm = -1.0;
        for j in 0..residual.ncols() {
            let norm = residual.column(j).norm();
            if norm > best_norm + 1e-12 {
                best = j;
                best_norm = norm;
            }
        }
        let v = residual.column(best) / best_norm;
        residual -= &v * (v.transpose() * &residual);
        out.push(v);
    }
    out
}

/// Orders columns by the row of their largest entry and makes that entry
/// positive, so diagonal inputs come out with `O₁ = I`.
fn canonicalize_columns(o: &mut DMatrix<f64>) {
    let n = o.nrows();
    let mut cols: Vec<(usize, Vec<f64>)> = (0..n)
        .map(|j| {
            let c: Vec<f64> = o.column(j).iter().copied().collect();
            let mut pivot = 0;
            for i in 1..n {
                if c[i].abs() > c[pivot].abs() + 1e-12 {
                    pivot = i;
                }
            }
            let sign = if c[pivot] < 0.0 { -1.0 } else { 1.0 };
            (pivot, c.into_iter().map(|x| x * sign).collect())
        })
        .collect();
    cols.sort_by_key(|(p, _)| *p);
    for (j, (_, c)) in cols.into_iter().enumerate() {
        o.column_mut(j).copy_from_slice(&c);
    }
}

/// Angles `ϑ` with `rotation_matrix(y, ϑ) = o`, read off the principal real
/// logarithm of the special-orthogonal `o`.
pub fn extract_y_angles(o: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = o.nrows();
    if max_imag(o) > 1e-9 {
        return Err(Error::NotInExponentialImage("matrix is not real".into()));
    }
    let det = o.determinant();
    if det.re < 0.0 {
        return Err(Error::NotInExponentialImage("determinant is −1".into()));
    }
    let eig = eig_unitary(o)?;
    let phases = eig.phases();
    if phases.iter().any(|p| p.abs() > PI - PRINCIPAL_LOG_MARGIN) {
        return Err(Error::NotInExponentialImage("rotation angle π".into()));
    }
    let log_diag: Vec<_> = phases.iter().map(|&p| c64(0.0, p)).collect();
    let log = &eig.vectors * from_diagonal(&log_diag) * eig.vectors.adjoint();
    if max_imag(&log) > 1e-8 {
        return Err(Error::NotInExponentialImage("principal logarithm is not real".into()));
    }
    let angles: Vec<f64> =
        y_pairs(n).into_iter().map(|(a, b)| 0.5 * (log[(a - 1, b - 1)].re - log[(b - 1, a - 1)].re)).collect();
    let check = RotationType::y(n, angles.clone())?.matrix()?;
    let err = (check - o).norm();
    if err > 1e-9 {
        return Err(Error::NotInExponentialImage(format!("re-exponentiation error {err:.3e}")));
    }
    Ok(angles)
}

/// The three-dimensional case, `U = e^{iθ_3} · e^{iΣϑT} · e^{i(θ_1 T_12 + θ_2 T_13)} · e^{iΣϑ̃T}`.
pub fn decompose_u3_form(u: &ComplexMatrix) -> Result<KakFactorization> {
    if u.shape() != (3, 3) {
        return Err(Error::DimensionMismatch(format!("expected 3x3, got {:?}", u.shape())));
    }
    kak_decompose(u)
}

/// Global-phase-free reconstruction error of a factorization against `u`.
pub fn reconstruction_error(k: &KakFactorization, u: &ComplexMatrix) -> f64 {
    dist_up_to_global_phase(&k.recompose(), u).unwrap_or(f64::INFINITY)
}
