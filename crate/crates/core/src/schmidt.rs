//! Operator Schmidt analysis: numeric ranks via realignment, and product
//! expansions of the canonical diagonal cores that certify rank bounds.

#![allow(non_snake_case)]

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagonal::CanonicalCoreMN;
use crate::error::{Error, Result};
use crate::gates::Generator;
use crate::linalg::{c64, identity, kron, solve_real, svd, ComplexMatrix, RANK_TOL};

/// Reorders `u` on `C^M ⊗ C^N` so that `R[(i,i'), (j,j')] = u[(i,j), (i',j')]`.
pub fn realignment(u: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    if u.nrows() != m * n || u.ncols() != m * n {
        return Err(Error::NotFactorable { total: u.nrows().max(u.ncols()), m, n });
    }
    Ok(ComplexMatrix::from_fn(m * m, n * n, |r, c| {
        let (i, ip) = (r / m, r % m);
        let (j, jp) = (c / n, c % n);
        u[(i * n + j, ip * n + jp)]
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    pub dims: (usize, usize),
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub k_har: f64,
    pub tolerance: f64,
}

pub fn schmidt_rank(u: &ComplexMatrix, m: usize, n: usize, tol: f64) -> Result<SchmidtReport> {
    let r = realignment(u, m, n)?;
    let singular_values = svd(&r).singular_values;
    let top = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol * top.max(1.0);
    let rank = singular_values.iter().filter(|&&s| s > cutoff).count();
    Ok(SchmidtReport {
        dims: (m, n),
        singular_values,
        rank,
        k_har: if rank == 0 { 0.0 } else { (rank as f64).log2() },
        tolerance: tol,
    })
}

pub fn schmidt_rank_default(u: &ComplexMatrix, m: usize, n: usize) -> Result<SchmidtReport> {
    schmidt_rank(u, m, n, RANK_TOL)
}

/// One tensor factor of an expansion term: the identity or `T_{1a}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Identity,
    Z(usize),
}

impl Factor {
    pub fn matrix(self, dim: usize) -> Result<ComplexMatrix> {
        match self {
            Factor::Identity => Ok(identity(dim)),
            Factor::Z(a) => Generator::z(dim, a)?.matrix(),
        }
    }

    fn diag(self, dim: usize) -> Vec<f64> {
        let mut d = vec![1.0; dim];
        if let Factor::Z(a) = self {
            d.iter_mut().for_each(|x| *x = 0.0);
            d[0] = 1.0;
            d[a - 1] = -1.0;
        }
        d
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Identity => write!(f, "I"),
            Factor::Z(a) => write!(f, "T1{a}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionSource {
    #[serde(rename = "closed_form_2x2")]
    ClosedForm2x2,
    #[serde(rename = "closed_form_2xn")]
    ClosedForm2xN,
    #[serde(rename = "closed_form_3x3")]
    ClosedForm3x3,
    NumericProjection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub coefficient: Complex64,
    pub a_factor: Factor,
    pub b_factor: Factor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalExpansion {
    pub dims: (usize, usize),
    pub terms: Vec<ExpansionTerm>,
    pub source: ExpansionSource,
}

impl DiagonalExpansion {
    fn new(dims: (usize, usize), source: ExpansionSource) -> Self {
        Self { dims, terms: Vec::new(), source }
    }

    fn push(&mut self, coefficient: Complex64, a_factor: Factor, b_factor: Factor) {
        self.terms.push(ExpansionTerm { coefficient, a_factor, b_factor });
    }

    /// `Σ c · (A ⊗ B)`.
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let (m, n) = self.dims;
        let mut out = ComplexMatrix::zeros(m * n, m * n);
        for t in &self.terms {
            out += kron(&t.a_factor.matrix(m)?, &t.b_factor.matrix(n)?) * t.coefficient;
        }
        Ok(out)
    }

    /// Terms whose coefficient magnitude exceeds `tol`.
    pub fn effective_terms(&self, tol: f64) -> usize {
        self.terms.iter().filter(|t| t.coefficient.norm() > tol).count()
    }

    pub fn coefficient(&self, a_factor: Factor, b_factor: Factor) -> Option<Complex64> {
        self.terms.iter().find(|t| t.a_factor == a_factor && t.b_factor == b_factor).map(|t| t.coefficient)
    }
}

/// `exp(iθ σ_z ⊗ σ_z) = cos θ · I ⊗ I + i sin θ · σ_z ⊗ σ_z`.
pub fn expand_core_2x2(theta: f64) -> DiagonalExpansion {
    let mut e = DiagonalExpansion::new((2, 2), ExpansionSource::ClosedForm2x2);
    e.push(c64(theta.cos(), 0.0), Factor::Identity, Factor::Identity);
    e.push(c64(0.0, theta.sin()), Factor::Z(2), Factor::Z(2));
    e
}

/// `exp(i Σ_k θ_k σ_z ⊗ T_{1,k+1})` as `2N` terms.
pub fn expand_core_2N(theta: &[f64]) -> DiagonalExpansion {
    let n = theta.len() + 1;
    let nf = n as f64;
    let total: f64 = theta.iter().sum();
    let (c_sum, s_sum) = (total.cos(), total.sin());
    let sum_c: f64 = theta.iter().map(|t| t.cos()).sum();
    let sum_s: f64 = theta.iter().map(|t| t.sin()).sum();

    let mut e = DiagonalExpansion::new((2, n), ExpansionSource::ClosedForm2xN);
    e.push(c64((c_sum + sum_c) / nf, 0.0), Factor::Identity, Factor::Identity);
    e.push(c64(0.0, (s_sum - sum_s) / nf), Factor::Z(2), Factor::Identity);
    for (k, t) in theta.iter().enumerate() {
        let a = k + 2;
        e.push(c64((c_sum + sum_c - nf * t.cos()) / nf, 0.0), Factor::Identity, Factor::Z(a));
        e.push(c64(0.0, (s_sum - sum_s + nf * t.sin()) / nf), Factor::Z(2), Factor::Z(a));
    }
    e
}

/// Nine-term expansion of the `3 ⊗ 3` core; `theta` is a-major:
/// `(ã,a) = (2,2), (3,2), (2,3), (3,3)`.
pub fn expand_core_3x3(theta: &[f64; 4]) -> DiagonalExpansion {
    let [t1, t2, t3, t4] = *theta;
    let sum4 = t1 + t2 + t3 + t4;
    let pairs = [t1 + t2, t1 + t3, t2 + t4, t3 + t4];
    let re = sum4.cos() + theta.iter().map(|t| t.cos()).sum::<f64>() + pairs.iter().map(|p| p.cos()).sum::<f64>();
    let im = sum4.sin() + theta.iter().map(|t| t.sin()).sum::<f64>() - pairs.iter().map(|p| p.sin()).sum::<f64>();
    let c = c64(re, im) / 9.0;

    // C − (1/3)(c_{x+y} + c_x + c_y) + (i/3)(s_{x+y} − s_x − s_y)
    let single =
        |x: f64, y: f64| c - c64((x + y).cos() + x.cos() + y.cos(), -((x + y).sin() - x.sin() - y.sin())) / 3.0;
    // C − (1/3)(c_p + c_q − c_x + c_u + c_v) + (i/3)(s_p + s_q + s_x − s_u − s_v),
    // `x` the angle shared by both pair sums p and q.
    let double = |p: f64, q: f64, shared: f64, u: f64, v: f64| {
        let cos_part = p.cos() + q.cos() - shared.cos() + u.cos() + v.cos();
        let sin_part = p.sin() + q.sin() + shared.sin() - u.sin() - v.sin();
        c - c64(cos_part, -sin_part) / 3.0
    };

    let mut e = DiagonalExpansion::new((3, 3), ExpansionSource::ClosedForm3x3);
    e.push(c, Factor::Identity, Factor::Identity);
    e.push(single(t1, t2), Factor::Identity, Factor::Z(2));
    e.push(single(t3, t4), Factor::Identity, Factor::Z(3));
    e.push(single(t1, t3), Factor::Z(2), Factor::Identity);
    e.push(single(t2, t4), Factor::Z(3), Factor::Identity);
    e.push(double(t1 + t2, t1 + t3, t1, t2, t3), Factor::Z(2), Factor::Z(2));
    e.push(double(t1 + t3, t3 + t4, t3, t1, t4), Factor::Z(2), Factor::Z(3));
    e.push(double(t1 + t2, t2 + t4, t2, t1, t4), Factor::Z(3), Factor::Z(2));
    e.push(double(t2 + t4, t3 + t4, t4, t2, t3), Factor::Z(3), Factor::Z(3));
    e
}

/// Term basis `{I, T_{1ã}} ⊗ {I, T_{1a}}`, A factor outer.
fn product_basis(m: usize, n: usize) -> Vec<(Factor, Factor)> {
    let side = |d: usize| std::iter::once(Factor::Identity).chain((2..=d).map(Factor::Z)).collect::<Vec<_>>();
    let (fa, fb) = (side(m), side(n));
    let mut out: Vec<(Factor, Factor)> = Vec::with_capacity(m * n);
    out.push((Factor::Identity, Factor::Identity));
    out.extend(fb[1..].iter().map(|&b| (Factor::Identity, b)));
    out.extend(fa[1..].iter().map(|&a| (a, Factor::Identity)));
    for &a in &fa[1..] {
        for &b in &fb[1..] {
            out.push((a, b));
        }
    }
    out
}

/// Expansion of any diagonal matrix on `C^M ⊗ C^N` over the product basis.
/// The `MN` basis diagonals are linearly independent, so the coefficients
/// solve a square system.
pub fn expand_diagonal_numeric(diag: &[Complex64], dims: (usize, usize)) -> Result<DiagonalExpansion> {
    let (m, n) = dims;
    let size = m * n;
    if diag.len() != size {
        return Err(Error::DimensionMismatch(format!("{} diagonal entries for {m}x{n}", diag.len())));
    }
    let basis = product_basis(m, n);
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|(a, b)| {
            let (da, db) = (a.diag(m), b.diag(n));
            (0..size).map(|i| da[i / n] * db[i % n]).collect()
        })
        .collect();
    let mat = DMatrix::from_fn(size, size, |i, j| columns[j][i]);
    let re: Vec<f64> = diag.iter().map(|z| z.re).collect();
    let im: Vec<f64> = diag.iter().map(|z| z.im).collect();
    let xr = solve_real(&mat, &re)?;
    let xi = solve_real(&mat, &im)?;
    let mut e = DiagonalExpansion::new(dims, ExpansionSource::NumericProjection);
    for (k, (a, b)) in basis.into_iter().enumerate() {
        e.push(c64(xr[k], xi[k]), a, b);
    }
    Ok(e)
}

/// Expansion of `Λ = exp(i Σ θ_{ãa} T_{1ã} ⊗ T_{1a})`; local phases of the core are ignored.
pub fn expand_core_MN_numeric(core: &CanonicalCoreMN) -> Result<DiagonalExpansion> {
    let diag: Vec<Complex64> = core.core_phases().iter().map(|&p| c64(p.cos(), p.sin())).collect();
    expand_diagonal_numeric(&diag, core.dims)
}
