//! Gates locally equivalent to a diagonal unitary on `C^M ⊗ C^N`.
//!
//! A diagonal `diag(e^{iφ})` splits as `e^{ig} (Z_μ ⊗ Z_ν) · Λ`, where
//! `Λ = exp(i Σ θ_{ãa} T_{1ã} ⊗ T_{1a})`. Each term of `Λ` is a product of two
//! A-controlled z rotations on B, `Λ(0 → e^{iθT_{1a}}) · Λ(ã−1 → e^{−iθT_{1a}})`,
//! and the value-0 pieces sharing `a` merge into one, leaving `M(N−1)` controlled
//! rotations of two GCX gates each.

#![allow(non_snake_case)]

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::circuit::{local_unitary_gates, Circuit, CircuitMeta, Gate, PaperCounts};
use crate::error::{Error, Result};
use crate::formats::Locals;
use crate::gates::{RotationType, Side};
use crate::linalg::{
    dist_up_to_global_phase, phase_diagonal, solve_real, wrap_angle, ComplexMatrix, RECONSTRUCTION_TOL,
};

/// Wrapped phase residual allowed after fitting.
pub const FIT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalGateSpec {
    pub dims: (usize, usize),
    /// Row-major over `(j, k)`, `j` the A index.
    pub phases: Vec<f64>,
    pub locals: Locals,
}

impl DiagonalGateSpec {
    pub fn new(dims: (usize, usize), phases: Vec<f64>) -> Result<Self> {
        Self::with_locals(dims, phases, Locals::default())
    }

    pub fn with_locals(dims: (usize, usize), phases: Vec<f64>, locals: Locals) -> Result<Self> {
        let spec = Self { dims, phases, locals };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.dims;
        if m < 2 || n < 2 {
            return Err(Error::DimensionMismatch(format!("dims ({m}, {n}) need both factors >= 2")));
        }
        if self.phases.len() != m * n {
            return Err(Error::DimensionMismatch(format!("{} phases for a {m}x{n} register", self.phases.len())));
        }
        if self.phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parse("phases must be finite".into()));
        }
        self.locals.validate(self.dims)
    }

    pub fn diagonal(&self) -> ComplexMatrix {
        phase_diagonal(&self.phases)
    }

    pub fn target(&self) -> ComplexMatrix {
        self.locals.sandwich(self.dims, &self.diagonal())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCoreMN {
    pub dims: (usize, usize),
    /// `θ_{ãa}` at [`theta_index`], `a` major.
    pub theta: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub global_phase: f64,
}

/// Position of `θ_{ãa}` (1-based `ã ∈ 2..=M`, `a ∈ 2..=N`) in the angle vector.
pub fn theta_index(m: usize, a_tilde: usize, a: usize) -> usize {
    (a - 2) * (m - 1) + (a_tilde - 2)
}

/// Diagonal of `T_{1a}` on `C^dim`.
fn t_diag(dim: usize, a: usize) -> Vec<f64> {
    let mut d = vec![0.0; dim];
    d[0] = 1.0;
    d[a - 1] = -1.0;
    d
}

impl CanonicalCoreMN {
    pub fn zero(dims: (usize, usize)) -> Self {
        let (m, n) = dims;
        Self {
            dims,
            theta: vec![0.0; (m - 1) * (n - 1)],
            mu: vec![0.0; m - 1],
            nu: vec![0.0; n - 1],
            global_phase: 0.0,
        }
    }

    pub fn theta_at(&self, a_tilde: usize, a: usize) -> f64 {
        self.theta[theta_index(self.dims.0, a_tilde, a)]
    }

    /// Phases of `Λ` alone, row-major.
    pub fn core_phases(&self) -> Vec<f64> {
        let (m, n) = self.dims;
        let mut out = vec![0.0; m * n];
        for at in 2..=m {
            let da = t_diag(m, at);
            for a in 2..=n {
                let db = t_diag(n, a);
                let t = self.theta_at(at, a);
                for j in 0..m {
                    for k in 0..n {
                        out[j * n + k] += t * da[j] * db[k];
                    }
                }
            }
        }
        out
    }

    /// Phases of `e^{ig} (Z_μ ⊗ Z_ν) · Λ`, row-major.
    pub fn full_phases(&self) -> Vec<f64> {
        let (m, n) = self.dims;
        let za = RotationType::z(m, self.mu.clone()).expect("mu length").z_phases();
        let zb = RotationType::z(n, self.nu.clone()).expect("nu length").z_phases();
        let core = self.core_phases();
        (0..m * n).map(|i| self.global_phase + za[i / n] + zb[i % n] + core[i]).collect()
    }

    pub fn core_matrix(&self) -> ComplexMatrix {
        phase_diagonal(&self.core_phases())
    }
}

/// Least-squares-free fit: the `MN` basis diagonals form a square system.
pub fn fit_core_MN(spec: &DiagonalGateSpec) -> Result<CanonicalCoreMN> {
    spec.validate()?;
    let (m, n) = spec.dims;
    let size = m * n;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(size);
    columns.push(vec![1.0; size]);
    let ones_a = vec![1.0; m];
    let ones_b = vec![1.0; n];
    let outer = |da: &[f64], db: &[f64]| -> Vec<f64> { (0..size).map(|i| da[i / n] * db[i % n]).collect() };
    for a in 2..=n {
        columns.push(outer(&ones_a, &t_diag(n, a)));
    }
    for at in 2..=m {
        columns.push(outer(&t_diag(m, at), &ones_b));
    }
    for a in 2..=n {
        for at in 2..=m {
            columns.push(outer(&t_diag(m, at), &t_diag(n, a)));
        }
    }
    let basis = DMatrix::from_fn(size, size, |i, j| columns[j][i]);
    let x = solve_real(&basis, &spec.phases)?;

    let core = CanonicalCoreMN {
        dims: spec.dims,
        global_phase: x[0],
        nu: x[1..n].to_vec(),
        mu: x[n..n + m - 1].to_vec(),
        theta: x[n + m - 1..].to_vec(),
    };
    let residual = fit_residual(spec, &core);
    if residual > FIT_TOL {
        return Err(Error::Reconstruction { residual, tolerance: FIT_TOL });
    }
    Ok(core)
}

/// Largest wrapped phase difference between the spec and the fitted core.
pub fn fit_residual(spec: &DiagonalGateSpec, core: &CanonicalCoreMN) -> f64 {
    spec.phases.iter().zip(core.full_phases()).map(|(p, q)| wrap_angle(p - q).abs()).fold(0.0, f64::max)
}

/// `Λ(control_value → e^{i·angle·T_{1a}})`, control on A, rotation on B.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaBlock {
    pub control_value: usize,
    pub a: usize,
    pub angle: f64,
}

/// Application order of the four gates realizing one [`LambdaBlock`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockOrder {
    /// `GCX, Z(−θ/2), GCX, Z(θ/2)`.
    GcxFirst,
    /// `Z(θ/2), GCX, Z(−θ/2), GCX`.
    RotationFirst,
}

/// Blocks with the value-0 pieces merged per `a`, or one pair per term.
pub fn lambda_blocks(core: &CanonicalCoreMN, merged: bool) -> Vec<LambdaBlock> {
    let (m, n) = core.dims;
    let mut out = Vec::new();
    for a in 2..=n {
        if merged {
            let total: f64 = (2..=m).map(|at| core.theta_at(at, a)).sum();
            out.push(LambdaBlock { control_value: 0, a, angle: total });
            for at in 2..=m {
                out.push(LambdaBlock { control_value: at - 1, a, angle: -core.theta_at(at, a) });
            }
        } else {
            for at in 2..=m {
                let t = core.theta_at(at, a);
                out.push(LambdaBlock { control_value: 0, a, angle: t });
                out.push(LambdaBlock { control_value: at - 1, a, angle: -t });
            }
        }
    }
    out
}

pub fn block_gates(block: &LambdaBlock, n: usize, order: BlockOrder) -> Vec<Gate> {
    let z = |x: f64| {
        let mut angles = vec![0.0; n - 1];
        angles[block.a - 2] = x;
        Gate::z(Side::B, angles)
    };
    let g = Gate::gcx(Side::A, block.control_value, (0, block.a - 1));
    let half = block.angle / 2.0;
    match order {
        BlockOrder::GcxFirst => vec![g.clone(), z(-half), g, z(half)],
        BlockOrder::RotationFirst => vec![z(half), g.clone(), z(-half), g],
    }
}

fn mark_absorbable(g: &mut Gate) {
    if let Gate::ZRotation { absorbable, .. } = g {
        *absorbable = true;
    }
}

fn compile_blocks(dims: (usize, usize), blocks: &[LambdaBlock], source: &str) -> Circuit {
    let mut c = Circuit::with_source(dims, source);
    let last = blocks.len().saturating_sub(1);
    for (i, b) in blocks.iter().enumerate() {
        let order = if i == 0 { BlockOrder::RotationFirst } else { BlockOrder::GcxFirst };
        let mut gates = block_gates(b, dims.1, order);
        if i == 0 {
            mark_absorbable(&mut gates[0]);
        }
        if i == last {
            mark_absorbable(&mut gates[3]);
        }
        c.extend(gates);
    }
    c
}

/// `Λ` as `2M(N−1)` GCX gates; the first and last z rotations are marked
/// absorbable.
pub fn compile_core_MN(core: &CanonicalCoreMN) -> Circuit {
    compile_blocks(core.dims, &lambda_blocks(core, true), "diagonal_core_MxN")
}

/// One block pair per `θ_{ãa}`, without merging.
pub fn compile_core_MN_unmerged(core: &CanonicalCoreMN) -> Circuit {
    compile_blocks(core.dims, &lambda_blocks(core, false), "diagonal_core_MxN_unmerged")
}

/// Removes the absorbable z rotations at either end of `c`, returning the
/// shortened circuit and the first and last removed rotation as matrices on B.
pub fn absorb_boundary(c: &Circuit) -> Result<(Circuit, Option<ComplexMatrix>, Option<ComplexMatrix>)> {
    let n = c.dims.1;
    let take = |g: Option<&Gate>| -> Result<Option<ComplexMatrix>> {
        match g {
            Some(Gate::ZRotation { side: Side::B, angles, absorbable: true }) => {
                Ok(Some(RotationType::z(n, angles.clone())?.matrix()?))
            }
            _ => Ok(None),
        }
    };
    let mut out = c.clone();
    let first = take(out.gates.first())?;
    if first.is_some() {
        out.gates.remove(0);
    }
    let last = take(out.gates.last())?;
    if last.is_some() {
        out.gates.pop();
    }
    Ok((out, first, last))
}

pub fn paper_counts_MN(m: usize, n: usize) -> PaperCounts {
    PaperCounts { gcx: 2 * m * (n - 1), single_qubit_rotations: 0, rotation_types: 2 * m * (n - 1) + 10 }
}

pub fn synthesize_diagonal_MN(spec: &DiagonalGateSpec) -> Result<Circuit> {
    let core = fit_core_MN(spec)?;
    let (m, n) = spec.dims;
    let (inner, first, last) = absorb_boundary(&compile_core_MN(&core))?;

    let z_mu = RotationType::z(m, core.mu.clone())?.matrix()?;
    let z_nu = RotationType::z(n, core.nu.clone())?.matrix()?;
    let id_b = || crate::linalg::identity(n);
    let u_a = Locals::get(&spec.locals.u_a, m) * z_mu;
    let u_b = Locals::get(&spec.locals.u_b, n) * z_nu * last.unwrap_or_else(id_b);
    let v_a = Locals::get(&spec.locals.v_a, m);
    let v_b = first.unwrap_or_else(id_b) * Locals::get(&spec.locals.v_b, n);

    let mut c = Circuit::with_source(spec.dims, "diagonal_MxN");
    let mut phase = core.global_phase;
    for (side, u) in [(Side::A, &v_a), (Side::B, &v_b)] {
        let (g, p) = local_unitary_gates(side, u)?;
        c.extend(g);
        phase += p;
    }
    c.extend(inner.gates);
    for (side, u) in [(Side::B, &u_b), (Side::A, &u_a)] {
        let (g, p) = local_unitary_gates(side, u)?;
        c.extend(g);
        phase += p;
    }
    c.push(Gate::GlobalPhase { phase: wrap_angle(phase) });

    let residual = dist_up_to_global_phase(&c.evaluate()?, &spec.target())?;
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::Reconstruction { residual, tolerance: RECONSTRUCTION_TOL });
    }
    c.meta = CircuitMeta {
        source: "diagonal_MxN".into(),
        counts: Some(c.counts()),
        paper_counts: Some(paper_counts_MN(m, n)),
        residual: Some(residual),
    };
    Ok(c)
}

/// `e^{iθ T_{1ã} ⊗ T_{1a}}` straight from its diagonal.
pub fn term_matrix(dims: (usize, usize), a_tilde: usize, a: usize, theta: f64) -> ComplexMatrix {
    let (m, n) = dims;
    let da = t_diag(m, a_tilde);
    let db = t_diag(n, a);
    let phases: Vec<f64> = (0..m * n).map(|i| theta * da[i / n] * db[i % n]).collect();
    phase_diagonal(&phases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{count_gates, evaluate, optimize};
    use crate::controlled::{synthesize_controlled_2N, ControlledGateSpec};
    use crate::gates::{controlled_zrot_matrix, Generator};
    use crate::linalg::{c64, expm_i_hermitian, identity, kron};
    use crate::random::{haar_unitary, random_angles, rng_from_seed};
    use std::f64::consts::PI;

    fn random_locals(dims: (usize, usize), rng: &mut crate::random::TestRng) -> Locals {
        Locals {
            u_a: Some(haar_unitary(dims.0, rng)),
            u_b: Some(haar_unitary(dims.1, rng)),
            v_a: Some(haar_unitary(dims.0, rng)),
            v_b: Some(haar_unitary(dims.1, rng)),
        }
    }

    fn exponential_oracle(core: &CanonicalCoreMN) -> ComplexMatrix {
        let (m, n) = core.dims;
        let mut h = ComplexMatrix::zeros(m * n, m * n);
        for at in 2..=m {
            for a in 2..=n {
                let ga = Generator::z(m, at).unwrap().matrix().unwrap();
                let gb = Generator::z(n, a).unwrap().matrix().unwrap();
                h += kron(&ga, &gb) * c64(core.theta_at(at, a), 0.0);
            }
        }
        expm_i_hermitian(&h)
    }

    fn random_core(dims: (usize, usize), rng: &mut crate::random::TestRng) -> CanonicalCoreMN {
        let (m, n) = dims;
        CanonicalCoreMN {
            dims,
            theta: random_angles((m - 1) * (n - 1), rng),
            mu: random_angles(m - 1, rng),
            nu: random_angles(n - 1, rng),
            global_phase: random_angles(1, rng)[0],
        }
    }

    #[test]
    fn zero_phases_fit_zero() {
        let spec = DiagonalGateSpec::new((3, 4), vec![0.0; 12]).unwrap();
        let core = fit_core_MN(&spec).unwrap();
        assert!(core.theta.iter().chain(&core.mu).chain(&core.nu).all(|x| x.abs() < 1e-15));
        assert_eq!(core.global_phase, 0.0);
    }

    #[test]
    fn controlled_z_fit() {
        let spec = DiagonalGateSpec::new((2, 2), vec![0.0, 0.0, 0.0, PI]).unwrap();
        let core = fit_core_MN(&spec).unwrap();
        let q = PI / 4.0;
        assert!((core.theta[0] - q).abs() < 1e-14);
        assert!((core.mu[0] + q).abs() < 1e-14);
        assert!((core.nu[0] + q).abs() < 1e-14);
        assert!((core.global_phase - q).abs() < 1e-14);
    }

    #[test]
    fn random_fits_round_trip() {
        let mut rng = rng_from_seed(34);
        for dims in [(3, 4), (2, 5), (4, 3), (3, 3), (5, 2)] {
            let phases = random_angles(dims.0 * dims.1, &mut rng);
            let spec = DiagonalGateSpec::new(dims, phases).unwrap();
            let core = fit_core_MN(&spec).unwrap();
            assert!(fit_residual(&spec, &core) <= 1e-10);
        }
    }

    #[test]
    fn fit_inverts_generation() {
        let mut rng = rng_from_seed(8);
        let core = random_core((3, 4), &mut rng);
        let spec = DiagonalGateSpec::new((3, 4), core.full_phases()).unwrap();
        let fitted = fit_core_MN(&spec).unwrap();
        for (x, y) in fitted.theta.iter().zip(&core.theta) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn a_major_indexing() {
        assert_eq!(theta_index(3, 2, 2), 0);
        assert_eq!(theta_index(3, 3, 2), 1);
        assert_eq!(theta_index(3, 2, 3), 2);
        assert_eq!(theta_index(3, 3, 3), 3);
        assert_eq!(theta_index(2, 2, 4), 2);
    }

    #[test]
    fn core_phases_match_exponential() {
        let mut rng = rng_from_seed(12);
        let core = random_core((3, 4), &mut rng);
        assert!((core.core_matrix() - exponential_oracle(&core)).norm() < 1e-12);
    }

    #[test]
    fn term_factors_into_two_controlled_rotations() {
        let mut rng = rng_from_seed(37);
        let (m, n) = (4, 3);
        for at in 2..=m {
            for a in 2..=n {
                let t = random_angles(1, &mut rng)[0];
                let mut plus = vec![0.0; n - 1];
                plus[a - 2] = t;
                let minus: Vec<f64> = plus.iter().map(|x| -x).collect();
                let l0 = controlled_zrot_matrix(0, &RotationType::z(n, plus).unwrap(), m).unwrap();
                let l1 = controlled_zrot_matrix(at - 1, &RotationType::z(n, minus).unwrap(), m).unwrap();
                assert!((l0 * l1 - term_matrix((m, n), at, a, t)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn block_orders_agree() {
        let mut rng = rng_from_seed(38);
        for _ in 0..10 {
            let angle = random_angles(1, &mut rng)[0];
            let b = LambdaBlock { control_value: 2, a: 3, angle };
            let mut c1 = Circuit::new((3, 4));
            c1.extend(block_gates(&b, 4, BlockOrder::GcxFirst));
            let mut c2 = Circuit::new((3, 4));
            c2.extend(block_gates(&b, 4, BlockOrder::RotationFirst));
            let e1 = evaluate(&c1).unwrap();
            assert!((&e1 - evaluate(&c2).unwrap()).norm() <= 1e-12);
            let mut z = vec![0.0; 3];
            z[1] = angle;
            let direct = controlled_zrot_matrix(2, &RotationType::z(4, z).unwrap(), 3).unwrap();
            assert!((e1 - direct).norm() <= 1e-12);
        }
    }

    #[test]
    fn merged_and_unmerged_agree() {
        let mut rng = rng_from_seed(39);
        for dims in [(2, 2), (3, 3), (3, 4), (4, 2)] {
            let core = random_core(dims, &mut rng);
            let merged = compile_core_MN(&core);
            let unmerged = compile_core_MN_unmerged(&core);
            let em = evaluate(&merged).unwrap();
            assert!((&em - evaluate(&unmerged).unwrap()).norm() <= 1e-12);
            assert!((em - core.core_matrix()).norm() <= 1e-9);
            assert_eq!(count_gates(&merged).gcx, 2 * dims.0 * (dims.1 - 1));
            assert_eq!(count_gates(&unmerged).gcx, 4 * (dims.0 - 1) * (dims.1 - 1));
        }
    }

    #[test]
    fn qutrit_pair_core_has_twelve_gcx() {
        let mut rng = rng_from_seed(33);
        let c = compile_core_MN(&random_core((3, 3), &mut rng));
        assert_eq!(count_gates(&c).gcx, 12);
        let absorbable = c.gates.iter().filter(|g| matches!(g, Gate::ZRotation { absorbable: true, .. })).count();
        assert_eq!(absorbable, 2);
    }

    #[test]
    fn zero_core_is_identity() {
        let c = compile_core_MN(&CanonicalCoreMN::zero((3, 4)));
        assert!((evaluate(&c).unwrap() - identity(12)).norm() < 1e-15);
        assert!(optimize(&c).gates.is_empty());
    }

    #[test]
    fn absorption_is_sound() {
        let mut rng = rng_from_seed(41);
        let core = random_core((3, 4), &mut rng);
        let c = compile_core_MN(&core);
        let (inner, first, last) = absorb_boundary(&c).unwrap();
        assert_eq!(inner.gates.len(), c.gates.len() - 2);
        let rebuilt =
            kron(&identity(3), &last.unwrap()) * evaluate(&inner).unwrap() * kron(&identity(3), &first.unwrap());
        assert!((rebuilt - evaluate(&c).unwrap()).norm() <= 1e-12);
    }

    #[test]
    fn synthesized_counts() {
        let mut rng = rng_from_seed(42);
        for (dims, gcx, rt) in [((3, 3), 12, 22), ((4, 3), 16, 26), ((3, 4), 18, 28), ((3, 2), 6, 16)] {
            let phases = random_angles(dims.0 * dims.1, &mut rng);
            let locals = random_locals(dims, &mut rng);
            let spec = DiagonalGateSpec::with_locals(dims, phases, locals).unwrap();
            let c = synthesize_diagonal_MN(&spec).unwrap();
            let r = count_gates(&c);
            assert_eq!(r.gcx, gcx);
            assert_eq!(r.rotation_types, rt);
            assert_eq!(r.total_rotations, paper_counts_MN(dims.0, dims.1).rotation_types);
            assert!((evaluate(&c).unwrap() - spec.target()).norm() <= 1e-9);
        }
    }

    #[test]
    fn identity_spec_evaluates_to_identity() {
        let spec = DiagonalGateSpec::new((3, 3), vec![0.0; 9]).unwrap();
        let c = synthesize_diagonal_MN(&spec).unwrap();
        assert!(dist_up_to_global_phase(&evaluate(&c).unwrap(), &identity(9)).unwrap() < 1e-12);
        assert_eq!(count_gates(&c).gcx, 12);
    }

    #[test]
    fn agrees_with_controlled_compiler_for_qubit_control() {
        let mut rng = rng_from_seed(43);
        for n in 2..=5 {
            let phases = random_angles(2 * n, &mut rng);
            let spec = DiagonalGateSpec::new((2, n), phases.clone()).unwrap();
            let cs = ControlledGateSpec::new(phase_diagonal(&phases[..n]), phase_diagonal(&phases[n..])).unwrap();
            let ud = evaluate(&synthesize_diagonal_MN(&spec).unwrap()).unwrap();
            let uc = evaluate(&synthesize_controlled_2N(&cs).unwrap()).unwrap();
            assert!(dist_up_to_global_phase(&ud, &uc).unwrap() <= 1e-9);
            assert!(dist_up_to_global_phase(&ud, &spec.diagonal()).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(DiagonalGateSpec::new((1, 3), vec![0.0; 3]).is_err());
        assert!(DiagonalGateSpec::new((2, 3), vec![0.0; 5]).is_err());
        assert!(DiagonalGateSpec::new((2, 2), vec![0.0, 0.0, f64::NAN, 0.0]).is_err());
        let locals = Locals { u_a: Some(identity(3)), ..Locals::default() };
        assert!(DiagonalGateSpec::with_locals((2, 2), vec![0.0; 4], locals).is_err());
    }
}
