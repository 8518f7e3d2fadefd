//! Controlled-unitaries `|0><0| ⊗ U₀ + |1><1| ⊗ U₁` on `C^2 ⊗ C^N`.
//!
//! The gate factors as
//! `(diag(e^{iα₀}, e^{iα₁}) ⊗ U_B) · exp(i Σ_k θ_k σ_z ⊗ T_{1,k+1}) · (I ⊗ V_B)`,
//! and each term of the exponential compiles to two GCX gates around a
//! z rotation-type on B.

#![allow(non_snake_case)]

use serde::{Deserialize, Serialize};

use crate::circuit::{local_unitary_gates, Circuit, CircuitMeta, Gate, PaperCounts};
use crate::error::{Error, Result};
use crate::formats::Locals;
use crate::gates::{RotationType, Side};
use crate::linalg::{
    block_diagonal, check_unitary, cis, dist_up_to_global_phase, eig_unitary, identity, kron, phase_diagonal,
    ComplexMatrix, RECONSTRUCTION_TOL, UNITARITY_TOL,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ControlledGateSpec {
    pub n: usize,
    pub blocks: Vec<ComplexMatrix>,
    /// Outer locals; the target is `(U_A ⊗ U_B) · Σ|i><i|⊗U_i · (V_A ⊗ V_B)`.
    pub locals: Locals,
}

impl ControlledGateSpec {
    pub fn new(u0: ComplexMatrix, u1: ComplexMatrix) -> Result<Self> {
        Self::with_locals(vec![u0, u1], Locals::default())
    }

    pub fn with_locals(blocks: Vec<ComplexMatrix>, locals: Locals) -> Result<Self> {
        let n = blocks.first().map(|b| b.nrows()).unwrap_or(0);
        let spec = Self { n, blocks, locals };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.len() != 2 {
            return Err(Error::DimensionMismatch(format!("controlled gate needs 2 blocks, got {}", self.blocks.len())));
        }
        if self.n < 2 {
            return Err(Error::DimensionMismatch(format!("target dimension {} < 2", self.n)));
        }
        for b in &self.blocks {
            if b.shape() != (self.n, self.n) {
                return Err(Error::DimensionMismatch(format!(
                    "block of shape {:?}, expected {}x{}",
                    b.shape(),
                    self.n,
                    self.n
                )));
            }
            check_unitary(b, UNITARITY_TOL)?;
        }
        self.locals.validate(self.dims())
    }

    pub fn dims(&self) -> (usize, usize) {
        (2, self.n)
    }

    pub fn target(&self) -> ComplexMatrix {
        self.locals.sandwich(self.dims(), &block_diagonal(&self.blocks))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCore2N {
    pub theta: Vec<f64>,
    pub alpha0: f64,
    pub alpha1: f64,
    pub global_phase: f64,
}

impl CanonicalCore2N {
    pub fn n(&self) -> usize {
        self.theta.len() + 1
    }

    /// `exp(i Σ θ_k σ_z ⊗ T_{1,k+1})`, without the control phases.
    pub fn exponential(&self) -> ComplexMatrix {
        let z = RotationType::z(self.n(), self.theta.clone()).expect("angle count fixed by construction");
        let phases = z.z_phases();
        let conj: Vec<f64> = phases.iter().map(|p| -p).collect();
        block_diagonal(&[phase_diagonal(&phases), phase_diagonal(&conj)])
    }

    /// `e^{iγ} (diag(e^{iα₀}, e^{iα₁}) ⊗ I) · exponential()`.
    pub fn matrix(&self) -> ComplexMatrix {
        kron(&phase_diagonal(&[self.alpha0, self.alpha1]), &identity(self.n()))
            * self.exponential()
            * cis(self.global_phase)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlledDecomposition {
    pub u_a: ComplexMatrix,
    pub u_b: ComplexMatrix,
    pub core: CanonicalCore2N,
    pub v_a: ComplexMatrix,
    pub v_b: ComplexMatrix,
}

impl ControlledDecomposition {
    /// `(U_A ⊗ U_B) · exp(...) · (V_A ⊗ V_B) · e^{iγ}`; the control phases live in `U_A`.
    pub fn recompose(&self) -> ComplexMatrix {
        kron(&self.u_a, &self.u_b) * self.core.exponential() * kron(&self.v_a, &self.v_b) * cis(self.core.global_phase)
    }
}

pub fn decompose_controlled_2N(spec: &ControlledGateSpec) -> Result<ControlledDecomposition> {
    spec.validate()?;
    let n = spec.n;
    let outer_ub = Locals::get(&spec.locals.u_b, n);
    let outer_vb = Locals::get(&spec.locals.v_b, n);
    let u0 = &outer_ub * &spec.blocks[0] * &outer_vb;
    let u1 = &outer_ub * &spec.blocks[1] * &outer_vb;

    let w = &u0 * u1.adjoint();
    let eig = eig_unitary(&w)?;
    let phi = eig.phases();
    let mean = phi.iter().sum::<f64>() / n as f64;
    let l: Vec<f64> = phi.iter().map(|p| (p - mean) / 2.0).collect();
    let alpha0 = mean / 2.0;
    let alpha1 = -mean / 2.0;
    let theta: Vec<f64> = l[1..].iter().map(|x| -x).collect();

    let u_b = eig.vectors.clone();
    let neg_l: Vec<f64> = l.iter().map(|x| -x).collect();
    let v_b = phase_diagonal(&neg_l) * u_b.adjoint() * &u0 * cis(-alpha0);

    let control = phase_diagonal(&[alpha0, alpha1]);
    let u_a = Locals::get(&spec.locals.u_a, 2) * control;
    let v_a = Locals::get(&spec.locals.v_a, 2);
    let core = CanonicalCore2N { theta, alpha0, alpha1, global_phase: 0.0 };
    Ok(ControlledDecomposition { u_a, u_b, core, v_a, v_b })
}

/// The GCX-sandwiched z rotations of the core, in application order.
fn core_triples(theta: &[f64]) -> Vec<Gate> {
    let n_minus_1 = theta.len();
    let mut gates = Vec::with_capacity(3 * n_minus_1);
    for (k, &t) in theta.iter().enumerate() {
        let mut angles = vec![0.0; n_minus_1];
        angles[k] = t;
        let g = Gate::gcx(Side::A, 1, (0, k + 1));
        gates.push(g.clone());
        gates.push(Gate::z(Side::B, angles));
        gates.push(g);
    }
    gates
}

pub fn compile_core_2N(core: &CanonicalCore2N) -> Circuit {
    let mut c = Circuit::with_source((2, core.n()), "controlled_core_2xN");
    c.extend(core_triples(&core.theta));
    c.push(Gate::ControlPhase { side: Side::A, phases: vec![core.alpha0, core.alpha1] });
    if core.global_phase != 0.0 {
        c.push(Gate::GlobalPhase { phase: core.global_phase });
    }
    c
}

pub fn paper_counts_2N(n: usize) -> PaperCounts {
    PaperCounts { gcx: 2 * (n - 1), single_qubit_rotations: 6, rotation_types: n + 5 }
}

/// Full circuit: `V_A`, `V_B`, core, `U_B`, `U_A`, each local as three
/// rotations, with the stripped phases collected in one global-phase gate.
pub fn synthesize_controlled_2N(spec: &ControlledGateSpec) -> Result<Circuit> {
    let d = decompose_controlled_2N(spec)?;
    let dims = spec.dims();
    let mut c = Circuit::with_source(dims, "controlled_2xN");
    let mut phase = d.core.global_phase;
    for (side, u) in [(Side::A, &d.v_a), (Side::B, &d.v_b)] {
        let (g, p) = local_unitary_gates(side, u)?;
        c.extend(g);
        phase += p;
    }
    c.extend(core_triples(&d.core.theta));
    for (side, u) in [(Side::B, &d.u_b), (Side::A, &d.u_a)] {
        let (g, p) = local_unitary_gates(side, u)?;
        c.extend(g);
        phase += p;
    }
    c.push(Gate::GlobalPhase { phase });
    let residual = dist_up_to_global_phase(&c.evaluate()?, &spec.target())?;
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::Reconstruction { residual, tolerance: RECONSTRUCTION_TOL });
    }
    c.meta = CircuitMeta {
        source: "controlled_2xN".into(),
        counts: Some(c.counts()),
        paper_counts: Some(paper_counts_2N(spec.n)),
        residual: Some(residual),
    };
    Ok(c)
}
