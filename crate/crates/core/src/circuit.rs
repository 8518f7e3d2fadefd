//! Circuit IR shared by both compilers: gate list, evaluation, gate counting,
//! a zero-angle peephole pass and the JSON circuit format.
//!
//! Gates are listed in application order: `gates[0]` acts first, so it is the
//! rightmost factor of the evaluated matrix product.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formats::MatrixFile;
use crate::gates::{GcxGate, RotationType, Side};
use crate::kak::kak_decompose;
use crate::linalg::{cis, identity, kron, phase_diagonal, ComplexMatrix};

/// Angles at or below this magnitude count as zero for [`optimize`].
pub const ZERO_ANGLE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Gcx {
        control: Side,
        control_value: usize,
        swap: (usize, usize),
    },
    YRotation {
        side: Side,
        angles: Vec<f64>,
    },
    /// `absorbable` marks a boundary rotation that may be folded into the
    /// neighbouring local unitary.
    ZRotation {
        side: Side,
        angles: Vec<f64>,
        absorbable: bool,
    },
    LocalUnitary {
        side: Side,
        matrix: ComplexMatrix,
    },
    ControlPhase {
        side: Side,
        phases: Vec<f64>,
    },
    GlobalPhase {
        phase: f64,
    },
}

impl Gate {
    pub fn gcx(control: Side, control_value: usize, swap: (usize, usize)) -> Self {
        Gate::Gcx { control, control_value, swap }
    }

    pub fn z(side: Side, angles: Vec<f64>) -> Self {
        Gate::ZRotation { side, angles, absorbable: false }
    }

    pub fn y(side: Side, angles: Vec<f64>) -> Self {
        Gate::YRotation { side, angles }
    }

    pub fn side(&self) -> Option<Side> {
        match self {
            Gate::Gcx { control, .. } => Some(*control),
            Gate::YRotation { side, .. }
            | Gate::ZRotation { side, .. }
            | Gate::LocalUnitary { side, .. }
            | Gate::ControlPhase { side, .. } => Some(*side),
            Gate::GlobalPhase { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Gate::Gcx { .. } => "gcx",
            Gate::YRotation { .. } => "y_rotation",
            Gate::ZRotation { .. } => "z_rotation",
            Gate::LocalUnitary { .. } => "local_unitary",
            Gate::ControlPhase { .. } => "control_phase",
            Gate::GlobalPhase { .. } => "global_phase",
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, Gate::YRotation { .. } | Gate::ZRotation { .. })
    }

    fn rotation(&self, dims: (usize, usize)) -> Option<Result<RotationType>> {
        match self {
            Gate::YRotation { side, angles } => Some(RotationType::y(side.dim(dims), angles.clone())),
            Gate::ZRotation { side, angles, .. } => Some(RotationType::z(side.dim(dims), angles.clone())),
            _ => None,
        }
    }

    /// Matrix of the gate on the full register `C^M ⊗ C^N`.
    pub fn matrix(&self, dims: (usize, usize)) -> Result<ComplexMatrix> {
        let embed = |side: Side, local: ComplexMatrix| -> Result<ComplexMatrix> {
            if local.shape() != (side.dim(dims), side.dim(dims)) {
                return Err(Error::InvalidGate(format!(
                    "{}-side operator of shape {:?} on register {:?}",
                    side,
                    local.shape(),
                    dims
                )));
            }
            Ok(match side {
                Side::A => kron(&local, &identity(dims.1)),
                Side::B => kron(&identity(dims.0), &local),
            })
        };
        match self {
            Gate::Gcx { control, control_value, swap } => {
                GcxGate::on_register(dims, *control, *control_value, *swap)?.matrix()
            }
            Gate::YRotation { side, .. } | Gate::ZRotation { side, .. } => {
                let r = self.rotation(dims).expect("rotation gate")?;
                embed(*side, r.matrix()?)
            }
            Gate::LocalUnitary { side, matrix } => embed(*side, matrix.clone()),
            Gate::ControlPhase { side, phases } => {
                if phases.len() != side.dim(dims) {
                    return Err(Error::AngleCount { expected: side.dim(dims), got: phases.len() });
                }
                embed(*side, phase_diagonal(phases))
            }
            Gate::GlobalPhase { phase } => Ok(identity(dims.0 * dims.1) * cis(*phase)),
        }
    }

    fn is_zero_rotation(&self) -> bool {
        match self {
            Gate::YRotation { angles, .. } | Gate::ZRotation { angles, .. } => {
                angles.iter().all(|a| a.abs() <= ZERO_ANGLE_TOL)
            }
            _ => false,
        }
    }
}

fn fmt_angles(angles: &[f64]) -> String {
    let parts: Vec<String> = angles.iter().map(|a| format!("{a:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Gcx { control, control_value, swap } => {
                write!(f, "GCX  {control}={control_value} -> X({},{}) on {}", swap.0, swap.1, control.other())
            }
            Gate::YRotation { side, angles } => write!(f, "Ry   {side} {}", fmt_angles(angles)),
            Gate::ZRotation { side, angles, absorbable } => {
                write!(f, "Rz   {side} {}{}", fmt_angles(angles), if *absorbable { " (absorbable)" } else { "" })
            }
            Gate::LocalUnitary { side, matrix } => write!(f, "U    {side} ({}x{})", matrix.nrows(), matrix.ncols()),
            Gate::ControlPhase { side, phases } => write!(f, "Ph   {side} {}", fmt_angles(phases)),
            Gate::GlobalPhase { phase } => write!(f, "e^i  {phase:.4}"),
        }
    }
}

/// Gate tallies. A rotation on party A counts as a single-qubit rotation when
/// `M = 2`; every other rotation counts as a rotation-type. A matrix-valued
/// local unitary stands for its three-rotation factorization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub gcx: usize,
    pub single_qubit_rotations: usize,
    pub rotation_types: usize,
    pub total_rotations: usize,
    pub local_unitaries: usize,
    pub phase_gates: usize,
}

/// Worst-case counts predicted by the closed-form gate-count formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperCounts {
    pub gcx: usize,
    pub single_qubit_rotations: usize,
    pub rotation_types: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<CountReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_counts: Option<PaperCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub dims: (usize, usize),
    pub gates: Vec<Gate>,
    #[serde(default)]
    pub meta: CircuitMeta,
}

impl Circuit {
    pub fn new(dims: (usize, usize)) -> Self {
        Self { dims, gates: Vec::new(), meta: CircuitMeta::default() }
    }

    pub fn with_source(dims: (usize, usize), source: &str) -> Self {
        let mut c = Self::new(dims);
        c.meta.source = source.to_string();
        c
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        self.gates.extend(gates);
    }

    pub fn evaluate(&self) -> Result<ComplexMatrix> {
        evaluate(self)
    }

    pub fn counts(&self) -> CountReport {
        count_gates(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One gate per line, in application order.
    pub fn render_text(&self) -> String {
        let mut out = format!("circuit on C^{} x C^{} ({} gates)\n", self.dims.0, self.dims.1, self.gates.len());
        for (i, g) in self.gates.iter().enumerate() {
            out.push_str(&format!("{i:4}  {g}\n"));
        }
        out
    }
}

/// Ordered product of the gate matrices; the empty circuit is the identity.
pub fn evaluate(c: &Circuit) -> Result<ComplexMatrix> {
    let (m, n) = c.dims;
    let mut acc = identity(m * n);
    for g in &c.gates {
        acc = g.matrix(c.dims)? * acc;
    }
    Ok(acc)
}

pub fn count_gates(c: &Circuit) -> CountReport {
    let mut r = CountReport::default();
    for g in &c.gates {
        let (side, weight) = match g {
            Gate::Gcx { .. } => {
                r.gcx += 1;
                continue;
            }
            Gate::ControlPhase { .. } | Gate::GlobalPhase { .. } => {
                r.phase_gates += 1;
                continue;
            }
            Gate::LocalUnitary { side, .. } => {
                r.local_unitaries += 1;
                (*side, 3)
            }
            Gate::YRotation { side, .. } | Gate::ZRotation { side, .. } => (*side, 1),
        };
        if side == Side::A && c.dims.0 == 2 {
            r.single_qubit_rotations += weight;
        } else {
            r.rotation_types += weight;
        }
        r.total_rotations += weight;
    }
    r
}

/// Drops zero-angle rotations, then cancels adjacent identical GCX pairs,
/// repeating until nothing changes.
pub fn optimize(c: &Circuit) -> Circuit {
    let mut gates: Vec<Gate> = c.gates.iter().filter(|g| !g.is_zero_rotation()).cloned().collect();
    loop {
        let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
        let mut changed = false;
        for g in gates {
            if matches!(g, Gate::Gcx { .. }) && out.last() == Some(&g) {
                out.pop();
                changed = true;
            } else {
                out.push(g);
            }
        }
        gates = out;
        if !changed {
            break;
        }
    }
    let mut result = Circuit { dims: c.dims, gates, meta: c.meta.clone() };
    if result.meta.counts.is_some() {
        result.meta.counts = Some(count_gates(&result));
    }
    result
}

/// Gates realizing a single-party unitary `u` on `side`: `O₂`, `D`, `O₁` as
/// y/z/y rotation-types, or one matrix-valued local when an orthogonal factor
/// has no principal real logarithm. Returns the stripped global phase.
pub fn local_unitary_gates(side: Side, u: &ComplexMatrix) -> Result<(Vec<Gate>, f64)> {
    let k = kak_decompose(u)?;
    match (&k.y_angles1, &k.y_angles2) {
        (Some(a1), Some(a2)) => {
            Ok((vec![Gate::y(side, a2.clone()), Gate::z(side, k.z_angles.clone()), Gate::y(side, a1.clone())], k.phase))
        }
        _ => Ok((vec![Gate::LocalUnitary { side, matrix: u.clone() }], 0.0)),
    }
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    side: Option<Side>,
    params: Value,
}

fn param<T: serde::de::DeserializeOwned>(params: &Value, key: &str) -> Result<T> {
    let v = params.get(key).ok_or_else(|| Error::Parse(format!("missing gate parameter '{key}'")))?;
    Ok(serde_json::from_value(v.clone())?)
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        let params = match g {
            Gate::Gcx { control_value, swap, .. } => {
                json!({ "control_value": control_value, "swap": [swap.0, swap.1] })
            }
            Gate::YRotation { angles, .. } => json!({ "angles": angles }),
            Gate::ZRotation { angles, absorbable, .. } => {
                if *absorbable {
                    json!({ "angles": angles, "absorbable": true })
                } else {
                    json!({ "angles": angles })
                }
            }
            Gate::LocalUnitary { matrix, .. } => json!({ "matrix": MatrixFile::from_matrix(matrix) }),
            Gate::ControlPhase { phases, .. } => json!({ "phases": phases }),
            Gate::GlobalPhase { phase } => json!({ "phase": phase }),
        };
        GateRecord { kind: g.kind_name().to_string(), side: g.side(), params }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = Error;

    fn try_from(r: GateRecord) -> Result<Self> {
        let side = || r.side.ok_or_else(|| Error::Parse(format!("gate '{}' needs a side", r.kind)));
        let p = &r.params;
        Ok(match r.kind.as_str() {
            "gcx" => {
                let swap: [usize; 2] = param(p, "swap")?;
                Gate::Gcx { control: side()?, control_value: param(p, "control_value")?, swap: (swap[0], swap[1]) }
            }
            "y_rotation" => Gate::YRotation { side: side()?, angles: param(p, "angles")? },
            "z_rotation" => Gate::ZRotation {
                side: side()?,
                angles: param(p, "angles")?,
                absorbable: p.get("absorbable").and_then(Value::as_bool).unwrap_or(false),
            },
            "local_unitary" => {
                let m: MatrixFile = param(p, "matrix")?;
                Gate::LocalUnitary { side: side()?, matrix: m.to_matrix()? }
            }
            "control_phase" => Gate::ControlPhase { side: side()?, phases: param(p, "phases")? },
            "global_phase" => Gate::GlobalPhase { phase: param(p, "phase")? },
            other => return Err(Error::Parse(format!("unknown gate kind '{other}'"))),
        })
    }
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GateRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GateRecord::deserialize(d)?;
        Gate::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{cnot, Generator};
    use crate::linalg::{c64, dist_up_to_global_phase, expm_i_hermitian, pauli_z, unitarity_residual};
    use crate::random::{haar_unitary, random_angles, rng_from_seed};
    use proptest::prelude::*;

    /// The 2⊗3 controlled core template: two GCX-sandwiched z-rotations.
    fn qutrit_core_template(t1: f64, t2: f64) -> Circuit {
        let mut c = Circuit::new((2, 3));
        c.push(Gate::gcx(Side::A, 1, (0, 2)));
        c.push(Gate::z(Side::B, vec![0.0, t2]));
        c.push(Gate::gcx(Side::A, 1, (0, 2)));
        c.push(Gate::gcx(Side::A, 1, (0, 1)));
        c.push(Gate::z(Side::B, vec![t1, 0.0]));
        c.push(Gate::gcx(Side::A, 1, (0, 1)));
        c
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new((3, 2));
        assert_eq!(evaluate(&c).unwrap(), identity(6));
        assert_eq!(count_gates(&c), CountReport::default());
    }

    #[test]
    fn single_cnot() {
        let mut c = Circuit::new((2, 2));
        c.push(Gate::gcx(Side::A, 1, (0, 1)));
        assert_eq!(evaluate(&c).unwrap(), cnot());
    }

    #[test]
    fn qutrit_core_template_matches_exponential() {
        let mut rng = rng_from_seed(28);
        for _ in 0..10 {
            let th = random_angles(2, &mut rng);
            let t12 = Generator::z(3, 2).unwrap().matrix().unwrap();
            let t13 = Generator::z(3, 3).unwrap().matrix().unwrap();
            let h = kron(&pauli_z(), &t12) * c64(th[0], 0.0) + kron(&pauli_z(), &t13) * c64(th[1], 0.0);
            let direct = expm_i_hermitian(&h);
            let c = qutrit_core_template(th[0], th[1]);
            assert!((evaluate(&c).unwrap() - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn counts_by_convention() {
        let mut c = qutrit_core_template(0.1, 0.2);
        c.push(Gate::y(Side::A, vec![0.3]));
        c.push(Gate::LocalUnitary { side: Side::B, matrix: identity(3) });
        c.push(Gate::GlobalPhase { phase: 0.5 });
        let r = count_gates(&c);
        assert_eq!(r.gcx, 4);
        assert_eq!(r.single_qubit_rotations, 1);
        assert_eq!(r.rotation_types, 2 + 3);
        assert_eq!(r.total_rotations, 6);
        assert_eq!(r.local_unitaries, 1);
        assert_eq!(r.phase_gates, 1);
    }

    #[test]
    fn optimize_drops_zero_blocks() {
        let c = qutrit_core_template(0.0, 0.0);
        let o = optimize(&c);
        assert!(o.gates.is_empty());

        let c = qutrit_core_template(0.7, 0.0);
        let o = optimize(&c);
        assert_eq!(count_gates(&o).gcx, count_gates(&c).gcx - 2);
        assert!((evaluate(&o).unwrap() - evaluate(&c).unwrap()).norm() <= 1e-12);

        let c = qutrit_core_template(0.7, -0.4);
        assert_eq!(count_gates(&optimize(&c)), count_gates(&c));
    }

    #[test]
    fn malformed_gates_rejected() {
        let mut c = Circuit::new((2, 3));
        c.push(Gate::z(Side::B, vec![0.1]));
        assert!(matches!(evaluate(&c), Err(Error::AngleCount { .. })));
        let mut c = Circuit::new((2, 3));
        c.push(Gate::gcx(Side::A, 2, (0, 1)));
        assert!(evaluate(&c).is_err());
        let mut c = Circuit::new((2, 3));
        c.push(Gate::LocalUnitary { side: Side::A, matrix: identity(3) });
        assert!(matches!(evaluate(&c), Err(Error::InvalidGate(_))));
    }

    #[test]
    fn json_field_names() {
        let mut c = Circuit::with_source((2, 2), "test");
        c.push(Gate::gcx(Side::A, 1, (0, 1)));
        c.push(Gate::GlobalPhase { phase: 0.25 });
        let v: Value = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(v["dims"], json!([2, 2]));
        assert_eq!(v["gates"][0], json!({"kind": "gcx", "side": "A", "params": {"control_value": 1, "swap": [0, 1]}}));
        assert_eq!(v["gates"][1], json!({"kind": "global_phase", "params": {"phase": 0.25}}));
        assert_eq!(v["meta"]["source"], json!("test"));
    }

    #[test]
    fn json_rejects_unknown_kind() {
        let s = r#"{"dims":[2,2],"gates":[{"kind":"toffoli","side":"A","params":{}}],"meta":{"source":""}}"#;
        assert!(Circuit::from_json(s).is_err());
    }

    #[test]
    fn local_unitary_gates_reconstruct() {
        let mut rng = rng_from_seed(5);
        for n in 2..=5 {
            let u = haar_unitary(n, &mut rng);
            let (gates, phase) = local_unitary_gates(Side::B, &u).unwrap();
            assert_eq!(gates.len(), 3);
            let mut c = Circuit::new((2, n));
            c.extend(gates);
            c.push(Gate::GlobalPhase { phase });
            let target = kron(&identity(2), &u);
            assert!((evaluate(&c).unwrap() - target).norm() <= 1e-9);
        }
    }

    fn arbitrary_circuit(seed: u64) -> Circuit {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let dims = (rng.random_range(2..=4), rng.random_range(2..=4));
        let mut c = Circuit::with_source(dims, "random");
        for _ in 0..rng.random_range(0..12) {
            let side = if rng.random_bool(0.5) { Side::A } else { Side::B };
            let d = side.dim(dims);
            let od = side.other().dim(dims);
            let g = match rng.random_range(0..6) {
                0 => {
                    let i = rng.random_range(0..od - 1);
                    let j = rng.random_range(i + 1..od);
                    Gate::gcx(side, rng.random_range(0..d), (i, j))
                }
                1 => Gate::y(side, random_angles(d * (d - 1) / 2, &mut rng)),
                2 => Gate::ZRotation { side, angles: random_angles(d - 1, &mut rng), absorbable: rng.random_bool(0.3) },
                3 => Gate::LocalUnitary { side, matrix: haar_unitary(d, &mut rng) },
                4 => Gate::ControlPhase { side, phases: random_angles(d, &mut rng) },
                _ => Gate::GlobalPhase { phase: random_angles(1, &mut rng)[0] },
            };
            c.push(g);
        }
        c
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(seed in 0u64..1_000_000) {
            let c = arbitrary_circuit(seed);
            let parsed = Circuit::from_json(&c.to_json().unwrap()).unwrap();
            prop_assert_eq!(&parsed, &c);
        }

        #[test]
        fn evaluation_is_unitary(seed in 0u64..1_000_000) {
            let c = arbitrary_circuit(seed);
            prop_assert!(unitarity_residual(&evaluate(&c).unwrap()) <= 1e-9);
        }

        #[test]
        fn repeated_gcx_cancels(seed in 0u64..1_000_000, pos in 0usize..12) {
            let mut c = arbitrary_circuit(seed);
            let (m, n) = c.dims;
            let g = Gate::gcx(Side::A, m - 1, (0, n - 1));
            let at = pos.min(c.gates.len());
            let mut doubled = c.clone();
            doubled.gates.insert(at, g.clone());
            doubled.gates.insert(at, g);
            let d = (evaluate(&doubled).unwrap() - evaluate(&c).unwrap()).norm();
            prop_assert!(d <= 1e-12);
            c.meta.source.clear();
        }

        #[test]
        fn optimize_preserves_evaluation(seed in 0u64..1_000_000) {
            let mut c = arbitrary_circuit(seed);
            // sprinkle zero rotations and GCX pairs
            let (m, n) = c.dims;
            c.gates.insert(0, Gate::z(Side::B, vec![0.0; n - 1]));
            c.push(Gate::gcx(Side::B, n - 1, (0, m - 1)));
            c.push(Gate::y(Side::A, vec![0.0; m * (m - 1) / 2]));
            c.push(Gate::gcx(Side::B, n - 1, (0, m - 1)));
            let o = optimize(&c);
            let d = dist_up_to_global_phase(&evaluate(&o).unwrap(), &evaluate(&c).unwrap()).unwrap();
            prop_assert!(d <= 1e-12);
            prop_assert!(o.gates.len() < c.gates.len());
        }
    }
}
