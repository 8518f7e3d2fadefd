//! wasm-bindgen bindings behind `www/index.html`. Every export takes plain
//! numbers or a JSON string and returns a JSON string; failures come back as
//! `{"error": {"kind", "message"}}` instead of throwing.

use bisynth::circuit::CountReport;
use bisynth::controlled::{decompose_controlled_2N, synthesize_controlled_2N, ControlledGateSpec};
use bisynth::diagonal::CanonicalCoreMN;
use bisynth::linalg::{dist_up_to_global_phase, RANK_TOL};
use bisynth::random::{haar_unitary, rng_from_seed};
use bisynth::schmidt::{
    expand_core_2N, expand_core_2x2, expand_core_3x3, expand_core_MN_numeric, schmidt_rank, DiagonalExpansion,
    SchmidtReport,
};
use bisynth::Error;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_DIM: usize = 8;

#[derive(Serialize)]
struct Term {
    re: f64,
    im: f64,
    label: String,
}

#[derive(Serialize)]
struct CoreAnalysis {
    dims: (usize, usize),
    terms: Vec<Term>,
    source: String,
    residual: f64,
    schmidt: SchmidtReport,
}

#[derive(Serialize)]
struct SynthesisDemo {
    n: usize,
    seed: u32,
    theta: Vec<f64>,
    circuit_text: String,
    counts: CountReport,
    residual: f64,
}

fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

fn parse_angles(json: &str) -> Result<Vec<f64>, Error> {
    let v: Vec<f64> = serde_json::from_str(json)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse("angles must be finite".into()));
    }
    Ok(v)
}

fn check_dim(d: usize) -> Result<(), Error> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("dimension {d} outside 2..={MAX_DIM}")))
    }
}

fn analysis(expansion: DiagonalExpansion, core: &CanonicalCoreMN) -> Result<CoreAnalysis, Error> {
    let (m, n) = core.dims;
    let target = core.core_matrix();
    let residual = (expansion.reconstruct()? - &target).norm();
    let terms = expansion
        .terms
        .iter()
        .map(|t| Term {
            re: t.coefficient.re, im: t.coefficient.im, label: format!("{} ⊗ {}", t.a_factor, t.b_factor)
        })
        .collect();
    let source = serde_json::to_value(expansion.source)?.as_str().unwrap_or_default().to_string();
    Ok(CoreAnalysis { dims: (m, n), terms, source, residual, schmidt: schmidt_rank(&target, m, n, RANK_TOL)? })
}

/// Closed-form expansion and Schmidt spectrum of the `2 ⊗ N` core with the
/// given angles (`N − 1` of them).
pub fn analyze_core_2n(theta_json: &str) -> Result<String, Error> {
    let theta = parse_angles(theta_json)?;
    let n = theta.len() + 1;
    check_dim(n)?;
    let expansion = if n == 2 { expand_core_2x2(theta[0]) } else { expand_core_2N(&theta) };
    let core = CanonicalCoreMN { theta, ..CanonicalCoreMN::zero((2, n)) };
    Ok(serde_json::to_string(&analysis(expansion, &core)?)?)
}

/// Expansion of the `M ⊗ N` core; closed form at `3 ⊗ 3`, numeric otherwise.
pub fn analyze_core_mn(m: usize, n: usize, theta_json: &str) -> Result<String, Error> {
    check_dim(m)?;
    check_dim(n)?;
    let theta = parse_angles(theta_json)?;
    let expected = (m - 1) * (n - 1);
    if theta.len() != expected {
        return Err(Error::AngleCount { expected, got: theta.len() });
    }
    let core = CanonicalCoreMN { theta: theta.clone(), ..CanonicalCoreMN::zero((m, n)) };
    let expansion = match (m, n) {
        (3, 3) => expand_core_3x3(&[theta[0], theta[1], theta[2], theta[3]]),
        _ => expand_core_MN_numeric(&core)?,
    };
    Ok(serde_json::to_string(&analysis(expansion, &core)?)?)
}

/// Synthesizes a random controlled-unitary on `C^2 ⊗ C^N`.
pub fn random_controlled(n: usize, seed: u32) -> Result<String, Error> {
    check_dim(n)?;
    let mut rng = rng_from_seed(seed as u64);
    let spec = ControlledGateSpec::new(haar_unitary(n, &mut rng), haar_unitary(n, &mut rng))?;
    let circuit = synthesize_controlled_2N(&spec)?;
    let residual = dist_up_to_global_phase(&circuit.evaluate()?, &spec.target())?;
    let theta = decompose_controlled_2N(&spec)?.core.theta;
    let demo =
        SynthesisDemo { n, seed, theta, circuit_text: circuit.render_text(), counts: circuit.counts(), residual };
    Ok(serde_json::to_string(&demo)?)
}

#[wasm_bindgen(js_name = analyzeCore2N)]
pub fn analyze_core_2n_js(theta_json: &str) -> String {
    analyze_core_2n(theta_json).unwrap_or_else(|e| error_json(&e))
}

#[wasm_bindgen(js_name = analyzeCoreMN)]
pub fn analyze_core_mn_js(m: u32, n: u32, theta_json: &str) -> String {
    analyze_core_mn(m as usize, n as usize, theta_json).unwrap_or_else(|e| error_json(&e))
}

#[wasm_bindgen(js_name = randomControlled)]
pub fn random_controlled_js(n: u32, seed: u32) -> String {
    random_controlled(n as usize, seed).unwrap_or_else(|e| error_json(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn qubit_core_at_zero_is_rank_one() {
        let v = parse(&analyze_core_2n("[0.0]").unwrap());
        assert_eq!(v["schmidt"]["rank"], 1);
        assert_eq!(v["source"], "closed_form_2x2");
        assert_eq!(v["terms"][0]["re"], 1.0);
    }

    #[test]
    fn two_by_n_core_analysis() {
        let v = parse(&analyze_core_2n("[0.3, -0.8, 1.1]").unwrap());
        assert_eq!(v["terms"].as_array().unwrap().len(), 8);
        assert_eq!(v["schmidt"]["rank"], 2);
        assert!(v["residual"].as_f64().unwrap() <= 1e-12);
    }

    #[test]
    fn mn_core_uses_closed_form_at_three() {
        let v = parse(&analyze_core_mn(3, 3, "[0.1, 0.2, 0.3, 0.4]").unwrap());
        assert_eq!(v["source"], "closed_form_3x3");
        let v = parse(&analyze_core_mn(3, 4, "[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]").unwrap());
        assert_eq!(v["source"], "numeric_projection");
        assert!(v["schmidt"]["rank"].as_u64().unwrap() <= 12);
    }

    #[test]
    fn random_controlled_is_deterministic() {
        let a = random_controlled(3, 7).unwrap();
        assert_eq!(a, random_controlled(3, 7).unwrap());
        let v = parse(&a);
        assert_eq!(v["counts"]["gcx"], 4);
        assert!(v["residual"].as_f64().unwrap() <= 1e-9);
    }

    #[test]
    fn errors_come_back_as_json() {
        let v = parse(&analyze_core_mn_js(3, 3, "[0.1]"));
        assert_eq!(v["error"]["kind"], "angle_count");
        let v = parse(&analyze_core_2n_js("not json"));
        assert_eq!(v["error"]["kind"], "parse");
        let v = parse(&random_controlled_js(20, 1));
        assert_eq!(v["error"]["kind"], "dimension_mismatch");
    }
}
