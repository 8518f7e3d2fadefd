use std::path::Path;
use std::process::{Command, Output};

use bisynth::circuit::{Circuit, Gate};
use bisynth::formats::{CoreFile, MatrixFile, SynthesisInput};
use bisynth::gates::cnot;
use bisynth::linalg::{c64, identity, pauli_z, ComplexMatrix};
use bisynth::random::{haar_unitary, rng_from_seed};
use serde_json::Value;
use tempfile::TempDir;

fn bisynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bisynth")).args(args).output().unwrap()
}

fn write_json<T: serde::Serialize>(dir: &TempDir, name: &str, v: &T) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn controlled(u0: &ComplexMatrix, u1: &ComplexMatrix) -> SynthesisInput {
    SynthesisInput::Controlled { blocks: vec![MatrixFile::from_matrix(u0), MatrixFile::from_matrix(u1)], locals: None }
}

fn swap2() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(i, j)] = c64(1.0, 0.0);
    }
    s
}

#[test]
fn synthesize_controlled_z() {
    let dir = TempDir::new().unwrap();
    let input = write_json(&dir, "cz.json", &controlled(&identity(2), &pauli_z()));
    let out = bisynth(&["synthesize", &input]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["dims"], serde_json::json!([2, 2]));
    assert_eq!(v["meta"]["counts"]["gcx"], 2);
    assert!(v["meta"]["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn synthesize_identity_blocks_and_optimize() {
    let dir = TempDir::new().unwrap();
    let input = write_json(&dir, "id.json", &controlled(&identity(3), &identity(3)));
    let out = bisynth(&["synthesize", &input]);
    assert_eq!(out.status.code(), Some(0));
    let c: Circuit = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(c.counts().gcx, 4);
    let out = bisynth(&["synthesize", &input, "--optimize"]);
    let c: Circuit = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(c.counts().gcx, 0);
}

#[test]
fn synthesize_writes_output_file_and_summary() {
    let dir = TempDir::new().unwrap();
    let input = write_json(
        &dir,
        "diag.json",
        &SynthesisInput::Diagonal { dims: (3, 3), phases: (0..9).map(|k| 0.3 * k as f64).collect(), locals: None },
    );
    let out_path = dir.path().join("circuit.json");
    let out = bisynth(&["synthesize", &input, "-o", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout_json(&out);
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["counts"]["gcx"], 12);
    let c = Circuit::from_json(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(c.counts().rotation_types, 22);
}

#[test]
fn non_unitary_block_is_rejected() {
    let dir = TempDir::new().unwrap();
    let mut bad = identity(2);
    bad[(0, 1)] = c64(0.5, 0.0);
    let input = write_json(&dir, "bad.json", &controlled(&identity(2), &bad));
    let out = bisynth(&["synthesize", &input]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "not_unitary");
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{\"neither\": 1}").unwrap();
    let out = bisynth(&["synthesize", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
}

#[test]
fn verify_empty_circuit_against_identity() {
    let dir = TempDir::new().unwrap();
    let circuit = write_json(&dir, "empty.json", &Circuit::new((2, 3)));
    let target = write_json(&dir, "id.json", &MatrixFile::from_matrix(&identity(6)));
    let out = bisynth(&["verify", &circuit, &target]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["residual"], 0.0);
}

#[test]
fn verify_detects_corrupted_angle() {
    let dir = TempDir::new().unwrap();
    let mut rng = rng_from_seed(77);
    let (u0, u1) = (haar_unitary(3, &mut rng), haar_unitary(3, &mut rng));
    let input = write_json(&dir, "in.json", &controlled(&u0, &u1));
    let circuit_path = dir.path().join("c.json");
    assert!(bisynth(&["synthesize", &input, "-o", circuit_path.to_str().unwrap()]).status.success());
    let mut target = ComplexMatrix::zeros(6, 6);
    target.view_mut((0, 0), (3, 3)).copy_from(&u0);
    target.view_mut((3, 3), (3, 3)).copy_from(&u1);
    let target = write_json(&dir, "t.json", &MatrixFile::from_matrix(&target));

    let out = bisynth(&["verify", circuit_path.to_str().unwrap(), &target]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["residual"].as_f64().unwrap() <= 1e-9);

    let mut c = Circuit::from_json(&std::fs::read_to_string(&circuit_path).unwrap()).unwrap();
    let z = c.gates.iter_mut().find(|g| matches!(g, Gate::ZRotation { .. })).unwrap();
    if let Gate::ZRotation { angles, .. } = z {
        angles[0] += 0.1;
    }
    let corrupted = write_json(&dir, "bad.json", &c);
    let out = bisynth(&["verify", &corrupted, &target]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert!(v["residual"].as_f64().unwrap() > 1e-3);
    assert_eq!(v["pass"], false);
}

#[test]
fn verify_dimension_mismatch() {
    let dir = TempDir::new().unwrap();
    let circuit = write_json(&dir, "empty.json", &Circuit::new((2, 3)));
    let target = write_json(&dir, "id.json", &MatrixFile::from_matrix(&identity(4)));
    let out = bisynth(&["verify", &circuit, &target]);
    assert_eq!(out.status.code(), Some(2));
}

fn schmidt_rank_of(dir: &TempDir, name: &str, u: &ComplexMatrix, dims: [&str; 2]) -> Value {
    let path = write_json(dir, name, &MatrixFile::from_matrix(u));
    let out = bisynth(&["schmidt", &path, "--dims", dims[0], dims[1]]);
    assert_eq!(out.status.code(), Some(0));
    stdout_json(&out)
}

#[test]
fn schmidt_reports() {
    let dir = TempDir::new().unwrap();
    let v = schmidt_rank_of(&dir, "cnot.json", &cnot(), ["2", "2"]);
    assert_eq!(v["rank"], 2);
    assert_eq!(v["k_har"], 1.0);
    assert_eq!(schmidt_rank_of(&dir, "id.json", &identity(6), ["2", "3"])["rank"], 1);
    let v = schmidt_rank_of(&dir, "swap.json", &swap2(), ["2", "2"]);
    assert_eq!(v["rank"], 4);
    assert_eq!(v["singular_values"].as_array().unwrap().len(), 4);
}

#[test]
fn schmidt_rejects_unfactorable_dims() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "id.json", &MatrixFile::from_matrix(&identity(6)));
    let out = bisynth(&["schmidt", &path, "--dims", "2", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "not_factorable");
}

#[test]
fn expand_dispatches_by_dims() {
    let dir = TempDir::new().unwrap();
    let zero = write_json(&dir, "zero.json", &CoreFile { dims: (2, 2), theta: vec![0.0] });
    let v = stdout_json(&bisynth(&["expand", &zero]));
    assert_eq!(v["expansion"]["source"], "closed_form_2x2");
    assert_eq!(v["expansion"]["terms"][0]["coefficient"], serde_json::json!([1.0, 0.0]));
    assert_eq!(v["expansion"]["terms"][1]["coefficient"], serde_json::json!([0.0, 0.0]));

    let qutrit = write_json(&dir, "q.json", &CoreFile { dims: (2, 3), theta: vec![0.4, -0.9] });
    let v = stdout_json(&bisynth(&["expand", &qutrit]));
    assert_eq!(v["expansion"]["terms"].as_array().unwrap().len(), 6);
    assert!(v["residual"].as_f64().unwrap() <= 1e-12);

    let big = write_json(&dir, "big.json", &CoreFile { dims: (4, 4), theta: vec![0.25; 9] });
    let out = bisynth(&["expand", &big]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["expansion"]["source"], "numeric_projection");
    assert!(v["notice"].is_string());
    assert!(String::from_utf8_lossy(&out.stderr).contains("numeric projection"));
    assert!(v["residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn selftest_text_table() {
    let out = bisynth(&["selftest", "--dims", "2", "3", "--cases", "2", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.ends_with("PASS")).count() == 2, "{text}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let mut rng = rng_from_seed(5);
    let input = write_json(&dir, "in.json", &controlled(&haar_unitary(4, &mut rng), &haar_unitary(4, &mut rng)));
    let a = bisynth(&["synthesize", &input]).stdout;
    let b = bisynth(&["synthesize", &input]).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(Path::new(&input).exists());
}
