//! Command-line front end. [`run`] does all the work and returns what would be
//! printed, so the binary is a thin wrapper and the commands are testable
//! in-process.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::circuit::{optimize, Circuit, CountReport};
use crate::controlled::{synthesize_controlled_2N, ControlledGateSpec};
use crate::diagonal::{synthesize_diagonal_MN, CanonicalCoreMN, DiagonalGateSpec};
use crate::error::{Error, Result};
use crate::formats::{CoreFile, LocalsFile, MatrixFile, SynthesisInput};
use crate::linalg::{dist_up_to_global_phase, RANK_TOL, RECONSTRUCTION_TOL};
use crate::random::{haar_unitary, random_angles, rng_from_seed};
use crate::schmidt::{
    expand_core_2N, expand_core_2x2, expand_core_3x3, expand_core_MN_numeric, schmidt_rank, DiagonalExpansion,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bisynth", version, about = "Synthesize and analyze bipartite qudit gates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format for reports.
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a controlled or locally diagonal gate into a GCX circuit.
    Synthesize(SynthesizeArgs),
    /// Compare a circuit file against a target matrix.
    Verify(VerifyArgs),
    /// Operator Schmidt spectrum and rank of a matrix.
    Schmidt(SchmidtArgs),
    /// Product expansion of a canonical diagonal core.
    Expand(ExpandArgs),
    /// Random round-trip corpus with a pass/fail table.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = RECONSTRUCTION_TOL)]
    pub tol: f64,
    /// Drop zero-angle rotations and the GCX pairs around them.
    #[arg(long)]
    pub optimize: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub circuit: PathBuf,
    pub target: PathBuf,
    #[arg(long, default_value_t = RECONSTRUCTION_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SchmidtArgs {
    pub input: PathBuf,
    #[arg(long, num_args = 2, value_names = ["M", "N"], required = true)]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = RANK_TOL)]
    pub rank_tol: f64,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    pub input: PathBuf,
    /// Skip the closed forms and always project numerically.
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, num_args = 2, value_names = ["M", "N"])]
    pub dims: Option<Vec<usize>>,
    #[arg(long, default_value_t = 10)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = RECONSTRUCTION_TOL)]
    pub tol: f64,
}

/// What a command produced: exit code plus the two output streams.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Self { code, stdout, stderr: String::new() }
    }
}

pub fn error_json(e: &Error) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Synthesize(a) => cmd_synthesize(a, cli.format),
        Command::Verify(a) => cmd_verify(a, cli.format),
        Command::Schmidt(a) => cmd_schmidt(a, cli.format),
        Command::Expand(a) => cmd_expand(a, cli.format),
        Command::Selftest(a) => cmd_selftest(a, cli.format),
    };
    result.unwrap_or_else(|e| {
        let code = match e {
            Error::Reconstruction { .. } => EXIT_VERIFY_FAILED,
            _ => EXIT_BAD_INPUT,
        };
        Outcome { code, stdout: String::new(), stderr: error_json(&e) + "\n" }
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn dims_pair(v: &[usize]) -> Result<(usize, usize)> {
    match v {
        [m, n] if *m >= 1 && *n >= 1 => Ok((*m, *n)),
        _ => Err(Error::Parse(format!("--dims expects two positive integers, got {v:?}"))),
    }
}

fn locals_or_default(l: &Option<LocalsFile>) -> Result<crate::formats::Locals> {
    l.as_ref().map(LocalsFile::to_locals).transpose().map(Option::unwrap_or_default)
}

/// Builds and verifies the circuit for a synthesis input file.
pub fn synthesize_input(input: &SynthesisInput, optimize_flag: bool) -> Result<(Circuit, f64)> {
    let (mut circuit, target) = match input {
        SynthesisInput::Controlled { blocks, locals } => {
            let blocks = blocks.iter().map(MatrixFile::to_matrix).collect::<Result<Vec<_>>>()?;
            let spec = ControlledGateSpec::with_locals(blocks, locals_or_default(locals)?)?;
            (synthesize_controlled_2N(&spec)?, spec.target())
        }
        SynthesisInput::Diagonal { dims, phases, locals } => {
            let spec = DiagonalGateSpec::with_locals(*dims, phases.clone(), locals_or_default(locals)?)?;
            (synthesize_diagonal_MN(&spec)?, spec.target())
        }
    };
    if optimize_flag {
        circuit = optimize(&circuit);
    }
    let residual = dist_up_to_global_phase(&circuit.evaluate()?, &target)?;
    circuit.meta.residual = Some(residual);
    circuit.meta.counts = Some(circuit.counts());
    Ok((circuit, residual))
}

fn cmd_synthesize(a: &SynthesizeArgs, format: Format) -> Result<Outcome> {
    let input: SynthesisInput = read_json(&a.input)?;
    let (circuit, residual) = synthesize_input(&input, a.optimize)?;
    let pass = residual <= a.tol;
    let code = if pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
    let body = match format {
        Format::Json => circuit.to_json()? + "\n",
        Format::Text => format!("{}{}", circuit.render_text(), count_table(&circuit.counts(), residual)),
    };
    match &a.output {
        Some(path) => {
            fs::write(path, &body)?;
            let summary = json!({
                "output": path.display().to_string(),
                "counts": circuit.counts(),
                "residual": residual,
                "pass": pass,
            });
            Ok(Outcome::with_code(code, to_json(&summary)?))
        }
        None => Ok(Outcome::with_code(code, body)),
    }
}

fn count_table(c: &CountReport, residual: f64) -> String {
    format!(
        "gcx {}\nsingle-qubit rotations {}\nrotation-types {}\ntotal rotations {}\nlocal unitaries {}\nphase gates {}\nresidual {:.3e}\n",
        c.gcx, c.single_qubit_rotations, c.rotation_types, c.total_rotations, c.local_unitaries, c.phase_gates, residual
    )
}

#[derive(Serialize)]
struct VerifyReport {
    residual: f64,
    tolerance: f64,
    pass: bool,
    counts: CountReport,
}

fn cmd_verify(a: &VerifyArgs, format: Format) -> Result<Outcome> {
    let circuit: Circuit = read_json(&a.circuit)?;
    let target = read_json::<MatrixFile>(&a.target)?.to_matrix()?;
    let (m, n) = circuit.dims;
    if target.shape() != (m * n, m * n) {
        return Err(Error::DimensionMismatch(format!(
            "circuit acts on {m}x{n} but target is {}x{}",
            target.nrows(),
            target.ncols()
        )));
    }
    let residual = dist_up_to_global_phase(&circuit.evaluate()?, &target)?;
    let report = VerifyReport { residual, tolerance: a.tol, pass: residual <= a.tol, counts: circuit.counts() };
    let code = if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
    let body = match format {
        Format::Json => to_json(&report)?,
        Format::Text => {
            format!("{}{}\n", count_table(&report.counts, residual), if report.pass { "PASS" } else { "FAIL" })
        }
    };
    Ok(Outcome::with_code(code, body))
}

fn cmd_schmidt(a: &SchmidtArgs, format: Format) -> Result<Outcome> {
    let (m, n) = dims_pair(&a.dims)?;
    let u = read_json::<MatrixFile>(&a.input)?.to_matrix()?;
    let report = schmidt_rank(&u, m, n, a.rank_tol)?;
    let body = match format {
        Format::Json => to_json(&report)?,
        Format::Text => {
            let s: Vec<String> = report.singular_values.iter().map(|x| format!("{x:.6}")).collect();
            format!("rank {}\nK_Har {:.6}\nsingular values {}\n", report.rank, report.k_har, s.join(" "))
        }
    };
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct ExpandReport {
    expansion: DiagonalExpansion,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    notice: Option<String>,
}

/// Closed form where one exists for `dims`, numeric projection otherwise.
pub fn expand_core(core: &CoreFile, force_numeric: bool) -> Result<(DiagonalExpansion, f64, Option<String>)> {
    let (m, n) = core.dims;
    if m < 2 || n < 2 {
        return Err(Error::DimensionMismatch(format!("core dims ({m}, {n}) need both factors >= 2")));
    }
    let expected = (m - 1) * (n - 1);
    if core.theta.len() != expected {
        return Err(Error::AngleCount { expected, got: core.theta.len() });
    }
    let canonical = CanonicalCoreMN { theta: core.theta.clone(), ..CanonicalCoreMN::zero(core.dims) };
    let mut notice = None;
    let expansion = match (m, n) {
        _ if force_numeric => expand_core_MN_numeric(&canonical)?,
        (2, 2) => expand_core_2x2(core.theta[0]),
        (2, _) => expand_core_2N(&core.theta),
        (3, 3) => expand_core_3x3(&[core.theta[0], core.theta[1], core.theta[2], core.theta[3]]),
        _ => {
            notice = Some(format!("no closed form for {m}x{n}; using numeric projection"));
            expand_core_MN_numeric(&canonical)?
        }
    };
    let residual = (expansion.reconstruct()? - canonical.core_matrix()).norm();
    Ok((expansion, residual, notice))
}

fn cmd_expand(a: &ExpandArgs, format: Format) -> Result<Outcome> {
    let core: CoreFile = read_json(&a.input)?;
    let (expansion, residual, notice) = expand_core(&core, a.numeric)?;
    let mut out = Outcome::ok(String::new());
    if let Some(n) = &notice {
        out.stderr = format!("notice: {n}\n");
    }
    out.stdout = match format {
        Format::Json => to_json(&ExpandReport { expansion, residual, notice })?,
        Format::Text => {
            let mut s = String::new();
            for t in &expansion.terms {
                s.push_str(&format!(
                    "{:+.12} {:+.12}i  {} x {}\n",
                    t.coefficient.re, t.coefficient.im, t.a_factor, t.b_factor
                ));
            }
            s.push_str(&format!("residual {residual:.3e}\n"));
            s
        }
    };
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestRow {
    pub pipeline: String,
    pub dims: (usize, usize),
    pub cases: usize,
    pub max_residual: f64,
    pub counts_match: bool,
    pub pass: bool,
}

pub const DEFAULT_SELFTEST_DIMS: [(usize, usize); 5] = [(2, 2), (2, 3), (2, 4), (3, 3), (3, 4)];

/// Random round trips for one register; controlled pipeline only when `M = 2`.
pub fn selftest_dims(dims: (usize, usize), cases: usize, seed: u64, tol: f64) -> Result<Vec<SelftestRow>> {
    let (m, n) = dims;
    if m < 2 || n < 2 {
        return Err(Error::DimensionMismatch(format!("selftest dims ({m}, {n}) need both factors >= 2")));
    }
    let mut rows = Vec::new();
    let mut rng = rng_from_seed(seed ^ ((m as u64) << 32 | n as u64));
    if m == 2 {
        let mut max_residual: f64 = 0.0;
        let mut counts_match = true;
        for _ in 0..cases {
            let spec = ControlledGateSpec::new(haar_unitary(n, &mut rng), haar_unitary(n, &mut rng))?;
            let c = synthesize_controlled_2N(&spec)?;
            max_residual = max_residual.max(dist_up_to_global_phase(&c.evaluate()?, &spec.target())?);
            let r = c.counts();
            counts_match &= r.gcx == 2 * (n - 1) && r.rotation_types == n + 5 && r.single_qubit_rotations == 6;
        }
        rows.push(SelftestRow {
            pipeline: "controlled".into(),
            dims,
            cases,
            max_residual,
            counts_match,
            pass: counts_match && max_residual <= tol,
        });
    }
    let mut max_residual: f64 = 0.0;
    let mut counts_match = true;
    for _ in 0..cases {
        let locals = crate::formats::Locals {
            u_a: Some(haar_unitary(m, &mut rng)),
            u_b: Some(haar_unitary(n, &mut rng)),
            v_a: Some(haar_unitary(m, &mut rng)),
            v_b: Some(haar_unitary(n, &mut rng)),
        };
        let spec = DiagonalGateSpec::with_locals(dims, random_angles(m * n, &mut rng), locals)?;
        let c = synthesize_diagonal_MN(&spec)?;
        max_residual = max_residual.max(dist_up_to_global_phase(&c.evaluate()?, &spec.target())?);
        let r = c.counts();
        counts_match &= r.gcx == 2 * m * (n - 1) && r.total_rotations == 2 * m * (n - 1) + 10;
    }
    rows.push(SelftestRow {
        pipeline: "diagonal".into(),
        dims,
        cases,
        max_residual,
        counts_match,
        pass: counts_match && max_residual <= tol,
    });
    Ok(rows)
}

fn cmd_selftest(a: &SelftestArgs, format: Format) -> Result<Outcome> {
    let dims_list = match &a.dims {
        Some(d) => vec![dims_pair(d)?],
        None => DEFAULT_SELFTEST_DIMS.to_vec(),
    };
    let mut rows = Vec::new();
    for d in dims_list {
        rows.extend(selftest_dims(d, a.cases, a.seed, a.tol)?);
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let body = match format {
        Format::Json => to_json(&json!({ "rows": rows, "pass": all_pass }))?,
        Format::Text => {
            let mut s = format!(
                "{:<11} {:>5} {:>6} {:>13} {:>7}  result\n",
                "pipeline", "dims", "cases", "max_residual", "counts"
            );
            for r in &rows {
                s.push_str(&format!(
                    "{:<11} {:>5} {:>6} {:>13.3e} {:>7}  {}\n",
                    r.pipeline,
                    format!("{}x{}", r.dims.0, r.dims.1),
                    r.cases,
                    r.max_residual,
                    if r.counts_match { "ok" } else { "off" },
                    if r.pass { "PASS" } else { "FAIL" }
                ));
            }
            s
        }
    };
    Ok(Outcome::with_code(if all_pass { EXIT_OK } else { EXIT_VERIFY_FAILED }, body))
}
