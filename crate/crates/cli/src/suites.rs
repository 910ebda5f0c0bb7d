//! Suite bodies. Each returns a deterministic report plus any data files.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde_json::json;

use chi2_core::gates::lambda::{build_lambda2_z, build_lambda3_z, lambda2_report, lambda3_report, ControlledZ};
use chi2_core::injection::{injection_report, prepare_fock_ladder, rotate_111_to_002, STEP_TOL};
use chi2_core::liealg::closure as lie_closure;
use chi2_core::liealg::qutrit::{check_gell_mann, QutritGenerators};
use chi2_core::linalg::{max_abs_diff, re, CMatrix};
use chi2_core::operators::chi2_generators;
use chi2_core::report::{Check, SuiteReport};
use chi2_core::synthesis::{evaluate, synthesize as run_synthesis, ProblemSpec};
use chi2_core::trotter::{convergence_curve, curve_csv, doubling_steps, Axis, TrotterPlan};
use chi2_core::{PhaseConvention, PulseSequence};

use crate::{Artifact, Failure, SuiteRun};

const EXACT_TOL: f64 = 1e-12;
const CIRCUIT_TOL: f64 = 1e-10;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn json_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(v).map_err(runtime)
}

fn pretty<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(runtime)
}

/// Row-major `[re, im]` pairs.
fn rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect()).collect()
}

fn done(report: SuiteReport) -> Result<SuiteRun, Failure> {
    Ok(SuiteRun { report, artifacts: Vec::new() })
}

pub fn closure(n: u32, tol: f64) -> Result<SuiteRun, Failure> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(usage(anyhow::anyhow!("--tol must be a positive number, got {tol}")));
    }
    let g = chi2_generators(n).map_err(usage)?;
    let (r, _) = lie_closure(&g.labeled(), tol).map_err(runtime)?;
    let full = (n as usize + 1).pow(2);
    let mut report = SuiteReport::new("closure", 0);
    report.push(Check::holds("full_algebra", &format!("closure on H_{n} has dimension {full}"), r.dim == full));
    Ok(SuiteRun { report: report.with_details(json!({ "n": n, "tol": tol, "closure": json_value(&r)? })), artifacts: Vec::new() })
}

pub fn h2_matrices() -> Result<SuiteRun, Failure> {
    let ladder = QutritGenerators::from_ladder().map_err(runtime)?;
    let table = QutritGenerators::closed_form();
    let mut report = SuiteReport::new("h2-matrices", 0);
    for (k, (a, b)) in ladder.g.iter().zip(table.g.iter()).enumerate() {
        report.push(Check::below(&format!("G{}_entrywise", k + 1), "ladder build vs tabulated closed form", max_abs_diff(a, b), EXACT_TOL));
    }
    let gm = check_gell_mann(&table.gell_mann());
    report.push(Check::below("gell_mann_trace", "tr(λaλb) = 2δab", gm.trace_error, EXACT_TOL));
    report.push(Check::below("gell_mann_structure", "[λa, λb] = 2i f_abc λc", gm.structure_error, EXACT_TOL));
    report.push(Check::below("gell_mann_hermitian", "λa Hermitian", gm.hermiticity_error, EXACT_TOL));
    let id = max_abs_diff(ladder.identity_element(), &CMatrix::identity(3, 3));
    report.push(Check::below("g9_identity", "G9 acts as the identity on H2", id, EXACT_TOL));
    let from_ladder = check_gell_mann(&ladder.gell_mann());
    let details = json!({
        "ladder": ladder.g.iter().map(rows).collect::<Vec<_>>(),
        "table": table.g.iter().map(rows).collect::<Vec<_>>(),
        "gell_mann_table": json_value(&gm)?,
        "gell_mann_ladder": json_value(&from_ladder)?,
    });
    done(report.with_details(details))
}

fn dump(cz: &ControlledZ, name: &str) -> Result<Artifact, Failure> {
    let total = cz.circuit.unitary_on(&cz.basis, &[]).map_err(runtime)?;
    Ok(Artifact { file_name: format!("{name}.unitary.json"), contents: pretty(&total.matrix)? })
}

pub fn lambda2z(dump_unitary: bool) -> Result<SuiteRun, Failure> {
    let cz = build_lambda2_z().map_err(runtime)?;
    let r = lambda2_report(&cz).map_err(runtime)?;
    let mut report = SuiteReport::new("lambda2z", 0);
    report.push(Check::below("distance", "logical block vs diag(1,1,1,-1) up to phase", r.distance, CIRCUIT_TOL));
    report.push(Check::below("leakage", "weight leaving the logical subspace", r.leakage, CIRCUIT_TOL));
    report.push(Check::holds("in_domain", "no gate met an input outside its domain", r.out_of_domain == 0));
    let details = json!({ "report": json_value(&r)?, "netlist": json_value(&cz.circuit.netlist())? });
    let artifacts = if dump_unitary { vec![dump(&cz, "lambda2z")?] } else { Vec::new() };
    Ok(SuiteRun { report: report.with_details(details), artifacts })
}

pub fn lambda3z(berry: f64, dump_unitary: bool) -> Result<SuiteRun, Failure> {
    let conv = PhaseConvention::with_berry(re(berry)).map_err(usage)?;
    let cz = build_lambda3_z(&conv).map_err(runtime)?;
    let r = lambda3_report(&cz, &conv);
    let mut report = SuiteReport::new("lambda3z", 0);
    report.push(Check::below("residual", "Λ3[Z] up to diagonal local corrections", r.residual, CIRCUIT_TOL));
    report.push(Check::below("off_diagonal", "off-diagonal weight of the logical block", r.off_diagonal, CIRCUIT_TOL));
    report.push(Check::below("leakage", "weight leaving the logical subspace", r.leakage, CIRCUIT_TOL));
    report.push(Check::holds("in_domain", "no gate met an input outside its domain", r.out_of_domain == 0));
    if berry == 1.0 {
        report.push(Check::below("identity_corrections", "trivial round-trip phase needs no corrections", r.correction_deviation, CIRCUIT_TOL));
    }
    let details = json!({ "berry": berry, "report": json_value(&r)?, "netlist": json_value(&cz.circuit.netlist())? });
    let artifacts = if dump_unitary { vec![dump(&cz, "lambda3z")?] } else { Vec::new() };
    Ok(SuiteRun { report: report.with_details(details), artifacts })
}

pub fn injection(seed: u64) -> Result<SuiteRun, Failure> {
    let inj = injection_report().map_err(runtime)?;
    let three = rotate_111_to_002(&PhaseConvention::default()).map_err(runtime)?.report;
    let ladder = prepare_fock_ladder(3, seed).map_err(runtime)?;
    let mut report = SuiteReport::new("injection", seed);
    report.push(Check::below("inject_overlap", "1 - |<1,1,1;0|U|0,0,1;1>|", (1.0 - inj.overlap).abs(), EXACT_TOL));
    report.push(Check::below("inject_vacuum", "vacuum left in place", (1.0 - inj.vacuum_overlap).abs(), EXACT_TOL));
    report.push(Check::below("inject_swap", "doublet map is a swap up to phase", inj.stated_map_distance, EXACT_TOL));
    for (id, what, v) in [
        ("step_psi1", "first mixing step", three.step_errors[0]),
        ("step_psi2", "|2,2,0> sign flip", three.step_errors[1]),
        ("step_final", "1 - |<0,0,2|psi3>|", three.step_errors[2]),
    ] {
        report.push(Check::below(id, what, v, STEP_TOL));
    }
    report.push(Check::below("ladder_3", "1 - fidelity of |0,0,3> from vacuum pump ladder", 1.0 - ladder.fidelity, 1e-8));
    let details = json!({ "injection": json_value(&inj)?, "three_step": json_value(&three)?, "ladder": json_value(&ladder)? });
    done(report.with_details(details))
}

pub fn trotter(n: u32, theta: f64, m_max: usize, axis: Axis) -> Result<SuiteRun, Failure> {
    if !theta.is_finite() {
        return Err(usage(anyhow::anyhow!("--theta must be finite")));
    }
    TrotterPlan::new(theta, m_max, axis, n).map_err(usage)?;
    let ms = doubling_steps(m_max);
    let curve = convergence_curve(theta, axis, n, &ms).map_err(runtime)?;
    let mut report = SuiteReport::new("trotter", 0);
    let decreasing = curve.windows(2).all(|w| w[1].1 < w[0].1);
    report.push(Check::holds("decreasing", "error falls with every doubling", decreasing));
    for w in curve.windows(2).filter(|w| w[0].0 >= 8) {
        let ratio = w[0].1 / w[1].1;
        report.push(Check::between(&format!("ratio_m{}", w[0].0), "error(m)/error(2m), first order", ratio, 1.8, 2.2));
    }
    let details = json!({ "n": n, "theta": theta, "axis": format!("{axis:?}"), "curve": curve });
    let csv = Artifact { file_name: "trotter.csv".into(), contents: curve_csv(&curve) };
    Ok(SuiteRun { report: report.with_details(details), artifacts: vec![csv] })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(usage)
}

fn load_problem(path: &Path, seed: Option<u64>) -> Result<(ProblemSpec, chi2_core::SynthesisProblem), Failure> {
    let mut spec: ProblemSpec = read_json(path)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let problem = spec.build().with_context(|| format!("building {}", path.display())).map_err(usage)?;
    Ok((spec, problem))
}

pub fn synthesize(path: &Path, seed: Option<u64>) -> Result<SuiteRun, Failure> {
    let (spec, problem) = load_problem(path, seed)?;
    let seq = run_synthesis(&problem).map_err(runtime)?;
    let mut report = SuiteReport::new("synthesize", spec.seed);
    report.push(Check::holds("converged", "residual within the problem tolerance", seq.success));
    report.push(Check::below("residual", "achieved residual", seq.achieved_residual, problem.tol));
    let details = json!({
        "dim": problem.dim(),
        "generators": problem.labels,
        "n_segments": problem.n_segments,
        "restarts": problem.restarts,
        "sequence": json_value(&seq)?,
    });
    let artifacts = vec![Artifact { file_name: "synthesize.sequence.json".into(), contents: pretty(&seq)? }];
    Ok(SuiteRun { report: report.with_details(details), artifacts })
}

pub fn replay(problem_path: &Path, sequence_path: &Path) -> Result<SuiteRun, Failure> {
    let (spec, problem) = load_problem(problem_path, None)?;
    let seq: PulseSequence = read_json(sequence_path)?;
    let residual = evaluate(&problem, &seq).map_err(usage)?;
    let mut report = SuiteReport::new("replay", spec.seed);
    report.push(Check::below("residual", "replayed residual within the problem tolerance", residual, problem.tol));
    report.push(Check::below("matches_record", "replay reproduces the recorded residual", (residual - seq.achieved_residual).abs(), 1e-9));
    done(report.with_details(json!({ "residual": residual, "recorded": seq.achieved_residual, "segments": seq.segments.len() })))
}
