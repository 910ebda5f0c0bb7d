//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::Instant;

use chi2_core::gates::lambda::{build_lambda2_z, build_lambda3_z, lambda2_report, lambda3_report};
use chi2_core::gates::{sfg, Gate};
use chi2_core::injection::{balanced_pair, imprimitivity_check, injection_report, prepare_fock_ladder, rotate_111_to_002, run_subtraction};
use chi2_core::liealg::qutrit::{check_gell_mann, QutritGenerators};
use chi2_core::liealg::{closure, DEFAULT_TOL};
use chi2_core::linalg::{max_abs_diff, re, CMatrix, C64};
use chi2_core::operators::{boundary_pauli, chi2_generators};
use chi2_core::report::Check;
use chi2_core::trotter::{convergence_curve, Axis};
use chi2_core::{BoundaryPauli, FockState, PauliAxis, PhaseConvention};

const SEED: u64 = 1;

type Suite = (&'static str, fn() -> Vec<Check>);

struct Criterion {
    id: usize,
    name: &'static str,
    checks: Vec<Check>,
}

fn amp(g: &Gate, from: &[u32], to: &[u32]) -> C64 {
    let b = g.domain();
    let k = b.require_index(&FockState::new(from.to_vec())).expect("domain state");
    let r = b.require_index(&FockState::new(to.to_vec())).expect("domain state");
    g.unitary().entries()[(r, k)]
}

fn h2_parity() -> Vec<Check> {
    let ladder = QutritGenerators::from_ladder().expect("ladder generators");
    let table = QutritGenerators::closed_form();
    let dev = ladder.g.iter().zip(table.g.iter()).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max);
    vec![Check::below("h2_entrywise", "nine generators vs tabulated closed form", dev, 1e-12)]
}

fn gell_mann() -> Vec<Check> {
    let table = check_gell_mann(&QutritGenerators::closed_form().gell_mann());
    let ladder = QutritGenerators::from_ladder().expect("ladder generators");
    let worst = table.trace_error.max(table.structure_error).max(table.hermiticity_error);
    vec![
        Check::below("gell_mann_table", "tr(λaλb) = 2δab and su(3) relations", worst, 1e-12),
        Check::below("g9_identity", "G9 acts as the identity on H2", max_abs_diff(ladder.identity_element(), &CMatrix::identity(3, 3)), 1e-12),
    ]
}

fn closure_dims() -> Vec<Check> {
    let dim = |n| closure(&chi2_generators(n).unwrap().labeled(), DEFAULT_TOL).unwrap().0.dim;
    vec![Check::holds("h2_dim_9", "closure on H2 is u(3)", dim(2) == 9), Check::holds("h1_dim_4", "closure on H1 is u(2)", dim(1) == 4)]
}

fn lambda2() -> Vec<Check> {
    let r = lambda2_report(&build_lambda2_z().unwrap()).unwrap();
    vec![
        Check::below("distance", "distance to diag(1,1,1,-1) up to phase", r.distance, 1e-10),
        Check::below("leakage", "subspace leakage", r.leakage, 1e-10),
    ]
}

fn lambda3() -> Vec<Check> {
    let conv = PhaseConvention::default();
    let r = lambda3_report(&build_lambda3_z(&conv).unwrap(), &conv);
    let plain = PhaseConvention::with_berry(re(1.0)).unwrap();
    let p = lambda3_report(&build_lambda3_z(&plain).unwrap(), &plain);
    vec![
        Check::below("residual", "Λ3[Z] up to diagonal local corrections", r.residual, 1e-10),
        Check::below("off_diagonal", "off-diagonal weight", r.off_diagonal, 1e-10),
        Check::below("identity_corrections", "berry +1 gives identity corrections", p.correction_deviation, 1e-10),
    ]
}

fn sfg_amplitudes() -> Vec<Check> {
    let mut worst: f64 = 0.0;
    for theta in [0.0, FRAC_PI_4, FRAC_PI_2, PI] {
        let g = sfg("a", "b", "c", theta).unwrap();
        let (cth, sth) = (re(theta.cos()), re(theta.sin()));
        for (from, to, want) in [
            ([1, 1, 0], [1, 1, 0], cth),
            ([1, 1, 0], [0, 0, 1], sth),
            ([0, 0, 1], [1, 1, 0], -sth),
            ([0, 0, 1], [0, 0, 1], cth),
            ([1, 0, 0], [1, 0, 0], re(1.0)),
            ([0, 1, 0], [0, 1, 0], re(1.0)),
            ([0, 0, 0], [0, 0, 0], re(1.0)),
        ] {
            worst = worst.max((amp(&g, &from, &to) - want).norm());
        }
    }
    vec![Check::below("sfg_rabi", "partial-Rabi amplitudes, single photons fixed", worst, 1e-12)]
}

fn three_step() -> Vec<Check> {
    let r = rotate_111_to_002(&PhaseConvention::default()).unwrap().report;
    vec![
        Check::below("psi1", "first mixing step", r.step_errors[0], 1e-10),
        Check::below("psi2", "|2,2,0> sign flip", r.step_errors[1], 1e-10),
        Check::below("final", "1 - |<0,0,2|psi3>|", r.step_errors[2], 1e-10),
    ]
}

fn injection() -> Vec<Check> {
    let inj = injection_report().unwrap();
    let ladder = prepare_fock_ladder(3, SEED).unwrap();
    vec![
        Check::below("inject", "|<1,1,1;0|U|0,0,1;1>| = 1", (1.0 - inj.overlap).abs(), 1e-12),
        Check::below("ladder_3", "1 - fidelity with |0,0,3>", 1.0 - ladder.fidelity, 1e-8),
    ]
}

fn decomposition() -> Vec<Check> {
    let mut worst: f64 = 0.0;
    for n in 2..=6u32 {
        let g = chi2_generators(n + 1).unwrap();
        for (axis, gen) in [(PauliAxis::Y, &g.g1), (PauliAxis::X, &g.g2)] {
            let mut sum = CMatrix::zeros(gen.dim(), gen.dim());
            for k in 0..=n {
                let p = BoundaryPauli { n, k, axis };
                sum += boundary_pauli(&p).unwrap().entries() * re(p.expansion_coefficient());
            }
            worst = worst.max(max_abs_diff(&(gen.entries() * re(2.0)), &sum));
        }
    }
    vec![Check::below("pauli_expansion", "2G1, 2G2 as weighted rung Paulis, n = 2..6", worst, 1e-12)]
}

fn trotter() -> Vec<Check> {
    let curve = convergence_curve(0.7, Axis::Y, 2, &[8, 16, 32, 64]).unwrap();
    curve
        .windows(2)
        .map(|w| {
            let ratio = w[0].1 / w[1].1;
            Check::between(&format!("ratio_m{}", w[0].0), "error(m)/error(2m)", ratio, 1.8, 2.2)
        })
        .collect()
}

fn subtraction() -> Vec<Check> {
    let r = run_subtraction(3, SEED).unwrap();
    let mut out: Vec<Check> = r.stages.iter().map(|s| Check::below(&s.unitary, "constraint residual", s.residual, 1e-6)).collect();
    out.push(Check::below("forbidden", "boundary images in |1,1>|n-2> sector", r.forbidden_amplitude, 1e-8));
    out
}

fn imprimitivity() -> Vec<Check> {
    let b = balanced_pair();
    let one = imprimitivity_check(1.0, &b, &b).unwrap();
    let zero = imprimitivity_check(0.0, &b, &b).unwrap();
    vec![
        Check::above("theta_1", "entropy after evolution", one.entropy, 0.01),
        Check::below("theta_0", "entropy of the product state", zero.entropy, 1e-12),
    ]
}

fn main() -> ExitCode {
    let suites: [Suite; 12] = [
        ("h2-matrix-parity", h2_parity),
        ("gell-mann-reconstruction", gell_mann),
        ("closure-dimension", closure_dims),
        ("lambda2-z", lambda2),
        ("lambda3-z", lambda3),
        ("sfg-amplitudes", sfg_amplitudes),
        ("three-step-rotation", three_step),
        ("injection-ladder", injection),
        ("decomposition-identity", decomposition),
        ("trotter-convergence", trotter),
        ("subtraction-synthesis", subtraction),
        ("imprimitivity", imprimitivity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in suites.iter().enumerate() {
        let start = Instant::now();
        let c = Criterion { id: i + 1, name, checks: run() };
        let pass = c.checks.iter().all(|k| k.pass);
        failed += usize::from(!pass);
        let detail: Vec<String> = c
            .checks
            .iter()
            .map(|k| format!("{}{}={:.3e}/{:.0e}", if k.pass { "" } else { "!" }, k.id, k.measured, k.tolerance))
            .collect();
        println!(
            "{} {:>2} {:<26} {} ({:.2}s)",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail.join(" "),
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", suites.len() - failed, suites.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
