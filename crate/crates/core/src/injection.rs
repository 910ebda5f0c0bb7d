//! Coherent photon injection and subtraction with ancilla modes.
//!
//! Covers the single-injection map, Fock-state ladder preparation, the
//! three-step `|1,1,1⟩ → |0,0,2⟩` rotation, the subtraction unitaries on
//! `H_{n+1}` with their boundary images, and the imprimitivity check.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_pump_subspace, FockState, ModeSet, SubspaceBasis, IDLER, PUMP, QUTRIT_LOGICAL_ORDER, SIGNAL};
use crate::gates::{distance_up_to_phase, phase_shift, shg, spdc, Circuit, Gate, PhaseConvention};
use crate::linalg::{self, re, CMatrix, CVector, HermitianEigen, C64};
use crate::operators::{
    self, ancilla_generators, injection_generator, AncillaKind, OperatorExpr, OperatorMatrix, IDLER_ANCILLA, PUMP_ANCILLA,
    SIGNAL_ANCILLA,
};
use crate::synthesis::{self, Constraint, PulseSequence, SynthesisProblem, Target};

pub const LEAKAGE_TOL: f64 = 1e-12;

/// Second-harmonic mode of the idler used by the sign-flip circuit.
pub const IDLER_HARMONIC: &str = "2w";

/// `exp(−itH)ψ` for `H = expr` on `basis`; fails if the evolution can leave the basis.
pub fn evolve_state(expr: &OperatorExpr, basis: &Arc<SubspaceBasis>, psi: &CVector, t: f64) -> Result<CVector> {
    let leak = expr.leakage_audit(basis, psi)?;
    if leak > LEAKAGE_TOL {
        return Err(Error::Leakage { amplitude: leak, context: "evolution reaches states outside the basis".into() });
    }
    let h = expr.to_matrix(basis)?;
    Ok(HermitianEigen::new(h.entries())?.evolve(t) * psi)
}

/// `exp(iπĜ_{2a}/2)ψ`; `basis` must contain the `s`, `i` and `p'` modes.
pub fn inject_pump(basis: &Arc<SubspaceBasis>, psi: &CVector) -> Result<CVector> {
    evolve_state(&injection_generator(), basis, psi, -FRAC_PI_2)
}

fn core_ancilla_modes(core_max: u32, ancilla_max: u32) -> Result<ModeSet> {
    ModeSet::from_pairs(&[(SIGNAL, core_max), (IDLER, core_max), (PUMP, core_max), (PUMP_ANCILLA, ancilla_max)])
}

/// `(|0,0,1⟩|1⟩_{p'}, |1,1,1⟩|0⟩_{p'})`.
pub fn injection_doublet() -> Result<Arc<SubspaceBasis>> {
    let modes = core_ancilla_modes(1, 1)?;
    let states = vec![FockState::new(vec![0, 0, 1, 1]), FockState::new(vec![1, 1, 1, 0])];
    Ok(Arc::new(SubspaceBasis::new(modes, states)?))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InjectionReport {
    /// `⟨1,1,1;0| exp(iπĜ_{2a}/2) |0,0,1;1⟩`.
    pub amplitude: C64,
    pub overlap: f64,
    /// `|⟨0,0,0;0|U|0,0,0;0⟩|`.
    pub vacuum_overlap: f64,
    /// Phase-insensitive distance from the swap `|0,0,1;1⟩ ↔ |1,1,1;0⟩`.
    pub stated_map_distance: f64,
}

pub fn injection_report() -> Result<InjectionReport> {
    let doublet = injection_doublet()?;
    let out = inject_pump(&doublet, &doublet.ket(doublet.state(0))?)?;
    let amplitude = out[1];
    let g = injection_generator().to_matrix(&doublet)?;
    let u = HermitianEigen::new(g.entries())?.evolve(-FRAC_PI_2);
    let swap = CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);

    let vac_basis = Arc::new(SubspaceBasis::new(core_ancilla_modes(1, 1)?, vec![FockState::vacuum(4)])?);
    let vac = inject_pump(&vac_basis, &vac_basis.ket(vac_basis.state(0))?)?;
    Ok(InjectionReport {
        amplitude,
        overlap: amplitude.norm(),
        vacuum_overlap: vac[0].norm(),
        stated_map_distance: distance_up_to_phase(&u, &swap)?,
    })
}

/// Result of the three-step `|1,1,1⟩ → |0,0,2⟩` procedure.
#[derive(Clone, Debug)]
pub struct ThreeStepRotation {
    pub circuit: Circuit,
    /// The procedure's action on `H_2` (canonical order).
    pub unitary: OperatorMatrix,
    pub report: ThreeStepReport,
}

/// Intermediate states are in the logical order `(|1,1,1⟩, |2,2,0⟩, |0,0,2⟩)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThreeStepReport {
    pub psi1: Vec<C64>,
    pub psi2: Vec<C64>,
    pub psi3: Vec<C64>,
    /// Max entry deviation of ψ₁ and ψ₂ from their closed forms, and `1 − |⟨0,0,2|ψ₃⟩|`.
    pub step_errors: [f64; 3],
    pub final_overlap: f64,
    pub final_amplitude: C64,
    /// Overlap reached when the third step repeats the first evolution verbatim.
    pub literal_third_step_overlap: f64,
    pub leakage: f64,
    pub out_of_domain: usize,
}

pub const STEP_TOL: f64 = 1e-10;

/// Evolution time of each mixing step, for `H = 2Ĝ₁`.
pub fn three_step_time() -> f64 {
    2.0 * PI / (3.0 * 6f64.sqrt())
}

fn three_step_modes() -> Result<ModeSet> {
    ModeSet::from_pairs(&[(SIGNAL, 2), (IDLER, 2), (PUMP, 2), (IDLER_HARMONIC, 1)])
}

fn mixing_gate() -> Result<Gate> {
    let h2 = Arc::new(enumerate_pump_subspace(2));
    Gate::from_hamiltonian("G", &(operators::g1_expr() * re(2.0)), &h2, three_step_time())
}

/// Step 2: the idler is split off, up-converted and down-converted back,
/// which multiplies its two-photon component by the SHG→SPDC round-trip phase.
pub fn sign_flip_circuit(conv: &PhaseConvention) -> Result<Circuit> {
    let mut c = Circuit::new("sign-flip", three_step_modes()?);
    c.route("DM", &[IDLER], "idler arm")?;
    c.push(shg(IDLER, IDLER_HARMONIC, conv)?)?;
    c.push(spdc(IDLER_HARMONIC, IDLER, conv)?)?;
    c.route("DM", &[IDLER], "main")?;
    Ok(c)
}

/// Builds and checks the three-step procedure. The third step is the inverse
/// mixing evolution, realized as the first evolution conjugated by a π phase
/// on the pump (which negates `Ĝ₁`).
pub fn rotate_111_to_002(conv: &PhaseConvention) -> Result<ThreeStepRotation> {
    let modes = three_step_modes()?;
    let mut step1 = Circuit::new("mix", modes.clone());
    step1.push(mixing_gate()?)?;
    let step2 = sign_flip_circuit(conv)?;
    let mut step3 = Circuit::new("unmix", modes.clone());
    step3.push(phase_shift(PUMP, 2, -PI)?)?;
    step3.push(mixing_gate()?)?;
    step3.push(phase_shift(PUMP, 2, PI)?)?;

    let mut circuit = Circuit::new("rotate-111-002", modes.clone());
    circuit.append(&step1)?.append(&step2)?.append(&step3)?;

    let h2 = enumerate_pump_subspace(2);
    let embed = |s: &FockState| {
        let mut o = s.occupations().to_vec();
        o.push(0);
        FockState::new(o)
    };
    let seeds: Vec<FockState> = h2.states().iter().map(embed).collect();
    let joint = Arc::new(circuit.reachable_basis(&seeds)?);
    let idx: Vec<usize> = seeds.iter().map(|s| joint.require_index(s)).collect::<Result<_>>()?;
    let total = circuit.unitary_on(&joint, &idx)?;
    let (u, leak) = crate::gates::restrict(total.matrix.entries(), &idx);
    let unitary = OperatorMatrix::new(Arc::new(h2.clone()), u)?;

    let logical = |v: &CVector| -> Vec<C64> { QUTRIT_LOGICAL_ORDER.iter().map(|&k| v[idx[k]]).collect() };
    let start = joint.ket(&seeds[1])?;
    let (v1, _) = step1.apply(&joint, &start)?;
    let (v2, _) = step2.apply(&joint, &v1)?;
    let (v3, _) = step3.apply(&joint, &v2)?;
    let (literal, _) = step1.apply(&joint, &v2)?;
    let (psi1, psi2, psi3) = (logical(&v1), logical(&v2), logical(&v3));

    let h = FRAC_1_SQRT_2;
    let dev = |got: &[C64], want: [f64; 3]| got.iter().zip(want).map(|(a, b)| (a - re(b)).norm()).fold(0.0, f64::max);
    let final_amplitude = psi3[2];
    let report = ThreeStepReport {
        step_errors: [dev(&psi1, [-0.5, h, -0.5]), dev(&psi2, [-0.5, -h, -0.5]), 1.0 - final_amplitude.norm()],
        final_overlap: final_amplitude.norm(),
        final_amplitude,
        literal_third_step_overlap: literal[idx[2]].norm(),
        leakage: total.leakage.max(leak),
        out_of_domain: total.out_of_domain.len(),
        psi1,
        psi2,
        psi3,
    };
    for (k, &e) in report.step_errors.iter().enumerate() {
        if e > STEP_TOL {
            return Err(Error::StepMismatch { step: format!("step {}", k + 1), detail: format!("deviation {e:e}") });
        }
    }
    Ok(ThreeStepRotation { circuit, unitary, report })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Rung {
    /// Pump photons before this rung.
    pub k: u32,
    pub inject_overlap: f64,
    pub method: String,
    pub rotation_residual: f64,
    pub segments: usize,
    /// `|⟨0,0,k+1|ψ⟩|²` after the rung.
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderReport {
    pub n_target: u32,
    pub rungs: Vec<Rung>,
    /// Final state in canonical `H_n` order (of the last subspace reached).
    pub final_state: Vec<C64>,
    pub fidelity: f64,
    pub ancilla_photons: u32,
    pub success: bool,
    pub failure: Option<String>,
}

pub const LADDER_TOL: f64 = 1e-10;

/// One injection: `ψ ∈ H_k` with a fresh `|1⟩_{p'}`, returning the `|0⟩_{p'}` branch in `H_{k+1}`
/// and `|⟨1,1,k;0|φ⟩|`.
fn inject_rung(k: u32, psi: &CVector) -> Result<(CVector, f64)> {
    // Ĝ_{2a} conserves n_s + n_{p'} ≤ k + 1, so these truncations are never reached.
    let modes = core_ancilla_modes(k + 1, k + 1)?;
    let with = |s: &FockState, a: u32| {
        let mut o = s.occupations().to_vec();
        o.push(a);
        FockState::new(o)
    };
    let lower = enumerate_pump_subspace(k);
    let upper = enumerate_pump_subspace(k + 1);
    let seeds: Vec<FockState> = lower.states().iter().map(|s| with(s, 1)).collect();
    let joint = Arc::new(SubspaceBasis::reachable(modes, &seeds, &[&injection_generator()])?);
    let mut v = CVector::zeros(joint.dim());
    for (j, s) in seeds.iter().enumerate() {
        v[joint.require_index(s)?] = psi[j];
    }
    let out = inject_pump(&joint, &v)?;
    let branch = CVector::from_fn(upper.dim(), |r, _| joint.lookup(&with(upper.state(r), 0)).map_or(re(0.0), |i| out[i]));
    // |1,1,k⟩ has pump count k.
    let overlap = branch[k as usize].norm();
    Ok((branch, overlap))
}

/// Rotation on `H_{k+1}` sending `|1,1,k⟩ → |0,0,k+1⟩`, synthesized over `{Ĝ₁, Ĝ₂}`.
pub fn ladder_rotation_problem(k: u32, seed: u64) -> Result<SynthesisProblem> {
    let g = operators::chi2_generators(k + 1)?;
    let b = Arc::clone(g.basis());
    let from = b.state(k as usize).clone();
    let to = b.state(k as usize + 1).clone();
    let cst = Constraint::between(&b, &from, &to)?;
    Ok(SynthesisProblem::new(vec![("G1".into(), g.g1.clone()), ("G2".into(), g.g2.clone())], Target::Constraints(vec![cst]), LADDER_TOL)?
        .with_seed(seed))
}

/// Builds `|0,0,n_target⟩` from `|0,0,1⟩` by alternating injection with an in-subspace rotation.
pub fn prepare_fock_ladder(n_target: u32, seed: u64) -> Result<LadderReport> {
    if n_target == 0 {
        return Err(Error::InvalidArgument("target photon number must be ≥ 1".into()));
    }
    let mut psi = enumerate_pump_subspace(1).ket(&FockState::new(vec![0, 0, 1]))?;
    let mut rungs = Vec::new();
    let mut photons = 0;
    let mut failure = None;
    for k in 1..n_target {
        let (branch, inject_overlap) = inject_rung(k, &psi)?;
        photons += 1;
        let (u, method, residual, segments) = if k == 1 {
            let rot = rotate_111_to_002(&PhaseConvention::default())?;
            (rot.unitary.entries().clone(), "three-step", rot.report.step_errors[2], 3)
        } else {
            let problem = ladder_rotation_problem(k, seed)?;
            let seq = synthesis::synthesize(&problem)?;
            let u = synthesis::sequence_unitary(&problem.generators, &seq)?;
            if !seq.success {
                failure = Some(format!("rung {k}: residual {:e} above {:e}", seq.achieved_residual, problem.tol));
            }
            (u, "synthesized", seq.achieved_residual, seq.segments.len())
        };
        psi = u * branch;
        let top = psi.len() - 1;
        rungs.push(Rung { k, inject_overlap, method: method.into(), rotation_residual: residual, segments, fidelity: psi[top].norm_sqr() });
        if failure.is_some() {
            break;
        }
    }
    let fidelity = psi[psi.len() - 1].norm_sqr();
    Ok(LadderReport {
        n_target,
        success: failure.is_none() && fidelity >= 1.0 - 1e-8,
        rungs,
        final_state: psi.iter().copied().collect(),
        fidelity,
        ancilla_photons: photons,
        failure,
    })
}

/// Which subtraction unitary a constraint set describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtraction {
    /// Removes a signal/idler pair into `p'`; generated by `Ĝ_{1,p'}, Ĝ_{2,p'}, N̂_s, N̂_{p'}`.
    SignalIdlerToPumpPrime,
    /// Converts a pump photon into an `s'`,`i'` pair; generated by `Ĝ_{1,s'i'}, Ĝ_{2,s'i'}, N̂_p, N̂_{s'}`.
    PumpToSignalIdlerPrime,
}

impl Subtraction {
    pub fn label(&self) -> &'static str {
        match self {
            Subtraction::SignalIdlerToPumpPrime => "U_sip'",
            Subtraction::PumpToSignalIdlerPrime => "U_ps'i'",
        }
    }

    pub fn generators(&self) -> Vec<(String, OperatorExpr)> {
        let (kind, numbers) = match self {
            Subtraction::SignalIdlerToPumpPrime => (AncillaKind::PumpPrime, [SIGNAL, PUMP_ANCILLA]),
            Subtraction::PumpToSignalIdlerPrime => (AncillaKind::SignalIdlerPrime, [PUMP, SIGNAL_ANCILLA]),
        };
        let (g1, g2) = ancilla_generators(kind);
        let tag = match kind {
            AncillaKind::PumpPrime => "p'",
            AncillaKind::SignalIdlerPrime => "s'i'",
        };
        vec![
            (format!("G1_{tag}"), g1),
            (format!("G2_{tag}"), g2),
            (format!("N_{}", numbers[0]), OperatorExpr::number(numbers[0])),
            (format!("N_{}", numbers[1]), OperatorExpr::number(numbers[1])),
        ]
    }
}

/// Modes `(s, i, p, s', i', p')` with truncations large enough for every
/// state the subtraction generators reach from `H_{n+1}`.
pub fn subtraction_modes(n: u32) -> Result<ModeSet> {
    let wide = (2 * n).saturating_sub(2).max(n + 1);
    ModeSet::from_pairs(&[
        (SIGNAL, wide),
        (IDLER, wide),
        (PUMP, n + 1),
        (SIGNAL_ANCILLA, n + 1),
        (IDLER_ANCILLA, n + 1),
        (PUMP_ANCILLA, wide),
    ])
}

fn joint_state(core: [u32; 3], prime: [u32; 3]) -> FockState {
    FockState::new(vec![core[0], core[1], core[2], prime[0], prime[1], prime[2]])
}

/// Mapped pairs for one subtraction unitary on `H_{n+1}`, `j = 1..=n`.
pub fn subtraction_targets(kind: Subtraction, n: u32) -> Result<Vec<(FockState, FockState)>> {
    let min = match kind {
        Subtraction::SignalIdlerToPumpPrime => 3,
        Subtraction::PumpToSignalIdlerPrime => 2,
    };
    if n < min {
        return Err(Error::InvalidArgument(format!("{} needs n ≥ {min}, got {n}", kind.label())));
    }
    Ok((1..=n)
        .map(|j| match kind {
            Subtraction::SignalIdlerToPumpPrime => {
                (joint_state([j, j, n + 1 - j], [0, 0, n - 3]), joint_state([j - 1, j - 1, n + 1 - j], [0, 0, n - 2]))
            }
            Subtraction::PumpToSignalIdlerPrime => {
                (joint_state([j - 1, j - 1, n + 1 - j], [0, 0, n - 2]), joint_state([j - 1, j - 1, n - j], [1, 1, n - 2]))
            }
        })
        .collect())
}

fn matrices(gens: &[(String, OperatorExpr)], basis: &Arc<SubspaceBasis>) -> Result<Vec<(String, OperatorMatrix)>> {
    gens.iter()
        .map(|(label, e)| {
            let m = e.to_matrix(basis)?;
            if m.leakage() > LEAKAGE_TOL {
                return Err(Error::Leakage { amplitude: m.leakage(), context: format!("{label} leaves the basis") });
            }
            Ok((label.clone(), m))
        })
        .collect()
}

/// Synthesis problem for one subtraction unitary on the states its
/// generators reach from the constraint inputs.
pub fn subtraction_problem(kind: Subtraction, n: u32, seed: u64) -> Result<SynthesisProblem> {
    let pairs = subtraction_targets(kind, n)?;
    let gens = kind.generators();
    let exprs: Vec<&OperatorExpr> = gens.iter().map(|(_, e)| e).collect();
    let seeds: Vec<FockState> = pairs.iter().map(|(a, _)| a.clone()).collect();
    let basis = Arc::new(SubspaceBasis::reachable(subtraction_modes(n)?, &seeds, &exprs)?);
    let constraints = pairs.iter().map(|(a, b)| Constraint::between(&basis, a, b)).collect::<Result<Vec<_>>>()?;
    Ok(SynthesisProblem::new(matrices(&gens, &basis)?, Target::Constraints(constraints), 1e-8)?.with_seed(seed))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageReport {
    pub unitary: String,
    pub generators: Vec<String>,
    pub dim: usize,
    pub residual: f64,
    pub success: bool,
    pub sequence: PulseSequence,
}

/// Images of the boundary states `|0,0,n+1⟩` (`c`) and `|n+1,n+1,0⟩` (`d`)
/// under the composed subtraction, as nonzero joint-basis amplitudes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeakageAmplitudes {
    pub c: Vec<(FockState, C64)>,
    pub d: Vec<(FockState, C64)>,
}

impl LeakageAmplitudes {
    pub fn norms(&self) -> (f64, f64) {
        let n = |v: &[(FockState, C64)]| v.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>();
        (n(&self.c), n(&self.d))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubtractionReport {
    pub n: u32,
    pub stages: Vec<StageReport>,
    pub joint_dim: usize,
    /// `|⟨out|U_ps'i' U_sip'|in⟩|` for each `j`.
    pub composed_overlaps: Vec<f64>,
    /// Norm of the boundary images inside the `|1,1⟩_{s'i'}|n−2⟩_{p'}` sector.
    pub forbidden_amplitude: f64,
    pub boundary: LeakageAmplitudes,
}

/// Synthesizes both subtraction unitaries, replays them on a common joint
/// basis and evaluates the boundary images.
pub fn run_subtraction(n: u32, seed: u64) -> Result<SubtractionReport> {
    let kinds = [Subtraction::SignalIdlerToPumpPrime, Subtraction::PumpToSignalIdlerPrime];
    let problems = kinds.iter().map(|&k| subtraction_problem(k, n, seed)).collect::<Result<Vec<_>>>()?;
    let sequences = problems.iter().map(synthesis::synthesize).collect::<Result<Vec<_>>>()?;

    let top = joint_state([0, 0, n + 1], [0, 0, n - 3]);
    let bottom = joint_state([n + 1, n + 1, 0], [0, 0, n - 3]);
    let first = subtraction_targets(kinds[0], n)?;
    let second = subtraction_targets(kinds[1], n)?;
    let mut seeds: Vec<FockState> = first.iter().chain(&second).map(|(a, _)| a.clone()).collect();
    seeds.extend([top.clone(), bottom.clone()]);
    let all: Vec<(String, OperatorExpr)> = kinds.iter().flat_map(|k| k.generators()).collect();
    let exprs: Vec<&OperatorExpr> = all.iter().map(|(_, e)| e).collect();
    let joint = Arc::new(SubspaceBasis::reachable(subtraction_modes(n)?, &seeds, &exprs)?);

    let mut total = CMatrix::identity(joint.dim(), joint.dim());
    let mut stages = Vec::new();
    for ((kind, problem), seq) in kinds.iter().zip(&problems).zip(&sequences) {
        let gens: Vec<OperatorMatrix> = matrices(&kind.generators(), &joint)?.into_iter().map(|(_, m)| m).collect();
        total = synthesis::sequence_unitary(&gens, seq)? * total;
        stages.push(StageReport {
            unitary: kind.label().into(),
            generators: problem.labels.clone(),
            dim: problem.dim(),
            residual: seq.achieved_residual,
            success: seq.success,
            sequence: seq.clone(),
        });
    }

    let composed_overlaps = first
        .iter()
        .zip(&second)
        .map(|((a, _), (_, b))| Ok(joint.ket(b)?.dotc(&(&total * joint.ket(a)?)).norm()))
        .collect::<Result<Vec<_>>>()?;

    let image = |s: &FockState| -> Result<CVector> { Ok(&total * joint.ket(s)?) };
    let (ci, di) = (image(&top)?, image(&bottom)?);
    let forbidden = |v: &CVector| -> f64 {
        joint
            .states()
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                let o = s.occupations();
                o[3] == 1 && o[4] == 1 && o[5] == n - 2
            })
            .map(|(k, _)| v[k].norm_sqr())
            .sum::<f64>()
    };
    let support = |v: &CVector| -> Vec<(FockState, C64)> {
        joint.states().iter().zip(v.iter()).filter(|(_, a)| a.norm() > 1e-14).map(|(s, a)| (s.clone(), *a)).collect()
    };
    Ok(SubtractionReport {
        n,
        stages,
        joint_dim: joint.dim(),
        composed_overlaps,
        forbidden_amplitude: (forbidden(&ci) + forbidden(&di)).sqrt(),
        boundary: LeakageAmplitudes { c: support(&ci), d: support(&di) },
    })
}

/// Core states carrying the `α` amplitudes of the imprimitivity check.
pub fn imprimitivity_core() -> [FockState; 2] {
    [FockState::new(vec![1, 1, 1]), FockState::new(vec![0, 0, 2])]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gamma {
    pub core: FockState,
    pub ancilla: u32,
    /// `⟨j,q|U|j,q⟩`.
    pub stay: C64,
    /// Norm of the part of `U|j,q⟩` that leaves `|j,q⟩`.
    pub moved: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImprimitivityReport {
    pub theta: f64,
    pub entropy: f64,
    /// Number of `p'` occupations the evolution can reach.
    pub ancilla_dim: usize,
    pub gamma: Vec<Gamma>,
    pub norm_error: f64,
}

/// Evolves `(Σ α_j|j⟩) ⊗ (Σ β_q|q⟩_{p'})` under `exp(−iθĜ_{2,p'})` and
/// returns the entanglement entropy across the core/ancilla cut.
pub fn imprimitivity_check(theta: f64, alpha: &[C64; 2], beta: &[C64]) -> Result<ImprimitivityReport> {
    let na: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    let nb: f64 = beta.iter().map(|a| a.norm_sqr()).sum();
    if (na - 1.0).abs() > 1e-10 || (nb - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("α and β must be normalized".into()));
    }
    let core = imprimitivity_core();
    let qmax = beta.len() as u32 - 1;
    // n_s + n_{p'} is conserved, so these truncations are never reached.
    let t = 2 + qmax;
    let modes = core_ancilla_modes(t, t)?;
    let product: Vec<(FockState, C64)> = core
        .iter()
        .zip(alpha)
        .flat_map(|(s, a)| {
            beta.iter().enumerate().map(move |(q, b)| {
                let mut o = s.occupations().to_vec();
                o.push(q as u32);
                (FockState::new(o), a * b)
            })
        })
        .collect();
    let seeds: Vec<FockState> = product.iter().map(|(s, _)| s.clone()).collect();
    let g = ancilla_generators(AncillaKind::PumpPrime).1;
    let basis = Arc::new(SubspaceBasis::reachable(modes, &seeds, &[&g])?);
    let mut psi = CVector::zeros(basis.dim());
    for (s, a) in &product {
        psi[basis.require_index(s)?] += a;
    }
    let out = evolve_state(&g, &basis, &psi, theta)?;

    // Rows: distinct core configurations; columns: p' occupation.
    let cores: BTreeSet<Vec<u32>> = basis.states().iter().map(|s| s.occupations()[..3].to_vec()).collect();
    let cores: Vec<Vec<u32>> = cores.into_iter().collect();
    let qs: BTreeSet<u32> = basis.states().iter().map(|s| s.occupations()[3]).collect();
    let qs: Vec<u32> = qs.into_iter().collect();
    let mut m = CMatrix::zeros(cores.len(), qs.len());
    for (k, s) in basis.states().iter().enumerate() {
        let o = s.occupations();
        let r = cores.iter().position(|x| x[..] == o[..3]).expect("listed");
        let col = qs.iter().position(|&q| q == o[3]).expect("listed");
        m[(r, col)] = out[k];
    }
    let rho = m.adjoint() * &m;
    let entropy = linalg::von_neumann_entropy(&rho);

    let h = g.to_matrix(&basis)?;
    let u = HermitianEigen::new(h.entries())?.evolve(theta);
    let gamma = seeds
        .iter()
        .map(|s| {
            let k = basis.require_index(s)?;
            let stay = u[(k, k)];
            let col_norm: f64 = u.column(k).iter().map(|a| a.norm_sqr()).sum();
            Ok(Gamma {
                core: FockState::new(s.occupations()[..3].to_vec()),
                ancilla: s.occupations()[3],
                stay,
                moved: (col_norm - stay.norm_sqr()).max(0.0).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImprimitivityReport { theta, entropy, ancilla_dim: qs.len(), gamma, norm_error: (out.norm() - 1.0).abs() })
}

/// `(1/√2, 1/√2)`.
pub fn balanced_pair() -> [C64; 2] {
    [re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)]
}
