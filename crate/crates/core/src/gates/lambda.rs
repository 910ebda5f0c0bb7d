//! Controlled-Z circuits for two qubits (`H₁ ⊗ H₁`) and two qutrits (`H₂ ⊗ H₂`).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::{enumerate_pump_subspace, FockState, ModeSet, SubspaceBasis};
use crate::gates::{circuit::restrict, distance_up_to_phase, qfc, sfg, shg, spdc, Circuit, PhaseConvention};
use crate::linalg::{re, CMatrix, C64};

/// Control/target rail modes, shifted control pump, and sum-frequency output.
pub mod modes {
    pub const SIGNAL_C: &str = "s_c";
    pub const IDLER_C: &str = "i_c";
    pub const PUMP_C: &str = "p_c";
    pub const SIGNAL_T: &str = "s_t";
    pub const IDLER_T: &str = "i_t";
    pub const PUMP_T: &str = "p_t";
    /// Control pump after frequency conversion.
    pub const PUMP_C_SHIFTED: &str = "p'_c";
    /// Frequency-doubled pump photons.
    pub const HIGH_C: &str = "h_c";
    pub const HIGH_C_SHIFTED: &str = "h'_c";
    pub const HIGH_T: &str = "h_t";
    /// Output of the central SFG.
    pub const SUM: &str = "o";
}

use modes::*;

/// Logical basis states of a rail in order `|0̃⟩, |1̃⟩, …`.
fn rail_states(n: u32) -> Vec<FockState> {
    if n == 2 {
        SubspaceBasis::qutrit_logical().states().to_vec()
    } else {
        enumerate_pump_subspace(n).states().to_vec()
    }
}

/// Joint logical states `|j̃⟩_c|k̃⟩_t` (control outer), with every other mode empty.
fn logical_states(modes: &ModeSet, n: u32) -> Result<Vec<FockState>> {
    let rail = rail_states(n);
    let mut out = Vec::new();
    for c in &rail {
        for t in &rail {
            let (a, b) = (c.occupations(), t.occupations());
            out.push(FockState::from_pairs(
                modes,
                &[(SIGNAL_C, a[0]), (IDLER_C, a[1]), (PUMP_C, a[2]), (SIGNAL_T, b[0]), (IDLER_T, b[1]), (PUMP_T, b[2])],
            )?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ControlledZ {
    pub circuit: Circuit,
    pub basis: Arc<SubspaceBasis>,
    /// Joint-basis indices of the logical states, control outer.
    pub logical: Vec<usize>,
    /// Circuit unitary restricted to the logical states.
    pub logical_unitary: CMatrix,
    /// Largest norm a logical column loses outside the logical span.
    pub leakage: f64,
    pub out_of_domain: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda2Report {
    pub joint_dim: usize,
    pub distance: f64,
    pub leakage: f64,
    pub out_of_domain: usize,
    pub diagonal: Vec<C64>,
}

fn finish(circuit: Circuit, basis: SubspaceBasis, n: u32) -> Result<ControlledZ> {
    let basis = Arc::new(basis);
    let logical: Vec<usize> =
        logical_states(circuit.modes(), n)?.iter().map(|s| basis.require_index(s)).collect::<Result<_>>()?;
    let u = circuit.unitary_on(&basis, &logical)?;
    let (logical_unitary, leakage) = restrict(u.matrix.entries(), &logical);
    Ok(ControlledZ {
        leakage: leakage.max(u.leakage),
        out_of_domain: u.out_of_domain.len(),
        circuit,
        basis,
        logical,
        logical_unitary,
    })
}

/// Two-qubit controlled-Z: QFC1 shifts the control pump, the central SFG_π
/// phases the doubly-occupied pump pair, QFC2 shifts it back.
pub fn build_lambda2_z() -> Result<ControlledZ> {
    let modes = ModeSet::from_pairs(&[
        (SIGNAL_C, 1),
        (IDLER_C, 1),
        (PUMP_C, 1),
        (SIGNAL_T, 1),
        (IDLER_T, 1),
        (PUMP_T, 1),
        (PUMP_C_SHIFTED, 1),
        (SUM, 1),
    ])?;
    let mut c = Circuit::new("lambda2z", modes.clone());
    c.push(qfc(PUMP_C, PUMP_C_SHIFTED)?.relabeled("QFC1"))?;
    c.route("DM", &[PUMP_C_SHIFTED, PUMP_T], "center")?;
    c.push(sfg(PUMP_C_SHIFTED, PUMP_T, SUM, std::f64::consts::PI)?)?;
    c.route("DM", &[PUMP_C_SHIFTED, PUMP_T], "rails")?;
    c.push(qfc(PUMP_C_SHIFTED, PUMP_C)?.relabeled("QFC2"))?;
    finish(c, SubspaceBasis::product(modes), 1)
}

pub fn ideal_cz(d: usize) -> CMatrix {
    let mut m = CMatrix::identity(d * d, d * d);
    m[(d * d - 1, d * d - 1)] = re(-1.0);
    m
}

pub fn lambda2_report(cz: &ControlledZ) -> Result<Lambda2Report> {
    Ok(Lambda2Report {
        joint_dim: cz.basis.dim(),
        distance: distance_up_to_phase(&cz.logical_unitary, &ideal_cz(2))?,
        leakage: cz.leakage,
        out_of_domain: cz.out_of_domain,
        diagonal: cz.logical_unitary.diagonal().iter().copied().collect(),
    })
}

/// Two-qutrit controlled-Z: SHG on each rail doubles a two-photon pump,
/// the frequency-doubled photons pass through the two-qubit block, and SPDC
/// undoes the doubling.
pub fn build_lambda3_z(conv: &PhaseConvention) -> Result<ControlledZ> {
    let modes = ModeSet::from_pairs(&[
        (SIGNAL_C, 2),
        (IDLER_C, 2),
        (PUMP_C, 2),
        (SIGNAL_T, 2),
        (IDLER_T, 2),
        (PUMP_T, 2),
        (HIGH_C, 1),
        (HIGH_C_SHIFTED, 1),
        (HIGH_T, 1),
        (SUM, 1),
    ])?;
    let mut c = Circuit::new("lambda3z", modes.clone());
    c.push(shg(PUMP_C, HIGH_C, conv)?)?;
    c.push(shg(PUMP_T, HIGH_T, conv)?)?;
    c.push(qfc(HIGH_C, HIGH_C_SHIFTED)?.relabeled("QFC1"))?;
    c.route("DM", &[HIGH_C_SHIFTED, HIGH_T], "center")?;
    c.push(sfg(HIGH_C_SHIFTED, HIGH_T, SUM, std::f64::consts::PI)?)?;
    c.route("DM", &[HIGH_C_SHIFTED, HIGH_T], "rails")?;
    c.push(qfc(HIGH_C_SHIFTED, HIGH_C)?.relabeled("QFC2"))?;
    c.push(spdc(HIGH_C, PUMP_C, conv)?)?;
    c.push(spdc(HIGH_T, PUMP_T, conv)?)?;
    let basis = c.reachable_basis(&logical_states(&modes, 2)?)?;
    finish(c, basis, 2)
}

/// Split of a diagonal two-qutrit unitary into `phase · Λ₃[Z] · (D_c ⊗ D_t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda3Report {
    pub berry_roundtrip: C64,
    pub joint_dim: usize,
    pub global_phase: C64,
    pub d_control: Vec<C64>,
    pub d_target: Vec<C64>,
    /// `max |U − phase·Λ₃[Z]·(D_c ⊗ D_t)|`, off-diagonal entries included.
    pub residual: f64,
    pub off_diagonal: f64,
    pub leakage: f64,
    pub out_of_domain: usize,
    /// `max |D − 1|` over both corrections.
    pub correction_deviation: f64,
}

pub fn lambda3_report(cz: &ControlledZ, conv: &PhaseConvention) -> Lambda3Report {
    let u = &cz.logical_unitary;
    let d = 3;
    let phase = u[(0, 0)];
    let d_control: Vec<C64> = (0..d).map(|j| u[(j * d, j * d)] / phase).collect();
    let d_target: Vec<C64> = (0..d).map(|k| u[(k, k)] / phase).collect();
    let ideal = ideal_cz(d);
    let mut residual: f64 = 0.0;
    let mut off: f64 = 0.0;
    for r in 0..d * d {
        for col in 0..d * d {
            let predicted = if r == col { phase * ideal[(r, r)] * d_control[r / d] * d_target[r % d] } else { re(0.0) };
            residual = residual.max((u[(r, col)] - predicted).norm());
            if r != col {
                off = off.max(u[(r, col)].norm());
            }
        }
    }
    let correction_deviation = d_control.iter().chain(d_target.iter()).map(|z| (z - re(1.0)).norm()).fold(0.0, f64::max);
    Lambda3Report {
        berry_roundtrip: conv.berry_roundtrip(),
        joint_dim: cz.basis.dim(),
        global_phase: phase,
        d_control,
        d_target,
        residual,
        off_diagonal: off,
        leakage: cz.leakage,
        out_of_domain: cz.out_of_domain,
        correction_deviation,
    }
}

/// Operator Schmidt rank of `u` on `C^da ⊗ C^db` (first factor outer).
pub fn operator_schmidt_rank(u: &CMatrix, da: usize, db: usize, tol: f64) -> usize {
    let realigned = CMatrix::from_fn(da * da, db * db, |row, col| {
        let (i, k) = (row / da, row % da);
        let (j, l) = (col / db, col % db);
        u[(i * db + j, k * db + l)]
    });
    realigned.singular_values().iter().filter(|&&s| s > tol).count()
}
