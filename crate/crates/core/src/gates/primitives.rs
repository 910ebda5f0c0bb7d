//! Optical primitives: SFG, QFC, SHG, SPDC and phase shifts.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeSet, SubspaceBasis};
use crate::gates::{Gate, PhaseConvention};
use crate::linalg::{c, re, CMatrix, C64};
use crate::operators::{LadderOp, OperatorExpr, OperatorMatrix};

fn domain(pairs: &[(&str, u32)], states: &[&[u32]]) -> Result<Arc<SubspaceBasis>> {
    let modes = ModeSet::from_pairs(pairs)?;
    let mut states: Vec<FockState> = states.iter().map(|s| FockState::new(s.to_vec())).collect();
    states.sort();
    Ok(Arc::new(SubspaceBasis::new(modes, states)?))
}

fn distinct(ids: &[&str]) -> Result<()> {
    for (k, a) in ids.iter().enumerate() {
        if ids[k + 1..].contains(a) {
            return Err(Error::DuplicateMode(a.to_string()));
        }
    }
    Ok(())
}

/// Generalized sum-frequency generation on `(m1, m2, m3)`:
/// `exp(θ(K − K†))` with `K = a†_{m3} a_{m1} a_{m2}`, so that
/// `|1,1,0⟩ → cos θ|1,1,0⟩ + sin θ|0,0,1⟩`.
///
/// The domain is the single-photon sector `{|0,0,0⟩, |1,0,0⟩, |0,1,0⟩, |1,1,0⟩, |0,0,1⟩}`.
pub fn sfg(m1: &str, m2: &str, m3: &str, theta: f64) -> Result<Gate> {
    distinct(&[m1, m2, m3])?;
    let basis = domain(
        &[(m1, 1), (m2, 1), (m3, 1)],
        &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[1, 1, 0], &[0, 0, 1]],
    )?;
    let k = OperatorExpr::monomial(re(1.0), vec![LadderOp::create(m3), LadderOp::annihilate(m1), LadderOp::annihilate(m2)]);
    let h = (k.clone() - k.adjoint()) * c(0.0, 1.0);
    Ok(Gate::from_hamiltonian("SFG", &h, &basis, theta)?.with_param("theta", theta))
}

/// Single-photon frequency conversion: swaps `|1,0⟩ ↔ |0,1⟩`, fixes `|0,0⟩`.
pub fn qfc(from: &str, to: &str) -> Result<Gate> {
    distinct(&[from, to])?;
    let basis = domain(&[(from, 1), (to, 1)], &[&[0, 0], &[0, 1], &[1, 0]])?;
    let one = re(1.0);
    let z = re(0.0);
    // Sorted order: |0,0⟩, |0,1⟩, |1,0⟩.
    let u = CMatrix::from_row_slice(3, 3, &[one, z, z, z, z, one, z, one, z]);
    Gate::new("QFC", OperatorMatrix::new(basis, u)?)
}

/// Domain `{|0,0⟩, |0,1⟩, |1,0⟩, |2,0⟩}` over `(low, high)` with the
/// conversion doublet `(|2,0⟩, |0,1⟩)` mapped by `block` (columns are images).
fn doublet_gate(label: &str, low: &str, high: &str, block: [[C64; 2]; 2]) -> Result<Gate> {
    distinct(&[low, high])?;
    let basis = domain(&[(low, 2), (high, 1)], &[&[0, 0], &[0, 1], &[1, 0], &[2, 0]])?;
    let (two, up) = (3, 1);
    let mut u = CMatrix::identity(4, 4);
    u[(two, two)] = block[0][0];
    u[(up, two)] = block[1][0];
    u[(two, up)] = block[0][1];
    u[(up, up)] = block[1][1];
    Gate::new(label, OperatorMatrix::new(basis, u)?)
}

/// Full-conversion SHG: `|2,0⟩ → s|0,1⟩`, `|0,1⟩ → −s̄|2,0⟩` on `(low, high)`.
pub fn shg(low: &str, high: &str, conv: &PhaseConvention) -> Result<Gate> {
    let s = conv.shg_phase;
    doublet_gate("SHG", low, high, [[re(0.0), -s.conj()], [s, re(0.0)]])
}

/// Full-conversion SPDC: `|0,1⟩ → p|2,0⟩`, `|2,0⟩ → −p̄|0,1⟩` on `(low, high)`.
pub fn spdc(high: &str, low: &str, conv: &PhaseConvention) -> Result<Gate> {
    let p = conv.spdc_phase;
    doublet_gate("SPDC", low, high, [[re(0.0), p], [-p.conj(), re(0.0)]])
}

/// SHG as a timed evolution under `i(b†a² − b a†²)/2`; full transfer at `t = π/√2`.
pub fn shg_hamiltonian(low: &str, high: &str, t: f64) -> Result<Gate> {
    distinct(&[low, high])?;
    let basis = domain(&[(low, 2), (high, 1)], &[&[0, 0], &[0, 1], &[1, 0], &[2, 0]])?;
    let up = OperatorExpr::monomial(re(1.0), vec![LadderOp::create(high), LadderOp::annihilate(low), LadderOp::annihilate(low)]);
    let h = (up.clone() - up.adjoint()) * c(0.0, 0.5);
    Gate::from_hamiltonian("SHG(H)", &h, &basis, t)
}

/// `exp(iφN)` on one mode with occupations `0..=max`.
pub fn phase_shift(mode: &str, max: u32, phi: f64) -> Result<Gate> {
    let modes = ModeSet::from_pairs(&[(mode, max)])?;
    let basis = Arc::new(SubspaceBasis::product(modes));
    let u = CMatrix::from_fn(basis.dim(), basis.dim(), |r, col| {
        if r == col {
            C64::from_polar(1.0, phi * basis.state(r).total() as f64)
        } else {
            re(0.0)
        }
    });
    Ok(Gate::new("PS", OperatorMatrix::new(basis, u)?)?.with_param("phi", phi))
}
