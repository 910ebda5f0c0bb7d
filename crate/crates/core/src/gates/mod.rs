//! Unitary gates with declared mode footprints, the optical primitive
//! library, and circuit composition.

mod circuit;
pub mod lambda;
mod primitives;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeSet, SubspaceBasis};
use crate::linalg::{self, CMatrix, C64};
use crate::operators::{OperatorExpr, OperatorMatrix};

pub use circuit::{restrict, Circuit, CircuitUnitary, Netlist, NetlistEntry, Step};
pub use primitives::{phase_shift, qfc, sfg, shg, shg_hamiltonian, spdc};

pub const UNITARY_TOL: f64 = 1e-10;

/// Phases picked up at full SHG and SPDC conversion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConvention {
    pub shg_phase: C64,
    pub spdc_phase: C64,
}

impl Default for PhaseConvention {
    fn default() -> Self {
        Self { shg_phase: C64::new(1.0, 0.0), spdc_phase: C64::new(-1.0, 0.0) }
    }
}

impl PhaseConvention {
    pub fn new(shg_phase: C64, spdc_phase: C64) -> Result<Self> {
        for z in [shg_phase, spdc_phase] {
            if (z.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("phase {z} is not a unit complex number")));
            }
        }
        Ok(Self { shg_phase, spdc_phase })
    }

    /// `shg_phase = 1`, `spdc_phase = berry`.
    pub fn with_berry(berry: C64) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), berry)
    }

    /// Phase of `|2,0⟩` after an SHG → SPDC round trip.
    pub fn berry_roundtrip(&self) -> C64 {
        self.shg_phase * self.spdc_phase
    }
}

/// A unitary acting on the modes of its footprint.
///
/// `local` is defined on a basis over the footprint modes (its `domain`).
/// Footprint configurations outside the domain are left unchanged and
/// reported as out-of-domain whenever they carry amplitude.
#[derive(Clone, Debug)]
pub struct Gate {
    label: String,
    params: BTreeMap<String, f64>,
    local: OperatorMatrix,
}

/// Result of acting with a gate on one joint basis state.
#[derive(Clone, Debug, Default)]
pub struct LocalAction {
    pub outputs: Vec<(FockState, C64)>,
    pub out_of_domain: bool,
    /// Weight of outputs that would exceed a joint-mode truncation.
    pub truncated: f64,
}

impl Gate {
    pub fn new(label: impl Into<String>, local: OperatorMatrix) -> Result<Self> {
        let err = linalg::unitarity_error(local.entries());
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self { label: label.into(), params: BTreeMap::new(), local })
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn unitary(&self) -> &OperatorMatrix {
        &self.local
    }

    pub fn footprint(&self) -> Vec<String> {
        self.local.basis().modes().ids().map(str::to_string).collect()
    }

    pub fn domain(&self) -> &SubspaceBasis {
        self.local.basis()
    }

    /// `exp(−itH)` on the domain `basis`, built from `expr`; rejects leakage.
    pub fn from_hamiltonian(label: &str, expr: &OperatorExpr, basis: &Arc<SubspaceBasis>, t: f64) -> Result<Self> {
        let h = expr.to_matrix(basis)?;
        if h.leakage() > 1e-12 {
            return Err(Error::Leakage { amplitude: h.leakage(), context: format!("{label} generator leaves its domain") });
        }
        Ok(evolve(&h, t)?.relabeled(label).with_param("t", t))
    }

    pub fn relabeled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// Positions of the footprint modes in `modes`.
    fn positions(&self, modes: &ModeSet) -> Result<Vec<usize>> {
        self.local.basis().modes().ids().map(|id| modes.require(id)).collect()
    }

    pub fn act(&self, modes: &ModeSet, state: &FockState) -> Result<LocalAction> {
        let pos = self.positions(modes)?;
        self.act_at(&pos, modes, state)
    }

    fn act_at(&self, pos: &[usize], modes: &ModeSet, state: &FockState) -> Result<LocalAction> {
        let occ = state.occupations();
        let local = FockState::new(pos.iter().map(|&k| occ[k]).collect());
        let domain = self.local.basis();
        let Some(col) = domain.index_of(&local)? else {
            return Ok(LocalAction { outputs: vec![(state.clone(), C64::new(1.0, 0.0))], out_of_domain: true, truncated: 0.0 });
        };
        let u = self.local.entries();
        let mut action = LocalAction::default();
        for row in 0..domain.dim() {
            let a = u[(row, col)];
            if a.norm() < 1e-15 {
                continue;
            }
            let mut out = occ.to_vec();
            for (&k, &n) in pos.iter().zip(domain.state(row).occupations()) {
                out[k] = n;
            }
            let out = FockState::new(out);
            if modes.validate(&out).is_ok() {
                action.outputs.push((out, a));
            } else {
                action.truncated += a.norm_sqr();
            }
        }
        Ok(action)
    }

    /// The gate's matrix on a joint basis, plus leaked weight and the joint
    /// states whose footprint configuration lies outside the domain.
    pub fn embed(&self, joint: &SubspaceBasis) -> Result<(CMatrix, f64, Vec<FockState>)> {
        let pos = self.positions(joint.modes())?;
        let d = joint.dim();
        let mut m = CMatrix::zeros(d, d);
        let mut leak = 0.0;
        let mut ood = Vec::new();
        for (col, s) in joint.states().iter().enumerate() {
            let action = self.act_at(&pos, joint.modes(), s)?;
            if action.out_of_domain {
                ood.push(s.clone());
            }
            leak += action.truncated;
            for (t, a) in action.outputs {
                match joint.lookup(&t) {
                    Some(row) => m[(row, col)] += a,
                    None => leak += a.norm_sqr(),
                }
            }
        }
        Ok((m, leak.sqrt(), ood))
    }
}

/// `exp(−itH)` as a gate over all modes of `H`'s basis.
pub fn evolve(h: &OperatorMatrix, t: f64) -> Result<Gate> {
    let u = linalg::HermitianEigen::new(h.entries())?.evolve(t);
    Gate::new("evolve", h.with_entries(u)?).map(|g| g.with_param("t", t))
}

/// `1 − |tr(U†V)|/d`.
pub fn distance_up_to_phase(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", u.shape(), v.shape())));
    }
    for m in [u, v] {
        let err = linalg::unitarity_error(m);
        if err > 1e-8 {
            return Err(Error::NotUnitary(err));
        }
    }
    Ok(phase_distance_unchecked(u, v))
}

pub(crate) fn phase_distance_unchecked(u: &CMatrix, v: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    let tr: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    (1.0 - tr.norm() / d).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_pump_subspace;
    use crate::linalg::{c, max_abs_diff, re};
    use crate::operators::{chi2_generators, g1_expr};

    #[test]
    fn evolve_zero_is_identity() {
        let g = chi2_generators(2).unwrap();
        let u = evolve(&g.g1, 0.0).unwrap();
        assert!(max_abs_diff(u.unitary().entries(), &CMatrix::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn evolve_half_x_for_pi() {
        let g = chi2_generators(1).unwrap();
        let u = evolve(&g.g2, std::f64::consts::PI).unwrap();
        let minus_ix = CMatrix::from_row_slice(2, 2, &[re(0.0), c(0.0, -1.0), c(0.0, -1.0), re(0.0)]);
        assert!(max_abs_diff(u.unitary().entries(), &minus_ix) < 1e-14);
    }

    #[test]
    fn evolve_two_g1_from_111() {
        let basis = Arc::new(SubspaceBasis::qutrit_logical());
        let h = g1_expr().to_matrix(&basis).unwrap().scaled(re(2.0));
        let t = 2.0 * std::f64::consts::PI / (3.0 * 6f64.sqrt());
        let u = evolve(&h, t).unwrap();
        let psi = u.unitary().entries().column(0).into_owned();
        let expect = [-0.5, std::f64::consts::FRAC_1_SQRT_2, -0.5];
        for k in 0..3 {
            assert!((psi[k] - re(expect[k])).norm() < 1e-12);
        }
    }

    #[test]
    fn evolve_rejects_non_hermitian() {
        let g = chi2_generators(1).unwrap();
        assert!(matches!(evolve(&g.g1.scaled(c(0.0, 1.0)), 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn distance_examples() {
        let u = evolve(&chi2_generators(2).unwrap().g1, 0.9).unwrap().unitary().entries().clone();
        assert!(distance_up_to_phase(&u, &u).unwrap() < 1e-15);
        let phased = &u * C64::from_polar(1.0, std::f64::consts::PI / 7.0);
        assert!(distance_up_to_phase(&u, &phased).unwrap() < 1e-15);
        let x = CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        assert!((distance_up_to_phase(&CMatrix::identity(2, 2), &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(distance_up_to_phase(&(x.clone() * re(2.0)), &x).is_err());
    }

    #[test]
    fn identity_outside_domain() {
        let h1 = Arc::new(enumerate_pump_subspace(1));
        let gate = evolve(&chi2_generators(1).unwrap().g1, 0.4).unwrap();
        let joint = SubspaceBasis::product(ModeSet::pump_modes(1));
        let (m, leak, ood) = gate.embed(&joint).unwrap();
        assert_eq!(leak, 0.0);
        assert_eq!(ood.len(), joint.dim() - h1.dim());
        let vac = joint.lookup(&FockState::vacuum(3)).unwrap();
        assert_eq!(m[(vac, vac)], re(1.0));
        assert!(linalg::unitarity_error(&m) < 1e-12);
    }

    #[test]
    fn convention_roundtrip() {
        assert_eq!(PhaseConvention::default().berry_roundtrip(), re(-1.0));
        assert_eq!(PhaseConvention::with_berry(re(1.0)).unwrap().berry_roundtrip(), re(1.0));
        assert!(PhaseConvention::new(re(2.0), re(1.0)).is_err());
    }
}
