//! Bulk and boundary rotations on `H_{n+1}`, first-order Trotter products
//! `V̂(θ) ≈ [e^{2iθĜ/m} Û(θ/m)]^m`, and doublet-isolated SU(2) rotations.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::enumerate_pump_subspace;
use crate::gates::{distance_up_to_phase, evolve, restrict, Gate};
use crate::linalg::{self, c, re, CMatrix};
use crate::operators::{boundary_pauli, chi2_generators, BoundaryPauli, OperatorMatrix, PauliAxis};
use crate::synthesis::{self, PulseSequence, SynthesisProblem, Target};

/// Which three-wave generator a rotation follows: `Ĝ₁` (σ^y rungs) or `Ĝ₂` (σ^x rungs).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Y,
    X,
}

impl Axis {
    pub fn pauli(self) -> PauliAxis {
        match self {
            Axis::Y => PauliAxis::Y,
            Axis::X => PauliAxis::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub theta: f64,
    pub m: usize,
    pub axis: Axis,
    /// Rotations act on `H_{n+1}`.
    pub n: u32,
}

impl TrotterPlan {
    pub fn new(theta: f64, m: usize, axis: Axis, n: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("Trotter step count must be ≥ 1".into()));
        }
        require_bulk(n)?;
        Ok(Self { theta, m, axis, n })
    }
}

fn require_bulk(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("bulk rotations need n ≥ 2, got {n}")));
    }
    Ok(())
}

fn rung_sum(axis: Axis, n: u32, rungs: impl Iterator<Item = u32>) -> Result<OperatorMatrix> {
    let basis = Arc::new(enumerate_pump_subspace(n + 1));
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for k in rungs {
        let p = BoundaryPauli { n, k, axis: axis.pauli() };
        m += boundary_pauli(&p)?.entries() * re(p.expansion_coefficient());
    }
    OperatorMatrix::new(basis, m)
}

/// `Σ_{k=1}^{n−1} (n+1−k)√(k+1) σ_{k+1,k}` on `H_{n+1}`.
pub fn bulk_generator(axis: Axis, n: u32) -> Result<OperatorMatrix> {
    require_bulk(n)?;
    rung_sum(axis, n, 1..n)
}

/// `√(n+1) σ_{n+1,n} + (n+1) σ_{1,0}` on `H_{n+1}`.
pub fn boundary_generator(axis: Axis, n: u32) -> Result<OperatorMatrix> {
    require_bulk(n)?;
    rung_sum(axis, n, [0, n].into_iter())
}

/// `Ĝ₁` or `Ĝ₂` on `H_{n+1}`.
pub fn chi2_generator(axis: Axis, n: u32) -> Result<OperatorMatrix> {
    let g = chi2_generators(n + 1)?;
    Ok(match axis {
        Axis::Y => g.g1,
        Axis::X => g.g2,
    })
}

/// `Û(θ) = exp(−iθ · bulk)`; fixes `|n+1,n+1,0⟩` and `|0,0,n+1⟩`.
pub fn bulk_rotation(axis: Axis, theta: f64, n: u32) -> Result<Gate> {
    Ok(evolve(&bulk_generator(axis, n)?, theta)?.relabeled("U_bulk"))
}

/// `V̂(θ) = exp(iθ · boundary)`.
pub fn boundary_rotation(axis: Axis, theta: f64, n: u32) -> Result<Gate> {
    Ok(evolve(&boundary_generator(axis, n)?, -theta)?.relabeled("V").with_param("theta", theta))
}

#[derive(Clone, Debug)]
pub struct TrotterResult {
    pub plan: TrotterPlan,
    pub product: Gate,
    pub exact: Gate,
    /// `‖V_m − V‖_F`.
    pub error: f64,
    pub phase_distance: f64,
}

/// `[e^{2iθĜ/m} Û(θ/m)]^m` against the exact boundary rotation.
pub fn trotter_v(plan: &TrotterPlan) -> Result<TrotterResult> {
    let m = plan.m as f64;
    let g = chi2_generator(plan.axis, plan.n)?;
    let step_g = evolve(&g, -2.0 * plan.theta / m)?;
    let step_u = bulk_rotation(plan.axis, plan.theta / m, plan.n)?;
    let step = step_g.unitary().entries() * step_u.unitary().entries();
    let d = step.nrows();
    let mut v = CMatrix::identity(d, d);
    // Repeated squaring keeps large m cheap.
    let (mut base, mut e) = (step, plan.m);
    while e > 0 {
        if e & 1 == 1 {
            v = &base * &v;
        }
        base = &base * &base;
        e >>= 1;
    }
    let exact = boundary_rotation(plan.axis, plan.theta, plan.n)?;
    let error = linalg::frobenius(&(&v - exact.unitary().entries()));
    let phase_distance = distance_up_to_phase(&v, exact.unitary().entries())?;
    let product = Gate::new("V_trotter", g.with_entries(v)?)?.with_param("theta", plan.theta).with_param("m", m);
    Ok(TrotterResult { plan: *plan, product, exact, error, phase_distance })
}

/// `(m, error)` for each step count, computed in parallel, in input order.
pub fn convergence_curve(theta: f64, axis: Axis, n: u32, ms: &[usize]) -> Result<Vec<(usize, f64)>> {
    ms.par_iter()
        .map(|&m| Ok((m, trotter_v(&TrotterPlan::new(theta, m, axis, n)?)?.error)))
        .collect()
}

pub fn curve_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("m,distance\n");
    for (m, e) in curve {
        out.push_str(&format!("{m},{e:.17e}\n"));
    }
    out
}

/// `1, 2, 4, …, m_max`.
pub fn doubling_steps(m_max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |m| m.checked_mul(2)).take_while(|&m| m <= m_max).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Doublet {
    /// `(|0,0,n+1⟩, |1,1,n⟩)`.
    Top,
    /// `(|n,n,1⟩, |n+1,n+1,0⟩)`.
    Bottom,
}

impl Doublet {
    /// Canonical `H_{n+1}` indices `(e₀, e₁)`.
    pub fn indices(self, n: u32) -> [usize; 2] {
        match self {
            Doublet::Top => [n as usize + 1, n as usize],
            Doublet::Bottom => [1, 0],
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Doublet::Top => Doublet::Bottom,
            Doublet::Bottom => Doublet::Top,
        }
    }
}

fn pauli2(axis: Axis) -> CMatrix {
    crate::operators::embedded_pauli(2, 0, 1, axis.pauli())
}

/// `exp(−iφσ/2)`.
fn rot2(axis: Axis, phi: f64) -> CMatrix {
    CMatrix::identity(2, 2) * re((phi / 2.0).cos()) - pauli2(axis) * c(0.0, (phi / 2.0).sin())
}

/// Angles `(a, b, c)` with `U = R_x(a) R_y(b) R_x(c)` for `U ∈ SU(2)`.
pub fn euler_xyx(u: &CMatrix) -> (f64, f64, f64) {
    // Conjugating by (X+Z)/√2 swaps x and z and negates y, giving a ZYZ problem.
    let h = CMatrix::from_row_slice(2, 2, &[re(1.0), re(1.0), re(1.0), re(-1.0)]) * re(std::f64::consts::FRAC_1_SQRT_2);
    let w = &h * u * &h;
    let (w00, w10) = (w[(0, 0)], w[(1, 0)]);
    let b = 2.0 * w10.norm().atan2(w00.norm());
    let sum = if w00.norm() > 1e-14 { -2.0 * w00.arg() } else { 0.0 };
    let diff = if w10.norm() > 1e-14 { 2.0 * w10.arg() } else { 0.0 };
    ((sum + diff) / 2.0, -b, (sum - diff) / 2.0)
}

/// `u / √det u`.
pub fn project_su2(u: &CMatrix) -> Result<CMatrix> {
    let err = linalg::unitarity_error(u);
    if u.shape() != (2, 2) || err > 1e-8 {
        return Err(Error::NotUnitary(err));
    }
    Ok(u / u.determinant().sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsolatedRotation {
    pub axis: Axis,
    pub angle: f64,
    pub sequence: PulseSequence,
    /// `V̂` angles (`θ = −t`) of each segment, in application order.
    pub v_angles: Vec<(Axis, f64)>,
}

#[derive(Clone, Debug)]
pub struct BoundarySu2 {
    pub n: u32,
    pub doublet: Doublet,
    pub euler: (f64, f64, f64),
    pub rotations: Vec<IsolatedRotation>,
    pub unitary: OperatorMatrix,
    /// Phase-insensitive distance on the target doublet.
    pub doublet_distance: f64,
    /// Phase-insensitive distance of the full `H_{n+1}` action from `R ⊕ I`.
    pub full_distance: f64,
    /// Phase-insensitive distance of the opposite doublet's block from identity.
    pub opposite_deviation: f64,
    pub success: bool,
}

impl BoundarySu2 {
    /// The `V̂` gates in application order.
    pub fn gates(&self) -> Result<Vec<Gate>> {
        self.rotations
            .iter()
            .flat_map(|r| r.v_angles.iter())
            .map(|&(axis, theta)| boundary_rotation(axis, theta, self.n))
            .collect()
    }
}

pub const BOUNDARY_TOL: f64 = 1e-10;
const ISOLATION_SEGMENTS: usize = 8;

fn embed_on_doublet(n: u32, doublet: Doublet, r: &CMatrix) -> CMatrix {
    let d = n as usize + 2;
    let mut u = CMatrix::identity(d, d);
    let idx = doublet.indices(n);
    for a in 0..2 {
        for b in 0..2 {
            u[(idx[a], idx[b])] = r[(a, b)];
        }
    }
    u
}

fn isolate(n: u32, doublet: Doublet, axis: Axis, angle: f64, seed: u64) -> Result<IsolatedRotation> {
    let gens = [Axis::Y, Axis::X];
    let ops = gens.iter().map(|&a| boundary_generator(a, n)).collect::<Result<Vec<_>>>()?;
    let target = ops[0].with_entries(embed_on_doublet(n, doublet, &rot2(axis, angle)))?;
    let labels = gens.iter().map(|a| format!("B{a:?}").to_lowercase());
    let problem = SynthesisProblem::new(labels.zip(ops).collect(), Target::Unitary(target), BOUNDARY_TOL)?
        .with_segments(ISOLATION_SEGMENTS)
        .with_restarts(64)
        .with_seed(seed);
    let sequence = synthesis::synthesize(&problem)?;
    let v_angles = sequence.segments.iter().map(|s| (gens[s.generator], -s.duration)).collect();
    Ok(IsolatedRotation { axis, angle, sequence, v_angles })
}

/// Realizes `target` (any 2×2 unitary, taken up to phase) on one boundary
/// doublet of `H_{n+1}` from products of exact `V̂₁`, `V̂₂` rotations.
pub fn boundary_su2(n: u32, doublet: Doublet, target: &CMatrix, seed: u64) -> Result<BoundarySu2> {
    require_bulk(n)?;
    let su = project_su2(target)?;
    let (a, b, c0) = euler_xyx(&su);
    let mut rotations = Vec::new();
    // Rightmost factor acts first.
    for (k, (axis, angle)) in [(Axis::X, c0), (Axis::Y, b), (Axis::X, a)].into_iter().enumerate() {
        rotations.push(isolate(n, doublet, axis, angle, seed.wrapping_add(k as u64))?);
    }
    let ops = [boundary_generator(Axis::Y, n)?, boundary_generator(Axis::X, n)?];
    let mut u = CMatrix::identity(n as usize + 2, n as usize + 2);
    for r in &rotations {
        u = synthesis::sequence_unitary(&ops, &r.sequence)? * u;
    }
    let (block, _) = restrict(&u, &doublet.indices(n));
    let (other, _) = restrict(&u, &doublet.opposite().indices(n));
    let doublet_distance = distance_up_to_phase(&block, target)?;
    let full_distance = distance_up_to_phase(&u, &embed_on_doublet(n, doublet, &su))?;
    let opposite_deviation = crate::gates::distance_up_to_phase(&other, &CMatrix::identity(2, 2))?;
    let success = rotations.iter().all(|r| r.sequence.success) && full_distance < 1e-8;
    Ok(BoundarySu2 {
        n,
        doublet,
        euler: (a, b, c0),
        rotations,
        unitary: ops[0].with_entries(u)?,
        doublet_distance,
        full_distance,
        opposite_deviation,
        success,
    })
}
