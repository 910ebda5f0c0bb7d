//! Second-quantized operator expressions and their dense restrictions to a
//! [`SubspaceBasis`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_pump_subspace, FockState, ModeSet, SubspaceBasis, IDLER, PUMP, SIGNAL};
use crate::linalg::{self, c, re, CMatrix, CVector, C64};

pub const PUMP_ANCILLA: &str = "p'";
pub const SIGNAL_ANCILLA: &str = "s'";
pub const IDLER_ANCILLA: &str = "i'";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ladder {
    Create,
    Annihilate,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LadderOp {
    pub mode: String,
    pub kind: Ladder,
}

impl LadderOp {
    pub fn create(mode: &str) -> Self {
        Self { mode: mode.to_string(), kind: Ladder::Create }
    }

    pub fn annihilate(mode: &str) -> Self {
        Self { mode: mode.to_string(), kind: Ladder::Annihilate }
    }
}

/// `coeff · op₁ op₂ … op_k`; the rightmost operator acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: C64,
    pub ops: Vec<LadderOp>,
}

/// A finite sum of ladder monomials, scaled overall by the coupling `kappa`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorExpr {
    terms: Vec<Term>,
    kappa: f64,
}

/// Result of applying an expression to one Fock state.
#[derive(Clone, Debug, Default)]
pub struct Applied {
    /// Contributions that respect every truncation.
    pub inside: Vec<(FockState, C64)>,
    /// `Σ |amp|²` of contributions that would exceed a truncation.
    pub truncated_norm_sqr: f64,
}

impl Default for OperatorExpr {
    fn default() -> Self {
        Self::zero()
    }
}

impl OperatorExpr {
    pub fn zero() -> Self {
        Self { terms: Vec::new(), kappa: 1.0 }
    }

    pub fn identity() -> Self {
        Self::monomial(re(1.0), Vec::new())
    }

    pub fn monomial(coeff: C64, ops: Vec<LadderOp>) -> Self {
        Self { terms: vec![Term { coeff, ops }], kappa: 1.0 }
    }

    pub fn number(mode: &str) -> Self {
        Self::monomial(re(1.0), vec![LadderOp::create(mode), LadderOp::annihilate(mode)])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// Terms with `kappa` folded into the coefficients.
    fn effective_terms(&self) -> impl Iterator<Item = (C64, &[LadderOp])> {
        self.terms.iter().map(move |t| (t.coeff * self.kappa, t.ops.as_slice()))
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self {
            terms: self.terms.iter().map(|t| Term { coeff: t.coeff * z, ops: t.ops.clone() }).collect(),
            kappa: self.kappa,
        }
    }

    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.conj(),
                ops: t
                    .ops
                    .iter()
                    .rev()
                    .map(|op| LadderOp {
                        mode: op.mode.clone(),
                        kind: match op.kind {
                            Ladder::Create => Ladder::Annihilate,
                            Ladder::Annihilate => Ladder::Create,
                        },
                    })
                    .collect(),
            })
            .collect();
        Self { terms, kappa: self.kappa }
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &OperatorExpr) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, oa) in self.effective_terms() {
            for (cb, ob) in other.effective_terms() {
                let mut ops = oa.to_vec();
                ops.extend_from_slice(ob);
                terms.push(Term { coeff: ca * cb, ops });
            }
        }
        Self { terms, kappa: 1.0 }
    }

    pub fn modes(&self) -> BTreeSet<&str> {
        self.terms.iter().flat_map(|t| t.ops.iter().map(|o| o.mode.as_str())).collect()
    }

    /// Applies the expression to `state`. Annihilating an empty mode gives an
    /// exact zero; exceeding a truncation drops the term and records its weight.
    pub fn apply_state(&self, modes: &ModeSet, state: &FockState) -> Result<Applied> {
        let mut inside: BTreeMap<FockState, C64> = BTreeMap::new();
        let mut outside: BTreeMap<FockState, C64> = BTreeMap::new();
        'terms: for (coeff, ops) in self.effective_terms() {
            let mut occ: Vec<u32> = state.occupations().to_vec();
            let mut amp = coeff;
            let mut exceeded = false;
            for op in ops.iter().rev() {
                let k = modes.require(&op.mode)?;
                match op.kind {
                    Ladder::Create => {
                        occ[k] += 1;
                        amp *= (occ[k] as f64).sqrt();
                        if occ[k] > modes.get(k).max_occupation {
                            exceeded = true;
                        }
                    }
                    Ladder::Annihilate => {
                        if occ[k] == 0 {
                            continue 'terms;
                        }
                        amp *= (occ[k] as f64).sqrt();
                        occ[k] -= 1;
                    }
                }
            }
            let target = if exceeded { &mut outside } else { &mut inside };
            *target.entry(FockState::new(occ)).or_default() += amp;
        }
        Ok(Applied {
            inside: inside.into_iter().filter(|(_, a)| *a != C64::new(0.0, 0.0)).collect(),
            truncated_norm_sqr: outside.values().map(|a| a.norm_sqr()).sum(),
        })
    }

    /// Dense restriction `⟨row|expr|col⟩` to `basis`. Contributions that leave the
    /// basis are dropped; their Frobenius weight is reported as the leakage norm.
    pub fn to_matrix(&self, basis: &Arc<SubspaceBasis>) -> Result<OperatorMatrix> {
        let d = basis.dim();
        let mut m = CMatrix::zeros(d, d);
        let mut leak = 0.0;
        for (col, s) in basis.states().iter().enumerate() {
            let applied = self.apply_state(basis.modes(), s)?;
            leak += applied.truncated_norm_sqr;
            for (t, a) in applied.inside {
                match basis.lookup(&t) {
                    Some(row) => m[(row, col)] += a,
                    None => leak += a.norm_sqr(),
                }
            }
        }
        // Unknown modes surface even on an empty basis.
        for mode in self.modes() {
            basis.modes().require(mode)?;
        }
        Ok(OperatorMatrix { basis: Arc::clone(basis), entries: m, leakage: leak.sqrt() })
    }

    /// Norm of the part of `expr |ψ⟩` that falls outside `basis`.
    pub fn state_leakage(&self, basis: &SubspaceBasis, psi: &CVector) -> Result<f64> {
        let mut outside: BTreeMap<FockState, C64> = BTreeMap::new();
        let mut truncated = 0.0;
        for (col, s) in basis.states().iter().enumerate() {
            if psi[col].norm() == 0.0 {
                continue;
            }
            let applied = self.apply_state(basis.modes(), s)?;
            truncated += applied.truncated_norm_sqr * psi[col].norm_sqr();
            for (t, a) in applied.inside {
                if basis.lookup(&t).is_none() {
                    *outside.entry(t).or_default() += a * psi[col];
                }
            }
        }
        Ok((truncated + outside.values().map(|a| a.norm_sqr()).sum::<f64>()).sqrt())
    }

    /// Leakage audit for time evolution of `ψ`: the largest single-state
    /// leakage over every basis state reachable from the support of `ψ`
    /// through nonzero matrix elements. Zero means the evolution is exact.
    pub fn leakage_audit(&self, basis: &Arc<SubspaceBasis>, psi: &CVector) -> Result<f64> {
        let m = self.to_matrix(basis)?;
        let d = basis.dim();
        let mut seen = vec![false; d];
        let mut queue: VecDeque<usize> = (0..d).filter(|&k| psi[k].norm() > 0.0).collect();
        for &k in &queue {
            seen[k] = true;
        }
        let mut worst: f64 = 0.0;
        while let Some(k) = queue.pop_front() {
            let mut e = CVector::zeros(d);
            e[k] = re(1.0);
            worst = worst.max(self.state_leakage(basis, &e)?);
            for r in 0..d {
                if !seen[r] && m.entries[(r, k)].norm() > 0.0 {
                    seen[r] = true;
                    queue.push_back(r);
                }
            }
        }
        Ok(worst)
    }
}

impl Add for OperatorExpr {
    type Output = OperatorExpr;

    fn add(self, rhs: OperatorExpr) -> OperatorExpr {
        let mut terms: Vec<Term> = self.effective_terms().map(|(coeff, ops)| Term { coeff, ops: ops.to_vec() }).collect();
        terms.extend(rhs.effective_terms().map(|(coeff, ops)| Term { coeff, ops: ops.to_vec() }));
        OperatorExpr { terms, kappa: 1.0 }
    }
}

impl Sub for OperatorExpr {
    type Output = OperatorExpr;

    fn sub(self, rhs: OperatorExpr) -> OperatorExpr {
        self + rhs.scaled(re(-1.0))
    }
}

impl Mul<C64> for OperatorExpr {
    type Output = OperatorExpr;

    fn mul(self, z: C64) -> OperatorExpr {
        self.scaled(z)
    }
}

/// `a†_x a†_y a_z`: converts one `z` quantum into an `x`,`y` pair.
pub fn pair_creation(x: &str, y: &str, z: &str) -> OperatorExpr {
    OperatorExpr::monomial(re(1.0), vec![LadderOp::create(x), LadderOp::create(y), LadderOp::annihilate(z)])
}

/// `i(T − T†)` with `T = a†_s a†_i a_p`, without the ½ prefactor.
pub fn three_wave_y_unhalved(s: &str, i: &str, p: &str) -> OperatorExpr {
    let t = pair_creation(s, i, p);
    (t.clone() - t.adjoint()) * c(0.0, 1.0)
}

/// `T + T†` with `T = a†_s a†_i a_p`, without the ½ prefactor.
pub fn three_wave_x_unhalved(s: &str, i: &str, p: &str) -> OperatorExpr {
    let t = pair_creation(s, i, p);
    t.clone() + t.adjoint()
}

/// `(iκ/2)(a†_s a†_i a_p − a_s a_i a†_p)`.
pub fn three_wave_y(s: &str, i: &str, p: &str) -> OperatorExpr {
    three_wave_y_unhalved(s, i, p) * re(0.5)
}

/// `(κ/2)(a†_s a†_i a_p + a_s a_i a†_p)`.
pub fn three_wave_x(s: &str, i: &str, p: &str) -> OperatorExpr {
    three_wave_x_unhalved(s, i, p) * re(0.5)
}

/// `Ĝ₁` on the default signal/idler/pump modes.
pub fn g1_expr() -> OperatorExpr {
    three_wave_y(SIGNAL, IDLER, PUMP)
}

/// `Ĝ₂` on the default signal/idler/pump modes.
pub fn g2_expr() -> OperatorExpr {
    three_wave_x(SIGNAL, IDLER, PUMP)
}

/// Injection coupling `a†_s a†_i a_{p'} + a_s a_i a†_{p'}` (no ½ prefactor).
pub fn injection_generator() -> OperatorExpr {
    three_wave_x_unhalved(SIGNAL, IDLER, PUMP_ANCILLA)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AncillaKind {
    /// Signal and idler coupled to the ancilla pump `p'`.
    PumpPrime,
    /// Ancilla signal/idler `s'`,`i'` coupled to the pump.
    SignalIdlerPrime,
}

/// The `(Ĝ₁-type, Ĝ₂-type)` pair for an ancilla coupling, each with the ½ prefactor.
pub fn ancilla_generators(kind: AncillaKind) -> (OperatorExpr, OperatorExpr) {
    match kind {
        AncillaKind::PumpPrime => (three_wave_y(SIGNAL, IDLER, PUMP_ANCILLA), three_wave_x(SIGNAL, IDLER, PUMP_ANCILLA)),
        AncillaKind::SignalIdlerPrime => {
            (three_wave_y(SIGNAL_ANCILLA, IDLER_ANCILLA, PUMP), three_wave_x(SIGNAL_ANCILLA, IDLER_ANCILLA, PUMP))
        }
    }
}

/// The five χ⁽²⁾ operators restricted to `H_n` (canonical order).
#[derive(Clone, Debug)]
pub struct Chi2Generators {
    pub g1: OperatorMatrix,
    pub g2: OperatorMatrix,
    pub ns: OperatorMatrix,
    pub ni: OperatorMatrix,
    pub np: OperatorMatrix,
}

impl Chi2Generators {
    pub fn on(basis: &Arc<SubspaceBasis>) -> Result<Self> {
        Ok(Self {
            g1: g1_expr().to_matrix(basis)?,
            g2: g2_expr().to_matrix(basis)?,
            ns: OperatorExpr::number(SIGNAL).to_matrix(basis)?,
            ni: OperatorExpr::number(IDLER).to_matrix(basis)?,
            np: OperatorExpr::number(PUMP).to_matrix(basis)?,
        })
    }

    pub fn basis(&self) -> &Arc<SubspaceBasis> {
        self.g1.basis()
    }

    pub fn labeled(&self) -> [(&'static str, &OperatorMatrix); 5] {
        [("G1", &self.g1), ("G2", &self.g2), ("Ns", &self.ns), ("Ni", &self.ni), ("Np", &self.np)]
    }
}

/// `Ĝ₁, Ĝ₂, N̂_s, N̂_i, N̂_p` on `H_n`.
pub fn chi2_generators(n: u32) -> Result<Chi2Generators> {
    if n == 0 {
        return Err(Error::InvalidArgument("pump subspace label must be ≥ 1".into()));
    }
    Chi2Generators::on(&Arc::new(enumerate_pump_subspace(n)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
}

/// Pauli operator on one rung of `H_{n+1}`.
///
/// Rung `k` couples `e₀ = |n−k, n−k, k+1⟩` and `e₁ = |n+1−k, n+1−k, k⟩`
/// with `σ^y = −i|e₀⟩⟨e₁| + i|e₁⟩⟨e₀|`. This orientation makes
/// `2Ĝ₁ = √(n+1)σ^y_{n+1,n} + (n+1)σ^y_{1,0} + Σ_{k=1}^{n−1}(n+1−k)√(k+1)σ^y_{k+1,k}`
/// hold exactly, and likewise for `Ĝ₂` with `σ^x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPauli {
    pub n: u32,
    pub k: u32,
    pub axis: PauliAxis,
}

impl BoundaryPauli {
    /// Canonical-order indices `(e₀, e₁)` in `H_{n+1}`; the index is the pump count.
    pub fn indices(&self) -> Result<(usize, usize)> {
        if self.k > self.n {
            return Err(Error::InvalidArgument(format!("rung {} out of range 0..={}", self.k, self.n)));
        }
        Ok((self.k as usize + 1, self.k as usize))
    }

    /// Coefficient of this rung in the expansion of `2Ĝ₁` (or `2Ĝ₂`).
    pub fn expansion_coefficient(&self) -> f64 {
        let (n, k) = (self.n as f64, self.k as f64);
        (n + 1.0 - k) * (k + 1.0).sqrt()
    }
}

/// `2×2` Pauli block placed on `(e0, e1)` of a `dim`-dimensional space.
pub fn embedded_pauli(dim: usize, e0: usize, e1: usize, axis: PauliAxis) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    match axis {
        PauliAxis::X => {
            m[(e0, e1)] = re(1.0);
            m[(e1, e0)] = re(1.0);
        }
        PauliAxis::Y => {
            m[(e0, e1)] = c(0.0, -1.0);
            m[(e1, e0)] = c(0.0, 1.0);
        }
    }
    m
}

pub fn boundary_pauli(p: &BoundaryPauli) -> Result<OperatorMatrix> {
    let (e0, e1) = p.indices()?;
    let basis = Arc::new(enumerate_pump_subspace(p.n + 1));
    let m = embedded_pauli(basis.dim(), e0, e1, p.axis);
    OperatorMatrix::new(basis, m)
}

/// Dense operator on a shared basis. `leakage` is the Frobenius weight of
/// the contributions dropped when the matrix was restricted to the basis.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    basis: Arc<SubspaceBasis>,
    entries: CMatrix,
    leakage: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    basis: SubspaceBasis,
    /// Row-major `[re, im]` pairs.
    entries: Vec<[f64; 2]>,
    #[serde(default)]
    leakage: f64,
}

impl Serialize for OperatorMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for col in 0..d {
                let z = self.entries[(r, col)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixRepr { basis: (*self.basis).clone(), entries, leakage: self.leakage }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        let n = r.basis.dim();
        if r.entries.len() != n * n {
            return Err(serde::de::Error::custom(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                r.entries.len()
            )));
        }
        let m = CMatrix::from_row_iterator(n, n, r.entries.iter().map(|&[a, b]| c(a, b)));
        Ok(OperatorMatrix { basis: Arc::new(r.basis), entries: m, leakage: r.leakage })
    }
}

impl OperatorMatrix {
    pub fn new(basis: Arc<SubspaceBasis>, entries: CMatrix) -> Result<Self> {
        let d = basis.dim();
        if entries.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "{}x{} matrix on a basis of {d} states",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { basis, entries, leakage: 0.0 })
    }

    pub fn identity(basis: Arc<SubspaceBasis>) -> Self {
        let d = basis.dim();
        Self { basis, entries: CMatrix::identity(d, d), leakage: 0.0 }
    }

    pub fn basis(&self) -> &Arc<SubspaceBasis> {
        &self.basis
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// Same basis, new entries.
    pub fn with_entries(&self, entries: CMatrix) -> Result<Self> {
        Self::new(Arc::clone(&self.basis), entries)
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.entries)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn dagger(&self) -> Self {
        Self { basis: Arc::clone(&self.basis), entries: self.entries.adjoint(), leakage: self.leakage }
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self { basis: Arc::clone(&self.basis), entries: &self.entries * z, leakage: self.leakage * z.norm() }
    }

    pub fn same_basis(&self, other: &OperatorMatrix) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    fn check_basis(&self, other: &OperatorMatrix) {
        assert!(self.same_basis(other), "operators live on different bases");
    }

    /// `i[self, other]`.
    pub fn bracket(&self, other: &OperatorMatrix) -> Self {
        self.check_basis(other);
        Self { basis: Arc::clone(&self.basis), entries: linalg::bracket(&self.entries, &other.entries), leakage: 0.0 }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.entries * v
    }

    /// Restriction to the span of `sub`'s states (all must be members).
    pub fn restrict(&self, sub: &Arc<SubspaceBasis>) -> Result<Self> {
        let idx: Vec<usize> = sub.states().iter().map(|s| self.basis.require_index(s)).collect::<Result<_>>()?;
        let d = idx.len();
        let m = CMatrix::from_fn(d, d, |r, col| self.entries[(idx[r], idx[col])]);
        Self::new(Arc::clone(sub), m)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_basis(rhs);
        OperatorMatrix {
            basis: Arc::clone(&self.basis),
            entries: &self.entries + &rhs.entries,
            leakage: self.leakage.hypot(rhs.leakage),
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_basis(rhs);
        OperatorMatrix {
            basis: Arc::clone(&self.basis),
            entries: &self.entries - &rhs.entries,
            leakage: self.leakage.hypot(rhs.leakage),
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_basis(rhs);
        OperatorMatrix { basis: Arc::clone(&self.basis), entries: &self.entries * &rhs.entries, leakage: 0.0 }
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, z: C64) -> OperatorMatrix {
        self.scaled(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use proptest::prelude::*;

    const S2: f64 = std::f64::consts::SQRT_2;

    fn h2_logical() -> Arc<SubspaceBasis> {
        Arc::new(SubspaceBasis::qutrit_logical())
    }

    #[test]
    fn g1_on_qutrit_from_ladder_amplitudes() {
        // ⟨2,2,0|a†a†a|1,1,1⟩ = 2, ⟨0,0,2|a a a†|1,1,1⟩ = √2.
        let g1 = g1_expr().to_matrix(&h2_logical()).unwrap();
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[re(0.0), c(0.0, -1.0), c(0.0, S2 / 2.0), c(0.0, 1.0), re(0.0), re(0.0), c(0.0, -S2 / 2.0), re(0.0), re(0.0)],
        );
        assert!(max_abs_diff(g1.entries(), &expected) < 1e-15);
        assert_eq!(g1.leakage(), 0.0);
    }

    #[test]
    fn g2_on_qutrit_matches_closed_form() {
        let g2 = g2_expr().to_matrix(&h2_logical()).unwrap();
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[re(0.0), re(1.0), re(S2 / 2.0), re(1.0), re(0.0), re(0.0), re(S2 / 2.0), re(0.0), re(0.0)],
        );
        assert!(max_abs_diff(g2.entries(), &expected) < 1e-15);
    }

    #[test]
    fn g2_on_qubit_is_half_x() {
        let g2 = g2_expr().to_matrix(&Arc::new(enumerate_pump_subspace(1))).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[re(0.0), re(0.5), re(0.5), re(0.0)]);
        assert!(max_abs_diff(g2.entries(), &expected) < 1e-15);
    }

    #[test]
    fn pump_number_on_qutrit() {
        let np = OperatorExpr::number(PUMP).to_matrix(&h2_logical()).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![re(1.0), re(0.0), re(2.0)]));
        assert!(max_abs_diff(np.entries(), &expected) < 1e-15);
    }

    #[test]
    fn qutrit_derived_generators() {
        let basis = h2_logical();
        let g = Chi2Generators::on(&basis).unwrap();
        assert!(g.g1.is_hermitian(1e-12) && g.g2.is_hermitian(1e-12));
        let g3 = g.g1.bracket(&g.g2);
        let diag = |v: [f64; 3]| CMatrix::from_diagonal(&CVector::from_iterator(3, v.iter().map(|&x| re(x))));
        assert!(max_abs_diff(g3.entries(), &diag([1.0, -2.0, 1.0])) < 1e-14);
        let one = CMatrix::identity(3, 3);
        let g8 = (one.clone() - g.np.entries()) * re(0.5);
        assert!(max_abs_diff(&g8, &diag([0.0, 0.5, -0.5])) < 1e-15);
        let g9 = ((g.ns.entries() + g.ni.entries()) * re(0.5) + g.np.entries()) * re(0.5);
        assert!(max_abs_diff(&g9, &one) < 1e-15);
    }

    #[test]
    fn unknown_mode_rejected() {
        let e = three_wave_x("s", "i", "q");
        assert!(matches!(e.to_matrix(&h2_logical()), Err(Error::UnknownMode(_))));
    }

    #[test]
    fn pump_subspaces_are_invariant() {
        for n in 1..=6 {
            let g = chi2_generators(n).unwrap();
            for (_, m) in g.labeled() {
                assert_eq!(m.leakage(), 0.0, "n = {n}");
            }
        }
    }

    #[test]
    fn ancilla_pump_generator_amplitude() {
        let modes = ModeSet::from_pairs(&[("s", 1), ("i", 1), ("p'", 1)]).unwrap();
        let (g1p, g2p) = ancilla_generators(AncillaKind::PumpPrime);
        let out = g2p.apply_state(&modes, &FockState::new(vec![0, 0, 1])).unwrap();
        assert_eq!(out.inside.len(), 1);
        assert_eq!(out.inside[0].0, FockState::new(vec![1, 1, 0]));
        assert!((out.inside[0].1 - re(0.5)).norm() < 1e-15);
        let b = Arc::new(SubspaceBasis::product(modes));
        assert_eq!(g1p.to_matrix(&b).unwrap().hermiticity_error(), 0.0);
    }

    #[test]
    fn ancilla_signal_idler_generator_amplitude() {
        let modes = ModeSet::from_pairs(&[("s'", 1), ("i'", 1), ("p", 1)]).unwrap();
        let (_, g2) = ancilla_generators(AncillaKind::SignalIdlerPrime);
        let out = g2.apply_state(&modes, &FockState::new(vec![0, 0, 1])).unwrap();
        assert_eq!(out.inside, vec![(FockState::new(vec![1, 1, 0]), re(0.5))]);
    }

    #[test]
    fn truncation_is_exact_zero_with_reported_leakage() {
        let modes = ModeSet::from_pairs(&[("s", 1), ("i", 1), ("p", 1)]).unwrap();
        let b = Arc::new(SubspaceBasis::product(modes));
        let m = g2_expr().to_matrix(&b).unwrap();
        assert!(m.is_hermitian(0.0));
        // |1,1,1⟩ → |0,0,2⟩ exceeds the pump truncation.
        assert!(m.leakage() > 0.0);
    }

    #[test]
    fn decomposition_identity() {
        for n in 2..=6u32 {
            let g = chi2_generators(n + 1).unwrap();
            for (axis, gen) in [(PauliAxis::Y, &g.g1), (PauliAxis::X, &g.g2)] {
                let mut sum = CMatrix::zeros(gen.dim(), gen.dim());
                for k in 0..=n {
                    let p = BoundaryPauli { n, k, axis };
                    sum += boundary_pauli(&p).unwrap().entries() * re(p.expansion_coefficient());
                }
                let two_g = gen.entries() * re(2.0);
                assert!(max_abs_diff(&two_g, &sum) < 1e-12, "n = {n} axis {axis:?}");
            }
        }
    }

    #[test]
    fn boundary_pauli_structure() {
        let x = boundary_pauli(&BoundaryPauli { n: 1, k: 0, axis: PauliAxis::X }).unwrap();
        // H₂ canonical: [|2,2,0⟩, |1,1,1⟩, |0,0,2⟩]; rung 0 couples |1,1,1⟩ and |2,2,0⟩.
        assert_eq!(x.entries()[(0, 1)], re(1.0));
        assert_eq!(x.entries()[(1, 0)], re(1.0));
        let y = boundary_pauli(&BoundaryPauli { n: 4, k: 2, axis: PauliAxis::Y }).unwrap();
        assert!(y.is_hermitian(0.0));
        let a = boundary_pauli(&BoundaryPauli { n: 4, k: 0, axis: PauliAxis::X }).unwrap();
        let b = boundary_pauli(&BoundaryPauli { n: 4, k: 3, axis: PauliAxis::X }).unwrap();
        assert!(linalg::max_abs(a.bracket(&b).entries()) == 0.0);
        assert!(boundary_pauli(&BoundaryPauli { n: 2, k: 3, axis: PauliAxis::X }).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = g1_expr().to_matrix(&h2_logical()).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: OperatorMatrix = serde_json::from_str(&text).unwrap();
        assert!(max_abs_diff(back.entries(), m.entries()) == 0.0);
        assert!(back.same_basis(&m));
    }

    fn arb_expr() -> impl Strategy<Value = OperatorExpr> {
        let op = (0usize..3, any::<bool>()).prop_map(|(m, cr)| {
            let mode = ["s", "i", "p"][m];
            if cr {
                LadderOp::create(mode)
            } else {
                LadderOp::annihilate(mode)
            }
        });
        let term = (-2.0f64..2.0, -2.0f64..2.0, proptest::collection::vec(op, 0..4))
            .prop_map(|(a, b, ops)| OperatorExpr::monomial(c(a, b), ops));
        proptest::collection::vec(term, 1..4).prop_map(|ts| ts.into_iter().fold(OperatorExpr::zero(), |acc, t| acc + t))
    }

    proptest! {
        #[test]
        fn adjoint_is_a_homomorphism(e in arb_expr()) {
            let basis = Arc::new(SubspaceBasis::product(ModeSet::pump_modes(2)));
            let a = e.to_matrix(&basis).unwrap();
            let b = e.adjoint().to_matrix(&basis).unwrap();
            prop_assert!(max_abs_diff(b.entries(), &a.entries().adjoint()) < 1e-12);
        }
    }
}
