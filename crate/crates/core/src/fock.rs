//! Multi-mode bosonic Fock bases.
//!
//! A [`ModeSet`] fixes the order and truncation of the modes, a [`FockState`]
//! is an occupation vector in that order, and a [`SubspaceBasis`] is an
//! ordered list of distinct Fock states with a reverse index.
//!
//! The canonical order of the pump subspace `H_n` is ascending pump count,
//! `[|n,n,0⟩, |n-1,n-1,1⟩, …, |0,0,n⟩]`, so the basis index of `|j,j,n-j⟩`
//! is its pump occupation `n-j`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::operators::OperatorExpr;

pub const SIGNAL: &str = "s";
pub const IDLER: &str = "i";
pub const PUMP: &str = "p";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSpec {
    pub id: String,
    pub max_occupation: u32,
}

impl ModeSpec {
    pub fn new(id: impl Into<String>, max_occupation: u32) -> Self {
        Self { id: id.into(), max_occupation }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModeSpec>", into = "Vec<ModeSpec>")]
pub struct ModeSet {
    modes: Vec<ModeSpec>,
}

impl TryFrom<Vec<ModeSpec>> for ModeSet {
    type Error = Error;

    fn try_from(modes: Vec<ModeSpec>) -> Result<Self> {
        Self::new(modes)
    }
}

impl From<ModeSet> for Vec<ModeSpec> {
    fn from(set: ModeSet) -> Self {
        set.modes
    }
}

impl ModeSet {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for m in &modes {
            if !seen.insert(m.id.as_str()) {
                return Err(Error::DuplicateMode(m.id.clone()));
            }
        }
        Ok(Self { modes })
    }

    /// Shorthand for `ModeSet::new` from `(id, truncation)` pairs.
    pub fn from_pairs(pairs: &[(&str, u32)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(id, max)| ModeSpec::new(id, max)).collect())
    }

    /// Signal, idler and pump modes, each truncated at `max`.
    pub fn pump_modes(max: u32) -> Self {
        Self::from_pairs(&[(SIGNAL, max), (IDLER, max), (PUMP, max)]).expect("distinct ids")
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ModeSpec> {
        self.modes.iter()
    }

    pub fn get(&self, k: usize) -> &ModeSpec {
        &self.modes[k]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.id == id)
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.position(id).ok_or_else(|| Error::UnknownMode(id.to_string()))
    }

    pub fn spec(&self, id: &str) -> Result<&ModeSpec> {
        Ok(&self.modes[self.require(id)?])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.modes.iter().map(|m| m.id.as_str())
    }

    /// Concatenation `self ⊕ other`; the two sets must be disjoint.
    pub fn concat(&self, other: &ModeSet) -> Result<ModeSet> {
        if let Some(m) = other.modes.iter().find(|m| self.position(&m.id).is_some()) {
            return Err(Error::OverlappingModes(m.id.clone()));
        }
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        Ok(ModeSet { modes })
    }

    /// Checks that `state` is a valid occupation vector for this set.
    pub fn validate(&self, state: &FockState) -> Result<()> {
        if state.len() != self.len() {
            return Err(Error::ModeSetMismatch { expected: self.len(), got: state.len() });
        }
        for (m, &n) in self.modes.iter().zip(state.occupations()) {
            if n > m.max_occupation {
                return Err(Error::TruncationExceeded {
                    mode: m.id.clone(),
                    occupation: n,
                    max: m.max_occupation,
                });
            }
        }
        Ok(())
    }

    /// Number of states in the full truncated product space.
    pub fn product_dim(&self) -> usize {
        self.modes.iter().map(|m| m.max_occupation as usize + 1).product()
    }
}

/// Occupation-number vector; ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockState(Vec<u32>);

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn vacuum(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Builds a state from `(mode id, occupation)` pairs; unlisted modes are empty.
    pub fn from_pairs(modes: &ModeSet, pairs: &[(&str, u32)]) -> Result<Self> {
        let mut occ = vec![0; modes.len()];
        for &(id, n) in pairs {
            occ[modes.require(id)?] = n;
        }
        let state = Self(occ);
        modes.validate(&state)?;
        Ok(state)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn occupations_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Concatenation of occupation vectors.
    pub fn concat(&self, other: &FockState) -> FockState {
        let mut occ = self.0.clone();
        occ.extend_from_slice(&other.0);
        FockState(occ)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BasisRepr {
    modes: ModeSet,
    states: Vec<FockState>,
}

/// Ordered basis of distinct Fock states over a fixed [`ModeSet`].
///
/// Serializes to `{"modes": [{"id", "max_occupation"}...], "states": [[n...]...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "BasisRepr", into = "BasisRepr")]
pub struct SubspaceBasis {
    modes: ModeSet,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl TryFrom<BasisRepr> for SubspaceBasis {
    type Error = Error;

    fn try_from(r: BasisRepr) -> Result<Self> {
        Self::new(r.modes, r.states)
    }
}

impl From<SubspaceBasis> for BasisRepr {
    fn from(b: SubspaceBasis) -> Self {
        BasisRepr { modes: b.modes, states: b.states }
    }
}

impl PartialEq for SubspaceBasis {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.states == other.states
    }
}

impl SubspaceBasis {
    pub fn new(modes: ModeSet, states: Vec<FockState>) -> Result<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (k, s) in states.iter().enumerate() {
            modes.validate(s)?;
            if index.insert(s.clone(), k).is_some() {
                return Err(Error::DuplicateState(s.occupations().to_vec()));
            }
        }
        Ok(Self { modes, states, index })
    }

    /// Every occupation vector allowed by the truncations, in lexicographic order.
    pub fn product(modes: ModeSet) -> Self {
        let mut states = vec![FockState::vacuum(modes.len())];
        for (k, m) in modes.iter().enumerate() {
            states = states
                .into_iter()
                .flat_map(|s| {
                    (0..=m.max_occupation).map(move |n| {
                        let mut t = s.clone();
                        t.0[k] = n;
                        t
                    })
                })
                .collect();
        }
        states.sort();
        Self::new(modes, states).expect("product states are valid and distinct")
    }

    /// Closure of `seeds` under the monomials of `generators`, respecting the
    /// truncations; sorted lexicographically.
    pub fn reachable(modes: ModeSet, seeds: &[FockState], generators: &[&OperatorExpr]) -> Result<Self> {
        let mut seen: BTreeSet<FockState> = BTreeSet::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            modes.validate(s)?;
            if seen.insert(s.clone()) {
                queue.push_back(s.clone());
            }
        }
        while let Some(s) = queue.pop_front() {
            for g in generators {
                for (t, _) in g.apply_state(&modes, &s)?.inside {
                    if seen.insert(t.clone()) {
                        queue.push_back(t);
                    }
                }
            }
        }
        Self::new(modes, seen.into_iter().collect())
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &FockState {
        &self.states[k]
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Position of `state`, or `None` if it is not a member.
    pub fn index_of(&self, state: &FockState) -> Result<Option<usize>> {
        if state.len() != self.modes.len() {
            return Err(Error::ModeSetMismatch { expected: self.modes.len(), got: state.len() });
        }
        Ok(self.index.get(state).copied())
    }

    /// Like [`index_of`](Self::index_of) but treats absence as an error.
    pub fn require_index(&self, state: &FockState) -> Result<usize> {
        self.index_of(state)?.ok_or_else(|| Error::Leakage {
            amplitude: 1.0,
            context: format!("{state} is not in the basis"),
        })
    }

    /// Index lookup that skips the mode-set length check.
    pub(crate) fn lookup(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Unit vector for a member state.
    pub fn ket(&self, state: &FockState) -> Result<CVector> {
        let k = self.require_index(state)?;
        let mut v = CVector::zeros(self.dim());
        v[k] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Unit vector from `(mode id, occupation)` pairs.
    pub fn ket_from_pairs(&self, pairs: &[(&str, u32)]) -> Result<CVector> {
        self.ket(&FockState::from_pairs(&self.modes, pairs)?)
    }

    /// Reorders the states: `perm[k]` is the old index of the new `k`-th state.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim() {
            return Err(Error::Dimension(format!("permutation of length {} for basis of {}", perm.len(), self.dim())));
        }
        Self::new(self.modes.clone(), perm.iter().map(|&k| self.states[k].clone()).collect())
    }

    /// Sub-basis holding only `states` (all must be members).
    pub fn subset(&self, states: &[FockState]) -> Result<Self> {
        for s in states {
            self.require_index(s)?;
        }
        Self::new(self.modes.clone(), states.to_vec())
    }

    /// Qutrit logical order of `H_2`: `(|1,1,1⟩, |2,2,0⟩, |0,0,2⟩)`.
    pub fn qutrit_logical() -> Self {
        enumerate_pump_subspace(2)
            .permuted(&QUTRIT_LOGICAL_ORDER)
            .expect("valid permutation")
    }

    /// Qubit logical order of `H_1`: `(|1,1,0⟩, |0,0,1⟩)`, identical to the canonical one.
    pub fn qubit_logical() -> Self {
        enumerate_pump_subspace(1)
    }
}

/// Canonical `H_2` indices `[|2,2,0⟩, |1,1,1⟩, |0,0,2⟩]` rearranged into the
/// logical order `(|1,1,1⟩, |2,2,0⟩, |0,0,2⟩)`.
pub const QUTRIT_LOGICAL_ORDER: [usize; 3] = [1, 0, 2];

/// The `(n+1)`-state subspace `H_n = span{|j,j,n-j⟩}` in ascending pump count.
pub fn enumerate_pump_subspace(n: u32) -> SubspaceBasis {
    let modes = ModeSet::pump_modes(n);
    let states = (0..=n).map(|p| FockState::new(vec![n - p, n - p, p])).collect();
    SubspaceBasis::new(modes, states).expect("pump subspace states are valid")
}

/// Product basis in row-major order (`a` outer, `b` inner).
pub fn tensor_basis(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<SubspaceBasis> {
    let modes = a.modes.concat(&b.modes)?;
    let states = a
        .states
        .iter()
        .flat_map(|sa| b.states.iter().map(move |sb| sa.concat(sb)))
        .collect();
    SubspaceBasis::new(modes, states)
}

/// Re-labels every mode of `basis` with `suffix` appended (e.g. control/target copies).
pub fn with_mode_suffix(basis: &SubspaceBasis, suffix: &str) -> SubspaceBasis {
    let modes = ModeSet::new(
        basis
            .modes
            .iter()
            .map(|m| ModeSpec::new(format!("{}{}", m.id, suffix), m.max_occupation))
            .collect(),
    )
    .expect("suffixing preserves distinctness");
    SubspaceBasis::new(modes, basis.states.clone()).expect("same states")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fs(v: &[u32]) -> FockState {
        FockState::new(v.to_vec())
    }

    #[test]
    fn qubit_subspace() {
        let b = enumerate_pump_subspace(1);
        assert_eq!(b.states(), &[fs(&[1, 1, 0]), fs(&[0, 0, 1])]);
    }

    #[test]
    fn vacuum_subspace() {
        assert_eq!(enumerate_pump_subspace(0).states(), &[fs(&[0, 0, 0])]);
    }

    #[test]
    fn qutrit_logical_order() {
        let b = SubspaceBasis::qutrit_logical();
        assert_eq!(b.states(), &[fs(&[1, 1, 1]), fs(&[2, 2, 0]), fs(&[0, 0, 2])]);
        assert_eq!(b.index_of(&fs(&[0, 0, 2])).unwrap(), Some(2));
        assert_eq!(b.index_of(&fs(&[1, 1, 1])).unwrap(), Some(0));
    }

    #[test]
    fn index_of_absent_and_mismatch() {
        let h1 = enumerate_pump_subspace(1);
        assert_eq!(h1.index_of(&fs(&[2, 2, 0])).unwrap(), None);
        assert!(matches!(h1.index_of(&fs(&[1, 1])), Err(Error::ModeSetMismatch { .. })));
    }

    #[test]
    fn tensor_of_qubits() {
        let a = with_mode_suffix(&enumerate_pump_subspace(1), "_c");
        let b = with_mode_suffix(&enumerate_pump_subspace(1), "_t");
        let ab = tensor_basis(&a, &b).unwrap();
        assert_eq!(ab.dim(), 4);
        assert_eq!(ab.state(0), &fs(&[1, 1, 0, 1, 1, 0]));
        assert_eq!(ab.state(3), &fs(&[0, 0, 1, 0, 0, 1]));
        let q2 = tensor_basis(
            &with_mode_suffix(&enumerate_pump_subspace(2), "_c"),
            &with_mode_suffix(&enumerate_pump_subspace(2), "_t"),
        )
        .unwrap();
        assert_eq!(q2.dim(), 9);
    }

    #[test]
    fn tensor_rejects_overlap() {
        let h = enumerate_pump_subspace(1);
        assert!(matches!(tensor_basis(&h, &h), Err(Error::OverlappingModes(_))));
    }

    #[test]
    fn duplicate_modes_rejected() {
        assert!(matches!(ModeSet::from_pairs(&[("a", 1), ("a", 2)]), Err(Error::DuplicateMode(_))));
    }

    #[test]
    fn truncation_checked() {
        let modes = ModeSet::from_pairs(&[("a", 1)]).unwrap();
        assert!(SubspaceBasis::new(modes, vec![fs(&[2])]).is_err());
    }

    #[test]
    fn product_dimension() {
        let modes = ModeSet::from_pairs(&[("a", 1), ("b", 2), ("c", 0)]).unwrap();
        let b = SubspaceBasis::product(modes);
        assert_eq!(b.dim(), 6);
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn json_round_trip() {
        let b = SubspaceBasis::qutrit_logical();
        let text = serde_json::to_string(&b).unwrap();
        assert!(text.starts_with("{\"modes\":[{\"id\":\"s\""));
        let back: SubspaceBasis = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<SubspaceBasis>(r#"{"modes":[{"id":"a","max_occupation":1}],"states":[[0],[0]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn pump_subspace_invariants(n in 0u32..12) {
            let b = enumerate_pump_subspace(n);
            prop_assert_eq!(b.dim(), n as usize + 1);
            for (k, s) in b.states().iter().enumerate() {
                let o = s.occupations();
                prop_assert_eq!(o[0], o[1]);
                prop_assert_eq!(o[0] + o[2], n);
                prop_assert_eq!(b.index_of(s).unwrap(), Some(k));
            }
        }

        #[test]
        fn tensor_dimension_is_product(n in 0u32..5, m in 0u32..5) {
            let a = with_mode_suffix(&enumerate_pump_subspace(n), "_a");
            let b = with_mode_suffix(&enumerate_pump_subspace(m), "_b");
            let ab = tensor_basis(&a, &b).unwrap();
            prop_assert_eq!(ab.dim(), a.dim() * b.dim());
            for (k, s) in ab.states().iter().enumerate() {
                prop_assert_eq!(ab.index_of(s).unwrap(), Some(k));
            }
        }
    }
}
