//! Ordered gate sequences on a shared joint basis.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeSet, SubspaceBasis};
use crate::gates::Gate;
use crate::linalg::{CMatrix, CVector};
use crate::operators::OperatorMatrix;

/// One circuit entry. Routing (dichroic mirrors, rail changes) only relabels
/// where modes travel; every mode already lives in the joint basis, so a
/// route carries no matrix.
#[derive(Clone, Debug)]
pub enum Step {
    Gate(Gate),
    Route { label: String, modes: Vec<String>, rail: String },
}

#[derive(Clone, Debug)]
pub struct Circuit {
    name: String,
    modes: ModeSet,
    steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetlistEntry {
    pub kind: String,
    pub label: String,
    pub footprint: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub name: String,
    pub modes: ModeSet,
    pub steps: Vec<NetlistEntry>,
}

/// Total unitary of a circuit on a joint basis.
#[derive(Clone, Debug)]
pub struct CircuitUnitary {
    pub matrix: OperatorMatrix,
    /// Frobenius weight lost to states outside the joint basis.
    pub leakage: f64,
    /// `(gate label, joint state)` pairs where a gate met a configuration
    /// outside its domain while that state carried amplitude.
    pub out_of_domain: Vec<(String, FockState)>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, modes: ModeSet) -> Self {
        Self { name: name.into(), modes, steps: Vec::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.steps.iter().filter_map(|s| match s {
            Step::Gate(g) => Some(g),
            Step::Route { .. } => None,
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        for id in gate.footprint() {
            self.modes.require(&id)?;
        }
        self.steps.push(Step::Gate(gate));
        Ok(self)
    }

    pub fn route(&mut self, label: &str, modes: &[&str], rail: &str) -> Result<&mut Self> {
        for id in modes {
            self.modes.require(id)?;
        }
        self.steps.push(Step::Route {
            label: label.to_string(),
            modes: modes.iter().map(|m| m.to_string()).collect(),
            rail: rail.to_string(),
        });
        Ok(self)
    }

    /// Appends every step of `other`, which must use the same modes.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.modes != self.modes {
            return Err(Error::Dimension(format!("cannot append `{}`: different mode set", other.name)));
        }
        self.steps.extend(other.steps.iter().cloned());
        Ok(self)
    }

    /// Smallest set of joint states containing `seeds` and closed under every gate.
    pub fn reachable_basis(&self, seeds: &[FockState]) -> Result<SubspaceBasis> {
        let mut seen: BTreeSet<FockState> = BTreeSet::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            self.modes.validate(s)?;
            if seen.insert(s.clone()) {
                queue.push_back(s.clone());
            }
        }
        while let Some(s) = queue.pop_front() {
            for g in self.gates() {
                let action = g.act(&self.modes, &s)?;
                if action.truncated > 0.0 {
                    return Err(Error::Leakage {
                        amplitude: action.truncated.sqrt(),
                        context: format!("{} on {s} exceeds a truncation", g.label()),
                    });
                }
                for (t, _) in action.outputs {
                    if seen.insert(t.clone()) {
                        queue.push_back(t);
                    }
                }
            }
        }
        SubspaceBasis::new(self.modes.clone(), seen.into_iter().collect())
    }

    /// Ordered product of the gate matrices on `basis`. Out-of-domain hits
    /// are tracked along the columns listed in `inputs`.
    pub fn unitary_on(&self, basis: &Arc<SubspaceBasis>, inputs: &[usize]) -> Result<CircuitUnitary> {
        if basis.modes() != &self.modes {
            return Err(Error::Dimension("joint basis uses a different mode set".into()));
        }
        let d = basis.dim();
        let mut total = CMatrix::identity(d, d);
        let mut leak2 = 0.0;
        let mut ood = Vec::new();
        for g in self.gates() {
            let (m, leak, bad) = g.embed(basis)?;
            leak2 += leak * leak;
            for s in bad {
                let row = basis.lookup(&s).expect("embedded states are members");
                if inputs.iter().any(|&k| total[(row, k)].norm() > 1e-14) {
                    ood.push((g.label().to_string(), s));
                }
            }
            total = m * total;
        }
        Ok(CircuitUnitary { matrix: OperatorMatrix::new(Arc::clone(basis), total)?, leakage: leak2.sqrt(), out_of_domain: ood })
    }

    /// Applies the circuit to a state on `basis`, gate by gate.
    pub fn apply(&self, basis: &Arc<SubspaceBasis>, psi: &CVector) -> Result<(CVector, Vec<(String, FockState)>)> {
        let mut v = psi.clone();
        let mut ood = Vec::new();
        for g in self.gates() {
            let (m, leak, bad) = g.embed(basis)?;
            if leak > 1e-12 {
                return Err(Error::Leakage { amplitude: leak, context: format!("{} leaves the joint basis", g.label()) });
            }
            for s in bad {
                if v[basis.lookup(&s).expect("member")].norm() > 1e-14 {
                    ood.push((g.label().to_string(), s));
                }
            }
            v = m * v;
        }
        Ok((v, ood))
    }

    pub fn netlist(&self) -> Netlist {
        let steps = self
            .steps
            .iter()
            .map(|s| match s {
                Step::Gate(g) => NetlistEntry {
                    kind: "gate".into(),
                    label: g.label().to_string(),
                    footprint: g.footprint(),
                    params: g.params().clone(),
                    rail: None,
                },
                Step::Route { label, modes, rail } => NetlistEntry {
                    kind: "route".into(),
                    label: label.clone(),
                    footprint: modes.clone(),
                    params: BTreeMap::new(),
                    rail: Some(rail.clone()),
                },
            })
            .collect();
        Netlist { name: self.name.clone(), modes: self.modes.clone(), steps }
    }
}

/// Restriction `P† U P` of a joint unitary to the listed columns, and the
/// largest norm any listed column loses outside them.
pub fn restrict(u: &CMatrix, idx: &[usize]) -> (CMatrix, f64) {
    let k = idx.len();
    let r = CMatrix::from_fn(k, k, |a, b| u[(idx[a], idx[b])]);
    let mut kept = vec![false; u.nrows()];
    for &i in idx {
        kept[i] = true;
    }
    let leak = idx
        .iter()
        .map(|&col| {
            let outside: f64 = (0..u.nrows()).filter(|&row| !kept[row]).map(|row| u[(row, col)].norm_sqr()).sum();
            outside.sqrt()
        })
        .fold(0.0, f64::max);
    (r, leak)
}
