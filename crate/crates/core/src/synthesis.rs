//! Numerical compilation of target unitaries, or partial state maps, into
//! sequences `exp(−i t_K H_{g_K}) ⋯ exp(−i t_1 H_{g_1})` over a generator set.
//!
//! Segments cycle through the generators in order. Durations are optimized
//! with BFGS on analytic gradients from several deterministic starting points.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_pump_subspace, FockState, SubspaceBasis};
use crate::gates::{evolve, phase_distance_unchecked};
use crate::linalg::{self, c, re, CMatrix, CVector, HermitianEigen, C64};
use crate::operators::{self, OperatorExpr, OperatorMatrix};

/// `input ↦ output` (up to phase); both normalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub input: Vec<C64>,
    pub output: Vec<C64>,
}

impl Constraint {
    pub fn between(basis: &SubspaceBasis, from: &FockState, to: &FockState) -> Result<Self> {
        Ok(Self {
            input: basis.ket(from)?.iter().copied().collect(),
            output: basis.ket(to)?.iter().copied().collect(),
        })
    }

    fn vectors(&self) -> (CVector, CVector) {
        (CVector::from_column_slice(&self.input), CVector::from_column_slice(&self.output))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Unitary(OperatorMatrix),
    Constraints(Vec<Constraint>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthesisProblem {
    pub generators: Vec<OperatorMatrix>,
    pub labels: Vec<String>,
    pub target: Target,
    pub n_segments: usize,
    pub tol: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_restarts() -> usize {
    16
}

fn default_max_iters() -> usize {
    4000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub generator: usize,
    pub label: String,
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub segments: Vec<Segment>,
    pub achieved_residual: f64,
    pub tol: f64,
    pub success: bool,
    /// Index of the starting point that produced this sequence.
    pub restart: usize,
}

impl PulseSequence {
    pub fn durations(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.duration).collect()
    }

    /// Concatenation: `other` acts after `self`.
    pub fn then(&self, other: &PulseSequence) -> PulseSequence {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        PulseSequence {
            segments,
            achieved_residual: f64::NAN,
            tol: self.tol.max(other.tol),
            success: self.success && other.success,
            restart: 0,
        }
    }
}

impl SynthesisProblem {
    /// Round-robin segments, `8·d` of them by default.
    pub fn new(generators: Vec<(String, OperatorMatrix)>, target: Target, tol: f64) -> Result<Self> {
        let d = generators.first().map(|(_, g)| g.dim()).unwrap_or(0);
        let (labels, generators) = generators.into_iter().unzip();
        let p = Self {
            generators,
            labels,
            target,
            n_segments: 8 * d,
            tol,
            restarts: default_restarts(),
            seed: 0,
            max_iters: default_max_iters(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_segments(mut self, n: usize) -> Self {
        self.n_segments = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.generators.first().ok_or_else(|| Error::InvalidArgument("no generators".into()))?;
        if self.labels.len() != self.generators.len() {
            return Err(Error::InvalidArgument("one label per generator required".into()));
        }
        if self.n_segments == 0 {
            return Err(Error::InvalidArgument("n_segments must be ≥ 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance {} is not a nonnegative number", self.tol)));
        }
        let d = first.dim();
        for g in &self.generators {
            if g.dim() != d {
                return Err(Error::Dimension("generators differ in dimension".into()));
            }
            let err = g.hermiticity_error();
            if err > 1e-10 {
                return Err(Error::NotHermitian(err));
            }
        }
        match &self.target {
            Target::Unitary(t) => {
                if t.dim() != d {
                    return Err(Error::Dimension(format!("target is {}-dimensional, generators {d}", t.dim())));
                }
                let err = linalg::unitarity_error(t.entries());
                if err > 1e-8 {
                    return Err(Error::NotUnitary(err));
                }
            }
            Target::Constraints(cs) => {
                if cs.is_empty() {
                    return Err(Error::InvalidArgument("empty constraint set".into()));
                }
                for cst in cs {
                    if cst.input.len() != d || cst.output.len() != d {
                        return Err(Error::Dimension("constraint vector length".into()));
                    }
                    let (a, b) = cst.vectors();
                    if (a.norm() - 1.0).abs() > 1e-10 || (b.norm() - 1.0).abs() > 1e-10 {
                        return Err(Error::InvalidArgument("constraint states must be normalized".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> Vec<usize> {
        (0..self.n_segments).map(|k| k % self.generators.len()).collect()
    }

    /// The reported residual of `u`: `1 − |tr(T†U)|/d` or `Σ(1 − |⟨out|U|in⟩|²)`.
    pub fn residual(&self, u: &CMatrix) -> f64 {
        match &self.target {
            Target::Unitary(t) => phase_distance_unchecked(t.entries(), u),
            Target::Constraints(cs) => cs
                .iter()
                .map(|cst| {
                    let (a, b) = cst.vectors();
                    1.0 - b.dotc(&(u * a)).norm_sqr()
                })
                .sum::<f64>()
                .max(0.0),
        }
    }

    fn sequence_from(&self, durations: &[f64], restart: usize) -> PulseSequence {
        let segments = self
            .order()
            .into_iter()
            .zip(durations)
            .map(|(g, &t)| Segment { generator: g, label: self.labels[g].clone(), duration: t })
            .collect();
        PulseSequence { segments, achieved_residual: f64::NAN, tol: self.tol, success: false, restart }
    }
}

/// Ordered product of `exp(−i t H_g)` over the segments, each factor built by [`evolve`].
pub fn sequence_unitary(generators: &[OperatorMatrix], seq: &PulseSequence) -> Result<CMatrix> {
    let d = generators.first().ok_or_else(|| Error::InvalidArgument("no generators".into()))?.dim();
    let mut u = CMatrix::identity(d, d);
    for s in &seq.segments {
        let g = generators
            .get(s.generator)
            .ok_or_else(|| Error::InvalidArgument(format!("generator index {} out of range", s.generator)))?;
        u = evolve(g, s.duration)?.unitary().entries() * u;
    }
    Ok(u)
}

/// Residual of `seq` recomputed from scratch.
pub fn evaluate(problem: &SynthesisProblem, seq: &PulseSequence) -> Result<f64> {
    Ok(problem.residual(&sequence_unitary(&problem.generators, seq)?))
}

struct Objective {
    eig: Vec<HermitianEigen>,
    /// `−iH` per generator.
    slopes: Vec<CMatrix>,
    order: Vec<usize>,
    kind: Kind,
    d: usize,
}

enum Kind {
    /// Stores `T†`.
    Full(CMatrix),
    Partial(Vec<(CVector, CVector)>),
}

impl Objective {
    fn new(p: &SynthesisProblem) -> Result<Self> {
        let eig = p.generators.iter().map(|g| HermitianEigen::new(g.entries())).collect::<Result<Vec<_>>>()?;
        let slopes = p.generators.iter().map(|g| g.entries() * c(0.0, -1.0)).collect();
        let kind = match &p.target {
            Target::Unitary(t) => Kind::Full(t.entries().adjoint()),
            Target::Constraints(cs) => Kind::Partial(cs.iter().map(Constraint::vectors).collect()),
        };
        Ok(Self { eig, slopes, order: p.order(), kind, d: p.dim() })
    }

    fn factors(&self, t: &[f64]) -> Vec<CMatrix> {
        self.order.iter().zip(t).map(|(&g, &tk)| self.eig[g].evolve(tk)).collect()
    }

    /// Smooth objective and gradient. For full targets this is
    /// `1 − |tr(T†U)|²/d²`, which shares its minimizers with the phase distance.
    fn value_grad(&self, t: &[f64]) -> (f64, Vec<f64>) {
        let e = self.factors(t);
        let k = e.len();
        let d = self.d;
        let mut prefix = Vec::with_capacity(k);
        let mut acc = CMatrix::identity(d, d);
        for ek in &e {
            acc = ek * acc;
            prefix.push(acc.clone());
        }
        let mut grad = vec![0.0; k];
        match &self.kind {
            Kind::Full(td) => {
                let u = &prefix[k - 1];
                let z: C64 = (td * u).trace();
                let dd = (d * d) as f64;
                // S_k = T† E_K ⋯ E_{k+1}
                let mut s = td.clone();
                for idx in (0..k).rev() {
                    let a = &self.slopes[self.order[idx]];
                    let m = &prefix[idx] * &s;
                    let dz: C64 = m.iter().zip(a.transpose().iter()).map(|(x, y)| x * y).sum();
                    grad[idx] = -2.0 * (z.conj() * dz).re / dd;
                    s = &s * &e[idx];
                }
                (1.0 - z.norm_sqr() / dd, grad)
            }
            Kind::Partial(cs) => {
                let mut f = 0.0;
                for (input, output) in cs {
                    let a = output.dotc(&(&prefix[k - 1] * input));
                    f += 1.0 - a.norm_sqr();
                    // b = out† E_K ⋯ E_{k+1}, as a column of conjugates.
                    let mut b = output.clone();
                    for idx in (0..k).rev() {
                        let fwd = &prefix[idx] * input;
                        let da = b.dotc(&(&self.slopes[self.order[idx]] * fwd));
                        grad[idx] += -2.0 * (a.conj() * da).re;
                        b = e[idx].adjoint() * b;
                    }
                }
                (f, grad)
            }
        }
    }
}

struct Run {
    x: Vec<f64>,
    f: f64,
}

/// Iterations between stagnation checks, and the relative decrease each window must achieve.
const WINDOW: usize = 100;
const WINDOW_DECREASE: f64 = 1e-3;

fn bfgs(obj: &Objective, x0: Vec<f64>, max_iters: usize, f_target: f64) -> Run {
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let (mut f, g0) = obj.value_grad(x.as_slice());
    let mut g = DVector::from_vec(g0);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut scaled = false;
    let mut window_start = f;
    for it in 0..max_iters {
        if f <= f_target || g.amax() < 1e-15 {
            break;
        }
        if it > 0 && it % WINDOW == 0 {
            if window_start - f < WINDOW_DECREASE * window_start {
                break;
            }
            window_start = f;
        }
        let mut p = -(&h * &g);
        let mut slope = p.dot(&g);
        if slope >= 0.0 {
            h = DMatrix::identity(n, n);
            p = -g.clone();
            slope = p.dot(&g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-16 {
            let xn = &x + &p * step;
            let (fnew, gnew) = obj.value_grad(xn.as_slice());
            if fnew <= f + 1e-4 * step * slope {
                accepted = Some((xn, fnew, DVector::from_vec(gnew)));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            if h == DMatrix::identity(n, n) {
                break;
            }
            h = DMatrix::identity(n, n);
            continue;
        };
        let s = &xn - &x;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            if !scaled {
                h = DMatrix::identity(n, n) * (sy / y.dot(&y));
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← H − ρ(s·(Hy)ᵀ + (Hy)·sᵀ) + (ρ²·yᵀHy + ρ) s sᵀ
            h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
        x = xn;
        f = fnew;
        g = gnew;
    }
    Run { x: x.as_slice().to_vec(), f }
}

fn starting_point(p: &SynthesisProblem, obj: &Objective, restart: usize) -> Vec<f64> {
    if restart == 0 {
        return vec![0.0; p.n_segments];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    obj.order
        .iter()
        .map(|&g| {
            let scale = obj.eig[g].values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if scale > 1e-12 { scale } else { 1.0 };
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI) / scale
        })
        .collect()
}

/// Minimizes the residual; the best sequence is returned even when it misses
/// `tol`, with `success = false`.
pub fn synthesize(problem: &SynthesisProblem) -> Result<PulseSequence> {
    problem.validate()?;
    let obj = Objective::new(problem)?;
    let restarts = problem.restarts.max(1);
    let batch = rayon::current_num_threads().clamp(1, 8);
    // The smooth objective is about twice the phase distance near a solution;
    // partial targets use the residual itself.
    let f_target = (problem.tol * 1e-3).max(1e-16);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut start = 0;
    while start < restarts {
        let end = (start + batch).min(restarts);
        let runs: Vec<(usize, Run)> = (start..end)
            .into_par_iter()
            .map(|r| (r, bfgs(&obj, starting_point(problem, &obj, r), problem.max_iters, f_target)))
            .collect();
        for (r, run) in runs {
            let seq = problem.sequence_from(&run.x, r);
            let residual = problem.residual(&sequence_unitary(&problem.generators, &seq)?);
            let _ = run.f;
            if best.as_ref().is_none_or(|(b, _, _)| residual < *b) {
                best = Some((residual, r, run.x));
            }
        }
        if best.as_ref().is_some_and(|(b, _, _)| *b <= problem.tol) {
            break;
        }
        start = end;
    }
    let (residual, r, x) = best.expect("at least one restart");
    let mut seq = problem.sequence_from(&x, r);
    seq.achieved_residual = residual;
    seq.success = residual <= problem.tol;
    Ok(seq)
}

/// Pseudo-random special unitary (QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal removed), on the canonical `H_{d−1}` basis.
pub fn random_target_su(d: usize, seed: u64) -> Result<OperatorMatrix> {
    if d < 2 {
        return Err(Error::InvalidArgument("dimension must be ≥ 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = CMatrix::from_fn(d, d, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        c(a, b) / std::f64::consts::SQRT_2
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let rk = r[(k, k)];
        let ph = if rk.norm() > 0.0 { rk / rk.norm() } else { re(1.0) };
        for i in 0..d {
            q[(i, k)] *= ph;
        }
    }
    let det = q.determinant();
    let root = C64::from_polar(1.0, det.arg() / d as f64);
    q /= root;
    OperatorMatrix::new(Arc::new(enumerate_pump_subspace(d as u32 - 1)), q)
}

/// Generator names understood in problem files.
pub fn builtin_generator(name: &str) -> Result<OperatorExpr> {
    use crate::fock::{IDLER, PUMP, SIGNAL};
    use operators::{AncillaKind, PUMP_ANCILLA, SIGNAL_ANCILLA};
    Ok(match name {
        "g1" => operators::g1_expr(),
        "g2" => operators::g2_expr(),
        "n_s" => OperatorExpr::number(SIGNAL),
        "n_i" => OperatorExpr::number(IDLER),
        "n_p" => OperatorExpr::number(PUMP),
        "n_p'" => OperatorExpr::number(PUMP_ANCILLA),
        "n_s'" => OperatorExpr::number(SIGNAL_ANCILLA),
        "g1_p'" => operators::ancilla_generators(AncillaKind::PumpPrime).0,
        "g2_p'" => operators::ancilla_generators(AncillaKind::PumpPrime).1,
        "g1_s'i'" => operators::ancilla_generators(AncillaKind::SignalIdlerPrime).0,
        "g2_s'i'" => operators::ancilla_generators(AncillaKind::SignalIdlerPrime).1,
        "g2a" => operators::injection_generator(),
        other => return Err(Error::InvalidArgument(format!("unknown generator {other:?}"))),
    })
}

/// Human-editable problem description, converted with [`ProblemSpec::build`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub basis: BasisSpec,
    pub generators: Vec<GeneratorSpec>,
    pub target: TargetSpec,
    #[serde(default)]
    pub n_segments: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    /// `H_n`, canonical order unless `logical_order` (only meaningful for `n = 2`).
    Pump {
        pump_subspace: u32,
        #[serde(default)]
        logical_order: bool,
    },
    Explicit(SubspaceBasis),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub label: String,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub expr: Option<OperatorExpr>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    Identity,
    /// Row-major `[re, im]` entries.
    Unitary(Vec<Vec<[f64; 2]>>),
    Constraints(Vec<StateMap>),
    RandomSu { seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateMap {
    pub from: FockState,
    pub to: FockState,
}

impl ProblemSpec {
    pub fn basis(&self) -> Result<Arc<SubspaceBasis>> {
        Ok(Arc::new(match &self.basis {
            BasisSpec::Pump { pump_subspace: 2, logical_order: true } => SubspaceBasis::qutrit_logical(),
            BasisSpec::Pump { pump_subspace, .. } => enumerate_pump_subspace(*pump_subspace),
            BasisSpec::Explicit(b) => b.clone(),
        }))
    }

    pub fn build(&self) -> Result<SynthesisProblem> {
        let basis = self.basis()?;
        let d = basis.dim();
        let mut gens = Vec::new();
        for g in &self.generators {
            let expr = match (&g.builtin, &g.expr) {
                (Some(name), None) => builtin_generator(name)?,
                (None, Some(e)) => e.clone(),
                _ => return Err(Error::InvalidArgument(format!("generator {} needs exactly one of builtin/expr", g.label))),
            };
            let m = expr.to_matrix(&basis)?;
            if m.leakage() > 1e-12 {
                return Err(Error::Leakage { amplitude: m.leakage(), context: format!("generator {} leaves the basis", g.label) });
            }
            gens.push((g.label.clone(), m));
        }
        let target = match &self.target {
            TargetSpec::Identity => Target::Unitary(OperatorMatrix::identity(Arc::clone(&basis))),
            TargetSpec::Unitary(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Dimension(format!("target must be {d}x{d}")));
                }
                let m = CMatrix::from_fn(d, d, |r, k| c(rows[r][k][0], rows[r][k][1]));
                Target::Unitary(OperatorMatrix::new(Arc::clone(&basis), m)?)
            }
            TargetSpec::Constraints(maps) => Target::Constraints(
                maps.iter().map(|m| Constraint::between(&basis, &m.from, &m.to)).collect::<Result<_>>()?,
            ),
            TargetSpec::RandomSu { seed } => {
                let r = random_target_su(d, *seed)?;
                Target::Unitary(OperatorMatrix::new(Arc::clone(&basis), r.into_entries())?)
            }
        };
        let mut p = SynthesisProblem::new(gens, target, self.tol)?.with_seed(self.seed);
        if let Some(n) = self.n_segments {
            p = p.with_segments(n);
        }
        if let Some(r) = self.restarts {
            p = p.with_restarts(r);
        }
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ModeSet;
    use crate::liealg::qutrit::QutritGenerators;
    use crate::operators::{chi2_generators, injection_generator, PUMP_ANCILLA};

    #[test]
    fn identity_target_needs_no_pulses() {
        let g = chi2_generators(2).unwrap();
        let id = OperatorMatrix::identity(Arc::clone(g.g1.basis()));
        let p = SynthesisProblem::new(vec![("G1".into(), g.g1.clone()), ("G2".into(), g.g2.clone())], Target::Unitary(id), 1e-12)
            .unwrap();
        let seq = synthesize(&p).unwrap();
        assert!(seq.success);
        assert_eq!(seq.achieved_residual, 0.0);
        assert!(seq.durations().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn injection_doublet_single_segment() {
        let modes = ModeSet::from_pairs(&[("s", 1), ("i", 1), ("p", 1), (PUMP_ANCILLA, 1)]).unwrap();
        let states = vec![FockState::new(vec![0, 0, 1, 1]), FockState::new(vec![1, 1, 1, 0])];
        let basis = Arc::new(SubspaceBasis::new(modes, states).unwrap());
        let g = injection_generator().to_matrix(&basis).unwrap();
        assert_eq!(g.leakage(), 0.0);
        let target = CMatrix::from_row_slice(2, 2, &[re(0.0), c(0.0, 1.0), c(0.0, 1.0), re(0.0)]);
        let p = SynthesisProblem::new(
            vec![("G2a".into(), g)],
            Target::Unitary(OperatorMatrix::new(Arc::clone(&basis), target).unwrap()),
            1e-12,
        )
        .unwrap()
        .with_segments(1);
        let seq = synthesize(&p).unwrap();
        assert!(seq.success, "residual {}", seq.achieved_residual);
        let t = seq.segments[0].duration;
        let k = (t / std::f64::consts::FRAC_PI_2).round();
        assert!((k as i64).rem_euclid(2) == 1 && (t - k * std::f64::consts::FRAC_PI_2).abs() < 1e-7);
    }

    #[test]
    fn random_su3_with_qutrit_generators() {
        let q = QutritGenerators::from_ladder().unwrap();
        let basis = Arc::new(SubspaceBasis::qutrit_logical());
        let gens: Vec<(String, OperatorMatrix)> = q
            .g
            .iter()
            .enumerate()
            .map(|(k, m)| (format!("G{}", k + 1), OperatorMatrix::new(Arc::clone(&basis), m.clone()).unwrap()))
            .collect();
        let target = random_target_su(3, 7).unwrap().into_entries();
        let target = OperatorMatrix::new(Arc::clone(&basis), target).unwrap();
        let p = SynthesisProblem::new(gens, Target::Unitary(target), 1e-6).unwrap().with_segments(36);
        let seq = synthesize(&p).unwrap();
        assert!(seq.success, "residual {}", seq.achieved_residual);
        assert!((evaluate(&p, &seq).unwrap() - seq.achieved_residual).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = chi2_generators(3).unwrap();
        let gens = vec![("G1".to_string(), g.g1.clone()), ("G2".to_string(), g.g2.clone()), ("Np".to_string(), g.np.clone())];
        let target = random_target_su(4, 3).unwrap();
        let full = SynthesisProblem::new(gens.clone(), Target::Unitary(target), 1e-8).unwrap().with_segments(7);
        let b = g.g1.basis();
        let partial = SynthesisProblem::new(
            gens,
            Target::Constraints(vec![Constraint::between(b, b.state(1), b.state(3)).unwrap()]),
            1e-8,
        )
        .unwrap()
        .with_segments(7);
        for p in [full, partial] {
            let obj = Objective::new(&p).unwrap();
            let x: Vec<f64> = (0..7).map(|k| 0.3 + 0.17 * k as f64).collect();
            let (_, grad) = obj.value_grad(&x);
            for k in 0..7 {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (obj.value_grad(&xp).0 - obj.value_grad(&xm).0) / (2.0 * h);
                assert!((fd - grad[k]).abs() < 1e-7, "k={k}: {fd} vs {}", grad[k]);
            }
        }
    }

    #[test]
    fn random_su_properties() {
        let u = random_target_su(4, 11).unwrap().into_entries();
        assert!((u.determinant() - re(1.0)).norm() < 1e-12);
        for k in 0..4 {
            assert!((u.column(k).norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(u, random_target_su(4, 11).unwrap().into_entries());
        assert!(random_target_su(1, 0).is_err());
    }

    #[test]
    fn objective_ignores_target_phase() {
        let g = chi2_generators(2).unwrap();
        let t = random_target_su(3, 5).unwrap();
        let u = crate::gates::evolve(&g.g1, 0.4).unwrap().unitary().entries().clone();
        let mk = |m: CMatrix| {
            SynthesisProblem::new(
                vec![("G1".into(), g.g1.clone())],
                Target::Unitary(OperatorMatrix::new(Arc::clone(g.g1.basis()), m).unwrap()),
                1e-8,
            )
            .unwrap()
        };
        let a = mk(t.entries().clone()).residual(&u);
        let b = mk(t.entries() * C64::from_polar(1.0, 0.9)).residual(&u);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn problem_spec_round_trip() {
        let text = r#"{
            "basis": {"pump_subspace": 3},
            "generators": [{"label": "G1", "builtin": "g1"}, {"label": "G2", "builtin": "g2"}],
            "target": {"constraints": [{"from": [1, 1, 2], "to": [0, 0, 3]}]},
            "n_segments": 8,
            "tol": 1e-8
        }"#;
        let spec: ProblemSpec = serde_json::from_str(text).unwrap();
        let p = spec.build().unwrap();
        assert_eq!(p.n_segments, 8);
        let seq = synthesize(&p).unwrap();
        assert!(seq.success);
        let json = serde_json::to_string(&seq).unwrap();
        let back: PulseSequence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, seq);
        let problem_json = serde_json::to_string(&p).unwrap();
        let p2: SynthesisProblem = serde_json::from_str(&problem_json).unwrap();
        assert!((evaluate(&p2, &seq).unwrap() - seq.achieved_residual).abs() < 1e-12);
    }

    #[test]
    fn bad_problems_rejected() {
        let g = chi2_generators(1).unwrap();
        let bad = Constraint { input: vec![re(2.0), re(0.0)], output: vec![re(1.0), re(0.0)] };
        assert!(SynthesisProblem::new(vec![("G1".into(), g.g1.clone())], Target::Constraints(vec![bad]), 1e-8).is_err());
        assert!(builtin_generator("nope").is_err());
    }
}
