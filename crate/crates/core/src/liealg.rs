//! Real Lie-algebra closure of Hermitian generator sets under `(A, B) ↦ i[A, B]`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SubspaceBasis;
use crate::linalg::{self, frobenius, hs_inner, re, CMatrix};
use crate::operators::OperatorMatrix;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Orthonormal (Hilbert–Schmidt) basis of a real span of Hermitian matrices.
#[derive(Clone, Debug)]
pub struct AlgebraBasis {
    basis: Arc<SubspaceBasis>,
    elements: Vec<CMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub dim: usize,
    pub rounds: usize,
    /// Largest normalized residual among candidates judged already spanned.
    pub residual: f64,
    pub generators_used: Vec<String>,
    pub added_per_round: Vec<usize>,
    /// `dim` reached `d²`, i.e. the full `u(d)`.
    pub saturated: bool,
    pub matrix_dim: usize,
}

impl AlgebraBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn matrix_dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &Arc<SubspaceBasis> {
        &self.basis
    }

    pub fn raw_elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn elements(&self) -> Vec<OperatorMatrix> {
        self.elements
            .iter()
            .map(|e| OperatorMatrix::new(Arc::clone(&self.basis), e.clone()).expect("shape checked at construction"))
            .collect()
    }

    /// Real coordinates of the orthogonal projection of `a` onto the span.
    pub fn coefficients(&self, a: &CMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| hs_inner(e, a)).collect()
    }

    /// Component of `a` orthogonal to the span.
    pub fn orthogonal_part(&self, a: &CMatrix) -> CMatrix {
        let mut v = a.clone();
        // Two passes keep the projection accurate when `a` is nearly in the span.
        for _ in 0..2 {
            for e in &self.elements {
                let c = hs_inner(e, &v);
                v -= e * re(c);
            }
        }
        v
    }

    fn try_add(&mut self, candidate: &CMatrix, tol: f64) -> std::result::Result<(), f64> {
        let n = frobenius(candidate);
        if n == 0.0 {
            return Err(0.0);
        }
        let v = self.orthogonal_part(&(candidate / re(n)));
        let r = frobenius(&v);
        if r > tol {
            let h = (&v + v.adjoint()) * re(0.5 / r);
            let hn = frobenius(&h);
            self.elements.push(h / re(hn));
            Ok(())
        } else {
            Err(r)
        }
    }

    /// Closure of this span; returns an equal-dimension basis when already closed.
    pub fn close(&self, tol: f64) -> Result<(ClosureReport, AlgebraBasis)> {
        let labels: Vec<String> = (0..self.dim()).map(|k| format!("e{k}")).collect();
        let mats = self.elements();
        let gens: Vec<(&str, &OperatorMatrix)> = labels.iter().map(String::as_str).zip(mats.iter()).collect();
        closure(&gens, tol)
    }
}

/// Stabilized real span of `generators` and all nested brackets `i[A, B]`.
///
/// Candidates are orthonormalized in a fixed order, so the result does not
/// depend on how the bracket evaluation is scheduled.
pub fn closure(generators: &[(&str, &OperatorMatrix)], tol: f64) -> Result<(ClosureReport, AlgebraBasis)> {
    let (_, first) = generators
        .first()
        .ok_or_else(|| Error::InvalidArgument("closure needs at least one generator".into()))?;
    let basis = Arc::clone(first.basis());
    let d = basis.dim();
    for (label, g) in generators {
        if !g.same_basis(first) {
            return Err(Error::Dimension(format!("generator {label} lives on a different basis")));
        }
        let err = g.hermiticity_error();
        if err > tol {
            return Err(Error::NotHermitian(err));
        }
    }
    let cap = d * d;
    let mut span = AlgebraBasis { basis, elements: Vec::new() };
    let mut residual: f64 = 0.0;
    let mut added_per_round = Vec::new();

    for (_, g) in generators {
        if span.dim() == cap {
            break;
        }
        if let Err(r) = span.try_add(g.entries(), tol) {
            residual = residual.max(r);
        }
    }
    added_per_round.push(span.dim());

    let mut frontier_start = 0;
    let mut rounds = 0;
    while span.dim() < cap {
        let len = span.dim();
        let pairs: Vec<(usize, usize)> =
            (0..len).flat_map(|a| (a + 1..len).map(move |b| (a, b))).filter(|&(_, b)| b >= frontier_start).collect();
        if pairs.is_empty() {
            break;
        }
        rounds += 1;
        let candidates: Vec<CMatrix> =
            pairs.par_iter().map(|&(a, b)| linalg::bracket(&span.elements[a], &span.elements[b])).collect();
        for cand in &candidates {
            if span.dim() == cap {
                break;
            }
            if let Err(r) = span.try_add(cand, tol) {
                residual = residual.max(r);
            }
        }
        added_per_round.push(span.dim() - len);
        if span.dim() == len {
            break;
        }
        frontier_start = len;
    }

    let report = ClosureReport {
        dim: span.dim(),
        rounds,
        residual,
        generators_used: generators.iter().map(|(l, _)| l.to_string()).collect(),
        added_per_round,
        saturated: span.dim() == cap,
        matrix_dim: d,
    };
    Ok((report, span))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    /// Norm of the component orthogonal to the span.
    pub residual: f64,
}

pub fn membership(a: &CMatrix, span: &AlgebraBasis, tol: f64) -> Result<Membership> {
    let d = span.matrix_dim();
    if a.shape() != (d, d) {
        return Err(Error::Dimension(format!("{}x{} matrix against a {d}-dimensional algebra", a.nrows(), a.ncols())));
    }
    let residual = frobenius(&span.orthogonal_part(a));
    Ok(Membership { member: residual <= tol, residual })
}

/// Least-squares real coefficients of `target` in the span of `elements`
/// (not necessarily orthogonal), and the residual norm.
pub fn span_coefficients(target: &CMatrix, elements: &[CMatrix]) -> (Vec<f64>, f64) {
    // Real least squares on stacked (re, im) entries; avoids squaring the
    // condition number through a Gram matrix.
    let n = target.len();
    let flat = |m: &CMatrix, r: usize| if r < n { m[r].re } else { m[r - n].im };
    let a = nalgebra::DMatrix::<f64>::from_fn(2 * n, elements.len(), |r, k| flat(&elements[k], r));
    let b = nalgebra::DVector::<f64>::from_fn(2 * n, |r, _| flat(target, r));
    let coeffs = a.svd(true, true).solve(&b, 1e-12).expect("u and v were computed");
    let mut fit = CMatrix::zeros(target.nrows(), target.ncols());
    for (e, &c) in elements.iter().zip(coeffs.iter()) {
        fit += e * re(c);
    }
    let residual = frobenius(&(target - fit));
    (coeffs.iter().copied().collect(), residual)
}

/// Qutrit (`H₂`) generators, their nested brackets and the Gell-Mann basis.
///
/// Matrices are in the logical order `(|1,1,1⟩, |2,2,0⟩, |0,0,2⟩)`.
pub mod qutrit {
    use super::*;
    use crate::linalg::c;
    use crate::operators::Chi2Generators;

    const S2: f64 = std::f64::consts::SQRT_2;

    fn m3(v: [[crate::linalg::C64; 3]; 3]) -> CMatrix {
        CMatrix::from_fn(3, 3, |r, col| v[r][col])
    }

    fn z() -> crate::linalg::C64 {
        re(0.0)
    }

    /// `Ĝ₁ … Ĝ₉` on the qutrit.
    #[derive(Clone, Debug)]
    pub struct QutritGenerators {
        pub g: [CMatrix; 9],
    }

    impl QutritGenerators {
        /// Builds `Ĝ₁, Ĝ₂` and the number operators from ladder amplitudes and
        /// derives the rest through the bracket chain
        /// `Ĝ₃ = i[Ĝ₁,Ĝ₂]`, `Ĝ₄ = i[Ĝ₂,Ĝ₃]`, `Ĝ₅ = i[Ĝ₃,Ĝ₁]`,
        /// `Ĝ₆ = ½(i[Ĝ₁,Ĝ₄] + i[Ĝ₅,Ĝ₂])`, `Ĝ₇ = i[Ĝ₄,Ĝ₂]`,
        /// `Ĝ₈ = ½(1 − N̂_p)`, `Ĝ₉ = ½((N̂_s + N̂_i)/2 + N̂_p)`.
        pub fn from_ladder() -> Result<Self> {
            let g = Chi2Generators::on(&Arc::new(SubspaceBasis::qutrit_logical()))?;
            Ok(Self::from_parts(g.g1.entries(), g.g2.entries(), g.ns.entries(), g.ni.entries(), g.np.entries()))
        }

        pub fn from_parts(g1: &CMatrix, g2: &CMatrix, ns: &CMatrix, ni: &CMatrix, np: &CMatrix) -> Self {
            use crate::linalg::bracket;
            let one = CMatrix::identity(3, 3);
            let g3 = bracket(g1, g2);
            let g4 = bracket(g2, &g3);
            let g5 = bracket(&g3, g1);
            let g6 = (bracket(g1, &g4) + bracket(&g5, g2)) * re(0.5);
            let g7 = bracket(&g4, g2);
            let g8 = (&one - np) * re(0.5);
            let g9 = ((ns + ni) * re(0.5) + np) * re(0.5);
            Self { g: [g1.clone(), g2.clone(), g3, g4, g5, g6, g7, g8, g9] }
        }

        /// The nine matrices in the tabulated closed form of the reference derivation.
        pub fn closed_form() -> Self {
            let (o, i) = (re(1.0), c(0.0, 1.0));
            let h = re(0.5);
            let g1 = m3([[z(), re(2.0), re(S2)], [re(-2.0), z(), z()], [re(-S2), z(), z()]]) * c(0.0, -0.5);
            let g2 = m3([[z(), re(2.0), re(S2)], [re(2.0), z(), z()], [re(S2), z(), z()]]) * h;
            let g3 = m3([[o, z(), z()], [z(), re(-2.0), z()], [z(), z(), o]]);
            let g4 = m3([[z(), o, z()], [o, z(), z()], [z(), z(), z()]]) * re(3.0);
            let g5 = m3([[z(), o, z()], [-o, z(), z()], [z(), z(), z()]]) * c(0.0, 3.0);
            let g6 = m3([[z(), z(), z()], [z(), z(), o], [z(), o, z()]]) * re(0.75);
            let g7 = m3([[z(), z(), z()], [z(), z(), -o], [z(), o, z()]]) * (i * 0.75);
            let g8 = m3([[z(), z(), z()], [z(), o, z()], [z(), z(), -o]]) * h;
            let g9 = CMatrix::identity(3, 3);
            Self { g: [g1, g2, g3, g4, g5, g6, g7, g8, g9] }
        }

        /// Gell-Mann matrices from the linear combinations
        /// `λ₁ = Ĝ₄/3`, `λ₂ = −Ĝ₅/3`, `λ₃ = 2Ĝ₈ + Ĝ₃`, `λ₄ = √2(Ĝ₂ − Ĝ₄/3)`,
        /// `λ₅ = √2(Ĝ₁ − Ĝ₅/3)`, `λ₆ = 4Ĝ₆/3`, `λ₇ = 4Ĝ₇/3`, `λ₈ = (Ĝ₃ + 6Ĝ₈)/√3`.
        pub fn gell_mann(&self) -> [CMatrix; 8] {
            let g = &self.g;
            let third = re(1.0 / 3.0);
            [
                &g[3] * third,
                &g[4] * (-third),
                &g[7] * re(2.0) + &g[2],
                (&g[1] - &g[3] * third) * re(S2),
                (&g[0] - &g[4] * third) * re(S2),
                &g[5] * re(4.0 / 3.0),
                &g[6] * re(4.0 / 3.0),
                (&g[2] + &g[7] * re(6.0)) * re(1.0 / 3f64.sqrt()),
            ]
        }

        pub fn identity_element(&self) -> &CMatrix {
            &self.g[8]
        }
    }

    /// The standard Gell-Mann matrices `λ₁ … λ₈`.
    pub fn standard_gell_mann() -> [CMatrix; 8] {
        let (o, i) = (re(1.0), c(0.0, 1.0));
        let s3 = re(1.0 / 3f64.sqrt());
        [
            m3([[z(), o, z()], [o, z(), z()], [z(), z(), z()]]),
            m3([[z(), -i, z()], [i, z(), z()], [z(), z(), z()]]),
            m3([[o, z(), z()], [z(), -o, z()], [z(), z(), z()]]),
            m3([[z(), z(), o], [z(), z(), z()], [o, z(), z()]]),
            m3([[z(), z(), -i], [z(), z(), z()], [i, z(), z()]]),
            m3([[z(), z(), z()], [z(), z(), o], [z(), o, z()]]),
            m3([[z(), z(), z()], [z(), z(), -i], [z(), i, z()]]),
            m3([[o, z(), z()], [z(), o, z()], [z(), z(), re(-2.0)]]) * s3,
        ]
    }

    /// `f_abc` from `[λ_a, λ_b] = 2i Σ_c f_abc λ_c`, i.e. `f_abc = −(i/4) tr([λ_a, λ_b] λ_c)`.
    pub fn structure_constants() -> [[[f64; 8]; 8]; 8] {
        let l = standard_gell_mann();
        let mut f = [[[0.0; 8]; 8]; 8];
        for a in 0..8 {
            for b in 0..8 {
                let comm = linalg::commutator(&l[a], &l[b]);
                for cc in 0..8 {
                    f[a][b][cc] = (linalg::trace(&(&comm * &l[cc])) * c(0.0, -0.25)).re;
                }
            }
        }
        f
    }

    #[derive(Clone, Debug, Serialize, Deserialize)]
    pub struct GellMannCheck {
        /// `max |tr(λ_a λ_b) − 2δ_ab|`.
        pub trace_error: f64,
        /// `max ‖[λ_a, λ_b] − 2i Σ f_abc λ_c‖_max` with the standard `f`.
        pub structure_error: f64,
        /// `max ‖λ_a − λ_a^std‖_max` per matrix.
        pub deviation: Vec<f64>,
        pub hermiticity_error: f64,
    }

    impl GellMannCheck {
        pub fn passes(&self, tol: f64) -> bool {
            self.trace_error <= tol && self.structure_error <= tol && self.hermiticity_error <= tol
        }
    }

    pub fn check_gell_mann(l: &[CMatrix; 8]) -> GellMannCheck {
        let f = structure_constants();
        let std = standard_gell_mann();
        let mut trace_error: f64 = 0.0;
        let mut structure_error: f64 = 0.0;
        for a in 0..8 {
            for b in 0..8 {
                let t = linalg::trace(&(&l[a] * &l[b]));
                let expect = if a == b { 2.0 } else { 0.0 };
                trace_error = trace_error.max((t - re(expect)).norm());
                let comm = linalg::commutator(&l[a], &l[b]);
                let mut rhs = CMatrix::zeros(3, 3);
                for cc in 0..8 {
                    rhs += &l[cc] * c(0.0, 2.0 * f[a][b][cc]);
                }
                structure_error = structure_error.max(linalg::max_abs_diff(&comm, &rhs));
            }
        }
        GellMannCheck {
            trace_error,
            structure_error,
            deviation: l.iter().zip(std.iter()).map(|(x, y)| linalg::max_abs_diff(x, y)).collect(),
            hermiticity_error: l.iter().map(linalg::hermiticity_error).fold(0.0, f64::max),
        }
    }
}
