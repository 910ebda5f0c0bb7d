//! Dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// The Lie bracket on Hermitian matrices, `i[A, B]`, which is again Hermitian.
pub fn bracket(a: &CMatrix, b: &CMatrix) -> CMatrix {
    commutator(a, b) * I
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermiticity_error(a: &CMatrix) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// `Re tr(A† B)`, the real Hilbert–Schmidt inner product.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Spectral decomposition of a Hermitian matrix, cached so that
/// `exp(-i t H)` can be evaluated for many `t` cheaply.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::Dimension(format!("{}x{} is not square", h.nrows(), h.ncols())));
        }
        let err = hermiticity_error(h);
        let scale = max_abs(h).max(1.0);
        if err > 1e-10 * scale {
            return Err(Error::NotHermitian(err));
        }
        // Symmetrize so the eigensolver sees an exactly Hermitian input.
        let hs = (h + h.adjoint()) * re(0.5);
        let eig = SymmetricEigen::new(hs);
        Ok(Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    /// `exp(-i t H)`.
    pub fn evolve(&self, t: f64) -> CMatrix {
        let n = self.values.len();
        if t == 0.0 {
            return CMatrix::identity(n, n);
        }
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -t * lam);
            for r in 0..n {
                scaled[(r, k)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(HermitianEigen::new(h)?.evolve(t))
}

/// Von Neumann entropy (natural log) of a density matrix.
pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    let hs = (rho + rho.adjoint()) * re(0.5);
    let eig = SymmetricEigen::new(hs);
    eig.eigenvalues
        .iter()
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Nearest-phase fidelity of two states, `|<a|b>|`.
pub fn overlap_modulus(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
    }

    #[test]
    fn eigen_route_matches_pade_route() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[re(0.3), c(0.1, -0.7), re(2.0), c(0.1, 0.7), re(-1.1), c(0.0, 0.4), re(2.0), c(0.0, -0.4), re(0.5)],
        );
        let u = expm_hermitian(&h, 1.7).unwrap();
        let pade = (h * c(0.0, -1.7)).exp();
        assert!(max_abs_diff(&u, &pade) < 1e-12);
        assert!(unitarity_error(&u) < 1e-13);
    }

    #[test]
    fn pauli_x_rotation() {
        // exp(-i π X / 2) = -i X
        let u = expm_hermitian(&(pauli_x() * re(0.5)), std::f64::consts::PI).unwrap();
        assert!(max_abs_diff(&u, &(pauli_x() * c(0.0, -1.0))) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]);
        assert!(matches!(HermitianEigen::new(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn entropy_of_maximally_mixed_qubit() {
        let rho = CMatrix::identity(2, 2) * re(0.5);
        assert!((von_neumann_entropy(&rho) - 2f64.ln()).abs() < 1e-14);
    }
}
