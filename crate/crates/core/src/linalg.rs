//! Dense complex linear algebra shared by the whole crate.
//!
//! Hilbert spaces here are tiny (dim <= 3*2^10), so everything is dense and
//! matrix exponentials go through a hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Largest entry of |A - A^H|.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= tol
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigendecomposition of a hermitian matrix: H = V diag(w) V^H.
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Decompose a hermitian matrix. Fails if the input is not hermitian
/// relative to its own scale.
pub fn eigh(h: &CMatrix) -> Result<Eigh> {
    let scale = max_abs(h).max(1.0);
    let defect = hermiticity_defect(h);
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian { defect });
    }
    let se = h.clone().symmetric_eigen();
    Ok(Eigh {
        values: se.eigenvalues.iter().copied().collect(),
        vectors: se.eigenvectors,
    })
}

impl Eigh {
    /// exp(-i H t) applied through the eigenbasis.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let n = self.values.len();
        let mut phased = self.vectors.clone();
        for (k, &w) in self.values.iter().enumerate() {
            let ph = (-I * c(w * t)).exp();
            for r in 0..n {
                phased[(r, k)] *= ph;
            }
        }
        phased * self.vectors.adjoint()
    }

    /// exp(-i H t) |psi>, reusing the decomposition for many times.
    pub fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        let mut w = self.vectors.adjoint() * psi;
        for (k, &ev) in self.values.iter().enumerate() {
            w[k] *= (-I * c(ev * t)).exp();
        }
        &self.vectors * w
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

/// exp(-i H t) for hermitian H.
pub fn expm_minus_i_h_t(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(eigh(h)?.propagator(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_hermitian() -> CMatrix {
        let mut h = CMatrix::zeros(3, 3);
        h[(0, 0)] = c(1.0);
        h[(1, 1)] = c(-2.0);
        h[(2, 2)] = c(0.5);
        h[(0, 1)] = C64::new(0.3, 0.4);
        h[(1, 0)] = h[(0, 1)].conj();
        h[(1, 2)] = C64::new(-0.1, 0.9);
        h[(2, 1)] = h[(1, 2)].conj();
        h
    }

    #[test]
    fn eigh_reconstructs_input() {
        let h = sample_hermitian();
        let e = eigh(&h).unwrap();
        let mut rebuilt = CMatrix::zeros(3, 3);
        for k in 0..3 {
            let v = e.vectors.column(k);
            rebuilt += v * v.adjoint() * c(e.values[k]);
        }
        assert!(max_abs(&(rebuilt - h)) < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut h = sample_hermitian();
        h[(0, 2)] = c(5.0);
        assert!(matches!(eigh(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn propagator_is_unitary_and_matches_scalar_phase() {
        let h = sample_hermitian();
        let u = expm_minus_i_h_t(&h, 0.37).unwrap();
        let uu = &u * u.adjoint();
        assert!(max_abs(&(uu - identity(3))) < 1e-12);

        // diagonal hamiltonian: entries are plain phases
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0), c(-1.0), c(0.0)]));
        let ud = expm_minus_i_h_t(&d, 1.3).unwrap();
        assert_abs_diff_eq!(ud[(0, 0)].re, (2.0f64 * 1.3).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(ud[(0, 0)].im, -(2.0f64 * 1.3).sin(), epsilon = 1e-14);
    }

    #[test]
    fn kron_all_shapes() {
        let a = identity(2);
        let b = identity(3);
        assert_eq!(kron_all(&[a, b]).nrows(), 6);
        assert_eq!(kron_all(&[]).nrows(), 1);
    }
}
