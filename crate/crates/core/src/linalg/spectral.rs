use alloc::vec::Vec;

use super::eigen;
use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// PSD tolerance used by [`fidelity`] and the matrix-function helpers.
const PSD_TOL: f64 = 1e-10;

/// Ascending eigenvalues and column eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let h = h.hermitized()?;
    let n = h.rows();
    let (vals, vecs) = eigen::hermitian_eigen(n, h.as_slice(), true)?;
    Ok((vals, ComplexMatrix::from_vec(n, n, vecs)?))
}

impl ComplexMatrix {
    /// Ascending eigenvalues of a Hermitian matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitized()?;
        Ok(eigen::hermitian_eigen(h.rows(), h.as_slice(), false)?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("non-empty"))
    }

    /// `f(h)` for Hermitian `h`, applied on the spectrum.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let (vals, vecs) = hermitian_eigen(self)?;
        let n = vals.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = vecs[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * vecs[(j, k)].conj();
                }
            }
        }
        Ok(out)
    }

    /// Whether the minimum eigenvalue is at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }
}

/// Sum of singular values. Hermitian input uses `Σ|λ|` directly.
pub fn trace_norm(x: &ComplexMatrix) -> Result<f64> {
    if x.is_square() && x.is_hermitian() {
        return Ok(x.eigenvalues()?.iter().map(|l| libm::fabs(*l)).sum());
    }
    let gram = x.adjoint().matmul(x);
    Ok(gram.eigenvalues()?.iter().map(|&l| libm::sqrt(l.max(0.0))).sum())
}

/// Largest `|λ|` of a Hermitian matrix.
pub fn operator_norm(x: &ComplexMatrix) -> Result<f64> {
    if !x.is_square() {
        return Err(Error::NotHermitian { defect: f64::INFINITY });
    }
    let vals = x.eigenvalues()?;
    Ok(libm::fabs(vals[0]).max(libm::fabs(*vals.last().expect("non-empty"))))
}

fn check_psd(x: &ComplexMatrix) -> Result<()> {
    let lam = x.min_eigenvalue()?;
    if lam < -PSD_TOL * (1.0 + x.max_abs()) {
        return Err(Error::NotPositive { min_eigenvalue: lam });
    }
    Ok(())
}

/// Principal square root of a PSD matrix; tiny negative eigenvalues are
/// clipped to zero.
pub fn psd_sqrt(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_psd(x)?;
    x.spectral_map(|l| libm::sqrt(l.max(0.0)))
}

/// Positive part `H₊` of a Hermitian `H = H₊ − H₋`.
pub fn psd_positive_part(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    h.spectral_map(|l| l.max(0.0))
}

/// Negative part `H₋` (itself PSD) of a Hermitian `H = H₊ − H₋`.
pub fn psd_negative_part(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    h.spectral_map(|l| (-l).max(0.0))
}

/// Uhlmann fidelity `‖√τ √κ‖₁²`, computed as `(Tr √(√κ τ √κ))²`.
pub fn fidelity(tau: &ComplexMatrix, kappa: &ComplexMatrix) -> Result<f64> {
    check_psd(tau)?;
    check_psd(kappa)?;
    if tau.rows() != kappa.rows() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "fidelity of {}x{} and {}x{}",
            tau.rows(),
            tau.cols(),
            kappa.rows(),
            kappa.cols()
        )));
    }
    let sk = psd_sqrt(kappa)?;
    let inner = sk.matmul(tau).matmul(&sk).hermitian_part();
    let root_trace: f64 = inner.eigenvalues()?.iter().map(|&l| libm::sqrt(l.max(0.0))).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// `⟨v| m |v⟩` for a column vector `v`.
pub fn expectation(m: &ComplexMatrix, v: &ComplexMatrix) -> C64 {
    v.adjoint().matmul(m).matmul(v)[(0, 0)]
}
