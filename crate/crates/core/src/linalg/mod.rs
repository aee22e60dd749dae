//! Dense complex matrices with tensor-factor bookkeeping.
//!
//! Subsystem conventions: a [`DimSpec`] lists factor dimensions in
//! big-endian order, so the basis index of `|i₀⟩⊗|i₁⟩⊗…` is
//! `((i₀·d₁ + i₁)·d₂ + …)`. All partial operations use the computational
//! basis.

mod eigen;
mod real;
mod scalar;
mod spectral;
mod tensor;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

pub use num_complex::Complex64 as C64;
pub use real::RealMatrix;
pub use spectral::{
    expectation, fidelity, hermitian_eigen, operator_norm, psd_negative_part, psd_positive_part, psd_sqrt,
    trace_norm,
};
pub use tensor::{
    kron, max_entangled_vector, partial_trace, partial_transpose, permute_subsystems,
    sandwich_max_entangled, transpose_trick_check,
};

use crate::error::{Error, Result};

/// Absolute Hermiticity defect accepted by [`ComplexMatrix::hermitized`],
/// relative to `1 + max|M|`.
pub const HERMITIAN_INGEST_TOL: f64 = 1e-10;

/// Tolerance of [`ComplexMatrix::is_hermitian`], relative to `1 + max|M|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Ordered tensor-factor dimensions of a square operator.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimSpec {
    factors: Vec<usize>,
}

impl DimSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(Error::InvalidDims(format!("factors must be positive, got {factors:?}")));
        }
        Ok(Self { factors })
    }

    pub fn from_slice(factors: &[usize]) -> Result<Self> {
        Self::new(factors.to_vec())
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.factors[k]
    }

    /// Product of the dimensions of the listed factors.
    pub fn product_of(&self, systems: &[usize]) -> usize {
        systems.iter().map(|&k| self.factors[k]).product()
    }

    /// Dims with the listed factors removed.
    pub fn without(&self, systems: &[usize]) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(k, _)| !systems.contains(k))
            .map(|(_, &d)| d)
            .collect()
    }

    pub(crate) fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.rows() != self.total() {
            return Err(Error::InvalidDims(format!(
                "factors {:?} (product {}) do not match a {}x{} matrix",
                self.factors,
                self.total(),
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_systems(&self, systems: &[usize]) -> Result<()> {
        for (i, &s) in systems.iter().enumerate() {
            if s >= self.factors.len() {
                return Err(Error::InvalidDims(format!(
                    "subsystem {s} out of range for {} factors",
                    self.factors.len()
                )));
            }
            if systems[..i].contains(&s) {
                return Err(Error::InvalidDims(format!("subsystem {s} listed twice")));
            }
        }
        Ok(())
    }

    /// Big-endian digits of a basis index.
    pub(crate) fn digits(&self, mut index: usize, out: &mut [usize]) {
        for k in (0..self.factors.len()).rev() {
            out[k] = index % self.factors[k];
            index /= self.factors[k];
        }
    }

    pub(crate) fn index_of(&self, digits: &[usize]) -> usize {
        let mut idx = 0;
        for (k, &d) in self.factors.iter().enumerate() {
            idx = idx * d + digits[k];
        }
        idx
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(s, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Column vector.
    pub fn column(v: Vec<C64>) -> Self {
        let n = v.len();
        Self { rows: n, cols: 1, data: v }
    }

    /// `|i⟩⟨j|` in dimension `d`.
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(d, d);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    /// Rank-one projector `v v†` of a column vector.
    pub fn outer(v: &Self) -> Self {
        let n = v.data.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v.data[i] * v.data[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        t
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// `self += s * rhs`
    pub fn axpy(&mut self, s: f64, rhs: &Self) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b * s;
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · rhs · self†`
    pub fn congruence(&self, rhs: &Self) -> Self {
        self.matmul(rhs).matmul(&self.adjoint())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// `Tr(A† B)`
    pub fn inner(&self, rhs: &Self) -> C64 {
        self.data.iter().zip(&rhs.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Largest entrywise distance.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        self.data.iter().zip(&rhs.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        defect
    }

    /// Strict Hermiticity test at `1e-12 · (1 + max|M|)`.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= HERMITIAN_TOL * (1.0 + self.max_abs())
    }

    /// Returns `(M + M†)/2` when the defect is within the ingestion
    /// tolerance and rejects the matrix otherwise.
    pub fn hermitized(&self) -> Result<Self> {
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_INGEST_TOL * (1.0 + self.max_abs()) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(self.hermitian_part())
    }

    /// `(M + M†)/2` without any check.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        out
    }

    /// Real symmetric embedding `[[A, −B], [B, A]]` of `h = A + iB`.
    pub fn real_embedding(&self) -> Result<RealMatrix> {
        let h = self.hermitized()?;
        let n = h.rows;
        let mut out = RealMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = h.data[i * n + j];
                out[(i, j)] = z.re;
                out[(i + n, j + n)] = z.re;
                out[(i, j + n)] = -z.im;
                out[(i + n, j)] = z.im;
            }
        }
        Ok(out)
    }

    /// Inverse direction of [`Self::real_embedding`] for an arbitrary real
    /// symmetric `2n × 2n` matrix: averages the two diagonal blocks and the
    /// two off-diagonal blocks. Maps PSD matrices to PSD matrices and
    /// satisfies `⟨embed(B), Z⟩ = 2·Tr(B · from_real_embedding(Z))`.
    pub fn from_real_embedding(z: &RealMatrix) -> Result<Self> {
        if z.rows() != z.cols() || !z.rows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "real embedding must be square of even side, got {}x{}",
                z.rows(),
                z.cols()
            )));
        }
        let n = z.rows() / 2;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let re = 0.5 * (z[(i, j)] + z[(i + n, j + n)]);
                let im = 0.5 * (z[(i + n, j)] - z[(i, j + n)]);
                out.data[i * n + j] = C64::new(re, im);
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests;
