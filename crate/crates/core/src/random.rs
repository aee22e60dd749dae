//! Seeded sampling helpers shared by the random instance generators.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::linalg::{ComplexMatrix, C64};

/// Deterministic generator used everywhere a seed is accepted.
pub struct Sampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }

    pub fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal()) * core::f64::consts::FRAC_1_SQRT_2
    }

    /// Matrix with i.i.d. standard complex Gaussian entries.
    pub fn ginibre(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        let data: Vec<C64> = (0..rows * cols).map(|_| self.complex_normal()).collect();
        ComplexMatrix::from_vec(rows, cols, data).expect("shape")
    }

    /// Random unit vector (uniform on the complex sphere).
    pub fn unit_vector(&mut self, d: usize) -> ComplexMatrix {
        let g = self.ginibre(d, 1);
        let norm = g.frobenius_norm();
        g.scale(1.0 / norm)
    }

    /// Random density matrix `G G† / Tr(G G†)` with `G` of shape `d × rank`.
    pub fn density_matrix(&mut self, d: usize, rank: usize) -> ComplexMatrix {
        let g = self.ginibre(d, rank.max(1));
        let rho = g.matmul(&g.adjoint()).hermitian_part();
        let tr = rho.trace().re;
        rho.scale(1.0 / tr)
    }

    /// Haar-random isometry of shape `rows × cols` (`rows ≥ cols`) from
    /// Gram-Schmidt orthonormalization of a Gaussian matrix.
    pub fn isometry(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        assert!(rows >= cols, "isometry needs rows >= cols");
        let g = self.ginibre(rows, cols);
        orthonormalize_columns(&g)
    }

    pub fn unitary(&mut self, d: usize) -> ComplexMatrix {
        self.isometry(d, d)
    }

    /// Random probability vector (flat Dirichlet).
    pub fn simplex(&mut self, n: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..n).map(|_| -libm::log(1.0 - self.uniform())).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }
}

/// Modified Gram-Schmidt, applied twice for stability.
pub(crate) fn orthonormalize_columns(a: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (a.rows(), a.cols());
    let mut q = a.clone();
    for _pass in 0..2 {
        for j in 0..cols {
            for k in 0..j {
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..rows {
                    dot += q[(i, k)].conj() * q[(i, j)];
                }
                for i in 0..rows {
                    let qik = q[(i, k)];
                    q[(i, j)] -= qik * dot;
                }
            }
            let norm = libm::sqrt((0..rows).map(|i| q[(i, j)].norm_sqr()).sum::<f64>());
            for i in 0..rows {
                q[(i, j)] /= norm;
            }
        }
    }
    q
}
