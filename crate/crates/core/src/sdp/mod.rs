//! Primal–dual interior-point solver for small dense semidefinite programs.
//!
//! Standard form: minimize `⟨C, X⟩` subject to `⟨A_k, X⟩ = b_k`, `X ⪰ 0`,
//! where `X` is block diagonal with real symmetric blocks. The dual is
//! maximize `bᵀy` subject to `S = C − Σ y_k A_k ⪰ 0`.
//!
//! Complex Hermitian programs are written with [`HermitianProgram`] and pass
//! through the real embedding.

mod hermitian;
mod solver;
#[cfg(test)]
mod tests;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::random::Sampler;

pub use hermitian::{
    HermitianProgram, HermitianSolution, LinearMap, Term, VarId, VarKind,
};
pub use solver::solve;
#[doc(hidden)]
pub use hermitian::partial_trace_adjoint as hermitian_partial_trace_adjoint;

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 200;
/// Pivot threshold of the rank check on the normalized constraint Gram matrix.
pub const RANK_TOL: f64 = 1e-10;

/// One stored entry of a symmetric block-sparse matrix; `row ≤ col` and the
/// mirrored entry is implied.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Symmetric block-diagonal matrix in triplet form.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockSparse {
    entries: Vec<SymEntry>,
}

impl BlockSparse {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` at `(row, col)` and its mirror.
    pub fn push(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        self.entries.push(SymEntry { block, row, col, value });
    }

    pub fn entries(&self) -> &[SymEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorts, merges duplicates and drops exact zeros.
    pub fn compress(&mut self) {
        self.entries.sort_by_key(|e| (e.block, e.row, e.col));
        let mut out: Vec<SymEntry> = Vec::with_capacity(self.entries.len());
        for e in self.entries.drain(..) {
            match out.last_mut() {
                Some(last) if (last.block, last.row, last.col) == (e.block, e.row, e.col) => {
                    last.value += e.value;
                }
                _ => out.push(e),
            }
        }
        out.retain(|e| e.value != 0.0);
        self.entries = out;
    }

    /// `⟨A, X⟩` for block-diagonal dense `X`.
    pub fn dot(&self, x: &[RealMatrix]) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let m = &x[e.block];
                if e.row == e.col {
                    e.value * m[(e.row, e.row)]
                } else {
                    e.value * (m[(e.row, e.col)] + m[(e.col, e.row)])
                }
            })
            .sum()
    }

    /// `out += coef · A`.
    pub fn add_to(&self, coef: f64, out: &mut [RealMatrix]) {
        for e in &self.entries {
            let m = &mut out[e.block];
            m[(e.row, e.col)] += coef * e.value;
            if e.row != e.col {
                m[(e.col, e.row)] += coef * e.value;
            }
        }
    }

    /// `⟨A, B⟩` of two sparse symmetric matrices, both compressed.
    fn inner(&self, other: &Self) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        let key = |e: &SymEntry| (e.block, e.row, e.col);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (&self.entries[i], &other.entries[j]);
            match key(a).cmp(&key(b)) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    let w = if a.row == a.col { 1.0 } else { 2.0 };
                    acc += w * a.value * b.value;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(libm::fabs(e.value)))
    }
}

/// A semidefinite program in standard form.
#[derive(Debug, Clone, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SdpProblem {
    blocks: Vec<usize>,
    objective: BlockSparse,
    constraints: Vec<BlockSparse>,
    rhs: Vec<f64>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>) -> Self {
        Self { blocks, ..Self::default() }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn objective(&self) -> &BlockSparse {
        &self.objective
    }

    pub fn constraints(&self) -> &[BlockSparse] {
        &self.constraints
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Adds to the objective entry `(row, col)` of `block` (and its mirror).
    pub fn add_objective(&mut self, block: usize, row: usize, col: usize, value: f64) {
        self.objective.push(block, row, col, value);
    }

    pub fn set_objective(&mut self, c: BlockSparse) {
        self.objective = c;
    }

    pub fn add_constraint(&mut self, a: BlockSparse, b: f64) {
        self.constraints.push(a);
        self.rhs.push(b);
    }

    /// Checks block conformance and linear independence of the `A_k`.
    pub fn validate(&mut self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(Error::InvalidDims(format!("block sizes {:?}", self.blocks)));
        }
        self.objective.compress();
        for a in &mut self.constraints {
            a.compress();
        }
        let conform = |m: &BlockSparse| {
            m.entries
                .iter()
                .all(|e| e.block < self.blocks.len() && e.col < self.blocks[e.block])
        };
        if !conform(&self.objective) {
            return Err(Error::DimensionMismatch("objective does not fit the blocks".into()));
        }
        for (k, a) in self.constraints.iter().enumerate() {
            if !conform(a) {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {k} does not fit the blocks"
                )));
            }
        }
        if self.rhs.iter().any(|b| !b.is_finite())
            || self
                .constraints
                .iter()
                .chain(core::iter::once(&self.objective))
                .any(|m| m.entries.iter().any(|e| !e.value.is_finite()))
        {
            return Err(Error::Solver("non-finite problem data".into()));
        }
        self.check_rank()
    }

    /// Pivoted Cholesky of the normalized Gram matrix `⟨A_i, A_j⟩`.
    fn check_rank(&self) -> Result<()> {
        let m = self.constraints.len();
        let norms: Vec<f64> = self
            .constraints
            .iter()
            .map(|a| libm::sqrt(a.inner(a)))
            .collect();
        if let Some(k) = norms.iter().position(|&n| n == 0.0) {
            return Err(Error::RankDeficient { constraint: k, pivot: 0.0 });
        }
        // Only constraints sharing a block can overlap.
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            g[i * m + i] = 1.0;
            for j in 0..i {
                let v = self.constraints[i].inner(&self.constraints[j]) / (norms[i] * norms[j]);
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        let mut diag: Vec<f64> = vec![1.0; m];
        let mut l = vec![0.0; m * m];
        for k in 0..m {
            let (p, &best) = diag[k..]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, v)| (i + k, v))
                .unwrap();
            if best < RANK_TOL {
                return Err(Error::RankDeficient { constraint: perm[k], pivot: best });
            }
            perm.swap(k, p);
            diag.swap(k, p);
            for c in 0..k {
                l.swap(k * m + c, p * m + c);
            }
            let lkk = libm::sqrt(best);
            l[k * m + k] = lkk;
            for r in k + 1..m {
                let mut s = g[perm[r] * m + perm[k]];
                for c in 0..k {
                    s -= l[r * m + c] * l[k * m + c];
                }
                let v = s / lkk;
                l[r * m + k] = v;
                diag[r] -= v * v;
            }
        }
        Ok(())
    }

    /// Dense objective `C` block by block.
    pub fn dense_objective(&self) -> Vec<RealMatrix> {
        let mut c = self.zero_blocks();
        self.objective.add_to(1.0, &mut c);
        c
    }

    pub(crate) fn zero_blocks(&self) -> Vec<RealMatrix> {
        self.blocks.iter().map(|&n| RealMatrix::zeros(n, n)).collect()
    }

    /// `A(X)_k = ⟨A_k, X⟩`.
    pub fn apply(&self, x: &[RealMatrix]) -> Vec<f64> {
        self.constraints.iter().map(|a| a.dot(x)).collect()
    }

    /// `A*(y) = Σ y_k A_k`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<RealMatrix> {
        let mut out = self.zero_blocks();
        for (a, &yk) in self.constraints.iter().zip(y) {
            a.add_to(yk, &mut out);
        }
        out
    }

    pub(crate) fn objective_scale(&self) -> f64 {
        self.objective.max_abs()
    }
}

/// Termination status of [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SolveStatus {
    Optimal,
    /// A dual ray `y` with `bᵀy > 0`, `−A*(y) ⪰ 0` was found.
    PrimalInfeasibleCertificate,
    /// A primal ray `X ⪰ 0` with `A(X) = 0`, `⟨C, X⟩ < 0` was found.
    DualInfeasibleCertificate,
    NumericalTrouble,
}

/// Objective and residual history of one iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Result of [`solve`].
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<RealMatrix>,
    pub y: Vec<f64>,
    pub s: Vec<RealMatrix>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub history: Vec<IterateRecord>,
}

/// Residuals recomputed from problem data and a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub gap: f64,
    /// `max_k |⟨A_k, X⟩ − b_k|`
    pub primal_residual: f64,
    /// `max |C − A*(y) − S|`
    pub dual_residual: f64,
    pub min_eig_x: f64,
    pub min_eig_s: f64,
    pub tol: f64,
    pub passed: bool,
}

impl VerifyReport {
    /// Certified interval `[dual_obj, primal_obj]`.
    pub fn interval(&self) -> (f64, f64) {
        (self.dual_obj.min(self.primal_obj), self.primal_obj.max(self.dual_obj))
    }
}

fn min_eig_blocks(m: &[RealMatrix]) -> Result<f64> {
    let mut lo = f64::INFINITY;
    for b in m {
        lo = lo.min(b.min_eigenvalue()?);
    }
    Ok(lo)
}

/// Recomputes objectives, gap, residuals and cone membership from scratch.
pub fn verify(problem: &SdpProblem, solution: &SdpSolution, tol: f64) -> Result<VerifyReport> {
    if solution.x.len() != problem.blocks.len() || solution.y.len() != problem.rhs.len() {
        return Err(Error::DimensionMismatch("solution does not fit the problem".into()));
    }
    let c = problem.dense_objective();
    let primal_obj: f64 = c.iter().zip(&solution.x).map(|(c, x)| c.dot(x)).sum();
    let dual_obj: f64 = problem.rhs.iter().zip(&solution.y).map(|(b, y)| b * y).sum();
    let ax = problem.apply(&solution.x);
    let primal_residual = ax
        .iter()
        .zip(&problem.rhs)
        .fold(0.0f64, |m, (a, b)| m.max(libm::fabs(a - b)));
    let aty = problem.adjoint(&solution.y);
    let mut dual_residual = 0.0f64;
    for ((c, a), s) in c.iter().zip(&aty).zip(&solution.s) {
        dual_residual = dual_residual.max(c.sub(a).sub(s).max_abs());
    }
    let min_eig_x = min_eig_blocks(&solution.x)?;
    let min_eig_s = min_eig_blocks(&solution.s)?;
    let gap = primal_obj - dual_obj;
    let passed = libm::fabs(gap) <= tol * (1.0 + libm::fabs(primal_obj) + libm::fabs(dual_obj))
        && min_eig_x >= -tol
        && min_eig_s >= -tol
        && primal_residual <= tol
        && dual_residual <= tol;
    Ok(VerifyReport {
        primal_obj,
        dual_obj,
        gap,
        primal_residual,
        dual_residual,
        min_eig_x,
        min_eig_s,
        tol,
        passed,
    })
}

fn random_spd(s: &mut Sampler, n: usize) -> RealMatrix {
    let mut g = RealMatrix::zeros(n, n);
    for v in g.as_mut_slice() {
        *v = s.normal();
    }
    let mut m = g.matmul_t(&g).scale(1.0 / n as f64);
    for i in 0..n {
        m[(i, i)] += 0.5;
    }
    m
}

/// Random strictly feasible program (primal and dual interior points are
/// planted), up to three blocks of side ≤ 20 and at most 40 constraints.
pub fn random_feasible(seed: u64) -> SdpProblem {
    let mut s = Sampler::new(seed);
    let nblocks = 1 + s.below(3);
    let blocks: Vec<usize> = (0..nblocks).map(|_| 1 + s.below(20)).collect();
    let dof: usize = blocks.iter().map(|n| n * (n + 1) / 2).sum();
    let m = 1 + s.below(dof.min(40));
    let x0: Vec<RealMatrix> = blocks.iter().map(|&n| random_spd(&mut s, n)).collect();
    let s0: Vec<RealMatrix> = blocks.iter().map(|&n| random_spd(&mut s, n)).collect();
    let mut p = SdpProblem::new(blocks.clone());
    let mut ys = Vec::new();
    for _ in 0..m {
        let mut a = BlockSparse::new();
        for (b, &n) in blocks.iter().enumerate() {
            for i in 0..n {
                for j in i..n {
                    if s.uniform() < 0.5 {
                        a.push(b, i, j, s.normal());
                    }
                }
            }
        }
        if a.is_empty() {
            a.push(0, 0, 0, 1.0);
        }
        a.compress();
        let bk = a.dot(&x0);
        p.add_constraint(a, bk);
        ys.push(s.normal());
    }
    let aty = p.adjoint(&ys);
    let mut c = BlockSparse::new();
    for (b, &n) in blocks.iter().enumerate() {
        for i in 0..n {
            for j in i..n {
                c.push(b, i, j, s0[b][(i, j)] + aty[b][(i, j)]);
            }
        }
    }
    p.set_objective(c);
    p
}
