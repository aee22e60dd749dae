//! Complex Hermitian programs over PSD matrix variables and nonnegative
//! scalars, lowered to the real standard form.
//!
//! A Hermitian variable `X` of side `n` is stored as a real block `Z` of side
//! `2n` with `X = φ(Z)`, where `φ` is the left inverse of the real embedding.
//! Since `⟨E(B), Z⟩ = 2 Tr(B φ(Z))`, complex data enter the real program as
//! `E(B)/2` and every reported value equals its complex-domain counterpart.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{solve, verify, BlockSparse, SdpProblem, SdpSolution, VerifyReport};
use crate::error::{Error, Result};
use crate::linalg::{partial_transpose, ComplexMatrix, DimSpec, C64};

/// Handle to a program variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Complex Hermitian PSD matrix of the given side.
    Hermitian(usize),
    /// Real scalar `t ≥ 0`.
    Scalar,
}

/// Linear map applied to a variable inside a constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap {
    Identity,
    PartialTranspose { dims: DimSpec, systems: Vec<usize> },
    PartialTrace { dims: DimSpec, traced: Vec<usize> },
    /// `t ↦ t · I_n` for a scalar variable.
    ScalarIdentity(usize),
}

/// `coef · map(var)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub var: VarId,
    pub map: LinearMap,
}

impl Term {
    pub fn new(coef: f64, var: VarId, map: LinearMap) -> Self {
        Self { coef, var, map }
    }

    pub fn identity(coef: f64, var: VarId) -> Self {
        Self::new(coef, var, LinearMap::Identity)
    }
}

/// Builder for a complex Hermitian SDP.
#[derive(Debug, Clone, Default)]
pub struct HermitianProgram {
    vars: Vec<VarKind>,
    objective: Vec<(VarId, ComplexMatrix)>,
    /// each entry: terms, Hermitian right-hand side
    equalities: Vec<(Vec<Term>, ComplexMatrix)>,
}

/// Solution of a [`HermitianProgram`] in complex form.
#[derive(Debug, Clone)]
pub struct HermitianSolution {
    pub sdp: SdpSolution,
    pub report: VerifyReport,
    values: Vec<ComplexMatrix>,
    slacks: Vec<ComplexMatrix>,
}

impl HermitianSolution {
    /// Primal value of a variable (`1×1` for scalars).
    pub fn value(&self, v: VarId) -> &ComplexMatrix {
        &self.values[v.0]
    }

    pub fn scalar(&self, v: VarId) -> f64 {
        self.values[v.0][(0, 0)].re
    }

    /// Dual slack block of a variable in complex form: the matrix `S` with
    /// `⟨S_real, Z⟩ = Tr(S φ(Z))`.
    pub fn dual_slack(&self, v: VarId) -> &ComplexMatrix {
        &self.slacks[v.0]
    }

    pub fn primal_obj(&self) -> f64 {
        self.sdp.primal_obj
    }

    pub fn dual_obj(&self) -> f64 {
        self.sdp.dual_obj
    }
}

fn map_output_dim(kind: VarKind, map: &LinearMap) -> Result<usize> {
    match (kind, map) {
        (VarKind::Hermitian(n), LinearMap::Identity) => Ok(n),
        (VarKind::Hermitian(n), LinearMap::PartialTranspose { dims, systems }) => {
            if dims.total() != n {
                return Err(Error::DimensionMismatch(format!(
                    "partial transpose dims {:?} on side {n}",
                    dims.factors()
                )));
            }
            dims.check_systems(systems)?;
            Ok(n)
        }
        (VarKind::Hermitian(n), LinearMap::PartialTrace { dims, traced }) => {
            if dims.total() != n {
                return Err(Error::DimensionMismatch(format!(
                    "partial trace dims {:?} on side {n}",
                    dims.factors()
                )));
            }
            dims.check_systems(traced)?;
            Ok(n / dims.product_of(traced))
        }
        (VarKind::Scalar, LinearMap::ScalarIdentity(k)) => Ok(*k),
        (VarKind::Scalar, LinearMap::Identity) => Ok(1),
        _ => Err(Error::DimensionMismatch("map does not apply to this variable kind".into())),
    }
}

/// Adjoint of the partial trace: `B ↦ B ⊗ I` on the traced factors.
pub fn partial_trace_adjoint(b: &ComplexMatrix, dims: &DimSpec, traced: &[usize]) -> ComplexMatrix {
    let n = dims.total();
    let k = dims.len();
    let kept: Vec<usize> = (0..k).filter(|s| !traced.contains(s)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&s| dims.dim(s)).collect();
    let kept_spec = DimSpec::new(if kept_dims.is_empty() { vec![1] } else { kept_dims }).expect("positive");
    let mut di = vec![0; k];
    let mut dj = vec![0; k];
    let mut ki = vec![0; kept_spec.len()];
    let mut kj = vec![0; kept_spec.len()];
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        dims.digits(i, &mut di);
        for j in 0..n {
            dims.digits(j, &mut dj);
            if traced.iter().any(|&s| di[s] != dj[s]) {
                continue;
            }
            for (pos, &s) in kept.iter().enumerate() {
                ki[pos] = di[s];
                kj[pos] = dj[s];
            }
            let (a, c) = if kept.is_empty() {
                (0, 0)
            } else {
                (kept_spec.index_of(&ki), kept_spec.index_of(&kj))
            };
            out[(i, j)] = b[(a, c)];
        }
    }
    out
}

impl HermitianProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hermitian_psd_var(&mut self, n: usize) -> VarId {
        self.vars.push(VarKind::Hermitian(n));
        VarId(self.vars.len() - 1)
    }

    pub fn scalar_var(&mut self) -> VarId {
        self.vars.push(VarKind::Scalar);
        VarId(self.vars.len() - 1)
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.vars[v.0]
    }

    /// Adds `Tr(weight · v)` to the objective (minimized).
    pub fn add_objective(&mut self, v: VarId, weight: ComplexMatrix) -> Result<()> {
        let side = match self.vars[v.0] {
            VarKind::Hermitian(n) => n,
            VarKind::Scalar => 1,
        };
        if weight.rows() != side || !weight.is_square() {
            return Err(Error::DimensionMismatch("objective weight size".into()));
        }
        self.objective.push((v, weight.hermitized()?));
        Ok(())
    }

    /// Adds `coef · Tr(v)` to the objective.
    pub fn add_objective_trace(&mut self, v: VarId, coef: f64) -> Result<()> {
        let side = match self.vars[v.0] {
            VarKind::Hermitian(n) => n,
            VarKind::Scalar => 1,
        };
        self.add_objective(v, ComplexMatrix::scaled_identity(side, coef))
    }

    /// `Σ terms = rhs` as Hermitian matrices.
    pub fn equal(&mut self, terms: Vec<Term>, rhs: &ComplexMatrix) -> Result<()> {
        let rhs = rhs.hermitized()?;
        for t in &terms {
            let out = map_output_dim(self.vars[t.var.0], &t.map)?;
            if out != rhs.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "term of output side {out} against right-hand side {}",
                    rhs.rows()
                )));
            }
        }
        self.equalities.push((terms, rhs));
        Ok(())
    }

    /// `Σ terms ⪰ rhs`, encoded with a fresh PSD slack which is returned.
    pub fn hermitian_lmi(&mut self, mut terms: Vec<Term>, rhs: &ComplexMatrix) -> Result<VarId> {
        let slack = self.hermitian_psd_var(rhs.rows());
        terms.push(Term::identity(-1.0, slack));
        self.equal(terms, rhs)?;
        Ok(slack)
    }

    fn block_of(&self, kind: VarKind) -> usize {
        match kind {
            VarKind::Hermitian(n) => 2 * n,
            VarKind::Scalar => 1,
        }
    }

    /// Pushes `Tr(m · v)` as real data of `v`'s block into `out`.
    fn push_functional(&self, v: VarId, m: &ComplexMatrix, out: &mut BlockSparse) {
        match self.vars[v.0] {
            VarKind::Scalar => {
                if m[(0, 0)].re != 0.0 {
                    out.push(v.0, 0, 0, m[(0, 0)].re);
                }
            }
            VarKind::Hermitian(n) => {
                for p in 0..n {
                    for q in p..n {
                        let z = m[(p, q)];
                        let (re, im) = (0.5 * z.re, 0.5 * z.im);
                        if re != 0.0 {
                            out.push(v.0, p, q, re);
                            out.push(v.0, n + p, n + q, re);
                        }
                        // off-diagonal block of E(M) is −Im M; (p, n+q) and (q, n+p) are upper entries
                        if im != 0.0 {
                            out.push(v.0, p, n + q, -im);
                            out.push(v.0, q, n + p, im);
                        }
                    }
                }
            }
        }
    }

    /// Adjoint of a term's map applied to the functional `b`.
    fn adjoint(&self, t: &Term, b: &ComplexMatrix) -> ComplexMatrix {
        let m = match &t.map {
            LinearMap::Identity => b.clone(),
            LinearMap::PartialTranspose { dims, systems } => {
                partial_transpose(b, dims, systems).expect("validated dims")
            }
            LinearMap::PartialTrace { dims, traced } => partial_trace_adjoint(b, dims, traced),
            LinearMap::ScalarIdentity(_) => {
                let mut s = ComplexMatrix::zeros(1, 1);
                s[(0, 0)] = b.trace();
                s
            }
        };
        m.scale(t.coef)
    }

    /// Lowers the program to real standard form.
    pub fn to_sdp(&self) -> SdpProblem {
        let blocks: Vec<usize> = self.vars.iter().map(|&k| self.block_of(k)).collect();
        let mut p = SdpProblem::new(blocks);
        let mut c = BlockSparse::new();
        for (v, w) in &self.objective {
            self.push_functional(*v, w, &mut c);
        }
        p.set_objective(c);
        for (terms, rhs) in &self.equalities {
            let m = rhs.rows();
            for a in 0..m {
                for b in a..m {
                    let kinds: &[bool] = if a == b { &[false] } else { &[false, true] };
                    for &imag in kinds {
                        let mut func = ComplexMatrix::zeros(m, m);
                        let target = if a == b {
                            func[(a, a)] = C64::new(1.0, 0.0);
                            rhs[(a, a)].re
                        } else if !imag {
                            func[(a, b)] = C64::new(1.0, 0.0);
                            func[(b, a)] = C64::new(1.0, 0.0);
                            2.0 * rhs[(a, b)].re
                        } else {
                            func[(a, b)] = C64::new(0.0, 1.0);
                            func[(b, a)] = C64::new(0.0, -1.0);
                            2.0 * rhs[(a, b)].im
                        };
                        let mut row = BlockSparse::new();
                        for t in terms {
                            let adj = self.adjoint(t, &func);
                            self.push_functional(t.var, &adj, &mut row);
                        }
                        row.compress();
                        p.add_constraint(row, target);
                    }
                }
            }
        }
        p
    }

    pub fn solve(&self, tol: f64, max_iters: usize) -> Result<HermitianSolution> {
        let p = self.to_sdp();
        let sdp = solve(&p, tol, max_iters)?;
        let report = verify(&p, &sdp, tol)?;
        let mut values = Vec::with_capacity(self.vars.len());
        let mut slacks = Vec::with_capacity(self.vars.len());
        for (k, kind) in self.vars.iter().enumerate() {
            match kind {
                VarKind::Scalar => {
                    values.push(ComplexMatrix::scaled_identity(1, sdp.x[k][(0, 0)]));
                    slacks.push(ComplexMatrix::scaled_identity(1, sdp.s[k][(0, 0)]));
                }
                VarKind::Hermitian(_) => {
                    values.push(ComplexMatrix::from_real_embedding(&sdp.x[k])?);
                    slacks.push(ComplexMatrix::from_real_embedding(&sdp.s[k])?.scale(2.0));
                }
            }
        }
        Ok(HermitianSolution { sdp, report, values, slacks })
    }
}
