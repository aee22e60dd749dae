//! Max-relative entropy, the PPT′ set, and the max-Rains programs for
//! states (`W`) and channels (`Γ`), plus the transposed-channel diamond
//! norm bound `Q_Θ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{BipartiteState, Channel};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, partial_trace, partial_transpose, psd_negative_part, psd_positive_part,
    trace_norm, ComplexMatrix, DimSpec,
};
use crate::sdp::{
    HermitianProgram, HermitianSolution, LinearMap, SolveStatus, Term, VerifyReport, DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
};

/// Support test tolerance of [`dmax`].
pub const SUPPORT_TOL: f64 = 1e-9;

/// Solver settings shared by every program in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iters: DEFAULT_MAX_ITERS }
    }
}

/// Optimal value of one of the programs together with its certificate.
#[derive(Debug, Clone)]
pub struct MeasureResult {
    /// Solver primal objective.
    pub value: f64,
    /// `log₂(value)`.
    pub log2_value: f64,
    /// Optimal operators after feasibility repair: `(C, D)` for `W`,
    /// `(V, Y)` for `Γ`, `(X)` / `(Y)` for the separable programs.
    pub optimizers: Vec<ComplexMatrix>,
    /// Objective evaluated at the repaired optimizers, which are exactly
    /// feasible: an upper bound on the optimum.
    pub repaired_value: f64,
    /// Minimum eigenvalue of the operator inequality at the repaired point.
    pub feasibility_residual: f64,
    /// `[dual_obj, primal_obj]` from the independent verification.
    pub certificate: (f64, f64),
    pub report: VerifyReport,
    pub iterations: usize,
    /// False when a cone relaxation makes the value only a lower bound.
    pub exact: bool,
    /// Dual operator where one is meaningful: the optimal channel input
    /// `ρ_S` for the channel programs.
    pub dual_witness: Option<ComplexMatrix>,
}

impl MeasureResult {
    pub fn contains_value(&self) -> bool {
        let (lo, hi) = self.certificate;
        self.value >= lo - 1e-12 * (1.0 + lo.abs()) && self.value <= hi + 1e-12 * (1.0 + hi.abs())
    }
}

pub(crate) fn check_solution(sol: &HermitianSolution, what: &str) -> Result<()> {
    match sol.sdp.status {
        SolveStatus::Optimal => Ok(()),
        status => Err(Error::Solver(format!(
            "{what}: {status:?} after {} iterations (gap {:.3e}, residuals {:.3e}/{:.3e})",
            sol.sdp.iterations, sol.sdp.gap, sol.sdp.primal_residual, sol.sdp.dual_residual
        ))),
    }
}

pub(crate) fn finish(
    sol: &HermitianSolution,
    optimizers: Vec<ComplexMatrix>,
    repaired_value: f64,
    feasibility_residual: f64,
    exact: bool,
) -> MeasureResult {
    let value = sol.primal_obj();
    MeasureResult {
        value,
        log2_value: libm::log2(value),
        optimizers,
        repaired_value,
        feasibility_residual,
        certificate: sol.report.interval(),
        report: sol.report,
        iterations: sol.sdp.iterations,
        exact,
        dual_witness: None,
    }
}

/// `D_max(ρ‖σ) = log₂ λ_max(σ^{-1/2} ρ σ^{-1/2})`, or `+∞` when the
/// support of `ρ` leaves the support of `σ`.
pub fn dmax(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let rho = rho.hermitized()?;
    let sigma = sigma.hermitized()?;
    if rho.rows() != sigma.rows() {
        return Err(Error::DimensionMismatch("dmax arguments differ in size".into()));
    }
    let (rv, _) = hermitian_eigen(&rho)?;
    if rv[0] < -SUPPORT_TOL {
        return Err(Error::NotPositive { min_eigenvalue: rv[0] });
    }
    let (sv, su) = hermitian_eigen(&sigma)?;
    if sv[0] < -SUPPORT_TOL {
        return Err(Error::NotPositive { min_eigenvalue: sv[0] });
    }
    let n = rho.rows();
    let cut = SUPPORT_TOL * sv[n - 1].max(1.0);
    let support: Vec<usize> = (0..n).filter(|&k| sv[k] > cut).collect();
    // ρ restricted to the kernel of σ
    let kernel: Vec<usize> = (0..n).filter(|&k| sv[k] <= cut).collect();
    for &a in &kernel {
        let va = column(&su, a);
        let leak = va.adjoint().matmul(&rho).matmul(&va)[(0, 0)].re;
        if leak > SUPPORT_TOL {
            return Ok(f64::INFINITY);
        }
    }
    if support.is_empty() {
        return Ok(f64::INFINITY);
    }
    // σ^{-1/2} on its support, in the eigenbasis
    let k = support.len();
    let mut basis = ComplexMatrix::zeros(n, k);
    for (j, &s) in support.iter().enumerate() {
        let f = 1.0 / libm::sqrt(sv[s]);
        for i in 0..n {
            basis[(i, j)] = su[(i, s)] * f;
        }
    }
    let m = basis.adjoint().matmul(&rho).matmul(&basis);
    Ok(libm::log2(m.max_eigenvalue()?))
}

fn column(m: &ComplexMatrix, j: usize) -> ComplexMatrix {
    ComplexMatrix::column((0..m.rows()).map(|i| m[(i, j)]).collect())
}

/// Membership in `PPT′ = {σ ⪰ 0 : ‖T_B σ‖₁ ≤ 1}`.
pub fn ppt_prime_member(sigma: &ComplexMatrix, dims: &DimSpec, b_side: &[usize], tol: f64) -> Result<bool> {
    dims.check_matrix(sigma)?;
    dims.check_systems(b_side)?;
    let sigma = sigma.hermitized()?;
    if sigma.min_eigenvalue()? < -tol {
        return Ok(false);
    }
    let t = partial_transpose(&sigma, dims, b_side)?;
    Ok(trace_norm(&t)? <= 1.0 + tol)
}

/// Largest `δ ≥ 0` needed so that `residual + δ I ⪰ 0`.
pub(crate) fn shortfall(residual: &ComplexMatrix) -> Result<f64> {
    Ok((-residual.min_eigenvalue()?).max(0.0))
}

pub(crate) fn positive(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_positive_part(&m.hermitian_part())
}

fn check_cut(dims: &DimSpec, b_side: &[usize]) -> Result<()> {
    dims.check_systems(b_side)?;
    if b_side.is_empty() || b_side.len() == dims.len() {
        return Err(Error::InvalidDims(format!(
            "cut {:?} does not split factors {:?}",
            b_side,
            dims.factors()
        )));
    }
    Ok(())
}

/// `W(A;B)_ρ = min Tr(C + D)` subject to `T_B(C − D) ⪰ ρ`, `C, D ⪰ 0`.
pub fn w_state(rho: &BipartiteState, b_side: &[usize]) -> Result<MeasureResult> {
    w_state_with(rho, b_side, &SolveConfig::default())
}

pub fn w_state_with(rho: &BipartiteState, b_side: &[usize], cfg: &SolveConfig) -> Result<MeasureResult> {
    w_operator_with(rho.matrix(), rho.dims(), b_side, cfg)
}

/// The `W` program for an arbitrary PSD operator (not necessarily unit trace).
pub fn w_operator_with(
    rho: &ComplexMatrix,
    dims: &DimSpec,
    b_side: &[usize],
    cfg: &SolveConfig,
) -> Result<MeasureResult> {
    check_cut(dims, b_side)?;
    dims.check_matrix(rho)?;
    let n = dims.total();
    let pt = LinearMap::PartialTranspose { dims: dims.clone(), systems: b_side.to_vec() };
    let mut p = HermitianProgram::new();
    let c = p.hermitian_psd_var(n);
    let d = p.hermitian_psd_var(n);
    p.add_objective_trace(c, 1.0)?;
    p.add_objective_trace(d, 1.0)?;
    p.hermitian_lmi(vec![Term::new(1.0, c, pt.clone()), Term::new(-1.0, d, pt)], rho)?;
    let sol = p.solve(cfg.tol, cfg.max_iters)?;
    check_solution(&sol, "W program")?;
    let (cm, dm, resid) = repair_pair(sol.value(c), sol.value(d), rho, dims, b_side)?;
    let repaired = cm.trace().re + dm.trace().re;
    Ok(finish(&sol, vec![cm, dm], repaired, resid, true))
}

/// Clips `(P, Q)` to the PSD cone and shifts `P` by a multiple of the
/// identity until `T_B(P − Q) ⪰ target`; returns the repaired pair and the
/// final minimum eigenvalue of `T_B(P − Q) − target`.
pub(crate) fn repair_pair(
    p: &ComplexMatrix,
    q: &ComplexMatrix,
    target: &ComplexMatrix,
    dims: &DimSpec,
    b_side: &[usize],
) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    let mut p = positive(p)?;
    let q = positive(q)?;
    let resid = |p: &ComplexMatrix| -> Result<ComplexMatrix> {
        Ok(partial_transpose(&p.sub(&q), dims, b_side)?.sub(target))
    };
    let delta = shortfall(&resid(&p)?)?;
    if delta > 0.0 {
        // T_B(I) = I; the extra 1e-15 absorbs rounding of the shift itself
        let shift = delta * (1.0 + 1e-12) + 1e-15;
        p = p.add(&ComplexMatrix::scaled_identity(p.rows(), shift));
    }
    let final_min = resid(&p)?.min_eigenvalue()?;
    Ok((p, q, final_min))
}

pub fn r_max_state(rho: &BipartiteState, b_side: &[usize]) -> Result<f64> {
    Ok(w_state(rho, b_side)?.log2_value)
}

/// `Γ(N) = min ‖Tr_B(V + Y)‖_∞` subject to `T_B(V − Y) ⪰ J^N`, `V, Y ⪰ 0`,
/// with the norm replaced by an epigraph scalar.
pub fn gamma_channel(n: &Channel) -> Result<MeasureResult> {
    gamma_channel_with(n, &SolveConfig::default())
}

pub fn gamma_channel_with(n: &Channel, cfg: &SolveConfig) -> Result<MeasureResult> {
    let dims = n.choi_dims();
    let side = dims.total();
    let din = n.dim_in();
    let pt = LinearMap::PartialTranspose { dims: dims.clone(), systems: vec![1] };
    let tr = LinearMap::PartialTrace { dims: dims.clone(), traced: vec![1] };
    let mut p = HermitianProgram::new();
    let v = p.hermitian_psd_var(side);
    let y = p.hermitian_psd_var(side);
    let t = p.scalar_var();
    p.add_objective_trace(t, 1.0)?;
    p.hermitian_lmi(vec![Term::new(1.0, v, pt.clone()), Term::new(-1.0, y, pt)], n.choi())?;
    let epi = p.hermitian_lmi(
        vec![
            Term::new(1.0, t, LinearMap::ScalarIdentity(din)),
            Term::new(-1.0, v, tr.clone()),
            Term::new(-1.0, y, tr),
        ],
        &ComplexMatrix::zeros(din, din),
    )?;
    let sol = p.solve(cfg.tol, cfg.max_iters)?;
    check_solution(&sol, "Γ program")?;
    let (vm, ym, resid) = repair_pair(sol.value(v), sol.value(y), n.choi(), &dims, &[1])?;
    let repaired = marginal_norm(&vm.add(&ym), &dims)?;
    let mut out = finish(&sol, vec![vm, ym], repaired, resid, true);
    out.dual_witness = Some(input_from_multiplier(sol.dual_slack(epi))?);
    Ok(out)
}

/// Normalizes the multiplier of the epigraph constraint `t I ⪰ Tr_B(·)`
/// into a density operator on the channel input.
pub(crate) fn input_from_multiplier(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = positive(m)?;
    let tr = m.trace().re;
    if !(tr > 0.0) {
        return Err(Error::Solver("vanishing epigraph multiplier".into()));
    }
    Ok(m.scale(1.0 / tr))
}

/// `(√ρ_S ⊗ I) J (√ρ_S ⊗ I)`: the output of the channel on the purification
/// `(√ρ_S ⊗ I)|Υ⟩` of `ρ_S`.
pub fn sandwiched_choi(n: &Channel, rho_s: &ComplexMatrix) -> Result<BipartiteState> {
    let root = crate::linalg::psd_sqrt(&rho_s.hermitized()?)?;
    let lift = crate::linalg::kron(&root, &ComplexMatrix::identity(n.dim_out()));
    let m = lift.matmul(n.choi()).matmul(&lift);
    let tr = m.trace().re;
    BipartiteState::new(m.scale(1.0 / tr), n.choi_dims())
}

/// `‖Tr_B X‖_∞` for `X` on `[S, B]`.
pub(crate) fn marginal_norm(x: &ComplexMatrix, dims: &DimSpec) -> Result<f64> {
    partial_trace(x, dims, &[1])?.hermitian_part().max_eigenvalue()
}

pub fn r_max_channel(n: &Channel) -> Result<f64> {
    Ok(gamma_channel(n)?.log2_value)
}

/// `Q_Θ(N) = log₂ ‖T ∘ N‖_◇`, with the diamond norm of the Hermiticity-
/// preserving map `T ∘ N` (Choi operator `T_B J`) computed as
/// `min ‖Tr_B(P + Q)‖_∞` subject to `P − Q = T_B J`, `P, Q ⪰ 0`.
pub fn q_theta(n: &Channel) -> Result<f64> {
    Ok(q_theta_with(n, &SolveConfig::default())?.log2_value)
}

pub fn q_theta_with(n: &Channel, cfg: &SolveConfig) -> Result<MeasureResult> {
    let dims = n.choi_dims();
    let side = dims.total();
    let din = n.dim_in();
    let tb = partial_transpose(n.choi(), &dims, &[1])?;
    let tr = LinearMap::PartialTrace { dims: dims.clone(), traced: vec![1] };
    let mut p = HermitianProgram::new();
    let pv = p.hermitian_psd_var(side);
    let qv = p.hermitian_psd_var(side);
    let t = p.scalar_var();
    p.add_objective_trace(t, 1.0)?;
    p.equal(vec![Term::identity(1.0, pv), Term::identity(-1.0, qv)], &tb)?;
    p.hermitian_lmi(
        vec![
            Term::new(1.0, t, LinearMap::ScalarIdentity(din)),
            Term::new(-1.0, pv, tr.clone()),
            Term::new(-1.0, qv, tr),
        ],
        &ComplexMatrix::zeros(din, din),
    )?;
    let sol = p.solve(cfg.tol, cfg.max_iters)?;
    check_solution(&sol, "diamond-norm program")?;
    // exact decomposition P − Q = T_B J from the Jordan parts
    let pm = psd_positive_part(&tb)?;
    let qm = psd_negative_part(&tb)?;
    let jordan = marginal_norm(&pm.add(&qm), &dims)?;
    let (sp, sq) = (sol.value(pv).clone(), sol.value(qv).clone());
    let resid = sp.sub(&sq).max_abs_diff(&tb);
    Ok(finish(&sol, vec![sp, sq], jordan, -resid, true))
}

/// Strictly feasible point of the `W` program and its objective:
/// `C = (T_B ρ)_+ + 2εI`, `D = (T_B ρ)_- + εI`, so `T_B(C − D) = ρ + εI`.
pub fn w_slater_point(
    rho: &ComplexMatrix,
    dims: &DimSpec,
    b_side: &[usize],
    eps: f64,
) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    let t = partial_transpose(rho, dims, b_side)?;
    let n = rho.rows();
    let c = psd_positive_part(&t)?.add(&ComplexMatrix::scaled_identity(n, 2.0 * eps));
    let d = psd_negative_part(&t)?.add(&ComplexMatrix::scaled_identity(n, eps));
    let obj = c.trace().re + d.trace().re;
    Ok((c, d, obj))
}

/// Strictly feasible point of the `Γ` program and its objective, built from
/// the Jordan decomposition of `T_B J`.
pub fn gamma_slater_point(n: &Channel, eps: f64) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    let dims = n.choi_dims();
    let t = partial_transpose(n.choi(), &dims, &[1])?;
    let side = dims.total();
    let v = psd_positive_part(&t)?.add(&ComplexMatrix::scaled_identity(side, 2.0 * eps));
    let y = psd_negative_part(&t)?.add(&ComplexMatrix::scaled_identity(side, eps));
    let obj = marginal_norm(&v.add(&y), &dims)?;
    Ok((v, y, obj))
}
