//! Max-relative entropy of entanglement for states (`W_sep`) and channels
//! (`Σ`), with the separable cone encoded as `{X ⪰ 0, T_B X ⪰ 0}`.
//!
//! The encoding is the separable cone exactly when `|A|·|B| ≤ 6`; beyond that
//! it is the PPT cone, which is larger, so the minimum is a lower bound.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::amortization::{link_product, AmortizationDims, ASSERT_TOL, FEAS_TOL};
use crate::channel::{apply_channel, BipartiteState, Channel};
use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace, partial_transpose, psd_sqrt, ComplexMatrix, DimSpec};
use crate::rains::{
    check_solution, finish, input_from_multiplier, marginal_norm, shortfall,
    MeasureResult, SolveConfig,
};
use crate::random::Sampler;
use crate::sdp::{HermitianProgram, LinearMap, Term};

/// Largest `|A|·|B|` for which PPT and separability coincide.
pub const EXACT_PRODUCT_LIMIT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SepConeMode {
    /// `{X ⪰ 0, T_B X ⪰ 0}` read as the separable cone; only for `|A|·|B| ≤ 6`.
    ExactSmallDims,
    /// The same encoding on any dims, reported as a lower bound.
    PptRelaxation,
}

impl SepConeMode {
    pub fn is_exact(self) -> bool {
        self == SepConeMode::ExactSmallDims
    }

    /// Exact when allowed, relaxed otherwise.
    pub fn for_product(product: usize) -> Self {
        if product <= EXACT_PRODUCT_LIMIT {
            SepConeMode::ExactSmallDims
        } else {
            SepConeMode::PptRelaxation
        }
    }

    fn gate(self, product: usize) -> Result<()> {
        if self.is_exact() && product > EXACT_PRODUCT_LIMIT {
            return Err(Error::ExactModeUnavailable { product });
        }
        Ok(())
    }
}

/// `W_sep(A;B)_ρ = min {Tr X : X ⪰ ρ, X in the separable cone}`.
pub fn w_sep(rho: &BipartiteState, b_side: &[usize], mode: SepConeMode) -> Result<MeasureResult> {
    w_sep_with(rho, b_side, mode, &SolveConfig::default())
}

pub fn w_sep_with(
    rho: &BipartiteState,
    b_side: &[usize],
    mode: SepConeMode,
    cfg: &SolveConfig,
) -> Result<MeasureResult> {
    let dims = rho.dims();
    dims.check_systems(b_side)?;
    if b_side.is_empty() || b_side.len() == dims.len() {
        return Err(Error::InvalidDims(format!("cut {b_side:?} does not split {:?}", dims.factors())));
    }
    mode.gate(dims.total())?;
    let n = dims.total();
    // X = ρ + Z with Z ⪰ 0; a separate X ⪰ 0 block would duplicate X ⪰ ρ
    // on the kernel of ρ and make the program degenerate.
    let mut p = HermitianProgram::new();
    let z = p.hermitian_psd_var(n);
    p.add_objective_trace(z, 1.0)?;
    let pt = LinearMap::PartialTranspose { dims: dims.clone(), systems: b_side.to_vec() };
    let rho_pt = partial_transpose(rho.matrix(), dims, b_side)?;
    p.hermitian_lmi(vec![Term::new(1.0, z, pt)], &rho_pt.scale(-1.0))?;
    let sol = p.solve(cfg.tol, cfg.max_iters)?;
    check_solution(&sol, "separable-cone state program")?;
    let x = rho.matrix().add(sol.value(z));
    let (xm, resid) = repair_sep(&x, rho.matrix(), dims, b_side)?;
    let repaired = xm.trace().re;
    Ok(shifted(finish(&sol, vec![xm], repaired, resid, mode.is_exact()), rho.matrix().trace().re))
}

fn shifted(mut r: MeasureResult, offset: f64) -> MeasureResult {
    r.value += offset;
    r.log2_value = libm::log2(r.value);
    r.certificate = (r.certificate.0 + offset, r.certificate.1 + offset);
    r
}

/// Shifts `X` by a multiple of the identity until `X ⪰ target` and
/// `T_B X ⪰ 0`; returns the repaired point and the smaller of the two
/// minimum eigenvalues.
fn repair_sep(
    x: &ComplexMatrix,
    target: &ComplexMatrix,
    dims: &DimSpec,
    b_side: &[usize],
) -> Result<(ComplexMatrix, f64)> {
    let x = x.hermitian_part();
    let gap = |x: &ComplexMatrix| -> Result<(ComplexMatrix, ComplexMatrix)> {
        Ok((x.sub(target), partial_transpose(x, dims, b_side)?))
    };
    let (a, b) = gap(&x)?;
    let delta = shortfall(&a)?.max(shortfall(&b)?);
    let x = if delta > 0.0 {
        x.add(&ComplexMatrix::scaled_identity(x.rows(), delta * (1.0 + 1e-12) + 1e-15))
    } else {
        x
    };
    let (a, b) = gap(&x)?;
    Ok((x, a.min_eigenvalue()?.min(b.min_eigenvalue()?)))
}

pub fn e_max_state(rho: &BipartiteState, b_side: &[usize], mode: SepConeMode) -> Result<f64> {
    Ok(w_sep(rho, b_side, mode)?.log2_value)
}

/// `Σ(N) = min {‖Tr_B Y‖_∞ : Y ⪰ J^N, Y in the separable cone of S : B}`.
pub fn sigma_channel(n: &Channel, mode: SepConeMode) -> Result<MeasureResult> {
    sigma_channel_with(n, mode, &SolveConfig::default())
}

pub fn sigma_channel_with(n: &Channel, mode: SepConeMode, cfg: &SolveConfig) -> Result<MeasureResult> {
    let dims = n.choi_dims();
    let side = dims.total();
    mode.gate(side)?;
    let din = n.dim_in();
    let mut p = HermitianProgram::new();
    // Y = J + Z, as in the state program
    let z = p.hermitian_psd_var(side);
    let t = p.scalar_var();
    p.add_objective_trace(t, 1.0)?;
    let pt = LinearMap::PartialTranspose { dims: dims.clone(), systems: vec![1] };
    let j_pt = partial_transpose(n.choi(), &dims, &[1])?;
    p.hermitian_lmi(vec![Term::new(1.0, z, pt)], &j_pt.scale(-1.0))?;
    let traced = LinearMap::PartialTrace { dims: dims.clone(), traced: vec![1] };
    let epi = p.hermitian_lmi(
        vec![Term::new(1.0, t, LinearMap::ScalarIdentity(din)), Term::new(-1.0, z, traced)],
        &partial_trace(n.choi(), &dims, &[1])?,
    )?;
    let sol = p.solve(cfg.tol, cfg.max_iters)?;
    check_solution(&sol, "separable-cone channel program")?;
    let y = n.choi().add(sol.value(z));
    let (ym, resid) = repair_sep(&y, n.choi(), &dims, &[1])?;
    let repaired = marginal_norm(&ym, &dims)?;
    let mut out = finish(&sol, vec![ym], repaired, resid, mode.is_exact());
    out.dual_witness = Some(input_from_multiplier(sol.dual_slack(epi))?);
    Ok(out)
}

pub fn e_max_channel(n: &Channel, mode: SepConeMode) -> Result<f64> {
    Ok(sigma_channel(n, mode)?.log2_value)
}

/// `E = ⟨Υ|_{SA} C_{A′AB′} ⊗ Y_{SB} |Υ⟩_{SA}` on `[A′, B, B′]`.
pub fn construct_feasible_e_sep(
    c: &ComplexMatrix,
    y: &ComplexMatrix,
    dims: &AmortizationDims,
    n: &Channel,
) -> Result<ComplexMatrix> {
    Ok(link_product(c, dims, y, n.dim_in(), n.dim_out())?.hermitian_part())
}

/// Outcome of [`verify_emax_amortization`].
#[derive(Debug, Clone)]
pub struct EmaxAmortizationReport {
    /// `W_sep(A′A; B′)_ρ`
    pub w_input: MeasureResult,
    pub sigma: MeasureResult,
    /// `W_sep(A′; BB′)_ω`
    pub w_output: MeasureResult,
    pub constructed_e: ComplexMatrix,
    /// `Tr E`
    pub construction_value: f64,
    /// Minimum eigenvalues of `E − N(ρ)` and `T_{BB′} E`.
    pub feasibility_residuals: [f64; 2],
    /// `Σ · W_in − W_out`
    pub margin: f64,
    /// `Σ · W_in − Tr E` at the repaired optimizers
    pub construction_margin: f64,
    pub scale: f64,
    /// `E_max(N) + E_max(ρ) − E_max(ω)`
    pub log_margin: f64,
    pub exact: bool,
}

impl EmaxAmortizationReport {
    pub fn passed(&self) -> bool {
        let tol = ASSERT_TOL * self.scale;
        self.margin >= -tol
            && self.construction_margin >= -tol
            && self.w_output.value <= self.construction_value + tol
            && self.feasibility_residuals.iter().all(|&r| r >= -FEAS_TOL)
            && self.log_margin >= -ASSERT_TOL
    }
}

/// Solves the three separable-cone programs for `ρ` on `[A′, A, B′]` and
/// checks the multiplicative inequality and its feasible-point sandwich.
pub fn verify_emax_amortization(
    n: &Channel,
    rho: &BipartiteState,
    dims: &AmortizationDims,
    mode: SepConeMode,
) -> Result<EmaxAmortizationReport> {
    verify_emax_amortization_with(n, rho, dims, mode, &SolveConfig::default())
}

pub fn verify_emax_amortization_with(
    n: &Channel,
    rho: &BipartiteState,
    dims: &AmortizationDims,
    mode: SepConeMode,
    cfg: &SolveConfig,
) -> Result<EmaxAmortizationReport> {
    if rho.dims().factors() != dims.input()?.factors() {
        return Err(Error::InvalidDims(format!(
            "state factors {:?} differ from (A′, A, B′) = {:?}",
            rho.dims().factors(),
            dims
        )));
    }
    let w_input = w_sep_with(rho, &[2], mode, cfg)?;
    let sigma = sigma_channel_with(n, mode, cfg)?;
    let omega = apply_channel(n, rho, 1)?;
    let w_output = w_sep_with(&omega, &[1, 2], mode, cfg)?;
    let e = construct_feasible_e_sep(&w_input.optimizers[0], &sigma.optimizers[0], dims, n)?;
    let feasibility_residuals = [
        e.sub(omega.matrix()).min_eigenvalue()?,
        partial_transpose(&e, omega.dims(), &[1, 2])?.min_eigenvalue()?,
    ];
    let construction_value = e.trace().re;
    let scale = 1f64.max(w_input.value).max(sigma.value).max(w_output.value);
    Ok(EmaxAmortizationReport {
        margin: sigma.value * w_input.value - w_output.value,
        construction_margin: sigma.repaired_value * w_input.repaired_value - construction_value,
        log_margin: sigma.log2_value + w_input.log2_value - w_output.log2_value,
        exact: mode.is_exact(),
        w_input,
        sigma,
        w_output,
        constructed_e: e,
        construction_value,
        feasibility_residuals,
        scale,
    })
}

/// Floor applied to sampled input eigenvalues before renormalization.
pub const INPUT_FLOOR: f64 = 1e-8;

/// One sampled input of [`minimax_consistency_check`].
#[derive(Debug, Clone)]
pub struct MinimaxSample {
    pub input: ComplexMatrix,
    /// `E_max` of `ρ_S^{1/2} J ρ_S^{1/2}`.
    pub inner_value: f64,
}

#[derive(Debug, Clone)]
pub struct MinimaxReport {
    /// `log₂ Σ(N)`
    pub channel_value: f64,
    pub samples: Vec<MinimaxSample>,
    pub sampled_max: f64,
    /// Every inner value is at most `log₂ Σ(N) + 1e-6`.
    pub all_below: bool,
    /// `log₂ Σ(N) − sampled_max`
    pub shortfall: f64,
}

/// `ρ` with eigenvalues floored at [`INPUT_FLOOR`] and renormalized.
pub fn floor_input(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = rho.spectral_map(|l| l.max(INPUT_FLOOR))?;
    let tr = m.trace().re;
    Ok(m.scale(1.0 / tr))
}

/// `W_sep(ρ_S^{1/2} J ρ_S^{1/2})` for invertible `ρ_S`, solved after the
/// local congruence `X = (ρ_S^{1/4} ⊗ I) Y (ρ_S^{1/4} ⊗ I)` as
/// `min {Tr[(ρ_S^{1/2} ⊗ I) Y] : Y ⪰ K, Y separable}` with
/// `K = (ρ_S^{1/4} ⊗ I) J (ρ_S^{1/4} ⊗ I)`. Splitting the weight between
/// constraint and objective keeps both away from the spectrum edge of a
/// nearly singular `ρ_S`.
pub fn inner_sep_value(n: &Channel, rho_s: &ComplexMatrix, mode: SepConeMode, cfg: &SolveConfig) -> Result<f64> {
    let dims = n.choi_dims();
    let side = dims.total();
    mode.gate(side)?;
    let d = n.dim_in();
    if rho_s.rows() != d || !rho_s.is_square() {
        return Err(Error::DimensionMismatch(format!("input of side {} for a channel on {d}", rho_s.rows())));
    }
    let id_b = ComplexMatrix::identity(n.dim_out());
    let half = psd_sqrt(&rho_s.hermitized()?)?;
    let quarter = kron(&psd_sqrt(&half)?, &id_b);
    let k = quarter.matmul(n.choi()).matmul(&quarter).hermitian_part();
    let weight = kron(&half, &id_b);
    let mut p = HermitianProgram::new();
    let z = p.hermitian_psd_var(side);
    p.add_objective(z, weight.clone())?;
    let pt = LinearMap::PartialTranspose { dims: dims.clone(), systems: vec![1] };
    let k_pt = partial_transpose(&k, &dims, &[1])?;
    p.hermitian_lmi(vec![Term::new(1.0, z, pt)], &k_pt.scale(-1.0))?;
    let sol = p.solve(cfg.tol, cfg.max_iters)?;
    check_solution(&sol, "separable-cone inner program")?;
    Ok(sol.primal_obj() + weight.inner(&k).re)
}

/// Compares `log₂ Σ(N)` with the inner minimization at sampled inputs: the
/// maximally mixed state, a pure state, a near-singular state and
/// `samples` random densities.
pub fn minimax_consistency_check(n: &Channel, samples: usize, seed: u64) -> Result<MinimaxReport> {
    let cfg = SolveConfig::default();
    let d = n.dim_in();
    let mode = SepConeMode::ExactSmallDims;
    let channel_value = sigma_channel_with(n, mode, &cfg)?.log2_value;
    let mut s = Sampler::new(seed);
    let mut inputs = vec![ComplexMatrix::scaled_identity(d, 1.0 / d as f64), ComplexMatrix::unit(d, 0, 0)];
    let mut skew = vec![1e-6; d];
    skew[0] = 1.0 - 1e-6 * (d as f64 - 1.0);
    inputs.push(s.unitary(d).congruence(&ComplexMatrix::from_diag(&skew)));
    for _ in 0..samples {
        let rank = 1 + s.below(d);
        inputs.push(s.density_matrix(d, rank));
    }
    let mut out = Vec::with_capacity(inputs.len());
    for rho in inputs {
        let floored = floor_input(&rho)?;
        let inner = libm::log2(inner_sep_value(n, &floored, mode, &cfg)?);
        out.push(MinimaxSample { input: floored, inner_value: inner });
    }
    let sampled_max = out.iter().fold(f64::NEG_INFINITY, |m, x| m.max(x.inner_value));
    Ok(MinimaxReport {
        channel_value,
        all_below: out.iter().all(|x| x.inner_value <= channel_value + ASSERT_TOL),
        shortfall: channel_value - sampled_max,
        samples: out,
        sampled_max,
    })
}

/// Relaxed `E_max` of `N ⊗ M` against the sum of the parts. Observational:
/// the tensor program always runs in [`SepConeMode::PptRelaxation`].
#[derive(Debug, Clone)]
pub struct SubadditivityProbe {
    /// `log₂` of the relaxed `Σ(N ⊗ M)`
    pub tensor_relaxed: f64,
    pub parts: [f64; 2],
    pub parts_exact: [bool; 2],
    /// `tensor_relaxed ≤ parts[0] + parts[1] + 1e-6`
    pub subadditive: bool,
}

pub fn sigma_subadditivity_probe(n: &Channel, m: &Channel) -> Result<SubadditivityProbe> {
    let cfg = SolveConfig::default();
    let nm = n.tensor(m)?;
    let tensor = sigma_channel_with(&nm, SepConeMode::PptRelaxation, &cfg)?;
    let part = |c: &Channel| -> Result<(f64, bool)> {
        let mode = SepConeMode::for_product(c.dim_in() * c.dim_out());
        let r = sigma_channel_with(c, mode, &cfg)?;
        Ok((r.log2_value, r.exact))
    };
    let (a, ea) = part(n)?;
    let (b, eb) = part(m)?;
    Ok(SubadditivityProbe {
        tensor_relaxed: tensor.log2_value,
        parts: [a, b],
        parts_exact: [ea, eb],
        subadditive: tensor.log2_value <= a + b + ASSERT_TOL,
    })
}

/// Horodecki's 3⊗3 state, PPT and entangled for `0 < a < 1`.
pub fn horodecki_ppt_entangled(a: f64) -> Result<BipartiteState> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::OutOfRange(format!("a = {a} not in (0, 1)")));
    }
    let mut m = ComplexMatrix::zeros(9, 9);
    for i in [0usize, 1, 2, 3, 4, 5, 7] {
        m[(i, i)].re = a;
    }
    for &(i, j) in &[(0usize, 4usize), (0, 8), (4, 8)] {
        m[(i, j)].re = a;
        m[(j, i)].re = a;
    }
    m[(6, 6)].re = 0.5 * (1.0 + a);
    m[(8, 8)].re = 0.5 * (1.0 + a);
    let off = 0.5 * libm::sqrt(1.0 - a * a);
    m[(6, 8)].re = off;
    m[(8, 6)].re = off;
    BipartiteState::new(m.scale(1.0 / (8.0 * a + 1.0)), DimSpec::new(vec![3, 3])?)
}

#[cfg(test)]
mod tests;
