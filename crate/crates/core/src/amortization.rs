//! Feasible-pair construction for the amortization inequality, the
//! entanglement test and strong-converse arithmetic, and protocol
//! transcripts with round-by-round checks.
//!
//! Layout conventions: an input state `ρ` lives on `[A′, A, B′]` with the
//! channel acting on `A`; its output `ω` lives on `[A′, B, B′]`. The input
//! cut is `A′A : B′`, the output cut is `A′ : BB′`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{apply_channel, apply_global, random_one_way_locc, BipartiteState, Channel};
use crate::error::{Error, Result};
use crate::linalg::{
    fidelity, kron, partial_transpose, permute_subsystems, sandwich_max_entangled, ComplexMatrix,
    DimSpec,
};
use crate::rains::{
    gamma_channel_with, ppt_prime_member, w_state_with, MeasureResult, SolveConfig,
};
use crate::random::Sampler;

/// Assertion tolerance for values derived from solved programs.
pub const ASSERT_TOL: f64 = 1e-6;
/// Tolerance on operator feasibility of constructed points.
pub const FEAS_TOL: f64 = 1e-8;

/// Factor dimensions `(A′, A, B′)` of an amortization input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmortizationDims {
    pub a_prime: usize,
    pub a: usize,
    pub b_prime: usize,
}

impl AmortizationDims {
    pub fn new(a_prime: usize, a: usize, b_prime: usize) -> Self {
        Self { a_prime, a, b_prime }
    }

    pub fn input(&self) -> Result<DimSpec> {
        DimSpec::new(vec![self.a_prime, self.a, self.b_prime])
    }

    pub fn output(&self, b: usize) -> Result<DimSpec> {
        DimSpec::new(vec![self.a_prime, b, self.b_prime])
    }
}

/// `⟨Υ|_{SA} C_{A′AB′} ⊗ Y_{SB} |Υ⟩_{SA}`, returned on `[A′, B, B′]`.
pub fn link_product(
    c: &ComplexMatrix,
    dims: &AmortizationDims,
    y: &ComplexMatrix,
    dim_in: usize,
    dim_out: usize,
) -> Result<ComplexMatrix> {
    if dim_in != dims.a {
        return Err(Error::DimensionMismatch(format!(
            "contraction legs differ: |S| = {dim_in}, |A| = {}",
            dims.a
        )));
    }
    let cd = dims.input()?;
    cd.check_matrix(c)?;
    DimSpec::new(vec![dim_in, dim_out])?.check_matrix(y)?;
    let joint = DimSpec::new(vec![dims.a_prime, dims.a, dims.b_prime, dim_in, dim_out])?;
    let (m, rest) = sandwich_max_entangled(&kron(c, y), &joint, 1, 3)?;
    // rest = [A′, B′, B]
    permute_subsystems(&m, &rest, &[0, 2, 1])
}

/// `E = ⟨Υ|C⊗V + D⊗Y|Υ⟩`, `F = ⟨Υ|C⊗Y + D⊗V|Υ⟩`, feasible for the output
/// `W` program whenever `(C, D)` and `(V, Y)` are feasible for the input
/// and channel programs.
pub fn construct_feasible_pair(
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    v: &ComplexMatrix,
    y: &ComplexMatrix,
    dims: &AmortizationDims,
    n: &Channel,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (din, dout) = (n.dim_in(), n.dim_out());
    let e = link_product(c, dims, v, din, dout)?.add(&link_product(d, dims, y, din, dout)?);
    let f = link_product(c, dims, y, din, dout)?.add(&link_product(d, dims, v, din, dout)?);
    Ok((e.hermitian_part(), f.hermitian_part()))
}

/// Outcome of [`verify_amortization`].
#[derive(Debug, Clone)]
pub struct AmortizationReport {
    /// `W(A′A; B′)_ρ`
    pub w_input: MeasureResult,
    pub gamma: MeasureResult,
    /// `W(A′; BB′)_ω`
    pub w_output: MeasureResult,
    pub constructed_e: ComplexMatrix,
    pub constructed_f: ComplexMatrix,
    /// Minimum eigenvalues of `E`, `F` and `T_{BB′}(E − F) − N(ρ)`.
    pub feasibility_residuals: [f64; 3],
    /// `Tr(E + F)`
    pub construction_value: f64,
    /// `Γ · W_in − W_out`
    pub margin: f64,
    /// `Γ · W_in − Tr(E + F)`
    pub construction_margin: f64,
    /// `max(1, W_in, Γ, W_out)`
    pub scale: f64,
    /// `R_max(N) + R_max(ρ) − R_max(ω)`
    pub log_margin: f64,
}

impl AmortizationReport {
    /// All invariants of the report at the crate tolerances.
    pub fn passed(&self) -> bool {
        let tol = ASSERT_TOL * self.scale;
        self.margin >= -tol
            && self.construction_margin >= -tol
            && self.w_output.value <= self.construction_value + tol
            && self.feasibility_residuals.iter().all(|&r| r >= -FEAS_TOL)
            && self.log_margin >= -ASSERT_TOL
    }
}

/// Solves the three programs for `ρ` on `[A′, A, B′]`, builds `(E, F)` from
/// the input and channel optimizers, and records all margins.
pub fn verify_amortization(
    n: &Channel,
    rho: &BipartiteState,
    dims: &AmortizationDims,
) -> Result<AmortizationReport> {
    verify_amortization_with(n, rho, dims, &SolveConfig::default())
}

pub fn verify_amortization_with(
    n: &Channel,
    rho: &BipartiteState,
    dims: &AmortizationDims,
    cfg: &SolveConfig,
) -> Result<AmortizationReport> {
    if rho.dims().factors() != dims.input()?.factors() {
        return Err(Error::InvalidDims(format!(
            "state factors {:?} differ from (A′, A, B′) = {:?}",
            rho.dims().factors(),
            dims
        )));
    }
    let w_input = w_state_with(rho, &[2], cfg)?;
    let gamma = gamma_channel_with(n, cfg)?;
    let omega = apply_channel(n, rho, 1)?;
    let w_output = w_state_with(&omega, &[1, 2], cfg)?;
    let (c, d) = (&w_input.optimizers[0], &w_input.optimizers[1]);
    let (v, y) = (&gamma.optimizers[0], &gamma.optimizers[1]);
    let (e, f) = construct_feasible_pair(c, d, v, y, dims, n)?;
    let out_dims = omega.dims().clone();
    let tbb = partial_transpose(&e.sub(&f), &out_dims, &[1, 2])?.sub(omega.matrix());
    let feasibility_residuals = [e.min_eigenvalue()?, f.min_eigenvalue()?, tbb.min_eigenvalue()?];
    let construction_value = e.trace().re + f.trace().re;
    let bound = gamma.value * w_input.value;
    let scale = 1f64.max(w_input.value).max(gamma.value).max(w_output.value);
    let log_margin = gamma.log2_value + w_input.log2_value - w_output.log2_value;
    Ok(AmortizationReport {
        margin: bound - w_output.value,
        construction_margin: gamma.repaired_value * w_input.repaired_value - construction_value,
        w_input,
        gamma,
        w_output,
        constructed_e: e,
        constructed_f: f,
        feasibility_residuals,
        construction_value,
        scale,
        log_margin,
    })
}

/// Random amortization instance: a channel `A → B` with Stinespring
/// environment of side ≤ 2 and a random state on `[A′, A, B′]`.
pub fn random_instance(dims: &AmortizationDims, dim_out: usize, seed: u64) -> Result<(Channel, BipartiteState)> {
    let mut s = Sampler::new(seed);
    let env = 1 + s.below(2);
    let env = env.max(dims.a.div_ceil(dim_out));
    let n = Channel::random(dims.a, dim_out, env, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let input = dims.input()?;
    let rho = if s.uniform() < 0.5 {
        BipartiteState::random(&input, seed.wrapping_add(1))?
    } else {
        BipartiteState::random_pure(&input, seed.wrapping_add(1))?
    };
    Ok((n, rho))
}

/// `Tr(Φ_M σ)` for `σ ∈ PPT′(M_A : M_B)`.
pub fn entanglement_test_bound(sigma: &ComplexMatrix, m: usize) -> Result<f64> {
    let dims = DimSpec::new(vec![m, m])?;
    dims.check_matrix(sigma)?;
    if !ppt_prime_member(sigma, &dims, &[1], 1e-9)? {
        let t = partial_transpose(&sigma.hermitian_part(), &dims, &[1])?;
        return Err(Error::NotPptPrime { trace_norm: crate::linalg::trace_norm(&t)? });
    }
    let phi = BipartiteState::max_entangled(m)?;
    Ok(phi.matrix().inner(sigma).re)
}

/// Random element of `PPT′(M : M)`: a random PSD operator rescaled so that
/// `‖T_B σ‖₁` is at most one. Half of the samples are mixed with `Φ_M` and
/// put on the boundary `‖T_B σ‖₁ = 1`, where the test value is largest.
pub fn random_ppt_prime(m: usize, seed: u64) -> Result<ComplexMatrix> {
    let mut s = Sampler::new(seed);
    let dims = DimSpec::new(vec![m, m])?;
    let rank = 1 + s.below(m * m);
    let mut x = s.density_matrix(m * m, rank);
    let boundary = s.uniform() < 0.5;
    if boundary {
        let w = s.uniform();
        x = x.scale(1.0 - w).add(&BipartiteState::max_entangled(m)?.matrix().scale(w));
    }
    let t = partial_transpose(&x, &dims, &[1])?;
    let norm = crate::linalg::trace_norm(&t)?;
    let r = if boundary { 1.0 } else { s.uniform().max(0.05) };
    Ok(x.scale(r / norm))
}

/// Whether `R_max(ω) ≥ log₂((1 − ε) M)`, after confirming
/// `F(ω, Φ_M) ≥ 1 − ε`.
pub fn fidelity_rmax_lower_bound(omega: &BipartiteState, m: usize, epsilon: f64) -> Result<bool> {
    fidelity_rmax_lower_bound_with(omega, m, epsilon, &SolveConfig::default())
}

pub fn fidelity_rmax_lower_bound_with(
    omega: &BipartiteState,
    m: usize,
    epsilon: f64,
    cfg: &SolveConfig,
) -> Result<bool> {
    if omega.dims().factors() != [m, m] {
        return Err(Error::InvalidDims(format!(
            "final state factors {:?} for M = {m}",
            omega.dims().factors()
        )));
    }
    let phi = BipartiteState::max_entangled(m)?;
    let f = fidelity(omega.matrix(), phi.matrix())?;
    if f < 1.0 - epsilon - 1e-12 {
        return Err(Error::OutOfRange(format!("fidelity {f} below 1 − ε = {}", 1.0 - epsilon)));
    }
    if epsilon >= 1.0 {
        return Ok(true);
    }
    let lower = libm::log2((1.0 - epsilon) * m as f64);
    let r = w_state_with(omega, &[1], cfg)?.log2_value;
    Ok(r >= lower - ASSERT_TOL)
}

/// Strong-converse arithmetic for `n` channel uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseBound {
    /// `log₂ M ≤ n R_max + log₂(1/(1 − ε))`
    pub bound_holds: bool,
    /// `log₂ M / n`
    pub qubit_rate: f64,
    /// `min(1, 2^{−n(Q − R_max)})` with `Q` the qubit rate
    pub fidelity_ceiling: f64,
}

/// Slack of the strong-converse comparison, absorbing rounding only.
const ARITH_TOL: f64 = 1e-12;

pub fn strong_converse_bound(n: usize, m: u64, epsilon: f64, r_max: f64) -> Result<ConverseBound> {
    if n == 0 || m == 0 {
        return Err(Error::OutOfRange(format!("n = {n} and M = {m} must be positive")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::OutOfRange(format!("ε = {epsilon} not in [0, 1)")));
    }
    let log_m = libm::log2(m as f64);
    let rhs = n as f64 * r_max - libm::log2(1.0 - epsilon);
    let qubit_rate = log_m / n as f64;
    Ok(ConverseBound {
        bound_holds: log_m <= rhs + ARITH_TOL,
        qubit_rate,
        fidelity_ceiling: fidelity_ceiling(n, qubit_rate, r_max),
    })
}

/// `min(1, 2^{−n(Q − R_max)})`.
pub fn fidelity_ceiling(n: usize, rate: f64, r_max: f64) -> f64 {
    libm::exp2(-(n as f64) * (rate - r_max)).min(1.0)
}

/// An `n`-round protocol: channel uses interleaved with LOCC channels.
///
/// `rho[i]` lives on `[A′, A, B′]`, `sigma[i] = N(rho[i])` on `[A′, B, B′]`,
/// `interleaved[i]` maps `sigma[i]` to `rho[i + 1]`, and `decoder` maps the
/// last `sigma` to `omega` on `[M_A, M_B]`.
#[derive(Debug, Clone)]
pub struct ProtocolTranscript {
    pub rounds: usize,
    pub channel: Channel,
    pub dims: AmortizationDims,
    pub interleaved: Vec<Channel>,
    pub decoder: Channel,
    pub rho: Vec<BipartiteState>,
    pub sigma: Vec<BipartiteState>,
    pub omega: BipartiteState,
    pub m: usize,
    /// `1 − F(ω, Φ_M)`
    pub epsilon: f64,
}

const TRANSCRIPT_TOL: f64 = 1e-10;

impl ProtocolTranscript {
    /// Runs the protocol forward from `initial` and records every state.
    pub fn build(
        channel: Channel,
        dims: AmortizationDims,
        initial: BipartiteState,
        interleaved: Vec<Channel>,
        decoder: Channel,
        m: usize,
    ) -> Result<Self> {
        let rounds = interleaved.len() + 1;
        let in_dims = dims.input()?;
        dims.output(channel.dim_out())?;
        if initial.dims().factors() != in_dims.factors() {
            return Err(Error::InvalidDims("initial state does not live on (A′, A, B′)".into()));
        }
        let mut rho = vec![initial];
        let mut sigma = Vec::with_capacity(rounds);
        for i in 0..rounds {
            let s = apply_channel(&channel, &rho[i], 1)?;
            if i + 1 < rounds {
                let next = apply_global(&interleaved[i], &s, in_dims.clone())?;
                rho.push(next);
            }
            sigma.push(s);
        }
        let omega = apply_global(&decoder, sigma.last().expect("rounds ≥ 1"), DimSpec::new(vec![m, m])?)?;
        let phi = BipartiteState::max_entangled(m)?;
        let epsilon = (1.0 - fidelity(omega.matrix(), phi.matrix())?).max(0.0);
        Ok(Self { rounds, channel, dims, interleaved, decoder, rho, sigma, omega, m, epsilon })
    }

    /// Random protocol with one-way LOCC interleaving. The initial state is
    /// separable across `A′A : B′`.
    pub fn random(channel: Channel, dims: AmortizationDims, rounds: usize, m: usize, seed: u64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::OutOfRange("rounds must be positive".into()));
        }
        if channel.dim_in() != dims.a {
            return Err(Error::DimensionMismatch("channel input differs from |A|".into()));
        }
        let mut s = Sampler::new(seed);
        let b = channel.dim_out();
        let initial = BipartiteState::random_ppt(&dims.input()?, &[2], seed)?;
        let mut interleaved = Vec::with_capacity(rounds - 1);
        for k in 0..rounds - 1 {
            let branches = 1 + s.below(3);
            interleaved.push(random_one_way_locc(
                (dims.a_prime, b * dims.b_prime),
                (dims.a_prime * dims.a, dims.b_prime),
                branches,
                seed.wrapping_add(101 + k as u64),
            )?);
        }
        let decoder = random_one_way_locc(
            (dims.a_prime, b * dims.b_prime),
            (m, m),
            1 + s.below(3),
            seed.wrapping_add(7),
        )?;
        Self::build(channel, dims, initial, interleaved, decoder, m)
    }

    /// One use of the channel on half of `Φ_d` held as `A′A`, with trivial
    /// `B′` and the identity decoder: the ends share `N` applied to `Φ_d`.
    pub fn teleportation(channel: Channel) -> Result<Self> {
        let d = channel.dim_in();
        if channel.dim_out() != d {
            return Err(Error::DimensionMismatch("teleportation transcript needs dim_out = dim_in".into()));
        }
        let dims = AmortizationDims::new(d, d, 1);
        let phi = BipartiteState::max_entangled(d)?;
        let initial = BipartiteState::new(phi.matrix().clone(), dims.input()?)?;
        let decoder = Channel::identity(d * d)?;
        Self::build(channel, dims, initial, Vec::new(), decoder, d)
    }

    /// Every interleaved channel and the decoder discard their input and
    /// prepare a fixed product state.
    pub fn degenerate(channel: Channel, dims: AmortizationDims, rounds: usize, m: usize, seed: u64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::OutOfRange("rounds must be positive".into()));
        }
        let mut s = Sampler::new(seed);
        let b = channel.dim_out();
        let product = |s: &mut Sampler, da: usize, db: usize| {
            let (ra, rb) = (1 + s.below(da), 1 + s.below(db));
            kron(&s.density_matrix(da, ra), &s.density_matrix(db, rb))
        };
        let in_dims = dims.input()?;
        let initial = BipartiteState::new(
            product(&mut s, dims.a_prime * dims.a, dims.b_prime),
            in_dims,
        )?;
        let mut interleaved = Vec::with_capacity(rounds - 1);
        for _ in 0..rounds - 1 {
            let tau = product(&mut s, dims.a_prime * dims.a, dims.b_prime);
            interleaved.push(Channel::replacement(dims.a_prime * b * dims.b_prime, &tau)?);
        }
        let tau = product(&mut s, m, m);
        let decoder = Channel::replacement(dims.a_prime * b * dims.b_prime, &tau)?;
        Self::build(channel, dims, initial, interleaved, decoder, m)
    }

    /// Re-checks `σ_i = N(ρ_i)` and `ρ_{i+1} = P_{i+1}(σ_i)` to `1e-10`.
    pub fn validate(&self) -> Result<()> {
        let in_dims = self.dims.input()?;
        for i in 0..self.rounds {
            let s = apply_channel(&self.channel, &self.rho[i], 1)?;
            let d = s.matrix().max_abs_diff(self.sigma[i].matrix());
            if d > TRANSCRIPT_TOL {
                return Err(Error::OutOfRange(format!("round {i}: σ differs from N(ρ) by {d:.3e}")));
            }
            if i + 1 < self.rounds {
                let r = apply_global(&self.interleaved[i], &self.sigma[i], in_dims.clone())?;
                let d = r.matrix().max_abs_diff(self.rho[i + 1].matrix());
                if d > TRANSCRIPT_TOL {
                    return Err(Error::OutOfRange(format!("round {i}: ρ differs from P(σ) by {d:.3e}")));
                }
            }
        }
        Ok(())
    }
}

/// Round-by-round values and checks of [`run_protocol_and_check`].
#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub rounds: usize,
    pub r_channel: f64,
    /// `R_max(A′A; B′)` of each `ρ_i`
    pub r_rho: Vec<f64>,
    /// `R_max(A′; BB′)` of each `σ_i`
    pub r_sigma: Vec<f64>,
    pub r_final: f64,
    pub epsilon: f64,
    /// (a) initial state has vanishing max-Rains value
    pub initial_ok: bool,
    /// (b) `R(ρ_i) ≤ R(σ_{i−1})`
    pub monotone_ok: bool,
    /// (c) `R(σ_i) − R(ρ_i) ≤ R_max(N)`
    pub gain_ok: bool,
    /// (d) `R(ω) ≤ n R_max(N)`
    pub final_ok: bool,
    /// `log₂ M ≤ n R_max(N) + log₂(1/(1 − ε))`
    pub converse_ok: bool,
    /// `R(ω) ≥ log₂((1 − ε) M)`
    pub fidelity_bound_ok: bool,
}

impl ProtocolReport {
    pub fn passed(&self) -> bool {
        self.initial_ok
            && self.monotone_ok
            && self.gain_ok
            && self.final_ok
            && self.converse_ok
            && self.fidelity_bound_ok
    }
}

pub fn run_protocol_and_check(t: &ProtocolTranscript) -> Result<ProtocolReport> {
    run_protocol_and_check_with(t, &SolveConfig::default())
}

pub fn run_protocol_and_check_with(t: &ProtocolTranscript, cfg: &SolveConfig) -> Result<ProtocolReport> {
    t.validate()?;
    let r_channel = gamma_channel_with(&t.channel, cfg)?.log2_value;
    let mut r_rho = Vec::with_capacity(t.rounds);
    let mut r_sigma = Vec::with_capacity(t.rounds);
    for i in 0..t.rounds {
        r_rho.push(w_state_with(&t.rho[i], &[2], cfg)?.log2_value);
        r_sigma.push(w_state_with(&t.sigma[i], &[1, 2], cfg)?.log2_value);
    }
    let r_final = w_state_with(&t.omega, &[1], cfg)?.log2_value;
    let n = t.rounds as f64;
    let initial_ok = r_rho[0] <= ASSERT_TOL;
    let monotone_ok = (1..t.rounds).all(|i| r_rho[i] <= r_sigma[i - 1] + ASSERT_TOL);
    let gain_ok = (0..t.rounds).all(|i| r_sigma[i] - r_rho[i] <= r_channel + ASSERT_TOL);
    let final_ok = r_final <= n * r_channel + 1e-5;
    let converse_ok = t.epsilon >= 1.0
        || libm::log2(t.m as f64) <= n * r_channel - libm::log2(1.0 - t.epsilon) + ASSERT_TOL;
    let fidelity_bound_ok = fidelity_rmax_lower_bound_with(&t.omega, t.m, t.epsilon + 1e-12, cfg)?;
    Ok(ProtocolReport {
        rounds: t.rounds,
        r_channel,
        r_rho,
        r_sigma,
        r_final,
        epsilon: t.epsilon,
        initial_ok,
        monotone_ok,
        gain_ok,
        final_ok,
        converse_ok,
        fidelity_bound_ok,
    })
}
