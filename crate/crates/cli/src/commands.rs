use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use log::{debug, info, warn};
use rainskit_core::amortization::{
    fidelity_ceiling, random_instance, run_protocol_and_check_with, strong_converse_bound,
    verify_amortization_with, AmortizationDims, ProtocolTranscript, ASSERT_TOL,
};
use rainskit_core::emax::{sigma_channel_with, w_sep_with, SepConeMode};
use rainskit_core::rains::{gamma_channel_with, q_theta_with, w_state_with};
use rainskit_core::{BipartiteState, Channel, MeasureResult, SolveConfig};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::format::{load_channel, load_state, Cell, Table};

/// Largest factor accepted by `verify-amortization`.
pub const DESK_FACTOR_LIMIT: usize = 3;
/// Largest `|A′|·max(|A|,|B|)·|B′|` accepted by `verify-amortization`.
pub const DESK_SIDE_LIMIT: usize = 12;
pub const MAX_ROUNDS: usize = 4;
/// Slack of the sweep monotonicity check.
const MONOTONE_TOL: f64 = 1e-6;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Max-Rains relative entropy of a bipartite state.
    StateRains(StateArgs),
    /// Max-relative entropy of entanglement of a bipartite state.
    StateEmax(StateEmaxArgs),
    /// Max-Rains information of a channel.
    ChannelRains(ChannelArgs),
    /// Max-relative entropy of entanglement of a channel.
    ChannelEmax(ChannelEmaxArgs),
    /// Transpose bound log₂‖T∘N‖_◇ of a channel.
    Qtheta(ChannelArgs),
    /// Random campaign of the amortization inequality.
    VerifyAmortization(AmortizationArgs),
    /// Bounds along a one-parameter channel family.
    Sweep(SweepArgs),
    /// Strong-converse arithmetic for n channel uses.
    Converse(ConverseArgs),
    /// Round-by-round check of a random protocol transcript.
    Protocol(ProtocolArgs),
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// State JSON file, `-` for stdin.
    pub input: PathBuf,
    /// Subsystems forming the B side, comma separated. Default: the last one.
    #[arg(long, value_delimiter = ',')]
    pub cut: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Exact separable cone, only for total dimension ≤ 6.
    Exact,
    /// PPT relaxation on any dims (a lower bound).
    Ppt,
    /// Exact when allowed, PPT otherwise.
    Auto,
}

impl ModeArg {
    fn resolve(self, product: usize) -> SepConeMode {
        match self {
            ModeArg::Exact => SepConeMode::ExactSmallDims,
            ModeArg::Ppt => SepConeMode::PptRelaxation,
            ModeArg::Auto => SepConeMode::for_product(product),
        }
    }
}

#[derive(Debug, Args)]
pub struct StateEmaxArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Channel JSON file, `-` for stdin.
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChannelEmaxArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct AmortizationArgs {
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Factor dimensions `A′,A,B′,B`.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "2,2,2,2")]
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Depolarizing,
    Erasure,
    Dephasing,
    AmplitudeDamping,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Depolarizing => "depolarizing",
            Family::Erasure => "erasure",
            Family::Dephasing => "dephasing",
            Family::AmplitudeDamping => "amplitude-damping",
        }
    }

    /// Families that form a semigroup in their parameter, so every bound is
    /// nonincreasing along the grid by data processing.
    fn monotone(self) -> bool {
        !matches!(self, Family::Dephasing)
    }

    fn channel(self, dim: usize, p: f64) -> CliResult<Channel> {
        Ok(match self {
            Family::Depolarizing => Channel::depolarizing(dim, p)?,
            Family::Erasure => Channel::erasure(dim, p)?,
            Family::Dephasing => Channel::dephasing(p)?,
            Family::AmplitudeDamping => Channel::amplitude_damping(p)?,
        })
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Parameter values, comma separated. Default: 11 points on [0, 1].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
    /// Input dimension (depolarizing and erasure only).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct ConverseArgs {
    /// Number of channel uses.
    #[arg(long)]
    pub n: usize,
    /// Code size M.
    #[arg(long = "m")]
    pub m: u64,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Channel whose max-Rains information is used.
    #[arg(long, conflicts_with = "r_max", required_unless_present = "r_max")]
    pub channel: Option<PathBuf>,
    /// Max-Rains information given directly.
    #[arg(long, allow_negative_numbers = true)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolKind {
    /// One-way LOCC interleaving from a separable initial state.
    Random,
    /// One use on half of a maximally entangled state, identity decoder.
    Teleportation,
    /// Every interleaved step replaces its input with a product state.
    Degenerate,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Channel uses. Default: 2, or 1 for the teleportation transcript.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Code size M of the final maximally entangled target.
    #[arg(long = "m", default_value_t = 2)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = ProtocolKind::Random)]
    pub kind: ProtocolKind,
    /// Dimension of each side's local memory `A′`, `B′`.
    #[arg(long, default_value_t = 2)]
    pub memory: usize,
}

/// Result of one command: a JSON document and its tabular form.
pub struct Report {
    pub json: Value,
    pub table: Table,
    /// Set when a checked property failed; the report is still emitted.
    pub violation: Option<String>,
}

pub struct Context {
    pub cfg: SolveConfig,
    pub seed: u64,
}

pub fn run(cmd: &Command, ctx: &Context) -> CliResult<Report> {
    match cmd {
        Command::StateRains(a) => state_rains(a, ctx),
        Command::StateEmax(a) => state_emax(a, ctx),
        Command::ChannelRains(a) => channel_measure("channel-rains", a, ctx, gamma_channel_with),
        Command::ChannelEmax(a) => channel_measure("channel-emax", &a.channel, ctx, |n, cfg| {
            sigma_channel_with(n, a.mode.resolve(n.dim_in() * n.dim_out()), cfg)
        }),
        Command::Qtheta(a) => channel_measure("qtheta", a, ctx, q_theta_with),
        Command::VerifyAmortization(a) => verify_amortization(a, ctx),
        Command::Sweep(a) => sweep(a, ctx),
        Command::Converse(a) => converse(a, ctx),
        Command::Protocol(a) => protocol(a, ctx),
    }
}

const MEASURE_HEADER: [&str; 11] = [
    "command",
    "value",
    "log2_value",
    "certificate_lo",
    "certificate_hi",
    "gap",
    "primal_residual",
    "dual_residual",
    "feasibility_residual",
    "iterations",
    "exact",
];

fn measure_json(command: &str, r: &MeasureResult) -> Value {
    json!({
        "command": command,
        "value": r.value,
        "log2_value": r.log2_value,
        "certificate_interval": [r.certificate.0, r.certificate.1],
        "residuals": {
            "gap": r.report.gap,
            "primal": r.report.primal_residual,
            "dual": r.report.dual_residual,
            "feasibility": r.feasibility_residual,
        },
        "repaired_value": r.repaired_value,
        "iterations": r.iterations,
        "exact": r.exact,
        "verified": r.report.passed,
    })
}

fn measure_report(command: &str, r: &MeasureResult) -> Report {
    let mut table = Table::new(MEASURE_HEADER.to_vec());
    table.push(vec![
        Cell::Text(command.into()),
        Cell::Real(r.value),
        Cell::Real(r.log2_value),
        Cell::Real(r.certificate.0),
        Cell::Real(r.certificate.1),
        Cell::Real(r.report.gap),
        Cell::Real(r.report.primal_residual),
        Cell::Real(r.report.dual_residual),
        Cell::Real(r.feasibility_residual),
        Cell::Int(r.iterations as u64),
        Cell::Bool(r.exact),
    ]);
    let violation = (!r.report.passed).then(|| format!("{command}: duality certificate failed verification"));
    Report { json: measure_json(command, r), table, violation }
}

fn resolve_cut(state: &BipartiteState, cut: &Option<Vec<usize>>) -> CliResult<Vec<usize>> {
    let k = state.dims().len();
    if k < 2 {
        return Err(CliError::Input("a bipartite state needs at least two subsystems".into()));
    }
    let cut = cut.clone().unwrap_or_else(|| vec![k - 1]);
    if cut.is_empty() || cut.len() >= k || cut.iter().any(|&i| i >= k) {
        return Err(CliError::Input(format!("cut {cut:?} must be a proper nonempty subset of 0..{k}")));
    }
    Ok(cut)
}

fn state_rains(a: &StateArgs, ctx: &Context) -> CliResult<Report> {
    let rho = load_state(&a.input)?;
    let cut = resolve_cut(&rho, &a.cut)?;
    let r = w_state_with(&rho, &cut, &ctx.cfg)?;
    info!("W = {} after {} iterations", r.value, r.iterations);
    Ok(measure_report("state-rains", &r))
}

fn state_emax(a: &StateEmaxArgs, ctx: &Context) -> CliResult<Report> {
    let rho = load_state(&a.state.input)?;
    let cut = resolve_cut(&rho, &a.state.cut)?;
    let mode = a.mode.resolve(rho.matrix().rows());
    let r = w_sep_with(&rho, &cut, mode, &ctx.cfg)?;
    info!("W_sep = {} ({mode:?})", r.value);
    Ok(measure_report("state-emax", &r))
}

fn channel_measure<F>(command: &str, a: &ChannelArgs, ctx: &Context, f: F) -> CliResult<Report>
where
    F: Fn(&Channel, &SolveConfig) -> rainskit_core::Result<MeasureResult>,
{
    let n = load_channel(&a.input)?;
    let r = f(&n, &ctx.cfg)?;
    info!("{command}: {} after {} iterations", r.value, r.iterations);
    Ok(measure_report(command, &r))
}

fn desk_dims(dims: &[usize]) -> CliResult<(AmortizationDims, usize)> {
    let &[ap, a, bp, b] = dims else {
        return Err(CliError::Input(format!("--dims needs four factors A′,A,B′,B, got {}", dims.len())));
    };
    if dims.iter().any(|&d| d == 0 || d > DESK_FACTOR_LIMIT) {
        return Err(CliError::Input(format!("every factor must lie in 1..={DESK_FACTOR_LIMIT}")));
    }
    if ap * a.max(b) * bp > DESK_SIDE_LIMIT {
        return Err(CliError::Input(format!(
            "|A′|·max(|A|,|B|)·|B′| = {} exceeds {DESK_SIDE_LIMIT}",
            ap * a.max(b) * bp
        )));
    }
    Ok((AmortizationDims::new(ap, a, bp), b))
}

fn verify_amortization(a: &AmortizationArgs, ctx: &Context) -> CliResult<Report> {
    if a.trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let (dims, b) = desk_dims(&a.dims)?;
    let rows: Vec<_> = (0..a.trials as u64)
        .into_par_iter()
        .map(|k| -> CliResult<_> {
            let seed = ctx.seed.wrapping_add(k);
            let (n, rho) = random_instance(&dims, b, seed)?;
            let rep = verify_amortization_with(&n, &rho, &dims, &ctx.cfg)?;
            debug!("instance {k}: margin {:.3e}", rep.margin);
            Ok((k, seed, rep))
        })
        .collect::<CliResult<_>>()?;
    let header = vec![
        "instance",
        "seed",
        "w_input",
        "gamma",
        "w_output",
        "construction_value",
        "margin",
        "construction_margin",
        "log_margin",
        "scale",
        "passed",
    ];
    let mut table = Table::new(header);
    let mut instances = Vec::with_capacity(rows.len());
    let mut failed = Vec::new();
    let mut worst = f64::INFINITY;
    for (k, seed, rep) in &rows {
        let passed = rep.passed();
        if !passed {
            warn!("instance {k} violates a margin");
            failed.push(*k);
        }
        worst = worst.min(rep.margin / rep.scale);
        table.push(vec![
            Cell::Int(*k),
            Cell::Int(*seed),
            Cell::Real(rep.w_input.value),
            Cell::Real(rep.gamma.value),
            Cell::Real(rep.w_output.value),
            Cell::Real(rep.construction_value),
            Cell::Real(rep.margin),
            Cell::Real(rep.construction_margin),
            Cell::Real(rep.log_margin),
            Cell::Real(rep.scale),
            Cell::Bool(passed),
        ]);
        instances.push(json!({
            "instance": k,
            "seed": seed,
            "w_input": rep.w_input.value,
            "gamma": rep.gamma.value,
            "w_output": rep.w_output.value,
            "construction_value": rep.construction_value,
            "margin": rep.margin,
            "construction_margin": rep.construction_margin,
            "log_margin": rep.log_margin,
            "feasibility_residuals": rep.feasibility_residuals,
            "scale": rep.scale,
            "passed": passed,
        }));
    }
    let passed = rows.len() - failed.len();
    info!("{passed}/{} instances pass", rows.len());
    let json = json!({
        "command": "verify-amortization",
        "dims": a.dims,
        "tolerance": ASSERT_TOL,
        "instances": instances,
        "summary": {
            "trials": rows.len(),
            "passed": passed,
            "worst_relative_margin": worst,
        },
    });
    let violation = (!failed.is_empty()).then(|| format!("margins violated on instances {failed:?}"));
    Ok(Report { json, table, violation })
}

fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

struct SweepRow {
    param: f64,
    r_max: f64,
    e_max: Option<f64>,
    q_theta: f64,
    ceiling: f64,
}

fn sweep(a: &SweepArgs, ctx: &Context) -> CliResult<Report> {
    let grid = a.grid.clone().unwrap_or_else(default_grid);
    if grid.is_empty() {
        return Err(CliError::Input("empty --grid".into()));
    }
    if matches!(a.family, Family::Dephasing | Family::AmplitudeDamping) && a.dim != 2 {
        return Err(CliError::Input(format!("{} is a qubit family", a.family.name())));
    }
    let channels = grid.iter().map(|&p| a.family.channel(a.dim, p)).collect::<CliResult<Vec<_>>>()?;
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .zip(channels.par_iter())
        .map(|(&param, n)| -> CliResult<_> {
            let r_max = gamma_channel_with(n, &ctx.cfg)?.log2_value;
            let product = n.dim_in() * n.dim_out();
            let mode = SepConeMode::for_product(product);
            let e_max = match mode {
                SepConeMode::ExactSmallDims => Some(sigma_channel_with(n, mode, &ctx.cfg)?.log2_value),
                SepConeMode::PptRelaxation => None,
            };
            let q_theta = q_theta_with(n, &ctx.cfg)?.log2_value;
            debug!("{param}: r_max {r_max}");
            Ok(SweepRow { param, r_max, e_max, q_theta, ceiling: fidelity_ceiling(10, 1.0, r_max) })
        })
        .collect::<CliResult<_>>()?;

    let mut violation = None;
    if a.family.monotone() {
        let mut order: Vec<&SweepRow> = rows.iter().collect();
        order.sort_by(|x, y| x.param.total_cmp(&y.param));
        for w in order.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let rises = hi.r_max > lo.r_max + MONOTONE_TOL
                || hi.q_theta > lo.q_theta + MONOTONE_TOL
                || matches!((lo.e_max, hi.e_max), (Some(x), Some(y)) if y > x + MONOTONE_TOL);
            if rises {
                violation = Some(format!(
                    "{} bounds increase between parameters {} and {}",
                    a.family.name(),
                    lo.param,
                    hi.param
                ));
                break;
            }
        }
    }

    let header = vec!["family", "param", "r_max", "e_max", "q_theta", "converse_fidelity_ceiling"];
    let mut table = Table::new(header);
    let mut points = Vec::with_capacity(rows.len());
    for r in &rows {
        table.push(vec![
            Cell::Text(a.family.name().into()),
            Cell::Real(r.param),
            Cell::Real(r.r_max),
            r.e_max.map_or(Cell::Empty, Cell::Real),
            Cell::Real(r.q_theta),
            Cell::Real(r.ceiling),
        ]);
        points.push(json!({
            "param": r.param,
            "r_max": r.r_max,
            "e_max": r.e_max,
            "q_theta": r.q_theta,
            "converse_fidelity_ceiling": r.ceiling,
        }));
    }
    let json = json!({
        "command": "sweep",
        "family": a.family.name(),
        "dim": a.dim,
        "monotone_checked": a.family.monotone(),
        "points": points,
    });
    Ok(Report { json, table, violation })
}

fn converse(a: &ConverseArgs, ctx: &Context) -> CliResult<Report> {
    let r_max = match (&a.channel, a.r_max) {
        (_, Some(r)) => r,
        (Some(path), None) => gamma_channel_with(&load_channel(path)?, &ctx.cfg)?.log2_value,
        (None, None) => return Err(CliError::Input("--channel or --r-max is required".into())),
    };
    let c = strong_converse_bound(a.n, a.m, a.epsilon, r_max)?;
    let mut table = Table::new(vec!["n", "m", "epsilon", "r_max", "bound_holds", "qubit_rate", "fidelity_ceiling"]);
    table.push(vec![
        Cell::Int(a.n as u64),
        Cell::Int(a.m),
        Cell::Real(a.epsilon),
        Cell::Real(r_max),
        Cell::Bool(c.bound_holds),
        Cell::Real(c.qubit_rate),
        Cell::Real(c.fidelity_ceiling),
    ]);
    let json = json!({
        "command": "converse",
        "n": a.n,
        "m": a.m,
        "epsilon": a.epsilon,
        "r_max": r_max,
        "bound_holds": c.bound_holds,
        "qubit_rate": c.qubit_rate,
        "fidelity_ceiling": c.fidelity_ceiling,
    });
    Ok(Report { json, table, violation: None })
}

fn protocol(a: &ProtocolArgs, ctx: &Context) -> CliResult<Report> {
    let rounds = a.rounds.unwrap_or(if a.kind == ProtocolKind::Teleportation { 1 } else { 2 });
    if rounds == 0 || rounds > MAX_ROUNDS {
        return Err(CliError::Input(format!("--rounds must lie in 1..={MAX_ROUNDS}")));
    }
    if a.m < 2 || a.memory == 0 || a.memory > DESK_FACTOR_LIMIT {
        return Err(CliError::Input(format!("need --m ≥ 2 and --memory in 1..={DESK_FACTOR_LIMIT}")));
    }
    let n = load_channel(&a.channel)?;
    let dims = AmortizationDims::new(a.memory, n.dim_in(), a.memory);
    if a.memory * n.dim_in().max(n.dim_out()) * a.memory > DESK_SIDE_LIMIT {
        return Err(CliError::Input("protocol dimensions exceed the desk-scale limit".into()));
    }
    let t = match a.kind {
        ProtocolKind::Random => ProtocolTranscript::random(n, dims, rounds, a.m, ctx.seed)?,
        ProtocolKind::Teleportation => {
            if rounds != 1 {
                return Err(CliError::Input("the teleportation transcript has one round".into()));
            }
            ProtocolTranscript::teleportation(n)?
        }
        ProtocolKind::Degenerate => ProtocolTranscript::degenerate(n, dims, rounds, a.m, ctx.seed)?,
    };
    t.validate()?;
    let rep = run_protocol_and_check_with(&t, &ctx.cfg)?;
    let passed = rep.passed();
    let header = vec!["round", "r_rho", "r_sigma", "r_channel", "r_final", "epsilon", "passed"];
    let mut table = Table::new(header);
    for (i, (r, s)) in rep.r_rho.iter().zip(&rep.r_sigma).enumerate() {
        table.push(vec![
            Cell::Int(i as u64 + 1),
            Cell::Real(*r),
            Cell::Real(*s),
            Cell::Real(rep.r_channel),
            Cell::Real(rep.r_final),
            Cell::Real(rep.epsilon),
            Cell::Bool(passed),
        ]);
    }
    let json = json!({
        "command": "protocol",
        "rounds": rep.rounds,
        "m": t.m,
        "r_channel": rep.r_channel,
        "r_rho": rep.r_rho,
        "r_sigma": rep.r_sigma,
        "r_final": rep.r_final,
        "epsilon": rep.epsilon,
        "checks": {
            "initial": rep.initial_ok,
            "monotone": rep.monotone_ok,
            "gain": rep.gain_ok,
            "final": rep.final_ok,
            "converse": rep.converse_ok,
            "fidelity_bound": rep.fidelity_bound_ok,
        },
        "passed": passed,
    });
    let violation = (!passed).then(|| "protocol transcript fails a telescoping check".to_string());
    Ok(Report { json, table, violation })
}
