//! One function per subcommand; each returns its exit status.

use std::path::{Path, PathBuf};

use marton::analysis::{
    compare_regions, iid_convergence_curve, run_experiment, simulate_synthetic, theorem_bounds, CoveringParams, ExperimentConfig,
    ExperimentSetup, SyntheticArray,
};
use marton::channel::{BroadcastChannel, InputDesign};
use marton::coding::{auto_rates, rate_constraints, select_band_exponents, ConstraintCheck, RateParams};
use marton::divergence::{
    classical_i0, classical_i0_iid, classical_i_infty, classical_i_infty_iid, quantum_i0, DivergenceResult, I0Method,
};
use marton::quantum::DensityOperator;
use marton::{Execution, JointPmf};
use serde::Serialize;

use crate::config::{read_json, Rates, SimulateConfig};
use crate::error::{CliError, CliResult, EXIT_OK, EXIT_VIOLATION};
use crate::output::OutputDir;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    I0,
    IInfty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ArrayKind {
    /// Gated array meeting the covering hypotheses with equality where possible.
    Extremal,
    /// Independent cells with the array's own mean.
    Iid,
}

/// Status of a run that completed: 1 exactly when a bound is violated.
pub fn run_status(violation: bool) -> u8 {
    if violation {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

/// Writes to stdout; a reader that went away is not an error.
fn print_json(value: &impl Serialize) -> CliResult<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).map_err(marton::Error::from)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Write { path: PathBuf::from("<stdout>"), source: e }),
        _ => Ok(()),
    }
}

pub struct DivergenceArgs {
    pub joint: Option<PathBuf>,
    pub state: Option<PathBuf>,
    pub dim_u: Option<usize>,
    pub kind: Kind,
    pub eps: f64,
    pub method: I0Method,
    pub blocklength: usize,
}

pub fn divergence(a: DivergenceArgs) -> CliResult<u8> {
    let result: DivergenceResult = match (&a.joint, &a.state) {
        (Some(path), None) => {
            let joint: JointPmf = read_json(path)?;
            match (a.kind, a.blocklength) {
                (Kind::I0, 1) => classical_i0(&joint, a.eps, a.method)?,
                (Kind::IInfty, 1) => classical_i_infty(&joint, a.eps)?,
                (Kind::I0, n) => classical_i0_iid(&joint, n, a.eps)?,
                (Kind::IInfty, n) => classical_i_infty_iid(&joint, n, a.eps)?,
            }
        }
        (None, Some(path)) => {
            if a.kind != Kind::I0 || a.blocklength != 1 {
                return Err(CliError::Usage("--state supports only --kind i0 at blocklength 1".into()));
            }
            let dim_u = a.dim_u.ok_or_else(|| CliError::Usage("--state needs --dim-u".into()))?;
            let state: DensityOperator = read_json(path)?;
            quantum_i0(&state, dim_u, a.eps)?
        }
        _ => return Err(CliError::Usage("give exactly one of --joint and --state".into())),
    };
    print_json(&result)?;
    Ok(EXIT_OK)
}

pub struct BandsArgs {
    pub rate1: u32,
    pub rate2: u32,
    pub i0_b: f64,
    pub i0_c: f64,
    pub i_inf: f64,
    pub eps_tilde: f64,
    pub explain: bool,
}

fn explain(checks: &[ConstraintCheck]) {
    for c in checks {
        eprintln!(
            "{:<44} {:>12.6} {} {:<12.6} slack {:>10.6} {}",
            c.name,
            c.lhs,
            c.relation,
            c.rhs,
            c.slack,
            if c.holds { "ok" } else { "VIOLATED" }
        );
    }
}

pub fn bands(a: BandsArgs) -> CliResult<u8> {
    let rates = rate_constraints(f64::from(a.rate1), f64::from(a.rate2), a.i0_b, a.i0_c, a.i_inf, a.eps_tilde);
    if a.explain {
        explain(&rates);
    }
    let (r1, r2) = select_band_exponents(a.rate1, a.rate2, a.i0_b, a.i0_c, a.i_inf, a.eps_tilde)?;
    let params = RateParams {
        rate1: a.rate1,
        rate2: a.rate2,
        band1: r1,
        band2: r2,
        eps_tilde: a.eps_tilde,
        eps0: 0.0,
        eps_inf: 0.0,
        i_inf: a.i_inf,
        i0_b: a.i0_b,
        i0_c: a.i0_c,
    };
    let band_checks = params.band_constraints();
    if a.explain {
        explain(&band_checks);
    }
    print_json(&serde_json::json!({
        "r1": r1,
        "r2": r2,
        "rate_constraints": rates,
        "band_constraints": band_checks,
    }))?;
    Ok(EXIT_OK)
}

fn setup(config: &SimulateConfig, channel: &BroadcastChannel, design: &InputDesign) -> CliResult<ExperimentSetup> {
    let b = &config.budget;
    Ok(match channel {
        BroadcastChannel::Classical(ch) => ExperimentSetup::classical(ch, design, config.blocklength, b.eps0, b.eps_inf, config.i0_method)?,
        BroadcastChannel::Cq(ch) => ExperimentSetup::quantum(ch, design, config.blocklength, b.eps0, b.eps_inf)?,
    })
}

fn resolve_params(config: &SimulateConfig, setup: &ExperimentSetup) -> CliResult<RateParams> {
    let q = &setup.quantities;
    let eps_tilde = config.budget.eps_tilde;
    let (rate1, rate2) = match config.rates {
        Rates::Auto(_) => auto_rates(q.i0_b, q.i0_c, q.i_inf, eps_tilde)?,
        Rates::Fixed { rate1, rate2 } => (rate1, rate2),
    };
    let params = match config.bands {
        Some(b) => setup.params_with_bands(rate1, rate2, b.r1, b.r2, eps_tilde),
        None => setup.params(rate1, rate2, eps_tilde)?,
    };
    if config.theorem_mode {
        let total = theorem_bounds(eps_tilde, config.budget.eps0, setup.setting);
        if total > config.budget.eps {
            return Err(CliError::Budget(format!("theorem total {total} exceeds eps = {}", config.budget.eps)));
        }
        let broken: Vec<String> =
            params.rate_constraints().iter().chain(&params.band_constraints()).filter(|c| !c.holds).map(|c| c.name.clone()).collect();
        if !broken.is_empty() {
            return Err(CliError::Budget(format!("theorem mode, constraints violated: {}", broken.join("; "))));
        }
    }
    Ok(params)
}

pub fn simulate(config_path: &Path, seed: Option<u64>, execution: Option<Execution>, out: &OutputDir) -> CliResult<u8> {
    let mut config = SimulateConfig::load(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(execution) = execution {
        config.execution = execution;
    }
    let (channel, design) = (config.load_channel()?, config.load_design()?);
    let setup = setup(&config, &channel, &design)?;
    let params = resolve_params(&config, &setup)?;
    let report = run_experiment(
        &setup,
        &params,
        &ExperimentConfig { trials: config.trials, seed: config.seed, codebook: config.codebook, execution: config.execution },
    )?;
    let json = out.write_report("simulate", &config, "report", &report)?;
    out.write_csv("simulate", &report.check_rows())?;
    eprintln!(
        "{} trials, message error {}/{}, violation {}; report {}",
        report.trials,
        report.counts.message_error,
        report.trials,
        report.violation,
        json.display()
    );
    Ok(run_status(report.violation))
}

pub struct CoveringArgs {
    pub r: u64,
    pub s: u64,
    pub q: f64,
    pub alpha: f64,
    pub trials: u64,
    pub seed: u64,
    pub array: ArrayKind,
    pub execution: Execution,
}

#[derive(Serialize)]
struct CoveringConfig {
    r: u64,
    s: u64,
    q: f64,
    alpha: f64,
    trials: u64,
    seed: u64,
    array: SyntheticArray,
    execution: Execution,
}

#[derive(Serialize)]
struct CoveringRow {
    r: u64,
    s: u64,
    q: f64,
    alpha: f64,
    trials: u64,
    zeros: u64,
    rate: f64,
    ci_low: f64,
    ci_high: f64,
    bound: f64,
    within_3sigma: bool,
    violation: bool,
}

pub fn covering(a: CoveringArgs, out: &OutputDir) -> CliResult<u8> {
    let params = CoveringParams::new(a.r, a.s, a.q, a.alpha)?;
    let array = match a.array {
        ArrayKind::Extremal => SyntheticArray::extremal(&params),
        ArrayKind::Iid => SyntheticArray::iid(a.alpha * a.q),
    };
    if !array.satisfies(&params) {
        return Err(CliError::Core(marton::Error::Infeasible {
            constraint: "covering hypotheses",
            detail: format!("{:?} array violates the moment conditions", a.array),
        }));
    }
    let est = simulate_synthetic(&params, &array, a.trials, a.seed, a.execution);
    let config = CoveringConfig { r: a.r, s: a.s, q: a.q, alpha: a.alpha, trials: a.trials, seed: a.seed, array, execution: a.execution };
    out.write_report("covering", &config, "estimate", &est)?;
    out.write_csv(
        "covering",
        &[CoveringRow {
            r: a.r,
            s: a.s,
            q: a.q,
            alpha: a.alpha,
            trials: a.trials,
            zeros: est.zeros.count,
            rate: est.zeros.rate,
            ci_low: est.zeros.ci_low,
            ci_high: est.zeros.ci_high,
            bound: est.comparison.bound,
            within_3sigma: est.comparison.within_3sigma,
            violation: est.comparison.violation,
        }],
    )?;
    eprintln!("Pr{{Z = 0}} = {} ({} of {}), bound {}", est.zeros.rate, est.zeros.count, a.trials, est.bound.raw);
    Ok(run_status(est.comparison.violation))
}

/// Quantities either given directly or computed from a simulate config.
pub enum RegionSource {
    Values { i0_b: f64, i0_c: f64, i_inf: f64, eps0: f64, eps_inf: f64, eps_tilde: f64 },
    Config(PathBuf),
}

#[derive(Serialize)]
struct RegionConfig {
    i0_b: f64,
    i0_c: f64,
    i_inf: f64,
    eps_tilde: f64,
    eps0: f64,
    eps_inf: f64,
    gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<SimulateConfig>,
}

#[derive(Serialize)]
struct VertexRow<'a> {
    region: &'a str,
    index: usize,
    rate1: f64,
    rate2: f64,
}

pub fn region(source: RegionSource, gamma: f64, out: &OutputDir) -> CliResult<u8> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(CliError::Usage(format!("gamma = {gamma} is not in (0, 1)")));
    }
    let config = match source {
        RegionSource::Values { i0_b, i0_c, i_inf, eps0, eps_inf, eps_tilde } => {
            RegionConfig { i0_b, i0_c, i_inf, eps_tilde, eps0, eps_inf, gamma, source: None }
        }
        RegionSource::Config(path) => {
            let sim = SimulateConfig::load(&path)?;
            let s = setup(&sim, &sim.load_channel()?, &sim.load_design()?)?;
            let q = s.quantities;
            RegionConfig {
                i0_b: q.i0_b,
                i0_c: q.i0_c,
                i_inf: q.i_inf,
                eps_tilde: sim.budget.eps_tilde,
                eps0: q.eps0,
                eps_inf: q.eps_inf,
                gamma,
                source: Some(sim),
            }
        }
    };
    let c = &config;
    let cmp = compare_regions(c.i0_b, c.i0_c, c.i_inf, c.eps_tilde, c.eps0, c.eps_inf, gamma);
    out.write_report("region", &config, "regions", &cmp)?;
    let mut rows = Vec::new();
    for r in [&cmp.marton, &cmp.binning.region, &cmp.marton_rate_part, &cmp.binning_rate_part] {
        rows.extend(r.polygon.iter().enumerate().map(|(index, &(rate1, rate2))| VertexRow { region: &r.name, index, rate1, rate2 }));
    }
    out.write_csv("region", &rows)?;
    eprintln!("rate-part containment {}, strictly larger {}", cmp.contains, cmp.strictly_larger);
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CurveConfig<'a> {
    base: &'a Path,
    pair: &'a Path,
    eps: f64,
    n: &'a [usize],
}

pub fn iid_curve(base: &Path, pair: Option<&Path>, eps: f64, n: &[usize], out: &OutputDir) -> CliResult<u8> {
    let pair = pair.unwrap_or(base);
    let (uy, uv): (JointPmf, JointPmf) = (read_json(base)?, read_json(pair)?);
    let curve = iid_convergence_curve(&uy, &uv, eps, n)?;
    let config = CurveConfig { base, pair, eps, n };
    out.write_report("iid-curve", &config, "curve", &curve)?;
    out.write_csv("iid-curve", &curve)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_contract() {
        assert_eq!(run_status(false), 0);
        assert_eq!(run_status(true), 1);
        let infeasible = CliError::Core(marton::Error::Infeasible { constraint: "a3", detail: String::new() });
        assert_eq!(infeasible.exit_code(), 2);
        assert_eq!(CliError::Core(marton::Error::InvalidEpsilon(2.0)).exit_code(), 3);
        assert_eq!(CliError::Budget(String::new()).exit_code(), 2);
    }
}
