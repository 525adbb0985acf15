use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use momab::change_detection::RbocdConfig;
use momab::environments::{Environment, JcasOracle, JcasParams, PiecewiseBernoulli};
use momab::experiment::{
    alarm_audit, emit_results, run_experiment, verify_regret_shape, write_results, BoundsReport,
    ExperimentConfig, OutputFormat, PolicySpec, RegretShapeConfig, ResolvedPolicy,
};
use momab::policies::{PolicyConfig, WrapperConfig};
use momab::{Error, MeanMatrix, Result};

#[derive(Parser)]
#[command(
    name = "momab",
    version,
    about = "Multi-objective bandit experiments and verifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write per-round regret summaries.
    Run(Common),
    /// Monte-Carlo check of the concentration inequalities.
    VerifyBounds(Common),
    /// Logarithmic regret shape and restart-count checks.
    RegretShape(Common),
    /// Per-segment oracle means, feasibility and Pareto fronts.
    JcasOracle(Common),
}

/// Flat verdict line shared by the verifier subcommands.
#[derive(Debug, Serialize)]
struct Check {
    name: String,
    value: f64,
    limit: f64,
    passed: bool,
}

#[derive(Serialize)]
struct Verdict<T: Serialize> {
    passed: bool,
    failures: Vec<Check>,
    checks: Vec<Check>,
    report: T,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BoundsFile {
    configs: usize,
    samples: usize,
    seed: u64,
}

impl Default for BoundsFile {
    fn default() -> Self {
        Self {
            configs: 50,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ShapeFile {
    means: Option<MeanMatrix>,
    horizons: Vec<usize>,
    runs: usize,
    seed: u64,
    slope_factor: f64,
    exponent: f64,
    audit_runs: usize,
}

impl Default for ShapeFile {
    fn default() -> Self {
        let d = RegretShapeConfig::default_instance();
        Self {
            means: None,
            horizons: d.horizons,
            runs: d.runs,
            seed: d.seed,
            slope_factor: d.slope_factor,
            exponent: d.policy.exponent,
            audit_runs: 100,
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        None => Ok(T::default()),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(std::io::BufWriter::new(std::fs::File::create(p)?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_verdict<T: Serialize>(checks: Vec<Check>, report: T, common: &Common) -> Result<bool> {
    let passed = checks.iter().all(|c| c.passed);
    let mut out = open_out(common.out.as_deref())?;
    match common.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let (failures, checks) = checks.into_iter().partition(|c| !c.passed);
            let verdict = Verdict {
                passed,
                failures,
                checks,
                report,
            };
            serde_json::to_writer_pretty(&mut out, &verdict)?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(out);
            for c in &checks {
                csv.serialize(c)?;
            }
            csv.flush()?;
        }
    }
    Ok(passed)
}

fn run(common: &Common) -> Result<bool> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("run needs --config".into()))?;
    let mut config = ExperimentConfig::from_json_file(path)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(format) = common.format {
        config.format = format;
    }
    if let Some(out) = &common.out {
        config.output = Some(out.clone());
    }
    let result = run_experiment(&config)?;
    for s in &result.summaries {
        eprintln!(
            "{}: final mean cumulative regret {:.3} (se {:.3})",
            s.policy, s.final_mean, s.final_stderr
        );
    }
    match &config.output {
        Some(out) => emit_results(&result.summaries, out, config.format)?,
        None => write_results(&result.summaries, config.format, std::io::stdout().lock())?,
    }
    Ok(true)
}

fn verify_bounds(common: &Common) -> Result<bool> {
    let mut file: BoundsFile = read_json(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        file.seed = seed;
    }
    let report = BoundsReport::run(file.configs, file.samples, file.seed)?;
    let mut checks = Vec::new();
    for (i, r) in report.lemma1.iter().enumerate() {
        checks.push(Check {
            name: format!("lemma1[{i}]"),
            value: r.empirical,
            limit: r.marginal_bound.min(r.markov_bound) + 3.0 * r.stderr,
            passed: r.holds,
        });
    }
    for (i, r) in report.lemma2.iter().enumerate() {
        for c in &r.checks {
            checks.push(Check {
                name: format!("lemma2[{i}].ineq{}", c.inequality),
                value: c.empirical,
                limit: c.bound + 3.0 * c.stderr,
                passed: c.holds,
            });
        }
    }
    write_verdict(checks, report, common)
}

#[derive(Serialize)]
struct ShapeOutput {
    regret_shape: momab::experiment::RegretShapeReport,
    alarm_audit: momab::experiment::AlarmAudit,
}

fn regret_shape(common: &Common) -> Result<bool> {
    let mut file: ShapeFile = read_json(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        file.seed = seed;
    }
    let mut config = RegretShapeConfig::default_instance();
    if let Some(means) = file.means {
        config.policy = PolicyConfig::new(means.num_arms(), means.num_objectives());
        config.means = means;
    }
    config.policy = config.policy.with_exponent(file.exponent);
    config.horizons = file.horizons;
    config.runs = file.runs;
    config.seed = file.seed;
    config.slope_factor = file.slope_factor;
    let shape = verify_regret_shape(&config)?;

    let env = PiecewiseBernoulli::synthetic();
    let horizon = env.horizon();
    let delta = PolicySpec::default_delta(env.breakpoints().len(), horizon, true);
    let policy = ResolvedPolicy::RbocdParetoUcb {
        config: PolicyConfig::new(env.num_arms(), env.num_objectives()),
        detector: RbocdConfig::new(delta),
        wrapper: WrapperConfig::default(),
    };
    let audit = alarm_audit(&env, &policy, horizon, file.audit_runs, file.seed)?;

    let mut checks: Vec<Check> = shape
        .ratio_changes
        .iter()
        .enumerate()
        .map(|(i, &(mean, se))| Check {
            name: format!(
                "ratio_change[{}->{}]",
                shape.horizons[i],
                shape.horizons[i + 1]
            ),
            value: mean,
            limit: 3.0 * se,
            passed: mean <= 3.0 * se,
        })
        .collect();
    checks.push(Check {
        name: "final_slope".into(),
        value: shape.final_slope,
        limit: shape.slope_limit + 3.0 * shape.final_slope_stderr,
        passed: shape.slope_ok,
    });
    checks.push(Check {
        name: "restarts".into(),
        value: audit.mean_alarms,
        limit: audit.bound + 3.0 * audit.stderr,
        passed: audit.within,
    });
    write_verdict(
        checks,
        ShapeOutput {
            regret_shape: shape,
            alarm_audit: audit,
        },
        common,
    )
}

#[derive(Serialize)]
struct OracleRow {
    segment: usize,
    distance_m: f64,
    arm: usize,
    power_dbm: f64,
    raw_ee_dir: f64,
    raw_ee_pd: f64,
    mean_dir: f64,
    mean_pd: f64,
    feasibility: f64,
    on_front: bool,
}

fn jcas_oracle(common: &Common) -> Result<bool> {
    let mut params = match common.config.as_deref() {
        Some(p) => JcasParams::from_json_file(p)?,
        None => JcasParams::default(),
    };
    if let Some(seed) = common.seed {
        params.oracle_seed = seed;
    }
    let oracle = JcasOracle::compute(&params)?;
    let mut out = open_out(common.out.as_deref())?;
    match common.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &oracle)?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(out);
            for (s, &distance_m) in params.distances_m.iter().enumerate() {
                for arm in 0..params.num_levels {
                    let means = oracle.means[s].row(arm);
                    csv.serialize(OracleRow {
                        segment: s,
                        distance_m,
                        arm,
                        power_dbm: params.power_dbm(arm),
                        raw_ee_dir: oracle.raw_means[s][arm][0],
                        raw_ee_pd: oracle.raw_means[s][arm][1],
                        mean_dir: means[0],
                        mean_pd: means[1],
                        feasibility: oracle.feasibility[s][arm],
                        on_front: oracle.feasible_fronts[s].contains(&arm),
                    })?;
                }
            }
            csv.flush()?;
        }
    }
    Ok(oracle.feasible_fronts.iter().all(|f| !f.is_empty()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(c) => run(c),
        Command::VerifyBounds(c) => verify_bounds(c),
        Command::RegretShape(c) => regret_shape(c),
        Command::JcasOracle(c) => jcas_oracle(c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
