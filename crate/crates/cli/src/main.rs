use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use fracdiff::domain::{FouParams, MultiscaleParams, SamplingGrid, SeedSpec, TfeSystemParams, Trajectory};
use fracdiff::experiment::{
    run_config, ConjectureScanConfig, ExperimentConfig, ExperimentKind, ExperimentOutput, SignatureCheck,
};
use fracdiff::inverse::{inverse_calibration, sample_approximate_fou};
use fracdiff::likelihood::profile_mle;
use fracdiff::multiscale::{hurst_hat, sigma2_hat};
use fracdiff::simulation::{sample_fbm, sample_tfe_system, PhysicalSlowSampler};
use fracdiff::tfe::{tfe_estimate, TfeInstance};

#[derive(Parser)]
#[command(name = "fracdiff", version, about = "Simulation and inference for fractional diffusions")]
struct Cli {
    /// Master seed; replicate r draws from stream (seed, r). Defaults to 0,
    /// or to the config's seed for `experiment`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (CSV) or, for `experiment`, output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    /// Fractional Brownian motion scaled by sigma.
    Fbm,
    /// Approximate fOU driven by piecewise-linear fBM.
    Fou,
    /// Slow component of the physical fBM system.
    Physical,
    /// Slow component of the slow/fast averaging system.
    Tfe,
}

#[derive(Subcommand)]
enum Command {
    /// Draw sample paths and write them as `replicate,t,x` rows.
    Simulate {
        #[arg(long, value_enum, default_value = "fbm")]
        model: Model,
        #[arg(long, default_value_t = 0.7)]
        hurst: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Scale separation for `physical` and `tfe`.
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        /// Perturbation intensity for `tfe`.
        #[arg(long, default_value_t = 1e-3)]
        eta: f64,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
    },
    /// Profile maximum likelihood for (theta, sigma) of the approximate fOU model.
    Mle {
        input: PathBuf,
        #[arg(long)]
        hurst: f64,
        #[arg(long, default_value_t = 1e-4)]
        theta_lo: f64,
        #[arg(long, default_value_t = 50.0)]
        theta_hi: f64,
        #[command(flatten)]
        pick: Pick,
    },
    /// Whitened quadratic-variation estimate of sigma².
    EstimateSigma {
        input: PathBuf,
        #[arg(long)]
        hurst: f64,
        #[command(flatten)]
        pick: Pick,
    },
    /// Second-order-variation estimate of H from fine-grid data.
    EstimateHurst {
        input: PathBuf,
        #[command(flatten)]
        pick: Pick,
    },
    /// Trace statistics of the shift matrices over a grid of H and N.
    VerifyConjecture {
        #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.55, 0.7])]
        hursts: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [32, 64, 128, 256])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1.5)]
        growth_limit: f64,
    },
    /// Chen, shuffle and p-variation checks on random piecewise-linear paths.
    SignatureCheck {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        segments: usize,
    },
    /// Driver slopes that reproduce the data under the fOU model.
    Calibrate {
        input: PathBuf,
        #[arg(long)]
        hurst: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        sigma: f64,
        #[command(flatten)]
        pick: Pick,
    },
    /// Trajectory fitting estimate of the averaged drift.
    Tfe {
        input: PathBuf,
        /// Initial condition; the first observation when omitted.
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        theta_lo: f64,
        #[arg(long, default_value_t = 10.0)]
        theta_hi: f64,
        #[command(flatten)]
        pick: Pick,
    },
    /// Run an experiment described by a TOML file.
    Experiment { config: PathBuf },
}

#[derive(clap::Args)]
struct Pick {
    /// Replicate to read when the input holds several paths.
    #[arg(long, default_value_t = 0)]
    path: u64,
}

/// Marks failures caused by the invocation rather than the numerics.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Usage>() || cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<fracdiff::Error>() {
            return if err.is_config_error() { 2 } else { 3 };
        }
    }
    3
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.threads == Some(0) {
        bail!(usage("--threads must be at least 1"));
    }
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Simulate {
            model,
            hurst,
            delta,
            horizon,
            theta,
            sigma,
            epsilon,
            eta,
            x0,
        } => {
            let grid = fracdiff::domain::make_grid(delta, horizon)?;
            let count = cli.replicates.unwrap_or(1);
            let mut paths = Vec::with_capacity(count);
            for r in 0..count as u64 {
                let seed = SeedSpec::new(seed, r);
                let path = match model {
                    Model::Fbm => sample_fbm(hurst, &grid, seed)?.affine(0.0, sigma)?,
                    Model::Fou => sample_approximate_fou(&FouParams::new(theta, sigma, hurst)?, &grid, seed, 20.0)?,
                    Model::Physical => {
                        let params = MultiscaleParams::new(epsilon, 1.0, sigma, hurst)?;
                        PhysicalSlowSampler::new(&params, &grid)?.sample(seed)
                    }
                    Model::Tfe => {
                        let params = TfeSystemParams::new(theta, eta, epsilon, hurst)?;
                        sample_tfe_system(&params, &grid, seed, x0, None)?.slow
                    }
                };
                paths.push(path);
            }
            write_paths(cli.out.as_deref(), &paths)
        }
        Command::Mle {
            input,
            hurst,
            theta_lo,
            theta_hi,
            pick,
        } => {
            let x = read_path(&input, pick.path)?;
            let est = profile_mle(&x, hurst, theta_lo, theta_hi)?;
            report(
                cli.out.as_deref(),
                &[("theta", est.theta), ("sigma", est.sigma), ("log_likelihood", est.log_likelihood)],
            )
        }
        Command::EstimateSigma { input, hurst, pick } => {
            let x = read_path(&input, pick.path)?;
            let s2 = sigma2_hat(&x, hurst)?;
            report(cli.out.as_deref(), &[("sigma2", s2), ("sigma", s2.sqrt())])
        }
        Command::EstimateHurst { input, pick } => {
            let x = read_path(&input, pick.path)?;
            report(cli.out.as_deref(), &[("hurst", hurst_hat(&x)?)])
        }
        Command::VerifyConjecture {
            hursts,
            sizes,
            growth_limit,
        } => {
            let kind = ExperimentKind::ConjectureScan(ConjectureScanConfig {
                hursts,
                sizes,
                growth_limit,
            });
            experiment(&cli.out, seed, cli.replicates, cli.threads, kind)
        }
        Command::SignatureCheck { dim, segments } => {
            let kind = ExperimentKind::SignatureCheck(SignatureCheck {
                dim,
                segments,
                ..Default::default()
            });
            experiment(&cli.out, seed, cli.replicates, cli.threads, kind)
        }
        Command::Calibrate {
            input,
            hurst,
            theta,
            sigma,
            pick,
        } => {
            let x = read_path(&input, pick.path)?;
            let c = inverse_calibration(&x, &FouParams::new(theta, sigma, hurst)?)?;
            let mut w = csv::Writer::from_writer(sink(cli.out.as_deref())?);
            w.write_record(["cell", "t", "gradient"])?;
            for (k, g) in c.gradients.iter().enumerate() {
                w.write_record([k.to_string(), float(c.grid.time(k)), float(*g)])?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Tfe {
            input,
            x0,
            theta_lo,
            theta_hi,
            pick,
        } => {
            let x = read_path(&input, pick.path)?;
            let instance = TfeInstance::new(x0.unwrap_or(x.start()), theta_lo, theta_hi)?;
            report(cli.out.as_deref(), &[("theta", tfe_estimate(&x, &instance)?)])
        }
        Command::Experiment { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| usage(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg = ExperimentConfig::from_toml(&text)?;
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            cfg.replicates = cli.replicates.or(cfg.replicates);
            cfg.threads = cli.threads.or(cfg.threads);
            let out_dir = cli.out.clone().or_else(|| cfg.output.clone());
            let out = run_config(&cfg)?;
            finish(out_dir.as_deref(), &out)
        }
    }
}

fn experiment(
    out: &Option<PathBuf>,
    seed: u64,
    replicates: Option<usize>,
    threads: Option<usize>,
    kind: ExperimentKind,
) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::named(kind_name(&kind))?;
    cfg.kind = kind;
    cfg.seed = seed;
    cfg.replicates = replicates;
    cfg.threads = threads;
    let result = run_config(&cfg)?;
    finish(out.as_deref(), &result)
}

fn kind_name(kind: &ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::ConjectureScan(_) => "conjecture-scan",
        ExperimentKind::SignatureCheck(_) => "signature-check",
        _ => unreachable!("only used for the dedicated subcommands"),
    }
}

fn finish(dir: Option<&Path>, out: &ExperimentOutput) -> anyhow::Result<()> {
    if let Some(dir) = dir {
        out.write(dir)?;
        eprintln!("wrote {}", dir.display());
    } else {
        println!("{}", out.summary_json()?);
    }
    for c in &out.checks {
        eprintln!(
            "{} {}: {:.6e} (target {:.3e}, tolerance {:.3e})",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.target,
            c.tolerance
        );
    }
    Ok(())
}

fn float(v: f64) -> String {
    fracdiff::experiment::format_float(v)
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn report(out: Option<&Path>, values: &[(&str, f64)]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(values.iter().map(|(k, _)| *k))?;
    w.write_record(values.iter().map(|(_, v)| float(*v)))?;
    w.flush()?;
    Ok(())
}

fn write_paths(out: Option<&Path>, paths: &[Trajectory]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(["replicate", "t", "x"])?;
    for (r, path) in paths.iter().enumerate() {
        for (k, v) in path.values().iter().enumerate() {
            w.write_record([r.to_string(), float(path.grid().time(k)), float(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads one path from a CSV with `t` and `x` columns and an optional
/// `replicate` column. The step is taken from the first two times.
fn read_path(input: &Path, replicate: u64) -> anyhow::Result<Trajectory> {
    let mut reader =
        csv::Reader::from_path(input).map_err(|e| usage(format!("cannot read {}: {e}", input.display())))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(t_col), Some(x_col)) = (column("t"), column("x")) else {
        bail!(usage(format!("{} needs `t` and `x` columns", input.display())));
    };
    let r_col = column("replicate");
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |col: usize| -> anyhow::Result<f64> {
            record[col]
                .trim()
                .parse()
                .map_err(|_| usage(format!("line {}: `{}` is not a number", line + 2, &record[col])))
        };
        if let Some(c) = r_col {
            if parse(c)? as u64 != replicate {
                continue;
            }
        }
        times.push(parse(t_col)?);
        values.push(parse(x_col)?);
    }
    if values.len() < 2 {
        bail!(usage(format!("{}: path {replicate} has fewer than two points", input.display())));
    }
    let delta = times[1] - times[0];
    let regular = times
        .iter()
        .enumerate()
        .all(|(k, t)| (t - times[0] - k as f64 * delta).abs() <= 1e-9 * delta.abs().max(1.0) * (k as f64 + 1.0));
    if !(delta > 0.0) || !regular {
        bail!(usage(format!("{}: times must be equally spaced and increasing", input.display())));
    }
    let grid = SamplingGrid::with_count(delta, values.len() - 1)?;
    Ok(Trajectory::new(grid, values)?)
}
