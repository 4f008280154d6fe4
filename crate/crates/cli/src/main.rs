use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use smu_npmle::experiments::{self, ExperimentConfig, StudyKind};
use smu_npmle::metrics::{hellinger_sq_exact, hellinger_sq_mc, McProposal};
use smu_npmle::theory::decomp1d_piecewise;
use smu_npmle::{
    certify, fit_npmle, make_truth, to_piecewise, Dataset, FitOptions, MixingMeasure, RngSpec, SmuDensity,
    SmuError, TruthSpec,
};

#[derive(Parser)]
#[command(name = "smu", version, about = "Scale-mixture-of-uniforms density estimation")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "SMU_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the maximum likelihood mixture to a CSV dataset.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        cert_tol: f64,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Recompute the optimality certificate of a model on a dataset.
    Certify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Squared Hellinger distance between two models.
    Hellinger {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        /// Monte Carlo sample count instead of the exact computation.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw a dataset from a truth spec or a model.
    Sample {
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        truth: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replicated fits over a grid of sample sizes; writes the results CSV.
    RateStudy(StudyArgs),
    /// Rate study on a piecewise-rectangle truth, normalized by its piece count.
    AdaptationStudy(StudyArgs),
    /// Pairwise distances within a packing family of perturbed densities.
    LowerboundReport {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Breakpoints of a one-dimensional model's density.
    Decomp1d {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
    },
}

#[derive(clap::Args)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep rows already in the results file and run only the rest.
    #[arg(long)]
    resume: bool,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        SmuError::Parse {
            source_name: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        }
        .into()
    })
}

/// Model files carry an optional `fit` block next to the measure.
fn load_model(path: &Path) -> Result<MixingMeasure> {
    let mut v = read_json(path)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("fit");
    }
    serde_json::from_value(v).map_err(|e| {
        SmuError::Parse {
            source_name: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        }
        .into()
    })
}

fn load_config(path: &Path, threads: Option<usize>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if threads.is_some() {
        cfg.threads = threads;
    }
    if out.is_some() {
        cfg.output.csv = out;
    }
    Ok(cfg)
}

fn run_study(args: StudyArgs, kind: StudyKind, threads: Option<usize>) -> Result<()> {
    let cfg = load_config(&args.config, threads, args.out)?;
    if cfg.study != kind {
        return Err(SmuError::InvalidArgument(format!("config describes a {:?} study", cfg.study)).into());
    }
    let out = experiments::run_study(&cfg, args.resume)?;
    println!("{}", serde_json::to_string_pretty(&out.summary)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        // ignore failure when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Fit {
            data,
            out,
            cert_tol,
            max_iters,
        } => {
            let data = Dataset::load_csv(&data)?;
            let mut opts = FitOptions {
                cert_tol,
                ..FitOptions::default()
            };
            if let Some(m) = max_iters {
                opts.max_iters = m;
            }
            let fit = fit_npmle(&data, &opts)?;
            let mut model = serde_json::to_value(&fit.mixture)?;
            model["fit"] = json!({
                "loglik": fit.log_likelihood,
                "gap": fit.certificate.gap,
                "iterations": fit.iterations,
                "runtime_ms": fit.runtime_ms,
                "converged": fit.converged,
            });
            std::fs::write(&out, serde_json::to_string_pretty(&model)? + "\n")?;
            println!(
                "atoms={} loglik={:?} gap={:e} converged={}",
                fit.support_size(),
                fit.log_likelihood,
                fit.certificate.gap,
                fit.converged
            );
        }
        Command::Certify { model, data } => {
            let g = load_model(&model)?;
            let data = Dataset::load_csv(&data)?;
            let c = certify(&g, &data)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
        }
        Command::Hellinger { p, q, mc, seed } => {
            let p = SmuDensity::Discrete(load_model(&p)?);
            let q = SmuDensity::Discrete(load_model(&q)?);
            match mc {
                None => println!("{:?}", hellinger_sq_exact(&p, &q)?),
                Some(n) => {
                    let est = hellinger_sq_mc(&p, &q, n, seed, McProposal::UniformBox)?;
                    println!("{:?} ± {:?}", est.estimate, est.std_error);
                }
            }
        }
        Command::Sample {
            truth,
            model,
            n,
            seed,
            stream,
            out,
        } => {
            let rng = RngSpec::new(seed, stream);
            let data = match (truth, model) {
                (Some(t), _) => {
                    let spec: TruthSpec = serde_json::from_value(read_json(&t)?)?;
                    make_truth(&spec)?.sample(n, &rng)?
                }
                (None, Some(m)) => smu_npmle::sample_mixture(&load_model(&m)?, n, &rng)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            data.write_csv(BufWriter::new(File::create(&out)?))?;
        }
        Command::RateStudy(args) => run_study(args, StudyKind::Rate, cli.threads)?,
        Command::AdaptationStudy(args) => run_study(args, StudyKind::Adaptation, cli.threads)?,
        Command::LowerboundReport { config, out } => {
            let cfg = load_config(&config, cli.threads, out)?;
            let s = experiments::run_lowerbound_report(&cfg)?;
            let mut v = serde_json::to_value(&s)?;
            if let Some(obj) = v.as_object_mut() {
                // rows go to the CSV
                obj.remove("report");
                obj.remove("family");
            }
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        Command::Decomp1d { model, delta } => {
            let pc = to_piecewise(&load_model(&model)?)?;
            println!("{}", serde_json::to_string_pretty(&decomp1d_piecewise(&pc, delta)?)?);
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<SmuError>() {
        Some(e) if e.is_resource() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
