use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use trontrain::acceptance::{self, AcceptanceOptions};
use trontrain::config::{BetaSpec, ExperimentConfig};
use trontrain::runner;

use tron_core::adversary::BetaFn;
use tron_core::distributions::{estimate_moments, InputDistribution};
use tron_core::error::{Result, TronError};
use tron_core::recursion::{certify_draws, LemmaId};
use tron_core::RealVector;

#[derive(Parser)]
#[command(
    name = "trontrain",
    about = "Non-gradient training experiments: GLM-Tron, corrupted-label ReLU training, Neuro-Tron",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for summary.json and trace_{repeat}.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print schedule constants only; no training, no artifacts.
        #[arg(long)]
        dry_run: bool,
        /// Override the oracle's corruption bound.
        #[arg(long)]
        theta_star: Option<f64>,
        /// Override the attack probability with a constant.
        #[arg(long)]
        beta: Option<f64>,
        /// Override the mini-batch size.
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Run the acceptance suite and print one pass/fail line per criterion.
    Accept {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Run a single criterion by id (1..10, 9a..9d).
        #[arg(long)]
        criterion: Option<String>,
    },
    /// Certify a recursion bound on randomized hypothesis-satisfying draws.
    VerifyRecursion {
        #[arg(long)]
        lemma: String,
        #[arg(long, default_value_t = 500)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate the distributional constants for a distribution and filter.
    ///
    /// DIST is `uniform_box:lo1,lo2,..:hi1,hi2,..` or `gaussian:n:sigma`.
    Moments {
        dist: String,
        #[arg(long, value_name = "w1,w2,..")]
        w_star: String,
        #[arg(long, default_value_t = 0.0)]
        theta_star: f64,
        /// Constant attack probability.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| TronError::Format(format!("bad float {p:?}")))
        })
        .collect()
}

fn parse_dist(spec: &str) -> Result<InputDistribution> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["uniform_box", lo, hi] => InputDistribution::uniform_box(
            RealVector::new(parse_floats(lo)?)?,
            RealVector::new(parse_floats(hi)?)?,
        ),
        ["gaussian", n, sigma] => {
            let n = n
                .parse::<usize>()
                .map_err(|_| TronError::Format(format!("bad dimension {n:?}")))?;
            let sigma = sigma
                .parse::<f64>()
                .map_err(|_| TronError::Format(format!("bad sigma {sigma:?}")))?;
            InputDistribution::isotropic_gaussian(n, sigma)
        }
        _ => Err(TronError::Format(format!(
            "unrecognized distribution spec {spec:?}; \
             expected uniform_box:lo,..:hi,.. or gaussian:n:sigma"
        ))),
    }
}

struct Overrides {
    seed: Option<u64>,
    theta_star: Option<f64>,
    beta: Option<f64>,
    batch: Option<usize>,
    eps: Option<f64>,
    delta: Option<f64>,
    repeats: Option<usize>,
}

fn apply_overrides(cfg: &mut ExperimentConfig, ov: &Overrides) {
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(r) = ov.repeats {
        cfg.repeats = r;
    }
    if let Some(e) = ov.eps {
        cfg.eps = Some(e);
    }
    if let Some(d) = ov.delta {
        cfg.delta = Some(d);
    }
    if let Some(t) = ov.theta_star {
        if let Some(oracle) = cfg.oracle.as_mut() {
            oracle.theta_star = t;
        }
    }
    if let Some(p) = ov.beta {
        if let Some(oracle) = cfg.oracle.as_mut() {
            oracle.beta = BetaSpec::Constant { p };
        }
    }
    if let Some(b) = ov.batch {
        if let Some(sec) = cfg.relu_tron.as_mut() {
            sec.batch_size = b;
        }
    }
}

fn run() -> Result<bool> {
    if let Ok(threads) = std::env::var("TRONTRAIN_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            dry_run,
            theta_star,
            beta,
            batch,
            eps,
            delta,
            repeats,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            apply_overrides(
                &mut cfg,
                &Overrides {
                    seed,
                    theta_star,
                    beta,
                    batch,
                    eps,
                    delta,
                    repeats,
                },
            );
            let outcome = runner::run_experiment(&cfg, out.as_deref(), dry_run)?;
            if dry_run {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.summary.schedule)
                        .unwrap_or_else(|_| "null".into())
                );
                return Ok(true);
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&outcome.summary).unwrap_or_default()
            );
            for a in &outcome.summary.assertions {
                let status = if a.passed { "PASS" } else { "FAIL" };
                eprintln!(
                    "[{status}] {}: measured {:.6e}, requirement {}",
                    a.kind, a.measured, a.requirement
                );
            }
            Ok(outcome.all_assertions_passed)
        }
        Command::Accept { seed, criterion } => {
            let opts = AcceptanceOptions {
                seed,
                tolerance_scale: 1.0,
            };
            let results = match criterion {
                Some(id) => vec![acceptance::run_criterion(&id, &opts)?],
                None => acceptance::run_all(&opts)?,
            };
            print!("{}", acceptance::format_table(&results));
            Ok(results.iter().all(|r| r.passed))
        }
        Command::VerifyRecursion { lemma, draws, seed } => {
            let id = LemmaId::parse(&lemma)?;
            let report = certify_draws(id, draws, seed)?;
            println!("lemma            draws  certified  max_T    floor_gap");
            println!(
                "{:<16} {:<6} {:<10} {:<8} {:.2e}",
                lemma, report.draws, report.certified, report.max_predicted_t, report.max_floor_gap
            );
            if !report.failures.is_empty() {
                println!("failed draws: {:?}", report.failures);
            }
            let pass = report.certified == report.draws;
            println!("{}", if pass { "PASS" } else { "FAIL" });
            Ok(pass)
        }
        Command::Moments {
            dist,
            w_star,
            theta_star,
            beta,
            samples,
            seed,
        } => {
            let d = parse_dist(&dist)?;
            let w = RealVector::new(parse_floats(&w_star)?)?;
            let m = estimate_moments(&d, &w, theta_star, &BetaFn::constant(beta), samples, seed)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
