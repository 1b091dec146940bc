use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use persistence_lab::estimate::{lag_correlation, OrthantOptions};
use persistence_lab::harness::{
    self, run_experiment_in, ExperimentConfig, MethodChoice, ReproduceOptions, SuiteId, SweepConfig,
    SweepParameter, OUT_DIR_ENV,
};
use persistence_lab::kernels::{CorrelationKernel, WeightSequence};
use persistence_lab::simulate::{weighted_partial_sums, Sampler};
use persistence_lab::special::{self, PHParams};

#[derive(Parser)]
#[command(name = "persistence-lab", version, about = "Persistence probabilities of weighted Gaussian sums")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed of every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo replications (overrides suite and config defaults).
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = harness::DEFAULT_OUT_DIR)]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample paths of S_l = sum_{i<=l} sigma(i) xi_i and write them as a binary dump.
    Simulate {
        #[arg(long, default_value = "fgn:H=0.75")]
        kernel: String,
        #[arg(long, default_value = "ones")]
        weights: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Dump the increments xi instead of the partial sums.
        #[arg(long)]
        increments: bool,
    },
    /// Evaluate special functions.
    Special {
        #[command(subcommand)]
        which: SpecialCommand,
    },
    /// Run an experiment described by a JSON config.
    Estimate {
        config: PathBuf,
        /// Override the estimator of the config.
        #[arg(long)]
        method: Option<MethodChoice>,
    },
    /// Fitted exponent of the limit process along one parameter.
    Sweep {
        #[arg(long)]
        parameter: SweepParameter,
        /// Comma separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long = "hurst", default_value_t = 0.75)]
        h: f64,
        #[arg(long, default_value_t = 0.05)]
        spacing: f64,
        #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25")]
        horizons: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        budget: u64,
    },
    /// Run reproduction suites (A1..A10, or `all`); exit code 1 if any criterion fails.
    Reproduce {
        #[arg(required = true)]
        suites: Vec<String>,
    },
}

#[derive(Subcommand)]
enum SpecialCommand {
    /// psi_alpha(x)
    Psi { alpha: f64, x: f64 },
    /// f_pH(1,1) by closed form and by quadrature.
    F11 { p: f64, hurst: f64 },
    /// f_pH(a,b)
    F { p: f64, hurst: f64, a: f64, b: f64 },
    /// C_pH(tau) with its bracket.
    Cph { p: f64, hurst: f64, tau: f64 },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> persistence_lab::Result<ExitCode> {
    let g = cli.global;
    match cli.command {
        Command::Simulate { kernel, weights, n, increments } => {
            let kernel: CorrelationKernel = kernel.parse()?;
            let weights: WeightSequence = weights.parse()?;
            let reps = g.reps.unwrap_or(1000);
            let seed = g.seed.unwrap_or(1);
            let sampler = Sampler::for_kernel(&kernel, n, seed)?;
            let xi = sampler.sample(reps);
            for lag in 0..n.min(4) {
                let (r, se) = lag_correlation(&xi, lag);
                println!("lag {lag}: rho_hat {r:.5} ± {se:.5} (rho {:.5})", kernel.at(lag));
            }
            let paths = if increments { xi } else { weighted_partial_sums(&xi, &weights) };
            std::fs::create_dir_all(&g.out)?;
            let file = g.out.join(format!("paths-{seed}.bin"));
            paths.write_binary(&file)?;
            println!("{} rows of length {} ({}) -> {}", reps, n, sampler.scheme(), file.display());
        }
        Command::Special { which } => match which {
            SpecialCommand::Psi { alpha, x } => println!("{:.15e}", special::psi(alpha, x)?),
            SpecialCommand::F11 { p, hurst } => {
                let params = PHParams::new(p, hurst)?;
                let exact = special::selberg_f11(params)?;
                let quad = special::f11_by_quadrature(params)?;
                println!("closed form {exact:.15e}");
                println!("quadrature  {:.15e} (error estimate {:.1e})", quad.value, quad.abs_error_estimate);
            }
            SpecialCommand::F { p, hurst, a, b } => {
                let r = special::f_ph(PHParams::new(p, hurst)?, a, b)?;
                println!("{:.15e} (error estimate {:.1e})", r.value, r.abs_error_estimate);
            }
            SpecialCommand::Cph { p, hurst, tau } => {
                let params = PHParams::new(p, hurst)?;
                println!("C_pH({tau}) = {:.15e}", special::c_ph(params, tau)?);
                if tau > 0.0 {
                    let (lo, hi) = special::c_ph_bounds(params, tau, 0.5 * (1.0 + tau.exp()))?;
                    println!("bracket [{lo:.15e}, {hi:.15e}]");
                }
            }
        },
        Command::Estimate { config, method } => {
            let mut config = ExperimentConfig::from_path(&config)?;
            if let Some(m) = method {
                config.method = m;
            }
            if let Some(r) = g.reps {
                config.replications = r;
            }
            if let Some(s) = g.seed {
                config.seed = s;
            }
            config.validate()?;
            let out = run_experiment_in(&config, &g.out)?;
            for row in &out.rows {
                println!("{}", row.csv_line());
            }
            for f in &out.fits {
                println!("{}: exponent {:.4} ± {:.4}", f.method, f.fit.exponent, f.fit.stderr);
            }
            info!("wrote {} and {}", out.csv_path.display(), out.sidecar_path.display());
        }
        Command::Sweep { parameter, values, p, h, spacing, horizons, budget } => {
            let config = SweepConfig {
                experiment_id: format!("sweep-{parameter:?}").to_lowercase(),
                parameter,
                values,
                p,
                h,
                spacing,
                horizons,
                level: 0.0,
                orthant: OrthantOptions { budget, rel_tol: 1e-2, seed: g.seed.unwrap_or(1), ..OrthantOptions::default() },
            };
            let file = g.out.join(format!("{}.csv", config.experiment_id));
            for row in harness::sweep(&config, &file)? {
                println!("{} = {}: theta {:.4} ± {:.4}", config.experiment_id, row.abscissa, row.value, row.stderr);
            }
            info!("wrote {}", file.display());
        }
        Command::Reproduce { suites } => {
            let ids: Vec<SuiteId> = if suites.iter().any(|s| s == "all") {
                SuiteId::ALL.to_vec()
            } else {
                suites.iter().map(|s| s.parse()).collect::<persistence_lab::Result<_>>()?
            };
            let mut opts = ReproduceOptions { replications: g.reps, ..ReproduceOptions::default() };
            if let Some(s) = g.seed {
                opts.seed = s;
            }
            let mut failed = 0;
            for id in ids {
                let report = harness::reproduce(id, &opts)?;
                print!("{report}");
                failed += report.criteria.iter().filter(|c| !c.passed).count();
            }
            if failed > 0 {
                println!("{failed} criteria failed");
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
