use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use partsel::figures::{self, FigureId, FigureSpec, Strategy};
use partsel::{bench, csvio, ContributionMode, PipelineError, ReleaseMode, Result, SelectConfig};
use partsel_core::{Neighboring, OptPrimitive, PrivacyParams};

#[derive(Parser)]
#[command(
    name = "partsel",
    version,
    about = "Differentially private partition selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Budget {
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = NeighboringArg::AddRemove)]
    neighboring: NeighboringArg,
}

impl Budget {
    fn params(&self) -> Result<PrivacyParams> {
        let n = match self.neighboring {
            NeighboringArg::AddRemove => Neighboring::AddRemove,
            NeighboringArg::Replace => Neighboring::Replace,
        };
        Ok(PrivacyParams::new(self.epsilon, self.delta, n)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NeighboringArg {
    AddRemove,
    Replace,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Opt,
    Laplace,
    Gauss,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    MidpointVsEps,
    MidpointVsDelta,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Select,
    ReleaseCounts,
    Dual,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContributionArg {
    Strict,
    FirstWins,
}

#[derive(Subcommand)]
enum Command {
    /// Release probability per user count.
    Probs {
        #[command(flatten)]
        budget: Budget,
        #[arg(long, default_value_t = 30)]
        n_max: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Opt)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 1)]
        kappa: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 5th/50th/95th percentile counts over an epsilon or delta grid.
    Midpoints {
        #[arg(long, value_enum)]
        figure: FigureArg,
        /// Fixed epsilon for midpoint-vs-delta.
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Fixed delta for midpoint-vs-eps.
        #[arg(long, default_value_t = 1e-5)]
        delta: f64,
        #[arg(long, default_value_t = figures::GRID_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Midpoints of the three strategies as kappa grows.
    Kappa {
        #[command(flatten)]
        budget: Budget,
        #[arg(long, default_value_t = 7)]
        kappa_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a release over a `user_id,partition` CSV file.
    Select {
        input: PathBuf,
        #[command(flatten)]
        budget: Budget,
        #[arg(long, value_enum, default_value_t = ModeArg::Select)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        kappa: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ContributionArg::Strict)]
        contribution: ContributionArg,
        /// Stop counting a partition once it reaches this many users.
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        public_file: Option<PathBuf>,
        #[arg(long)]
        public_threshold: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Times closed-form keep/drop decisions.
    Bench {
        #[command(flatten)]
        budget: Budget,
        #[arg(long, default_value_t = 1_000_000)]
        iterations: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var(partsel::THREADS_ENV) {
        let n: usize = raw.trim().parse().map_err(|_| {
            PipelineError::Config(format!(
                "{} must be a positive integer",
                partsel::THREADS_ENV
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Probs {
            budget,
            n_max,
            strategy,
            kappa,
            out,
        } => {
            let strategy = match strategy {
                StrategyArg::Opt => Strategy::Opt,
                StrategyArg::Laplace => Strategy::Laplace,
                StrategyArg::Gauss => Strategy::Gauss,
            };
            let rows = figures::prob_curve(strategy, &budget.params()?, kappa, n_max)?;
            let mut w = output(&out)?;
            figures::write_prob_curve(&mut w, &rows)?;
            w.flush()?;
        }
        Command::Midpoints {
            figure,
            epsilon,
            delta,
            points,
            out,
        } => {
            let (id, mut spec) = match figure {
                FigureArg::MidpointVsEps => {
                    let mut s = FigureSpec::midpoint_vs_eps(delta);
                    s.epsilons = figures::log_space(0.01, 3.0, points);
                    (FigureId::MidpointVsEps, s)
                }
                FigureArg::MidpointVsDelta => {
                    let mut s = FigureSpec::midpoint_vs_delta(epsilon);
                    s.deltas = figures::log_space(1e-12, 1e-3, points);
                    (FigureId::MidpointVsDelta, s)
                }
            };
            spec.id = id;
            let rows = figures::midpoint_rows(&spec)?;
            let mut w = output(&out)?;
            figures::write_midpoints(&mut w, id, &rows)?;
            w.flush()?;
        }
        Command::Kappa {
            budget,
            kappa_max,
            out,
        } => {
            let rows = figures::kappa_rows(&budget.params()?, kappa_max)?;
            let mut w = output(&out)?;
            figures::write_kappa(&mut w, &rows)?;
            w.flush()?;
        }
        Command::Select {
            input,
            budget,
            mode,
            kappa,
            seed,
            contribution,
            cap,
            public_file,
            public_threshold,
            out,
        } => {
            let mut config = SelectConfig::new(budget.params()?);
            config.kappa = kappa;
            config.seed = seed;
            config.cap = cap;
            config.public_threshold = public_threshold;
            config.mode = match mode {
                ModeArg::Select => ReleaseMode::Select,
                ModeArg::ReleaseCounts => ReleaseMode::ReleaseCounts,
                ModeArg::Dual => ReleaseMode::Dual,
            };
            config.contribution = match contribution {
                ContributionArg::Strict => ContributionMode::Strict,
                ContributionArg::FirstWins => ContributionMode::FirstWins,
            };
            if let Some(p) = public_file {
                config.public_keys = Some(csvio::read_keys(BufReader::new(File::open(p)?))?);
            }
            let bytes = partsel::run_select(BufReader::new(File::open(input)?), &config)?;
            let mut w = output(&out)?;
            w.write_all(&bytes)?;
            w.flush()?;
        }
        Command::Bench {
            budget,
            iterations,
            seed,
        } => {
            let prim = OptPrimitive::new(budget.params()?);
            let report = bench::run(&prim, iterations, seed);
            println!(
                "{} decisions in {:.3} ms: {:.1} ns/op ({} kept)",
                report.iterations,
                report.elapsed.as_secs_f64() * 1e3,
                report.ns_per_op(),
                report.kept
            );
            for (n, ns) in &report.per_regime {
                println!("  n = {n}: {ns:.1} ns/op");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("partsel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
