//! `itree`: threshold reports, graph sampling and solving, verification
//! suites and Monte Carlo experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure,
//! 3 solver budget exceeded.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use induced_trees::combinatorics::{count_tree_pairs, pair_log_probability, x_lm, y_upper_factor};
use induced_trees::experiment::{self, ExperimentConfig, Mode};
use induced_trees::graph::{self, Graph};
use induced_trees::threshold::find_k0;
use induced_trees::verify::{run_verify, Fault, VerifyOptions};
use induced_trees::Error;

#[derive(Parser)]
#[command(name = "itree", version, about = "Largest induced trees in G(n,p)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold index k0 and neighbouring expectations.
    Threshold {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        /// Also print a key=value dump.
        #[arg(long)]
        kv: bool,
    },
    /// Sample G(n,p) in the graph text format.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact maximum induced tree of a graph file.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        /// Search node budget.
        #[arg(long, default_value_t = experiment::DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Count induced trees of order k in a graph file.
    Count {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, conflicts_with = "maximal")]
        fortified: bool,
        #[arg(long)]
        maximal: bool,
    },
    /// Tree-pair count, pair probability and x_{l,m} for one overlap shape.
    Pairs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
    },
    /// Run every oracle suite; exit 2 on any failure.
    Verify {
        #[arg(long, default_value_t = 7)]
        kmax: usize,
        #[arg(long, default_value_t = 30)]
        lmax: usize,
        /// Perturb one formula to check that the suites can fail.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Run an experiment from a key = value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Verification,
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

fn read_graph(path: &PathBuf) -> Result<Graph, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    text.parse()
        .map_err(|e: Error| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(
    out: &Option<PathBuf>,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut f = io::BufWriter::new(fs::File::create(path)?);
            write(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Threshold { n, p, kv } => {
            let report = find_k0(n, p)?;
            print!("{report}");
            if kv {
                println!();
                print!("{}", report.to_key_values());
            }
        }
        Command::Sample { n, p, seed, out } => {
            let g = graph::sample_gnp(n, p, seed)?;
            emit(&out, |w| write!(w, "{g}"))?;
        }
        Command::Solve { input, budget } => {
            let g = read_graph(&input)?;
            let r = graph::max_induced_tree_with_budget(&g, budget)?;
            let witness: Vec<String> = r.witness.iter().map(|v| v.to_string()).collect();
            println!("size     {}", r.size);
            println!("witness  {}", witness.join(" "));
            println!("nodes    {}", r.nodes_explored);
        }
        Command::Count {
            input,
            k,
            fortified,
            maximal,
        } => {
            let g = read_graph(&input)?;
            let count = if fortified {
                graph::count_fortified_trees(&g, k)?
            } else if maximal {
                graph::count_maximal_trees(&g, k)?
            } else {
                graph::count_induced_trees(&g, k)?
            };
            println!("{count}");
        }
        Command::Pairs { n, k, l, m, p } => {
            let y = y_upper_factor(k, l, m, p)?;
            println!("tree_pairs       {}", count_tree_pairs(k, l, m)?);
            println!("pair_probability {}", pair_log_probability(k, l, m, p)?);
            println!("x_lm             {}", x_lm(n, k, l, m, p)?);
            println!(
                "y_factor         {:e}{}",
                y.value,
                if y.applicable {
                    ""
                } else {
                    "  (clamped: inapplicable)"
                }
            );
        }
        Command::Verify {
            kmax,
            lmax,
            inject_fault,
        } => {
            let fault = inject_fault.then_some(Fault::CoveringExponent);
            let report = run_verify(&VerifyOptions { kmax, lmax, fault })?;
            print!("{report}");
            if !report.passed() {
                return Err(Failure::Verification);
            }
        }
        Command::Experiment {
            config,
            mode,
            trials,
            seed,
            workers,
            out,
        } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
            let mut pairs = experiment::parse_key_values(&text)?;
            let overrides = [
                ("mode", mode),
                ("trials", trials.map(|t| t.to_string())),
                ("seed", seed.map(|s| s.to_string())),
                ("workers", workers.map(|w| w.to_string())),
            ];
            pairs.extend(
                overrides
                    .into_iter()
                    .filter_map(|(k, v)| v.map(|v| (k.to_string(), v))),
            );
            let cfg = ExperimentConfig::from_pairs(pairs)?;
            match cfg.mode {
                Mode::Concentration => {
                    let run = experiment::run_concentration(&cfg)?;
                    emit(&out, |w| experiment::write_csv(&run.records, w))?;
                    eprint!("{}", run.summary);
                    if run.summary.censored > 0 {
                        return Err(Failure::Budget(format!(
                            "{} trials exceeded the node budget",
                            run.summary.censored
                        )));
                    }
                }
                Mode::Moments => {
                    let table = experiment::run_moments(&cfg)?;
                    emit(&out, |w| table.write_csv(w))?;
                }
                Mode::DriftReport => {
                    let report = experiment::run_drift_report(&cfg)?;
                    emit(&out, |w| write!(w, "{report}"))?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("budget exceeded: {msg}");
            ExitCode::from(3)
        }
    }
}
