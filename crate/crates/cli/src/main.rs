//! `pstctl`: model checking, TGC generation, PRISM export and experiment tables.
//!
//! Exit codes: 0 holds, 1 does not hold, 2 error, 3 timeout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Parser, Subcommand};

use pstctl::check::{check, CheckConfig, StrategyMode};
use pstctl::digital::{digitize, DigitalMdp, DEFAULT_STATE_CAP};
use pstctl::error::Error;
use pstctl::experiment::{run_experiment, ExperimentConfig};
use pstctl::lang::{parse_formula, parse_model};
use pstctl::model::Network;
use pstctl::par::Parallelism;
use pstctl::prism::{export_prism, ExportOptions};
use pstctl::strategy::{strategy_space, JointStrategyIrP};
use pstctl::tgc::{gen_tgc_formula, gen_tgc_model};

const STATE_CAP_VAR: &str = "PSTCTL_STATE_CAP";

#[derive(Parser)]
#[command(name = "pstctl", version, about = "Strategic model checking of probabilistic timed multi-agent systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a formula at the initial state of a model.
    Check {
        model: PathBuf,
        /// Formula text, or a file containing it.
        formula: String,
        #[arg(long, default_value = "irP", value_parser = parse_mode)]
        mode: StrategyMode,
        /// Lattice resolution for irP search.
        #[arg(long, default_value_t = 10)]
        grid: u32,
        /// Local refinement around the best lattice points.
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
        refine: bool,
        /// Check this strategy instead of searching.
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Seconds before giving up.
        #[arg(long)]
        timeout: Option<u64>,
        /// Evaluate candidates on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Print the train-gate-controller model and, with --T, its formula.
    GenTgc {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        t: Option<u32>,
        /// Write `tgc_<n>.pta` (and `tgc_<n>_<T>.formula`) here instead of stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Translate a model to the PRISM language with strategy parameters.
    ExportPrism {
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        coalition: Vec<String>,
        /// Strategy file whose weights replace the parameters.
        #[arg(long)]
        point: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the TGC experiment grid and write a CSV table.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3])]
        n: Vec<usize>,
        #[arg(long = "T", value_delimiter = ',', default_values_t = [5, 30])]
        t: Vec<u32>,
        #[arg(long, default_value = "irP", value_parser = parse_mode)]
        mode: StrategyMode,
        #[arg(long, default_value_t = 10)]
        grid: u32,
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
        refine: bool,
        #[arg(long, default_value = "results.csv")]
        output: PathBuf,
        /// Seconds per cell.
        #[arg(long, default_value_t = 600)]
        timeout: u64,
        /// Cells evaluated at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the digital-clocks MDP of a model.
    DumpMdp {
        model: PathBuf,
        /// Only state, move and tick counts.
        #[arg(long)]
        stats: bool,
    },
}

fn parse_mode(s: &str) -> std::result::Result<StrategyMode, String> {
    s.parse()
}

fn state_cap() -> Result<usize> {
    match std::env::var(STATE_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{STATE_CAP_VAR}=`{v}` is not a state count")),
        Err(_) => Ok(DEFAULT_STATE_CAP),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(path: &Path) -> Result<(Network, DigitalMdp)> {
    let network = parse_model(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let mdp = digitize(&network, state_cap()?)?;
    Ok((network, mdp))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check {
            model,
            formula,
            mode,
            grid,
            refine,
            strategy,
            json,
            timeout,
            sequential,
        } => {
            let start = Instant::now();
            let (network, mdp) = load(&model)?;
            let text = if Path::new(&formula).is_file() {
                read(Path::new(&formula))?
            } else {
                formula
            };
            let formula = parse_formula(text.trim())?;
            let mut config = CheckConfig {
                mode,
                grid,
                refine,
                strategy: strategy.as_deref().map(read).transpose()?,
                ..CheckConfig::default()
            };
            if sequential {
                config.parallelism = Parallelism::Sequential;
            }
            config.vi.deadline = timeout.map(|s| start + Duration::from_secs(s));
            let result = match check(&network, &mdp, &formula, &config) {
                Err(Error::Timeout) => {
                    eprintln!("timeout after {:.1}s", start.elapsed().as_secs_f64());
                    return Ok(ExitCode::from(3));
                }
                r => r?,
            };
            if json {
                let mut value = result.to_json();
                value["soundness"] = result.soundness().as_str().into();
                value["states"] = mdp.num_states().into();
                value["wall_ms"] = (start.elapsed().as_millis() as u64).into();
                println!("{}", serde_json::to_string_pretty(&value)?);
            } else {
                println!("{}: {}", formula, if result.holds { "holds" } else { "does not hold" });
                println!("states: {}, soundness: {}", mdp.num_states(), result.soundness().as_str());
                for v in &result.verdicts {
                    print!("{v}");
                }
            }
            Ok(ExitCode::from(if result.holds { 0 } else { 1 }))
        }
        Command::GenTgc { n, t, out_dir } => {
            if n == 0 {
                bail!("n must be at least 1");
            }
            let formula = t.map(|t| gen_tgc_formula(n, t)).transpose()?;
            let model = gen_tgc_model(n);
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                    write_out(Some(&dir.join(format!("tgc_{n}.pta"))), &model)?;
                    if let (Some(f), Some(t)) = (&formula, t) {
                        write_out(Some(&dir.join(format!("tgc_{n}_{t}.formula"))), &format!("{f}\n"))?;
                    }
                }
                None => {
                    print!("{model}");
                    if let Some(f) = formula {
                        println!("// formula: {f}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportPrism {
            model,
            coalition,
            point,
            output,
        } => {
            let network = parse_model(&read(&model)?).with_context(|| format!("in {}", model.display()))?;
            let point = match point {
                Some(p) => {
                    let space = strategy_space(&network, &coalition)?;
                    Some(JointStrategyIrP::from_text(&space, &read(&p)?).with_context(|| format!("in {}", p.display()))?)
                }
                None => None,
            };
            let text = export_prism(&network, &coalition, &ExportOptions { point })?;
            write_out(output.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            n,
            t,
            mode,
            grid,
            refine,
            output,
            timeout,
            jobs,
        } => {
            if n.is_empty() || t.is_empty() {
                bail!("--n and --T need at least one value each");
            }
            let config = ExperimentConfig {
                ns: n,
                ts: t,
                check: CheckConfig {
                    mode,
                    grid,
                    refine,
                    ..CheckConfig::default()
                },
                timeout: Duration::from_secs(timeout),
                jobs: jobs.max(1),
                state_cap: state_cap()?,
            };
            let rows = run_experiment(&config, &output)?;
            for r in &rows {
                eprintln!("n={} T={} {}: {} ({} ms)", r.n, r.t, r.mode, r.outcome.as_str(), r.wall_ms);
            }
            eprintln!("wrote {}", output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpMdp { model, stats } => {
            let (_, mdp) = load(&model)?;
            if stats {
                let s = mdp.stats();
                println!("states {}\nmoves {}\nticks {}", s.states, s.moves, s.ticks);
            } else {
                print!("{}", mdp.dump());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
