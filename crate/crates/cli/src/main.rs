mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lomboost::bounds::{splits_required, BoundQuery};
use lomboost::criteria::{CriterionKind, GiniConstant, DEFAULT_GINI_CONSTANT};
use lomboost::data::{parse_sparse_file, synthetic_hierarchical, write_sparse_file};
use lomboost::learner::{curves_to_csv, format_sig9, trace_from_csv, Tree};
use lomboost::verify::{run_all, VerifyConfig};

use pipeline::{write_atomic, TrainSettings};

#[derive(Debug, Parser)]
#[command(
    name = "lomboost",
    version,
    about = "Multiclass decision trees grown by online objective maximization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a tree and write the tree, its trace and a run manifest.
    Train(TrainArgs),
    /// Re-run a training manifest and check the outputs are bit-identical.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Report the error of a saved tree on a dataset.
    Evaluate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Normalize a training trace into plot-ready curves.
    Curves {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Number of splits that guarantees a criterion below a target.
    Bounds(BoundsArgs),
    /// Run the randomized checks of the underlying inequalities.
    Verify {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, env = "LOMBOOST_SEED", default_value_t = 1)]
        seed: u64,
        /// Scales the strong-concavity bounds; above 1 injects a fault.
        #[arg(long, default_value_t = 1.0, hide = true)]
        fault_modulus: f64,
    },
    /// Write a synthetic dataset in the sparse format.
    Generate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, env = "LOMBOOST_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    settings: TrainSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Entropy,
    Gini,
    Mgini,
}

#[derive(Debug, clap::Args)]
struct BoundsArgs {
    /// Criteria to report; all three when omitted.
    #[arg(long, value_enum)]
    criterion: Vec<CriterionArg>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long = "C", default_value_t = DEFAULT_GINI_CONSTANT)]
    c: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Train(args) => {
            let run = pipeline::train(&args.data, &args.settings)?;
            for w in &run.warnings {
                eprintln!("warning: {w}");
            }
            run.write(&args.out)?;
            match run.test_error {
                Some(e) => println!("test error: {}", format_sig9(e)),
                None => println!("test error: n/a (empty test set)"),
            }
        }
        Command::Replay { manifest } => {
            let mismatches = pipeline::replay(&manifest)?;
            if !mismatches.is_empty() {
                for m in &mismatches {
                    eprintln!("mismatch: {m}");
                }
                return Ok(ExitCode::FAILURE);
            }
            println!("replay identical");
        }
        Command::Evaluate { tree, data } => {
            let text = std::fs::read_to_string(&tree)
                .with_context(|| format!("reading {}", tree.display()))?;
            let tree = Tree::from_text(&text)?;
            let data = parse_sparse_file(&data)?;
            println!("{}", format_sig9(tree.evaluate(&data)?));
        }
        Command::Curves { trace, out } => {
            let text = std::fs::read_to_string(&trace)
                .with_context(|| format!("reading {}", trace.display()))?;
            let records = trace_from_csv(&text)?;
            write_atomic(&out, curves_to_csv(&records)?.as_bytes())?;
        }
        Command::Bounds(args) => return bounds(&args),
        Command::Verify {
            trials,
            seed,
            fault_modulus,
        } => {
            let config = VerifyConfig {
                trials,
                seed,
                modulus_scale: fault_modulus,
            };
            let reports = run_all(&config);
            for r in &reports {
                println!("{r}");
            }
            if !reports.iter().all(|r| r.passed()) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Generate {
            k,
            d,
            n,
            noise,
            seed,
            out,
        } => {
            let data = synthetic_hierarchical(k, d, n, noise, seed)?;
            write_sparse_file(&data, &out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Prints one budget per requested criterion: the bare value when a single
/// criterion is requested, `name: value` lines otherwise. Fails if any query
/// is out of range, after reporting the others.
fn bounds(args: &BoundsArgs) -> Result<ExitCode> {
    let c = GiniConstant::new(args.c)?;
    let kinds: Vec<CriterionKind> = if args.criterion.is_empty() {
        CriterionKind::all(c).to_vec()
    } else {
        args.criterion
            .iter()
            .map(|arg| match arg {
                CriterionArg::Entropy => CriterionKind::ShannonEntropy,
                CriterionArg::Gini => CriterionKind::Gini,
                CriterionArg::Mgini => CriterionKind::ModifiedGini(c),
            })
            .collect()
    };
    let single = kinds.len() == 1;
    let mut code = ExitCode::SUCCESS;
    for kind in kinds {
        match BoundQuery::new(kind, args.k, args.gamma, args.alpha) {
            Ok(query) if single => println!("{}", splits_required(&query)),
            Ok(query) => println!("{}: {}", kind.name(), splits_required(&query)),
            Err(e) => {
                eprintln!("error: {} bound: {e}", kind.name());
                code = ExitCode::FAILURE;
            }
        }
    }
    Ok(code)
}
