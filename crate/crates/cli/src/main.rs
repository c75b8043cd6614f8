use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gtr_cli::commands::{self, BenchArgs, CliError, DeriveArgs, RankArgs, RepairArgs};

/// Rule-based graph repair guided by derived application conditions.
#[derive(Parser)]
#[command(name = "gtr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph file for dangling edges, duplicate ids and typing errors.
    Validate { graph: PathBuf },
    /// Violation count per constraint.
    Violations {
        graph: PathBuf,
        constraints: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Repair and impairment conditions for every rule and weak constraint.
    DeriveAc {
        rules: PathBuf,
        constraints: PathBuf,
        /// Print each derivation step to stderr.
        #[arg(long)]
        explain: bool,
        /// Keep repair/impairment pairs that would otherwise cancel.
        #[arg(long)]
        no_cancel: bool,
        /// Do not assume hosts without parallel edges.
        #[arg(long)]
        multigraph: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score every applicable match by its predicted change in violations.
    Rank {
        graph: PathBuf,
        rules: PathBuf,
        constraints: PathBuf,
        /// JSON object of constraint name to weight.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        multigraph: bool,
    },
    /// Greedy repair with optional exploratory steps and restarts.
    Repair {
        graph: PathBuf,
        rules: PathBuf,
        constraints: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        /// Steps that may pick a non-improving match.
        #[arg(long, default_value_t = 0)]
        budget: usize,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// Skip the check that hard constraint violations never increase.
        #[arg(long)]
        no_hard_check: bool,
        #[arg(long)]
        multigraph: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cross-check the engine against brute force on random instances.
    Oracle {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Synthetic class diagram with five methods and five attributes per class.
    GenCra {
        #[arg(long)]
        classes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random feature model (methods, attributes, dependencies).
    GenFeatures {
        #[arg(long)]
        features: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convert a feature model into a class diagram with one class per feature.
    ImportFeatures {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Repair synthetic models of several sizes; CSV on stdout, timings on stderr.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "5,10,25")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        budget: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::Validate { graph } => commands::validate(&graph),
        Command::Violations { graph, constraints, json } => commands::violations(&graph, &constraints, json),
        Command::DeriveAc { rules, constraints, explain, no_cancel, multigraph, output } => {
            let (out, log) = commands::derive_ac(&DeriveArgs {
                rules: &rules,
                constraints: &constraints,
                explain,
                cancel: !no_cancel,
                multigraph,
                output: output.as_deref(),
            })?;
            for line in log {
                eprintln!("{line}");
            }
            Ok(out)
        }
        Command::Rank { graph, rules, constraints, weights, top, json, multigraph } => commands::rank(&RankArgs {
            graph: &graph,
            rules: &rules,
            constraints: &constraints,
            weights: weights.as_deref(),
            top,
            json,
            multigraph,
        }),
        Command::Repair {
            graph,
            rules,
            constraints,
            weights,
            restarts,
            budget,
            top_k,
            seed,
            max_iter,
            no_hard_check,
            multigraph,
            output,
        } => commands::repair(&RepairArgs {
            graph: &graph,
            rules: &rules,
            constraints: &constraints,
            weights: weights.as_deref(),
            restarts,
            budget,
            top_k,
            seed,
            max_iter,
            check_hard: !no_hard_check,
            multigraph,
            output: output.as_deref(),
        }),
        Command::Oracle { cases, seed, output } => commands::oracle(cases, seed, output.as_deref()),
        Command::GenCra { classes, seed, output } => {
            let (out, note) = commands::gen_cra(classes, seed, output.as_deref())?;
            eprint!("{note}");
            Ok(out)
        }
        Command::GenFeatures { features, seed, output } => commands::gen_features(features, seed, output.as_deref()),
        Command::ImportFeatures { model, output } => commands::import_features(&model, output.as_deref()),
        Command::Bench { sizes, seed, steps, restarts, budget, csv } => {
            let (out, timing) =
                commands::bench(&BenchArgs { sizes: &sizes, seed, steps, restarts, budget, csv: csv.as_ref() })?;
            eprint!("{timing}");
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
