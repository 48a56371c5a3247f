//! Command-line driver: `flowlog run` evaluates a program over facts
//! directories, `flowlog oracle` does the same with the naive reference
//! evaluator, and `flowlog gen` writes seeded random graphs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flowlog::engine::Database;
use flowlog::io::{load_inputs, write_outputs, Dictionary};
use flowlog::oracle::{generate_graph, naive_evaluate, Density, RandomGraphSpec};
use flowlog::{compile, render_stats, Error, Options, SipMode};

const EXIT_CODES: &str = "\
Exit codes:
   0  success
  10  syntax error
  11  arity mismatch
  12  undeclared relation
  13  unsafe rule or bad aggregate use
  14  unstratifiable program
  20  malformed facts row
  21  other i/o error
  30  no convergence within --max-iterations";

#[derive(Parser)]
#[command(name = "flowlog", version, about = "A Datalog engine", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a program and write its output relations.
    Run(RunArgs),
    /// Evaluate with the naive reference evaluator (slow, for checking).
    Oracle(OracleArgs),
    /// Generate a seeded random graph as a facts file.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Program file.
    program: PathBuf,
    /// Directory holding one <relation>.facts file per input relation.
    #[arg(long, default_value = ".")]
    facts: PathBuf,
    /// Directory the output relations are written to.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for the evaluation kernels.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Plan bodies in listing order instead of searching join orders.
    #[arg(long)]
    no_plan_opt: bool,
    /// Never rewrite rules into semijoin-reduced form.
    #[arg(long, conflicts_with = "force_sip")]
    no_sip: bool,
    /// Rewrite every eligible rule, not just recursive ones.
    #[arg(long)]
    force_sip: bool,
    /// Keep every plan step materialized instead of fusing projections.
    #[arg(long)]
    no_fusion: bool,
    /// Give every rule its own plan nodes instead of sharing equal ones.
    #[arg(long)]
    no_sharing: bool,
    /// Track multiplicities instead of plain presence.
    #[arg(long)]
    count_diffs: bool,
    /// Write per-stratum/rule/subplan statistics to this file.
    #[arg(long, value_name = "PATH")]
    stats: Option<PathBuf>,
    /// Print the plans instead of evaluating (add --run to do both).
    #[arg(long)]
    explain: bool,
    /// With --explain: evaluate after printing the plans.
    #[arg(long, requires = "explain")]
    run: bool,
    /// Field delimiter in facts files.
    #[arg(long, default_value = "\t")]
    delimiter: char,
    /// Abort a stratum that has not converged after this many rounds.
    #[arg(long, value_name = "N")]
    max_iterations: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Program file.
    program: PathBuf,
    /// Directory holding one <relation>.facts file per input relation.
    #[arg(long, default_value = ".")]
    facts: PathBuf,
    /// Directory the output relations are written to.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Field delimiter in facts files.
    #[arg(long, default_value = "\t")]
    delimiter: char,
}

#[derive(Args)]
struct GenArgs {
    /// Number of nodes; ids are 0..N.
    #[arg(long, value_name = "N")]
    nodes: usize,
    /// Edge probability per ordered pair.
    #[arg(long, value_name = "P", conflicts_with = "edges")]
    prob: Option<f64>,
    /// Exact edge count, sampled without replacement.
    #[arg(long, value_name = "M")]
    edges: Option<usize>,
    /// RNG seed; equal seeds generate equal graphs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File the edges are written to.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Draw weights from 1..=20 and write src, dst, weight rows.
    #[arg(long)]
    weighted: bool,
    /// Allow src = dst edges.
    #[arg(long)]
    self_loops: bool,
    /// Field delimiter.
    #[arg(long, default_value = "\t")]
    delimiter: char,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Gen(args) => cmd_gen(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_program(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| {
        Error::Io(flowlog::io::IoError::Io { path: path.to_path_buf(), source })
    })
}

fn cmd_run(args: &RunArgs) -> Result<(), Error> {
    let options = Options {
        optimize_joins: !args.no_plan_opt,
        sip: if args.no_sip {
            SipMode::Off
        } else if args.force_sip {
            SipMode::ForceOn
        } else {
            SipMode::Auto
        },
        fuse: !args.no_fusion,
        share: !args.no_sharing,
        count_diffs: args.count_diffs,
        workers: args.workers,
        max_iterations: args.max_iterations,
        ..Options::default()
    };

    let source = read_program(&args.program)?;
    let compiled = compile(&source, &options)?;

    if args.explain {
        print!("{}", compiled.explain());
        if !args.run {
            return Ok(());
        }
    }

    let mut dict = Dictionary::new();
    let inputs = load_inputs(&compiled.program, &args.facts, args.delimiter, &mut dict)?;
    let result = compiled.run(&inputs)?;
    write_outputs(&compiled.program, &result.database, &args.out, args.delimiter, &dict)?;

    if let Some(path) = &args.stats {
        std::fs::write(path, render_stats(&result.stats)).map_err(|source| {
            Error::Io(flowlog::io::IoError::Io { path: path.clone(), source })
        })?;
    }
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), Error> {
    let source = read_program(&args.program)?;
    let program = flowlog::frontend::parse_program(&source)?;
    let mut dict = Dictionary::new();
    let inputs = load_inputs(&program, &args.facts, args.delimiter, &mut dict)?;
    let database: Database = naive_evaluate(&program, &inputs)?;
    write_outputs(&program, &database, &args.out, args.delimiter, &dict)?;
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), Error> {
    let density = match (args.prob, args.edges) {
        (Some(p), None) => Density::Prob(p),
        (None, Some(m)) => Density::Count(m),
        (None, None) => Density::Prob(0.1),
        (Some(_), Some(_)) => unreachable!("clap rejects --prob with --edges"),
    };
    let spec = RandomGraphSpec {
        nodes: args.nodes,
        density,
        seed: args.seed,
        weighted: args.weighted,
        self_loops: args.self_loops,
    };

    let mut text = String::new();
    for edge in generate_graph(&spec) {
        if args.weighted {
            text.push_str(&format!(
                "{}{d}{}{d}{}\n",
                edge.src,
                edge.dst,
                edge.weight,
                d = args.delimiter
            ));
        } else {
            text.push_str(&format!("{}{d}{}\n", edge.src, edge.dst, d = args.delimiter));
        }
    }
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|source| {
                Error::Io(flowlog::io::IoError::Io { path: dir.to_path_buf(), source })
            })?;
        }
    }
    std::fs::write(&args.out, text).map_err(|source| {
        Error::Io(flowlog::io::IoError::Io { path: args.out.clone(), source })
    })
}
