#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod defaults;
mod error;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::Outcome;
use config::{Run, Sweep, Task};
use error::{code, CliError, CliResult};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

pub const THREADS_VAR: &str = "DODS_LAB_THREADS";

#[derive(Parser)]
#[command(name = "dods-lab", version, about = "Symmetry analysis and integration of delay ordinary differential systems")]
struct Cli {
    /// Print every numeric default to stderr before running.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Sweep a numeric config key: `path=lo:hi:n`. Repeat for a product grid.
    #[arg(long, value_name = "PATH=LO:HI:N")]
    sweep: Vec<Sweep>,
    /// Continue past incompatible initial data with a warning.
    #[arg(long)]
    force: bool,
    /// Directory for written artifacts; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// List algebra realizations and their invariant families.
    Catalog {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        id: Option<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Integrate by the method of steps and write CSV plus breakpoints.
    Solve(RunArgs),
    /// Test declared vector fields against the system.
    CheckSymmetry(RunArgs),
    /// Reduce a catalog family by its subalgebras and report closed forms.
    InvariantSolutions(RunArgs),
    /// Extra symmetry and canonical form of a linear system.
    ClassifyLinear(RunArgs),
    /// Write the catalog or a solution without the residual gate.
    Export {
        #[command(subcommand)]
        what: Export,
    },
}

#[derive(Subcommand)]
enum Export {
    /// Catalog document as JSON.
    Catalog {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        id: Option<String>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solution CSV and breakpoint sidecar.
    Solution {
        config: PathBuf,
        #[arg(long)]
        force: bool,
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },
}

/// Write to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

fn describe(run: &Run) -> String {
    let parts: Vec<String> = run.assignment.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!("run {} ({})", run.index.unwrap_or(0), parts.join(", "))
}

/// Print one run's outcome and return its exit status.
fn report(run: &Run, result: CliResult<Outcome>, format: Format, swept: bool) -> (u8, serde_json::Value) {
    match result {
        Ok(o) => {
            let status = o.failure.as_ref().map_or(code::OK, CliError::exit_code);
            if format == Format::Table {
                if swept {
                    emit(&format!("== {}\n", describe(run)));
                }
                emit(&o.text);
            }
            if let Some(f) = &o.failure {
                eprintln!("{}: {f}", if swept { describe(run) } else { "check".into() });
            }
            (status, o.json)
        }
        Err(e) => {
            let status = e.exit_code();
            if swept {
                eprintln!("{}: error: {e}", describe(run));
            } else {
                eprintln!("error: {e}");
            }
            (status, serde_json::json!({ "error": e.to_string(), "exit_code": status }))
        }
    }
}

fn run_config(task: Task, args: &RunArgs) -> CliResult<u8> {
    let table = config::read_table(&args.config)?;
    let mut runs = config::expand(&args.config, &table, &args.sweep, args.force)?;
    for r in &mut runs {
        commands::override_dir(&mut r.config, args.out_dir.as_deref());
    }
    let swept = !args.sweep.is_empty();
    let results: Vec<CliResult<Outcome>> = if swept {
        thread_pool()?.install(|| runs.par_iter().map(|r| commands::run_task(task, r)).collect())
    } else {
        runs.iter().map(|r| commands::run_task(task, r)).collect()
    };
    let mut status = code::OK;
    let mut docs = Vec::new();
    for (run, result) in runs.iter().zip(results) {
        let (s, json) = report(run, result, args.format, swept);
        if let Some(dir) = &run.config.output.dir {
            if task != Task::Solve && json.get("error").is_none() {
                output::write_json(&dir.join(format!("{}.json", run.stem())), &json)?;
            }
        }
        if status == code::OK {
            status = s;
        }
        docs.push(json);
    }
    if args.format == Format::Json {
        let doc = if swept { serde_json::json!({ "runs": docs }) } else { docs.remove(0) };
        emit(&(serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"));
    }
    Ok(status)
}

fn execute(cli: Cli) -> CliResult<u8> {
    if cli.verbose {
        for (name, value) in defaults::listing() {
            eprintln!("default {name} = {value}");
        }
        eprintln!("default threads = {}", std::env::var(THREADS_VAR).unwrap_or_else(|_| "all cores".into()));
    }
    match cli.command {
        Command::Catalog { dim, id, format } => {
            match format {
                Format::Table => emit(&commands::catalog_text(dim, id.as_deref())?),
                Format::Json => {
                    let v = commands::catalog_json(dim, id.as_deref())?;
                    emit(&(serde_json::to_string_pretty(&v).expect("catalog serializes") + "\n"));
                }
            }
            Ok(code::OK)
        }
        Command::Solve(a) => run_config(Task::Solve, &a),
        Command::CheckSymmetry(a) => run_config(Task::CheckSymmetry, &a),
        Command::InvariantSolutions(a) => run_config(Task::InvariantSolutions, &a),
        Command::ClassifyLinear(a) => run_config(Task::ClassifyLinear, &a),
        Command::Export { what: Export::Catalog { dim, id, out } } => {
            let v = commands::catalog_json(dim, id.as_deref())?;
            match out {
                Some(p) => output::write_json(&p, &v)?,
                None => emit(&(serde_json::to_string_pretty(&v).expect("catalog serializes") + "\n")),
            }
            Ok(code::OK)
        }
        Command::Export { what: Export::Solution { config, force, out_dir } } => {
            let mut run = commands::load_single(&config, force)?;
            commands::override_dir(&mut run.config, out_dir.as_deref());
            run.config.check_task(Task::Solve)?;
            run.config.solver.validate()?;
            let o = commands::solve_run(&run, true)?;
            emit(&o.text);
            Ok(code::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { code::CONFIG } else { code::OK });
        }
    };
    match execute(cli) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
