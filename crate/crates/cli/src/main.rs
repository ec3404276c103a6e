//! kdqtool: Kirkwood-Dirac work statistics for qubit circuit files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use kdq_core::decomposition::{commutation_screen, decomposition_identity};
use kdq_core::figures::{figure_data, Figure};
use kdq_core::gates::parser::parse_real;
use kdq_core::gates::{parse_circuit, Program};
use kdq_core::kdq::{kdq_split, kdq_table, split_json};
use kdq_core::par::Execution;
use kdq_core::sweep::{run_sweep, DataTable, SweepError, SweepSpec};
use kdq_core::thermo::{jarzynski, work_report};
use kdq_core::verify::{run_verification, Level, VerifyConfig};

#[derive(Parser)]
#[command(name = "kdqtool", version, about = "Kirkwood-Dirac quasiprobabilities of work for qubit circuits")]
struct Cli {
    /// Seed for randomised checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// JSON indentation; 0 prints a single line
    #[arg(long, global = true, default_value_t = 2)]
    json_indent: usize,

    /// Evaluate sequentially instead of on the thread pool
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasiprobability table of a circuit file
    Kdq {
        file: PathBuf,
        /// Add the population/coherent split
        #[arg(long)]
        split: bool,
    },
    /// Extractable work, its split and (two qubits) components and norms
    Work {
        file: PathBuf,
        /// Also report <exp(-beta W)>
        #[arg(long, value_parser = real_arg)]
        beta: Option<f64>,
        /// Skip the Gibbs check on the dephased input
        #[arg(long, requires = "beta")]
        raw_jarzynski: bool,
    },
    /// Per-gate decomposition of the table and its correction term
    Decompose { file: PathBuf },
    /// One-parameter sweep of a circuit template to CSV
    Sweep {
        file: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long)]
        count: usize,
        /// Comma-separated output columns, e.g. re_q_0_1,W,W_coh
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<String>,
        /// Fix another placeholder, name=value
        #[arg(long = "set", value_parser = assignment)]
        set: Vec<(String, f64)>,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomised invariant suite
    Verify {
        #[arg(long, default_value = "quick")]
        level: Level,
    },
    /// Data behind a figure as CSV
    Figures {
        figure: Figure,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn real_arg(s: &str) -> Result<f64, String> {
    parse_real(s).ok_or_else(|| format!("'{s}' is not a number"))
}

fn assignment(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    Ok((name.trim().trim_start_matches('$').to_string(), real_arg(value.trim())?))
}

enum Failure {
    Io(String),
    Parse(String),
    Validation(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Parse(m) | Failure::Validation(m) | Failure::Verification(m) => m,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Program, Failure> {
    let program = parse_circuit(&read(path)?).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    for w in &program.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(program)
}

fn emit_json(value: &Value, indent: usize) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    let io_err = |e: io::Error| Failure::Io(e.to_string());
    if indent == 0 {
        serde_json::to_writer(&mut out, value).map_err(|e| Failure::Io(e.to_string()))?;
    } else {
        let pad = vec![b' '; indent];
        let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
        let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
        value.serialize(&mut ser).map_err(|e| Failure::Io(e.to_string()))?;
    }
    writeln!(out).map_err(io_err)
}

fn emit_csv(table: &DataTable, out: Option<&Path>) -> Result<(), Failure> {
    let to_failure = |e: SweepError| Failure::Io(e.to_string());
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            table.write_csv(io::BufWriter::new(file)).map_err(to_failure)
        }
        None => table.write_csv(io::stdout().lock()).map_err(to_failure),
    }
}

fn cmd_kdq(path: &Path, split: bool) -> Result<Value, Failure> {
    let program = load(path)?;
    let h = program.hamiltonian().map_err(invalid)?;
    let rho = program.initial_state().map_err(invalid)?;
    let u = program.circuit.unitary();
    let mut out = json!({ "table": kdq_table(&u, &rho, &h).map_err(invalid)?.to_json() });
    if split {
        out["split"] = split_json(&kdq_split(&u, &rho, &h).map_err(invalid)?);
    }
    Ok(out)
}

fn cmd_work(path: &Path, beta: Option<f64>, raw: bool) -> Result<Value, Failure> {
    let program = load(path)?;
    let h = program.hamiltonian().map_err(invalid)?;
    let rho = program.initial_state().map_err(invalid)?;
    let u = program.circuit.unitary();
    let mut out = json!({ "work": work_report(&u, &rho, &h).map_err(invalid)?.to_json() });
    if let Some(b) = beta {
        out["jarzynski"] = jarzynski(&u, &rho, b, &h, raw).map_err(invalid)?.to_json();
    }
    Ok(out)
}

fn cmd_decompose(path: &Path) -> Result<Value, Failure> {
    let program = load(path)?;
    let h = program.hamiltonian().map_err(invalid)?;
    let rho = program.initial_state().map_err(invalid)?;
    let mut out = decomposition_identity(&program.circuit, &rho, &h).map_err(invalid)?.to_json();
    if matches!(program.circuit.len(), 2 | 3) {
        let screen = commutation_screen(&program.circuit, &h).map_err(invalid)?;
        out["screen"] = serde_json::to_value(screen).map_err(invalid)?;
    }
    Ok(out)
}

fn sweep_failure(e: SweepError) -> Failure {
    match e {
        SweepError::Io(_) | SweepError::Csv(_) => Failure::Io(e.to_string()),
        e if e.is_input_error() => Failure::Parse(e.to_string()),
        e => Failure::Validation(e.to_string()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let indent = cli.json_indent;
    match cli.command {
        Command::Kdq { file, split } => emit_json(&cmd_kdq(&file, split)?, indent),
        Command::Work { file, beta, raw_jarzynski } => emit_json(&cmd_work(&file, beta, raw_jarzynski)?, indent),
        Command::Decompose { file } => emit_json(&cmd_decompose(&file)?, indent),
        Command::Sweep {
            file,
            param,
            start,
            stop,
            count,
            columns,
            set,
            out,
        } => {
            let template = read(&file)?;
            let spec = SweepSpec {
                param: param.trim_start_matches('$').to_string(),
                start,
                stop,
                count,
                columns,
                fixed: set.into_iter().collect::<BTreeMap<_, _>>(),
            };
            let table = run_sweep(&template, &spec, exec).map_err(sweep_failure)?;
            emit_csv(&table, out.as_deref())
        }
        Command::Verify { level } => {
            let cfg = VerifyConfig {
                exec,
                ..VerifyConfig::new(level, cli.seed)
            };
            let report = run_verification(&cfg);
            println!("{}", report.summary());
            if report.all_passed() {
                Ok(())
            } else {
                let names: Vec<&str> = report.failed().iter().map(|c| c.name).collect();
                Err(Failure::Verification(format!("failed checks: {}", names.join(", "))))
            }
        }
        Command::Figures { figure, out } => {
            let table = figure_data(figure, exec).map_err(sweep_failure)?;
            emit_csv(&table, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
