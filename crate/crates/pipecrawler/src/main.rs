use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pipecrawler::{
    load_dimension_table, parallel_sweep, parse_scenario, render_summary, summary_json, write_records, Format, IoError,
    ScenarioError,
};
use pipecrawler_core::{run, DimensionTable, RunOutput, SimError};

const EXIT_INVALID: u8 = 1;
const EXIT_SIMULATION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "pipecrawler", version, about = "Simulate a three-track pipe crawler with an open differential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write per-step records.
    Run {
        scenario: PathBuf,
        /// Directory for records.<format> and summary.json; records go to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Simulate a scenario at several robot orientations.
    Sweep {
        scenario: PathBuf,
        /// Orientations in degrees, comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        theta: Vec<f64>,
        /// Write sweep.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario file without simulating.
    Validate { scenario: PathBuf },
    /// Look up pipe dimensions by nominal size and schedule.
    Dims {
        nps: String,
        schedule: String,
        /// Alternative table file (`designator, schedule, OD mm, wall mm`).
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Io { .. } => EXIT_IO,
            ScenarioError::CompressionLimit { .. } => EXIT_SIMULATION,
            _ => EXIT_INVALID,
        };
        let kind = match e {
            ScenarioError::Parse { .. } => "parse error",
            ScenarioError::Validation { .. } => "validation error",
            ScenarioError::CompressionLimit { .. } => "compression limit",
            ScenarioError::Io { .. } => "io error",
        };
        Failure::new(code, format!("{kind}: {e}"))
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

fn sim_failure(e: &SimError) -> Failure {
    match e {
        SimError::InvalidScenario { .. } => Failure::new(EXIT_INVALID, format!("validation error: {e}")),
        _ => Failure::new(EXIT_SIMULATION, format!("simulation error: {e}")),
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    fs::write(path, text + "\n").map_err(|e| io_failure(path, e))
}

fn emit_run(output: &RunOutput, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            let path = dir.join(format!("records.{}", format.extension()));
            let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
            write_records(&output.records, format, BufWriter::new(file))?;
            write_json(&dir.join("summary.json"), &summary_json(&output.summary))?;
            print!("{}", render_summary(&output.summary));
        }
        None => {
            let stdout = io::stdout();
            write_records(&output.records, format, stdout.lock())?;
            eprint!("{}", render_summary(&output.summary));
        }
    }
    Ok(())
}

fn cmd_run(path: &Path, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    let scenario = parse_scenario(path)?;
    match run(&scenario) {
        Ok(output) => emit_run(&output, out, format),
        Err(SimError::MaxTimeExceeded(partial)) => {
            emit_run(&partial, out, format)?;
            Err(Failure::new(EXIT_SIMULATION, format!("simulation error: max time {} s exceeded", scenario.max_time)))
        }
        Err(e) => Err(sim_failure(&e)),
    }
}

fn cmd_sweep(path: &Path, thetas: &[f64], out: Option<&Path>) -> Result<(), Failure> {
    let scenario = parse_scenario(path)?;
    let runs = parallel_sweep(&scenario, thetas).map_err(|e| sim_failure(&e))?;
    let mut docs = Vec::with_capacity(runs.len());
    let mut first_error = None;
    println!("theta_deg  finish_s     segment durations (s)");
    for r in &runs {
        match &r.outcome {
            Ok(output) => {
                let durations: Vec<String> = output
                    .summary
                    .segments
                    .iter()
                    .map(|s| s.duration().map_or_else(|| "-".into(), |d| pipecrawler::format_sig(d, 6)))
                    .collect();
                let finish = output.summary.finish_time.map_or_else(|| "-".into(), |t| pipecrawler::format_sig(t, 6));
                println!("{:<10} {:<12} {}", r.orientation_deg, finish, durations.join(" "));
                docs.push(
                    serde_json::json!({ "theta_deg": r.orientation_deg, "summary": summary_json(&output.summary) }),
                );
            }
            Err(e) => {
                println!("{:<10} error: {e}", r.orientation_deg);
                docs.push(serde_json::json!({ "theta_deg": r.orientation_deg, "error": e.to_string() }));
                first_error.get_or_insert_with(|| sim_failure(e));
            }
        }
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        write_json(&dir.join("sweep.json"), &serde_json::Value::Array(docs))?;
    }
    first_error.map_or(Ok(()), Err)
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let scenario = parse_scenario(path)?;
    println!(
        "ok: {} segments, {} mm centerline, inner radius {} mm, centerline speed {} mm/s",
        scenario.network.segments().len(),
        pipecrawler::format_sig(scenario.network.total_length(), 9),
        pipecrawler::format_sig(scenario.network.inner_radius(), 9),
        pipecrawler::format_sig(scenario.centerline_speed(), 9),
    );
    Ok(())
}

fn cmd_dims(nps: &str, schedule: &str, table: Option<&Path>) -> Result<(), Failure> {
    let table = match table {
        Some(path) => load_dimension_table(path).map_err(|e| match e {
            pipecrawler::TableError::Io { .. } => Failure::new(EXIT_IO, e.to_string()),
            _ => Failure::new(EXIT_INVALID, e.to_string()),
        })?,
        None => DimensionTable::builtin(),
    };
    let d = table.lookup(nps, schedule).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    println!("NPS {} schedule {}", d.nps, d.schedule);
    println!("outer diameter: {} mm", pipecrawler::format_sig(d.outer_diameter_mm, 9));
    println!("wall thickness: {} mm", pipecrawler::format_sig(d.wall_thickness_mm, 9));
    println!("inner diameter: {} mm", pipecrawler::format_sig(d.inner_diameter_mm(), 9));
    println!("inner radius: {} mm", pipecrawler::format_sig(d.inner_radius_mm(), 9));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { scenario, out, format } => cmd_run(scenario, out.as_deref(), *format),
        Command::Sweep { scenario, theta, out } => cmd_sweep(scenario, theta, out.as_deref()),
        Command::Validate { scenario } => cmd_validate(scenario),
        Command::Dims { nps, schedule, table } => cmd_dims(nps, schedule, table.as_deref()),
    };
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pipecrawler: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
