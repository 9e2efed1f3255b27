use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lunar_logistics::milp::SolveStatus;
use lunar_logistics::report::{build_report, flows_csv, ledger_csv, parse_report, render_summary, report_json, SolveReport};
use lunar_logistics::scenario::{
    load_scenario, run_sweep, shipped, solve_scenario, sweep_csv, validate_scenario, ScenarioConfig, ScenarioError,
};

const USAGE: u8 = 1;
const FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "lunar-logistics", version, about = "Lunar habitat logistics planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Structured,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write its report.
    Solve {
        /// Scenario file, or the name of a shipped scenario.
        scenario: String,
        #[arg(long, env = "LUNAR_LOGISTICS_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
        /// Exit nonzero when the replay rejects the plan.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
    },
    /// Run a named sweep and print its CSV table.
    Sweep {
        scenario: String,
        #[arg(long)]
        name: String,
        /// Also write `<sweep>.csv` here.
        #[arg(long, env = "LUNAR_LOGISTICS_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Check a scenario without solving it.
    Validate { scenario: String },
    /// Print a summary of a structured solve report.
    Report { report: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read_scenario_text(arg: &str) -> Result<String, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return fs::read_to_string(path).map_err(|e| fail(USAGE, format!("{arg}: {e}")));
    }
    shipped(arg)
        .map(str::to_string)
        .ok_or_else(|| fail(USAGE, format!("{arg}: no such file or shipped scenario")))
}

fn scenario_failure(arg: &str, e: ScenarioError) -> Failure {
    let code = match e {
        ScenarioError::Parse { .. } => USAGE,
        _ => FAILED,
    };
    fail(code, format!("{arg}: {e}"))
}

fn load(arg: &str) -> Result<ScenarioConfig, Failure> {
    let text = read_scenario_text(arg)?;
    load_scenario(&text).map_err(|e| scenario_failure(arg, e))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

fn summary_csv(r: &SolveReport) -> String {
    let mut rows: Vec<(String, String)> = vec![
        ("scenario".into(), r.scenario.clone()),
        ("status".into(), format!("{:?}", r.status)),
    ];
    if let Some(c) = &r.costs {
        rows.extend([
            ("total_cost".into(), c.total.to_string()),
            ("launch_cost".into(), c.launch.to_string()),
            ("propellant_cost".into(), c.propellant.to_string()),
            ("hardware_cost".into(), c.hardware.to_string()),
            ("operations_cost".into(), c.operations.to_string()),
        ]);
    }
    rows.extend([
        ("vehicles".into(), r.vehicles.to_string()),
        ("flights".into(), r.flights.to_string()),
        ("propellant_kg".into(), r.propellant_kg.to_string()),
        ("slag_kg".into(), r.byproducts.slag.to_string()),
        ("metals_kg".into(), r.byproducts.metals.to_string()),
        ("emissions_kg".into(), r.byproducts.emissions.to_string()),
        ("dsoil_surplus_kg".into(), r.byproducts.dsoil_surplus.to_string()),
    ]);
    for (name, p) in &r.plants {
        rows.push((format!("{name}_mass_kg"), p.mass_kg.to_string()));
        rows.push((format!("{name}_power_kw"), p.power_kw.to_string()));
    }
    let passed = r.replay.as_ref().map(|v| v.passed.to_string()).unwrap_or_default();
    rows.push(("replay_passed".into(), passed));
    let mut out = String::from("metric,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

fn cmd_solve(scenario: &str, out_dir: &Path, strict: bool, format: Format) -> Result<(), Failure> {
    let config = load(scenario)?;
    let outcome = solve_scenario(&config).map_err(|e| scenario_failure(scenario, e))?;
    let report = build_report(&outcome);
    fs::create_dir_all(out_dir).map_err(|e| fail(USAGE, format!("{}: {e}", out_dir.display())))?;
    let stem = &config.name;
    if format != Format::Csv {
        write(out_dir, &format!("{stem}.report.json"), &report_json(&report))?;
    }
    if format != Format::Structured {
        write(out_dir, &format!("{stem}.summary.csv"), &summary_csv(&report))?;
        write(out_dir, &format!("{stem}.flows.csv"), &flows_csv(&report.flows))?;
        write(out_dir, &format!("{stem}.ledger.csv"), &ledger_csv(&report.ledger))?;
    }
    print!("{}", render_summary(&report));

    match outcome.solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::NodeLimit if outcome.plan.is_some() => {
            eprintln!("warning: node limit reached; the reported plan may not be optimal");
        }
        status => {
            let detail = outcome.solution.message.clone().map(|m| format!(": {m}")).unwrap_or_default();
            return Err(fail(FAILED, format!("{scenario}: solver status {status:?}{detail}")));
        }
    }
    if strict && !outcome.replay_passed() {
        return Err(fail(FAILED, format!("{scenario}: replay rejected the plan")));
    }
    Ok(())
}

fn cmd_sweep(scenario: &str, name: &str, out_dir: Option<&Path>) -> Result<(), Failure> {
    let config = load(scenario)?;
    let spec = config
        .sweeps
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            let known: Vec<_> = config.sweeps.iter().map(|s| s.name.as_str()).collect();
            fail(USAGE, format!("{scenario}: no sweep named `{name}` (defined: {})", known.join(", ")))
        })?;
    let rows = run_sweep(&config, spec).map_err(|e| fail(USAGE, format!("{scenario}: {e}")))?;
    for row in &rows {
        if let Err(reason) = &row.outcome {
            eprintln!("{name}: value {} failed: {reason}", row.value);
        }
    }
    let csv = sweep_csv(&rows);
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| fail(USAGE, format!("{}: {e}", dir.display())))?;
        write(dir, &format!("{name}.csv"), &csv)?;
    }
    print!("{csv}");
    if rows.iter().any(|r| r.outcome.is_ok()) {
        Ok(())
    } else {
        Err(fail(FAILED, format!("{name}: every sweep point failed")))
    }
}

fn cmd_validate(scenario: &str) -> Result<(), Failure> {
    let text = read_scenario_text(scenario)?;
    let config = match load_scenario(&text) {
        Ok(c) => c,
        Err(e @ ScenarioError::Parse { .. }) => return Err(scenario_failure(scenario, e)),
        Err(e) => {
            println!("config: {e}");
            return Err(fail(FAILED, format!("{scenario}: 1 diagnostic")));
        }
    };
    let diagnostics = validate_scenario(&config);
    for d in &diagnostics {
        println!("{d}");
    }
    if diagnostics.is_empty() {
        println!("{scenario}: ok");
        Ok(())
    } else {
        Err(fail(FAILED, format!("{scenario}: {} diagnostic(s)", diagnostics.len())))
    }
}

fn cmd_report(path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))?;
    let report = parse_report(&text).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))?;
    print!("{}", render_summary(&report));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve {
            scenario,
            out_dir,
            strict,
            format,
        } => cmd_solve(scenario, out_dir, *strict, *format),
        Command::Sweep { scenario, name, out_dir } => cmd_sweep(scenario, name, out_dir.as_deref()),
        Command::Validate { scenario } => cmd_validate(scenario),
        Command::Report { report } => cmd_report(report),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
