//! Batch front end for the evolution library.
//!
//! ```text
//! eee run                --config run.cfg [flag overrides]
//! eee sweep              --scenario perturbed_flrw --n 16,32,64 ...
//! eee check-initial-data --scenario flrw --n 16 ...
//! eee speeds             --scenario minkowski ...
//! ```
//!
//! Flags mirror the config-file keys; a flag shadows the file value and
//! the collision is echoed in the manifest. Exit status: 0 success,
//! 1 usage/config error, 2 I/O error, 3 numerical failure.

use eee_evolve::config::{self, RunConfig};
use eee_evolve::output::fmt;
use eee_evolve::{driver, Error};
use std::process::ExitCode;

const USAGE: &str = "\
usage: eee <run | sweep | check-initial-data | speeds> [flags]

flags (each mirrors a config-file key; flags win over the file):
  --config <path>      key = value config file
  --scenario <name>    minkowski | flrw | perturbed_flrw | boosted_uniform
  --n <points>         grid points per axis (sweep: comma list, e.g. 16,32,64)
  --cfl <x>            CFL number in (0, 1]
  --t-final <x>        evolution end time
  --fd-order <2|4>     centered-difference order
  --ko <x>             Kreiss-Oliger dissipation strength in [0, 0.5]
  --kappa <x>          gravitational coupling (0 decouples gravity)
  --out <dir>          output directory (default: out)

other keys (file or --key value): eos, gamma, k, rmass, entropy,
amplitude, entropy_amplitude, beta, cadence, snapshots, sobolev_patch
";

fn flag_key(arg: &str) -> Option<String> {
    let name = arg.strip_prefix("--")?;
    Some(match name {
        "t-final" => "t_final".into(),
        "fd-order" => "fd_order".into(),
        other => other.replace('-', "_"),
    })
}

struct Cli {
    command: String,
    config_path: Option<String>,
    flags: Vec<(String, String)>,
    sweep_ns: Option<Vec<usize>>,
}

fn parse_args(args: &[String]) -> Result<Cli, String> {
    let mut it = args.iter();
    let command = match it.next() {
        Some(c) if c == "--help" || c == "-h" => return Err(String::new()),
        Some(c) => c.clone(),
        None => return Err("missing subcommand".into()),
    };
    if !matches!(
        command.as_str(),
        "run" | "sweep" | "check-initial-data" | "speeds"
    ) {
        return Err(format!("unknown subcommand {command:?}"));
    }
    let mut config_path = None;
    let mut flags = Vec::new();
    let mut sweep_ns = None;
    while let Some(arg) = it.next() {
        if arg == "--help" || arg == "-h" {
            return Err(String::new());
        }
        let Some(key) = flag_key(arg) else {
            return Err(format!("unexpected argument {arg:?}"));
        };
        let Some(value) = it.next() else {
            return Err(format!("flag {arg} needs a value"));
        };
        if key == "config" {
            config_path = Some(value.clone());
        } else if key == "n" && command == "sweep" && value.contains(',') {
            let ns: Result<Vec<usize>, _> = value.split(',').map(|s| s.trim().parse()).collect();
            match ns {
                Ok(ns) => sweep_ns = Some(ns),
                Err(_) => return Err(format!("bad resolution list {value:?}")),
            }
        } else {
            flags.push((key, value.clone()));
        }
    }
    Ok(Cli {
        command,
        config_path,
        flags,
        sweep_ns,
    })
}

fn load_config(cli: &Cli) -> eee_evolve::Result<RunConfig> {
    let file_entries = match &cli.config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            config::parse_file(&text)?
        }
        None => Vec::new(),
    };
    config::resolve(&file_entries, &cli.flags)
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) => ExitCode::from(1),
        Error::Io(_) => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn execute(cli: &Cli) -> eee_evolve::Result<()> {
    let cfg = load_config(cli)?;
    match cli.command.as_str() {
        "run" => {
            let outcome = driver::run(&cfg)?;
            println!(
                "run complete: t = {}, {} diagnostic rows",
                fmt(outcome.final_time),
                outcome.rows
            );
            println!("  csv      {}", outcome.csv.display());
            println!("  manifest {}", outcome.manifest.display());
            for s in &outcome.snapshots {
                println!("  snapshot {}", s.display());
            }
        }
        "sweep" => {
            let ns = cli.sweep_ns.clone().unwrap_or(vec![16, 32, 64]);
            let outcome = driver::sweep(&cfg, &ns)?;
            println!("sweep complete over n = {ns:?}");
            println!("  summary  {}", outcome.summary.display());
            for (q, errs, ords) in &outcome.orders {
                let e: Vec<String> = errs.iter().map(|v| format!("{v:.3e}")).collect();
                let o: Vec<String> = ords.iter().map(|v| format!("{v:.2}")).collect();
                println!("  {q}: errors {} orders {}", e.join(" "), o.join(" "));
            }
        }
        "check-initial-data" => {
            let report = driver::check_initial_data(&cfg)?;
            println!("initial data for scenario {}", cfg.scenario.name());
            println!("  hamiltonian residual  {}", fmt(report.constraints.ham));
            println!("  momentum residual     {}", fmt(report.constraints.mom));
            println!("  torsion residual      {}", fmt(report.torsion));
            println!("  riemann decomposition {}", fmt(report.riemann_decomp));
            println!(
                "  weyl traces |trE|,|trB| {} {}",
                fmt(report.weyl_traces.0),
                fmt(report.weyl_traces.1)
            );
            println!("  eos drift             {}", fmt(report.eos_drift));
        }
        "speeds" => {
            for xi in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
                let sp = driver::speeds(&cfg, xi)?;
                let mut distinct: Vec<f64> = Vec::new();
                for &v in &sp {
                    if !distinct.iter().any(|&d| (d - v).abs() <= 1e-9) {
                        distinct.push(v);
                    }
                }
                let text: Vec<String> = distinct.iter().map(|v| format!("{v:+.10}")).collect();
                println!("xi = {xi:?}: {}", text.join(" "));
            }
        }
        _ => unreachable!("validated in parse_args"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_args(&args) {
        Ok(cli) => cli,
        Err(msg) => {
            if msg.is_empty() {
                print!("{USAGE}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            return ExitCode::from(1);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
