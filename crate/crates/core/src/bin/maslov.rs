use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maslov_core::integrator::SolverOptions;
use maslov_core::kdv5::{shoot_symmetric, ShootOptions, WaveParams, WaveProfile};
use maslov_core::problems::{get_problem, parse_param, Params};
use maslov_core::scan::{lambda_grid, scan, to_json, write_csv, Method};
use maslov_core::verify::{self, Suite};
use maslov_core::{MaslovError, Result};

#[derive(Parser)]
#[command(
    name = "maslov",
    version,
    about = "Maslov index and Evans function of Hamiltonian spectral problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate D(lambda), the Maslov index, crossings and drift over a lambda grid.
    Scan(ScanArgs),
    /// Compute a KdV5 solitary wave profile and write it as CSV.
    Wave(WaveArgs),
    /// Run the built-in property suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    problem: String,
    /// Problem parameters as key=value; fractions like 13/6 are accepted.
    #[arg(long = "param", num_args = 1.., value_parser = parse_kv)]
    params: Vec<(String, f64)>,
    #[arg(long, allow_hyphen_values = true)]
    lambda_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    lambda_max: f64,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value = "angle", value_parser = ["angle", "intersection", "both"])]
    method: String,
    /// Half-length of the truncated domain; chosen from the decay rate when omitted.
    #[arg(long = "L")]
    half_length: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    dx: f64,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Args)]
struct WaveArgs {
    #[arg(long = "P", allow_hyphen_values = true, value_parser = parse_num)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_num)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_num)]
    q: Option<f64>,
    /// Use the closed-form soliton at (P, c, q) = (13/6, 1, 1).
    #[arg(long)]
    explicit: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = ["exterior", "attractivity", "oracles", "all"])]
    suite: String,
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    parse_param(s).map_err(|e| e.to_string())
}

fn parse_num(s: &str) -> std::result::Result<f64, String> {
    maslov_core::problems::parse_number(s).map_err(|e| e.to_string())
}

fn run_scan(args: ScanArgs) -> Result<ExitCode> {
    let params: Params = args.params.into_iter().collect();
    let problem = get_problem(&args.problem, &params)?;
    let method: Method = args.method.parse()?;
    let opts = SolverOptions {
        half_length: args.half_length,
        dx: args.dx,
    };
    let lambdas = lambda_grid(args.lambda_min, args.lambda_max, args.grid)?;
    let table = scan(&problem, &lambdas, method, &opts)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match args.format.as_str() {
        "json" => {
            serde_json::to_writer_pretty(&mut out, &to_json(&table.rows))
                .map_err(io::Error::from)?;
            writeln!(out)?;
        }
        _ => write_csv(&table.rows, &mut out)?,
    }
    if table.disagreements.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for (l, a, i) in &table.disagreements {
        eprintln!("disagreement at lambda = {l}: angle {a}, intersection {i}");
    }
    Err(MaslovError::Disagreement(format!(
        "{} of {} rows",
        table.disagreements.len(),
        table.rows.len()
    )))
}

fn run_wave(args: WaveArgs) -> Result<ExitCode> {
    let explicit = WaveParams::explicit();
    let params = match (args.p, args.c, args.q) {
        (Some(p), Some(c), Some(q)) => WaveParams::new(p, c, q)?,
        (None, None, None) if args.explicit => explicit,
        _ => {
            return Err(MaslovError::InvalidParameter(
                "need all of --P, --c, --q (or --explicit alone)".into(),
            ))
        }
    };
    let profile = if args.explicit {
        if !params.is_explicit() {
            return Err(MaslovError::Precondition(format!(
                "--explicit requires (P, c, q) = (13/6, 1, 1), got ({}, {}, {})",
                params.p, params.c, params.q
            )));
        }
        WaveProfile::explicit()
    } else {
        shoot_symmetric(&params, &ShootOptions::default())?
    };
    eprintln!("residual {:.3e}", profile.residual());
    eprintln!("energy drift {:.3e}", profile.energy_drift());
    profile.save(&args.out)?;
    eprintln!(
        "wrote {} nodes to {}",
        profile.nodes().len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode> {
    let suite: Suite = args.suite.parse()?;
    let report = verify::run(suite);
    println!("{report}");
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Scan(a) => run_scan(a),
        Command::Wave(a) => run_wave(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
