use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use divflow::harness::*;
use divflow::regint::QuadConfig;
use divflow::{Error, Result};

/// Environment variable naming a default configuration file.
const CONFIG_ENV: &str = "DIVFLOW_CONFIG";

#[derive(Parser)]
#[command(name = "divflow", version, about = "Spectral flow, eta invariants and divisor flow of symbol families")]
struct Cli {
    /// Quadrature configuration (JSON); defaults to $DIVFLOW_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Absolute tolerance of the radial quadrature.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Initial Gauss nodes per smooth piece of the path.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Seed for randomized families and suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Record wall time in the result (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectral flow of a Hermitian path.
    Sf(Io),
    /// Eta invariants of the matrix at s = 0.
    Eta {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1)]
        p: usize,
    },
    /// Divisor flow of a symbol family.
    Df {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        parity: Option<ParityArg>,
    },
    /// Regularized integral of an expression.
    Regint(Io),
    /// Suspend a Hermitian path and compare its divisor flow with the spectral flow.
    Suspend {
        #[command(flatten)]
        io: Io,
        #[arg(long, conflicts_with = "k")]
        p: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value = "+", value_parser = parse_sign, allow_hyphen_values = true)]
        sign: f64,
    },
    /// Run an invariant suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of eigenvalues and the reduced eta invariant along a path.
    Trace(Io),
}

fn parse_sign(s: &str) -> std::result::Result<f64, String> {
    match s {
        "+" | "plus" | "1" | "+1" => Ok(1.0),
        "-" | "minus" | "-1" => Ok(-1.0),
        _ => Err(format!("sign must be + or -, got `{s}`")),
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// Defaults, then the config file, then flags.
fn config(cli: &Cli) -> Result<QuadConfig> {
    let file = cli.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut cfg = match file {
        Some(f) => serde_json::from_str(&read(&f)?)?,
        None => QuadConfig::default(),
    };
    if let Some(t) = cli.tol {
        cfg.abs_tol = t;
    }
    if let Some(n) = cli.nodes {
        cfg.s_nodes = n;
    }
    if !(cfg.abs_tol > 0.0 && cfg.rel_tol > 0.0 && cfg.s_tol > 0.0 && cfg.r0 > 0.0) || cfg.s_nodes == 0 {
        return Err(Error::Precondition("tolerances, r0 and node counts must be positive".into()));
    }
    Ok(cfg)
}

fn family(cli: &Cli, io: &Io) -> Result<FamilySpec> {
    let mut spec = parse_family(&read(&io.input)?)?;
    if cli.seed.is_some() {
        spec.seed = cli.seed;
    }
    Ok(spec)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = config(cli)?;
    let start = Instant::now();
    let (mut rec, out) = match &cli.cmd {
        Cmd::Sf(io) => (cmd_sf(&family(cli, io)?, &cfg)?, &io.out),
        Cmd::Eta { io, p } => (cmd_eta(&family(cli, io)?, *p, &cfg)?, &io.out),
        Cmd::Df { io, k, parity } => {
            let parity = parity.map(|p| match p {
                ParityArg::Odd => Parity::Odd,
                ParityArg::Even => Parity::Even,
            });
            (cmd_df(&family(cli, io)?, *k, parity, &cfg)?, &io.out)
        }
        Cmd::Regint(io) => (cmd_regint(&parse_expr(&read(&io.input)?)?, &cfg)?, &io.out),
        Cmd::Suspend { io, p, k, sign } => {
            let how = match (p, k) {
                (_, Some(k)) => Suspension::Even { k: *k },
                (p, None) => Suspension::Odd { p: p.unwrap_or(1), sign: *sign },
            };
            (cmd_suspend(&family(cli, io)?, how, &cfg)?, &io.out)
        }
        Cmd::Verify { suite, out } => (cmd_verify(suite, cli.seed.unwrap_or(0), &cfg)?, out),
        Cmd::Trace(io) => {
            emit(&cmd_trace(&family(cli, io)?, &cfg)?, &io.out)?;
            return Ok(true);
        }
    };
    if cli.timing {
        rec.wall_time = Some(start.elapsed().as_secs_f64());
    }
    emit(&rec.to_json()?, out)?;
    Ok(rec.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("divflow: verification failed");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("divflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
