use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use minimax_cert::cli::{self, CliError};
use minimax_cert::config::{OutputFormat, RunConfig, Stages};

/// Certify first- and second-order optimality conditions for calm local
/// minimax points of coupled-constrained smooth minimax problems.
#[derive(Parser)]
#[command(name = "minimax-cert", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the certification pipeline on a problem file.
    Certify(RunArgs),
    /// Run only the grid oracle stage.
    Oracle(RunArgs),
    /// Render a JSON report as prose.
    Explain { report: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Problem file (line-oriented key = value format).
    file: PathBuf,
    /// Candidate x, comma separated (overrides point_x in the file).
    #[arg(long)]
    x: Option<String>,
    /// Candidate y, comma separated (overrides point_y in the file).
    #[arg(long)]
    y: Option<String>,
    /// Stage selection, comma separated subset of first,second,jacobian,oracle.
    #[arg(long)]
    stages: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Grid points per axis for the oracle stage.
    #[arg(long)]
    resolution: Option<usize>,
    /// Localization radii for the oracle stage, comma separated.
    #[arg(long)]
    delta: Option<String>,
    /// Calmness modulus override for the oracle stage.
    #[arg(long)]
    kappa: Option<f64>,
    /// Direction budget per cone.
    #[arg(long)]
    budget: Option<usize>,
    /// Stop after the first refuted stage.
    #[arg(long)]
    fail_fast: bool,
    /// Activation tolerance override.
    #[arg(long)]
    eps_act: Option<f64>,
}

fn parse_csv(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad {what} entry `{part}`")))
        })
        .collect()
}

fn build_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    cfg.seed = cli::seed_from_env();
    cfg.format = match args.format {
        FormatArg::Text => OutputFormat::Text,
        FormatArg::Json => OutputFormat::Json,
    };
    if let Some(r) = args.resolution {
        cfg.resolution = r;
    }
    if let Some(d) = &args.delta {
        cfg.deltas = parse_csv(d, "delta")?;
    }
    if let Some(k) = args.kappa {
        cfg.kappa = Some(k);
    }
    if let Some(b) = args.budget {
        cfg.budget = b;
    }
    if let Some(e) = args.eps_act {
        cfg.eps_act = Some(e);
    }
    cfg.fail_fast = args.fail_fast;
    if let Some(stages) = &args.stages {
        let mut sel = Stages {
            first: false,
            second: false,
            jacobian: false,
            oracle: false,
        };
        for token in stages.split(',') {
            match token.trim() {
                "first" => sel.first = true,
                "second" => sel.second = true,
                "jacobian" => sel.jacobian = true,
                "oracle" => sel.oracle = true,
                other => {
                    return Err(CliError::Input(format!(
                        "unknown stage `{other}` (expected first,second,jacobian,oracle)"
                    )))
                }
            }
        }
        cfg.stages = sel;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(String, i32), CliError> {
    match cli.command {
        Command::Certify(args) => {
            let cfg = build_config(&args)?;
            let x = args.x.as_deref().map(|s| parse_csv(s, "x")).transpose()?;
            let y = args.y.as_deref().map(|s| parse_csv(s, "y")).transpose()?;
            let report = cli::run_certify(&args.file, x, y, &cfg)?;
            Ok((cli::emit(&report)?, report.overall.exit_code()))
        }
        Command::Oracle(args) => {
            let cfg = build_config(&args)?;
            let x = args.x.as_deref().map(|s| parse_csv(s, "x")).transpose()?;
            let y = args.y.as_deref().map(|s| parse_csv(s, "y")).transpose()?;
            let report = cli::run_oracle(&args.file, x, y, &cfg)?;
            let code = report
                .oracle
                .as_ref()
                .map(|o| o.overall.exit_code())
                .unwrap_or(2);
            Ok((cli::emit(&report)?, code))
        }
        Command::Explain { report } => {
            let text = cli::run_explain(&report)?;
            Ok((text, 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((output, code)) => {
            print!("{output}");
            if !output.ends_with('\n') {
                println!();
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
