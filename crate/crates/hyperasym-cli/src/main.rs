//! `hyperasym` command line: reads a problem file, prints a report.
//!
//! Exit codes: 0 success, 1 internal failure, 2 input error,
//! 3 unsupported non-generic configuration, 4 undecidable at the precision cap.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperasym::io::{self, ProblemFile, Report, RunError, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hyperasym", version, about = "Coefficient asymptotics for rational functions with linear-form denominators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 256)]
    precision: u32,
    /// Precision cap in bits for escalation.
    #[arg(long, global = true, default_value_t = 4096)]
    max_precision: u32,
    /// Largest coordinate index the exact oracle may expand to.
    #[arg(long, global = true)]
    degree_cap: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full pipeline: arrangement, decomposition, critical points, dominant term.
    Analyze { file: PathBuf },
    /// Critical-point table only.
    CriticalPoints { file: PathBuf },
    /// Partial-fraction decomposition with provenance.
    Decompose {
        file: PathBuf,
        /// Total degree of the exhaustive exact check.
        #[arg(long, default_value_t = 10)]
        verify_degree: usize,
        /// Number of seeded random indices checked beyond that degree.
        #[arg(long, default_value_t = 0)]
        spot_checks: usize,
    },
    /// One Taylor coefficient from the exact oracle.
    Coeff {
        file: PathBuf,
        /// Comma-separated multi-index, e.g. `30,30`.
        #[arg(long, value_delimiter = ',', required = true)]
        index: Vec<usize>,
    },
    /// Analysis plus oracle ratios along the direction.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 40)]
        nmax: usize,
        /// Allowed |ratio − 1| at `nmax`.
        #[arg(long, default_value_t = 0.15)]
        tolerance: f64,
    },
    /// Two-variable plot data: lines, critical points, cone rays.
    PlotData {
        file: PathBuf,
        /// `x_min,x_max,y_min,y_max` as rationals; fitted to the points if absent.
        #[arg(long = "box", allow_hyphen_values = true)]
        bbox: Option<String>,
        /// Also write an SVG rendering to this path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn read_problem(path: &PathBuf) -> Result<ProblemFile, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
    Ok(ProblemFile::parse(&text)?)
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    }
}

fn run(cli: Cli) -> Result<(String, i32), RunError> {
    let g = &cli.global;
    let mut opts = RunOptions {
        precision: g.precision,
        max_precision: g.max_precision,
        degree_cap: g.degree_cap,
        seed: g.seed,
        ..RunOptions::default()
    };
    let report = match &cli.command {
        Command::Analyze { file } => io::analyze(&read_problem(file)?, &opts)?,
        Command::CriticalPoints { file } => io::critical_points(&read_problem(file)?, &opts)?,
        Command::Decompose {
            file,
            verify_degree,
            spot_checks,
        } => {
            opts.verify_degree = *verify_degree;
            opts.spot_checks = *spot_checks;
            io::decompose(&read_problem(file)?, &opts)?
        }
        Command::Coeff { file, index } => io::coeff(&read_problem(file)?, index, &opts)?,
        Command::Verify { file, nmax, tolerance } => {
            opts.nmax = *nmax;
            opts.tolerance = *tolerance;
            io::verify(&read_problem(file)?, &opts)?
        }
        Command::PlotData { file, bbox, svg } => {
            let bbox = match bbox {
                Some(v) => {
                    let q = v
                        .split(',')
                        .map(io::commands::parse_rational_arg)
                        .collect::<Result<Vec<_>, _>>()?;
                    let [a, b, c, d]: [_; 4] = q
                        .try_into()
                        .map_err(|_| RunError::Input("--box needs four comma-separated values".into()))?;
                    Some([a, b, c, d])
                }
                None => None,
            };
            let doc = io::plot_data(&read_problem(file)?, bbox, &opts)?;
            if let Some(path) = svg {
                std::fs::write(path, doc.to_svg()).map_err(|e| RunError::Failed(format!("{}: {e}", path.display())))?;
            }
            return Ok((doc.to_json(), 0));
        }
    };
    let code = if report.undecided_at_cap { 4 } else { 0 };
    Ok((render(&report, g.format), code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
