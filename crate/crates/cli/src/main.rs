//! `cvssagg` — score CVSS vectors, validate dependency graphs, and
//! aggregate a system's vulnerabilities into one severity value.
//!
//! Exit codes: 0 success, 1 domain or validation error, 2 usage error.
//! Stdout carries only payload; diagnostics go to stderr.

use std::error::Error;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cvssagg::cvss::{base_score, parse_vector, render_vector};
use cvssagg::factors::MeanKind;
use cvssagg::ingest::{load_context, load_graph};
use cvssagg::pipeline::assess;
use cvssagg::report::{build_report, render_explanation, render_report, ReportFormat};
use cvssagg::simlab::{render_csv, render_json, run_experiment, Shape, SimConfig, SimResult};

#[derive(Parser)]
#[command(
    name = "cvssagg",
    version,
    about = "Context-corrected aggregation of CVSS v3.1 scores over dependency graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the base score of a CVSS v3.1 vector string.
    Score {
        /// Vector such as AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H,
        /// optionally prefixed with CVSS:3.1/
        vector: String,
    },
    /// Validate a graph file and report every violation.
    Validate {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Run the full pipeline over a graph and deployment context.
    Aggregate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        context: PathBuf,
        /// Mean used for the average factor.
        #[arg(long, value_enum, default_value_t = SigmaArg::Arithmetic)]
        sigma: SigmaArg,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        /// Append the per-step factor math and contribution ranking
        /// (text format only).
        #[arg(long)]
        explain: bool,
    },
    /// Generate seeded synthetic datasets and compare aggregation
    /// strategies.
    Simulate {
        /// Scores per dataset (must be at least 1).
        #[arg(long, default_value_t = NonZeroUsize::new(64).unwrap())]
        size: NonZeroUsize,
        /// Distribution shape, or `all` to run every shape.
        #[arg(long, value_enum)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mean recorded in the run configuration; both means are
        /// always reported in the output columns.
        #[arg(long, value_enum, default_value_t = SigmaArg::Arithmetic)]
        sigma: SigmaArg,
        #[arg(long, value_enum, default_value_t = SimFormat::Csv)]
        format: SimFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaArg {
    Arithmetic,
    Harmonic,
}

impl From<SigmaArg> for MeanKind {
    fn from(value: SigmaArg) -> Self {
        match value {
            SigmaArg::Arithmetic => MeanKind::Arithmetic,
            SigmaArg::Harmonic => MeanKind::Harmonic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Centered,
    HighHeavy,
    LowHeavy,
    Bimodal,
    Uniform,
    All,
}

impl ShapeArg {
    fn shapes(self) -> Vec<Shape> {
        match self {
            ShapeArg::Centered => vec![Shape::Centered],
            ShapeArg::HighHeavy => vec![Shape::HighHeavy],
            ShapeArg::LowHeavy => vec![Shape::LowHeavy],
            ShapeArg::Bimodal => vec![Shape::Bimodal],
            ShapeArg::Uniform => vec![Shape::Uniform],
            ShapeArg::All => Shape::ALL.to_vec(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(payload) => {
            emit(&payload);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(1)
        }
    }
}

// Write the payload in one go; a closed pipe downstream is not an
// error worth a panic.
fn emit(payload: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(err) = out.write_all(payload.as_bytes()).and_then(|()| out.flush()) {
        if err.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("cannot write to stdout: {err}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<String, Box<dyn Error>> {
    match command {
        Command::Score { vector } => {
            let parsed = parse_vector(&vector)?;
            Ok(format!(
                "{}\n{}\n",
                base_score(&parsed),
                render_vector(&parsed)
            ))
        }
        Command::Validate { graph } => {
            load_graph(&graph)?;
            Ok("ok\n".to_string())
        }
        Command::Aggregate {
            graph,
            context,
            sigma,
            format,
            explain,
        } => {
            let graph = load_graph(&graph)?;
            let ctx = load_context(&context)?;
            let assessment = assess(&graph, &ctx, sigma.into())?;
            let report = build_report(&assessment);
            Ok(match format {
                OutputFormat::Text => {
                    let mut payload = render_report(&report, ReportFormat::Text);
                    if explain {
                        payload.push('\n');
                        payload.push_str(&render_explanation(&report));
                    }
                    payload
                }
                OutputFormat::Json => render_report(&report, ReportFormat::Json),
            })
        }
        Command::Simulate {
            size,
            shape,
            seed,
            sigma,
            format,
        } => {
            let results: Vec<SimResult> = shape
                .shapes()
                .into_iter()
                .map(|shape| {
                    let mut cfg = SimConfig::new(shape, seed);
                    cfg.dataset_size = size.get();
                    cfg.sigma_kind = sigma.into();
                    run_experiment(&cfg)
                })
                .collect();
            Ok(match format {
                SimFormat::Csv => render_csv(&results),
                SimFormat::Json => render_json(&results),
            })
        }
    }
}
