use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use agi_metrics::ingest::{load_config_file, ReportFormat};
use agi_metrics::pipeline::{
    project, run, selfcheck, synthesize, to_flat_csv, to_json, write_synthetic_sources,
    SynthOptions,
};
use agi_metrics::{Error, ErrorKind};

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_SELFCHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "agi-metrics", version, about = "AGI technology-level index and its regression against real GDP")]
struct Cli {
    /// Report format; overrides the config's output.format.
    #[arg(long, global = true, value_enum)]
    output: Option<ReportFormat>,

    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in verification suites.
    Selfcheck,
    /// Project GDP growth from an assumed AGI growth rate.
    Project {
        #[arg(long)]
        config: PathBuf,
        /// AGI growth, percent per year.
        #[arg(long, allow_hyphen_values = true)]
        agi_growth: f64,
        #[arg(long)]
        years: u32,
    },
    /// Write a synthetic panel as four fred_csv files plus config.json.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1990)]
        first_year: i32,
        #[arg(long, default_value_t = 30)]
        years: usize,
        #[arg(long, default_value_t = 0.33)]
        alpha: f64,
        /// AGI trend growth, percent per year.
        #[arg(long, default_value_t = 3.0)]
        agi_growth: f64,
        /// Standard deviation of log-normal AGI shocks.
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write GDP as quarterly observations.
        #[arg(long)]
        quarterly_gdp: bool,
    },
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e.kind() {
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    })
}

fn render<T: serde::Serialize>(value: &T, format: ReportFormat) -> agi_metrics::Result<String> {
    match format {
        ReportFormat::Json => to_json(value),
        ReportFormat::Csv => to_flat_csv(value),
    }
}

fn emit(text: &str, dest: Option<&Path>) -> agi_metrics::Result<()> {
    match dest {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Source {
            path: path.to_path_buf(),
            source: Box::new(e.into()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let note = |msg: String| {
        if !cli.quiet {
            eprintln!("{msg}");
        }
    };
    let result = match &cli.command {
        Command::Run { config } => load_config_file(config).and_then(|cfg| {
            let report = run(&cfg)?;
            let format = cli.output.unwrap_or(cfg.output.format);
            let dest = cfg.output.path.as_ref().map(|p| cfg.resolve(p));
            emit(&render(&report, format)?, dest.as_deref())?;
            if let Some(d) = dest {
                note(format!("report written to {}", d.display()));
            }
            Ok(())
        }),
        Command::Selfcheck => {
            let summary = selfcheck();
            match cli.output {
                Some(f) => match render(&summary, f) {
                    Ok(text) => print!("{text}"),
                    Err(e) => return fail(&e),
                },
                None if !cli.quiet || !summary.passed() => print!("{}", summary.render()),
                None => {}
            }
            return if summary.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_SELFCHECK)
            };
        }
        Command::Project {
            config,
            agi_growth,
            years,
        } => load_config_file(config).and_then(|cfg| {
            let report = run(&cfg)?;
            let rows = project(&report.analysis, *agi_growth, *years)?;
            note(
                "projection: in-sample elasticity extrapolation, GDP growth = slope x AGI growth"
                    .to_string(),
            );
            emit(&render(&rows, cli.output.unwrap_or_default())?, None)
        }),
        Command::Synth {
            out_dir,
            first_year,
            years,
            alpha,
            agi_growth,
            noise,
            seed,
            quarterly_gdp,
        } => {
            let opts = SynthOptions {
                first_year: *first_year,
                years: *years,
                alpha: *alpha,
                agi_growth_pct: *agi_growth,
                agi_noise_sd: *noise,
                seed: *seed,
                ..SynthOptions::default()
            };
            synthesize(&opts)
                .and_then(|s| write_synthetic_sources(out_dir, &s, *quarterly_gdp))
                .map(|files| note(format!("wrote {} to {}", files.join(", "), out_dir.display())))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
