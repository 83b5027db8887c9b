use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hida_core::harness::{self, CheckName, HarnessError, Instance, VerificationConfig, VerificationReport};

#[derive(Parser)]
#[command(name = "hida", version, about = "Ordinary Hecke modules of X1(N p^r): build, verify, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and cache symbol spaces, Hecke operators and group-ring modules.
    Build {
        #[command(flatten)]
        run: RunArgs,
        /// write the eigen packets of every built level to this JSON file
        #[arg(long)]
        packets: Option<PathBuf>,
    },
    /// Run the verification checks and write a JSON report.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// report destination; the JSON goes to stdout when omitted
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render a JSON report as text. Exits 0 iff the report passed.
    Report {
        input: PathBuf,
        /// print the JSON back instead of text
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// tame level
    #[arg(long = "N", requires = "p")]
    tame: Option<u64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = 1)]
    rmax: u32,
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    nmax: Option<u64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// CSV file of (level, n, a_n) rows; enables the oracle check
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// run only these checks (repeatable)
    #[arg(long = "check")]
    checks: Vec<CheckName>,
}

impl RunArgs {
    fn config(&self) -> Result<VerificationConfig, HarnessError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.clone(), source: e })?;
                serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?
            }
            None => VerificationConfig::default(),
        };
        if let (Some(tame), Some(p)) = (self.tame, self.p) {
            config.instances = vec![Instance::new(tame, p, self.rmax)];
        }
        if let Some(k) = self.precision {
            config.precision = k;
        }
        if self.nmax.is_some() {
            config.n_max = self.nmax;
        }
        if self.cache_dir.is_some() {
            config.cache_dir = self.cache_dir.clone();
        }
        if self.oracle.is_some() {
            config.oracle = self.oracle.clone();
        }
        if !self.checks.is_empty() {
            config.checks = self.checks.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

fn write_json(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e })
}

fn execute(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Build { run, packets } => {
            let config = run.config()?;
            let summary = harness::build(&config, packets.is_some())?;
            for l in &summary.levels {
                println!(
                    "level {:>5}: {} classes, quotient rank {}, cuspidal rank {}, ordinary rank {}, n_max {}",
                    l.level, l.symbol_classes, l.quotient_rank, l.cuspidal_rank, l.ordinary_rank, l.n_max
                );
            }
            if let (Some(path), Some(export)) = (packets, &summary.packets) {
                write_json(&path, &serde_json::to_string_pretty(export)?)?;
            }
            Ok(true)
        }
        Command::Verify { run, output } => {
            let config = run.config()?;
            let report = harness::run(&config)?;
            let json = report.to_json();
            match output {
                Some(path) => {
                    write_json(&path, &json)?;
                    print!("{}", report.render_text());
                }
                None => println!("{json}"),
            }
            Ok(report.passed)
        }
        Command::Report { input, json } => {
            let text = fs::read_to_string(&input).map_err(|e| HarnessError::Io { path: input.clone(), source: e })?;
            let report: VerificationReport = serde_json::from_str(&text)?;
            if report.schema_version != harness::SCHEMA_VERSION {
                return Err(HarnessError::Config(format!("unsupported report schema {}", report.schema_version)));
            }
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_text());
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
