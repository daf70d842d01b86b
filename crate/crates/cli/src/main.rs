//! `tinysinc`: certified thresholds, sums, and tiny deficits for the
//! sinc-product integrals `(Pi/2) * (1 - t)`.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{apply_setting, load_config_file, OutputFormat, RunConfig};
use output::{render, TableShape};
use tinysinc_core::Error;

#[derive(Parser)]
#[command(name = "tinysinc", version, about = "Tiny deficits of sinc-product integrals, certified")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified threshold indices n0 per a0
    Threshold(RunArgs),
    /// Certified sums: excess s(n0) - a0 and its error bound per a0
    Sums(RunArgs),
    /// Tiny deficits t with certified digit counts per a0
    Tiny(RunArgs),
    /// Cross-checks: dual-method band, Stirling containment, identities, cache health
    Verify(RunArgs),
    /// Brute-force reference runs (exact rational / high-precision decimal)
    Oracle(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Single a0 value
    #[arg(long, conflicts_with = "range")]
    a0: Option<u32>,
    /// Inclusive range A..B of a0 values
    #[arg(long, value_parser = parse_range)]
    range: Option<(u32, u32)>,
    /// Plain key=value config file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,

    /// Split point of the odd-harmonic sum (1 + initial terms)
    #[arg(long)]
    m1: Option<u64>,
    /// Derivative correction terms for the odd-harmonic sum
    #[arg(long)]
    mu1: Option<u32>,
    /// Decimals kept in the odd-harmonic initial block
    #[arg(long)]
    ndec1: Option<u32>,
    /// Root-finding accuracy goal (decimal digits)
    #[arg(long)]
    acc1: Option<u32>,
    /// Working precision for the sum path (decimal digits)
    #[arg(long)]
    wp1: Option<u32>,
    /// Split point of the log-factorial sum
    #[arg(long)]
    m2: Option<u64>,
    /// Derivative correction terms for the log-factorial sum
    #[arg(long)]
    mu2: Option<u32>,
    /// Decimals kept in the log initial block
    #[arg(long)]
    ndec2: Option<u32>,
    /// Working precision for the factorial path (decimal digits)
    #[arg(long)]
    wp2: Option<u32>,

    /// Output format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Cache directory (default: $TINYSINC_CACHE or ./.tinysinc-cache)
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Enable desk-scale-exceeding exact checks (hundreds of millions of digits)
    #[arg(long)]
    heavy: bool,
    /// Reproduce the machine-precision failure mode (oracle command)
    #[arg(long = "demo-machine-precision")]
    demo_machine_precision: bool,
    /// On precision exhaustion return mantissa 1 instead of failing
    #[arg(long = "compat-getme")]
    compat_getme: bool,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a = a.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<u32>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

impl RunArgs {
    fn build_config(&self) -> Result<RunConfig, Error> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            load_config_file(&mut config, path)?;
        }
        let numeric: [(&str, Option<u64>); 9] = [
            ("m1", self.m1),
            ("mu1", self.mu1.map(u64::from)),
            ("ndec1", self.ndec1.map(u64::from)),
            ("acc1", self.acc1.map(u64::from)),
            ("wp1", self.wp1.map(u64::from)),
            ("m2", self.m2),
            ("mu2", self.mu2.map(u64::from)),
            ("ndec2", self.ndec2.map(u64::from)),
            ("wp2", self.wp2.map(u64::from)),
        ];
        for (key, value) in numeric {
            if let Some(v) = value {
                apply_setting(&mut config, key, &v.to_string())?;
            }
        }
        if let Some(f) = self.format {
            config.format = f;
        }
        if let Some(dir) = &self.cache {
            config.cache_dir = dir.clone();
        }
        if self.heavy {
            config.heavy = true;
        }
        if self.demo_machine_precision {
            config.demo_machine_precision = true;
        }
        if self.compat_getme {
            apply_setting(&mut config, "compat-getme", "true")?;
        }
        // keep the factorial-path invariant wp >= 2*acc satisfied
        let fp = &mut config.pipeline.fact_params;
        if fp.working_digits < 2 * fp.accuracy_goal {
            fp.accuracy_goal = fp.working_digits / 2;
        }
        Ok(config)
    }

    fn range_or(&self, default: (u32, u32)) -> (u32, u32) {
        if let Some(a0) = self.a0 {
            (a0, a0)
        } else {
            self.range.unwrap_or(default)
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) | Error::Precondition(_) | Error::BudgetExceeded(_) => 2,
        Error::Cache { .. } | Error::Io(_) => 4,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Threshold(args) => {
            let config = args.build_config()?;
            let range = args.range_or((10, 25));
            commands::validate_em_range(range, &config)?;
            let rows = commands::table_rows(range, &config)?;
            print!("{}", render(&rows, config.format, TableShape::Threshold));
        }
        Command::Sums(args) => {
            let config = args.build_config()?;
            let range = args.range_or((10, 25));
            commands::validate_em_range(range, &config)?;
            let rows = commands::table_rows(range, &config)?;
            print!("{}", render(&rows, config.format, TableShape::Sums));
        }
        Command::Tiny(args) => {
            let config = args.build_config()?;
            let range = args.range_or((10, 25));
            let rows = commands::table_rows(range, &config)?;
            print!("{}", render(&rows, config.format, TableShape::Tiny));
        }
        Command::Verify(args) => {
            let config = args.build_config()?;
            let range = args.range_or((9, 10));
            let checks = commands::verify_checks(range, &config)?;
            let mut any_failed = false;
            for line in &checks {
                println!(
                    "{} {}",
                    if line.passed { "PASS" } else { "FAIL" },
                    line.text
                );
                any_failed |= !line.passed;
            }
            if any_failed {
                return Err(Error::ConditionViolated("verification failed".into()));
            }
        }
        Command::Oracle(args) => {
            let config = args.build_config()?;
            let range = args.range_or((1, 8));
            let rows = commands::oracle_rows(range, &config)?;
            print!("{}", render(&rows, config.format, TableShape::Tiny));
            let mut stdout = std::io::stdout();
            commands::oracle_extras(range, &config, &mut stdout)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
