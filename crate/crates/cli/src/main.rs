use clap::{Args, Parser, Subcommand, ValueEnum};
use grassmann_core::config::{parse_mode, ConfigError, PrepotentialConfig};
use grassmann_core::report;
use grassmann_core::spectra::{self, Group};
use grassmann_core::verify::{self, VerifyOptions};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "grassmann-gauge", version, about = "Canonical 4-form spectra and half-flat gauge pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectra of B_Ω for canonical 4-forms
    Forms {
        #[command(subcommand)]
        cmd: FormsCmd,
    },
    /// Gauge field construction from a prepotential file
    Gauge {
        #[command(subcommand)]
        cmd: GaugeCmd,
    },
    /// Acceptance checks
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum FormsCmd {
    Spectrum {
        #[arg(long, value_parser = parse_group)]
        group: Group,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum GaugeCmd {
    Build {
        #[arg(long)]
        config: PathBuf,
        /// halfflat, 0partial or 1partial; defaults to the file's mode
        #[arg(long)]
        mode: Option<String>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    All {
        /// Run only these criteria
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Symplectic form on H as four integers, row major
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        eps: Option<Vec<i64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the JSON report here
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_group(s: &str) -> Result<Group, String> {
    Group::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Group::ALL.iter().map(|g| g.name()).collect();
        format!("unknown group '{s}', expected one of {}", names.join(", "))
    })
}

fn emit<T: Serialize>(value: &T, text: String, out: &Output) -> Result<(), u8> {
    let json = serde_json::to_string_pretty(value).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FAIL
    })?;
    let body = match out.format {
        Format::Text => text,
        Format::Json => format!("{json}\n"),
    };
    let _ = std::io::stdout().lock().write_all(body.as_bytes());
    if let Some(path) = &out.output {
        std::fs::write(path, format!("{json}\n")).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_USAGE
        })?;
    }
    Ok(())
}

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn max_degree_override() -> Result<Option<usize>, u8> {
    match std::env::var("GG_MAX_DEGREE") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| usage(format!("GG_MAX_DEGREE must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn forms_spectrum(group: Group, m: Option<usize>, n: Option<usize>, out: &Output) -> Result<(), u8> {
    let r = spectra::report(group, m, n).map_err(|e| {
        if e.is_usage() {
            usage(e)
        } else {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    })?;
    emit(&r, r.to_text(), out)?;
    if r.passed {
        Ok(())
    } else {
        Err(EXIT_FAIL)
    }
}

fn gauge_build(config: &PathBuf, mode: Option<&str>, out: &Output) -> Result<(), u8> {
    let mode = match mode {
        Some(s) => Some(parse_mode(s).ok_or_else(|| usage(format!("unknown mode '{s}'")))?),
        None => None,
    };
    let cfg = PrepotentialConfig::load(config).map_err(usage)?;
    let prepared = cfg.prepare(mode, max_degree_override()?).map_err(|e| match e {
        ConfigError::Parse(p) => usage(format!("{}: {p}", config.display())),
        other => usage(other),
    })?;
    let r = report::build(&prepared).map_err(|e| {
        if report::is_input_rejection(&e) {
            usage(e)
        } else {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    })?;
    emit(&r, r.to_text(), out)?;
    if r.passed {
        Ok(())
    } else {
        Err(EXIT_FAIL)
    }
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: &'static str,
    criteria: Vec<verify::CriterionResult>,
    passed_count: usize,
    total: usize,
    passed: bool,
}

fn verify_all(only: &[u8], eps: Option<&[i64]>, seed: Option<u64>, out: &Output) -> Result<(), u8> {
    let mut opts = VerifyOptions::default();
    if let Some(e) = eps {
        if e.len() != 4 {
            return Err(usage("--eps takes four integers"));
        }
        opts.eps = [[e[0], e[1]], [e[2], e[3]]];
    }
    if let Some(s) = seed {
        opts.seed = s;
    }
    if let Some(bad) = only.iter().find(|&&i| !(1..=12).contains(&i)) {
        return Err(usage(format!("no criterion {bad}")));
    }
    let ids: Vec<u8> = if only.is_empty() { (1..=12).collect() } else { only.to_vec() };
    let criteria: Vec<_> = ids.iter().map(|&i| verify::run(i, &opts)).collect();
    let passed_count = criteria.iter().filter(|c| c.passed).count();
    let mut text = String::new();
    for c in &criteria {
        text.push_str(&format!(
            "[{:>2}] {} {}: {}\n",
            c.id,
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    text.push_str(&format!("{passed_count}/{} criteria pass\n", criteria.len()));
    let r = VerifyReport {
        schema_version: "grassmann-gauge/verify/1",
        total: criteria.len(),
        passed: passed_count == criteria.len(),
        passed_count,
        criteria,
    };
    emit(&r, text, out)?;
    if r.passed {
        Ok(())
    } else {
        Err(EXIT_FAIL)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Forms {
            cmd: FormsCmd::Spectrum { group, m, n, out },
        } => forms_spectrum(*group, *m, *n, out),
        Command::Gauge {
            cmd: GaugeCmd::Build { config, mode, out },
        } => gauge_build(config, mode.as_deref(), out),
        Command::Verify {
            cmd: VerifyCmd::All { only, eps, seed, out },
        } => verify_all(only, eps.as_deref(), *seed, out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
