//! `dforge`: run the verified proof pipeline for one equation family and
//! emit the certificate.
//!
//! Exit codes: 0 on success, 2 when a stage contradicts its reference value
//! (under `--paper-check strict`, or for a wrong solution list in any mode),
//! 3 on an internal stage failure.

use clap::{Parser, ValueEnum};
use dforge_core::cert::Verdict;
use dforge_core::{
    run_pipeline, CheckMode, PipelineConfig, ProofCertificate, StageSelect, StrategyRegistry,
    DEFAULT_PRECISION_BITS,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable overriding the default working precision.
const PRECISION_ENV: &str = "DFORGE_PRECISION_BITS";

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StageArg {
    All,
    Bounds,
    Reduce,
    Search,
}

impl From<StageArg> for StageSelect {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::All => StageSelect::All,
            StageArg::Bounds => StageSelect::Bounds,
            StageArg::Reduce => StageSelect::Reduce,
            StageArg::Search => StageSelect::Search,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckArg {
    /// Nonzero exit on any discrepancy verdict.
    Strict,
    /// Report discrepancies; only a wrong solution list fails the run.
    Report,
}

impl From<CheckArg> for CheckMode {
    fn from(c: CheckArg) -> Self {
        match c {
            CheckArg::Strict => CheckMode::Strict,
            CheckArg::Report => CheckMode::Report,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "dforge",
    version,
    about = "Decides L_m^(n+k)+L_m^n = L_r and P_m^(n+k)+P_m^n = P_r (m, n >= 2) \
             with certified interval arithmetic and emits a proof certificate"
)]
struct Cli {
    /// Equation family to run (a registry name: lucas or pell).
    #[arg(long)]
    equation: String,

    /// Working precision in bits (default 192, or DFORGE_PRECISION_BITS).
    #[arg(long)]
    precision_bits: Option<u32>,

    /// Pipeline stages to run.
    #[arg(long, value_enum, default_value_t = StageArg::All)]
    stage: StageArg,

    /// Write the certificate to this path (stdout when omitted).
    #[arg(long)]
    certificate: Option<PathBuf>,

    /// How reference mismatches affect the exit code.
    #[arg(long, value_enum, default_value_t = CheckArg::Strict)]
    paper_check: CheckArg,

    /// Worker threads for the per-base reductions and the search
    /// (default: rayon's choice). Never affects certificate content.
    #[arg(long)]
    threads: Option<usize>,
}

fn precision_from_env() -> Option<u32> {
    std::env::var(PRECISION_ENV).ok().and_then(|v| {
        v.trim().parse().ok().or_else(|| {
            eprintln!("warning: ignoring unparsable {PRECISION_ENV}={v}");
            None
        })
    })
}

fn print_summary(cert: &ProofCertificate) {
    for stage in &cert.stages {
        let verdict = match stage.verdict {
            Verdict::Matches => "matches",
            Verdict::Conservative => "conservative",
            Verdict::Discrepancy => "DISCREPANCY",
        };
        let reference = stage
            .reference
            .as_deref()
            .map(|r| format!(" (reference {r})"))
            .unwrap_or_default();
        eprintln!(
            "{:<13} {}: {}{}",
            format!("[{verdict}]"),
            stage.name,
            stage.computed,
            reference
        );
    }
    eprintln!(
        "{}: solutions {} -> {:?}",
        cert.equation,
        dforge_core::pipeline::format_solutions(
            &cert
                .solutions
                .iter()
                .map(|s| dforge_core::SolutionTuple {
                    r: s.r,
                    m: s.m,
                    n: s.n,
                    k: s.k,
                })
                .collect::<Vec<_>>()
        ),
        cert.verdict
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let registry = StrategyRegistry::builtin();
    let Some(strategy) = registry.get(&cli.equation) else {
        eprintln!(
            "unknown equation {:?}; available: {:?}",
            cli.equation,
            registry.names()
        );
        return ExitCode::from(3);
    };

    let cfg = PipelineConfig {
        precision_bits: cli
            .precision_bits
            .or_else(precision_from_env)
            .unwrap_or(DEFAULT_PRECISION_BITS),
        stage: cli.stage.into(),
        check: cli.paper_check.into(),
        threads: cli.threads,
        ..PipelineConfig::default()
    };

    let cert = match run_pipeline(strategy, &cfg) {
        Ok(cert) => cert,
        Err(e) => {
            eprintln!("pipeline failed: {e}");
            return ExitCode::from(3);
        }
    };

    print_summary(&cert);

    let json = cert.to_json();
    match &cli.certificate {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("cannot write certificate to {}: {e}", path.display());
                return ExitCode::from(3);
            }
            eprintln!("certificate written to {}", path.display());
        }
        None => print!("{json}"),
    }

    let solutions_ok = cert
        .stage("search.solutions")
        .map(|s| s.verdict != Verdict::Discrepancy)
        .unwrap_or(true);
    let failed = match cfg.check {
        CheckMode::Strict => cert.has_discrepancy(),
        CheckMode::Report => !solutions_ok,
    };
    if failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
