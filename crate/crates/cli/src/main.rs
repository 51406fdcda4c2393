//! `lab`: command-line runner for the historic-behavior workbench.
//!
//! Exit status: 0 on success, 2 on configuration errors, 3 when an
//! operation fails or a verification check does not pass.

mod config;
mod error;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{load_json, parse_count, ExperimentConfig, Operation, SEED_ENV};
use error::CliError;
use run::{run_experiment, ReportBundle};

#[derive(Parser, Debug)]
#[command(name = "lab", version, about = "Irregular Birkhoff averages, pressure and dimension on symbolic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describe a shift space.
    Space {
        what: SpaceWhat,
        #[command(flatten)]
        common: Common,
    },
    /// Kneading digits of 1 in base β.
    Beta {
        what: BetaWhat,
        #[command(flatten)]
        common: Common,
    },
    /// Exact integrals of observables.
    Measure {
        what: MeasureWhat,
        #[command(flatten)]
        common: Common,
    },
    /// Birkhoff averages of observables along a point.
    Trace {
        #[command(flatten)]
        common: Common,
    },
    /// Construct points with prescribed averages.
    Synth {
        kind: SynthKind,
        #[command(flatten)]
        common: Common,
    },
    /// Pressure, entropy and BS-dimension.
    Pressure {
        kind: PressureKind,
        #[command(flatten)]
        common: Common,
    },
    /// Worked example on the doubling map.
    Demo {
        what: DemoWhat,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance checks.
    Verify {
        what: VerifyWhat,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceWhat {
    Info,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BetaWhat {
    Kneading,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeasureWhat {
    Integrate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SynthKind {
    Irregular,
    Jointly,
    Saturated,
    Gmax,
    Family,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PressureKind {
    Transfer,
    Cylinder,
    Bsdim,
    Beta,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DemoWhat {
    Section4,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerifyWhat {
    All,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Experiment configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Space description file.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Measure description files.
    #[arg(long, num_args = 1..)]
    measures: Vec<PathBuf>,
    /// Observable description files.
    #[arg(long, num_args = 1..)]
    observables: Vec<PathBuf>,
    /// Point description file.
    #[arg(long)]
    point: Option<PathBuf>,
    /// `default` or a schedule description file.
    #[arg(long)]
    schedule: Option<String>,
    /// Number of symbols, e.g. `1000000`, `1e6` or `10^6`.
    #[arg(long, value_parser = parse_count)]
    horizon: Option<usize>,
    /// Seed; takes precedence over LAB_SEED and the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output files, comma separated; `.csv` paths receive the trace.
    #[arg(long, value_delimiter = ',')]
    out: Vec<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// `geometric:<r>`, `block_ends`, `block_tails:<count>:<spacing>` or `explicit:<n>,…`.
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    digits: Option<usize>,
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Word length for cylinder estimates and families.
    #[arg(long, value_parser = parse_count)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Cylinder pattern, `.` for a free position.
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    free_fraction: Option<f64>,
    #[arg(long)]
    block_len: Option<usize>,
    #[arg(long)]
    max_frequency: Option<u32>,
}

impl Command {
    fn split(self) -> (Operation, Common) {
        match self {
            Command::Space { common, .. } => (Operation::SpaceInfo, common),
            Command::Beta { common, .. } => (Operation::BetaKneading, common),
            Command::Measure { common, .. } => (Operation::MeasureIntegrate, common),
            Command::Trace { common } => (Operation::Trace, common),
            Command::Synth { kind, common } => (
                match kind {
                    SynthKind::Irregular => Operation::SynthIrregular,
                    SynthKind::Jointly => Operation::SynthJointly,
                    SynthKind::Saturated => Operation::SynthSaturated,
                    SynthKind::Gmax => Operation::SynthGmax,
                    SynthKind::Family => Operation::SynthFamily,
                },
                common,
            ),
            Command::Pressure { kind, common } => (
                match kind {
                    PressureKind::Transfer => Operation::PressureTransfer,
                    PressureKind::Cylinder => Operation::PressureCylinder,
                    PressureKind::Bsdim => Operation::PressureBsdim,
                    PressureKind::Beta => Operation::PressureBeta,
                },
                common,
            ),
            Command::Demo { common, .. } => (Operation::DemoSection4, common),
            Command::Verify { common, .. } => (Operation::VerifyAll, common),
        }
    }
}

fn build_config(operation: Operation, c: Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &c.config {
        Some(path) => {
            let mut cfg: ExperimentConfig = load_json(path)?;
            cfg.operation = operation;
            cfg
        }
        None => ExperimentConfig::new(operation),
    };
    if let Some(p) = &c.space {
        cfg.space = Some(load_json(p)?);
    }
    if !c.measures.is_empty() {
        cfg.measures = c.measures.iter().map(|p| load_json(p)).collect::<Result<_, _>>()?;
    }
    if !c.observables.is_empty() {
        cfg.observables = c.observables.iter().map(|p| load_json(p)).collect::<Result<_, _>>()?;
    }
    if let Some(p) = &c.point {
        cfg.point = Some(load_json(p)?);
    }
    match c.schedule.as_deref() {
        None => {}
        Some("default") => cfg.schedule = None,
        Some(path) => cfg.schedule = Some(load_json(Path::new(path))?),
    }
    cfg.horizon = c.horizon.or(cfg.horizon);
    cfg.tol = c.tol.or(cfg.tol);
    cfg.checkpoints = c.checkpoints.or(cfg.checkpoints);
    if !c.out.is_empty() {
        cfg.output = c.out.into_iter().filter(|s| !s.is_empty()).collect();
    }
    let p = &mut cfg.params;
    p.beta = c.beta.or(p.beta.take());
    p.digits = c.digits.or(p.digits);
    p.precision_bits = c.precision_bits.or(p.precision_bits);
    p.n = c.n.or(p.n);
    if !c.n_list.is_empty() {
        p.n_list = c.n_list;
    }
    p.pattern = c.pattern.or(p.pattern.take());
    p.free_fraction = c.free_fraction.or(p.free_fraction);
    p.block_len = c.block_len.or(p.block_len);
    p.max_frequency = c.max_frequency.or(p.max_frequency);
    let env = std::env::var(SEED_ENV).ok();
    cfg.resolve_seed(c.seed, env.as_deref())?;
    Ok(cfg)
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

fn emit(cfg: &ExperimentConfig, bundle: &ReportBundle) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(&bundle.json).expect("serializable") + "\n";
    if cfg.output.is_empty() {
        print!("{json}");
        if let Some(csv) = &bundle.csv {
            eprintln!("{} trace rows not written (no .csv path in --out)", csv.lines().count() - 1);
        }
        eprintln!("{}", bundle.summary);
        return Ok(());
    }
    for out in &cfg.output {
        let path = Path::new(out);
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            let csv = bundle
                .csv
                .as_ref()
                .ok_or_else(|| CliError::Config(format!("{}: {} produces no trace", out, cfg.operation)))?;
            write_atomic(path, csv)?;
        } else {
            write_atomic(path, &json)?;
        }
    }
    println!("{}", bundle.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (operation, common) = cli.command.split();
    let result = build_config(operation, common).and_then(|cfg| {
        let bundle = run_experiment(&cfg)?;
        emit(&cfg, &bundle)?;
        Ok(bundle.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
