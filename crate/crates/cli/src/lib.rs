//! Command-line driver: builds the protocols, runs the analyses and writes
//! JSON, CSV or table reports. Exit codes: 0 when every check passes, 1
//! when a check fails, 2 on a usage error.

pub mod commands;
pub mod config;
pub mod report;
pub mod reproduce;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use commands::{IpOptions, MeasureChoice, QuantitySelector, SchemeKind};
use config::Config;
use report::{Format, ReportDocument, Section};
use reproduce::Selection;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or inputs outside the supported range.
    Usage(String),
    /// An analysis could not be completed.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAIL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failed(m) => write!(f, "analysis failed: {m}"),
        }
    }
}

impl From<qpriv_core::Error> for CliError {
    fn from(e: qpriv_core::Error) -> Self {
        use qpriv_core::Error as E;
        match e {
            E::WidthCap { .. } | E::OutOfRange(_) | E::Budget(_) | E::InputOutOfRange(_) | E::Length(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qpriv", version, about = "Privacy analysis of two-party quantum protocols")]
pub struct Cli {
    /// Output format [default: table].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with sweep lists and defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps and exhaustive checks.
    #[arg(long, global = true, env = "QPRIV_WORKERS")]
    pub workers: Option<usize>,
    /// Record wall-clock durations in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_measure(s: &str) -> Result<MeasureChoice, String> {
    if s == "never" {
        return Ok(None);
    }
    s.parse::<usize>().map(Some).map_err(|_| format!("expected a round number or `never`, got {s:?}"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inner-product protocol: losses, costs, reference values.
    Ip {
        /// Input length in bits.
        #[arg(long)]
        n: Option<usize>,
        /// Also analyze the split protocol at these split points.
        #[arg(long, value_delimiter = ',')]
        t: Vec<usize>,
        /// Measurement rounds for the superposed cost (`never` allowed).
        #[arg(long, value_delimiter = ',', value_parser = parse_measure)]
        measure_after: Vec<MeasureChoice>,
        #[arg(long, value_enum)]
        quantity: Option<QuantitySelector>,
    },
    /// Classical PIR scheme and its one-server quantum simulation.
    Pir {
        #[arg(long, value_enum)]
        scheme: Option<SchemeKind>,
        /// Database length in bits.
        #[arg(long)]
        n: Option<usize>,
        /// Cube dimension.
        #[arg(long)]
        d: Option<usize>,
        /// Add superposed and quantum costs where the width allows.
        #[arg(long)]
        costs: bool,
    },
    /// PIR with prior entanglement on a database of 2^ell bits.
    PirEntangled {
        #[arg(long)]
        ell: Option<usize>,
        /// Database in hex, most significant bit first.
        #[arg(long)]
        database: Option<String>,
        /// 1-based index of the bit to retrieve.
        #[arg(long)]
        index: Option<usize>,
        #[arg(long)]
        costs: bool,
    },
    /// Acceptance suite.
    Reproduce {
        #[arg(value_enum, default_value = "all")]
        selection: Selection,
    },
}

fn config_measure(values: &[i64]) -> Result<Vec<MeasureChoice>, CliError> {
    values
        .iter()
        .map(|&v| match v {
            -1 => Ok(None),
            v if v >= 0 => Ok(Some(v as usize)),
            v => Err(CliError::Usage(format!("measure_after entry {v}, expected a round or -1"))),
        })
        .collect()
}

fn pick<T: Clone>(flag: Option<T>, list: &[T], default: T) -> Vec<T> {
    match flag {
        Some(v) => vec![v],
        None if !list.is_empty() => list.to_vec(),
        None => vec![default],
    }
}

/// Runs `f` over `items` on the worker pool and keeps the input order.
fn sweep<T: Sync, F>(items: &[T], f: F) -> Result<Vec<Section>, CliError>
where
    F: Fn(&T) -> Result<Vec<Section>, CliError> + Sync + Send,
{
    let parts = items.par_iter().map(f).collect::<Result<Vec<_>, _>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn build(cli: &Cli, cfg: &Config) -> Result<ReportDocument, CliError> {
    let sections = match &cli.command {
        Command::Ip { n, t, measure_after, quantity } => {
            let ns = pick(*n, &cfg.ip.n, 2);
            let ts = if t.is_empty() { cfg.ip.t.clone() } else { t.clone() };
            let measure = if measure_after.is_empty() { config_measure(&cfg.ip.measure_after)? } else { measure_after.clone() };
            let quantity = quantity.or(cfg.ip.quantity).unwrap_or(QuantitySelector::All);
            for &n in &ns {
                commands::check_ip_bits(n)?;
            }
            let mut sections = sweep(&ns, |&n| {
                Ok(vec![commands::ip_section(&IpOptions { n, quantity, measure_after: measure.clone() })?])
            })?;
            let pairs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| ts.iter().map(move |&t| (n, t))).collect();
            sections.extend(sweep(&pairs, |&(n, t)| Ok(vec![commands::tradeoff_section(n, t)?]))?);
            sections
        }
        Command::Pir { scheme, n, d, costs } => {
            let kind = scheme.or(cfg.pir.scheme).unwrap_or(SchemeKind::TwoServer);
            let d = d.or(cfg.pir.d).unwrap_or(2);
            let costs = *costs || cfg.pir.costs.unwrap_or(false);
            let ns = pick(*n, &cfg.pir.n, 4);
            for &n in &ns {
                commands::build_scheme(kind, n, d)?;
            }
            sweep(&ns, |&n| commands::pir_sections(kind, n, d, costs))?
        }
        Command::PirEntangled { ell, database, index, costs } => {
            let ells = pick(*ell, &cfg.pir_entangled.ell, 1);
            let database = database.clone().or(cfg.pir_entangled.database.clone());
            let index = index.or(cfg.pir_entangled.index);
            let costs = *costs || cfg.pir_entangled.costs.unwrap_or(false);
            sweep(&ells, |&ell| commands::pir_entangled_sections(ell, database.as_deref(), index, costs))?
        }
        Command::Reproduce { selection } => {
            let outcome = reproduce::run_suite(*selection, cli.timing)?;
            let mut doc = ReportDocument::new(Vec::new(), outcome.sections);
            doc.passed = outcome.criteria.iter().all(|c| c.passed);
            doc.criteria = outcome.criteria;
            return Ok(doc);
        }
    };
    Ok(ReportDocument::new(Vec::new(), sections))
}

fn write_output(cli: &Cli, doc: &ReportDocument, format: Format) -> Result<(), CliError> {
    let text = report::render(doc, format);
    match &cli.out {
        None => print!("{text}"),
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            if let Command::Reproduce { .. } = cli.command {
                // the human-readable table goes next to the machine-readable document
                if format != Format::Table {
                    let table = path.with_extension("txt");
                    std::fs::write(&table, report::to_table(doc))
                        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", table.display())))?;
                }
                print!("{}", report::to_table(doc));
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli, &args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, args: &[std::ffi::OsString]) -> Result<i32, CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let workers = cli.workers.or(cfg.workers);
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Usage("worker count must be positive".into()));
        }
        // fails only when a pool already exists, e.g. in-process tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let format = cli.format.or(cfg.format).unwrap_or(Format::Table);
    let start = Instant::now();
    let mut doc = build(cli, &cfg)?;
    doc.command = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    if cli.timing {
        doc.duration_seconds = Some(start.elapsed().as_secs_f64());
    }
    write_output(cli, &doc, format)?;
    if doc.passed {
        return Ok(EXIT_PASS);
    }
    if matches!(cli.command, Command::Reproduce { .. }) {
        eprintln!("failing criteria:");
        for c in doc.criteria.iter().filter(|c| !c.passed) {
            eprintln!("  {}. {}", c.id, c.title);
            for f in &c.failing {
                eprintln!("       {f}");
            }
        }
    } else {
        for f in doc.failing_checks() {
            eprintln!("failed: {f}");
        }
    }
    Ok(EXIT_FAIL)
}
