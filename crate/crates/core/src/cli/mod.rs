//! Batch front end: `toricdeg <subcommand> --spec FILE [flags]`.
//!
//! Exit status: 0 on success, 2 when a validation verdict fails, 1 on I/O or
//! parse errors, 64 on an unknown or missing subcommand.

mod commands;
pub mod spec_file;

use crate::error::Error;
use crate::model_metrics::MetricMode;
use crate::wp_asymptotics::PanelRule;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use spec_file::SpecFile;

/// Version tag written into every report.
pub const SCHEMA_VERSION: &str = "toricdeg-report/1";
pub const DEFAULT_SEED: u64 = 20_240_917;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Glued,
}

impl From<ModeArg> for MetricMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => MetricMode::Exact,
            ModeArg::Glued => MetricMode::Glued,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "toricdeg", version, about = "Toric degenerations: exact combinatorics and model asymptotics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Spec file (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Directory for report files; reports go to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Quadrature panels per decade.
    #[arg(long, global = true, default_value_t = 4)]
    pub panels: usize,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Convexity, simplicity, base extension, simpliciality, multiplicities.
    Check,
    /// Write the convexified spec.
    Reduce,
    /// Stratification poset.
    Strata,
    /// The constants lambda_1 and lambda_2.
    Lambda,
    /// Metric samples on every chart over the tau grid.
    MetricSample,
    /// Chart volumes against n! 2^n / eta^n.
    Volume,
    /// Weil–Petersson ratios, the constant C and the decay exponent.
    WpDecay,
    /// Cocycle and compatibility checks of the atlas block.
    AtlasValidate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Reduce => "reduce",
            Command::Strata => "strata",
            Command::Lambda => "lambda",
            Command::MetricSample => "metric-sample",
            Command::Volume => "volume",
            Command::WpDecay => "wp-decay",
            Command::AtlasValidate => "atlas-validate",
        }
    }
}

/// Settings shared by all analyses.
#[derive(Clone, Debug)]
pub struct Settings {
    pub seed: u64,
    pub rule: PanelRule,
    pub mode: MetricMode,
}

/// A report as a table (for CSV) plus a JSON body.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub body: Value,
    /// Extra files (name, contents) such as a reduced spec; written only
    /// with `--out`.
    pub files: Vec<(String, String)>,
    pub passed: bool,
    pub message: Option<String>,
}

impl Report {
    fn csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
    }

    fn json(&self, command: &str, spec_id: &str) -> String {
        let doc = json!({
            "schema": SCHEMA_VERSION,
            "command": command,
            "spec": spec_id,
            "passed": self.passed,
            "result": self.body,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn write_out(dir: Option<&Path>, name: &str, text: &str) -> Result<(), Error> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| Error::Io(format!("{}: {e}", d.display())))?;
            let p = d.join(name);
            std::fs::write(&p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

/// Runs one invocation and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_IO,
            };
        }
    };
    let started = std::time::Instant::now();
    let status = match execute(&cli) {
        Ok(status) => status,
        Err(e) => {
            match &e {
                Error::Parse { line, msg } => {
                    let path = cli.spec.as_deref().map_or("<spec>".into(), |p| p.display().to_string());
                    eprintln!("{path}:{line}: {msg}");
                }
                _ => eprintln!("error: {e}"),
            }
            exit_for(&e)
        }
    };
    eprintln!("{} finished in {:.3}s", cli.command.name(), started.elapsed().as_secs_f64());
    status
}

fn execute(cli: &Cli) -> Result<i32, Error> {
    let path = cli.spec.as_deref().ok_or_else(|| Error::Io("--spec PATH is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let spec = SpecFile::parse(&text)?;
    let spec_id = path.file_stem().map_or("spec".into(), |s| s.to_string_lossy().into_owned());
    if cli.panels == 0 {
        return Err(Error::InvalidParameter("--panels must be positive".into()));
    }
    let settings = Settings {
        seed: cli.seed,
        rule: PanelRule { per_decade: cli.panels, ..PanelRule::default() },
        mode: cli.mode.into(),
    };
    let report = commands::dispatch(cli.command, &spec, &settings)?;
    let name = cli.command.name();
    let (ext, text) = match cli.format {
        Format::Csv => ("csv", report.csv()?),
        Format::Json => ("json", report.json(name, &spec_id)),
    };
    write_out(cli.out.as_deref(), &format!("{spec_id}.{name}.{ext}"), &text)?;
    if let Some(d) = cli.out.as_deref() {
        for (file, contents) in &report.files {
            write_out(Some(d), &format!("{spec_id}.{file}"), contents)?;
        }
    }
    if let Some(m) = &report.message {
        eprintln!("{m}");
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
}
