//! Batch entry points behind the `peeriv` binary.
//!
//! Exit codes: 0 success, 1 data error, 2 configuration error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::panel::{build_panel, read_records, write_records, RecordFormat};
use crate::pipeline::{fit, EstimateOptions};
use crate::report::Report;
use crate::simgen::{generate_panel, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub fn exit_code(err: &Error) -> i32 {
    if err.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_DATA
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub config: SimConfig,
    /// `.csv` or `.jsonl`.
    pub output: PathBuf,
    /// Ground-truth sidecar; defaults to `<output>.truth.json`.
    pub truth_output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateArgs {
    pub input: PathBuf,
    /// JSON report; the text table goes next to it with a `.txt` extension.
    pub output: PathBuf,
    pub options: EstimateOptions,
    /// Optional CSV dump of the estimation sample (player_id, match_id, y, x, z).
    pub eligible_output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Simulate(SimulateArgs),
    Estimate(EstimateArgs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub n_records: usize,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOutcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Simulated(SimulateOutcome),
    Estimated(EstimateOutcome),
}

impl SimulateArgs {
    pub fn truth_path(&self) -> PathBuf {
        self.truth_output.clone().unwrap_or_else(|| {
            let mut s = self.output.clone().into_os_string();
            s.push(".truth.json");
            PathBuf::from(s)
        })
    }
}

impl EstimateArgs {
    pub fn table_path(&self) -> PathBuf {
        self.output.with_extension("txt")
    }
}

fn ensure_distinct(paths: &[&Path]) -> Result<()> {
    for (i, a) in paths.iter().enumerate() {
        for b in &paths[i + 1..] {
            if a == b {
                return Err(Error::InvalidConfig(format!("path {} used twice", a.display())));
            }
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateOutcome> {
    let truth_path = args.truth_path();
    ensure_distinct(&[&args.output, &truth_path])?;
    let sim = generate_panel(&args.config)?;
    let mut warnings = Vec::new();
    if sim.records.is_empty() {
        warnings.push("configuration produced no matches; writing an empty data file".to_owned());
    }

    let mut w = create(&args.output)?;
    write_records(
        &mut w,
        &sim.records,
        args.config.outcome,
        RecordFormat::from_path(&args.output),
    )?;
    w.flush()?;

    let mut t = create(&truth_path)?;
    serde_json::to_writer(&mut t, &sim.truth)?;
    t.flush()?;

    Ok(SimulateOutcome {
        n_records: sim.records.len(),
        files: vec![args.output.clone(), truth_path],
        warnings,
    })
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<EstimateOutcome> {
    let table_path = args.table_path();
    let mut paths: Vec<&Path> = vec![&args.input, &args.output, &table_path];
    if let Some(p) = &args.eligible_output {
        paths.push(p);
    }
    ensure_distinct(&paths)?;

    let reader = BufReader::new(File::open(&args.input)?);
    let (records, kind) = read_records(reader, RecordFormat::from_path(&args.input))?;
    let panel = build_panel(records, kind)?;
    let fitted = fit(&panel, args.options)?;
    let report = fitted.report()?;

    let mut files = Vec::new();
    let mut w = create(&args.output)?;
    w.write_all(report.to_json()?.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    files.push(args.output.clone());

    let mut w = create(&table_path)?;
    w.write_all(report.to_text_table().as_bytes())?;
    w.flush()?;
    files.push(table_path);

    if let Some(p) = &args.eligible_output {
        let mut w = create(p)?;
        fitted.eligible.write_csv(&mut w)?;
        w.flush()?;
        files.push(p.clone());
    }

    let mut warnings: Vec<String> = report
        .ols
        .iter()
        .chain(report.tsls.iter())
        .flat_map(|e| e.warnings.iter().cloned())
        .collect();
    let incomplete = panel.incomplete_teams().count();
    if incomplete > 0 {
        warnings.push(format!("{incomplete} incomplete teams flagged at ingestion"));
    }
    Ok(EstimateOutcome {
        report,
        files,
        warnings,
    })
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let go = || match &config.command {
        Command::Simulate(a) => cmd_simulate(a).map(Outcome::Simulated),
        Command::Estimate(a) => cmd_estimate(a).map(Outcome::Estimated),
    };
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            pool.install(go)
        }
        None => go(),
    }
}

/// Load a simulation config from JSON; missing fields take defaults.
pub fn load_sim_config(path: &Path) -> Result<SimConfig> {
    let f = BufReader::new(File::open(path)?);
    serde_json::from_reader(f).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}
