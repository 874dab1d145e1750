use std::io::{BufRead, Write};
use std::path::Path;

use serde::Deserialize;

use super::{MatchRecord, Mode, OutcomeKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

impl RecordFormat {
    /// `.jsonl` / `.ndjson` are JSON lines, anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") => RecordFormat::Jsonl,
            _ => RecordFormat::Csv,
        }
    }
}

/// Read match records. The outcome column name (`toxic` or `y_latent`)
/// determines the returned [`OutcomeKind`]; an empty input reads as binary.
pub fn read_records(reader: impl BufRead, format: RecordFormat) -> Result<(Vec<MatchRecord>, OutcomeKind)> {
    match format {
        RecordFormat::Csv => read_csv(reader),
        RecordFormat::Jsonl => read_jsonl(reader),
    }
}

fn malformed(row: usize, reason: impl Into<String>) -> Error {
    Error::MalformedRecord {
        row,
        reason: reason.into(),
    }
}

fn read_csv(reader: impl BufRead) -> Result<(Vec<MatchRecord>, OutcomeKind)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok((Vec::new(), OutcomeKind::Binary));
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| col(name).ok_or_else(|| malformed(0, format!("missing column {name}")));
    let (kind, y_col) = match (col("toxic"), col("y_latent")) {
        (Some(i), None) => (OutcomeKind::Binary, i),
        (None, Some(i)) => (OutcomeKind::LinearLatent, i),
        (Some(_), Some(_)) => return Err(malformed(0, "both toxic and y_latent columns present")),
        (None, None) => return Err(malformed(0, "missing outcome column (toxic or y_latent)")),
    };
    let match_col = require("match_id")?;
    let mode_col = require("mode")?;
    let team_col = require("team_id")?;
    let player_col = require("player_id")?;
    let party_col = col("party_id");

    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let mode: Mode = field(mode_col).parse().map_err(|e: String| malformed(row, e))?;
        let y: f64 = field(y_col)
            .parse()
            .map_err(|_| malformed(row, format!("unparseable outcome {:?}", field(y_col))))?;
        let party_id = party_col.map(field).filter(|p| !p.is_empty()).map(str::to_owned);
        out.push(MatchRecord {
            match_id: field(match_col).to_owned(),
            mode,
            team_id: field(team_col).to_owned(),
            player_id: field(player_col).to_owned(),
            y,
            party_id,
        });
    }
    Ok((out, kind))
}

#[derive(Deserialize)]
struct JsonRow {
    match_id: String,
    mode: Mode,
    team_id: String,
    player_id: String,
    toxic: Option<f64>,
    y_latent: Option<f64>,
    party_id: Option<String>,
}

fn read_jsonl(reader: impl BufRead) -> Result<(Vec<MatchRecord>, OutcomeKind)> {
    let mut out = Vec::new();
    let mut kind = None;
    for (row, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: JsonRow = serde_json::from_str(&line).map_err(|e| malformed(row, e.to_string()))?;
        let (row_kind, y) = match (r.toxic, r.y_latent) {
            (Some(y), None) => (OutcomeKind::Binary, y),
            (None, Some(y)) => (OutcomeKind::LinearLatent, y),
            _ => return Err(malformed(row, "exactly one of toxic / y_latent required")),
        };
        if *kind.get_or_insert(row_kind) != row_kind {
            return Err(malformed(row, "outcome column changes between rows"));
        }
        out.push(MatchRecord {
            match_id: r.match_id,
            mode: r.mode,
            team_id: r.team_id,
            player_id: r.player_id,
            y,
            party_id: r.party_id.filter(|p| !p.is_empty()),
        });
    }
    Ok((out, kind.unwrap_or_default()))
}

fn format_y(y: f64, kind: OutcomeKind) -> String {
    match kind {
        OutcomeKind::Binary => format!("{}", y as u8),
        OutcomeKind::LinearLatent => format!("{y:?}"),
    }
}

pub fn write_records(
    mut writer: impl Write,
    records: &[MatchRecord],
    kind: OutcomeKind,
    format: RecordFormat,
) -> Result<()> {
    match format {
        RecordFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut writer);
            w.write_record(["match_id", "mode", "team_id", "player_id", kind.column(), "party_id"])?;
            for r in records {
                w.write_record([
                    r.match_id.as_str(),
                    r.mode.as_str(),
                    r.team_id.as_str(),
                    r.player_id.as_str(),
                    &format_y(r.y, kind),
                    r.party_id.as_deref().unwrap_or(""),
                ])?;
            }
            w.flush()?;
        }
        RecordFormat::Jsonl => {
            for r in records {
                let party = match &r.party_id {
                    Some(p) => serde_json::to_string(p)?,
                    None => "null".to_owned(),
                };
                writeln!(
                    writer,
                    r#"{{"match_id":{},"mode":"{}","team_id":{},"player_id":{},"{}":{},"party_id":{}}}"#,
                    serde_json::to_string(&r.match_id)?,
                    r.mode,
                    serde_json::to_string(&r.team_id)?,
                    serde_json::to_string(&r.player_id)?,
                    kind.column(),
                    format_y(r.y, kind),
                    party,
                )?;
            }
        }
    }
    Ok(())
}
