//! Player–match panel with team structure.
//!
//! Raw rows are interned into dense integer ids for players, matches, and
//! teams. Rows are stored in canonical order (match id, team id, player id);
//! any permutation or sharding of the same records yields the same panel.

mod io;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum;

pub use io::{read_records, write_records, RecordFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Duos,
    Trios,
    Quads,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Duos, Mode::Trios, Mode::Quads];

    pub fn team_size(self) -> usize {
        match self {
            Mode::Duos => 2,
            Mode::Trios => 3,
            Mode::Quads => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Duos => "duos",
            Mode::Trios => "trios",
            Mode::Quads => "quads",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "duos" => Ok(Mode::Duos),
            "trios" => Ok(Mode::Trios),
            "quads" => Ok(Mode::Quads),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Subset of modes used for estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModeFilter {
    Duos,
    Trios,
    Quads,
    #[default]
    All,
}

impl ModeFilter {
    pub fn admits(self, mode: Mode) -> bool {
        match self {
            ModeFilter::All => true,
            ModeFilter::Duos => mode == Mode::Duos,
            ModeFilter::Trios => mode == Mode::Trios,
            ModeFilter::Quads => mode == Mode::Quads,
        }
    }

    /// The single mode selected, if any.
    pub fn mode(self) -> Option<Mode> {
        match self {
            ModeFilter::All => None,
            ModeFilter::Duos => Some(Mode::Duos),
            ModeFilter::Trios => Some(Mode::Trios),
            ModeFilter::Quads => Some(Mode::Quads),
        }
    }
}

impl std::str::FromStr for ModeFilter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(ModeFilter::All);
        }
        Ok(match s.parse::<Mode>()? {
            Mode::Duos => ModeFilter::Duos,
            Mode::Trios => ModeFilter::Trios,
            Mode::Quads => ModeFilter::Quads,
        })
    }
}

/// How the outcome column is to be read.
///
/// `Binary` data carries a 0/1 toxicity label in a `toxic` column; `Latent`
/// data carries the real-valued structural outcome in a `y_latent` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    #[default]
    Binary,
    LinearLatent,
}

impl OutcomeKind {
    pub fn column(self) -> &'static str {
        match self {
            OutcomeKind::Binary => "toxic",
            OutcomeKind::LinearLatent => "y_latent",
        }
    }
}

/// One player in one match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: String,
    pub mode: Mode,
    pub team_id: String,
    pub player_id: String,
    pub y: f64,
    pub party_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub match_idx: usize,
    pub player_idx: usize,
    pub team_idx: usize,
    pub y: f64,
    pub party: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Team {
    pub id: String,
    pub match_idx: usize,
    /// Observation indices, ascending.
    pub members: Vec<usize>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchEntry {
    pub id: String,
    pub mode: Mode,
    pub teams: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerEntry {
    pub id: String,
    /// Observation indices, ascending (hence in match order).
    pub observations: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelSummary {
    pub n_matches: usize,
    pub n_players: usize,
    pub n_observations: usize,
    /// `None` for an empty panel.
    pub mean_y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    kind: OutcomeKind,
    observations: Vec<Observation>,
    players: Vec<PlayerEntry>,
    matches: Vec<MatchEntry>,
    teams: Vec<Team>,
    parties: Vec<String>,
    player_index: HashMap<String, usize>,
    match_index: HashMap<String, usize>,
}

/// Accumulates records, possibly from several shards, into a [`Panel`].
#[derive(Debug, Clone, Default)]
pub struct PanelBuilder {
    kind: OutcomeKind,
    records: Vec<MatchRecord>,
}

impl PanelBuilder {
    pub fn new(kind: OutcomeKind) -> Self {
        Self {
            kind,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: MatchRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = MatchRecord>) {
        self.records.extend(records);
    }

    /// Combine two shards. The finished panel does not depend on merge order.
    pub fn merge(mut self, mut other: PanelBuilder) -> PanelBuilder {
        self.records.append(&mut other.records);
        self
    }

    pub fn finish(mut self) -> Result<Panel> {
        for (row, r) in self.records.iter().enumerate() {
            validate_record(row, r, self.kind)?;
        }
        self.records
            .sort_by(|a, b| (&a.match_id, &a.team_id, &a.player_id).cmp(&(&b.match_id, &b.team_id, &b.player_id)));
        index_sorted(self.kind, self.records)
    }
}

fn validate_record(row: usize, r: &MatchRecord, kind: OutcomeKind) -> Result<()> {
    let bad = |reason: String| Err(Error::MalformedRecord { row, reason });
    if r.match_id.is_empty() || r.team_id.is_empty() || r.player_id.is_empty() {
        return bad("empty identifier".into());
    }
    match kind {
        OutcomeKind::Binary if r.y != 0.0 && r.y != 1.0 => bad(format!("toxic must be 0 or 1, got {}", r.y)),
        OutcomeKind::LinearLatent if !r.y.is_finite() => bad(format!("y_latent must be finite, got {}", r.y)),
        _ => Ok(()),
    }
}

fn index_sorted(kind: OutcomeKind, records: Vec<MatchRecord>) -> Result<Panel> {
    let mut panel = Panel {
        kind,
        observations: Vec::with_capacity(records.len()),
        players: Vec::new(),
        matches: Vec::new(),
        teams: Vec::new(),
        parties: Vec::new(),
        player_index: HashMap::new(),
        match_index: HashMap::new(),
    };
    let mut party_index: HashMap<String, usize> = HashMap::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(records.len());

    // Dense player ids follow sorted string order.
    let mut player_ids: Vec<&str> = records.iter().map(|r| r.player_id.as_str()).collect();
    player_ids.sort_unstable();
    player_ids.dedup();
    for id in player_ids {
        panel.player_index.insert(id.to_owned(), panel.players.len());
        panel.players.push(PlayerEntry {
            id: id.to_owned(),
            observations: Vec::new(),
        });
    }

    let mut row = 0;
    while row < records.len() {
        let match_id = &records[row].match_id;
        let mode = records[row].mode;
        let match_idx = panel.matches.len();
        panel.match_index.insert(match_id.clone(), match_idx);
        panel.matches.push(MatchEntry {
            id: match_id.clone(),
            mode,
            teams: Vec::new(),
        });

        while row < records.len() && &records[row].match_id == match_id {
            let team_id = &records[row].team_id;
            let team_idx = panel.teams.len();
            let mut members = Vec::new();
            while row < records.len() && &records[row].match_id == match_id && &records[row].team_id == team_id {
                let r = &records[row];
                if r.mode != mode {
                    return Err(Error::MalformedRecord {
                        row,
                        reason: format!("match {} mixes modes {} and {}", match_id, mode, r.mode),
                    });
                }
                let player_idx = panel.player_index[&r.player_id];
                if !seen.insert((match_idx, player_idx)) {
                    return Err(Error::DuplicateObservation {
                        match_id: match_id.clone(),
                        player_id: r.player_id.clone(),
                    });
                }
                let party = r.party_id.as_ref().filter(|p| !p.is_empty()).map(|p| {
                    let next = party_index.len();
                    *party_index.entry(p.clone()).or_insert_with(|| {
                        panel.parties.push(p.clone());
                        next
                    })
                });
                let obs_idx = panel.observations.len();
                panel.observations.push(Observation {
                    match_idx,
                    player_idx,
                    team_idx,
                    y: r.y,
                    party,
                });
                panel.players[player_idx].observations.push(obs_idx);
                members.push(obs_idx);
                row += 1;
            }
            if members.len() > mode.team_size() {
                return Err(Error::TeamSizeMismatch {
                    match_id: match_id.clone(),
                    team_id: team_id.clone(),
                    mode: mode.to_string(),
                    expected: mode.team_size(),
                    found: members.len(),
                });
            }
            let complete = members.len() == mode.team_size();
            panel.teams.push(Team {
                id: team_id.clone(),
                match_idx,
                members,
                complete,
            });
            panel.matches[match_idx].teams.push(team_idx);
        }
    }
    Ok(panel)
}

/// Build a panel from a stream of records.
pub fn build_panel(records: impl IntoIterator<Item = MatchRecord>, kind: OutcomeKind) -> Result<Panel> {
    let mut builder = PanelBuilder::new(kind);
    builder.extend(records);
    builder.finish()
}

impl Panel {
    pub fn kind(&self) -> OutcomeKind {
        self.kind
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn players(&self) -> &[PlayerEntry] {
        &self.players
    }

    pub fn matches(&self) -> &[MatchEntry] {
        &self.matches
    }

    pub fn teams(&self) -> &[Team] {
        &self.teams
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn player_idx(&self, id: &str) -> Option<usize> {
        self.player_index.get(id).copied()
    }

    pub fn match_idx(&self, id: &str) -> Option<usize> {
        self.match_index.get(id).copied()
    }

    /// Observation of `player_idx` in `match_idx`, found by scanning the
    /// player's (short) match list.
    pub fn observation_of(&self, player_idx: usize, match_idx: usize) -> Option<usize> {
        self.players[player_idx]
            .observations
            .iter()
            .copied()
            .find(|&o| self.observations[o].match_idx == match_idx)
    }

    pub fn team_of(&self, obs_idx: usize) -> &Team {
        &self.teams[self.observations[obs_idx].team_idx]
    }

    pub fn mode_of(&self, obs_idx: usize) -> Mode {
        self.matches[self.observations[obs_idx].match_idx].mode
    }

    pub fn incomplete_teams(&self) -> impl Iterator<Item = &Team> {
        self.teams.iter().filter(|t| !t.complete)
    }

    pub fn summary(&self) -> PanelSummary {
        panel_summary(self)
    }

    /// Export rows in canonical order.
    pub fn to_records(&self) -> Vec<MatchRecord> {
        self.observations.iter().map(|o| self.record_of(o)).collect()
    }

    fn record_of(&self, o: &Observation) -> MatchRecord {
        let m = &self.matches[o.match_idx];
        MatchRecord {
            match_id: m.id.clone(),
            mode: m.mode,
            team_id: self.teams[o.team_idx].id.clone(),
            player_id: self.players[o.player_idx].id.clone(),
            y: o.y,
            party_id: o.party.map(|p| self.parties[p].clone()),
        }
    }

    /// Sub-panel of the observations for which `keep` returns true.
    pub fn retain_observations(&self, mut keep: impl FnMut(usize, &Observation) -> bool) -> Panel {
        let records: Vec<MatchRecord> = self
            .observations
            .iter()
            .enumerate()
            .filter(|(i, o)| keep(*i, o))
            .map(|(_, o)| self.record_of(o))
            .collect();
        // Rows are already valid and canonically ordered.
        index_sorted(self.kind, records).expect("sub-panel of a valid panel is valid")
    }

    /// Sub-panel restricted to matches whose mode passes the filter.
    pub fn restrict_mode(&self, filter: ModeFilter) -> Panel {
        if filter == ModeFilter::All {
            return self.clone();
        }
        self.retain_observations(|_, o| filter.admits(self.matches[o.match_idx].mode))
    }
}

pub fn panel_summary(panel: &Panel) -> PanelSummary {
    let n = panel.observations.len();
    let mean_y = (n > 0).then(|| sum::sum(panel.observations.iter().map(|o| o.y)) / n as f64);
    PanelSummary {
        n_matches: panel.matches.len(),
        n_players: panel.players.len(),
        n_observations: n,
        mean_y,
    }
}

/// Sub-panel of duo teams in which the two players were matched by the game
/// rather than queueing together.
///
/// A duo is premade when both members carry the same non-empty party id.
/// Incomplete duos and teams from other modes are dropped.
pub fn filter_algorithmic_pairs(panel: &Panel) -> Result<Panel> {
    if panel.parties.is_empty() {
        return Err(Error::MissingPartyMetadata);
    }
    let keep_team: Vec<bool> = panel
        .teams
        .iter()
        .map(|t| {
            if panel.matches[t.match_idx].mode != Mode::Duos || !t.complete {
                return false;
            }
            let a = panel.observations[t.members[0]].party;
            let b = panel.observations[t.members[1]].party;
            !matches!((a, b), (Some(pa), Some(pb)) if pa == pb)
        })
        .collect();
    Ok(panel.retain_observations(|_, o| keep_team[o.team_idx]))
}
