//! Leave-one-out instruments and the estimation sample.
//!
//! For a focal player `j` in match `i`, the regressor is the mean outcome of
//! `j`'s teammates in `i`, and the instrument is the mean, over those same
//! teammates, of each teammate's average outcome in the matches where `j`
//! was not on their team. Instruments are always computed on the full panel
//! handed in, before any eligibility filtering.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::sum::Compensated;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EligibleRow {
    /// Dense player id of the source panel.
    pub player: usize,
    /// Dense match id of the source panel.
    pub match_idx: usize,
    pub y: f64,
    /// Mean outcome of the row's teammates in this match.
    pub x: f64,
    /// Mean leave-one-out outcome of the row's teammates.
    pub z: f64,
}

/// Observations dropped at each restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Attrition {
    pub input_rows: usize,
    pub incomplete_team: usize,
    pub instrument_undefined: usize,
    pub too_few_matches: usize,
    pub retained: usize,
    /// Passes of the at-least-two-rows filter until nothing changed.
    pub filter_passes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EligiblePanel {
    pub rows: Vec<EligibleRow>,
    pub player_ids: Vec<String>,
    pub match_ids: Vec<String>,
    pub attrition: Attrition,
}

impl EligiblePanel {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["player_id", "match_id", "y", "x", "z"])?;
        for r in &self.rows {
            w.write_record([
                self.player_ids[r.player].as_str(),
                self.match_ids[r.match_idx].as_str(),
                &format!("{:?}", r.y),
                &format!("{:?}", r.x),
                &format!("{:?}", r.z),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean outcome of player `k` over matches in which `j` is not on `k`'s
/// team, by dense id. `None` when no such match exists.
pub fn loo_frequency_idx(panel: &Panel, k: usize, j: usize) -> Option<f64> {
    let obs = panel.observations();
    let mut acc = Compensated::new();
    let mut n = 0usize;
    for &o in &panel.players()[k].observations {
        let shares_team = panel.team_of(o).members.iter().any(|&m| obs[m].player_idx == j);
        if !shares_team {
            acc.add(obs[o].y);
            n += 1;
        }
    }
    (n > 0).then(|| acc.value() / n as f64)
}

/// Leave-one-out outcome frequency of `teammate` excluding matches shared
/// with `focal`.
pub fn loo_frequency(panel: &Panel, teammate: &str, focal: &str) -> Result<Option<f64>> {
    let k = panel
        .player_idx(teammate)
        .ok_or_else(|| Error::UnknownPlayer(teammate.to_owned()))?;
    let j = panel
        .player_idx(focal)
        .ok_or_else(|| Error::UnknownPlayer(focal.to_owned()))?;
    Ok(loo_frequency_idx(panel, k, j))
}

/// Instrument for observation `obs_idx`; `None` when any teammate lacks a
/// match without the focal player.
pub fn team_instrument_idx(panel: &Panel, obs_idx: usize) -> Result<Option<f64>> {
    let obs = panel.observations();
    let team = panel.team_of(obs_idx);
    if !team.complete {
        return Err(Error::IncompleteTeam {
            match_id: panel.matches()[team.match_idx].id.clone(),
            team_id: team.id.clone(),
        });
    }
    let j = obs[obs_idx].player_idx;
    let mut acc = Compensated::new();
    let mut n = 0usize;
    for &m in team.members.iter().filter(|&&m| m != obs_idx) {
        match loo_frequency_idx(panel, obs[m].player_idx, j) {
            Some(v) => acc.add(v),
            None => return Ok(None),
        }
        n += 1;
    }
    Ok((n > 0).then(|| acc.value() / n as f64))
}

pub fn team_instrument(panel: &Panel, player: &str, match_id: &str) -> Result<Option<f64>> {
    let (o, _) = locate(panel, player, match_id)?;
    team_instrument_idx(panel, o)
}

/// Mean outcome of the teammates of observation `obs_idx`.
pub fn teammate_share_idx(panel: &Panel, obs_idx: usize) -> Option<f64> {
    let obs = panel.observations();
    let team = panel.team_of(obs_idx);
    let mates: Compensated = team
        .members
        .iter()
        .filter(|&&m| m != obs_idx)
        .map(|&m| obs[m].y)
        .collect();
    let k = team.members.len() - 1;
    (k > 0).then(|| mates.value() / k as f64)
}

fn locate(panel: &Panel, player: &str, match_id: &str) -> Result<(usize, usize)> {
    let j = panel
        .player_idx(player)
        .ok_or_else(|| Error::UnknownPlayer(player.to_owned()))?;
    let not_found = || Error::UnknownObservation {
        match_id: match_id.to_owned(),
        player_id: player.to_owned(),
    };
    let m = panel.match_idx(match_id).ok_or_else(not_found)?;
    let o = panel.observation_of(j, m).ok_or_else(not_found)?;
    Ok((o, j))
}

enum RowStatus {
    Incomplete,
    Undefined,
    Defined { x: f64, z: f64 },
}

/// Apply the sample restrictions and attach regressor and instrument.
///
/// Rows are dropped when the team is incomplete or any teammate's
/// leave-one-out frequency is undefined; then players with fewer than two
/// surviving rows are removed until every remaining player has at least two.
pub fn build_eligible_panel(panel: &Panel) -> Result<EligiblePanel> {
    let obs = panel.observations();
    let status: Vec<RowStatus> = (0..obs.len())
        .into_par_iter()
        .map(|o| {
            if !panel.team_of(o).complete {
                return RowStatus::Incomplete;
            }
            let z = team_instrument_idx(panel, o).expect("team checked complete");
            match (z, teammate_share_idx(panel, o)) {
                (Some(z), Some(x)) => RowStatus::Defined { x, z },
                _ => RowStatus::Undefined,
            }
        })
        .collect();

    let mut attrition = Attrition {
        input_rows: obs.len(),
        ..Attrition::default()
    };
    let mut rows = Vec::with_capacity(obs.len());
    for (o, s) in status.into_iter().enumerate() {
        match s {
            RowStatus::Incomplete => attrition.incomplete_team += 1,
            RowStatus::Undefined => attrition.instrument_undefined += 1,
            RowStatus::Defined { x, z } => rows.push(EligibleRow {
                player: obs[o].player_idx,
                match_idx: obs[o].match_idx,
                y: obs[o].y,
                x,
                z,
            }),
        }
    }

    let mut counts = vec![0usize; panel.players().len()];
    for r in &rows {
        counts[r.player] += 1;
    }
    loop {
        attrition.filter_passes += 1;
        let before = rows.len();
        rows.retain(|r| counts[r.player] >= 2);
        if rows.len() == before {
            break;
        }
        attrition.too_few_matches += before - rows.len();
        counts.iter_mut().for_each(|c| *c = 0);
        for r in &rows {
            counts[r.player] += 1;
        }
    }
    attrition.retained = rows.len();

    if rows.is_empty() {
        return Err(Error::EmptyAfterFiltering);
    }
    Ok(EligiblePanel {
        rows,
        player_ids: panel.players().iter().map(|p| p.id.clone()).collect(),
        match_ids: panel.matches().iter().map(|m| m.id.clone()).collect(),
        attrition,
    })
}
