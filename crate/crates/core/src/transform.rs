//! Within-player demeaning of outcome, regressor, and instrument.

use crate::error::{Error, Result};
use crate::instruments::EligiblePanel;
use crate::sum::{self, Compensated};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemeanedRow {
    pub player: usize,
    pub match_idx: usize,
    pub y: f64,
    pub x: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerMeans {
    pub player: usize,
    pub n: usize,
    pub y: f64,
    pub x: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemeanedPanel {
    pub rows: Vec<DemeanedRow>,
    /// One entry per distinct player, in order of first appearance.
    pub player_means: Vec<PlayerMeans>,
    /// Mean of the raw outcome over the eligible sample.
    pub mean_y: f64,
}

impl DemeanedPanel {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of absorbed player fixed effects.
    pub fn n_players(&self) -> usize {
        self.player_means.len()
    }

    pub fn columns(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let y = self.rows.iter().map(|r| r.y).collect();
        let x = self.rows.iter().map(|r| r.x).collect();
        let z = self.rows.iter().map(|r| r.z).collect();
        (y, x, z)
    }
}

/// Subtract each player's mean of `y`, `x`, and `z` from their rows.
pub fn demean(eligible: &EligiblePanel) -> Result<DemeanedPanel> {
    let mut slot = vec![usize::MAX; eligible.player_ids.len()];
    let mut acc: Vec<(usize, usize, Compensated, Compensated, Compensated)> = Vec::new();
    for r in &eligible.rows {
        if slot[r.player] == usize::MAX {
            slot[r.player] = acc.len();
            acc.push((r.player, 0, Compensated::new(), Compensated::new(), Compensated::new()));
        }
        let s = slot[r.player];
        let a = &mut acc[s];
        a.1 += 1;
        a.2.add(r.y);
        a.3.add(r.x);
        a.4.add(r.z);
    }
    let player_means: Vec<PlayerMeans> = acc
        .into_iter()
        .map(|(player, n, y, x, z)| {
            if n < 2 {
                return Err(Error::SingletonPlayer(eligible.player_ids[player].clone()));
            }
            let nf = n as f64;
            Ok(PlayerMeans {
                player,
                n,
                y: y.value() / nf,
                x: x.value() / nf,
                z: z.value() / nf,
            })
        })
        .collect::<Result<_>>()?;

    let rows = eligible
        .rows
        .iter()
        .map(|r| {
            let m = &player_means[slot[r.player]];
            DemeanedRow {
                player: r.player,
                match_idx: r.match_idx,
                y: r.y - m.y,
                x: r.x - m.x,
                z: r.z - m.z,
            }
        })
        .collect();
    let n = eligible.rows.len();
    let mean_y = if n == 0 {
        f64::NAN
    } else {
        sum::sum(eligible.rows.iter().map(|r| r.y)) / n as f64
    };
    Ok(DemeanedPanel {
        rows,
        player_means,
        mean_y,
    })
}
