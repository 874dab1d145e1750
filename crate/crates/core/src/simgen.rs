//! Synthetic match panels from the linear-in-means peer model
//!
//! ```text
//! y_ij = alpha_j + beta * mean_{k in team, k != j} y_ik + eps_ij
//! ```
//!
//! with the endogeneity channels an estimator has to survive: simultaneity
//! within a team, a shock shared by all members of a team, and premade
//! parties whose members have correlated fixed effects.
//!
//! Every match draws from its own ChaCha stream keyed by the master seed and
//! the match index, so generation runs in parallel and the output does not
//! depend on the number of worker threads.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{MatchRecord, Mode, OutcomeKind};

const STREAM_PLAYERS: u64 = 1;
const STREAM_SCHEDULE: u64 = 2;
const STREAM_OUTCOMES: u64 = 3;

fn stream(seed: u64, domain: u64, idx: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 56) | idx);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModeWeights {
    pub duos: f64,
    pub trios: f64,
    pub quads: f64,
}

impl Default for ModeWeights {
    fn default() -> Self {
        Self::only(Mode::Duos)
    }
}

impl ModeWeights {
    pub fn only(mode: Mode) -> Self {
        let mut w = ModeWeights {
            duos: 0.0,
            trios: 0.0,
            quads: 0.0,
        };
        *w.get_mut(mode) = 1.0;
        w
    }

    pub fn get(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Duos => self.duos,
            Mode::Trios => self.trios,
            Mode::Quads => self.quads,
        }
    }

    fn get_mut(&mut self, mode: Mode) -> &mut f64 {
        match mode {
            Mode::Duos => &mut self.duos,
            Mode::Trios => &mut self.trios,
            Mode::Quads => &mut self.quads,
        }
    }
}

/// Simulation parameters. Defaults give a binary panel with a toxicity rate
/// of roughly a quarter percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_players: usize,
    /// Target mean number of matches per player.
    pub matches_per_player: f64,
    /// Teams per match, capped by what the population can fill.
    pub teams_per_match: usize,
    pub mode_weights: ModeWeights,
    pub beta: f64,
    pub alpha_mean: f64,
    pub alpha_sd: f64,
    pub idiosyncratic_sd: f64,
    /// Shock shared by every member of a team in a match.
    pub common_shock_sd: f64,
    /// Probability that a team is built around a premade party.
    pub party_share: f64,
    /// Correlation of fixed effects within a premade party.
    pub homophily: f64,
    pub outcome: OutcomeKind,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_players: 2_000,
            matches_per_player: 20.0,
            teams_per_match: 20,
            mode_weights: ModeWeights::default(),
            beta: 0.3,
            alpha_mean: 0.0012,
            alpha_sd: 0.001,
            idiosyncratic_sd: 0.002,
            common_shock_sd: 0.001,
            party_share: 0.0,
            homophily: 0.0,
            outcome: OutcomeKind::Binary,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.beta.abs() < 1.0) {
            return Err(Error::SingularSystem { beta: self.beta });
        }
        for (name, v) in [
            ("alpha_sd", self.alpha_sd),
            ("idiosyncratic_sd", self.idiosyncratic_sd),
            ("common_shock_sd", self.common_shock_sd),
            ("matches_per_player", self.matches_per_player),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !self.alpha_mean.is_finite() {
            return invalid("alpha_mean must be finite".into());
        }
        for (name, v) in [("party_share", self.party_share), ("homophily", self.homophily)] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.teams_per_match == 0 {
            return invalid("teams_per_match must be positive".into());
        }
        let weights = Mode::ALL.map(|m| self.mode_weights.get(m));
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || weights.iter().sum::<f64>() <= 0.0 {
            return invalid("mode weights must be non-negative with a positive sum".into());
        }
        for mode in self.active_modes() {
            if self.n_players < mode.team_size() {
                return Err(Error::InfeasibleConfig(format!(
                    "{} players cannot fill a {} team",
                    self.n_players, mode
                )));
            }
        }
        Ok(())
    }

    fn active_modes(&self) -> impl Iterator<Item = Mode> + '_ {
        Mode::ALL.into_iter().filter(|&m| self.mode_weights.get(m) > 0.0)
    }

    /// Teams per match actually used for `mode`.
    pub fn teams_in(&self, mode: Mode) -> usize {
        self.teams_per_match.min(self.n_players / mode.team_size())
    }

    /// Number of matches needed to reach `matches_per_player` on average.
    pub fn n_matches(&self) -> usize {
        let total_w: f64 = Mode::ALL.iter().map(|&m| self.mode_weights.get(m)).sum();
        let slots_per_match: f64 = self
            .active_modes()
            .map(|m| self.mode_weights.get(m) / total_w * (self.teams_in(m) * m.team_size()) as f64)
            .sum();
        (self.n_players as f64 * self.matches_per_player / slots_per_match).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTeam {
    /// Player indices. For a party team the first two are the party.
    pub members: Vec<usize>,
    pub party: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledMatch {
    pub mode: Mode,
    pub teams: Vec<ScheduledTeam>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub matches: Vec<ScheduledMatch>,
    /// Premade pairs; empty when `party_share` is zero.
    pub parties: Vec<[usize; 2]>,
}

fn form_parties(config: &SimConfig) -> Vec<[usize; 2]> {
    if config.party_share == 0.0 {
        return Vec::new();
    }
    let mut rng = stream(config.seed, STREAM_PLAYERS, 0);
    let order = index::sample(&mut rng, config.n_players, config.n_players).into_vec();
    order.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

fn pick_mode(rng: &mut ChaCha8Rng, weights: &ModeWeights) -> Mode {
    let total: f64 = Mode::ALL.iter().map(|&m| weights.get(m)).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = Mode::Duos;
    for m in Mode::ALL {
        let w = weights.get(m);
        if w <= 0.0 {
            continue;
        }
        last = m;
        if u < w {
            return m;
        }
        u -= w;
    }
    last
}

fn schedule_match(config: &SimConfig, parties: &[[usize; 2]], party_of: &[Option<usize>], i: usize) -> ScheduledMatch {
    let mut rng = stream(config.seed, STREAM_SCHEDULE, i as u64);
    let mode = pick_mode(&mut rng, &config.mode_weights);
    let size = mode.team_size();
    let n_teams = config.teams_in(mode);

    let is_party: Vec<bool> = (0..n_teams)
        .map(|_| !parties.is_empty() && rng.random::<f64>() < config.party_share)
        .collect();
    let n_party = is_party.iter().filter(|&&p| p).count();
    let chosen_parties = index::sample(&mut rng, parties.len(), n_party).into_vec();

    let needed = n_teams * size - 2 * n_party;
    let pool = index::sample(&mut rng, config.n_players, n_teams * size).into_vec();
    let mut solos = pool
        .into_iter()
        .filter(|&p| match party_of[p] {
            Some(q) => !chosen_parties.contains(&q),
            None => true,
        })
        .take(needed)
        .collect::<Vec<_>>()
        .into_iter();

    let mut party_iter = chosen_parties.into_iter();
    let teams = is_party
        .into_iter()
        .map(|premade| {
            let mut members = Vec::with_capacity(size);
            let party = if premade {
                let q = party_iter.next().expect("one party drawn per party team");
                members.extend(parties[q]);
                Some(q)
            } else {
                None
            };
            while members.len() < size {
                members.push(solos.next().expect("pool covers every slot"));
            }
            ScheduledTeam { members, party }
        })
        .collect();
    ScheduledMatch { mode, teams }
}

/// Draw match rosters.
pub fn simulate_schedule(config: &SimConfig) -> Result<Schedule> {
    config.validate()?;
    let parties = form_parties(config);
    let mut party_of = vec![None; config.n_players];
    for (q, pair) in parties.iter().enumerate() {
        for &p in pair {
            party_of[p] = Some(q);
        }
    }
    let n_matches = config.n_matches();
    let matches = (0..n_matches)
        .into_par_iter()
        .map(|i| schedule_match(config, &parties, &party_of, i))
        .collect();
    Ok(Schedule { matches, parties })
}

/// Solve `y = a + beta * P y` for one team, where `P` averages over the
/// other members. Gaussian elimination with partial pivoting.
pub fn solve_team_equilibrium(inputs: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta.abs() < 1.0) {
        return Err(Error::SingularSystem { beta });
    }
    let m = inputs.len();
    if m < 2 {
        return Err(Error::InvalidConfig(format!(
            "a team needs at least two members, got {m}"
        )));
    }
    let off = -beta / (m - 1) as f64;
    // augmented matrix [A | a]
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|r| {
            let mut row: Vec<f64> = (0..m).map(|c| if r == c { 1.0 } else { off }).collect();
            row.push(inputs[r]);
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        a.swap(col, pivot);
        let p = a[col][col];
        if p == 0.0 {
            return Err(Error::SingularSystem { beta });
        }
        for r in col + 1..m {
            let f = a[r][col] / p;
            if f != 0.0 {
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut y = vec![0.0; m];
    for r in (0..m).rev() {
        let tail: f64 = (r + 1..m).map(|c| a[r][c] * y[c]).sum();
        y[r] = (a[r][m] - tail) / a[r][r];
    }
    Ok(y)
}

/// Reduced form of a duo: each outcome in terms of both members'
/// `alpha + eps`.
pub fn duo_closed_form(a_j: f64, a_k: f64, beta: f64) -> (f64, f64) {
    let d = 1.0 - beta * beta;
    let y_j = a_j / d + beta / d * a_k;
    let y_k = beta / d * a_j + a_k / d;
    (y_j, y_k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub alpha: f64,
    /// Idiosyncratic plus common shock.
    pub eps: f64,
    pub common: f64,
    pub latent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub beta_true: f64,
    pub config: SimConfig,
    pub alpha: Vec<f64>,
    pub parties: Vec<[usize; 2]>,
    /// Aligned with the emitted records.
    pub rows: Vec<TruthRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub records: Vec<MatchRecord>,
    pub truth: GroundTruth,
}

fn draw_alphas(config: &SimConfig, parties: &[[usize; 2]]) -> Vec<f64> {
    let mut rng = stream(config.seed, STREAM_PLAYERS, 1);
    let std: Vec<f64> = (0..config.n_players)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut alpha: Vec<f64> = std.iter().map(|z| config.alpha_mean + config.alpha_sd * z).collect();
    let rho = config.homophily;
    let resid = (1.0 - rho * rho).sqrt();
    for &[a, b] in parties {
        alpha[b] = config.alpha_mean + config.alpha_sd * (rho * std[a] + resid * std[b]);
    }
    alpha
}

pub fn player_id(p: usize) -> String {
    format!("p{p:07}")
}

pub fn match_id(i: usize) -> String {
    format!("m{i:07}")
}

fn outcome_rows(
    config: &SimConfig,
    alpha: &[f64],
    i: usize,
    m: &ScheduledMatch,
) -> Result<Vec<(MatchRecord, TruthRow)>> {
    let mut rng = stream(config.seed, STREAM_OUTCOMES, i as u64);
    let mut out = Vec::with_capacity(m.teams.len() * m.mode.team_size());
    for (t, team) in m.teams.iter().enumerate() {
        let common = config.common_shock_sd * rng.sample::<f64, _>(StandardNormal);
        let eps: Vec<f64> = team
            .members
            .iter()
            .map(|_| config.idiosyncratic_sd * rng.sample::<f64, _>(StandardNormal) + common)
            .collect();
        let inputs: Vec<f64> = team.members.iter().zip(&eps).map(|(&p, e)| alpha[p] + e).collect();
        let latent = solve_team_equilibrium(&inputs, config.beta)?;
        for (slot, &p) in team.members.iter().enumerate() {
            let y = match config.outcome {
                OutcomeKind::LinearLatent => latent[slot],
                OutcomeKind::Binary => {
                    let prob = latent[slot].clamp(0.0, 1.0);
                    if rng.random::<f64>() < prob {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            let party_id = (team.party.is_some() && slot < 2).then(|| format!("P{:07}", team.party.unwrap()));
            out.push((
                MatchRecord {
                    match_id: match_id(i),
                    mode: m.mode,
                    team_id: format!("t{t:03}"),
                    player_id: player_id(p),
                    y,
                    party_id,
                },
                TruthRow {
                    alpha: alpha[p],
                    eps: eps[slot],
                    common,
                    latent: latent[slot],
                },
            ));
        }
    }
    Ok(out)
}

/// Draw a full synthetic panel with its ground truth.
pub fn generate_panel(config: &SimConfig) -> Result<Simulation> {
    let schedule = simulate_schedule(config)?;
    let alpha = draw_alphas(config, &schedule.parties);
    let per_match: Vec<Vec<(MatchRecord, TruthRow)>> = schedule
        .matches
        .par_iter()
        .enumerate()
        .map(|(i, m)| outcome_rows(config, &alpha, i, m))
        .collect::<Result<_>>()?;
    let n: usize = per_match.iter().map(Vec::len).sum();
    let mut records = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for (r, t) in per_match.into_iter().flatten() {
        records.push(r);
        rows.push(t);
    }
    Ok(Simulation {
        records,
        truth: GroundTruth {
            beta_true: config.beta,
            config: config.clone(),
            alpha,
            parties: schedule.parties,
            rows,
        },
    })
}
