//! Brute-force reference implementations and random fixtures shared by the
//! integration tests. Everything here works from raw records with plain
//! loops and dense linear algebra.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use peeriv::{MatchRecord, Mode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct FixtureSpec {
    pub max_players: usize,
    pub max_matches: usize,
    pub modes: Vec<Mode>,
    pub binary: bool,
    pub incomplete_rate: f64,
    pub party_rate: f64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            max_players: 24,
            max_matches: 40,
            modes: Mode::ALL.to_vec(),
            binary: true,
            incomplete_rate: 0.05,
            party_rate: 0.0,
        }
    }
}

/// A random small panel. Every match has one to three teams of distinct
/// players; some teams lose a member.
pub fn random_records(seed: u64, spec: &FixtureSpec) -> Vec<MatchRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_players = rng.random_range(4..=spec.max_players);
    let n_matches = rng.random_range(3..=spec.max_matches);
    let players: Vec<usize> = (0..n_players).collect();
    let mut out = Vec::new();
    for m in 0..n_matches {
        let mode = spec.modes[rng.random_range(0..spec.modes.len())];
        let size = mode.team_size();
        let max_teams = (n_players / size).min(3);
        if max_teams == 0 {
            continue;
        }
        let n_teams = rng.random_range(1..=max_teams);
        let mut drawn = players.clone();
        drawn.shuffle(&mut rng);
        for t in 0..n_teams {
            let mut members: Vec<usize> = drawn[t * size..(t + 1) * size].to_vec();
            if rng.random_bool(spec.incomplete_rate) {
                members.pop();
            }
            let party = (mode == Mode::Duos && members.len() == 2 && rng.random_bool(spec.party_rate))
                .then(|| format!("P{m}-{t}"));
            for p in members {
                let y = if spec.binary {
                    f64::from(u8::from(rng.random_bool(0.4)))
                } else {
                    rng.random_range(-2.0..2.0)
                };
                out.push(MatchRecord {
                    match_id: format!("m{m:03}"),
                    mode,
                    team_id: format!("t{t}"),
                    player_id: format!("p{p:03}"),
                    y,
                    party_id: party.clone(),
                });
            }
        }
    }
    out
}

/// Mean of `k`'s outcomes over matches in which `j` is not on `k`'s team.
pub fn oracle_loo(records: &[MatchRecord], k: &str, j: &str) -> Option<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for r in records.iter().filter(|r| r.player_id == k) {
        let together = records
            .iter()
            .any(|s| s.match_id == r.match_id && s.team_id == r.team_id && s.player_id == j);
        if !together {
            total += r.y;
            n += 1;
        }
    }
    (n > 0).then(|| total / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub player: String,
    pub match_id: String,
    pub y: f64,
    pub x: f64,
    pub z: f64,
}

fn teammates<'a>(records: &'a [MatchRecord], r: &MatchRecord) -> Vec<&'a MatchRecord> {
    records
        .iter()
        .filter(|s| s.match_id == r.match_id && s.team_id == r.team_id && s.player_id != r.player_id)
        .collect()
}

/// Estimation sample keyed by (player, match), in that order.
pub fn oracle_eligible(records: &[MatchRecord]) -> Vec<OracleRow> {
    let mut rows = Vec::new();
    for r in records {
        let mates = teammates(records, r);
        if mates.len() + 1 != r.mode.team_size() {
            continue;
        }
        let loo: Vec<Option<f64>> = mates
            .iter()
            .map(|k| oracle_loo(records, &k.player_id, &r.player_id))
            .collect();
        if loo.iter().any(Option::is_none) {
            continue;
        }
        let z = loo.iter().map(|v| v.unwrap()).sum::<f64>() / mates.len() as f64;
        let x = mates.iter().map(|k| k.y).sum::<f64>() / mates.len() as f64;
        rows.push(OracleRow {
            player: r.player_id.clone(),
            match_id: r.match_id.clone(),
            y: r.y,
            x,
            z,
        });
    }
    loop {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &rows {
            *counts.entry(r.player.as_str()).or_default() += 1;
        }
        let thin: BTreeSet<String> = counts
            .into_iter()
            .filter(|&(_, c)| c < 2)
            .map(|(p, _)| p.to_owned())
            .collect();
        if thin.is_empty() {
            break;
        }
        rows.retain(|r| !thin.contains(&r.player));
    }
    rows.sort_by(|a, b| (&a.player, &a.match_id).cmp(&(&b.player, &b.match_id)));
    rows
}

/// Dense row-major matrix.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let n = cols[0].len();
        let mut m = Matrix::zeros(n, cols.len());
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Scale row `i` by `w[i]`.
    pub fn scale_rows(&self, w: &[f64]) -> Matrix {
        let mut out = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] *= w[r];
            }
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            inv[(i, i)] = 1.0;
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[(p, col)].abs().total_cmp(&a[(q, col)].abs()))
                .unwrap();
            assert!(a[(pivot, col)].abs() > 1e-300, "singular matrix");
            for c in 0..n {
                a.data.swap(col * n + c, pivot * n + c);
                inv.data.swap(col * n + c, pivot * n + c);
            }
            let d = a[(col, col)];
            for c in 0..n {
                a[(col, c)] /= d;
                inv[(col, c)] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    if f != 0.0 {
                        for c in 0..n {
                            a[(r, c)] -= f * a[(col, c)];
                            inv[(r, c)] -= f * inv[(col, c)];
                        }
                    }
                }
            }
        }
        inv
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

pub struct IvOracle {
    pub beta: Vec<f64>,
    /// HC1 covariance matrix.
    pub cov: Matrix,
}

/// Just-identified IV `(Z'X)^-1 Z'y` with sandwich covariance
/// `c (Z'X)^-1 Z' diag(e^2) Z (X'Z)^-1`, `c = n / (n - k)`. With `Z = X`
/// this is OLS from the normal equations.
pub fn oracle_iv(y: &[f64], x: &Matrix, z: &Matrix) -> IvOracle {
    let n = x.rows;
    let k = x.cols;
    let zt = z.transpose();
    let zx_inv = zt.mul(x).inverse();
    let ycol = Matrix::from_columns(&[y.to_vec()]);
    let beta_m = zx_inv.mul(&zt.mul(&ycol));
    let beta: Vec<f64> = (0..k).map(|i| beta_m[(i, 0)]).collect();
    let fitted = x.mul(&beta_m);
    let e2: Vec<f64> = (0..n).map(|i| (y[i] - fitted[(i, 0)]).powi(2)).collect();
    let meat = zt.mul(&z.scale_rows(&e2));
    let c = n as f64 / (n - k) as f64;
    let mut cov = zx_inv.mul(&meat).mul(&zx_inv.transpose());
    cov.data.iter_mut().for_each(|v| *v *= c);
    IvOracle { beta, cov }
}

pub fn oracle_ols(y: &[f64], x: &Matrix) -> IvOracle {
    oracle_iv(y, x, x)
}

/// Design matrix `[v, D]` with one dummy column per distinct player.
pub fn with_player_dummies(v: &[f64], players: &[usize]) -> Matrix {
    let ids: BTreeSet<usize> = players.iter().copied().collect();
    let pos: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut m = Matrix::zeros(v.len(), 1 + ids.len());
    for (r, (&val, p)) in v.iter().zip(players).enumerate() {
        m[(r, 0)] = val;
        m[(r, 1 + pos[p])] = 1.0;
    }
    m
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
