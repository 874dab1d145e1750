use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("player {player_id} appears more than once in match {match_id}")]
    DuplicateObservation { match_id: String, player_id: String },

    #[error("team {team_id} in match {match_id} has {found} members but {mode} teams hold at most {expected}")]
    TeamSizeMismatch {
        match_id: String,
        team_id: String,
        mode: String,
        expected: usize,
        found: usize,
    },

    #[error("malformed record at row {row}: {reason}")]
    MalformedRecord { row: usize, reason: String },

    #[error("no record carries a party_id; algorithmic pairs cannot be identified")]
    MissingPartyMetadata,

    #[error("unknown player {0}")]
    UnknownPlayer(String),

    #[error("player {player_id} did not play match {match_id}")]
    UnknownObservation { match_id: String, player_id: String },

    #[error("team {team_id} in match {match_id} is incomplete")]
    IncompleteTeam { match_id: String, team_id: String },

    #[error("no observations survive the eligibility restrictions")]
    EmptyAfterFiltering,

    #[error("player {0} has a single observation and cannot be demeaned")]
    SingletonPlayer(String),

    #[error("{0} has zero variation after demeaning")]
    ZeroVariance(&'static str),

    #[error("instrument is uncorrelated with the regressor (sum of z*x is zero)")]
    WeakOrZeroFirstStage,

    #[error("{n} observations leave no residual degrees of freedom after absorbing {dof_absorbed} fixed effects")]
    InsufficientDof { n: usize, dof_absorbed: usize },

    #[error("mean outcome is {0}; multiples of the mean are undefined")]
    ZeroMeanOutcome(f64),

    #[error("column lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("infeasible simulation config: {0}")]
    InfeasibleConfig(String),

    #[error("peer coefficient {beta} makes the team system singular (|beta| must be below 1)")]
    SingularSystem { beta: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the run configuration rather than the data.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleConfig(_) | Error::SingularSystem { .. } | Error::InvalidConfig(_)
        )
    }
}
