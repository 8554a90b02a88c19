//! The security reduction from the scheme's IND-ID-CPA security to DBDH,
//! made executable.
//!
//! A DBDH instance is turned into public parameters by [`sim_setup`]; key
//! queries are answered by [`sim_keygen`] and the challenge by
//! [`sim_challenge`]. [`run_reduction`] drives one full game against an
//! [`Adversary`], including the survival estimate and the artificial abort,
//! and [`measure_dbdh_advantage`] repeats it to estimate the distinguisher's
//! advantage.

mod adversaries;
mod bounds;
mod dbdh;
mod game;
mod simulator;

pub use adversaries::{RandomGuesser, ScriptedAdversary, ToyDlogAdversary};
pub use bounds::{artificial_abort, eta_sample_count, lambda, lambda_f64, security_loss_bits, SampleBudget};
pub use dbdh::{gen_dbdh, DbdhOracle, DbdhTuple};
pub use game::{
    estimate_eta, measure_dbdh_advantage, run_ind_id_cpa_game, run_reduction, Adversary, ChallengeRequest,
    CpaEstimate, DbdhMeasurement, GameRecord, GameTranscript, ParseRecordError, Phase, ReductionParams,
};
pub use simulator::{publish, sim_challenge, sim_keygen, sim_keygen_with_randomness, sim_setup, TrapdoorState};

use std::fmt;

use thiserror::Error;

use crate::ibe::IbeError;

/// Why a game ended without the simulator using the adversary's guess.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AbortKind {
    None,
    KeyQuery,
    Challenge,
    Artificial,
}

impl AbortKind {
    pub fn name(self) -> &'static str {
        match self {
            AbortKind::None => "none",
            AbortKind::KeyQuery => "key_query",
            AbortKind::Challenge => "challenge",
            AbortKind::Artificial => "artificial",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [AbortKind::None, AbortKind::KeyQuery, AbortKind::Challenge, AbortKind::Artificial]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

impl fmt::Display for AbortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of a simulator step: an answer, or an abort signal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<T> {
    Answered(T),
    Aborted(AbortKind),
}

impl<T> Outcome<T> {
    pub fn answered(self) -> Option<T> {
        match self {
            Outcome::Answered(t) => Some(t),
            Outcome::Aborted(_) => None,
        }
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self, Outcome::Aborted(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("the query budget q must be positive")]
    ZeroQueries,
    #[error("group order must exceed m * n * 2^ell = {span}")]
    OrderTooSmall { span: String },
    #[error("trapdoor value out of range: {0}")]
    TrapdoorRange(&'static str),
    #[error("adversary broke the game contract: {0}")]
    ProtocolViolation(String),
    #[error(transparent)]
    Ibe(#[from] IbeError),
}
