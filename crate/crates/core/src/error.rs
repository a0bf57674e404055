use std::fmt;

use thiserror::Error;

/// Why a design point or SINR target cannot be served.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// γ ≥ τ_c(α − 1): no finite deployment reaches the SINR target.
    SinrTargetUnreachable,
    /// ZF needs strictly more antennas than UEs.
    ZfNeedsMoreAntennas,
    /// The denominator of the pilot-reuse bound is not positive.
    NotEnoughAntennas,
    /// Kζ exceeds the coherence block.
    PilotOverhead,
    /// No feasible value of the free variable exists.
    EmptyFeasibleSet,
    /// Lemma-3 stationary point is not real-valued.
    NoStationaryPoint,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            Infeasibility::SinrTargetUnreachable => "infeasible SINR target (SINR target unreachable)",
            Infeasibility::ZfNeedsMoreAntennas => "ZF requires M > K",
            Infeasibility::NotEnoughAntennas => "too few antennas for the SINR target",
            Infeasibility::PilotOverhead => "pilot overhead exceeds coherence block",
            Infeasibility::EmptyFeasibleSet => "empty feasible interval",
            Infeasibility::NoStationaryPoint => "no real stationary point of the reduced objective",
        };
        f.write_str(msg)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("{0}")]
    Infeasible(Infeasibility),

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sampling failure: {0}")]
    Sampling(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }

    /// The infeasibility reason, if this is an infeasibility error.
    pub fn infeasibility(&self) -> Option<Infeasibility> {
        match self {
            Error::Infeasible(r) => Some(*r),
            _ => None,
        }
    }
}

impl From<Infeasibility> for Error {
    fn from(r: Infeasibility) -> Self {
        Error::Infeasible(r)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
