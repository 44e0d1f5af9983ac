use thiserror::Error;

use crate::expr::ParseError;
use crate::word::WordError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("a model needs at least one crosscap")]
    NoCrosscaps,
    #[error("interval [{i},{j}] is not valid for {k} crosscaps")]
    InvalidInterval { i: usize, j: usize, k: usize },
    #[error("curve c({i},{j}) is one-sided")]
    OneSided { i: usize, j: usize },
    #[error("crosscap transposition needs at least two crosscaps")]
    NoTransposition,
    #[error("no table entry for {0}")]
    MissingEntry(String),
    #[error("mapping classes live on different models (N{left},1 vs N{right},1)")]
    ModelMismatch { left: usize, right: usize },
    #[error("map does not preserve the orientation character")]
    CharacterNotPreserved,
    #[error("classes {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(i64),
    #[error("unbound name {0:?}")]
    Unbound(String),
    #[error("invalid model description: {0}")]
    Description(String),
    #[error("invalid catalog: {0}")]
    Catalog(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
