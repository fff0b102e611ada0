use std::path::PathBuf;

use thiserror::Error;

use crate::graph::{CountryId, TreatyId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("country ids must be contiguous: position {position} holds id {id}")]
    NonContiguousIds { position: usize, id: usize },
    #[error("invalid iso3 code `{0}` (expected three uppercase letters)")]
    InvalidIso3(String),
    #[error("duplicate iso3 code `{0}`")]
    DuplicateIso3(String),
    #[error("treaty `{treaty}` references unknown country `{token}`")]
    UnknownMember { treaty: String, token: String },
    #[error("treaty `{treaty}` has {count} distinct member(s); at least 2 required")]
    TooFewMembers { treaty: String, count: usize },
    #[error("bilateral deal links country {0} to itself")]
    SelfLoop(CountryId),
    #[error("unknown country {0}")]
    UnknownCountry(CountryId),
    #[error("unknown treaty {0}")]
    UnknownTreaty(TreatyId),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommunityError {
    #[error("cannot detect communities on an empty node set")]
    EmptyGraph,
    #[error("invalid community parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DamageError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error("cannot normalize an empty set of damage values")]
    EmptySweep,
    #[error("damage values must be positive and finite, got {0}")]
    NonPositiveDelta(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("series overlap on {0} key(s); at least 3 required")]
    InsufficientOverlap(usize),
    #[error("series `{0}` has zero rank variance over the overlap")]
    ZeroVariance(String),
    #[error("series `{name}` holds a non-finite value for `{key}`")]
    NonFinite { name: String, key: String },
    #[error("permutation test needs at least 1000 permutations, got {0}")]
    TooFewPermutations(usize),
}

/// What went wrong while reading one of the input tables.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestErrorKind {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("expected header `{expected}`, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error("invalid iso3 code `{0}` (expected three uppercase letters)")]
    InvalidIso3(String),
    #[error("duplicate iso3 code `{0}`")]
    DuplicateIso3(String),
    #[error("duplicate treaty acronym `{0}`")]
    DuplicateAcronym(String),
    #[error("treaty `{treaty}` references unknown country `{token}`")]
    UnknownCountry { treaty: String, token: String },
    #[error("treaty `{treaty}` lists `{token}` more than once")]
    DuplicateMember { treaty: String, token: String },
    #[error("treaty `{treaty}` has {count} member(s); at least 2 required")]
    TooFewMembers { treaty: String, count: usize },
    #[error("treaty `{0}` has no layer tag and no classification entry")]
    MissingLayer(String),
    #[error("unknown layer tag `{0}` (expected political|economic|both)")]
    BadLayer(String),
    #[error("bilateral deal links `{0}` to itself")]
    SelfLoop(String),
    #[error("invalid value `{0}`")]
    BadValue(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("no treaties defined")]
    EmptyTreaties,
    #[error("no countries defined")]
    EmptyCountries,
}

/// Ingestion diagnostic pinned to a file and 1-based line (0 when the
/// problem concerns the whole file).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}:{line}: {kind}", file.display())]
pub struct IngestError {
    pub file: PathBuf,
    pub line: u64,
    pub kind: IngestErrorKind,
}
