//! Core of the DAO sustainability analytics pipeline: the snapshot model,
//! derived indicators, the KPI scoring engine, the run catalog and the
//! fixture generator.

pub mod catalog;
pub mod fixtures;
pub mod indicators;
pub mod payload;
pub mod policy;
pub mod scoring;
pub mod snapshot;
pub mod verify;

pub use indicators::{DerivedIndicators, Turnout};
pub use scoring::{band_of, score_dao, Band, Points, ScoreCard};
pub use snapshot::{parse_snapshot, parse_snapshot_value, BlockKind, DaoSnapshot, ParsedSnapshot, ValidationReport};
