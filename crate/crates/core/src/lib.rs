//! Analysis toolkit for review helpfulness votes.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] loads, validates and filters review corpora (JSONL or CSV).
//! * [`stats`] computes per-product star averages and variances and the
//!   deviation-binned helpfulness-ratio curves.
//! * [`dedup`] finds near-duplicate review pairs posted to different products.
//! * [`mh`] runs stratified Mantel-Haenszel odds-ratio tests over those pairs.
//! * [`model`] is the two-population opinion mixture: density, mode analysis,
//!   numerical checks of its unimodal/bimodal regimes and a tolerance-based
//!   evaluator simulator that produces corpora the rest of the pipeline consumes.

pub mod bin;
pub mod corpus;
pub mod dedup;
pub mod error;
pub mod mh;
pub mod model;
pub mod rng;
pub mod stats;
pub mod text;

pub use bin::HalfBin;
pub use corpus::{Corpus, Format, Review};
pub use dedup::{find_plagiarized_pairs, PlagiarizedPair};
pub use error::{Error, Result};
pub use mh::{mh_odds_ratio, Axis, MhResult, Stratum2x2, Verdict, VerdictGrid};
pub use model::{Kernel, MixtureModel, Regime, RegimeReport, SimulationConfig};
pub use stats::{BinnedCurve, CorpusSummary, CurveMode, ProductStats};
