//! Exact and asymptotic distribution of the maximum of an excursion of a
//! nearest-neighbor random walk on `{0, 1, 2, ...}` with asymptotically
//! zero (Lamperti-type) drift.
//!
//! The walk starts at 1, is reflected at 0, and at state `i ≥ 1` steps up
//! with probability `p_i`. Everything is driven by the odds `ρ_i = q_i/p_i`
//! and their running products, which [`ProductSeries`] tabulates in log
//! space. On top of it:
//!
//! * [`first_passage`]: gambler's-ruin style hitting probabilities and the
//!   return probability `P(D < ∞)`,
//! * [`excursion`]: the exact law `P(M = n, D < ∞)` of the excursion maximum,
//! * [`classify`]: transient / null recurrent / positive recurrent labels,
//! * [`asymptotics`]: decay shapes of the pmf and of `ρ_1⋯ρ_n`, with
//!   numerical estimation of their unknown constants,
//! * [`montecarlo`]: a seeded parallel simulator used as an independent check.

pub mod asymptotics;
pub mod classify;
pub mod error;
pub mod excursion;
pub mod first_passage;
pub mod montecarlo;
pub mod numeric;
pub mod series;
pub mod walk;

pub use asymptotics::{AsymptoticShape, Branch, ConstantEstimate, ShapeTarget};
pub use classify::{classify, classify_with_series, series_diagnostic, Classification, Justification, Label, SeriesDiagnostic, Verdict};
pub use error::{Error, Result};
pub use excursion::{MaxPmfTable, TableMeta};
pub use first_passage::{HittingQuery, ReturnProbability, TruncationOptions};
pub use montecarlo::{Comparison, SimConfig, SimResult};
pub use series::ProductSeries;
pub use walk::{Sign, WalkSpec};
