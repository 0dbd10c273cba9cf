//! Transformations of contingency tables to target margins, counterfactual
//! decomposition of changes in homogamy shares, and a pseudo-panel pipeline
//! for survey shares with one-sided tests and Monte-Carlo model comparison.
//!
//! The two transformation methods differ in the association they hold fixed
//! while rescaling a seed table to new row and column totals:
//!
//! * [`ipf`] — iterative proportional fitting, which preserves the
//!   odds-ratio structure of the seed;
//! * [`nm`] — a closed-form transform that preserves the (generalized)
//!   Liu-Lu indicator and, unlike IPF, commutes with merging adjacent
//!   ordered categories.
//!
//! [`decompose`] builds counterfactual tables with either method and splits
//! the change in a statistic between two observed tables into preference,
//! availability, and interaction components. [`survey`] and [`bayes`]
//! implement the estimation pipeline used to decide, from self-reported
//! preference data, which transform is empirically supported.

pub mod bayes;
pub mod decompose;
pub mod io;
pub mod ipf;
pub mod nm;
pub mod normal;
pub mod repro;
pub mod survey;
pub mod table;

pub use table::{AssociationMatrix, Axis, ContingencyTable, MarginSpec};
