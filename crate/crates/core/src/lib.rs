//! Rule-based cleaning of tabular data.
//!
//! Integrity rules (functional dependencies, conditional functional
//! dependencies and a two-tuple denial-constraint form) are grounded into an
//! index of blocks, one per rule, whose groups collect the tuples that share
//! a rule's reason values. Cleaning runs in two stages:
//!
//! 1. per block, small groups are merged into their nearest regular group,
//!    and within each group one value combination survives by reliability
//!    score;
//! 2. per tuple, the surviving rule-local versions are fused in the order
//!    that maximizes the product of their weights, and exact duplicates are
//!    dropped.
//!
//! ```
//! use dataclean::{clean_relation, samples, CleanOptions};
//!
//! let (dirty, rules) = samples::hospital();
//! let (clean, report) = clean_relation(&dirty, &rules, &CleanOptions::default()).unwrap();
//! assert_eq!(clean.len(), 2);
//! assert!(!report.entries.is_empty());
//! ```

pub mod cleaner;
pub mod datagen;
pub mod distance;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod mln_index;
pub mod partition;
pub mod pipeline;
pub mod relation;
pub mod report;
pub mod rules;
pub mod samples;
pub mod weights;

pub use distance::MetricKind;
pub use error::{Error, Result};
pub use mln_index::{build_index, MlnIndex};
pub use pipeline::{clean_relation, CleanOptions};
pub use relation::{load_relation, write_relation, Relation, Schema, Tid, Tuple};
pub use report::{RepairReport, Stage};
pub use rules::{parse_rules, parse_rules_str, Rule, RuleKind};
pub use weights::{WeightConfig, WeightMode};
