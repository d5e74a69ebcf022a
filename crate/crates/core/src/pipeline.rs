//! End-to-end cleaning and the options that drive it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cleaner::{stage_one, AgpConfig};
use crate::distance::MetricKind;
use crate::error::{Error, Result};
use crate::fusion::stage_two;
use crate::mln_index::{build_index, MlnIndex};
use crate::partition::run_partitioned;
use crate::relation::Relation;
use crate::report::RepairReport;
use crate::rules::Rule;
use crate::weights::{WeightConfig, WeightMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanOptions {
    pub tau: usize,
    pub metric: MetricKind,
    pub weights: WeightConfig,
    /// Number of parts; 1 cleans the whole relation at once.
    pub parts: usize,
    pub seed: u64,
}

impl Default for CleanOptions {
    fn default() -> Self {
        CleanOptions {
            tau: 1,
            metric: MetricKind::Levenshtein,
            weights: WeightConfig::default(),
            parts: 1,
            seed: 0,
        }
    }
}

impl CleanOptions {
    pub fn agp(&self) -> AgpConfig {
        AgpConfig { tau: self.tau }
    }

    pub fn validate(&self) -> Result<()> {
        if self.parts == 0 {
            return Err(Error::Config("part count must be at least 1".into()));
        }
        self.weights.validate()
    }
}

/// Index, first stage and second stage over the whole relation.
pub fn clean_standalone(
    rel: &Relation,
    rules: &[Rule],
    opts: &CleanOptions,
) -> (Relation, RepairReport, MlnIndex) {
    let mut index = build_index(rel, rules);
    let mut report = stage_one(&mut index, &opts.agp(), &opts.weights, opts.metric);
    let (clean, fused) = stage_two(rel, &index);
    report.extend(fused);
    (clean, report, index)
}

/// Cleans `rel`, partitioning first when more than one part is requested.
pub fn clean_relation(
    rel: &Relation,
    rules: &[Rule],
    opts: &CleanOptions,
) -> Result<(Relation, RepairReport)> {
    opts.validate()?;
    if opts.parts <= 1 {
        let (clean, report, _) = clean_standalone(rel, rules, opts);
        Ok((clean, report))
    } else {
        let run = run_partitioned(rel, rules, opts)?;
        Ok((run.relation, run.report))
    }
}

/// Settings read from a TOML file. Every key is optional; command-line flags
/// override whatever is set here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub delimiter: Option<char>,
    pub rules: Option<PathBuf>,
    pub dump_index: Option<PathBuf>,
    pub metric: Option<MetricKind>,
    pub weights: Option<WeightMode>,
    pub refine_iters: Option<usize>,
    pub tau: Option<usize>,
    pub report: Option<PathBuf>,
    pub parts: Option<usize>,
    pub seed: Option<u64>,
    pub error_rate: Option<f64>,
    pub replacement_ratio: Option<f64>,
}

impl FileConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Single-byte field delimiter.
pub fn delimiter_byte(c: char) -> Result<u8> {
    match c {
        '\t' => Ok(b'\t'),
        c if c.is_ascii() && c != '"' && c != '\n' && c != '\r' => Ok(c as u8),
        c => Err(Error::Config(format!("unsupported delimiter {c:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::hospital;

    #[test]
    fn hospital_end_to_end() {
        let (rel, rules) = hospital();
        let (clean, report) = clean_relation(&rel, &rules, &CleanOptions::default()).unwrap();
        assert_eq!(clean.len(), 2);
        assert!(report
            .entries
            .iter()
            .any(|e| e.tid == 4 && e.attribute.as_deref() == Some("ST") && e.new_value == "AL"));
    }

    #[test]
    fn zero_parts_rejected() {
        let (rel, rules) = hospital();
        let opts = CleanOptions {
            parts: 0,
            ..Default::default()
        };
        assert!(clean_relation(&rel, &rules, &opts).is_err());
    }

    #[test]
    fn file_config_parses() {
        let cfg = FileConfig::from_toml_str(
            "tau = 2\nmetric = \"cosine\"\nweights = \"refined\"\ndelimiter = \"\\t\"\n",
        )
        .unwrap();
        assert_eq!(cfg.tau, Some(2));
        assert_eq!(cfg.metric, Some(MetricKind::Cosine));
        assert_eq!(cfg.weights, Some(WeightMode::Refined));
        assert_eq!(delimiter_byte(cfg.delimiter.unwrap()).unwrap(), b'\t');
        assert!(FileConfig::from_toml_str("bogus = 1").is_err());
    }
}
