//! Gamma weights.
//!
//! A gamma's weight stands in for its probability of being clean. Cleaning
//! decisions use weights only through comparisons and products, so what
//! matters is that weights are normalized per block and ordered by how many
//! tuples back each gamma. Priors are count shares; the optional refinement
//! sharpens the gap between a gamma and its group mates without ever
//! reordering them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mln_index::Block;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    #[default]
    Prior,
    Refined,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Prior => "prior",
            WeightMode::Refined => "refined",
        })
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "prior" | "prior_only" => Ok(WeightMode::Prior),
            "refined" => Ok(WeightMode::Refined),
            other => Err(Error::Config(format!("unknown weight mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub mode: WeightMode,
    /// Smoothing added to every weight before renormalizing a refined block.
    pub epsilon: f64,
    pub refine_iters: usize,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            mode: WeightMode::Prior,
            epsilon: 1e-6,
            refine_iters: 5,
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "weight smoothing must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Sets each gamma's weight to its share of the block's backing tuples.
pub fn assign_prior_weights(block: &mut Block) {
    let total = block.tuple_count();
    if total == 0 {
        return;
    }
    let total = total as f64;
    for gamma in block.gammas_mut() {
        gamma.weight = gamma.count() as f64 / total;
    }
}

/// Multiplicative count-dominance updates.
///
/// Each round scales a gamma by `1 + Δ`, where `Δ` is the number of group
/// mates backed by strictly fewer tuples minus those backed by strictly more,
/// divided by the group's gamma count, and then renormalizes the block with
/// `epsilon` smoothing. `Δ > -1` always, so weights stay positive.
pub fn refine_weights(block: &mut Block, cfg: &WeightConfig) {
    if cfg.mode == WeightMode::Prior || block.is_empty() {
        return;
    }
    for _ in 0..cfg.refine_iters {
        for group in block.groups.values_mut() {
            let counts: Vec<usize> = group.gammas.iter().map(|g| g.count()).collect();
            let size = counts.len() as f64;
            for (gamma, &c) in group.gammas.iter_mut().zip(&counts) {
                let smaller = counts.iter().filter(|&&o| o < c).count() as f64;
                let larger = counts.iter().filter(|&&o| o > c).count() as f64;
                gamma.weight *= 1.0 + (smaller - larger) / size;
            }
        }
        let total: f64 = block.gammas().map(|g| g.weight + cfg.epsilon).sum();
        for gamma in block.gammas_mut() {
            gamma.weight = (gamma.weight + cfg.epsilon) / total;
        }
    }
}

/// Priors followed by refinement when configured.
pub fn assign_weights(block: &mut Block, cfg: &WeightConfig) {
    assign_prior_weights(block);
    refine_weights(block, cfg);
}

/// Count-weighted mean of part-local weights for one gamma.
///
/// Parts are summed in a canonical order so the result does not depend on
/// the order they are given in, and a weight shared by every contributing
/// part is returned unchanged.
pub fn aggregate_weights(per_part: &[(usize, f64)]) -> Result<f64> {
    let mut parts: Vec<(usize, f64)> = per_part.iter().copied().filter(|&(n, _)| n > 0).collect();
    if parts.is_empty() {
        return Err(Error::ZeroCounts);
    }
    let first = parts[0].1;
    if parts.iter().all(|&(_, w)| w == first) {
        return Ok(first);
    }
    parts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let total: usize = parts.iter().map(|&(n, _)| n).sum();
    let weighted: f64 = parts.iter().map(|&(n, w)| n as f64 * w).sum();
    Ok(weighted / total as f64)
}
