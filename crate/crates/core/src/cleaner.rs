//! First cleaning stage, run independently on every block.
//!
//! 1. Abnormal group processing: a group backed by at most `tau` tuples is
//!    presumed to exist only because of an error in its reason values, and is
//!    re-keyed into the nearest normal group of the same block.
//! 2. Reliability-score cleaning: inside each group, the gamma with the
//!    highest r-score survives and every other gamma's tuples take its values.
//!
//! Afterwards each group holds exactly one gamma, and each block is one
//! rule-local clean version of the data.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{values_distance, MetricKind};
use crate::mln_index::{Block, Gamma, Group, MlnIndex};
use crate::report::{GammaRepair, GroupMerge, RepairEntry, RepairReport, Stage};
use crate::weights::{assign_weights, WeightConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgpConfig {
    /// Groups backed by at most this many tuples are abnormal.
    pub tau: usize,
}

impl Default for AgpConfig {
    fn default() -> Self {
        AgpConfig { tau: 1 }
    }
}

/// Flags every group backed by at most `tau` tuples and returns their keys.
pub fn detect_abnormal(block: &mut Block, cfg: &AgpConfig) -> Vec<Vec<String>> {
    let mut keys = Vec::new();
    for group in block.groups.values_mut() {
        group.abnormal = group.count() <= cfg.tau;
        if group.abnormal {
            keys.push(group.key.clone());
        }
    }
    keys
}

/// Merges each flagged group into its nearest normal group.
///
/// Group distance is the distance between the groups' star gammas (the gamma
/// backed by the most tuples). Ties go to the smaller key. When every group is
/// abnormal, the largest one is promoted to normal first.
pub fn merge_abnormal(block: &mut Block, metric: MetricKind) -> RepairReport {
    let mut report = RepairReport::default();
    if !block.groups.values().any(|g| g.abnormal) {
        return report;
    }
    if block.groups.values().all(|g| g.abnormal) {
        let promoted = block
            .groups
            .values()
            .min_by(|a, b| b.count().cmp(&a.count()).then_with(|| a.key.cmp(&b.key)))
            .map(|g| g.key.clone())
            .expect("block has groups");
        block.groups[&promoted].abnormal = false;
    }

    let normal: Vec<(Vec<String>, Vec<String>)> = block
        .groups
        .values()
        .filter(|g| !g.abnormal)
        .map(|g| (g.key.clone(), g.star().value_vec()))
        .collect();
    let abnormal: Vec<Vec<String>> = block
        .groups
        .values()
        .filter(|g| g.abnormal)
        .map(|g| g.key.clone())
        .collect();

    for key in abnormal {
        let group = block
            .groups
            .shift_remove(&key)
            .expect("abnormal key present");
        let star = group.star().value_vec();
        let target = normal
            .iter()
            .map(|(k, s)| {
                let d = values_distance(&star, s, metric).expect("same block layout");
                (d, k)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
            .map(|(_, k)| k.clone())
            .expect("at least one normal group");

        let mut tids = Vec::new();
        for gamma in &group.gammas {
            for &tid in &gamma.tids {
                tids.push(tid);
                for ((attr, old), new) in block
                    .reason_attributes
                    .iter()
                    .zip(&gamma.reason)
                    .zip(&target)
                {
                    if old != new {
                        report.entries.push(RepairEntry {
                            tid,
                            attribute: Some(attr.clone()),
                            old_value: old.clone(),
                            new_value: new.clone(),
                            stage: Stage::Agp,
                            rule_id: Some(block.rule_id),
                            duplicate_of: None,
                        });
                    }
                }
            }
        }
        tids.sort_unstable();
        report.merges.push(GroupMerge {
            rule_id: block.rule_id,
            from_key: key,
            to_key: target.clone(),
            tids,
        });

        let dest = block.groups.get_mut(&target).expect("normal group present");
        for mut gamma in group.gammas {
            gamma.reason = target.clone();
            dest.absorb(gamma);
        }
    }
    report
}

/// Relative tolerance under which two scores count as tied.
const SCORE_TOLERANCE: f64 = 1e-12;

fn cmp_scores(a: f64, b: f64) -> Ordering {
    let scale = a.abs().max(b.abs());
    if (a - b).abs() <= SCORE_TOLERANCE * scale {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Reliability scores of every gamma in a group, in gamma order.
///
/// `r(γ) = min over other γ* of (n/Z)·d(γ, γ*) · w(γ)`, with `n` the tuples
/// backing γ and `Z` = (largest n in the group) × (largest pairwise distance),
/// or 1 when that product is 0.
pub fn reliability_scores(group: &Group, metric: MetricKind) -> Vec<f64> {
    let values: Vec<Vec<String>> = group.gammas.iter().map(Gamma::value_vec).collect();
    let m = values.len();
    if m < 2 {
        return vec![0.0; m];
    }
    let mut dist = vec![vec![0.0; m]; m];
    let mut d_max: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let d = values_distance(&values[i], &values[j], metric).expect("same block layout");
            dist[i][j] = d;
            dist[j][i] = d;
            d_max = d_max.max(d);
        }
    }
    let n_max = group.gammas.iter().map(Gamma::count).max().unwrap_or(1) as f64;
    let z = if n_max * d_max > 0.0 {
        n_max * d_max
    } else {
        1.0
    };

    group
        .gammas
        .iter()
        .enumerate()
        .map(|(i, gamma)| {
            let nearest = (0..m)
                .filter(|&j| j != i)
                .map(|j| dist[i][j])
                .fold(f64::INFINITY, f64::min);
            gamma.count() as f64 / z * nearest * gamma.weight
        })
        .collect()
}

/// Index of the surviving gamma: highest r-score, then weight, then tuple
/// count, then smallest rendering.
pub fn select_survivor(group: &Group, metric: MetricKind) -> usize {
    let scores = reliability_scores(group, metric);
    (0..group.gammas.len())
        .max_by(|&i, &j| {
            let (a, b) = (&group.gammas[i], &group.gammas[j]);
            cmp_scores(scores[i], scores[j])
                .then_with(|| cmp_scores(a.weight, b.weight))
                .then_with(|| a.count().cmp(&b.count()))
                .then_with(|| b.render_cmp(a))
        })
        .unwrap_or(0)
}

/// Reduces every group to its surviving gamma.
pub fn rsc_clean(block: &mut Block, metric: MetricKind) -> RepairReport {
    let mut report = RepairReport::default();
    let rule_id = block.rule_id;
    let result_attributes = block.result_attributes.clone();
    for group in block.groups.values_mut() {
        if group.gammas.len() < 2 {
            continue;
        }
        let keep = select_survivor(group, metric);
        let mut gammas = std::mem::take(&mut group.gammas);
        let mut survivor = gammas.swap_remove(keep);
        gammas.sort_by(|a, b| a.render_cmp(b));
        for loser in gammas {
            for &tid in &loser.tids {
                for ((attr, old), new) in result_attributes
                    .iter()
                    .zip(&loser.result)
                    .zip(&survivor.result)
                {
                    if old != new {
                        report.entries.push(RepairEntry {
                            tid,
                            attribute: Some(attr.clone()),
                            old_value: old.clone(),
                            new_value: new.clone(),
                            stage: Stage::Rsc,
                            rule_id: Some(rule_id),
                            duplicate_of: None,
                        });
                    }
                }
            }
            report.gamma_repairs.push(GammaRepair {
                rule_id,
                from: loser.value_vec(),
                to: survivor.value_vec(),
                tids: loser.tids.iter().copied().collect(),
            });
            survivor.tids.extend(loser.tids);
        }
        group.gammas.push(survivor);
    }
    report
}

/// AGP, weight assignment and RSC on one block, then a weight refresh so the
/// surviving gammas carry the weights fusion will use.
pub fn clean_block(
    block: &mut Block,
    cfg: &AgpConfig,
    wcfg: &WeightConfig,
    metric: MetricKind,
) -> RepairReport {
    detect_abnormal(block, cfg);
    let mut report = merge_abnormal(block, metric);
    assign_weights(block, wcfg);
    report.extend(rsc_clean(block, metric));
    assign_weights(block, wcfg);
    report
}

/// Runs the first stage on every block. Blocks are cleaned in parallel; the
/// report lists block results in rule order.
pub fn stage_one(
    index: &mut MlnIndex,
    cfg: &AgpConfig,
    wcfg: &WeightConfig,
    metric: MetricKind,
) -> RepairReport {
    let reports: Vec<RepairReport> = index
        .blocks
        .par_iter_mut()
        .map(|block| clean_block(block, cfg, wcfg, metric))
        .collect();
    let mut report = RepairReport::default();
    for r in reports {
        report.extend(r);
    }
    report
}
