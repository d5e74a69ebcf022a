//! Runs the first stage block by block: abnormal group merging, then
//! reliability-score selection inside every group.

use dataclean::cleaner::{
    detect_abnormal, merge_abnormal, reliability_scores, rsc_clean, AgpConfig,
};
use dataclean::mln_index::build_index;
use dataclean::weights::{assign_weights, WeightConfig};
use dataclean::{samples, MetricKind};

fn main() {
    let (rel, rules) = samples::hospital();
    let mut index = build_index(&rel, &rules);
    let metric = MetricKind::Levenshtein;
    for block in &mut index.blocks {
        println!("block r{}", block.rule_id);
        let abnormal = detect_abnormal(block, &AgpConfig { tau: 1 });
        println!("  abnormal groups: {abnormal:?}");
        for m in merge_abnormal(block, metric).merges {
            println!(
                "  merged {:?} into {:?} (tids {:?})",
                m.from_key, m.to_key, m.tids
            );
        }
        assign_weights(block, &WeightConfig::default());
        for group in block.groups.values() {
            if group.gammas.len() < 2 {
                continue;
            }
            let scores = reliability_scores(group, metric);
            for (gamma, r) in group.gammas.iter().zip(scores) {
                println!("  {:?} w={:.3} r={:.4}", gamma.value_vec(), gamma.weight, r);
            }
        }
        for g in rsc_clean(block, metric).gamma_repairs {
            println!("  repaired {:?} -> {:?} (tids {:?})", g.from, g.to, g.tids);
        }
    }
}
