//! Parses rules, renders them as weighted clauses and shows the block/group
//! index with prior weights.

use dataclean::mln_index::{build_index, ground_rule_strings};
use dataclean::rules::to_mln_clause;
use dataclean::samples;
use dataclean::weights::assign_prior_weights;

fn main() {
    let (rel, rules) = samples::hospital();
    let mut index = build_index(&rel, &rules);
    index.blocks.iter_mut().for_each(assign_prior_weights);

    for (rule, block) in rules.iter().zip(&index.blocks) {
        println!("r{} [{}] {}", rule.id, rule.kind, to_mln_clause(rule));
        for group in block.groups.values() {
            println!("  group {:?} ({} tuples)", group.key, group.count());
            for gamma in &group.gammas {
                println!(
                    "    w={:.4}  tids={:?}  {}",
                    gamma.weight,
                    gamma.tids,
                    block.ground_clause(gamma)
                );
            }
        }
        println!(
            "  distinct ground clauses: {}",
            ground_rule_strings(&index, rule).len()
        );
    }
}
