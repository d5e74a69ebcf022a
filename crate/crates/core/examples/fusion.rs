//! Fuses the rule-local versions of every hospital tuple and shows which
//! gammas each winning fusion used.

use dataclean::cleaner::{stage_one, AgpConfig};
use dataclean::fusion::Fuser;
use dataclean::mln_index::build_index;
use dataclean::{samples, MetricKind, WeightConfig};

fn main() {
    let (rel, rules) = samples::hospital();
    let mut index = build_index(&rel, &rules);
    stage_one(
        &mut index,
        &AgpConfig { tau: 1 },
        &WeightConfig::default(),
        MetricKind::Levenshtein,
    );

    let fuser = Fuser::new(&index, rel.schema().arity());
    for t in rel.tuples() {
        let versions = fuser.version_set(t.tid);
        let result = fuser.fuse(t, &versions);
        println!("t{}: {:?}", t.tid, t.values);
        for v in &versions.versions {
            let g = fuser.gamma(*v);
            println!(
                "  version r{}: {:?} w={:.3}",
                index.blocks[v.block].rule_id,
                g.value_vec(),
                g.weight
            );
        }
        for u in &result.used {
            println!(
                "  used    r{}: {:?}",
                index.blocks[u.block].rule_id,
                fuser.gamma(*u).value_vec()
            );
        }
        println!(
            "  fused {:?}  f-score {:.4}  ({} partial fusions)",
            result.apply_to(t),
            result.f_score,
            result.explored
        );
    }
}
