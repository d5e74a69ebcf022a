#![allow(dead_code)]

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dataclean::mln_index::{Block, Gamma, MlnIndex};
use dataclean::relation::{Relation, Schema, Tuple};
use dataclean::rules::{parse_rule, parse_rules_str, Rule};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=5);
    (0..n)
        .map(|_| rng.random_range(b'a'..=b'e') as char)
        .collect()
}

/// A random relation of up to `max_rows` rows with 1 to 3 functional
/// dependencies over disjoint reason/result attributes.
pub fn random_fd_dataset(seed: u64, max_rows: usize) -> (Relation, Vec<Rule>) {
    let mut rng = rng(seed);
    let arity = rng.random_range(3..=6);
    let names: Vec<String> = (0..arity).map(|i| format!("A{i}")).collect();
    let schema = Schema::new(names.clone()).unwrap();
    let domains: Vec<Vec<String>> = (0..arity)
        .map(|_| {
            let size = rng.random_range(2..=8);
            (0..size).map(|_| word(&mut rng)).collect()
        })
        .collect();
    let rows = rng.random_range(1..=max_rows);
    let data: Vec<Vec<String>> = (0..rows)
        .map(|_| {
            domains
                .iter()
                .map(|d| d[rng.random_range(0..d.len())].clone())
                .collect()
        })
        .collect();
    let rel = Relation::from_rows(schema.clone(), data).unwrap();

    let n_rules = rng.random_range(1..=3);
    let mut text = String::new();
    for _ in 0..n_rules {
        let mut attrs: Vec<usize> = (0..arity).collect();
        for i in (1..attrs.len()).rev() {
            attrs.swap(i, rng.random_range(0..=i));
        }
        let reason = rng.random_range(1..=2.min(arity - 1));
        let lhs = attrs[..reason]
            .iter()
            .map(|&i| names[i].as_str())
            .join(", ");
        text.push_str(&format!("FD: {lhs} -> {}\n", names[attrs[reason]]));
    }
    let rules = parse_rules_str(&text, &schema).unwrap();
    (rel, rules)
}

/// One tuple (tid 1) with a version in each of `m` blocks, plus competing
/// gammas with random weights.
pub struct FusionCase {
    pub index: MlnIndex,
    pub tuple: Tuple,
    pub arity: usize,
}

pub fn random_fusion_case(rng: &mut ChaCha8Rng, m: usize) -> FusionCase {
    let arity = rng.random_range(3..=6);
    let schema = Schema::positional(arity);
    let domain = ["x", "y", "z"];
    let pick = |rng: &mut ChaCha8Rng| domain[rng.random_range(0..domain.len())].to_string();
    let tie_weights = rng.random_bool(0.5);
    let mut next_tid = 2;
    let mut blocks = Vec::with_capacity(m);
    for b in 0..m {
        let mut attrs: Vec<usize> = (0..arity).collect();
        for i in (1..attrs.len()).rev() {
            attrs.swap(i, rng.random_range(0..=i));
        }
        let reason = rng.random_range(1..=2.min(arity - 1));
        let text = format!(
            "FD: {} -> A{}",
            attrs[..reason]
                .iter()
                .map(|&i| format!("A{}", i + 1))
                .join(", "),
            attrs[reason] + 1
        );
        let rule = parse_rule(&text, b + 1, &schema).unwrap();
        let mut block = Block::empty_for(&rule);
        let gammas = rng.random_range(1..=5);
        for g in 0..gammas {
            let reason_vals = (0..reason).map(|_| pick(rng)).collect();
            let mut gamma = Gamma::new(reason_vals, vec![pick(rng)]);
            if g == 0 {
                gamma.tids.insert(1);
            } else {
                gamma.tids.insert(next_tid);
                next_tid += 1;
            }
            block.insert(gamma);
        }
        for gamma in block.gammas_mut() {
            gamma.weight = if tie_weights {
                [0.25, 0.5, 0.75][rng.random_range(0..3)]
            } else {
                rng.random_range(0.01..1.0)
            };
        }
        blocks.push(block);
    }
    let tuple = Tuple {
        tid: 1,
        values: (0..arity).map(|_| pick(rng)).collect(),
    };
    FusionCase {
        index: MlnIndex { blocks },
        tuple,
        arity,
    }
}

/// Best f-score over every merge order, each order simulated on its own.
pub fn exhaustive_best_f(case: &FusionCase) -> f64 {
    let blocks = &case.index.blocks;
    let versions: Vec<&Gamma> = blocks
        .iter()
        .map(|b| b.gammas().find(|g| g.tids.contains(&1)).unwrap())
        .collect();
    let m = versions.len();
    let mut best = 0.0;
    for order in (0..m).permutations(m) {
        if m == 0 {
            break;
        }
        let mut fused: Vec<Option<String>> = vec![None; case.arity];
        let mut f = 1.0;
        let mut complete = true;
        for &i in &order {
            let positions = blocks[i].positions();
            let agrees = |g: &Gamma, fused: &[Option<String>]| {
                positions
                    .iter()
                    .zip(g.values())
                    .all(|(&p, v)| fused[p].as_deref().is_none_or(|f| f == v))
            };
            let chosen = if agrees(versions[i], &fused) {
                Some(versions[i])
            } else {
                let mut candidates: Vec<&Gamma> = blocks[i]
                    .gammas()
                    .filter(|g| !g.same_values(versions[i]))
                    .collect();
                candidates
                    .sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.render_cmp(b)));
                candidates.into_iter().find(|g| agrees(g, &fused))
            };
            let Some(g) = chosen else {
                complete = false;
                break;
            };
            for (&p, v) in positions.iter().zip(g.values()) {
                fused[p].get_or_insert_with(|| v.to_string());
            }
            f *= g.weight;
        }
        if complete && f > best {
            best = f;
        }
    }
    best
}

pub fn distinct_gamma_count(block: &Block) -> usize {
    block
        .gammas()
        .map(|g| g.value_vec())
        .collect::<BTreeSet<_>>()
        .len()
}
