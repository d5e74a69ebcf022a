//! Capacity-bounded partitioning for cleaning large relations part by part.
//!
//! `k` centroids are drawn at random; every other tuple joins the part of its
//! nearest centroid. Parts hold at most `ceil(|T| / k)` tuples. When the
//! nearest part is full, the newcomer displaces that part's farthest member
//! if it is closer than it, and whichever tuple is left over goes to its
//! nearest part with room.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cleaner::stage_one;
use crate::distance::{values_distance, MetricKind};
use crate::error::{Error, Result};
use crate::fusion::stage_two;
use crate::mln_index::{build_index, Block, Gamma, MlnIndex};
use crate::pipeline::CleanOptions;
use crate::relation::{Relation, Tid, Tuple};
use crate::report::{PartSummary, RepairReport};
use crate::rules::Rule;
use crate::weights::aggregate_weights;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Member {
    distance: f64,
    tid: Tid,
}

impl Eq for Member {}

impl Ord for Member {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.tid.cmp(&other.tid))
    }
}

impl PartialOrd for Member {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct Part {
    pub id: usize,
    pub centroid: Tid,
    pub capacity: usize,
    members: BinaryHeap<Member>,
}

impl Part {
    fn new(id: usize, centroid: Tid, capacity: usize) -> Self {
        let mut members = BinaryHeap::with_capacity(capacity);
        members.push(Member {
            distance: 0.0,
            tid: centroid,
        });
        Part {
            id,
            centroid,
            capacity,
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() >= self.capacity
    }

    /// Member ids in ascending order.
    pub fn tids(&self) -> Vec<Tid> {
        let mut tids: Vec<Tid> = self.members.iter().map(|m| m.tid).collect();
        tids.sort_unstable();
        tids
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Eviction {
    pub part: usize,
    pub evicted: Tid,
    pub by: Tid,
    pub moved_to: usize,
}

#[derive(Debug, Clone)]
pub struct Partitioning {
    pub parts: Vec<Part>,
    pub evictions: Vec<Eviction>,
}

impl Partitioning {
    pub fn summaries(&self) -> Vec<PartSummary> {
        self.parts
            .iter()
            .map(|p| PartSummary {
                part_id: p.id,
                centroid: p.centroid,
                size: p.len(),
            })
            .collect()
    }
}

/// Splits `rel` into `k` parts of at most `ceil(|T| / k)` tuples.
pub fn partition(rel: &Relation, k: usize, seed: u64, metric: MetricKind) -> Result<Partitioning> {
    let n = rel.len();
    if k == 0 || k > n {
        return Err(Error::InvalidPartCount {
            parts: k,
            tuples: n,
        });
    }
    let capacity = n.div_ceil(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, n, k).into_vec();
    let tuples = rel.tuples();
    let centroids: Vec<&Tuple> = picks.iter().map(|&i| &tuples[i]).collect();
    let mut parts: Vec<Part> = centroids
        .iter()
        .enumerate()
        .map(|(id, c)| Part::new(id, c.tid, capacity))
        .collect();
    let mut evictions = Vec::new();

    let distances = |t: &Tuple| -> Vec<f64> {
        centroids
            .iter()
            .map(|c| values_distance(&t.values, &c.values, metric).expect("same schema"))
            .collect()
    };
    let nearest_open = |parts: &[Part], d: &[f64]| -> usize {
        (0..parts.len())
            .filter(|&i| !parts[i].is_full())
            .min_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)))
            .expect("total capacity covers every tuple")
    };

    for t in tuples {
        if centroids.iter().any(|c| c.tid == t.tid) {
            continue;
        }
        let d = distances(t);
        let nearest = (0..k)
            .min_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)))
            .expect("k >= 1");
        let incoming = Member {
            distance: d[nearest],
            tid: t.tid,
        };
        if !parts[nearest].is_full() {
            parts[nearest].members.push(incoming);
            continue;
        }
        let farthest = *parts[nearest].members.peek().expect("full part");
        if incoming.distance < farthest.distance {
            parts[nearest].members.pop();
            parts[nearest].members.push(incoming);
            let ev = rel.tuple(farthest.tid).expect("member of rel");
            let ev_d = distances(ev);
            let to = nearest_open(&parts, &ev_d);
            parts[to].members.push(Member {
                distance: ev_d[to],
                tid: farthest.tid,
            });
            evictions.push(Eviction {
                part: nearest,
                evicted: farthest.tid,
                by: t.tid,
                moved_to: to,
            });
        } else {
            let to = nearest_open(&parts, &d);
            parts[to].members.push(Member {
                distance: d[to],
                tid: t.tid,
            });
        }
    }
    Ok(Partitioning { parts, evictions })
}

/// A merged gamma with the `(count, weight)` it had in each part.
type Merged = (Gamma, Vec<(usize, f64)>);

/// Unions the per-part blocks of every rule. Gammas with equal values are
/// merged and weighted by the count-weighted mean of their part weights.
pub fn merge_indexes(parts: &[MlnIndex], rules: &[Rule]) -> Result<MlnIndex> {
    let mut blocks = Vec::with_capacity(rules.len());
    for (b, rule) in rules.iter().enumerate() {
        let mut acc: IndexMap<Vec<String>, Merged> = IndexMap::new();
        for index in parts {
            for gamma in index.blocks[b].gammas() {
                let entry = acc.entry(gamma.value_vec()).or_insert_with(|| {
                    (
                        Gamma::new(gamma.reason.clone(), gamma.result.clone()),
                        Vec::new(),
                    )
                });
                entry.0.tids.extend(gamma.tids.iter().copied());
                entry.1.push((gamma.count(), gamma.weight));
            }
        }
        let mut block = Block::empty_for(rule);
        for (_, (mut gamma, per_part)) in acc {
            gamma.weight = aggregate_weights(&per_part)?;
            block.insert(gamma);
        }
        blocks.push(block);
    }
    Ok(MlnIndex { blocks })
}

#[derive(Debug, Clone)]
pub struct PartitionedRun {
    pub relation: Relation,
    pub report: RepairReport,
    pub partitioning: Partitioning,
    /// Wall time of each part's first stage. Not part of the report.
    pub timings: Vec<Duration>,
}

/// First stage on every part in parallel, merged index, then one global
/// second stage.
pub fn run_partitioned(
    rel: &Relation,
    rules: &[Rule],
    opts: &CleanOptions,
) -> Result<PartitionedRun> {
    opts.validate()?;
    let partitioning = partition(rel, opts.parts, opts.seed, opts.metric)?;
    let agp = opts.agp();
    let cleaned: Vec<(MlnIndex, RepairReport, Duration)> = partitioning
        .parts
        .par_iter()
        .map(|part| {
            let start = Instant::now();
            let sub = rel.subset(&part.tids());
            let mut index = build_index(&sub, rules);
            let report = stage_one(&mut index, &agp, &opts.weights, opts.metric);
            (index, report, start.elapsed())
        })
        .collect();

    let mut report = RepairReport::default();
    let mut indexes = Vec::with_capacity(cleaned.len());
    let mut timings = Vec::with_capacity(cleaned.len());
    for (index, r, t) in cleaned {
        report.extend(r);
        indexes.push(index);
        timings.push(t);
    }
    let merged = merge_indexes(&indexes, rules)?;
    let (relation, fused) = stage_two(rel, &merged);
    report.extend(fused);
    report.parts = partitioning.summaries();
    Ok(PartitionedRun {
        relation,
        report,
        partitioning,
        timings,
    })
}
