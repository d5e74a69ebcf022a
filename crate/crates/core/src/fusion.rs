//! Second cleaning stage: fuse each tuple's rule-local versions into one tuple.
//!
//! After the first stage every block holds one gamma per tuple it covers, and
//! versions of the same tuple may disagree on shared attributes. Fusion merges
//! the versions one at a time in every possible order. When the next version
//! conflicts with what has been merged so far, the highest-weight gamma of
//! that version's block that agrees with the partial fusion is used instead;
//! if none exists the order is abandoned. The fused tuple with the largest
//! f-score (product of the weights of the gammas used) wins, first found on
//! ties. Exact duplicate tuples are removed afterwards.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mln_index::{Gamma, MlnIndex};
use crate::relation::{Relation, Tid, Tuple};
use crate::report::{CellRef, RepairEntry, RepairReport, Stage};

/// Product of weights.
pub fn f_score(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyWeights);
    }
    Ok(weights.iter().product())
}

/// Location of a gamma: block index, group index, gamma index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GammaRef {
    pub block: usize,
    pub group: usize,
    pub gamma: usize,
}

/// A tuple's versions, ordered by block (and therefore rule id).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VersionSet {
    pub tid: Tid,
    pub versions: Vec<GammaRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionResult {
    pub tid: Tid,
    /// Fused value per attribute position; `None` where no version covers it.
    pub fused: Vec<Option<String>>,
    pub f_score: f64,
    /// Gammas merged into the winning fusion, in merge order.
    pub used: Vec<GammaRef>,
    /// Partial fusions built while searching.
    pub explored: usize,
}

impl FusionResult {
    /// Fused values with uncovered attributes taken from `tuple`.
    pub fn apply_to(&self, tuple: &Tuple) -> Vec<String> {
        self.fused
            .iter()
            .zip(&tuple.values)
            .map(|(f, v)| f.clone().unwrap_or_else(|| v.clone()))
            .collect()
    }
}

/// Read-only view of a cleaned index prepared for per-tuple fusion.
pub struct Fuser<'a> {
    index: &'a MlnIndex,
    arity: usize,
    positions: Vec<Vec<usize>>,
    locators: Vec<HashMap<Tid, (usize, usize)>>,
    /// Per block, every gamma by descending weight, ties by rendering.
    ranked: Vec<Vec<(usize, usize)>>,
}

impl<'a> Fuser<'a> {
    pub fn new(index: &'a MlnIndex, arity: usize) -> Self {
        let positions = index.blocks.iter().map(|b| b.positions()).collect();
        let locators = index.blocks.iter().map(|b| b.locate_all()).collect();
        let ranked = index
            .blocks
            .iter()
            .map(|b| {
                let mut refs: Vec<(usize, usize)> = b
                    .groups
                    .values()
                    .enumerate()
                    .flat_map(|(gi, g)| (0..g.gammas.len()).map(move |ji| (gi, ji)))
                    .collect();
                refs.sort_by(|&x, &y| {
                    let (a, c) = (b.gamma_at(x), b.gamma_at(y));
                    c.weight.total_cmp(&a.weight).then_with(|| a.render_cmp(c))
                });
                refs
            })
            .collect();
        Fuser {
            index,
            arity,
            positions,
            locators,
            ranked,
        }
    }

    pub fn gamma(&self, r: GammaRef) -> &'a Gamma {
        &self.index.blocks[r.block].groups[r.group].gammas[r.gamma]
    }

    pub fn version_set(&self, tid: Tid) -> VersionSet {
        let versions = self
            .locators
            .iter()
            .enumerate()
            .filter_map(|(block, loc)| {
                loc.get(&tid).map(|&(group, gamma)| GammaRef {
                    block,
                    group,
                    gamma,
                })
            })
            .collect();
        VersionSet { tid, versions }
    }

    fn conflicts(&self, fused: &[Option<&str>], block: usize, gamma: &Gamma) -> bool {
        self.positions[block]
            .iter()
            .zip(gamma.values())
            .any(|(&p, v)| matches!(fused[p], Some(f) if f != v))
    }

    /// The version itself when it agrees with the partial fusion, otherwise the
    /// best agreeing substitute from its block.
    fn candidate(&self, fused: &[Option<&str>], version: GammaRef) -> Option<GammaRef> {
        let own = self.gamma(version);
        if !self.conflicts(fused, version.block, own) {
            return Some(version);
        }
        self.ranked[version.block]
            .iter()
            .map(|&(group, gamma)| GammaRef {
                block: version.block,
                group,
                gamma,
            })
            .filter(|&r| r != version)
            .find(|&r| !self.conflicts(fused, r.block, self.gamma(r)))
    }

    pub fn fuse(&self, tuple: &Tuple, vs: &VersionSet) -> FusionResult {
        let mut search = Search {
            fuser: self,
            fused: vec![None; self.arity],
            path: Vec::new(),
            best_f: 0.0,
            best: None,
            explored: 0,
        };
        let mut remaining = vs.versions.clone();
        search.explore(&mut remaining, 1.0);

        match search.best {
            Some((fused, used)) => FusionResult {
                tid: tuple.tid,
                fused,
                f_score: search.best_f,
                used,
                explored: search.explored,
            },
            None => FusionResult {
                tid: tuple.tid,
                fused: tuple.values.iter().cloned().map(Some).collect(),
                f_score: 0.0,
                used: Vec::new(),
                explored: search.explored,
            },
        }
    }

    /// Attributes on which the tuple's versions disagree with each other.
    pub fn conflict_positions(&self, vs: &VersionSet) -> Vec<usize> {
        let mut seen: Vec<Option<&str>> = vec![None; self.arity];
        let mut conflict = vec![false; self.arity];
        for &v in &vs.versions {
            for (&p, val) in self.positions[v.block].iter().zip(self.gamma(v).values()) {
                match seen[p] {
                    Some(prev) if prev != val => conflict[p] = true,
                    Some(_) => {}
                    None => seen[p] = Some(val),
                }
            }
        }
        (0..self.arity).filter(|&p| conflict[p]).collect()
    }
}

type Best = (Vec<Option<String>>, Vec<GammaRef>);

struct Search<'s, 'a> {
    fuser: &'s Fuser<'a>,
    fused: Vec<Option<&'a str>>,
    path: Vec<GammaRef>,
    best_f: f64,
    best: Option<Best>,
    explored: usize,
}

impl<'a> Search<'_, 'a> {
    fn explore(&mut self, remaining: &mut Vec<GammaRef>, f: f64) {
        if remaining.is_empty() {
            if !self.path.is_empty() && f > self.best_f {
                self.best_f = f;
                let fused = self.fused.iter().map(|v| v.map(str::to_owned)).collect();
                self.best = Some((fused, self.path.clone()));
            }
            return;
        }
        for j in 0..remaining.len() {
            let version = remaining.remove(j);
            if let Some(pick) = self.fuser.candidate(&self.fused, version) {
                self.explored += 1;
                let gamma = self.fuser.gamma(pick);
                let mut newly_set = Vec::new();
                for (&p, v) in self.fuser.positions[pick.block].iter().zip(gamma.values()) {
                    if self.fused[p].is_none() {
                        self.fused[p] = Some(v);
                        newly_set.push(p);
                    }
                }
                self.path.push(pick);
                self.explore(remaining, f * gamma.weight);
                self.path.pop();
                for p in newly_set {
                    self.fused[p] = None;
                }
            }
            remaining.insert(j, version);
        }
    }
}

/// Fuses one tuple against a cleaned index.
pub fn fuse_tuple(t: &Tuple, vs: &VersionSet, index: &MlnIndex, arity: usize) -> FusionResult {
    Fuser::new(index, arity).fuse(t, vs)
}

/// Rewrites every tuple to its best fusion, then drops exact duplicates,
/// keeping the smallest tuple id of each set.
pub fn stage_two(rel: &Relation, index: &MlnIndex) -> (Relation, RepairReport) {
    let schema = rel.schema();
    let fuser = Fuser::new(index, schema.arity());

    let fused: Vec<(Tuple, Vec<RepairEntry>, Vec<CellRef>)> = rel
        .tuples()
        .par_iter()
        .map(|t| {
            let vs = fuser.version_set(t.tid);
            let result = fuser.fuse(t, &vs);
            let values = result.apply_to(t);
            let entries = t
                .values
                .iter()
                .zip(&values)
                .enumerate()
                .filter(|(_, (old, new))| old != new)
                .map(|(p, (old, new))| RepairEntry {
                    tid: t.tid,
                    attribute: Some(schema.name(p).to_owned()),
                    old_value: old.clone(),
                    new_value: new.clone(),
                    stage: Stage::Fscr,
                    rule_id: None,
                    duplicate_of: None,
                })
                .collect();
            let conflicts = fuser
                .conflict_positions(&vs)
                .into_iter()
                .map(|p| CellRef {
                    tid: t.tid,
                    attribute: schema.name(p).to_owned(),
                })
                .collect();
            (Tuple { tid: t.tid, values }, entries, conflicts)
        })
        .collect();

    let mut report = RepairReport::default();
    let mut kept = Vec::with_capacity(fused.len());
    let mut first_seen: HashMap<Vec<String>, Tid> = HashMap::new();
    for (tuple, entries, conflicts) in fused {
        report.entries.extend(entries);
        report.conflict_cells.extend(conflicts);
        match first_seen.get(&tuple.values) {
            Some(&keep) => report.entries.push(RepairEntry {
                tid: tuple.tid,
                attribute: None,
                old_value: String::new(),
                new_value: String::new(),
                stage: Stage::Dedupe,
                rule_id: None,
                duplicate_of: Some(keep),
            }),
            None => {
                first_seen.insert(tuple.values.clone(), tuple.tid);
                kept.push(tuple);
            }
        }
    }
    let clean = Relation::from_tuples(schema.clone(), kept).expect("ids stay ordered");
    (clean, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cleaner::{stage_one, AgpConfig};
    use crate::distance::MetricKind;
    use crate::mln_index::build_index;
    use crate::samples::hospital;
    use crate::weights::WeightConfig;

    fn cleaned_hospital() -> (Relation, MlnIndex) {
        let (rel, rules) = hospital();
        let mut index = build_index(&rel, &rules);
        stage_one(
            &mut index,
            &AgpConfig { tau: 1 },
            &WeightConfig::default(),
            MetricKind::Levenshtein,
        );
        (rel, index)
    }

    #[test]
    fn f_score_examples() {
        assert!((f_score(&[0.5, 0.4]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(f_score(&[0.7]).unwrap(), 0.7);
        assert_eq!(f_score(&[0.3, 0.0, 0.9]).unwrap(), 0.0);
        assert!(matches!(f_score(&[]), Err(Error::EmptyWeights)));
    }

    #[test]
    fn fuses_t3() {
        let (rel, index) = cleaned_hospital();
        let fuser = Fuser::new(&index, 4);
        let t3 = rel.tuple(3).unwrap();
        let vs = fuser.version_set(3);
        assert_eq!(vs.versions.len(), 3);
        let r = fuser.fuse(t3, &vs);
        assert_eq!(r.apply_to(t3), ["ELIZA", "BOAZ", "AL", "2567688400"]);
        assert!(r.f_score > 0.0);
        assert!(r.explored <= 6 * 3);
    }

    #[test]
    fn first_order_for_t3_dead_ends() {
        // Merging the FD version then the DC version leaves CT=DOTHAN, and the
        // CFD block has no gamma agreeing with it.
        let (_, index) = cleaned_hospital();
        let fuser = Fuser::new(&index, 4);
        let vs = fuser.version_set(3);
        let mut fused: Vec<Option<&str>> = vec![None; 4];
        for v in &vs.versions[..2] {
            let pick = fuser.candidate(&fused, *v).unwrap();
            assert_eq!(pick, *v);
            for (&p, val) in fuser.positions[v.block]
                .iter()
                .zip(fuser.gamma(pick).values())
            {
                fused[p].get_or_insert(val);
            }
        }
        assert_eq!(fused[1], Some("DOTHAN"));
        assert!(fuser.candidate(&fused, vs.versions[2]).is_none());
    }

    #[test]
    fn conflict_free_versions_take_the_union() {
        let (rel, index) = cleaned_hospital();
        let fuser = Fuser::new(&index, 4);
        let t1 = rel.tuple(1).unwrap();
        let vs = fuser.version_set(1);
        assert_eq!(vs.versions.len(), 2);
        let r = fuser.fuse(t1, &vs);
        let weights: Vec<f64> = vs.versions.iter().map(|&v| fuser.gamma(v).weight).collect();
        assert_eq!(r.f_score, f_score(&weights).unwrap());
        assert_eq!(r.fused[0], None);
        assert_eq!(r.apply_to(t1), ["ALABAMA", "DOTHAN", "AL", "3347938701"]);
    }

    #[test]
    fn no_versions_keeps_values() {
        let (rel, index) = cleaned_hospital();
        let t = rel.tuple(1).unwrap();
        let vs = VersionSet {
            tid: 1,
            versions: vec![],
        };
        let r = fuse_tuple(t, &vs, &index, 4);
        assert_eq!(r.f_score, 0.0);
        assert_eq!(r.apply_to(t), t.values);
    }

    #[test]
    fn hospital_collapses_to_two_rows() {
        let (rel, index) = cleaned_hospital();
        let (clean, report) = stage_two(&rel, &index);
        assert_eq!(
            clean.values(),
            [
                vec!["ALABAMA", "DOTHAN", "AL", "3347938701"],
                vec!["ELIZA", "BOAZ", "AL", "2567688400"],
            ]
        );
        assert_eq!(clean.tids().collect::<Vec<_>>(), [1, 3]);
        assert_eq!(clean.len() + report.count(Stage::Dedupe), rel.len());
        let removed = report.removed_duplicates();
        assert_eq!(removed[&2], 1);
        assert_eq!(removed[&6], 3);
        assert!(report.conflict_cells.contains(&CellRef {
            tid: 3,
            attribute: "CT".into()
        }));
    }

    #[test]
    fn clean_relation_passes_through() {
        let (rel, rules) = hospital();
        let clean = rel.subset(&[1, 5]);
        let mut index = build_index(&clean, &rules);
        stage_one(
            &mut index,
            &AgpConfig { tau: 0 },
            &WeightConfig::default(),
            MetricKind::Levenshtein,
        );
        let (out, report) = stage_two(&clean, &index);
        assert_eq!(out, clean);
        assert!(report.entries.is_empty());
    }
}
