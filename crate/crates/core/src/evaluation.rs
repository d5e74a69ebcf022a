//! Error injection and repair scoring.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mln_index::build_index;
use crate::relation::{Relation, Tid, Tuple};
use crate::report::RepairReport;
use crate::rules::Rule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    /// Fraction of target cells to corrupt.
    pub rate: f64,
    /// Fraction of corrupted cells that get another domain value; the rest get typos.
    pub replacement_ratio: f64,
    pub seed: u64,
    /// Attributes to corrupt; `None` means every attribute some rule mentions.
    pub target_attributes: Option<Vec<String>>,
}

impl Default for ErrorSpec {
    fn default() -> Self {
        ErrorSpec {
            rate: 0.05,
            replacement_ratio: 0.5,
            seed: 0,
            target_attributes: None,
        }
    }
}

impl ErrorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidErrorSpec(format!(
                "error rate {} outside [0, 1]",
                self.rate
            )));
        }
        if !(0.0..=1.0).contains(&self.replacement_ratio) {
            return Err(Error::InvalidErrorSpec(format!(
                "replacement ratio {} outside [0, 1]",
                self.replacement_ratio
            )));
        }
        Ok(())
    }

    /// (corrupted cells, replacements) for `cells` target cells.
    pub fn counts(&self, cells: usize) -> (usize, usize) {
        let n_err = (self.rate * cells as f64 + 1e-9).floor() as usize;
        let n_rep = (self.replacement_ratio * n_err as f64 + 1e-9).floor() as usize;
        (n_err, n_rep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ErrorKind {
    Typo,
    Replacement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedError {
    pub tid: Tid,
    pub attribute: String,
    pub clean_value: String,
    pub dirty_value: String,
    pub kind: ErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub clean: Relation,
    pub errors: Vec<InjectedError>,
}

impl GroundTruth {
    /// Reconstructs the error list by comparing a clean and a dirty relation
    /// with the same tuple ids. A dirty value equal to the clean value with one
    /// character removed counts as a typo.
    pub fn from_relations(clean: Relation, dirty: &Relation) -> Result<Self> {
        if clean.len() != dirty.len() || clean.schema() != dirty.schema() {
            return Err(Error::Inconsistent(
                "clean and dirty relations differ in shape".into(),
            ));
        }
        let mut errors = Vec::new();
        for (c, d) in clean.tuples().iter().zip(dirty.tuples()) {
            if c.tid != d.tid {
                return Err(Error::Inconsistent(format!(
                    "tuple id {} in clean relation, {} in dirty relation",
                    c.tid, d.tid
                )));
            }
            for (p, (cv, dv)) in c.values.iter().zip(&d.values).enumerate() {
                if cv != dv {
                    let kind = if is_deletion_of(cv, dv) {
                        ErrorKind::Typo
                    } else {
                        ErrorKind::Replacement
                    };
                    errors.push(InjectedError {
                        tid: c.tid,
                        attribute: clean.schema().name(p).to_owned(),
                        clean_value: cv.clone(),
                        dirty_value: dv.clone(),
                        kind,
                    });
                }
            }
        }
        Ok(GroundTruth { clean, errors })
    }
}

fn is_deletion_of(clean: &str, dirty: &str) -> bool {
    let c: Vec<char> = clean.chars().collect();
    let d: Vec<char> = dirty.chars().collect();
    c.len() == d.len() + 1 && (0..c.len()).any(|i| c[..i] == d[..i] && c[i + 1..] == d[i..])
}

fn target_positions(rel: &Relation, rules: &[Rule], spec: &ErrorSpec) -> Result<Vec<usize>> {
    let schema = rel.schema();
    let mut positions = BTreeSet::new();
    match &spec.target_attributes {
        Some(names) => {
            for name in names {
                let p = schema.position(name).ok_or_else(|| {
                    Error::InvalidErrorSpec(format!("unknown target attribute `{name}`"))
                })?;
                positions.insert(p);
            }
        }
        None => positions.extend(rules.iter().flat_map(Rule::positions)),
    }
    Ok(positions.into_iter().collect())
}

/// Corrupts `floor(rate * |T| * |targets|)` distinct cells of `clean`.
pub fn inject_errors(
    clean: &Relation,
    rules: &[Rule],
    spec: &ErrorSpec,
) -> Result<(Relation, GroundTruth)> {
    spec.validate()?;
    let schema = clean.schema();
    let targets = target_positions(clean, rules, spec)?;
    let (n_err, n_rep) = spec.counts(clean.len() * targets.len());
    let n_typo = n_err - n_rep;

    let domains: HashMap<usize, Vec<&str>> = targets
        .iter()
        .map(|&p| {
            let set: BTreeSet<&str> = clean.tuples().iter().map(|t| t.value(p)).collect();
            (p, set.into_iter().collect())
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cells: Vec<(usize, usize)> = (0..clean.len())
        .flat_map(|i| targets.iter().map(move |&p| (i, p)))
        .collect();
    cells.shuffle(&mut rng);

    let mut taken = vec![false; cells.len()];
    let mut chosen: Vec<(usize, usize, ErrorKind)> = Vec::with_capacity(n_err);
    for (k, &(i, p)) in cells.iter().enumerate() {
        if chosen.len() == n_rep {
            break;
        }
        if domains[&p].len() >= 2 {
            taken[k] = true;
            chosen.push((i, p, ErrorKind::Replacement));
        }
    }
    if chosen.len() < n_rep {
        return Err(Error::InfeasibleInjection(format!(
            "{n_rep} replacements requested, {} cells have a domain of two or more values",
            chosen.len()
        )));
    }
    let mut typos = 0;
    for (k, &(i, p)) in cells.iter().enumerate() {
        if typos == n_typo {
            break;
        }
        if !taken[k] && clean.tuples()[i].value(p).chars().count() >= 2 {
            chosen.push((i, p, ErrorKind::Typo));
            typos += 1;
        }
    }
    if typos < n_typo {
        return Err(Error::InfeasibleInjection(format!(
            "{n_typo} typos requested, only {typos} remaining cells hold two or more characters"
        )));
    }

    let mut tuples: Vec<Tuple> = clean.tuples().to_vec();
    let mut errors = Vec::with_capacity(n_err);
    for (i, p, kind) in chosen {
        let old = tuples[i].values[p].clone();
        let new = match kind {
            ErrorKind::Replacement => {
                let others: Vec<&str> = domains[&p].iter().copied().filter(|v| *v != old).collect();
                others[rng.random_range(0..others.len())].to_owned()
            }
            ErrorKind::Typo => {
                let mut chars: Vec<char> = old.chars().collect();
                chars.remove(rng.random_range(0..chars.len()));
                chars.into_iter().collect()
            }
        };
        tuples[i].values[p] = new.clone();
        errors.push(InjectedError {
            tid: tuples[i].tid,
            attribute: schema.name(p).to_owned(),
            clean_value: old,
            dirty_value: new,
            kind,
        });
    }
    errors.sort_by(|a, b| {
        a.tid.cmp(&b.tid).then_with(|| {
            schema
                .position(&a.attribute)
                .cmp(&schema.position(&b.attribute))
        })
    });
    let dirty = Relation::from_tuples(schema.clone(), tuples)?;
    Ok((
        dirty,
        GroundTruth {
            clean: clean.clone(),
            errors,
        },
    ))
}

/// Precision, recall and F1. `degenerate` marks a zero denominator, in which
/// case the affected values are reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

impl Prf {
    pub fn new(correct: usize, predicted: usize, actual: usize) -> Self {
        Self::from_counts(correct, predicted, correct, actual)
    }

    fn from_counts(p_num: usize, p_den: usize, r_num: usize, r_den: usize) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(p_num, p_den);
        let recall = ratio(r_num, r_den);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
            degenerate: p_den == 0 || r_den == 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub overall: Prf,
    pub updated_cells: usize,
    pub correct_cells: usize,
    pub erroneous_cells: usize,
    /// Abnormal group merges.
    pub agp: Prf,
    /// Gamma repairs.
    pub rsc: Prf,
    /// Cells where a tuple's versions conflicted.
    pub fscr: Prf,
}

/// Scores a repair against the ground truth.
///
/// `repaired` may lack tuples removed as duplicates; those are scored through
/// the tuple the report says was kept in their place.
pub fn score(
    truth: &GroundTruth,
    dirty: &Relation,
    repaired: &Relation,
    report: &RepairReport,
    rules: &[Rule],
) -> Result<MetricsBundle> {
    let clean = &truth.clean;
    if clean.len() != dirty.len() || clean.schema() != dirty.schema() {
        return Err(Error::Inconsistent(
            "clean and dirty relations differ in shape".into(),
        ));
    }
    let removed = report.removed_duplicates();
    let effective = |tid: Tid| -> Result<&Tuple> {
        let mut at = tid;
        for _ in 0..=removed.len() {
            if let Some(t) = repaired.tuple(at) {
                return Ok(t);
            }
            match removed.get(&at) {
                Some(&kept) => at = kept,
                None => break,
            }
        }
        Err(Error::Inconsistent(format!(
            "tuple {tid} is neither in the repaired relation nor a removed duplicate"
        )))
    };

    let mut updated = 0;
    let mut correct = 0;
    let mut erroneous = 0;
    for (c, d) in clean.tuples().iter().zip(dirty.tuples()) {
        if c.tid != d.tid {
            return Err(Error::Inconsistent(format!(
                "tuple id {} in clean relation, {} in dirty relation",
                c.tid, d.tid
            )));
        }
        let r = effective(d.tid)?;
        for ((cv, dv), rv) in c.values.iter().zip(&d.values).zip(&r.values) {
            if cv != dv {
                erroneous += 1;
            }
            if rv != dv {
                updated += 1;
                if rv == cv {
                    correct += 1;
                }
            }
        }
    }
    let overall = Prf::new(correct, updated, erroneous);

    let clean_values = |tid: Tid, positions: &[usize]| -> Result<Vec<&str>> {
        let t = clean.tuple(tid).ok_or_else(|| {
            Error::Inconsistent(format!("tuple {tid} missing from clean relation"))
        })?;
        Ok(positions.iter().map(|&p| t.value(p)).collect())
    };
    let rule_by_id: HashMap<usize, &Rule> = rules.iter().map(|r| (r.id, r)).collect();
    let rule = |id: usize| {
        rule_by_id
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Inconsistent(format!("report names unknown rule {id}")))
    };

    let mut merges_ok = 0;
    for m in &report.merges {
        let positions = rule(m.rule_id)?.reason_positions();
        let mut ok = true;
        for &tid in &m.tids {
            ok &= clean_values(tid, &positions)? == m.to_key;
        }
        merges_ok += ok as usize;
    }
    let mut repairs_ok = 0;
    for g in &report.gamma_repairs {
        let positions = rule(g.rule_id)?.positions();
        let mut ok = true;
        for &tid in &g.tids {
            ok &= clean_values(tid, &positions)? == g.to;
        }
        repairs_ok += ok as usize;
    }

    let dirty_index = build_index(dirty, rules);
    let mut abnormal_truth = 0;
    let mut wrong_gammas = 0;
    for (block, rule) in dirty_index.blocks.iter().zip(rules) {
        let reason = rule.reason_positions();
        let all = rule.positions();
        for group in block.groups.values() {
            let mut every_member_off = true;
            for gamma in &group.gammas {
                let values = gamma.value_vec();
                let mut some_member_off = false;
                for &tid in &gamma.tids {
                    every_member_off &= clean_values(tid, &reason)? != group.key;
                    some_member_off |= clean_values(tid, &all)? != values;
                }
                wrong_gammas += some_member_off as usize;
            }
            abnormal_truth += every_member_off as usize;
        }
    }
    let agp = Prf::new(merges_ok, report.merges.len(), abnormal_truth);
    let rsc = Prf::new(repairs_ok, report.gamma_repairs.len(), wrong_gammas);

    let mut conflict_wrong = 0;
    let mut conflict_fixed = 0;
    for cell in &report.conflict_cells {
        let p = clean.schema().position(&cell.attribute).ok_or_else(|| {
            Error::Inconsistent(format!(
                "report names unknown attribute `{}`",
                cell.attribute
            ))
        })?;
        let (Some(c), Some(d)) = (clean.tuple(cell.tid), dirty.tuple(cell.tid)) else {
            return Err(Error::Inconsistent(format!(
                "conflict cell on unknown tuple {}",
                cell.tid
            )));
        };
        if c.value(p) != d.value(p) {
            conflict_wrong += 1;
            if effective(cell.tid)?.value(p) == c.value(p) {
                conflict_fixed += 1;
            }
        }
    }
    let fscr = Prf::from_counts(conflict_fixed, conflict_wrong, conflict_fixed, erroneous);

    Ok(MetricsBundle {
        overall,
        updated_cells: updated,
        correct_cells: correct,
        erroneous_cells: erroneous,
        agp,
        rsc,
        fscr,
    })
}

/// Gives a relation read back from a file (ids 1..n) the ids of the dirty
/// tuples that survived deduplication, in order.
pub fn align_repaired(
    repaired: Relation,
    dirty: &Relation,
    report: &RepairReport,
) -> Result<Relation> {
    let removed = report.removed_duplicates();
    let kept: Vec<Tid> = dirty.tids().filter(|t| !removed.contains_key(t)).collect();
    repaired.with_tids(&kept)
}
