//! Two-layer index over the ground instances of every rule.
//!
//! The first layer holds one [`Block`] per rule. Inside a block, each tuple the
//! rule applies to contributes one [`Gamma`]: its values on the rule's reason
//! attributes followed by its values on the result attributes. Gammas sharing
//! the same reason values form a [`Group`]; tuples with identical values share
//! one gamma, whose `tids` records every backing tuple.
//!
//! A clean block has exactly one gamma per group. More than one means some
//! reason value is mapped to several results, which is what the cleaning
//! stages repair.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::{Relation, Tid};
use crate::rules::{quote, to_mln_clause, Rule, RuleKind};

/// One ground instance of a rule ("a piece of data").
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gamma {
    pub reason: Vec<String>,
    pub result: Vec<String>,
    pub tids: BTreeSet<Tid>,
    pub weight: f64,
}

impl Gamma {
    pub fn new(reason: Vec<String>, result: Vec<String>) -> Self {
        Gamma {
            reason,
            result,
            tids: BTreeSet::new(),
            weight: 0.0,
        }
    }

    /// Number of tuples backing this gamma.
    pub fn count(&self) -> usize {
        self.tids.len()
    }

    /// Reason values followed by result values.
    pub fn values(&self) -> impl Iterator<Item = &str> {
        self.reason.iter().chain(&self.result).map(String::as_str)
    }

    pub fn value_vec(&self) -> Vec<String> {
        self.values().map(str::to_owned).collect()
    }

    /// Total order on rendered values, used for every deterministic tie-break.
    pub fn render_cmp(&self, other: &Gamma) -> Ordering {
        self.reason
            .cmp(&other.reason)
            .then_with(|| self.result.cmp(&other.result))
    }

    pub fn same_values(&self, other: &Gamma) -> bool {
        self.reason == other.reason && self.result == other.result
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Group {
    pub key: Vec<String>,
    pub gammas: Vec<Gamma>,
    pub abnormal: bool,
}

impl Group {
    fn new(key: Vec<String>) -> Self {
        Group {
            key,
            gammas: Vec::new(),
            abnormal: false,
        }
    }

    /// Tuples backing the group.
    pub fn count(&self) -> usize {
        self.gammas.iter().map(Gamma::count).sum()
    }

    /// The gamma backed by the most tuples; ties go to the smallest rendering.
    pub fn star(&self) -> &Gamma {
        self.gammas
            .iter()
            .min_by(|a, b| b.count().cmp(&a.count()).then_with(|| a.render_cmp(b)))
            .expect("groups are never empty")
    }

    /// Adds a gamma, uniting tuple ids with an existing gamma of equal values.
    pub fn absorb(&mut self, gamma: Gamma) {
        debug_assert_eq!(gamma.reason, self.key);
        match self.gammas.iter_mut().find(|g| g.result == gamma.result) {
            Some(existing) => existing.tids.extend(gamma.tids),
            None => self.gammas.push(gamma),
        }
    }
}

/// All ground instances of one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub rule_id: usize,
    pub kind: RuleKind,
    pub reason_attributes: Vec<String>,
    pub result_attributes: Vec<String>,
    pub reason_positions: Vec<usize>,
    pub result_positions: Vec<usize>,
    pub groups: IndexMap<Vec<String>, Group>,
}

impl Block {
    pub fn empty_for(rule: &Rule) -> Self {
        Block {
            rule_id: rule.id,
            kind: rule.kind,
            reason_attributes: rule.reason.iter().map(|p| p.attribute.clone()).collect(),
            result_attributes: rule.result.iter().map(|p| p.attribute.clone()).collect(),
            reason_positions: rule.reason_positions(),
            result_positions: rule.result_positions(),
            groups: IndexMap::new(),
        }
    }

    /// Reason attributes followed by result attributes.
    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.reason_attributes
            .iter()
            .chain(&self.result_attributes)
            .map(String::as_str)
    }

    pub fn positions(&self) -> Vec<usize> {
        self.reason_positions
            .iter()
            .chain(&self.result_positions)
            .copied()
            .collect()
    }

    pub fn insert(&mut self, gamma: Gamma) {
        self.groups
            .entry(gamma.reason.clone())
            .or_insert_with_key(|k| Group::new(k.clone()))
            .absorb(gamma);
    }

    pub fn gammas(&self) -> impl Iterator<Item = &Gamma> {
        self.groups.values().flat_map(|g| &g.gammas)
    }

    pub fn gammas_mut(&mut self) -> impl Iterator<Item = &mut Gamma> {
        self.groups.values_mut().flat_map(|g| &mut g.gammas)
    }

    pub fn gamma_count(&self) -> usize {
        self.groups.values().map(|g| g.gammas.len()).sum()
    }

    pub fn tuple_count(&self) -> usize {
        self.gammas().map(Gamma::count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Maps every backing tuple to (group index, gamma index).
    pub fn locate_all(&self) -> HashMap<Tid, (usize, usize)> {
        let mut out = HashMap::with_capacity(self.tuple_count());
        for (gi, group) in self.groups.values().enumerate() {
            for (ji, gamma) in group.gammas.iter().enumerate() {
                for &tid in &gamma.tids {
                    out.insert(tid, (gi, ji));
                }
            }
        }
        out
    }

    pub fn gamma_at(&self, at: (usize, usize)) -> &Gamma {
        &self.groups[at.0].gammas[at.1]
    }

    /// Ground clause for one gamma: negated reason literals, then result literals.
    pub fn ground_clause(&self, gamma: &Gamma) -> String {
        let reason = self
            .reason_attributes
            .iter()
            .zip(&gamma.reason)
            .map(|(a, v)| format!("¬{a}({})", quote(v)));
        let result = self
            .result_attributes
            .iter()
            .zip(&gamma.result)
            .map(|(a, v)| format!("{a}({})", quote(v)));
        reason.chain(result).collect::<Vec<_>>().join(" ∨ ")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MlnIndex {
    pub blocks: Vec<Block>,
}

impl MlnIndex {
    pub fn block(&self, rule_id: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.rule_id == rule_id)
    }

    pub fn block_mut(&mut self, rule_id: usize) -> Option<&mut Block> {
        self.blocks.iter_mut().find(|b| b.rule_id == rule_id)
    }

    /// JSON rendering of blocks, groups and gammas with tuple ids and weights.
    pub fn to_json(&self, rules: &[Rule]) -> serde_json::Value {
        let blocks: Vec<BlockDump<'_>> = self
            .blocks
            .iter()
            .map(|b| BlockDump {
                rule_id: b.rule_id,
                kind: b.kind,
                clause: rules.iter().find(|r| r.id == b.rule_id).map(to_mln_clause),
                reason_attributes: &b.reason_attributes,
                result_attributes: &b.result_attributes,
                groups: b.groups.values().collect(),
            })
            .collect();
        serde_json::json!({ "blocks": blocks })
    }

    pub fn dump(&self, rules: &[Rule], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &self.to_json(rules)).map_err(|source| {
            Error::Json {
                path: path.to_path_buf(),
                source,
            }
        })
    }
}

#[derive(Serialize)]
struct BlockDump<'a> {
    rule_id: usize,
    kind: RuleKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    clause: Option<String>,
    reason_attributes: &'a [String],
    result_attributes: &'a [String],
    groups: Vec<&'a Group>,
}

/// Whether a rule applies to a tuple. A rule without reason constants applies
/// to every tuple. A rule with reason constants applies when at least one of
/// them matches, so a tuple whose other constant attribute carries an error
/// still lands in the block and can be repaired there.
pub fn applies_to(rule: &Rule, values: &[String]) -> bool {
    let mut constants = rule
        .reason
        .iter()
        .filter_map(|p| p.constant.as_deref().map(|c| (p.position, c)))
        .peekable();
    if constants.peek().is_none() {
        return true;
    }
    constants.any(|(pos, c)| values[pos] == c)
}

/// Grounds every rule against the relation in one pass per rule.
pub fn build_index(rel: &Relation, rules: &[Rule]) -> MlnIndex {
    let arity = rel.schema().arity();
    let blocks = rules
        .iter()
        .map(|rule| {
            assert!(
                rule.positions().iter().all(|&p| p < arity),
                "rule {} references attributes outside the schema",
                rule.id
            );
            let mut block = Block::empty_for(rule);
            for t in rel.tuples() {
                if !applies_to(rule, &t.values) {
                    continue;
                }
                let pick = |ps: &[usize]| ps.iter().map(|&p| t.values[p].clone()).collect();
                let mut gamma =
                    Gamma::new(pick(&block.reason_positions), pick(&block.result_positions));
                gamma.tids.insert(t.tid);
                block.insert(gamma);
            }
            block
        })
        .collect();
    MlnIndex { blocks }
}

/// One ground clause per distinct gamma of the rule's block, ordered by
/// reason values then result values.
pub fn ground_rule_strings(index: &MlnIndex, rule: &Rule) -> Vec<String> {
    let Some(block) = index.block(rule.id) else {
        return Vec::new();
    };
    let mut gammas: Vec<&Gamma> = block.gammas().collect();
    gammas.sort_by(|a, b| a.render_cmp(b));
    gammas.into_iter().map(|g| block.ground_clause(g)).collect()
}
