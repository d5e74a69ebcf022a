//! Repair log: every value a cleaning stage changed, plus the group merges,
//! gamma rewrites and fusion conflicts that component metrics are scored on.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::Tid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Stage {
    Agp,
    Rsc,
    Fscr,
    Dedupe,
}

/// A single cell change, or for [`Stage::Dedupe`] the removal of a tuple.
///
/// Stage-one entries (AGP, RSC) describe the rule-local version held by one
/// block; conflicting proposals from different blocks are reconciled by
/// fusion, whose FSCR entries are the changes actually applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairEntry {
    pub tid: Tid,
    pub attribute: Option<String>,
    pub old_value: String,
    pub new_value: String,
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_id: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<Tid>,
}

/// An abnormal group re-keyed into a normal group of the same block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupMerge {
    pub rule_id: usize,
    pub from_key: Vec<String>,
    pub to_key: Vec<String>,
    pub tids: Vec<Tid>,
}

/// A gamma replaced by its group's surviving gamma. Values are reason values
/// followed by result values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaRepair {
    pub rule_id: usize,
    pub from: Vec<String>,
    pub to: Vec<String>,
    pub tids: Vec<Tid>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellRef {
    pub tid: Tid,
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartSummary {
    pub part_id: usize,
    pub centroid: Tid,
    pub size: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub entries: Vec<RepairEntry>,
    #[serde(default)]
    pub merges: Vec<GroupMerge>,
    #[serde(default)]
    pub gamma_repairs: Vec<GammaRepair>,
    /// Cells on which a tuple's rule-local versions disagreed before fusion.
    #[serde(default)]
    pub conflict_cells: Vec<CellRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<PartSummary>,
}

impl RepairReport {
    pub fn extend(&mut self, other: RepairReport) {
        self.entries.extend(other.entries);
        self.merges.extend(other.merges);
        self.gamma_repairs.extend(other.gamma_repairs);
        self.conflict_cells.extend(other.conflict_cells);
        self.parts.extend(other.parts);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
            && self.merges.is_empty()
            && self.gamma_repairs.is_empty()
            && self.conflict_cells.is_empty()
    }

    pub fn stage_entries(&self, stage: Stage) -> impl Iterator<Item = &RepairEntry> {
        self.entries.iter().filter(move |e| e.stage == stage)
    }

    pub fn count(&self, stage: Stage) -> usize {
        self.stage_entries(stage).count()
    }

    /// Removed tuple id -> id of the tuple kept in its place.
    pub fn removed_duplicates(&self) -> HashMap<Tid, Tid> {
        self.stage_entries(Stage::Dedupe)
            .filter_map(|e| e.duplicate_of.map(|kept| (e.tid, kept)))
            .collect()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}
