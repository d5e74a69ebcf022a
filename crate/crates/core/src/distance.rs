//! String and value-vector distances used for abnormal group merging,
//! reliability scores and data partitioning.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[default]
    Levenshtein,
    Cosine,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Levenshtein => "levenshtein",
            MetricKind::Cosine => "cosine",
        })
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "levenshtein" | "lev" => Ok(MetricKind::Levenshtein),
            "cosine" | "cos" => Ok(MetricKind::Cosine),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

pub fn string_distance(a: &str, b: &str, metric: MetricKind) -> f64 {
    match metric {
        MetricKind::Levenshtein => levenshtein(a, b) as f64,
        MetricKind::Cosine => cosine_distance(a, b),
    }
}

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    if a == b {
        return 0;
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    // Keep the shorter string on the row.
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }

    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, &lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = (diag + usize::from(lc != sc))
                .min(above + 1)
                .min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

/// `1 - cos(a, b)` over character-bigram counts. Strings shorter than two
/// characters are represented by their unigram instead. Two empty strings
/// are at distance 0, an empty and a non-empty string at distance 1.
pub fn cosine_distance(a: &str, b: &str) -> f64 {
    if a == b {
        return 0.0;
    }
    let va = ngram_counts(a);
    let vb = ngram_counts(b);
    if va.is_empty() || vb.is_empty() {
        return 1.0;
    }
    let dot: f64 = va
        .iter()
        .filter_map(|(k, &x)| vb.get(k).map(|&y| x * y))
        .sum();
    let norm =
        |v: &BTreeMap<(char, Option<char>), f64>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let sim = dot / (norm(&va) * norm(&vb));
    (1.0 - sim).clamp(0.0, 1.0)
}

fn ngram_counts(s: &str) -> BTreeMap<(char, Option<char>), f64> {
    let chars: Vec<char> = s.chars().collect();
    let mut counts = BTreeMap::new();
    match chars.len() {
        0 => {}
        1 => {
            counts.insert((chars[0], None), 1.0);
        }
        _ => {
            for w in chars.windows(2) {
                *counts.entry((w[0], Some(w[1]))).or_insert(0.0) += 1.0;
            }
        }
    }
    counts
}

/// Sum of per-position string distances between two equally long value lists.
pub fn values_distance<A, B>(a: &[A], b: &[B], metric: MetricKind) -> Result<f64>
where
    A: AsRef<str>,
    B: AsRef<str>,
{
    if a.len() != b.len() {
        return Err(Error::LayoutMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| string_distance(x.as_ref(), y.as_ref(), metric))
        .sum())
}
