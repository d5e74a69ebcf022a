//! Synthetic hospital-style relations for benchmarking.
//!
//! Rows are drawn from a fixed set of entities whose popularity follows a
//! Zipf law, so every attribute's value frequencies are Zipf-shaped too. Each
//! entity owns a distinct hospital name, city, zip code and phone number; a
//! per-row measure code is independent of the entity.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::{Relation, Schema};
use crate::rules::{parse_rules_str, Rule};

pub const SYNTHETIC_RULES: &str = "\
FD: Hospital, City -> Phone
FD: Phone, Zip -> City
";

/// How entity values are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NameStyle {
    /// Names built from a small vocabulary, regional zip prefixes and area
    /// codes, so distinct entities share words and digits.
    #[default]
    Words,
    /// Uniformly random letters and digits.
    Random,
}

const HOSPITAL_PREFIX: &[&str] = &[
    "SAINT",
    "MERCY",
    "GOOD SAMARITAN",
    "PROVIDENCE",
    "BAPTIST",
    "METHODIST",
    "UNIVERSITY",
    "COMMUNITY",
    "MEMORIAL",
    "VALLEY",
    "LAKESIDE",
    "RIVERSIDE",
    "NORTH",
    "SOUTH",
];
const HOSPITAL_CORE: &[&str] = &[
    "MARY", "JOHN", "JOSEPH", "LUKE", "FRANCIS", "VINCENT", "ANTHONY", "ELIZA", "HELEN", "THOMAS",
    "JAMES", "GRACE", "CLARE", "AGNES", "PAUL", "DAVID",
];
const HOSPITAL_SUFFIX: &[&str] = &[
    "HOSPITAL",
    "MEDICAL CENTER",
    "HEALTH CENTER",
    "CLINIC",
    "REGIONAL HOSPITAL",
];
const CITY_HEAD: &[&str] = &[
    "SPRING", "GREEN", "OAK", "MAPLE", "CEDAR", "RIVER", "LAKE", "HILL", "FAIR", "WEST", "EAST",
    "NEW", "BROOK", "STONE", "MILL", "ASH",
];
const CITY_TAIL: &[&str] = &[
    "FIELD", "VILLE", "TON", "WOOD", "DALE", "PORT", "BURG", "VIEW", "FORD", "HAVEN",
];
const AREA_CODES: &[&str] = &["205", "256", "334", "251"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub entities: usize,
    /// Rows every entity gets before the Zipf-distributed remainder.
    pub min_rows_per_entity: usize,
    pub zipf_exponent: f64,
    pub measures: usize,
    pub style: NameStyle,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            rows: 2000,
            entities: 60,
            min_rows_per_entity: 4,
            zipf_exponent: 1.0,
            measures: 6,
            style: NameStyle::Words,
            seed: 7,
        }
    }
}

fn unique<R: Rng>(
    rng: &mut R,
    seen: &mut HashSet<String>,
    mut draw: impl FnMut(&mut R) -> String,
) -> String {
    loop {
        let s = draw(rng);
        if seen.insert(s.clone()) {
            return s;
        }
    }
}

fn letters<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> String {
    let n = rng.random_range(lo..=hi);
    (0..n)
        .map(|_| rng.random_range(b'A'..=b'Z') as char)
        .collect()
}

fn digits<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n)
        .map(|_| rng.random_range(b'0'..=b'9') as char)
        .collect()
}

fn pick<'a, R: Rng>(rng: &mut R, words: &[&'a str]) -> &'a str {
    words[rng.random_range(0..words.len())]
}

fn entity<R: Rng>(rng: &mut R, seen: &mut HashSet<String>, style: NameStyle) -> [String; 4] {
    match style {
        NameStyle::Random => [
            unique(rng, seen, |r| letters(r, 8, 12)),
            unique(rng, seen, |r| letters(r, 8, 12)),
            unique(rng, seen, |r| digits(r, 5)),
            unique(rng, seen, |r| digits(r, 10)),
        ],
        NameStyle::Words => [
            unique(rng, seen, |r| {
                format!(
                    "{} {} {}",
                    pick(r, HOSPITAL_PREFIX),
                    pick(r, HOSPITAL_CORE),
                    pick(r, HOSPITAL_SUFFIX)
                )
            }),
            unique(rng, seen, |r| {
                format!("{}{}", pick(r, CITY_HEAD), pick(r, CITY_TAIL))
            }),
            unique(rng, seen, |r| format!("35{}", digits(r, 3))),
            unique(rng, seen, |r| {
                format!("{}{}", pick(r, AREA_CODES), digits(r, 7))
            }),
        ],
    }
}

/// Generates a clean relation over `Hospital, City, Zip, Phone, Measure`
/// together with the two functional dependencies it satisfies.
pub fn generate(spec: &SyntheticSpec) -> Result<(Relation, Vec<Rule>)> {
    if spec.entities == 0 || spec.entities * spec.min_rows_per_entity > spec.rows {
        return Err(Error::Config(format!(
            "{} entities with at least {} rows each do not fit in {} rows",
            spec.entities, spec.min_rows_per_entity, spec.rows
        )));
    }
    let distinct_cities = CITY_HEAD.len() * CITY_TAIL.len();
    if spec.style == NameStyle::Words && spec.entities > distinct_cities {
        return Err(Error::Config(format!(
            "word-built names support at most {distinct_cities} entities, got {}",
            spec.entities
        )));
    }
    let zipf = Zipf::new(spec.entities as f64, spec.zipf_exponent)
        .map_err(|e| Error::Config(format!("zipf distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut seen = HashSet::new();
    let entities: Vec<[String; 4]> = (0..spec.entities)
        .map(|_| entity(&mut rng, &mut seen, spec.style))
        .collect();

    let mut owners: Vec<usize> = (0..spec.entities)
        .flat_map(|e| std::iter::repeat_n(e, spec.min_rows_per_entity))
        .collect();
    while owners.len() < spec.rows {
        owners.push(zipf.sample(&mut rng) as usize - 1);
    }
    owners.shuffle(&mut rng);

    let rows = owners.into_iter().map(|e| {
        let mut row = entities[e].to_vec();
        row.push(format!(
            "MSR{:02}",
            rng.random_range(1..=spec.measures.max(1))
        ));
        row
    });
    let schema = Schema::new(["Hospital", "City", "Zip", "Phone", "Measure"])?;
    let rel = Relation::from_rows(schema, rows.collect::<Vec<_>>())?;
    let rules = parse_rules_str(SYNTHETIC_RULES, rel.schema())?;
    Ok((rel, rules))
}
