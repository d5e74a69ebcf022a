//! Writes a generated table and rules to disk, corrupts it, cleans it from
//! the files and saves the repaired table, repair report and index dump.

use std::fs;

use dataclean::datagen::{generate, SyntheticSpec, SYNTHETIC_RULES};
use dataclean::evaluation::{inject_errors, ErrorSpec};
use dataclean::pipeline::clean_standalone;
use dataclean::{load_relation, parse_rules, write_relation, CleanOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("dataclean-example");
    fs::create_dir_all(&dir)?;
    let spec = SyntheticSpec {
        rows: 300,
        entities: 20,
        ..Default::default()
    };
    let (clean, rules) = generate(&spec)?;
    let (dirty, _) = inject_errors(&clean, &rules, &ErrorSpec::default())?;
    write_relation(&dirty, dir.join("dirty.tsv"), b'\t')?;
    fs::write(dir.join("rules.txt"), SYNTHETIC_RULES)?;

    let rel = load_relation(dir.join("dirty.tsv"), b'\t', true)?;
    let rules = parse_rules(dir.join("rules.txt"), rel.schema())?;
    let opts = CleanOptions {
        tau: 2,
        ..Default::default()
    };
    let (repaired, report, index) = clean_standalone(&rel, &rules, &opts);
    write_relation(&repaired, dir.join("repaired.tsv"), b'\t')?;
    report.write_json(dir.join("report.json"))?;
    index.dump(&rules, dir.join("index.json"))?;
    println!(
        "{} rows -> {} rows, {} report entries; files in {}",
        rel.len(),
        repaired.len(),
        report.entries.len(),
        dir.display()
    );
    Ok(())
}
