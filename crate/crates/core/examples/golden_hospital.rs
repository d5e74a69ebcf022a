//! Cleans the six-row hospital sample and prints every repair.

use dataclean::{clean_relation, samples, CleanOptions, Stage};

fn main() -> dataclean::Result<()> {
    let (dirty, rules) = samples::hospital();
    println!("rules:");
    for rule in &rules {
        println!("  r{}: {}", rule.id, rule.to_text());
    }
    println!("\ndirty:\n{}", dirty.to_csv_string(b','));

    let (clean, report) = clean_relation(&dirty, &rules, &CleanOptions::default())?;
    for stage in [Stage::Agp, Stage::Rsc, Stage::Fscr] {
        println!("{stage:?}:");
        for e in report.stage_entries(stage) {
            let rule = e.rule_id.map(|r| format!(" (r{r})")).unwrap_or_default();
            println!(
                "  t{}.{}: {} -> {}{rule}",
                e.tid,
                e.attribute.as_deref().unwrap_or("-"),
                e.old_value,
                e.new_value
            );
        }
    }
    for (removed, kept) in report
        .removed_duplicates()
        .iter()
        .collect::<std::collections::BTreeMap<_, _>>()
    {
        println!("t{removed} removed as a duplicate of t{kept}");
    }
    println!("\nclean:\n{}", clean.to_csv_string(b','));
    Ok(())
}
