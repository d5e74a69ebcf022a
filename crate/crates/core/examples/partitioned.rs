//! Splits a generated relation into parts, cleans the parts in parallel and
//! compares the result with cleaning the whole relation at once.

use dataclean::datagen::{generate, SyntheticSpec};
use dataclean::evaluation::{inject_errors, score, ErrorSpec};
use dataclean::partition::run_partitioned;
use dataclean::{clean_relation, CleanOptions};

fn main() -> dataclean::Result<()> {
    let (clean, rules) = generate(&SyntheticSpec::default())?;
    let spec = ErrorSpec {
        seed: 11,
        ..Default::default()
    };
    let (dirty, truth) = inject_errors(&clean, &rules, &spec)?;

    let base = CleanOptions {
        tau: 4,
        ..Default::default()
    };
    let (whole, report) = clean_relation(&dirty, &rules, &base)?;
    let f1 = score(&truth, &dirty, &whole, &report, &rules)?.overall.f1;
    println!("stand-alone: {} tuples out, F1 {f1:.4}", whole.len());

    for parts in [2, 4, 8] {
        let opts = CleanOptions {
            parts,
            seed: 5,
            ..base.clone()
        };
        let run = run_partitioned(&dirty, &rules, &opts)?;
        let f1 = score(&truth, &dirty, &run.relation, &run.report, &rules)?
            .overall
            .f1;
        let sizes: Vec<usize> = run.partitioning.parts.iter().map(|p| p.len()).collect();
        let slowest = run.timings.iter().max().copied().unwrap_or_default();
        println!(
            "k={parts}: sizes {sizes:?}, {} evictions, slowest part {:.3} s, F1 {f1:.4}",
            run.partitioning.evictions.len(),
            slowest.as_secs_f64()
        );
    }
    Ok(())
}
