//! Compares Levenshtein and bigram-cosine distance on a typo-heavy
//! generated relation across abnormal-group thresholds.

use dataclean::datagen::{generate, SyntheticSpec};
use dataclean::evaluation::{inject_errors, score, ErrorSpec};
use dataclean::{clean_relation, CleanOptions, MetricKind};

fn main() -> dataclean::Result<()> {
    let (clean, rules) = generate(&SyntheticSpec::default())?;
    let spec = ErrorSpec {
        rate: 0.05,
        replacement_ratio: 0.1,
        seed: 11,
        target_attributes: None,
    };
    let (dirty, truth) = inject_errors(&clean, &rules, &spec)?;
    println!("tau  levenshtein  cosine");
    for tau in 0..=8 {
        let mut f1 = Vec::new();
        for metric in [MetricKind::Levenshtein, MetricKind::Cosine] {
            let opts = CleanOptions {
                tau,
                metric,
                ..Default::default()
            };
            let (repaired, report) = clean_relation(&dirty, &rules, &opts)?;
            f1.push(
                score(&truth, &dirty, &repaired, &report, &rules)?
                    .overall
                    .f1,
            );
        }
        println!("{tau:<4} {:<12.4} {:.4}", f1[0], f1[1]);
    }
    Ok(())
}
