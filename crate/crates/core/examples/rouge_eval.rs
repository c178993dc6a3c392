//! ROUGE-N recall, diversity against the source, and tag retention.

use std::error::Error;

use paratag::eval::{evaluate, rouge_n_single, EvalConfig, EvalRecord};
use paratag::markup::Markers;
use paratag::textcore::ProfileSet;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cand = ["the", "cat", "sat", "on", "the", "mat"];
    let reference = ["the", "cat", "lay", "on", "the", "mat"];
    let r = rouge_n_single(&cand, &reference, 2);
    println!("ROUGE-2 recall {r}");
    assert_eq!(r, 0.6);

    let records = vec![
        EvalRecord {
            id: "q1".into(),
            lang: "en".into(),
            source_tagged: "How do I get deleted <tag> Instagram </tag> messages?".into(),
            generated: vec![
                "How can I recover deleted Instagram messages?".into(),
                "Is there a way to restore removed Instagram chats?".into(),
            ],
            references: vec!["How can I retrieve deleted Instagram messages?".into()],
        },
        EvalRecord {
            id: "q2".into(),
            lang: "en".into(),
            source_tagged: "What are cheap hotels in <tag> Beijing </tag>?".into(),
            generated: vec!["Where are affordable hotels in Shanghai?".into()],
            references: vec!["Which hotels in Beijing are cheap?".into()],
        },
    ];
    let report = evaluate(
        &records,
        &EvalConfig::default(),
        &ProfileSet::default(),
        &Markers::default(),
    )?;
    println!(
        "R {:.2}  R vs S {:.2}  T% {:?}",
        report.r, report.r_vs_s, report.t_pct
    );
    assert_eq!(report.t_pct, Some(200.0 / 3.0));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
