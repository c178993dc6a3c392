//! Mining anchors shared by a source and its references.

use std::error::Error;

use paratag::taggers::{
    build_common_ngram_set_by_document, oracle_anchors, OracleConfig, Rejection, TaggerError,
};
use paratag::textcore::{tokenize, LanguageProfile, TokenizedSentence};

fn sentences(texts: &[&str], en: &LanguageProfile) -> Vec<TokenizedSentence> {
    texts.iter().map(|t| tokenize(t, en)).collect()
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let en = LanguageProfile::english();
    let cfg = OracleConfig::default();

    let cluster = sentences(
        &[
            "A man riding a red bicycle in Beijing.",
            "A person rides his red bicycle through Beijing.",
            "Someone on a red bicycle in Beijing.",
        ],
        &en,
    );
    let docs: Vec<Vec<Vec<String>>> = vec![cluster
        .iter()
        .map(|s| s.tokens.iter().map(|t| t.norm.clone()).collect())
        .collect()];
    let common = build_common_ngram_set_by_document(&docs, 3, cfg.common_ngram_quantile);

    let anchors = oracle_anchors(&cluster[0], &cluster[1..], &cfg, &common, &en)?;
    let found: Vec<String> = anchors.iter().map(|a| a.tokens.join(" ")).collect();
    println!("anchors: {found:?}");
    assert_eq!(found, ["red bicycle", "beijing"]);

    // A QQP-style pair has one reference; the oracle refuses it.
    let pair = sentences(&["how do i learn rust", "how can i learn rust"], &en);
    let err = oracle_anchors(&pair[0], &pair[1..], &cfg, &common, &en).unwrap_err();
    println!("single reference: {err}");
    assert!(matches!(
        err,
        TaggerError::InsufficientReferences { references: 1, .. }
    ));

    // Near-duplicates share most of the source, so the cluster is rejected.
    let dupes = sentences(
        &[
            "what is the best way to learn python programming",
            "what is the best way to learn python programming quickly",
            "what is the best way to learn python programming online",
        ],
        &en,
    );
    let err = oracle_anchors(&dupes[0], &dupes[1..], &cfg, &common, &en).unwrap_err();
    println!("near duplicates: {err}");
    assert!(matches!(
        err,
        TaggerError::Rejected(Rejection::Overlap { .. })
    ));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
