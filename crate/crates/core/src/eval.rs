//! Paraphrase evaluation: ROUGE-N recall against references (R), against the
//! source (R vs. S, lower is more diverse), and tag retention (T%).

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::corpus::read_jsonl;
use crate::error::{Error, Result};
use crate::markup::Markers;
use crate::textcore::{tokenize, ProfileSet};

/// One line of `eval_input.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub lang: String,
    pub source_tagged: String,
    pub generated: Vec<String>,
    pub references: Vec<String>,
}

/// How per-reference recalls are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// n-gram order.
    pub n: usize,
    pub aggregation: Aggregation,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            n: 2,
            aggregation: Aggregation::Max,
        }
    }
}

fn ngram_counts<'a>(norms: &[&'a str], n: usize) -> HashMap<Vec<&'a str>, usize> {
    let mut m = HashMap::new();
    if n > 0 {
        for w in norms.windows(n) {
            *m.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    m
}

/// Clipped n-gram recall of `candidate` against one reference; 0 if the reference has no n-grams.
pub fn rouge_n_single(candidate: &[&str], reference: &[&str], n: usize) -> f64 {
    let ref_counts = ngram_counts(reference, n);
    let ref_total: usize = ref_counts.values().sum();
    if ref_total == 0 {
        return 0.0;
    }
    let cand_counts = ngram_counts(candidate, n);
    let overlap: usize = ref_counts
        .iter()
        .map(|(g, c)| (*c).min(cand_counts.get(g).copied().unwrap_or(0)))
        .sum();
    overlap as f64 / ref_total as f64
}

/// ROUGE-N recall against several references.
///
/// # Panics
/// Panics if `n == 0`.
pub fn rouge_n_recall<S: AsRef<str>>(
    candidate: &[S],
    references: &[Vec<S>],
    n: usize,
    aggregation: Aggregation,
) -> f64 {
    assert!(n >= 1, "n-gram order must be positive");
    let cand: Vec<&str> = candidate.iter().map(AsRef::as_ref).collect();
    let scores = references.iter().map(|r| {
        let r: Vec<&str> = r.iter().map(AsRef::as_ref).collect();
        rouge_n_single(&cand, &r, n)
    });
    match aggregation {
        Aggregation::Max => scores.fold(0.0, f64::max),
        Aggregation::Mean if references.is_empty() => 0.0,
        Aggregation::Mean => scores.sum::<f64>() / references.len() as f64,
    }
}

/// ROUGE-N of a candidate against the tag-stripped source; lower means more diverse.
pub fn diversity_score<S: AsRef<str>>(candidate: &[S], source_stripped: &[S], n: usize) -> f64 {
    let cand: Vec<&str> = candidate.iter().map(AsRef::as_ref).collect();
    let src: Vec<&str> = source_stripped.iter().map(AsRef::as_ref).collect();
    rouge_n_single(&cand, &src, n)
}

/// `(retained, total)` anchor instances over all (anchor, generation) pairs.
///
/// An anchor is retained when its normalized tokens occur contiguously in the
/// generation after markers are stripped.
pub fn tag_retention<S: AsRef<str>>(
    anchors: &[Vec<String>],
    generations: &[Vec<S>],
) -> (usize, usize) {
    let mut retained = 0;
    let mut total = 0;
    for gen in generations {
        let g: Vec<&str> = gen.iter().map(AsRef::as_ref).collect();
        for a in anchors.iter().filter(|a| !a.is_empty()) {
            total += 1;
            if a.len() <= g.len()
                && g.windows(a.len())
                    .any(|w| w.iter().zip(a).all(|(x, y)| *x == y))
            {
                retained += 1;
            }
        }
    }
    (retained, total)
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        compensated_sum(values.iter().copied()) / values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordScores {
    pub id: String,
    /// Mean over generations, percent.
    pub r: f64,
    pub r_vs_s: f64,
    pub anchors: usize,
    pub retained: usize,
    pub anchor_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub aggregation: Aggregation,
    pub records: usize,
    /// Mean ROUGE-N recall against references, percent.
    pub r: f64,
    /// Mean ROUGE-N recall against the source, percent.
    pub r_vs_s: f64,
    /// Tag retention, percent; `None` when no record has anchors.
    pub t_pct: Option<f64>,
    pub per_record: Vec<RecordScores>,
}

fn reject(id: &str, message: &str) -> Error {
    Error::Validation(format!("record {id:?}: {message}"))
}

/// Scores one record; generations and references may contain markers.
pub fn score_record(
    record: &EvalRecord,
    cfg: &EvalConfig,
    profiles: &ProfileSet,
    markers: &Markers,
) -> Result<RecordScores> {
    if record.generated.is_empty() {
        return Err(reject(&record.id, "generated must be non-empty"));
    }
    if record.references.is_empty() {
        return Err(reject(&record.id, "references must be non-empty"));
    }
    let profile = profiles.get(&record.lang);
    let source = markers.parse(&record.source_tagged, &profile)?;
    let norms = |text: &str| -> Vec<String> {
        tokenize(&markers.strip_text(text), &profile)
            .tokens
            .into_iter()
            .map(|t| t.norm)
            .collect()
    };
    let refs: Vec<Vec<String>> = record.references.iter().map(|r| norms(r)).collect();
    let gens: Vec<Vec<String>> = record.generated.iter().map(|g| norms(g)).collect();
    let src: Vec<String> = source.tokens().iter().map(|t| t.norm.clone()).collect();

    let r: Vec<f64> = gens
        .iter()
        .map(|g| rouge_n_recall(g, &refs, cfg.n, cfg.aggregation))
        .collect();
    let s: Vec<f64> = gens
        .iter()
        .map(|g| diversity_score(g, &src, cfg.n))
        .collect();
    let anchors = source.anchor_tokens();
    let (retained, anchor_instances) = tag_retention(&anchors, &gens);
    Ok(RecordScores {
        id: record.id.clone(),
        r: 100.0 * mean(&r),
        r_vs_s: 100.0 * mean(&s),
        anchors: anchors.len(),
        retained,
        anchor_instances,
    })
}

/// Corpus-level R, R vs. S and T%. Records are aggregated in id order.
pub fn evaluate(
    records: &[EvalRecord],
    cfg: &EvalConfig,
    profiles: &ProfileSet,
    markers: &Markers,
) -> Result<EvalReport> {
    if cfg.n == 0 {
        return Err(Error::Config("ROUGE order n must be positive".into()));
    }
    let mut sorted: Vec<&EvalRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let per_record = sorted
        .into_iter()
        .map(|r| score_record(r, cfg, profiles, markers))
        .collect::<Result<Vec<_>>>()?;
    let r: Vec<f64> = per_record.iter().map(|s| s.r).collect();
    let s: Vec<f64> = per_record.iter().map(|s| s.r_vs_s).collect();
    let retained: usize = per_record.iter().map(|s| s.retained).sum();
    let instances: usize = per_record.iter().map(|s| s.anchor_instances).sum();
    Ok(EvalReport {
        n: cfg.n,
        aggregation: cfg.aggregation,
        records: per_record.len(),
        r: mean(&r),
        r_vs_s: mean(&s),
        t_pct: (instances > 0).then(|| 100.0 * retained as f64 / instances as f64),
        per_record,
    })
}

/// Reads `eval_input.jsonl`, rejecting records with empty `generated` or `references`.
pub fn read_eval_records(reader: impl BufRead, origin: &str) -> Result<Vec<EvalRecord>> {
    let records: Vec<(usize, EvalRecord)> = read_jsonl(reader, origin)?;
    for (line, r) in &records {
        if r.generated.is_empty() || r.references.is_empty() {
            return Err(Error::Schema {
                origin: origin.to_owned(),
                line: *line,
                message: "generated and references must be non-empty".into(),
            });
        }
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn hand_counted_bigram_recall() {
        let score = rouge_n_recall(
            &w("the cat lay on the mat"),
            &[w("the cat sat on the mat")],
            2,
            Aggregation::Max,
        );
        assert_eq!(score, 0.6);
    }

    #[test]
    fn identity_and_disjoint() {
        let x = w("a b c d");
        assert_eq!(
            rouge_n_recall(&x, std::slice::from_ref(&x), 2, Aggregation::Max),
            1.0
        );
        assert_eq!(rouge_n_recall(&x, &[w("e f g")], 2, Aggregation::Max), 0.0);
        assert_eq!(rouge_n_recall(&x, &[w("e")], 2, Aggregation::Max), 0.0);
        assert_eq!(rouge_n_recall(&x, &[], 2, Aggregation::Mean), 0.0);
    }

    #[test]
    fn clipping_by_reference_count() {
        assert_eq!(
            rouge_n_recall(&w("a a a a"), &[w("a a b")], 1, Aggregation::Max),
            2.0 / 3.0
        );
    }

    #[test]
    fn multi_reference_aggregation() {
        let refs = [w("a b c"), w("x y z")];
        assert_eq!(rouge_n_recall(&w("a b c"), &refs, 1, Aggregation::Max), 1.0);
        assert_eq!(
            rouge_n_recall(&w("a b c"), &refs, 1, Aggregation::Mean),
            0.5
        );
    }

    #[test]
    fn diversity_examples() {
        let src = w("the cat sat on the mat");
        assert_eq!(diversity_score(&src, &src, 2), 1.0);
        assert_eq!(diversity_score(&w("a dog slept"), &src, 2), 0.0);
        assert_eq!(diversity_score(&w("the cat lay on the mat"), &src, 2), 0.6);
    }

    #[test]
    fn retention_examples() {
        let beijing = vec![w("beijing")];
        assert_eq!(
            tag_retention(&beijing, &[w("i'm looking for cheap hotels in beijing")]),
            (1, 1)
        );
        assert_eq!(
            tag_retention(&beijing, &[w("cheap hotels in new york")]),
            (0, 1)
        );
        assert_eq!(
            tag_retention(&[w("beijing"), w("new york")], &[w("hotels in beijing")]),
            (1, 2)
        );
    }

    fn record(id: &str, source: &str, generated: &[&str], refs: &[&str]) -> EvalRecord {
        EvalRecord {
            id: id.into(),
            lang: "en".into(),
            source_tagged: source.into(),
            generated: generated.iter().map(|s| s.to_string()).collect(),
            references: refs.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn corpus_aggregation() {
        let records = vec![
            record(
                "a",
                "the cat sat on the <tag> mat </tag>",
                &["the cat lay on the mat"],
                &["the cat sat on the mat"],
            ),
            record(
                "b",
                "hotels in <tag> beijing </tag> and <tag> new york </tag>",
                &["<tag> beijing </tag> lodging", "hotels in paris"],
                &["hotels in beijing"],
            ),
        ];
        let rep = evaluate(
            &records,
            &EvalConfig::default(),
            &ProfileSet::default(),
            &Markers::default(),
        )
        .unwrap();
        // a: R = 0.6, S = 0.6. b: gen1 R = 0 (no bigram of "hotels in beijing"),
        // gen2 R = 1/2; S: source bigrams = 5, gen1 shares 0, gen2 shares "hotels in" -> 1/5.
        assert!((rep.per_record[0].r - 60.0).abs() < 1e-12);
        assert!((rep.per_record[1].r - 25.0).abs() < 1e-12);
        assert!((rep.per_record[1].r_vs_s - 10.0).abs() < 1e-12);
        assert!((rep.r - 42.5).abs() < 1e-12);
        assert!((rep.r_vs_s - 35.0).abs() < 1e-12);
        // anchors: a has 1 x 1 gen retained; b has 2 anchors x 2 gens, 1 retained.
        assert_eq!(rep.t_pct, Some(100.0 * 2.0 / 5.0));
        let json = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<EvalReport>(&json).unwrap(), rep);
    }

    #[test]
    fn untagged_corpus_has_no_t_pct() {
        let records = vec![record("a", "x y z", &["x y z"], &["x y z"])];
        let rep = evaluate(
            &records,
            &EvalConfig::default(),
            &ProfileSet::default(),
            &Markers::default(),
        )
        .unwrap();
        assert_eq!(rep.t_pct, None);
        assert_eq!(rep.r_vs_s, 100.0);
    }

    #[test]
    fn empty_generations_rejected() {
        let line =
            r#"{"id":"a","lang":"en","source_tagged":"x","generated":[],"references":["x"]}"#;
        assert!(matches!(
            read_eval_records(line.as_bytes(), "e"),
            Err(Error::Schema { line: 1, .. })
        ));
        let rec = record("a", "x", &[], &["x"]);
        assert!(evaluate(
            &[rec],
            &EvalConfig::default(),
            &ProfileSet::default(),
            &Markers::default()
        )
        .is_err());
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let vals = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(vals), 2.0);
    }
}
