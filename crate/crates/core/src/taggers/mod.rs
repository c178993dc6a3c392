//! Distant-supervision taggers that decide where anchors go in training data.
//!
//! - [`oracle`]: sequences shared by a source and several of its references.
//! - [`ner`]: named-entity mentions, from a gazetteer or a remote tagging service.
//! - [`common`]: the corpus-frequency filter for "common" n-grams.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markup::AnchorSpan;
use crate::textcore::TokenizedSentence;

pub mod common;
pub mod ner;
pub mod oracle;

pub use common::{build_common_ngram_set, build_common_ngram_set_by_document, CommonNgrams};
pub use ner::{
    auto_tag, labels_to_spans, ner_anchors, spans_to_labels, Gazetteer, PassThroughAutoTagger,
    ServiceBackend, TagRequest, TagResponse, ANCHOR_LABEL, OUTSIDE_LABEL,
};
pub use oracle::{oracle_anchors, OracleConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaggerKind {
    #[default]
    None,
    Oracle,
    Ner,
    Auto,
}

impl std::fmt::Display for TaggerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaggerKind::None => "none",
            TaggerKind::Oracle => "oracle",
            TaggerKind::Ner => "ner",
            TaggerKind::Auto => "auto",
        })
    }
}

/// Why the Oracle Tagger refused a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    /// Accepted anchors would cover more of the source than allowed.
    Overlap { coverage: f64, max_coverage: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaggerError {
    #[error("oracle tagging needs at least {required} references, got {references}")]
    InsufficientReferences { references: usize, required: usize },
    #[error("cluster rejected: {0:?}")]
    Rejected(Rejection),
    #[error("tagging backend unavailable after {attempts} attempts: {message}")]
    BackendUnavailable { attempts: usize, message: String },
    #[error("tagging service protocol error: {0}")]
    Protocol(String),
    #[error("gazetteer: {0}")]
    Gazetteer(String),
}

impl TaggerError {
    /// Short key used in [`TaggerReport::rejection_reasons`].
    pub fn reason_key(&self) -> &'static str {
        match self {
            TaggerError::InsufficientReferences { .. } => "insufficient_references",
            TaggerError::Rejected(Rejection::Overlap { .. }) => "overlap",
            TaggerError::BackendUnavailable { .. } => "backend_unavailable",
            TaggerError::Protocol(_) => "protocol",
            TaggerError::Gazetteer(_) => "gazetteer",
        }
    }
}

/// A proposed anchor: a normalized token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorCandidate {
    pub tokens: Vec<String>,
    /// References containing the sequence (0 for taggers that look at one sentence).
    pub support: usize,
    /// Where the candidate was found in the tagged sentence (first occurrence for the oracle).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<AnchorSpan>,
}

/// Per-run tagging summary, emitted as JSON by the CLI.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggerReport {
    pub tagger: TaggerKind,
    pub clusters_tagged: usize,
    pub clusters_rejected: usize,
    pub rejection_reasons: BTreeMap<String, usize>,
    /// Anchor length in tokens -> number of anchors.
    pub anchor_length_histogram: BTreeMap<usize, usize>,
}

impl TaggerReport {
    pub fn new(tagger: TaggerKind) -> Self {
        Self {
            tagger,
            ..Self::default()
        }
    }

    pub fn record_tagged(&mut self, anchors: &[AnchorCandidate]) {
        self.clusters_tagged += 1;
        for a in anchors {
            *self
                .anchor_length_histogram
                .entry(a.tokens.len())
                .or_default() += 1;
        }
    }

    pub fn record_rejected(&mut self, err: &TaggerError) {
        self.clusters_rejected += 1;
        *self
            .rejection_reasons
            .entry(err.reason_key().to_owned())
            .or_default() += 1;
    }

    pub fn total(&self) -> usize {
        self.clusters_tagged + self.clusters_rejected
    }
}

/// Anything that labels token spans of a sentence: gazetteers, remote NER, the Auto Tagger.
pub trait TokenTagger: Send + Sync {
    fn tag_spans(
        &self,
        sentence: &TokenizedSentence,
        lang: &str,
    ) -> Result<Vec<AnchorSpan>, TaggerError>;
}

pub type SpanResult = Result<Vec<AnchorSpan>, TaggerError>;

/// Runs `tagger` over many sentences with at most `max_in_flight` concurrent calls.
///
/// Results come back in input order.
pub fn tag_concurrently(
    tagger: &dyn TokenTagger,
    inputs: &[(TokenizedSentence, String)],
    max_in_flight: usize,
) -> Vec<SpanResult> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SpanResult>>> = Mutex::new(vec![None; inputs.len()]);
    let workers = max_in_flight.max(1).min(inputs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((sentence, lang)) = inputs.get(i) else {
                    break;
                };
                let r = tagger.tag_spans(sentence, lang);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every index is processed"))
        .collect()
}
