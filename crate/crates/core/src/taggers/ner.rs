//! Entity-style taggers: a gazetteer with longest-match lookup, and a client
//! for the token-tagging service protocol used by external NER models and
//! the trained Auto Tagger.
//!
//! Wire format: `POST {"lang": str, "tokens": [str, ...]}` answered by
//! `{"labels": ["O" | "ANCHOR", ...]}` of the same length.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{AnchorCandidate, TaggerError, TokenTagger};
use crate::markup::AnchorSpan;
use crate::textcore::{tokenize, LanguageProfile, TokenizedSentence};

pub const ANCHOR_LABEL: &str = "ANCHOR";
pub const OUTSIDE_LABEL: &str = "O";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagRequest {
    pub lang: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagResponse {
    pub labels: Vec<String>,
}

/// Converts a label sequence into spans over contiguous `ANCHOR` runs.
pub fn labels_to_spans<S: AsRef<str>>(
    labels: &[S],
    expected_len: usize,
) -> Result<Vec<AnchorSpan>, TaggerError> {
    if labels.len() != expected_len {
        return Err(TaggerError::Protocol(format!(
            "expected {expected_len} labels, got {}",
            labels.len()
        )));
    }
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, label) in labels.iter().enumerate() {
        match label.as_ref() {
            ANCHOR_LABEL => {
                open.get_or_insert(i);
            }
            OUTSIDE_LABEL => {
                if let Some(s) = open.take() {
                    spans.push(AnchorSpan::new(s, i));
                }
            }
            other => return Err(TaggerError::Protocol(format!("unknown label {other:?}"))),
        }
    }
    if let Some(s) = open {
        spans.push(AnchorSpan::new(s, labels.len()));
    }
    Ok(spans)
}

/// Inverse of [`labels_to_spans`].
pub fn spans_to_labels(spans: &[AnchorSpan], len: usize) -> Vec<String> {
    let mut labels = vec![OUTSIDE_LABEL.to_owned(); len];
    for s in spans {
        for l in &mut labels[s.start..s.end.min(len)] {
            *l = ANCHOR_LABEL.to_owned();
        }
    }
    labels
}

#[derive(Debug, Default, Clone)]
struct TrieNode {
    children: HashMap<String, usize>,
    terminal: bool,
}

/// Entity list matched leftmost-longest over normalized tokens.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    nodes: Vec<TrieNode>,
    entries: usize,
}

impl Default for Gazetteer {
    fn default() -> Self {
        Self {
            nodes: vec![TrieNode::default()],
            entries: 0,
        }
    }
}

impl Gazetteer {
    pub fn new<I, S>(entities: I, profile: &LanguageProfile) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut g = Self::default();
        for e in entities {
            let norms: Vec<String> = tokenize(e.as_ref(), profile)
                .tokens
                .into_iter()
                .map(|t| t.norm)
                .collect();
            g.insert(&norms);
        }
        g
    }

    /// Loads a UTF-8 file with one entity per line; blank lines are ignored.
    pub fn from_file(path: &Path, profile: &LanguageProfile) -> Result<Self, TaggerError> {
        let text = fs::read_to_string(path)
            .map_err(|e| TaggerError::Gazetteer(format!("{}: {e}", path.display())))?;
        Ok(Self::new(
            text.lines().filter(|l| !l.trim().is_empty()),
            profile,
        ))
    }

    fn insert(&mut self, norms: &[String]) {
        if norms.is_empty() {
            return;
        }
        let mut node = 0;
        for tok in norms {
            node = match self.nodes[node].children.get(tok) {
                Some(&n) => n,
                None => {
                    self.nodes.push(TrieNode::default());
                    let n = self.nodes.len() - 1;
                    self.nodes[node].children.insert(tok.clone(), n);
                    n
                }
            };
        }
        if !self.nodes[node].terminal {
            self.nodes[node].terminal = true;
            self.entries += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    /// Non-overlapping mentions, scanning left to right and taking the longest entry at each start.
    pub fn find(&self, sentence: &TokenizedSentence) -> Vec<AnchorSpan> {
        let toks = &sentence.tokens;
        let mut spans = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let mut node = 0;
            let mut best = None;
            for (j, t) in toks[i..].iter().enumerate() {
                match self.nodes[node].children.get(&t.norm) {
                    Some(&n) => {
                        node = n;
                        if self.nodes[n].terminal {
                            best = Some(i + j + 1);
                        }
                    }
                    None => break,
                }
            }
            match best {
                Some(end) => {
                    spans.push(AnchorSpan::new(i, end));
                    i = end;
                }
                None => i += 1,
            }
        }
        spans
    }
}

impl TokenTagger for Gazetteer {
    fn tag_spans(
        &self,
        sentence: &TokenizedSentence,
        _lang: &str,
    ) -> Result<Vec<AnchorSpan>, TaggerError> {
        Ok(self.find(sentence))
    }
}

/// Auto Tagger placeholder for when no trained classifier is being served.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassThroughAutoTagger;

impl TokenTagger for PassThroughAutoTagger {
    fn tag_spans(&self, _: &TokenizedSentence, _: &str) -> Result<Vec<AnchorSpan>, TaggerError> {
        Ok(Vec::new())
    }
}

/// HTTP client for the token-tagging protocol.
#[derive(Debug, Clone)]
pub struct ServiceBackend {
    url: String,
    agent: ureq::Agent,
    attempts: usize,
    backoff: Duration,
}

impl ServiceBackend {
    pub fn new(url: impl Into<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self {
            url: url.into(),
            agent,
            attempts: 3,
            backoff: Duration::from_millis(100),
        }
    }

    /// Base delay of the exponential backoff between attempts.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn with_attempts(mut self, attempts: usize) -> Self {
        self.attempts = attempts.max(1);
        self
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn call_once(&self, req: &TagRequest) -> Result<TagResponse, Attempt> {
        let mut resp = match self.agent.post(&self.url).send_json(req) {
            Ok(r) => r,
            Err(ureq::Error::StatusCode(code)) if code < 500 => {
                return Err(Attempt::Fatal(TaggerError::Protocol(format!(
                    "HTTP status {code}"
                ))))
            }
            Err(e) => return Err(Attempt::Retry(e.to_string())),
        };
        resp.body_mut()
            .read_json::<TagResponse>()
            .map_err(|e| Attempt::Fatal(TaggerError::Protocol(format!("malformed reply: {e}"))))
    }
}

enum Attempt {
    Retry(String),
    Fatal(TaggerError),
}

impl TokenTagger for ServiceBackend {
    fn tag_spans(
        &self,
        sentence: &TokenizedSentence,
        lang: &str,
    ) -> Result<Vec<AnchorSpan>, TaggerError> {
        let req = TagRequest {
            lang: lang.to_owned(),
            tokens: sentence.tokens.iter().map(|t| t.surface.clone()).collect(),
        };
        let mut last = String::new();
        for attempt in 0..self.attempts {
            if attempt > 0 {
                thread::sleep(self.backoff * (1 << (attempt - 1)));
            }
            match self.call_once(&req) {
                Ok(resp) => return labels_to_spans(&resp.labels, req.tokens.len()),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(msg)) => last = msg,
            }
        }
        Err(TaggerError::BackendUnavailable {
            attempts: self.attempts,
            message: last,
        })
    }
}

fn candidates(sentence: &TokenizedSentence, spans: Vec<AnchorSpan>) -> Vec<AnchorCandidate> {
    spans
        .into_iter()
        .map(|s| AnchorCandidate {
            tokens: sentence.tokens[s.start..s.end]
                .iter()
                .map(|t| t.norm.clone())
                .collect(),
            support: 0,
            span: Some(s),
        })
        .collect()
}

/// One candidate per entity mention found by `backend`.
pub fn ner_anchors(
    sentence: &TokenizedSentence,
    lang: &str,
    backend: &dyn TokenTagger,
) -> Result<Vec<AnchorCandidate>, TaggerError> {
    Ok(candidates(sentence, backend.tag_spans(sentence, lang)?))
}

/// Same contract as [`ner_anchors`]; `backend` is a served Auto Tagger or [`PassThroughAutoTagger`].
pub fn auto_tag(
    sentence: &TokenizedSentence,
    lang: &str,
    backend: &dyn TokenTagger,
) -> Result<Vec<AnchorCandidate>, TaggerError> {
    ner_anchors(sentence, lang, backend)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en() -> LanguageProfile {
        LanguageProfile::english()
    }

    fn texts(cs: &[AnchorCandidate]) -> Vec<String> {
        cs.iter().map(|c| c.tokens.join(" ")).collect()
    }

    #[test]
    fn gazetteer_hit() {
        let g = Gazetteer::new(["New York"], &en());
        let s = tokenize("cheap hotels in new york", &en());
        let got = ner_anchors(&s, "en", &g).unwrap();
        assert_eq!(texts(&got), ["new york"]);
        assert_eq!(got[0].span, Some(AnchorSpan::new(3, 5)));
    }

    #[test]
    fn gazetteer_miss() {
        let g = Gazetteer::new(["New York"], &en());
        let s = tokenize("cheap hotels in beijing", &en());
        assert!(ner_anchors(&s, "en", &g).unwrap().is_empty());
    }

    #[test]
    fn gazetteer_longest_match() {
        let g = Gazetteer::new(["new york", "york", "new york city"], &en());
        let s = tokenize("from new york to york and new york city", &en());
        assert_eq!(
            texts(&ner_anchors(&s, "en", &g).unwrap()),
            ["new york", "york", "new york city"]
        );
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn empty_gazetteer_finds_nothing() {
        let g = Gazetteer::new(Vec::<String>::new(), &en());
        assert!(g.is_empty());
        let s = tokenize("anything at all in new york", &en());
        assert!(ner_anchors(&s, "en", &g).unwrap().is_empty());
    }

    #[test]
    fn gazetteer_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gaz.txt");
        fs::write(&p, "Beijing\n\n  \nGreat Wall\n").unwrap();
        let g = Gazetteer::from_file(&p, &en()).unwrap();
        assert_eq!(g.len(), 2);
        assert!(Gazetteer::from_file(&dir.path().join("missing"), &en()).is_err());
    }

    #[test]
    fn pass_through_auto_tagger() {
        let s = tokenize("what is the great wall", &en());
        assert!(auto_tag(&s, "en", &PassThroughAutoTagger)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn label_conversion() {
        let labels = ["O", "ANCHOR", "ANCHOR", "O", "ANCHOR"];
        let spans = labels_to_spans(&labels, 5).unwrap();
        assert_eq!(spans, vec![AnchorSpan::new(1, 3), AnchorSpan::new(4, 5)]);
        assert_eq!(spans_to_labels(&spans, 5), labels);
        assert!(matches!(
            labels_to_spans(&labels, 4),
            Err(TaggerError::Protocol(_))
        ));
        assert!(matches!(
            labels_to_spans(&["B-LOC"], 1),
            Err(TaggerError::Protocol(_))
        ));
    }
}
