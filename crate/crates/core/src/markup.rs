//! The inline `<tag> … </tag>` annotation format and anchor spans.
//!
//! Markers are token boundaries: `in<tag>Beijing</tag>?` and
//! `in <tag> Beijing </tag> ?` parse to the same tokens and spans. Anchors are
//! matched on normalized tokens.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textcore::{normalize, tokenize, LanguageProfile, Token, TokenizedSentence};

pub const OPEN_TAG: &str = "<tag>";
pub const CLOSE_TAG: &str = "</tag>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkupError {
    #[error("unbalanced tag markers at byte {offset}: {detail}")]
    UnbalancedTags { offset: usize, detail: &'static str },
    #[error("empty anchor at byte {offset}")]
    EmptyAnchor { offset: usize },
    #[error("invalid anchor span [{start}, {end}) for a sentence of {len} tokens")]
    InvalidSpan {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("anchor spans [{0}, {1}) and [{2}, {3}) overlap or are out of order")]
    OverlappingSpans(usize, usize, usize, usize),
    #[error("marker strings must be non-empty and distinct")]
    InvalidMarkers,
}

/// Half-open token range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnchorSpan {
    pub start: usize,
    pub end: usize,
}

impl AnchorSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &AnchorSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// A tokenized sentence plus sorted, disjoint, non-touching anchor spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    sentence: TokenizedSentence,
    anchors: Vec<AnchorSpan>,
    lang: String,
}

impl TaggedSentence {
    /// Validates `anchors` and merges spans that touch end-to-start.
    pub fn new(
        sentence: TokenizedSentence,
        mut anchors: Vec<AnchorSpan>,
        lang: impl Into<String>,
    ) -> Result<Self, MarkupError> {
        let len = sentence.len();
        anchors.sort();
        for a in &anchors {
            if a.start >= a.end || a.end > len {
                return Err(MarkupError::InvalidSpan {
                    start: a.start,
                    end: a.end,
                    len,
                });
            }
        }
        for pair in anchors.windows(2) {
            if pair[0].overlaps(&pair[1]) {
                return Err(MarkupError::OverlappingSpans(
                    pair[0].start,
                    pair[0].end,
                    pair[1].start,
                    pair[1].end,
                ));
            }
        }
        Ok(Self {
            sentence,
            anchors: merge_touching(anchors),
            lang: lang.into(),
        })
    }

    pub fn untagged(sentence: TokenizedSentence, lang: impl Into<String>) -> Self {
        Self {
            sentence,
            anchors: Vec::new(),
            lang: lang.into(),
        }
    }

    pub fn sentence(&self) -> &TokenizedSentence {
        &self.sentence
    }

    pub fn tokens(&self) -> &[Token] {
        &self.sentence.tokens
    }

    pub fn anchors(&self) -> &[AnchorSpan] {
        &self.anchors
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    /// Normalized token sequence of every anchor, in span order.
    pub fn anchor_tokens(&self) -> Vec<Vec<String>> {
        self.anchors
            .iter()
            .map(|a| {
                self.sentence.tokens[a.start..a.end]
                    .iter()
                    .map(|t| t.norm.clone())
                    .collect()
            })
            .collect()
    }

    /// Anchor token sequences joined with the sentence's joining rule.
    pub fn anchor_strings(&self) -> Vec<String> {
        self.anchor_tokens()
            .iter()
            .map(|seq| self.sentence.segmentation.join(seq))
            .collect()
    }
}

fn merge_touching(spans: Vec<AnchorSpan>) -> Vec<AnchorSpan> {
    let mut out: Vec<AnchorSpan> = Vec::with_capacity(spans.len());
    for s in spans {
        match out.last_mut() {
            Some(last) if last.end == s.start => last.end = s.end,
            _ => out.push(s),
        }
    }
    out
}

/// The open/close marker pair. Defaults to `<tag>` / `</tag>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Markers {
    pub open: String,
    pub close: String,
}

impl Default for Markers {
    fn default() -> Self {
        Self {
            open: OPEN_TAG.to_owned(),
            close: CLOSE_TAG.to_owned(),
        }
    }
}

enum Marker {
    Open,
    Close,
}

impl Markers {
    pub fn new(open: impl Into<String>, close: impl Into<String>) -> Result<Self, MarkupError> {
        let m = Self {
            open: open.into(),
            close: close.into(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MarkupError> {
        if self.open.is_empty() || self.close.is_empty() || self.open == self.close {
            return Err(MarkupError::InvalidMarkers);
        }
        Ok(())
    }

    fn next_marker(&self, text: &str, from: usize) -> Option<(usize, Marker, usize)> {
        let open = text[from..].find(&self.open).map(|i| i + from);
        let close = text[from..].find(&self.close).map(|i| i + from);
        match (open, close) {
            (None, None) => None,
            (Some(o), None) => Some((o, Marker::Open, self.open.len())),
            (None, Some(c)) => Some((c, Marker::Close, self.close.len())),
            (Some(o), Some(c)) => {
                // On a tie the longer marker wins so that prefix-sharing markers still parse.
                if o < c || (o == c && self.open.len() >= self.close.len()) {
                    Some((o, Marker::Open, self.open.len()))
                } else {
                    Some((c, Marker::Close, self.close.len()))
                }
            }
        }
    }

    /// Parses tagged text into tokens and anchor spans.
    pub fn parse(
        &self,
        text: &str,
        profile: &LanguageProfile,
    ) -> Result<TaggedSentence, MarkupError> {
        self.validate()?;
        let mut tokens: Vec<Token> = Vec::new();
        let mut anchors = Vec::new();
        let mut open_at: Option<(usize, usize)> = None;
        let mut pos = 0;
        loop {
            let next = self.next_marker(text, pos);
            let seg_end = next.as_ref().map_or(text.len(), |(at, _, _)| *at);
            tokens.extend(tokenize(&text[pos..seg_end], profile).tokens);
            let Some((at, marker, len)) = next else { break };
            match marker {
                Marker::Open => {
                    if open_at.is_some() {
                        return Err(MarkupError::UnbalancedTags {
                            offset: at,
                            detail: "nested open marker",
                        });
                    }
                    open_at = Some((at, tokens.len()));
                }
                Marker::Close => {
                    let Some((opened, start)) = open_at.take() else {
                        return Err(MarkupError::UnbalancedTags {
                            offset: at,
                            detail: "close marker without open",
                        });
                    };
                    if tokens.len() == start {
                        return Err(MarkupError::EmptyAnchor { offset: opened });
                    }
                    anchors.push(AnchorSpan::new(start, tokens.len()));
                }
            }
            pos = at + len;
        }
        if let Some((at, _)) = open_at {
            return Err(MarkupError::UnbalancedTags {
                offset: at,
                detail: "open marker never closed",
            });
        }
        let sentence = TokenizedSentence::from_tokens(tokens, profile.segmentation());
        TaggedSentence::new(sentence, anchors, profile.code())
    }

    /// Renders with single spaces around every marker.
    pub fn render(&self, ts: &TaggedSentence) -> String {
        let seg = ts.sentence.segmentation;
        let tokens = &ts.sentence.tokens;
        let join = |range: std::ops::Range<usize>| {
            seg.join(&tokens[range].iter().map(|t| &t.surface).collect::<Vec<_>>())
        };
        let mut parts: Vec<String> = Vec::new();
        let mut cursor = 0;
        for a in &ts.anchors {
            if cursor < a.start {
                parts.push(join(cursor..a.start));
            }
            parts.push(self.open.clone());
            parts.push(join(a.start..a.end));
            parts.push(self.close.clone());
            cursor = a.end;
        }
        if cursor < tokens.len() {
            parts.push(join(cursor..tokens.len()));
        }
        parts.join(" ")
    }

    /// Removes every marker occurrence, leaving a space in its place.
    pub fn strip_text(&self, text: &str) -> String {
        text.replace(&self.open, " ").replace(&self.close, " ")
    }
}

pub fn parse_tagged(text: &str, profile: &LanguageProfile) -> Result<TaggedSentence, MarkupError> {
    Markers::default().parse(text, profile)
}

pub fn render_tagged(ts: &TaggedSentence) -> String {
    Markers::default().render(ts)
}

pub fn strip_tags(ts: &TaggedSentence) -> TokenizedSentence {
    ts.sentence.clone()
}

/// Outcome of [`insert_anchors`] per requested anchor index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InsertReport {
    /// Anchors with no occurrence at all.
    pub absent: Vec<usize>,
    /// Anchors that occur but lost every occurrence to a longer or earlier one.
    pub suppressed: Vec<usize>,
}

/// Tokenizes an anchor string into the normalized sequence `insert_anchors` expects.
pub fn anchor_tokens(text: &str, profile: &LanguageProfile) -> Vec<String> {
    tokenize(text, profile)
        .tokens
        .into_iter()
        .map(|t| t.norm)
        .collect()
}

/// Marks occurrences of the given normalized token sequences.
///
/// All occurrences of all anchors are ranked longest first, then leftmost, and
/// greedily accepted unless they overlap an already accepted span.
pub fn insert_anchors<S: AsRef<str>>(
    sentence: TokenizedSentence,
    anchor_texts: &[Vec<S>],
    lang: impl Into<String>,
) -> (TaggedSentence, InsertReport) {
    let norms: Vec<&str> = sentence.tokens.iter().map(|t| t.norm.as_str()).collect();
    let anchors: Vec<Vec<String>> = anchor_texts
        .iter()
        .map(|a| a.iter().map(|t| normalize(t.as_ref())).collect())
        .collect();

    // (len, start, anchor index)
    let mut occurrences: Vec<(usize, usize, usize)> = Vec::new();
    let mut report = InsertReport::default();
    for (idx, anchor) in anchors.iter().enumerate() {
        if anchor.is_empty() || anchors[..idx].contains(anchor) {
            continue;
        }
        let before = occurrences.len();
        if anchor.len() <= norms.len() {
            for (start, window) in norms.windows(anchor.len()).enumerate() {
                if window.iter().zip(anchor).all(|(a, b)| *a == b) {
                    occurrences.push((anchor.len(), start, idx));
                }
            }
        }
        if occurrences.len() == before {
            report.absent.push(idx);
        }
    }
    occurrences.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut taken = vec![false; norms.len()];
    let mut spans = Vec::new();
    let mut used = vec![false; anchors.len()];
    for (len, start, idx) in occurrences {
        if taken[start..start + len].iter().any(|&t| t) {
            continue;
        }
        taken[start..start + len].iter_mut().for_each(|t| *t = true);
        spans.push(AnchorSpan::new(start, start + len));
        used[idx] = true;
    }
    for (idx, anchor) in anchors.iter().enumerate() {
        let first = !anchor.is_empty() && !anchors[..idx].contains(anchor);
        if first && !used[idx] && !report.absent.contains(&idx) {
            report.suppressed.push(idx);
        }
    }
    let tagged = TaggedSentence::new(sentence, spans, lang).expect("greedy spans are disjoint");
    (tagged, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textcore::Segmentation;
    use proptest::prelude::*;

    fn en() -> LanguageProfile {
        LanguageProfile::english()
    }

    fn sentence(words: &[&str]) -> TokenizedSentence {
        TokenizedSentence::from_tokens(
            words.iter().map(|w| Token::new(*w)).collect(),
            Segmentation::Whitespace,
        )
    }

    #[test]
    fn parses_running_example() {
        let ts = parse_tagged(
            "What are cheap lodging options in <tag> Beijing </tag>?",
            &en(),
        )
        .unwrap();
        assert_eq!(ts.sentence().norms().last(), Some(&"?"));
        assert_eq!(ts.anchors(), &[AnchorSpan::new(6, 7)]);
        assert_eq!(ts.anchor_strings(), ["beijing"]);
    }

    #[test]
    fn untagged_text() {
        let ts = parse_tagged("no tags here", &en()).unwrap();
        assert!(ts.anchors().is_empty());
        assert_eq!(ts.tokens().len(), 3);
    }

    #[test]
    fn rejects_bad_markup() {
        assert!(matches!(
            parse_tagged("<tag> a </tag> b <tag>", &en()),
            Err(MarkupError::UnbalancedTags { .. })
        ));
        assert!(matches!(
            parse_tagged("a </tag>", &en()),
            Err(MarkupError::UnbalancedTags { .. })
        ));
        assert!(matches!(
            parse_tagged("<tag> a <tag> b </tag> </tag>", &en()),
            Err(MarkupError::UnbalancedTags { .. })
        ));
        assert!(matches!(
            parse_tagged("x <tag></tag>", &en()),
            Err(MarkupError::EmptyAnchor { .. })
        ));
        assert!(matches!(
            parse_tagged("x <tag>  </tag>", &en()),
            Err(MarkupError::EmptyAnchor { .. })
        ));
    }

    #[test]
    fn markers_are_token_boundaries() {
        let tight = parse_tagged("in<tag>Beijing</tag>?", &en()).unwrap();
        let loose = parse_tagged("in <tag> Beijing </tag> ?", &en()).unwrap();
        assert_eq!(tight, loose);
        let zh = LanguageProfile::chinese();
        let ts = parse_tagged("我想去<tag>北京</tag>玩", &zh).unwrap();
        assert_eq!(ts.anchors(), &[AnchorSpan::new(3, 5)]);
        assert_eq!(render_tagged(&ts), "我想去 <tag> 北京 </tag> 玩");
    }

    #[test]
    fn touching_anchors_merge() {
        let ts = parse_tagged("<tag> a </tag><tag> b </tag> c", &en()).unwrap();
        assert_eq!(ts.anchors(), &[AnchorSpan::new(0, 2)]);
    }

    #[test]
    fn render_examples() {
        let ts =
            TaggedSentence::new(sentence(&["hello"]), vec![AnchorSpan::new(0, 1)], "en").unwrap();
        assert_eq!(render_tagged(&ts), "<tag> hello </tag>");
        let ts = TaggedSentence::new(sentence(&["a", "b"]), vec![], "en").unwrap();
        assert_eq!(render_tagged(&ts), "a b");
        let src = "What are cheap lodging options in <tag> Beijing </tag>?";
        let ts = parse_tagged(src, &en()).unwrap();
        assert_eq!(
            render_tagged(&ts),
            "What are cheap lodging options in <tag> Beijing </tag> ?"
        );
        assert_eq!(parse_tagged(&render_tagged(&ts), &en()).unwrap(), ts);
    }

    #[test]
    fn strip_keeps_tokens() {
        for text in [
            "What are cheap lodging options in <tag> Beijing </tag>?",
            "no tags here",
        ] {
            let ts = parse_tagged(text, &en()).unwrap();
            let plain = strip_tags(&ts);
            assert_eq!(plain.tokens, ts.tokens());
            assert!(!plain.raw.contains("<tag>"));
        }
        assert_eq!(
            tokenize(
                &Markers::default().strip_text("in<tag>Beijing</tag>?"),
                &en()
            )
            .norms(),
            ["in", "beijing", "?"]
        );
    }

    #[test]
    fn custom_markers() {
        let m = Markers::new("[[", "]]").unwrap();
        let ts = m.parse("go to [[ New York ]] now", &en()).unwrap();
        assert_eq!(ts.anchor_strings(), ["new york"]);
        assert_eq!(m.render(&ts), "go to [[ New York ]] now");
        assert!(Markers::new("x", "x").is_err());
    }

    #[test]
    fn rejects_invalid_spans() {
        assert!(TaggedSentence::new(sentence(&["a"]), vec![AnchorSpan::new(0, 2)], "en").is_err());
        assert!(
            TaggedSentence::new(sentence(&["a", "b"]), vec![AnchorSpan::new(1, 1)], "en").is_err()
        );
        assert!(TaggedSentence::new(
            sentence(&["a", "b", "c"]),
            vec![AnchorSpan::new(0, 2), AnchorSpan::new(1, 3)],
            "en"
        )
        .is_err());
    }

    #[test]
    fn insert_marks_every_occurrence() {
        let (ts, report) = insert_anchors(sentence(&["a", "b", "c", "b"]), &[vec!["b"]], "en");
        assert_eq!(
            ts.anchors(),
            &[AnchorSpan::new(1, 2), AnchorSpan::new(3, 4)]
        );
        assert_eq!(report, InsertReport::default());
    }

    /// Independent oracle: mark positions length by length, longest first.
    fn brute_force_insert(norms: &[&str], anchors: &[Vec<&str>]) -> Vec<AnchorSpan> {
        let mut mask = vec![false; norms.len()];
        let mut spans = Vec::new();
        let max_len = anchors.iter().map(Vec::len).max().unwrap_or(0);
        for len in (1..=max_len).rev() {
            for start in 0..norms.len().saturating_sub(len - 1) {
                let window = &norms[start..start + len];
                let hit = anchors
                    .iter()
                    .any(|a| a.len() == len && a.as_slice() == window);
                if hit && !mask[start..start + len].contains(&true) {
                    mask[start..start + len].fill(true);
                    spans.push(AnchorSpan::new(start, start + len));
                }
            }
        }
        spans.sort();
        // merge touching spans the same way TaggedSentence does
        let mut merged: Vec<AnchorSpan> = Vec::new();
        for s in spans {
            if let Some(last) = merged.last_mut() {
                if last.end == s.start {
                    last.end = s.end;
                    continue;
                }
            }
            merged.push(s);
        }
        merged
    }

    #[test]
    fn insert_prefers_longer_anchor() {
        let anchors = vec![vec!["b", "c"], vec!["c"]];
        let expected = brute_force_insert(&["a", "b", "c"], &anchors);
        assert_eq!(expected, vec![AnchorSpan::new(1, 3)]);
        let (ts, report) = insert_anchors(sentence(&["a", "b", "c"]), &anchors, "en");
        assert_eq!(ts.anchors(), expected.as_slice());
        assert_eq!(report.suppressed, vec![1]);
    }

    #[test]
    fn insert_reports_absent_anchor() {
        let (ts, report) = insert_anchors(sentence(&["a"]), &[vec!["z"]], "en");
        assert!(ts.anchors().is_empty());
        assert_eq!(report.absent, vec![0]);
    }

    #[test]
    fn insert_matches_normalized() {
        let s = tokenize("Cheap hotels in NEW YORK", &en());
        let (ts, _) = insert_anchors(s, &[anchor_tokens("new york", &en())], "en");
        assert_eq!(render_tagged(&ts), "Cheap hotels in <tag> NEW YORK </tag>");
    }

    fn word() -> impl Strategy<Value = &'static str> {
        prop_oneof![Just("a"), Just("b"), Just("c"), Just("d"), Just("?")]
    }

    fn tagged_sentence() -> impl Strategy<Value = TaggedSentence> {
        (
            proptest::collection::vec(word(), 0..12),
            proptest::collection::vec(any::<bool>(), 12),
        )
            .prop_map(|(words, cuts)| {
                let s = sentence(&words);
                let mut spans = Vec::new();
                let mut i = 0;
                while i < words.len() {
                    if cuts[i] {
                        let end = (i + 1 + (i % 3)).min(words.len());
                        spans.push(AnchorSpan::new(i, end));
                        i = end + 1;
                    } else {
                        i += 1;
                    }
                }
                TaggedSentence::new(s, spans, "en").unwrap()
            })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(ts in tagged_sentence()) {
            let text = render_tagged(&ts);
            let back = parse_tagged(&text, &en()).unwrap();
            prop_assert_eq!(back.tokens(), ts.tokens());
            prop_assert_eq!(back.anchors(), ts.anchors());
            prop_assert_eq!(text.matches(OPEN_TAG).count(), ts.anchors().len());
        }

        #[test]
        fn inserted_spans_match_oracle(
            words in proptest::collection::vec(word(), 0..12),
            anchors in proptest::collection::vec(proptest::collection::vec(word(), 1..4), 0..5),
        ) {
            let (ts, _) = insert_anchors(sentence(&words), &anchors, "en");
            for pair in ts.anchors().windows(2) {
                prop_assert!(pair[0].end < pair[1].start);
            }
            let expected = brute_force_insert(&words, &anchors);
            prop_assert_eq!(ts.anchors(), expected.as_slice());
        }
    }
}
