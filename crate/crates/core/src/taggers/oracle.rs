//! The Oracle Tagger: anchors are the maximal token sequences that a source
//! shares with at least `min_ref_support` of its references.
//!
//! Each reference is indexed with a suffix automaton over interned token ids.
//! Walking the source through an automaton yields, for every source position
//! `e`, the length of the longest source substring ending at `e` that occurs
//! in that reference. A span `[s, e)` is then supported by reference `r` iff
//! that length at `e - 1` is at least `e - s`.
//!
//! A supported span is accepted when it contains a content token, does not
//! start or end with punctuation, and is not a common n-gram. Only accepted
//! spans that are not inside another accepted span are returned.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{AnchorCandidate, CommonNgrams, Rejection, TaggerError};
use crate::markup::AnchorSpan;
use crate::textcore::{is_content, is_punctuation, LanguageProfile, TokenizedSentence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// References that must contain a sequence for it to be an anchor.
    pub min_ref_support: usize,
    /// Largest share of source tokens anchors may cover before the cluster is rejected.
    pub max_coverage: f64,
    /// Top-frequency quantile defining common n-grams.
    pub common_ngram_quantile: f64,
    /// Longest n-gram considered for the common set.
    pub common_ngram_max_n: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            min_ref_support: 2,
            max_coverage: 0.5,
            common_ngram_quantile: 0.001,
            common_ngram_max_n: 3,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_ref_support < 2 {
            return Err(format!(
                "min_ref_support must be >= 2, got {}",
                self.min_ref_support
            ));
        }
        if !(self.max_coverage > 0.0 && self.max_coverage <= 1.0) {
            return Err(format!(
                "max_coverage must be in (0, 1], got {}",
                self.max_coverage
            ));
        }
        if !(0.0..=1.0).contains(&self.common_ngram_quantile) {
            return Err(format!(
                "common_ngram_quantile must be in [0, 1], got {}",
                self.common_ngram_quantile
            ));
        }
        if self.common_ngram_max_n == 0 {
            return Err("common_ngram_max_n must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
struct State {
    len: usize,
    link: Option<usize>,
    next: HashMap<u32, usize>,
}

/// Suffix automaton over a sequence of token ids.
#[derive(Debug, Clone)]
pub struct SuffixAutomaton {
    states: Vec<State>,
    last: usize,
}

impl SuffixAutomaton {
    pub fn new(seq: &[u32]) -> Self {
        let mut sam = Self {
            states: vec![State::default()],
            last: 0,
        };
        for &c in seq {
            sam.extend(c);
        }
        sam
    }

    fn extend(&mut self, c: u32) {
        let cur = self.states.len();
        self.states.push(State {
            len: self.states[self.last].len + 1,
            link: None,
            next: HashMap::new(),
        });
        let mut p = Some(self.last);
        while let Some(pi) = p {
            if self.states[pi].next.contains_key(&c) {
                break;
            }
            self.states[pi].next.insert(c, cur);
            p = self.states[pi].link;
        }
        match p {
            None => self.states[cur].link = Some(0),
            Some(pi) => {
                let q = self.states[pi].next[&c];
                if self.states[pi].len + 1 == self.states[q].len {
                    self.states[cur].link = Some(q);
                } else {
                    let clone = self.states.len();
                    let mut cloned = self.states[q].clone();
                    cloned.len = self.states[pi].len + 1;
                    self.states.push(cloned);
                    let mut p = Some(pi);
                    while let Some(pj) = p {
                        if self.states[pj].next.get(&c) != Some(&q) {
                            break;
                        }
                        self.states[pj].next.insert(c, clone);
                        p = self.states[pj].link;
                    }
                    self.states[q].link = Some(clone);
                    self.states[cur].link = Some(clone);
                }
            }
        }
        self.last = cur;
    }

    /// `out[e]` = length of the longest substring of `text` ending at `e` found in the indexed sequence.
    pub fn matching_statistics(&self, text: &[u32]) -> Vec<usize> {
        let mut out = Vec::with_capacity(text.len());
        let (mut v, mut l) = (0usize, 0usize);
        for c in text {
            loop {
                if let Some(&n) = self.states[v].next.get(c) {
                    v = n;
                    l += 1;
                    break;
                }
                match self.states[v].link {
                    Some(link) => {
                        v = link;
                        l = self.states[v].len;
                    }
                    None => {
                        l = 0;
                        break;
                    }
                }
            }
            out.push(l);
        }
        out
    }

    /// True iff `pattern` occurs contiguously in the indexed sequence.
    pub fn contains(&self, pattern: &[u32]) -> bool {
        let mut v = 0;
        for c in pattern {
            match self.states[v].next.get(c) {
                Some(&n) => v = n,
                None => return false,
            }
        }
        true
    }
}

#[derive(Default)]
struct Interner<'a> {
    ids: HashMap<&'a str, u32>,
}

impl<'a> Interner<'a> {
    fn intern(&mut self, s: &'a TokenizedSentence) -> Vec<u32> {
        s.tokens
            .iter()
            .map(|t| {
                let next = self.ids.len() as u32;
                *self.ids.entry(t.norm.as_str()).or_insert(next)
            })
            .collect()
    }
}

fn is_subsequence(needle: &[u32], hay: &[u32]) -> bool {
    needle.len() < hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Mines anchors from a source sentence and its references.
///
/// Returns candidates ordered by first occurrence in the source.
pub fn oracle_anchors(
    source: &TokenizedSentence,
    references: &[TokenizedSentence],
    cfg: &OracleConfig,
    common: &CommonNgrams,
    profile: &LanguageProfile,
) -> Result<Vec<AnchorCandidate>, TaggerError> {
    let required = cfg.min_ref_support.max(2);
    if references.len() < required {
        return Err(TaggerError::InsufficientReferences {
            references: references.len(),
            required,
        });
    }
    let mut interner = Interner::default();
    let src = interner.intern(source);
    let stats: Vec<Vec<usize>> = references
        .iter()
        .map(|r| SuffixAutomaton::new(&interner.intern(r)).matching_statistics(&src))
        .collect();

    // Distinct supported sequences passing the content and commonness filters,
    // keyed by token ids, with (first start, support).
    let mut accepted: BTreeMap<Vec<u32>, (usize, usize)> = BTreeMap::new();
    let mut rejected: HashSet<Vec<u32>> = HashSet::new();
    for end in 1..=src.len() {
        for start in 0..end {
            let len = end - start;
            let support = stats.iter().filter(|ms| ms[end - 1] >= len).count();
            if support < cfg.min_ref_support {
                continue;
            }
            let key = &src[start..end];
            if let Some(entry) = accepted.get_mut(key) {
                entry.0 = entry.0.min(start);
                continue;
            }
            if rejected.contains(key) {
                continue;
            }
            let norms: Vec<&str> = source.tokens[start..end]
                .iter()
                .map(|t| t.norm.as_str())
                .collect();
            if is_content(&norms, profile) && !edge_punctuation(&norms) && !common.contains(&norms)
            {
                accepted.insert(key.to_vec(), (start, support));
            } else {
                rejected.insert(key.to_vec());
            }
        }
    }

    let keys: Vec<&Vec<u32>> = accepted.keys().collect();
    let mut maximal: Vec<(usize, &Vec<u32>, usize)> = accepted
        .iter()
        .filter(|(k, _)| !keys.iter().any(|other| is_subsequence(k, other)))
        .map(|(k, (start, support))| (*start, k, *support))
        .collect();
    maximal.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.len().cmp(&a.1.len())));

    let mut covered = vec![false; src.len()];
    for (_, k, _) in &maximal {
        for (i, w) in src.windows(k.len()).enumerate() {
            if w == k.as_slice() {
                covered[i..i + k.len()].fill(true);
            }
        }
    }
    if !src.is_empty() {
        let coverage = covered.iter().filter(|c| **c).count() as f64 / src.len() as f64;
        if coverage > cfg.max_coverage {
            return Err(TaggerError::Rejected(Rejection::Overlap {
                coverage,
                max_coverage: cfg.max_coverage,
            }));
        }
    }

    Ok(maximal
        .into_iter()
        .map(|(start, k, support)| AnchorCandidate {
            tokens: source.tokens[start..start + k.len()]
                .iter()
                .map(|t| t.norm.clone())
                .collect(),
            support,
            span: Some(AnchorSpan::new(start, start + k.len())),
        })
        .collect())
}

/// Anchors neither start nor end with a punctuation token.
fn edge_punctuation(norms: &[&str]) -> bool {
    norms.first().is_some_and(|n| is_punctuation(n))
        || norms.last().is_some_and(|n| is_punctuation(n))
}
