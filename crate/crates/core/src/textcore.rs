//! Language profiles, normalization, tokenization and n-grams.
//!
//! Every other module compares tokens through [`Token::norm`], so equality
//! throughout the crate means "equal after NFKC + case folding".

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const EN_STOPWORDS: &str = include_str!("../data/stopwords/en.txt");
const ZH_STOPWORDS: &str = include_str!("../data/stopwords/zh.txt");

/// How raw text is split into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Segmentation {
    /// Split on Unicode whitespace, peeling leading/trailing punctuation.
    Whitespace,
    /// One token per non-whitespace character; Latin letter/digit runs stay whole.
    PerCharacter,
}

impl Segmentation {
    /// Joins token surfaces so that re-tokenizing yields the same tokens.
    pub fn join<S: AsRef<str>>(self, parts: &[S]) -> String {
        match self {
            Segmentation::Whitespace => {
                let mut out = String::new();
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    out.push_str(p.as_ref());
                }
                out
            }
            Segmentation::PerCharacter => {
                let mut out = String::new();
                let mut prev_latin = false;
                for p in parts {
                    let p = p.as_ref();
                    let latin = p.chars().next().is_some_and(is_latin_alnum);
                    if prev_latin && latin {
                        out.push(' ');
                    }
                    out.push_str(p);
                    prev_latin = latin;
                }
                out
            }
        }
    }
}

/// Language code plus the segmentation and stopword data attached to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageProfile {
    code: String,
    segmentation: Segmentation,
    stopwords: Arc<BTreeSet<String>>,
}

impl LanguageProfile {
    pub fn new(
        code: impl Into<String>,
        segmentation: Segmentation,
        stopwords: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let code = code.into();
        if code.trim().is_empty() {
            return Err(Error::Config("language code must be non-empty".into()));
        }
        Ok(Self {
            code,
            segmentation,
            stopwords: Arc::new(normalize_stopwords(stopwords)),
        })
    }

    fn shared(code: &str, segmentation: Segmentation, stopwords: Arc<BTreeSet<String>>) -> Self {
        Self {
            code: code.to_owned(),
            segmentation,
            stopwords,
        }
    }

    /// Built-in English profile (whitespace segmentation, shipped stopword list).
    pub fn english() -> Self {
        Self::shared(
            "en",
            Segmentation::Whitespace,
            builtin_stopwords(Builtin::En),
        )
    }

    /// Built-in Chinese profile (per-character segmentation, common particles).
    pub fn chinese() -> Self {
        Self::shared(
            "zh",
            Segmentation::PerCharacter,
            builtin_stopwords(Builtin::Zh),
        )
    }

    /// Resolves a language code such as `en`, `en_XX`, `zh-CN` to a built-in profile.
    ///
    /// CJK codes get per-character segmentation; unknown codes get whitespace
    /// segmentation with no stopwords. The returned profile keeps `code` verbatim.
    pub fn for_code(code: &str) -> Result<Self> {
        let base = code
            .split(['_', '-'])
            .next()
            .unwrap_or_default()
            .to_ascii_lowercase();
        if code.trim().is_empty() {
            return Err(Error::Config("language code must be non-empty".into()));
        }
        let (seg, stop) = match base.as_str() {
            "en" => (Segmentation::Whitespace, builtin_stopwords(Builtin::En)),
            "zh" => (Segmentation::PerCharacter, builtin_stopwords(Builtin::Zh)),
            "ja" | "ko" => (Segmentation::PerCharacter, builtin_stopwords(Builtin::None)),
            _ => (Segmentation::Whitespace, builtin_stopwords(Builtin::None)),
        };
        Ok(Self::shared(code, seg, stop))
    }

    /// Replaces the stopword list with the contents of a stopword file.
    pub fn with_stopword_file(mut self, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.stopwords = Arc::new(normalize_stopwords(parse_stopwords(&text)));
        Ok(self)
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn segmentation(&self) -> Segmentation {
        self.segmentation
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    /// `norm` must already be normalized.
    pub fn is_stopword(&self, norm: &str) -> bool {
        self.stopwords.contains(norm)
    }
}

fn normalize_stopwords(words: impl IntoIterator<Item = String>) -> BTreeSet<String> {
    words
        .into_iter()
        .map(|s| normalize(&s))
        .filter(|s| !s.is_empty())
        .collect()
}

#[derive(Clone, Copy)]
enum Builtin {
    En,
    Zh,
    None,
}

fn builtin_stopwords(which: Builtin) -> Arc<BTreeSet<String>> {
    static EN: OnceLock<Arc<BTreeSet<String>>> = OnceLock::new();
    static ZH: OnceLock<Arc<BTreeSet<String>>> = OnceLock::new();
    static EMPTY: OnceLock<Arc<BTreeSet<String>>> = OnceLock::new();
    let (cell, text) = match which {
        Builtin::En => (&EN, EN_STOPWORDS),
        Builtin::Zh => (&ZH, ZH_STOPWORDS),
        Builtin::None => (&EMPTY, ""),
    };
    cell.get_or_init(|| Arc::new(normalize_stopwords(parse_stopwords(text))))
        .clone()
}

/// Profiles keyed by language code, falling back to [`LanguageProfile::for_code`].
#[derive(Debug, Clone, Default)]
pub struct ProfileSet {
    overrides: BTreeMap<String, LanguageProfile>,
}

impl ProfileSet {
    pub fn insert(&mut self, profile: LanguageProfile) {
        self.overrides.insert(profile.code.clone(), profile);
    }

    pub fn get(&self, code: &str) -> Cow<'_, LanguageProfile> {
        match self.overrides.get(code) {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(
                LanguageProfile::for_code(code).unwrap_or_else(|_| LanguageProfile::english()),
            ),
        }
    }
}

/// Parses a stopword file: one entry per line, `#` starts a comment.
pub fn parse_stopwords(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

/// NFKC followed by lowercase folding, re-composed so the result is a fixed point.
pub fn normalize(text: &str) -> String {
    let folded: String = text.nfkc().flat_map(char::to_lowercase).collect();
    folded.nfkc().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub norm: String,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        let norm = normalize(&surface);
        Self { surface, norm }
    }

    pub fn is_punctuation(&self) -> bool {
        is_punctuation(&self.norm)
    }
}

/// True when `text` has no alphanumeric character.
pub fn is_punctuation(text: &str) -> bool {
    !text.chars().any(char::is_alphanumeric)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedSentence {
    pub raw: String,
    pub tokens: Vec<Token>,
    pub segmentation: Segmentation,
}

impl TokenizedSentence {
    /// Builds a sentence whose `raw` is the canonical join of `tokens`.
    pub fn from_tokens(tokens: Vec<Token>, segmentation: Segmentation) -> Self {
        let raw = segmentation.join(&tokens.iter().map(|t| &t.surface).collect::<Vec<_>>());
        Self {
            raw,
            tokens,
            segmentation,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn norms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.norm.as_str()).collect()
    }

    /// Surfaces joined with the segmentation's joining rule.
    pub fn joined(&self) -> String {
        self.segmentation
            .join(&self.tokens.iter().map(|t| &t.surface).collect::<Vec<_>>())
    }
}

fn is_latin_alnum(c: char) -> bool {
    c.is_ascii_alphanumeric()
        || (c.is_alphanumeric() && ('\u{00C0}'..='\u{024F}').contains(&c))
        || ('\u{FF10}'..='\u{FF19}').contains(&c)
        || ('\u{FF21}'..='\u{FF3A}').contains(&c)
        || ('\u{FF41}'..='\u{FF5A}').contains(&c)
}

/// Splits `text` into base characters with their trailing combining marks.
fn clusters(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if is_combining_mark(c) && start.is_some() {
            continue;
        }
        if let Some(s) = start {
            out.push(&text[s..i]);
        }
        start = Some(i);
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

fn cluster_is_word(cluster: &str) -> bool {
    cluster.chars().next().is_some_and(char::is_alphanumeric)
}

fn split_chunk<'a>(chunk: &'a str, out: &mut Vec<&'a str>) {
    let cl = clusters(chunk);
    let Some(first_word) = cl.iter().position(|c| cluster_is_word(c)) else {
        out.extend(cl);
        return;
    };
    let last_word = cl.iter().rposition(|c| cluster_is_word(c)).unwrap();
    out.extend(&cl[..first_word]);
    let start = cl[first_word].as_ptr() as usize - chunk.as_ptr() as usize;
    let end = cl[last_word].as_ptr() as usize - chunk.as_ptr() as usize + cl[last_word].len();
    out.push(&chunk[start..end]);
    out.extend(&cl[last_word + 1..]);
}

fn segment_whitespace(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for chunk in text.split(char::is_whitespace).filter(|c| !c.is_empty()) {
        split_chunk(chunk, &mut out);
    }
    out
}

fn segment_per_character(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for cluster in clusters(text) {
        let offset = cluster.as_ptr() as usize - text.as_ptr() as usize;
        let base = cluster.chars().next().unwrap();
        if base.is_whitespace() {
            if let Some((s, e)) = run.take() {
                out.push(&text[s..e]);
            }
            continue;
        }
        if is_latin_alnum(base) {
            run = Some(match run {
                Some((s, _)) => (s, offset + cluster.len()),
                None => (offset, offset + cluster.len()),
            });
            continue;
        }
        if let Some((s, e)) = run.take() {
            out.push(&text[s..e]);
        }
        out.push(cluster);
    }
    if let Some((s, e)) = run {
        out.push(&text[s..e]);
    }
    out
}

/// Splits `text` according to `segmentation`, without building [`Token`]s.
pub fn segment(text: &str, segmentation: Segmentation) -> Vec<&str> {
    match segmentation {
        Segmentation::Whitespace => segment_whitespace(text),
        Segmentation::PerCharacter => segment_per_character(text),
    }
}

pub fn tokenize(text: &str, profile: &LanguageProfile) -> TokenizedSentence {
    let tokens = segment(text, profile.segmentation)
        .into_iter()
        .map(Token::new)
        .collect();
    TokenizedSentence {
        raw: text.to_owned(),
        tokens,
        segmentation: profile.segmentation,
    }
}

/// All contiguous length-`n` windows of normalized tokens, with multiplicity.
///
/// # Panics
/// Panics if `n == 0`.
pub fn ngrams(tokens: &[Token], n: usize) -> Vec<Vec<&str>> {
    assert!(n >= 1, "n-gram order must be positive");
    tokens
        .windows(n)
        .map(|w| w.iter().map(|t| t.norm.as_str()).collect())
        .collect()
}

/// True iff at least one token is neither a stopword nor pure punctuation.
pub fn is_content<S: AsRef<str>>(norms: &[S], profile: &LanguageProfile) -> bool {
    norms.iter().any(|n| {
        let n = n.as_ref();
        !is_punctuation(n) && !profile.is_stopword(n)
    })
}
