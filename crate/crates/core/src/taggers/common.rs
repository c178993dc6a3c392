use std::collections::{HashMap, HashSet};

/// Corpus-frequent n-grams that the Oracle Tagger refuses as anchors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommonNgrams {
    grams: HashSet<Vec<String>>,
}

impl CommonNgrams {
    pub fn contains<S: AsRef<str>>(&self, seq: &[S]) -> bool {
        // Avoid allocating for sequences that can't be present.
        if self.grams.is_empty() {
            return false;
        }
        let key: Vec<String> = seq.iter().map(|s| s.as_ref().to_owned()).collect();
        self.grams.contains(&key)
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    /// Entries in sorted order.
    pub fn sorted(&self) -> Vec<Vec<String>> {
        let mut v: Vec<_> = self.grams.iter().cloned().collect();
        v.sort();
        v
    }
}

impl FromIterator<Vec<String>> for CommonNgrams {
    fn from_iter<I: IntoIterator<Item = Vec<String>>>(iter: I) -> Self {
        Self {
            grams: iter.into_iter().collect(),
        }
    }
}

/// Collects n-grams (1 ≤ n ≤ `n_max`) at or above the top-`quantile` frequency cutoff.
///
/// The cutoff is the count of the `ceil(quantile * distinct)`-th most frequent
/// n-gram, and never below 2: an n-gram seen once is not common.
pub fn build_common_ngram_set<S: AsRef<str>>(
    corpus: &[Vec<S>],
    n_max: usize,
    quantile: f64,
) -> CommonNgrams {
    let mut counts: HashMap<Vec<&str>, usize> = HashMap::new();
    for sentence in corpus {
        for g in sentence_ngrams(sentence, n_max) {
            *counts.entry(g).or_default() += 1;
        }
    }
    top_quantile(counts, quantile)
}

/// Like [`build_common_ngram_set`], but counts each n-gram at most once per
/// document, where a document is a group of sentences such as one cluster.
///
/// A phrase repeated across the sentences of a single cluster is then not
/// common, however small the corpus.
pub fn build_common_ngram_set_by_document<S: AsRef<str>>(
    documents: &[Vec<Vec<S>>],
    n_max: usize,
    quantile: f64,
) -> CommonNgrams {
    let mut counts: HashMap<Vec<&str>, usize> = HashMap::new();
    for doc in documents {
        let grams: HashSet<Vec<&str>> =
            doc.iter().flat_map(|s| sentence_ngrams(s, n_max)).collect();
        for g in grams {
            *counts.entry(g).or_default() += 1;
        }
    }
    top_quantile(counts, quantile)
}

fn sentence_ngrams<S: AsRef<str>>(sentence: &[S], n_max: usize) -> Vec<Vec<&str>> {
    let norms: Vec<&str> = sentence.iter().map(AsRef::as_ref).collect();
    (1..=n_max.min(norms.len()))
        .flat_map(|n| norms.windows(n).map(<[&str]>::to_vec).collect::<Vec<_>>())
        .collect()
}

fn top_quantile(counts: HashMap<Vec<&str>, usize>, quantile: f64) -> CommonNgrams {
    let distinct = counts.len();
    // Tolerance keeps e.g. 0.001 * 1000 from rounding up to 2.
    let k = (quantile.clamp(0.0, 1.0) * distinct as f64 - 1e-9)
        .ceil()
        .max(0.0) as usize;
    if k == 0 {
        return CommonNgrams::default();
    }
    let mut freqs: Vec<usize> = counts.values().copied().collect();
    freqs.sort_unstable_by(|a, b| b.cmp(a));
    let cutoff = freqs[k - 1].max(2);
    counts
        .into_iter()
        .filter(|(_, c)| *c >= cutoff)
        .map(|(g, _)| g.into_iter().map(str::to_owned).collect())
        .collect()
}
