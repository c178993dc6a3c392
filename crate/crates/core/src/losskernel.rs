//! Label-smoothed cross-entropy with a source-copy penalty, plus its
//! gradient with respect to logits and golden-vector emission.
//!
//! For every target position `j` of sentence `i`, with predicted distribution
//! `q`, reference token `t`, aligned source token `s` and indicator `m`:
//!
//! ```text
//! loss_ij = (1 - ε)·(-ln q[t])  +  (ε/|D|)·Σ_v (-ln q[v])  -  w·m·(-ln q[s])
//! ```
//!
//! The batch loss is the sum over positions and sentences (or the per-token
//! mean). When `q = softmax(z)`, each `c·(-ln q[k])` term contributes
//! `c·(q - e_k)` to the gradient with respect to `z`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("invalid loss configuration: {0}")]
    InvalidConfig(String),
    #[error("sentence {sentence}: {message}")]
    Shape { sentence: usize, message: String },
    #[error("sentence {sentence}, position {position}: distribution sums to {sum}")]
    NotNormalized {
        sentence: usize,
        position: usize,
        sum: f64,
    },
    #[error("sentence {sentence}, position {position}: token id {id} >= vocabulary size {vocab}")]
    IdOutOfRange {
        sentence: usize,
        position: usize,
        id: usize,
        vocab: usize,
    },
    #[error("sentence {0}: gradient requires logits")]
    MissingLogits(usize),
    #[error("golden vectors: {0}")]
    Golden(String),
}

/// Which target positions the copy penalty applies to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndicatorMode {
    /// Every position where an aligned source token exists.
    #[default]
    SourcePosition,
    /// Only positions where the reference token equals the aligned source token.
    EqualToken,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingMode {
    /// `(ε/|D|)·Σ_v -ln q[v]`.
    #[default]
    AsWritten,
    /// `ε·KL(uniform ‖ q)`; differs from `AsWritten` by `ε·ln|D|` per position.
    KlUniform,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    #[default]
    Sum,
    /// Divide by the number of target positions in the batch.
    TokenMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossConfig {
    pub vocab_size: usize,
    pub epsilon: f64,
    pub w: f64,
    pub indicator_mode: IndicatorMode,
    pub smoothing_mode: SmoothingMode,
    pub exclude_anchor_positions: bool,
    pub reduction: Reduction,
    /// Probabilities below this are clamped before taking the log.
    pub log_floor: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            vocab_size: 16,
            epsilon: 0.1,
            w: 0.3,
            indicator_mode: IndicatorMode::SourcePosition,
            smoothing_mode: SmoothingMode::AsWritten,
            exclude_anchor_positions: false,
            reduction: Reduction::Sum,
            log_floor: 1e-12,
        }
    }
}

impl LossConfig {
    pub fn new(vocab_size: usize) -> Self {
        Self {
            vocab_size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LossError> {
        let bad = |m: String| Err(LossError::InvalidConfig(m));
        if self.vocab_size == 0 {
            return bad("vocab_size must be positive".into());
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must be in [0, 1), got {}", self.epsilon));
        }
        if !(self.w >= 0.0 && self.w.is_finite()) {
            return bad(format!("w must be finite and >= 0, got {}", self.w));
        }
        if !(self.log_floor > 0.0 && self.log_floor < 1.0) {
            return bad(format!(
                "log_floor must be in (0, 1), got {}",
                self.log_floor
            ));
        }
        Ok(())
    }
}

/// One target sentence of a batch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossSentence {
    /// `J × |D|` predicted distributions.
    pub q: Vec<Vec<f64>>,
    /// `J × |D|` logits with `q = softmax(logits)`; needed for gradients.
    pub logits: Option<Vec<Vec<f64>>>,
    pub ref_ids: Vec<usize>,
    /// Source token aligned with each target position; `None` past the source end.
    pub src_ids: Vec<Option<usize>>,
    /// Copy-penalty indicator per position.
    pub src_match: Vec<bool>,
    /// Positions inside anchors; empty means none.
    pub anchor_mask: Vec<bool>,
}

impl LossSentence {
    /// Builds a sentence from logits, aligning `source` position-by-position with the target.
    pub fn from_logits(logits: Vec<Vec<f64>>, ref_ids: Vec<usize>, source: &[usize]) -> Self {
        let q = logits.iter().map(|z| softmax(z)).collect();
        let mut s = Self::from_probs(q, ref_ids, source);
        s.logits = Some(logits);
        s
    }

    pub fn from_probs(q: Vec<Vec<f64>>, ref_ids: Vec<usize>, source: &[usize]) -> Self {
        let j = ref_ids.len();
        let src_ids: Vec<Option<usize>> = (0..j).map(|p| source.get(p).copied()).collect();
        let src_match = src_ids.iter().map(Option::is_some).collect();
        Self {
            q,
            logits: None,
            ref_ids,
            src_ids,
            src_match,
            anchor_mask: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.ref_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ref_ids.is_empty()
    }

    /// Source id penalized at `position`, if the indicator is on there.
    fn penalized(&self, position: usize, cfg: &LossConfig) -> Option<usize> {
        if !self.src_match[position] {
            return None;
        }
        if cfg.exclude_anchor_positions && self.anchor_mask.get(position).copied().unwrap_or(false)
        {
            return None;
        }
        let s = self.src_ids[position]?;
        match cfg.indicator_mode {
            IndicatorMode::SourcePosition => Some(s),
            IndicatorMode::EqualToken => (s == self.ref_ids[position]).then_some(s),
        }
    }

    fn validate(&self, index: usize, cfg: &LossConfig) -> Result<(), LossError> {
        let shape = |message: String| LossError::Shape {
            sentence: index,
            message,
        };
        let j = self.ref_ids.len();
        let v = cfg.vocab_size;
        if self.q.len() != j || self.src_ids.len() != j || self.src_match.len() != j {
            return Err(shape(format!(
                "lengths disagree: q={}, ref_ids={j}, src_ids={}, src_match={}",
                self.q.len(),
                self.src_ids.len(),
                self.src_match.len()
            )));
        }
        if !self.anchor_mask.is_empty() && self.anchor_mask.len() != j {
            return Err(shape(format!(
                "anchor_mask has {} entries, expected {j}",
                self.anchor_mask.len()
            )));
        }
        if let Some(logits) = &self.logits {
            if logits.len() != j
                || logits
                    .iter()
                    .any(|r| r.len() != v || r.iter().any(|x| !x.is_finite()))
            {
                return Err(shape("logits must be finite J x |D|".into()));
            }
        }
        for (p, row) in self.q.iter().enumerate() {
            if row.len() != v {
                return Err(shape(format!(
                    "q row {p} has {} entries, expected {v}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(shape(format!(
                    "q row {p} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(LossError::NotNormalized {
                    sentence: index,
                    position: p,
                    sum,
                });
            }
            let check = |id: usize| {
                if id >= v {
                    Err(LossError::IdOutOfRange {
                        sentence: index,
                        position: p,
                        id,
                        vocab: v,
                    })
                } else {
                    Ok(())
                }
            };
            check(self.ref_ids[p])?;
            if let Some(s) = self.src_ids[p] {
                check(s)?;
            } else if self.src_match[p] {
                return Err(shape(format!(
                    "src_match set at position {p} without a source id"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossBatch {
    pub sentences: Vec<LossSentence>,
}

impl LossBatch {
    pub fn new(sentences: Vec<LossSentence>) -> Self {
        Self { sentences }
    }

    pub fn positions(&self) -> usize {
        self.sentences.iter().map(LossSentence::len).sum()
    }

    pub fn validate(&self, cfg: &LossConfig) -> Result<(), LossError> {
        cfg.validate()?;
        for (i, s) in self.sentences.iter().enumerate() {
            s.validate(i, cfg)?;
        }
        Ok(())
    }
}

/// Loss terms in nats. `total = ce_term + smoothing_term + diversity_term`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub ce_term: f64,
    pub smoothing_term: f64,
    /// `Σ -ln q[s]` over indicated positions, before weighting.
    pub diversity_nll: f64,
    /// `-w · diversity_nll`.
    pub diversity_term: f64,
    pub total: f64,
    pub positions: usize,
    /// Number of probabilities raised to `log_floor`.
    pub clamped: usize,
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = z.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

fn neg_log(p: f64, floor: f64, clamped: &mut usize) -> f64 {
    if p < floor {
        *clamped += 1;
        -floor.ln()
    } else {
        -p.ln()
    }
}

#[derive(Default)]
struct Sums {
    ce: f64,
    smoothing: f64,
    diversity: f64,
    clamped: usize,
}

fn sentence_sums(s: &LossSentence, q_rows: &[Vec<f64>], cfg: &LossConfig) -> Sums {
    let mut out = Sums::default();
    let d = cfg.vocab_size as f64;
    let offset = match cfg.smoothing_mode {
        SmoothingMode::AsWritten => 0.0,
        SmoothingMode::KlUniform => cfg.epsilon * d.ln(),
    };
    for (j, q) in q_rows.iter().enumerate() {
        out.ce += (1.0 - cfg.epsilon) * neg_log(q[s.ref_ids[j]], cfg.log_floor, &mut out.clamped);
        let mut all = 0.0;
        for &p in q {
            all += neg_log(p, cfg.log_floor, &mut out.clamped);
        }
        out.smoothing += cfg.epsilon / d * all - offset;
        if let Some(src) = s.penalized(j, cfg) {
            out.diversity += neg_log(q[src], cfg.log_floor, &mut out.clamped);
        }
    }
    out
}

fn finish(sums: Sums, positions: usize, cfg: &LossConfig) -> LossBreakdown {
    let scale = match cfg.reduction {
        Reduction::Sum => 1.0,
        Reduction::TokenMean if positions > 0 => 1.0 / positions as f64,
        Reduction::TokenMean => 0.0,
    };
    let ce_term = sums.ce * scale;
    let smoothing_term = sums.smoothing * scale;
    let diversity_nll = sums.diversity * scale;
    let diversity_term = -cfg.w * diversity_nll;
    LossBreakdown {
        ce_term,
        smoothing_term,
        diversity_nll,
        diversity_term,
        total: ce_term + smoothing_term + diversity_term,
        positions,
        clamped: sums.clamped,
    }
}

fn forward_rows<'a>(
    batch: &'a LossBatch,
    rows: impl Fn(&'a LossSentence) -> &'a [Vec<f64>],
    cfg: &LossConfig,
) -> LossBreakdown {
    // Sentence subtotals are added in batch order, so a batch sums exactly
    // like the concatenation of its singleton batches.
    let mut total = Sums::default();
    for s in &batch.sentences {
        let part = sentence_sums(s, rows(s), cfg);
        total.ce += part.ce;
        total.smoothing += part.smoothing;
        total.diversity += part.diversity;
        total.clamped += part.clamped;
    }
    finish(total, batch.positions(), cfg)
}

/// Evaluates the loss on the batch's `q` distributions.
pub fn loss_forward(batch: &LossBatch, cfg: &LossConfig) -> Result<LossBreakdown, LossError> {
    batch.validate(cfg)?;
    Ok(forward_rows(batch, |s| &s.q, cfg))
}

/// Loss value and logit gradients for a batch whose sentences carry logits.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradients {
    /// Forward pass evaluated on `softmax(logits)`.
    pub breakdown: LossBreakdown,
    /// `grads[i][j][v] = ∂total/∂logits[i][j][v]`.
    pub grads: Vec<Vec<Vec<f64>>>,
}

/// Analytic gradient of the loss with respect to the logits.
///
/// Terms whose probability was clamped contribute no gradient.
pub fn loss_grad_logits(batch: &LossBatch, cfg: &LossConfig) -> Result<LossGradients, LossError> {
    batch.validate(cfg)?;
    let mut probs = Vec::with_capacity(batch.sentences.len());
    for (i, s) in batch.sentences.iter().enumerate() {
        let logits = s.logits.as_ref().ok_or(LossError::MissingLogits(i))?;
        probs.push(logits.iter().map(|z| softmax(z)).collect::<Vec<_>>());
    }
    let breakdown = {
        let with_q = LossBatch::new(
            batch
                .sentences
                .iter()
                .zip(&probs)
                .map(|(s, q)| LossSentence {
                    q: q.clone(),
                    ..s.clone()
                })
                .collect(),
        );
        forward_rows(&with_q, |s| &s.q, cfg)
    };
    let n = batch.positions();
    let scale = match cfg.reduction {
        Reduction::Sum => 1.0,
        Reduction::TokenMean if n > 0 => 1.0 / n as f64,
        Reduction::TokenMean => 0.0,
    };
    let d = cfg.vocab_size as f64;
    let floor = cfg.log_floor;
    let mut grads = Vec::with_capacity(batch.sentences.len());
    for (s, rows) in batch.sentences.iter().zip(&probs) {
        let mut sentence_grads = Vec::with_capacity(rows.len());
        for (j, q) in rows.iter().enumerate() {
            let mut g = vec![0.0; q.len()];
            let mut mass = 0.0;
            let mut term = |c: f64, k: usize, g: &mut Vec<f64>| {
                if q[k] >= floor {
                    mass += c;
                    g[k] -= c;
                }
            };
            term(1.0 - cfg.epsilon, s.ref_ids[j], &mut g);
            for v in 0..q.len() {
                term(cfg.epsilon / d, v, &mut g);
            }
            if let Some(src) = s.penalized(j, cfg) {
                term(-cfg.w, src, &mut g);
            }
            for (gv, qv) in g.iter_mut().zip(q) {
                *gv = (*gv + mass * qv) * scale;
            }
            sentence_grads.push(g);
        }
        grads.push(sentence_grads);
    }
    Ok(LossGradients { breakdown, grads })
}

/// Writes an f64 with 17 significant digits.
fn sig17<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format!("{x:.16e}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(ser)
}

struct Sig17Row<'a>(&'a [f64]);

impl Serialize for Sig17Row<'_> {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.0.len()))?;
        for x in self.0 {
            seq.serialize_element(&Sig17(*x))?;
        }
        seq.end()
    }
}

struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        sig17(&self.0, ser)
    }
}

fn sig17_matrix<S: Serializer>(rows: &[Vec<f64>], ser: S) -> Result<S::Ok, S::Error> {
    let mut seq = ser.serialize_seq(Some(rows.len()))?;
    for r in rows {
        seq.serialize_element(&Sig17Row(r))?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenBreakdown {
    #[serde(serialize_with = "sig17")]
    pub ce_term: f64,
    #[serde(serialize_with = "sig17")]
    pub smoothing_term: f64,
    #[serde(serialize_with = "sig17")]
    pub diversity_term: f64,
}

/// One batch in `golden_vectors.json`. Per-position arrays are concatenated
/// across the batch's sentences; `lengths` gives each sentence's span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenCase {
    /// Diversity weight for this case; overrides the file-level config.
    #[serde(serialize_with = "sig17")]
    pub w: f64,
    pub lengths: Vec<usize>,
    #[serde(serialize_with = "sig17_matrix")]
    pub q: Vec<Vec<f64>>,
    #[serde(serialize_with = "sig17_matrix")]
    pub logits: Vec<Vec<f64>>,
    pub ref_ids: Vec<usize>,
    pub src_ids: Vec<Option<usize>>,
    pub src_match: Vec<u8>,
    #[serde(serialize_with = "sig17")]
    pub total: f64,
    pub breakdown: GoldenBreakdown,
    #[serde(serialize_with = "sig17_matrix")]
    pub grad: Vec<Vec<f64>>,
}

impl GoldenCase {
    /// Rebuilds the batch described by this case.
    pub fn batch(&self) -> Result<LossBatch, LossError> {
        let n = self.ref_ids.len();
        let total: usize = self.lengths.iter().sum();
        if total != n
            || self.q.len() != n
            || self.logits.len() != n
            || self.src_ids.len() != n
            || self.src_match.len() != n
            || self.grad.len() != n
        {
            return Err(LossError::Golden(
                "per-position arrays disagree with lengths".into(),
            ));
        }
        let mut sentences = Vec::with_capacity(self.lengths.len());
        let mut at = 0;
        for &len in &self.lengths {
            let r = at..at + len;
            sentences.push(LossSentence {
                q: self.q[r.clone()].to_vec(),
                logits: Some(self.logits[r.clone()].to_vec()),
                ref_ids: self.ref_ids[r.clone()].to_vec(),
                src_ids: self.src_ids[r.clone()].to_vec(),
                src_match: self.src_match[r.clone()].iter().map(|m| *m != 0).collect(),
                anchor_mask: Vec::new(),
            });
            at += len;
        }
        Ok(LossBatch::new(sentences))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub config: LossConfig,
    pub cases: Vec<GoldenCase>,
}

impl GoldenFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("golden file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, LossError> {
        serde_json::from_str(text).map_err(|e| LossError::Golden(e.to_string()))
    }
}

fn random_sentence(rng: &mut ChaCha8Rng, vocab: usize) -> LossSentence {
    let j = rng.random_range(1..=6);
    let src_len = rng.random_range(0..=j + 2);
    let ref_ids: Vec<usize> = (0..j).map(|_| rng.random_range(0..vocab)).collect();
    let source: Vec<usize> = (0..src_len)
        .map(|p| {
            // Copy the reference token sometimes so equal-token positions occur.
            if p < j && rng.random_bool(0.3) {
                ref_ids[p]
            } else {
                rng.random_range(0..vocab)
            }
        })
        .collect();
    let logits = (0..j)
        .map(|_| (0..vocab).map(|_| rng.random_range(-4.0..4.0)).collect())
        .collect();
    LossSentence::from_logits(logits, ref_ids, &source)
}

fn golden_case(batch: &LossBatch, cfg: &LossConfig) -> Result<GoldenCase, LossError> {
    let g = loss_grad_logits(batch, cfg)?;
    let flat = |f: fn(&LossSentence) -> Vec<Vec<f64>>| batch.sentences.iter().flat_map(f).collect();
    Ok(GoldenCase {
        w: cfg.w,
        lengths: batch.sentences.iter().map(LossSentence::len).collect(),
        q: flat(|s| s.q.clone()),
        logits: flat(|s| s.logits.clone().unwrap_or_default()),
        ref_ids: batch
            .sentences
            .iter()
            .flat_map(|s| s.ref_ids.clone())
            .collect(),
        src_ids: batch
            .sentences
            .iter()
            .flat_map(|s| s.src_ids.clone())
            .collect(),
        src_match: batch
            .sentences
            .iter()
            .flat_map(|s| s.src_match.iter().map(|m| u8::from(*m)))
            .collect(),
        total: g.breakdown.total,
        breakdown: GoldenBreakdown {
            ce_term: g.breakdown.ce_term,
            smoothing_term: g.breakdown.smoothing_term,
            diversity_term: g.breakdown.diversity_term,
        },
        grad: g.grads.into_iter().flatten().collect(),
    })
}

/// Generates a w = 0 sentinel case followed by `count` random batches.
pub fn emit_golden_vectors(
    seed: u64,
    count: usize,
    cfg: &LossConfig,
) -> Result<GoldenFile, LossError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let b = rng.random_range(1..=3);
        let batch = LossBatch::new(
            (0..b)
                .map(|_| random_sentence(&mut rng, cfg.vocab_size))
                .collect(),
        );
        let case_cfg = LossConfig {
            w: if k == 0 { 0.0 } else { cfg.w },
            ..cfg.clone()
        };
        cases.push(golden_case(&batch, &case_cfg)?);
    }
    Ok(GoldenFile {
        config: cfg.clone(),
        cases,
    })
}

/// Result of re-evaluating a golden file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenCheck {
    pub cases: usize,
    pub max_total_error: f64,
    pub max_grad_error: f64,
    pub failed_cases: Vec<usize>,
}

impl GoldenCheck {
    pub fn passed(&self) -> bool {
        self.failed_cases.is_empty()
    }
}

pub const GOLDEN_TOTAL_TOLERANCE: f64 = 1e-6;
pub const GOLDEN_GRAD_TOLERANCE: f64 = 1e-5;

fn scaled_error(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(1.0)
}

/// Recomputes every case and compares totals (1e-6) and gradients (1e-5),
/// relative to `max(1, |expected|)`.
pub fn check_golden(file: &GoldenFile) -> Result<GoldenCheck, LossError> {
    let mut check = GoldenCheck {
        cases: file.cases.len(),
        max_total_error: 0.0,
        max_grad_error: 0.0,
        failed_cases: Vec::new(),
    };
    for (k, case) in file.cases.iter().enumerate() {
        let cfg = LossConfig {
            w: case.w,
            ..file.config.clone()
        };
        let got = loss_grad_logits(&case.batch()?, &cfg)?;
        let total_err = scaled_error(got.breakdown.total, case.total)
            .max(scaled_error(got.breakdown.ce_term, case.breakdown.ce_term))
            .max(scaled_error(
                got.breakdown.smoothing_term,
                case.breakdown.smoothing_term,
            ))
            .max(scaled_error(
                got.breakdown.diversity_term,
                case.breakdown.diversity_term,
            ));
        let mut grad_err: f64 = 0.0;
        for (row, expected) in got.grads.iter().flatten().zip(&case.grad) {
            if row.len() != expected.len() {
                return Err(LossError::Golden(format!(
                    "case {k}: gradient row width mismatch"
                )));
            }
            for (a, e) in row.iter().zip(expected) {
                grad_err = grad_err.max(scaled_error(*a, *e));
            }
        }
        check.max_total_error = check.max_total_error.max(total_err);
        check.max_grad_error = check.max_grad_error.max(grad_err);
        if !(total_err <= GOLDEN_TOTAL_TOLERANCE && grad_err <= GOLDEN_GRAD_TOLERANCE) {
            check.failed_cases.push(k);
        }
    }
    Ok(check)
}
