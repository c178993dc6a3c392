//! The stages behind the `paratag` binary: ingest, tag, prepare, eval and
//! loss-kernel utilities. Each stage is a plain function over in-memory data
//! so that piped and file-based runs produce the same bytes.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::corpus::{
    emit_training_pairs, make_pairs, read_clusters, read_pairs, read_tagged_pairs, split_records,
    write_jsonl, DatasetManifest, EmitReport, ParaphrasePair, TaggedPairRecord, TaggerOutput,
};
use crate::error::{Error, Result};
use crate::eval::{evaluate, read_eval_records, EvalReport};
use crate::losskernel::{check_golden, emit_golden_vectors, GoldenCheck, GoldenFile};
use crate::taggers::{
    build_common_ngram_set_by_document, oracle_anchors, tag_concurrently, AnchorCandidate,
    Gazetteer, PassThroughAutoTagger, ServiceBackend, TaggerError, TaggerKind, TaggerReport,
    TokenTagger,
};
use crate::textcore::{tokenize, LanguageProfile, TokenizedSentence};

/// Input shape accepted by [`ingest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Clusters,
    Pairs,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ingested {
    /// Canonical pairs, sorted by id.
    pub pairs: Vec<ParaphrasePair>,
    /// Degenerate clusters that yielded no pair.
    pub skipped: Vec<String>,
}

/// Reads clusters or pairs and returns canonical pairs.
pub fn ingest(
    reader: impl BufRead,
    origin: &str,
    kind: DatasetKind,
    cfg: &PipelineConfig,
) -> Result<Ingested> {
    let lang = cfg.lang.as_deref();
    match kind {
        DatasetKind::Clusters => {
            let clusters = read_clusters(reader, origin, lang)?;
            let made = make_pairs(&clusters, cfg.seed);
            Ok(Ingested {
                pairs: made.pairs,
                skipped: made.skipped,
            })
        }
        DatasetKind::Pairs => Ok(Ingested {
            pairs: read_pairs(reader, origin, lang)?,
            skipped: Vec::new(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tagged {
    pub records: Vec<TaggedPairRecord>,
    pub report: TaggerReport,
    pub emit: EmitReport,
}

/// Runs the configured tagger over every pair and emits tagged training records.
///
/// Pairs the tagger refuses are emitted untagged and counted in the report.
/// Backend failures abort the run.
pub fn tag(pairs: &[ParaphrasePair], cfg: &PipelineConfig) -> Result<Tagged> {
    let profiles = cfg.profiles()?;
    let mut report = TaggerReport::new(cfg.tagger);
    let mut output = TaggerOutput::new();

    let outcomes: Vec<std::result::Result<Vec<AnchorCandidate>, TaggerError>> = match cfg.tagger {
        TaggerKind::None => pairs.iter().map(|_| Ok(Vec::new())).collect(),
        TaggerKind::Oracle => oracle_outcomes(pairs, cfg)?,
        TaggerKind::Ner | TaggerKind::Auto => {
            let backend = span_backend(cfg)?;
            let inputs: Vec<(TokenizedSentence, String)> = pairs
                .iter()
                .map(|p| (tokenize(&p.source, &profiles.get(&p.lang)), p.lang.clone()))
                .collect();
            tag_concurrently(backend.as_ref(), &inputs, cfg.ner.max_in_flight)
                .into_iter()
                .zip(&inputs)
                .map(|(r, (sentence, _))| r.map(|spans| span_candidates(sentence, spans)))
                .collect()
        }
    };

    let mut insufficient = 0;
    for (pair, outcome) in pairs.iter().zip(outcomes) {
        match outcome {
            Ok(anchors) => {
                report.record_tagged(&anchors);
                output.insert(
                    pair.id.clone(),
                    anchors.into_iter().map(|a| a.tokens).collect(),
                );
            }
            Err(e @ (TaggerError::BackendUnavailable { .. } | TaggerError::Protocol(_))) => {
                return Err(e.into())
            }
            Err(e) => {
                if matches!(e, TaggerError::InsufficientReferences { .. }) {
                    insufficient += 1;
                }
                report.record_rejected(&e);
            }
        }
    }
    if cfg.tagger == TaggerKind::Oracle && !pairs.is_empty() && insufficient == pairs.len() {
        return Err(Error::Validation(format!(
            "the oracle tagger needs at least {} references per pair; no pair in this dataset has that many",
            cfg.oracle.min_ref_support.max(2)
        )));
    }
    let (records, emit) =
        emit_training_pairs(pairs, &output, &profiles, &cfg.markers, cfg.pair_expansion);
    Ok(Tagged {
        records,
        report,
        emit,
    })
}

fn oracle_outcomes(
    pairs: &[ParaphrasePair],
    cfg: &PipelineConfig,
) -> Result<Vec<std::result::Result<Vec<AnchorCandidate>, TaggerError>>> {
    let profiles = cfg.profiles()?;
    let tokenized: Vec<(TokenizedSentence, Vec<TokenizedSentence>)> = pairs
        .iter()
        .map(|p| {
            let profile = profiles.get(&p.lang);
            let refs = p.references.iter().map(|r| tokenize(r, &profile)).collect();
            (tokenize(&p.source, &profile), refs)
        })
        .collect();

    // Common n-grams are counted per language, one document per pair.
    let mut by_lang: BTreeMap<&str, Vec<Vec<Vec<String>>>> = BTreeMap::new();
    for (p, (src, refs)) in pairs.iter().zip(&tokenized) {
        let doc = std::iter::once(src)
            .chain(refs)
            .map(|s| s.tokens.iter().map(|t| t.norm.clone()).collect())
            .collect();
        by_lang.entry(p.lang.as_str()).or_default().push(doc);
    }
    let common: BTreeMap<&str, _> = by_lang
        .into_iter()
        .map(|(lang, docs)| {
            let set = build_common_ngram_set_by_document(
                &docs,
                cfg.oracle.common_ngram_max_n,
                cfg.oracle.common_ngram_quantile,
            );
            (lang, set)
        })
        .collect();

    Ok(pairs
        .iter()
        .zip(&tokenized)
        .map(|(p, (src, refs))| {
            oracle_anchors(
                src,
                refs,
                &cfg.oracle,
                &common[p.lang.as_str()],
                &profiles.get(&p.lang),
            )
        })
        .collect())
}

fn span_backend(cfg: &PipelineConfig) -> Result<Box<dyn TokenTagger>> {
    let url = match cfg.tagger {
        TaggerKind::Ner => cfg.ner.service_url.as_ref(),
        _ => cfg.auto.service_url.as_ref(),
    };
    if let Some(url) = url {
        return Ok(Box::new(ServiceBackend::new(url.clone())));
    }
    if cfg.tagger == TaggerKind::Auto {
        return Ok(Box::new(PassThroughAutoTagger));
    }
    let path = cfg.ner.gazetteer.as_ref().ok_or_else(|| {
        Error::Config("the ner tagger needs ner.gazetteer or ner.service_url".into())
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let profile = LanguageProfile::for_code(cfg.default_lang())?;
    let profile = match cfg.stopwords.get(profile.code()) {
        Some(p) => profile.with_stopword_file(p)?,
        None => profile,
    };
    Ok(Box::new(Gazetteer::new(
        text.lines().filter(|l| !l.trim().is_empty()),
        &profile,
    )))
}

fn span_candidates(
    sentence: &TokenizedSentence,
    spans: Vec<crate::markup::AnchorSpan>,
) -> Vec<AnchorCandidate> {
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

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub train: Vec<TaggedPairRecord>,
    pub test: Vec<TaggedPairRecord>,
    pub manifest: DatasetManifest,
}

/// Splits tagged records by pair and builds the manifest describing the result.
pub fn prepare(records: &[TaggedPairRecord], cfg: &PipelineConfig) -> Result<Prepared> {
    let (train, test) = split_records(records, cfg.split_fraction, cfg.seed)?;
    let mut manifest = DatasetManifest::new(cfg);
    let with_anchors =
        |rs: &[TaggedPairRecord]| rs.iter().filter(|r| !r.anchors.is_empty()).count();
    manifest.counts.insert("train".into(), train.len());
    manifest.counts.insert("test".into(), test.len());
    manifest
        .counts
        .insert("train_with_anchors".into(), with_anchors(&train));
    manifest
        .counts
        .insert("test_with_anchors".into(), with_anchors(&test));
    Ok(Prepared {
        train,
        test,
        manifest,
    })
}

/// Writes `train.jsonl`, `test.jsonl` and `manifest.json` into `dir`.
pub fn write_prepared(prepared: &Prepared, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, records) in [
        ("train.jsonl", &prepared.train),
        ("test.jsonl", &prepared.test),
    ] {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_jsonl(std::io::BufWriter::new(file), records).map_err(|e| Error::io(&path, e))?;
    }
    prepared.manifest.save(&dir.join("manifest.json"))
}

pub fn read_tagged(reader: impl BufRead, origin: &str) -> Result<Vec<TaggedPairRecord>> {
    read_tagged_pairs(reader, origin)
}

pub fn eval(reader: impl BufRead, origin: &str, cfg: &PipelineConfig) -> Result<EvalReport> {
    let records = read_eval_records(reader, origin)?;
    evaluate(&records, &cfg.eval, &cfg.profiles()?, &cfg.markers)
}

/// Golden vectors for the configured loss, with the vocabulary size overridden when given.
pub fn loss_golden(
    cfg: &PipelineConfig,
    count: usize,
    vocab_size: Option<usize>,
) -> Result<GoldenFile> {
    let mut loss = cfg.loss.clone();
    if let Some(v) = vocab_size {
        loss.vocab_size = v;
    }
    Ok(emit_golden_vectors(cfg.seed, count, &loss)?)
}

pub fn loss_check(text: &str) -> Result<GoldenCheck> {
    let file = GoldenFile::from_json(text)?;
    Ok(check_golden(&file)?)
}
