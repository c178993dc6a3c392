//! Paraphrase datasets: JSONL ingestion, seeded source selection, splits,
//! and emission of tagged training pairs.
//!
//! Every output is sorted by id and every random choice is drawn from a
//! stream derived from `(seed, id)`, so results do not depend on input order
//! or on how work is scheduled.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::markup::{insert_anchors, Markers};
use crate::taggers::TaggerKind;
use crate::textcore::{tokenize, ProfileSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphraseCluster {
    pub id: String,
    #[serde(default)]
    pub lang: String,
    pub sentences: Vec<String>,
}

impl ParaphraseCluster {
    /// Single-sentence clusters cannot yield a source/reference pair.
    pub fn is_degenerate(&self) -> bool {
        self.sentences.len() < 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphrasePair {
    pub id: String,
    #[serde(default)]
    pub lang: String,
    pub source: String,
    pub references: Vec<String>,
}

/// One line of `tagged_pairs.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedPairRecord {
    pub id: String,
    pub lang: String,
    pub source_tagged: String,
    pub reference_tagged: String,
    pub anchors: Vec<String>,
}

impl TaggedPairRecord {
    /// Id of the pair the record was expanded from (`<pair id>#<k>`).
    pub fn pair_id(&self) -> &str {
        self.id.rsplit_once('#').map_or(&self.id, |(p, _)| p)
    }
}

fn schema(origin: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Schema {
        origin: origin.to_owned(),
        line,
        message: message.into(),
    }
}

/// Parses JSONL, skipping blank lines. Returns `(line number, record)` pairs.
pub fn read_jsonl<T: DeserializeOwned>(
    reader: impl BufRead,
    origin: &str,
) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec =
            serde_json::from_str(&line).map_err(|e| schema(origin, line_no, e.to_string()))?;
        out.push((line_no, rec));
    }
    Ok(out)
}

/// Writes one compact JSON object per line.
pub fn write_jsonl<T: Serialize>(mut writer: impl Write, records: &[T]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn check_unique<'a>(ids: impl Iterator<Item = (usize, &'a str)>, origin: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for (line, id) in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId {
                origin: origin.to_owned(),
                line,
                id: id.to_owned(),
            });
        }
    }
    Ok(())
}

fn fill_lang(lang: &mut String, default_lang: Option<&str>) {
    if lang.is_empty() {
        if let Some(d) = default_lang {
            *lang = d.to_owned();
        }
    }
}

fn non_empty(s: &str) -> bool {
    !s.trim().is_empty()
}

/// Parses clusters; records without `lang` take `default_lang` when given.
pub fn read_clusters(
    reader: impl BufRead,
    origin: &str,
    default_lang: Option<&str>,
) -> Result<Vec<ParaphraseCluster>> {
    let mut records: Vec<(usize, ParaphraseCluster)> = read_jsonl(reader, origin)?;
    for (line, c) in &mut records {
        fill_lang(&mut c.lang, default_lang);
        if !non_empty(&c.id) || !non_empty(&c.lang) {
            return Err(schema(origin, *line, "id and lang must be non-empty"));
        }
        if c.sentences.is_empty() || !c.sentences.iter().all(|s| non_empty(s)) {
            return Err(schema(
                origin,
                *line,
                "sentences must be a non-empty list of non-empty strings",
            ));
        }
    }
    check_unique(records.iter().map(|(l, c)| (*l, c.id.as_str())), origin)?;
    let mut clusters: Vec<_> = records.into_iter().map(|(_, c)| c).collect();
    clusters.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(clusters)
}

/// Reads `clusters.jsonl`. Degenerate clusters are kept; see [`ParaphraseCluster::is_degenerate`].
pub fn ingest_clusters(path: &Path) -> Result<Vec<ParaphraseCluster>> {
    read_clusters(open(path)?, &path.display().to_string(), None)
}

pub fn read_pairs(
    reader: impl BufRead,
    origin: &str,
    default_lang: Option<&str>,
) -> Result<Vec<ParaphrasePair>> {
    let mut records: Vec<(usize, ParaphrasePair)> = read_jsonl(reader, origin)?;
    for (line, p) in &mut records {
        fill_lang(&mut p.lang, default_lang);
        if !non_empty(&p.id) || !non_empty(&p.lang) || !non_empty(&p.source) {
            return Err(schema(
                origin,
                *line,
                "id, lang and source must be non-empty",
            ));
        }
        if p.references.is_empty() || !p.references.iter().all(|s| non_empty(s)) {
            return Err(schema(
                origin,
                *line,
                "references must be a non-empty list of non-empty strings",
            ));
        }
        if p.id.contains('#') {
            return Err(schema(origin, *line, "ids may not contain '#'"));
        }
    }
    check_unique(records.iter().map(|(l, p)| (*l, p.id.as_str())), origin)?;
    let mut pairs: Vec<_> = records.into_iter().map(|(_, p)| p).collect();
    pairs.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(pairs)
}

/// Reads `pairs.jsonl` (one reference per pair for QQP-style data, or several).
pub fn ingest_pairs(path: &Path) -> Result<Vec<ParaphrasePair>> {
    read_pairs(open(path)?, &path.display().to_string(), None)
}

pub fn read_tagged_pairs(reader: impl BufRead, origin: &str) -> Result<Vec<TaggedPairRecord>> {
    let records: Vec<(usize, TaggedPairRecord)> = read_jsonl(reader, origin)?;
    check_unique(records.iter().map(|(l, r)| (*l, r.id.as_str())), origin)?;
    let mut out: Vec<_> = records.into_iter().map(|(_, r)| r).collect();
    out.sort_by(record_order);
    Ok(out)
}

fn record_order(a: &TaggedPairRecord, b: &TaggedPairRecord) -> std::cmp::Ordering {
    let key = |r: &TaggedPairRecord| {
        let (p, k) = r.id.rsplit_once('#').unwrap_or((&r.id, ""));
        (p.to_owned(), k.parse::<u64>().ok(), k.to_owned())
    };
    key(a).cmp(&key(b))
}

/// A ChaCha stream keyed by a domain label, the run seed and a record id.
pub fn derived_rng(domain: &str, seed: u64, id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(domain.as_bytes());
    h.update([0]);
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MadePairs {
    pub pairs: Vec<ParaphrasePair>,
    /// Ids of degenerate clusters that produced no pair.
    pub skipped: Vec<String>,
}

/// Picks one source per cluster uniformly; the other sentences become references.
pub fn make_pairs(clusters: &[ParaphraseCluster], seed: u64) -> MadePairs {
    let mut out = MadePairs::default();
    for c in clusters {
        if c.is_degenerate() {
            out.skipped.push(c.id.clone());
            continue;
        }
        let mut rng = derived_rng("cluster-source", seed, &c.id);
        let pick = rng.random_range(0..c.sentences.len());
        let references = c
            .sentences
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pick)
            .map(|(_, s)| s.clone())
            .collect();
        out.pairs.push(ParaphrasePair {
            id: c.id.clone(),
            lang: c.lang.clone(),
            source: c.sentences[pick].clone(),
            references,
        });
    }
    out.pairs.sort_by(|a, b| a.id.cmp(&b.id));
    out.skipped.sort();
    out
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "split fraction {fraction} is not in (0, 1)"
        )));
    }
    Ok(())
}

/// Partitions ids by a seeded shuffle; the train side gets `round(fraction * n)`.
pub fn split_ids(
    ids: &[&str],
    fraction: f64,
    seed: u64,
) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    check_fraction(fraction)?;
    let mut sorted: Vec<&str> = ids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rng = derived_rng("split", seed, "");
    sorted.shuffle(&mut rng);
    let n_train = (fraction * sorted.len() as f64).round() as usize;
    let train = sorted[..n_train].iter().map(|s| s.to_string()).collect();
    let test = sorted[n_train..].iter().map(|s| s.to_string()).collect();
    Ok((train, test))
}

/// Splits pairs into `(train, test)`, each sorted by id.
pub fn split(
    pairs: &[ParaphrasePair],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<ParaphrasePair>, Vec<ParaphrasePair>)> {
    let ids: Vec<&str> = pairs.iter().map(|p| p.id.as_str()).collect();
    let (train_ids, _) = split_ids(&ids, fraction, seed)?;
    let (mut train, mut test): (Vec<_>, Vec<_>) = pairs
        .iter()
        .cloned()
        .partition(|p| train_ids.contains(&p.id));
    train.sort_by(|a, b| a.id.cmp(&b.id));
    test.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((train, test))
}

/// Splits tagged records so that all records of one pair land on the same side.
pub fn split_records(
    records: &[TaggedPairRecord],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<TaggedPairRecord>, Vec<TaggedPairRecord>)> {
    let ids: Vec<&str> = records.iter().map(TaggedPairRecord::pair_id).collect();
    let (train_ids, _) = split_ids(&ids, fraction, seed)?;
    let (mut train, mut test): (Vec<_>, Vec<_>) = records
        .iter()
        .cloned()
        .partition(|r| train_ids.contains(r.pair_id()));
    train.sort_by(record_order);
    test.sort_by(record_order);
    Ok((train, test))
}

/// Which references of a pair become training records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairExpansion {
    /// One record per (source, reference) combination.
    #[default]
    AllReferences,
    /// Only the first reference.
    FirstReference,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitReport {
    pub records: usize,
    pub records_with_anchors: usize,
    /// Anchor instances dropped because they were not shared by both sides.
    pub anchors_dropped: usize,
}

/// Normalized anchor token sequences per pair id.
pub type TaggerOutput = BTreeMap<String, Vec<Vec<String>>>;

/// Inserts each pair's anchors into source and reference, keeping only shared anchors.
///
/// The anchors written for a record are exactly the anchor strings that parse
/// back from both tagged sides; when adjacent-span merging would make the two
/// sides disagree, the disagreeing anchors are dropped.
pub fn emit_training_pairs(
    pairs: &[ParaphrasePair],
    tagger_output: &TaggerOutput,
    profiles: &ProfileSet,
    markers: &Markers,
    expansion: PairExpansion,
) -> (Vec<TaggedPairRecord>, EmitReport) {
    let mut records = Vec::new();
    let mut report = EmitReport::default();
    let mut sorted: Vec<&ParaphrasePair> = pairs.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let empty = Vec::new();
    for pair in sorted {
        let profile = profiles.get(&pair.lang);
        let anchors = tagger_output.get(&pair.id).unwrap_or(&empty);
        let mut requested: Vec<&Vec<String>> = Vec::new();
        for a in anchors {
            if !a.is_empty() && !requested.contains(&a) {
                requested.push(a);
            }
        }
        let refs = match expansion {
            PairExpansion::AllReferences => &pair.references[..],
            PairExpansion::FirstReference => &pair.references[..1.min(pair.references.len())],
        };
        let source = tokenize(&pair.source, &profile);
        for (k, reference) in refs.iter().enumerate() {
            let reference = tokenize(reference, &profile);
            let mut active: Vec<Vec<String>> = requested.iter().map(|a| (*a).clone()).collect();
            let (src_tagged, ref_tagged) = loop {
                let (s, _) = insert_anchors(source.clone(), &active, &pair.lang);
                let (r, _) = insert_anchors(reference.clone(), &active, &pair.lang);
                let s_set: BTreeSet<Vec<String>> = s.anchor_tokens().into_iter().collect();
                let r_set: BTreeSet<Vec<String>> = r.anchor_tokens().into_iter().collect();
                if s_set == r_set {
                    break (s, r);
                }
                let kept: Vec<Vec<String>> = active
                    .iter()
                    .filter(|a| s_set.contains(*a) && r_set.contains(*a))
                    .cloned()
                    .collect();
                active = if kept.len() == active.len() {
                    Vec::new()
                } else {
                    kept
                };
            };
            let anchor_set: BTreeSet<String> = src_tagged.anchor_strings().into_iter().collect();
            report.records += 1;
            report.anchors_dropped += requested.len().saturating_sub(
                requested
                    .iter()
                    .filter(|a| src_tagged.anchor_tokens().contains(a))
                    .count(),
            );
            if !anchor_set.is_empty() {
                report.records_with_anchors += 1;
            }
            records.push(TaggedPairRecord {
                id: format!("{}#{}", pair.id, k),
                lang: pair.lang.clone(),
                source_tagged: markers.render(&src_tagged),
                reference_tagged: markers.render(&ref_tagged),
                anchors: anchor_set.into_iter().collect(),
            });
        }
    }
    (records, report)
}

/// Everything needed to replay a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub seed: u64,
    pub split_fraction: f64,
    pub tagger: TaggerKind,
    pub counts: BTreeMap<String, usize>,
    pub config_hash: String,
    pub config: PipelineConfig,
    /// Wall-clock creation time; not covered by `config_hash`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

impl DatasetManifest {
    pub fn new(config: &PipelineConfig) -> Self {
        Self {
            seed: config.seed,
            split_fraction: config.split_fraction,
            tagger: config.tagger,
            counts: BTreeMap::new(),
            config_hash: config.hash(),
            config: config.clone(),
            created_unix: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| schema(&path.display().to_string(), e.line(), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markup::parse_tagged;
    use crate::textcore::LanguageProfile;
    use proptest::prelude::*;

    fn cluster(id: &str, n: usize) -> ParaphraseCluster {
        ParaphraseCluster {
            id: id.into(),
            lang: "en".into(),
            sentences: (0..n).map(|i| format!("sentence {i} of {id}")).collect(),
        }
    }

    #[test]
    fn ingests_caption_cluster() {
        let line = r#"{"id":"img1","lang":"en","sentences":["a","b","c","d","e"]}"#;
        let cs = read_clusters(line.as_bytes(), "mem", None).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].sentences.len(), 5);
        assert!(!cs[0].is_degenerate());
    }

    #[test]
    fn single_sentence_cluster_is_flagged() {
        let line = r#"{"id":"x","lang":"en","sentences":["only one"]}"#;
        let cs = read_clusters(line.as_bytes(), "mem", None).unwrap();
        assert!(cs[0].is_degenerate());
        let made = make_pairs(&cs, 1);
        assert!(made.pairs.is_empty());
        assert_eq!(made.skipped, ["x"]);
    }

    #[test]
    fn schema_error_reports_line() {
        let text = "{\"id\":\"a\",\"lang\":\"en\",\"sentences\":[\"x\",\"y\"]}\n\n{not json\n";
        match read_clusters(text.as_bytes(), "c.jsonl", None) {
            Err(Error::Schema { line, origin, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(origin, "c.jsonl");
            }
            other => panic!("unexpected {other:?}"),
        }
        let missing = r#"{"id":"a","sentences":["x"]}"#;
        assert!(matches!(
            read_clusters(missing.as_bytes(), "m", None),
            Err(Error::Schema { line: 1, .. })
        ));
        let empty = r#"{"id":"a","lang":"en","sentences":[]}"#;
        assert!(matches!(
            read_clusters(empty.as_bytes(), "m", None),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn missing_lang_uses_default() {
        let line = r#"{"id":"a","sentences":["x","y"]}"#;
        let cs = read_clusters(line.as_bytes(), "m", Some("zh")).unwrap();
        assert_eq!(cs[0].lang, "zh");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = "{\"id\":\"a\",\"lang\":\"en\",\"sentences\":[\"x\"]}\n{\"id\":\"a\",\"lang\":\"en\",\"sentences\":[\"y\"]}\n";
        assert!(matches!(
            read_clusters(text.as_bytes(), "m", None),
            Err(Error::DuplicateId { line: 2, .. })
        ));
    }

    #[test]
    fn pairs_from_two_sentence_cluster() {
        let made = make_pairs(&[cluster("c", 2)], 7);
        assert_eq!(made.pairs.len(), 1);
        assert_eq!(made.pairs[0].references.len(), 1);
        assert_ne!(made.pairs[0].source, made.pairs[0].references[0]);
    }

    #[test]
    fn make_pairs_is_order_independent() {
        let cs: Vec<_> = (0..20).map(|i| cluster(&format!("c{i}"), 5)).collect();
        let mut rev = cs.clone();
        rev.reverse();
        assert_eq!(make_pairs(&cs, 13), make_pairs(&rev, 13));
        let other = make_pairs(&cs, 14);
        assert!(other.pairs.iter().all(|p| p.references.len() == 4));
        assert_ne!(
            make_pairs(&cs, 13),
            other,
            "20 clusters should not all pick the same source"
        );
    }

    fn pairs(n: usize) -> Vec<ParaphrasePair> {
        (0..n)
            .map(|i| ParaphrasePair {
                id: format!("p{i:03}"),
                lang: "en".into(),
                source: "s".into(),
                references: vec!["r".into()],
            })
            .collect()
    }

    #[test]
    fn split_sizes() {
        let (train, test) = split(&pairs(10), 0.8, 13).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let (train, test) = split(&pairs(1), 0.8, 13).unwrap();
        assert_eq!((train.len(), test.len()), (1, 0));
        assert_eq!(
            split(&pairs(10), 0.8, 13).unwrap(),
            split(&pairs(10), 0.8, 13).unwrap()
        );
        assert!(split(&pairs(3), 1.0, 1).is_err());
        assert!(split(&pairs(3), 0.0, 1).is_err());
    }

    #[test]
    fn split_records_keeps_pairs_together() {
        let records: Vec<TaggedPairRecord> = (0..30)
            .flat_map(|p| {
                (0..3).map(move |k| TaggedPairRecord {
                    id: format!("p{p}#{k}"),
                    lang: "en".into(),
                    source_tagged: String::new(),
                    reference_tagged: String::new(),
                    anchors: vec![],
                })
            })
            .collect();
        let (train, test) = split_records(&records, 0.8, 5).unwrap();
        assert_eq!(train.len(), 72);
        let train_pairs: BTreeSet<_> = train.iter().map(|r| r.pair_id()).collect();
        assert!(test.iter().all(|r| !train_pairs.contains(r.pair_id())));
    }

    fn beijing_pair() -> ParaphrasePair {
        ParaphrasePair {
            id: "q1".into(),
            lang: "en".into(),
            source: "What are cheap lodging options in Beijing?".into(),
            references: vec![
                "I'm looking for cheap hotels in Beijing?".into(),
                "Cheap hotels in New York?".into(),
            ],
        }
    }

    #[test]
    fn emits_shared_anchors() {
        let out: TaggerOutput = [("q1".to_string(), vec![vec!["beijing".to_string()]])].into();
        let (records, report) = emit_training_pairs(
            &[beijing_pair()],
            &out,
            &ProfileSet::default(),
            &Markers::default(),
            PairExpansion::AllReferences,
        );
        assert_eq!(records.len(), 2);
        assert_eq!(
            records[0].source_tagged,
            "What are cheap lodging options in <tag> Beijing </tag> ?"
        );
        assert_eq!(
            records[0].reference_tagged,
            "I'm looking for cheap hotels in <tag> Beijing </tag> ?"
        );
        assert_eq!(records[0].anchors, ["beijing"]);
        assert!(records[1].anchors.is_empty());
        assert!(!records[1].source_tagged.contains("<tag>"));
        assert_eq!(report.anchors_dropped, 1);
        assert_eq!(report.records_with_anchors, 1);
    }

    #[test]
    fn no_anchors_gives_plain_pairs() {
        let (records, report) = emit_training_pairs(
            &[beijing_pair()],
            &TaggerOutput::new(),
            &ProfileSet::default(),
            &Markers::default(),
            PairExpansion::FirstReference,
        );
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].id, "q1#0");
        assert!(records[0].anchors.is_empty());
        assert_eq!(report.anchors_dropped, 0);
    }

    #[test]
    fn adjacency_disagreement_is_resolved() {
        // "red bicycle" and "beijing" touch in the source but not in the reference.
        let pair = ParaphrasePair {
            id: "p".into(),
            lang: "en".into(),
            source: "red bicycle beijing".into(),
            references: vec!["a red bicycle in beijing".into()],
        };
        let out: TaggerOutput = [(
            "p".to_string(),
            vec![vec!["red".into(), "bicycle".into()], vec!["beijing".into()]],
        )]
        .into();
        let (records, _) = emit_training_pairs(
            &[pair],
            &out,
            &ProfileSet::default(),
            &Markers::default(),
            PairExpansion::AllReferences,
        );
        let en = LanguageProfile::english();
        let s = parse_tagged(&records[0].source_tagged, &en).unwrap();
        let r = parse_tagged(&records[0].reference_tagged, &en).unwrap();
        let mut sa = s.anchor_strings();
        let mut ra = r.anchor_strings();
        sa.sort();
        ra.sort();
        assert_eq!(sa, ra);
        assert_eq!(sa, records[0].anchors);
    }

    #[test]
    fn manifest_round_trips() {
        let cfg = PipelineConfig::default();
        let mut m = DatasetManifest::new(&cfg);
        m.counts.insert("train".into(), 8);
        m.created_unix = Some(1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        m.save(&path).unwrap();
        assert_eq!(DatasetManifest::load(&path).unwrap(), m);
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 0usize..60, fraction in 0.01f64..0.99, seed in any::<u64>()) {
            let ps = pairs(n);
            let (train, test) = split(&ps, fraction, seed).unwrap();
            prop_assert_eq!(train.len(), (fraction * n as f64).round() as usize);
            prop_assert_eq!(train.len() + test.len(), n);
            let train_ids: BTreeSet<_> = train.iter().map(|p| &p.id).collect();
            prop_assert!(test.iter().all(|p| !train_ids.contains(&p.id)));
        }

        #[test]
        fn emitted_records_parse_with_shared_anchors(
            src in proptest::collection::vec(0u8..5, 1..10),
            reference in proptest::collection::vec(0u8..5, 1..10),
            anchors in proptest::collection::vec(proptest::collection::vec(0u8..5, 1..3), 0..4),
        ) {
            let words = |v: &[u8]| v.iter().map(|b| format!("w{b}")).collect::<Vec<_>>();
            let pair = ParaphrasePair {
                id: "p".into(),
                lang: "en".into(),
                source: words(&src).join(" "),
                references: vec![words(&reference).join(" ")],
            };
            let out: TaggerOutput = [("p".to_string(), anchors.iter().map(|a| words(a)).collect())].into();
            let (records, _) = emit_training_pairs(
                &[pair], &out, &ProfileSet::default(), &Markers::default(), PairExpansion::AllReferences,
            );
            let en = LanguageProfile::english();
            let s = parse_tagged(&records[0].source_tagged, &en).unwrap();
            let r = parse_tagged(&records[0].reference_tagged, &en).unwrap();
            let sa: BTreeSet<_> = s.anchor_strings().into_iter().collect();
            let ra: BTreeSet<_> = r.anchor_strings().into_iter().collect();
            prop_assert_eq!(&sa, &ra);
            prop_assert_eq!(sa.into_iter().collect::<Vec<_>>(), records[0].anchors.clone());
        }
    }
}
