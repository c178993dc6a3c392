//! Synthetic clusters through ingest, oracle tagging and a seeded split.

use std::error::Error;

use paratag::corpus::write_jsonl;
use paratag::pipeline::{self, DatasetKind};
use paratag::synthetic::synthetic_clusters;
use paratag::taggers::TaggerKind;
use paratag::PipelineConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = PipelineConfig {
        tagger: TaggerKind::Oracle,
        ..PipelineConfig::default()
    };

    let mut clusters = Vec::new();
    write_jsonl(&mut clusters, &synthetic_clusters(cfg.seed, 40))?;
    let ingested = pipeline::ingest(
        clusters.as_slice(),
        "synthetic",
        DatasetKind::Clusters,
        &cfg,
    )?;
    let tagged = pipeline::tag(&ingested.pairs, &cfg)?;
    println!("{}", serde_json::to_string(&tagged.report)?);
    println!("{}", tagged.records[0].source_tagged);
    println!("{}", tagged.records[0].reference_tagged);

    let prepared = pipeline::prepare(&tagged.records, &cfg)?;
    println!(
        "counts {:?}, config {}",
        prepared.manifest.counts,
        &prepared.manifest.config_hash[..12]
    );

    let dir = std::env::temp_dir().join(format!("paratag-example-{}", std::process::id()));
    pipeline::write_prepared(&prepared, &dir)?;
    println!("wrote {}", dir.display());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
