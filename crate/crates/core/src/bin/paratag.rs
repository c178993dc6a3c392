use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use paratag::corpus::write_jsonl;
use paratag::eval::Aggregation;
use paratag::pipeline::{self, DatasetKind};
use paratag::synthetic::synthetic_clusters;
use paratag::{Error, PipelineConfig, Result};

#[derive(Parser)]
#[command(
    name = "paratag",
    version,
    about = "Tagged paraphrase data, loss kernel and evaluation"
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// none, oracle, ner or auto.
    #[arg(long, global = true)]
    tagger: Option<String>,
    /// Train share of the split.
    #[arg(long, global = true)]
    split: Option<f64>,
    /// Default language code.
    #[arg(long, global = true)]
    lang: Option<String>,
    /// ROUGE order.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    min_ref_support: Option<usize>,
    #[arg(long, global = true)]
    max_coverage: Option<f64>,
    #[arg(long, global = true)]
    w: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// source-position or equal-token.
    #[arg(long, global = true)]
    indicator_mode: Option<String>,
    #[arg(long, global = true)]
    exclude_anchor_positions: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Read clusters or pairs and write canonical pairs JSONL.
    Ingest {
        /// Input file, or - for stdin.
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tag pairs and write tagged_pairs JSONL.
    Tag {
        #[arg(default_value = "-")]
        input: PathBuf,
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        #[arg(long)]
        service_url: Option<String>,
        /// Where to write the tagger report; stderr by default.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split tagged pairs into train.jsonl, test.jsonl and manifest.json.
    Prepare {
        #[arg(default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Score eval_input JSONL.
    Eval {
        #[arg(default_value = "-")]
        input: PathBuf,
        #[arg(long, value_enum)]
        aggregation: Option<Agg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Loss-kernel golden vectors.
    #[command(subcommand)]
    Loss(LossCommand),
    /// Write templated synthetic clusters.
    Synth {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LossCommand {
    Golden {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        vocab_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Check {
        #[arg(long)]
        golden: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Clusters,
    Pairs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Agg {
    Max,
    Mean,
}

fn parse_enum<T: DeserializeOwned>(flag: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_owned()))
        .map_err(|_| Error::Config(format!("--{flag}: unknown value {value:?}")))
}

fn resolve_config(o: &Overrides) -> Result<PipelineConfig> {
    let mut cfg = match &o.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = &o.tagger {
        cfg.tagger = parse_enum("tagger", v)?;
    }
    if let Some(v) = o.split {
        cfg.split_fraction = v;
    }
    if let Some(v) = &o.lang {
        cfg.lang = Some(v.clone());
    }
    if let Some(v) = o.n {
        cfg.eval.n = v;
    }
    if let Some(v) = o.min_ref_support {
        cfg.oracle.min_ref_support = v;
    }
    if let Some(v) = o.max_coverage {
        cfg.oracle.max_coverage = v;
    }
    if let Some(v) = o.w {
        cfg.loss.w = v;
    }
    if let Some(v) = o.epsilon {
        cfg.loss.epsilon = v;
    }
    if let Some(v) = &o.indicator_mode {
        cfg.loss.indicator_mode = parse_enum("indicator-mode", v)?;
    }
    if o.exclude_anchor_positions {
        cfg.loss.exclude_anchor_positions = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn open_input(path: &Path) -> Result<(Box<dyn BufRead>, String)> {
    if is_stdio(path) {
        return Ok((Box::new(io::stdin().lock()), "<stdin>".into()));
    }
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok((Box::new(BufReader::new(f)), path.display().to_string()))
}

fn with_output(
    out: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    match out {
        Some(path) if !is_stdio(path) => {
            let f = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(f);
            write(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))
        }
        _ => {
            let mut w = BufWriter::new(io::stdout().lock());
            write(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn json_line(w: &mut dyn Write, value: &impl serde::Serialize) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    w.write_all(b"\n")
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = resolve_config(&cli.overrides)?;
    match cli.command {
        Command::Ingest { input, kind, out } => {
            let kind = match kind {
                Kind::Clusters => DatasetKind::Clusters,
                Kind::Pairs => DatasetKind::Pairs,
            };
            let (reader, origin) = open_input(&input)?;
            let ingested = pipeline::ingest(reader, &origin, kind, &cfg)?;
            if !ingested.skipped.is_empty() {
                eprintln!(
                    "skipped {} single-sentence clusters: {}",
                    ingested.skipped.len(),
                    ingested.skipped.join(", ")
                );
            }
            eprintln!("ingested {} pairs", ingested.pairs.len());
            with_output(out.as_deref(), |w| write_jsonl(w, &ingested.pairs))
        }
        Command::Tag {
            input,
            gazetteer,
            service_url,
            report,
            out,
        } => {
            if let Some(g) = gazetteer {
                cfg.ner.gazetteer = Some(g);
            }
            if let Some(url) = service_url {
                cfg.ner.service_url = Some(url.clone());
                cfg.auto.service_url = Some(url);
            }
            let (reader, origin) = open_input(&input)?;
            let pairs = pipeline::ingest(reader, &origin, DatasetKind::Pairs, &cfg)?.pairs;
            let tagged = pipeline::tag(&pairs, &cfg)?;
            match report {
                Some(path) => with_output(Some(&path), |w| json_line(w, &tagged.report))?,
                None => eprintln!(
                    "{}",
                    serde_json::to_string(&tagged.report).expect("report serializes")
                ),
            }
            eprintln!(
                "emitted {} records, {} with anchors",
                tagged.emit.records, tagged.emit.records_with_anchors
            );
            with_output(out.as_deref(), |w| write_jsonl(w, &tagged.records))
        }
        Command::Prepare { input, out_dir } => {
            let (reader, origin) = open_input(&input)?;
            let records = pipeline::read_tagged(reader, &origin)?;
            let mut prepared = pipeline::prepare(&records, &cfg)?;
            prepared.manifest.created_unix = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs());
            pipeline::write_prepared(&prepared, &out_dir)?;
            eprintln!(
                "wrote {} train and {} test records to {}",
                prepared.train.len(),
                prepared.test.len(),
                out_dir.display()
            );
            Ok(())
        }
        Command::Eval {
            input,
            aggregation,
            out,
        } => {
            if let Some(a) = aggregation {
                cfg.eval.aggregation = match a {
                    Agg::Max => Aggregation::Max,
                    Agg::Mean => Aggregation::Mean,
                };
            }
            let (reader, origin) = open_input(&input)?;
            let report = pipeline::eval(reader, &origin, &cfg)?;
            with_output(out.as_deref(), |w| json_line(w, &report))
        }
        Command::Loss(LossCommand::Golden {
            count,
            vocab_size,
            out,
        }) => {
            let file = pipeline::loss_golden(&cfg, count, vocab_size)?;
            with_output(out.as_deref(), |w| w.write_all(file.to_json().as_bytes()))
        }
        Command::Loss(LossCommand::Check { golden }) => {
            let text = std::fs::read_to_string(&golden).map_err(|e| Error::io(&golden, e))?;
            let check = pipeline::loss_check(&text)?;
            with_output(None, |w| json_line(w, &check))?;
            if check.passed() {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "{} of {} golden cases out of tolerance",
                    check.failed_cases.len(),
                    check.cases
                )))
            }
        }
        Command::Synth { count, out } => {
            let clusters = synthetic_clusters(cfg.seed, count);
            with_output(out.as_deref(), |w| write_jsonl(w, &clusters))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
