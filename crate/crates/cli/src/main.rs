use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use logiprep_core::config::{Overrides, RunConfig};
use logiprep_core::curator::{curate_stream, CategoryFilter};
use logiprep_core::error::{ConfigError, Error};
use logiprep_core::masker::PolicyKind;
use logiprep_core::pipeline::{self, Resources};
use logiprep_core::segmenter::{read_corpus, split_sentences, CorpusFormat};
use logiprep_core::shards::ShardSet;
use logiprep_core::stats::{ReportFormat, RunReport};
use logiprep_core::tagger::{self, TaggerModel};
use logiprep_core::tokenizer::SubwordVocab;
use logiprep_core::toyloss::{self, JointObjective, ToyConfig};

#[derive(Parser)]
#[command(name = "logiprep", version, about = "Keyword-curated, selectively masked pretraining shards")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the sentence stream of a corpus as JSON lines.
    Segment {
        input: PathBuf,
        #[arg(long, default_value = "jsonl")]
        format: CorpusFormat,
        /// Stop after this many sentences.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Train the POS tagger on a CoNLL-U file.
    TagTrain {
        #[arg(long)]
        train: PathBuf,
        /// Held-out CoNLL-U file to score after training.
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        epochs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Tag every sentence of a corpus, one `word/TAG` line per sentence.
    Tag {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        #[arg(long, default_value = "jsonl")]
        format: CorpusFormat,
    },
    /// Print curated sentences as JSON lines.
    Curate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the full pipeline and write shards, manifest and report.
    Pack {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        records_per_shard: Option<usize>,
    },
    /// Re-render a saved report.
    Stats {
        report: PathBuf,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
    },
    /// Re-validate a shard directory.
    Verify {
        shards: PathBuf,
        /// Also require the manifest to match this vocabulary.
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Train the toy joint-loss encoder on a shard directory.
    TrainToy {
        shards: PathBuf,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        lr: f64,
        #[arg(long, default_value_t = 8)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        ecls_weight: f64,
        /// Global gradient-norm cap; 0 disables clipping.
        #[arg(long, default_value_t = 1.0)]
        clip: f64,
        /// Loss curve CSV destination.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Show words, tags, matches, plan and record for one sentence.
    Inspect {
        #[command(flatten)]
        run: RunArgs,
        doc_id: u64,
        sent_idx: u32,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    policy: Option<PolicyKind>,
    #[arg(long)]
    category: Option<CategoryFilter>,
}

impl RunArgs {
    fn resolve(&self, extra: Overrides) -> Result<RunConfig, Error> {
        let o = Overrides {
            input: self.input.clone(),
            seed: self.seed,
            policy: self.policy,
            category_filter: self.category,
            ..extra
        };
        let cfg = RunConfig::load(&self.config)?.resolve(&o)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream closed the pipe (`| head`)
        Err(Error::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", class.name());
            ExitCode::from(class.exit_code() as u8)
        }
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn stdout_err(source: io::Error) -> Error {
    Error::Io { path: PathBuf::from("<stdout>"), source }
}

fn run(command: Command) -> Result<(), Error> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match command {
        Command::Segment { input, format, limit } => {
            let docs = read_corpus(&input, format)?;
            let sentences = docs.iter().flat_map(split_sentences).take(limit.unwrap_or(usize::MAX));
            for s in sentences {
                let line = serde_json::json!({
                    "doc": s.doc_id,
                    "sent": s.sent_idx,
                    "words": s.word_forms(),
                    "in_bounds": s.within_length_bounds(),
                });
                writeln!(out, "{line}").map_err(stdout_err)?;
            }
        }
        Command::TagTrain { train, dev, epochs, seed, out: model_path } => {
            let sentences = tagger::read_conllu(&train)?;
            let name = train.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let mut model = tagger::train(&sentences, epochs, seed, &name)?;
            if let Some(dev) = dev {
                let gold = tagger::read_conllu(&dev)?;
                let acc = model.accuracy(&gold);
                model.metadata.heldout_accuracy = Some(acc);
                writeln!(out, "dev accuracy {acc:.4} over {} sentences", gold.len()).map_err(stdout_err)?;
            }
            model.save(&model_path)?;
            info!("wrote {} ({} features)", model_path.display(), model.num_features());
        }
        Command::Tag { model, input, format } => {
            let model = TaggerModel::load(&model)?;
            for doc in read_corpus(&input, format)? {
                for s in split_sentences(&doc) {
                    let forms = s.word_forms();
                    let tags = model.tag(&forms);
                    let line: Vec<String> = forms.iter().zip(&tags).map(|(w, t)| format!("{w}/{}", t.name())).collect();
                    writeln!(out, "{}", line.join(" ")).map_err(stdout_err)?;
                }
            }
        }
        Command::Curate { run } => {
            let cfg = run.resolve(Overrides::default())?;
            let res = Resources::load(&cfg)?;
            let docs = read_corpus(&cfg.path(&cfg.input), cfg.format)?;
            let sentences = docs.iter().flat_map(split_sentences).filter(|s| s.within_length_bounds());
            let mut stream = curate_stream(sentences, |s| res.tagger.tag(&s.word_forms()), &res.lexicon, res.category_filter);
            for c in stream.by_ref() {
                let m = c.governing_match();
                let line = serde_json::json!({
                    "doc": c.segmented.doc_id,
                    "sent": c.segmented.sent_idx,
                    "label": c.label,
                    "source": c.label_source,
                    "keyword": res.lexicon.entry(m.entry).text(),
                    "text": c.segmented.text,
                });
                writeln!(out, "{line}").map_err(stdout_err)?;
            }
            info!("{:?}", stream.counts());
        }
        Command::Pack { run, out: out_dir, workers, records_per_shard } => {
            let cfg = run.resolve(Overrides { output: out_dir, workers, records_per_shard, ..Default::default() })?;
            let result = pipeline::pack(&cfg)?;
            let m = &result.manifest;
            writeln!(
                out,
                "{} records in {} shards ({} entailment, {} contradiction)",
                m.n_records,
                m.config.shards.len(),
                m.n_entailment,
                m.n_contradiction
            )
            .map_err(stdout_err)?;
            write!(out, "{}", result.report.render(ReportFormat::Text)).map_err(stdout_err)?;
        }
        Command::Stats { report, format } => {
            let text = fs::read_to_string(&report).map_err(|source| Error::Io { path: report.clone(), source })?;
            let r = RunReport::from_json(&text).map_err(|e| ConfigError(format!("{}: {e}", report.display())))?;
            write!(out, "{}", r.render(format)).map_err(stdout_err)?;
        }
        Command::Verify { shards, vocab } => {
            let set = ShardSet::open(&shards)?;
            let vocab_sha = vocab.map(|p| SubwordVocab::load(&p)).transpose()?.map(|v| v.sha256());
            set.check_digests(vocab_sha.as_deref(), None)?;
            let records = set.read_all()?;
            writeln!(out, "ok: {} records in {} shards", records.len(), set.num_shards()).map_err(stdout_err)?;
        }
        Command::TrainToy { shards, steps, lr, batch, seed, ecls_weight, clip, curve } => {
            let cfg = ToyConfig {
                steps,
                learning_rate: lr,
                seed,
                batch_size: batch,
                clip_norm: (clip > 0.0).then_some(clip),
                objective: JointObjective { ecls_weight },
                ..ToyConfig::default()
            };
            let run = toyloss::train_toy(&shards, &cfg)?;
            if let Some(path) = curve {
                write_file(&path, toyloss::curve_csv(&run.curve).as_bytes())?;
            }
            let (a, b) = (run.initial, run.final_eval);
            writeln!(out, "mean total loss {:.4} -> {:.4}", a.loss.total, b.loss.total).map_err(stdout_err)?;
            writeln!(out, "e-CLS accuracy {:.4} -> {:.4}", a.cls_accuracy, b.cls_accuracy).map_err(stdout_err)?;
        }
        Command::Inspect { run, doc_id, sent_idx } => {
            let cfg = run.resolve(Overrides::default())?;
            let res = Resources::load(&cfg)?;
            let docs = read_corpus(&cfg.path(&cfg.input), cfg.format)?;
            let trace = pipeline::inspect(&docs, &res, doc_id, sent_idx)?;
            write!(out, "{}", trace.render(&res)).map_err(stdout_err)?;
        }
    }
    out.flush().map_err(stdout_err)
}
