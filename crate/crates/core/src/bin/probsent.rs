use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use probsent::analyze::{self, Criterion};
use probsent::checkpoint::{load_checkpoint, save_checkpoint};
use probsent::data;
use probsent::eval::{self, BaselineKind, BaselineScorer, EvalReport, Scorer};
use probsent::grad;
use probsent::synth::{self, SynthConfig, SynthCorpus};
use probsent::train::{self, tune_lambda, LAMBDA_GRID};
use probsent::{Model, ModelKind, TrainConfig, Vocabulary};

#[derive(Parser)]
#[command(name = "probsent", version, about = "Gaussian sentence embeddings from word-level affine operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a paraphrase pair file and write a checkpoint.
    Train(TrainCmd),
    /// Evaluate a checkpoint or a baseline on one task.
    Eval(EvalCmd),
    /// Word and sentence specificity profiles.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Compare analytic gradients with central differences on a random problem.
    Gradcheck(GradcheckCmd),
    /// Write the synthetic marker/filler corpus and its evaluation sets.
    Synth(SynthCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Wordavg,
    Wordsum,
    Wlo,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Wordavg => ModelKind::WordAvg,
            KindArg::Wordsum => ModelKind::WordSum,
            KindArg::Wlo => ModelKind::Wlo,
        }
    }
}

/// Overrides on top of the per-kind defaults.
#[derive(Args)]
struct Hyper {
    #[arg(long, value_enum, default_value = "wlo")]
    model: KindArg,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Mini-batches per mega-batch.
    #[arg(long)]
    megabatch: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    lambda_kl: Option<f64>,
    #[arg(long)]
    lambda_l2: Option<f64>,
    #[arg(long)]
    scramble_p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    min_count: Option<u64>,
}

impl Hyper {
    fn config(&self) -> TrainConfig {
        let mut c = TrainConfig::for_kind(self.model.into());
        c.seed = self.seed;
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f { c.$g = v; })* };
        }
        set!(dim => dim, lr => lr, epochs => epochs, batch_size => batch_size, megabatch => megabatch_size,
             margin => margin, lambda_kl => lambda_kl, lambda_l2 => lambda_l2, scramble_p => scramble_p,
             min_count => min_count);
        c
    }
}

#[derive(Args)]
struct TrainCmd {
    /// Tab-separated paraphrase pairs.
    #[arg(long)]
    pairs: PathBuf,
    /// Checkpoint path.
    #[arg(long)]
    out: PathBuf,
    /// Held-out similarity file; picks the regularization weight from a fixed grid first.
    #[arg(long)]
    tune_lambda: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    News,
    Correlation,
    LengthNorm,
    Entailment,
    Sts,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Length,
    #[value(name = "freq_sum")]
    FreqSum,
    #[value(name = "freq_avg")]
    FreqAvg,
}

impl From<BaselineArg> for BaselineKind {
    fn from(b: BaselineArg) -> Self {
        match b {
            BaselineArg::Length => BaselineKind::Length,
            BaselineArg::FreqSum => BaselineKind::FreqSum,
            BaselineArg::FreqAvg => BaselineKind::FreqAvg,
        }
    }
}

#[derive(Args)]
struct EvalCmd {
    #[arg(long, value_enum)]
    task: Task,
    #[arg(long, required_unless_present = "baseline", conflicts_with = "baseline")]
    checkpoint: Option<PathBuf>,
    /// Score with a non-parametric baseline instead of a checkpoint.
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,
    /// Sentences (one or more per line, tab-separated) for word frequencies.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Labeled training file for threshold tuning (news, length-norm).
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Rank words within a translation-norm half by entropy contribution.
    Words {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "small_norm_small_ent", value_parser = parse_criterion)]
        criterion: Criterion,
        #[arg(long, default_value_t = 20)]
        top_n: usize,
        /// Sentences used to fill in corpus frequencies.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Most specific and most general sentences of one length.
    Sentences {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_criterion(s: &str) -> std::result::Result<Criterion, String> {
    s.parse().map_err(|e: probsent::Error| e.to_string())
}

#[derive(Args)]
struct GradcheckCmd {
    #[arg(long, value_enum, default_value = "wlo")]
    model: KindArg,
    #[arg(long, default_value_t = 5)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    vocab_size: usize,
    /// Pairs in the random batch.
    #[arg(long, default_value_t = 4)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 1e-5)]
    step: f64,
    /// Regularization weight for WLO.
    #[arg(long, default_value_t = 1e-2)]
    lambda_kl: f64,
    /// Regularization weight for the embedding models.
    #[arg(long, default_value_t = 1e-2)]
    lambda_l2: f64,
    /// Double the largest analytic gradient before comparing.
    #[arg(long)]
    inject_fault: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SynthCmd {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    n_pairs: usize,
    /// Labeled sentences in each of news_train.tsv and news_test.tsv.
    #[arg(long, default_value_t = 1000)]
    n_labeled: usize,
    /// Entailment triples per label.
    #[arg(long, default_value_t = 100)]
    n_entailment: usize,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train(c) => cmd_train(c),
        Command::Eval(c) => cmd_eval(c),
        Command::Analyze(c) => cmd_analyze(c),
        Command::Gradcheck(c) => cmd_gradcheck(c),
        Command::Synth(c) => cmd_synth(c),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn load_model(path: &Path) -> Result<Model> {
    load_checkpoint(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn corpus_vocab(path: &Path) -> Result<Vocabulary> {
    let sentences = data::read_sentences(path)?;
    Ok(Vocabulary::build(&sentences, 1)?)
}

fn cmd_train(c: TrainCmd) -> Result<ExitCode> {
    let kind: ModelKind = c.hyper.model.into();
    let mut config = c.hyper.config();
    config.validate()?;
    let pairs = data::read_pairs(&c.pairs)?;
    if let Some(sts) = &c.tune_lambda {
        let held_out = data::read_sts(sts)?;
        let sweep = tune_lambda(&pairs, &held_out, &config, kind, &LAMBDA_GRID)?;
        for (lam, r) in &sweep.scores {
            eprintln!("lambda {lam}\tpearson {r:.4}");
        }
        if kind == ModelKind::Wlo {
            config.lambda_kl = sweep.best_lambda;
        } else {
            config.lambda_l2 = sweep.best_lambda;
        }
    }
    let (model, log) = train::train(&pairs, &config, kind)?;
    save_checkpoint(&model, &c.out)?;
    match c.format {
        Format::Json => print!("{}", log.to_json_lines()),
        Format::Tsv => {
            println!("epoch\tmean_loss\tmean_kl\twall_seconds");
            for r in &log.epochs {
                let kl = r.mean_kl.map_or_else(|| "-".to_owned(), |k| k.to_string());
                println!("{}\t{}\t{kl}\t{:.3}", r.epoch, r.mean_loss, r.wall_seconds);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report_text(r: &EvalReport, format: Format) -> String {
    match format {
        Format::Json => r.to_json() + "\n",
        Format::Tsv => r.to_tsv(),
    }
}

fn cmd_eval(c: EvalCmd) -> Result<ExitCode> {
    let labeled_train = |task: &str| -> Result<Vec<eval::LabeledSentence>> {
        let p = c.train.as_ref().with_context(|| format!("--train is required for {task}"))?;
        Ok(data::read_labeled(p)?)
    };
    let model = c.checkpoint.as_deref().map(load_model).transpose()?;
    let vocab = match (c.baseline, &c.corpus) {
        (_, Some(p)) => corpus_vocab(p)?,
        (Some(BaselineArg::FreqSum | BaselineArg::FreqAvg), None) => bail!("frequency baselines need --corpus"),
        _ => Vocabulary::from_tokens(vec![probsent::vocab::UNK.to_owned()])?,
    };
    let baseline = c.baseline.map(|b| BaselineScorer::new(b.into(), &vocab));
    let scorer: &dyn Scorer = match (&model, &baseline) {
        (Some(m), _) => m,
        (None, Some(b)) => b,
        (None, None) => unreachable!("clap requires --checkpoint or --baseline"),
    };
    let report = match c.task {
        Task::News => eval::eval_news(scorer, &labeled_train("news")?, &data::read_labeled(&c.test)?)?,
        Task::LengthNorm => {
            eval::length_normalized_eval(scorer, &labeled_train("length-norm")?, &data::read_labeled(&c.test)?)?
        }
        Task::Correlation => eval::eval_correlation(scorer, &data::read_labeled(&c.test)?)?,
        Task::Entailment => eval::eval_entailment(scorer, &data::read_entailment(&c.test)?)?,
        Task::Sts => {
            let m = model.as_ref().context("the sts task needs --checkpoint")?;
            eval::eval_sts(m, &data::read_sts(&c.test)?)?
        }
    };
    emit(c.out.as_deref(), &report_text(&report, c.format))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(c: AnalyzeCmd) -> Result<ExitCode> {
    match c {
        AnalyzeCmd::Words { checkpoint, criterion, top_n, corpus, format, out } => {
            let mut model = load_model(&checkpoint)?;
            if let Some(p) = corpus {
                model.attach_frequencies(&corpus_vocab(&p)?);
            }
            let words = analyze::rank_words(&model, criterion, top_n)?;
            let text = match format {
                Format::Json => json(&words),
                Format::Tsv => analyze::word_profiles_tsv(&words),
            };
            emit(out.as_deref(), &text)?;
        }
        AnalyzeCmd::Sentences { checkpoint, corpus, length, k, format, out } => {
            let model = load_model(&checkpoint)?;
            let sentences = data::read_sentences(&corpus)?;
            let (specific, general) = analyze::extreme_sentences(&model, &sentences, length, k)?;
            let text = match format {
                Format::Json => json(&serde_json::json!({ "specific": specific, "general": general })),
                Format::Tsv => {
                    let mut t = String::from("extreme\tlength\tscore\tsentence\n");
                    t += &analyze::sentence_profiles_tsv("specific", &specific);
                    t += &analyze::sentence_profiles_tsv("general", &general);
                    t
                }
            };
            emit(out.as_deref(), &text)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gradcheck(c: GradcheckCmd) -> Result<ExitCode> {
    let kind: ModelKind = c.model.into();
    let lambda = if kind == ModelKind::Wlo { c.lambda_kl } else { c.lambda_l2 };
    let p = grad::random_problem(kind, c.dim, c.vocab_size, c.batch, lambda, c.seed)?;
    let (_, mut analytic) = grad::loss_and_gradients(&p.model, &p.batch, &p.config)?;
    if c.inject_fault {
        grad::corrupt_largest(&mut analytic);
    }
    let report = grad::compare_with_numeric(&p.model, &p.batch, &p.config, &analytic, c.step, c.tol)?;
    let text = match c.format {
        Format::Json => json(&report),
        Format::Tsv => format!(
            "passed\t{}\nchecked\t{}\nfailures\t{}\nmax_rel_err\t{:e}\nmean_rel_err\t{:e}\n",
            report.passed,
            report.checked,
            report.failures.len(),
            report.max_rel_err,
            report.mean_rel_err
        ),
    };
    print!("{text}");
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    f(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))
}

fn cmd_synth(c: SynthCmd) -> Result<ExitCode> {
    let corpus = SynthCorpus::generate(SynthConfig { n_pairs: c.n_pairs, seed: c.seed, ..SynthConfig::default() })?;
    fs::create_dir_all(&c.out).with_context(|| format!("creating {}", c.out.display()))?;
    let dir = c.out.as_path();
    write_file(dir, "pairs.tsv", |w| data::write_pairs(w, &corpus.pairs))?;
    write_file(dir, "news_train.tsv", |w| data::write_labeled(w, &corpus.labeled_set(c.n_labeled, c.seed + 1)))?;
    write_file(dir, "news_test.tsv", |w| data::write_labeled(w, &corpus.labeled_set(c.n_labeled, c.seed + 2)))?;
    write_file(dir, "entailment.tsv", |w| {
        data::write_entailment(w, &corpus.entailment_triples(c.n_entailment, c.seed + 3))
    })?;
    write_file(dir, "markers.txt", |w| corpus.markers.iter().try_for_each(|m| writeln!(w, "{m}")))?;
    write_file(dir, "fillers.txt", |w| corpus.fillers.iter().try_for_each(|m| writeln!(w, "{m}")))?;
    let meta = serde_json::json!({ "corpus": corpus.config, "train": synth::train_config() });
    fs::write(dir.join("synth.json"), json(&meta)).context("writing synth.json")?;
    let t = synth::train_config();
    eprintln!(
        "wrote {} pairs to {}; suggested: probsent train --pairs {} --dim {} --lr {} --batch-size {} --megabatch {} --epochs {}",
        corpus.pairs.len(),
        dir.display(),
        dir.join("pairs.tsv").display(),
        t.dim,
        t.lr,
        t.batch_size,
        t.megabatch_size,
        t.epochs
    );
    Ok(ExitCode::SUCCESS)
}
