mod config;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::ConfigFile;
use textcat::classifiers::{ClassifierConfig, ClassifierKind, KChoice, KernelSpec, SvmConfig, TreeParams};
use textcat::corpus::{corpus_stats, generate_synthetic_corpus, load_corpus, Corpus, VocabProfile};
use textcat::eval::{bench_training, curve_csv, learning_curve, run_cv, stratified_kfold, CurveSpec};
use textcat::preprocess::{default_stopwords, default_suffix_rules, load_suffix_rules, PipelineConfig, StepFlags, StopwordList};
use textcat::ModelFileF64;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_FOLDS: usize = 10;

#[derive(Parser)]
#[command(name = "textcat", version, about = "Train, evaluate and apply Bangla text classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one classifier on a whole corpus and write a model file
    Train(TrainArgs),
    /// Classify one document with a saved model
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation with per-category reports
    Evaluate(EvaluateArgs),
    /// Macro F1 on a fixed holdout for growing training sets (CSV)
    LearningCurve(CurveArgs),
    /// Median training time per classifier on the whole corpus
    Bench(BenchArgs),
    /// Write a seeded synthetic corpus in the on-disk layout
    GenerateCorpus(GenerateArgs),
    /// Documents per category
    Stats(StatsArgs),
}

#[derive(Args, Default)]
struct Common {
    /// `key = value` settings file; flags take precedence over it
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Corpus root: one subdirectory of .txt files per category
    #[arg(long, value_name = "DIR")]
    corpus: Option<PathBuf>,
}

#[derive(Args, Default)]
struct PipelineOpts {
    /// Stop-word list, one word per line
    #[arg(long, value_name = "FILE")]
    stopwords: Option<PathBuf>,
    /// Suffix rules, `suffix<TAB>min_stem_length` per line
    #[arg(long, value_name = "FILE")]
    suffixes: Option<PathBuf>,
    /// Preprocessing steps to turn off: digits, punctuation, stopwords, stemming
    #[arg(long, value_name = "STEPS")]
    skip: Option<String>,
    /// Keep single-letter tokens
    #[arg(long)]
    keep_single_letters: bool,
}

#[derive(Args, Default)]
struct ModelOpts {
    /// Neighbour count for knn, or `auto` to pick it from 1..=10 by inner CV
    #[arg(long)]
    k: Option<String>,
    /// SVM penalty
    #[arg(long)]
    c: Option<f64>,
    /// SVM kernel: sigmoid or linear
    #[arg(long)]
    kernel: Option<String>,
    /// Sigmoid kernel gamma (default 1 / vocabulary size)
    #[arg(long)]
    gamma: Option<f64>,
    /// Sigmoid kernel offset
    #[arg(long, allow_negative_numbers = true)]
    coef0: Option<f64>,
    /// SMO stopping tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// SMO iteration cap, in multiples of the training size
    #[arg(long)]
    max_passes: Option<usize>,
    /// Smallest number of documents per tree leaf
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Tree depth limit
    #[arg(long)]
    max_depth: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    pipeline: PipelineOpts,
    #[command(flatten)]
    model: ModelOpts,
    /// nb, knn, c45 or svm
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long, short, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Document to classify (default: standard input)
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Also print per-category decision values
    #[arg(long)]
    scores: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    pipeline: PipelineOpts,
    #[command(flatten)]
    model: ModelOpts,
    /// `all` or a comma-separated list
    #[arg(long)]
    classifiers: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the reports as JSON
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Include training times (not reproducible) in the output
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    pipeline: PipelineOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[arg(long)]
    classifiers: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    steps: usize,
    #[arg(long, default_value_t = 30)]
    step_size: usize,
    /// Fraction of each category held out for scoring
    #[arg(long, default_value_t = 0.2)]
    holdout: f64,
    /// CSV output (default: standard output)
    #[arg(long, short, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    pipeline: PipelineOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[arg(long)]
    classifiers: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    categories: usize,
    /// Documents per category
    #[arg(long, default_value_t = 200)]
    docs: usize,
    #[arg(long, short, value_name = "DIR")]
    out: PathBuf,
    #[arg(long)]
    signature_terms: Option<usize>,
    #[arg(long)]
    background_terms: Option<usize>,
    #[arg(long)]
    signature_fraction: Option<f64>,
    #[arg(long)]
    overlap: Option<f64>,
    #[arg(long)]
    min_words: Option<usize>,
    #[arg(long)]
    max_words: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_name = "DIR")]
    corpus: PathBuf,
}

/// Everything resolved from flags, config file and defaults.
struct Settings {
    corpus: PathBuf,
    pipeline: PipelineConfig,
    classifiers: ClassifierConfig,
    seed: u64,
    file: ConfigFile,
}

fn resolve(common: &Common, pipeline: &PipelineOpts, model: &ModelOpts, seed: Option<u64>) -> Result<Settings> {
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(n) = file.pick(common.threads, "threads")? {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        // only the first call can size the global pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let corpus: PathBuf = file
        .pick(common.corpus.clone(), "corpus")?
        .ok_or_else(|| anyhow!("no corpus given (use --corpus or the `corpus` config key)"))?;
    if !corpus.is_dir() {
        bail!("corpus directory {} does not exist", corpus.display());
    }
    let seed = file.pick(seed, "seed")?.unwrap_or(DEFAULT_SEED);

    let stopwords = match file.pick(pipeline.stopwords.clone(), "stopwords")? {
        Some(path) => StopwordList::from_file(&path)?,
        None => default_stopwords(),
    };
    let suffixes = match file.pick(pipeline.suffixes.clone(), "suffixes")? {
        Some(path) => load_suffix_rules(&path)?,
        None => default_suffix_rules(),
    };
    let mut steps = StepFlags::default();
    if let Some(skip) = file.pick(pipeline.skip.clone(), "skip")? {
        for step in skip.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match step {
                "digits" => steps.digits = false,
                "punctuation" => steps.punctuation = false,
                "stopwords" => steps.stopwords = false,
                "stemming" => steps.stemming = false,
                other => bail!("unknown preprocessing step `{other}`"),
            }
        }
    }
    let keep_single = file.pick(pipeline.keep_single_letters.then_some(true), "keep-single-letters")?.unwrap_or(false);
    let pipeline = PipelineConfig::new(stopwords, suffixes, !keep_single, steps);

    let defaults = ClassifierConfig::default();
    let k = match file.pick(model.k.clone(), "k")? {
        None => defaults.k,
        Some(s) if s == "auto" => match KChoice::auto() {
            KChoice::Auto { min, max, folds, .. } => KChoice::Auto { min, max, folds, seed },
            fixed => fixed,
        },
        Some(s) => KChoice::Fixed(s.parse().map_err(|_| anyhow!("--k must be a positive integer or `auto`, got `{s}`"))?),
    };
    let gamma = file.pick(model.gamma, "gamma")?;
    let coef0 = file.pick(model.coef0, "coef0")?.unwrap_or(0.0);
    let kernel = match file.pick(model.kernel.clone(), "kernel")?.as_deref() {
        None | Some("sigmoid") => KernelSpec::Sigmoid { gamma, coef0 },
        Some("linear") => KernelSpec::Linear,
        Some(other) => bail!("unknown kernel `{other}` (expected sigmoid or linear)"),
    };
    let svm = SvmConfig {
        kernel,
        c: file.pick(model.c, "c")?.unwrap_or(defaults.svm.c),
        tol: file.pick(model.tol, "tol")?.unwrap_or(defaults.svm.tol),
        max_passes: file.pick(model.max_passes, "max-passes")?.unwrap_or(defaults.svm.max_passes),
    };
    if !(svm.c > 0.0 && svm.tol > 0.0) {
        bail!("--c and --tol must be positive");
    }
    let tree = TreeParams {
        min_leaf: file.pick(model.min_leaf, "min-leaf")?.unwrap_or(defaults.tree.min_leaf),
        max_depth: file.pick(model.max_depth, "max-depth")?.or(defaults.tree.max_depth),
    };
    Ok(Settings {
        corpus,
        pipeline,
        classifiers: ClassifierConfig { k, tree, svm },
        seed,
        file,
    })
}

fn selection(file: &ConfigFile, flag: Option<String>) -> Result<Vec<ClassifierKind>> {
    let s = file.pick(flag, "classifiers")?.unwrap_or_else(|| "all".into());
    Ok(ClassifierKind::parse_selection(&s)?)
}

fn check_output_dir(path: &Path) -> Result<()> {
    match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(dir) if !dir.is_dir() => bail!("output directory {} does not exist", dir.display()),
        _ => Ok(()),
    }
}

fn load(settings: &Settings) -> Result<Corpus> {
    Ok(load_corpus(&settings.corpus)?)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let s = resolve(&args.common, &args.pipeline, &args.model, args.seed)?;
    let kind: ClassifierKind = s
        .file
        .pick(args.classifier, "classifier")?
        .ok_or_else(|| anyhow!("no classifier given (use --classifier nb|knn|c45|svm)"))?
        .parse()?;
    check_output_dir(&args.out)?;
    let corpus = load(&s)?;
    let start = Instant::now();
    let model = ModelFileF64::train(&corpus, &s.pipeline, &s.classifiers, kind)?;
    let seconds = start.elapsed().as_secs_f64();
    model.save(&args.out)?;
    println!("vocabulary size\t{}", model.vocabulary.len());
    println!("training seconds\t{seconds:.3}");
    if let textcat::classifiers::TrainedModel::Svm(svm) = &model.model {
        if !svm.converged() {
            eprintln!("warning: SMO hit its iteration cap before converging");
        }
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = ModelFileF64::load(&args.model)?;
    let bytes = match &args.input {
        Some(path) => std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?,
        None => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf).context("cannot read standard input")?;
            buf
        }
    };
    let text = String::from_utf8(bytes).map_err(|_| anyhow!("input document is not valid UTF-8"))?;
    let prediction = model.predict_text(text.trim_start_matches('\u{feff}'));
    println!("{}", prediction.name);
    if args.scores {
        for (name, score) in model.categories.iter().zip(&prediction.scores) {
            println!("{name}\t{score}");
        }
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let s = resolve(&args.common, &args.pipeline, &args.model, args.seed)?;
    let kinds = selection(&s.file, args.classifiers)?;
    let folds = s.file.pick(args.folds, "folds")?.unwrap_or(DEFAULT_FOLDS);
    if let Some(path) = &args.json {
        check_output_dir(path)?;
    }
    let corpus = load(&s)?;
    let plan = stratified_kfold(&corpus, folds, s.seed)?;
    let mut reports = run_cv::<f64>(&corpus, &s.pipeline, &s.classifiers, &kinds, &plan)?;
    if !args.timings {
        reports.iter_mut().for_each(|r| r.training_seconds = None);
    }
    for (i, report) in reports.iter().enumerate() {
        if i > 0 {
            println!();
        }
        print!("{report}");
    }
    if let Some(path) = &args.json {
        let doc = serde_json::json!({
            "folds": folds,
            "seed": s.seed,
            "reports": reports,
        });
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn cmd_learning_curve(args: CurveArgs) -> Result<()> {
    let s = resolve(&args.common, &args.pipeline, &args.model, args.seed)?;
    let kinds = selection(&s.file, args.classifiers)?;
    if let Some(path) = &args.out {
        check_output_dir(path)?;
    }
    let corpus = load(&s)?;
    let spec = CurveSpec {
        steps: args.steps,
        step_size: args.step_size,
        holdout_fraction: args.holdout,
        seed: s.seed,
    };
    let csv = curve_csv(&learning_curve::<f64>(&corpus, &s.pipeline, &s.classifiers, &kinds, &spec)?);
    match &args.out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let s = resolve(&args.common, &args.pipeline, &args.model, args.seed)?;
    let kinds = selection(&s.file, args.classifiers)?;
    let corpus = load(&s)?;
    println!("classifier\tmedian_seconds");
    for row in bench_training::<f64>(&corpus, &s.pipeline, &s.classifiers, &kinds, args.repeats)? {
        println!("{}\t{:.6}", row.classifier, row.median_seconds);
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let d = VocabProfile::default();
    let profile = VocabProfile {
        signature_terms: args.signature_terms.unwrap_or(d.signature_terms),
        background_terms: args.background_terms.unwrap_or(d.background_terms),
        signature_fraction: args.signature_fraction.unwrap_or(d.signature_fraction),
        overlap: args.overlap.unwrap_or(d.overlap),
        min_words: args.min_words.unwrap_or(d.min_words),
        max_words: args.max_words.unwrap_or(d.max_words),
    };
    if args.out.exists() && std::fs::read_dir(&args.out)?.next().is_some() {
        bail!("output directory {} is not empty", args.out.display());
    }
    let corpus = generate_synthetic_corpus(args.seed, args.categories, args.docs, &profile)?;
    corpus.write_to(&args.out)?;
    print!("{}", corpus_stats(&corpus));
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    print!("{}", corpus_stats(&load_corpus(&args.corpus)?));
    Ok(())
}

/// The error chain on one line, skipping causes already quoted by their
/// parent.
fn one_line(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out.replace(['\n', '\r'], " ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::LearningCurve(a) => cmd_learning_curve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenerateCorpus(a) => cmd_generate(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::FAILURE
        }
    }
}
