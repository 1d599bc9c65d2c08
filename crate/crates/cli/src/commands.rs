//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use intergroup_core::agreement::agreement_report;
use intergroup_core::analysis::{
    cooccurrence_matrix, emit_report, igr_emotion_distribution, target_concentration, top_features,
    AnalysisReport,
};
use intergroup_core::annotation::{
    emotion_count_table, label_utterances, load_annotations, load_examples, split_dataset,
    write_examples, Emotion, LabeledExample,
};
use intergroup_core::corpus::{
    build_utterances, load_member_directory, load_tweets, load_utterances, sample_balanced,
    write_utterances, IgrLabel, TRAIN_PLACEHOLDER,
};
use intergroup_core::error::{Error, Result};
use intergroup_core::eval::{
    emotion_macro_f1, emotion_report, igr_macro_f1, igr_report, paired_bootstrap, BootstrapVariant,
    ComparisonReport, EvalReport,
};
use intergroup_core::features::{build_vocab, vectorize, EmotionLexicon, SentimentLexicon, Vocab};
use intergroup_core::models::store::{
    emotion_entries, sentiment_entries, MlpRestart, ModelKind, Preprocess, TrainedModel,
};
use intergroup_core::models::{
    train_majority, train_multitask, train_nbsvm, MultitaskExample, NbSvmOptions, TrainConfig,
    TrainMode, DEFAULT_EMOLEX_THRESHOLD,
};
use intergroup_core::synth::{generate_corpus, write_corpus, SynthConfig};
use rayon::prelude::*;

use crate::cli::{
    AggregateArgs, AgreementArgs, AgreementMode, AnalyzeArgs, EvaluateArgs, IngestArgs,
    ModelFamily, SynthArgs, TaskArg, TrainArgs,
};
use crate::config::{resolve, FileConfig};

pub fn run_synth(args: &SynthArgs, file: &FileConfig, seed: Option<u64>) -> Result<()> {
    let mut config = SynthConfig::default();
    config.n_tweets = resolve(args.n, file.get_usize("n"), config.n_tweets)?;
    config.seed = resolve(seed, file.get_u64("seed"), config.seed)?;
    config.years.0 = resolve(None, file.get_i32("year_start"), config.years.0)?;
    config.years.1 = resolve(None, file.get_i32("year_end"), config.years.1)?;
    config.members_per_party = resolve(
        None,
        file.get_usize("members_per_party"),
        config.members_per_party,
    )?;
    config.outgroup_cue_prob = resolve(
        args.cue_prob,
        file.get_f64("outgroup_cue_prob"),
        config.outgroup_cue_prob,
    )?;
    config.noise_rate = resolve(
        args.noise_rate,
        file.get_f64("noise_rate"),
        config.noise_rate,
    )?;
    config.flip_rate = resolve(args.flip_rate, file.get_f64("flip_rate"), config.flip_rate)?;
    file.emotion_overrides("in", &mut config.emotion_given_igr.in_group)?;
    file.emotion_overrides("out", &mut config.emotion_given_igr.out_group)?;

    let corpus = generate_corpus(&config)?;
    write_corpus(&corpus, &args.out)?;
    eprintln!(
        "[synth] wrote {} tweets, {} annotation records, {} members to {}",
        corpus.tweets.len(),
        corpus.annotations.len(),
        corpus.members.len(),
        args.out.display()
    );
    Ok(())
}

pub fn run_ingest(args: &IngestArgs, file: &FileConfig, seed: Option<u64>) -> Result<()> {
    let dir = load_member_directory(&args.members)?;
    let tweets = load_tweets(&args.tweets)?;
    let (mut utterances, skipped) = build_utterances(&tweets, &dir, TRAIN_PLACEHOLDER);
    let kept_after_filter = utterances.len();
    let per_year = match args.per_year {
        Some(n) => Some(n),
        None => file.get_usize("per_year")?,
    };
    if let Some(per_year) = per_year {
        let seed = resolve(seed, file.get_u64("seed"), 0)?;
        utterances = sample_balanced(&utterances, per_year, seed)?;
    }
    write_utterances(&utterances, &args.out)?;
    eprintln!(
        "[ingest] {} tweets in, {} interpersonal ({} skipped), {} written to {}",
        tweets.len(),
        kept_after_filter,
        skipped,
        utterances.len(),
        args.out.display()
    );
    Ok(())
}

pub fn run_aggregate(args: &AggregateArgs, file: &FileConfig, seed: Option<u64>) -> Result<()> {
    let utterances = load_utterances(&args.utterances)?;
    let records = load_annotations(&args.annotations)?;
    let (examples, unannotated) = label_utterances(&utterances, &records)?;
    let seed = resolve(seed, file.get_u64("seed"), 0)?;
    let split = split_dataset(&examples, (0.8, 0.1, 0.1), seed)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    write_examples(&split.train, &args.out.join("train.jsonl"))?;
    write_examples(&split.dev, &args.out.join("dev.jsonl"))?;
    write_examples(&split.test, &args.out.join("test.jsonl"))?;

    let counts = emotion_count_table(&split);
    let counts_path = args.out.join("counts.json");
    let json = serde_json::to_string_pretty(&counts).expect("counts serialize");
    std::fs::write(&counts_path, json + "\n").map_err(|e| Error::io(&counts_path, e))?;

    eprintln!(
        "[aggregate] {} labeled ({} unannotated skipped) -> {}/{}/{} train/dev/test in {}",
        examples.len(),
        unannotated,
        split.train.len(),
        split.dev.len(),
        split.test.len(),
        args.out.display()
    );
    for (label, cells) in counts.non_empty_rows() {
        eprintln!(
            "[aggregate]   {label}: {} / {} / {}",
            cells[0], cells[1], cells[2]
        );
    }
    Ok(())
}

pub fn run_agreement(args: &AgreementArgs) -> Result<()> {
    let records = load_annotations(&args.annotations)?;
    let report = agreement_report::<f64>(&records)?;
    let json = match args.mode {
        AgreementMode::Best => serde_json::json!({
            "mode": "best",
            "pea_max": report.pea_max,
            "tweets_scored": report.tweets_scored,
            "tweets_skipped": report.tweets_skipped,
        }),
        AgreementMode::Worst => serde_json::json!({
            "mode": "worst",
            "pea_min": report.pea_min,
            "tweets_scored": report.tweets_scored,
            "tweets_skipped": report.tweets_skipped,
        }),
        AgreementMode::All => serde_json::to_value(&report).expect("report serializes"),
    };
    let text = serde_json::to_string_pretty(&json).expect("json renders");
    std::fs::write(&args.out, text + "\n").map_err(|e| Error::io(&args.out, e))?;
    eprintln!(
        "[agreement] pea_max {:.4} pea_min {:.4} fleiss_kappa {:.4} ({} tweets, {} skipped) -> {}",
        report.pea_max,
        report.pea_min,
        report.fleiss_kappa,
        report.tweets_scored,
        report.tweets_skipped,
        args.out.display()
    );
    Ok(())
}

struct TrainSettings {
    seed: u64,
    restarts: usize,
    vocab_max_size: usize,
    vocab_min_count: usize,
    alpha: f64,
    binarize: bool,
    emolex_threshold: f64,
    config: TrainConfig,
}

fn train_settings(args: &TrainArgs, file: &FileConfig, seed: Option<u64>) -> Result<TrainSettings> {
    let mode_default = if args.task == TaskArg::Joint {
        TrainConfig::default_joint()
    } else {
        TrainConfig::default()
    };
    let seed = resolve(seed, file.get_u64("seed"), 0)?;
    let restarts = resolve(
        args.restarts,
        file.get_usize("restarts"),
        if args.model == ModelFamily::Mlp {
            mode_default.restarts
        } else {
            1
        },
    )?;
    let config = TrainConfig {
        max_epochs: resolve(
            args.max_epochs,
            file.get_usize("max_epochs"),
            mode_default.max_epochs,
        )?,
        patience: resolve(
            args.patience,
            file.get_usize("patience"),
            mode_default.patience,
        )?,
        lr_head: resolve(args.lr_head, file.get_f64("lr_head"), mode_default.lr_head)?,
        lr_encoder: resolve(
            args.lr_encoder,
            file.get_f64("lr_encoder"),
            mode_default.lr_encoder,
        )?,
        dropout: resolve(args.dropout, file.get_f64("dropout"), mode_default.dropout)?,
        seed,
        restarts,
        hidden_dim: resolve(
            args.hidden_dim,
            file.get_usize("hidden_dim"),
            mode_default.hidden_dim,
        )?,
    };
    config.validate()?;
    Ok(TrainSettings {
        seed,
        restarts,
        vocab_max_size: resolve(
            args.vocab_max_size,
            file.get_usize("vocab_max_size"),
            intergroup_core::features::DEFAULT_VOCAB_MAX_SIZE,
        )?,
        vocab_min_count: resolve(
            args.vocab_min_count,
            file.get_usize("vocab_min_count"),
            intergroup_core::features::DEFAULT_VOCAB_MIN_COUNT,
        )?,
        alpha: resolve(
            args.alpha,
            file.get_f64("alpha"),
            intergroup_core::features::DEFAULT_NB_ALPHA,
        )?,
        binarize: resolve(args.binarize, file.get_bool("binarize"), true)?,
        emolex_threshold: resolve(
            args.emolex_threshold,
            file.get_f64("emolex_threshold"),
            DEFAULT_EMOLEX_THRESHOLD,
        )?,
        config,
    })
}

fn load_stopwords(path: &Option<PathBuf>) -> Result<Vec<String>> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => {
            let content = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(content
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect())
        }
    }
}

fn fit_vocab(examples: &[LabeledExample], pre: &Preprocess, settings: &TrainSettings) -> Vocab {
    let docs: Vec<Vec<String>> = examples
        .iter()
        .map(|ex| pre.tokens(&ex.utterance.masked_text))
        .collect();
    let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
    build_vocab(
        refs.iter().copied(),
        settings.vocab_max_size,
        settings.vocab_min_count,
    )
}

fn multitask_inputs(
    examples: &[LabeledExample],
    vocab: &Vocab,
    pre: &Preprocess,
) -> Vec<MultitaskExample<f64>> {
    examples
        .iter()
        .map(|ex| MultitaskExample {
            x: vectorize(&pre.tokens(&ex.utterance.masked_text), vocab, pre.binarize),
            igr_positive: ex.igr() == IgrLabel::OutGroup,
            emotions: ex.emotions,
        })
        .collect()
}

pub fn run_train(args: &TrainArgs, file: &FileConfig, seed: Option<u64>) -> Result<()> {
    let settings = train_settings(args, file, seed)?;
    let train = load_examples(&args.train)?;
    let dev = load_examples(&args.dev)?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::Validation(
            "train and dev files must be non-empty".into(),
        ));
    }

    let task_ok = match args.model {
        ModelFamily::Majority | ModelFamily::Sentrule | ModelFamily::Nbsvm => {
            args.task == TaskArg::Igr
        }
        ModelFamily::Emolex => args.task == TaskArg::Emotion,
        ModelFamily::Mlp => true,
    };
    if !task_ok {
        return Err(Error::Validation(format!(
            "model {:?} does not support task {:?}",
            args.model, args.task
        )));
    }

    let stopwords = load_stopwords(&args.stopwords)?;
    let pre = Preprocess {
        binarize: settings.binarize,
        stopwords,
    };
    let empty_vocab = build_vocab(std::iter::empty(), 1, 1);

    let model = match args.model {
        ModelFamily::Majority => TrainedModel {
            vocab: empty_vocab,
            preprocess: pre,
            kind: ModelKind::Majority {
                label: train_majority(&train)?.label,
            },
        },
        ModelFamily::Sentrule => {
            let lexicon = match &args.sentiment_lexicon {
                Some(p) => SentimentLexicon::load(p)?,
                None => SentimentLexicon::bundled(),
            };
            TrainedModel {
                vocab: empty_vocab,
                preprocess: pre,
                kind: ModelKind::SentimentRule {
                    seed: settings.seed,
                    lexicon: sentiment_entries(&lexicon),
                },
            }
        }
        ModelFamily::Emolex => {
            let lexicon = match &args.lexicon {
                Some(p) => EmotionLexicon::load(p)?,
                None => EmotionLexicon::bundled(),
            };
            if settings.emolex_threshold <= 0.0 {
                return Err(Error::Config("emolex threshold must be positive".into()));
            }
            TrainedModel {
                vocab: empty_vocab,
                preprocess: pre,
                kind: ModelKind::EmoLex {
                    threshold: settings.emolex_threshold,
                    lexicon: emotion_entries(&lexicon),
                },
            }
        }
        ModelFamily::Nbsvm => {
            let vocab = fit_vocab(&train, &pre, &settings);
            let vectors: Vec<intergroup_core::SparseVec> = train
                .iter()
                .map(|ex| vectorize(&pre.tokens(&ex.utterance.masked_text), &vocab, false))
                .collect();
            let labels: Vec<IgrLabel> = train.iter().map(|ex| ex.igr()).collect();
            let opts = NbSvmOptions {
                alpha: settings.alpha,
                binarize: settings.binarize,
                ..NbSvmOptions::default()
            };
            let linear = train_nbsvm(&vectors, &labels, vocab.len(), &opts, &settings.config)?;
            let ratios = linear.nb_ratios.as_ref().expect("nbsvm stores ratios");
            TrainedModel {
                vocab,
                preprocess: pre,
                kind: ModelKind::NbSvm {
                    weights: linear.weights.clone(),
                    bias: linear.bias,
                    ratios: ratios.r.clone(),
                    alpha: ratios.alpha,
                },
            }
        }
        ModelFamily::Mlp => {
            let mode = match args.task {
                TaskArg::Igr => TrainMode::IgrOnly,
                TaskArg::Emotion => TrainMode::EmotionOnly,
                TaskArg::Joint => TrainMode::Joint,
            };
            let vocab = fit_vocab(&train, &pre, &settings);
            let train_inputs = multitask_inputs(&train, &vocab, &pre);
            let dev_inputs = multitask_inputs(&dev, &vocab, &pre);
            let outcomes: Vec<Result<MlpRestart>> = (0..settings.restarts)
                .into_par_iter()
                .map(|r| {
                    let config = TrainConfig {
                        seed: settings.seed.wrapping_add(r as u64),
                        ..settings.config.clone()
                    };
                    let outcome =
                        train_multitask(&train_inputs, &dev_inputs, vocab.len(), &config, mode)?;
                    Ok(MlpRestart::from_outcome(&outcome))
                })
                .collect();
            let restarts = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
            for (r, restart) in restarts.iter().enumerate() {
                eprintln!(
                    "[train] restart {r}: best epoch {} of {} run, dev metric {:.4}",
                    restart.best_epoch, restart.epochs_run, restart.dev_metric
                );
            }
            TrainedModel {
                vocab,
                preprocess: pre,
                kind: ModelKind::Mlp {
                    mode,
                    config: settings.config.clone(),
                    restarts,
                },
            }
        }
    };

    model.save(&args.out)?;
    eprintln!(
        "[train] saved {:?} model ({} restart(s)) to {}",
        args.model,
        model.n_restarts(),
        args.out.display()
    );
    Ok(())
}

fn compare_models(
    model: &TrainedModel,
    other: &TrainedModel,
    other_path: &Path,
    test: &[LabeledExample],
    resamples: usize,
    seed: u64,
    variant: BootstrapVariant,
) -> Result<Vec<ComparisonReport>> {
    let baseline = other_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| other_path.display().to_string());
    let mut out = Vec::new();
    let igr_golds: Vec<IgrLabel> = test.iter().map(|ex| ex.igr()).collect();
    let mine_best = model
        .predictor(model.best_restart())
        .expect("restart in range");
    let theirs_best = other
        .predictor(other.best_restart())
        .expect("restart in range");
    if model.predicts_igr() && other.predicts_igr() {
        let mine: Vec<IgrLabel> = test
            .iter()
            .map(|ex| mine_best.igr(model, &ex.utterance).expect("igr covered"))
            .collect();
        let theirs: Vec<IgrLabel> = test
            .iter()
            .map(|ex| theirs_best.igr(other, &ex.utterance).expect("igr covered"))
            .collect();
        let outcome = paired_bootstrap::<f64, _, _, _>(
            &mine,
            &theirs,
            &igr_golds,
            igr_macro_f1,
            resamples,
            seed,
            variant,
        )?;
        out.push(ComparisonReport {
            metric: format!("igr_macro_f1 vs {baseline}"),
            variant,
            delta: outcome.delta,
            p_value: outcome.p_value,
            orientation_violated: outcome.orientation_violated,
            resamples: outcome.resamples,
        });
    }
    if model.predicts_emotion() && other.predicts_emotion() {
        let golds: Vec<_> = test.iter().map(|ex| ex.emotions).collect();
        let mine: Vec<_> = test
            .iter()
            .map(|ex| {
                mine_best
                    .emotions(model, &ex.utterance)
                    .expect("emotion covered")
            })
            .collect();
        let theirs: Vec<_> = test
            .iter()
            .map(|ex| {
                theirs_best
                    .emotions(other, &ex.utterance)
                    .expect("emotion covered")
            })
            .collect();
        let outcome = paired_bootstrap::<f64, _, _, _>(
            &mine,
            &theirs,
            &golds,
            emotion_macro_f1,
            resamples,
            seed,
            variant,
        )?;
        out.push(ComparisonReport {
            metric: format!("emotion_macro_f1 vs {baseline}"),
            variant,
            delta: outcome.delta,
            p_value: outcome.p_value,
            orientation_violated: outcome.orientation_violated,
            resamples: outcome.resamples,
        });
    }
    if out.is_empty() {
        return Err(Error::Validation(
            "the two models share no task to compare on".into(),
        ));
    }
    Ok(out)
}

pub fn run_evaluate(args: &EvaluateArgs, file: &FileConfig, seed: Option<u64>) -> Result<()> {
    let model = TrainedModel::load(&args.model)?;
    let test = load_examples(&args.test)?;
    if test.is_empty() {
        return Err(Error::Validation("test file is empty".into()));
    }
    let seed = resolve(seed, file.get_u64("seed"), 0)?;
    let resamples = resolve(args.bootstrap, file.get_usize("bootstrap"), 10_000)?;
    if resamples < 1000 {
        return Err(Error::Config(format!(
            "bootstrap resamples must be at least 1000, got {resamples}"
        )));
    }
    let variant = if args.shift_bootstrap {
        BootstrapVariant::ShiftedDelta
    } else {
        BootstrapVariant::CountNonPositive
    };

    let mut report = EvalReport::default();
    let igr_golds: Vec<IgrLabel> = test.iter().map(|ex| ex.igr()).collect();
    if let Some(preds) = model.igr_predictions(&test) {
        report.igr = Some(igr_report(&preds, &igr_golds)?);
    }
    if let Some(preds) = model.emotion_predictions(&test) {
        let golds: Vec<_> = test.iter().map(|ex| ex.emotions).collect();
        report.emotion = Some(emotion_report(&preds, &golds, &igr_golds)?);
    }
    if let Some(compare) = &args.compare {
        let other = TrainedModel::load(compare)?;
        report.comparisons =
            compare_models(&model, &other, compare, &test, resamples, seed, variant)?;
    }

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&args.out, json + "\n").map_err(|e| Error::io(&args.out, e))?;
    if let Some(igr) = &report.igr {
        eprintln!(
            "[evaluate] IGR macro-F1 {:.4} (SD {:.4}) over {} restart(s)",
            igr.macro_f1.mean, igr.macro_f1.sd, igr.restarts
        );
    }
    if let Some(emo) = &report.emotion {
        eprintln!(
            "[evaluate] emotion macro-F1 {:.4} (SD {:.4}) over {} restart(s)",
            emo.macro_f1.mean, emo.macro_f1.sd, emo.restarts
        );
    }
    for cmp in &report.comparisons {
        eprintln!(
            "[evaluate] {}: delta {:.4}, p = {:.4}{}",
            cmp.metric,
            cmp.delta,
            cmp.p_value,
            if cmp.orientation_violated {
                " (orientation violated)"
            } else {
                ""
            }
        );
    }
    eprintln!("[evaluate] report written to {}", args.out.display());
    Ok(())
}

pub fn run_analyze(args: &AnalyzeArgs, file: &FileConfig) -> Result<()> {
    let examples = load_examples(&args.data)?;
    if examples.is_empty() {
        return Err(Error::Validation("data file is empty".into()));
    }
    let topk = resolve(args.topk, file.get_usize("topk"), 3)?;
    let top_n = resolve(args.top_features, file.get_usize("top_features"), 10)?;

    let mut concentration = BTreeMap::new();
    for e in Emotion::ALL {
        if let Some(conc) = target_concentration(&examples, e, topk)? {
            concentration.insert(e.name().to_string(), conc);
        }
    }
    let features = match &args.model {
        None => None,
        Some(path) => {
            let model = TrainedModel::load(path)?;
            match &model.kind {
                ModelKind::NbSvm {
                    weights,
                    bias,
                    ratios,
                    alpha,
                } => {
                    let linear = intergroup_core::LinearModel64 {
                        weights: weights.clone(),
                        bias: *bias,
                        nb_ratios: Some(intergroup_core::NbRatios64 {
                            r: ratios.clone(),
                            alpha: *alpha,
                        }),
                    };
                    Some(top_features(&linear, &model.vocab, top_n))
                }
                _ => {
                    return Err(Error::Validation(
                        "top features need a linear (nbsvm) model file".into(),
                    ))
                }
            }
        }
    };

    let report = AnalysisReport {
        distribution: Some(igr_emotion_distribution(&examples)?.retained()),
        cooccurrence: Some(cooccurrence_matrix(&examples)),
        target_concentration: concentration,
        top_features: features,
        eval: None,
    };
    emit_report(&report, &args.out)?;
    eprintln!(
        "[analyze] report over {} examples written to {}",
        examples.len(),
        args.out.display()
    );
    Ok(())
}
