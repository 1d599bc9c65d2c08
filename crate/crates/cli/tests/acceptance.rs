//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values. Runtime bounds are asserted where stated.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use intergroup_core::agreement::{fleiss_kappa, pea_from_sets, PairMode};
use intergroup_core::annotation::{
    aggregate_labels, label_utterances, split_dataset, AnnotationRecord, DatasetSplit, Emotion,
    EmotionSet, LabeledExample,
};
use intergroup_core::corpus::{build_utterances, IgrLabel, MemberDirectory, TRAIN_PLACEHOLDER};
use intergroup_core::eval::{
    igr_macro_f1, paired_bootstrap, prf_binary, prf_per_emotion, BootstrapVariant,
};
use intergroup_core::features::{build_vocab, tokenize, vectorize, SentimentLexicon, Vocab};
use intergroup_core::models::loss::{
    hinge_grad, hinge_loss, weighted_sigmoid_ce, weighted_sigmoid_ce_grad,
};
use intergroup_core::models::{
    predict_sentiment_rule, train_majority, train_multitask, train_nbsvm, MultitaskExample,
    NbSvmOptions, TrainConfig, TrainMode,
};
use intergroup_core::synth::{generate_corpus, SynthConfig, OUTGROUP_CUE};

fn random_emotion_set(rng: &mut impl Rng) -> EmotionSet {
    Emotion::ALL
        .iter()
        .copied()
        .filter(|_| rng.gen_bool(0.3))
        .collect()
}

// ---------------------------------------------------------------------------
// Criterion 1: metric implementations match an independent brute-force
// confusion counter on 200 random instances (n <= 50), exactly, in < 5 s.
// ---------------------------------------------------------------------------
#[test]
fn criterion_1_metric_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let n = rng.gen_range(1..=50);
        let golds: Vec<IgrLabel> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    IgrLabel::OutGroup
                } else {
                    IgrLabel::InGroup
                }
            })
            .collect();
        let preds: Vec<IgrLabel> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    IgrLabel::OutGroup
                } else {
                    IgrLabel::InGroup
                }
            })
            .collect();
        let got = prf_binary::<f64, IgrLabel>(&preds, &golds, IgrLabel::OutGroup).unwrap();
        // Brute-force counter, written independently of the library path.
        let mut tp = 0;
        let mut fp = 0;
        let mut fn_ = 0;
        for i in 0..n {
            match (
                preds[i] == IgrLabel::OutGroup,
                golds[i] == IgrLabel::OutGroup,
            ) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let p = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let r = if tp + fn_ == 0 {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        };
        assert_eq!(got.precision, p);
        assert_eq!(got.recall, r);
        assert_eq!(got.f1, f1);
        assert_eq!(got.support, tp + fn_);

        let egolds: Vec<EmotionSet> = (0..n).map(|_| random_emotion_set(&mut rng)).collect();
        let epreds: Vec<EmotionSet> = (0..n).map(|_| random_emotion_set(&mut rng)).collect();
        let per = prf_per_emotion::<f64>(&epreds, &egolds).unwrap();
        for e in Emotion::ALL {
            let mut tp = 0;
            let mut fp = 0;
            let mut fn_ = 0;
            for i in 0..n {
                match (epreds[i].contains(e), egolds[i].contains(e)) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            match per.emotions.get(&e) {
                None => assert_eq!(tp + fp + fn_, 0),
                Some(prf) => {
                    let p = if tp + fp == 0 {
                        0.0
                    } else {
                        tp as f64 / (tp + fp) as f64
                    };
                    let r = if tp + fn_ == 0 {
                        0.0
                    } else {
                        tp as f64 / (tp + fn_) as f64
                    };
                    let f1 = if p + r == 0.0 {
                        0.0
                    } else {
                        2.0 * p * r / (p + r)
                    };
                    assert_eq!((prf.precision, prf.recall, prf.f1), (p, r, f1));
                }
            }
        }
        // The no-emotion task is the binary "set is empty" task.
        let mut tp = 0;
        let mut fp = 0;
        let mut fn_ = 0;
        for i in 0..n {
            match (epreds[i].is_empty(), egolds[i].is_empty()) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        match per.no_emotion {
            None => assert_eq!(tp + fp + fn_, 0),
            Some(prf) => {
                let p = if tp + fp == 0 {
                    0.0
                } else {
                    tp as f64 / (tp + fp) as f64
                };
                assert_eq!(prf.precision, p);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 (metric oracle equivalence): PASS — 200 instances exact in {:.2}s",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: 2-of-3 aggregation matches the counting oracle on the full
// per-label enumeration and 10,000 sampled joint patterns. Exact.
// ---------------------------------------------------------------------------
#[test]
fn criterion_2_aggregation_exhaustion() {
    let records = |sets: [EmotionSet; 3]| -> Vec<AnnotationRecord> {
        sets.iter()
            .enumerate()
            .map(|(i, &emotions)| AnnotationRecord {
                tweet_id: "t".into(),
                annotator_id: format!("a{i}"),
                emotions,
            })
            .collect()
    };
    let oracle = |sets: &[EmotionSet; 3]| -> EmotionSet {
        Emotion::ALL
            .iter()
            .copied()
            .filter(|&e| sets.iter().filter(|s| s.contains(e)).count() >= 2)
            .collect()
    };

    // Full enumeration per single label: every on/off pattern of 3 annotators
    // for each of the 8 emotions.
    let mut checked = 0usize;
    for e in Emotion::ALL {
        for pattern in 0..8u8 {
            let mut sets = [EmotionSet::EMPTY; 3];
            for (a, set) in sets.iter_mut().enumerate() {
                if pattern & (1 << a) != 0 {
                    set.insert(e);
                }
            }
            assert_eq!(aggregate_labels(&records(sets)).unwrap(), oracle(&sets));
            checked += 1;
        }
    }

    // 10,000 sampled joint patterns over all 8 labels.
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..10_000 {
        let sets = [
            random_emotion_set(&mut rng),
            random_emotion_set(&mut rng),
            random_emotion_set(&mut rng),
        ];
        assert_eq!(aggregate_labels(&records(sets)).unwrap(), oracle(&sets));
        checked += 1;
    }
    println!("ACCEPTANCE 2 (aggregation exhaustion): PASS — {checked} vote patterns exact");
}

// ---------------------------------------------------------------------------
// Criterion 3: agreement metrics behave as stated, in < 10 s.
// ---------------------------------------------------------------------------
#[test]
fn criterion_3_agreement_metrics() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);

    // PEA on identical annotator sets is 1.0 (best pairing).
    let identical: Vec<Vec<EmotionSet>> = (0..100)
        .map(|_| {
            let s = random_emotion_set(&mut rng);
            vec![s, s, s]
        })
        .collect();
    assert_eq!(
        pea_from_sets::<f64>(&identical, PairMode::Best)
            .unwrap()
            .value,
        1.0
    );

    // Opposite singletons score 0 in both modes.
    let opposite = vec![vec![
        EmotionSet::single(Emotion::Admiration),
        EmotionSet::single(Emotion::Disgust),
    ]];
    for mode in [PairMode::Best, PairMode::Worst] {
        assert_eq!(pea_from_sets::<f64>(&opposite, mode).unwrap().value, 0.0);
    }

    // Worst <= Best over 1,000 random instances.
    for _ in 0..1000 {
        let tweets: Vec<Vec<EmotionSet>> = (0..5)
            .map(|_| (0..3).map(|_| random_emotion_set(&mut rng)).collect())
            .collect();
        let best = pea_from_sets::<f64>(&tweets, PairMode::Best).unwrap().value;
        let worst = pea_from_sets::<f64>(&tweets, PairMode::Worst)
            .unwrap()
            .value;
        assert!(worst <= best + 1e-12, "worst {worst} > best {best}");
    }

    // Fleiss kappa: perfect agreement is 1; uniform random raters over two
    // categories at N=10,000 sit within |kappa| < 0.05.
    let perfect: Vec<Vec<usize>> = (0..50)
        .map(|i| if i % 2 == 0 { vec![3, 0] } else { vec![0, 3] })
        .collect();
    assert_eq!(fleiss_kappa::<f64>(&perfect).unwrap(), 1.0);
    let random_counts: Vec<Vec<usize>> = (0..10_000)
        .map(|_| {
            let on = (0..3).filter(|_| rng.gen_bool(0.5)).count();
            vec![3 - on, on]
        })
        .collect();
    let kappa = fleiss_kappa::<f64>(&random_counts).unwrap();
    assert!(kappa.abs() < 0.05, "kappa {kappa}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 3 (agreement metrics): PASS — kappa(random)={kappa:.4} in {:.2}s",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic gradients match central finite differences within
// relative error 1e-4 over 100 random 20-dimensional instances per loss.
// ---------------------------------------------------------------------------
#[test]
fn criterion_4_gradient_checks() {
    let rel_err = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-8);
    let h = 1e-5;
    let dim = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut max_err = 0.0f64;

    for _ in 0..100 {
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let target = rng.gen_bool(0.5);
        let pos_weight = rng.gen_range(0.5..4.0);
        let z = |w: &[f64]| -> f64 { w.iter().zip(&x).map(|(a, b)| a * b).sum() };
        let g = weighted_sigmoid_ce_grad(z(&w), target, pos_weight);
        for i in 0..dim {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[i] += h;
            wm[i] -= h;
            let fd = (weighted_sigmoid_ce(z(&wp), target, pos_weight)
                - weighted_sigmoid_ce(z(&wm), target, pos_weight))
                / (2.0 * h);
            let err = rel_err(g * x[i], fd);
            max_err = max_err.max(err);
            assert!(err < 1e-4, "sigmoid ce dim {i}: rel err {err}");
        }
    }

    let mut done = 0;
    while done < 100 {
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bias: f64 = rng.gen_range(-0.5..0.5);
        let y = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let lambda: f64 = rng.gen_range(0.001..0.1);
        let score: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + bias;
        // Central differences are meaningless at the hinge kink; redraw.
        if (1.0 - y * score).abs() < 1e-3 {
            continue;
        }
        done += 1;
        let (gw, gb) = hinge_grad(&w, bias, &x, y, lambda);
        for i in 0..dim {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[i] += h;
            wm[i] -= h;
            let fd = (hinge_loss(&wp, bias, &x, y, lambda) - hinge_loss(&wm, bias, &x, y, lambda))
                / (2.0 * h);
            let err = rel_err(gw[i], fd);
            max_err = max_err.max(err);
            assert!(err < 1e-4, "hinge dim {i}: rel err {err}");
        }
        let fd_b = (hinge_loss(&w, bias + h, &x, y, lambda)
            - hinge_loss(&w, bias - h, &x, y, lambda))
            / (2.0 * h);
        assert!(rel_err(gb, fd_b) < 1e-4);
    }
    println!("ACCEPTANCE 4 (gradient checks): PASS — max relative error {max_err:.2e}");
}

// ---------------------------------------------------------------------------
// Criterion 5: experiment-ladder ordering on the n=3,000 synthetic corpus.
// ---------------------------------------------------------------------------

struct Prepared {
    split: DatasetSplit,
    vocab: Vocab,
}

fn prepare_corpus(n: usize, seed: u64) -> Prepared {
    let config = SynthConfig {
        n_tweets: n,
        seed,
        ..SynthConfig::default()
    };
    let corpus = generate_corpus(&config).unwrap();
    let mut dir = MemberDirectory::new();
    for m in &corpus.members {
        dir.insert(m.clone()).unwrap();
    }
    let (utterances, skipped) = build_utterances(&corpus.tweets, &dir, TRAIN_PLACEHOLDER);
    assert_eq!(skipped, 0);
    let (examples, _) = label_utterances(&utterances, &corpus.annotations).unwrap();
    let split = split_dataset(&examples, (0.8, 0.1, 0.1), seed).unwrap();
    let docs: Vec<Vec<String>> = split
        .train
        .iter()
        .map(|ex| tokenize(&ex.utterance.masked_text))
        .collect();
    let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
    let vocab = build_vocab(refs.iter().copied(), 20_000, 2);
    Prepared { split, vocab }
}

fn count_vectors(examples: &[LabeledExample], vocab: &Vocab) -> Vec<intergroup_core::SparseVec> {
    examples
        .iter()
        .map(|ex| vectorize(&tokenize(&ex.utterance.masked_text), vocab, false))
        .collect()
}

fn mlp_inputs(examples: &[LabeledExample], vocab: &Vocab) -> Vec<MultitaskExample<f64>> {
    examples
        .iter()
        .map(|ex| MultitaskExample {
            x: vectorize(&tokenize(&ex.utterance.masked_text), vocab, true),
            igr_positive: ex.igr() == IgrLabel::OutGroup,
            emotions: ex.emotions,
        })
        .collect()
}

#[test]
fn criterion_5_experiment_ladder() {
    let prepared = prepare_corpus(3000, 7);
    let split = &prepared.split;
    let vocab = &prepared.vocab;
    let test_golds: Vec<IgrLabel> = split.test.iter().map(|ex| ex.igr()).collect();
    let budget = 60.0f64;

    // Majority class.
    let t0 = Instant::now();
    let majority = train_majority(&split.train).unwrap();
    let majority_time = t0.elapsed().as_secs_f64();
    let preds: Vec<IgrLabel> = split.test.iter().map(|_| majority.predict()).collect();
    let f1_majority = igr_macro_f1::<f64>(&preds, &test_golds);

    // Sentiment rule.
    let t0 = Instant::now();
    let lexicon = SentimentLexicon::bundled();
    let sentrule_time = t0.elapsed().as_secs_f64();
    let preds: Vec<IgrLabel> = split
        .test
        .iter()
        .map(|ex| predict_sentiment_rule(&ex.utterance, &lexicon, 7))
        .collect();
    let f1_sentrule = igr_macro_f1::<f64>(&preds, &test_golds);

    // NB-SVM.
    let t0 = Instant::now();
    let train_vecs = count_vectors(&split.train, vocab);
    let labels: Vec<IgrLabel> = split.train.iter().map(|ex| ex.igr()).collect();
    let nbsvm = train_nbsvm(
        &train_vecs,
        &labels,
        vocab.len(),
        &NbSvmOptions::default(),
        &TrainConfig::default(),
    )
    .unwrap();
    let nbsvm_time = t0.elapsed().as_secs_f64();
    let test_vecs = count_vectors(&split.test, vocab);
    let preds: Vec<IgrLabel> = test_vecs.iter().map(|x| nbsvm.predict(x)).collect();
    let f1_nbsvm = igr_macro_f1::<f64>(&preds, &test_golds);

    // Shared-encoder model, IGR-only and joint, 3 restarts each.
    let train_inputs = mlp_inputs(&split.train, vocab);
    let dev_inputs = mlp_inputs(&split.dev, vocab);
    let test_inputs = mlp_inputs(&split.test, vocab);
    let mut restart_means = BTreeMap::new();
    let mut mlp_max_time = 0.0f64;
    for (name, mode, base) in [
        ("igr_only", TrainMode::IgrOnly, TrainConfig::default()),
        ("joint", TrainMode::Joint, TrainConfig::default_joint()),
    ] {
        let mut f1s = Vec::new();
        for restart in 0..3u64 {
            let config = TrainConfig {
                seed: 7 + restart,
                ..base.clone()
            };
            let t0 = Instant::now();
            let outcome =
                train_multitask(&train_inputs, &dev_inputs, vocab.len(), &config, mode).unwrap();
            let elapsed = t0.elapsed().as_secs_f64();
            mlp_max_time = mlp_max_time.max(elapsed);
            assert!(
                elapsed < budget,
                "{name} restart {restart} took {elapsed:.1}s"
            );
            let preds: Vec<IgrLabel> = test_inputs
                .iter()
                .map(|ex| outcome.model.predict(&ex.x, 0.5, 0.5).0)
                .collect();
            f1s.push(igr_macro_f1::<f64>(&preds, &test_golds));
        }
        restart_means.insert(name, f1s.iter().sum::<f64>() / f1s.len() as f64);
    }
    let f1_igr_only = restart_means["igr_only"];
    let f1_joint = restart_means["joint"];

    for (name, secs) in [
        ("majority", majority_time),
        ("sentrule", sentrule_time),
        ("nbsvm", nbsvm_time),
        ("mlp", mlp_max_time),
    ] {
        assert!(secs < budget, "{name} training took {secs:.1}s");
    }
    assert!(
        f1_majority < f1_sentrule && f1_sentrule < f1_nbsvm,
        "ladder violated: majority {f1_majority:.4}, sentrule {f1_sentrule:.4}, nbsvm {f1_nbsvm:.4}"
    );
    assert!(
        f1_joint >= f1_igr_only - 0.005,
        "joint {f1_joint:.4} fell more than 0.5 points below igr-only {f1_igr_only:.4}"
    );
    println!(
        "ACCEPTANCE 5 (experiment ladder): PASS — majority {f1_majority:.3} < sentrule {f1_sentrule:.3} \
         < nbsvm {f1_nbsvm:.3}; joint {f1_joint:.3} vs igr-only {f1_igr_only:.3}; slowest model {mlp_max_time:.1}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: bootstrap calibration, < 30 s.
// ---------------------------------------------------------------------------
#[test]
fn criterion_6_bootstrap_calibration() {
    let start = Instant::now();
    let n = 300;
    let golds: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    let f1 = |preds: &[bool], golds: &[bool]| -> f64 {
        prf_binary::<f64, bool>(preds, golds, true)
            .map(|p| p.f1)
            .unwrap_or(0.0)
    };

    // System a flips 24 labels; system b makes the same mistakes plus 15
    // more, planting roughly a 5-point F1 gap with nested errors.
    let mut preds_a = golds.clone();
    for k in 0..24 {
        let idx = (k * 12 + 5) % n;
        preds_a[idx] = !preds_a[idx];
    }
    let mut preds_b = preds_a.clone();
    for k in 0..15 {
        let idx = (k * 17 + 3) % n;
        if preds_b[idx] == golds[idx] {
            preds_b[idx] = !preds_b[idx];
        }
    }
    let gap = f1(&preds_a, &golds) - f1(&preds_b, &golds);
    assert!(
        gap > 0.035 && gap < 0.075,
        "planted gap {gap:.4} strayed from ~5 points"
    );

    let mut rejections = 0;
    for seed in 0..10u64 {
        let outcome = paired_bootstrap::<f64, _, _, _>(
            &preds_a,
            &preds_b,
            &golds,
            |p, g| f1(p, g),
            10_000,
            seed,
            BootstrapVariant::CountNonPositive,
        )
        .unwrap();
        if outcome.p_value < 0.05 {
            rejections += 1;
        }
    }
    assert!(
        rejections >= 9,
        "only {rejections}/10 seeds rejected the null"
    );

    for seed in 0..10u64 {
        let outcome = paired_bootstrap::<f64, _, _, _>(
            &preds_a,
            &preds_a,
            &golds,
            |p, g| f1(p, g),
            10_000,
            seed,
            BootstrapVariant::CountNonPositive,
        )
        .unwrap();
        assert!(
            outcome.p_value >= 0.5,
            "identical systems gave p {}",
            outcome.p_value
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 6 (bootstrap calibration): PASS — gap {gap:.3}, {rejections}/10 rejections in {:.2}s",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: at n=10,000 the generated label distribution matches the
// configured proportions within 2 points in every cell.
// ---------------------------------------------------------------------------
#[test]
fn criterion_7_distribution_reproduction() {
    let config = SynthConfig {
        n_tweets: 10_000,
        ..SynthConfig::default()
    };
    let corpus = generate_corpus(&config).unwrap();
    let table = intergroup_core::analysis::igr_emotion_distribution(&corpus.gold).unwrap();
    let expected = &config.emotion_given_igr;
    let mut max_dev = 0.0f64;
    let mut check = |label: &str, slot: usize| {
        let row = table.row(label).unwrap();
        let want_in = 100.0 * expected.in_group[slot];
        let want_out = 100.0 * expected.out_group[slot];
        let want_all = (want_in + want_out) / 2.0; // IGR is drawn uniformly
        for (got, want, col) in [
            (row.in_group, want_in, "in"),
            (row.out_group, want_out, "out"),
            (row.all, want_all, "all"),
        ] {
            let dev = (got - want).abs();
            max_dev = max_dev.max(dev);
            assert!(dev <= 2.0, "{label}/{col}: {got:.2} vs {want:.2}");
        }
    };
    for (i, e) in Emotion::ALL.iter().enumerate() {
        check(e.name(), i);
    }
    check("no_emotion", 8);
    println!(
        "ACCEPTANCE 7 (distribution reproduction): PASS — max cell deviation {max_dev:.2} points"
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: the planted out-group cue lands in the NB-SVM top-5
// out-group features.
// ---------------------------------------------------------------------------
#[test]
fn criterion_8_feature_recovery() {
    let prepared = prepare_corpus(3000, 7);
    let vocab = &prepared.vocab;
    let train_vecs = count_vectors(&prepared.split.train, vocab);
    let labels: Vec<IgrLabel> = prepared.split.train.iter().map(|ex| ex.igr()).collect();
    let model = train_nbsvm(
        &train_vecs,
        &labels,
        vocab.len(),
        &NbSvmOptions::default(),
        &TrainConfig::default(),
    )
    .unwrap();
    let top = intergroup_core::analysis::top_features(&model, vocab, 5);
    let out_ngrams: Vec<&str> = top.out_group.iter().map(|(g, _)| g.as_str()).collect();
    assert!(
        out_ngrams.contains(&OUTGROUP_CUE),
        "out-group top-5 {out_ngrams:?} misses {OUTGROUP_CUE:?}"
    );
    println!("ACCEPTANCE 8 (feature recovery): PASS — out-group top-5 {out_ngrams:?}");
}

// ---------------------------------------------------------------------------
// Criterion 9: the full CLI pipeline, run twice with the same seeds,
// produces byte-identical output files.
// ---------------------------------------------------------------------------
#[test]
fn criterion_9_pipeline_determinism() {
    let tmp = tempfile::tempdir().unwrap();

    fn stage(args: &[&str]) {
        let output = Command::new(env!("CARGO_BIN_EXE_intergroup-lens"))
            .args(args)
            .output()
            .expect("stage runs");
        assert!(
            output.status.success(),
            "stage {args:?} failed:\n{}",
            String::from_utf8_lossy(&output.stderr)
        );
    }

    fn run(dir: &Path) {
        let p = |rel: &str| dir.join(rel).display().to_string();
        stage(&["synth", "--n", "600", "--seed", "11", "--out", &p("")]);
        stage(&[
            "ingest",
            "--tweets",
            &p("tweets.jsonl"),
            "--members",
            &p("members.tsv"),
            "--out",
            &p("utterances.jsonl"),
            "--seed",
            "11",
        ]);
        stage(&[
            "aggregate",
            "--annotations",
            &p("annotations.jsonl"),
            "--utterances",
            &p("utterances.jsonl"),
            "--out",
            &p("splits"),
            "--seed",
            "11",
        ]);
        stage(&[
            "agreement",
            "--annotations",
            &p("annotations.jsonl"),
            "--mode",
            "all",
            "--out",
            &p("agreement.json"),
        ]);
        stage(&[
            "train",
            "--task",
            "joint",
            "--model",
            "mlp",
            "--train",
            &p("splits/train.jsonl"),
            "--dev",
            &p("splits/dev.jsonl"),
            "--seed",
            "11",
            "--hidden-dim",
            "64",
            "--restarts",
            "2",
            "--out",
            &p("mlp.json"),
        ]);
        stage(&[
            "train",
            "--task",
            "igr",
            "--model",
            "nbsvm",
            "--train",
            &p("splits/train.jsonl"),
            "--dev",
            &p("splits/dev.jsonl"),
            "--seed",
            "11",
            "--out",
            &p("nbsvm.json"),
        ]);
        stage(&[
            "evaluate",
            "--model",
            &p("mlp.json"),
            "--test",
            &p("splits/test.jsonl"),
            "--compare",
            &p("nbsvm.json"),
            "--bootstrap",
            "2000",
            "--seed",
            "11",
            "--out",
            &p("eval.json"),
        ]);
        stage(&[
            "analyze",
            "--data",
            &p("gold.jsonl"),
            "--model",
            &p("nbsvm.json"),
            "--topk",
            "3",
            "--out",
            &p("reports"),
        ]);
    }

    let (dir_a, dir_b) = (tmp.path().join("a"), tmp.path().join("b"));
    std::fs::create_dir_all(&dir_a).unwrap();
    std::fs::create_dir_all(&dir_b).unwrap();
    run(&dir_a);
    run(&dir_b);

    fn collect(dir: &Path, base: &Path, out: &mut Vec<String>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                collect(&path, base, out);
            } else {
                out.push(path.strip_prefix(base).unwrap().display().to_string());
            }
        }
    }
    let mut files = Vec::new();
    collect(&dir_a, &dir_a, &mut files);
    files.sort();
    assert!(
        files.len() >= 14,
        "expected the full file set, found {files:?}"
    );
    for rel in &files {
        let a = std::fs::read(dir_a.join(rel)).unwrap();
        let b = std::fs::read(dir_b.join(rel)).unwrap();
        assert_eq!(a, b, "{rel} differs between runs");
    }
    println!(
        "ACCEPTANCE 9 (pipeline determinism): PASS — {} output files byte-identical",
        files.len()
    );
}
