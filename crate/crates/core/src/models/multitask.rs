//! Shared-encoder network with an IGR head and an 8-way emotion head.
//!
//! One dense ReLU encoder feeds both heads. Joint training alternates, per
//! training item, one gradient step on the IGR loss and one on the emotion
//! loss. Plain per-item SGD, no adaptive optimizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{Emotion, EmotionSet};
use crate::corpus::IgrLabel;
use crate::error::{Error, Result};
use crate::eval::{emotion_macro_f1, igr_macro_f1};
use crate::features::SparseVector;
use crate::scalar::Scalar;

use super::loss::{sigmoid, weighted_sigmoid_ce_grad};
use super::TrainConfig;

/// Which task(s) the training loop optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    IgrOnly,
    EmotionOnly,
    Joint,
}

/// One vectorized training example.
#[derive(Debug, Clone)]
pub struct MultitaskExample<F> {
    pub x: SparseVector<F>,
    /// Out-group is the positive class.
    pub igr_positive: bool,
    pub emotions: EmotionSet,
}

/// Shared-encoder two-head model. The encoder weight matrix is stored as one
/// row per vocabulary index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultitaskModel<F> {
    pub encoder_w: Vec<Vec<F>>,
    pub encoder_b: Vec<F>,
    pub igr_w: Vec<F>,
    pub igr_b: F,
    pub emotion_w: Vec<Vec<F>>,
    pub emotion_b: Vec<F>,
    /// Per-label weight on the positive term of the emotion loss:
    /// negatives/positives in the training data.
    pub pos_weights: Vec<F>,
    /// Labels with zero training positives are excluded from the loss.
    pub label_active: Vec<bool>,
    pub config: TrainConfig,
}

/// Training result: the best-dev parameters plus stopping metadata.
#[derive(Debug, Clone)]
pub struct TrainOutcome<F> {
    pub model: MultitaskModel<F>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub best_dev_metric: f64,
}

struct ForwardParts<F> {
    h_pre: Vec<F>,
    /// Head input: ReLU output, dropout-masked in train mode.
    h_in: Vec<F>,
    /// Inverted-dropout scale per hidden unit (1 when eval or kept).
    mask: Option<Vec<F>>,
}

impl<F: Scalar> MultitaskModel<F> {
    pub fn hidden_dim(&self) -> usize {
        self.encoder_b.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.encoder_w.len()
    }

    fn forward_parts(&self, x: &SparseVector<F>, rng: Option<&mut ChaCha8Rng>) -> ForwardParts<F> {
        let d = self.hidden_dim();
        let mut h_pre = self.encoder_b.clone();
        for (i, v) in x.iter() {
            let row = &self.encoder_w[i];
            for (h, &w) in h_pre.iter_mut().zip(row) {
                *h = *h + v * w;
            }
        }
        let h: Vec<F> = h_pre.iter().map(|&z| z.max(F::zero())).collect();
        match rng {
            Some(rng) if self.config.dropout > 0.0 => {
                let keep_scale = F::from_f64_lossy(1.0 / (1.0 - self.config.dropout));
                let mask: Vec<F> = (0..d)
                    .map(|_| {
                        if rng.gen::<f64>() < self.config.dropout {
                            F::zero()
                        } else {
                            keep_scale
                        }
                    })
                    .collect();
                let h_in = h.iter().zip(&mask).map(|(&a, &m)| a * m).collect();
                ForwardParts {
                    h_pre,
                    h_in,
                    mask: Some(mask),
                }
            }
            _ => ForwardParts {
                h_pre,
                h_in: h,
                mask: None,
            },
        }
    }

    fn igr_logit(&self, h_in: &[F]) -> F {
        self.igr_w
            .iter()
            .zip(h_in)
            .fold(self.igr_b, |acc, (&w, &h)| acc + w * h)
    }

    fn emotion_logit(&self, label: usize, h_in: &[F]) -> F {
        self.emotion_w[label]
            .iter()
            .zip(h_in)
            .fold(self.emotion_b[label], |acc, (&w, &h)| acc + w * h)
    }

    /// Forward pass. Pass an RNG to enable train-mode dropout on the head
    /// inputs; without one the pass is deterministic.
    pub fn forward(
        &self,
        x: &SparseVector<F>,
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> (F, [F; 8]) {
        let parts = self.forward_parts(x, dropout_rng);
        let igr_prob = sigmoid(self.igr_logit(&parts.h_in));
        let mut emotion_probs = [F::zero(); 8];
        for (label, slot) in emotion_probs.iter_mut().enumerate() {
            *slot = sigmoid(self.emotion_logit(label, &parts.h_in));
        }
        (igr_prob, emotion_probs)
    }

    /// Thresholded predictions; the empty emotion set is the no-emotion label.
    pub fn predict(
        &self,
        x: &SparseVector<F>,
        igr_threshold: F,
        emotion_threshold: F,
    ) -> (IgrLabel, EmotionSet) {
        let (igr_prob, emotion_probs) = self.forward(x, None);
        let igr = if igr_prob >= igr_threshold {
            IgrLabel::OutGroup
        } else {
            IgrLabel::InGroup
        };
        let set = Emotion::ALL
            .iter()
            .copied()
            .filter(|e| emotion_probs[e.wheel_position() as usize] >= emotion_threshold)
            .collect();
        (igr, set)
    }
}

fn init_matrix<F: Scalar>(
    rows: usize,
    cols: usize,
    fan_in: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<F>> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| F::from_f64_lossy(rng.gen_range(-bound..bound)))
                .collect()
        })
        .collect()
}

fn pos_weights<F: Scalar>(train: &[MultitaskExample<F>]) -> (Vec<F>, Vec<bool>) {
    let mut weights = vec![F::one(); 8];
    let mut active = vec![false; 8];
    for (slot, e) in Emotion::ALL.iter().enumerate() {
        let pos = train.iter().filter(|ex| ex.emotions.contains(*e)).count();
        if pos == 0 {
            continue;
        }
        active[slot] = true;
        let neg = train.len() - pos;
        weights[slot] = if neg == 0 {
            F::one()
        } else {
            F::from_usize_lossy(neg) / F::from_usize_lossy(pos)
        };
    }
    (weights, active)
}

/// Trains the shared-encoder model with early stopping on the dev metric:
/// IGR macro-F1, emotion macro-F1, or their mean in joint mode. Returns the
/// parameters of the best dev epoch. Bit-reproducible given the data order
/// and `config.seed`.
pub fn train_multitask<F: Scalar>(
    train: &[MultitaskExample<F>],
    dev: &[MultitaskExample<F>],
    vocab_size: usize,
    config: &TrainConfig,
    mode: TrainMode,
) -> Result<TrainOutcome<F>> {
    config.validate()?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::Validation(
            "train and dev sets must be non-empty".into(),
        ));
    }
    if vocab_size == 0 {
        return Err(Error::Validation("vocabulary must be non-empty".into()));
    }
    let needs_igr = mode != TrainMode::EmotionOnly;
    if needs_igr {
        let pos = train.iter().filter(|ex| ex.igr_positive).count();
        if pos == 0 || pos == train.len() {
            return Err(Error::Validation(
                "IGR training requires both classes in the training data".into(),
            ));
        }
    }
    let (weights, active) = pos_weights(train);

    let d = config.hidden_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = MultitaskModel {
        encoder_w: init_matrix(vocab_size, d, vocab_size, &mut rng),
        encoder_b: vec![F::zero(); d],
        igr_w: init_matrix(1, d, d, &mut rng).remove(0),
        igr_b: F::zero(),
        emotion_w: init_matrix(8, d, d, &mut rng),
        emotion_b: vec![F::zero(); 8],
        pos_weights: weights,
        label_active: active,
        config: config.clone(),
    };

    let lr_head = F::from_f64_lossy(config.lr_head);
    let lr_enc = F::from_f64_lossy(config.lr_encoder);

    let mut best: Option<(MultitaskModel<F>, usize, f64)> = None;
    let mut strikes = 0usize;
    let mut epochs_run = 0usize;
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.max_epochs {
        epochs_run = epoch;
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        for &idx in &order {
            let ex = &train[idx];
            match mode {
                TrainMode::IgrOnly => igr_step(&mut model, ex, lr_head, lr_enc, &mut rng),
                TrainMode::EmotionOnly => emotion_step(&mut model, ex, lr_head, lr_enc, &mut rng),
                TrainMode::Joint => {
                    igr_step(&mut model, ex, lr_head, lr_enc, &mut rng);
                    emotion_step(&mut model, ex, lr_head, lr_enc, &mut rng);
                }
            }
        }
        let metric = dev_metric(&model, dev, mode);
        let improved = best.as_ref().is_none_or(|(_, _, b)| metric > *b);
        if improved {
            best = Some((model.clone(), epoch, metric));
            strikes = 0;
        } else {
            strikes += 1;
            if strikes == config.patience {
                break;
            }
        }
    }

    let (model, best_epoch, best_dev_metric) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        model,
        best_epoch,
        epochs_run,
        best_dev_metric,
    })
}

fn backprop_encoder<F: Scalar>(
    model: &mut MultitaskModel<F>,
    ex: &MultitaskExample<F>,
    parts: &ForwardParts<F>,
    dh_in: &[F],
    lr_enc: F,
) {
    // Through dropout (scale by the mask) and ReLU (gate on pre-activation).
    let dh: Vec<F> = dh_in
        .iter()
        .enumerate()
        .map(|(j, &g)| {
            let masked = match &parts.mask {
                Some(mask) => g * mask[j],
                None => g,
            };
            if parts.h_pre[j] > F::zero() {
                masked
            } else {
                F::zero()
            }
        })
        .collect();
    for (bj, &gj) in model.encoder_b.iter_mut().zip(&dh) {
        *bj = *bj - lr_enc * gj;
    }
    for (i, v) in ex.x.iter() {
        let row = &mut model.encoder_w[i];
        for (wj, &gj) in row.iter_mut().zip(&dh) {
            *wj = *wj - lr_enc * v * gj;
        }
    }
}

fn igr_step<F: Scalar>(
    model: &mut MultitaskModel<F>,
    ex: &MultitaskExample<F>,
    lr_head: F,
    lr_enc: F,
    rng: &mut ChaCha8Rng,
) {
    let parts = model.forward_parts(&ex.x, Some(rng));
    let z = model.igr_logit(&parts.h_in);
    let dz = weighted_sigmoid_ce_grad(z, ex.igr_positive, F::one());
    let dh_in: Vec<F> = model.igr_w.iter().map(|&w| dz * w).collect();
    for (wj, &hj) in model.igr_w.iter_mut().zip(&parts.h_in) {
        *wj = *wj - lr_head * dz * hj;
    }
    model.igr_b = model.igr_b - lr_head * dz;
    backprop_encoder(model, ex, &parts, &dh_in, lr_enc);
}

fn emotion_step<F: Scalar>(
    model: &mut MultitaskModel<F>,
    ex: &MultitaskExample<F>,
    lr_head: F,
    lr_enc: F,
    rng: &mut ChaCha8Rng,
) {
    let parts = model.forward_parts(&ex.x, Some(rng));
    let d = model.hidden_dim();
    let mut dz = [F::zero(); 8];
    for (slot, e) in Emotion::ALL.iter().enumerate() {
        if !model.label_active[slot] {
            continue;
        }
        let z = model.emotion_logit(slot, &parts.h_in);
        dz[slot] = weighted_sigmoid_ce_grad(z, ex.emotions.contains(*e), model.pos_weights[slot]);
    }
    let mut dh_in = vec![F::zero(); d];
    for (slot, &g) in dz.iter().enumerate() {
        if g == F::zero() {
            continue;
        }
        for (acc, &w) in dh_in.iter_mut().zip(&model.emotion_w[slot]) {
            *acc = *acc + g * w;
        }
    }
    for (slot, &g) in dz.iter().enumerate() {
        if g == F::zero() {
            continue;
        }
        for (wj, &hj) in model.emotion_w[slot].iter_mut().zip(&parts.h_in) {
            *wj = *wj - lr_head * g * hj;
        }
        model.emotion_b[slot] = model.emotion_b[slot] - lr_head * g;
    }
    backprop_encoder(model, ex, &parts, &dh_in, lr_enc);
}

fn dev_metric<F: Scalar>(
    model: &MultitaskModel<F>,
    dev: &[MultitaskExample<F>],
    mode: TrainMode,
) -> f64 {
    let half = F::from_f64_lossy(0.5);
    let preds: Vec<(IgrLabel, EmotionSet)> = dev
        .iter()
        .map(|ex| model.predict(&ex.x, half, half))
        .collect();
    let igr_golds: Vec<IgrLabel> = dev
        .iter()
        .map(|ex| {
            if ex.igr_positive {
                IgrLabel::OutGroup
            } else {
                IgrLabel::InGroup
            }
        })
        .collect();
    let emo_golds: Vec<EmotionSet> = dev.iter().map(|ex| ex.emotions).collect();
    let igr_preds: Vec<IgrLabel> = preds.iter().map(|(l, _)| *l).collect();
    let emo_preds: Vec<EmotionSet> = preds.iter().map(|(_, s)| *s).collect();
    match mode {
        TrainMode::IgrOnly => igr_macro_f1::<f64>(&igr_preds, &igr_golds),
        TrainMode::EmotionOnly => emotion_macro_f1::<f64>(&emo_preds, &emo_golds),
        TrainMode::Joint => {
            (igr_macro_f1::<f64>(&igr_preds, &igr_golds)
                + emotion_macro_f1::<f64>(&emo_preds, &emo_golds))
                / 2.0
        }
    }
}
