//! Linear classifier over NB-ratio-scaled n-gram features.

use serde::{Deserialize, Serialize};

use crate::corpus::IgrLabel;
use crate::error::{Error, Result};
use crate::features::{nb_log_count_ratios, NbRatios, SparseVector};
use crate::scalar::Scalar;

use super::TrainConfig;

/// Linear decision function. When `nb_ratios` is present, inputs are
/// transformed to `r o binarize(x)` before scoring. Out-group is the positive
/// class: scores `>= 0` predict out-group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel<F> {
    pub weights: Vec<F>,
    pub bias: F,
    pub nb_ratios: Option<NbRatios<F>>,
}

impl<F: Scalar> LinearModel<F> {
    /// Features actually fed to the decision function.
    pub fn features(&self, x: &SparseVector<F>) -> SparseVector<F> {
        match &self.nb_ratios {
            Some(r) => r.transform(x),
            None => x.clone(),
        }
    }

    pub fn decision(&self, x: &SparseVector<F>) -> F {
        self.features(x).dot(&self.weights) + self.bias
    }

    pub fn predict(&self, x: &SparseVector<F>) -> IgrLabel {
        if self.decision(x) >= F::zero() {
            IgrLabel::OutGroup
        } else {
            IgrLabel::InGroup
        }
    }

    /// Per-feature signed contribution when the feature fires: weight scaled
    /// by its NB ratio where one applies.
    pub fn effective_weight(&self, index: usize) -> F {
        match &self.nb_ratios {
            Some(r) => self.weights[index] * r.r[index],
            None => self.weights[index],
        }
    }
}

/// Hyperparameters of the hinge-loss subgradient loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearTrainParams<F> {
    pub l2: F,
    pub lr: F,
    pub iterations: usize,
}

impl<F: Scalar> Default for LinearTrainParams<F> {
    fn default() -> Self {
        LinearTrainParams {
            l2: F::from_f64_lossy(1e-4),
            lr: F::from_f64_lossy(0.5),
            iterations: 300,
        }
    }
}

/// NB-SVM feature options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbSvmOptions<F> {
    pub alpha: F,
    pub binarize: bool,
    pub train: LinearTrainParams<F>,
}

impl<F: Scalar> Default for NbSvmOptions<F> {
    fn default() -> Self {
        NbSvmOptions {
            alpha: F::from_f64_lossy(crate::features::DEFAULT_NB_ALPHA),
            binarize: true,
            train: LinearTrainParams::default(),
        }
    }
}

/// Full-batch subgradient descent on the L2-regularized hinge objective.
/// Updates average the per-example subgradients, so duplicating the training
/// multiset leaves the learned decision function unchanged. With no sampled
/// randomness the run is deterministic for any seed.
pub fn train_linear_svm<F: Scalar>(
    features: &[SparseVector<F>],
    targets: &[F],
    dim: usize,
    params: &LinearTrainParams<F>,
) -> (Vec<F>, F) {
    let n = F::from_usize_lossy(features.len());
    let mut w = vec![F::zero(); dim];
    let mut b = F::zero();
    for _ in 0..params.iterations {
        let mut gw: Vec<F> = w.iter().map(|&wi| params.l2 * wi).collect();
        let mut gb = F::zero();
        for (x, &y) in features.iter().zip(targets) {
            let margin = y * (x.dot(&w) + b);
            if margin < F::one() {
                for (i, v) in x.iter() {
                    gw[i] = gw[i] - y * v / n;
                }
                gb = gb - y / n;
            }
        }
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi = *wi - params.lr * *gi;
        }
        b = b - params.lr * gb;
    }
    (w, b)
}

/// Trains the NB-SVM: binarized counts scaled by Naive-Bayes log-count
/// ratios, fed to a linear hinge-loss classifier. Out-group is the positive
/// class. `config.seed` is accepted for interface uniformity; training is
/// deterministic without it.
pub fn train_nbsvm<F: Scalar>(
    vectors: &[SparseVector<F>],
    labels: &[IgrLabel],
    vocab_size: usize,
    opts: &NbSvmOptions<F>,
    _config: &TrainConfig,
) -> Result<LinearModel<F>> {
    if vectors.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    let positive: Vec<bool> = labels.iter().map(|&l| l == IgrLabel::OutGroup).collect();
    let inputs: Vec<SparseVector<F>> = if opts.binarize {
        vectors.iter().map(SparseVector::binarized).collect()
    } else {
        vectors.to_vec()
    };
    let ratios = nb_log_count_ratios(&inputs, &positive, opts.alpha, vocab_size)?;
    let features: Vec<SparseVector<F>> = inputs.iter().map(|x| ratios.transform(x)).collect();
    let targets: Vec<F> = positive
        .iter()
        .map(|&p| if p { F::one() } else { -F::one() })
        .collect();
    let (weights, bias) = train_linear_svm(&features, &targets, vocab_size, &opts.train);
    Ok(LinearModel {
        weights,
        bias,
        nb_ratios: Some(ratios),
    })
}
