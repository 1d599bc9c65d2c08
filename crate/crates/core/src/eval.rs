//! Precision/recall/F1, multi-restart aggregation, and the paired bootstrap
//! significance test.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::{Emotion, EmotionSet};
use crate::corpus::IgrLabel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Precision, recall, and F1 with the gold-positive support count.
/// Zero denominators yield 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
    pub support: usize,
}

/// Binary PRF over any label type.
pub fn prf_binary<F: Scalar, L: PartialEq + Copy>(
    preds: &[L],
    golds: &[L],
    positive: L,
) -> Result<Prf<F>> {
    if preds.len() != golds.len() {
        return Err(Error::Validation(format!(
            "{} predictions but {} golds",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Validation(
            "cannot score an empty prediction list".into(),
        ));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&p, &g) in preds.iter().zip(golds) {
        let p_pos = p == positive;
        let g_pos = g == positive;
        match (p_pos, g_pos) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(prf_from_counts(tp, fp, fn_))
}

fn prf_from_counts<F: Scalar>(tp: usize, fp: usize, fn_: usize) -> Prf<F> {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            F::zero()
        } else {
            F::from_usize_lossy(num) / F::from_usize_lossy(den)
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > F::zero() {
        F::from_f64_lossy(2.0) * precision * recall / (precision + recall)
    } else {
        F::zero()
    };
    Prf {
        precision,
        recall,
        f1,
        support: tp + fn_,
    }
}

/// Per-emotion PRF, each emotion scored as an independent binary task, plus
/// the "set is empty" task. A label is reported when it has gold support or
/// predicted positives; labels absent from both sides are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerEmotionPrf<F> {
    pub emotions: BTreeMap<Emotion, Prf<F>>,
    pub no_emotion: Option<Prf<F>>,
}

pub fn prf_per_emotion<F: Scalar>(
    preds: &[EmotionSet],
    golds: &[EmotionSet],
) -> Result<PerEmotionPrf<F>> {
    if preds.len() != golds.len() {
        return Err(Error::Validation(format!(
            "{} predictions but {} golds",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Validation(
            "cannot score an empty prediction list".into(),
        ));
    }
    let mut emotions = BTreeMap::new();
    for e in Emotion::ALL {
        let p: Vec<bool> = preds.iter().map(|s| s.contains(e)).collect();
        let g: Vec<bool> = golds.iter().map(|s| s.contains(e)).collect();
        if p.iter().any(|&x| x) || g.iter().any(|&x| x) {
            emotions.insert(e, prf_binary::<F, bool>(&p, &g, true)?);
        }
    }
    let p: Vec<bool> = preds.iter().map(|s| s.is_empty()).collect();
    let g: Vec<bool> = golds.iter().map(|s| s.is_empty()).collect();
    let no_emotion = if p.iter().any(|&x| x) || g.iter().any(|&x| x) {
        Some(prf_binary::<F, bool>(&p, &g, true)?)
    } else {
        None
    };
    Ok(PerEmotionPrf {
        emotions,
        no_emotion,
    })
}

/// Mean of the two per-class F1 scores; the headline IGR metric.
pub fn igr_macro_f1<F: Scalar>(preds: &[IgrLabel], golds: &[IgrLabel]) -> F {
    let Ok(out) = prf_binary::<F, IgrLabel>(preds, golds, IgrLabel::OutGroup) else {
        return F::zero();
    };
    let Ok(ing) = prf_binary::<F, IgrLabel>(preds, golds, IgrLabel::InGroup) else {
        return F::zero();
    };
    (out.f1 + ing.f1) / F::from_f64_lossy(2.0)
}

/// Unweighted mean F1 over emotions with gold support; the headline emotion
/// metric. Returns 0 when no emotion has gold support.
pub fn emotion_macro_f1<F: Scalar>(preds: &[EmotionSet], golds: &[EmotionSet]) -> F {
    let Ok(per) = prf_per_emotion::<F>(preds, golds) else {
        return F::zero();
    };
    let supported: Vec<F> = per
        .emotions
        .values()
        .filter(|prf| prf.support > 0)
        .map(|prf| prf.f1)
        .collect();
    if supported.is_empty() {
        return F::zero();
    }
    supported.iter().fold(F::zero(), |a, &b| a + b) / F::from_usize_lossy(supported.len())
}

/// Mean and population standard deviation (denominator n) over restart
/// metric values.
pub fn aggregate_restarts<F: Scalar>(values: &[F]) -> Result<(F, F)> {
    if values.is_empty() {
        return Err(Error::Validation("need at least one restart value".into()));
    }
    let n = F::from_usize_lossy(values.len());
    let mean = values.iter().fold(F::zero(), |a, &b| a + b) / n;
    let var = values
        .iter()
        .fold(F::zero(), |a, &b| a + (b - mean) * (b - mean))
        / n;
    Ok((mean, var.sqrt()))
}

/// Which resample statistic the bootstrap counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapVariant {
    /// `p = |{resamples with delta_i <= 0}| / B`, ties counted toward the
    /// null. The default.
    CountNonPositive,
    /// Shift variant: `p = |{resamples with delta_i >= 2 * delta}| / B`.
    ShiftedDelta,
}

/// One-sided paired bootstrap outcome for "system a better than b".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOutcome<F> {
    pub p_value: F,
    /// Metric gap `metric(a) - metric(b)` on the full test set.
    pub delta: F,
    /// Set when `delta <= 0`: the test orientation is violated and the
    /// p-value is not meaningful as stated.
    pub orientation_violated: bool,
    pub resamples: usize,
}

/// Paired bootstrap: resamples the test set with replacement `resamples`
/// times and counts sign reversals of the metric gap. Per-resample RNG
/// streams are derived from the root seed, so the count is deterministic and
/// independent of evaluation order.
pub fn paired_bootstrap<F, P, G, M>(
    preds_a: &[P],
    preds_b: &[P],
    golds: &[G],
    metric: M,
    resamples: usize,
    seed: u64,
    variant: BootstrapVariant,
) -> Result<BootstrapOutcome<F>>
where
    F: Scalar,
    P: Clone + Sync,
    G: Clone + Sync,
    M: Fn(&[P], &[G]) -> F + Sync,
{
    let n = golds.len();
    if preds_a.len() != n || preds_b.len() != n {
        return Err(Error::Validation(
            "prediction lists must match the gold length".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Validation(
            "cannot bootstrap an empty test set".into(),
        ));
    }
    if resamples == 0 {
        return Err(Error::Config("need at least one bootstrap resample".into()));
    }
    let delta = metric(preds_a, golds) - metric(preds_b, golds);
    let hits: usize = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut ra: Vec<P> = Vec::with_capacity(n);
            let mut rb: Vec<P> = Vec::with_capacity(n);
            let mut rg: Vec<G> = Vec::with_capacity(n);
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                ra.push(preds_a[i].clone());
                rb.push(preds_b[i].clone());
                rg.push(golds[i].clone());
            }
            let d = metric(&ra, &rg) - metric(&rb, &rg);
            let hit = match variant {
                BootstrapVariant::CountNonPositive => d <= F::zero(),
                BootstrapVariant::ShiftedDelta => d >= F::from_f64_lossy(2.0) * delta,
            };
            usize::from(hit)
        })
        .sum();
    Ok(BootstrapOutcome {
        p_value: F::from_usize_lossy(hits) / F::from_usize_lossy(resamples),
        delta,
        orientation_violated: delta <= F::zero(),
        resamples,
    })
}

/// Mean and population SD of one metric across restarts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Result<MeanSd> {
        let (mean, sd) = aggregate_restarts(values)?;
        Ok(MeanSd { mean, sd })
    }
}

/// PRF with restart spread.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrfMeanSd {
    pub precision: MeanSd,
    pub recall: MeanSd,
    pub f1: MeanSd,
    pub support: usize,
}

/// IGR section of an evaluation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IgrReport {
    pub restarts: usize,
    pub macro_f1: MeanSd,
    pub out_group: PrfMeanSd,
    pub in_group: PrfMeanSd,
}

/// Emotion section of an evaluation report: per-label PRF with restart
/// spread, plus the per-label F1 breakdown restricted to in-group and
/// out-group gold subsets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmotionReport {
    pub restarts: usize,
    pub macro_f1: MeanSd,
    pub per_label: BTreeMap<String, PrfMeanSd>,
    pub by_igr: BTreeMap<String, BTreeMap<String, MeanSd>>,
}

/// Bootstrap comparison between two systems on one metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metric: String,
    pub variant: BootstrapVariant,
    pub delta: f64,
    pub p_value: f64,
    pub orientation_violated: bool,
    pub resamples: usize,
}

/// Full evaluation report; sections appear when the model covers the task.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub igr: Option<IgrReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emotion: Option<EmotionReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub comparisons: Vec<ComparisonReport>,
}

fn prf_mean_sd(values: &[Prf<f64>]) -> Result<PrfMeanSd> {
    let collect = |f: fn(&Prf<f64>) -> f64| -> Vec<f64> { values.iter().map(f).collect() };
    Ok(PrfMeanSd {
        precision: MeanSd::of(&collect(|p| p.precision))?,
        recall: MeanSd::of(&collect(|p| p.recall))?,
        f1: MeanSd::of(&collect(|p| p.f1))?,
        support: values.first().map(|p| p.support).unwrap_or(0),
    })
}

/// Builds the IGR report section from per-restart predictions.
pub fn igr_report(restart_preds: &[Vec<IgrLabel>], golds: &[IgrLabel]) -> Result<IgrReport> {
    if restart_preds.is_empty() {
        return Err(Error::Validation("need at least one restart".into()));
    }
    let mut macro_f1 = Vec::new();
    let mut out = Vec::new();
    let mut ing = Vec::new();
    for preds in restart_preds {
        macro_f1.push(igr_macro_f1::<f64>(preds, golds));
        out.push(prf_binary::<f64, IgrLabel>(
            preds,
            golds,
            IgrLabel::OutGroup,
        )?);
        ing.push(prf_binary::<f64, IgrLabel>(
            preds,
            golds,
            IgrLabel::InGroup,
        )?);
    }
    Ok(IgrReport {
        restarts: restart_preds.len(),
        macro_f1: MeanSd::of(&macro_f1)?,
        out_group: prf_mean_sd(&out)?,
        in_group: prf_mean_sd(&ing)?,
    })
}

/// Builds the emotion report section from per-restart predictions, including
/// the subgroup breakdown by gold IGR.
pub fn emotion_report(
    restart_preds: &[Vec<EmotionSet>],
    golds: &[EmotionSet],
    igr: &[IgrLabel],
) -> Result<EmotionReport> {
    if restart_preds.is_empty() {
        return Err(Error::Validation("need at least one restart".into()));
    }
    if igr.len() != golds.len() {
        return Err(Error::Validation(
            "IGR labels must match the gold length".into(),
        ));
    }
    let macro_f1: Vec<f64> = restart_preds
        .iter()
        .map(|preds| emotion_macro_f1::<f64>(preds, golds))
        .collect();

    // Per restart, every label present in any restart's report; a label a
    // restart omits had no gold support and no predicted positives there,
    // which reads as an all-zero PRF.
    let label_prfs = |preds_list: &[Vec<EmotionSet>],
                      golds: &[EmotionSet]|
     -> Result<BTreeMap<String, Vec<Prf<f64>>>> {
        let zero = Prf {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            support: 0,
        };
        let mut acc: BTreeMap<String, Vec<Prf<f64>>> = BTreeMap::new();
        for (r, preds) in preds_list.iter().enumerate() {
            let per = prf_per_emotion::<f64>(preds, golds)?;
            let mut labeled: Vec<(String, Prf<f64>)> = per
                .emotions
                .iter()
                .map(|(e, prf)| (e.name().to_string(), *prf))
                .collect();
            if let Some(prf) = per.no_emotion {
                labeled.push(("no_emotion".to_string(), prf));
            }
            for (label, prf) in labeled {
                let slot = acc.entry(label).or_default();
                while slot.len() < r {
                    slot.push(zero);
                }
                slot.push(prf);
            }
        }
        for values in acc.values_mut() {
            while values.len() < preds_list.len() {
                values.push(zero);
            }
        }
        Ok(acc)
    };

    let mut per_label = BTreeMap::new();
    for (label, prfs) in label_prfs(restart_preds, golds)? {
        let mut summary = prf_mean_sd(&prfs)?;
        summary.support = prfs.iter().map(|p| p.support).max().unwrap_or(0);
        per_label.insert(label, summary);
    }

    let mut by_igr = BTreeMap::new();
    for group in [IgrLabel::InGroup, IgrLabel::OutGroup] {
        let idx: Vec<usize> = (0..golds.len()).filter(|&i| igr[i] == group).collect();
        if idx.is_empty() {
            continue;
        }
        let sub_golds: Vec<EmotionSet> = idx.iter().map(|&i| golds[i]).collect();
        let sub_preds: Vec<Vec<EmotionSet>> = restart_preds
            .iter()
            .map(|preds| idx.iter().map(|&i| preds[i]).collect())
            .collect();
        let mut section = BTreeMap::new();
        for (label, prfs) in label_prfs(&sub_preds, &sub_golds)? {
            let f1s: Vec<f64> = prfs.iter().map(|p| p.f1).collect();
            section.insert(label, MeanSd::of(&f1s)?);
        }
        by_igr.insert(group.name().to_string(), section);
    }

    Ok(EmotionReport {
        restarts: restart_preds.len(),
        macro_f1: MeanSd::of(&macro_f1)?,
        per_label,
        by_igr,
    })
}
