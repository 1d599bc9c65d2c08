//! Annotator agreement: wheel-distance PEA scores, Fleiss kappa, and
//! interrater rank correlation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::{AnnotationRecord, Emotion, EmotionSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pair score when both annotators chose the empty set.
pub const BOTH_EMPTY_SCORE: f64 = 1.0;
/// Pair score when exactly one annotator chose the empty set.
pub const ONE_EMPTY_SCORE: f64 = 0.0;
/// Maximum circular distance on the 8-emotion wheel.
pub const MAX_WHEEL_DISTANCE: u8 = 4;

/// Minimal circular step count between two emotions on the wheel.
pub fn wheel_distance(a: Emotion, b: Emotion) -> u8 {
    let pa = a.wheel_position() as i16;
    let pb = b.wheel_position() as i16;
    let d = (pa - pb).unsigned_abs() as u8;
    d.min(8 - d)
}

/// Whether a pair score takes the best or worst emotion pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    Best,
    Worst,
}

/// Similarity of one emotion pair: `1 - distance/4`.
fn pair_similarity<F: Scalar>(a: Emotion, b: Emotion) -> F {
    let d = F::from_u8(wheel_distance(a, b)).unwrap();
    F::one() - d / F::from_u8(MAX_WHEEL_DISTANCE).unwrap()
}

/// Agreement of two annotators' sets on one tweet. Empty-set conventions:
/// both empty scores 1, exactly one empty scores 0.
pub fn pair_agreement<F: Scalar>(s1: EmotionSet, s2: EmotionSet, mode: PairMode) -> F {
    match (s1.is_empty(), s2.is_empty()) {
        (true, true) => return F::from_f64_lossy(BOTH_EMPTY_SCORE),
        (true, false) | (false, true) => return F::from_f64_lossy(ONE_EMPTY_SCORE),
        (false, false) => {}
    }
    let mut agg: Option<F> = None;
    for e1 in s1.iter() {
        for e2 in s2.iter() {
            let sim = pair_similarity::<F>(e1, e2);
            agg = Some(match (agg, mode) {
                (None, _) => sim,
                (Some(a), PairMode::Best) => a.max(sim),
                (Some(a), PairMode::Worst) => a.min(sim),
            });
        }
    }
    agg.expect("non-empty sets produce at least one pair")
}

/// Pooled PEA outcome: mean over every (tweet, annotator pair) score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeaScore<F> {
    pub value: F,
    /// Number of (tweet, pair) scores pooled.
    pub pairs: usize,
    /// Tweets skipped for having fewer than 2 annotators.
    pub skipped_tweets: usize,
}

/// PEA over tweets given each tweet's annotator sets.
pub fn pea_from_sets<F: Scalar>(tweets: &[Vec<EmotionSet>], mode: PairMode) -> Result<PeaScore<F>> {
    let mut total = F::zero();
    let mut pairs = 0usize;
    let mut skipped = 0usize;
    for sets in tweets {
        if sets.len() < 2 {
            skipped += 1;
            continue;
        }
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                total = total + pair_agreement::<F>(sets[i], sets[j], mode);
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(Error::Validation(
            "no tweet has 2 or more annotators; PEA is undefined".into(),
        ));
    }
    Ok(PeaScore {
        value: total / F::from_usize_lossy(pairs),
        pairs,
        skipped_tweets: skipped,
    })
}

/// PEA over raw annotation records, grouped by tweet id.
pub fn pea_score<F: Scalar>(records: &[AnnotationRecord], mode: PairMode) -> Result<PeaScore<F>> {
    let grouped = crate::annotation::group_by_tweet(records);
    let tweets: Vec<Vec<EmotionSet>> = grouped
        .into_iter()
        .map(|(_, recs)| recs.iter().map(|r| r.emotions).collect())
        .collect();
    pea_from_sets(&tweets, mode)
}

/// Standard Fleiss kappa over an items x categories rater-count matrix.
/// Every row must sum to the same rater count `n >= 2`.
pub fn fleiss_kappa<F: Scalar>(counts: &[Vec<usize>]) -> Result<F> {
    if counts.is_empty() {
        return Err(Error::Validation(
            "fleiss kappa needs at least one item".into(),
        ));
    }
    let k = counts[0].len();
    if k == 0 {
        return Err(Error::Validation(
            "fleiss kappa needs at least one category".into(),
        ));
    }
    let n: usize = counts[0].iter().sum();
    if n < 2 {
        return Err(Error::Validation(format!(
            "fleiss kappa needs >= 2 raters per item, got {n}"
        )));
    }
    for (i, row) in counts.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Validation(format!(
                "row {i} has {} categories, expected {k}",
                row.len()
            )));
        }
        let sum: usize = row.iter().sum();
        if sum != n {
            return Err(Error::Validation(format!(
                "row {i} sums to {sum}, expected {n}"
            )));
        }
    }
    let big_n = F::from_usize_lossy(counts.len());
    let nf = F::from_usize_lossy(n);
    let denom = nf * (nf - F::one());

    let mut p_bar = F::zero();
    for row in counts {
        let sq: usize = row.iter().map(|&c| c * c).sum();
        p_bar = p_bar + (F::from_usize_lossy(sq) - nf) / denom;
    }
    p_bar = p_bar / big_n;

    let mut p_e = F::zero();
    for j in 0..k {
        let col: usize = counts.iter().map(|row| row[j]).sum();
        let pj = F::from_usize_lossy(col) / (big_n * nf);
        p_e = p_e + pj * pj;
    }
    if (F::one() - p_e).abs() <= F::epsilon() {
        return Err(Error::Undefined(
            "expected agreement is 1; kappa is undefined".into(),
        ));
    }
    Ok((p_bar - p_e) / (F::one() - p_e))
}

fn average_ranks<F: Scalar>(values: &[F]) -> Vec<F> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![F::zero(); n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Average 1-based rank of the tie block [i, j].
        let avg = F::from_usize_lossy(i + j + 2) / F::from_f64_lossy(2.0);
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson<F: Scalar>(x: &[F], y: &[F]) -> Option<F> {
    let n = F::from_usize_lossy(x.len());
    let mean = |v: &[F]| v.iter().fold(F::zero(), |a, &b| a + b) / n;
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = F::zero();
    let mut sxx = F::zero();
    let mut syy = F::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
    }
    if sxx <= F::zero() || syy <= F::zero() {
        return None; // constant vector: correlation undefined
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation with average ranks for ties. `None` when either
/// vector is constant.
pub fn spearman<F: Scalar>(x: &[F], y: &[F]) -> Option<F> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    pearson(&rx, &ry)
}

/// Mean, over annotators, of the rank correlation between an annotator's
/// binary judgments for `emotion` and the mean judgment of the other
/// annotators on shared tweets. Insufficient overlap or constant judgment
/// vectors make the value absent rather than an error.
pub fn interrater_correlation<F: Scalar>(
    records: &[AnnotationRecord],
    emotion: Emotion,
) -> Option<F> {
    // tweet -> annotator -> voted
    let mut tweets: BTreeMap<&str, BTreeMap<&str, bool>> = BTreeMap::new();
    for rec in records {
        tweets
            .entry(rec.tweet_id.as_str())
            .or_default()
            .insert(rec.annotator_id.as_str(), rec.emotions.contains(emotion));
    }
    let annotators: Vec<&str> = {
        let mut set: Vec<&str> = records.iter().map(|r| r.annotator_id.as_str()).collect();
        set.sort();
        set.dedup();
        set
    };

    let mut per_annotator: Vec<F> = Vec::new();
    for annotator in &annotators {
        let mut own: Vec<F> = Vec::new();
        let mut others: Vec<F> = Vec::new();
        for votes in tweets.values() {
            let Some(&mine) = votes.get(annotator) else {
                continue;
            };
            let other_votes: Vec<bool> = votes
                .iter()
                .filter(|(a, _)| *a != annotator)
                .map(|(_, &v)| v)
                .collect();
            if other_votes.is_empty() {
                continue;
            }
            own.push(if mine { F::one() } else { F::zero() });
            let sum = other_votes.iter().filter(|&&v| v).count();
            others.push(F::from_usize_lossy(sum) / F::from_usize_lossy(other_votes.len()));
        }
        if own.len() < 3 {
            continue;
        }
        if let Some(r) = spearman(&own, &others) {
            per_annotator.push(r);
        }
    }
    if per_annotator.is_empty() {
        return None;
    }
    let sum = per_annotator.iter().fold(F::zero(), |a, &b| a + b);
    Some(sum / F::from_usize_lossy(per_annotator.len()))
}

/// Agreement metrics over one annotation file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementReport<F> {
    pub pea_max: F,
    pub pea_min: F,
    /// Kappa over (tweet, emotion) items with two categories (absent/present),
    /// restricted to tweets carrying the modal annotator count.
    pub fleiss_kappa: F,
    /// `None` entries are undefined (constant judgments or no overlap).
    pub interrater_corr: BTreeMap<String, Option<F>>,
    pub tweets_scored: usize,
    pub tweets_skipped: usize,
}

/// Builds the full agreement report from raw records.
pub fn agreement_report<F: Scalar>(records: &[AnnotationRecord]) -> Result<AgreementReport<F>> {
    let best = pea_score::<F>(records, PairMode::Best)?;
    let worst = pea_score::<F>(records, PairMode::Worst)?;

    // Rater-count matrix: one item per (tweet, emotion), categories
    // {absent, present}. Tweets whose annotator count differs from the modal
    // count are left out so rows sum equally.
    let grouped = crate::annotation::group_by_tweet(records);
    let mut count_freq: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, recs) in &grouped {
        *count_freq.entry(recs.len()).or_default() += 1;
    }
    let modal = count_freq
        .iter()
        .filter(|(&raters, _)| raters >= 2)
        .max_by_key(|(&raters, &freq)| (freq, raters))
        .map(|(&raters, _)| raters)
        .ok_or_else(|| Error::Validation("no tweet has 2 or more annotators".into()))?;
    let mut counts: Vec<Vec<usize>> = Vec::new();
    for (_, recs) in &grouped {
        if recs.len() != modal {
            continue;
        }
        for e in Emotion::ALL {
            let on = recs.iter().filter(|r| r.emotions.contains(e)).count();
            counts.push(vec![modal - on, on]);
        }
    }
    let kappa = fleiss_kappa::<F>(&counts)?;

    let mut interrater = BTreeMap::new();
    for e in Emotion::ALL {
        interrater.insert(
            e.name().to_string(),
            interrater_correlation::<F>(records, e),
        );
    }

    Ok(AgreementReport {
        pea_max: best.value,
        pea_min: worst.value,
        fleiss_kappa: kappa,
        interrater_corr: interrater,
        tweets_scored: grouped.len() - best.skipped_tweets,
        tweets_skipped: best.skipped_tweets,
    })
}
