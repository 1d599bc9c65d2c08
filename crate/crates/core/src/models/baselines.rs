//! Non-neural baselines: majority class, sentiment rule, lexicon threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{EmotionSet, LabeledExample};
use crate::corpus::{IgrLabel, Utterance};
use crate::error::{Error, Result};
use crate::features::{lexicon_scores, EmotionLexicon, Polarity, SentimentProvider};
use crate::scalar::Scalar;
use crate::util::fnv1a64;

/// Constant classifier predicting the most frequent training label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityClassifier {
    pub label: IgrLabel,
}

impl MajorityClassifier {
    pub fn predict(&self) -> IgrLabel {
        self.label
    }
}

/// Exact ties break toward in-group.
pub fn train_majority(train: &[LabeledExample]) -> Result<MajorityClassifier> {
    if train.is_empty() {
        return Err(Error::Validation(
            "majority classifier needs training data".into(),
        ));
    }
    let out = train
        .iter()
        .filter(|x| x.igr() == IgrLabel::OutGroup)
        .count();
    let label = if out * 2 > train.len() {
        IgrLabel::OutGroup
    } else {
        IgrLabel::InGroup
    };
    Ok(MajorityClassifier { label })
}

/// Negative sentiment maps to out-group, positive to in-group, neutral to a
/// fair coin. The coin stream is derived from the utterance id so the draw is
/// reproducible and independent of dataset order.
pub fn predict_sentiment_rule<P: SentimentProvider>(
    utterance: &Utterance,
    provider: &P,
    seed: u64,
) -> IgrLabel {
    let tokens = crate::features::tokenize(&utterance.masked_text);
    match provider.polarity(&tokens) {
        Polarity::Negative => IgrLabel::OutGroup,
        Polarity::Positive => IgrLabel::InGroup,
        Polarity::Neutral => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(fnv1a64(utterance.id.as_bytes()));
            if rng.gen_bool(0.5) {
                IgrLabel::InGroup
            } else {
                IgrLabel::OutGroup
            }
        }
    }
}

/// An emotion is on iff its normalized lexicon score reaches `threshold`.
/// The all-off outcome is the empty set, i.e. the no-emotion label.
pub fn predict_emolex<F: Scalar>(
    tokens: &[String],
    lexicon: &EmotionLexicon,
    threshold: F,
) -> Result<EmotionSet> {
    if threshold <= F::zero() {
        return Err(Error::Config(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let scores = lexicon_scores::<F>(tokens, lexicon);
    let set = crate::annotation::Emotion::ALL
        .iter()
        .copied()
        .filter(|e| scores[e.wheel_position() as usize] >= threshold)
        .collect();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Emotion;
    use crate::corpus::Party;
    use crate::features::{tokenize, SentimentLexicon};

    fn example(id: &str, igr: IgrLabel) -> LabeledExample {
        let (sp, tp) = match igr {
            IgrLabel::InGroup => (Party::Democrat, Party::Democrat),
            IgrLabel::OutGroup => (Party::Democrat, Party::Republican),
        };
        let utt = Utterance::new(id, format!("m @USER {id}"), sp, "t", tp, 2018, "@USER").unwrap();
        LabeledExample::new(utt, EmotionSet::EMPTY)
    }

    #[test]
    fn majority_picks_frequent_label_and_breaks_ties_in() {
        let mut train: Vec<LabeledExample> = (0..6)
            .map(|i| example(&format!("o{i}"), IgrLabel::OutGroup))
            .collect();
        train.extend((0..4).map(|i| example(&format!("i{i}"), IgrLabel::InGroup)));
        assert_eq!(
            train_majority(&train).unwrap().predict(),
            IgrLabel::OutGroup
        );

        let tied: Vec<LabeledExample> = (0..4)
            .map(|i| {
                example(
                    &format!("t{i}"),
                    if i % 2 == 0 {
                        IgrLabel::InGroup
                    } else {
                        IgrLabel::OutGroup
                    },
                )
            })
            .collect();
        assert_eq!(train_majority(&tied).unwrap().predict(), IgrLabel::InGroup);
        assert!(train_majority(&[]).is_err());
    }

    #[test]
    fn majority_f1_on_balanced_test_is_two_thirds() {
        // Confusion-matrix arithmetic oracle: always predicting the positive
        // class on a 50/50 set gives P = 0.5, R = 1.0, F1 = 2/3.
        let clf = MajorityClassifier {
            label: IgrLabel::OutGroup,
        };
        let golds: Vec<IgrLabel> = (0..100)
            .map(|i| {
                if i < 50 {
                    IgrLabel::OutGroup
                } else {
                    IgrLabel::InGroup
                }
            })
            .collect();
        let preds: Vec<IgrLabel> = golds.iter().map(|_| clf.predict()).collect();
        let prf =
            crate::eval::prf_binary::<f64, IgrLabel>(&preds, &golds, IgrLabel::OutGroup).unwrap();
        assert!((prf.precision - 0.5).abs() < 1e-12);
        assert!((prf.recall - 1.0).abs() < 1e-12);
        assert!((prf.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    fn utt(id: &str, text: &str) -> Utterance {
        Utterance::new(
            id,
            text,
            Party::Democrat,
            "t",
            Party::Democrat,
            2018,
            "@USER",
        )
        .unwrap()
    }

    #[test]
    fn sentiment_rule_maps_polarity() {
        let lex = SentimentLexicon::bundled();
        assert_eq!(
            predict_sentiment_rule(&utt("1", "wonderful work @USER"), &lex, 0),
            IgrLabel::InGroup
        );
        assert_eq!(
            predict_sentiment_rule(&utt("2", "disgraceful vote @USER"), &lex, 0),
            IgrLabel::OutGroup
        );
    }

    #[test]
    fn sentiment_rule_neutral_coin_is_reproducible() {
        let lex = SentimentLexicon::bundled();
        let u = utt("42", "the committee met @USER");
        let first = predict_sentiment_rule(&u, &lex, 7);
        for _ in 0..5 {
            assert_eq!(predict_sentiment_rule(&u, &lex, 7), first);
        }
        // Different utterance ids flip the coin independently; over many ids
        // both labels appear.
        let labels: Vec<IgrLabel> = (0..64)
            .map(|i| predict_sentiment_rule(&utt(&format!("id{i}"), "committee @USER"), &lex, 7))
            .collect();
        assert!(labels.contains(&IgrLabel::InGroup) && labels.contains(&IgrLabel::OutGroup));
    }

    #[test]
    fn emolex_threshold_examples() {
        let lexicon = EmotionLexicon::bundled();
        // 10 tokens, 1 joy word: score 0.1 >= 0.001.
        let tokens = tokenize("happy a b c d e f g h i");
        assert_eq!(tokens.len(), 10);
        let set = predict_emolex::<f64>(&tokens, &lexicon, 0.001).unwrap();
        assert_eq!(set, EmotionSet::single(Emotion::Joy));

        let none = predict_emolex::<f64>(&tokenize("the committee met"), &lexicon, 0.001).unwrap();
        assert!(none.is_empty());

        // 0.1 < 0.2: off.
        let strict = predict_emolex::<f64>(&tokens, &lexicon, 0.2).unwrap();
        assert!(strict.is_empty());

        assert!(predict_emolex::<f64>(&tokens, &lexicon, 0.0).is_err());
    }
}
