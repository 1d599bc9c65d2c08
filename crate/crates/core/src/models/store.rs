//! Versioned model container: save/load with a vocabulary fingerprint check,
//! plus a unified prediction surface over every model family.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotation::{EmotionSet, LabeledExample};
use crate::corpus::{IgrLabel, Utterance};
use crate::error::{Error, Result};
use crate::features::{tokenize, vectorize, EmotionLexicon, SentimentLexicon, SparseVector, Vocab};
use crate::models::baselines::{predict_emolex, predict_sentiment_rule, MajorityClassifier};
use crate::models::linear::LinearModel;
use crate::models::multitask::{MultitaskModel, TrainMode, TrainOutcome};
use crate::models::TrainConfig;

pub const MODEL_FORMAT_VERSION: u32 = 1;

mod b64 {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn encode(v: &[f64]) -> String {
        let mut bytes = Vec::with_capacity(v.len() * 8);
        for x in v {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        STANDARD.encode(bytes)
    }

    pub fn decode(s: &str) -> Result<Vec<f64>, String> {
        let bytes = STANDARD.decode(s).map_err(|e| e.to_string())?;
        if bytes.len() % 8 != 0 {
            return Err("blob length is not a multiple of 8".into());
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }

    pub mod vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&encode(v))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let s = String::deserialize(d)?;
            decode(&s).map_err(serde::de::Error::custom)
        }
    }

    pub mod mat {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
            use serde::ser::SerializeSeq;
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for row in v {
                seq.serialize_element(&encode(row))?;
            }
            seq.end()
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
            let rows = Vec::<String>::deserialize(d)?;
            rows.iter()
                .map(|r| decode(r).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

/// Feature preprocessing pinned at training time and replayed at prediction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Preprocess {
    pub binarize: bool,
    pub stopwords: Vec<String>,
}

impl Preprocess {
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let mut tokens = tokenize(text);
        if !self.stopwords.is_empty() {
            tokens.retain(|t| !self.stopwords.contains(t));
        }
        tokens
    }
}

/// One stored restart of the shared-encoder model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpRestart {
    #[serde(with = "b64::mat")]
    pub encoder_w: Vec<Vec<f64>>,
    #[serde(with = "b64::vec")]
    pub encoder_b: Vec<f64>,
    #[serde(with = "b64::vec")]
    pub igr_w: Vec<f64>,
    pub igr_b: f64,
    #[serde(with = "b64::mat")]
    pub emotion_w: Vec<Vec<f64>>,
    #[serde(with = "b64::vec")]
    pub emotion_b: Vec<f64>,
    #[serde(with = "b64::vec")]
    pub pos_weights: Vec<f64>,
    pub label_active: Vec<bool>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub dev_metric: f64,
}

impl MlpRestart {
    pub fn from_outcome(outcome: &TrainOutcome<f64>) -> MlpRestart {
        let m = &outcome.model;
        MlpRestart {
            encoder_w: m.encoder_w.clone(),
            encoder_b: m.encoder_b.clone(),
            igr_w: m.igr_w.clone(),
            igr_b: m.igr_b,
            emotion_w: m.emotion_w.clone(),
            emotion_b: m.emotion_b.clone(),
            pos_weights: m.pos_weights.clone(),
            label_active: m.label_active.clone(),
            best_epoch: outcome.best_epoch,
            epochs_run: outcome.epochs_run,
            dev_metric: outcome.best_dev_metric,
        }
    }

    pub fn to_model(&self, config: &TrainConfig) -> MultitaskModel<f64> {
        MultitaskModel {
            encoder_w: self.encoder_w.clone(),
            encoder_b: self.encoder_b.clone(),
            igr_w: self.igr_w.clone(),
            igr_b: self.igr_b,
            emotion_w: self.emotion_w.clone(),
            emotion_b: self.emotion_b.clone(),
            pos_weights: self.pos_weights.clone(),
            label_active: self.label_active.clone(),
            config: config.clone(),
        }
    }
}

/// Model family plus its parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Majority {
        label: IgrLabel,
    },
    SentimentRule {
        seed: u64,
        lexicon: Vec<(String, i8)>,
    },
    EmoLex {
        threshold: f64,
        lexicon: Vec<(String, EmotionSet)>,
    },
    NbSvm {
        #[serde(with = "b64::vec")]
        weights: Vec<f64>,
        bias: f64,
        #[serde(with = "b64::vec")]
        ratios: Vec<f64>,
        alpha: f64,
    },
    Mlp {
        mode: TrainMode,
        config: TrainConfig,
        restarts: Vec<MlpRestart>,
    },
}

/// A self-contained trained model: vocabulary, preprocessing, parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub vocab: Vocab,
    pub preprocess: Preprocess,
    #[serde(flatten)]
    pub kind: ModelKind,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    /// Hex fingerprint of the stored vocabulary; verified on load.
    vocab_hash: String,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            vocab_hash: format!("{:016x}", self.vocab.fingerprint()),
            model: self.clone(),
        };
        let json = serde_json::to_string(&file).expect("model serializes");
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut file: ModelFile =
            serde_json::from_str(&content).map_err(|e| Error::parse(path, 1, e.to_string()))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        file.model.vocab.reindex();
        let hash = format!("{:016x}", file.model.vocab.fingerprint());
        if hash != file.vocab_hash {
            return Err(Error::Validation(format!(
                "vocabulary hash mismatch: file says {}, contents hash to {hash}",
                file.vocab_hash
            )));
        }
        Ok(file.model)
    }

    pub fn n_restarts(&self) -> usize {
        match &self.kind {
            ModelKind::Mlp { restarts, .. } => restarts.len(),
            _ => 1,
        }
    }

    pub fn predicts_igr(&self) -> bool {
        match &self.kind {
            ModelKind::Majority { .. }
            | ModelKind::SentimentRule { .. }
            | ModelKind::NbSvm { .. } => true,
            ModelKind::EmoLex { .. } => false,
            ModelKind::Mlp { mode, .. } => *mode != TrainMode::EmotionOnly,
        }
    }

    pub fn predicts_emotion(&self) -> bool {
        match &self.kind {
            ModelKind::EmoLex { .. } => true,
            ModelKind::Mlp { mode, .. } => *mode != TrainMode::IgrOnly,
            _ => false,
        }
    }

    fn count_vector(&self, text: &str) -> SparseVector<f64> {
        vectorize(&self.preprocess.tokens(text), &self.vocab, false)
    }

    fn mlp_vector(&self, text: &str) -> SparseVector<f64> {
        vectorize(
            &self.preprocess.tokens(text),
            &self.vocab,
            self.preprocess.binarize,
        )
    }

    /// Materializes the predictor for one restart so batch prediction does
    /// not rebuild parameter matrices per example.
    pub fn predictor(&self, restart: usize) -> Option<RestartPredictor> {
        if restart >= self.n_restarts() {
            return None;
        }
        let predictor = match &self.kind {
            ModelKind::Majority { label } => {
                RestartPredictor::Majority(MajorityClassifier { label: *label })
            }
            ModelKind::SentimentRule { seed, lexicon } => RestartPredictor::SentimentRule {
                seed: *seed,
                lexicon: sentiment_from_entries(lexicon),
            },
            ModelKind::EmoLex { threshold, lexicon } => RestartPredictor::EmoLex {
                threshold: *threshold,
                lexicon: EmotionLexicon::from_entries(lexicon.iter().cloned()),
            },
            ModelKind::NbSvm {
                weights,
                bias,
                ratios,
                alpha,
            } => RestartPredictor::NbSvm(LinearModel {
                weights: weights.clone(),
                bias: *bias,
                nb_ratios: Some(crate::features::NbRatios {
                    r: ratios.clone(),
                    alpha: *alpha,
                }),
            }),
            ModelKind::Mlp {
                mode,
                config,
                restarts,
            } => RestartPredictor::Mlp {
                mode: *mode,
                model: restarts.get(restart)?.to_model(config),
            },
        };
        Some(predictor)
    }

    /// IGR prediction for one utterance under the given restart, or `None`
    /// when the model does not cover the IGR task.
    pub fn predict_igr(&self, utterance: &Utterance, restart: usize) -> Option<IgrLabel> {
        self.predictor(restart)?.igr(self, utterance)
    }

    /// Emotion prediction for one utterance under the given restart, or
    /// `None` when the model does not cover the emotion task.
    pub fn predict_emotions(&self, utterance: &Utterance, restart: usize) -> Option<EmotionSet> {
        self.predictor(restart)?.emotions(self, utterance)
    }

    /// Per-restart IGR predictions over a dataset.
    pub fn igr_predictions(&self, examples: &[LabeledExample]) -> Option<Vec<Vec<IgrLabel>>> {
        if !self.predicts_igr() {
            return None;
        }
        let out = (0..self.n_restarts())
            .map(|r| {
                let predictor = self.predictor(r).expect("restart in range");
                examples
                    .iter()
                    .map(|ex| predictor.igr(self, &ex.utterance).expect("task covered"))
                    .collect()
            })
            .collect();
        Some(out)
    }

    /// Per-restart emotion predictions over a dataset.
    pub fn emotion_predictions(&self, examples: &[LabeledExample]) -> Option<Vec<Vec<EmotionSet>>> {
        if !self.predicts_emotion() {
            return None;
        }
        let out = (0..self.n_restarts())
            .map(|r| {
                let predictor = self.predictor(r).expect("restart in range");
                examples
                    .iter()
                    .map(|ex| {
                        predictor
                            .emotions(self, &ex.utterance)
                            .expect("task covered")
                    })
                    .collect()
            })
            .collect();
        Some(out)
    }

    /// Index of the restart with the best dev metric; 0 for single-restart
    /// families.
    pub fn best_restart(&self) -> usize {
        match &self.kind {
            ModelKind::Mlp { restarts, .. } => restarts
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| {
                    a.dev_metric
                        .partial_cmp(&b.dev_metric)
                        .expect("finite dev metrics")
                })
                .map(|(i, _)| i)
                .unwrap_or(0),
            _ => 0,
        }
    }
}

/// One restart's parameters, materialized for repeated prediction.
pub enum RestartPredictor {
    Majority(MajorityClassifier),
    SentimentRule {
        seed: u64,
        lexicon: SentimentLexicon,
    },
    EmoLex {
        threshold: f64,
        lexicon: EmotionLexicon,
    },
    NbSvm(LinearModel<f64>),
    Mlp {
        mode: TrainMode,
        model: MultitaskModel<f64>,
    },
}

impl RestartPredictor {
    pub fn igr(&self, container: &TrainedModel, utterance: &Utterance) -> Option<IgrLabel> {
        match self {
            RestartPredictor::Majority(clf) => Some(clf.predict()),
            RestartPredictor::SentimentRule { seed, lexicon } => {
                Some(predict_sentiment_rule(utterance, lexicon, *seed))
            }
            RestartPredictor::NbSvm(model) => {
                Some(model.predict(&container.count_vector(&utterance.masked_text)))
            }
            RestartPredictor::EmoLex { .. } => None,
            RestartPredictor::Mlp { mode, model } => {
                if *mode == TrainMode::EmotionOnly {
                    return None;
                }
                Some(
                    model
                        .predict(&container.mlp_vector(&utterance.masked_text), 0.5, 0.5)
                        .0,
                )
            }
        }
    }

    pub fn emotions(&self, container: &TrainedModel, utterance: &Utterance) -> Option<EmotionSet> {
        match self {
            RestartPredictor::EmoLex { threshold, lexicon } => {
                let tokens = container.preprocess.tokens(&utterance.masked_text);
                predict_emolex::<f64>(&tokens, lexicon, *threshold).ok()
            }
            RestartPredictor::Mlp { mode, model } => {
                if *mode == TrainMode::IgrOnly {
                    return None;
                }
                Some(
                    model
                        .predict(&container.mlp_vector(&utterance.masked_text), 0.5, 0.5)
                        .1,
                )
            }
            _ => None,
        }
    }
}

/// Snapshot of a sentiment lexicon for storage inside a model file.
pub fn sentiment_entries(lexicon: &SentimentLexicon) -> Vec<(String, i8)> {
    lexicon.entries_vec()
}

fn sentiment_from_entries(entries: &[(String, i8)]) -> SentimentLexicon {
    SentimentLexicon::from_entries(entries.iter().cloned())
}

/// Snapshot of an emotion lexicon for storage inside a model file.
pub fn emotion_entries(lexicon: &EmotionLexicon) -> Vec<(String, EmotionSet)> {
    lexicon.entries_vec()
}
