//! Synthetic corpus generation with planted signal: balanced parties,
//! emotion-cue words drawn from the bundled lexicon, an out-group cue token,
//! and noisy simulated annotators.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{AnnotationRecord, Emotion, EmotionSet, LabeledExample};
use crate::corpus::{IgrLabel, Member, Party, RawTweet, Utterance, TRAIN_PLACEHOLDER};
use crate::error::{Error, Result};
use crate::features::EmotionLexicon;

/// Cue token planted into out-group tweets.
pub const OUTGROUP_CUE: &str = "bipartisan";

/// Emotion-or-none categorical distributions conditioned on the IGR side, in
/// wheel order with the no-emotion slot last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionGivenIgr {
    pub in_group: [f64; 9],
    pub out_group: [f64; 9],
}

impl EmotionGivenIgr {
    /// Proportions observed in the source data, normalized to sum to one:
    /// in-group (joy 32.2, admiration 22.2, sadness 2.6, disgust 0.3,
    /// anger 1.0, interest 27.2, none 14.5) and out-group (joy 21.4,
    /// admiration 9.1, sadness 2.4, disgust 14.2, anger 15.1, interest 18.6,
    /// none 19.1); fear and surprise are absent.
    pub fn observed_defaults() -> EmotionGivenIgr {
        let normalize = |raw: [f64; 9]| {
            let sum: f64 = raw.iter().sum();
            raw.map(|v| v / sum)
        };
        EmotionGivenIgr {
            in_group: normalize([0.322, 0.222, 0.0, 0.0, 0.026, 0.003, 0.010, 0.272, 0.145]),
            out_group: normalize([0.214, 0.091, 0.0, 0.0, 0.024, 0.142, 0.151, 0.186, 0.191]),
        }
    }

    pub fn for_side(&self, igr: IgrLabel) -> &[f64; 9] {
        match igr {
            IgrLabel::InGroup => &self.in_group,
            IgrLabel::OutGroup => &self.out_group,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, dist) in [("in_group", &self.in_group), ("out_group", &self.out_group)] {
            if dist.iter().any(|&p| p < 0.0) {
                return Err(Error::Config(format!(
                    "{name} distribution has negative mass"
                )));
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "{name} distribution sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Generator configuration. Deterministic given `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_tweets: usize,
    /// Inclusive year range.
    pub years: (i32, i32),
    pub members_per_party: usize,
    pub emotion_given_igr: EmotionGivenIgr,
    /// Probability of planting the out-group cue token in an out-group tweet.
    pub outgroup_cue_prob: f64,
    /// Per-slot probability of inserting a junk token.
    pub noise_rate: f64,
    /// Per-label probability that a simulated annotator flips the gold label.
    pub flip_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_tweets: 3000,
            years: (2010, 2021),
            members_per_party: 12,
            emotion_given_igr: EmotionGivenIgr::observed_defaults(),
            outgroup_cue_prob: 0.3,
            noise_rate: 0.1,
            flip_rate: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tweets == 0 {
            return Err(Error::Config("n_tweets must be positive".into()));
        }
        if self.years.0 > self.years.1 {
            return Err(Error::Config("year range is inverted".into()));
        }
        if self.members_per_party < 2 {
            return Err(Error::Config("need at least 2 members per party".into()));
        }
        for (name, p) in [
            ("outgroup_cue_prob", self.outgroup_cue_prob),
            ("noise_rate", self.noise_rate),
            ("flip_rate", self.flip_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} {p} must lie in [0, 1]")));
            }
        }
        self.emotion_given_igr.validate()
    }
}

/// A generated corpus: everything the ingest and aggregation stages consume,
/// plus the generator's own gold labels.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub members: Vec<Member>,
    pub tweets: Vec<RawTweet>,
    pub annotations: Vec<AnnotationRecord>,
    pub gold: Vec<LabeledExample>,
}

const FILLERS: &[&str] = &[
    "today",
    "committee",
    "meeting",
    "session",
    "floor",
    "district",
    "office",
    "agenda",
    "briefing",
    "morning",
    "afternoon",
    "weekly",
    "update",
    "statement",
    "policy",
    "budget",
    "measure",
    "amendment",
    "hearing",
    "caucus",
];

fn draw_categorical(rng: &mut ChaCha8Rng, dist: &[f64; 9]) -> Option<Emotion> {
    let mut u: f64 = rng.gen();
    for (i, &p) in dist.iter().enumerate() {
        if u < p {
            return if i < 8 { Some(Emotion::ALL[i]) } else { None };
        }
        u -= p;
    }
    None // trailing rounding mass lands on no-emotion
}

/// Generates the corpus. Tweets are produced per year from year-derived RNG
/// streams; every tweet mentions exactly one member, so corpus filtering
/// keeps all of them.
pub fn generate_corpus(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let lexicon = EmotionLexicon::bundled();
    let word_pools: Vec<Vec<&str>> = Emotion::ALL.iter().map(|&e| lexicon.words_for(e)).collect();

    let mut members = Vec::new();
    for (party, prefix) in [(Party::Democrat, "rep_d"), (Party::Republican, "rep_r")] {
        for i in 0..config.members_per_party {
            members.push(Member::new(format!("{prefix}{i:02}"), party, config.years)?);
        }
    }
    let by_party = |party: Party| -> Vec<usize> {
        members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.party == party)
            .map(|(i, _)| i)
            .collect()
    };
    let dems = by_party(Party::Democrat);
    let reps = by_party(Party::Republican);

    let years: Vec<i32> = (config.years.0..=config.years.1).collect();
    let base = config.n_tweets / years.len();
    let extra = config.n_tweets % years.len();

    let mut tweets = Vec::with_capacity(config.n_tweets);
    let mut annotations = Vec::with_capacity(config.n_tweets * 3);
    let mut gold = Vec::with_capacity(config.n_tweets);

    for (yi, &year) in years.iter().enumerate() {
        let n_year = base + usize::from(yi < extra);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(year as u32 as u64);
        for k in 0..n_year {
            let id = format!("t{year}_{k:05}");
            let igr = if rng.gen_bool(0.5) {
                IgrLabel::OutGroup
            } else {
                IgrLabel::InGroup
            };
            let speaker_idx = rng.gen_range(0..members.len());
            let speaker = &members[speaker_idx];
            let target_party = match igr {
                IgrLabel::InGroup => speaker.party,
                IgrLabel::OutGroup => match speaker.party {
                    Party::Democrat => Party::Republican,
                    Party::Republican => Party::Democrat,
                },
            };
            let pool = if target_party == Party::Democrat {
                &dems
            } else {
                &reps
            };
            let target_idx = loop {
                let cand = pool[rng.gen_range(0..pool.len())];
                if cand != speaker_idx {
                    break cand;
                }
            };
            let target = &members[target_idx];

            let emotion = draw_categorical(&mut rng, config.emotion_given_igr.for_side(igr));
            let emotions = match emotion {
                Some(e) => EmotionSet::single(e),
                None => EmotionSet::EMPTY,
            };

            let mut tokens: Vec<String> = Vec::new();
            for _ in 0..(2 + rng.gen_range(0..2)) {
                tokens.push(FILLERS[rng.gen_range(0..FILLERS.len())].to_string());
            }
            tokens.push(format!("@{}", target.handle));
            if let Some(e) = emotion {
                let words = &word_pools[e.wheel_position() as usize];
                for _ in 0..(2 + rng.gen_range(0..2)) {
                    tokens.push(words[rng.gen_range(0..words.len())].to_string());
                }
            }
            if igr == IgrLabel::OutGroup && rng.gen_bool(config.outgroup_cue_prob) {
                tokens.push(OUTGROUP_CUE.to_string());
            }
            for _ in 0..(2 + rng.gen_range(0..3)) {
                tokens.push(FILLERS[rng.gen_range(0..FILLERS.len())].to_string());
            }
            if config.noise_rate > 0.0 {
                let mut noised = Vec::with_capacity(tokens.len() + 4);
                for t in tokens {
                    if rng.gen_bool(config.noise_rate) {
                        noised.push(format!("nz{:03}", rng.gen_range(0..200)));
                    }
                    noised.push(t);
                }
                tokens = noised;
            }
            let text = tokens.join(" ");

            tweets.push(RawTweet {
                id: id.clone(),
                speaker_handle: speaker.handle.clone(),
                text: text.clone(),
                mentions: vec![target.handle.clone()],
                year,
                is_retweet: false,
            });

            for annotator in ["ann1", "ann2", "ann3"] {
                let mut noisy = emotions;
                for e in Emotion::ALL {
                    if rng.gen_bool(config.flip_rate) {
                        noisy.toggle(e);
                    }
                }
                annotations.push(AnnotationRecord {
                    tweet_id: id.clone(),
                    annotator_id: annotator.to_string(),
                    emotions: noisy,
                });
            }

            let masked = crate::corpus::mask_target(&text, &target.handle, TRAIN_PLACEHOLDER)?;
            let utterance = Utterance::new(
                &id,
                masked,
                speaker.party,
                &target.handle,
                target.party,
                year,
                TRAIN_PLACEHOLDER,
            )?;
            debug_assert_eq!(utterance.igr, igr);
            gold.push(LabeledExample::new(utterance, emotions));
        }
    }

    Ok(SynthCorpus {
        members,
        tweets,
        annotations,
        gold,
    })
}

/// Writes `members.tsv`, `tweets.jsonl`, `annotations.jsonl`, and
/// `gold.jsonl` into `dir`. Byte-identical for identical corpora.
pub fn write_corpus(corpus: &SynthCorpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let members_path = dir.join("members.tsv");
    let mut f = std::fs::File::create(&members_path).map_err(|e| Error::io(&members_path, e))?;
    writeln!(f, "# handle\tparty\tyear_start\tyear_end")
        .map_err(|e| Error::io(&members_path, e))?;
    for m in &corpus.members {
        writeln!(
            f,
            "{}\t{}\t{}\t{}",
            m.handle,
            m.party.name(),
            m.active_years.0,
            m.active_years.1
        )
        .map_err(|e| Error::io(&members_path, e))?;
    }

    let write_jsonl = |name: &str, lines: Vec<String>| -> Result<()> {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        for line in lines {
            writeln!(f, "{line}").map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    };
    write_jsonl(
        "tweets.jsonl",
        corpus
            .tweets
            .iter()
            .map(|t| serde_json::to_string(t).expect("tweet serializes"))
            .collect(),
    )?;
    write_jsonl(
        "annotations.jsonl",
        corpus
            .annotations
            .iter()
            .map(|a| serde_json::to_string(a).expect("record serializes"))
            .collect(),
    )?;
    write_jsonl(
        "gold.jsonl",
        corpus
            .gold
            .iter()
            .map(|g| serde_json::to_string(g).expect("example serializes"))
            .collect(),
    )?;
    Ok(())
}
