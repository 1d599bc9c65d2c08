//! Emotion labels, per-annotator records, majority aggregation, and the
//! train/dev/test split.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{IgrLabel, Utterance};
use crate::error::{Error, Result};

/// The 8 basic Plutchik emotions in fixed wheel order. Opposites sit 4
/// positions apart: joy/sadness, admiration/disgust, fear/anger,
/// surprise/interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Joy = 0,
    Admiration = 1,
    Fear = 2,
    Surprise = 3,
    Sadness = 4,
    Disgust = 5,
    Anger = 6,
    Interest = 7,
}

impl Emotion {
    /// Canonical wheel order.
    pub const ALL: [Emotion; 8] = [
        Emotion::Joy,
        Emotion::Admiration,
        Emotion::Fear,
        Emotion::Surprise,
        Emotion::Sadness,
        Emotion::Disgust,
        Emotion::Anger,
        Emotion::Interest,
    ];

    pub fn wheel_position(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Joy => "joy",
            Emotion::Admiration => "admiration",
            Emotion::Fear => "fear",
            Emotion::Surprise => "surprise",
            Emotion::Sadness => "sadness",
            Emotion::Disgust => "disgust",
            Emotion::Anger => "anger",
            Emotion::Interest => "interest",
        }
    }

    pub fn parse(s: &str) -> Result<Emotion> {
        match s.trim().to_ascii_lowercase().as_str() {
            "joy" => Ok(Emotion::Joy),
            "admiration" => Ok(Emotion::Admiration),
            "fear" => Ok(Emotion::Fear),
            "surprise" => Ok(Emotion::Surprise),
            "sadness" => Ok(Emotion::Sadness),
            "disgust" => Ok(Emotion::Disgust),
            "anger" => Ok(Emotion::Anger),
            "interest" => Ok(Emotion::Interest),
            other => Err(Error::Validation(format!("unknown emotion {other:?}"))),
        }
    }

    fn from_position(pos: u8) -> Emotion {
        Emotion::ALL[pos as usize]
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A subset of the 8 emotions. The empty set is the "no emotion" label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EmotionSet {
    bits: u8,
}

impl EmotionSet {
    pub const EMPTY: EmotionSet = EmotionSet { bits: 0 };

    pub fn single(e: Emotion) -> EmotionSet {
        let mut s = EmotionSet::EMPTY;
        s.insert(e);
        s
    }

    pub fn insert(&mut self, e: Emotion) {
        self.bits |= 1 << e.wheel_position();
    }

    pub fn remove(&mut self, e: Emotion) {
        self.bits &= !(1 << e.wheel_position());
    }

    pub fn toggle(&mut self, e: Emotion) {
        self.bits ^= 1 << e.wheel_position();
    }

    pub fn contains(self, e: Emotion) -> bool {
        self.bits & (1 << e.wheel_position()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Members in canonical wheel order.
    pub fn iter(self) -> impl Iterator<Item = Emotion> {
        (0..8u8)
            .filter(move |p| self.bits & (1 << p) != 0)
            .map(Emotion::from_position)
    }

    pub fn is_subset_of(self, other: EmotionSet) -> bool {
        self.bits & !other.bits == 0
    }
}

impl FromIterator<Emotion> for EmotionSet {
    fn from_iter<I: IntoIterator<Item = Emotion>>(iter: I) -> Self {
        let mut s = EmotionSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl fmt::Display for EmotionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        let names: Vec<&str> = self.iter().map(Emotion::name).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

// Serialized as an array of canonical lowercase names.
impl Serialize for EmotionSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for e in self.iter() {
            seq.serialize_element(e.name())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for EmotionSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct SetVisitor;
        impl<'de> Visitor<'de> for SetVisitor {
            type Value = EmotionSet;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of emotion names")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<EmotionSet, A::Error> {
                let mut set = EmotionSet::EMPTY;
                while let Some(name) = seq.next_element::<String>()? {
                    let e = Emotion::parse(&name).map_err(serde::de::Error::custom)?;
                    set.insert(e);
                }
                Ok(set)
            }
        }
        deserializer.deserialize_seq(SetVisitor)
    }
}

/// One annotator's emotion selection for one tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub tweet_id: String,
    pub annotator_id: String,
    pub emotions: EmotionSet,
}

/// An utterance paired with its aggregated emotion set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    #[serde(flatten)]
    pub utterance: Utterance,
    pub emotions: EmotionSet,
}

impl LabeledExample {
    pub fn new(utterance: Utterance, emotions: EmotionSet) -> LabeledExample {
        LabeledExample {
            utterance,
            emotions,
        }
    }

    pub fn igr(&self) -> IgrLabel {
        self.utterance.igr
    }
}

/// Train/dev/test partition, disjoint by tweet id.
#[derive(Debug, Clone, Default)]
pub struct DatasetSplit {
    pub train: Vec<LabeledExample>,
    pub dev: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
}

/// Majority aggregation: an emotion is on iff at least 2 annotators voted for
/// it. The threshold stays at an absolute 2 even with more than 3 records.
pub fn aggregate_labels(records: &[AnnotationRecord]) -> Result<EmotionSet> {
    if records.len() < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 annotation records, got {}",
            records.len()
        )));
    }
    let distinct: HashSet<&str> = records.iter().map(|r| r.annotator_id.as_str()).collect();
    if distinct.len() < 2 {
        return Err(Error::Validation(
            "annotation records must come from at least 2 distinct annotators".into(),
        ));
    }
    if records.iter().any(|r| r.tweet_id != records[0].tweet_id) {
        return Err(Error::Validation(
            "annotation records span multiple tweets".into(),
        ));
    }
    let mut agg = EmotionSet::EMPTY;
    for e in Emotion::ALL {
        let votes = records.iter().filter(|r| r.emotions.contains(e)).count();
        if votes >= 2 {
            agg.insert(e);
        }
    }
    Ok(agg)
}

/// Seeded shuffle followed by a `floor(r0*n) / floor(r1*n) / remainder` cut.
pub fn split_dataset(
    examples: &[LabeledExample],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit> {
    let sum = ratios.0 + ratios.1 + ratios.2;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split ratios sum to {sum}, expected 1"
        )));
    }
    if ratios.0 < 0.0 || ratios.1 < 0.0 || ratios.2 < 0.0 {
        return Err(Error::Config("split ratios must be non-negative".into()));
    }
    let n = examples.len();
    if n < 10 {
        return Err(Error::Validation(format!(
            "need at least 10 examples to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = (ratios.0 * n as f64).floor() as usize;
    let n_dev = (ratios.1 * n as f64).floor() as usize;
    let mut split = DatasetSplit::default();
    for (rank, &idx) in order.iter().enumerate() {
        let ex = examples[idx].clone();
        if rank < n_train {
            split.train.push(ex);
        } else if rank < n_train + n_dev {
            split.dev.push(ex);
        } else {
            split.test.push(ex);
        }
    }
    Ok(split)
}

/// Per-emotion example counts for each partition, plus a trailing
/// "no_emotion" row counting empty aggregates. Row order is wheel order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmotionCountTable {
    /// (label, [train, dev, test]) rows.
    pub rows: Vec<(String, [usize; 3])>,
}

impl EmotionCountTable {
    /// Rows with at least one non-zero cell; reporting drops empty labels.
    pub fn non_empty_rows(&self) -> Vec<&(String, [usize; 3])> {
        self.rows
            .iter()
            .filter(|(_, cells)| cells.iter().any(|&c| c > 0))
            .collect()
    }
}

pub fn emotion_count_table(split: &DatasetSplit) -> EmotionCountTable {
    let parts: [&[LabeledExample]; 3] = [&split.train, &split.dev, &split.test];
    let mut rows = Vec::with_capacity(9);
    for e in Emotion::ALL {
        let mut cells = [0usize; 3];
        for (i, part) in parts.iter().enumerate() {
            cells[i] = part.iter().filter(|x| x.emotions.contains(e)).count();
        }
        rows.push((e.name().to_string(), cells));
    }
    let mut none = [0usize; 3];
    for (i, part) in parts.iter().enumerate() {
        none[i] = part.iter().filter(|x| x.emotions.is_empty()).count();
    }
    rows.push(("no_emotion".to_string(), none));
    EmotionCountTable { rows }
}

/// Loads annotation records from JSON lines; (tweet_id, annotator_id) pairs
/// must be unique within the file.
pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        if !seen.insert((rec.tweet_id.clone(), rec.annotator_id.clone())) {
            return Err(Error::Validation(format!(
                "duplicate annotation for tweet {:?} by annotator {:?}",
                rec.tweet_id, rec.annotator_id
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Groups records by tweet id, preserving first-appearance order of tweets.
pub fn group_by_tweet(records: &[AnnotationRecord]) -> Vec<(String, Vec<&AnnotationRecord>)> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<&AnnotationRecord>> = BTreeMap::new();
    for rec in records {
        if !groups.contains_key(&rec.tweet_id) {
            order.push(rec.tweet_id.clone());
        }
        groups.entry(rec.tweet_id.clone()).or_default().push(rec);
    }
    order
        .into_iter()
        .map(|id| {
            let recs = groups.remove(&id).expect("group exists");
            (id, recs)
        })
        .collect()
}

/// Joins utterances with aggregated annotations. Utterances that have no
/// annotation records are skipped (returned as a count); utterances with a
/// single record propagate the aggregation error.
pub fn label_utterances(
    utterances: &[Utterance],
    records: &[AnnotationRecord],
) -> Result<(Vec<LabeledExample>, usize)> {
    let mut by_tweet: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for rec in records {
        by_tweet.entry(rec.tweet_id.as_str()).or_default().push(rec);
    }
    let mut out = Vec::new();
    let mut unannotated = 0usize;
    for utt in utterances {
        match by_tweet.get(utt.id.as_str()) {
            None => unannotated += 1,
            Some(recs) => {
                let owned: Vec<AnnotationRecord> = recs.iter().map(|&r| r.clone()).collect();
                let agg = aggregate_labels(&owned)
                    .map_err(|e| Error::Validation(format!("tweet {:?}: {e}", utt.id)))?;
                out.push(LabeledExample::new(utt.clone(), agg));
            }
        }
    }
    Ok((out, unannotated))
}

/// Writes labeled examples as JSON lines.
pub fn write_examples(examples: &[LabeledExample], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for ex in examples {
        let line = serde_json::to_string(ex).expect("example serializes");
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Loads labeled examples from JSON lines.
pub fn load_examples(path: &Path) -> Result<Vec<LabeledExample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: LabeledExample =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        ex.utterance
            .check_invariants()
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        out.push(ex);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Party;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rec(tweet: &str, annotator: &str, emotions: &[Emotion]) -> AnnotationRecord {
        AnnotationRecord {
            tweet_id: tweet.into(),
            annotator_id: annotator.into(),
            emotions: emotions.iter().copied().collect(),
        }
    }

    fn example(id: &str, igr: IgrLabel, emotions: &[Emotion]) -> LabeledExample {
        let (sp, tp) = match igr {
            IgrLabel::InGroup => (Party::Democrat, Party::Democrat),
            IgrLabel::OutGroup => (Party::Democrat, Party::Republican),
        };
        let utt = Utterance::new(id, format!("x @USER {id}"), sp, "t", tp, 2018, "@USER").unwrap();
        LabeledExample::new(utt, emotions.iter().copied().collect())
    }

    #[test]
    fn two_of_three_rule() {
        let records = vec![
            rec("t", "a", &[Emotion::Joy]),
            rec("t", "b", &[Emotion::Joy, Emotion::Interest]),
            rec("t", "c", &[Emotion::Joy]),
        ];
        assert_eq!(
            aggregate_labels(&records).unwrap(),
            EmotionSet::single(Emotion::Joy)
        );
    }

    #[test]
    fn no_label_reaches_two() {
        let records = vec![
            rec("t", "a", &[Emotion::Anger]),
            rec("t", "b", &[Emotion::Disgust]),
            rec("t", "c", &[Emotion::Joy]),
        ];
        assert!(aggregate_labels(&records).unwrap().is_empty());
    }

    #[test]
    fn aggregate_requires_two_records() {
        assert!(aggregate_labels(&[rec("t", "a", &[Emotion::Joy])]).is_err());
        assert!(aggregate_labels(&[]).is_err());
        // Two records from the same annotator do not count as two voters.
        // (load_annotations rejects this shape, aggregate guards anyway)
        let dup = vec![
            rec("t", "a", &[Emotion::Joy]),
            rec("t", "a", &[Emotion::Joy]),
        ];
        assert!(aggregate_labels(&dup).is_err());
    }

    // Brute-force counting oracle over exhaustive and sampled vote patterns.
    fn oracle(records: &[AnnotationRecord]) -> EmotionSet {
        let mut out = EmotionSet::EMPTY;
        for e in Emotion::ALL {
            let mut votes = 0;
            for r in records {
                if r.emotions.iter().any(|x| x == e) {
                    votes += 1;
                }
            }
            if votes >= 2 {
                out.insert(e);
            }
        }
        out
    }

    #[test]
    fn aggregate_matches_oracle_exhaustive_per_label() {
        for e in Emotion::ALL {
            for pattern in 0..8u8 {
                let records: Vec<AnnotationRecord> = (0..3)
                    .map(|a| {
                        let mut set = EmotionSet::EMPTY;
                        if pattern & (1 << a) != 0 {
                            set.insert(e);
                        }
                        AnnotationRecord {
                            tweet_id: "t".into(),
                            annotator_id: format!("a{a}"),
                            emotions: set,
                        }
                    })
                    .collect();
                assert_eq!(aggregate_labels(&records).unwrap(), oracle(&records));
            }
        }
    }

    #[test]
    fn aggregate_matches_oracle_sampled_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10_000 {
            let records: Vec<AnnotationRecord> = (0..3)
                .map(|a| AnnotationRecord {
                    tweet_id: "t".into(),
                    annotator_id: format!("a{a}"),
                    emotions: EmotionSet { bits: rng.gen() },
                })
                .collect();
            assert_eq!(aggregate_labels(&records).unwrap(), oracle(&records));
        }
    }

    #[test]
    fn aggregate_is_permutation_invariant_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let mut records: Vec<AnnotationRecord> = (0..3)
                .map(|a| AnnotationRecord {
                    tweet_id: "t".into(),
                    annotator_id: format!("a{a}"),
                    emotions: EmotionSet { bits: rng.gen() },
                })
                .collect();
            let base = aggregate_labels(&records).unwrap();
            records.reverse();
            assert_eq!(aggregate_labels(&records).unwrap(), base);

            // Adding one emotion to one annotator never removes aggregates.
            let victim = rng.gen_range(0..3);
            let added = Emotion::ALL[rng.gen_range(0..8)];
            records[victim].emotions.insert(added);
            let grown = aggregate_labels(&records).unwrap();
            assert!(base.is_subset_of(grown));
        }
    }

    #[test]
    fn absolute_threshold_with_extra_annotators() {
        let records = vec![
            rec("t", "a", &[Emotion::Joy]),
            rec("t", "b", &[Emotion::Joy]),
            rec("t", "c", &[]),
            rec("t", "d", &[]),
            rec("t", "e", &[]),
        ];
        assert_eq!(
            aggregate_labels(&records).unwrap(),
            EmotionSet::single(Emotion::Joy)
        );
    }

    #[test]
    fn split_sizes_follow_floor_arithmetic() {
        let examples: Vec<LabeledExample> = (0..3033)
            .map(|i| example(&format!("t{i}"), IgrLabel::InGroup, &[Emotion::Joy]))
            .collect();
        let split = split_dataset(&examples, (0.8, 0.1, 0.1), 1).unwrap();
        assert_eq!(split.train.len(), 2426);
        assert_eq!(split.dev.len(), 303);
        assert_eq!(split.test.len(), 304);

        let ten: Vec<LabeledExample> = (0..10)
            .map(|i| example(&format!("t{i}"), IgrLabel::InGroup, &[]))
            .collect();
        let split = split_dataset(&ten, (0.8, 0.1, 0.1), 1).unwrap();
        assert_eq!(
            (split.train.len(), split.dev.len(), split.test.len()),
            (8, 1, 1)
        );
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let examples: Vec<LabeledExample> = (0..57)
            .map(|i| example(&format!("t{i}"), IgrLabel::OutGroup, &[Emotion::Anger]))
            .collect();
        let a = split_dataset(&examples, (0.8, 0.1, 0.1), 99).unwrap();
        let b = split_dataset(&examples, (0.8, 0.1, 0.1), 99).unwrap();
        let ids = |part: &[LabeledExample]| -> Vec<String> {
            part.iter().map(|x| x.utterance.id.clone()).collect()
        };
        assert_eq!(ids(&a.train), ids(&b.train));
        assert_eq!(ids(&a.dev), ids(&b.dev));
        assert_eq!(ids(&a.test), ids(&b.test));

        let mut all: Vec<String> = ids(&a.train);
        all.extend(ids(&a.dev));
        all.extend(ids(&a.test));
        all.sort();
        let mut want: Vec<String> = examples.iter().map(|x| x.utterance.id.clone()).collect();
        want.sort();
        assert_eq!(all, want);
    }

    #[test]
    fn split_validates_inputs() {
        let examples: Vec<LabeledExample> = (0..12)
            .map(|i| example(&format!("t{i}"), IgrLabel::InGroup, &[]))
            .collect();
        assert!(matches!(
            split_dataset(&examples, (0.8, 0.1, 0.2), 0),
            Err(Error::Config(_))
        ));
        assert!(split_dataset(&examples[..5], (0.8, 0.1, 0.1), 0).is_err());
    }

    #[test]
    fn count_table_counts_labels_and_empties() {
        let split = DatasetSplit {
            train: vec![example(
                "a",
                IgrLabel::InGroup,
                &[Emotion::Joy, Emotion::Admiration],
            )],
            dev: vec![],
            test: vec![example("b", IgrLabel::OutGroup, &[])],
        };
        let table = emotion_count_table(&split);
        let row =
            |name: &str| -> [usize; 3] { table.rows.iter().find(|(n, _)| n == name).unwrap().1 };
        assert_eq!(row("joy"), [1, 0, 0]);
        assert_eq!(row("admiration"), [1, 0, 0]);
        assert_eq!(row("anger"), [0, 0, 0]);
        assert_eq!(row("no_emotion"), [0, 0, 1]);
        // Empty split: all zeros.
        let empty = emotion_count_table(&DatasetSplit::default());
        assert!(empty
            .rows
            .iter()
            .all(|(_, cells)| cells.iter().all(|&c| c == 0)));
        assert!(empty.non_empty_rows().is_empty());
    }

    #[test]
    fn emotion_set_serde_uses_canonical_names() {
        let set: EmotionSet = [Emotion::Anger, Emotion::Joy].into_iter().collect();
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(json, r#"["joy","anger"]"#);
        let back: EmotionSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
        assert_eq!(serde_json::to_string(&EmotionSet::EMPTY).unwrap(), "[]");
    }
}
