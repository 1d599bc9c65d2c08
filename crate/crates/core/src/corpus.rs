//! Raw tweet ingestion: member directory, interpersonal filtering, IGR
//! derivation, target masking, and balanced sampling.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placeholder used when masking targets in model inputs.
pub const TRAIN_PLACEHOLDER: &str = "@USER";
/// Placeholder used when rendering tweets for annotation display.
pub const DISPLAY_PLACEHOLDER: &str = "@Doe";

/// Group identity of a speaker or target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Democrat,
    Republican,
}

impl Party {
    pub fn parse(s: &str) -> Result<Party> {
        match s.trim().to_ascii_lowercase().as_str() {
            "democrat" | "d" => Ok(Party::Democrat),
            "republican" | "r" => Ok(Party::Republican),
            other => Err(Error::Validation(format!("unknown party {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Party::Democrat => "democrat",
            Party::Republican => "republican",
        }
    }
}

/// Whether speaker and target share the salient social group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgrLabel {
    InGroup,
    OutGroup,
}

impl IgrLabel {
    pub fn name(self) -> &'static str {
        match self {
            IgrLabel::InGroup => "in_group",
            IgrLabel::OutGroup => "out_group",
        }
    }
}

/// One directory entry: a member whose party affiliation is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    /// Lowercase handle, unique within a directory.
    pub handle: String,
    pub party: Party,
    /// Inclusive active year range.
    pub active_years: (i32, i32),
}

impl Member {
    pub fn new(
        handle: impl Into<String>,
        party: Party,
        active_years: (i32, i32),
    ) -> Result<Member> {
        let handle = handle.into().to_ascii_lowercase();
        if handle.is_empty() {
            return Err(Error::Validation("member handle is empty".into()));
        }
        if active_years.0 > active_years.1 {
            return Err(Error::Validation(format!(
                "member {handle}: year range {}..{} is inverted",
                active_years.0, active_years.1
            )));
        }
        Ok(Member {
            handle,
            party,
            active_years,
        })
    }
}

/// Handle-keyed member directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemberDirectory {
    members: BTreeMap<String, Member>,
}

impl MemberDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserting a duplicate handle is a validation error.
    pub fn insert(&mut self, member: Member) -> Result<()> {
        if self.members.contains_key(&member.handle) {
            return Err(Error::Validation(format!(
                "duplicate handle {:?}",
                member.handle
            )));
        }
        self.members.insert(member.handle.clone(), member);
        Ok(())
    }

    pub fn get(&self, handle: &str) -> Option<&Member> {
        self.members.get(&handle.to_ascii_lowercase())
    }

    pub fn contains(&self, handle: &str) -> bool {
        self.get(handle).is_some()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Member> {
        self.members.values()
    }
}

/// One tweet as ingested, before interpersonal filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    #[serde(rename = "speaker")]
    pub speaker_handle: String,
    pub text: String,
    pub mentions: Vec<String>,
    pub year: i32,
    pub is_retweet: bool,
}

/// A filtered, masked utterance with its found-supervision IGR label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: String,
    pub masked_text: String,
    pub speaker_party: Party,
    pub target_handle: String,
    pub target_party: Party,
    pub igr: IgrLabel,
    pub year: i32,
}

impl Utterance {
    /// Builds an utterance, enforcing that the masked text carries exactly one
    /// placeholder occurrence and that the IGR label matches the parties.
    pub fn new(
        id: impl Into<String>,
        masked_text: impl Into<String>,
        speaker_party: Party,
        target_handle: impl Into<String>,
        target_party: Party,
        year: i32,
        placeholder: &str,
    ) -> Result<Utterance> {
        let masked_text = masked_text.into();
        let occurrences = masked_text.matches(placeholder).count();
        if occurrences != 1 {
            return Err(Error::Validation(format!(
                "masked text must contain the placeholder exactly once, found {occurrences}"
            )));
        }
        Ok(Utterance {
            id: id.into(),
            masked_text,
            speaker_party,
            target_handle: target_handle.into().to_ascii_lowercase(),
            target_party,
            igr: derive_igr(speaker_party, target_party),
            year,
        })
    }

    /// Revalidates the type invariants after deserialization: the IGR label
    /// must match the parties and the masked text must carry exactly one
    /// training placeholder.
    pub fn check_invariants(&self) -> Result<()> {
        if self.igr != derive_igr(self.speaker_party, self.target_party) {
            return Err(Error::Validation(format!(
                "utterance {:?}: igr label contradicts the party pair",
                self.id
            )));
        }
        let occurrences = self.masked_text.matches(TRAIN_PLACEHOLDER).count();
        if occurrences != 1 {
            return Err(Error::Validation(format!(
                "utterance {:?}: expected one {TRAIN_PLACEHOLDER} placeholder, found {occurrences}",
                self.id
            )));
        }
        Ok(())
    }
}

/// Loads a member directory from TSV: `handle<TAB>party<TAB>year_start<TAB>year_end`.
/// `#`-prefixed lines and blank lines are skipped; columns past the fourth are
/// carried in the file but unused.
pub fn load_member_directory(path: &Path) -> Result<MemberDirectory> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut dir = MemberDirectory::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 4 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 4 tab-separated columns, found {}", cols.len()),
            ));
        }
        let party = Party::parse(cols[1]).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let start: i32 = cols[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad year_start {:?}", cols[2])))?;
        let end: i32 = cols[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad year_end {:?}", cols[3])))?;
        let member = Member::new(cols[0].trim(), party, (start, end))
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        dir.insert(member)?;
    }
    Ok(dir)
}

/// Loads a JSON-lines tweet corpus. Duplicate tweet ids are a validation error.
pub fn load_tweets(path: &Path) -> Result<Vec<RawTweet>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut tweets: Vec<RawTweet> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let tweet: RawTweet =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        if !seen.insert(tweet.id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate tweet id {:?}",
                tweet.id
            )));
        }
        tweets.push(tweet);
    }
    Ok(tweets)
}

/// Extracts `@`-prefixed mentions as maximal runs of `[A-Za-z0-9_]`,
/// lowercased. Order of first appearance, no duplicates.
pub fn extract_mentions(text: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'@' {
            let start = i + 1;
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            if end > start {
                let handle = text[start..end].to_ascii_lowercase();
                if !out.contains(&handle) {
                    out.push(handle);
                }
            }
            i = end.max(start);
        } else {
            i += 1;
        }
    }
    out
}

/// All mentions of a tweet: text-extracted union the stored list, minus the
/// speaker's own handle.
fn effective_mentions(tweet: &RawTweet) -> Vec<String> {
    let speaker = tweet.speaker_handle.to_ascii_lowercase();
    let mut mentions = extract_mentions(&tweet.text);
    for m in &tweet.mentions {
        let m = m.to_ascii_lowercase();
        if !mentions.contains(&m) {
            mentions.push(m);
        }
    }
    mentions.retain(|m| *m != speaker);
    mentions
}

/// Keeps non-retweets that mention exactly one directory member other than the
/// speaker. Mentions outside the directory are allowed.
pub fn filter_interpersonal(tweets: &[RawTweet], dir: &MemberDirectory) -> Vec<RawTweet> {
    tweets
        .iter()
        .filter(|t| !t.is_retweet)
        .filter(|t| {
            let known: Vec<String> = effective_mentions(t)
                .into_iter()
                .filter(|m| dir.contains(m))
                .collect();
            known.len() == 1
        })
        .cloned()
        .collect()
}

/// The single directory-member target of a filtered tweet.
pub fn tweet_target(tweet: &RawTweet, dir: &MemberDirectory) -> Option<String> {
    let known: Vec<String> = effective_mentions(tweet)
        .into_iter()
        .filter(|m| dir.contains(m))
        .collect();
    match known.as_slice() {
        [single] => Some(single.clone()),
        _ => None,
    }
}

/// In-group iff speaker and target share a party.
pub fn derive_igr(speaker_party: Party, target_party: Party) -> IgrLabel {
    if speaker_party == target_party {
        IgrLabel::InGroup
    } else {
        IgrLabel::OutGroup
    }
}

/// Replaces every `@target_handle` mention (case-insensitive, maximal-run
/// match) with `placeholder`. The target must appear at least once.
pub fn mask_target(text: &str, target_handle: &str, placeholder: &str) -> Result<String> {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut replaced = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'@' {
            let start = i + 1;
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            let run = &text[start..end];
            if end > start && run.eq_ignore_ascii_case(target_handle) {
                out.push_str(placeholder);
                replaced += 1;
            } else {
                out.push_str(&text[i..end]);
            }
            i = end.max(start);
        } else {
            let ch = text[i..].chars().next().expect("in-bounds char");
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    if replaced == 0 {
        return Err(Error::Validation(format!(
            "target @{target_handle} does not appear in text"
        )));
    }
    Ok(out)
}

/// Per year, draws equal numbers of in-group and out-group utterances:
/// `min(available_in, available_out, per_year_target / 2)` from each class.
/// Deterministic given `seed`; output ordered by year.
pub fn sample_balanced(
    utterances: &[Utterance],
    per_year_target: usize,
    seed: u64,
) -> Result<Vec<Utterance>> {
    if per_year_target < 2 || !per_year_target.is_multiple_of(2) {
        return Err(Error::Validation(format!(
            "per_year_target must be even and >= 2, got {per_year_target}"
        )));
    }
    let mut by_year: BTreeMap<i32, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, u) in utterances.iter().enumerate() {
        let slot = by_year.entry(u.year).or_default();
        match u.igr {
            IgrLabel::InGroup => slot.0.push(i),
            IgrLabel::OutGroup => slot.1.push(i),
        }
    }
    let mut out = Vec::new();
    for (year, (mut ins, mut outs)) in by_year {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(year as u32 as u64);
        ins.shuffle(&mut rng);
        outs.shuffle(&mut rng);
        let take = ins.len().min(outs.len()).min(per_year_target / 2);
        for &i in ins.iter().take(take) {
            out.push(utterances[i].clone());
        }
        for &i in outs.iter().take(take) {
            out.push(utterances[i].clone());
        }
    }
    Ok(out)
}

/// Full ingest: filter, derive IGR, mask. Tweets whose speaker is not in the
/// directory are skipped (no speaker party available), as are tweets whose
/// target is mentioned more than once, so the single-placeholder invariant
/// holds. Returns utterances plus a skip count.
pub fn build_utterances(
    tweets: &[RawTweet],
    dir: &MemberDirectory,
    placeholder: &str,
) -> (Vec<Utterance>, usize) {
    let filtered = filter_interpersonal(tweets, dir);
    let mut out = Vec::with_capacity(filtered.len());
    let mut skipped = 0usize;
    for tweet in &filtered {
        let speaker = match dir.get(&tweet.speaker_handle) {
            Some(m) => m,
            None => {
                skipped += 1;
                continue;
            }
        };
        let target_handle = match tweet_target(tweet, dir) {
            Some(h) => h,
            None => {
                skipped += 1;
                continue;
            }
        };
        let target = dir.get(&target_handle).expect("target is in directory");
        let masked = match mask_target(&tweet.text, &target_handle, placeholder) {
            Ok(m) => m,
            Err(_) => {
                // Target came from the stored mention list, not the text.
                skipped += 1;
                continue;
            }
        };
        match Utterance::new(
            &tweet.id,
            masked,
            speaker.party,
            &target_handle,
            target.party,
            tweet.year,
            placeholder,
        ) {
            Ok(u) => out.push(u),
            Err(_) => skipped += 1,
        }
    }
    (out, skipped)
}

/// Writes utterances as JSON lines.
pub fn write_utterances(utterances: &[Utterance], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for u in utterances {
        let line = serde_json::to_string(u).expect("utterance serializes");
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Loads utterances from JSON lines.
pub fn load_utterances(path: &Path) -> Result<Vec<Utterance>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let u: Utterance =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        u.check_invariants()
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        out.push(u);
    }
    Ok(out)
}
