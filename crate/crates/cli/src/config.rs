//! Flat key=value configuration files. Precedence everywhere is
//! flags > config file > built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use intergroup_core::{Error, Result};

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "jobs",
    "per_year",
    "n",
    "year_start",
    "year_end",
    "members_per_party",
    "outgroup_cue_prob",
    "noise_rate",
    "flip_rate",
    "vocab_max_size",
    "vocab_min_count",
    "alpha",
    "binarize",
    "restarts",
    "max_epochs",
    "patience",
    "lr_head",
    "lr_encoder",
    "dropout",
    "hidden_dim",
    "emolex_threshold",
    "bootstrap",
    "topk",
    "top_features",
];

const EMOTION_SLOTS: &[&str] = &[
    "joy",
    "admiration",
    "fear",
    "surprise",
    "sadness",
    "disgust",
    "anger",
    "interest",
    "none",
];

/// Parsed config file contents.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut map = BTreeMap::new();
        for (idx, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected key=value, got {line:?}"),
                ));
            };
            let key = key.trim().to_string();
            if !key_is_known(&key) {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("unknown config key {key:?}"),
                ));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { map })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse_with(key, str::parse::<u64>)
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_with(key, str::parse::<usize>)
    }

    pub fn get_i32(&self, key: &str) -> Result<Option<i32>> {
        self.parse_with(key, str::parse::<i32>)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, str::parse::<f64>)
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.parse_with(key, |s| match s {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(format!("not a boolean: {other:?}")),
        })
    }

    fn parse_with<T, E: std::fmt::Display>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> std::result::Result<T, E>,
    ) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => parse(v)
                .map(Some)
                .map_err(|e| Error::Config(format!("config key {key}: {e}"))),
        }
    }

    /// Overrides one side of the emotion-given-IGR table from
    /// `emotion_in.<label>` / `emotion_out.<label>` keys.
    pub fn emotion_overrides(&self, side: &str, dist: &mut [f64; 9]) -> Result<()> {
        for (i, slot) in EMOTION_SLOTS.iter().enumerate() {
            if let Some(v) = self.get_f64(&format!("emotion_{side}.{slot}"))? {
                dist[i] = v;
            }
        }
        Ok(())
    }
}

fn key_is_known(key: &str) -> bool {
    if KNOWN_KEYS.contains(&key) {
        return true;
    }
    for side in ["emotion_in.", "emotion_out."] {
        if let Some(slot) = key.strip_prefix(side) {
            return EMOTION_SLOTS.contains(&slot);
        }
    }
    false
}

/// flag > config > default, for any copyable value.
pub fn resolve<T: Copy>(flag: Option<T>, config: Result<Option<T>>, default: T) -> Result<T> {
    Ok(flag.or(config?).unwrap_or(default))
}
