//! Run settings resolved from three layers: built-in defaults, an
//! optional `key = value` config file, then command-line flags. Later
//! layers win. Unknown keys are rejected by name.

use std::path::{Path, PathBuf};

use seqtag_core::pretrain::CorruptionConfig;
use seqtag_core::train::TrainConfig;
use seqtag_core::{Error, Result};

/// Everything a run can be configured with. `max_common` only matters to
/// `build-vocab` but lives here so one config file can drive a whole
/// pipeline.
#[derive(Debug, Clone)]
pub struct Settings {
    pub train: TrainConfig,
    pub corruption: CorruptionConfig,
    pub max_common: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            train: TrainConfig::default(),
            corruption: CorruptionConfig::default(),
            max_common: usize::MAX,
        }
    }
}

impl Settings {
    /// Apply one config-file entry. Errors name the offending key.
    fn apply(&mut self, key: &str, value: &str, where_: &str) -> Result<()> {
        let bad = |what: &str| {
            Error::InvalidConfig(format!("{where_}: {what} for key {key:?}: {value:?}"))
        };
        macro_rules! parse {
            ($ty:ty) => {
                value.parse::<$ty>().map_err(|_| bad("bad value"))?
            };
        }
        match key {
            "learning_rate" | "lr" => self.train.learning_rate = parse!(f64),
            "max_epochs" | "epochs" => self.train.max_epochs = parse!(usize),
            "hidden" => self.train.hidden = parse!(usize),
            "embed_dim" => self.train.embed_dim = parse!(usize),
            "seed" => self.train.seed = parse!(u64),
            "patience" => {
                self.train.patience = if value == "none" {
                    None
                } else {
                    Some(parse!(usize))
                }
            }
            "shuffle" => self.train.shuffle = parse!(bool),
            "case" => self.train.use_case = parse!(bool),
            "suffix2" => self.train.use_suffix2 = parse!(bool),
            "emb_init" => {
                self.train.emb_init = if value == "none" {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "grad_clip" => {
                self.train.grad_clip = if value == "none" {
                    None
                } else {
                    Some(parse!(f64))
                }
            }
            "peepholes" => self.train.peepholes = parse!(bool),
            "replace_rate" => self.corruption.replace_rate = parse!(f64),
            "corruption_seed" => self.corruption.seed = parse!(u64),
            "exclude_unk" => self.corruption.exclude_unk_replacement = parse!(bool),
            "frequency_weighted" => self.corruption.frequency_weighted = parse!(bool),
            "max_common" => self.max_common = parse!(usize),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "{where_}: unknown config key {key:?}"
                )))
            }
        }
        Ok(())
    }

    /// Merge a config file into these settings. Blank lines and lines
    /// starting with `#` are skipped; everything else must be
    /// `key = value`.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let where_ = format!("{}:{}", path.display(), i + 1);
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!(
                    "{where_}: expected `key = value`, got {line:?}"
                )));
            };
            self.apply(key.trim(), value.trim(), &where_)?;
        }
        Ok(())
    }

    /// One-line rendering of every resolved setting, for the run log.
    pub fn log_line(&self) -> String {
        let opt_usize = |v: Option<usize>| v.map_or("none".to_string(), |x| x.to_string());
        let opt_f64 = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        let opt_path = |v: &Option<PathBuf>| {
            v.as_ref()
                .map_or("none".to_string(), |p| p.display().to_string())
        };
        format!(
            "seed={} learning_rate={} max_epochs={} hidden={} embed_dim={} patience={} \
             shuffle={} case={} suffix2={} emb_init={} grad_clip={} peepholes={} \
             replace_rate={} corruption_seed={} exclude_unk={} frequency_weighted={} \
             max_common={}",
            self.train.seed,
            self.train.learning_rate,
            self.train.max_epochs,
            self.train.hidden,
            self.train.embed_dim,
            opt_usize(self.train.patience),
            self.train.shuffle,
            self.train.use_case,
            self.train.use_suffix2,
            opt_path(&self.train.emb_init),
            opt_f64(self.train.grad_clip),
            self.train.peepholes,
            self.corruption.replace_rate,
            self.corruption.seed,
            self.corruption.exclude_unk_replacement,
            self.corruption.frequency_weighted,
            if self.max_common == usize::MAX {
                "all".to_string()
            } else {
                self.max_common.to_string()
            },
        )
    }
}
