//! Flat `section.key = value` run configuration.
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use crate::embeddings::EmbeddingFormat;
use crate::error::{Error, Result};
use crate::pipeline::{sha256_hex, PipelineConfig, ResourcePaths};
use crate::svm::SvmConfig;
use crate::textproc::KeywordMode;

/// File locations as written in the config; relative paths resolve against
/// the directory holding the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathsConfig {
    pub train_stances: Option<PathBuf>,
    pub train_bodies: Option<PathBuf>,
    pub test_stances: Option<PathBuf>,
    pub test_bodies: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub embedding_format: Option<EmbeddingFormat>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub boosters: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub refuting_words: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub base_dir: PathBuf,
    pub paths: PathsConfig,
    pub pipeline: PipelineConfig,
    /// Cross-validation folds for `tune`.
    pub folds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            base_dir: PathBuf::from("."),
            paths: PathsConfig::default(),
            pipeline: PipelineConfig::with_dim(0),
            folds: 10,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| Error::Config(format!("{key}: cannot parse {raw:?}: {e}")))
}

fn set_alpha(cfg: &mut SvmConfig, balanced: &mut bool, key: &str, field: &str, raw: &str) -> Result<()> {
    if raw == "auto" {
        *balanced = true;
        return Ok(());
    }
    let v: f64 = value(key, raw)?;
    *balanced = false;
    match field {
        "alpha_pos" => cfg.alpha_pos = v,
        "alpha_neg" => cfg.alpha_neg = v,
        _ => {
            // alpha_ratio: positive-class penalty relative to a unit negative one.
            cfg.alpha_pos = v;
            cfg.alpha_neg = 1.0;
        }
    }
    Ok(())
}

fn set_svm(cfg: &mut SvmConfig, balanced: &mut bool, key: &str, field: &str, raw: &str) -> Result<bool> {
    match field {
        "alpha_pos" | "alpha_neg" | "alpha_ratio" => set_alpha(cfg, balanced, key, field, raw)?,
        "epochs" => cfg.epochs = value(key, raw)?,
        "learning_rate" => cfg.learning_rate = value(key, raw)?,
        "seed" => cfg.seed = value(key, raw)?,
        "tolerance" => cfg.tolerance = value(key, raw)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn opt_path(raw: &str) -> Option<PathBuf> {
    (!raw.is_empty()).then(|| PathBuf::from(raw))
}

impl RunConfig {
    /// Parses config text; `#` starts a comment, later keys override earlier ones.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = RunConfig {
            base_dir: base_dir.to_path_buf(),
            ..RunConfig::default()
        };
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), raw.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, config_message(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Assigns one key; unknown keys are an error.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let unknown = || Error::Config(format!("unknown key {key:?}"));
        let (section, field) = key.split_once('.').ok_or_else(unknown)?;
        let p = &mut self.pipeline;
        match section {
            "paths" => {
                let paths = &mut self.paths;
                let slot = match field {
                    "train_stances" => &mut paths.train_stances,
                    "train_bodies" => &mut paths.train_bodies,
                    "test_stances" => &mut paths.test_stances,
                    "test_bodies" => &mut paths.test_bodies,
                    "embeddings" => &mut paths.embeddings,
                    "sentiment_lexicon" => &mut paths.sentiment_lexicon,
                    "boosters" => &mut paths.boosters,
                    "negators" => &mut paths.negators,
                    "categories" => &mut paths.categories,
                    "refuting_words" => &mut paths.refuting_words,
                    "stopwords" => &mut paths.stopwords,
                    "output" => &mut paths.output,
                    "embedding_format" => {
                        paths.embedding_format = Some(value(key, raw)?);
                        return Ok(());
                    }
                    _ => return Err(unknown()),
                };
                *slot = opt_path(raw);
            }
            "stage1" => {
                if !set_svm(&mut p.stage1, &mut p.stage1_balanced, key, field, raw)? {
                    return Err(unknown());
                }
            }
            "stage3" => {
                if !set_svm(&mut p.stage3, &mut p.stage3_balanced, key, field, raw)? {
                    return Err(unknown());
                }
            }
            "stage2" => {
                let c = &mut p.stage2;
                match field {
                    "eta" => c.eta = value(key, raw)?,
                    "filters" => c.filters = value(key, raw)?,
                    "k" => c.k = value(key, raw)?,
                    "p" => c.p = value(key, raw)?,
                    "hidden" => c.hidden = value(key, raw)?,
                    "l2_lambda" => c.l2_lambda = value(key, raw)?,
                    "learning_rate" => c.learning_rate = value(key, raw)?,
                    "epochs" => c.epochs = value(key, raw)?,
                    "batch_size" => c.batch_size = value(key, raw)?,
                    "seed" => c.seed = value(key, raw)?,
                    _ => return Err(unknown()),
                }
            }
            "split" => match field {
                "validation_fraction" => p.validation_fraction = value(key, raw)?,
                "seed" => p.split_seed = value(key, raw)?,
                "folds" => self.folds = value(key, raw)?,
                _ => return Err(unknown()),
            },
            "keywords" => {
                let k = &mut p.keywords;
                match field {
                    "mode" => {
                        k.mode = match raw {
                            "offline" => KeywordMode::OfflineTfIdf,
                            "remote" => KeywordMode::RemoteService,
                            _ => return Err(Error::Config(format!("{key}: expected offline or remote"))),
                        }
                    }
                    "k" => k.k = value(key, raw)?,
                    "endpoint" => k.endpoint = (!raw.is_empty()).then(|| raw.to_string()),
                    "timeout_ms" => k.timeout = Duration::from_millis(value(key, raw)?),
                    "fallback_to_offline" => k.fallback_to_offline = value(key, raw)?,
                    "max_concurrent" => k.max_concurrent = value(key, raw)?,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(unknown()),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.pipeline;
        let wrap = |e: Error| Error::Config(config_message(e));
        p.stage1.validate().map_err(wrap)?;
        p.stage3.validate().map_err(wrap)?;
        let mut cnn = p.stage2.clone();
        cnn.d = cnn.d.max(1);
        cnn.validate().map_err(wrap)?;
        p.keywords.validate().map_err(wrap)?;
        if !(0.0..1.0).contains(&p.validation_fraction) {
            return Err(Error::Config(format!(
                "split.validation_fraction must be in [0, 1), got {}",
                p.validation_fraction
            )));
        }
        if self.folds < 2 {
            return Err(Error::Config("split.folds must be at least 2".into()));
        }
        Ok(())
    }

    /// Sets every seed to `seed`.
    pub fn override_seed(&mut self, seed: u64) {
        let p = &mut self.pipeline;
        p.stage1.seed = seed;
        p.stage2.seed = seed;
        p.stage3.seed = seed;
        p.split_seed = seed;
    }

    /// Canonical text; parsing it back yields an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let ps = &self.paths;
        for (k, v) in [
            ("train_stances", &ps.train_stances),
            ("train_bodies", &ps.train_bodies),
            ("test_stances", &ps.test_stances),
            ("test_bodies", &ps.test_bodies),
            ("embeddings", &ps.embeddings),
            ("sentiment_lexicon", &ps.sentiment_lexicon),
            ("boosters", &ps.boosters),
            ("negators", &ps.negators),
            ("categories", &ps.categories),
            ("refuting_words", &ps.refuting_words),
            ("stopwords", &ps.stopwords),
            ("output", &ps.output),
        ] {
            line(&format!("paths.{k}"), path(v));
        }
        if let Some(f) = ps.embedding_format {
            line("paths.embedding_format", f.name().into());
        }
        let p = &self.pipeline;
        for (name, svm, balanced) in [
            ("stage1", &p.stage1, p.stage1_balanced),
            ("stage3", &p.stage3, p.stage3_balanced),
        ] {
            if balanced {
                line(&format!("{name}.alpha_pos"), "auto".into());
                line(&format!("{name}.alpha_neg"), "auto".into());
            } else {
                line(&format!("{name}.alpha_pos"), svm.alpha_pos.to_string());
                line(&format!("{name}.alpha_neg"), svm.alpha_neg.to_string());
            }
            line(&format!("{name}.epochs"), svm.epochs.to_string());
            line(&format!("{name}.learning_rate"), svm.learning_rate.to_string());
            line(&format!("{name}.seed"), svm.seed.to_string());
            line(&format!("{name}.tolerance"), svm.tolerance.to_string());
        }
        let c = &p.stage2;
        line("stage2.eta", c.eta.to_string());
        line("stage2.filters", c.filters.to_string());
        line("stage2.k", c.k.to_string());
        line("stage2.p", c.p.to_string());
        line("stage2.hidden", c.hidden.to_string());
        line("stage2.l2_lambda", c.l2_lambda.to_string());
        line("stage2.learning_rate", c.learning_rate.to_string());
        line("stage2.epochs", c.epochs.to_string());
        line("stage2.batch_size", c.batch_size.to_string());
        line("stage2.seed", c.seed.to_string());
        line("split.validation_fraction", p.validation_fraction.to_string());
        line("split.seed", p.split_seed.to_string());
        line("split.folds", self.folds.to_string());
        let k = &p.keywords;
        let mode = match k.mode {
            KeywordMode::OfflineTfIdf => "offline",
            KeywordMode::RemoteService => "remote",
        };
        line("keywords.mode", mode.into());
        line("keywords.k", k.k.to_string());
        line("keywords.endpoint", k.endpoint.clone().unwrap_or_default());
        line("keywords.timeout_ms", k.timeout.as_millis().to_string());
        line("keywords.fallback_to_offline", k.fallback_to_offline.to_string());
        line("keywords.max_concurrent", k.max_concurrent.to_string());
        out
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_text().as_bytes())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Copy with every path absolute, so its text parses the same from any directory.
    pub fn absolutized(&self) -> Result<RunConfig> {
        let base = std::path::absolute(&self.base_dir).map_err(|e| Error::io(&self.base_dir, e))?;
        let mut out = self.clone();
        let ps = &mut out.paths;
        for slot in [
            &mut ps.train_stances,
            &mut ps.train_bodies,
            &mut ps.test_stances,
            &mut ps.test_bodies,
            &mut ps.embeddings,
            &mut ps.sentiment_lexicon,
            &mut ps.boosters,
            &mut ps.negators,
            &mut ps.categories,
            &mut ps.refuting_words,
            &mut ps.stopwords,
            &mut ps.output,
        ] {
            if let Some(p) = slot.as_mut() {
                *p = base.join(&*p);
            }
        }
        out.base_dir = base;
        Ok(out)
    }

    /// Resolved path for a required entry.
    pub fn require(&self, name: &str, path: &Option<PathBuf>) -> Result<PathBuf> {
        path.as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::Config(format!("paths.{name} is not set")))
    }

    pub fn resource_paths(&self) -> Result<ResourcePaths> {
        let ps = &self.paths;
        let embeddings = self.require("embeddings", &ps.embeddings)?;
        let format = ps.embedding_format.unwrap_or_else(|| {
            if embeddings.extension().is_some_and(|e| e == "bin") {
                EmbeddingFormat::Word2vecBinary
            } else {
                EmbeddingFormat::Word2vecText
            }
        });
        let opt = |p: &Option<PathBuf>| p.as_deref().map(|p| self.resolve(p));
        Ok(ResourcePaths {
            embeddings,
            embedding_format: format,
            sentiment_lexicon: opt(&ps.sentiment_lexicon),
            boosters: opt(&ps.boosters),
            negators: opt(&ps.negators),
            categories: opt(&ps.categories),
            refuting_words: opt(&ps.refuting_words),
            stopwords: opt(&ps.stopwords),
        })
    }
}

fn config_message(e: Error) -> String {
    match e {
        Error::Config(m) | Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}
