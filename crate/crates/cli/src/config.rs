//! Experiment configuration.
//!
//! The native format is flat UTF-8 text, one `key = value` per line; `#`
//! starts a comment and blank lines are ignored. A `manifest.json` written by
//! a previous run is accepted too, which makes every run replayable.
//!
//! | key                  | default          | notes                                            |
//! |----------------------|------------------|--------------------------------------------------|
//! | `task`               | required         | `mnist01`, `mnist08`, `synthetic_malware`, `custom_corpus` |
//! | `layers`             | `2`              | comma-separated, each in `2..=4`                 |
//! | `uploading`          | `true`           | `true`, `false` or `both`                        |
//! | `train_size`         | `10000`          |                                                  |
//! | `test_size`          | `4000`           |                                                  |
//! | `epochs`             | `5`              |                                                  |
//! | `learning_rate`      | `0.1`            |                                                  |
//! | `batch_size`         | `32`             |                                                  |
//! | `spsb_epsilon`       | `0.05`           |                                                  |
//! | `init_mode`          | `random_uniform` | `random_uniform`, `zeros`, `two_pi`              |
//! | `seed`               | `0`              | training stream                                  |
//! | `split_seed`         | = `seed`         | stratified split                                 |
//! | `prob_clamp`         | `1e-10`          |                                                  |
//! | `mnist_dir`          | none             | directory holding the four IDX files             |
//! | `corpus_dir`         | none             | `custom_corpus` input; `synthetic_malware` output |
//! | `synthetic_per_class`| `1000`           |                                                  |
//! | `features_dir`       | none             | load caches written by `prepare` instead of recomputing |
//! | `out_dir`            | `runs`           |                                                  |
//! | `gradcheck_draws`    | `40000`          | SPSB estimates averaged by `gradcheck`           |
//! | `gradcheck_epsilon`  | `1e-3`           |                                                  |
//! | `gradcheck_step`     | `1e-5`           | finite-difference step of the reference gradient |
//! | `gradcheck_tolerance`| `0.05`           | relative l2 bound                                |
//! | `probe_samples`      | `200`            | draws of the gradient-variance probe             |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qcnn::model::MAX_LAYERS;
use qcnn::{InitMode, TrainConfig};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Mnist01,
    Mnist08,
    SyntheticMalware,
    CustomCorpus,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Mnist01 => "mnist01",
            Task::Mnist08 => "mnist08",
            Task::SyntheticMalware => "synthetic_malware",
            Task::CustomCorpus => "custom_corpus",
        }
    }

    /// Malware-style tasks also report training F1.
    pub fn reports_train_f1(&self) -> bool {
        matches!(self, Task::SyntheticMalware | Task::CustomCorpus)
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mnist01" => Ok(Task::Mnist01),
            "mnist08" => Ok(Task::Mnist08),
            "synthetic_malware" => Ok(Task::SyntheticMalware),
            "custom_corpus" => Ok(Task::CustomCorpus),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uploading {
    Standard,
    Uploading,
    Both,
}

impl Uploading {
    pub fn as_str(&self) -> &'static str {
        match self {
            Uploading::Standard => "false",
            Uploading::Uploading => "true",
            Uploading::Both => "both",
        }
    }

    /// Architecture flags in output order.
    pub fn flags(&self) -> &'static [bool] {
        match self {
            Uploading::Standard => &[false],
            Uploading::Uploading => &[true],
            Uploading::Both => &[false, true],
        }
    }
}

impl FromStr for Uploading {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "false" => Ok(Uploading::Standard),
            "true" => Ok(Uploading::Uploading),
            "both" => Ok(Uploading::Both),
            other => Err(format!("uploading must be true, false or both, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub layers: Vec<usize>,
    pub uploading: Uploading,
    pub train_size: usize,
    pub test_size: usize,
    pub train: TrainConfig,
    pub split_seed: Option<u64>,
    pub mnist_dir: Option<PathBuf>,
    pub corpus_dir: Option<PathBuf>,
    pub synthetic_per_class: usize,
    pub features_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub gradcheck_draws: usize,
    pub gradcheck_epsilon: f64,
    pub gradcheck_step: f64,
    pub gradcheck_tolerance: f64,
    pub probe_samples: usize,
}

impl ExperimentConfig {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            layers: vec![2],
            uploading: Uploading::Uploading,
            train_size: 10_000,
            test_size: 4_000,
            train: TrainConfig::default(),
            split_seed: None,
            mnist_dir: None,
            corpus_dir: None,
            synthetic_per_class: 1000,
            features_dir: None,
            out_dir: PathBuf::from("runs"),
            gradcheck_draws: 40_000,
            gradcheck_epsilon: 1e-3,
            gradcheck_step: 1e-5,
            gradcheck_tolerance: 0.05,
            probe_samples: 200,
        }
    }

    pub fn split_seed(&self) -> u64 {
        self.split_seed.unwrap_or(self.train.seed)
    }

    /// Parses `key = value` text or, if the content is a JSON object, a run manifest.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let pairs = if text.trim_start().starts_with('{') { json_pairs(text)? } else { text_pairs(text)? };
        let mut task = None;
        let mut rest = Vec::new();
        for (key, value) in pairs {
            if key == "task" {
                task = Some(value.parse::<Task>().map_err(CliError::Config)?);
            } else {
                rest.push((key, value));
            }
        }
        let mut config = Self::new(task.ok_or_else(|| CliError::Config("missing key `task`".into()))?);
        for (key, value) in rest {
            config.set(&key, &value)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key. Manifest-only keys are ignored so manifests can be fed back in.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{value}`")))
        }
        let path = || (!value.is_empty()).then(|| PathBuf::from(value));
        match key {
            "task" => self.task = value.parse().map_err(CliError::Config)?,
            "layers" => {
                self.layers = value
                    .split(',')
                    .map(|v| num::<usize>(key, v.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "uploading" => self.uploading = value.parse().map_err(CliError::Config)?,
            "train_size" => self.train_size = num(key, value)?,
            "test_size" => self.test_size = num(key, value)?,
            "epochs" => self.train.epochs = num(key, value)?,
            "learning_rate" => self.train.learning_rate = num(key, value)?,
            "batch_size" => self.train.batch_size = num(key, value)?,
            "spsb_epsilon" => self.train.spsb_epsilon = num(key, value)?,
            "init_mode" => self.train.init_mode = value.parse::<InitMode>().map_err(CliError::Config)?,
            "seed" => self.train.seed = num(key, value)?,
            "split_seed" => self.split_seed = Some(num(key, value)?),
            "prob_clamp" => self.train.prob_clamp = num(key, value)?,
            "mnist_dir" => self.mnist_dir = path(),
            "corpus_dir" => self.corpus_dir = path(),
            "synthetic_per_class" => self.synthetic_per_class = num(key, value)?,
            "features_dir" => self.features_dir = path(),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "gradcheck_draws" => self.gradcheck_draws = num(key, value)?,
            "gradcheck_epsilon" => self.gradcheck_epsilon = num(key, value)?,
            "gradcheck_step" => self.gradcheck_step = num(key, value)?,
            "gradcheck_tolerance" => self.gradcheck_tolerance = num(key, value)?,
            "probe_samples" => self.probe_samples = num(key, value)?,
            k if MANIFEST_ONLY.contains(&k) => {}
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.layers.is_empty() {
            return bad("`layers` is empty".into());
        }
        if let Some(n) = self.layers.iter().find(|&&n| !(2..=MAX_LAYERS).contains(&n)) {
            return bad(format!("layer count {n} outside 2..={MAX_LAYERS}"));
        }
        let mut seen = self.layers.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.layers.len() {
            return bad("`layers` lists a count twice".into());
        }
        if self.train_size == 0 || self.test_size == 0 {
            return bad("train_size and test_size must be positive".into());
        }
        if self.synthetic_per_class == 0 {
            return bad("synthetic_per_class must be positive".into());
        }
        if self.gradcheck_draws == 0 || self.probe_samples == 0 {
            return bad("gradcheck_draws and probe_samples must be positive".into());
        }
        let positive = [self.gradcheck_epsilon, self.gradcheck_step, self.gradcheck_tolerance];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("gradcheck_epsilon, gradcheck_step and gradcheck_tolerance must be positive".into());
        }
        self.train.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let layers = self.layers.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        vec![
            ("task", self.task.as_str().to_string()),
            ("layers", layers),
            ("uploading", self.uploading.as_str().to_string()),
            ("train_size", self.train_size.to_string()),
            ("test_size", self.test_size.to_string()),
            ("epochs", self.train.epochs.to_string()),
            ("learning_rate", self.train.learning_rate.to_string()),
            ("batch_size", self.train.batch_size.to_string()),
            ("spsb_epsilon", self.train.spsb_epsilon.to_string()),
            ("init_mode", self.train.init_mode.as_str().to_string()),
            ("seed", self.train.seed.to_string()),
            ("split_seed", self.split_seed().to_string()),
            ("prob_clamp", self.train.prob_clamp.to_string()),
            ("mnist_dir", opt(&self.mnist_dir)),
            ("corpus_dir", opt(&self.corpus_dir)),
            ("synthetic_per_class", self.synthetic_per_class.to_string()),
            ("features_dir", opt(&self.features_dir)),
            ("out_dir", self.out_dir.display().to_string()),
            ("gradcheck_draws", self.gradcheck_draws.to_string()),
            ("gradcheck_epsilon", self.gradcheck_epsilon.to_string()),
            ("gradcheck_step", self.gradcheck_step.to_string()),
            ("gradcheck_tolerance", self.gradcheck_tolerance.to_string()),
            ("probe_samples", self.probe_samples.to_string()),
        ]
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Keys a manifest carries that describe the run rather than configure it.
pub(crate) const MANIFEST_ONLY: &[&str] =
    &["command", "artifact_version", "models", "feature_count", "param_count", "epoch_seconds"];

fn text_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", no + 1)))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    let mut seen = BTreeMap::new();
    for (k, _) in &pairs {
        if seen.insert(k.clone(), ()).is_some() {
            return Err(CliError::Config(format!("key `{k}` given twice")));
        }
    }
    Ok(pairs)
}

fn json_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
    let object = value.as_object().ok_or_else(|| CliError::Config("manifest is not a JSON object".into()))?;
    let mut pairs = Vec::new();
    for (key, value) in object {
        let value = match value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            _ => return Err(CliError::Config(format!("manifest key `{key}` is not a scalar"))),
        };
        // empty strings stand for unset optional paths
        if value.is_empty() {
            continue;
        }
        pairs.push((key.clone(), value));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = ExperimentConfig::parse("task = mnist01\n# comment\n\nlayers = 2, 3 # trailing\n").unwrap();
        assert_eq!(c.task, Task::Mnist01);
        assert_eq!(c.layers, vec![2, 3]);
        assert_eq!(c.uploading, Uploading::Uploading);
        assert_eq!((c.train_size, c.test_size), (10_000, 4_000));
        assert_eq!(c.train, TrainConfig::default());
        assert_eq!(c.split_seed(), 0);

        let c = ExperimentConfig::parse("task=mnist08\nseed=4\nuploading=both\nlearning_rate=0\n").unwrap();
        assert_eq!(c.split_seed(), 4);
        assert_eq!(c.uploading.flags(), &[false, true]);
        assert_eq!(c.train.learning_rate, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "layers = 2",
            "task = mnist02",
            "task = mnist01\nlayers = 5",
            "task = mnist01\nlayers = 2,2",
            "task = mnist01\ntrain_size = 0",
            "task = mnist01\nepochs = x",
            "task = mnist01\ncolour = red",
            "task = mnist01\ntask = mnist08",
            "task = mnist01\nno equals sign",
            "task = mnist01\nbatch_size = 0",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn text_and_json_round_trip() {
        let mut c = ExperimentConfig::new(Task::SyntheticMalware);
        c.layers = vec![3, 2];
        c.uploading = Uploading::Both;
        c.train.learning_rate = 0.123456789012345;
        c.train.spsb_epsilon = 1e-7;
        c.corpus_dir = Some(PathBuf::from("/tmp/corpus"));
        assert_eq!(ExperimentConfig::parse(&c.to_string()).unwrap(), ExperimentConfig { split_seed: Some(0), ..c.clone() });

        let mut object = serde_json::Map::new();
        for (k, v) in c.entries() {
            object.insert(k.to_string(), serde_json::Value::String(v));
        }
        object.insert("epoch_seconds".into(), serde_json::Value::String("1.0,2.0".into()));
        let json = serde_json::Value::Object(object).to_string();
        let back = ExperimentConfig::parse(&json).unwrap();
        assert_eq!(back, ExperimentConfig { split_seed: Some(0), ..c });
    }
}
