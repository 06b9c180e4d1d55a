//! `results.csv`, `comparison.csv` and `manifest.json` rendering.

use std::fmt::Write as _;
use std::path::Path;

use qcnn::EpochMetrics;

use crate::commands::ModelRun;
use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TrainAcc,
    TrainF1,
    TestAcc,
    TestF1,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::TrainAcc => "train_acc",
            Metric::TrainF1 => "train_f1",
            Metric::TestAcc => "test_acc",
            Metric::TestF1 => "test_f1",
        }
    }

    pub fn of(&self, m: &EpochMetrics) -> f64 {
        match self {
            Metric::TrainAcc => m.train_accuracy,
            Metric::TrainF1 => m.train_f1,
            Metric::TestAcc => m.test_accuracy,
            Metric::TestF1 => m.test_f1,
        }
    }

    /// Rows emitted per model, in order.
    pub fn rows(with_train_f1: bool) -> &'static [Metric] {
        if with_train_f1 {
            &[Metric::TrainAcc, Metric::TrainF1, Metric::TestAcc, Metric::TestF1]
        } else {
            &[Metric::TrainAcc, Metric::TestAcc, Metric::TestF1]
        }
    }
}

fn header(epochs: usize, delta: bool) -> String {
    let mut h = String::from("layers,uploading,metric");
    for e in 1..=epochs {
        write!(h, ",e{e}").expect("writing to a String");
    }
    if delta {
        h.push_str(",delta");
    }
    h.push('\n');
    h
}

fn sorted(runs: &[ModelRun]) -> Vec<&ModelRun> {
    let mut runs: Vec<&ModelRun> = runs.iter().collect();
    runs.sort_by_key(|r| (r.layers, r.uploading));
    runs
}

/// One row per model and metric, models ordered by layers then uploading.
pub fn results_csv(runs: &[ModelRun], epochs: usize, with_train_f1: bool) -> String {
    let mut out = header(epochs, false);
    for run in sorted(runs) {
        for metric in Metric::rows(with_train_f1) {
            write!(out, "{},{},{}", run.layers, run.uploading, metric.name()).expect("writing to a String");
            for m in &run.history {
                write!(out, ",{:.4}", metric.of(m)).expect("writing to a String");
            }
            out.push('\n');
        }
    }
    out
}

/// As [`results_csv`] plus a `delta` column on uploading rows: final-epoch
/// value minus the standard model's final-epoch value at the same depth.
pub fn comparison_csv(runs: &[ModelRun], epochs: usize, with_train_f1: bool) -> String {
    let mut out = header(epochs, true);
    let runs = sorted(runs);
    for run in &runs {
        let baseline = runs.iter().find(|r| r.layers == run.layers && !r.uploading);
        for metric in Metric::rows(with_train_f1) {
            write!(out, "{},{},{}", run.layers, run.uploading, metric.name()).expect("writing to a String");
            for m in &run.history {
                write!(out, ",{:.4}", metric.of(m)).expect("writing to a String");
            }
            match (run.uploading, baseline, run.history.last()) {
                (true, Some(base), Some(last)) => {
                    let base_last = base.history.last().map_or(f64::NAN, |m| metric.of(m));
                    write!(out, ",{:.4}", metric.of(last) - base_last).expect("writing to a String");
                }
                _ => out.push(','),
            }
            out.push('\n');
        }
    }
    out
}

/// Flat string-valued JSON object: the resolved config plus run facts.
pub fn manifest_json(command: &str, config: &ExperimentConfig, runs: &[ModelRun]) -> String {
    let mut object = serde_json::Map::new();
    let mut put = |k: &str, v: String| {
        object.insert(k.to_string(), serde_json::Value::String(v));
    };
    put("command", command.to_string());
    put("artifact_version", env!("CARGO_PKG_VERSION").to_string());
    for (k, v) in config.entries() {
        put(k, v);
    }
    let runs = sorted(runs);
    let join = |f: &dyn Fn(&ModelRun) -> String| runs.iter().map(|r| f(r)).collect::<Vec<_>>().join(";");
    put("models", join(&|r| format!("{}:{}", r.layers, r.uploading)));
    put("feature_count", join(&|r| r.feature_count.to_string()));
    put("param_count", join(&|r| r.param_count.to_string()));
    put(
        "epoch_seconds",
        join(&|r| r.epoch_seconds.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(",")),
    );
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(object)).expect("strings serialise");
    text.push('\n');
    text
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    qcnn::data::cache::write_atomic(path, contents.as_bytes()).map_err(CliError::from)
}
