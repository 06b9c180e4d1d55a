use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qcnn::data::corpus::{read_corpus, write_corpus};
use qcnn::data::idx::{load_idx_images, load_idx_labels};
use qcnn::data::synth::synth_binary_corpus;
use qcnn::data::{
    bytes_to_grayscale, images_to_matrix, prepare_features, select_binary_classes, FeatureCache, GrayImage,
    PreparedFeatures, IMAGE_SIDE,
};
use qcnn::model::ParameterVector;
use qcnn::train::{
    finite_diff_gradient, gradient_variance_probe, init_params, relative_l2_error, sample_loss, spsb_gradient,
    train_model_with, TrainError,
};
use qcnn::{Architecture, EpochMetrics, FeatureVector, InitMode, LabeledSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Task, Uploading};
use crate::report::{comparison_csv, manifest_json, results_csv, write};
use crate::CliError;

pub const MNIST_FILES: [(&str, &str); 2] = [
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
];
pub const TRAIN_CACHE: &str = "train.qcf";
pub const TEST_CACHE: &str = "test.qcf";

/// Widest feature block any configured model needs.
pub fn required_width(config: &ExperimentConfig) -> Result<usize, CliError> {
    let mut width = 0;
    for &n in &config.layers {
        for &up in config.uploading.flags() {
            width = width.max(Architecture::new(n, up)?.feature_count());
        }
    }
    Ok(width)
}

fn mnist_images(dir: &Path, class_b: u8) -> Result<(Vec<GrayImage>, Vec<u8>), CliError> {
    let mut images = Vec::new();
    let mut labels = Vec::new();
    // both official files form one pool; the split is redrawn from it
    for (img_name, lbl_name) in MNIST_FILES {
        let stack = load_idx_images(dir.join(img_name))?;
        let raw = load_idx_labels(dir.join(lbl_name))?;
        if raw.len() != stack.count {
            return Err(CliError::Data(format!(
                "{img_name} holds {} images but {lbl_name} holds {} labels",
                stack.count,
                raw.len()
            )));
        }
        for (i, label) in select_binary_classes(&raw, 0, class_b)? {
            images.push(stack.image(i));
            labels.push(label);
        }
    }
    Ok((images, labels))
}

fn corpus_images(dir: &Path) -> Result<(Vec<GrayImage>, Vec<u8>), CliError> {
    let files = read_corpus(dir)?;
    let mut images = Vec::with_capacity(files.len());
    let mut labels = Vec::with_capacity(files.len());
    for (bytes, label) in files {
        images.push(bytes_to_grayscale(&bytes)?);
        labels.push(label);
    }
    Ok((images, labels))
}

fn required_dir<'a>(dir: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    dir.as_deref().ok_or_else(|| CliError::Config(format!("`{key}` is required for this task")))
}

/// Loads the task's images with binary labels.
pub fn load_images(config: &ExperimentConfig) -> Result<(Vec<GrayImage>, Vec<u8>), CliError> {
    match config.task {
        Task::Mnist01 => mnist_images(required_dir(&config.mnist_dir, "mnist_dir")?, 1),
        Task::Mnist08 => mnist_images(required_dir(&config.mnist_dir, "mnist_dir")?, 8),
        Task::CustomCorpus => corpus_images(required_dir(&config.corpus_dir, "corpus_dir")?),
        Task::SyntheticMalware => {
            let dir = config.corpus_dir.clone().unwrap_or_else(|| config.out_dir.join("corpus"));
            write_corpus(&dir, &synth_binary_corpus(config.synthetic_per_class, config.split_seed()))?;
            corpus_images(&dir)
        }
    }
}

/// Split, PCA and scaling at the widest width the config needs.
pub fn prepare(config: &ExperimentConfig) -> Result<PreparedFeatures, CliError> {
    let (images, labels) = load_images(config)?;
    let width = required_width(config)?;
    let prepared = prepare_features(&labels, config.train_size, config.test_size, width, config.split_seed(), |idx| {
        images_to_matrix(idx.iter().map(|&i| &images[i]), IMAGE_SIDE)
    })?;
    Ok(prepared)
}

/// Reads caches from `features_dir` when set, otherwise prepares them in memory.
pub fn load_features(config: &ExperimentConfig) -> Result<(FeatureCache, FeatureCache), CliError> {
    match &config.features_dir {
        None => {
            let p = prepare(config)?;
            Ok((p.train, p.test))
        }
        Some(dir) => {
            let train = FeatureCache::read(dir.join(TRAIN_CACHE))?;
            let test = FeatureCache::read(dir.join(TEST_CACHE))?;
            let width = required_width(config)?;
            for (name, cache) in [(TRAIN_CACHE, &train), (TEST_CACHE, &test)] {
                if cache.features.cols() < width {
                    return Err(CliError::Data(format!(
                        "{name} has {} columns, the configured models need {width}",
                        cache.features.cols()
                    )));
                }
            }
            Ok((train, test))
        }
    }
}

/// Writes feature caches and a PCA/scaler summary.
pub fn cmd_prepare(config: &ExperimentConfig) -> Result<PreparedSummary, CliError> {
    let p = prepare(config)?;
    let dir = config.features_dir.clone().unwrap_or_else(|| config.out_dir.join("features"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    p.train.write(dir.join(TRAIN_CACHE))?;
    p.test.write(dir.join(TEST_CACHE))?;

    let total = p.pca.total_variance();
    let summary = serde_json::json!({
        "train_rows": p.train.labels.len(),
        "test_rows": p.test.labels.len(),
        "columns": p.train.features.cols(),
        "input_dim": p.pca.input_dim(),
        "total_variance": total,
        "explained_variance": p.pca.explained_variance(),
        "explained_variance_ratio": p.pca.explained_variance().iter().map(|v| v / total).collect::<Vec<f64>>(),
        "scaler_min": p.scaler.min(),
        "scaler_max": p.scaler.max(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("numbers serialise") + "\n";
    write(&dir.join("summary.json"), &text)?;
    Ok(PreparedSummary { dir, columns: p.train.features.cols(), train_rows: p.train.labels.len(), test_rows: p.test.labels.len() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedSummary {
    pub dir: PathBuf,
    pub columns: usize,
    pub train_rows: usize,
    pub test_rows: usize,
}

impl fmt::Display for PreparedSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "wrote {} train and {} test rows with {} columns to {}",
            self.train_rows,
            self.test_rows,
            self.columns,
            self.dir.display()
        )
    }
}

/// Training history of one architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    pub layers: usize,
    pub uploading: bool,
    pub feature_count: usize,
    pub param_count: usize,
    pub history: Vec<EpochMetrics>,
    pub epoch_seconds: Vec<f64>,
}

impl ModelRun {
    pub fn last(&self) -> &EpochMetrics {
        self.history.last().expect("at least one epoch")
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub runs: Vec<ModelRun>,
    pub csv: String,
    pub out_dir: PathBuf,
}

fn samples(cache: &FeatureCache, width: usize) -> Result<Vec<LabeledSample>, CliError> {
    cache
        .features
        .iter_rows()
        .zip(&cache.labels)
        .map(|(row, &label)| {
            let features = FeatureVector::new(row[..width].to_vec()).map_err(|e| CliError::Data(e.to_string()))?;
            Ok(LabeledSample { features, label })
        })
        .collect()
}

fn train_grid(config: &ExperimentConfig, flags: &[bool]) -> Result<Vec<ModelRun>, CliError> {
    let (train, test) = load_features(config)?;
    let mut layers = config.layers.clone();
    layers.sort_unstable();
    let mut runs = Vec::new();
    for n in layers {
        for &uploading in flags {
            let arch = Architecture::new(n, uploading)?;
            let width = arch.feature_count();
            let (train_set, test_set) = (samples(&train, width)?, samples(&test, width)?);
            let mut epoch_seconds = Vec::new();
            let mut tick = Instant::now();
            let outcome = train_model_with(&arch, &train_set, &test_set, &config.train, |m| {
                epoch_seconds.push(tick.elapsed().as_secs_f64());
                tick = Instant::now();
                eprintln!(
                    "layers={n} uploading={uploading} epoch {}/{} loss={:.4} train_acc={:.4} test_acc={:.4} test_f1={:.4}",
                    m.epoch, config.train.epochs, m.train_loss, m.train_accuracy, m.test_accuracy, m.test_f1
                );
            })?;
            runs.push(ModelRun {
                layers: n,
                uploading,
                feature_count: width,
                param_count: arch.param_count(),
                history: outcome.history,
                epoch_seconds,
            });
        }
    }
    Ok(runs)
}

/// Trains every configured model; writes `results.csv` and `manifest.json`.
pub fn cmd_train(config: &ExperimentConfig) -> Result<RunSummary, CliError> {
    let runs = train_grid(config, config.uploading.flags())?;
    let csv = results_csv(&runs, config.train.epochs, config.task.reports_train_f1());
    write(&config.out_dir.join("results.csv"), &csv)?;
    write(&config.out_dir.join("manifest.json"), &manifest_json("train", config, &runs))?;
    Ok(RunSummary { runs, csv, out_dir: config.out_dir.clone() })
}

/// Standard and uploading models on identical splits and seed. Returns the
/// run summary and the comparison table (`results.csv` plus a delta column).
pub fn cmd_compare(config: &ExperimentConfig) -> Result<(RunSummary, String), CliError> {
    let config = ExperimentConfig { uploading: Uploading::Both, ..config.clone() };
    let runs = train_grid(&config, Uploading::Both.flags())?;
    let train_f1 = config.task.reports_train_f1();
    let csv = results_csv(&runs, config.train.epochs, train_f1);
    let comparison = comparison_csv(&runs, config.train.epochs, train_f1);
    write(&config.out_dir.join("results.csv"), &csv)?;
    write(&config.out_dir.join("comparison.csv"), &comparison)?;
    write(&config.out_dir.join("manifest.json"), &manifest_json("compare", &config, &runs))?;
    Ok((RunSummary { runs, csv, out_dir: config.out_dir.clone() }, comparison))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub layers: usize,
    pub uploading: bool,
    pub draws: usize,
    pub epsilon: f64,
    pub step: f64,
    pub reference: Vec<f64>,
    pub estimate: Vec<f64>,
    pub relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub probe_samples: usize,
    pub probe_variance: Vec<f64>,
}

impl fmt::Display for GradcheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "layers = {}, uploading = {}", self.layers, self.uploading)?;
        writeln!(f, "spsb draws = {}, epsilon = {:e}, finite-difference step = {:e}", self.draws, self.epsilon, self.step)?;
        writeln!(f, "{:>5} {:>12} {:>12} {:>12}", "param", "reference", "spsb_mean", "probe_var")?;
        for i in 0..self.reference.len() {
            writeln!(
                f,
                "{i:>5} {:>12.6} {:>12.6} {:>12.3e}",
                self.reference[i],
                self.estimate[i],
                self.probe_variance.get(i).copied().unwrap_or(f64::NAN)
            )?;
        }
        writeln!(f, "variance probe over {} samples", self.probe_samples)?;
        writeln!(
            f,
            "relative l2 error = {:.4} (bound {}) {}",
            self.relative_error,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Gradient check with a caller-supplied estimator `(loss, params, eps, rng) -> estimate`.
///
/// The architecture is the first configured layer count (uploading unless the
/// config says `false`). A parameter vector, feature vector and label are drawn
/// from the seed; the reference is the central finite-difference gradient.
pub fn gradcheck_with<E>(config: &ExperimentConfig, mut estimator: E) -> Result<GradcheckReport, CliError>
where
    E: FnMut(&dyn Fn(&[f64]) -> Result<f64, TrainError>, &[f64], f64, &mut ChaCha8Rng) -> Result<Vec<f64>, TrainError>,
{
    let layers = config.layers[0];
    let uploading = config.uploading != Uploading::Standard;
    let arch = Architecture::new(layers, uploading)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.train.seed);
    let params: ParameterVector<f64> = init_params(&arch, InitMode::RandomUniform, &mut rng);
    let features: Vec<f64> =
        (0..arch.feature_count()).map(|_| rng.gen_range(0.0..=std::f64::consts::FRAC_PI_2)).collect();
    let sample = LabeledSample {
        features: FeatureVector::new(features).map_err(|e| CliError::Data(e.to_string()))?,
        label: rng.gen_range(0..=1),
    };
    let loss = sample_loss(&arch, &sample, config.train.prob_clamp);

    let reference = finite_diff_gradient(&loss, params.as_slice(), config.gradcheck_step)?;
    let mut estimate = vec![0.0; params.len()];
    for _ in 0..config.gradcheck_draws {
        let g = estimator(&loss, params.as_slice(), config.gradcheck_epsilon, &mut rng)?;
        estimate.iter_mut().zip(g).for_each(|(acc, v)| *acc += v);
    }
    estimate.iter_mut().for_each(|v| *v /= config.gradcheck_draws as f64);
    let relative_error = relative_l2_error(&estimate, &reference);
    let probe_variance = gradient_variance_probe(&arch, config.probe_samples, &mut rng)?;

    Ok(GradcheckReport {
        layers,
        uploading,
        draws: config.gradcheck_draws,
        epsilon: config.gradcheck_epsilon,
        step: config.gradcheck_step,
        reference,
        estimate,
        relative_error,
        tolerance: config.gradcheck_tolerance,
        passed: relative_error < config.gradcheck_tolerance,
        probe_samples: config.probe_samples,
        probe_variance,
    })
}

/// [`gradcheck_with`] using the training estimator; writes `gradcheck.txt`.
pub fn cmd_gradcheck(config: &ExperimentConfig) -> Result<GradcheckReport, CliError> {
    let report = gradcheck_with(config, |loss, params, eps, rng| spsb_gradient(loss, params, eps, rng))?;
    write(&config.out_dir.join("gradcheck.txt"), &report.to_string())?;
    Ok(report)
}
