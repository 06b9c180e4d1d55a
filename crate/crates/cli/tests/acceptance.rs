//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.
//!
//! MNIST criteria read the four IDX files from `$QCNN_MNIST_DIR`
//! (default `/root/data/package/data`).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use qcnn::data::FeatureCache;
use qcnn::sim::{reduced_expectation_oracle, StateVector};
use qcnn::train::spsb_gradient;
use qcnn::{Architecture, Axis, Gate};
use qcnn_cli::commands::TEST_CACHE;
use qcnn_cli::{cmd_compare, cmd_prepare, cmd_train, gradcheck_with, ExperimentConfig, ModelRun, Task, Uploading};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 3] = [0, 1, 2];

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn mnist_dir() -> PathBuf {
    std::env::var_os("QCNN_MNIST_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("/root/data/package/data"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn fmt_all(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join("/")
}

fn mnist_config(task: Task, out: &Path, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(task);
    c.mnist_dir = Some(mnist_dir());
    c.out_dir = out.to_path_buf();
    c.train.seed = seed;
    c
}

fn find(runs: &[ModelRun], layers: usize, uploading: bool) -> &ModelRun {
    runs.iter().find(|r| r.layers == layers && r.uploading == uploading).expect("model was trained")
}

fn c1_param_counts() -> Verdict {
    let mut ok = true;
    let mut seen = Vec::new();
    for (n, expected) in [(2, 14), (3, 36), (4, 82)] {
        for uploading in [false, true] {
            let arch = Architecture::new(n, uploading).unwrap();
            let from_slices: usize = arch.param_slices().iter().map(|s| s.conv.len() + s.pool.len()).sum();
            ok &= Architecture::closed_form_param_count(n) == expected
                && arch.param_count() == expected
                && from_slices == expected;
        }
        seen.push(Architecture::new(n, true).unwrap().param_count());
    }
    verdict(ok, format!("counts {seen:?}, expected [14, 36, 82]"))
}

fn c2_feature_budgets() -> Verdict {
    let count = |uploading| -> Vec<usize> {
        (2..=4).map(|n| Architecture::new(n, uploading).unwrap().feature_count()).collect()
    };
    let (up, std) = (count(true), count(false));
    verdict(up == [6, 14, 30] && std == [4, 8, 16], format!("uploading {up:?}, standard {std:?}"))
}

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate<f64> {
    let a = rng.gen_range(0..n);
    let b = (a + rng.gen_range(1..n)) % n;
    let angle = rng.gen_range(-10.0..10.0);
    match rng.gen_range(0..5) {
        0 => Gate::Rx { qubit: a, angle },
        1 => Gate::Ry { qubit: a, angle },
        2 => Gate::Rz { qubit: a, angle },
        3 => Gate::Cnot { control: a, target: b },
        _ => Gate::ControlledRot {
            control: a,
            target: b,
            axis: [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)],
            angle,
            control_value: rng.gen(),
        },
    }
}

fn c3_simulator() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut state = StateVector::new_zero(4).unwrap();
    let mut drift: f64 = 0.0;
    for _ in 0..200 {
        state.apply(&random_gate(&mut rng, 4)).unwrap();
        drift = drift.max((state.norm_sqr() - 1.0).abs());
    }

    let mut identity_err: f64 = 0.0;
    for _ in 0..50 {
        let start = {
            let mut s = StateVector::new_zero(3).unwrap();
            (0..6).for_each(|_| s.apply(&random_gate(&mut rng, 3)).unwrap());
            s
        };
        let g = random_gate(&mut rng, 3);
        let mut s = start.clone();
        s.apply(&g).unwrap();
        s.apply(&g.inverse()).unwrap();
        identity_err = identity_err.max(s.max_distance(&start));

        let (a, b) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let mut split = start.clone();
        split.apply_ry(1, a).unwrap();
        split.apply_ry(1, b).unwrap();
        let mut joined = start.clone();
        joined.apply_ry(1, a + b).unwrap();
        identity_err = identity_err.max(split.max_distance(&joined));

        let mut twice = start.clone();
        twice.apply_cnot(0, 2).unwrap();
        twice.apply_cnot(0, 2).unwrap();
        identity_err = identity_err.max(twice.max_distance(&start));
    }

    let mut trace_err: f64 = 0.0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = StateVector::new_zero(4).unwrap();
        (0..30).for_each(|_| s.apply(&random_gate(&mut rng, 4)).unwrap());
        for q in 0..4 {
            let others: Vec<usize> = (0..4).filter(|&o| o != q).collect();
            let oracle = reduced_expectation_oracle(&s, q, &others).unwrap();
            trace_err = trace_err.max((s.expectation_z(q).unwrap() - oracle).abs());
        }
    }
    verdict(
        drift < 1e-12 && identity_err < 1e-12 && trace_err < 1e-10,
        format!("norm drift {drift:.1e} (<1e-12), identities {identity_err:.1e}, partial trace {trace_err:.1e} (<1e-10)"),
    )
}

fn c4_spsb(out: &Path) -> Verdict {
    let mut c = ExperimentConfig::new(Task::Mnist01);
    c.out_dir = out.to_path_buf();
    c.gradcheck_draws = 2000;
    c.gradcheck_epsilon = 1e-3;
    c.gradcheck_step = 1e-5;
    c.probe_samples = 1;
    let report = gradcheck_with(&c, |loss, params, eps, rng| spsb_gradient(loss, params, eps, rng)).unwrap();
    let d = report.reference.len() as f64;
    verdict(
        report.passed,
        format!(
            "relative l2 error {:.4} over {} draws (<0.05; sampling noise alone gives about sqrt((d-1)/M) = {:.3})",
            report.relative_error,
            report.draws,
            ((d - 1.0) / report.draws as f64).sqrt()
        ),
    )
}

/// Criteria 5 and 7 share the full-size compare runs.
fn c5_c7_mnist01(out: &Path) -> (Verdict, Verdict) {
    let mut up_acc = Vec::new();
    let mut up_f1 = Vec::new();
    let mut deltas = Vec::new();
    for seed in SEEDS {
        let c = mnist_config(Task::Mnist01, &out.join(format!("mnist01-{seed}")), seed);
        let (summary, _) = cmd_compare(&c).unwrap();
        let (std, up) = (find(&summary.runs, 2, false).last(), find(&summary.runs, 2, true).last());
        up_acc.push(up.test_accuracy);
        up_f1.push(up.test_f1);
        deltas.push(up.test_f1 - std.test_f1);
    }

    let mut fast = Vec::new();
    for seed in SEEDS {
        let mut c = mnist_config(Task::Mnist01, &out.join(format!("mnist01-fast-{seed}")), seed);
        c.train_size = 2000;
        c.test_size = 1000;
        fast.push(find(&cmd_train(&c).unwrap().runs, 2, true).last().test_accuracy);
    }
    let (acc, f1, fast_acc) = (median(up_acc.clone()), median(up_f1.clone()), median(fast.clone()));
    let c5 = verdict(
        acc >= 0.95 && f1 >= 0.95 && fast_acc >= 0.93,
        format!(
            "10k/4k median acc {acc:.4} [{}], F1 {f1:.4} [{}] (>=0.95); 2k/1k median acc {fast_acc:.4} [{}] (>=0.93)",
            fmt_all(&up_acc),
            fmt_all(&up_f1),
            fmt_all(&fast)
        ),
    );

    // the median seed is the one with the median uploading F1
    let mut order: Vec<usize> = (0..SEEDS.len()).collect();
    order.sort_by(|&a, &b| up_f1[a].total_cmp(&up_f1[b]));
    let mid = order[order.len() / 2];
    let c7 = verdict(
        deltas[mid] >= -0.01,
        format!(
            "median seed {}: uploading F1 minus standard F1 = {:+.4} (>= -0.01); all seeds [{}]",
            SEEDS[mid],
            deltas[mid],
            deltas.iter().map(|d| format!("{d:+.4}")).collect::<Vec<_>>().join("/")
        ),
    );
    (c5, c7)
}

fn c6_mnist08(out: &Path) -> Verdict {
    let mut accs = Vec::new();
    for seed in SEEDS {
        let mut c = mnist_config(Task::Mnist08, &out.join(format!("mnist08-{seed}")), seed);
        // the pooled MNIST files hold 13728 zeros and eights
        c.test_size = 3728;
        accs.push(find(&cmd_train(&c).unwrap().runs, 2, true).last().test_accuracy);
    }
    let acc = median(accs.clone());
    verdict(acc >= 0.90, format!("10000/3728 median test acc {acc:.4} [{}] (>=0.90)", fmt_all(&accs)))
}

fn c8_synthetic(out: &Path) -> Verdict {
    let mut margins = Vec::new();
    let mut accs = Vec::new();
    for seed in SEEDS {
        let mut c = ExperimentConfig::new(Task::SyntheticMalware);
        c.out_dir = out.join(format!("synthetic-{seed}"));
        c.train.seed = seed;
        c.train_size = 1000;
        c.test_size = 400;
        c.synthetic_per_class = 700;
        let prepared = cmd_prepare(&c).unwrap();
        let test = FeatureCache::read(prepared.dir.join(TEST_CACHE)).unwrap();
        let ones = test.labels.iter().filter(|&&y| y == 1).count() as f64 / test.labels.len() as f64;
        let majority = ones.max(1.0 - ones);
        c.features_dir = Some(prepared.dir);
        let acc = find(&cmd_train(&c).unwrap().runs, 2, true).last().test_accuracy;
        accs.push(acc);
        margins.push(acc - majority);
    }
    let margin = median(margins.clone());
    verdict(
        margin >= 0.20,
        format!(
            "median margin over majority {margin:.4} (>=0.20); per seed acc [{}], margin [{}]",
            fmt_all(&accs),
            fmt_all(&margins)
        ),
    )
}

fn c9_determinism(out: &Path) -> Verdict {
    let mut c = mnist_config(Task::Mnist01, &out.join("det-a"), 7);
    c.train_size = 2000;
    c.test_size = 1000;
    c.layers = vec![2, 3];
    c.uploading = Uploading::Both;
    let first = cmd_train(&c).unwrap();
    let mut replay = ExperimentConfig::load(&first.out_dir.join("manifest.json")).unwrap();
    replay.out_dir = out.join("det-b");
    cmd_train(&replay).unwrap();
    let a = std::fs::read(out.join("det-a/results.csv")).unwrap();
    let b = std::fs::read(out.join("det-b/results.csv")).unwrap();
    verdict(a == b, format!("{} vs {} bytes, identical: {}", a.len(), b.len(), a == b))
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        verdict(false, format!("aborted: {msg}"))
    })
}

fn main() {
    let scratch = tempfile::tempdir().expect("temp dir");
    let out = scratch.path();
    let started = Instant::now();

    let mut results: Vec<(u32, &str, Verdict)> = vec![
        (1, "parameter counts", guarded(c1_param_counts)),
        (2, "feature budgets", guarded(c2_feature_budgets)),
        (3, "simulator correctness", guarded(c3_simulator)),
        (4, "SPSB estimator", guarded(|| c4_spsb(out))),
    ];
    let (c5, c7) = match catch_unwind(AssertUnwindSafe(|| c5_c7_mnist01(out))) {
        Ok(pair) => pair,
        Err(_) => (verdict(false, "aborted"), verdict(false, "aborted")),
    };
    results.push((5, "MNIST 0 vs 1", c5));
    results.push((6, "MNIST 0 vs 8", guarded(|| c6_mnist08(out))));
    results.push((7, "uploading vs standard", c7));
    results.push((8, "synthetic binary corpus", guarded(|| c8_synthetic(out))));
    results.push((9, "determinism", guarded(|| c9_determinism(out))));

    println!();
    for (id, name, v) in &results {
        println!("criterion {id} {:<24} {}  {}", name, if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed = results.iter().filter(|(_, _, v)| !v.passed).count();
    println!("{} passed, {failed} failed ({:.0}s)", results.len() - failed, started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
