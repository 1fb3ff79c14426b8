//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p ship-cli --test acceptance --release`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ship_cli::MetricsReport;
use ship_core::augment::balance_dataset;
use ship_core::discovery::{discover, information_gain};
use ship_core::distance::psd;
use ship_core::model::head::{loss_and_gradient, HeadParams};
use ship_core::model::metrics::evaluate_predictions;
use ship_core::model::{k_grid, tune_k};
use ship_core::pip::extract_pips_incremental;
use ship_core::pipeline::{generate_synthetic, SynthConfig};
use ship_core::{io, ClassLabel, Config, LabeledSeries, SeededRng, TrainConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    SeededRng::new(seed).rng()
}

// Criterion 1

fn naive_psd(series: &[f64], q: &[f64]) -> (f64, usize) {
    let ce = |v: &[f64]| {
        let mut s = 0.0;
        for i in 1..v.len() {
            s += (v[i] - v[i - 1]) * (v[i] - v[i - 1]);
        }
        s.sqrt()
    };
    let mut best = (f64::INFINITY, 0);
    for j in 0..=series.len() - q.len() {
        let w = &series[j..j + q.len()];
        let mut ed = 0.0;
        for i in 0..q.len() {
            ed += (w[i] - q[i]) * (w[i] - q[i]);
        }
        let (a, b) = (ce(w), ce(q));
        let cf = a.max(b).max(1e-8) / a.min(b).max(1e-8);
        let d = ed.sqrt() * cf;
        if d < best.0 {
            best = (d, j);
        }
    }
    best
}

fn psd_oracle() -> Outcome {
    let mut g = rng(101);
    let mut worst = 0.0f64;
    let mut offsets_agree = true;
    for pair in 0..200 {
        let t = g.random_range(3..=32usize);
        let orig = g.random_range(3..=t);
        let l = g.random_range(1..=orig.min(8));
        let integer = pair % 2 == 0;
        let draw = |g: &mut ChaCha8Rng| {
            if integer {
                g.random_range(-2..=2) as f64
            } else {
                g.random_range(-5.0..5.0)
            }
        };
        let series: Vec<f64> = (0..orig).map(|_| draw(&mut g)).collect();
        let q: Vec<f64> = (0..l).map(|_| draw(&mut g)).collect();
        let x = LabeledSeries::from_unpadded("x", ClassLabel::np(), vec!["c".into()], vec![series.clone()], t).unwrap();
        let m = psd(&x, 0, &q).unwrap();
        let (d, j) = naive_psd(&series, &q);
        worst = worst.max((m.psd - d).abs());
        offsets_agree &= m.offset == j;
    }
    outcome(
        worst <= 1e-9 && offsets_agree,
        format!("200 pairs, max |psd - naive| = {worst:.1e}, offsets agree: {offsets_agree}"),
    )
}

// Criterion 2

fn perpendicular(series: &[f64], a: usize, b: usize, t: usize) -> f64 {
    let (ax, ay) = (a as f64, series[a]);
    let (bx, by) = (b as f64, series[b]);
    let (px, py) = (t as f64, series[t]);
    ((by - ay) * (px - ax) - (bx - ax) * (py - ay)).abs() / ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt()
}

fn pip_oracle() -> Outcome {
    let mut g = rng(202);
    let mut mismatches = 0;
    let mut states = 0;
    for case in 0..100 {
        let len = g.random_range(3..=64usize);
        let k = g.random_range(3..=len.min(10));
        let series: Vec<f64> = (0..len)
            .map(|_| {
                if case % 2 == 0 {
                    g.random_range(0..4) as f64
                } else {
                    g.random_range(-1.0..1.0)
                }
            })
            .collect();
        let mut pips = vec![0, len - 1];
        for state in extract_pips_incremental(&series, k).unwrap() {
            states += 1;
            let mut best: Option<(f64, usize)> = None;
            for t in 0..len {
                if pips.contains(&t) {
                    continue;
                }
                let a = *pips.iter().filter(|&&p| p < t).max().unwrap();
                let b = *pips.iter().filter(|&&p| p > t).min().unwrap();
                let d = perpendicular(&series, a, b, t);
                if best.is_none_or(|(bd, _)| d > bd) {
                    best = Some((d, t));
                }
            }
            let expected = best.unwrap().1;
            pips.push(expected);
            pips.sort_unstable();
            if state.added != expected || state.pips != pips {
                mismatches += 1;
            }
        }
        if pips.len() != k {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("100 series, {states} insertions, {mismatches} mismatches"))
}

// Criterion 3

fn entropy(pos: usize, n: usize) -> f64 {
    if n == 0 || pos == 0 || pos == n {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn exhaustive_gain(items: &[(f64, bool)]) -> (f64, f64) {
    let n = items.len();
    let pos = items.iter().filter(|e| e.1).count();
    let mut values: Vec<f64> = items.iter().map(|e| e.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut best = (0.0, values[0]);
    let mut found = false;
    for w in values.windows(2) {
        let thr = (w[0] + w[1]) / 2.0;
        let left: Vec<&(f64, bool)> = items.iter().filter(|e| e.0 <= thr).collect();
        let lp = left.iter().filter(|e| e.1).count();
        let nl = left.len();
        let gain = entropy(pos, n)
            - nl as f64 / n as f64 * entropy(lp, nl)
            - (n - nl) as f64 / n as f64 * entropy(pos - lp, n - nl);
        let gain = gain.max(0.0);
        if !found || gain > best.0 {
            best = (gain, thr);
            found = true;
        }
    }
    if pos == 0 || pos == n {
        return (0.0, values[0]);
    }
    best
}

fn gain_oracle() -> Outcome {
    let mut g = rng(303);
    let mut worst_gain = 0.0f64;
    let mut worst_thr = 0.0f64;
    for case in 0..100 {
        let n = g.random_range(1..=20usize);
        let items: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let d = if case % 2 == 0 {
                    g.random_range(0..6) as f64 / 2.0
                } else {
                    g.random_range(0.0..10.0)
                };
                (d, g.random_bool(0.4))
            })
            .collect();
        let (gain, thr) = information_gain(&items);
        let (eg, et) = exhaustive_gain(&items);
        worst_gain = worst_gain.max((gain - eg).abs());
        worst_thr = worst_thr.max((thr - et).abs());
    }
    outcome(
        worst_gain <= 1e-12 && worst_thr <= 1e-12,
        format!("100 sets, max |gain diff| {worst_gain:.1e}, max |threshold diff| {worst_thr:.1e}"),
    )
}

// Criterion 4

fn augmentation_contract() -> Outcome {
    let proportions: BTreeMap<ClassLabel, f64> = [
        (ClassLabel::np(), 100.0 / 115.0),
        (ClassLabel::ac(), 5.0 / 115.0),
        (ClassLabel::dt(), 5.0 / 115.0),
        (ClassLabel::ie(), 5.0 / 115.0),
    ]
    .into();
    let data = generate_synthetic(&SynthConfig {
        n_instances: 115,
        class_proportions: proportions,
        seed: 4,
        ..SynthConfig::default()
    })
    .unwrap();
    // One shapelet per class, so every copy is masked by a known shapelet.
    let config = Config {
        r_sa: 10,
        g: 4,
        ..Config::default()
    };
    let pool = discover(&data, &config).unwrap();
    let rng = SeededRng::new(4);
    let a = balance_dataset(&data, &pool, &config, &rng).unwrap();
    let b = balance_dataset(&data, &pool, &config, &rng).unwrap();

    let counts: Vec<usize> = a.class_counts().values().copied().collect();
    let identical = a == b && serde_json::to_string(&a.instances()).unwrap() == serde_json::to_string(&b.instances()).unwrap();
    let tails_zero = a
        .iter()
        .all(|x| x.values.iter().all(|row| row[x.original_length..].iter().all(|&v| v == 0.0)));

    let mut exact_spans = 0;
    let mut spans_unchanged = true;
    for copy in a.iter().filter(|x| x.id.contains("#aug")) {
        let source = data.get(copy.id.split('#').next().unwrap()).unwrap();
        let (_, s) = pool.of_class(&copy.label).next().unwrap();
        let m = psd(source, s.channel, &s.values).unwrap();
        if m.psd == 0.0 {
            exact_spans += 1;
            let span = m.offset..m.offset + s.len();
            spans_unchanged &= copy.values[s.channel][span.clone()] == source.values[s.channel][span];
        }
    }
    outcome(
        counts == [100, 55, 55, 55] && identical && tails_zero && spans_unchanged && exact_spans > 0,
        format!(
            "counts {counts:?}, {exact_spans} exact-match spans unchanged: {spans_unchanged}, tails zero: {tails_zero}, repeatable: {identical}"
        ),
    )
}

// Criterion 5

fn gradient_error(params: &HeadParams, x: &Array2<f64>, y: &[usize], indices: &[usize]) -> f64 {
    let (_, grad) = loss_and_gradient(params, x.view(), y);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut p = params.clone();
    for &i in indices {
        let orig = p.get(i);
        *p.get_mut(i) = orig + h;
        let up = loss_and_gradient(&p, x.view(), y).0;
        *p.get_mut(i) = orig - h;
        let down = loss_and_gradient(&p, x.view(), y).0;
        *p.get_mut(i) = orig;
        let numeric = (up - down) / (2.0 * h);
        let analytic = grad.get(i);
        let scale = analytic.abs().max(numeric.abs());
        let err = if scale < 1e-7 { (analytic - numeric).abs() } else { (analytic - numeric).abs() / scale };
        worst = worst.max(err);
    }
    worst
}

fn gradient_check() -> Outcome {
    let mut g = rng(505);
    let mut worst = 0.0f64;
    for draw in 0..50u64 {
        let d = g.random_range(2..=8usize);
        let classes = g.random_range(2..=4usize);
        let hidden = [g.random_range(3..=10usize), g.random_range(3..=10usize)];
        let params = HeadParams::init(d, hidden, classes, &SeededRng::new(draw));
        let batch = g.random_range(1..=4usize);
        let x = Array2::from_shape_fn((batch, d), |_| g.random_range(-2.0..2.0));
        let y: Vec<usize> = (0..batch).map(|_| g.random_range(0..classes)).collect();
        let all: Vec<usize> = (0..params.n_params()).collect();
        worst = worst.max(gradient_error(&params, &x, &y, &all));
    }
    // Spot check at the production width.
    let params = HeadParams::init(12, [512, 256], 4, &SeededRng::new(99));
    let x = Array2::from_shape_fn((2, 12), |_| g.random_range(-2.0..2.0));
    let sample: Vec<usize> = (0..300).map(|_| g.random_range(0..params.n_params())).collect();
    let wide = gradient_error(&params, &x, &[1, 3], &sample);
    outcome(
        worst <= 1e-4 && wide <= 1e-4,
        format!("50 draws, max relative error {worst:.1e}; 512x256 spot check {wide:.1e}"),
    )
}

// Criterion 6

fn metrics_identity() -> Outcome {
    let mut g = rng(606);
    let labels: Vec<ClassLabel> = ClassLabel::KNOWN.iter().map(|&l| l.into()).collect();
    let mut violations = 0;
    for _ in 0..1000 {
        let n = g.random_range(1..=60usize);
        let c = g.random_range(1..=4usize);
        let truth: Vec<usize> = (0..n).map(|_| g.random_range(0..c)).collect();
        let pred: Vec<usize> = (0..n).map(|_| g.random_range(0..c)).collect();
        let r = evaluate_predictions(&labels, &truth, &pred).unwrap();
        if r.recall != r.accuracy {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("1000 sets, {violations} with weighted recall != accuracy"))
}

// Criteria 7-9, 11: the command-line pipeline.

fn ship(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ship"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn run_all(dir: &Path, name: &str, extra: &[&str]) -> Result<(MetricsReport, PathBuf, f64), String> {
    let out = dir.join(name);
    let start = Instant::now();
    let mut args = vec!["run-all", "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ship(&args)?;
    let secs = start.elapsed().as_secs_f64();
    let report: MetricsReport = io::read_json(&out.join("metrics.json")).map_err(|e| e.to_string())?;
    Ok((report, out, secs))
}

fn f1(r: &MetricsReport, label: &str) -> f64 {
    r.test.per_class_f1.get(&ClassLabel::from(label)).copied().unwrap_or(0.0)
}

fn minority_f1(r: &MetricsReport) -> f64 {
    ["AC", "DT", "IE"].iter().map(|l| f1(r, l)).sum::<f64>() / 3.0
}

fn end_to_end(full: &Result<(MetricsReport, PathBuf, f64), String>) -> Outcome {
    match full {
        Err(e) => outcome(false, format!("run-all failed: {e}")),
        Ok((r, _, secs)) => {
            let min_f1 = ["NP", "AC", "DT", "IE"].iter().map(|l| f1(r, l)).fold(f64::INFINITY, f64::min);
            outcome(
                r.test.accuracy >= 0.95 && min_f1 >= 0.80 && r.test.per_class_f1.len() == 4 && *secs <= 600.0,
                format!(
                    "2000 instances, accuracy {:.4}, lowest per-class F1 {min_f1:.4}, {secs:.0} s",
                    r.test.accuracy
                ),
            )
        }
    }
}

fn ablation(dir: &Path, seed0: &Result<(MetricsReport, PathBuf, f64), String>) -> Outcome {
    let mut held = 0;
    let mut lines = Vec::new();
    for seed in 0..5u64 {
        let s = seed.to_string();
        let full = if seed == 0 {
            seed0.as_ref().map(|(r, _, _)| r.clone()).map_err(Clone::clone)
        } else {
            run_all(dir, &format!("full-{seed}"), &["--seed", &s]).map(|(r, _, _)| r)
        };
        let only_s = run_all(dir, &format!("s-{seed}"), &["--seed", &s, "--no-augment"]).map(|(r, _, _)| r);
        match (full, only_s) {
            (Ok(f), Ok(s)) => {
                let (mf, ms) = (minority_f1(&f), minority_f1(&s));
                if mf >= ms - 0.02 {
                    held += 1;
                }
                lines.push(format!("{mf:.3}/{ms:.3}"));
            }
            (Err(e), _) | (_, Err(e)) => lines.push(format!("error {e}")),
        }
    }
    outcome(
        held >= 4,
        format!("S+SA >= S - 0.02 in {held}/5 seeds (minority F1 S+SA/S: {})", lines.join(", ")),
    )
}

fn two_channel(dir: &Path, full: &Result<(MetricsReport, PathBuf, f64), String>) -> Outcome {
    let two = run_all(dir, "two-channel", &["--channels", "0,1"]);
    match (full, two) {
        (Ok((f, _, _)), Ok((t, out, _))) => {
            let valid = t.test.total > 0
                && t.test.accuracy.is_finite()
                && io::read_pool(&out.join("pool.json")).is_ok_and(|p| p.shapelets.iter().all(|s| s.channel < 2));
            let (ie4, ie2) = (f1(f, "IE"), f1(&t, "IE"));
            outcome(
                valid && ie2 < ie4,
                format!("valid report: {valid}, IE F1 four channels {ie4:.4} vs two channels {ie2:.4}"),
            )
        }
        (Err(e), _) => outcome(false, format!("run-all failed: {e}")),
        (_, Err(e)) => outcome(false, format!("run-all failed: {e}")),
    }
}

fn tuning() -> Outcome {
    let grid_ok = k_grid(150).unwrap() == vec![3, 4, 6, 7, 8, 10, 11, 12, 14, 15];
    let proportions: BTreeMap<ClassLabel, f64> =
        ClassLabel::KNOWN.iter().map(|&l| (ClassLabel::from(l), 0.25)).collect();
    let data = generate_synthetic(&SynthConfig {
        n_instances: 60,
        class_proportions: proportions,
        seed: 10,
        ..SynthConfig::default()
    })
    .unwrap();
    let config = Config {
        seed: 10,
        max_sources_per_class: Some(3),
        train: TrainConfig {
            max_epochs: 15,
            hidden: [32, 16],
            ..TrainConfig::default()
        },
        ..Config::default()
    };
    let a = tune_k(&data, &config, 3).unwrap();
    let b = tune_k(&data, &config, 3).unwrap();
    let member = k_grid(150).unwrap().contains(&a.best_k);
    outcome(
        grid_ok && member && a == b,
        format!(
            "k_grid(150) exact: {grid_ok}; tune_k picked k = {} (in grid: {member}, repeatable: {})",
            a.best_k,
            a == b
        ),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let one = run_all(dir, "threads-1", &["--seed", "7", "--threads", "1"]);
    let eight = run_all(dir, "threads-8", &["--seed", "7", "--threads", "8"]);
    match (one, eight) {
        (Ok((_, a, _)), Ok((_, b, _))) => {
            let same: Vec<String> = ["pool.json", "checkpoint.json", "metrics.json"]
                .iter()
                .map(|f| {
                    let eq = fs::read(a.join(f)).ok() == fs::read(b.join(f)).ok();
                    format!("{f} {}", if eq { "identical" } else { "DIFFERS" })
                })
                .collect();
            outcome(same.iter().all(|s| s.ends_with("identical")), same.join(", "))
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("run-all failed: {e}")),
    }
}

fn timed(limit: Option<f64>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let secs = start.elapsed().as_secs_f64();
    if let Some(limit) = limit {
        o.pass &= secs < limit;
        o.detail.push_str(&format!(", {secs:.2} s (limit {limit} s)"));
    }
    o
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |n: usize, name: &'static str, o: Outcome| {
        println!("{} {n:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };

    report(1, "PSD oracle", timed(Some(5.0), psd_oracle));
    report(2, "PIP oracle", timed(Some(10.0), pip_oracle));
    report(3, "information-gain oracle", timed(Some(5.0), gain_oracle));
    report(4, "augmentation contract", augmentation_contract());
    report(5, "gradient check", timed(Some(30.0), gradient_check));
    report(6, "metrics identity", metrics_identity());
    let full = run_all(dir.path(), "full-0", &[]);
    report(7, "end-to-end synthetic", end_to_end(&full));
    report(8, "ablation direction", ablation(dir.path(), &full));
    report(9, "two-channel mode", two_channel(dir.path(), &full));
    report(10, "k grid and tuning", tuning());
    report(11, "thread-count determinism", determinism(dir.path()));

    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
