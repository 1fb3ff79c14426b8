use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use ship_core::augment::balance_dataset;
use ship_core::discovery::discover;
use ship_core::features::transform_dataset;
use ship_core::model::metrics::majority_baseline;
use ship_core::model::train::{label_indices, train};
use ship_core::model::{tune_k, tune_k_over};
use ship_core::pipeline::{generate_synthetic, SynthConfig};
use ship_core::rng::streams;
use ship_core::workflow::{evaluate_dataset, feature_spec, fit, prepare, split_for_run, Variant};
use ship_core::{io, ClassLabel, Config, Dataset, EvalReport, ModelCheckpoint, SeededRng, ShapeletPool, ShipError};

use crate::args::{Cli, Command, GlobalArgs};
use crate::error::{CliError, CliResult};
use crate::explain::{emit_plot_data, explain_instance, ExplainReport};
use crate::manifest::{manifest_path, RunManifest};

/// Test-set metrics as written by `evaluate` and `run-all`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: String,
    pub k: usize,
    pub seed: u64,
    pub config_hash: String,
    pub test: EvalReport,
    /// Always predicting the training majority class.
    pub majority_baseline: Option<EvalReport>,
}

impl MetricsReport {
    fn new(config: &Config, test: EvalReport, majority_baseline: Option<EvalReport>) -> Self {
        MetricsReport {
            variant: Variant::of(config).name().to_string(),
            k: config.k,
            seed: config.seed,
            config_hash: config.fingerprint(),
            test,
            majority_baseline,
        }
    }
}

#[derive(Serialize)]
struct SplitIds<'a> {
    train: Vec<&'a str>,
    val: Vec<&'a str>,
    test: Vec<&'a str>,
}

fn ids(d: &Dataset) -> Vec<&str> {
    d.iter().map(|x| x.id.as_str()).collect()
}

fn load(path: &Path, config: &Config) -> CliResult<Dataset> {
    Ok(prepare(&io::read_dataset(path)?, config)?)
}

fn synth_config(config: &Config, n: usize, noise: Option<f64>) -> SynthConfig {
    let defaults = SynthConfig::default();
    SynthConfig {
        n_instances: n,
        seed: config.seed,
        noise: noise.unwrap_or(defaults.noise),
        ..defaults
    }
}

/// Pool path as stored in a checkpoint: relative when both files share a directory.
fn recorded_pool_path(pool: &Path, checkpoint: &Path) -> CliResult<String> {
    if pool.parent() == checkpoint.parent() {
        if let Some(name) = pool.file_name() {
            return Ok(name.to_string_lossy().into_owned());
        }
    }
    let abs = fs::canonicalize(pool).map_err(|e| ShipError::Io {
        path: pool.to_path_buf(),
        source: e,
    })?;
    Ok(abs.display().to_string())
}

fn load_pool(checkpoint: &ModelCheckpoint, checkpoint_path: &Path, explicit: Option<&Path>) -> CliResult<ShapeletPool> {
    let path: PathBuf = match (explicit, &checkpoint.pool_path) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(rel)) => checkpoint_path.parent().unwrap_or(Path::new("")).join(rel),
        (None, None) if !checkpoint.features.shapelets => return Ok(ShapeletPool::default()),
        (None, None) => {
            return Err(CliError::Usage(
                "the checkpoint records no pool; pass --pool".into(),
            ))
        }
    };
    Ok(io::read_pool(&path)?.pool())
}

fn finish(manifest: &mut RunManifest, started: Instant, path: &Path) -> CliResult<()> {
    manifest.time("total", started.elapsed().as_secs_f64());
    Ok(manifest.write(path)?)
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let started = Instant::now();
    let g: &GlobalArgs = &cli.global;
    match &cli.command {
        Command::Synth { out, n, noise } => {
            let config = g.resolve_config()?;
            let data = generate_synthetic(&synth_config(&config, *n, *noise))?;
            io::write_dataset(out, &data)?;
            let mut m = RunManifest::new("synth", &config);
            m.output("data", out);
            finish(&mut m, started, &manifest_path(out))?;
            println!("{} instances -> {}", data.len(), out.display());
        }
        Command::Discover { data, out } => {
            let config = g.resolve_config()?;
            let dataset = load(data, &config)?;
            let pool = discover(&dataset, &config)?;
            io::write_pool(out, &config, &pool)?;
            let mut m = RunManifest::new("discover", &config);
            m.input("data", data);
            m.output("pool", out);
            finish(&mut m, started, &manifest_path(out))?;
            println!("{} shapelets -> {}", pool.len(), out.display());
        }
        Command::Augment { data, pool, out } => {
            let config = g.resolve_config()?;
            let dataset = load(data, &config)?;
            let shapelets = io::read_pool(pool)?.pool();
            let rng = SeededRng::new(config.seed).derive(streams::AUGMENT);
            let balanced = balance_dataset(&dataset, &shapelets, &config, &rng)?;
            io::write_dataset(out, &balanced)?;
            let mut m = RunManifest::new("augment", &config);
            m.input("data", data);
            m.input("pool", pool);
            m.output("data", out);
            finish(&mut m, started, &manifest_path(out))?;
            println!("{} -> {} instances -> {}", dataset.len(), balanced.len(), out.display());
        }
        Command::Transform { data, pool, out } => {
            let config = g.resolve_config()?;
            let dataset = load(data, &config)?;
            let shapelets = match pool {
                Some(p) => io::read_pool(p)?.pool(),
                None if !config.use_shapelet_features => ShapeletPool::default(),
                None => return Err(CliError::Usage("--pool is required with shapelet features".into())),
            };
            let features = transform_dataset(&dataset, &shapelets, &feature_spec(&config))?;
            io::write_features(out, &features)?;
            let mut m = RunManifest::new("transform", &config);
            m.input("data", data);
            if let Some(p) = pool {
                m.input("pool", p);
            }
            m.output("features", out);
            finish(&mut m, started, &manifest_path(out))?;
            println!("{} x {} features -> {}", features.len(), features.dim(), out.display());
        }
        Command::Train {
            train: train_path,
            val,
            pool,
            out,
        } => {
            let config = g.resolve_config()?;
            let train_features = io::read_features(train_path)?;
            let val_features = io::read_features(val)?;
            let classes: Vec<ClassLabel> = train_features
                .labels
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let rng = SeededRng::new(config.seed).derive(streams::TRAIN);
            let head = train(&train_features, &val_features, &classes, &config.train, &rng)?;
            let pool_path = pool.as_deref().map(|p| recorded_pool_path(p, out)).transpose()?;
            let checkpoint = ModelCheckpoint::new(head, feature_spec(&config), &config, pool_path);
            io::write_json(out, &checkpoint)?;
            let mut m = RunManifest::new("train", &config);
            m.input("train", train_path);
            m.input("val", val);
            m.output("checkpoint", out);
            finish(&mut m, started, &manifest_path(out))?;
            println!(
                "best epoch {} of {} -> {}",
                checkpoint.best_epoch,
                checkpoint.history.len(),
                out.display()
            );
        }
        Command::Evaluate {
            checkpoint,
            data,
            pool,
            out,
        } => {
            let ck: ModelCheckpoint = io::read_json(checkpoint)?;
            let shapelets = load_pool(&ck, checkpoint, pool.as_deref())?;
            let dataset = load(data, &ck.config)?;
            let report = MetricsReport::new(&ck.config, evaluate_dataset(&ck, &shapelets, &dataset)?, None);
            match out {
                Some(path) => {
                    io::write_json(path, &report)?;
                    let mut m = RunManifest::new("evaluate", &ck.config);
                    m.input("checkpoint", checkpoint);
                    m.input("data", data);
                    m.output("metrics", path);
                    finish(&mut m, started, &manifest_path(path))?;
                    print_summary(&report.test);
                }
                None => println!("{}", serde_json::to_string_pretty(&report).expect("serializable")),
            }
        }
        Command::TuneK { data, grid, out } => {
            let config = g.resolve_config()?;
            let dataset = io::read_dataset(data)?;
            let folds = g.folds.unwrap_or(5);
            let result = match grid {
                Some(grid) => tune_k_over(&dataset, &config, folds, grid)?,
                None => tune_k(&dataset, &config, folds)?,
            };
            for s in &result.scores {
                println!("k = {:>3}  mean macro-F1 {:.4}", s.k, s.mean_macro_f1);
            }
            println!("best k = {}", result.best_k);
            if let Some(path) = out {
                io::write_json(path, &result)?;
                let mut m = RunManifest::new("tune-k", &config);
                m.input("data", data);
                m.output("tune", path);
                finish(&mut m, started, &manifest_path(path))?;
            }
        }
        Command::Explain {
            checkpoint,
            data,
            pool,
            instance,
            all_classes,
            out,
            plot_data,
        } => {
            let ck: ModelCheckpoint = io::read_json(checkpoint)?;
            let shapelets = load_pool(&ck, checkpoint, pool.as_deref())?;
            let dataset = load(data, &ck.config)?;
            let selected: Vec<_> = match instance {
                Some(id) => vec![dataset
                    .get(id)
                    .ok_or_else(|| CliError::Usage(format!("no instance `{id}` in {}", data.display())))?],
                None => dataset.iter().collect(),
            };
            let instances = selected
                .into_iter()
                .map(|x| explain_instance(&ck, &shapelets, x, *all_classes))
                .collect::<Result<_, _>>()?;
            let report = ExplainReport {
                all_classes: *all_classes,
                instances,
            };
            io::write_json(out, &report)?;
            let mut m = RunManifest::new("explain", &ck.config);
            m.input("checkpoint", checkpoint);
            m.input("data", data);
            m.output("report", out);
            if let Some(p) = plot_data {
                emit_plot_data(&report, p)?;
                m.output("plot_data", p);
            }
            finish(&mut m, started, &manifest_path(out))?;
            println!("{} explanations -> {}", report.instances.len(), out.display());
        }
        Command::RunAll {
            out_dir,
            data,
            n,
            noise,
        } => {
            let config = g.resolve_config()?;
            let report = run_all(&config, out_dir, data.as_deref(), *n, *noise, started)?;
            print_summary(&report.test);
        }
    }
    Ok(())
}

fn run_all(
    config: &Config,
    out_dir: &Path,
    data: Option<&Path>,
    n: usize,
    noise: Option<f64>,
    started: Instant,
) -> CliResult<MetricsReport> {
    fs::create_dir_all(out_dir).map_err(|e| ShipError::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let mut m = RunManifest::new("run-all", config);
    let t = Instant::now();
    let dataset = match data {
        Some(path) => {
            m.input("data", path);
            io::read_dataset(path)?
        }
        None => generate_synthetic(&synth_config(config, n, noise))?,
    };
    let dataset = prepare(&dataset, config)?;
    let splits = split_for_run(&dataset, config)?;
    m.time("load", t.elapsed().as_secs_f64());
    info!(
        "train {} / val {} / test {}",
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    );
    let split_path = out_dir.join("split.json");
    io::write_json(
        &split_path,
        &SplitIds {
            train: ids(&splits.train),
            val: ids(&splits.val),
            test: ids(&splits.test),
        },
    )?;

    let fitted = fit(&splits.train, &splits.val, config, Some("pool.json".into()))?;
    m.timings.extend(fitted.timings.iter().cloned());
    let pool_path = out_dir.join("pool.json");
    let checkpoint_path = out_dir.join("checkpoint.json");
    io::write_pool(&pool_path, config, &fitted.pool)?;
    io::write_json(&checkpoint_path, &fitted.checkpoint)?;

    let t = Instant::now();
    let test = evaluate_dataset(&fitted.checkpoint, &fitted.pool, &splits.test)?;
    let labels = &fitted.checkpoint.labels;
    let train_y = label_indices(labels, &splits.train.iter().map(|x| x.label.clone()).collect::<Vec<_>>())?;
    let test_y = label_indices(labels, &splits.test.iter().map(|x| x.label.clone()).collect::<Vec<_>>())?;
    let baseline = majority_baseline(labels, &train_y, &test_y)?;
    let report = MetricsReport::new(config, test, Some(baseline));
    m.time("evaluate", t.elapsed().as_secs_f64());
    let metrics_path = out_dir.join("metrics.json");
    io::write_json(&metrics_path, &report)?;

    m.output("split", &split_path);
    m.output("pool", &pool_path);
    m.output("checkpoint", &checkpoint_path);
    m.output("metrics", &metrics_path);
    finish(&mut m, started, &out_dir.join("manifest.json"))?;
    Ok(report)
}

fn print_summary(r: &EvalReport) {
    println!("accuracy  {:.4}", r.accuracy);
    println!("macro-F1  {:.4}", r.macro_f1);
    for (label, f1) in &r.per_class_f1 {
        println!("F1 {label:<4}   {f1:.4}");
    }
}
