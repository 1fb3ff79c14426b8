use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};
use ship_core::{io, Config};

#[derive(Debug, Parser)]
#[command(name = "ship", version, about = "Shapelet-based classification of ventilator asynchrony")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides applied on top of `--config`; flags win.
#[derive(Debug, Default, Clone, Args)]
pub struct GlobalArgs {
    /// JSON configuration file; missing fields take defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// PIPs per channel.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Shapelet pool size.
    #[arg(long, global = true)]
    pub g: Option<usize>,
    /// Augmented copies per minority instance.
    #[arg(long, global = true)]
    pub rsa: Option<usize>,
    #[arg(long, global = true)]
    pub sigma_scale: Option<f64>,
    #[arg(long, global = true)]
    pub logsig_depth: Option<usize>,
    /// Comma-separated channel indices, e.g. `0,1`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub channels: Option<Vec<usize>>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Train without shapelet augmentation.
    #[arg(long, global = true)]
    pub no_augment: bool,
    /// Use log-signature features only.
    #[arg(long, global = true)]
    pub no_shapelet_features: bool,
    /// Cross-validation folds for `tune-k`.
    #[arg(long, global = true)]
    pub folds: Option<usize>,
}

impl GlobalArgs {
    pub fn resolve_config(&self) -> CliResult<Config> {
        let mut c: Config = match &self.config {
            Some(path) => io::read_json(path)?,
            None => Config::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.g {
            c.g = v;
        }
        if let Some(v) = self.rsa {
            c.r_sa = v;
        }
        if let Some(v) = self.sigma_scale {
            c.noise_sigma_scale = v;
        }
        if let Some(v) = self.logsig_depth {
            c.logsig_depth = v;
        }
        if let Some(v) = &self.channels {
            if v.is_empty() {
                return Err(CliError::Usage("--channels needs at least one index".into()));
            }
            c.channel_subset = Some(v.clone());
        }
        if self.no_augment {
            c.use_augmentation = false;
        }
        if self.no_shapelet_features {
            c.use_shapelet_features = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labelled synthetic dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Noise level relative to each channel's amplitude.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Discover a shapelet pool from a training set.
    Discover {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Balance a training set with shapelet-guided noise.
    Augment {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute feature vectors.
    Transform {
        #[arg(long)]
        data: PathBuf,
        /// Required unless `--no-shapelet-features`.
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the classification head on feature files.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
        /// Pool the features were computed with; recorded in the checkpoint.
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a checkpoint on a labelled dataset.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Overrides the pool recorded in the checkpoint.
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose k by stratified cross-validation.
    TuneK {
        #[arg(long)]
        data: PathBuf,
        /// Explicit grid instead of the default one.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report shapelet matches behind each prediction.
    Explain {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Only this instance; all instances otherwise.
        #[arg(long)]
        instance: Option<String>,
        /// Include every class's shapelets, not just the predicted class's.
        #[arg(long)]
        all_classes: bool,
        #[arg(long)]
        out: PathBuf,
        /// Also write one plotting document per instance as NDJSON.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Synthesize or load data, then discover, augment, transform, train and evaluate.
    RunAll {
        #[arg(long)]
        out_dir: PathBuf,
        /// Labelled dataset; synthetic data is generated when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long)]
        noise: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Discover { .. } => "discover",
            Command::Augment { .. } => "augment",
            Command::Transform { .. } => "transform",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::TuneK { .. } => "tune-k",
            Command::Explain { .. } => "explain",
            Command::RunAll { .. } => "run-all",
        }
    }
}
