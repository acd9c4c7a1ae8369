//! The `train` pipeline, its run manifest and bit-exact replay.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lomboost::criteria::{GiniConstant, DEFAULT_GINI_CONSTANT};
use lomboost::data::{parse_sparse_str, split_dataset, Dataset, SplitSpec};
use lomboost::learner::{self, trace_to_csv, train_with_test, TrainConfig, TrainOutput};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Learning rates tried by `--lr-sweep`.
pub const LR_GRID: [f64; 7] = [0.25, 0.5, 0.75, 1.0, 2.0, 4.0, 8.0];

pub const TREE_FILE: &str = "tree";
pub const TRACE_FILE: &str = "trace.csv";
pub const MANIFEST_FILE: &str = "manifest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, clap::Args)]
pub struct TrainSettings {
    /// Number of splits to commit.
    #[arg(long, default_value_t = 31)]
    pub splits: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    /// Pick the learning rate from a fixed grid by validation error.
    #[arg(long)]
    pub lr_sweep: bool,
    /// Passes over a leaf's examples per split.
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, env = "LOMBOOST_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Modified Gini constant (must exceed 2).
    #[arg(long = "C", default_value_t = DEFAULT_GINI_CONSTANT)]
    pub c: f64,
    /// Number of classes; inferred from the labels when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// Leaves with fewer examples are never split.
    #[arg(long, default_value_t = 2)]
    pub min_node_examples: u64,
}

impl TrainSettings {
    fn config(&self, learning_rate: f64) -> Result<TrainConfig> {
        let config = TrainConfig {
            max_splits: self.splits,
            epochs_per_split: self.epochs,
            learning_rate,
            seed: self.seed,
            criterion_c: GiniConstant::new(self.c)?,
            min_node_examples: self.min_node_examples,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub path: PathBuf,
    pub size: usize,
    pub k: usize,
    pub d: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lr: f64,
    pub validation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub settings: TrainSettings,
    /// Configuration of the final training run.
    pub config: TrainConfig,
    pub sweep: Vec<SweepPoint>,
    pub dataset: DatasetFingerprint,
    pub split_sizes: [usize; 3],
    pub seed: u64,
    pub test_error: Option<f64>,
    pub artifacts: Vec<Artifact>,
}

/// Outputs of one training run, held in memory until written.
pub struct TrainRun {
    pub tree: String,
    pub trace: String,
    pub manifest: RunManifest,
    pub warnings: Vec<String>,
    pub test_error: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it into
/// place so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .with_context(|| format!("{} has no file name", path.display()))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    file.write_all(bytes)?;
    file.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load(path: &Path, k: Option<usize>) -> Result<(Dataset, String)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let hash = sha256_hex(text.as_bytes());
    let mut data =
        parse_sparse_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(k) = k {
        data = data.with_num_classes(k)?;
    }
    Ok((data, hash))
}

/// Splits the data, optionally sweeps the learning rate on the validation
/// part, then trains on the training part with the test part traced.
pub fn train(data_path: &Path, settings: &TrainSettings) -> Result<TrainRun> {
    let (data, hash) = load(data_path, settings.k)?;
    let (train_set, valid, test) = split_dataset(&data, &SplitSpec::new(settings.seed))?;

    let mut sweep = Vec::new();
    let mut lr = settings.lr;
    if settings.lr_sweep {
        let mut best = f64::INFINITY;
        for &candidate in &LR_GRID {
            let out = learner::train(&train_set, &settings.config(candidate)?)?;
            let error = out.tree.evaluate(&valid)?;
            sweep.push(SweepPoint {
                lr: candidate,
                validation_error: error,
            });
            if error < best {
                best = error;
                lr = candidate;
            }
        }
    }

    let config = settings.config(lr)?;
    let TrainOutput {
        tree,
        trace,
        warnings,
    } = train_with_test(&train_set, Some(&test), &config)?;
    let tree = tree.to_text();
    let trace_csv = trace_to_csv(&trace);
    let test_error = trace.last().and_then(|r| r.test_error);
    let manifest = RunManifest {
        command: "train".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        settings: settings.clone(),
        config,
        sweep,
        dataset: DatasetFingerprint {
            path: fs::canonicalize(data_path).unwrap_or_else(|_| data_path.to_path_buf()),
            size: data.len(),
            k: data.num_classes(),
            d: data.num_features(),
            sha256: hash,
        },
        split_sizes: [train_set.len(), valid.len(), test.len()],
        seed: settings.seed,
        test_error,
        artifacts: vec![
            Artifact {
                path: TREE_FILE.into(),
                sha256: sha256_hex(tree.as_bytes()),
            },
            Artifact {
                path: TRACE_FILE.into(),
                sha256: sha256_hex(trace_csv.as_bytes()),
            },
        ],
    };
    Ok(TrainRun {
        tree,
        trace: trace_csv,
        manifest,
        warnings,
        test_error,
    })
}

impl TrainRun {
    /// Writes the tree, the trace and, last, the manifest into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_atomic(&dir.join(TREE_FILE), self.tree.as_bytes())?;
        write_atomic(&dir.join(TRACE_FILE), self.trace.as_bytes())?;
        let mut manifest = serde_json::to_string_pretty(&self.manifest)?;
        manifest.push('\n');
        write_atomic(&dir.join(MANIFEST_FILE), manifest.as_bytes())
    }
}

/// Re-runs the training recorded in a manifest. Returns a description of
/// every recorded hash the new run does not reproduce.
pub fn replay(manifest_path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let recorded: RunManifest = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
    if recorded.command != "train" {
        bail!("cannot replay command {:?}", recorded.command);
    }
    let rerun = train(&recorded.dataset.path, &recorded.settings)?;
    if rerun.manifest.dataset.sha256 != recorded.dataset.sha256 {
        bail!(
            "dataset {} changed since the recorded run",
            recorded.dataset.path.display()
        );
    }
    let mut mismatches = Vec::new();
    for (old, new) in recorded.artifacts.iter().zip(&rerun.manifest.artifacts) {
        if old != new {
            mismatches.push(format!(
                "{}: recorded {}, replayed {}",
                old.path.display(),
                old.sha256,
                new.sha256
            ));
        }
    }
    if recorded.artifacts.len() != rerun.manifest.artifacts.len() {
        mismatches.push("artifact lists differ".into());
    }
    Ok(mismatches)
}
