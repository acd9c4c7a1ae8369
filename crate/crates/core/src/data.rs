//! Sparse multiclass datasets: the `LABEL idx:val ...` text format, seeded
//! train/validation/test splits, and a synthetic generator.
//!
//! ```text
//! 3 1:0.5 7:2
//! 1 2:1 4:-0.25
//! ```
//!
//! Labels are 1-based class ids and feature indices are 1-based and strictly
//! increasing within a line. Blank lines are skipped and `#` starts a comment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// One labelled example with sparse features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    /// `(index, value)` pairs with strictly increasing indices ≥ 1.
    pub features: Vec<(u32, f64)>,
    /// Class id in `1..=k`.
    pub label: u32,
}

impl Example {
    pub fn new(label: u32, features: Vec<(u32, f64)>) -> Self {
        Self { features, label }
    }

    /// Zero-based class index.
    pub fn class(&self) -> usize {
        self.label as usize - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    examples: Vec<Example>,
    num_classes: usize,
    num_features: usize,
}

impl Dataset {
    /// Builds a dataset with `k` and `d` inferred as the largest label and
    /// feature index.
    pub fn new(examples: Vec<Example>) -> Result<Self> {
        let num_classes = examples.iter().map(|e| e.label as usize).max().unwrap_or(0);
        let num_features = examples
            .iter()
            .filter_map(|e| e.features.last().map(|&(i, _)| i as usize))
            .max()
            .unwrap_or(0);
        Self::with_dimensions(examples, num_classes, num_features)
    }

    /// Builds a dataset with explicit `k` and `d`; every label and index must
    /// fit.
    pub fn with_dimensions(
        examples: Vec<Example>,
        num_classes: usize,
        num_features: usize,
    ) -> Result<Self> {
        for (n, e) in examples.iter().enumerate() {
            if e.label == 0 || e.label as usize > num_classes {
                return Err(Error::InvalidDistribution(format!(
                    "example {n} has label {} outside 1..={num_classes}",
                    e.label
                )));
            }
            if let Some(&(i, _)) = e
                .features
                .iter()
                .find(|(i, _)| *i == 0 || *i as usize > num_features)
            {
                return Err(out_of_range(
                    "feature index",
                    i as f64,
                    format!("[1, {num_features}]"),
                ));
            }
        }
        Ok(Self {
            examples,
            num_classes,
            num_features,
        })
    }

    /// Same examples with the class count raised to `k`.
    pub fn with_num_classes(self, k: usize) -> Result<Self> {
        Self::with_dimensions(self.examples, k, self.num_features)
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Number of examples per class, indexed by zero-based class.
    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = vec![0; self.num_classes];
        for e in &self.examples {
            counts[e.class()] += 1;
        }
        counts
    }

    fn subset(&self, indices: &[usize]) -> Self {
        Self {
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
            num_classes: self.num_classes,
            num_features: self.num_features,
        }
    }
}

/// Parses the sparse text format. Empty input is an error.
pub fn parse_sparse_str(text: &str) -> Result<Dataset> {
    let mut examples = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        examples.push(parse_line(line).map_err(|message| Error::Parse {
            line: n + 1,
            message,
        })?);
    }
    if examples.is_empty() {
        return Err(Error::NoExamples);
    }
    Dataset::new(examples)
}

pub fn parse_sparse_file(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_sparse_str(&fs::read_to_string(path)?)
}

fn parse_line(line: &str) -> std::result::Result<Example, String> {
    let mut tokens = line.split_whitespace();
    let label_token = tokens.next().ok_or("missing label")?;
    let label: i64 = label_token
        .parse()
        .map_err(|_| format!("label {label_token:?} is not an integer"))?;
    if label < 1 || label > u32::MAX as i64 {
        return Err(format!("label {label} is not a positive class id"));
    }
    let mut features = Vec::new();
    let mut last = 0u32;
    for token in tokens {
        let (idx, val) = token
            .split_once(':')
            .ok_or_else(|| format!("feature {token:?} is not INDEX:VALUE"))?;
        let idx: u32 = idx
            .parse()
            .map_err(|_| format!("feature index {idx:?} is not a positive integer"))?;
        let val: f64 = val
            .parse()
            .map_err(|_| format!("feature value {val:?} is not a number"))?;
        if idx == 0 {
            return Err("feature index 0; indices start at 1".into());
        }
        if idx <= last {
            return Err(format!("feature index {idx} is not strictly increasing"));
        }
        if !val.is_finite() {
            return Err(format!("feature value {val} is not finite"));
        }
        last = idx;
        features.push((idx, val));
    }
    Ok(Example::new(label as u32, features))
}

/// Serializes to the sparse text format. Values use the shortest decimal
/// representation that parses back to the same `f64`.
pub fn to_sparse_string(data: &Dataset) -> String {
    let mut out = String::new();
    for e in data.examples() {
        write!(out, "{}", e.label).unwrap();
        for (i, v) in &e.features {
            write!(out, " {i}:{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_sparse_file(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_sparse_string(data))?;
    Ok(())
}

/// Proportions of a train/validation/test partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of all examples used for training plus validation.
    pub train_frac: f64,
    /// Fraction of the training portion held out for validation.
    pub valid_frac_of_train: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            train_frac: 0.9,
            valid_frac_of_train: 0.1,
            seed,
        }
    }
}

/// Partition sizes `(train, valid, test)` for `n` examples.
pub fn split_sizes(n: usize, spec: &SplitSpec) -> (usize, usize, usize) {
    let train_total = (n as f64 * spec.train_frac).round() as usize;
    let valid = (train_total as f64 * spec.valid_frac_of_train).round() as usize;
    (train_total - valid, valid, n - train_total)
}

/// Seeded, class-stratified partition into `(train, valid, test)`.
///
/// Examples are shuffled, each class is spread evenly over a single ordering
/// (the `j`-th of `n_c` examples of a class sits at rank `(j + ½)/n_c`), and the
/// ordering is cut into contiguous train, validation and test blocks. Every
/// block then holds each class within one example of its global share.
pub fn split_dataset(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let n = data.len();
    if n < 10 {
        return Err(Error::DatasetTooSmall(n));
    }
    for (name, f) in [
        ("train_frac", spec.train_frac),
        ("valid_frac_of_train", spec.valid_frac_of_train),
    ] {
        if !(f > 0.0 && f < 1.0) {
            return Err(out_of_range(name, f, "(0, 1)"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let counts = data.class_counts();
    let mut seen = vec![0u64; data.num_classes()];
    let mut ranked: Vec<(f64, usize, usize)> = order
        .iter()
        .enumerate()
        .map(|(pos, &idx)| {
            let c = data.examples[idx].class();
            let rank = (seen[c] as f64 + 0.5) / counts[c] as f64;
            seen[c] += 1;
            (rank, pos, idx)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let ordered: Vec<usize> = ranked.into_iter().map(|(_, _, idx)| idx).collect();

    let (n_train, n_valid, _) = split_sizes(n, spec);
    let (train, rest) = ordered.split_at(n_train);
    let (valid, test) = rest.split_at(n_valid);
    Ok((data.subset(train), data.subset(valid), data.subset(test)))
}

/// Balanced `k`-class data in `d` dimensions: class `i` is the unit vector on
/// coordinate `i` plus independent `N(0, noise²)` noise on every coordinate.
///
/// Example `j` has label `(j mod k) + 1`. Zero-valued coordinates are omitted,
/// so `noise = 0` yields one feature per example.
pub fn synthetic_hierarchical(
    k: usize,
    d: usize,
    n: usize,
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    if k < 2 {
        return Err(out_of_range("k", k as f64, "[2, inf)"));
    }
    if k > d {
        return Err(out_of_range("k", k as f64, format!("[2, d = {d}]")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(out_of_range("noise", noise, "[0, inf)"));
    }
    let normal = Normal::new(0.0, noise).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let examples = (0..n)
        .map(|j| {
            let class = j % k;
            let features = (0..d)
                .filter_map(|coord| {
                    let base = if coord == class { 1.0 } else { 0.0 };
                    let v = if noise > 0.0 {
                        base + normal.sample(&mut rng)
                    } else {
                        base
                    };
                    (v != 0.0).then_some((coord as u32 + 1, v))
                })
                .collect();
            Example::new(class as u32 + 1, features)
        })
        .collect();
    Dataset::with_dimensions(examples, k, d)
}
