//! Experiment protocol: labeled/unlabeled splits controlled by a label rate
//! `alpha` and a positive ratio `beta`, k-NN under Hamming distance, and
//! repeated shuffled k-fold cross-validation.
//!
//! All randomness comes from ChaCha streams seeded from one master seed, so
//! any (alpha, beta, repeat) cell can be re-run on its own and reports are
//! reproducible byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{self, DEFAULT_LAPLACIAN_NEIGHBORS};
use crate::error::{Error, Result};
use crate::partition::AttributeSubset;
use crate::proxy::{self, ProxyParams, DEFAULT_DELTA, DEFAULT_EPSILON};
use crate::reduction::{self, ReduceOptions, DEFAULT_TOLERANCE};
use crate::tabular::{self, ClassLabel, DecisionTable, DEFAULT_MISSING_TOKEN};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_REPEATS: usize = 10;
pub const DEFAULT_KNN_K: usize = 3;
pub const DEFAULT_BINS: usize = 3;

/// SplitMix64 finalizer; mixes a master seed with cell coordinates.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    let mut z = master;
    for &c in coords {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(c.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSpec {
    /// Fraction of rows that keep their label.
    pub alpha: f64,
    /// Multiplier on the prior for the labeled set's share of positives.
    pub beta: f64,
    pub seed: u64,
}

/// Labeled-set sizes `(|L_pos|, |L_neg|)` for a split of `truth`.
pub fn split_counts(truth: &DecisionTable, spec: &SplitSpec) -> Result<(usize, usize)> {
    if !(spec.alpha > 0.0 && spec.alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1], got {}", spec.alpha)));
    }
    if !(spec.beta > 0.0 && spec.beta.is_finite()) {
        return Err(Error::Parameter(format!("beta must be > 0, got {}", spec.beta)));
    }
    let labels = truth.full_labels()?;
    let total_pos = labels.iter().filter(|&&l| l == ClassLabel::Positive).count();
    let total_neg = labels.len() - total_pos;
    // β · P_pos(U) · α · |U| with P_pos(U)·|U| = |U_pos|
    let n_pos = round_half_up(spec.beta * spec.alpha * total_pos as f64);
    let n_labeled = round_half_up(spec.alpha * labels.len() as f64);
    if n_pos < 1 {
        return Err(Error::Split(format!("|L_pos| rounds to 0 (alpha={}, beta={})", spec.alpha, spec.beta)));
    }
    if n_labeled <= n_pos {
        return Err(Error::Split(format!(
            "|L_neg| = {n_labeled} - {n_pos} < 1 (alpha={}, beta={})",
            spec.alpha, spec.beta
        )));
    }
    let n_neg = n_labeled - n_pos;
    if n_pos > total_pos {
        return Err(Error::Split(format!("|L_pos| = {n_pos} exceeds the {total_pos} positive rows")));
    }
    if n_neg > total_neg {
        return Err(Error::Split(format!("|L_neg| = {n_neg} exceeds the {total_neg} negative rows")));
    }
    Ok((n_pos, n_neg))
}

/// Keeps the labels of `|L_pos|` positive and `|L_neg|` negative rows drawn
/// uniformly without replacement; every other row becomes unlabeled.
/// `alpha = 1` returns the table unchanged.
pub fn make_split(truth: &DecisionTable, spec: &SplitSpec) -> Result<DecisionTable> {
    let labels = truth.full_labels()?;
    if spec.alpha >= 1.0 {
        return Ok(truth.clone());
    }
    let (n_pos, n_neg) = split_counts(truth, spec)?;
    let (pos, neg): (Vec<usize>, Vec<usize>) =
        (0..labels.len()).partition(|&r| labels[r] == ClassLabel::Positive);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut keep = vec![false; labels.len()];
    for i in index::sample(&mut rng, pos.len(), n_pos) {
        keep[pos[i]] = true;
    }
    for i in index::sample(&mut rng, neg.len(), n_neg) {
        keep[neg[i]] = true;
    }
    let partial = labels
        .iter()
        .zip(&keep)
        .map(|(&l, &k)| if k { Some(l) } else { None })
        .collect();
    truth.with_labels(partial)
}

/// Codes of the chosen attributes, row-major.
struct Projection {
    width: usize,
    codes: Vec<u32>,
}

impl Projection {
    fn new(table: &DecisionTable, attrs: &AttributeSubset) -> Self {
        let width = attrs.len();
        let mut codes = Vec::with_capacity(table.n_rows() * width);
        for row in 0..table.n_rows() {
            codes.extend(attrs.iter().map(|a| table.code(row, a)));
        }
        Projection { width, codes }
    }

    fn row(&self, r: usize) -> &[u32] {
        &self.codes[r * self.width..(r + 1) * self.width]
    }

    fn distance(&self, a: usize, b: usize) -> usize {
        self.row(a).iter().zip(self.row(b)).filter(|(x, y)| x != y).count()
    }
}

/// `train` must be sorted ascending so that distance ties resolve to the
/// lower row index.
fn predict(proj: &Projection, labels: &[ClassLabel], train: &[usize], query: usize, k: usize) -> ClassLabel {
    let mut nearest: Vec<(usize, usize)> = Vec::with_capacity(k + 1);
    for &row in train {
        let d = proj.distance(query, row);
        if nearest.len() == k && d >= nearest[k - 1].0 {
            continue;
        }
        let pos = nearest.partition_point(|&(nd, _)| nd <= d);
        nearest.insert(pos, (d, row));
        nearest.truncate(k);
    }
    let positives = nearest.iter().filter(|&&(_, r)| labels[r] == ClassLabel::Positive).count();
    let negatives = nearest.len() - positives;
    match positives.cmp(&negatives) {
        std::cmp::Ordering::Greater => ClassLabel::Positive,
        std::cmp::Ordering::Less => ClassLabel::Negative,
        std::cmp::Ordering::Equal => labels[nearest[0].1],
    }
}

/// k-NN labels for `queries`, trained on the labeled rows `train` of the
/// same table, using Hamming distance over `attrs`. Ties in distance go to
/// the lower row index; a tied vote goes to the single nearest neighbour.
pub fn knn_classify(
    table: &DecisionTable,
    train: &[usize],
    queries: &[usize],
    attrs: &AttributeSubset,
    k: usize,
) -> Result<Vec<ClassLabel>> {
    if k == 0 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    if train.is_empty() {
        return Err(Error::Parameter("empty training set".into()));
    }
    let mut labels = vec![ClassLabel::Negative; table.n_rows()];
    for &r in train {
        labels[r] = table
            .label(r)
            .ok_or_else(|| Error::State(format!("training row {r} is unlabeled")))?;
    }
    let mut sorted = train.to_vec();
    sorted.sort_unstable();
    let proj = Projection::new(table, attrs);
    Ok(queries.iter().map(|&q| predict(&proj, &labels, &sorted, q, k)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvSpec {
    pub folds: usize,
    pub repeats: usize,
    pub knn_k: usize,
    pub seed: u64,
}

impl Default for CvSpec {
    fn default() -> Self {
        CvSpec {
            folds: DEFAULT_FOLDS,
            repeats: DEFAULT_REPEATS,
            knn_k: DEFAULT_KNN_K,
            seed: 0,
        }
    }
}

/// Contiguous fold boundaries; sizes differ by at most one.
pub fn fold_bounds(n: usize, folds: usize) -> Vec<(usize, usize)> {
    (0..folds).map(|f| (f * n / folds, (f + 1) * n / folds)).collect()
}

fn repeat_accuracies(proj: &Projection, labels: &[ClassLabel], spec: &CvSpec, repeat: usize) -> Vec<f64> {
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(repeat as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    fold_bounds(n, spec.folds)
        .into_iter()
        .map(|(lo, hi)| {
            let test = &order[lo..hi];
            let mut in_test = vec![false; n];
            for &r in test {
                in_test[r] = true;
            }
            let train: Vec<usize> = (0..n).filter(|&r| !in_test[r]).collect();
            let correct = test
                .iter()
                .filter(|&&q| predict(proj, labels, &train, q, spec.knn_k) == labels[q])
                .count();
            correct as f64 / test.len() as f64
        })
        .collect()
}

/// Mean k-NN accuracy over `repeats` shuffles × `folds` folds of a fully
/// labeled table restricted to `attrs`.
pub fn cross_validate(table: &DecisionTable, attrs: &AttributeSubset, spec: &CvSpec) -> Result<f64> {
    if attrs.is_empty() {
        return Err(Error::Parameter("cannot cross-validate an empty attribute set".into()));
    }
    if let Some(&bad) = attrs.as_slice().iter().find(|&&a| a >= table.n_attributes()) {
        return Err(Error::Parameter(format!("attribute index {bad} out of range")));
    }
    let labels = table.full_labels()?;
    if spec.folds < 2 || spec.folds > labels.len() {
        return Err(Error::Parameter(format!(
            "folds must lie in 2..={}, got {}",
            labels.len(),
            spec.folds
        )));
    }
    if spec.repeats == 0 || spec.knn_k == 0 {
        return Err(Error::Parameter("repeats and k must be >= 1".into()));
    }
    let proj = Projection::new(table, attrs);
    let run = |r: usize| repeat_accuracies(&proj, &labels, spec, r);
    #[cfg(feature = "parallel")]
    let per_repeat: Vec<Vec<f64>> = (0..spec.repeats).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let per_repeat: Vec<Vec<f64>> = (0..spec.repeats).map(run).collect();
    let cells: Vec<f64> = per_repeat.into_iter().flatten().collect();
    Ok(cells.iter().sum::<f64>() / cells.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    /// Proxy labels, then the entropy reduct over all rows ("final").
    #[serde(rename = "gce")]
    Gce,
    /// Entropy reduct of the labeled rows only ("initial").
    #[serde(rename = "gce-l")]
    GceL,
    #[serde(rename = "fisher")]
    Fisher,
    #[serde(rename = "laplacian")]
    Laplacian,
    /// Entropy reduct of the fully labeled ground truth.
    #[serde(rename = "gt")]
    Gt,
    /// Every attribute.
    #[serde(rename = "raw")]
    Raw,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Gce,
        Method::GceL,
        Method::Fisher,
        Method::Laplacian,
        Method::Gt,
        Method::Raw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gce => "gce",
            Method::GceL => "gce-l",
            Method::Fisher => "fisher",
            Method::Laplacian => "laplacian",
            Method::Gt => "gt",
            Method::Raw => "raw",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown method '{s}' (expected gce, gce-l, fisher, laplacian, gt, raw)")))
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut methods: Vec<Method> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    methods.dedup();
    if methods.is_empty() {
        return Err(Error::Config("method list is empty".into()));
    }
    Ok(methods)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub dataset: PathBuf,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Random splits per (alpha, beta).
    pub repeats: usize,
    pub folds: usize,
    /// Shuffles per cross-validation.
    pub cv_repeats: usize,
    pub knn_k: usize,
    pub methods: Vec<Method>,
    pub epsilon: f64,
    pub delta: usize,
    pub bins: usize,
    pub missing_token: String,
    pub laplacian_neighbors: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            dataset: PathBuf::new(),
            alphas: vec![0.1],
            betas: vec![1.0],
            repeats: DEFAULT_REPEATS,
            folds: DEFAULT_FOLDS,
            cv_repeats: DEFAULT_REPEATS,
            knn_k: DEFAULT_KNN_K,
            methods: vec![Method::Gce, Method::GceL],
            epsilon: DEFAULT_EPSILON,
            delta: DEFAULT_DELTA,
            bins: DEFAULT_BINS,
            missing_token: DEFAULT_MISSING_TOKEN.into(),
            laplacian_neighbors: DEFAULT_LAPLACIAN_NEIGHBORS,
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s.trim()))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Config(format!("key '{key}' needs at least one value")));
    }
    Ok(values)
}

impl ExperimentSpec {
    /// Parses `key = value` lines (`#` starts a comment). A relative dataset
    /// path is resolved against `base_dir`.
    pub fn from_config_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        let mut dataset = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dataset" => dataset = Some(base_dir.join(value)),
                "alphas" => spec.alphas = parse_list(key, value)?,
                "betas" => spec.betas = parse_list(key, value)?,
                "repeats" => spec.repeats = parse_value(key, value)?,
                "folds" => spec.folds = parse_value(key, value)?,
                "cv_repeats" => spec.cv_repeats = parse_value(key, value)?,
                "knn_k" => spec.knn_k = parse_value(key, value)?,
                "methods" => spec.methods = parse_methods(value)?,
                "epsilon" => spec.epsilon = parse_value(key, value)?,
                "delta" => spec.delta = parse_value(key, value)?,
                "bins" => spec.bins = parse_value(key, value)?,
                "missing_label" => spec.missing_token = value.to_owned(),
                "laplacian_neighbors" => spec.laplacian_neighbors = parse_value(key, value)?,
                "tolerance" => spec.tolerance = parse_value(key, value)?,
                "seed" => spec.seed = parse_value(key, value)?,
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        spec.dataset = dataset.ok_or_else(|| Error::Config("missing key 'dataset'".into()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_config_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 || self.cv_repeats < 1 {
            return Err(Error::Config("repeats must be >= 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be >= 2".into()));
        }
        if self.knn_k < 1 {
            return Err(Error::Config("knn_k must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        if self.alphas.is_empty() || self.betas.is_empty() {
            return Err(Error::Config("alphas and betas need at least one value".into()));
        }
        Ok(())
    }

    fn proxy_params(&self, prior: f64) -> Result<ProxyParams> {
        ProxyParams::new(self.epsilon, self.delta, prior)
    }

    fn reduce_options(&self) -> ReduceOptions {
        ReduceOptions {
            tolerance: self.tolerance,
            ..ReduceOptions::default()
        }
    }
}

/// Loads and prepares the dataset named by the spec as ground truth.
pub fn load_dataset(spec: &ExperimentSpec) -> Result<DecisionTable> {
    let file = std::fs::File::open(&spec.dataset)
        .map_err(|e| Error::Io(e).context(format!("opening {}", spec.dataset.display())))?;
    let raw = tabular::load_csv(std::io::BufReader::new(file), &spec.missing_token)?;
    let table = tabular::prepare(&raw, spec.bins)?;
    if !table.is_fully_labeled() {
        return Err(Error::Config(format!(
            "{}: experiments need ground-truth labels on every row",
            spec.dataset.display()
        )));
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub dataset: String,
    pub alpha: f64,
    pub beta: f64,
    pub repeat: usize,
    pub method: Method,
    pub reduct: Vec<usize>,
    pub accuracy: f64,
    #[serde(skip)]
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub alpha: f64,
    pub beta: f64,
    pub method: Method,
    pub mean_accuracy: f64,
    pub reduct_min: usize,
    pub reduct_max: usize,
    pub reduct_avg: f64,
    pub cells: usize,
    #[serde(skip)]
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub attribute_names: Vec<String>,
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
}

struct Shared {
    gt: Option<Vec<usize>>,
    laplacian: Option<baselines::AttributeScores>,
}

fn cell_reduct(
    method: Method,
    split: &DecisionTable,
    truth: &DecisionTable,
    proposed: Option<&[usize]>,
    shared: &Shared,
    spec: &ExperimentSpec,
    prior: f64,
) -> Result<Vec<usize>> {
    let options = spec.reduce_options();
    let size_matched = || {
        proposed
            .map(|p| p.len())
            .ok_or_else(|| Error::State("size-matched baselines need the gce reduct".into()))
    };
    Ok(match method {
        Method::Gce => match proposed {
            Some(p) => p.to_vec(),
            None => proposed_reduct(split, spec, prior)?,
        },
        Method::GceL => baselines::gce_labeled_only(split, &options)?.selected,
        Method::Fisher => {
            let scores = baselines::fisher_scores(split)?;
            baselines::select_top_k(&scores, size_matched()?)?.as_slice().to_vec()
        }
        Method::Laplacian => {
            let scores = shared.laplacian.as_ref().expect("computed when requested");
            baselines::select_top_k(scores, size_matched()?)?.as_slice().to_vec()
        }
        Method::Gt => shared.gt.clone().expect("computed when requested"),
        Method::Raw => (0..truth.n_attributes()).collect(),
    })
}

fn proposed_reduct(split: &DecisionTable, spec: &ExperimentSpec, prior: f64) -> Result<Vec<usize>> {
    let (proxied, _) = proxy::assign_proxy_labels(split, &spec.proxy_params(prior)?)?;
    Ok(reduction::reduce(&proxied, &spec.reduce_options())?.selected)
}

struct CellCoords {
    alpha_idx: usize,
    beta_idx: usize,
    repeat: usize,
}

fn run_cell(
    truth: &DecisionTable,
    name: &str,
    spec: &ExperimentSpec,
    shared: &Shared,
    prior: f64,
    coords: &CellCoords,
) -> Result<Vec<CellResult>> {
    let alpha = spec.alphas[coords.alpha_idx];
    let beta = spec.betas[coords.beta_idx];
    let cell = [coords.alpha_idx as u64, coords.beta_idx as u64, coords.repeat as u64];
    let split_seed = derive_seed(spec.seed, &[cell[0], cell[1], cell[2], 0]);
    let cv = CvSpec {
        folds: spec.folds,
        repeats: spec.cv_repeats,
        knn_k: spec.knn_k,
        seed: derive_seed(spec.seed, &[cell[0], cell[1], cell[2], 1]),
    };
    let where_ = |method: Option<Method>| {
        let m = method.map_or(String::new(), |m| format!(", method={m}"));
        format!("alpha={alpha}, beta={beta}, repeat={}{m}", coords.repeat)
    };
    let split = make_split(truth, &SplitSpec { alpha, beta, seed: split_seed }).map_err(|e| e.context(where_(None)))?;

    let needs_proposed = spec
        .methods
        .iter()
        .any(|m| matches!(m, Method::Gce | Method::Fisher | Method::Laplacian));
    let proposed = if needs_proposed {
        Some(proposed_reduct(&split, spec, prior).map_err(|e| e.context(where_(Some(Method::Gce))))?)
    } else {
        None
    };

    spec.methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let reduct = cell_reduct(method, &split, truth, proposed.as_deref(), shared, spec, prior)
                .map_err(|e| e.context(where_(Some(method))))?;
            let attrs = AttributeSubset::new(reduct.iter().copied(), truth.n_attributes())?;
            // evaluation always uses the ground-truth labels
            let accuracy = cross_validate(truth, &attrs, &cv).map_err(|e| e.context(where_(Some(method))))?;
            Ok(CellResult {
                dataset: name.to_owned(),
                alpha,
                beta,
                repeat: coords.repeat,
                method,
                reduct,
                accuracy,
                millis: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

/// Runs every (alpha, beta, repeat, method) cell on an already prepared,
/// fully labeled table.
pub fn run_on_table(truth: &DecisionTable, name: &str, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let labels = truth.full_labels()?;
    let prior = tabular::prior_positive_probability(truth, Some(&labels))?;
    let shared = Shared {
        gt: if spec.methods.contains(&Method::Gt) {
            Some(reduction::reduce(truth, &spec.reduce_options())?.selected)
        } else {
            None
        },
        laplacian: if spec.methods.contains(&Method::Laplacian) {
            Some(baselines::laplacian_scores(truth, spec.laplacian_neighbors)?)
        } else {
            None
        },
    };

    let mut coords = Vec::new();
    for alpha_idx in 0..spec.alphas.len() {
        for beta_idx in 0..spec.betas.len() {
            for repeat in 0..spec.repeats {
                coords.push(CellCoords {
                    alpha_idx,
                    beta_idx,
                    repeat,
                });
            }
        }
    }
    let run = |c: &CellCoords| run_cell(truth, name, spec, &shared, prior, c);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Vec<CellResult>>> = coords.par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Vec<CellResult>>> = coords.iter().map(run).collect();
    let mut cells = Vec::new();
    for r in results {
        cells.extend(r?);
    }

    Ok(ExperimentReport {
        attribute_names: truth.attribute_names().to_vec(),
        summary: summarize(&cells),
        cells,
    })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let truth = load_dataset(spec)?;
    let name = spec
        .dataset
        .file_stem()
        .map_or_else(|| "dataset".to_owned(), |s| s.to_string_lossy().into_owned());
    run_on_table(&truth, &name, spec)
}

fn summarize(cells: &[CellResult]) -> Vec<SummaryRow> {
    // group in first-seen order of (dataset, alpha, beta, method)
    let mut order: Vec<(String, u64, u64, Method)> = Vec::new();
    let mut groups: BTreeMap<(String, u64, u64, Method), Vec<&CellResult>> = BTreeMap::new();
    for c in cells {
        let key = (c.dataset.clone(), c.alpha.to_bits(), c.beta.to_bits(), c.method);
        let entry = groups.entry(key.clone()).or_default();
        if entry.is_empty() {
            order.push(key);
        }
        entry.push(c);
    }
    order
        .into_iter()
        .map(|key| {
            let group = &groups[&key];
            let sizes: Vec<usize> = group.iter().map(|c| c.reduct.len()).collect();
            let n = group.len() as f64;
            SummaryRow {
                dataset: key.0.clone(),
                alpha: f64::from_bits(key.1),
                beta: f64::from_bits(key.2),
                method: key.3,
                mean_accuracy: group.iter().map(|c| c.accuracy).sum::<f64>() / n,
                reduct_min: sizes.iter().copied().min().unwrap_or(0),
                reduct_max: sizes.iter().copied().max().unwrap_or(0),
                reduct_avg: sizes.iter().sum::<usize>() as f64 / n,
                cells: group.len(),
                millis: group.iter().map(|c| c.millis).sum(),
            }
        })
        .collect()
}

impl ExperimentReport {
    pub fn summary_for(&self, method: Method) -> impl Iterator<Item = &SummaryRow> {
        self.summary.iter().filter(move |r| r.method == method)
    }

    /// One CSV row per cell. Timing columns are only written on request so
    /// that default reports are reproducible byte for byte.
    pub fn write_cells_csv<W: Write>(&self, sink: W, include_timing: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        let mut header = vec!["dataset", "alpha", "beta", "repeat", "method", "reduct_size", "accuracy", "reduct"];
        if include_timing {
            header.push("millis");
        }
        w.write_record(&header)?;
        for c in &self.cells {
            let names: Vec<&str> = c.reduct.iter().map(|&a| self.attribute_names[a].as_str()).collect();
            let mut record = vec![
                c.dataset.clone(),
                c.alpha.to_string(),
                c.beta.to_string(),
                c.repeat.to_string(),
                c.method.to_string(),
                c.reduct.len().to_string(),
                format!("{:.6}", c.accuracy),
                names.join(" "),
            ];
            if include_timing {
                record.push(format!("{:.1}", c.millis));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable summary: one line per (dataset, alpha, beta) with the
    /// mean accuracy and reduct sizes (min/max/avg) of every method.
    pub fn render_summary(&self, include_timing: bool) -> String {
        let mut methods: Vec<Method> = Vec::new();
        for row in &self.summary {
            if !methods.contains(&row.method) {
                methods.push(row.method);
            }
        }
        let mut out = String::new();
        out.push_str(&format!("{:<10} {:>6} {:>6}", "dataset", "alpha", "beta"));
        for m in &methods {
            let label = match m {
                Method::GceL => "gce-l(initial)".to_owned(),
                Method::Gce => "gce(final)".to_owned(),
                other => other.to_string(),
            };
            out.push_str(&format!(" | {label:^24}"));
        }
        out.push('\n');
        out.push_str(&format!("{:<10} {:>6} {:>6}", "", "", ""));
        for _ in &methods {
            out.push_str(&format!(" | {:>7} {:>16}", "acc", "size min/max/avg"));
        }
        out.push('\n');
        let mut seen: Vec<(String, u64, u64)> = Vec::new();
        for row in &self.summary {
            let key = (row.dataset.clone(), row.alpha.to_bits(), row.beta.to_bits());
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            out.push_str(&format!("{:<10} {:>6} {:>6}", row.dataset, row.alpha, row.beta));
            for m in &methods {
                let cell = self.summary.iter().find(|r| {
                    r.method == *m && r.dataset == row.dataset && r.alpha == row.alpha && r.beta == row.beta
                });
                match cell {
                    Some(r) => out.push_str(&format!(
                        " | {:>7.4} {:>5}/{:>3}/{:>6.2}",
                        r.mean_accuracy, r.reduct_min, r.reduct_max, r.reduct_avg
                    )),
                    None => out.push_str(&format!(" | {:>24}", "-")),
                }
            }
            out.push('\n');
        }
        if include_timing {
            let total: f64 = self.summary.iter().map(|r| r.millis).sum();
            out.push_str(&format!("total cell time: {:.1} ms\n", total));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::*;

    fn labeled(rows: &[Vec<u32>], labels: &[ClassLabel]) -> DecisionTable {
        DecisionTable::from_codes(rows, labels.iter().copied().map(Some).collect()).unwrap()
    }

    fn synthetic(n: usize, n_pos: usize) -> DecisionTable {
        let rows: Vec<Vec<u32>> = (0..n as u32).map(|i| vec![i % 3, i % 5]).collect();
        let labels: Vec<ClassLabel> = (0..n).map(|i| if i < n_pos { Positive } else { Negative }).collect();
        labeled(&rows, &labels)
    }

    #[test]
    fn split_worked_example() {
        let truth = synthetic(1000, 500);
        let spec = SplitSpec { alpha: 0.1, beta: 0.5, seed: 1 };
        assert_eq!(split_counts(&truth, &spec).unwrap(), (25, 75));
        let split = make_split(&truth, &spec).unwrap();
        assert_eq!(split.unlabeled_count(), 900);
        let pos = split.labels().iter().filter(|l| **l == Some(Positive)).count();
        assert_eq!(pos, 25);
        // kept labels are the ground truth
        for r in split.labeled_rows() {
            assert_eq!(split.label(r), truth.label(r));
        }
    }

    #[test]
    fn split_full_label_rate() {
        let truth = synthetic(20, 8);
        let split = make_split(&truth, &SplitSpec { alpha: 1.0, beta: 1.3, seed: 3 }).unwrap();
        assert_eq!(split, truth);
    }

    #[test]
    fn split_is_deterministic() {
        let truth = synthetic(200, 60);
        let spec = SplitSpec { alpha: 0.2, beta: 1.0, seed: 42 };
        assert_eq!(make_split(&truth, &spec).unwrap(), make_split(&truth, &spec).unwrap());
        let other = SplitSpec { seed: 43, ..spec };
        assert_ne!(make_split(&truth, &spec).unwrap(), make_split(&truth, &other).unwrap());
    }

    #[test]
    fn split_infeasible() {
        let truth = synthetic(20, 2);
        let err = make_split(&truth, &SplitSpec { alpha: 0.1, beta: 0.5, seed: 0 }).unwrap_err();
        assert!(matches!(err, Error::Split(_)), "{err}");
        assert!(make_split(&truth, &SplitSpec { alpha: 0.0, beta: 1.0, seed: 0 }).is_err());
    }

    #[test]
    fn knn_hand_example() {
        // query row 0; training rows 1..=4 at distances 0,1,1,2
        let rows = vec![
            vec![0, 0],
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![1, 1],
        ];
        let t = labeled(&rows, &[Positive, Positive, Negative, Negative, Positive]);
        let attrs = AttributeSubset::all(2);
        assert_eq!(knn_classify(&t, &[1, 2, 3, 4], &[0], &attrs, 3).unwrap(), vec![Negative]);
        assert_eq!(knn_classify(&t, &[1, 2, 3, 4], &[0], &attrs, 1).unwrap(), vec![Positive]);
    }

    #[test]
    fn knn_identical_rows() {
        let rows = vec![vec![1], vec![1], vec![1], vec![0], vec![1]];
        let t = labeled(&rows, &[Negative, Negative, Negative, Positive, Positive]);
        let attrs = AttributeSubset::all(1);
        assert_eq!(knn_classify(&t, &[0, 1, 2, 3], &[4], &attrs, 3).unwrap(), vec![Negative]);
    }

    #[test]
    fn knn_vote_tie_uses_nearest() {
        let rows = vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![0, 0]];
        let t = labeled(&rows, &[Negative, Positive, Negative, Positive]);
        let attrs = AttributeSubset::all(2);
        // k=2: neighbours row 0 (d=0, neg) and row 1 (d=1, pos)
        assert_eq!(knn_classify(&t, &[0, 1, 2], &[3], &attrs, 2).unwrap(), vec![Negative]);
    }

    #[test]
    fn knn_errors() {
        let t = labeled(&[vec![0]], &[Positive]);
        let attrs = AttributeSubset::all(1);
        assert!(knn_classify(&t, &[], &[0], &attrs, 3).is_err());
        assert!(knn_classify(&t, &[0], &[0], &attrs, 0).is_err());
    }

    #[test]
    fn folds_partition_rows() {
        let bounds = fold_bounds(23, 10);
        assert_eq!(bounds.first().unwrap().0, 0);
        assert_eq!(bounds.last().unwrap().1, 23);
        let sizes: Vec<usize> = bounds.iter().map(|(a, b)| b - a).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(bounds.windows(2).all(|w| w[0].1 == w[1].0));
    }

    #[test]
    fn cv_separable_is_perfect() {
        let rows: Vec<Vec<u32>> = (0..40).map(|i| vec![(i % 2) as u32, (i % 7) as u32]).collect();
        let labels: Vec<ClassLabel> = (0..40).map(|i| if i % 2 == 0 { Positive } else { Negative }).collect();
        let t = labeled(&rows, &labels);
        let spec = CvSpec { seed: 9, ..CvSpec::default() };
        let acc = cross_validate(&t, &AttributeSubset::new([0], 2).unwrap(), &spec).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(acc, cross_validate(&t, &AttributeSubset::new([0], 2).unwrap(), &spec).unwrap());
    }

    #[test]
    fn cv_errors() {
        let t = synthetic(5, 2);
        let spec = CvSpec::default();
        assert!(cross_validate(&t, &AttributeSubset::empty(), &spec).is_err());
        assert!(cross_validate(&t, &AttributeSubset::all(2), &spec).is_err());
    }

    #[test]
    fn methods_parse() {
        assert_eq!(parse_methods("gce,gce-l,raw").unwrap(), vec![Method::Gce, Method::GceL, Method::Raw]);
        assert!(parse_methods("gce,svm").unwrap_err().is_configuration());
    }

    #[test]
    fn config_parse() {
        let text = "# demo\ndataset = data/wine.csv\nalphas = 0.05, 0.1\nbetas = 0.5,1.5\nrepeats = 2\nmethods = gce,gt\nseed = 7\n";
        let spec = ExperimentSpec::from_config_str(text, Path::new("/tmp")).unwrap();
        assert_eq!(spec.dataset, PathBuf::from("/tmp/data/wine.csv"));
        assert_eq!(spec.alphas, vec![0.05, 0.1]);
        assert_eq!(spec.betas, vec![0.5, 1.5]);
        assert_eq!(spec.repeats, 2);
        assert_eq!(spec.folds, 10);
        assert_eq!(spec.knn_k, 3);
        assert_eq!(spec.seed, 7);
        assert!(ExperimentSpec::from_config_str("alphas = 0.1\n", Path::new(".")).is_err());
        assert!(ExperimentSpec::from_config_str("dataset = x\nfolds = 1\n", Path::new(".")).is_err());
        assert!(ExperimentSpec::from_config_str("dataset = x\nwhat = 1\n", Path::new(".")).is_err());
    }

    #[test]
    fn raw_method_uses_every_attribute() {
        let truth = synthetic(60, 20);
        let spec = ExperimentSpec {
            alphas: vec![0.2],
            repeats: 1,
            cv_repeats: 2,
            methods: vec![Method::Raw],
            ..ExperimentSpec::default()
        };
        let report = run_on_table(&truth, "syn", &spec).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.cells[0].reduct, vec![0, 1]);
        let direct = cross_validate(
            &truth,
            &AttributeSubset::all(2),
            &CvSpec {
                folds: 10,
                repeats: 2,
                knn_k: 3,
                seed: derive_seed(0, &[0, 0, 0, 1]),
            },
        )
        .unwrap();
        assert_eq!(report.cells[0].accuracy, direct);
    }

    #[test]
    fn experiment_is_deterministic() {
        let truth = synthetic(90, 30);
        let spec = ExperimentSpec {
            alphas: vec![0.2],
            betas: vec![0.5, 1.0],
            repeats: 2,
            cv_repeats: 2,
            methods: Method::ALL.to_vec(),
            seed: 11,
            ..ExperimentSpec::default()
        };
        let a = run_on_table(&truth, "syn", &spec).unwrap();
        let b = run_on_table(&truth, "syn", &spec).unwrap();
        let (mut wa, mut wb) = (Vec::new(), Vec::new());
        a.write_cells_csv(&mut wa, false).unwrap();
        b.write_cells_csv(&mut wb, false).unwrap();
        assert_eq!(wa, wb);
        assert_eq!(a.render_summary(false), b.render_summary(false));
        assert_eq!(a.summary.len(), 2 * Method::ALL.len());
        for row in &a.summary {
            assert!((0.0..=1.0).contains(&row.mean_accuracy));
            assert!(row.reduct_max <= 2);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, &[0, 0, 0]), derive_seed(1, &[0, 0, 1]));
        assert_eq!(derive_seed(5, &[3]), derive_seed(5, &[3]));
    }
}
