#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use granred::tabular::{ClassLabel, DecisionTable};
use granred::AttributeSubset;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fully labeled table with up to `max_rows` rows, `max_attrs` attributes and
/// `max_values` values per attribute.
pub fn random_table(rng: &mut ChaCha8Rng, max_rows: usize, max_attrs: usize, max_values: u32) -> DecisionTable {
    let n = rng.random_range(1..=max_rows);
    let m = rng.random_range(1..=max_attrs);
    let cards: Vec<u32> = (0..m).map(|_| rng.random_range(1..=max_values)).collect();
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|_| cards.iter().map(|&c| rng.random_range(0..c)).collect())
        .collect();
    let labels = (0..n)
        .map(|_| Some(if rng.random_bool(0.5) { ClassLabel::Positive } else { ClassLabel::Negative }))
        .collect();
    DecisionTable::from_codes(&rows, labels).unwrap()
}

pub fn random_subset(rng: &mut ChaCha8Rng, n_attrs: usize) -> AttributeSubset {
    let picked: Vec<usize> = (0..n_attrs).filter(|_| rng.random_bool(0.5)).collect();
    AttributeSubset::new(picked, n_attrs).unwrap()
}

/// Nested attribute subsets: the prefixes of a random permutation.
pub fn random_chain(rng: &mut ChaCha8Rng, n_attrs: usize) -> Vec<AttributeSubset> {
    let mut order: Vec<usize> = (0..n_attrs).collect();
    order.shuffle(rng);
    (0..=n_attrs)
        .map(|k| AttributeSubset::new(order[..k].iter().copied(), n_attrs).unwrap())
        .collect()
}

/// Entropies computed straight from joint counts, without partitions.
pub struct Naive {
    pub h: f64,
    pub h_cond: f64,
    pub gh: f64,
    pub consistent: bool,
}

pub fn naive(table: &DecisionTable, attrs: &AttributeSubset) -> Naive {
    let n = table.n_rows() as f64;
    let mut joint: HashMap<(Vec<u32>, ClassLabel), usize> = HashMap::new();
    let mut marginal: HashMap<Vec<u32>, usize> = HashMap::new();
    for row in 0..table.n_rows() {
        let key: Vec<u32> = attrs.iter().map(|a| table.code(row, a)).collect();
        *joint.entry((key.clone(), table.label(row).unwrap())).or_default() += 1;
        *marginal.entry(key).or_default() += 1;
    }
    let h = -marginal.values().map(|&c| c as f64 / n * (c as f64 / n).log2()).sum::<f64>();
    let mut h_cond = 0.0;
    let mut gh = 0.0;
    for ((key, _), &c) in &joint {
        let cx = marginal[key] as f64;
        let p_cond = c as f64 / cx;
        h_cond -= c as f64 / n * p_cond.log2();
        gh -= (cx / n).powi(2) * p_cond * p_cond.log2();
    }
    let consistent = marginal.len() == joint.len();
    Naive { h, h_cond, gh, consistent }
}

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data_path(name: &str) -> PathBuf {
    crate_dir().join("data").join(name)
}

pub struct OracleRow {
    pub n_pos: usize,
    pub n_neg: usize,
    pub prior_pos: f64,
    pub n_universe: usize,
    pub p_init: f64,
    pub p_prior: f64,
    pub lambda: f64,
    pub label: ClassLabel,
}

pub fn load_proxy_oracle() -> Vec<OracleRow> {
    let path = crate_dir().join("tests/fixtures/proxy_oracle.csv");
    let mut reader = csv::Reader::from_path(&path).unwrap();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            let f = |i: usize| r[i].parse::<f64>().unwrap();
            let u = |i: usize| r[i].parse::<usize>().unwrap();
            OracleRow {
                n_pos: u(0),
                n_neg: u(1),
                prior_pos: f(2),
                n_universe: u(3),
                p_init: f(4),
                p_prior: f(5),
                lambda: f(6),
                label: ClassLabel::from_token(&r[7]).unwrap(),
            }
        })
        .collect()
}

/// One-attribute table with the oracle row's labeled counts, padded with
/// unlabeled rows up to its universe size.
pub fn oracle_table(row: &OracleRow) -> DecisionTable {
    let rows: Vec<Vec<u32>> = (0..row.n_universe).map(|i| vec![(i % 2) as u32]).collect();
    let labels = (0..row.n_universe)
        .map(|i| {
            if i < row.n_pos {
                Some(ClassLabel::Positive)
            } else if i < row.n_pos + row.n_neg {
                Some(ClassLabel::Negative)
            } else {
                None
            }
        })
        .collect();
    DecisionTable::from_codes(&rows, labels).unwrap()
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}
