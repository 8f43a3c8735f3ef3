//! Entropy-family measures over partitions, in bits.
//!
//! `GH(D|B) = -Σᵢ P(Xᵢ)² Σⱼ P(Yⱼ|Xᵢ) log₂ P(Yⱼ|Xᵢ)` is the granular
//! conditional entropy that drives the reduction search. Probabilities use
//! the partition's `universe_size` as denominator even when it covers only
//! part of the universe, so blocks dropped from a partition contribute
//! nothing rather than rescaling the rest.

use std::fmt;
use std::ops::Sub;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{self, ensure_same_coverage, AttributeSubset, Partition};
use crate::tabular::DecisionTable;

/// Information quantity in bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Bits(pub f64);

impl Bits {
    pub const ZERO: Bits = Bits(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Sub for Bits {
    type Output = Bits;

    fn sub(self, rhs: Bits) -> Bits {
        Bits(self.0 - rhs.0)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

fn nonempty_universe(p: &Partition) -> Result<f64> {
    match p.universe_size() {
        0 => Err(Error::Parameter("empty universe".into())),
        n => Ok(n as f64),
    }
}

/// `-Σ (c/n) log₂(c/n)` over the nonzero class counts of one block.
fn block_entropy(counts: impl Iterator<Item = usize>, size: usize) -> f64 {
    let n = size as f64;
    let mut h = 0.0;
    for c in counts.filter(|&c| c > 0) {
        let p = c as f64 / n;
        h -= p * p.log2();
    }
    h
}

/// Per-block class entropies with a scratch counter indexed by class code.
/// `class_of[row]` must be defined for every covered row.
pub(crate) struct BlockEntropies<'a> {
    class_of: &'a [u32],
    counts: Vec<usize>,
    touched: Vec<u32>,
}

impl<'a> BlockEntropies<'a> {
    pub(crate) fn new(class_of: &'a [u32], n_classes: usize) -> Self {
        BlockEntropies {
            class_of,
            counts: vec![0; n_classes],
            touched: Vec::new(),
        }
    }

    pub(crate) fn entropy(&mut self, block: &[usize]) -> f64 {
        for &row in block {
            let c = self.class_of[row];
            if self.counts[c as usize] == 0 {
                self.touched.push(c);
            }
            self.counts[c as usize] += 1;
        }
        let counts = &self.counts;
        let h = block_entropy(self.touched.iter().map(|&c| counts[c as usize]), block.len());
        for c in self.touched.drain(..) {
            self.counts[c as usize] = 0;
        }
        h
    }

    /// True when every row of the block has the same class.
    pub(crate) fn is_pure(&self, block: &[usize]) -> bool {
        let first = self.class_of[block[0]];
        block.iter().all(|&r| self.class_of[r] == first)
    }
}

/// GH of the classes `class_of` given the blocks, with a fixed denominator.
pub(crate) fn granular_entropy_of(blocks: &[Vec<usize>], class_of: &[u32], n_classes: usize, universe: usize) -> f64 {
    let n = universe as f64;
    let mut scratch = BlockEntropies::new(class_of, n_classes);
    let mut total = 0.0;
    for block in blocks {
        let p = block.len() as f64 / n;
        total += p * p * scratch.entropy(block);
    }
    total
}

/// Row -> decision-block code, for use with [`granular_entropy_of`].
/// Uncovered rows map to `u32::MAX` and must never be looked up.
pub(crate) fn class_codes(dec: &Partition) -> Vec<u32> {
    let mut codes = vec![u32::MAX; dec.universe_size()];
    for (b, block) in dec.blocks().iter().enumerate() {
        for &row in block {
            codes[row] = b as u32;
        }
    }
    codes
}

/// `H(B) = -Σᵢ P(Xᵢ) log₂ P(Xᵢ)`.
pub fn entropy(p: &Partition) -> Result<Bits> {
    let n = nonempty_universe(p)?;
    let mut h = 0.0;
    for block in p.blocks() {
        let q = block.len() as f64 / n;
        h -= q * q.log2();
    }
    Ok(Bits(h))
}

/// `H(D|B) = Σᵢ P(Xᵢ) · H(D restricted to Xᵢ)`, the standard conditional
/// entropy with joint probability `|Xᵢ ∩ Yⱼ| / |U|`.
pub fn conditional_entropy(cond: &Partition, dec: &Partition) -> Result<Bits> {
    let n = nonempty_universe(cond)?;
    ensure_same_coverage(cond, dec)?;
    let codes = class_codes(dec);
    let mut scratch = BlockEntropies::new(&codes, dec.n_blocks());
    let mut h = 0.0;
    for block in cond.blocks() {
        h += block.len() as f64 / n * scratch.entropy(block);
    }
    Ok(Bits(h))
}

/// `G(B) = Σᵢ P(Xᵢ)²`: 1 for the one-block partition, `1/|U|` for singletons.
pub fn granularity(p: &Partition) -> Result<f64> {
    let n = nonempty_universe(p)?;
    Ok(p.blocks()
        .iter()
        .map(|b| {
            let q = b.len() as f64 / n;
            q * q
        })
        .sum())
}

/// Granular conditional entropy `GH(D|B)` of `dec` given `cond`.
pub fn granular_conditional_entropy(cond: &Partition, dec: &Partition) -> Result<Bits> {
    nonempty_universe(cond)?;
    ensure_same_coverage(cond, dec)?;
    let codes = class_codes(dec);
    Ok(Bits(granular_entropy_of(
        cond.blocks(),
        &codes,
        dec.n_blocks(),
        cond.universe_size(),
    )))
}

/// `Sig(a, P, D) = GH(D|P) - GH(D|P ∪ {a})`.
pub fn significance(table: &DecisionTable, attr: usize, subset: &AttributeSubset, dec: &Partition) -> Result<Bits> {
    partition::check_attr(table, attr)?;
    if subset.contains(attr) {
        return Err(Error::Parameter(format!("attribute {attr} is already in {subset}")));
    }
    let base = partition::partition_by(table, subset)?;
    let extended = partition::refine(&base, table, attr)?;
    Ok(granular_conditional_entropy(&base, dec)? - granular_conditional_entropy(&extended, dec)?)
}

/// `GH({a}|RED)`: GH with the value classes of attribute `a` in the
/// decision role. Zero exactly when `a` is constant inside every block of
/// `U/RED`.
pub fn gh_attribute_given_reduct(table: &DecisionTable, attr: usize, reduct: &AttributeSubset) -> Result<Bits> {
    partition::check_attr(table, attr)?;
    if reduct.contains(attr) {
        return Err(Error::Parameter(format!("attribute {attr} is already in {reduct}")));
    }
    let cond = partition::partition_by(table, reduct)?;
    nonempty_universe(&cond)?;
    Ok(Bits(granular_entropy_of(
        cond.blocks(),
        table.column(attr),
        table.cardinality(attr),
        table.n_rows(),
    )))
}
