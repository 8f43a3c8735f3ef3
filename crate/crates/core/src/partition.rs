//! Equivalence-class partitions `U/B` and the rough-set regions built on them.
//!
//! A [`Partition`] stores explicit sorted row lists in canonical order
//! (ascending by smallest member). It may cover only part of the universe:
//! the reduction search drops decision-pure blocks as it goes, while
//! `universe_size` keeps the original `|U|` as the probability denominator.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tabular::{ClassLabel, DecisionTable};

/// Sorted, duplicate-free set of condition-attribute indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct AttributeSubset(Vec<usize>);

impl AttributeSubset {
    pub fn empty() -> Self {
        AttributeSubset(Vec::new())
    }

    /// Validates every index against `n_attributes`; duplicates collapse.
    pub fn new(indices: impl IntoIterator<Item = usize>, n_attributes: usize) -> Result<Self> {
        let mut attrs: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = attrs.iter().find(|&&a| a >= n_attributes) {
            return Err(Error::Parameter(format!(
                "attribute index {bad} out of range for {n_attributes} attributes"
            )));
        }
        attrs.sort_unstable();
        attrs.dedup();
        Ok(AttributeSubset(attrs))
    }

    pub fn all(n_attributes: usize) -> Self {
        AttributeSubset((0..n_attributes).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, attr: usize) -> bool {
        self.0.binary_search(&attr).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn with(&self, attr: usize) -> Self {
        let mut attrs = self.0.clone();
        if let Err(pos) = attrs.binary_search(&attr) {
            attrs.insert(pos, attr);
        }
        AttributeSubset(attrs)
    }

    pub fn without(&self, attr: usize) -> Self {
        AttributeSubset(self.0.iter().copied().filter(|&a| a != attr).collect())
    }
}

impl fmt::Display for AttributeSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    universe_size: usize,
}

impl Partition {
    /// Builds a partition from arbitrary blocks, normalizing to canonical
    /// form. Blocks must be nonempty, disjoint and inside the universe.
    pub fn from_blocks(mut blocks: Vec<Vec<usize>>, universe_size: usize) -> Result<Self> {
        let mut seen = vec![false; universe_size];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::Parameter("empty block".into()));
            }
            block.sort_unstable();
            for &row in block.iter() {
                if row >= universe_size {
                    return Err(Error::Parameter(format!(
                        "row {row} outside universe of size {universe_size}"
                    )));
                }
                if std::mem::replace(&mut seen[row], true) {
                    return Err(Error::Parameter(format!("row {row} appears in two blocks")));
                }
            }
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Partition { blocks, universe_size })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    /// Number of rows present in some block.
    pub fn covered(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn covered_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        rows.sort_unstable();
        rows
    }

    /// Row -> block position, `None` for uncovered rows.
    pub fn block_index(&self) -> Vec<Option<usize>> {
        let mut index = vec![None; self.universe_size];
        for (b, block) in self.blocks.iter().enumerate() {
            for &row in block {
                index[row] = Some(b);
            }
        }
        index
    }

    /// Keeps only the blocks for which `keep` returns true.
    pub fn retain_blocks(&mut self, mut keep: impl FnMut(&[usize]) -> bool) {
        self.blocks.retain(|b| keep(b));
    }

    /// True when every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let index = coarser.block_index();
        self.blocks.iter().all(|block| {
            let first = index.get(block[0]).copied().flatten();
            first.is_some() && block.iter().all(|&r| index.get(r).copied().flatten() == first)
        })
    }
}

/// Splits each block by the codes of one column. Sub-blocks inherit the
/// sorted order of their parent, and the result is re-sorted into canonical
/// block order.
pub(crate) fn split_blocks(blocks: &[Vec<usize>], column: &[u32], cardinality: usize) -> Vec<Vec<usize>> {
    let mut slot = vec![usize::MAX; cardinality];
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
    let mut touched: Vec<u32> = Vec::new();
    for block in blocks {
        let start = out.len();
        for &row in block {
            let code = column[row];
            let s = &mut slot[code as usize];
            if *s == usize::MAX {
                *s = out.len();
                out.push(Vec::new());
                touched.push(code);
            }
            out[*s].push(row);
        }
        for code in touched.drain(..) {
            slot[code as usize] = usize::MAX;
        }
        debug_assert!(out.len() > start || block.is_empty());
    }
    // sub-blocks of one parent already come out ordered by first member, but
    // they interleave with later parents' sub-blocks
    out.sort_unstable_by_key(|b| b[0]);
    out
}

/// `U/∅`: one block holding every row (no blocks for an empty table).
pub fn partition_trivial(table: &DecisionTable) -> Partition {
    let n = table.n_rows();
    let blocks = if n == 0 { Vec::new() } else { vec![(0..n).collect()] };
    Partition { blocks, universe_size: n }
}

/// `U/B`: rows share a block iff they agree on every attribute in `attrs`.
/// The empty subset yields the trivial partition.
pub fn partition_by(table: &DecisionTable, attrs: &AttributeSubset) -> Result<Partition> {
    let mut partition = partition_trivial(table);
    for attr in attrs.iter() {
        partition = refine(&partition, table, attr)?;
    }
    Ok(partition)
}

/// `U/(B ∪ {attr})` from `U/B`, touching only covered rows.
pub fn refine(p: &Partition, table: &DecisionTable, attr: usize) -> Result<Partition> {
    check_attr(table, attr)?;
    if p.universe_size != table.n_rows() {
        return Err(Error::Parameter(format!(
            "partition universe {} does not match table with {} rows",
            p.universe_size,
            table.n_rows()
        )));
    }
    Ok(Partition {
        blocks: split_blocks(&p.blocks, table.column(attr), table.cardinality(attr)),
        universe_size: p.universe_size,
    })
}

pub(crate) fn check_attr(table: &DecisionTable, attr: usize) -> Result<()> {
    if attr >= table.n_attributes() {
        return Err(Error::Parameter(format!(
            "attribute index {attr} out of range for {} attributes",
            table.n_attributes()
        )));
    }
    Ok(())
}

/// `U/D` over a fully labeled table: at most two blocks.
pub fn decision_partition(table: &DecisionTable) -> Result<Partition> {
    let labels = table.full_labels()?;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (row, label) in labels.into_iter().enumerate() {
        match label {
            ClassLabel::Positive => pos.push(row),
            ClassLabel::Negative => neg.push(row),
        }
    }
    let mut blocks: Vec<Vec<usize>> = [pos, neg].into_iter().filter(|b| !b.is_empty()).collect();
    blocks.sort_unstable_by_key(|b| b[0]);
    Ok(Partition {
        blocks,
        universe_size: table.n_rows(),
    })
}

/// Positive, boundary and negative regions of `dec` with respect to `cond`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Regions {
    pub positive: Vec<usize>,
    pub boundary: Vec<usize>,
    pub negative: Vec<usize>,
}

pub(crate) fn ensure_same_coverage(cond: &Partition, dec: &Partition) -> Result<Vec<Option<usize>>> {
    if cond.universe_size != dec.universe_size {
        return Err(Error::State(format!(
            "partitions over different universes ({} vs {})",
            cond.universe_size, dec.universe_size
        )));
    }
    let dec_index = dec.block_index();
    let uncovered = cond.blocks.iter().flatten().find(|&&r| dec_index[r].is_none());
    if let Some(row) = uncovered {
        return Err(Error::State(format!("row {row} is covered by only one partition")));
    }
    if cond.covered() != dec.covered() {
        return Err(Error::State(format!(
            "partitions cover different rows ({} vs {})",
            cond.covered(),
            dec.covered()
        )));
    }
    Ok(dec_index)
}

/// Rough-set regions. Rows of the universe covered by neither partition
/// fall outside every upper approximation and are reported as negative.
pub fn regions(cond: &Partition, dec: &Partition) -> Result<Regions> {
    let dec_index = ensure_same_coverage(cond, dec)?;
    let mut out = Regions::default();
    for block in &cond.blocks {
        let first = dec_index[block[0]];
        if block.iter().all(|&r| dec_index[r] == first) {
            out.positive.extend_from_slice(block);
        } else {
            out.boundary.extend_from_slice(block);
        }
    }
    out.negative = (0..cond.universe_size).filter(|&r| dec_index[r].is_none()).collect();
    out.positive.sort_unstable();
    out.boundary.sort_unstable();
    Ok(out)
}
