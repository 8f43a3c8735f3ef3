//! Greedy forward selection of a reduct by granular conditional entropy.
//!
//! The search starts from the attribute with the smallest `GH(D|{a})` and
//! keeps adding the attribute of largest significance until
//! `GH(D|RED)` reaches `GH(D|C)`. With acceleration on, two kinds of work are
//! dropped after every selection:
//!
//! * rows in decision-pure blocks of `U/RED` (their GH contribution is 0 and
//!   stays 0 under further refinement);
//! * candidate attributes constant inside every remaining block
//!   (`GH({a}|RED) = 0`), which can no longer split anything.
//!
//! All GH values keep the original `|U|` as denominator, so both modes
//! produce the same selections and the same GH trace.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{class_codes, granular_entropy_of, BlockEntropies, Bits};
use crate::partition::{self, AttributeSubset, Partition};
use crate::tabular::{ClassLabel, DecisionTable};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReduceOptions {
    pub accelerate: bool,
    pub enforce_min: bool,
    /// Absolute tolerance (bits) for every GH equality test.
    pub tolerance: f64,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            accelerate: true,
            enforce_min: false,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub attribute: usize,
    /// GH drop caused by this attribute; the first round measures it from
    /// the one-block partition.
    pub significance: f64,
    pub gh_after: f64,
    pub pruned_examples: usize,
    pub pruned_attributes: usize,
    /// Live rows and candidates scanned while choosing this attribute.
    pub live_rows: usize,
    pub candidates_evaluated: usize,
    /// Chosen by the stall rule rather than by significance.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductTrace {
    /// Attributes in selection order (after the minimality pass, if any).
    pub selected: Vec<usize>,
    pub gh_full: f64,
    pub rounds: Vec<RoundRecord>,
    pub accelerated: bool,
    pub minimality_enforced: bool,
    pub removed_by_minimality: Vec<usize>,
}

impl ReductTrace {
    pub fn reduct(&self) -> AttributeSubset {
        AttributeSubset::new(self.selected.iter().copied(), usize::MAX).expect("indices in range")
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// GH after the last greedy round.
    pub fn final_gh(&self) -> f64 {
        self.rounds.last().map_or(f64::NAN, |r| r.gh_after)
    }

    /// GH values round by round; comparing these checks that two runs made
    /// the same choices.
    pub fn gh_trace(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.gh_after).collect()
    }
}

/// Working state of the search: the live part of `U/RED` plus the
/// remaining candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    partition: Partition,
    candidates: Vec<usize>,
    selected: Vec<usize>,
}

impl SearchState {
    pub fn new(table: &DecisionTable) -> Self {
        SearchState {
            partition: partition::partition_trivial(table),
            candidates: (0..table.n_attributes()).collect(),
            selected: Vec::new(),
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn live_rows(&self) -> usize {
        self.partition.covered()
    }

    pub fn universe_size(&self) -> usize {
        self.partition.universe_size()
    }

    /// Adds `attr` to the reduct and refines the live partition by it.
    pub fn select(&mut self, table: &DecisionTable, attr: usize) -> Result<()> {
        let pos = self
            .candidates
            .iter()
            .position(|&c| c == attr)
            .ok_or_else(|| Error::State(format!("attribute {attr} is not a candidate")))?;
        self.partition = partition::refine(&self.partition, table, attr)?;
        self.candidates.remove(pos);
        self.selected.push(attr);
        Ok(())
    }
}

fn drop_pure_blocks(state: &mut SearchState, dec_codes: &[u32]) -> usize {
    let before = state.partition.covered();
    let scratch = BlockEntropies::new(dec_codes, 2);
    state.partition.retain_blocks(|b| !scratch.is_pure(b));
    before - state.partition.covered()
}

/// Removes every block of `U/RED` that is pure in the decision. The
/// universe size is untouched, so GH over the pruned state equals GH over
/// the full one.
pub fn prune_consistent_examples(mut state: SearchState, dec: &Partition) -> Result<SearchState> {
    if dec.universe_size() != state.universe_size() {
        return Err(Error::State("decision partition covers a different universe".into()));
    }
    let codes = class_codes(dec);
    if state.partition.blocks().iter().flatten().any(|&r| codes[r] == u32::MAX) {
        return Err(Error::State("decision partition does not cover every live row".into()));
    }
    drop_pure_blocks(&mut state, &codes);
    Ok(state)
}

fn drop_redundant_candidates(state: &mut SearchState, table: &DecisionTable, tolerance: f64) -> usize {
    let blocks = state.partition.blocks();
    let n = state.universe_size();
    let before = state.candidates.len();
    state.candidates.retain(|&a| {
        granular_entropy_of(blocks, table.column(a), table.cardinality(a), n) > tolerance
    });
    before - state.candidates.len()
}

/// Removes candidates whose `GH({a}|RED)` over the live rows is zero within
/// `tolerance`: they are constant inside every live block.
pub fn prune_redundant_attributes(mut state: SearchState, table: &DecisionTable, tolerance: f64) -> Result<SearchState> {
    if state.selected.is_empty() {
        return Err(Error::State("attribute pruning needs a nonempty reduct".into()));
    }
    drop_redundant_candidates(&mut state, table, tolerance);
    Ok(state)
}

fn decision_codes(table: &DecisionTable) -> Result<Vec<u32>> {
    Ok(table
        .full_labels()?
        .into_iter()
        .map(|l| match l {
            ClassLabel::Positive => 0,
            ClassLabel::Negative => 1,
        })
        .collect())
}

fn gh_of(table: &DecisionTable, dec_codes: &[u32], attrs: &AttributeSubset) -> Result<f64> {
    let p = partition::partition_by(table, attrs)?;
    Ok(granular_entropy_of(p.blocks(), dec_codes, 2, table.n_rows()))
}

/// GH of the decision given `attrs` on a fully labeled table.
pub fn gh_given(table: &DecisionTable, attrs: &AttributeSubset) -> Result<Bits> {
    let codes = decision_codes(table)?;
    Ok(Bits(gh_of(table, &codes, attrs)?))
}

struct Candidate {
    attr: usize,
    gh: f64,
}

fn evaluate(state: &SearchState, table: &DecisionTable, dec_codes: &[u32]) -> Vec<Candidate> {
    let blocks = state.partition.blocks();
    let n = state.universe_size();
    let eval = |&attr: &usize| {
        let refined = split(blocks, table, attr);
        Candidate {
            attr,
            gh: granular_entropy_of(&refined, dec_codes, 2, n),
        }
    };
    #[cfg(feature = "parallel")]
    {
        state.candidates.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        state.candidates.iter().map(eval).collect()
    }
}

fn split(blocks: &[Vec<usize>], table: &DecisionTable, attr: usize) -> Vec<Vec<usize>> {
    partition::split_blocks(blocks, table.column(attr), table.cardinality(attr))
}

/// Extra blocks an attribute would carve out of the decision-impure blocks.
fn impure_split_gain(blocks: &[Vec<usize>], dec_codes: &[u32], column: &[u32]) -> usize {
    let scratch = BlockEntropies::new(dec_codes, 2);
    blocks
        .iter()
        .filter(|b| !scratch.is_pure(b))
        .map(|b| {
            let mut codes: Vec<u32> = b.iter().map(|&r| column[r]).collect();
            codes.sort_unstable();
            codes.dedup();
            codes.len() - 1
        })
        .sum()
}

/// `argmin_a GH(D|{a})`, lowest index on ties.
pub fn initial_attribute(table: &DecisionTable, dec: &Partition) -> Result<usize> {
    if table.n_attributes() == 0 {
        return Err(Error::State("table has no condition attributes".into()));
    }
    let codes = class_codes(dec);
    let trivial = partition::partition_trivial(table);
    let mut best: Option<(usize, f64)> = None;
    for attr in 0..table.n_attributes() {
        let p = partition::refine(&trivial, table, attr)?;
        if p.blocks().iter().flatten().any(|&r| codes[r] == u32::MAX) {
            return Err(Error::State("decision partition does not cover the table".into()));
        }
        let gh = granular_entropy_of(p.blocks(), &codes, dec.n_blocks().max(1), table.n_rows());
        if best.is_none_or(|(_, g)| gh < g) {
            best = Some((attr, gh));
        }
    }
    Ok(best.expect("at least one attribute").0)
}

/// Runs the greedy search on a fully labeled table.
pub fn reduce(table: &DecisionTable, options: &ReduceOptions) -> Result<ReductTrace> {
    let dec_codes = decision_codes(table)?;
    let n_attrs = table.n_attributes();
    if n_attrs == 0 {
        return Err(Error::State("table has no condition attributes".into()));
    }
    if table.n_rows() == 0 {
        return Err(Error::State("table has no rows".into()));
    }
    let tol = options.tolerance;
    let gh_full = gh_of(table, &dec_codes, &AttributeSubset::all(n_attrs))?;

    let mut state = SearchState::new(table);
    let mut rounds = Vec::new();
    let mut gh_current = granular_entropy_of(state.partition.blocks(), &dec_codes, 2, table.n_rows());

    loop {
        let first = state.selected.is_empty();
        if !first && (gh_current - gh_full <= tol || state.candidates.is_empty()) {
            break;
        }
        let live_rows = state.live_rows();
        let scored = evaluate(&state, table, &dec_codes);
        let candidates_evaluated = scored.len();

        // first pick: minimal GH; later picks: maximal significance. Both
        // reduce to minimal GH since GH(D|RED) is shared; strict comparison
        // keeps the lowest index on ties.
        let mut best = &scored[0];
        for c in &scored[1..] {
            if c.gh < best.gh {
                best = c;
            }
        }
        let mut chosen = best.attr;
        let mut gh_next = best.gh;
        let mut forced = false;
        if !first && gh_current - best.gh <= 0.0 {
            // every candidate leaves GH unchanged: take the one splitting the
            // impure blocks the most
            let blocks = state.partition.blocks();
            let mut best_gain = None;
            for c in &scored {
                let gain = impure_split_gain(blocks, &dec_codes, table.column(c.attr));
                if best_gain.is_none_or(|(g, _)| gain > g) {
                    best_gain = Some((gain, c));
                }
            }
            let (_, c) = best_gain.expect("nonempty candidates");
            chosen = c.attr;
            gh_next = c.gh;
            forced = true;
        }
        let significance = gh_current - gh_next;

        state.select(table, chosen)?;
        gh_current = gh_next;

        let (pruned_examples, pruned_attributes) = if options.accelerate {
            let ex = drop_pure_blocks(&mut state, &dec_codes);
            let at = drop_redundant_candidates(&mut state, table, tol);
            (ex, at)
        } else {
            (0, 0)
        };

        rounds.push(RoundRecord {
            attribute: chosen,
            significance,
            gh_after: gh_current,
            pruned_examples,
            pruned_attributes,
            live_rows,
            candidates_evaluated,
            forced,
        });
    }

    let mut selected = state.selected;
    let mut removed = Vec::new();
    if options.enforce_min {
        let minimal = enforce_minimality(table, &selected, gh_full, tol)?;
        removed = selected.iter().copied().filter(|a| !minimal.contains(a)).collect();
        selected = minimal;
    }

    Ok(ReductTrace {
        selected,
        gh_full,
        rounds,
        accelerated: options.accelerate,
        minimality_enforced: options.enforce_min,
        removed_by_minimality: removed,
    })
}

/// Backward pass over `reduct` (selection order, last first) dropping every
/// attribute whose removal keeps GH at `gh_target`. The survivors, in their
/// original order, are each individually necessary.
pub fn enforce_minimality(table: &DecisionTable, reduct: &[usize], gh_target: f64, tolerance: f64) -> Result<Vec<usize>> {
    let dec_codes = decision_codes(table)?;
    let n = table.n_attributes();
    let mut current = AttributeSubset::new(reduct.iter().copied(), n)?;
    let gh = gh_of(table, &dec_codes, &current)?;
    if (gh - gh_target).abs() > tolerance {
        return Err(Error::State(format!(
            "GH of the reduct ({gh}) differs from the target ({gh_target})"
        )));
    }
    for &attr in reduct.iter().rev() {
        let trial = current.without(attr);
        if gh_of(table, &dec_codes, &trial)? - gh_target <= tolerance {
            current = trial;
        }
    }
    Ok(reduct.iter().copied().filter(|&a| current.contains(a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::decision_partition;
    use ClassLabel::*;

    fn table(rows: &[Vec<u32>], labels: &[ClassLabel]) -> DecisionTable {
        DecisionTable::from_codes(rows, labels.iter().copied().map(Some).collect()).unwrap()
    }

    fn running() -> DecisionTable {
        table(
            &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
            &[Positive, Positive, Positive, Negative],
        )
    }

    fn both_modes(t: &DecisionTable) -> ReductTrace {
        let on = reduce(t, &ReduceOptions::default()).unwrap();
        let off = reduce(t, &ReduceOptions { accelerate: false, ..Default::default() }).unwrap();
        assert_eq!(on.selected, off.selected);
        assert_eq!(on.gh_trace(), off.gh_trace());
        on
    }

    #[test]
    fn initial_attribute_picks() {
        let t = table(&[vec![0, 1], vec![1, 1], vec![0, 0]], &[Positive, Negative, Positive]);
        assert_eq!(initial_attribute(&t, &decision_partition(&t).unwrap()).unwrap(), 0);

        let t = running();
        assert_eq!(initial_attribute(&t, &decision_partition(&t).unwrap()).unwrap(), 0);

        let t = table(&[vec![0, 0], vec![0, 0]], &[Positive, Negative]);
        assert_eq!(initial_attribute(&t, &decision_partition(&t).unwrap()).unwrap(), 0);

        let empty = DecisionTable::from_codes(&[vec![], vec![]], vec![Some(Positive); 2]).unwrap();
        assert!(initial_attribute(&empty, &decision_partition(&empty).unwrap()).is_err());
    }

    #[test]
    fn running_example() {
        let trace = both_modes(&running());
        assert_eq!(trace.selected, vec![0, 1]);
        assert_eq!(trace.gh_full, 0.0);
        assert_eq!(trace.rounds.len(), 2);
        assert!((trace.rounds[0].gh_after - 0.25).abs() < 1e-12);
        assert!((trace.rounds[1].significance - 0.25).abs() < 1e-12);
        assert_eq!(trace.final_gh(), 0.0);
    }

    #[test]
    fn consistent_single_attribute() {
        let t = table(&[vec![0, 1], vec![1, 0], vec![0, 0]], &[Positive, Negative, Positive]);
        let trace = both_modes(&t);
        assert_eq!(trace.selected, vec![0]);
        assert_eq!(trace.rounds.len(), 1);
    }

    #[test]
    fn constant_decision_stops_after_first_pick() {
        let t = table(&[vec![0, 1], vec![1, 0], vec![2, 0]], &[Negative; 3]);
        let trace = both_modes(&t);
        assert_eq!(trace.selected, vec![0]);
        assert_eq!(trace.rounds.len(), 1);
    }

    #[test]
    fn rejects_unlabeled() {
        let t = DecisionTable::from_codes(&[vec![0], vec![1]], vec![Some(Positive), None]).unwrap();
        assert!(matches!(reduce(&t, &ReduceOptions::default()), Err(Error::State(_))));
    }

    #[test]
    fn pruning_examples() {
        let t = running();
        let dec = decision_partition(&t).unwrap();
        let mut state = SearchState::new(&t);
        state.select(&t, 0).unwrap();
        let pruned = prune_consistent_examples(state.clone(), &dec).unwrap();
        assert_eq!(pruned.partition().blocks(), &[vec![2, 3]]);
        let codes = class_codes(&dec);
        let full = granular_entropy_of(state.partition().blocks(), &codes, 2, 4);
        let part = granular_entropy_of(pruned.partition().blocks(), &codes, 2, 4);
        assert_eq!(full, part);
        assert!((full - 0.25).abs() < 1e-12);

        // no pure block: unchanged
        let fresh = SearchState::new(&t);
        assert_eq!(prune_consistent_examples(fresh.clone(), &dec).unwrap(), fresh);

        // all pure: nothing left
        let mut state = SearchState::new(&t);
        state.select(&t, 0).unwrap();
        state.select(&t, 1).unwrap();
        let pruned = prune_consistent_examples(state, &dec).unwrap();
        assert_eq!(pruned.live_rows(), 0);
    }

    #[test]
    fn pruning_attributes() {
        // a1 selected; a2 duplicates it, a3 is constant, a4 varies inside blocks
        let t = table(
            &[vec![0, 0, 5, 0], vec![0, 0, 5, 1], vec![1, 1, 5, 0], vec![1, 1, 5, 1]],
            &[Positive, Negative, Positive, Negative],
        );
        let mut state = SearchState::new(&t);
        state.select(&t, 0).unwrap();
        let pruned = prune_redundant_attributes(state, &t, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(pruned.candidates(), &[3]);
        assert!(prune_redundant_attributes(SearchState::new(&t), &t, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn minimality_pass() {
        let t = running();
        assert_eq!(enforce_minimality(&t, &[0, 1], 0.0, DEFAULT_TOLERANCE).unwrap(), vec![0, 1]);

        // a3 duplicates a1 and is appended by hand
        let t = table(
            &[vec![0, 0, 0], vec![0, 1, 0], vec![1, 0, 1], vec![1, 1, 1]],
            &[Positive, Positive, Positive, Negative],
        );
        assert_eq!(enforce_minimality(&t, &[0, 1, 2], 0.0, DEFAULT_TOLERANCE).unwrap(), vec![0, 1]);
        assert!(enforce_minimality(&t, &[0], 0.0, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn enforce_min_flag_reported() {
        let options = ReduceOptions { enforce_min: true, ..Default::default() };
        let trace = reduce(&running(), &options).unwrap();
        assert!(trace.minimality_enforced);
        assert!(trace.removed_by_minimality.is_empty());
    }

    #[test]
    fn xor_decision_reaches_target() {
        // D = a1 xor a2: the greedy search needs both attributes
        let t = table(
            &[vec![0, 0, 0], vec![0, 1, 0], vec![1, 0, 0], vec![1, 1, 1]],
            &[Negative, Positive, Positive, Negative],
        );
        let trace = both_modes(&t);
        assert!((trace.final_gh() - trace.gh_full).abs() < DEFAULT_TOLERANCE);
        assert!(trace.selected.contains(&0) && trace.selected.contains(&1));
    }

    #[test]
    fn stall_gain_counts_only_impure_blocks() {
        let dec = [0u32, 0, 0, 1];
        let blocks = vec![vec![0, 1], vec![2, 3]];
        // splits the pure block {0,1} only
        assert_eq!(impure_split_gain(&blocks, &dec, &[0, 1, 0, 0]), 0);
        assert_eq!(impure_split_gain(&blocks, &dec, &[0, 0, 0, 1]), 1);
    }
}
