//! Comparison selectors: Fisher score on labeled rows, Laplacian score on
//! all rows, and the entropy reduct computed from labeled rows only.
//!
//! Category codes are used directly as integer values for the score
//! arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::AttributeSubset;
use crate::reduction::{self, ReduceOptions, ReductTrace};
use crate::tabular::{ClassLabel, DecisionTable};

pub const DEFAULT_LAPLACIAN_NEIGHBORS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// One score per condition attribute. Degenerate attributes carry an
/// infinite score: best for Fisher (perfect separator), worst for Laplacian
/// (zero variance).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeScores {
    pub scores: Vec<f64>,
    pub direction: Direction,
}

fn column_values(table: &DecisionTable, attr: usize, rows: &[usize]) -> Vec<f64> {
    let col = table.column(attr);
    rows.iter().map(|&r| col[r] as f64).collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `F(a) = S_B(a) / S_W(a)` over the labeled rows of `table`.
pub fn fisher_scores(table: &DecisionTable) -> Result<AttributeScores> {
    let labeled = table.labeled_rows();
    let (pos, neg): (Vec<usize>, Vec<usize>) = labeled
        .iter()
        .partition(|&&r| table.label(r) == Some(ClassLabel::Positive));
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::State(
            "Fisher score needs labeled rows from both classes".into(),
        ));
    }
    let scores = (0..table.n_attributes())
        .map(|attr| {
            let all = column_values(table, attr, &labeled);
            let mu = mean(&all);
            let mut between = 0.0;
            let mut within = 0.0;
            for class in [&pos, &neg] {
                let values = column_values(table, attr, class);
                let mu_c = mean(&values);
                between += values.len() as f64 * (mu_c - mu).powi(2);
                within += values.iter().map(|v| (v - mu_c).powi(2)).sum::<f64>();
            }
            if between == 0.0 {
                0.0
            } else if within == 0.0 {
                f64::INFINITY
            } else {
                between / within
            }
        })
        .collect();
    Ok(AttributeScores {
        scores,
        direction: Direction::HigherIsBetter,
    })
}

fn hamming(table: &DecisionTable, i: usize, j: usize) -> usize {
    (0..table.n_attributes()).filter(|&a| table.code(i, a) != table.code(j, a)).count()
}

/// Symmetrized `t`-nearest-neighbour graph under Hamming distance over all
/// attributes; distance ties go to the lower row index.
fn neighbor_graph(table: &DecisionTable, t: usize) -> Vec<Vec<usize>> {
    let n = table.n_rows();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let mut near: Vec<(usize, usize)> = (0..n).filter(|&j| j != i).map(|j| (hamming(table, i, j), j)).collect();
        near.select_nth_unstable(t - 1);
        near.truncate(t);
        for (_, j) in near {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    adjacency
}

/// `L(a) = Σᵢⱼ (aᵢ - aⱼ)² Sᵢⱼ / Var(a)` with a binary symmetric kNN graph.
/// Labels are ignored. Lower is better.
pub fn laplacian_scores(table: &DecisionTable, neighbors: usize) -> Result<AttributeScores> {
    let n = table.n_rows();
    if neighbors == 0 || n < neighbors + 1 {
        return Err(Error::Parameter(format!(
            "Laplacian score needs at least {} rows and >= 1 neighbour, got {n} rows",
            neighbors + 1
        )));
    }
    let graph = neighbor_graph(table, neighbors);
    let scores = (0..table.n_attributes())
        .map(|attr| {
            let col = table.column(attr);
            let values: Vec<f64> = col.iter().map(|&c| c as f64).collect();
            let mu = mean(&values);
            let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
            if var == 0.0 {
                return f64::INFINITY;
            }
            let mut locality = 0.0;
            for (i, adj) in graph.iter().enumerate() {
                for &j in adj {
                    locality += (values[i] - values[j]).powi(2);
                }
            }
            locality / var
        })
        .collect();
    Ok(AttributeScores {
        scores,
        direction: Direction::LowerIsBetter,
    })
}

/// The `k` best attributes by the score's direction, lowest index on ties.
pub fn select_top_k(scores: &AttributeScores, k: usize) -> Result<AttributeSubset> {
    let n = scores.scores.len();
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (scores.scores[a], scores.scores[b]);
        let by_score = match scores.direction {
            Direction::HigherIsBetter => sb.total_cmp(&sa),
            Direction::LowerIsBetter => sa.total_cmp(&sb),
        };
        by_score.then(a.cmp(&b))
    });
    AttributeSubset::new(order.into_iter().take(k), n)
}

/// The entropy reduct of the labeled rows alone (unlabeled rows dropped).
pub fn gce_labeled_only(table: &DecisionTable, options: &ReduceOptions) -> Result<ReductTrace> {
    let labeled = table.labeled_subtable();
    if labeled.n_rows() == 0 {
        return Err(Error::State("no labeled rows".into()));
    }
    reduction::reduce(&labeled, options)
}
