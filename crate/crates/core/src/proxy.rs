//! Prior-guided proxy labels for unlabeled rows.
//!
//! A single label is chosen for every unlabeled row from
//! `λ = P_init · P_prior`: positive when `λ <= 0.5`, negative otherwise.
//! `P_init` amplifies the class ratio `γ = |L_pos| / |L_neg|` of the labeled
//! rows while few labels exist; `P_prior` pushes the known positive-class
//! prior towards 0.5 as the universe grows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tabular::{ClassLabel, DecisionTable};

pub const DEFAULT_EPSILON: f64 = 0.0002;
pub const DEFAULT_DELTA: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProxyParams {
    /// Boosting factor.
    pub epsilon: f64,
    /// Truncation threshold on the labeled-row count.
    pub delta: usize,
    /// Prior probability of the positive class over the whole universe.
    pub prior_pos: f64,
}

impl ProxyParams {
    pub fn new(epsilon: f64, delta: usize, prior_pos: f64) -> Result<Self> {
        let params = ProxyParams {
            epsilon,
            delta,
            prior_pos,
        };
        params.validate()?;
        Ok(params)
    }

    /// Default `epsilon` and `delta` with the given prior.
    pub fn with_prior(prior_pos: f64) -> Result<Self> {
        Self::new(DEFAULT_EPSILON, DEFAULT_DELTA, prior_pos)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.delta < 1 {
            return Err(Error::Parameter("delta must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.prior_pos) {
            return Err(Error::Parameter(format!(
                "prior_pos must lie in [0, 1], got {}",
                self.prior_pos
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledStats {
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_labeled: usize,
    /// `n_pos / n_neg`; `f64::INFINITY` when there are no negative rows.
    pub gamma: f64,
}

impl LabeledStats {
    pub fn gamma_is_infinite(&self) -> bool {
        self.n_neg == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProxyDecision {
    pub gamma: f64,
    pub p_init: f64,
    pub p_prior: f64,
    pub lambda: f64,
    pub label: ClassLabel,
    /// Rows that received the proxy label.
    pub assigned: usize,
}

pub fn labeled_stats(table: &DecisionTable) -> Result<LabeledStats> {
    let n_pos = table.labels().iter().filter(|l| **l == Some(ClassLabel::Positive)).count();
    let n_neg = table.labels().iter().filter(|l| **l == Some(ClassLabel::Negative)).count();
    let n_labeled = n_pos + n_neg;
    if n_labeled == 0 {
        return Err(Error::State("no labeled rows: the class ratio is undefined".into()));
    }
    let gamma = if n_neg == 0 {
        f64::INFINITY
    } else {
        n_pos as f64 / n_neg as f64
    };
    Ok(LabeledStats {
        n_pos,
        n_neg,
        n_labeled,
        gamma,
    })
}

/// `γ^(1 + e^(-ε·δ·|L|))` while `|L| <= δ`, exactly 1 beyond.
pub fn p_init(stats: &LabeledStats, params: &ProxyParams) -> Result<f64> {
    let gamma = stats.gamma;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("class ratio must be finite and > 0, got {gamma}")));
    }
    if stats.n_labeled > params.delta {
        return Ok(1.0);
    }
    let decay = (-params.epsilon * params.delta as f64 * stats.n_labeled as f64).exp();
    Ok(gamma.powf(1.0 + decay))
}

/// `min(P_pos·(1+ε)^|U|, 0.5)` for a minority positive class, and the
/// mirrored `1 - min((1-P_pos)·(1+ε)^|U|, 0.5)` otherwise.
pub fn p_prior(n_universe: usize, params: &ProxyParams) -> Result<f64> {
    if n_universe == 0 {
        return Err(Error::Parameter("universe must contain at least one row".into()));
    }
    let boost = (n_universe as f64 * params.epsilon.ln_1p()).exp();
    let prior = params.prior_pos;
    Ok(if prior <= 0.5 {
        (prior * boost).min(0.5)
    } else {
        1.0 - ((1.0 - prior) * boost).min(0.5)
    })
}

/// Labels every unlabeled row with the single proxy label.
///
/// With no negative labeled rows `λ` is set to 1 (negative proxy), and with
/// no positive labeled rows to 0 (positive proxy), so the proxy always
/// favours the class the labeled rows lack.
pub fn assign_proxy_labels(table: &DecisionTable, params: &ProxyParams) -> Result<(DecisionTable, ProxyDecision)> {
    params.validate()?;
    let stats = labeled_stats(table)?;
    let p_prior = p_prior(table.n_rows(), params)?;
    let (p_init, lambda) = if stats.n_neg == 0 {
        (f64::INFINITY, 1.0)
    } else if stats.n_pos == 0 {
        (0.0, 0.0)
    } else {
        let p_init = p_init(&stats, params)?;
        (p_init, p_init * p_prior)
    };
    let label = if lambda <= 0.5 {
        ClassLabel::Positive
    } else {
        ClassLabel::Negative
    };
    let labels = table.labels().iter().map(|l| Some(l.unwrap_or(label))).collect();
    let decision = ProxyDecision {
        gamma: stats.gamma,
        p_init,
        p_prior,
        lambda,
        label,
        assigned: table.unlabeled_count(),
    };
    Ok((table.with_labels(labels)?, decision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::*;

    fn table(labels: &[Option<ClassLabel>]) -> DecisionTable {
        let rows: Vec<Vec<u32>> = (0..labels.len() as u32).map(|i| vec![i]).collect();
        DecisionTable::from_codes(&rows, labels.to_vec()).unwrap()
    }

    fn stats(n_pos: usize, n_neg: usize) -> LabeledStats {
        LabeledStats {
            n_pos,
            n_neg,
            n_labeled: n_pos + n_neg,
            gamma: n_pos as f64 / n_neg as f64,
        }
    }

    fn params(prior: f64) -> ProxyParams {
        ProxyParams::with_prior(prior).unwrap()
    }

    #[test]
    fn counts_and_ratio() {
        let s = labeled_stats(&table(&[Some(Positive), Some(Positive), Some(Negative), None, None])).unwrap();
        assert_eq!((s.n_pos, s.n_neg, s.n_labeled), (2, 1, 3));
        assert_eq!(s.gamma, 2.0);

        let s = labeled_stats(&table(&[Some(Positive), Some(Positive)])).unwrap();
        assert!(s.gamma_is_infinite());

        let s = labeled_stats(&table(&[Some(Positive), Some(Negative)])).unwrap();
        assert_eq!(s.gamma, 1.0);

        assert!(matches!(labeled_stats(&table(&[None])), Err(Error::State(_))));
    }

    #[test]
    fn p_init_branches() {
        assert_eq!(p_init(&stats(300, 300), &params(0.5)).unwrap(), 1.0);
        assert_eq!(p_init(&stats(10, 10), &params(0.5)).unwrap(), 1.0);
        // 0.5^(1 + e^-5), reference value from the mpmath oracle
        let s = LabeledStats { gamma: 0.5, n_labeled: 50, ..stats(25, 50) };
        let v = p_init(&s, &params(0.5)).unwrap();
        assert!((v - 0.497_670_250_171_167_4).abs() < 1e-12, "{v}");
        let bad = LabeledStats { gamma: 0.0, ..stats(0, 5) };
        assert!(p_init(&bad, &params(0.5)).is_err());
    }

    #[test]
    fn p_init_delta_boundary_is_inclusive() {
        // |L| = δ is still amplified, |L| = δ + 1 is truncated
        let at = p_init(&stats(200, 300), &params(0.5)).unwrap();
        assert!((at - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(p_init(&stats(201, 300), &params(0.5)).unwrap(), 1.0);
    }

    #[test]
    fn p_prior_branches() {
        assert_eq!(p_prior(1000, &params(0.5)).unwrap(), 0.5);
        let v = p_prior(2000, &params(0.3)).unwrap();
        assert!((v - 0.447_529_510_140_508_6).abs() < 1e-12, "{v}");
        assert_eq!(p_prior(100_000, &params(0.7)).unwrap(), 0.5);
        assert!(p_prior(0, &params(0.3)).is_err());
    }

    #[test]
    fn tie_goes_positive() {
        let rows = [Some(Positive), Some(Negative), None, None];
        let (out, d) = assign_proxy_labels(&table(&rows), &params(0.5)).unwrap();
        assert_eq!(d.lambda, 0.5);
        assert_eq!(d.label, Positive);
        assert_eq!(out.labels(), &[Some(Positive), Some(Negative), Some(Positive), Some(Positive)]);
        assert_eq!(d.assigned, 2);
    }

    #[test]
    fn degenerate_ratios() {
        let (out, d) = assign_proxy_labels(&table(&[Some(Positive), None]), &params(0.3)).unwrap();
        assert_eq!(d.lambda, 1.0);
        assert_eq!(out.label(1), Some(Negative));

        let (out, d) = assign_proxy_labels(&table(&[Some(Negative), None]), &params(0.3)).unwrap();
        assert_eq!(d.lambda, 0.0);
        assert_eq!(out.label(1), Some(Positive));
    }

    #[test]
    fn requires_labels() {
        assert!(matches!(assign_proxy_labels(&table(&[None, None]), &params(0.3)), Err(Error::State(_))));
    }

    #[test]
    fn params_validation() {
        assert!(ProxyParams::new(0.0, 500, 0.5).is_err());
        assert!(ProxyParams::new(0.1, 0, 0.5).is_err());
        assert!(ProxyParams::new(0.1, 1, 1.5).is_err());
        assert!(ProxyParams::new(0.1, 1, 1.0).is_ok());
    }
}
