//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function takes plain values and returns a JSON string; the
//! `*_json` functions underneath do the work and can be tested natively.

use granred::proxy::{self, LabeledStats, ProxyParams};
use granred::reduction::{self, ReduceOptions};
use granred::report::{self, ProxyEcho, ReportParams};
use granred::tabular::{self, DecisionTable};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 400;

fn sample_points(max: usize) -> Vec<usize> {
    let step = max.div_ceil(MAX_POINTS).max(1);
    let mut xs: Vec<usize> = (1..=max).step_by(step).collect();
    if xs.last() != Some(&max) {
        xs.push(max);
    }
    xs
}

#[derive(Serialize)]
struct Curves {
    p_init: Vec<(usize, f64)>,
    p_prior: Vec<(usize, f64)>,
}

/// `P_init` over labeled counts `1..=max_labeled` at fixed `gamma`, and
/// `P_prior` over universe sizes `1..=max_universe`.
pub fn proxy_curves_json(
    gamma: f64,
    prior_pos: f64,
    epsilon: f64,
    delta: usize,
    max_labeled: usize,
    max_universe: usize,
) -> Result<String, String> {
    let params = ProxyParams::new(epsilon, delta, prior_pos).map_err(|e| e.to_string())?;
    let p_init = sample_points(max_labeled)
        .into_iter()
        .map(|n| {
            let stats = LabeledStats {
                n_pos: 0,
                n_neg: 0,
                n_labeled: n,
                gamma,
            };
            proxy::p_init(&stats, &params).map(|v| (n, v))
        })
        .collect::<granred::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let p_prior = sample_points(max_universe)
        .into_iter()
        .map(|n| proxy::p_prior(n, &params).map(|v| (n, v)))
        .collect::<granred::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&Curves { p_init, p_prior }).map_err(|e| e.to_string())
}

fn parse_table(csv: &str, bins: usize) -> Result<DecisionTable, String> {
    let raw = tabular::load_csv(csv.as_bytes(), tabular::DEFAULT_MISSING_TOKEN).map_err(|e| e.to_string())?;
    tabular::prepare(&raw, bins).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Labelled {
    decision: proxy::ProxyDecision,
    csv: String,
}

/// Proxy-labels a CSV table; `prior_pos` may be omitted for fully labeled
/// input.
pub fn label_csv_json(csv: &str, bins: usize, prior_pos: Option<f64>, epsilon: f64, delta: usize) -> Result<String, String> {
    let table = parse_table(csv, bins)?;
    let prior = tabular::resolve_prior(&table, prior_pos).map_err(|e| e.to_string())?;
    let params = ProxyParams::new(epsilon, delta, prior).map_err(|e| e.to_string())?;
    let (proxied, decision) = proxy::assign_proxy_labels(&table, &params).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    proxied
        .write_csv(&mut out, tabular::DEFAULT_MISSING_TOKEN)
        .map_err(|e| e.to_string())?;
    let csv = String::from_utf8(out).map_err(|e| e.to_string())?;
    serde_json::to_string(&Labelled { decision, csv }).map_err(|e| e.to_string())
}

/// Reduct trace report for a CSV table. Unlabeled rows are proxy-labeled
/// first, which needs `prior_pos`.
pub fn reduce_csv_json(
    csv: &str,
    bins: usize,
    prior_pos: Option<f64>,
    accelerate: bool,
    enforce_min: bool,
) -> Result<String, String> {
    let mut table = parse_table(csv, bins)?;
    let mut proxy_echo = None;
    if !table.is_fully_labeled() {
        let prior = tabular::resolve_prior(&table, prior_pos).map_err(|e| e.to_string())?;
        let params = ProxyParams::with_prior(prior).map_err(|e| e.to_string())?;
        let (proxied, decision) = proxy::assign_proxy_labels(&table, &params).map_err(|e| e.to_string())?;
        table = proxied;
        proxy_echo = Some(ProxyEcho { params, decision });
    }
    let options = ReduceOptions {
        accelerate,
        enforce_min,
        ..ReduceOptions::default()
    };
    let trace = reduction::reduce(&table, &options).map_err(|e| e.to_string())?;
    let params = ReportParams {
        input: None,
        rows: table.n_rows(),
        attributes: table.n_attributes(),
        bins: Some(bins),
        options,
        split: None,
        proxy: proxy_echo,
    };
    let mut out = Vec::new();
    report::write_reduct_report(&mut out, &trace, &table, &params).map_err(|e| e.to_string())?;
    String::from_utf8(out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn proxy_curves(
    gamma: f64,
    prior_pos: f64,
    epsilon: f64,
    delta: usize,
    max_labeled: usize,
    max_universe: usize,
) -> Result<String, JsError> {
    proxy_curves_json(gamma, prior_pos, epsilon, delta, max_labeled, max_universe).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn label_csv(csv: &str, bins: usize, prior_pos: Option<f64>, epsilon: f64, delta: usize) -> Result<String, JsError> {
    label_csv_json(csv, bins, prior_pos, epsilon, delta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn reduce_csv(
    csv: &str,
    bins: usize,
    prior_pos: Option<f64>,
    accelerate: bool,
    enforce_min: bool,
) -> Result<String, JsError> {
    reduce_csv_json(csv, bins, prior_pos, accelerate, enforce_min).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const TABLE: &str = "a,b,c,class\n0,0,1,pos\n0,1,1,neg\n1,0,0,neg\n1,1,0,pos\n0,0,0,?\n1,1,1,?\n";

    #[test]
    fn curves_cover_both_branches() {
        let json: Value = serde_json::from_str(&proxy_curves_json(0.5, 0.3, 0.0002, 500, 1000, 5000).unwrap()).unwrap();
        let p_init = json["p_init"].as_array().unwrap();
        assert!(p_init.len() <= MAX_POINTS + 1);
        assert_eq!(p_init.last().unwrap()[0], 1000);
        assert_eq!(p_init.last().unwrap()[1], 1.0);
        assert!(p_init[0][1].as_f64().unwrap() < 0.5);
        let p_prior = json["p_prior"].as_array().unwrap();
        assert_eq!(p_prior.last().unwrap()[1], 0.5);
        assert!(proxy_curves_json(0.5, 1.5, 0.0002, 500, 10, 10).is_err());
    }

    #[test]
    fn label_fills_every_row() {
        let json: Value = serde_json::from_str(&label_csv_json(TABLE, 3, Some(0.5), 0.0002, 500).unwrap()).unwrap();
        assert_eq!(json["decision"]["assigned"], 2);
        assert!(!json["csv"].as_str().unwrap().contains('?'));
        assert!(label_csv_json(TABLE, 3, None, 0.0002, 500).is_err());
    }

    #[test]
    fn reduce_reports_trace() {
        let json: Value = serde_json::from_str(&reduce_csv_json(TABLE, 3, Some(0.5), true, true).unwrap()).unwrap();
        assert_eq!(json["minimality_enforced"], true);
        assert!(!json["reduct"].as_array().unwrap().is_empty());
        assert!(json["params"]["proxy"].is_object());
        let same = reduce_csv_json(TABLE, 3, Some(0.5), false, true).unwrap();
        let same: Value = serde_json::from_str(&same).unwrap();
        assert_eq!(json["reduct"], same["reduct"]);
    }
}
