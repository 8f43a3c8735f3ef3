//! JSON reduct reports. Field order is fixed by the struct definitions so
//! reports diff cleanly between runs.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::harness::SplitSpec;
use crate::proxy::{ProxyDecision, ProxyParams};
use crate::reduction::{ReduceOptions, ReductTrace};
use crate::tabular::DecisionTable;

#[derive(Debug, Clone, Serialize)]
pub struct ProxyEcho {
    pub params: ProxyParams,
    pub decision: ProxyDecision,
}

/// Everything that influenced a reduct, echoed back into the report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportParams {
    pub input: Option<String>,
    pub rows: usize,
    pub attributes: usize,
    pub bins: Option<usize>,
    pub options: ReduceOptions,
    pub split: Option<SplitSpec>,
    pub proxy: Option<ProxyEcho>,
}

#[derive(Debug, Serialize)]
struct RoundOut<'a> {
    attr: &'a str,
    index: usize,
    sig: f64,
    gh_after: f64,
    pruned_examples: usize,
    pruned_attributes: usize,
    forced: bool,
}

#[derive(Debug, Serialize)]
struct ReductReport<'a> {
    reduct: Vec<&'a str>,
    reduct_indices: &'a [usize],
    gh_full: f64,
    rounds: Vec<RoundOut<'a>>,
    minimality_enforced: bool,
    removed_by_minimality: Vec<&'a str>,
    params: &'a ReportParams,
}

fn build<'a>(trace: &'a ReductTrace, table: &'a DecisionTable, params: &'a ReportParams) -> ReductReport<'a> {
    let name = |a: usize| table.attribute_name(a);
    ReductReport {
        reduct: trace.selected.iter().map(|&a| name(a)).collect(),
        reduct_indices: &trace.selected,
        gh_full: trace.gh_full,
        rounds: trace
            .rounds
            .iter()
            .map(|r| RoundOut {
                attr: name(r.attribute),
                index: r.attribute,
                sig: r.significance,
                gh_after: r.gh_after,
                pruned_examples: r.pruned_examples,
                pruned_attributes: r.pruned_attributes,
                forced: r.forced,
            })
            .collect(),
        minimality_enforced: trace.minimality_enforced,
        removed_by_minimality: trace.removed_by_minimality.iter().map(|&a| name(a)).collect(),
        params,
    }
}

pub fn write_reduct_report<W: Write>(
    mut sink: W,
    trace: &ReductTrace,
    table: &DecisionTable,
    params: &ReportParams,
) -> Result<()> {
    serde_json::to_writer_pretty(&mut sink, &build(trace, table, params))?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn emit_reduct_report(trace: &ReductTrace, table: &DecisionTable, params: &ReportParams, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut sink = std::io::BufWriter::new(file);
    write_reduct_report(&mut sink, trace, table, params)?;
    sink.flush()?;
    Ok(())
}
