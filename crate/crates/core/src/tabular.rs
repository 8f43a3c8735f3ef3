//! Partially labeled categorical decision tables.
//!
//! Data enters as a [`RawTable`] (text cells straight from CSV), is optionally
//! discretized and binarized, and is finally [`encode`]d into a
//! [`DecisionTable`] whose columns hold dense integer category codes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_MISSING_TOKEN: &str = "?";
pub const POSITIVE_TOKEN: &str = "pos";
pub const NEGATIVE_TOKEN: &str = "neg";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Positive,
    Negative,
}

impl ClassLabel {
    pub fn token(self) -> &'static str {
        match self {
            ClassLabel::Positive => POSITIVE_TOKEN,
            ClassLabel::Negative => NEGATIVE_TOKEN,
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            POSITIVE_TOKEN => Some(ClassLabel::Positive),
            NEGATIVE_TOKEN => Some(ClassLabel::Negative),
            _ => None,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Text-level table as read from disk, before discretization and encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub attribute_names: Vec<String>,
    pub decision_name: String,
    /// Row-major condition cells.
    pub cells: Vec<Vec<String>>,
    /// `None` marks an unlabeled row.
    pub decision: Vec<Option<String>>,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn unlabeled_count(&self) -> usize {
        self.decision.iter().filter(|d| d.is_none()).count()
    }

    fn column(&self, attr: usize) -> impl Iterator<Item = &str> + '_ {
        self.cells.iter().map(move |row| row[attr].as_str())
    }

    /// Writes the table back out in the same CSV shape it was read from.
    pub fn write_csv<W: Write>(&self, sink: W, missing_token: &str) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        let mut header: Vec<&str> = self.attribute_names.iter().map(String::as_str).collect();
        header.push(&self.decision_name);
        writer.write_record(&header)?;
        for (row, decision) in self.cells.iter().zip(&self.decision) {
            let mut record: Vec<&str> = row.iter().map(String::as_str).collect();
            record.push(decision.as_deref().unwrap_or(missing_token));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Reads a CSV whose first record is the header and whose last column is the
/// decision. Decision cells equal to `missing_token` become unlabeled.
pub fn load_csv<R: Read>(source: R, missing_token: &str) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Format {
            row: 1,
            message: "empty file: a header record is required".into(),
        });
    }
    let width = header.len();
    let mut names: Vec<String> = header.iter().map(str::to_owned).collect();
    let decision_name = names.pop().expect("non-empty header");

    let mut cells = Vec::new();
    let mut decision = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // header is row 1
        let row = record.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        if record.len() != width {
            return Err(Error::Format {
                row,
                message: format!("expected {width} cells, found {}", record.len()),
            });
        }
        let mut values: Vec<String> = record.iter().map(str::to_owned).collect();
        let label = values.pop().expect("width >= 1");
        if let Some(col) = values.iter().position(String::is_empty) {
            return Err(Error::Format {
                row,
                message: format!("empty cell in column '{}'", names[col]),
            });
        }
        if label.is_empty() {
            return Err(Error::Format {
                row,
                message: "empty decision cell".into(),
            });
        }
        cells.push(values);
        decision.push(if label == missing_token { None } else { Some(label) });
    }

    Ok(RawTable {
        attribute_names: names,
        decision_name,
        cells,
        decision,
    })
}

fn parse_numeric_column(raw: &RawTable, attr: usize) -> Option<Vec<f64>> {
    if raw.n_rows() == 0 {
        return None;
    }
    raw.column(attr)
        .map(|cell| cell.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

/// Upper boundaries of the first `bins - 1` bins, picked at the lower
/// `k/bins` quantiles of the sorted column. When the column has at least
/// `bins` distinct values the boundaries are nudged onto strictly increasing
/// distinct values so that no bin is left empty.
fn equal_frequency_boundaries(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut distinct = sorted.clone();
    distinct.dedup();
    let m = distinct.len();

    let quantile_rank = |k: usize| -> usize {
        let pos = (k * n).div_ceil(bins);
        let value = sorted[pos.max(1) - 1];
        distinct.partition_point(|d| *d < value)
    };

    let mut ranks: Vec<usize> = (1..bins).map(quantile_rank).collect();
    if m >= bins {
        for k in 0..ranks.len() {
            let floor = if k == 0 { 0 } else { ranks[k - 1] + 1 };
            // leave at least one distinct value for every later bin
            let ceiling = m - 1 - (bins - 1 - k);
            ranks[k] = ranks[k].max(floor).min(ceiling);
        }
    }
    ranks.dedup();
    ranks.into_iter().map(|r| distinct[r]).collect()
}

/// Replaces every numeric column with equal-frequency bin codes `0..bins`.
/// A column counts as numeric when every cell parses as a finite number;
/// other columns pass through untouched. Values tied with a boundary go to
/// the lowest bin whose boundary is not below them.
pub fn discretize_equal_frequency(raw: &RawTable, bins: usize) -> Result<RawTable> {
    if bins < 2 {
        return Err(Error::Parameter(format!("bins must be >= 2, got {bins}")));
    }
    let mut out = raw.clone();
    for attr in 0..raw.n_attributes() {
        let Some(values) = parse_numeric_column(raw, attr) else {
            continue;
        };
        let boundaries = equal_frequency_boundaries(&values, bins);
        for (row, value) in values.iter().enumerate() {
            let bin = boundaries.partition_point(|b| b < value);
            out.cells[row][attr] = bin.to_string();
        }
    }
    Ok(out)
}

/// The most frequent class among labeled rows; ties go to the
/// lexicographically smallest class name.
pub fn majority_class(raw: &RawTable) -> Result<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for label in raw.decision.iter().flatten() {
        *counts.entry(label.as_str()).or_default() += 1;
    }
    counts
        .iter()
        // BTreeMap iterates in name order; `max_by` keeps the last maximum,
        // so iterate in reverse to keep the smallest name.
        .rev()
        .max_by_key(|(_, count)| **count)
        .map(|(name, _)| (*name).to_owned())
        .ok_or_else(|| Error::State("no labeled rows: cannot determine the majority class".into()))
}

/// One-vs-all binarization: the majority class becomes `pos`, every other
/// class becomes `neg`. Unlabeled rows stay unlabeled. A decision that
/// already uses only the `pos`/`neg` tokens is left as it is.
pub fn binarize_one_vs_all(raw: &RawTable) -> Result<RawTable> {
    let mut labeled = raw.decision.iter().flatten().peekable();
    if labeled.peek().is_some() && labeled.all(|d| ClassLabel::from_token(d).is_some()) {
        return Ok(raw.clone());
    }
    let positive = majority_class(raw)?;
    let mut out = raw.clone();
    for label in out.decision.iter_mut().flatten() {
        let token = if *label == positive { POSITIVE_TOKEN } else { NEGATIVE_TOKEN };
        *label = token.to_owned();
    }
    Ok(out)
}

/// Category order used by [`encode`]: ascending numeric order when every
/// cell is a number, byte-lexicographic order otherwise.
fn sorted_categories<'a>(cells: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut distinct: Vec<&str> = cells.collect();
    distinct.sort_unstable();
    distinct.dedup();
    let numeric: Option<Vec<f64>> = distinct.iter().map(|c| c.parse::<f64>().ok()).collect();
    match numeric {
        Some(values) => {
            let mut paired: Vec<(f64, &str)> = values.into_iter().zip(distinct).collect();
            paired.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
            paired.into_iter().map(|(_, c)| c.to_owned()).collect()
        }
        None => distinct.into_iter().map(str::to_owned).collect(),
    }
}

/// Dense per-column re-encoding of a binarized categorical table.
pub fn encode(raw: &RawTable) -> Result<DecisionTable> {
    let n_attrs = raw.n_attributes();
    let mut columns = Vec::with_capacity(n_attrs);
    let mut categories = Vec::with_capacity(n_attrs);
    for attr in 0..n_attrs {
        let cats = sorted_categories(raw.column(attr));
        let index: HashMap<&str, u32> = cats.iter().enumerate().map(|(i, c)| (c.as_str(), i as u32)).collect();
        columns.push(raw.column(attr).map(|c| index[c]).collect());
        categories.push(cats);
    }
    let labels = raw
        .decision
        .iter()
        .enumerate()
        .map(|(row, d)| match d {
            None => Ok(None),
            Some(token) => ClassLabel::from_token(token).map(Some).ok_or_else(|| {
                Error::State(format!(
                    "row {row}: decision '{token}' is not binary; run one-vs-all binarization first"
                ))
            }),
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DecisionTable {
        attribute_names: raw.attribute_names.clone(),
        decision_name: raw.decision_name.clone(),
        columns,
        categories,
        labels,
    })
}

/// Immutable decision table over dense category codes, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTable {
    attribute_names: Vec<String>,
    decision_name: String,
    columns: Vec<Vec<u32>>,
    categories: Vec<Vec<String>>,
    labels: Vec<Option<ClassLabel>>,
}

impl DecisionTable {
    /// Builds a table from row-major codes. Each column is re-encoded densely
    /// in ascending code order, so arbitrary non-negative codes are accepted.
    pub fn from_rows(
        attribute_names: Vec<String>,
        rows: &[Vec<u32>],
        labels: Vec<Option<ClassLabel>>,
    ) -> Result<Self> {
        let n_attrs = attribute_names.len();
        if rows.len() != labels.len() {
            return Err(Error::Parameter(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n_attrs) {
            return Err(Error::Format {
                row: i,
                message: format!("expected {n_attrs} codes, found {}", rows[i].len()),
            });
        }
        let mut columns = Vec::with_capacity(n_attrs);
        let mut categories = Vec::with_capacity(n_attrs);
        for attr in 0..n_attrs {
            let mut distinct: Vec<u32> = rows.iter().map(|r| r[attr]).collect();
            distinct.sort_unstable();
            distinct.dedup();
            columns.push(
                rows.iter()
                    .map(|r| distinct.binary_search(&r[attr]).expect("present") as u32)
                    .collect(),
            );
            categories.push(distinct.iter().map(u32::to_string).collect());
        }
        Ok(DecisionTable {
            attribute_names,
            decision_name: "class".into(),
            columns,
            categories,
            labels,
        })
    }

    /// Same as [`DecisionTable::from_rows`] with generated names `a1..an`.
    pub fn from_codes(rows: &[Vec<u32>], labels: Vec<Option<ClassLabel>>) -> Result<Self> {
        let n_attrs = rows.first().map_or(0, Vec::len);
        let names = (1..=n_attrs).map(|i| format!("a{i}")).collect();
        Self::from_rows(names, rows, labels)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn attribute_name(&self, attr: usize) -> &str {
        &self.attribute_names[attr]
    }

    pub fn decision_name(&self) -> &str {
        &self.decision_name
    }

    pub fn column(&self, attr: usize) -> &[u32] {
        &self.columns[attr]
    }

    pub fn code(&self, row: usize, attr: usize) -> u32 {
        self.columns[attr][row]
    }

    /// Number of distinct codes in the column (codes are `0..cardinality`).
    pub fn cardinality(&self, attr: usize) -> usize {
        self.categories[attr].len()
    }

    pub fn category(&self, attr: usize, code: u32) -> &str {
        &self.categories[attr][code as usize]
    }

    pub fn labels(&self) -> &[Option<ClassLabel>] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> Option<ClassLabel> {
        self.labels[row]
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    pub fn unlabeled_count(&self) -> usize {
        self.n_rows() - self.labeled_count()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    pub fn labeled_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.labels[r].is_some()).collect()
    }

    /// Returns every label, or a state error naming the first unlabeled row.
    pub fn full_labels(&self) -> Result<Vec<ClassLabel>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(row, l)| l.ok_or_else(|| Error::State(format!("row {row} is unlabeled"))))
            .collect()
    }

    /// Same rows and attributes with a replacement decision column.
    pub fn with_labels(&self, labels: Vec<Option<ClassLabel>>) -> Result<Self> {
        if labels.len() != self.n_rows() {
            return Err(Error::Parameter(format!(
                "expected {} labels, got {}",
                self.n_rows(),
                labels.len()
            )));
        }
        Ok(DecisionTable {
            labels,
            ..self.clone()
        })
    }

    /// Sub-table made of the given rows, in the given order. Category codes
    /// keep their meaning from the parent table.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        DecisionTable {
            attribute_names: self.attribute_names.clone(),
            decision_name: self.decision_name.clone(),
            columns: self
                .columns
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
            categories: self.categories.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    pub fn labeled_subtable(&self) -> Self {
        self.select_rows(&self.labeled_rows())
    }

    /// Writes category text (not codes) with `pos`/`neg` decisions.
    pub fn write_csv<W: Write>(&self, sink: W, missing_token: &str) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        let mut header: Vec<&str> = self.attribute_names.iter().map(String::as_str).collect();
        header.push(&self.decision_name);
        writer.write_record(&header)?;
        for row in 0..self.n_rows() {
            let mut record: Vec<&str> = (0..self.n_attributes())
                .map(|a| self.category(a, self.code(row, a)))
                .collect();
            record.push(match self.labels[row] {
                Some(label) => label.token(),
                None => missing_token,
            });
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// `|U_pos| / |U|` computed from a full ground-truth labeling.
pub fn prior_positive_probability(table: &DecisionTable, ground_truth: Option<&[ClassLabel]>) -> Result<f64> {
    let Some(truth) = ground_truth else {
        return Err(Error::Config(
            "no ground-truth labeling available: supply the positive-class prior explicitly".into(),
        ));
    };
    if truth.len() != table.n_rows() {
        return Err(Error::Parameter(format!(
            "ground truth has {} labels for {} rows",
            truth.len(),
            table.n_rows()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Parameter("empty universe".into()));
    }
    let positives = truth.iter().filter(|&&l| l == ClassLabel::Positive).count();
    Ok(positives as f64 / truth.len() as f64)
}

/// Picks the externally supplied prior when present, otherwise treats a
/// fully labeled table as its own ground truth.
pub fn resolve_prior(table: &DecisionTable, external: Option<f64>) -> Result<f64> {
    match external {
        Some(p) if (0.0..=1.0).contains(&p) => Ok(p),
        Some(p) => Err(Error::Config(format!("prior must lie in [0, 1], got {p}"))),
        None => {
            let truth = table.full_labels().map_err(|_| {
                Error::Config(
                    "table has unlabeled rows and no positive-class prior was supplied".into(),
                )
            })?;
            prior_positive_probability(table, Some(&truth))
        }
    }
}

/// Load, discretize, binarize and encode in one go.
pub fn prepare(raw: &RawTable, bins: usize) -> Result<DecisionTable> {
    let binned = discretize_equal_frequency(raw, bins)?;
    let binary = binarize_one_vs_all(&binned)?;
    encode(&binary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_from(text: &str) -> RawTable {
        load_csv(text.as_bytes(), "?").unwrap()
    }

    fn column_table(values: &[&str]) -> RawTable {
        let mut text = String::from("x,class\n");
        for v in values {
            text.push_str(&format!("{v},a\n"));
        }
        raw_from(&text)
    }

    fn binned(values: &[&str], bins: usize) -> Vec<String> {
        let out = discretize_equal_frequency(&column_table(values), bins).unwrap();
        out.cells.into_iter().map(|r| r[0].clone()).collect()
    }

    #[test]
    fn load_marks_missing_decisions() {
        let raw = raw_from("a,b,class\n1,x,pos\n2,y,?\n3,z,neg\n");
        assert_eq!(raw.n_rows(), 3);
        assert_eq!(raw.unlabeled_count(), 1);
        assert_eq!(raw.decision[1], None);
        assert_eq!(raw.attribute_names, vec!["a", "b"]);
    }

    #[test]
    fn load_rejects_ragged_rows() {
        let err = load_csv("a,b,c,d,class\n1,2,3,4,pos\n1,2,3,neg\n".as_bytes(), "?").unwrap_err();
        match err {
            Error::Format { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_header_only_and_empty() {
        let raw = raw_from("a,b,c,class\n");
        assert_eq!(raw.n_rows(), 0);
        assert_eq!(raw.n_attributes(), 3);
        assert!(matches!(load_csv("".as_bytes(), "?"), Err(Error::Format { .. })));
    }

    #[test]
    fn load_custom_missing_token() {
        let raw = load_csv("a,class\n1,NA\n2,pos\n".as_bytes(), "NA").unwrap();
        assert_eq!(raw.unlabeled_count(), 1);
    }

    #[test]
    fn binning_exact_tertiles() {
        assert_eq!(binned(&["1", "2", "3", "4", "5", "6"], 3), ["0", "0", "1", "1", "2", "2"]);
    }

    #[test]
    fn binning_constant_column() {
        assert_eq!(binned(&["7", "7", "7", "7"], 3), ["0", "0", "0", "0"]);
    }

    #[test]
    fn binning_ties_go_low() {
        assert_eq!(binned(&["1", "1", "1", "2"], 2), ["0", "0", "0", "1"]);
    }

    #[test]
    fn binning_keeps_bins_nonempty_under_heavy_ties() {
        // plain quantiles would put both boundaries on 1 and leave bin 1 empty
        let codes = binned(&["1", "1", "1", "1", "1", "2", "3"], 3);
        assert_eq!(codes, ["0", "0", "0", "0", "0", "1", "2"]);
    }

    #[test]
    fn binning_unsorted_input() {
        assert_eq!(binned(&["6", "1", "4", "2", "5", "3"], 3), ["2", "0", "1", "0", "2", "1"]);
    }

    #[test]
    fn binning_rejects_one_bin() {
        assert!(matches!(
            discretize_equal_frequency(&column_table(&["1"]), 1),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn binning_skips_categorical_columns() {
        let raw = raw_from("a,b,class\nx,1,p\ny,2,p\n");
        let out = discretize_equal_frequency(&raw, 2).unwrap();
        assert_eq!(out.cells[0][0], "x");
        assert_eq!(out.cells[1][1], "1");
    }

    #[test]
    fn one_vs_all_majority() {
        let raw = raw_from("x,class\n1,a\n1,a\n1,a\n1,b\n1,b\n1,c\n1,?\n");
        let out = binarize_one_vs_all(&raw).unwrap();
        let labels: Vec<_> = out.decision.iter().map(|d| d.as_deref()).collect();
        assert_eq!(
            labels,
            [Some("pos"), Some("pos"), Some("pos"), Some("neg"), Some("neg"), Some("neg"), None]
        );
    }

    #[test]
    fn one_vs_all_tie_is_lexicographic() {
        let raw = raw_from("x,class\n1,b\n1,a\n1,b\n1,a\n");
        assert_eq!(majority_class(&raw).unwrap(), "a");
    }

    #[test]
    fn one_vs_all_identity_on_binary() {
        let raw = raw_from("x,class\n1,pos\n2,pos\n3,neg\n");
        assert_eq!(binarize_one_vs_all(&raw).unwrap(), raw);
        let minority = raw_from("x,class\n1,pos\n2,neg\n3,neg\n");
        assert_eq!(binarize_one_vs_all(&minority).unwrap(), minority);
    }

    #[test]
    fn one_vs_all_needs_labels() {
        let raw = raw_from("x,class\n1,?\n");
        assert!(matches!(binarize_one_vs_all(&raw), Err(Error::State(_))));
    }

    #[test]
    fn encode_dense_codes() {
        let raw = raw_from("c,class\nx,pos\ny,neg\nx,?\n");
        let table = encode(&raw).unwrap();
        assert_eq!(table.column(0), &[0, 1, 0]);
        assert_eq!(table.labels(), &[Some(ClassLabel::Positive), Some(ClassLabel::Negative), None]);
        assert_eq!(table.category(0, 1), "y");
    }

    #[test]
    fn encode_numeric_codes_keep_order() {
        let raw = raw_from("c,class\n10,pos\n2,neg\n1,pos\n");
        assert_eq!(encode(&raw).unwrap().column(0), &[2, 1, 0]);
    }

    #[test]
    fn encode_empty_table() {
        let table = encode(&raw_from("a,b,class\n")).unwrap();
        assert_eq!(table.n_rows(), 0);
        assert_eq!(table.n_attributes(), 2);
    }

    #[test]
    fn encode_is_row_order_invariant_as_multiset() {
        let a = encode(&raw_from("c,class\nx,pos\ny,pos\ny,neg\n")).unwrap();
        let b = encode(&raw_from("c,class\ny,neg\ny,pos\nx,pos\n")).unwrap();
        let mut ca = a.column(0).to_vec();
        let mut cb = b.column(0).to_vec();
        ca.sort();
        cb.sort();
        assert_eq!(ca, cb);
    }

    #[test]
    fn encode_rejects_non_binary() {
        assert!(matches!(encode(&raw_from("c,class\nx,a\n")), Err(Error::State(_))));
    }

    #[test]
    fn prior_from_ground_truth() {
        use ClassLabel::*;
        let table = DecisionTable::from_codes(&[vec![0], vec![1]], vec![Some(Positive), Some(Negative)]).unwrap();
        let p = prior_positive_probability(&table, Some(&[Positive, Negative])).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(prior_positive_probability(&table, Some(&[Positive, Positive])).unwrap(), 1.0);
        assert!(matches!(prior_positive_probability(&table, None), Err(Error::Config(_))));
    }

    #[test]
    fn resolve_prior_prefers_external() {
        use ClassLabel::*;
        let partial = DecisionTable::from_codes(&[vec![0], vec![1]], vec![Some(Positive), None]).unwrap();
        assert_eq!(resolve_prior(&partial, Some(0.3)).unwrap(), 0.3);
        assert!(resolve_prior(&partial, None).unwrap_err().is_configuration());
    }

    #[test]
    fn from_rows_reencodes_densely() {
        let t = DecisionTable::from_codes(&[vec![5, 0], vec![9, 0], vec![5, 0]], vec![None; 3]).unwrap();
        assert_eq!(t.column(0), &[0, 1, 0]);
        assert_eq!(t.cardinality(0), 2);
        assert_eq!(t.cardinality(1), 1);
    }
}
