//! Report structure, its JSON form on disk, and the aligned text table
//! printed for humans.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Aggregated retrieval quality over one set of queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    /// Recall at each requested cutoff, keyed by k.
    pub recall_at: BTreeMap<u32, f64>,
    pub mean_rank: f64,
    pub median_rank: f64,
    /// Queries per repetition.
    pub n_queries: u64,
}

/// One query's outcome, kept so results stay inspectable per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRank {
    pub segment_id: String,
    pub rep: u32,
    pub best_positive_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    /// Identifier of the encoder that scored the run, or "random".
    pub encoder: String,
    /// Sampling seed for runs that draw questions or permutations.
    pub seed: Option<u64>,
    pub reps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub metrics: MetricsSummary,
    pub per_segment: Vec<SegmentRank>,
    pub metadata: ReportMetadata,
}

/// Mean of per-repetition summaries, field by field. The median column
/// becomes the average of per-rep medians.
pub fn average_summaries(summaries: &[MetricsSummary]) -> Result<MetricsSummary, EvalError> {
    if summaries.is_empty() {
        return Err(EvalError::EmptyRanks);
    }
    let n = summaries.len() as f64;
    let mut recall_at = BTreeMap::new();
    for &k in summaries[0].recall_at.keys() {
        let sum: f64 = summaries.iter().filter_map(|s| s.recall_at.get(&k)).sum();
        recall_at.insert(k, sum / n);
    }
    Ok(MetricsSummary {
        recall_at,
        mean_rank: summaries.iter().map(|s| s.mean_rank).sum::<f64>() / n,
        median_rank: summaries.iter().map(|s| s.median_rank).sum::<f64>() / n,
        n_queries: summaries[0].n_queries,
    })
}

pub fn save_report(path: impl AsRef<Path>, report: &MetricsReport) -> Result<(), EvalError> {
    let path = path.as_ref();
    let mut json = serde_json::to_string_pretty(report).map_err(|e| EvalError::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    json.push('\n');
    fs::write(path, json).map_err(|e| EvalError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn load_report(path: impl AsRef<Path>) -> Result<MetricsReport, EvalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| EvalError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| EvalError::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Columns the text table can show.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableColumn {
    Recall(u32),
    MeanRank,
    MedianRank,
}

impl TableColumn {
    fn header(self) -> String {
        match self {
            TableColumn::Recall(k) => format!("R@{k}"),
            TableColumn::MeanRank => "MeanR".into(),
            TableColumn::MedianRank => "MedianR".into(),
        }
    }

    fn cell(self, summary: &MetricsSummary) -> String {
        match self {
            TableColumn::Recall(k) => summary
                .recall_at
                .get(&k)
                .map_or_else(|| "-".into(), |v| format!("{v:.4}")),
            TableColumn::MeanRank => format!("{:.2}", summary.mean_rank),
            TableColumn::MedianRank => format!("{:.2}", summary.median_rank),
        }
    }
}

/// Render labelled summaries as a column-aligned table: label left-aligned,
/// numbers right-aligned under their headers.
pub fn render_table(rows: &[(String, MetricsSummary)], columns: &[TableColumn]) -> String {
    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    let headers: Vec<String> = columns.iter().map(|c| c.header()).collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(_, s)| columns.iter().map(|c| c.cell(s)).collect())
        .collect();
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| {
            cells
                .iter()
                .map(|row| row[i].len())
                .chain(std::iter::once(h.len()))
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    out.push_str(&" ".repeat(label_width));
    for (h, &w) in headers.iter().zip(&widths) {
        out.push_str("  ");
        out.push_str(&format!("{h:>w$}"));
    }
    out.push('\n');
    for ((label, _), row) in rows.iter().zip(&cells) {
        out.push_str(&format!("{label:<label_width$}"));
        for (cell, &w) in row.iter().zip(&widths) {
            out.push_str("  ");
            out.push_str(&format!("{cell:>w$}"));
        }
        out.push('\n');
    }
    out
}
