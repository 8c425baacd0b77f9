use super::EvalError;
use crate::pointcloud::{PointCloud, SpatialIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Distance from each point of `a` to its nearest neighbour in `b`.
pub fn c2c_distances(a: &PointCloud, b: &PointCloud) -> Result<Vec<f64>, EvalError> {
    if a.is_empty() {
        return Err(EvalError::EmptyCloud("first"));
    }
    if b.is_empty() {
        return Err(EvalError::EmptyCloud("second"));
    }
    let index = SpatialIndex::build(b.clone())?;
    Ok(c2c_against(a, &index))
}

/// As [`c2c_distances`] with a prebuilt index over the second cloud.
pub fn c2c_against(a: &PointCloud, b: &SpatialIndex) -> Vec<f64> {
    a.points().par_iter().map(|p| b.nearest(p).1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub thresholds_m: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
}

pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn fraction_within(distances: &[f64], tau: f64) -> f64 {
    distances.iter().filter(|&&d| d <= tau).count() as f64 / distances.len() as f64
}

pub fn coverage_metrics(
    reconstructed: &PointCloud,
    truth: &PointCloud,
    thresholds: &[f64],
) -> Result<CoverageReport, EvalError> {
    if thresholds.is_empty() {
        return Err(EvalError::NoThresholds);
    }
    if let Some(&t) = thresholds.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(EvalError::InvalidThreshold(t));
    }
    let to_truth = c2c_distances(reconstructed, truth)?;
    let to_recon = c2c_distances(truth, reconstructed)?;
    let precision: Vec<f64> = thresholds.iter().map(|&t| fraction_within(&to_truth, t)).collect();
    let recall: Vec<f64> = thresholds.iter().map(|&t| fraction_within(&to_recon, t)).collect();
    let f1 = precision.iter().zip(&recall).map(|(&p, &r)| f1_score(p, r)).collect();
    Ok(CoverageReport { thresholds_m: thresholds.to_vec(), precision, recall, f1 })
}

impl CoverageReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

fn threshold_label(t: f64) -> String {
    let cm = t * 100.0;
    if (cm - cm.round()).abs() < 1e-9 {
        format!("{}cm", cm.round())
    } else {
        format!("{}m", t)
    }
}

/// Text table with one row per method and percentage columns grouped by
/// metric, then threshold. All reports must share the same thresholds.
pub fn format_table(rows: &[(&str, &CoverageReport)]) -> String {
    let Some((_, first)) = rows.first() else {
        return String::new();
    };
    let labels: Vec<String> = first.thresholds_m.iter().map(|&t| threshold_label(t)).collect();
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("Method".len());
    let col_w = labels.iter().map(|l| l.len()).max().unwrap_or(0).max(6);
    let group_w = labels.len() * (col_w + 1) - 1;

    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "");
    for metric in ["Precision (%)", "Recall (%)", "F1-Score (%)"] {
        let _ = write!(out, " | {:^group_w$}", metric);
    }
    out.push('\n');
    let _ = write!(out, "{:<name_w$}", "Method");
    for _ in 0..3 {
        out.push_str(" |");
        for l in &labels {
            let _ = write!(out, " {:>col_w$}", l);
        }
    }
    out.push('\n');
    out.push_str(&"-".repeat(name_w + 3 * (group_w + 3)));
    out.push('\n');
    for (name, report) in rows {
        let _ = write!(out, "{:<name_w$}", name);
        for values in [&report.precision, &report.recall, &report.f1] {
            out.push_str(" |");
            for v in values.iter() {
                let _ = write!(out, " {:>col_w$.2}", v * 100.0);
            }
        }
        out.push('\n');
    }
    out
}
