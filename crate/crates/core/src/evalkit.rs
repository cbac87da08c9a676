//! Confusion counts per component class, accuracy, and the SSE statistic.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::detect::{iou, ComponentClass, Detection};
use crate::error::{Error, Result};

pub const DEFAULT_MATCH_IOU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: ComponentClass,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ClassStats {
    pub fn new(class: ComponentClass, tp: u64, fp: u64, fn_: u64) -> Self {
        Self { class, tp, fp, fn_ }
    }

    pub fn empty(class: ComponentClass) -> Self {
        Self::new(class, 0, 0, 0)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_
    }
}

impl AddAssign for ClassStats {
    fn add_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.class, rhs.class);
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

impl Add for ClassStats {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

/// Greedy one-to-one matching within each class.
///
/// Predictions are visited by descending confidence (ties keep input order);
/// each claims the still-unmatched truth box of its class with the highest
/// IoU, provided that IoU is `>= iou_threshold` (ties go to the earlier
/// truth). Claims are true positives, leftover predictions false positives,
/// leftover truths false negatives. One row per class present in either
/// list, in class-id order.
pub fn match_predictions(predicted: &[Detection], truth: &[Detection], iou_threshold: f64) -> Vec<ClassStats> {
    let mut rows = Vec::new();
    for class in ComponentClass::ALL {
        let mut preds: Vec<&Detection> = predicted.iter().filter(|d| d.class == class).collect();
        let gts: Vec<&Detection> = truth.iter().filter(|d| d.class == class).collect();
        if preds.is_empty() && gts.is_empty() {
            continue;
        }
        preds.sort_by(|a, b| b.confidence.partial_cmp(&a.confidence).unwrap_or(Ordering::Equal));

        let mut claimed = vec![false; gts.len()];
        let mut tp = 0;
        for p in &preds {
            let mut best: Option<(usize, f64)> = None;
            for (j, g) in gts.iter().enumerate() {
                if claimed[j] {
                    continue;
                }
                let v = iou(&p.bbox, &g.bbox);
                if v >= iou_threshold && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                claimed[j] = true;
                tp += 1;
            }
        }
        rows.push(ClassStats::new(
            class,
            tp,
            preds.len() as u64 - tp,
            gts.len() as u64 - tp,
        ));
    }
    rows
}

/// Merge rows from several images, keeping class-id order.
pub fn merge_stats<I>(rows: I) -> Vec<ClassStats>
where
    I: IntoIterator<Item = ClassStats>,
{
    let mut acc: Vec<Option<ClassStats>> = vec![None; ComponentClass::ALL.len()];
    for r in rows {
        let slot = &mut acc[r.class.id() as usize];
        *slot = Some(slot.map_or(r, |s| s + r));
    }
    acc.into_iter().flatten().collect()
}

/// `100 * tp / (tp + fp + fn)`, truncated to two decimals
/// (105 of 127 reads 82.67).
pub fn class_accuracy(stats: &ClassStats) -> Result<f64> {
    accuracy(stats.tp, stats.total())
}

fn accuracy(tp: u64, total: u64) -> Result<f64> {
    if total == 0 {
        return Err(Error::UndefinedAccuracy);
    }
    // floor in integer hundredths
    let hundredths = u128::from(tp) * 10_000 / u128::from(total);
    Ok(hundredths as f64 / 100.0)
}

/// A non-empty series of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    values: Vec<f64>,
    mean: f64,
}

impl SampleSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("series needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("series values must be finite".into()));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self { values, mean })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

/// Sum of squared deviations from the mean.
pub fn sse(series: &SampleSeries) -> f64 {
    let m = series.mean;
    series.values.iter().map(|x| (x - m) * (x - m)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub class: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub total: u64,
    /// Percentage at two decimals; `None` when the row is all zeros.
    pub accuracy: Option<f64>,
}

impl EvalRow {
    fn from_counts(class: String, tp: u64, fp: u64, fn_: u64) -> Self {
        let total = tp + fp + fn_;
        Self {
            class,
            tp,
            fp,
            fn_,
            total,
            accuracy: accuracy(tp, total).ok(),
        }
    }
}

/// Table of per-class rows plus an aggregate row.
///
/// The aggregate accuracy is `Σtp / Σtotal` over all classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub rows: Vec<EvalRow>,
    pub aggregate: EvalRow,
}

impl EvalReport {
    pub fn from_stats(stats: &[ClassStats], iou_threshold: f64) -> Self {
        let rows = stats
            .iter()
            .map(|s| EvalRow::from_counts(s.class.to_string(), s.tp, s.fp, s.fn_))
            .collect();
        let (tp, fp, fn_) = stats
            .iter()
            .fold((0, 0, 0), |(a, b, c), s| (a + s.tp, b + s.fp, c + s.fn_));
        Self {
            iou_threshold,
            rows,
            aggregate: EvalRow::from_counts("all".into(), tp, fp, fn_),
        }
    }

    /// Plain-text table in the layout `Components TP FP FN Total Accuracy`.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<12}{:>8}{:>8}{:>8}{:>8}{:>11}\n",
            "Components", "TP", "FP", "FN", "Total", "Accuracy"
        );
        for r in self.rows.iter().chain(std::iter::once(&self.aggregate)) {
            let acc = r.accuracy.map_or_else(|| "-".to_string(), |a| format!("{a:.2}%"));
            out.push_str(&format!(
                "{:<12}{:>8}{:>8}{:>8}{:>8}{:>11}\n",
                r.class, r.tp, r.fp, r.fn_, r.total, acc
            ));
        }
        out
    }
}
