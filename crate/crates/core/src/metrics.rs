//! One-vs-rest ranking metrics (ROC AUC, average precision) and
//! confusion-matrix metrics (precision, recall, F1).
//!
//! Macro averages are unweighted means over classes. Micro AUC/AP pool every
//! (sample, class) pair into one binary problem.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, check_index, RaclError, Result};

/// Per-class scores plus their mean over computable classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrMetric {
    /// `None` for classes absent from the labels (or present everywhere).
    pub per_class: Vec<Option<f64>>,
    pub macro_avg: f64,
    pub excluded: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassPrf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBreakdown {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub auc: Option<f64>,
    pub ap: Option<f64>,
}

/// Full evaluation surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub ap_macro: f64,
    pub auc_macro: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub ap_micro: f64,
    pub auc_micro: f64,
    pub accuracy: f64,
    pub num_samples: usize,
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassBreakdown>,
    pub warnings: Vec<String>,
}

/// Positions sorted by descending score, grouped into runs of equal score.
fn tie_groups(scores: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if scores[g[0]] == scores[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Binary ROC AUC from tie-averaged ranks. `None` when either class is empty.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    // Ascending ranks: walk descending groups and assign from the top.
    let n = scores.len();
    let mut rank_sum_pos = 0.0;
    let mut seen = 0usize;
    for group in tie_groups(scores) {
        let hi = (n - seen) as f64;
        let lo = (n - seen - group.len() + 1) as f64;
        let avg = 0.5 * (hi + lo);
        rank_sum_pos += avg * group.iter().filter(|&&i| positive[i]).count() as f64;
        seen += group.len();
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Step-wise average precision `Σ (R_k − R_{k−1}) P_k`, one step per
/// distinct score threshold. `None` when there are no positives.
pub fn binary_average_precision(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|p| **p).count();
    if n_pos == 0 {
        return None;
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for group in tie_groups(scores) {
        let pos = group.iter().filter(|&&i| positive[i]).count();
        tp += pos;
        fp += group.len() - pos;
        if pos > 0 {
            let recall = tp as f64 / n_pos as f64;
            let precision = tp as f64 / (tp + fp) as f64;
            ap += (recall - prev_recall) * precision;
            prev_recall = recall;
        }
    }
    Some(ap)
}

fn validate_scores(scores: &[Vec<f64>], labels: &[usize]) -> Result<usize> {
    if scores.is_empty() {
        return Err(RaclError::InvalidInput("no samples to score".into()));
    }
    check_dims(scores.len(), labels.len())?;
    let k = scores[0].len();
    for row in scores {
        check_dims(k, row.len())?;
        if row.iter().any(|v| v.is_nan()) {
            return Err(RaclError::InvalidInput("scores contain NaN".into()));
        }
    }
    for &y in labels {
        check_index(y, k)?;
    }
    Ok(k)
}

fn ovr(
    scores: &[Vec<f64>],
    labels: &[usize],
    metric: fn(&[f64], &[bool]) -> Option<f64>,
) -> Result<OvrMetric> {
    let k = validate_scores(scores, labels)?;
    let per_class: Vec<Option<f64>> = (0..k)
        .map(|c| {
            let col: Vec<f64> = scores.iter().map(|r| r[c]).collect();
            let pos: Vec<bool> = labels.iter().map(|&y| y == c).collect();
            metric(&col, &pos)
        })
        .collect();
    let computed: Vec<f64> = per_class.iter().flatten().copied().collect();
    if computed.is_empty() {
        return Err(RaclError::InvalidInput(
            "no class has both positive and negative samples".into(),
        ));
    }
    let excluded = (0..k).filter(|&c| per_class[c].is_none()).collect();
    let macro_avg = computed.iter().sum::<f64>() / computed.len() as f64;
    Ok(OvrMetric { per_class, macro_avg, excluded })
}

pub fn roc_auc_ovr(scores: &[Vec<f64>], labels: &[usize]) -> Result<OvrMetric> {
    ovr(scores, labels, binary_auc)
}

pub fn average_precision_ovr(scores: &[Vec<f64>], labels: &[usize]) -> Result<OvrMetric> {
    // A class with only positives has a well-defined AP of 1, but it is
    // excluded for symmetry with AUC.
    ovr(scores, labels, |s, p| {
        if p.iter().all(|v| *v) {
            None
        } else {
            binary_average_precision(s, p)
        }
    })
}

fn pooled(scores: &[Vec<f64>], labels: &[usize]) -> (Vec<f64>, Vec<bool>) {
    let mut s = Vec::with_capacity(scores.len() * scores[0].len());
    let mut p = Vec::with_capacity(s.capacity());
    for (row, &y) in scores.iter().zip(labels) {
        for (c, &v) in row.iter().enumerate() {
            s.push(v);
            p.push(c == y);
        }
    }
    (s, p)
}

pub fn roc_auc_micro(scores: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    validate_scores(scores, labels)?;
    let (s, p) = pooled(scores, labels);
    binary_auc(&s, &p).ok_or_else(|| RaclError::InvalidInput("degenerate labels".into()))
}

pub fn average_precision_micro(scores: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    validate_scores(scores, labels)?;
    let (s, p) = pooled(scores, labels);
    binary_average_precision(&s, &p).ok_or_else(|| RaclError::InvalidInput("degenerate labels".into()))
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Precision, recall and F1 per class with `0` for empty denominators.
pub fn classification_report(
    predictions: &[usize],
    labels: &[usize],
    num_classes: usize,
) -> Result<ClassificationReport> {
    check_dims(labels.len(), predictions.len())?;
    if labels.is_empty() {
        return Err(RaclError::InvalidInput("no samples".into()));
    }
    let mut confusion = vec![vec![0usize; num_classes]; num_classes];
    for (&p, &y) in predictions.iter().zip(labels) {
        check_index(p, num_classes)?;
        check_index(y, num_classes)?;
        confusion[y][p] += 1;
    }
    let mut warnings = Vec::new();
    let per_class: Vec<ClassPrf> = (0..num_classes)
        .map(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted).unwrap_or_else(|| {
                warnings.push(format!("class {c}: no predictions, precision set to 0"));
                0.0
            });
            let recall = ratio(tp, support).unwrap_or_else(|| {
                warnings.push(format!("class {c}: no true samples, recall set to 0"));
                0.0
            });
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassPrf { precision, recall, f1, support }
        })
        .collect();
    let k = num_classes as f64;
    let correct: usize = (0..num_classes).map(|c| confusion[c][c]).sum();
    Ok(ClassificationReport {
        precision_macro: per_class.iter().map(|m| m.precision).sum::<f64>() / k,
        recall_macro: per_class.iter().map(|m| m.recall).sum::<f64>() / k,
        f1_macro: per_class.iter().map(|m| m.f1).sum::<f64>() / k,
        accuracy: correct as f64 / labels.len() as f64,
        confusion,
        per_class,
        warnings,
    })
}

/// All metrics from class-probability scores; predictions are the argmax.
pub fn evaluate_scores(scores: &[Vec<f64>], labels: &[usize]) -> Result<EvalResult> {
    let k = validate_scores(scores, labels)?;
    let predictions: Vec<usize> = scores.iter().map(|r| crate::prob::argmax(r)).collect();
    let report = classification_report(&predictions, labels, k)?;
    let auc = roc_auc_ovr(scores, labels)?;
    let ap = average_precision_ovr(scores, labels)?;
    let mut warnings = report.warnings.clone();
    for &c in &auc.excluded {
        warnings.push(format!("class {c}: AUC/AP not computable, excluded from macro mean"));
    }
    let per_class = report
        .per_class
        .iter()
        .enumerate()
        .map(|(c, m)| ClassBreakdown {
            class: c,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            support: m.support,
            auc: auc.per_class[c],
            ap: ap.per_class[c],
        })
        .collect();
    Ok(EvalResult {
        ap_macro: ap.macro_avg,
        auc_macro: auc.macro_avg,
        precision_macro: report.precision_macro,
        recall_macro: report.recall_macro,
        f1_macro: report.f1_macro,
        ap_micro: average_precision_micro(scores, labels)?,
        auc_micro: roc_auc_micro(scores, labels)?,
        accuracy: report.accuracy,
        num_samples: labels.len(),
        confusion: report.confusion,
        per_class,
        warnings,
    })
}
