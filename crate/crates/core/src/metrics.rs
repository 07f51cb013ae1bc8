//! Single-label (Accuracy, F1, ROC-AUC) and multi-label (AP, HL, OE, RL,
//! CV) evaluation metrics.
//!
//! Ranking conventions: rank 1 is the highest score and equal scores are
//! ranked by lower label index first. Ranking loss counts a relevant label
//! scoring no higher than an irrelevant one as an error, so ties count.
//! Instances without relevant labels (and, for RL, without irrelevant ones)
//! are skipped and the skip count is reported.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    F1,
    RocAuc,
    #[serde(rename = "ap")]
    AveragePrecision,
    #[serde(rename = "hl")]
    HammingLoss,
    #[serde(rename = "oe")]
    OneError,
    #[serde(rename = "rl")]
    RankingLoss,
    #[serde(rename = "cv")]
    Coverage,
}

impl Metric {
    pub const SINGLE: [Metric; 3] = [Metric::Accuracy, Metric::F1, Metric::RocAuc];
    pub const MULTI: [Metric; 5] = [
        Metric::AveragePrecision,
        Metric::HammingLoss,
        Metric::OneError,
        Metric::RankingLoss,
        Metric::Coverage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::F1 => "f1",
            Metric::RocAuc => "roc_auc",
            Metric::AveragePrecision => "ap",
            Metric::HammingLoss => "hl",
            Metric::OneError => "oe",
            Metric::RankingLoss => "rl",
            Metric::Coverage => "cv",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(
            self,
            Metric::Accuracy | Metric::F1 | Metric::RocAuc | Metric::AveragePrecision
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::SINGLE
            .iter()
            .chain(Metric::MULTI.iter())
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Average {
    /// F1 of class 1 against the rest (two-class problems).
    Binary,
    /// Unweighted mean of per-class F1.
    Macro,
}

/// Value of a ranking metric plus the number of instances it left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingScore {
    pub value: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("prediction length {a} vs truth length {b}")));
    }
    if a == 0 {
        return Err(Error::EmptyInput("metric input"));
    }
    Ok(())
}

fn check_shapes<A, B>(a: &ArrayView2<'_, A>, b: &ArrayView2<'_, B>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("shape {:?} vs {:?}", a.dim(), b.dim())));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("metric input"));
    }
    Ok(())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

fn class_f1(pred: &[usize], truth: &[usize], class: usize) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p == class, t == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    let den = 2 * tp + fp + fn_;
    if den == 0 {
        0.0
    } else {
        2.0 * tp as f64 / den as f64
    }
}

pub fn f1(pred: &[usize], truth: &[usize], n_classes: usize, averaging: F1Average) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    match averaging {
        F1Average::Binary => Ok(class_f1(pred, truth, 1)),
        F1Average::Macro => {
            if n_classes == 0 {
                return Err(Error::InvalidParameter("macro F1 needs at least one class".into()));
            }
            Ok((0..n_classes).map(|c| class_f1(pred, truth, c)).sum::<f64>() / n_classes as f64)
        }
    }
}

/// Binary for two classes, macro otherwise.
pub fn default_f1_average(n_classes: usize) -> F1Average {
    if n_classes == 2 {
        F1Average::Binary
    } else {
        F1Average::Macro
    }
}

/// Rank-based (Mann–Whitney) AUC; tied positive/negative pairs count ½.
pub fn roc_auc(scores: &[f64], truth: &[bool]) -> Result<f64> {
    check_lengths(scores.len(), truth.len())?;
    let positives = truth.iter().filter(|&&t| t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Undefined("ROC-AUC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks over tie groups
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end) as f64 / 2.0 + 1.0;
        rank_sum += order[start..=end].iter().filter(|&&i| truth[i]).count() as f64 * midrank;
        start = end + 1;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// Class-1 AUC for two classes, macro one-vs-rest otherwise. Classes absent
/// from (or covering all of) `truth` are left out of the average; `None` when
/// no class is usable.
pub fn roc_auc_multiclass(scores: ArrayView2<'_, f64>, truth: &[usize]) -> Result<Option<f64>> {
    check_lengths(scores.nrows(), truth.len())?;
    let n_classes = scores.ncols();
    let classes: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
    let mut values = Vec::new();
    for c in classes {
        let column: Vec<f64> = scores.column(c).to_vec();
        let is_c: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        match roc_auc(&column, &is_c) {
            Ok(v) => values.push(v),
            Err(Error::Undefined(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if values.is_empty() {
        Ok(None)
    } else {
        Ok(Some(values.iter().sum::<f64>() / values.len() as f64))
    }
}

pub fn hamming_loss(pred: ArrayView2<'_, u8>, truth: ArrayView2<'_, u8>) -> Result<f64> {
    check_shapes(&pred, &truth)?;
    let wrong = pred.iter().zip(truth.iter()).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / pred.len() as f64)
}

/// 1-based rank of every label in a score row.
pub fn label_ranks(scores: ArrayView1<'_, f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; scores.len()];
    for (pos, &label) in order.iter().enumerate() {
        ranks[label] = pos + 1;
    }
    ranks
}

fn per_instance<F>(
    scores: ArrayView2<'_, f64>,
    truth: ArrayView2<'_, u8>,
    need_irrelevant: bool,
    mut f: F,
) -> Result<RankingScore>
where
    F: FnMut(ArrayView1<'_, f64>, &[usize], &[bool]) -> f64,
{
    check_shapes(&scores, &truth)?;
    let (mut total, mut evaluated, mut skipped) = (0.0, 0usize, 0usize);
    for (s, t) in scores.rows().into_iter().zip(truth.rows()) {
        let relevant: Vec<bool> = t.iter().map(|&v| v != 0).collect();
        let n_rel = relevant.iter().filter(|&&r| r).count();
        if n_rel == 0 || (need_irrelevant && n_rel == relevant.len()) {
            skipped += 1;
            continue;
        }
        total += f(s, &label_ranks(s), &relevant);
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(Error::Undefined("every instance was skipped".into()));
    }
    Ok(RankingScore {
        value: total / evaluated as f64,
        evaluated,
        skipped,
    })
}

pub fn average_precision(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, u8>) -> Result<RankingScore> {
    per_instance(scores, truth, false, |_, ranks, relevant| {
        let rel_ranks: Vec<usize> = (0..ranks.len()).filter(|&l| relevant[l]).map(|l| ranks[l]).collect();
        let sum: f64 = rel_ranks
            .iter()
            .map(|&r| rel_ranks.iter().filter(|&&r2| r2 <= r).count() as f64 / r as f64)
            .sum();
        sum / rel_ranks.len() as f64
    })
}

pub fn one_error(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, u8>) -> Result<RankingScore> {
    per_instance(scores, truth, false, |_, ranks, relevant| {
        let top = ranks.iter().position(|&r| r == 1).unwrap_or(0);
        if relevant[top] {
            0.0
        } else {
            1.0
        }
    })
}

pub fn ranking_loss(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, u8>) -> Result<RankingScore> {
    per_instance(scores, truth, true, |s, _, relevant| {
        let (mut bad, mut pairs) = (0usize, 0usize);
        for (i, &ri) in relevant.iter().enumerate() {
            if !ri {
                continue;
            }
            for (j, &rj) in relevant.iter().enumerate() {
                if rj {
                    continue;
                }
                pairs += 1;
                if s[i] <= s[j] {
                    bad += 1;
                }
            }
        }
        bad as f64 / pairs as f64
    })
}

/// Mean of (worst rank among relevant labels − 1); lies in [0, L−1].
pub fn coverage(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, u8>) -> Result<RankingScore> {
    per_instance(scores, truth, false, |_, ranks, relevant| {
        let worst = (0..ranks.len()).filter(|&l| relevant[l]).map(|l| ranks[l]).max().unwrap_or(1);
        (worst - 1) as f64
    })
}

/// Metric values of one evaluation, plus bookkeeping of anything undefined
/// or skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub values: BTreeMap<Metric, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub skipped: BTreeMap<Metric, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<Metric>,
}

impl Evaluation {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        self.values.get(&metric).copied()
    }
}

pub fn evaluate_single(pred: &[usize], scores: ArrayView2<'_, f64>, truth: &[usize]) -> Result<Evaluation> {
    let n_classes = scores.ncols();
    let mut eval = Evaluation::default();
    eval.values.insert(Metric::Accuracy, accuracy(pred, truth)?);
    eval.values
        .insert(Metric::F1, f1(pred, truth, n_classes, default_f1_average(n_classes))?);
    match roc_auc_multiclass(scores, truth)? {
        Some(v) => {
            eval.values.insert(Metric::RocAuc, v);
        }
        None => eval.undefined.push(Metric::RocAuc),
    }
    Ok(eval)
}

type RankingMetric = fn(ArrayView2<'_, f64>, ArrayView2<'_, u8>) -> Result<RankingScore>;

pub fn evaluate_multi(
    pred: ArrayView2<'_, u8>,
    scores: ArrayView2<'_, f64>,
    truth: ArrayView2<'_, u8>,
) -> Result<Evaluation> {
    let mut eval = Evaluation::default();
    eval.values.insert(Metric::HammingLoss, hamming_loss(pred, truth)?);
    let ranked: [(Metric, RankingMetric); 4] = [
        (Metric::AveragePrecision, average_precision),
        (Metric::OneError, one_error),
        (Metric::RankingLoss, ranking_loss),
        (Metric::Coverage, coverage),
    ];
    for (metric, f) in ranked {
        match f(scores, truth) {
            Ok(r) => {
                eval.values.insert(metric, r.value);
                if r.skipped > 0 {
                    eval.skipped.insert(metric, r.skipped);
                }
            }
            Err(Error::Undefined(_)) => eval.undefined.push(metric),
            Err(e) => return Err(e),
        }
    }
    Ok(eval)
}

/// Arithmetic mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}
