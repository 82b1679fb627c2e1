//! Ranking metrics, repetition aggregation and the statistics used to
//! compare score distributions.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Scores with binary labels; `true` marks the positive (anomaly) class and
/// higher scores mean "more anomalous".
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Metric(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::Metric("scores contain NaN".into()));
        }
        let positives = labels.iter().filter(|l| **l).count();
        if positives == 0 || positives == labels.len() {
            return Err(Error::Metric(
                "both classes must be present to compute an AUC".into(),
            ));
        }
        Ok(Self { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    fn counts(&self) -> (usize, usize) {
        let p = self.labels.iter().filter(|l| **l).count();
        (p, self.labels.len() - p)
    }

    /// Indices sorted by score, ascending.
    fn ascending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[a].total_cmp(&self.scores[b]));
        idx
    }
}

/// Mann-Whitney form: `P(pos > neg) + 0.5 P(tie)`, using average ranks for
/// ties. The numerator is accumulated in integers so the result is exact up
/// to the final division.
pub fn roc_auc(s: &ScoredSet) -> f64 {
    let (p, n) = s.counts();
    let order = s.ascending();
    // sum over positives of twice their (average) 1-based rank
    let mut doubled_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let v = s.scores[order[start]];
        let mut end = start;
        while end < order.len() && s.scores[order[end]] == v {
            end += 1;
        }
        let pos_in_block = order[start..end].iter().filter(|&&i| s.labels[i]).count() as u128;
        doubled_rank_sum += pos_in_block * (start as u128 + 1 + end as u128);
        start = end;
    }
    let p128 = p as u128;
    let doubled_u = doubled_rank_sum - p128 * (p128 + 1);
    doubled_u as f64 / (2.0 * p as f64 * n as f64)
}

/// Step-wise area under the precision-recall curve: thresholds are visited
/// from the highest score down, tied scores form one threshold, and the area
/// is `sum (R_i - R_{i-1}) * P_i`.
pub fn pr_auc(s: &ScoredSet) -> f64 {
    let (p, _) = s.counts();
    let mut order = s.ascending();
    order.reverse();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    let mut start = 0;
    while start < order.len() {
        let v = s.scores[order[start]];
        let mut end = start;
        while end < order.len() && s.scores[order[end]] == v {
            if s.labels[order[end]] {
                tp += 1;
            } else {
                fp += 1;
            }
            end += 1;
        }
        let recall = tp as f64 / p as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        start = end;
    }
    area
}

/// Quantile with linear interpolation between closest ranks (R type 7).
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Metric("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Metric(format!("quantile level {p} outside [0, 1]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(sorted_quantile(&v, p))
}

fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean after dropping the `trim_each_end` smallest and largest values.
pub fn trimmed_mean(values: &[f64], trim_each_end: usize) -> Result<f64> {
    if values.len() <= 2 * trim_each_end {
        return Err(Error::Metric(format!(
            "cannot trim {trim_each_end} from each end of {} values",
            values.len()
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let kept = &v[trim_each_end..v.len() - trim_each_end];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

impl BoxplotStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Tukey boxplot: whiskers reach the most extreme points within 1.5 IQR of
/// the quartiles; anything beyond is an outlier.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.len() < 4 {
        return Err(Error::Metric(format!(
            "boxplot needs at least 4 values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Metric("boxplot of NaN values".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = sorted_quantile(&v, 0.25);
    let median = sorted_quantile(&v, 0.5);
    let q3 = sorted_quantile(&v, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = |x: &&f64| **x >= lo_fence && **x <= hi_fence;
    let lower_whisker = *v
        .iter()
        .find(inside)
        .expect("quartiles lie inside the fences");
    let upper_whisker = *v
        .iter()
        .rev()
        .find(inside)
        .expect("quartiles lie inside the fences");
    let outliers = v
        .iter()
        .copied()
        .filter(|x| *x < lo_fence || *x > hi_fence)
        .collect();
    Ok(BoxplotStats {
        q1,
        median,
        q3,
        lower_whisker,
        upper_whisker,
        outliers,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonOptions {
    /// Largest nonzero-pair count still handled by exact enumeration.
    pub exact_max_n: usize,
    /// Fewest nonzero pairs accepted.
    pub min_pairs: usize,
}

impl Default for WilcoxonOptions {
    fn default() -> Self {
        Self {
            exact_max_n: 20,
            min_pairs: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub p_value: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub method: WilcoxonMethod,
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_with(a, b, &WilcoxonOptions::default())
}

/// Two-sided Wilcoxon signed-rank test on the differences `a - b`.
///
/// Zero differences are dropped and tied magnitudes share their average
/// rank. Up to `exact_max_n` pairs the p-value is the exact probability,
/// over all equally likely sign assignments, of a statistic at least as
/// extreme. Beyond that a normal approximation with continuity and tie
/// corrections is used.
pub fn wilcoxon_signed_rank_with(
    a: &[f64],
    b: &[f64],
    opts: &WilcoxonOptions,
) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Metric(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::Metric("differences must be finite".into()));
    }
    if diffs.is_empty() {
        return Err(Error::Metric("all paired differences are zero".into()));
    }
    let n = diffs.len();
    if n < opts.min_pairs.max(1) {
        return Err(Error::Metric(format!(
            "{n} nonzero pairs, need at least {}",
            opts.min_pairs
        )));
    }

    let (doubled, tie_sizes) = doubled_ranks(&diffs);
    let total: u64 = doubled.iter().sum();
    let plus: u64 = doubled
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| *r)
        .sum();
    let minus = total - plus;
    let w_doubled = plus.min(minus);
    let statistic = w_doubled as f64 / 2.0;

    let (p_value, method) = if n <= opts.exact_max_n {
        (exact_p_value(&doubled, w_doubled), WilcoxonMethod::Exact)
    } else {
        (
            normal_p_value(n, statistic, &tie_sizes),
            WilcoxonMethod::Normal,
        )
    };
    Ok(WilcoxonResult {
        statistic,
        p_value,
        w_plus: plus as f64 / 2.0,
        w_minus: minus as f64 / 2.0,
        n,
        method,
    })
}

/// Twice the average rank of each `|d|`, plus the size of every tie group.
fn doubled_ranks(diffs: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0u64; diffs.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let v = diffs[order[start]].abs();
        let mut end = start;
        while end < order.len() && diffs[order[end]].abs() == v {
            end += 1;
        }
        for &i in &order[start..end] {
            ranks[i] = (start + 1 + end) as u64;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// `P(min(T, S - T) <= w)` where `T` is the doubled positive-rank sum under
/// uniformly random signs; computed by counting subsets per sum.
fn exact_p_value(doubled: &[u64], w: u64) -> f64 {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s as u64).min(total - *s as u64) <= w)
        .map(|(_, c)| *c)
        .sum();
    extreme as f64 / 2f64.powi(doubled.len() as i32)
}

fn normal_p_value(n: usize, w: f64, tie_sizes: &[usize]) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    let z = ((w - mean + 0.5) / var.sqrt()).min(0.0);
    let std_normal = Normal::standard();
    (2.0 * std_normal.cdf(z)).min(1.0)
}
