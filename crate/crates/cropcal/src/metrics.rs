//! Error metrics for trajectory comparison and nonparametric tests for
//! run-level RMSE samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::core::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
    pub correlation: f64,
}

impl MetricReport {
    pub fn compute(y: &[f64], yhat: &[f64]) -> Result<Self> {
        Ok(Self {
            mse: mse(y, yhat)?,
            mae: mae(y, yhat)?,
            rmse: rmse(y, yhat)?,
            correlation: pearson_correlation(y, yhat)?,
        })
    }
}

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Empty("metric input".into()));
    }
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            actual: yhat.len(),
        });
    }
    Ok(())
}

pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
}

pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    Ok(mse(y, yhat)?.sqrt())
}

pub fn pearson_correlation(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    if y.len() < 2 {
        return Err(Error::Config("correlation needs at least two points".into()));
    }
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mx = yhat.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vy = 0.0;
    let mut vx = 0.0;
    for (a, b) in y.iter().zip(yhat) {
        cov += (a - my) * (b - mx);
        vy += (a - my).powi(2);
        vx += (b - mx).powi(2);
    }
    if vy == 0.0 || vx == 0.0 {
        return Err(Error::ZeroVariance("correlation input".into()));
    }
    Ok((cov / (vy * vx).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Midranks of the values (average rank across ties), 1-based.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn tie_correction(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut correction = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        correction += t * t * t - t;
        i = j + 1;
    }
    correction
}

fn two_sided_normal_p(z: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0)
}

const EXACT_RANK_SUM_LIMIT: usize = 12;

/// Mann-Whitney U test on two independent samples; the statistic is U for
/// the first sample. Exact enumeration for small inputs, tie-corrected
/// normal approximation otherwise. Two-sided.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("rank-sum sample".into()));
    }
    let n = a.len();
    let m = b.len();
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&combined);
    let rank_sum_a: f64 = ranks[..n].iter().sum();
    let u = rank_sum_a - (n * (n + 1)) as f64 / 2.0;

    let p_value = if n + m <= EXACT_RANK_SUM_LIMIT {
        exact_rank_sum_p(&ranks, n, u)
    } else {
        let nm = (n * m) as f64;
        let total = (n + m) as f64;
        let mu = nm / 2.0;
        let variance =
            nm / 12.0 * (total + 1.0 - tie_correction(&combined) / (total * (total - 1.0)));
        if variance == 0.0 {
            1.0
        } else {
            let shift = (u - mu).abs() - 0.5;
            two_sided_normal_p(shift.max(0.0) / variance.sqrt())
        }
    };
    Ok(TestResult { statistic: u, p_value })
}

/// Enumerate every assignment of n of the pooled ranks to the first sample
/// and take the two-sided tail probability of the observed U.
fn exact_rank_sum_p(ranks: &[f64], n: usize, u_observed: f64) -> f64 {
    let total = ranks.len();
    let offset = (n * (n + 1)) as f64 / 2.0;
    let mut le = 0u64;
    let mut ge = 0u64;
    let mut count = 0u64;
    enumerate_subsets(ranks, n, 0, 0.0, &mut |rank_sum| {
        let u = rank_sum - offset;
        count += 1;
        if u <= u_observed + 1e-9 {
            le += 1;
        }
        if u >= u_observed - 1e-9 {
            ge += 1;
        }
    });
    debug_assert!(total >= n);
    let tail = (le.min(ge) as f64) / count as f64;
    (2.0 * tail).min(1.0)
}

fn enumerate_subsets(
    ranks: &[f64],
    remaining: usize,
    start: usize,
    sum: f64,
    visit: &mut impl FnMut(f64),
) {
    if remaining == 0 {
        visit(sum);
        return;
    }
    for i in start..=ranks.len() - remaining {
        enumerate_subsets(ranks, remaining - 1, i + 1, sum + ranks[i], visit);
    }
}

const EXACT_SIGNED_RANK_LIMIT: usize = 25;

/// Paired Wilcoxon signed-rank test; the statistic is the smaller of the
/// positive and negative rank sums. Zero differences are dropped. Exact
/// distribution for up to 25 nonzero pairs, normal approximation beyond.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Ok(TestResult { statistic: 0.0, p_value: 1.0 });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let n = diffs.len();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w = w_plus.min(total - w_plus);

    let p_value = if n <= EXACT_SIGNED_RANK_LIMIT {
        exact_signed_rank_p(&ranks, w_plus)
    } else {
        let mu = total / 2.0;
        let variance = (n * (n + 1) * (2 * n + 1)) as f64 / 24.0
            - tie_correction(&abs) / 48.0;
        if variance == 0.0 {
            1.0
        } else {
            let shift = ((w_plus - mu).abs() - 0.5).max(0.0);
            two_sided_normal_p(shift / variance.sqrt())
        }
    };
    Ok(TestResult { statistic: w, p_value })
}

/// Distribution of the positive rank sum over all sign assignments, via
/// half-rank integer convolution (midranks are multiples of 1/2).
fn exact_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max_sum + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max_sum).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total: f64 = counts.iter().sum();
    let observed = (w_plus * 2.0).round() as usize;
    let le: f64 = counts[..=observed.min(max_sum)].iter().sum();
    let ge: f64 = counts[observed.min(max_sum)..].iter().sum();
    (2.0 * le.min(ge) / total).min(1.0)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunSummary {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

/// Mean, median (average of the middle two for even counts), and sample
/// standard deviation (n-1 denominator, zero for a single sample).
pub fn summarize_runs(samples: &[f64]) -> Result<RunSummary> {
    if samples.is_empty() {
        return Err(Error::Empty("run samples".into()));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std = if n < 2 {
        0.0
    } else {
        (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(RunSummary {
        samples: samples.to_vec(),
        mean,
        median,
        std,
    })
}
