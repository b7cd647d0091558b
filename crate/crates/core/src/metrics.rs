//! Goodness measure, summary statistics, histograms and correlation.
//!
//! The goodness measure trades mean solution time against the share of runs
//! that did not finish: `GM = (1 + dnf / nruns) * log10(mean_st_ms)`. Base 10
//! with solution time in milliseconds is the only combination consistent
//! with published GM values under a 30 s cap. Low is good.

use std::collections::BTreeMap;
use std::f64::consts::LN_10;

use rand::Rng;
use thiserror::Error;

use crate::seed::{self, STREAM_BOOTSTRAP};
use crate::simulation::RunResult;

const BOOTSTRAP_RESAMPLES: usize = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("goodness undefined: no run finished")]
    NoSolvedRuns,
    #[error("goodness undefined: mean solution time {0} ms is not positive")]
    NonPositiveTime(f64),
    #[error("invalid counts: dnf {dnf} of {nruns} runs")]
    InvalidCounts { dnf: usize, nruns: usize },
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Goodness(pub f64);

pub fn goodness(mean_st_ms: f64, dnf: usize, nruns: usize) -> Result<Goodness, MetricsError> {
    if nruns == 0 || dnf > nruns {
        return Err(MetricsError::InvalidCounts { dnf, nruns });
    }
    if dnf == nruns {
        return Err(MetricsError::NoSolvedRuns);
    }
    if mean_st_ms.is_nan() || mean_st_ms <= 0.0 {
        return Err(MetricsError::NonPositiveTime(mean_st_ms));
    }
    Ok(Goodness(
        (1.0 + dnf as f64 / nruns as f64) * mean_st_ms.log10(),
    ))
}

/// Delta-method standard error of the goodness measure.
pub fn goodness_se(mean_st_ms: f64, st_sd: f64, solved: usize, dnf: usize, nruns: usize) -> f64 {
    let n = nruns as f64;
    let p = dnf as f64 / n;
    let var_p = p * (1.0 - p) / n;
    let var_m = if solved > 0 {
        st_sd * st_sd / solved as f64
    } else {
        0.0
    };
    let d_p = mean_st_ms.log10();
    let d_m = (1.0 + p) / (mean_st_ms * LN_10);
    (d_p * d_p * var_p + d_m * d_m * var_m).sqrt()
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation (n - 1); zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    match mean(xs) {
        Some(m) if xs.len() > 1 => {
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
        }
        _ => 0.0,
    }
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(xs: &[f64]) -> Option<f64> {
    quantile_sorted(&sorted(xs), 0.5)
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::UndefinedCorrelation(
            "inputs differ in length",
        ));
    }
    if xs.len() < 2 {
        return Err(MetricsError::UndefinedCorrelation("fewer than two points"));
    }
    let mx = mean(xs).unwrap_or_default();
    let my = mean(ys).unwrap_or_default();
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::UndefinedCorrelation("constant input"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Counts per bin, keyed by the bin's lower edge. Empty bins are omitted.
pub fn histogram(st_values: &[u64], bin_ms: u64) -> Vec<(u64, usize)> {
    assert!(bin_ms > 0, "bin width must be positive");
    let mut bins = BTreeMap::new();
    for &v in st_values {
        *bins.entry(v / bin_ms * bin_ms).or_insert(0) += 1;
    }
    bins.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CommStats {
    pub mean: f64,
    pub std_dev: f64,
    pub q1: f64,
    pub q3: f64,
}

impl CommStats {
    fn of(xs: &[f64]) -> Self {
        let s = sorted(xs);
        Self {
            mean: mean(xs).unwrap_or_default(),
            std_dev: std_dev(xs),
            q1: quantile_sorted(&s, 0.25).unwrap_or_default(),
            q3: quantile_sorted(&s, 0.75).unwrap_or_default(),
        }
    }
}

/// Aggregate of a batch of runs. Solution-time statistics use solved runs only.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub nruns: usize,
    pub dnf: usize,
    pub mean_st_ms: Option<f64>,
    pub median_st_ms: Option<f64>,
    pub st_sd_ms: f64,
    pub gm: Option<f64>,
    pub gm_se: Option<f64>,
    /// Bootstrap 95% interval over resampled runs.
    pub gm_ci95: Option<(f64, f64)>,
    pub comm_x: CommStats,
    pub comm_y: CommStats,
    /// Correlation of mean comm% against solution time over solved runs.
    pub pearson_r: Option<f64>,
}

impl Summary {
    /// Mean of both agents' mean communication percentages.
    pub fn comm_pct_total(&self) -> f64 {
        0.5 * (self.comm_x.mean + self.comm_y.mean)
    }
}

fn bootstrap_gm(results: &[RunResult]) -> Option<(f64, f64)> {
    let n = results.len();
    let mut rng = seed::rng(seed::derive(STREAM_BOOTSTRAP, n as u64));
    let mut gms = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let (mut sum, mut solved) = (0.0, 0usize);
        for _ in 0..n {
            let r = &results[rng.random_range(0..n)];
            if let Some(st) = r.st_ms {
                sum += st as f64;
                solved += 1;
            }
        }
        if solved > 0 {
            if let Ok(g) = goodness(sum / solved as f64, n - solved, n) {
                gms.push(g.0);
            }
        }
    }
    if gms.len() < BOOTSTRAP_RESAMPLES / 2 {
        return None;
    }
    let s = sorted(&gms);
    Some((quantile_sorted(&s, 0.025)?, quantile_sorted(&s, 0.975)?))
}

pub fn summarize(results: &[RunResult]) -> Summary {
    let nruns = results.len();
    let solved: Vec<&RunResult> = results.iter().filter(|r| r.solved).collect();
    let st: Vec<f64> = solved
        .iter()
        .filter_map(|r| r.st_ms)
        .map(|v| v as f64)
        .collect();
    let dnf = nruns - solved.len();
    let mean_st_ms = mean(&st);
    let st_sd_ms = std_dev(&st);
    let gm = mean_st_ms
        .and_then(|m| goodness(m, dnf, nruns).ok())
        .map(|g| g.0);
    let gm_se = gm
        .and(mean_st_ms)
        .map(|m| goodness_se(m, st_sd_ms, st.len(), dnf, nruns));
    let comm_x: Vec<f64> = results.iter().map(|r| r.comm_pct_x).collect();
    let comm_y: Vec<f64> = results.iter().map(|r| r.comm_pct_y).collect();
    let comm_solved: Vec<f64> = solved.iter().map(|r| r.comm_pct_mean()).collect();
    Summary {
        nruns,
        dnf,
        mean_st_ms,
        median_st_ms: median(&st),
        st_sd_ms,
        gm,
        gm_se,
        gm_ci95: if gm.is_some() {
            bootstrap_gm(results)
        } else {
            None
        },
        comm_x: CommStats::of(&comm_x),
        comm_y: CommStats::of(&comm_y),
        pearson_r: pearson(&comm_solved, &st).ok(),
    }
}
