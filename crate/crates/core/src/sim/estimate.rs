//! Moment and growth-rate estimators over recorded ensembles.

use alloc::format;
use alloc::vec::Vec;

use super::{EnsembleKind, PathEnsemble};
use crate::error::{invalid, Result};
use crate::math::{exp, kahan_sum, log, pow, sqrt, KahanSum};

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Exponent above which moment accumulation switches to log space.
const LINEAR_LOG_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub q: f64,
    pub t: f64,
    /// Sample mean of `value^q`, or its natural log when `log_domain`.
    pub estimate: f64,
    /// Jackknife standard error, or its natural log when `log_domain`.
    pub std_error: f64,
    pub n: usize,
    pub log_domain: bool,
}

/// Sample mean and delete-one jackknife standard error. For the mean the
/// jackknife reduces to `sqrt(sum (x - mean)^2 / (n (n - 1)))`.
pub fn jackknife_mean(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let first = xs[0];
    if xs.iter().all(|&x| x == first) {
        return (first, 0.0);
    }
    let mean = kahan_sum(xs.iter().copied()) / n as f64;
    let ss = kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    (mean, sqrt(ss / (n as f64 * (n as f64 - 1.0))))
}

/// `E[value^q]` at each requested `(q, t)`, ordered by `t` then `q`.
pub fn estimate_moments(
    ens: &PathEnsemble,
    q_list: &[f64],
    t_list: &[f64],
) -> Result<Vec<MomentEstimate>> {
    if let Some(q) = q_list.iter().find(|q| !(**q >= 0.0 && q.is_finite())) {
        return Err(invalid(
            "q",
            format!("moment orders must be finite and >= 0, got {q}"),
        ));
    }
    let mut out = Vec::with_capacity(q_list.len() * t_list.len());
    for &t in t_list {
        let j = ens.time_index(t)?;
        let logs = ens.log_column(j);
        let n = logs.len();
        for &q in q_list {
            out.push(moment_from_logs(ens, j, &logs, q, t, n));
        }
    }
    Ok(out)
}

fn moment_from_logs(
    ens: &PathEnsemble,
    j: usize,
    logs: &[f64],
    q: f64,
    t: f64,
    n: usize,
) -> MomentEstimate {
    if q == 0.0 {
        return MomentEstimate {
            q,
            t,
            estimate: 1.0,
            std_error: 0.0,
            n,
            log_domain: false,
        };
    }
    let top = logs.iter().fold(f64::NEG_INFINITY, |m, &l| m.max(q * l));
    if top == f64::NEG_INFINITY {
        return MomentEstimate {
            q,
            t,
            estimate: 0.0,
            std_error: 0.0,
            n,
            log_domain: false,
        };
    }
    if top <= LINEAR_LOG_LIMIT {
        let xs: Vec<f64> = match ens.kind() {
            EnsembleKind::Rho => ens.column(j).map(|v| pow(v, q)).collect(),
            EnsembleKind::LogDerivativeNorm => logs.iter().map(|&l| exp(q * l)).collect(),
        };
        let (estimate, std_error) = jackknife_mean(&xs);
        return MomentEstimate {
            q,
            t,
            estimate,
            std_error,
            n,
            log_domain: false,
        };
    }
    let xs: Vec<f64> = logs.iter().map(|&l| exp(q * l - top)).collect();
    let (m, s) = jackknife_mean(&xs);
    MomentEstimate {
        q,
        t,
        estimate: top + log(m),
        std_error: top + log(s),
        n,
        log_domain: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub t: f64,
    /// Sample mean of `(log X_t - log X_0) / t`.
    pub rate: f64,
    pub std_error: f64,
    pub n: usize,
    pub lower99: f64,
    pub upper99: f64,
}

/// Empirical exponential growth rate at time `t > 0`.
pub fn growth_rate(ens: &PathEnsemble, t: f64) -> Result<RateEstimate> {
    if !(t > 0.0) {
        return Err(invalid("t", format!("growth rate needs t > 0, got {t}")));
    }
    let j = ens.time_index(t)?;
    let start = ens.log_column(0);
    let end = ens.log_column(j);
    if end.iter().any(|l| !l.is_finite()) {
        return Err(invalid(
            "ensemble",
            "paths absorbed at zero have no finite growth rate",
        ));
    }
    let rates: Vec<f64> = start.iter().zip(&end).map(|(a, b)| (b - a) / t).collect();
    let (rate, std_error) = jackknife_mean(&rates);
    Ok(RateEstimate {
        t,
        rate,
        std_error,
        n: rates.len(),
        lower99: rate - Z99 * std_error,
        upper99: rate + Z99 * std_error,
    })
}

/// Log-normal moment estimate `log E[X^p] = p mu + p^2 s^2 / 2` from log-samples,
/// with a delete-one-block jackknife standard error. All fields are natural logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMomentInterval {
    pub p: f64,
    pub log_estimate: f64,
    pub log_std_error: f64,
    pub log_lower99: f64,
    pub log_upper99: f64,
    pub blocks: usize,
}

impl LogMomentInterval {
    pub fn contains(&self, log_value: f64) -> bool {
        self.log_lower99 <= log_value && log_value <= self.log_upper99
    }
}

fn lognormal_theta(p: f64, n: f64, s1: f64, s2: f64) -> f64 {
    let mean = s1 / n;
    let var = (s2 - s1 * mean) / (n - 1.0);
    p * mean + 0.5 * p * p * var
}

pub fn lognormal_moment(logs: &[f64], p: f64, blocks: usize) -> Result<LogMomentInterval> {
    let n = logs.len();
    if blocks < 2 || n < 2 * blocks {
        return Err(invalid(
            "blocks",
            format!("need >= 2 blocks of >= 2 samples, got {blocks} blocks for {n} samples"),
        ));
    }
    if let Some(l) = logs.iter().find(|l| !l.is_finite()) {
        return Err(invalid(
            "logs",
            format!("log-samples must be finite, got {l}"),
        ));
    }
    // centring keeps the second moment free of cancellation
    let shift = kahan_sum(logs.iter().copied()) / n as f64;
    let y: Vec<f64> = logs.iter().map(|l| l - shift).collect();
    let bounds: Vec<usize> = (0..=blocks).map(|b| b * n / blocks).collect();
    let mut s1_blocks = Vec::with_capacity(blocks);
    let mut s2_blocks = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let part = &y[bounds[b]..bounds[b + 1]];
        s1_blocks.push(kahan_sum(part.iter().copied()));
        s2_blocks.push(kahan_sum(part.iter().map(|v| v * v)));
    }
    let s1 = kahan_sum(s1_blocks.iter().copied());
    let s2 = kahan_sum(s2_blocks.iter().copied());
    let theta = lognormal_theta(p, n as f64, s1, s2) + p * shift;
    let leave_out: Vec<f64> = (0..blocks)
        .map(|b| {
            let m = (n - (bounds[b + 1] - bounds[b])) as f64;
            lognormal_theta(p, m, s1 - s1_blocks[b], s2 - s2_blocks[b]) + p * shift
        })
        .collect();
    let mean_lo = kahan_sum(leave_out.iter().copied()) / blocks as f64;
    let mut acc = KahanSum::default();
    for v in &leave_out {
        acc.add((v - mean_lo) * (v - mean_lo));
    }
    let se = sqrt((blocks as f64 - 1.0) / blocks as f64 * acc.total());
    Ok(LogMomentInterval {
        p,
        log_estimate: theta,
        log_std_error: se,
        log_lower99: theta - Z99 * se,
        log_upper99: theta + Z99 * se,
        blocks,
    })
}
