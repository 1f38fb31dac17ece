//! Simulation-backed consistency report for one model.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    estimate_moments, growth_rate, simulate_derivative_norm, simulate_rho, EnsembleKind,
    PathEnsemble, RateEstimate, SimConfig,
};
use crate::error::{invalid, Result};
use crate::ibf::{ibf_xi, rho_moment_bound, IbfModel};
use crate::math::{exp, log, log_add_exp};
use crate::rate::CaseLabel;

pub const DEFAULT_Q_LIST: [f64; 3] = [1.0, 2.0, 4.0];

/// Standard errors of slack granted to a moment estimate above its bound.
pub const DOMINATION_SLACK_SE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationRow {
    pub q: f64,
    pub t: f64,
    /// Estimate and standard error, as natural logs when `log_domain`.
    pub estimate: f64,
    pub std_error: f64,
    pub log_domain: bool,
    pub log_bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub catalog_id: String,
    pub params: BTreeMap<String, f64>,
    pub d: u32,
    pub delta: f64,
    pub config: SimConfig,
    pub lambda1: f64,
    pub xi: f64,
    pub xi_case: CaseLabel,
    /// Bound at zero box dimension, `max(lambda1, 0)`.
    pub xi_zero: f64,
    /// Single-point growth rate of the derivative norm at the horizon.
    pub empirical_rate: RateEstimate,
    /// 99% interval of the empirical rate contains `lambda1`.
    pub rate_matches_lyapunov: bool,
    /// Empirical rate does not exceed `xi_zero` beyond its 99% interval; when
    /// `lambda1 >= 0` the interval must also contain `xi_zero`.
    pub rate_bound_consistent: bool,
    pub xi_monotone: bool,
    pub domination: Vec<DominationRow>,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Runs both ensembles sequentially and reports.
pub fn verify_report(
    model: &IbfModel,
    delta: f64,
    cfg: &SimConfig,
    q_list: &[f64],
) -> Result<VerifyReport> {
    let rho = simulate_rho(model, cfg)?;
    let der = simulate_derivative_norm(model, cfg)?;
    verify_report_from(model, delta, q_list, &rho, &der)
}

/// Report from ensembles simulated elsewhere (for example in parallel).
pub fn verify_report_from(
    model: &IbfModel,
    delta: f64,
    q_list: &[f64],
    rho: &PathEnsemble,
    derivative: &PathEnsemble,
) -> Result<VerifyReport> {
    if rho.kind() != EnsembleKind::Rho || derivative.kind() != EnsembleKind::LogDerivativeNorm {
        return Err(invalid(
            "ensemble",
            "expected a rho ensemble and a log-derivative-norm ensemble",
        ));
    }
    if let Some(q) = q_list.iter().find(|q| !(**q >= 1.0)) {
        return Err(invalid("q", format!("moment orders must be >= 1, got {q}")));
    }
    let cfg = *rho.config();
    let xi = ibf_xi(model, delta)?;
    let xi_zero = ibf_xi(model, 0.0)?.xi;
    let lambda1 = model.lambda1();
    let mut failures = Vec::new();

    let horizon = *derivative.times().last().unwrap_or(&0.0);
    let rate = growth_rate(derivative, horizon)?;
    let rate_matches_lyapunov = rate.lower99 <= lambda1 && lambda1 <= rate.upper99;
    if !rate_matches_lyapunov {
        failures.push(format!(
            "empirical rate {} (99% CI [{}, {}]) misses lambda1 = {lambda1}",
            rate.rate, rate.lower99, rate.upper99
        ));
    }
    let mut rate_bound_consistent = rate.lower99 <= xi_zero;
    if lambda1 >= 0.0 {
        rate_bound_consistent &= xi_zero <= rate.upper99;
    }
    if !rate_bound_consistent {
        failures.push(format!(
            "empirical rate {} inconsistent with xi(0) = {xi_zero}",
            rate.rate
        ));
    }
    let xi_monotone = xi.xi >= xi_zero;
    if !xi_monotone {
        failures.push(format!("xi({delta}) = {} below xi(0) = {xi_zero}", xi.xi));
    }

    let times: Vec<f64> = rho.times().iter().copied().filter(|&t| t > 0.0).collect();
    let r0 = rho.path(0)[0];
    let mut domination = Vec::new();
    for est in estimate_moments(rho, q_list, &times)? {
        let log_bound = rho_moment_bound(model, est.q, r0, est.t)?;
        let passed = if est.log_domain {
            est.estimate <= log_add_exp(log_bound, log(DOMINATION_SLACK_SE) + est.std_error)
        } else {
            est.estimate <= exp(log_bound) + DOMINATION_SLACK_SE * est.std_error
        };
        if !passed {
            failures.push(format!(
                "moment q = {} at t = {} exceeds its bound",
                est.q, est.t
            ));
        }
        domination.push(DominationRow {
            q: est.q,
            t: est.t,
            estimate: est.estimate,
            std_error: est.std_error,
            log_domain: est.log_domain,
            log_bound,
            passed,
        });
    }

    Ok(VerifyReport {
        catalog_id: model.catalog_id().into(),
        params: model.params().clone(),
        d: model.d(),
        delta,
        config: cfg,
        lambda1,
        xi: xi.xi,
        xi_case: xi.case_label,
        xi_zero,
        empirical_rate: rate,
        rate_matches_lyapunov,
        rate_bound_consistent,
        xi_monotone,
        passed: failures.is_empty(),
        domination,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_gaussian_report_passes_and_is_reproducible() {
        let m = IbfModel::potential_gaussian(1.0, 2).unwrap();
        let cfg = SimConfig {
            horizon: 1.0,
            dt: 1e-3,
            n_paths: 400,
            seed: 11,
            r0: 0.1,
            record_stride: 250,
        };
        let a = verify_report(&m, 0.0, &cfg, &DEFAULT_Q_LIST).unwrap();
        assert!(a.passed, "{:?}", a.failures);
        assert_eq!(a.xi, 0.0);
        assert_eq!(a.domination.len(), 12);
        let b = verify_report(&m, 0.0, &cfg, &DEFAULT_Q_LIST).unwrap();
        assert_eq!(a, b);
        let wide = verify_report(&m, 2.0, &cfg, &DEFAULT_Q_LIST).unwrap();
        assert!(wide.xi >= wide.xi_zero && wide.xi_monotone);
    }
}
