//! Seeded Monte Carlo for isotropic Brownian flows.
//!
//! Path `i` of a run draws from its own ChaCha8 stream, keyed by the run seed
//! and stream id `i`, so a path's values do not depend on how many paths are
//! simulated or in which order. Parallel drivers call [`rho_path`] and
//! [`derivative_path`] per index and assemble with [`PathEnsemble::new`].

mod estimate;
mod normal;
mod report;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid, Error, Result};
use crate::ibf::IbfModel;
use crate::math::{ceil, log, sqrt};

pub use estimate::{
    estimate_moments, growth_rate, jackknife_mean, lognormal_moment, LogMomentInterval,
    MomentEstimate, RateEstimate, Z99,
};
pub use normal::inverse_normal_cdf;
pub use report::{verify_report, verify_report_from, DominationRow, VerifyReport, DEFAULT_Q_LIST};

/// Default cap on `n_paths * steps`.
pub const DEFAULT_STEP_BUDGET: u64 = 20_000_000_000;

/// Below this separation the drift uses its first-order series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Largest admissible `dt (d - 1) beta_N`.
pub const STABILITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    /// Requested step; the engine uses `horizon / ceil(horizon / dt)`.
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Initial separation for two-point runs.
    pub r0: f64,
    pub record_stride: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_with_budget(DEFAULT_STEP_BUDGET)
    }

    pub fn validate_with_budget(&self, budget: u64) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid(
                "horizon",
                format!("must be positive and finite, got {}", self.horizon),
            ));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(invalid(
                "dt",
                format!(
                    "must lie in (0, horizon = {}], got {}",
                    self.horizon, self.dt
                ),
            ));
        }
        if self.n_paths == 0 {
            return Err(invalid("n_paths", "must be >= 1"));
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(invalid(
                "r0",
                format!("must be positive and finite, got {}", self.r0),
            ));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride", "must be >= 1"));
        }
        let steps = ceil(self.horizon / self.dt * (1.0 - 1e-12));
        let work = steps * self.n_paths as f64;
        if !(work <= budget as f64) {
            return Err(invalid(
                "n_paths",
                format!("n_paths * steps = {work} exceeds the budget {budget}"),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ceil(self.horizon / self.dt * (1.0 - 1e-12)).max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    /// Step indices that are recorded: every `record_stride`-th plus the last.
    pub fn recorded_steps(&self) -> Vec<usize> {
        let n = self.steps();
        let mut idx: Vec<usize> = (0..=n).step_by(self.record_stride).collect();
        if idx.last() != Some(&n) {
            idx.push(n);
        }
        idx
    }

    pub fn recorded_times(&self) -> Vec<f64> {
        let n = self.steps();
        self.recorded_steps()
            .into_iter()
            .map(|k| {
                if k == n {
                    self.horizon
                } else {
                    self.horizon * k as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Two-point distance `rho_t`.
    Rho,
    /// Natural log of the Schatten norm of the spatial derivative.
    LogDerivativeNorm,
}

impl EnsembleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnsembleKind::Rho => "rho",
            EnsembleKind::LogDerivativeNorm => "log-derivative-norm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(EnsembleKind::Rho),
            "log-derivative-norm" => Ok(EnsembleKind::LogDerivativeNorm),
            other => Err(invalid("kind", format!("unknown ensemble kind {other:?}"))),
        }
    }
}

/// The model an ensemble was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRef {
    pub catalog_id: String,
    pub params: BTreeMap<String, f64>,
    pub d: u32,
}

impl ModelRef {
    pub fn of(model: &IbfModel) -> Self {
        Self {
            catalog_id: model.catalog_id().into(),
            params: model.params().clone(),
            d: model.d(),
        }
    }
}

/// Recorded sample paths, one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    kind: EnsembleKind,
    times: Vec<f64>,
    values: Vec<f64>,
    stream_ids: Vec<u64>,
    model_ref: ModelRef,
    config: SimConfig,
}

impl PathEnsemble {
    pub fn new(
        kind: EnsembleKind,
        times: Vec<f64>,
        rows: Vec<Vec<f64>>,
        stream_ids: Vec<u64>,
        model_ref: ModelRef,
        config: SimConfig,
    ) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(invalid("times", "must be non-empty and start at 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("times", "must be strictly increasing"));
        }
        if rows.is_empty() || rows.len() != stream_ids.len() {
            return Err(invalid(
                "stream_ids",
                format!("{} rows for {} stream ids", rows.len(), stream_ids.len()),
            ));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != times.len()) {
            return Err(invalid(
                "values",
                format!("row of length {} for {} times", r.len(), times.len()),
            ));
        }
        let values: Vec<f64> = rows.concat();
        if kind == EnsembleKind::Rho && values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid(
                "values",
                "distances must be finite and non-negative",
            ));
        }
        if kind == EnsembleKind::LogDerivativeNorm && values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "log-norms must be finite"));
        }
        Ok(Self {
            kind,
            times,
            values,
            stream_ids,
            model_ref,
            config,
        })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.stream_ids.len()
    }

    pub fn stream_ids(&self) -> &[u64] {
        &self.stream_ids
    }

    pub fn model_ref(&self) -> &ModelRef {
        &self.model_ref
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let n = self.times.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column of values at grid index `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let n = self.times.len();
        (0..self.n_paths()).map(move |i| self.values[i * n + j])
    }

    /// Index of `t` on the recording grid (matched to 1e-12 relative).
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or_else(|| invalid("t", format!("{t} is not on the recording grid")))
    }

    /// Natural logs of the values at grid index `j`; zero distances map to `-inf`.
    pub fn log_column(&self, j: usize) -> Vec<f64> {
        match self.kind {
            EnsembleKind::Rho => self.column(j).map(log).collect(),
            EnsembleKind::LogDerivativeNorm => self.column(j).collect(),
        }
    }
}

/// Generator for path `stream` of a run seeded with `seed`.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal variate by inversion; exactly one 64-bit draw per call.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    inverse_normal_cdf(u)
}

fn check_stability(model: &IbfModel, dt: f64) -> Result<()> {
    let value = dt * (model.d() - 1) as f64 * model.beta_n();
    if value > STABILITY_LIMIT {
        return Err(Error::StepTooCoarse { dt, value });
    }
    Ok(())
}

/// Drift of the two-point distance, `(d - 1) (1 - B_N(rho)) / rho`.
pub fn rho_drift(model: &IbfModel, rho: f64) -> f64 {
    let dm1 = (model.d() - 1) as f64;
    if rho < SERIES_THRESHOLD {
        0.5 * dm1 * model.beta_n() * rho
    } else {
        dm1 * model.one_minus_b_n(rho) / rho
    }
}

/// Diffusion of the two-point distance, `sqrt(2 (1 - B_L(rho)))`.
pub fn rho_diffusion(model: &IbfModel, rho: f64) -> f64 {
    sqrt(2.0 * model.one_minus_b_l(rho).max(0.0))
}

/// Euler–Maruyama path of the two-point distance, recorded on the
/// configured grid. Paths stepping below 0 are absorbed there.
pub fn rho_path(model: &IbfModel, cfg: &SimConfig, stream: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let h = cfg.effective_dt();
    check_stability(model, h)?;
    let sqrt_h = sqrt(h);
    let n = cfg.steps();
    let mut rng = path_rng(cfg.seed, stream);
    let mut out = Vec::with_capacity(n / cfg.record_stride + 2);
    let mut rho = cfg.r0;
    out.push(rho);
    for k in 1..=n {
        let z = standard_normal(&mut rng);
        if rho > 0.0 {
            rho += rho_drift(model, rho) * h + rho_diffusion(model, rho) * sqrt_h * z;
            if rho < 0.0 {
                rho = 0.0;
            }
        }
        if k % cfg.record_stride == 0 || k == n {
            out.push(rho);
        }
    }
    Ok(out)
}

/// Exact path of `log ||D phi_t||_S = log(d) / 4 + lambda1 t + sqrt(beta_L) W_t`
/// on the recording grid.
pub fn derivative_path(model: &IbfModel, cfg: &SimConfig, stream: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let times = cfg.recorded_times();
    let base = 0.25 * log(model.d() as f64);
    let vol = sqrt(model.beta_l());
    let mut rng = path_rng(cfg.seed, stream);
    let mut w = 0.0;
    let mut out = Vec::with_capacity(times.len());
    out.push(base);
    for pair in times.windows(2) {
        w += sqrt(pair[1] - pair[0]) * standard_normal(&mut rng);
        out.push(base + model.lambda1() * pair[1] + vol * w);
    }
    Ok(out)
}

fn ensemble(
    kind: EnsembleKind,
    model: &IbfModel,
    cfg: &SimConfig,
    path: impl Fn(u64) -> Result<Vec<f64>>,
) -> Result<PathEnsemble> {
    cfg.validate()?;
    let rows = (0..cfg.n_paths as u64)
        .map(path)
        .collect::<Result<Vec<_>>>()?;
    let ids = (0..cfg.n_paths as u64).collect();
    PathEnsemble::new(
        kind,
        cfg.recorded_times(),
        rows,
        ids,
        ModelRef::of(model),
        *cfg,
    )
}

/// Sequential two-point ensemble.
pub fn simulate_rho(model: &IbfModel, cfg: &SimConfig) -> Result<PathEnsemble> {
    cfg.validate()?;
    check_stability(model, cfg.effective_dt())?;
    ensemble(EnsembleKind::Rho, model, cfg, |i| rho_path(model, cfg, i))
}

/// Sequential exact ensemble of log derivative norms.
pub fn simulate_derivative_norm(model: &IbfModel, cfg: &SimConfig) -> Result<PathEnsemble> {
    ensemble(EnsembleKind::LogDerivativeNorm, model, cfg, |i| {
        derivative_path(model, cfg, i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::kahan_sum;

    fn cfg(horizon: f64, dt: f64, n_paths: usize, stride: usize) -> SimConfig {
        SimConfig {
            horizon,
            dt,
            n_paths,
            seed: 42,
            r0: 0.1,
            record_stride: stride,
        }
    }

    fn unit() -> IbfModel {
        IbfModel::potential_gaussian(1.0, 2).unwrap()
    }

    #[test]
    fn config_validation_and_grid() {
        assert!(cfg(1.0, 2.0, 1, 1).validate().is_err());
        assert!(cfg(1.0, 0.1, 0, 1).validate().is_err());
        assert!(cfg(1.0, 0.1, 1, 0).validate().is_err());
        assert!(cfg(1.0, 1e-3, 1000, 1)
            .validate_with_budget(10_000)
            .is_err());
        let c = cfg(1.0, 0.3, 1, 2);
        assert_eq!(c.steps(), 4);
        assert_eq!(c.recorded_steps(), alloc::vec![0, 2, 4]);
        assert_eq!(c.recorded_times(), alloc::vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg(1.0, 1e-3, 1, 100).recorded_times().len(), 11);
    }

    #[test]
    fn paths_start_at_the_initial_values() {
        let m = unit();
        let c = cfg(0.5, 0.01, 50, 5);
        let rho = simulate_rho(&m, &c).unwrap();
        assert!(rho.column(0).all(|v| v == 0.1));
        assert!(rho.values().iter().all(|v| *v >= 0.0));
        let der = simulate_derivative_norm(&m, &c).unwrap();
        assert!(der.column(0).all(|v| v == 0.25 * log(2.0)));
    }

    #[test]
    fn substreams_do_not_depend_on_path_count() {
        let m = unit();
        let small = simulate_rho(&m, &cfg(0.2, 0.01, 3, 1)).unwrap();
        let large = simulate_rho(&m, &cfg(0.2, 0.01, 10, 1)).unwrap();
        for i in 0..3 {
            assert_eq!(small.path(i), large.path(i));
        }
        assert_ne!(large.path(0), large.path(1));
        assert_eq!(
            rho_path(&m, &cfg(0.2, 0.01, 10, 1), 7).unwrap(),
            large.path(7)
        );
    }

    #[test]
    fn stability_guard_rejects_coarse_steps() {
        let m = IbfModel::potential_gaussian(0.1, 3).unwrap();
        match simulate_rho(&m, &cfg(1.0, 0.01, 1, 1)) {
            Err(Error::StepTooCoarse { value, .. }) => assert!((value - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn drift_series_matches_exact_drift_at_the_threshold() {
        let m = unit();
        for &r in &[0.999_999 * SERIES_THRESHOLD, 1e-8] {
            let exact = (m.d() - 1) as f64 * m.one_minus_b_n(r) / r;
            assert!((rho_drift(&m, r) - exact).abs() <= 1e-12 * exact, "r={r}");
        }
        assert_eq!(rho_drift(&m, 0.0), 0.0);
        assert_eq!(rho_diffusion(&m, 0.0), 0.0);
    }

    #[test]
    fn small_separation_growth_matches_lyapunov_exponent() {
        let m = unit();
        let c = SimConfig {
            horizon: 5.0,
            dt: 1e-3,
            n_paths: 4000,
            seed: 3,
            r0: 1e-4,
            record_stride: 5000,
        };
        let ens = simulate_rho(&m, &c).unwrap();
        let j = ens.time_index(5.0).unwrap();
        let rates: Vec<f64> = ens.column(j).map(|v| log(v / 1e-4) / 5.0).collect();
        let n = rates.len() as f64;
        let mean = kahan_sum(rates.iter().copied()) / n;
        let var = kahan_sum(rates.iter().map(|r| (r - mean) * (r - mean))) / (n - 1.0);
        let se = sqrt(var / n);
        assert!(
            (mean - m.lambda1()).abs() <= 3.0 * se,
            "mean {mean} se {se}"
        );
    }
}
