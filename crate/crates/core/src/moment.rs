//! Moment bounds for the spatial derivative of a flow and its two-point
//! differences, the Gronwall-type closed form behind them, and the constants
//! they feed into the growth-rate bound.
//!
//! The closed form bounds any non-negative `f` with
//!
//! ```text
//! f(t) <= C1 int_0^t f + C2 (int_0^t sqrt f)^2 + H(t),   H non-decreasing,
//! ```
//!
//! by `H(t) (1 + (C1 + sqrt C2)/(C1 + 2 sqrt C2) (exp{(C1 + 2 sqrt C2) t} - 1))`.
//! [`gronwall_picard_oracle`] solves the integral equation directly so the
//! closed form can be checked against it.

use alloc::format;
use alloc::vec::Vec;

use crate::curve::{uniform_grid, MomentCurve};
use crate::error::{invalid, Error, Result};
use crate::math::{exp, log, log_add_exp, log_gronwall_factor, pow, sqrt};
use crate::rate::MomentRates;

/// `k5^2` in the Burkholder bound `C_p <= (k5 sqrt p)^p`.
pub const BURKHOLDER_K5_SQUARED: f64 = 20.0;

/// Flow-level constants entering the derivative moment bounds.
///
/// `k1..k4` bound the second mixed derivatives of the martingale
/// characteristic (one- and two-point) and the drift Jacobian (value and
/// Lipschitz constant); `lambda_cap`, `sigma`, `c_bar` parametrize the
/// two-point moment estimate
/// `(E|phi_t(x) - phi_t(y)|^p)^(1/p) <= c_bar |x - y| exp{(lambda_cap + p sigma^2 / 2) t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicBounds {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub lambda_cap: f64,
    pub sigma: f64,
    pub c_bar: f64,
    pub d: u32,
}

impl CharacteristicBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("sigma", self.sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.lambda_cap.is_finite() {
            return Err(invalid("lambda_cap", "must be finite"));
        }
        if !(self.c_bar.is_finite() && self.c_bar > 0.0) {
            return Err(invalid(
                "c_bar",
                format!("must be finite and > 0, got {}", self.c_bar),
            ));
        }
        if self.d < 2 {
            return Err(invalid("d", format!("must be >= 2, got {}", self.d)));
        }
        Ok(())
    }
}

/// Hölder exponents splitting a squared sum of three (alpha) and four
/// (beta) terms. Reciprocals in each group sum to one; an infinite entry
/// stands for a zero reciprocal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoelderSplit {
    alpha: [f64; 3],
    beta: [f64; 4],
}

const RECIPROCAL_TOL: f64 = 1e-12;

impl HoelderSplit {
    pub fn new(alpha: [f64; 3], beta: [f64; 4]) -> Result<Self> {
        for &a in alpha.iter() {
            if !(a > 1.0) || a.is_nan() {
                return Err(invalid("alpha", format!("entries must be > 1, got {a}")));
            }
        }
        for &b in beta.iter() {
            if !(b > 1.0) || b.is_nan() {
                return Err(invalid("beta", format!("entries must be > 1, got {b}")));
            }
        }
        let sa: f64 = alpha.iter().map(|a| 1.0 / a).sum();
        let sb: f64 = beta.iter().map(|b| 1.0 / b).sum();
        if (sa - 1.0).abs() > RECIPROCAL_TOL {
            return Err(invalid("alpha", format!("reciprocals sum to {sa}, not 1")));
        }
        if (sb - 1.0).abs() > RECIPROCAL_TOL {
            return Err(invalid("beta", format!("reciprocals sum to {sb}, not 1")));
        }
        Ok(Self { alpha, beta })
    }

    /// Builds a split from the four exponents that enter the growth
    /// constants. `alpha1` takes the alpha slack; `beta2` and `beta4` share
    /// the beta slack equally.
    pub fn from_free(alpha2: f64, alpha3: f64, beta1: f64, beta3: f64) -> Result<Self> {
        let slack_a = 1.0 - 1.0 / alpha2 - 1.0 / alpha3;
        let slack_b = 1.0 - 1.0 / beta1 - 1.0 / beta3;
        if slack_a < -RECIPROCAL_TOL {
            return Err(invalid(
                "alpha",
                format!("1/alpha2 + 1/alpha3 = {} exceeds 1", 1.0 - slack_a),
            ));
        }
        if slack_b < -RECIPROCAL_TOL {
            return Err(invalid(
                "beta",
                format!("1/beta1 + 1/beta3 = {} exceeds 1", 1.0 - slack_b),
            ));
        }
        let alpha1 = if slack_a <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / slack_a
        };
        let beta_rest = if slack_b <= 0.0 {
            f64::INFINITY
        } else {
            2.0 / slack_b
        };
        if !(alpha2 > 1.0 && alpha3 > 1.0) {
            return Err(invalid(
                "alpha",
                format!("alpha2, alpha3 must be > 1, got {alpha2}, {alpha3}"),
            ));
        }
        if !(beta1 > 1.0 && beta3 > 1.0) {
            return Err(invalid(
                "beta",
                format!("beta1, beta3 must be > 1, got {beta1}, {beta3}"),
            ));
        }
        Ok(Self {
            alpha: [alpha1, alpha2, alpha3],
            beta: [beta1, beta_rest, beta3, beta_rest],
        })
    }

    /// `alpha2 = alpha3 = beta1 = beta3 = 2`; the remaining exponents are infinite.
    pub fn all_twos() -> Self {
        Self {
            alpha: [f64::INFINITY, 2.0, 2.0],
            beta: [2.0, f64::INFINITY, 2.0, f64::INFINITY],
        }
    }

    /// `alpha = (3, 3, 3)`, `beta = (4, 4, 4, 4)`.
    pub fn uniform() -> Self {
        Self {
            alpha: [3.0; 3],
            beta: [4.0; 4],
        }
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    pub fn beta(&self) -> [f64; 4] {
        self.beta
    }
}

/// Upper bound on `C_p^(1/p)` for Burkholder's inequality: `2 sqrt(5) sqrt(p)`.
pub fn burkholder_bound(p: f64) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid("p", format!("must be >= 2, got {p}")));
    }
    Ok(sqrt(BURKHOLDER_K5_SQUARED * p))
}

/// `(sigma, lambda_cap) = (a, b + (d - 1) a^2 / 2)` from a quadratic-variation
/// Lipschitz bound `a` and a drift Lipschitz bound `b`.
pub fn sigma_lambda_from_lipschitz(a_tilde: f64, b_tilde: f64, d: u32) -> Result<(f64, f64)> {
    if !(a_tilde >= 0.0) || !a_tilde.is_finite() {
        return Err(invalid(
            "a_tilde",
            format!("must be finite and >= 0, got {a_tilde}"),
        ));
    }
    if !(b_tilde >= 0.0) || !b_tilde.is_finite() {
        return Err(invalid(
            "b_tilde",
            format!("must be finite and >= 0, got {b_tilde}"),
        ));
    }
    Ok((
        a_tilde,
        b_tilde + (d as f64 - 1.0) * a_tilde * a_tilde / 2.0,
    ))
}

/// Log of the Gronwall-type closed form for `H(t) = exp(log_h)`.
pub fn gronwall_log_bound(c1: f64, c2: f64, log_h: f64, t: f64) -> Result<f64> {
    let (ratio, rate) = gronwall_ratio_rate(c1, c2)?;
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    if log_h == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_h + log_gronwall_factor(ratio, rate, t))
}

fn gronwall_ratio_rate(c1: f64, c2: f64) -> Result<(f64, f64)> {
    if !(c1 >= 0.0) || !c1.is_finite() {
        return Err(invalid("C1", format!("must be finite and >= 0, got {c1}")));
    }
    if !(c2 >= 0.0) || !c2.is_finite() {
        return Err(invalid("C2", format!("must be finite and >= 0, got {c2}")));
    }
    let root = sqrt(c2);
    let rate = c1 + 2.0 * root;
    // exp{0} - 1 = 0 makes the ratio irrelevant when both constants vanish
    let ratio = if rate > 0.0 { (c1 + root) / rate } else { 1.0 };
    Ok((ratio, rate))
}

/// The Gronwall-type closed form evaluated at `t` for `H` given as a curve.
pub fn gronwall_bound(c1: f64, c2: f64, h: &MomentCurve, t: f64) -> Result<f64> {
    if !h.is_non_decreasing() {
        return Err(invalid("H", "must be non-decreasing"));
    }
    let log_h = h.log_value_at(t)?;
    gronwall_log_bound(c1, c2, log_h, t).map(exp)
}

const PICARD_TOL: f64 = 1e-10;
const OVERFLOW_GUARD: f64 = 1e300;

/// Solves `f = C1 int f + C2 (int sqrt f)^2 + H` by Picard iteration from
/// `f = H`, on `grid_size` uniform intervals of `[0, H.t_max()]` with
/// cumulative trapezoid quadrature. Stops when the relative sup-change drops
/// below `1e-10` or after `iterations` sweeps.
pub fn gronwall_picard_oracle(
    c1: f64,
    c2: f64,
    h: &MomentCurve,
    grid_size: usize,
    iterations: usize,
) -> Result<MomentCurve> {
    gronwall_ratio_rate(c1, c2)?;
    if grid_size < 64 {
        return Err(invalid(
            "grid_size",
            format!("must be >= 64, got {grid_size}"),
        ));
    }
    if iterations < 8 {
        return Err(invalid(
            "iterations",
            format!("must be >= 8, got {iterations}"),
        ));
    }
    let grid = uniform_grid(h.t_max(), grid_size);
    let forcing: Vec<f64> = grid.iter().map(|&t| h.value_at(t)).collect::<Result<_>>()?;
    let mut f = forcing.clone();
    let mut next = alloc::vec![0.0; f.len()];

    for _ in 0..iterations {
        let mut int_f = 0.0;
        let mut int_root = 0.0;
        next[0] = forcing[0];
        for i in 1..grid.len() {
            let step = grid[i] - grid[i - 1];
            int_f += 0.5 * step * (f[i - 1] + f[i]);
            int_root += 0.5 * step * (sqrt(f[i - 1]) + sqrt(f[i]));
            next[i] = c1 * int_f + c2 * int_root * int_root + forcing[i];
        }
        if let Some(i) = next
            .iter()
            .position(|v| !v.is_finite() || *v > OVERFLOW_GUARD)
        {
            return Err(Error::Diverged { time: grid[i] });
        }
        let change = f
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max);
        core::mem::swap(&mut f, &mut next);
        if change < PICARD_TOL {
            break;
        }
    }
    MomentCurve::from_values(grid, &f, "picard")
}

fn order_p(p: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid("p", format!("must be >= 2, got {p}")));
    }
    Ok(())
}

/// Log of the one-point derivative moment bound `f_p(t)` (the square root of
/// the squared-moment closed form).
pub fn f_bound_log(cb: &CharacteristicBounds, hs: &HoelderSplit, p: f64, t: f64) -> Result<f64> {
    cb.validate()?;
    order_p(p)?;
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    let [alpha1, alpha2, alpha3] = hs.alpha;
    if !alpha1.is_finite() {
        return Err(invalid("alpha1", "must be finite to bound f_p"));
    }
    let d = cb.d as f64;
    let d_bar = pow(d, 2.0 - 1.0 / p);
    let cp = burkholder_bound(p)?;
    let c1 = alpha2 * d_bar * d_bar * cb.k1 * cp * cp;
    let root_c2 = sqrt(alpha3) * d_bar * cb.k3;
    let log_sq = gronwall_log_bound(c1, root_c2 * root_c2, log(alpha1), t)?;
    Ok(0.5 * log_sq)
}

/// The one-point derivative moment bound `f_p(t)` in linear space.
pub fn f_bound(cb: &CharacteristicBounds, hs: &HoelderSplit, p: f64, t: f64) -> Result<f64> {
    f_bound_log(cb, hs, p, t).map(exp)
}

/// The exponent `C1 + 2 sqrt(C2)` of the squared bound `f_p(t)^2`.
pub fn f_bound_rate(cb: &CharacteristicBounds, hs: &HoelderSplit, p: f64) -> Result<f64> {
    order_p(p)?;
    let d = cb.d as f64;
    let d_bar = pow(d, 2.0 - 1.0 / p);
    let cp = burkholder_bound(p)?;
    Ok(hs.alpha[1] * d_bar * d_bar * cb.k1 * cp * cp + 2.0 * sqrt(hs.alpha[2]) * d_bar * cb.k3)
}

/// Two-point derivative bound with its quadrature metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GBound {
    /// Log of the bound on `g_p(t)` on the output grid.
    pub curve: MomentCurve,
    /// Log of `H(t)` on the output grid.
    pub forcing: MomentCurve,
    /// Simpson panels used over `[0, T]`.
    pub panels: usize,
    /// Largest relative change of `H` between the last two refinements.
    pub refinement_change: f64,
}

const START_PANELS: usize = 1024;
const MAX_PANELS: usize = 1 << 24;
const QUADRATURE_RTOL: f64 = 1e-6;

/// Bound on the two-point derivative moment `g_p(t)` for points at distance
/// `separation`, tabulated on `grid_size` uniform intervals of `[0, horizon]`.
///
/// The forcing `H(t)` is integrated with composite Simpson (one midpoint per
/// panel) in log space, starting from 1024 panels and doubling until two
/// successive refinements agree to `1e-6` relative. The unknown one-point
/// moment of order `2p` is replaced by [`f_bound`] at order `2p`.
pub fn g_bound(
    cb: &CharacteristicBounds,
    hs: &HoelderSplit,
    p: f64,
    separation: f64,
    horizon: f64,
    grid_size: usize,
) -> Result<GBound> {
    cb.validate()?;
    order_p(p)?;
    if !(separation >= 0.0) || !separation.is_finite() {
        return Err(invalid(
            "separation",
            format!("must be finite and >= 0, got {separation}"),
        ));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(
            "horizon",
            format!("must be finite and > 0, got {horizon}"),
        ));
    }
    if grid_size < 256 {
        return Err(invalid(
            "grid_size",
            format!("must be >= 256, got {grid_size}"),
        ));
    }
    let [beta1, beta2, beta3, beta4] = hs.beta;
    let d = cb.d as f64;
    let cp = burkholder_bound(p)?;
    let cp2 = cp * cp;
    let use_first = cb.k2 > 0.0;
    let use_second = cb.k4 > 0.0;
    if use_first && !beta2.is_finite() {
        return Err(invalid("beta2", "must be finite when k2 > 0"));
    }
    if use_second && !beta4.is_finite() {
        return Err(invalid("beta4", "must be finite when k4 > 0"));
    }

    let grid = uniform_grid(horizon, grid_size);
    let log_h = if (use_first || use_second) && separation > 0.0 {
        let prefactor = log(d * d * d * cb.c_bar * cb.c_bar * separation * separation);
        let drift1 = 2.0 * (cb.lambda_cap + p * cb.sigma * cb.sigma);
        let drift2 = cb.lambda_cap + cb.sigma * cb.sigma * p;
        let first_coef = log(cp2 * beta2 * cb.k2);
        let second_coef = log(beta4 * cb.k4 * cb.k4);
        let integrands = |s: f64| -> Result<(f64, f64)> {
            let lf = f_bound_log(cb, hs, 2.0 * p, s)?;
            Ok((2.0 * lf + drift1 * s, lf + drift2 * s))
        };

        let combine = |(j1, j2): (f64, f64)| {
            let a = if use_first {
                first_coef + j1
            } else {
                f64::NEG_INFINITY
            };
            let b = if use_second {
                second_coef + 2.0 * j2
            } else {
                f64::NEG_INFINITY
            };
            prefactor + log_add_exp(a, b)
        };
        let forcing_at = |m: usize| -> Result<Vec<f64>> {
            Ok(cumulative_log_integrals(&integrands, &grid, m)?
                .into_iter()
                .map(combine)
                .collect())
        };

        let mut per_interval = START_PANELS.div_ceil(grid_size).max(1);
        let mut previous = forcing_at(per_interval)?;
        let mut change = f64::INFINITY;
        loop {
            if grid_size * per_interval * 2 > MAX_PANELS {
                return Err(Error::Quadrature {
                    change,
                    panels: grid_size * per_interval,
                });
            }
            per_interval *= 2;
            let current = forcing_at(per_interval)?;
            change = previous
                .iter()
                .zip(&current)
                .filter(|(a, _)| a.is_finite())
                .map(|(a, b)| libm::expm1(b - a).abs())
                .fold(0.0, f64::max);
            if change <= QUADRATURE_RTOL {
                let forcing = MomentCurve::new(grid.clone(), current, "H")?;
                let curve = g_curve_from_forcing(cb, p, cp2, beta1, beta3, &forcing)?;
                return Ok(GBound {
                    curve,
                    forcing,
                    panels: grid_size * per_interval,
                    refinement_change: change,
                });
            }
            previous = current;
        }
    } else {
        alloc::vec![f64::NEG_INFINITY; grid.len()]
    };
    let forcing = MomentCurve::new(grid, log_h, "H")?;
    let curve = g_curve_from_forcing(cb, p, cp2, beta1, beta3, &forcing)?;
    Ok(GBound {
        curve,
        forcing,
        panels: 0,
        refinement_change: 0.0,
    })
}

fn g_curve_from_forcing(
    cb: &CharacteristicBounds,
    p: f64,
    cp2: f64,
    beta1: f64,
    beta3: f64,
    forcing: &MomentCurve,
) -> Result<MomentCurve> {
    let d = cb.d as f64;
    let dpow = pow(d, 3.0 - 2.0 / p);
    let c1 = beta1 * dpow * cp2 * cb.k1;
    let c2 = beta3 * dpow * cb.k3 * cb.k3;
    let logs = forcing
        .grid()
        .iter()
        .zip(forcing.log_values())
        .map(|(&t, &lh)| gronwall_log_bound(c1, c2, lh, t).map(|v| 0.5 * v))
        .collect::<Result<Vec<f64>>>()?;
    MomentCurve::new(forcing.grid().to_vec(), logs, "g_bound")
}

/// Cumulative `log int_0^t exp(a(s)) ds` and `log int_0^t exp(b(s)) ds` at
/// each output node, Simpson with `m` panels per output interval.
fn cumulative_log_integrals<F>(integrands: &F, grid: &[f64], m: usize) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    out.push(acc);
    let mut left = integrands(grid[0])?;
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / m as f64;
        let log_w = log(h / 6.0);
        for j in 0..m {
            let s0 = w[0] + h * j as f64;
            let s1 = if j + 1 == m {
                w[1]
            } else {
                w[0] + h * (j + 1) as f64
            };
            let mid = integrands(0.5 * (s0 + s1))?;
            let right = integrands(s1)?;
            let four = log(4.0);
            let pa = log_w + log_add_exp(log_add_exp(left.0, four + mid.0), right.0);
            let pb = log_w + log_add_exp(log_add_exp(left.1, four + mid.1), right.1);
            acc = (log_add_exp(acc.0, pa), log_add_exp(acc.1, pb));
            left = right;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Moment rates `(c, c_hat, k, k_hat)` of the derivative field, built from
/// the characteristic bounds and a Hölder split with `k5^2 = 20`.
pub fn theorem_constants(cb: &CharacteristicBounds, hs: &HoelderSplit) -> Result<MomentRates> {
    cb.validate()?;
    let [_, alpha2, alpha3] = hs.alpha;
    let [beta1, _, beta3, _] = hs.beta;
    let d = cb.d as f64;
    let d2 = d * d;
    let d3 = d2 * d;
    let d4 = d2 * d2;
    let k5sq = BURKHOLDER_K5_SQUARED;
    let k = alpha2 * d4 * cb.k1 * k5sq / 2.0;
    let drift = sqrt(alpha3) * d2 * cb.k3;
    let k_hat = drift + 2.0 * k;
    let c = alpha2 * d4 * cb.k1 * k5sq + 0.5 * beta1 * d3 * cb.k1 * k5sq + cb.sigma * cb.sigma;
    let c_hat = drift + sqrt(beta3 * d3 * cb.k3 * cb.k3) + cb.lambda_cap;
    Ok(MomentRates {
        c,
        c_hat,
        k,
        k_hat,
        d: cb.d,
    })
}
