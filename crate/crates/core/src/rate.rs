//! Exponential growth-rate bound `xi` for a random field over a compact set of
//! box dimension `delta`.
//!
//! Inputs are the four moment rates: the two-point bound
//! `E sup|psi(x) - psi(y)|^q <= |x-y|^q exp{(c q^2 + c_hat q) T}` for `q > d`
//! and the one-point bound `sup_x E sup|psi(x)|^q <= exp{(k q^2 + k_hat q) T}`
//! for `q >= 0`. The bound is defined as the infimum over covering exponents
//! `gamma > 0` of
//!
//! ```text
//! max( k_hat + 2 sqrt(k gamma delta),  h(gamma) )
//! h(gamma) = 2 sqrt(c gamma delta) + c_hat - gamma        if gamma delta >= c d^2
//!          = gamma delta / d + c d + c_hat - gamma        if gamma delta <= c d^2
//! ```
//!
//! [`xi_oracle_ximax`] evaluates that infimum numerically,
//! [`xi_oracle_feasibility`] recovers it from the tail exponents by bisection
//! on the rate, and [`xi_closed_form`] evaluates the three-case formula.

use alloc::format;

use crate::error::{invalid, Error, Result};
use crate::math::sqrt;

/// Default absolute tolerance on `xi`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The moment rates `(c, c_hat, k, k_hat)` in dimension `d`, before a box
/// dimension is attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRates {
    pub c: f64,
    pub c_hat: f64,
    pub k: f64,
    pub k_hat: f64,
    pub d: u32,
}

impl MomentRates {
    /// Attaches the box dimension, validating every invariant of
    /// [`GrowthConstants`].
    pub fn with_delta(self, delta: f64) -> Result<GrowthConstants> {
        GrowthConstants::new(self.c, self.c_hat, self.k, self.k_hat, self.d, delta)
    }
}

/// Validated inputs of the growth-rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    c: f64,
    c_hat: f64,
    k: f64,
    k_hat: f64,
    d: u32,
    delta: f64,
}

impl GrowthConstants {
    pub fn new(c: f64, c_hat: f64, k: f64, k_hat: f64, d: u32, delta: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid("c", format!("must be finite and > 0, got {c}")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(invalid("k", format!("must be finite and > 0, got {k}")));
        }
        if !c_hat.is_finite() {
            return Err(invalid("c_hat", "must be finite"));
        }
        if !k_hat.is_finite() {
            return Err(invalid("k_hat", "must be finite"));
        }
        if d < 2 {
            return Err(invalid("d", format!("must be >= 2, got {d}")));
        }
        if !(delta >= 0.0 && delta <= d as f64) {
            return Err(invalid(
                "delta",
                format!("must lie in [0, {d}], got {delta}"),
            ));
        }
        Ok(Self {
            c,
            c_hat,
            k,
            k_hat,
            d,
            delta,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn c_hat(&self) -> f64 {
        self.c_hat
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn k_hat(&self) -> f64 {
        self.k_hat
    }
    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rates(&self) -> MomentRates {
        MomentRates {
            c: self.c,
            c_hat: self.c_hat,
            k: self.k,
            k_hat: self.k_hat,
            d: self.d,
        }
    }

    /// Same rates, different box dimension.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        self.rates().with_delta(delta)
    }

    fn df(&self) -> f64 {
        self.d as f64
    }

    /// `c d + c_hat`, the upper end of the sandwich before taking the max.
    fn two_point_ceiling(&self) -> f64 {
        self.c * self.df() + self.c_hat
    }
}

/// Which branch of the three-case formula produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    KhatDominant,
    Gamma1EqualDim,
    Gamma1SubDim,
    Gamma2,
    NumericOnly,
}

impl CaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseLabel::KhatDominant => "KhatDominant",
            CaseLabel::Gamma1EqualDim => "Gamma1EqualDim",
            CaseLabel::Gamma1SubDim => "Gamma1SubDim",
            CaseLabel::Gamma2 => "Gamma2",
            CaseLabel::NumericOnly => "NumericOnly",
        }
    }
}

/// How a [`XiResult`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    AsPrinted,
    Corrected,
    Oracle,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::AsPrinted => "AsPrinted",
            Variant::Corrected => "Corrected",
            Variant::Oracle => "Oracle",
        }
    }
}

/// Closed-form flavour accepted by [`xi_closed_form`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Formula {
    /// `gamma_1` and `gamma_2` exactly as originally displayed. Kept for
    /// auditing; at `delta = d` and in the `gamma_2` branch it disagrees with
    /// the infimum it is meant to evaluate.
    AsPrinted,
    /// `gamma_1(delta = d)` squared and the middle sign of `gamma_2` flipped,
    /// which makes both branches solve the crossing equation exactly.
    #[default]
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiResult {
    pub xi: f64,
    pub case_label: CaseLabel,
    /// Minimizing `gamma`, when an oracle produced the value.
    pub gamma_star: Option<f64>,
    /// `gamma_1` or `gamma_2`, when the closed form produced the value.
    pub gamma_value: Option<f64>,
    pub variant: Variant,
}

/// Raw exponents of the two tail bounds at covering exponent `gamma` and
/// moment order `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailExponents {
    /// `gamma delta + c q^2 + (c_hat - gamma - r) q`
    pub two_point: f64,
    /// `gamma delta + k q^2 + (k_hat - r) q`
    pub one_point: f64,
}

pub fn tail_exponents(gc: &GrowthConstants, r: f64, gamma: f64, q: f64) -> Result<TailExponents> {
    if !(q > 0.0) {
        return Err(invalid("q", format!("must be > 0, got {q}")));
    }
    if !(gamma > 0.0) {
        return Err(invalid("gamma", format!("must be > 0, got {gamma}")));
    }
    let cover = gamma * gc.delta;
    Ok(TailExponents {
        two_point: cover + gc.c * q * q + (gc.c_hat - gamma - r) * q,
        one_point: cover + gc.k * q * q + (gc.k_hat - r) * q,
    })
}

/// Two-point exponent minimized over `q >= d`.
///
/// Interior optimum when `r >= 2cd + c_hat - gamma`, otherwise `q = d`.
/// Accepts `gamma = 0` as the right limit.
pub fn two_point_optimized(gc: &GrowthConstants, r: f64, gamma: f64) -> f64 {
    let d = gc.df();
    let cover = gamma * gc.delta;
    if r >= 2.0 * gc.c * d + gc.c_hat - gamma {
        let s = r - gc.c_hat + gamma;
        cover - s * s / (4.0 * gc.c)
    } else {
        cover + (gc.c * d + gc.c_hat - gamma - r) * d
    }
}

/// One-point exponent minimized over `q >= 0`; valid only for `r >= k_hat`.
pub fn one_point_optimized(gc: &GrowthConstants, r: f64, gamma: f64) -> Result<f64> {
    if r < gc.k_hat {
        return Err(Error::RateBelowKhat { r, k_hat: gc.k_hat });
    }
    let s = r - gc.k_hat;
    Ok(gamma * gc.delta - s * s / (4.0 * gc.k))
}

/// Both q-optimized exponents `(two_point, one_point)`.
pub fn optimized_tail_exponents(gc: &GrowthConstants, r: f64, gamma: f64) -> Result<(f64, f64)> {
    let one = one_point_optimized(gc, r, gamma)?;
    Ok((two_point_optimized(gc, r, gamma), one))
}

/// `(k_hat, max(c d + c_hat, k_hat))`.
pub fn sandwich(gc: &GrowthConstants) -> (f64, f64) {
    (gc.k_hat, gc.two_point_ceiling().max(gc.k_hat))
}

/// The objective whose infimum over `gamma > 0` defines `xi`.
pub fn ximax_objective(gc: &GrowthConstants, gamma: f64) -> f64 {
    let one = gc.k_hat + 2.0 * sqrt(gc.k * gamma * gc.delta);
    one.max(ximax_two_point_term(gc, gamma))
}

fn ximax_two_point_term(gc: &GrowthConstants, gamma: f64) -> f64 {
    let d = gc.df();
    let cover = gamma * gc.delta;
    if cover >= gc.c * d * d {
        2.0 * sqrt(gc.c * cover) + gc.c_hat - gamma
    } else {
        cover / d + gc.c * d + gc.c_hat - gamma
    }
}

const DELTA_GUARD: f64 = 1e-12;
const BISECTION_STEPS: usize = 2000;

/// Infimum over `gamma > 0` of [`ximax_objective`].
///
/// The objective is the maximum of an increasing term `u` and a
/// non-increasing term `h`, so `u - h` is increasing and the infimum sits
/// where it changes sign. That crossing is bracketed and bisected
/// (geometrically once both ends are positive). If `u >= h` already in the
/// limit `gamma -> 0+`, the value is that limit, `max(k_hat, c d + c_hat)`.
pub fn xi_oracle_ximax(gc: &GrowthConstants, tol: f64) -> Result<XiResult> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be > 0, got {tol}")));
    }
    if gc.delta == 0.0 {
        // first term is constantly k_hat and h is unbounded below
        return Ok(XiResult {
            xi: gc.k_hat,
            case_label: CaseLabel::NumericOnly,
            gamma_star: None,
            gamma_value: None,
            variant: Variant::Oracle,
        });
    }

    let (_, upper) = sandwich(gc);
    let one_point = |g: f64| gc.k_hat + 2.0 * sqrt(gc.k * g * gc.delta);
    let gap = |g: f64| one_point(g) - ximax_two_point_term(gc, g);
    if gc.k_hat >= gc.two_point_ceiling() {
        return Ok(XiResult {
            xi: upper,
            case_label: CaseLabel::NumericOnly,
            gamma_star: None,
            gamma_value: None,
            variant: Variant::Oracle,
        });
    }

    let d = gc.df();
    let mut hi = (gc.c * d * d / gc.delta.max(DELTA_GUARD))
        .max(gc.c * gc.delta)
        .max(1.0);
    while gap(hi) < 0.0 {
        hi *= 4.0;
    }
    // gap(lo) < 0 <= gap(hi); lo = 0 stands for the limit
    let mut lo = 0.0;
    for _ in 0..BISECTION_STEPS {
        let mid = if lo == 0.0 { hi * 1e-3 } else { sqrt(lo * hi) };
        if !(mid > lo && mid < hi) {
            break;
        }
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if lo > 0.0 && hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let at_hi = ximax_objective(gc, hi);
    let (gamma_star, val) = if lo > 0.0 && ximax_objective(gc, lo) < at_hi {
        (lo, ximax_objective(gc, lo))
    } else {
        (hi, at_hi)
    };
    let xi = val.min(upper);
    let gamma_star = if upper < val - tol {
        None
    } else {
        Some(gamma_star)
    };
    Ok(XiResult {
        xi,
        case_label: CaseLabel::NumericOnly,
        gamma_star,
        gamma_value: None,
        variant: Variant::Oracle,
    })
}

/// Whether some `gamma > 0` makes both q-optimized tail exponents negative.
///
/// The one-point exponent is negative exactly on `0 < gamma < gamma_c` with
/// `gamma_c = (r - k_hat)^2 / (4 k delta)`. The two-point exponent is a
/// pointwise minimum of affine functions of `gamma`, so it is concave and its
/// infimum over that interval sits at one of the two ends.
pub fn rate_is_feasible(gc: &GrowthConstants, r: f64) -> bool {
    if r <= gc.k_hat {
        return false;
    }
    if gc.delta == 0.0 {
        // one-point exponent negative for every gamma; two-point exponent -> -inf
        return true;
    }
    let s = r - gc.k_hat;
    let gamma_c = s * s / (4.0 * gc.k * gc.delta);
    two_point_optimized(gc, r, 0.0) < 0.0 || two_point_optimized(gc, r, gamma_c) < 0.0
}

/// Infimum of feasible rates, by bisection on `[k_hat, max(cd + c_hat, k_hat) + 1]`.
pub fn xi_oracle_feasibility(gc: &GrowthConstants, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be > 0, got {tol}")));
    }
    let (mut lo, upper) = sandwich(gc);
    let mut hi = upper + 1.0;
    if !rate_is_feasible(gc, hi) {
        return Err(Error::Inconsistent(format!(
            "upper bracket {hi} is not feasible"
        )));
    }
    while hi - lo > tol / 8.0 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rate_is_feasible(gc, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Three-case closed form.
pub fn xi_closed_form(gc: &GrowthConstants, formula: Formula) -> Result<XiResult> {
    let variant = match formula {
        Formula::AsPrinted => Variant::AsPrinted,
        Formula::Corrected => Variant::Corrected,
    };
    let (c, c_hat, k, k_hat, delta) = (gc.c, gc.c_hat, gc.k, gc.k_hat, gc.delta);
    let d = gc.df();
    let excess = gc.two_point_ceiling() - k_hat;
    if excess <= 0.0 {
        return Ok(XiResult {
            xi: k_hat,
            case_label: CaseLabel::KhatDominant,
            gamma_star: None,
            gamma_value: None,
            variant,
        });
    }

    let condition =
        2.0 * sqrt(c * k) * delta * d + c * d * d - 2.0 * c * delta * d + delta * (k_hat - c_hat);
    let (gamma, case_label) = if condition >= 0.0 {
        let label = if delta == d {
            CaseLabel::Gamma1EqualDim
        } else {
            CaseLabel::Gamma1SubDim
        };
        (gamma_one(gc, excess, formula), label)
    } else {
        (gamma_two(gc, formula)?, CaseLabel::Gamma2)
    };
    let xi = k_hat + 2.0 * sqrt(k * delta * gamma);
    if !xi.is_finite() {
        return Err(Error::Inconsistent(format!(
            "closed form produced non-finite xi for {gc:?}"
        )));
    }
    Ok(XiResult {
        xi,
        case_label,
        gamma_star: None,
        gamma_value: Some(gamma),
        variant,
    })
}

fn gamma_one(gc: &GrowthConstants, excess: f64, formula: Formula) -> f64 {
    let d = gc.df();
    let kd = gc.k * gc.delta;
    let slack = 1.0 - gc.delta / d;
    match formula {
        Formula::AsPrinted => {
            if gc.delta == d {
                excess / (2.0 * sqrt(gc.k * d))
            } else {
                let s = (-sqrt(kd) + sqrt(kd + slack * excess)) / slack;
                s * s
            }
        }
        Formula::Corrected => {
            // positive root of slack*s^2 + 2 sqrt(k delta) s - excess = 0 in
            // conjugate form; continuous through slack = 0 (delta = d)
            let s = excess / (sqrt(kd) + sqrt(kd + slack * excess));
            s * s
        }
    }
}

fn gamma_two(gc: &GrowthConstants, formula: Formula) -> Result<f64> {
    let (sc, sk) = (sqrt(gc.c), sqrt(gc.k));
    let mut disc = (sc - sk) * (sc - sk) * gc.delta + gc.c_hat - gc.k_hat;
    let scale = (gc.c_hat.abs() + gc.k_hat.abs() + (gc.c + gc.k) * gc.delta).max(1.0);
    if disc < 0.0 {
        if disc < -1e-12 * scale {
            return Err(Error::Inconsistent(format!(
                "gamma_2 discriminant {disc} < 0 in the gamma_2 case"
            )));
        }
        disc = 0.0;
    }
    let root = sqrt(disc);
    let s = match formula {
        Formula::AsPrinted => sqrt(gc.c * gc.delta) + sqrt(gc.k * gc.delta) + root,
        Formula::Corrected => {
            // larger root of s^2 + 2 b s + e = 0
            let b = sqrt(gc.k * gc.delta) - sqrt(gc.c * gc.delta);
            let e = gc.k_hat - gc.c_hat;
            if b <= 0.0 {
                -b + root
            } else {
                -e / (b + root)
            }
        }
    };
    Ok(s * s)
}

/// Corrected closed form cross-checked against [`xi_oracle_ximax`].
///
/// Fails with [`Error::Inconsistent`] if the two disagree by more than
/// `1e-6` relative (absolute below magnitude one).
pub fn xi_checked(gc: &GrowthConstants) -> Result<XiResult> {
    let closed = xi_closed_form(gc, Formula::Corrected)?;
    let oracle = xi_oracle_ximax(gc, DEFAULT_TOL)?;
    let err = (closed.xi - oracle.xi).abs() / oracle.xi.abs().max(1.0);
    if err > 1e-6 {
        return Err(Error::Inconsistent(format!(
            "closed form {} vs oracle {} for {gc:?}",
            closed.xi, oracle.xi
        )));
    }
    Ok(closed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gc(c: f64, c_hat: f64, k: f64, k_hat: f64, d: u32, delta: f64) -> GrowthConstants {
        GrowthConstants::new(c, c_hat, k, k_hat, d, delta).unwrap()
    }

    /// Brute-force infimum on a dense log grid in gamma, refined locally.
    fn dense_grid_xi(g: &GrowthConstants) -> f64 {
        let mut best = sandwich(g).1;
        let mut best_gamma = 0.0;
        let n = 200_000;
        for i in 0..n {
            let gamma = 10f64.powf(-12.0 + 20.0 * i as f64 / n as f64);
            let v = ximax_objective(g, gamma);
            if v < best {
                best = v;
                best_gamma = gamma;
            }
        }
        if best_gamma > 0.0 {
            for i in 0..200_000 {
                let gamma = best_gamma * (0.999 + 0.002 * i as f64 / 200_000.0);
                best = best.min(ximax_objective(g, gamma));
            }
        }
        best
    }

    #[test]
    fn ximax_finds_narrow_dip_past_flat_segment() {
        // delta = d makes h flat on (0, c d]; the crossing lies just past it
        let gc = GrowthConstants::new(
            2.064621653748516,
            -3.3341694199698235,
            0.3567342109888645,
            -1.9777782380080995,
            4,
            4.0,
        )
        .unwrap();
        let want = 4.924087594226498;
        assert!((xi_oracle_ximax(&gc, DEFAULT_TOL).unwrap().xi - want).abs() < 1e-12);
        assert!((xi_oracle_feasibility(&gc, DEFAULT_TOL).unwrap() - want).abs() < 2e-9);
        assert!((xi_checked(&gc).unwrap().xi - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_constants() {
        assert!(GrowthConstants::new(0.0, 0.0, 1.0, 0.0, 2, 1.0).is_err());
        assert!(GrowthConstants::new(1.0, 0.0, 0.0, 0.0, 2, 1.0).is_err());
        assert!(GrowthConstants::new(1.0, 0.0, 1.0, 0.0, 1, 1.0).is_err());
        assert!(GrowthConstants::new(1.0, 0.0, 1.0, 0.0, 2, 2.5).is_err());
        assert!(GrowthConstants::new(1.0, 0.0, 1.0, 0.0, 2, -0.1).is_err());
        assert!(GrowthConstants::new(1.0, f64::NAN, 1.0, 0.0, 2, 1.0).is_err());
    }

    #[test]
    fn raw_tail_exponents() {
        let g = gc(1.0, 0.0, 1.0, 0.0, 2, 1.0);
        let t = tail_exponents(&g, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(t.two_point, 3.0);
        assert_eq!(t.one_point, 5.0);
        assert!(tail_exponents(&g, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn optimized_tail_exponents_examples() {
        let g = gc(1.0, 0.0, 1.0, 0.0, 2, 1.0);
        // at r = k_hat the square vanishes
        assert_eq!(one_point_optimized(&g, 0.0, 1.7).unwrap(), 1.7);
        // r = 3 sits on the interior branch (threshold 2cd + c_hat - gamma = 3)
        assert_eq!(two_point_optimized(&g, 3.0, 1.0), -3.0);
        assert!(matches!(
            one_point_optimized(&g, -0.5, 1.0),
            Err(Error::RateBelowKhat { .. })
        ));
    }

    #[test]
    fn optimized_two_point_is_minimum_over_q() {
        let g = gc(1.3, -0.4, 0.7, 0.2, 3, 1.6);
        for &(r, gamma) in &[(0.5, 0.3), (5.0, 2.0), (9.0, 0.1), (2.0, 8.0)] {
            let brute = (0..200_000)
                .map(|i| 3.0 + i as f64 * 1e-4)
                .map(|q| tail_exponents(&g, r, gamma, q).unwrap().two_point)
                .fold(f64::INFINITY, f64::min);
            assert!(
                (two_point_optimized(&g, r, gamma) - brute).abs() < 1e-6,
                "r={r} gamma={gamma}"
            );
        }
    }

    #[test]
    fn ximax_pinned_examples() {
        let g = gc(1.0, 0.0, 1.0, 0.0, 2, 2.0);
        let r = xi_oracle_ximax(&g, 1e-9).unwrap();
        assert!((r.xi - 2.0).abs() < 1e-9);
        assert!(r.gamma_star.unwrap() <= 0.5 + 1e-9);
        assert_eq!(r.variant, Variant::Oracle);

        let g = gc(1.0, 0.0, 1.0, 5.0, 2, 1.0);
        assert!((xi_oracle_ximax(&g, 1e-9).unwrap().xi - 5.0).abs() < 1e-9);

        let g = gc(1.0, 0.0, 1.0, 0.0, 2, 1.0);
        let r = xi_oracle_ximax(&g, 1e-9).unwrap();
        assert!((r.xi - 4.0 * (2f64.sqrt() - 1.0)).abs() < 1e-9);
        assert!((r.gamma_star.unwrap() - (12.0 - 8.0 * 2f64.sqrt())).abs() < 1e-6);

        let g = gc(1.0, 10.0, 1.0, 0.0, 2, 1.0);
        let r = xi_oracle_ximax(&g, 1e-9).unwrap();
        assert!((r.xi - 2.0 * 10f64.sqrt()).abs() < 1e-9);
        assert!((r.gamma_star.unwrap() - 10.0).abs() < 1e-5);
    }

    #[test]
    fn ximax_matches_dense_grid() {
        for g in [
            gc(1.0, 0.0, 1.0, 0.0, 2, 1.0),
            gc(1.0, 10.0, 1.0, 0.0, 2, 1.0),
            gc(0.3, -2.0, 4.0, 1.0, 3, 2.2),
            gc(7.0, 3.0, 0.2, -5.0, 5, 0.4),
        ] {
            let oracle = xi_oracle_ximax(&g, 1e-9).unwrap().xi;
            let brute = dense_grid_xi(&g);
            assert!(oracle <= brute + 1e-9, "{g:?}: {oracle} > {brute}");
            assert!(
                (oracle - brute).abs() < 1e-4 * brute.abs().max(1.0),
                "{g:?}: {oracle} vs {brute}"
            );
        }
    }

    #[test]
    fn feasibility_examples() {
        let cases = [
            (gc(1.0, 0.0, 1.0, 0.0, 2, 2.0), 2.0),
            (gc(1.0, 0.0, 1.0, 5.0, 2, 1.0), 5.0),
            (gc(1.0, 10.0, 1.0, 0.0, 2, 1.0), 2.0 * 10f64.sqrt()),
        ];
        for (g, want) in cases {
            let got = xi_oracle_feasibility(&g, 1e-9).unwrap();
            assert!((got - want).abs() < 2e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn closed_form_examples() {
        let g = gc(1.0, 0.0, 1.0, 0.0, 2, 1.0);
        let r = xi_closed_form(&g, Formula::Corrected).unwrap();
        assert_eq!(r.case_label, CaseLabel::Gamma1SubDim);
        assert!((r.xi - 4.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12);
        let printed = xi_closed_form(&g, Formula::AsPrinted).unwrap();
        assert!((printed.xi - r.xi).abs() < 1e-12);

        let g = gc(1.0, 0.0, 1.0, 0.0, 2, 2.0);
        let r = xi_closed_form(&g, Formula::Corrected).unwrap();
        assert_eq!(r.case_label, CaseLabel::Gamma1EqualDim);
        assert!((r.xi - 2.0).abs() < 1e-12);
        let printed = xi_closed_form(&g, Formula::AsPrinted).unwrap();
        assert!((printed.xi - 2.0 * 2f64.powf(0.25)).abs() < 1e-12);
        assert!(printed.xi > sandwich(&g).1);

        let g = gc(1.0, 10.0, 1.0, 0.0, 2, 1.0);
        let r = xi_closed_form(&g, Formula::Corrected).unwrap();
        assert_eq!(r.case_label, CaseLabel::Gamma2);
        assert!((r.xi - 2.0 * 10f64.sqrt()).abs() < 1e-12);
        assert!((r.gamma_value.unwrap() - 10.0).abs() < 1e-12);
        let printed = xi_closed_form(&g, Formula::AsPrinted).unwrap();
        assert!((printed.xi - r.xi).abs() > 1.0);

        let g = gc(1.0, 0.0, 1.0, 5.0, 2, 1.0);
        assert_eq!(
            xi_closed_form(&g, Formula::Corrected).unwrap().case_label,
            CaseLabel::KhatDominant
        );
    }

    #[test]
    fn delta_zero_gives_k_hat() {
        for &(c, c_hat, k, k_hat) in &[
            (1.0, 0.0, 1.0, 0.0),
            (3.0, -4.0, 0.5, 2.5),
            (0.2, 9.0, 8.0, -3.0),
        ] {
            let g = gc(c, c_hat, k, k_hat, 3, 0.0);
            assert_eq!(xi_closed_form(&g, Formula::Corrected).unwrap().xi, k_hat);
            assert_eq!(xi_oracle_ximax(&g, 1e-9).unwrap().xi, k_hat);
            assert!((xi_oracle_feasibility(&g, 1e-9).unwrap() - k_hat).abs() < 2e-9);
        }
    }

    #[test]
    fn sandwich_examples() {
        assert_eq!(sandwich(&gc(1.0, 0.0, 1.0, 0.0, 2, 1.0)), (0.0, 2.0));
        assert_eq!(sandwich(&gc(1.0, 0.0, 1.0, 5.0, 2, 1.0)), (5.0, 5.0));
        assert_eq!(sandwich(&gc(2.0, 1.0, 1.0, 0.0, 3, 3.0)), (0.0, 7.0));
    }

    #[test]
    fn equal_rates_at_full_dimension_hit_ceiling() {
        for &(c, c_hat, d) in &[(1.0, 0.0, 2u32), (2.5, -1.0, 4), (0.4, 3.0, 6)] {
            let g = gc(c, c_hat, c, c_hat, d, d as f64);
            let want = c * d as f64 + c_hat;
            assert!((xi_closed_form(&g, Formula::Corrected).unwrap().xi - want).abs() < 1e-12);
            assert!((xi_oracle_ximax(&g, 1e-9).unwrap().xi - want).abs() < 1e-9);
        }
    }

    #[test]
    fn checked_xi_accepts_consistent_values() {
        let g = gc(246.0, -2.0, 1.5, 0.0, 2, 1.0);
        let r = xi_checked(&g).unwrap();
        assert_eq!(r.variant, Variant::Corrected);
    }

    proptest::proptest! {
        #[test]
        fn oracles_agree_and_respect_sandwich(
            c in 0.1f64..10.0, k in 0.1f64..10.0,
            c_hat in -10.0f64..10.0, k_hat in -10.0f64..10.0,
            d in 2u32..=6, frac in 0.0f64..=1.0,
        ) {
            let g = gc(c, c_hat, k, k_hat, d, frac * d as f64);
            let a = xi_oracle_ximax(&g, 1e-9).unwrap().xi;
            let b = xi_oracle_feasibility(&g, 1e-9).unwrap();
            let cf = xi_closed_form(&g, Formula::Corrected).unwrap().xi;
            let (lo, hi) = sandwich(&g);
            proptest::prop_assert!((a - b).abs() <= 2e-9, "{} vs {}", a, b);
            proptest::prop_assert!((cf - a).abs() <= 1e-6 * a.abs().max(1e-300) || (cf - a).abs() < 1e-12);
            proptest::prop_assert!(lo <= cf && cf <= hi);
        }

        #[test]
        fn xi_non_decreasing_in_delta(
            c in 0.1f64..10.0, k in 0.1f64..10.0,
            c_hat in -10.0f64..10.0, k_hat in -10.0f64..10.0,
            d in 2u32..=6, f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0,
        ) {
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let g1 = gc(c, c_hat, k, k_hat, d, lo * d as f64);
            let g2 = g1.with_delta(hi * d as f64).unwrap();
            let x1 = xi_closed_form(&g1, Formula::Corrected).unwrap().xi;
            let x2 = xi_closed_form(&g2, Formula::Corrected).unwrap().xi;
            proptest::prop_assert!(x1 <= x2 + 1e-12 * x2.abs().max(1.0));
        }
    }
}
