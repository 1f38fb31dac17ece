//! Isotropic Brownian flow models.
//!
//! A model is fixed by its longitudinal and normal correlation functions
//! `B_L`, `B_N` (both equal to 1 at the origin). Their curvatures at 0,
//! `beta_L = -B_L''(0)` and `beta_N = -B_N''(0)`, determine the top Lyapunov
//! exponent `lambda1 = ((d - 1) beta_N - beta_L) / 2` and every constant of
//! the growth-rate bound.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{exp, expm1, log};
use crate::rate::{xi_checked, MomentRates, XiResult};

/// Catalog identifiers accepted by [`build_model`].
pub const CATALOG: [&str; 2] = ["potential-gaussian", "user-table"];

/// Grid spacing and length of the Taylor domination check.
pub const TAYLOR_STEP: f64 = 0.01;
pub const TAYLOR_POINTS: usize = 500;

/// Tabulated correlation functions, linearly interpolated and held constant
/// past the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    r: Vec<f64>,
    b_l: Vec<f64>,
    b_n: Vec<f64>,
}

impl CorrelationTable {
    pub fn new(r: Vec<f64>, b_l: Vec<f64>, b_n: Vec<f64>) -> Result<Self> {
        if r.len() < 2 {
            return Err(invalid("table", "needs at least two rows"));
        }
        if b_l.len() != r.len() || b_n.len() != r.len() {
            return Err(invalid("table", "columns r, B_L, B_N differ in length"));
        }
        if r[0] != 0.0 {
            return Err(invalid(
                "table",
                format!("r must start at 0, starts at {}", r[0]),
            ));
        }
        if let Some(w) = r.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid(
                "table",
                format!("r not strictly increasing at {} -> {}", w[0], w[1]),
            ));
        }
        if b_l[0] != 1.0 || b_n[0] != 1.0 {
            return Err(invalid(
                "table",
                format!("B_L(0) = {}, B_N(0) = {}, both must be 1", b_l[0], b_n[0]),
            ));
        }
        for (name, col) in [("B_L", &b_l), ("B_N", &b_n)] {
            if let Some((i, v)) = col.iter().enumerate().find(|(_, v)| !(v.abs() <= 1.0)) {
                return Err(invalid(
                    "table",
                    format!("{name} = {v} at r = {} outside [-1, 1]", r[i]),
                ));
            }
        }
        Ok(Self { r, b_l, b_n })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn b_l(&self) -> &[f64] {
        &self.b_l
    }

    pub fn b_n(&self) -> &[f64] {
        &self.b_n
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    fn interpolate(&self, col: &[f64], r: f64) -> f64 {
        if r >= self.r_max() {
            return col[col.len() - 1];
        }
        let i = self.r.partition_point(|&x| x <= r).max(1);
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let w = (r - r0) / (r1 - r0);
        col[i - 1] + w * (col[i] - col[i - 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Correlation {
    /// Gradient of a scalar field with covariance `ell^2 exp(-r^2 / (2 ell^2))`:
    /// `B_L = (1 - r^2/ell^2) exp(-r^2/(2 ell^2))`, `B_N = exp(-r^2/(2 ell^2))`.
    PotentialGaussian {
        ell: f64,
    },
    Table(CorrelationTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbfModel {
    d: u32,
    correlation: Correlation,
    beta_l: f64,
    beta_n: f64,
    lambda1: f64,
    k1: f64,
    catalog_id: String,
    params: BTreeMap<String, f64>,
}

impl IbfModel {
    pub fn potential_gaussian(ell: f64, d: u32) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(invalid(
                "ell",
                format!("must be positive and finite, got {ell}"),
            ));
        }
        let mut params = BTreeMap::new();
        params.insert("ell".to_string(), ell);
        let inv = 1.0 / (ell * ell);
        Self::assemble(
            d,
            Correlation::PotentialGaussian { ell },
            3.0 * inv,
            inv,
            "potential-gaussian",
            params,
        )
    }

    /// Tabulated model with declared curvatures. Only necessary conditions
    /// are checked; admissibility of the covariance is the caller's claim.
    pub fn from_table(table: CorrelationTable, beta_l: f64, beta_n: f64, d: u32) -> Result<Self> {
        for (field, v) in [("beta_L", beta_l), ("beta_N", beta_n)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(
                    field,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        let mut params = BTreeMap::new();
        params.insert("beta_L".to_string(), beta_l);
        params.insert("beta_N".to_string(), beta_n);
        Self::assemble(
            d,
            Correlation::Table(table),
            beta_l,
            beta_n,
            "user-table",
            params,
        )
    }

    fn assemble(
        d: u32,
        correlation: Correlation,
        beta_l: f64,
        beta_n: f64,
        catalog_id: &str,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if d < 2 {
            return Err(invalid("d", format!("must be >= 2, got {d}")));
        }
        let model = Self {
            d,
            correlation,
            beta_l,
            beta_n,
            lambda1: 0.5 * ((d - 1) as f64 * beta_n - beta_l),
            k1: beta_l.max(beta_n),
            catalog_id: catalog_id.to_string(),
            params,
        };
        model.check_taylor_domination()?;
        Ok(model)
    }

    /// `1 - B(r) <= beta r^2 / 2` on `r = 0.01 j`, `j = 1..500` (restricted to
    /// the table range for tabulated models), plus every table node.
    pub fn check_taylor_domination(&self) -> Result<()> {
        let mut rs: Vec<f64> = (1..=TAYLOR_POINTS)
            .map(|j| TAYLOR_STEP * j as f64)
            .collect();
        if let Correlation::Table(t) = &self.correlation {
            rs.retain(|&r| r <= t.r_max());
            rs.extend_from_slice(&t.r[1..]);
        }
        for r in rs {
            let slack = 1e-12 * (1.0 + r * r);
            if self.one_minus_b_l(r) > 0.5 * self.beta_l * r * r + slack {
                return Err(Error::TaylorViolation { which: "B_L", r });
            }
            if self.one_minus_b_n(r) > 0.5 * self.beta_n * r * r + slack {
                return Err(Error::TaylorViolation { which: "B_N", r });
            }
        }
        Ok(())
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn correlation(&self) -> &Correlation {
        &self.correlation
    }

    pub fn beta_l(&self) -> f64 {
        self.beta_l
    }

    pub fn beta_n(&self) -> f64 {
        self.beta_n
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn catalog_id(&self) -> &str {
        &self.catalog_id
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn b_l(&self, r: f64) -> f64 {
        1.0 - self.one_minus_b_l(r)
    }

    pub fn b_n(&self, r: f64) -> f64 {
        1.0 - self.one_minus_b_n(r)
    }

    /// `1 - B_L(r)` without cancellation for small `r`.
    pub fn one_minus_b_l(&self, r: f64) -> f64 {
        match &self.correlation {
            Correlation::PotentialGaussian { ell } => {
                let u = (r / ell) * (r / ell);
                -expm1(-0.5 * u) + u * exp(-0.5 * u)
            }
            Correlation::Table(t) => 1.0 - t.interpolate(&t.b_l, r),
        }
    }

    /// `1 - B_N(r)` without cancellation for small `r`.
    pub fn one_minus_b_n(&self, r: f64) -> f64 {
        match &self.correlation {
            Correlation::PotentialGaussian { ell } => -expm1(-0.5 * (r / ell) * (r / ell)),
            Correlation::Table(t) => 1.0 - t.interpolate(&t.b_n, r),
        }
    }
}

/// Builds a catalog model. `potential-gaussian` takes `ell`; `user-table`
/// takes `beta_L`, `beta_N` and the table.
pub fn build_model(
    catalog_id: &str,
    params: &BTreeMap<String, f64>,
    table: Option<CorrelationTable>,
    d: u32,
) -> Result<IbfModel> {
    let allowed: &[&str] = match catalog_id {
        "potential-gaussian" => &["ell"],
        "user-table" => &["beta_L", "beta_N"],
        other => {
            return Err(invalid(
                "model",
                format!("unknown catalog id {other:?}, expected one of {CATALOG:?}"),
            ))
        }
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(
            "params",
            format!("unexpected parameter {k:?} for {catalog_id}"),
        ));
    }
    let get = |key: &'static str| {
        params
            .get(key)
            .copied()
            .ok_or_else(|| invalid(key, format!("required by {catalog_id}")))
    };
    match catalog_id {
        "potential-gaussian" => IbfModel::potential_gaussian(get("ell")?, d),
        _ => {
            let table =
                table.ok_or_else(|| invalid("table", "user-table needs a correlation table"))?;
            IbfModel::from_table(table, get("beta_L")?, get("beta_N")?, d)
        }
    }
}

/// `c = 2 beta_L + 10 d^3 max(beta_L, beta_N)`, `c_hat = 2 lambda1`,
/// `k = beta_L / 2`, `k_hat = max(lambda1, 0)`.
pub fn ibf_growth_constants(model: &IbfModel) -> MomentRates {
    let d = model.d as f64;
    MomentRates {
        c: 2.0 * model.beta_l + 10.0 * d * d * d * model.k1,
        c_hat: 2.0 * model.lambda1,
        k: 0.5 * model.beta_l,
        k_hat: model.lambda1.max(0.0),
        d: model.d,
    }
}

/// Growth-rate bound of the flow over a set of box dimension `delta`.
pub fn ibf_xi(model: &IbfModel, delta: f64) -> Result<XiResult> {
    xi_checked(&ibf_growth_constants(model).with_delta(delta)?)
}

/// `log E rho_t^q <= q log r0 + (q lambda1 + q^2 beta_L / 2) t` for the
/// distance `rho_t` of two points started `r0` apart.
pub fn rho_moment_bound(model: &IbfModel, q: f64, r0: f64, t: f64) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(invalid("q", format!("must be >= 1, got {q}")));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(invalid("r0", format!("must be positive, got {r0}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    Ok(q * log(r0) + (q * model.lambda1 + 0.5 * q * q * model.beta_l) * t)
}

/// `log E ||D phi_t||_S^p`; the Schatten norm of the derivative is
/// `d^(1/4) exp(lambda1 t + sqrt(beta_L) W_t)`.
pub fn derivative_norm_law(model: &IbfModel, p: f64, t: f64) -> Result<f64> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(invalid("p", format!("must be >= 0, got {p}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(0.25 * p * log(model.d as f64) + (p * model.lambda1 + 0.5 * p * p * model.beta_l) * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{schatten_norm, Matrix};
    use crate::math::sqrt;
    use crate::rate::{xi_oracle_ximax, CaseLabel, DEFAULT_TOL};
    use alloc::vec;

    fn gaussian(ell: f64, d: u32) -> IbfModel {
        IbfModel::potential_gaussian(ell, d).unwrap()
    }

    // C(r) = ell^2 exp(-r^2 / (2 ell^2)); B_L = -C'' / -C''(0), B_N = (-C'/r) / -C''(0)
    fn potential(ell: f64, r: f64) -> f64 {
        ell * ell * exp(-r * r / (2.0 * ell * ell))
    }

    #[test]
    fn curvatures_match_finite_differences_of_the_potential() {
        let h = 1e-4;
        for &ell in &[0.5, 1.0, 2.0] {
            let m = gaussian(ell, 3);
            let c2_0 =
                -(potential(ell, h) - 2.0 * potential(ell, 0.0) + potential(ell, -h)) / (h * h);
            for &r in &[0.0, 0.3, 1.1, 2.5] {
                let c2 = -(potential(ell, r + h) - 2.0 * potential(ell, r) + potential(ell, r - h))
                    / (h * h);
                assert!((c2 / c2_0 - m.b_l(r)).abs() < 1e-6, "B_L ell={ell} r={r}");
                if r > 0.0 {
                    let c1 = -(potential(ell, r + h) - potential(ell, r - h)) / (2.0 * h);
                    assert!(
                        (c1 / r / c2_0 - m.b_n(r)).abs() < 1e-6,
                        "B_N ell={ell} r={r}"
                    );
                }
            }
            let bl2 = -(m.b_l(h) - 2.0 * m.b_l(0.0) + m.b_l(-h)) / (h * h);
            let bn2 = -(m.b_n(h) - 2.0 * m.b_n(0.0) + m.b_n(-h)) / (h * h);
            assert!((bl2 - m.beta_l()).abs() < 1e-6, "{bl2}");
            assert!((bn2 - m.beta_n()).abs() < 1e-6, "{bn2}");
        }
    }

    #[test]
    fn unit_gaussian_in_the_plane() {
        let m = gaussian(1.0, 2);
        assert_eq!(
            (m.beta_l(), m.beta_n(), m.lambda1(), m.k1()),
            (3.0, 1.0, -1.0, 3.0)
        );
        assert_eq!(gaussian(1.0, 4).lambda1(), 0.0);
        assert_eq!((m.b_l(0.0), m.b_n(0.0)), (1.0, 1.0));
        let g = ibf_growth_constants(&m);
        assert_eq!((g.c, g.c_hat, g.k, g.k_hat), (246.0, -2.0, 1.5, 0.0));
        let g4 = ibf_growth_constants(&gaussian(1.0, 4));
        assert_eq!((g4.c_hat, g4.k_hat), (0.0, 0.0));
    }

    #[test]
    fn stored_identities_hold_exactly() {
        for &(ell, d) in &[(0.3, 2), (1.0, 3), (1.7, 5), (4.0, 10)] {
            let m = gaussian(ell, d);
            assert_eq!(
                m.lambda1(),
                0.5 * ((d - 1) as f64 * m.beta_n() - m.beta_l())
            );
            assert_eq!(m.k1(), m.beta_l().max(m.beta_n()));
            assert!(m.check_taylor_domination().is_ok());
        }
    }

    #[test]
    fn xi_at_zero_dimension_is_positive_part_of_lambda1() {
        for &(ell, d) in &[(1.0, 2), (1.0, 4), (0.5, 6), (2.0, 3), (1.3, 9)] {
            let m = gaussian(ell, d);
            assert_eq!(ibf_xi(&m, 0.0).unwrap().xi, m.lambda1().max(0.0));
        }
    }

    #[test]
    fn xi_fixture_unit_gaussian_in_the_plane() {
        let m = gaussian(1.0, 2);
        let r = ibf_xi(&m, 1.0).unwrap();
        let oracle = xi_oracle_ximax(
            &ibf_growth_constants(&m).with_delta(1.0).unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!((r.xi - oracle.xi).abs() < 1e-6 * oracle.xi);
        assert!(
            (r.xi - XI_UNIT_GAUSSIAN_D2_DELTA1).abs() < 1e-9 * r.xi,
            "{}",
            r.xi
        );
        assert_eq!(r.case_label, CaseLabel::Gamma1SubDim);
        let mut prev = f64::NEG_INFINITY;
        for &delta in &[0.0, 0.5, 1.0, 1.5, 2.0] {
            let x = ibf_xi(&m, delta).unwrap().xi;
            assert!(x >= prev);
            prev = x;
        }
    }

    const XI_UNIT_GAUSSIAN_D2_DELTA1: f64 = 70.91553809211764;

    #[test]
    fn rho_and_derivative_laws() {
        let m = gaussian(1.0, 2);
        let b = rho_moment_bound(&m, 2.0, 0.1, 1.0).unwrap();
        assert!((b - (log(0.01) + 4.0)).abs() < 1e-14);
        assert!((exp(b) - 0.5460).abs() < 1e-4);
        assert!((rho_moment_bound(&m, 3.0, 0.2, 0.0).unwrap() - 3.0 * log(0.2)).abs() < 1e-15);
        assert!((rho_moment_bound(&m, 1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(rho_moment_bound(&m, 0.5, 1.0, 1.0).is_err());

        assert_eq!(derivative_norm_law(&m, 0.0, 3.0).unwrap(), 0.0);
        let l = derivative_norm_law(&m, 2.0, 1.0).unwrap();
        assert!((exp(l) - sqrt(2.0) * exp(4.0)).abs() < 1e-10);
        assert!((exp(l) - 77.22).abs() < 0.01);
        for d in 2..=6 {
            let md = gaussian(1.0, d);
            let at0 = exp(derivative_norm_law(&md, 1.0, 0.0).unwrap());
            let id = schatten_norm(&Matrix::identity(d as usize)).unwrap().value;
            assert!((at0 - id).abs() < 1e-14);
        }
    }

    #[test]
    fn table_models() {
        let g = gaussian(1.0, 2);
        let r: Vec<f64> = (0..=600).map(|i| i as f64 * 0.01).collect();
        let bl = r.iter().map(|&x| g.b_l(x)).collect();
        let bn = r.iter().map(|&x| g.b_n(x)).collect();
        let t = CorrelationTable::new(r.clone(), bl, bn).unwrap();
        let mut params = BTreeMap::new();
        params.insert("beta_L".to_string(), 3.0);
        params.insert("beta_N".to_string(), 1.0);
        let m = build_model("user-table", &params, Some(t.clone()), 2).unwrap();
        assert_eq!(m.lambda1(), -1.0);
        assert!((m.b_l(0.123) - g.b_l(0.123)).abs() < 1e-4);
        assert_eq!(m.b_n(100.0), t.b_n()[600]);

        // declared curvature too small for the data
        params.insert("beta_L".to_string(), 1.0);
        match build_model("user-table", &params, Some(t), 2) {
            Err(Error::TaylorViolation { which: "B_L", r }) => assert!(r > 0.0),
            other => panic!("{other:?}"),
        }
        assert!(CorrelationTable::new(vec![0.0, 1.0], vec![0.9, 0.5], vec![1.0, 0.5]).is_err());
        assert!(CorrelationTable::new(vec![0.0, 0.0], vec![1.0, 0.5], vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn build_model_validation() {
        let mut params = BTreeMap::new();
        params.insert("ell".to_string(), 1.0);
        assert_eq!(
            build_model("potential-gaussian", &params, None, 2).unwrap(),
            gaussian(1.0, 2)
        );
        assert!(build_model("solenoidal", &params, None, 2).is_err());
        assert!(build_model("potential-gaussian", &params, None, 1).is_err());
        assert!(build_model("user-table", &BTreeMap::new(), None, 2).is_err());
        params.insert("sigma".to_string(), 1.0);
        assert!(build_model("potential-gaussian", &params, None, 2).is_err());
        params.remove("sigma");
        params.insert("ell".to_string(), -1.0);
        assert!(build_model("potential-gaussian", &params, None, 2).is_err());
    }
}
