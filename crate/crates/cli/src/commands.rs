//! One function per subcommand: resolve parameters, call the library, and
//! package the result for every output format the command supports.

use std::collections::BTreeMap;
use std::path::Path;

use flowgrowth_core::boxdim::{box_count, default_scales, fit_dimension, generate_set, SetKind};
use flowgrowth_core::curve::uniform_grid;
use flowgrowth_core::ibf::{build_model, ibf_growth_constants, ibf_xi, IbfModel};
use flowgrowth_core::moment::{
    f_bound_log, g_bound, gronwall_log_bound, gronwall_picard_oracle, theorem_constants,
};
use flowgrowth_core::rate::{
    sandwich, xi_checked, xi_closed_form, xi_oracle_feasibility, xi_oracle_ximax, Formula,
    MomentRates, DEFAULT_TOL,
};
use flowgrowth_core::sim::{
    estimate_moments, growth_rate, verify_report_from, EnsembleKind, PathEnsemble, RateEstimate,
    SimConfig, VerifyReport, DEFAULT_Q_LIST,
};
use flowgrowth_core::split::optimize_split;
use flowgrowth_core::{CharacteristicBounds, GrowthConstants, HoelderSplit, MomentCurve, XiResult};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::config::{merge, required, resolved_parameters};
use crate::error::{CliError, CliResult};
use crate::formats::{
    curve_csv, ensemble_bin, ensemble_csv, num, nums, read_curve_csv, read_point_cloud_csv,
    read_table_csv,
};
use crate::parallel;
use crate::plot::{emit_svg, Series};

/// Everything a command can emit.
#[derive(Debug, Default)]
pub struct Artifact {
    pub parameters: Value,
    pub result: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub bin: Option<Vec<u8>>,
    /// Set when a verification inside the command failed.
    pub failure: Option<String>,
}

fn resolve<T: Serialize + DeserializeOwned + Default>(
    args: &T,
    file: &Map<String, Value>,
) -> CliResult<T> {
    merge(args, file)
}

pub fn xi_json(r: &XiResult) -> Value {
    json!({
        "xi": num(r.xi),
        "case": r.case_label.as_str(),
        "variant": r.variant.as_str(),
        "gamma": r.gamma_value.map(num),
        "gamma_star": r.gamma_star.map(num),
    })
}

fn rates_json(m: &MomentRates) -> Value {
    json!({ "c": num(m.c), "c_hat": num(m.c_hat), "k": num(m.k), "k_hat": num(m.k_hat), "d": m.d })
}

fn curve_json(c: &MomentCurve) -> Value {
    json!({ "label": c.label(), "t": nums(c.grid().iter().copied()), "log_value": nums(c.log_values().iter().copied()) })
}

fn growth_constants(a: &RateArgs) -> CliResult<GrowthConstants> {
    Ok(GrowthConstants::new(
        required(&a.c, "c")?,
        required(&a.chat, "chat")?,
        required(&a.k, "k")?,
        required(&a.khat, "khat")?,
        required(&a.d, "d")?,
        required(&a.delta, "delta")?,
    )?)
}

pub fn xi(args: &XiArgs, file: &Map<String, Value>) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let gc = growth_constants(&a.rate)?;
    let formula = a.formula.unwrap_or(FormulaArg::Corrected);
    a.formula = Some(formula);
    let r = match formula {
        FormulaArg::Corrected => xi_checked(&gc)?,
        FormulaArg::AsPrinted => xi_closed_form(&gc, Formula::AsPrinted)?,
    };
    let (lo, hi) = sandwich(&gc);
    let mut result = xi_json(&r);
    result["sandwich"] = json!({ "lower": num(lo), "upper": num(hi) });
    let csv = format!(
        "xi,case,variant,gamma\n{},{},{},{}\n",
        r.xi,
        r.case_label.as_str(),
        r.variant.as_str(),
        r.gamma_value.map_or(String::new(), |g| g.to_string())
    );
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result,
        csv: Some(csv),
        ..Default::default()
    })
}

pub fn xi_oracle(args: &XiOracleArgs, file: &Map<String, Value>) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let gc = growth_constants(&a.rate)?;
    let tol = a.tol.unwrap_or(DEFAULT_TOL);
    a.tol = Some(tol);
    let ximax = xi_oracle_ximax(&gc, tol)?;
    let feasible = xi_oracle_feasibility(&gc, tol)?;
    let result = json!({
        "ximax": xi_json(&ximax),
        "feasibility": { "xi": num(feasible) },
        "agreement": num((ximax.xi - feasible).abs()),
    });
    let csv = format!("route,xi\nximax,{}\nfeasibility,{}\n", ximax.xi, feasible);
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result,
        csv: Some(csv),
        ..Default::default()
    })
}

pub fn gronwall(args: &GronwallArgs, file: &Map<String, Value>) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let c1 = required(&a.c1, "c1")?;
    let c2 = required(&a.c2, "c2")?;
    let grid_n = a.grid.unwrap_or(200);
    a.grid = Some(grid_n);
    if grid_n == 0 {
        return Err(CliError::validation("grid", "must be >= 1"));
    }
    let forcing = match (&a.h, &a.h_csv) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation(
                "h",
                "give either h or h-csv, not both",
            ))
        }
        (Some(h), None) => {
            let horizon = required(&a.horizon, "horizon")?;
            if !(horizon > 0.0 && horizon.is_finite()) {
                return Err(CliError::validation(
                    "horizon",
                    format!("must be positive and finite, got {horizon}"),
                ));
            }
            MomentCurve::constant(vec![0.0, horizon], *h, "H")?
        }
        (None, Some(path)) => {
            let c = read_curve_csv(path, "H")?;
            if a.horizon.is_some_and(|h| h != c.t_max()) {
                return Err(CliError::validation(
                    "horizon",
                    "must equal the last time of h-csv",
                ));
            }
            c
        }
        (None, None) => return Err(CliError::validation("h", "required (or h-csv)")),
    };
    if !forcing.is_non_decreasing() {
        return Err(CliError::validation("h", "forcing must be non-decreasing"));
    }
    let horizon = forcing.t_max();
    a.horizon = Some(horizon);
    let picard = a.picard.unwrap_or(true);
    a.picard = Some(picard);

    let bound_at =
        |t: f64| -> CliResult<f64> { Ok(gronwall_log_bound(c1, c2, forcing.log_value_at(t)?, t)?) };
    let grid = uniform_grid(horizon, grid_n);
    let logs = grid
        .iter()
        .map(|&t| bound_at(t))
        .collect::<CliResult<Vec<_>>>()?;
    let bound = MomentCurve::new(grid, logs, "gronwall bound")?;
    let mut result = json!({ "rate": num(c1 + 2.0 * c2.sqrt()), "bound": curve_json(&bound) });
    let mut series = vec![Series::from(&bound)];
    if picard {
        match gronwall_picard_oracle(c1, c2, &forcing, 4096, 100_000) {
            Ok(p) => {
                let mut worst = 0.0f64;
                for (t, l) in p.grid().iter().zip(p.log_values()) {
                    worst = worst.max(l - bound_at(*t)?);
                }
                result["picard"] = json!({
                    "curve": curve_json(&p),
                    "max_log_excess": num(worst),
                    "dominated": worst <= 1e-6,
                });
                series.push(Series::from(&p.with_label("picard fixed point")));
            }
            Err(flowgrowth_core::Error::Diverged { time }) => {
                result["picard"] = json!({ "diverged_at": num(time) });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let svg = emit_svg(&series)?;
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result,
        csv: Some(curve_csv(&bound)),
        svg: Some(svg),
        ..Default::default()
    })
}

fn characteristic_bounds(b: &mut BoundsArgs) -> CliResult<CharacteristicBounds> {
    let cb = CharacteristicBounds {
        k1: required(&b.k1, "k1")?,
        k2: *b.k2.get_or_insert(0.0),
        k3: *b.k3.get_or_insert(0.0),
        k4: *b.k4.get_or_insert(0.0),
        lambda_cap: *b.lambda.get_or_insert(0.0),
        sigma: *b.sigma.get_or_insert(0.0),
        c_bar: *b.c_bar.get_or_insert(1.0),
        d: required(&b.d, "d")?,
    };
    cb.validate()?;
    Ok(cb)
}

fn split_json(hs: &HoelderSplit) -> Value {
    json!({ "alpha": nums(hs.alpha()), "beta": nums(hs.beta()) })
}

pub fn constants(args: &ConstantsArgs, file: &Map<String, Value>) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let cb = characteristic_bounds(&mut a.bounds)?;
    let s = &mut a.split;
    let hs = HoelderSplit::from_free(
        *s.alpha2.get_or_insert(2.0),
        *s.alpha3.get_or_insert(2.0),
        *s.beta1.get_or_insert(2.0),
        *s.beta3.get_or_insert(2.0),
    )?;
    let rates = theorem_constants(&cb, &hs)?;
    let mut result = json!({ "moment_rates": rates_json(&rates), "split": split_json(&hs) });
    if let Some(delta) = a.delta {
        result["xi"] = xi_json(&xi_checked(&rates.with_delta(delta)?)?);
    }
    let mut curves = Vec::new();
    if let Some(p) = a.p {
        let horizon = required(&a.horizon, "horizon")?;
        let grid_n = *a.grid.get_or_insert(256);
        let grid = uniform_grid(horizon, grid_n.max(1));
        let logs = grid
            .iter()
            .map(|&t| f_bound_log(&cb, &hs, p, t))
            .collect::<Result<Vec<_>, _>>()?;
        let f = MomentCurve::new(grid, logs, format!("f bound, p = {p}"))?;
        result["f_bound"] = curve_json(&f);
        curves.push(f);
        if let Some(sep) = a.separation {
            let g = g_bound(&cb, &hs, p, sep, horizon, grid_n)?;
            result["g_bound"] = curve_json(&g.curve);
            result["g_bound"]["panels"] = json!(g.panels);
            result["g_bound"]["refinement_change"] = num(g.refinement_change);
            curves.push(g.curve.with_label(format!("g bound, p = {p}")));
        }
    } else if a.separation.is_some() || a.horizon.is_some() {
        return Err(CliError::validation("p", "required for bound curves"));
    }
    let csv = curves.first().map(curve_csv);
    let svg = if curves.is_empty() {
        None
    } else {
        Some(emit_svg(
            &curves.iter().map(Series::from).collect::<Vec<_>>(),
        )?)
    };
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result,
        csv,
        svg,
        ..Default::default()
    })
}

pub fn optimize(args: &OptimizeArgs, file: &Map<String, Value>) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let cb = characteristic_bounds(&mut a.bounds)?;
    let delta = required(&a.delta, "delta")?;
    let budget = *a.budget.get_or_insert(400);
    let opt = optimize_split(&cb, delta, budget)?;
    let result = json!({
        "split": split_json(&opt.split),
        "xi": xi_json(&opt.xi),
        "default_xi": num(opt.default_xi),
        "flat_directions": opt.flat_directions.iter().map(|p| p.as_str()).collect::<Vec<_>>(),
        "evaluations": opt.evaluations,
        "converged": opt.converged,
    });
    let csv = format!(
        "xi,default_xi,evaluations,converged\n{},{},{},{}\n",
        opt.xi.xi, opt.default_xi, opt.evaluations, opt.converged
    );
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result,
        csv: Some(csv),
        ..Default::default()
    })
}

fn model_from(m: &mut ModelArgs) -> CliResult<IbfModel> {
    let id = m
        .model
        .get_or_insert_with(|| "potential-gaussian".into())
        .clone();
    let d = required(&m.d, "d")?;
    let mut params = BTreeMap::new();
    let table = match id.as_str() {
        "potential-gaussian" => {
            params.insert("ell".to_string(), required(&m.ell, "ell")?);
            None
        }
        "user-table" => {
            params.insert("beta_L".to_string(), required(&m.beta_l, "beta-l")?);
            params.insert("beta_N".to_string(), required(&m.beta_n, "beta-n")?);
            Some(read_table_csv(&required(&m.table, "table")?)?)
        }
        other => {
            return Err(CliError::validation(
                "model",
                format!("unknown catalog id {other:?}"),
            ))
        }
    };
    Ok(build_model(&id, &params, table, d)?)
}

fn model_json(m: &IbfModel) -> Value {
    let params: Map<String, Value> = m
        .params()
        .iter()
        .map(|(k, v)| (k.clone(), num(*v)))
        .collect();
    json!({
        "catalog_id": m.catalog_id(),
        "params": params,
        "d": m.d(),
        "beta_L": num(m.beta_l()),
        "beta_N": num(m.beta_n()),
        "lambda1": num(m.lambda1()),
        "k1": num(m.k1()),
    })
}

pub fn ibf(args: &IbfArgs, file: &Map<String, Value>) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let model = model_from(&mut a.model)?;
    let delta = required(&a.delta, "delta")?;
    let rates = ibf_growth_constants(&model);
    let r = ibf_xi(&model, delta)?;
    let result = json!({ "model": model_json(&model), "growth_constants": rates_json(&rates), "xi": xi_json(&r) });
    let csv = format!(
        "xi,case,lambda1\n{},{},{}\n",
        r.xi,
        r.case_label.as_str(),
        model.lambda1()
    );
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result,
        csv: Some(csv),
        ..Default::default()
    })
}

fn sim_config(s: &mut SimConfigArgs) -> CliResult<SimConfig> {
    let cfg = SimConfig {
        horizon: required(&s.horizon, "horizon")?,
        dt: required(&s.dt, "dt")?,
        n_paths: required(&s.paths, "paths")?,
        seed: required(&s.seed, "seed")?,
        r0: *s.r0.get_or_insert(0.1),
        record_stride: *s.stride.get_or_insert(1),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn rate_json(r: &RateEstimate) -> Value {
    json!({
        "t": num(r.t),
        "rate": num(r.rate),
        "std_error": num(r.std_error),
        "n": r.n,
        "ci99": [num(r.lower99), num(r.upper99)],
    })
}

fn ensemble_summary(ens: &PathEnsemble, q: &[f64]) -> CliResult<Value> {
    let horizon = *ens.times().last().unwrap_or(&0.0);
    let moments = estimate_moments(ens, q, &[horizon])?;
    let rate = match growth_rate(ens, horizon) {
        Ok(r) => rate_json(&r),
        Err(_) => Value::Null,
    };
    Ok(json!({
        "kind": ens.kind().as_str(),
        "n_paths": ens.n_paths(),
        "times": nums(ens.times().iter().copied()),
        "moments": moments.iter().map(|m| json!({
            "q": num(m.q), "t": num(m.t), "estimate": num(m.estimate),
            "std_error": num(m.std_error), "n": m.n, "log_domain": m.log_domain,
        })).collect::<Vec<_>>(),
        "growth_rate": rate,
    }))
}

fn ensemble_svg(ens: &PathEnsemble) -> CliResult<String> {
    let n = ens.n_paths().min(5);
    let series: Vec<Series> = (0..n)
        .map(|i| Series {
            label: format!("path {}", ens.stream_ids()[i]),
            xs: ens.times().to_vec(),
            log_ys: match ens.kind() {
                EnsembleKind::Rho => ens.path(i).iter().map(|v| v.ln()).collect(),
                // values are already natural logs
                EnsembleKind::LogDerivativeNorm => ens.path(i).to_vec(),
            },
        })
        .collect();
    emit_svg(&series)
}

pub fn simulate(
    kind: EnsembleKind,
    args: &SimArgs,
    file: &Map<String, Value>,
    workers: usize,
) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let model = model_from(&mut a.model)?;
    let cfg = sim_config(&mut a.sim)?;
    let q = a.q.get_or_insert_with(|| vec![1.0, 2.0]).clone();
    let ens = parallel::simulate(kind, &model, &cfg, workers)?;
    let mut result = ensemble_summary(&ens, &q)?;
    result["model"] = model_json(&model);
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result,
        csv: Some(ensemble_csv(&ens)),
        svg: Some(ensemble_svg(&ens)?),
        bin: Some(ensemble_bin(&ens)),
        failure: None,
    })
}

pub fn report_json(r: &VerifyReport) -> Value {
    let params: Map<String, Value> = r.params.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    json!({
        "model": { "catalog_id": r.catalog_id, "params": params, "d": r.d },
        "delta": num(r.delta),
        "lambda1": num(r.lambda1),
        "xi": num(r.xi),
        "xi_case": r.xi_case.as_str(),
        "xi_zero": num(r.xi_zero),
        "empirical_rate": rate_json(&r.empirical_rate),
        "checks": {
            "rate_matches_lyapunov": r.rate_matches_lyapunov,
            "rate_bound_consistency": r.rate_bound_consistent,
            "xi_monotone": r.xi_monotone,
            "moment_domination": r.domination.iter().all(|d| d.passed),
        },
        "domination": r.domination.iter().map(|d| json!({
            "q": num(d.q), "t": num(d.t), "estimate": num(d.estimate), "std_error": num(d.std_error),
            "log_domain": d.log_domain, "log_bound": num(d.log_bound), "passed": d.passed,
        })).collect::<Vec<_>>(),
        "failures": r.failures,
        "passed": r.passed,
    })
}

pub fn verify(args: &VerifyArgs, file: &Map<String, Value>, workers: usize) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let model = model_from(&mut a.model)?;
    let cfg = sim_config(&mut a.sim)?;
    let delta = *a.delta.get_or_insert(0.0);
    let q = a.q.get_or_insert_with(|| DEFAULT_Q_LIST.to_vec()).clone();
    let rho = parallel::simulate(EnsembleKind::Rho, &model, &cfg, workers)?;
    let der = parallel::simulate(EnsembleKind::LogDerivativeNorm, &model, &cfg, workers)?;
    let report = verify_report_from(&model, delta, &q, &rho, &der)?;
    let failure = (!report.passed).then(|| report.failures.join("; "));
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result: report_json(&report),
        failure,
        ..Default::default()
    })
}

pub fn boxdim(args: &BoxdimArgs, file: &Map<String, Value>) -> CliResult<Artifact> {
    let mut a = resolve(args, file)?;
    let (kind, pc) = match (&a.input, a.generate) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation(
                "input",
                "give either input or generate, not both",
            ))
        }
        (Some(path), None) => {
            let pc = read_point_cloud_csv(Path::new(path))?;
            if a.d.is_some_and(|d| d as usize != pc.d()) {
                return Err(CliError::validation(
                    "d",
                    format!("input has {} columns", pc.d()),
                ));
            }
            (None, pc)
        }
        (None, Some(set)) => {
            let d = *a.d.get_or_insert(2);
            let kind = match set {
                SetArg::CantorDust => {
                    let axes = a.axes.get_or_insert_with(|| vec![1]).clone();
                    if axes.contains(&0) {
                        return Err(CliError::validation("axes", "axes are 1-based"));
                    }
                    SetKind::CantorDust {
                        ratio: *a.ratio.get_or_insert(1.0 / 3.0),
                        depth: *a.depth.get_or_insert(8),
                        active_axes: axes.iter().map(|x| x - 1).collect(),
                    }
                }
                SetArg::GridCube => SetKind::GridCube {
                    spacing: *a.spacing.get_or_insert(1.0 / 256.0),
                },
            };
            let pc = generate_set(&kind, d as usize)?;
            (Some(kind), pc)
        }
        (None, None) => return Err(CliError::validation("input", "required (or generate)")),
    };
    let scales = match &a.scales {
        Some(s) => s.clone(),
        None => default_scales(kind.as_ref(), &pc),
    };
    let bc = box_count(&pc, &scales)?;
    let fit = fit_dimension(&bc)?;
    let result = json!({
        "n_points": pc.len(),
        "d": pc.d(),
        "analytic_dim": pc.analytic_dim().map(num),
        "dimension": num(fit.slope),
        "r2": num(fit.r2),
        "window": [fit.window.0, fit.window.1],
        "low_confidence": fit.low_confidence,
        "scales": nums(bc.scales.iter().copied()),
        "counts": bc.counts,
        "resolution_limited_from": bc.resolution_limited_from,
    });
    let mut csv = String::from("scale,count\n");
    for (s, c) in bc.scales.iter().zip(&bc.counts) {
        csv.push_str(&format!("{s},{c}\n"));
    }
    Ok(Artifact {
        parameters: resolved_parameters(&a),
        result,
        csv: Some(csv),
        ..Default::default()
    })
}
