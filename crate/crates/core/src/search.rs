//! Box-constrained Nelder–Mead simplex.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

/// Options for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_evaluations: usize,
    /// Stop when the spread of simplex values falls below this (absolute).
    pub f_tol: f64,
    /// Stop when every vertex lies within this distance of the best one.
    pub x_tol: f64,
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 400,
            f_tol: 1e-10,
            x_tol: 1e-9,
            initial_step: 0.1,
        }
    }
}

/// Outcome of a simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMin {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead on the box `[lower, upper]`; trial points are projected onto
/// the box before evaluation.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: SimplexOptions,
) -> SimplexMin {
    let n = start.len();
    assert!(n > 0 && lower.len() == n && upper.len() == n);
    let clamp = |x: &mut [f64]| {
        for i in 0..n {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0);
    simplex.push(x0.clone());
    for i in 0..n {
        let mut v = x0.clone();
        let span = upper[i] - lower[i];
        let step = opts.initial_step
            * if span.is_finite() && span > 0.0 {
                span
            } else {
                1.0
            };
        v[i] = if v[i] + step <= upper[i] {
            v[i] + step
        } else {
            v[i] - step
        };
        clamp(&mut v);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

    let mut converged = false;
    while evals < opts.max_evaluations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|v| {
                sqrt(
                    v.iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>(),
                )
            })
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol && size <= opts.x_tol.max(1e-15) {
            converged = true;
            break;
        }
        if size <= 1e-15 {
            converged = spread.abs() <= opts.f_tol;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }
        let along = |t: f64| {
            let mut p: Vec<f64> = (0..n)
                .map(|i| centroid[i] + t * (simplex[n][i] - centroid[i]))
                .collect();
            clamp(&mut p);
            p
        };

        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for j in 1..=n {
                    let mut p: Vec<f64> = (0..n)
                        .map(|i| best[i] + 0.5 * (simplex[j][i] - best[i]))
                        .collect();
                    clamp(&mut p);
                    values[j] = eval(&p, &mut evals);
                    simplex[j] = p;
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    SimplexMin {
        x: simplex[best].clone(),
        value: values[best],
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_minimizes_rosenbrock_in_box() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = SimplexOptions {
            max_evaluations: 5000,
            f_tol: 1e-14,
            x_tol: 1e-10,
            initial_step: 0.1,
        };
        let m = nelder_mead(rosen, &[-1.0, 1.5], &[-2.0, -2.0], &[2.0, 2.0], opts);
        assert!(m.value < 1e-8, "{m:?}");
    }

    #[test]
    fn simplex_respects_box() {
        let m = nelder_mead(
            |x| x[0] + x[1],
            &[0.5, 0.5],
            &[0.2, 0.1],
            &[1.0, 1.0],
            SimplexOptions::default(),
        );
        assert!((m.x[0] - 0.2).abs() < 1e-8 && (m.x[1] - 0.1).abs() < 1e-8);
    }
}
