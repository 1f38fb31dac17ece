//! Point sets of known box dimension and a box-counting estimator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::{floor, log, pow, sqrt};

/// Largest number of generated points.
pub const MAX_POINTS: usize = 1 << 24;

/// Fraction of scales dropped at each end before fitting.
pub const TRIM_FRACTION: f64 = 0.125;

/// Fits with `r^2` below this are flagged.
pub const MIN_R2: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    d: usize,
    coords: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    analytic_dim: Option<f64>,
}

impl PointCloud {
    /// Cloud with the tight bounding box of its points.
    pub fn new(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("points", "point cloud must not be empty"));
        }
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for p in points {
            for (k, &x) in p.iter().enumerate().take(d) {
                lower[k] = lower[k].min(x);
                upper[k] = upper[k].max(x);
            }
        }
        Self::with_box(d, points, lower, upper, None)
    }

    /// Cloud inside a declared box `[lower, upper]`.
    pub fn with_box(
        d: usize,
        points: &[Vec<f64>],
        lower: Vec<f64>,
        upper: Vec<f64>,
        analytic_dim: Option<f64>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be >= 1"));
        }
        if points.is_empty() {
            return Err(invalid("points", "point cloud must not be empty"));
        }
        if lower.len() != d
            || upper.len() != d
            || lower
                .iter()
                .zip(&upper)
                .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
        {
            return Err(invalid(
                "box",
                "bounding box must be finite with lower <= upper in every coordinate",
            ));
        }
        let mut coords = Vec::with_capacity(points.len() * d);
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(invalid(
                    "points",
                    format!("point {i} has {} coordinates, expected {d}", p.len()),
                ));
            }
            for (k, &x) in p.iter().enumerate() {
                if !(x >= lower[k] && x <= upper[k]) {
                    return Err(invalid(
                        "points",
                        format!(
                            "point {i} coordinate {k} = {x} outside [{}, {}]",
                            lower[k], upper[k]
                        ),
                    ));
                }
            }
            coords.extend_from_slice(p);
        }
        Ok(Self {
            d,
            coords,
            lower,
            upper,
            analytic_dim,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn analytic_dim(&self) -> Option<f64> {
        self.analytic_dim
    }

    /// Shifts every point and the box by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.d {
            return Err(invalid(
                "offset",
                format!("expected {} coordinates", self.d),
            ));
        }
        let pts: Vec<Vec<f64>> = self
            .points()
            .map(|p| p.iter().zip(offset).map(|(x, o)| x + o).collect())
            .collect();
        let shift = |v: &[f64]| v.iter().zip(offset).map(|(x, o)| x + o).collect();
        Self::with_box(
            self.d,
            &pts,
            shift(&self.lower),
            shift(&self.upper),
            self.analytic_dim,
        )
    }

    fn min_separation(&self) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in 0..i {
                let s: f64 = self
                    .point(i)
                    .iter()
                    .zip(self.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let s = sqrt(s);
                if s > 0.0 {
                    best = Some(best.map_or(s, |b| b.min(s)));
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    /// Product of middle-cut Cantor sets with contraction `ratio` along the
    /// (0-based) `active_axes`; other coordinates sit at 0.5.
    CantorDust {
        ratio: f64,
        depth: u32,
        active_axes: Vec<usize>,
    },
    /// Cell centres of a uniform grid of the given spacing in `[0, 1]^d`.
    GridCube { spacing: f64 },
    /// Explicit finite set.
    FinitePoints { points: Vec<Vec<f64>> },
}

/// Generates a set in `[0, 1]^d` (finite sets keep their own bounding box)
/// with its analytic box dimension attached.
pub fn generate_set(kind: &SetKind, d: usize) -> Result<PointCloud> {
    if d == 0 {
        return Err(invalid("d", "must be >= 1"));
    }
    match kind {
        SetKind::CantorDust {
            ratio,
            depth,
            active_axes,
        } => cantor_dust(*ratio, *depth, active_axes, d),
        SetKind::GridCube { spacing } => grid_cube(*spacing, d),
        SetKind::FinitePoints { points } => {
            let pc = PointCloud::new(d, points)?;
            Ok(PointCloud {
                analytic_dim: Some(0.0),
                ..pc
            })
        }
    }
}

fn cantor_dust(ratio: f64, depth: u32, axes: &[usize], d: usize) -> Result<PointCloud> {
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(invalid(
            "ratio",
            format!("contraction ratio must lie in (0, 1/2), got {ratio}"),
        ));
    }
    if depth == 0 {
        return Err(invalid("depth", "must be >= 1"));
    }
    if axes.is_empty() || axes.iter().any(|&a| a >= d) {
        return Err(invalid(
            "active_axes",
            format!("must be a non-empty subset of 0..{d}"),
        ));
    }
    let mut sorted = axes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let per_axis = 1usize << depth.min(31);
    let total = (depth as usize)
        .checked_mul(sorted.len())
        .filter(|&b| b < 25)
        .map(|b| 1usize << b);
    let total = total
        .filter(|&n| n <= MAX_POINTS)
        .ok_or_else(|| invalid("depth", format!("more than {MAX_POINTS} points")))?;

    // midpoints of the depth-level intervals on [0, 1]
    let mut left = vec![0.0];
    let mut len = 1.0;
    for _ in 0..depth {
        let next = len * ratio;
        left = left.iter().flat_map(|&a| [a, a + len - next]).collect();
        len = next;
    }
    let mids: Vec<f64> = left.iter().map(|a| a + 0.5 * len).collect();
    debug_assert_eq!(mids.len(), per_axis);

    let mut points = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut p = vec![0.5; d];
        for &axis in &sorted {
            p[axis] = mids[idx % per_axis];
            idx /= per_axis;
        }
        points.push(p);
    }
    let dim = sorted.len() as f64 * log(2.0) / log(1.0 / ratio);
    PointCloud::with_box(d, &points, vec![0.0; d], vec![1.0; d], Some(dim))
}

fn grid_cube(spacing: f64, d: usize) -> Result<PointCloud> {
    if !(spacing > 0.0 && spacing <= 1.0) {
        return Err(invalid(
            "spacing",
            format!("must lie in (0, 1], got {spacing}"),
        ));
    }
    let m = floor(1.0 / spacing + 1e-9) as usize;
    let total = (0..d)
        .try_fold(1usize, |acc, _| acc.checked_mul(m))
        .filter(|&n| n <= MAX_POINTS);
    let total =
        total.ok_or_else(|| invalid("spacing", format!("more than {MAX_POINTS} points")))?;
    let mut points = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut p = Vec::with_capacity(d);
        for _ in 0..d {
            p.push((((idx % m) as f64) + 0.5) * spacing);
            idx /= m;
        }
        points.push(p);
    }
    PointCloud::with_box(d, &points, vec![0.0; d], vec![1.0; d], Some(d as f64))
}

/// Generator-adapted scales when the set's structure is known, otherwise
/// powers of two of the box extent.
pub fn default_scales(kind: Option<&SetKind>, pc: &PointCloud) -> Vec<f64> {
    match kind {
        Some(SetKind::CantorDust { ratio, depth, .. }) => {
            (1..=*depth).map(|j| pow(*ratio, j as f64)).collect()
        }
        Some(SetKind::GridCube { spacing }) => {
            let levels = floor(log(1.0 / spacing) / log(2.0) + 1e-9).max(4.0) as i32;
            (1..=levels).map(|j| pow(2.0, -(j as f64))).collect()
        }
        Some(SetKind::FinitePoints { .. }) => finite_scales(pc),
        None => {
            let extent = extent(pc);
            let levels = (floor(log(pc.len() as f64) / log(2.0)) as i32).clamp(4, 16);
            (1..=levels)
                .map(|j| extent * pow(2.0, -(j as f64)))
                .collect()
        }
    }
}

fn extent(pc: &PointCloud) -> f64 {
    let e = pc
        .lower
        .iter()
        .zip(&pc.upper)
        .map(|(l, u)| u - l)
        .fold(0.0, f64::max);
    if e > 0.0 {
        e
    } else {
        1.0
    }
}

// Boxes finer than the minimum separation over sqrt(d) hold one point each.
fn finite_scales(pc: &PointCloud) -> Vec<f64> {
    let top = match pc.min_separation() {
        Some(s) => 0.5 * s / sqrt(pc.d as f64),
        None => 0.5,
    };
    (0..8).map(|j| top * pow(2.0, -(j as f64))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountResult {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    /// First scale index at which the box size falls below the coordinate
    /// resolution of the cloud.
    pub resolution_limited_from: Option<usize>,
}

/// Occupied axis-aligned boxes anchored at the bounding-box minimum.
pub fn box_count(pc: &PointCloud, scales: &[f64]) -> Result<BoxCountResult> {
    if scales.len() < 4 {
        return Err(invalid(
            "scales",
            format!("need at least 4 scales, got {}", scales.len()),
        ));
    }
    if scales.iter().any(|s| !(*s > 0.0 && s.is_finite()))
        || scales.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(invalid(
            "scales",
            "must be positive and strictly decreasing",
        ));
    }
    let magnitude = pc
        .lower
        .iter()
        .chain(&pc.upper)
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let resolution = 64.0 * f64::EPSILON * magnitude;
    let resolution_limited_from = scales.iter().position(|&s| s < resolution);

    let mut counts = Vec::with_capacity(scales.len());
    let mut keys: Vec<i64> = Vec::with_capacity(pc.coords.len());
    for &s in scales {
        keys.clear();
        for p in pc.points() {
            for (k, &x) in p.iter().enumerate() {
                keys.push(floor((x - pc.lower[k]) / s) as i64);
            }
        }
        let mut boxes: Vec<&[i64]> = keys.chunks_exact(pc.d).collect();
        boxes.sort_unstable();
        boxes.dedup();
        counts.push(boxes.len());
    }
    Ok(BoxCountResult {
        scales: scales.to_vec(),
        counts,
        resolution_limited_from,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFit {
    pub slope: f64,
    pub r2: f64,
    /// Half-open index range of the scales used.
    pub window: (usize, usize),
    pub low_confidence: bool,
}

/// Least-squares slope of `log count` against `log(1/scale)` after trimming
/// the coarsest and finest 12.5% of scales.
pub fn fit_dimension(bc: &BoxCountResult) -> Result<DimensionFit> {
    let n = bc.scales.len();
    if bc.counts.len() != n {
        return Err(invalid("counts", "one count per scale required"));
    }
    let trim = floor(n as f64 * TRIM_FRACTION) as usize;
    let window = (trim, n - trim);
    if window.1 - window.0 < 4 {
        return Err(invalid(
            "scales",
            format!("only {} usable scales, need 4", window.1 - window.0),
        ));
    }
    if bc.counts.contains(&0) {
        return Err(invalid(
            "counts",
            "every scale needs at least one occupied box",
        ));
    }
    let xs: Vec<f64> = bc.scales[window.0..window.1]
        .iter()
        .map(|s| -log(*s))
        .collect();
    // relative to the first count, so equal counts give exactly zero
    let base = log(bc.counts[window.0] as f64);
    let ys: Vec<f64> = bc.counts[window.0..window.1]
        .iter()
        .map(|&c| log(c as f64) - base)
        .collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(DimensionFit {
        slope,
        r2,
        window,
        low_confidence: r2 < MIN_R2,
    })
}

/// Box counting on the default scales followed by the fit.
pub fn estimate_dimension(
    kind: Option<&SetKind>,
    pc: &PointCloud,
) -> Result<(BoxCountResult, DimensionFit)> {
    let bc = box_count(pc, &default_scales(kind, pc))?;
    let fit = fit_dimension(&bc)?;
    Ok((bc, fit))
}
