//! Tabulated bound functions `t -> value`, stored as natural logs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::{exp, log};

/// A bound function tabulated on an increasing time grid starting at 0.
///
/// Values are kept as natural logarithms so that exponents far beyond the
/// `f64` range stay representable. `-inf` encodes an exact zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurve {
    grid: Vec<f64>,
    log_values: Vec<f64>,
    label: String,
}

impl MomentCurve {
    pub fn new(grid: Vec<f64>, log_values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if grid.is_empty() {
            return Err(invalid("grid", "must not be empty"));
        }
        if grid.len() != log_values.len() {
            return Err(invalid(
                "log_values",
                format!("length {} != grid length {}", log_values.len(), grid.len()),
            ));
        }
        if grid[0] != 0.0 {
            return Err(invalid(
                "grid",
                format!("must start at 0, starts at {}", grid[0]),
            ));
        }
        if let Some(w) = grid
            .windows(2)
            .find(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(invalid(
                "grid",
                format!("not strictly increasing at {} -> {}", w[0], w[1]),
            ));
        }
        if let Some(v) = log_values
            .iter()
            .find(|v| v.is_nan() || **v == f64::INFINITY)
        {
            return Err(invalid(
                "log_values",
                format!("must be finite or -inf, got {v}"),
            ));
        }
        Ok(Self {
            grid,
            log_values,
            label: label.into(),
        })
    }

    /// Builds a curve from non-negative linear-space values.
    pub fn from_values(grid: Vec<f64>, values: &[f64], label: impl Into<String>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(invalid("values", format!("must be >= 0, got {v}")));
        }
        let logs = values.iter().map(|&v| log(v)).collect();
        Self::new(grid, logs, label)
    }

    pub fn constant(grid: Vec<f64>, value: f64, label: impl Into<String>) -> Result<Self> {
        let values: Vec<f64> = grid.iter().map(|_| value).collect();
        Self::from_values(grid, &values, label)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Linear-space values; entries overflow to `inf` when the log exceeds
    /// the `f64` range.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_values.iter().map(|&l| exp(l))
    }

    /// Log-value at `t`, interpolating log-linearly between grid nodes
    /// (exact for exponentials). Fails outside `[0, t_max]`.
    pub fn log_value_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.t_max()) {
            return Err(invalid(
                "t",
                format!("{t} outside curve range [0, {}]", self.t_max()),
            ));
        }
        let i = self.grid.partition_point(|&g| g <= t);
        if i == 0 {
            return Ok(self.log_values[0]);
        }
        let j = i - 1;
        if self.grid[j] == t || j + 1 == self.grid.len() {
            return Ok(self.log_values[j]);
        }
        let (t0, t1) = (self.grid[j], self.grid[j + 1]);
        let (l0, l1) = (self.log_values[j], self.log_values[j + 1]);
        let w = (t - t0) / (t1 - t0);
        if l0.is_finite() && l1.is_finite() {
            Ok(l0 + w * (l1 - l0))
        } else {
            Ok(log((1.0 - w) * exp(l0) + w * exp(l1)))
        }
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.log_value_at(t).map(exp)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.log_values.windows(2).all(|w| w[1] >= w[0])
    }
}

/// `n + 1` equally spaced nodes on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                t_max
            } else {
                t_max * i as f64 / n as f64
            }
        })
        .collect()
}
