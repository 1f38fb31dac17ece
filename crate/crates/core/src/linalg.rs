//! Small dense matrices and the Schatten 4-norm.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::sqrt;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix", "must have at least one row and column"));
        }
        if data.len() != rows * cols {
            return Err(invalid(
                "matrix",
                format!("{} entries for a {rows}x{cols} shape", data.len()),
            ));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(invalid(
                "matrix",
                format!("entries must be finite, got {v}"),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(invalid(
                "matrix",
                format!("ragged rows: {} vs {cols} columns", r.len()),
            ));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in diag.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(invalid(
                "matrix",
                format!(
                    "shape mismatch {}x{} * {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..other.cols {
                data[i * other.cols + j] = (0..self.cols)
                    .map(|k| self.get(i, k) * other.get(k, j))
                    .sum();
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// `A * A^T`.
    pub fn gram(&self) -> Matrix {
        let n = self.rows;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = (0..self.cols)
                    .map(|k| self.get(i, k) * self.get(j, k))
                    .sum();
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Matrix {
            rows: n,
            cols: n,
            data,
        }
    }
}

/// Schatten 4-norm, `(sum of sigma_i^4)^(1/4)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SchattenValue {
    pub value: f64,
}

fn require_square(a: &Matrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(invalid(
            "matrix",
            format!("must be square, got {}x{}", a.rows, a.cols),
        ))
    }
}

/// Fourth root of the squared Frobenius norm of `A A^T`.
pub fn schatten_norm(a: &Matrix) -> Result<SchattenValue> {
    require_square(a)?;
    let g = a.gram();
    let s: f64 = g.data.iter().map(|v| v * v).sum();
    Ok(SchattenValue {
        value: sqrt(sqrt(s)),
    })
}

/// Same norm through the eigenvalues of `A A^T` (squared singular values).
pub fn schatten_norm_spectral(a: &Matrix) -> Result<SchattenValue> {
    require_square(a)?;
    let eig = symmetric_eigenvalues(&a.gram())?;
    let s: f64 = eig.iter().map(|l| l * l).sum();
    Ok(SchattenValue {
        value: sqrt(sqrt(s)),
    })
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    require_square(s)?;
    let n = s.rows;
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (s.get(i, j), s.get(j, i));
            if (a - b).abs() > 1e-12 * (a.abs() + b.abs()).max(1e-300) {
                return Err(invalid("matrix", format!("not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut m = s.data.clone();
    let at = |i: usize, j: usize| i * n + j;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[at(i, j)] * m[at(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| m[at(i, i)] * m[at(i, i)]).sum();
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[at(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[at(q, q)] - m[at(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let sn = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[at(k, p)], m[at(k, q)]);
                    m[at(k, p)] = c * mkp - sn * mkq;
                    m[at(k, q)] = sn * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[at(p, k)], m[at(q, k)]);
                    m[at(p, k)] = c * mpk - sn * mqk;
                    m[at(q, k)] = sn * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[at(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{pow, sqrt};
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        Matrix::new(n, n, (0..n * n).map(|_| uniform(rng)).collect()).unwrap()
    }

    // Gram-Schmidt on a random matrix.
    fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let mut cols: Vec<Vec<f64>> = Vec::new();
        while cols.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| uniform(rng)).collect();
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = sqrt(v.iter().map(|a| a * a).sum());
            if norm > 1e-6 {
                cols.push(v.into_iter().map(|a| a / norm).collect());
            }
        }
        Matrix::from_rows(&cols).unwrap()
    }

    #[test]
    fn identity_and_diagonal() {
        assert!(
            (schatten_norm(&Matrix::identity(2)).unwrap().value - pow(2.0, 0.25)).abs() < 1e-15
        );
        let d = Matrix::diagonal(&[3.0, 4.0]).unwrap();
        assert!((schatten_norm(&d).unwrap().value - pow(337.0, 0.25)).abs() < 1e-13);
        assert!((schatten_norm(&d).unwrap().value - 4.28457).abs() < 1e-5);
        for n in 2..=10 {
            let v = schatten_norm_spectral(&Matrix::identity(n)).unwrap().value;
            assert!((v - pow(n as f64, 0.25)).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_in_the_plane() {
        for &a in &[0.3, 1.0, 2.5, -0.7] {
            let (s, c) = (libm::sin(a), libm::cos(a));
            let r = Matrix::new(2, 2, vec![c, -s, s, c]).unwrap();
            assert!((schatten_norm(&r).unwrap().value - pow(2.0, 0.25)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_square() {
        let a = Matrix::new(2, 3, vec![1.0; 6]).unwrap();
        assert!(schatten_norm(&a).is_err());
        assert!(schatten_norm_spectral(&a).is_err());
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn routes_agree_and_norm_is_orthogonally_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let n = 2 + trial % 9;
            let a = random_matrix(&mut rng, n);
            let direct = schatten_norm(&a).unwrap().value;
            let spectral = schatten_norm_spectral(&a).unwrap().value;
            assert!(
                (direct - spectral).abs() <= 1e-12 * direct,
                "n={n} {direct} {spectral}"
            );
            let o1 = random_orthogonal(&mut rng, n);
            let o2 = random_orthogonal(&mut rng, n);
            let rotated = o1.mul(&a).unwrap().mul(&o2).unwrap();
            let r = schatten_norm(&rotated).unwrap().value;
            assert!((r - direct).abs() <= 1e-10 * direct, "n={n} {direct} {r}");
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let s = Matrix::new(3, 3, vec![2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]).unwrap();
        let eig = symmetric_eigenvalues(&s).unwrap();
        let expect = [2.0 - sqrt(2.0), 2.0, 2.0 + sqrt(2.0)];
        for (e, x) in eig.iter().zip(expect) {
            assert!((e - x).abs() < 1e-13);
        }
        assert!(
            symmetric_eigenvalues(&Matrix::new(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap()).is_err()
        );
    }
}
