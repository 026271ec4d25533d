//! Truncated-basis displacement operator, `D(α) = exp(α a† − α* a)`.
//!
//! Computed by scaling and squaring of a Taylor series on the dense
//! generator. It shares no code with the closed forms in [`crate::fock`] or
//! [`crate::sideband`] and serves as their check.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Dense row-major complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    pub fn expm(&self) -> Self {
        let norm = self.norm_one();
        let mut squarings = 0u32;
        if norm > 0.5 {
            squarings = libm::ceil(libm::log2(norm / 0.5)) as u32;
        }
        let scaled = self.scale(Complex64::new(libm::ldexp(1.0, -(squarings as i32)), 0.0));
        let mut result = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for j in 1..40 {
            term = term.matmul(&scaled).scale(Complex64::new(1.0 / j as f64, 0.0));
            result = result.add(&term);
            if term.norm_one() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// `D(α)` on the Fock basis truncated at `dim` levels.
#[derive(Debug, Clone)]
pub struct DisplacementMatrix {
    matrix: CMatrix,
}

impl DisplacementMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `⟨k|D(α)|n⟩`.
    pub fn amplitude(&self, k: usize, n: usize) -> Complex64 {
        self.matrix[(k, n)]
    }

    /// `|⟨k|D(α)|n⟩|²` for `k = 0..=k_max`.
    pub fn column_probabilities(&self, n: usize, k_max: usize) -> Vec<f64> {
        (0..=k_max).map(|k| self.matrix[(k, n)].norm_sqr()).collect()
    }

    /// Squared norm of column `n` over the lower three quarters of the basis.
    ///
    /// The truncated exponential is exactly unitary, so the full column norm
    /// is always one; truncation damage shows up as weight near the top edge
    /// instead.
    pub fn interior_norm_sqr(&self, n: usize) -> f64 {
        let interior = self.matrix.dim() - self.matrix.dim() / 4;
        (0..interior).map(|k| self.matrix[(k, n)].norm_sqr()).sum()
    }

    /// True when every listed column keeps interior norm above `1 − 1e−12`.
    /// Logs a warning otherwise.
    pub fn columns_converged(&self, columns: impl IntoIterator<Item = usize>) -> bool {
        let mut ok = true;
        for n in columns {
            let norm = self.interior_norm_sqr(n);
            if !(norm > 1.0 - 1e-12) {
                log::warn!("displacement oracle column {n} leaks: norm^2 = {norm}");
                ok = false;
            }
        }
        ok
    }
}

/// Builds `exp(α a† − α* a)` on `dim` Fock levels.
pub fn displacement_operator_oracle(alpha: Complex64, dim: usize) -> Result<DisplacementMatrix> {
    if dim < 2 {
        return Err(invalid("oracle dimension must be at least 2"));
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(invalid("alpha must be finite"));
    }
    let mut gen = CMatrix::zeros(dim);
    for n in 0..dim - 1 {
        let s = libm::sqrt((n + 1) as f64);
        // a† |n⟩ = √(n+1) |n+1⟩ and a |n+1⟩ = √(n+1) |n⟩
        gen[(n + 1, n)] = alpha * s;
        gen[(n, n + 1)] = -alpha.conj() * s;
    }
    Ok(DisplacementMatrix { matrix: gen.expm() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_is_identity() {
        let d = displacement_operator_oracle(Complex64::new(0.0, 0.0), 8).unwrap();
        assert!(d.matrix().max_abs_diff(&CMatrix::identity(8)) < 1e-15);
    }

    #[test]
    fn vacuum_column_is_poisson() {
        let alpha = Complex64::new(1.1, -0.4);
        let x = alpha.norm_sqr();
        let d = displacement_operator_oracle(alpha, 48).unwrap();
        let col = d.column_probabilities(0, 15);
        let mut expected = libm::exp(-x);
        for (k, p) in col.iter().enumerate() {
            assert!((p - expected).abs() < 1e-13, "k={k}");
            expected *= x / (k + 1) as f64;
        }
        assert!(d.columns_converged([0, 1, 2]));
    }

    #[test]
    fn group_inverse() {
        let alpha = Complex64::new(0.9, 0.7);
        let fwd = displacement_operator_oracle(alpha, 40).unwrap();
        let back = displacement_operator_oracle(-alpha, 40).unwrap();
        let prod = fwd.matrix().matmul(back.matrix());
        // compare on the well-converged upper-left block
        for i in 0..20 {
            for j in 0..20 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - Complex64::new(target, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn small_dimension_rejected() {
        assert!(displacement_operator_oracle(Complex64::new(1.0, 0.0), 1).is_err());
    }

    #[test]
    fn truncation_leak_detected() {
        let d = displacement_operator_oracle(Complex64::new(3.0, 0.0), 6).unwrap();
        assert!(!d.columns_converged([5]));
    }
}
