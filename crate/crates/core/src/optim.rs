//! Quasi-Newton minimization with a backtracking line search.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Relative objective change below which an iteration counts as stalled.
    pub tolerance: f64,
    /// Infinity-norm gradient threshold for convergence.
    pub gradient_tolerance: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iterations: 500, tolerance: 1e-10, gradient_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

/// Minimizes `f`, which returns the objective and writes its gradient.
///
/// Uses BFGS updates of the inverse Hessian and an Armijo backtracking line
/// search, so accepted objective values never increase. Converged means the
/// gradient fell below `gradient_tolerance` or the relative change stayed
/// below `tolerance` for three consecutive steps.
pub fn minimize_bfgs(mut f: impl FnMut(&[f64], &mut [f64]) -> f64, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut h = identity(n);
    let mut history = vec![fx];
    let mut stalled = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    while iterations < opts.max_iterations {
        if inf_norm(&g) <= opts.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            // lost descent: restart from steepest descent
            h = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }
        let mut step = if iterations == 1 { (1.0 / inf_norm(&g)).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                accepted = Some(f_new);
                break;
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else {
            // no further decrease representable
            converged = inf_norm(&g) <= opts.gradient_tolerance.max(1e-6);
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * libm::sqrt(dot(&s, &s) * dot(&y, &y)) {
            bfgs_update(&mut h, &s, &y, sy);
        }

        let rel = (fx - f_new).abs() / fx.abs().max(1e-300).max(f_new.abs());
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        fx = f_new;
        history.push(fx);
        if rel < opts.tolerance {
            stalled += 1;
            if stalled >= 3 {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }
    Minimum { x, value: fx, iterations, converged, history }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = h.iter().map(|row| dot(row, y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a)
        };
        let m = minimize_bfgs(f, &[-1.2, 1.0], &BfgsOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
        assert!(m.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            x[0] * x[0] + 1.0
        };
        let m = minimize_bfgs(f, &[3.0], &BfgsOptions { max_iterations: 0, ..Default::default() });
        assert!(!m.converged);
    }
}
