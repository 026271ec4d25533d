//! Factorials, generalized Laguerre polynomials and real polynomial roots.

use alloc::vec::Vec;

/// `ln(n!)` via the log-gamma function.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` by the three-term recurrence.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + a - x) * cur - (j + a) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Dense real polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::new(alloc::vec![0.0]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Cauchy bound: every root satisfies `|x| < bound`.
    pub fn root_bound(&self) -> f64 {
        let lead = *self.coeffs.last().unwrap();
        if lead == 0.0 {
            return 0.0;
        }
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max)
    }

    /// Real roots in `[lo, hi]`, ascending.
    ///
    /// Critical points of `p` (roots of `p'`, found recursively) split the
    /// interval into monotone pieces; each piece holds at most one root, which
    /// is isolated by bisection. Even-multiplicity roots are reported only when
    /// they coincide exactly with a critical point value of zero.
    pub fn real_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        if self.degree() == 0 || !(lo < hi) {
            return roots;
        }
        let mut knots = alloc::vec![lo];
        knots.extend(self.derivative().real_roots(lo, hi));
        knots.push(hi);
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                push_unique(&mut roots, a);
            } else if fa * fb < 0.0 {
                push_unique(&mut roots, bisect(|x| self.eval(x), a, b, fa));
            }
        }
        if self.eval(hi) == 0.0 {
            push_unique(&mut roots, hi);
        }
        roots
    }
}

fn push_unique(roots: &mut Vec<f64>, x: f64) {
    if roots.last().is_none_or(|&r| r != x) {
        roots.push(x);
    }
}

/// Bisection to machine precision; `fa` is `f(a)` with `f(a)·f(b) < 0`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert_relative_eq!(ln_factorial(5), libm::log(120.0), max_relative = 1e-14);
        assert_relative_eq!(ln_factorial(20), libm::log(2432902008176640000.0), max_relative = 1e-14);
    }

    #[test]
    fn laguerre_closed_forms() {
        let x = 0.73;
        assert_relative_eq!(laguerre(1, 0.0, x), 1.0 - x, epsilon = 1e-15);
        assert_relative_eq!(laguerre(2, 0.0, x), 1.0 - 2.0 * x + x * x / 2.0, epsilon = 1e-15);
        // L_2^{(1)}(x) = (x^2 - 6x + 6) / 2
        assert_relative_eq!(laguerre(2, 1.0, x), (x * x - 6.0 * x + 6.0) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_roots_of_l2() {
        let p = Polynomial::new(alloc::vec![1.0, -2.0, 0.5]);
        let roots = p.real_roots(0.0, p.root_bound());
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0], 2.0 - libm::sqrt(2.0), epsilon = 1e-14);
        assert_relative_eq!(roots[1], 2.0 + libm::sqrt(2.0), epsilon = 1e-14);
    }

    #[test]
    fn polynomial_without_real_roots() {
        let p = Polynomial::new(alloc::vec![1.0, 0.0, 1.0]);
        assert!(p.real_roots(-10.0, 10.0).is_empty());
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_min(|x| (x - 1.25) * (x - 1.25) + 3.0, 0.0, 4.0, 1e-10);
        assert_relative_eq!(x, 1.25, epsilon = 1e-7);
        assert_relative_eq!(fx, 3.0, epsilon = 1e-12);
    }
}
