//! Small dense least-squares solves.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Minimizes `‖A c − y‖₂` for a tall `rows × cols` design matrix given
/// column-major, by Householder QR.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let cols = columns.len();
    let rows = y.len();
    if cols == 0 || rows < cols || columns.iter().any(|c| c.len() != rows) {
        return Err(invalid("least squares needs at least as many rows as columns"));
    }
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut b = y.to_vec();
    for j in 0..cols {
        let norm = libm::sqrt(a[j][j..].iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            return Err(invalid("rank-deficient design matrix"));
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= f * vi;
            }
        };
        for col in a.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut b[j..]);
    }
    let mut c = vec![0.0; cols];
    for j in (0..cols).rev() {
        let diag = a[j][j];
        if diag.abs() < 1e-300 {
            return Err(invalid("rank-deficient design matrix"));
        }
        let s: f64 = (j + 1..cols).map(|k| a[k][j] * c[k]).sum();
        c[j] = (b[j] - s) / diag;
    }
    Ok(c)
}
