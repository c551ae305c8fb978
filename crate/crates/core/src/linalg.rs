//! Dense linear algebra for the tiny systems (n = 1..4 states) that show
//! up in the Markov economies. Gaussian elimination with partial pivoting
//! and a shifted power iteration; nothing here is tuned for large n.

/// Row-major square matrix, small n.
pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
///
/// `a` and `b` are consumed as working storage. Returns `Err(Singular)`
/// when a pivot falls below 1e-300 in absolute value.
pub fn solve(mut a: Matrix, mut b: Vec<f64>) -> Result<Vec<f64>, Singular> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot_row][col].abs() < 1e-300 {
            return Err(Singular);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// `a * v` for a square row-major matrix.
pub fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Spectral radius of a non-negative square matrix by power iteration.
///
/// Iterates on `a + I` (the shift makes the iteration converge even for
/// periodic chain structures) and subtracts the shift at the end.
/// Returns `None` if the Rayleigh estimate has not stabilized to `tol`
/// within `max_iter` sweeps.
pub fn spectral_radius_nonneg(a: &[Vec<f64>], tol: f64, max_iter: usize) -> Option<f64> {
    let n = a.len();
    if n == 0 {
        return Some(0.0);
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut estimate = f64::NAN;
    for _ in 0..max_iter {
        // w = (A + I) v
        let mut w = mat_vec(a, &v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += vi;
        }
        let norm: f64 = w.iter().map(|x| x.abs()).sum();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        for wi in w.iter_mut() {
            *wi /= norm;
        }
        let next = norm - 1.0;
        if (next - estimate).abs() <= tol * next.abs().max(1.0) {
            return Some(next);
        }
        estimate = next;
        v = w;
    }
    None
}
