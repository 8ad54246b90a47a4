//! Symmetric tridiagonal eigenpairs by Sturm bisection and inverse iteration.

/// Number of eigenvalues strictly below `x`.
///
/// Counts negative pivots of the LDLᵀ factorization of `T − xI`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// The `index`-th smallest eigenvalue (0-based) by bisection.
pub fn bisect_eigenvalue(diag: &[f64], off: &[f64], index: usize, bounds: (f64, f64)) -> f64 {
    let (mut lo, mut hi) = bounds;
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale.min(mid.abs().max(1.0)) {
            break;
        }
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − μI) x = rhs` by Gaussian elimination with partial pivoting.
fn shifted_solve(diag: &[f64], off: &[f64], mu: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // Row i of the upper factor holds u0[i] on the diagonal and u1[i], u2[i]
    // on the two superdiagonals.
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    let tiny = f64::EPSILON * (1.0 + mu.abs());

    let mut cur_d = diag[0] - mu;
    let mut cur_u = if n > 1 { off[0] } else { 0.0 };
    for i in 0..n {
        if i + 1 == n {
            u0[i] = if cur_d == 0.0 { tiny } else { cur_d };
            u1[i] = 0.0;
            break;
        }
        let sub = off[i];
        let next_d = diag[i + 1] - mu;
        let next_u = if i + 2 < n { off[i + 1] } else { 0.0 };
        if cur_d.abs() >= sub.abs() {
            let pivot = if cur_d == 0.0 { tiny } else { cur_d };
            let factor = sub / pivot;
            u0[i] = pivot;
            u1[i] = cur_u;
            u2[i] = 0.0;
            b[i + 1] -= factor * b[i];
            cur_d = next_d - factor * cur_u;
            cur_u = next_u;
        } else {
            // swap rows i and i+1
            let factor = cur_d / sub;
            u0[i] = sub;
            u1[i] = next_d;
            u2[i] = next_u;
            b.swap(i, i + 1);
            b[i + 1] -= factor * b[i];
            cur_d = cur_u - factor * next_d;
            cur_u = -factor * next_u;
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / u0[i];
    }
    x
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// `T·v`.
pub fn multiply(diag: &[f64], off: &[f64], v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * v[i];
            if i > 0 {
                s += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += off[i] * v[i + 1];
            }
            s
        })
        .collect()
}

/// Eigenvector for a converged eigenvalue. Returns the unit vector and the
/// relative residual `‖Tv − λv‖ / ‖T‖`.
pub fn inverse_iteration(diag: &[f64], off: &[f64], lambda: f64, norm_bound: f64) -> (Vec<f64>, f64) {
    let n = diag.len();
    // Deterministic, non-symmetric start vector.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract())
        .collect();
    normalize(&mut v);
    let shift = lambda + 1e3 * f64::EPSILON * norm_bound.max(lambda.abs());
    let mut residual = f64::INFINITY;
    for _ in 0..6 {
        v = shifted_solve(diag, off, shift, &v);
        normalize(&mut v);
        let tv = multiply(diag, off, &v);
        residual = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
            / norm_bound.max(1.0);
        if residual < 1e-13 {
            break;
        }
    }
    (v, residual)
}
