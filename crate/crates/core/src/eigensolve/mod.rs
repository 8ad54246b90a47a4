//! Joint eigenfunctions `u = w(θ) e^{ikφ}` of the Laplacian on the polar
//! model `dθ² + F(θ)² dφ²`, `F(θ) = f(cos θ)`.
//!
//! Separation of variables leaves the radial problem
//! `−(1/F)(F w')' + k² w / F² = λ w` on `(0, π)`. It is discretized by a
//! vertex-centred finite-volume scheme on `θ_i = iπ/N`: fluxes use `F` at
//! the cell faces, each node carries the exact dual-cell mass `∫F dθ`, and
//! the discrete Liouville map `v = M^{1/2} w` makes the operator a
//! symmetric tridiagonal matrix. Pole nodes are unknowns for `k = 0`
//! (zero flux through the pole) and are pinned to zero for `k ≥ 1`.
//!
//! [`joint_eigenfunctions`] solves on `N` and `2N` cells and combines the
//! two by one Richardson step, which lifts eigenvalues and nodal values to
//! fourth order.

pub mod cache;
pub mod tridiag;

use crate::geometry::{theta_of_t, ProfileFunction};
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

pub const MIN_GRID: usize = 256;
/// Required cells per unit of angular mode.
pub const CELLS_PER_MODE: usize = 20;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("grid N = {0} below the minimum of {MIN_GRID}")]
    GridTooSmall(usize),
    #[error("grid N = {n} too coarse for mode k = {k} (need N >= {need})")]
    GridTooCoarse { n: usize, k: u32, need: usize },
    #[error("requested {requested} eigenpairs, at most N/4 = {limit} allowed")]
    TooManyModes { requested: usize, limit: usize },
    #[error("inverse iteration did not converge for eigenpair {index} (residual {residual:e})")]
    NoConvergence { index: usize, residual: f64 },
    #[error("t = {0} outside the open interval (-1, 1)")]
    OutOfDomain(f64),
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EigenError>;

/// Discretized radial operator for one angular mode.
#[derive(Debug, Clone)]
pub struct RadialSystem {
    pub profile: ProfileFunction,
    pub k: u32,
    /// Number of cells.
    pub n: usize,
    /// Index of the first unknown node (0 for `k = 0`, 1 otherwise).
    pub first_node: usize,
    /// Dual-cell masses `∫ F dθ` of the unknown nodes.
    pub mass: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// One discrete eigenpair; `vector` is the unit-norm Liouville variable `v`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: f64,
    pub vector: Vec<f64>,
}

/// Assembles the symmetric tridiagonal radial operator.
pub fn assemble_operator(profile: &ProfileFunction, k: u32, n: usize) -> Result<RadialSystem> {
    if n < MIN_GRID {
        return Err(EigenError::GridTooSmall(n));
    }
    let need = CELLS_PER_MODE * k as usize;
    if n < need {
        return Err(EigenError::GridTooCoarse { n, k, need });
    }
    let step = PI / n as f64;
    let node = |i: usize| i as f64 * step;
    let face: Vec<f64> = (0..n)
        .map(|i| profile.polar_radius((i as f64 + 0.5) * step))
        .collect();
    let rule = GaussLegendre::new(8);
    let (first, last) = if k == 0 { (0, n) } else { (1, n - 1) };
    let kk = (k as f64).powi(2);

    let mut mass = Vec::with_capacity(last - first + 1);
    let mut stiff = Vec::with_capacity(last - first + 1);
    for i in first..=last {
        let lo = (node(i) - 0.5 * step).max(0.0);
        let hi = (node(i) + 0.5 * step).min(PI);
        let m = rule.integrate(lo, hi, |theta| profile.polar_radius(theta));
        let mut a = 0.0;
        if i > 0 {
            a += face[i - 1] / step;
        }
        if i < n {
            a += face[i] / step;
        }
        if k > 0 {
            a += kk * m / profile.polar_radius(node(i)).powi(2);
        }
        mass.push(m);
        stiff.push(a);
    }
    let diag: Vec<f64> = stiff.iter().zip(&mass).map(|(a, m)| a / m).collect();
    let off: Vec<f64> = (first..last)
        .map(|i| {
            let j = i - first;
            -face[i] / step / (mass[j] * mass[j + 1]).sqrt()
        })
        .collect();
    Ok(RadialSystem {
        profile: profile.clone(),
        k,
        n,
        first_node: first,
        mass,
        diag,
        off,
    })
}

impl RadialSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn step(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn rayleigh_quotient(&self, v: &[f64]) -> f64 {
        let tv = tridiag::multiply(&self.diag, &self.off, v);
        let num: f64 = tv.iter().zip(v).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|x| x * x).sum();
        num / den
    }

    /// Radial values `w` on all `N + 1` nodes from a Liouville vector,
    /// scaled so that `2π Σ M_i w_i² = Σ v_i²`.
    pub fn radial_values(&self, v: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.n + 1];
        for (j, (x, m)) in v.iter().zip(&self.mass).enumerate() {
            w[self.first_node + j] = x / (2.0 * PI * m).sqrt();
        }
        w
    }

    /// Discrete weighted inner product `2π Σ M_i w_i w'_i` of two radial
    /// vectors on the full node set.
    pub fn weighted_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let i = self.first_node + j;
                m * a[i] * b[i]
            })
            .sum::<f64>()
            * 2.0
            * PI
    }
}

/// First `count` eigenpairs in ascending order.
pub fn eigenpairs(system: &RadialSystem, count: usize) -> Result<Vec<Eigenpair>> {
    let limit = system.n / 4;
    if count > limit {
        return Err(EigenError::TooManyModes {
            requested: count,
            limit,
        });
    }
    let bounds = tridiag::gershgorin(&system.diag, &system.off);
    let norm_bound = bounds.0.abs().max(bounds.1.abs());
    (0..count)
        .map(|index| {
            let lambda = tridiag::bisect_eigenvalue(&system.diag, &system.off, index, bounds);
            let (vector, residual) = tridiag::inverse_iteration(&system.diag, &system.off, lambda, norm_bound);
            if !(residual < 1e-10) {
                return Err(EigenError::NoConvergence { index, residual });
            }
            Ok(Eigenpair { lambda, vector })
        })
        .collect()
}

/// An L²-normalized joint eigenfunction on the polar model.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEigenfunction {
    pub k: u32,
    /// Ordinal of the radial eigenvalue at this `k`.
    pub l_index: usize,
    pub lambda: f64,
    /// `λ^{−1/2}`; infinite for the constant mode.
    pub h: f64,
    /// Number of cells; samples live on `θ_i = iπ/n`, `i = 0..=n`.
    pub n: usize,
    pub radial_values: Vec<f64>,
}

fn simpson_weights(n: usize) -> Vec<f64> {
    let step = PI / n as f64;
    (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * step / 3.0
        })
        .collect()
}

/// Solves for the first `count` eigenfunctions of mode `k` with `N` and
/// `2N` cells and returns the Richardson-extrapolated pairs on the `N`-grid.
pub fn joint_eigenfunctions(
    profile: &ProfileFunction,
    k: u32,
    n: usize,
    count: usize,
) -> Result<Vec<JointEigenfunction>> {
    let coarse = assemble_operator(profile, k, n)?;
    let fine = assemble_operator(profile, k, 2 * n)?;
    let coarse_pairs = eigenpairs(&coarse, count)?;
    let fine_pairs = eigenpairs(&fine, count)?;
    let simpson = simpson_weights(n);
    let radius: Vec<f64> = (0..=n)
        .map(|i| profile.polar_radius(i as f64 * PI / n as f64))
        .collect();

    let mut out = Vec::with_capacity(count);
    for (l_index, (c, f)) in coarse_pairs.iter().zip(&fine_pairs).enumerate() {
        let wc = coarse.radial_values(&c.vector);
        let wf = fine.radial_values(&f.vector);
        let overlap: f64 = (0..=n).map(|i| wc[i] * wf[2 * i]).sum();
        let sign = if overlap < 0.0 { -1.0 } else { 1.0 };
        let mut w: Vec<f64> = (0..=n)
            .map(|i| (4.0 * sign * wf[2 * i] - wc[i]) / 3.0)
            .collect();
        if k > 0 {
            w[0] = 0.0;
            w[n] = 0.0;
        }
        let norm2: f64 = 2.0
            * PI
            * (0..=n)
                .map(|i| simpson[i] * w[i] * w[i] * radius[i])
                .sum::<f64>();
        let peak = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lead = w.iter().find(|x| x.abs() > 1e-3 * peak).copied().unwrap_or(1.0);
        let scale = lead.signum() / norm2.sqrt();
        w.iter_mut().for_each(|x| *x *= scale);

        let mut lambda = (4.0 * f.lambda - c.lambda) / 3.0;
        // The constant mode is exact up to solver roundoff.
        if k == 0 && l_index == 0 && lambda.abs() < 1e-8 {
            lambda = 0.0;
        }
        let h = if lambda > 0.0 { lambda.powf(-0.5) } else { f64::INFINITY };
        out.push(JointEigenfunction {
            k,
            l_index,
            lambda,
            h,
            n,
            radial_values: w,
        });
    }
    Ok(out)
}

impl JointEigenfunction {
    pub fn theta_grid(&self) -> Vec<f64> {
        (0..=self.n).map(|i| i as f64 * PI / self.n as f64).collect()
    }

    /// Sample locations in the profile coordinate `t = cos θ`.
    pub fn radial_grid(&self) -> Vec<f64> {
        self.theta_grid().into_iter().map(f64::cos).collect()
    }

    /// Radial factor at polar angle `θ` by cubic Lagrange interpolation.
    pub fn radial_at_theta(&self, theta: f64) -> f64 {
        let step = PI / self.n as f64;
        let x = (theta / step).clamp(0.0, self.n as f64);
        let base = (x.floor() as isize - 1).clamp(0, self.n as isize - 3) as usize;
        let mut value = 0.0;
        for a in 0..4 {
            let mut weight = 1.0;
            for b in 0..4 {
                if a != b {
                    weight *= (x - (base + b) as f64) / (a as f64 - b as f64);
                }
            }
            value += weight * self.radial_values[base + a];
        }
        value
    }

    /// `u(t, φ) = w(arccos t) e^{ikφ}`.
    pub fn value(&self, t: f64, phi: f64) -> Result<Complex64> {
        if !(t > -1.0 && t < 1.0) {
            return Err(EigenError::OutOfDomain(t));
        }
        let w = self.radial_at_theta(theta_of_t(t));
        Ok(Complex64::from_polar(1.0, self.k as f64 * phi) * w)
    }

    /// `2π ∫ w² F dθ` by composite Simpson on the sample grid.
    pub fn l2_norm_squared(&self, profile: &ProfileFunction) -> f64 {
        let simpson = simpson_weights(self.n);
        2.0 * PI
            * self
                .theta_grid()
                .iter()
                .zip(&self.radial_values)
                .zip(&simpson)
                .map(|((&theta, w), s)| s * w * w * profile.polar_radius(theta))
                .sum::<f64>()
    }
}

/// Free-function form of [`JointEigenfunction::value`].
pub fn eigenfunction_value(u: &JointEigenfunction, t: f64, phi: f64) -> Result<Complex64> {
    u.value(t, phi)
}
