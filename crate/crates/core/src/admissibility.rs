//! Admissibility of a geodesic for a moment map.
//!
//! The set `C_γ = {(x, ξ) : x ∈ γ, p1(x, ξ) = E1}` is sampled on a grid of
//! arc parameters `τ` and fiber angles `σ`. On the band
//! `|p2 − E2| < ε` the derivative `∂_τ p2` is estimated by central
//! differences at fixed `σ`; the geodesic is admissible when its infimum
//! stays above a threshold and `p1` is of real principal type on `C_γ`.
//!
//! For the built-in `p1` the fiber over `(t, φ)` is the ellipse
//! `ξ = √E1 (cos σ, f(t) sin σ)`. For expression-defined `p1` it is found
//! along rays `ξ = r (cos σ, sin σ)` from the origin.

use crate::geometry::Geodesic;
use crate::symbol::{EvalError, MomentMap, PhasePoint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Residual accepted for fiber points of expression-defined `p1`.
pub const FIBER_TOLERANCE: f64 = 1e-10;
/// Lower bound on `|∂_ξ p1|` for the real-principal-type check.
pub const PRINCIPAL_TYPE_FLOOR: f64 = 1e-6;
pub const DEFAULT_THRESHOLD: f64 = 1e-3;
/// Default band half-width as a fraction of the range of `p2` over `C_γ`.
pub const DEFAULT_EPSILON_FRACTION: f64 = 0.05;
pub const MIN_GRID: usize = 32;

const RAY_SAMPLES: usize = 400;
const RAY_MIN: f64 = 1e-6;
const RAY_MAX: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdmissibilityError {
    #[error("empty fiber over (t = {t}, phi = {phi}) at E1 = {e1}")]
    EmptyFiber { t: f64, phi: f64, e1: f64 },
    #[error("fiber needs at least 8 samples, got {0}")]
    FiberTooCoarse(usize),
    #[error("grid ({n_tau}, {n_fiber}) below the minimum of {MIN_GRID} per axis")]
    GridTooCoarse { n_tau: usize, n_fiber: usize },
    #[error("threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("band half-width must be positive, got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, AdmissibilityError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyPair {
    pub e1: f64,
    pub e2: f64,
    /// Band half-width; `None` selects 5% of the range of `p2` over `C_γ`.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl EnergyPair {
    pub fn new(e1: f64, e2: f64, epsilon: f64) -> Self {
        Self {
            e1,
            e2,
            epsilon: Some(epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold {
    /// Multiple of `max |p2|` over `C_γ`.
    Relative(f64),
    Absolute(f64),
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Relative(DEFAULT_THRESHOLD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n_tau: usize,
    pub n_fiber: usize,
}

impl Grid {
    pub fn new(n_tau: usize, n_fiber: usize) -> Self {
        Self { n_tau, n_fiber }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::new(128, 128)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Admissible,
    NotAdmissible,
    EmptyBand,
}

/// Phase point where the smallest `|∂_τ p2|` was observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub tau: f64,
    pub sigma: f64,
    pub t: f64,
    pub phi: f64,
    pub xi_t: f64,
    pub xi_phi: f64,
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub verdict: Verdict,
    /// Estimated infimum of `|∂_τ p2|` over the sampled band.
    pub min_derivative: f64,
    pub witness: Option<Witness>,
    pub principal_type_ok: bool,
    pub grid: Grid,
    pub epsilon: f64,
    /// Absolute threshold the infimum was compared against.
    pub threshold: f64,
    /// `max |p2|` over the sampled `C_γ`.
    pub p2_scale: f64,
    pub band_points: usize,
}

/// One sampled point of a fiber, with the angle that labels it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPoint {
    pub sigma: f64,
    pub xi_t: f64,
    pub xi_phi: f64,
}

fn fd_step(value: f64) -> f64 {
    1e-6 * value.abs().max(1.0)
}

fn sigma_at(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// Covector on the fiber over `(t, φ)` at angle `σ`; `guess` warm-starts the
/// ray search for expression-defined `p1`.
fn fiber_point_at(
    map: &MomentMap,
    t: f64,
    phi: f64,
    e1: f64,
    sigma: f64,
    guess: Option<f64>,
) -> Result<Option<(f64, f64, f64)>> {
    let (s, c) = sigma.sin_cos();
    if map.has_builtin_p1() {
        if e1 <= 0.0 {
            return Ok(None);
        }
        let r = e1.sqrt();
        return Ok(Some((r * c, r * map.surface.f(t) * s, r)));
    }
    let base = PhasePoint::new(t, phi, 0.0, 0.0);
    let residual = |r: f64| -> Result<f64> { Ok(map.p1(&base.with_covector(r * c, r * s))? - e1) };
    if let Some(r0) = guess {
        if let Some(r) = newton_on_ray(&residual, r0)? {
            return Ok(Some((r * c, r * s, r)));
        }
    }
    Ok(march_ray(&residual)?.map(|r| (r * c, r * s, r)))
}

fn newton_on_ray(residual: &impl Fn(f64) -> Result<f64>, r0: f64) -> Result<Option<f64>> {
    let mut r = r0;
    for _ in 0..50 {
        let g = residual(r)?;
        if g.abs() <= FIBER_TOLERANCE {
            return Ok(Some(r));
        }
        let dr = fd_step(r);
        let slope = (residual(r + dr)? - residual(r - dr)?) / (2.0 * dr);
        if slope == 0.0 || !slope.is_finite() {
            return Ok(None);
        }
        let next = r - g / slope;
        if !(next > 0.0) || (next - r0).abs() > 0.5 * r0.max(1e-3) {
            return Ok(None);
        }
        r = next;
    }
    Ok(None)
}

/// First crossing of the level set along a ray; transversal crossings are
/// bracketed and bisected, tangential ones found as local minima of `|g|`.
fn march_ray(residual: &impl Fn(f64) -> Result<f64>) -> Result<Option<f64>> {
    let ratio = (RAY_MAX / RAY_MIN).powf(1.0 / RAY_SAMPLES as f64);
    let mut radii = Vec::with_capacity(RAY_SAMPLES + 2);
    radii.push(0.0);
    let mut r = RAY_MIN;
    for _ in 0..=RAY_SAMPLES {
        radii.push(r);
        r *= ratio;
    }
    let values = radii
        .iter()
        .map(|&r| residual(r))
        .collect::<Result<Vec<f64>>>()?;
    for i in 0..values.len() {
        if values[i].abs() <= FIBER_TOLERANCE && radii[i] > 0.0 {
            return Ok(Some(radii[i]));
        }
        if i + 1 < values.len() && values[i] * values[i + 1] < 0.0 {
            let (mut lo, mut hi) = (radii[i], radii[i + 1]);
            let mut g_lo = values[i];
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let g = residual(mid)?;
                if g.abs() <= FIBER_TOLERANCE || hi - lo <= 1e-15 * hi {
                    return Ok(Some(mid));
                }
                if g * g_lo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    g_lo = g;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        if i > 0 && i + 1 < values.len() && values[i].abs() < values[i - 1].abs()
            && values[i].abs() <= values[i + 1].abs()
        {
            if let Some(r) = golden_minimum(residual, radii[i - 1], radii[i + 1])? {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

fn golden_minimum(
    residual: &impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
) -> Result<Option<f64>> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = residual(c)?.abs();
    let mut gd = residual(d)?.abs();
    for _ in 0..200 {
        if gc.min(gd) <= FIBER_TOLERANCE {
            break;
        }
        if b - a <= 1e-15 * b {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = residual(c)?.abs();
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = residual(d)?.abs();
        }
    }
    let (r, g) = if gc < gd { (c, gc) } else { (d, gd) };
    Ok((g <= FIBER_TOLERANCE).then_some(r))
}

/// Points of the fiber `{ξ : p1(x, ξ) = E1}` over `x = (t, φ)` at `n`
/// equally spaced angles. Rays that never meet the level set are skipped.
pub fn fiber_points(map: &MomentMap, x: (f64, f64), e1: f64, n: usize) -> Result<Vec<FiberPoint>> {
    if n < 8 {
        return Err(AdmissibilityError::FiberTooCoarse(n));
    }
    let (t, phi) = x;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let sigma = sigma_at(j, n);
        if let Some((xi_t, xi_phi, _)) = fiber_point_at(map, t, phi, e1, sigma, None)? {
            out.push(FiberPoint { sigma, xi_t, xi_phi });
        }
    }
    if out.is_empty() {
        return Err(AdmissibilityError::EmptyFiber { t, phi, e1 });
    }
    Ok(out)
}

fn tau_samples(geodesic: &Geodesic, n: usize) -> Vec<f64> {
    let (a, b) = geodesic.param_range();
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn p1_gradient_norm(map: &MomentMap, p: &PhasePoint) -> Result<f64> {
    let hx = fd_step(p.xi_t);
    let hy = fd_step(p.xi_phi);
    let dx = (map.p1(&p.with_covector(p.xi_t + hx, p.xi_phi))?
        - map.p1(&p.with_covector(p.xi_t - hx, p.xi_phi))?)
        / (2.0 * hx);
    let dy = (map.p1(&p.with_covector(p.xi_t, p.xi_phi + hy))?
        - map.p1(&p.with_covector(p.xi_t, p.xi_phi - hy))?)
        / (2.0 * hy);
    Ok(dx.hypot(dy))
}

/// True iff `|∂_ξ p1| > 1e−6` at every sampled point of `C_γ`.
pub fn check_principal_type(map: &MomentMap, geodesic: &Geodesic, e1: f64, grid: Grid) -> Result<bool> {
    let samples = sample_cgamma(map, geodesic, e1, grid)?;
    Ok(samples.iter().flatten().flatten().all(|s| s.gradient > PRINCIPAL_TYPE_FLOOR))
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    tau: f64,
    sigma: f64,
    point: PhasePoint,
    radius: f64,
    p2: f64,
    derivative: f64,
    gradient: f64,
}

/// Samples `C_γ` slice by slice; `None` marks rays that miss the fiber.
fn sample_cgamma(
    map: &MomentMap,
    geodesic: &Geodesic,
    e1: f64,
    grid: Grid,
) -> Result<Vec<Vec<Option<Sample>>>> {
    let taus = tau_samples(geodesic, grid.n_tau);
    let slices: Vec<Vec<Option<Sample>>> = taus
        .par_iter()
        .map(|&tau| {
            let x = geodesic.point_unchecked(tau);
            (0..grid.n_fiber)
                .map(|j| {
                    let sigma = sigma_at(j, grid.n_fiber);
                    sample_at(map, geodesic, e1, tau, sigma, x.t, x.phi, None)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    for (slice, &tau) in slices.iter().zip(&taus) {
        if slice.iter().all(Option::is_none) {
            let x = geodesic.point_unchecked(tau);
            return Err(AdmissibilityError::EmptyFiber { t: x.t, phi: x.phi, e1 });
        }
    }
    Ok(slices)
}

#[allow(clippy::too_many_arguments)]
fn sample_at(
    map: &MomentMap,
    geodesic: &Geodesic,
    e1: f64,
    tau: f64,
    sigma: f64,
    t: f64,
    phi: f64,
    guess: Option<f64>,
) -> Result<Option<Sample>> {
    let Some((xi_t, xi_phi, radius)) = fiber_point_at(map, t, phi, e1, sigma, guess)? else {
        return Ok(None);
    };
    let point = PhasePoint::new(t, phi, xi_t, xi_phi);
    let p2 = map.p2(&point)?;
    let Some(derivative) = tau_derivative(map, geodesic, e1, tau, sigma, radius)? else {
        return Ok(None);
    };
    let gradient = p1_gradient_norm(map, &point)?;
    Ok(Some(Sample {
        tau,
        sigma,
        point,
        radius,
        p2,
        derivative,
        gradient,
    }))
}

/// Central difference of `p2` along the arc at fixed fiber angle.
fn tau_derivative(
    map: &MomentMap,
    geodesic: &Geodesic,
    e1: f64,
    tau: f64,
    sigma: f64,
    radius: f64,
) -> Result<Option<f64>> {
    let dt = fd_step(tau);
    let mut values = [0.0; 2];
    for (slot, step) in values.iter_mut().zip([dt, -dt]) {
        let x = geodesic.point_unchecked(tau + step);
        let Some((xi_t, xi_phi, _)) = fiber_point_at(map, x.t, x.phi, e1, sigma, Some(radius))? else {
            return Ok(None);
        };
        *slot = map.p2(&PhasePoint::new(x.t, x.phi, xi_t, xi_phi))?;
    }
    Ok(Some((values[0] - values[1]) / (2.0 * dt)))
}

/// Decides admissibility of `geodesic` for `map` at the given energies.
pub fn check_admissible(
    map: &MomentMap,
    geodesic: &Geodesic,
    energies: EnergyPair,
    grid: Grid,
    threshold: Threshold,
) -> Result<AdmissibilityReport> {
    if grid.n_tau < MIN_GRID || grid.n_fiber < MIN_GRID {
        return Err(AdmissibilityError::GridTooCoarse {
            n_tau: grid.n_tau,
            n_fiber: grid.n_fiber,
        });
    }
    let threshold_value = match threshold {
        Threshold::Relative(v) | Threshold::Absolute(v) => v,
    };
    if !(threshold_value > 0.0) {
        return Err(AdmissibilityError::BadThreshold(threshold_value));
    }
    if let Some(eps) = energies.epsilon {
        if !(eps > 0.0) {
            return Err(AdmissibilityError::BadEpsilon(eps));
        }
    }

    let slices = sample_cgamma(map, geodesic, energies.e1, grid)?;
    let all = || slices.iter().flatten().flatten();
    let principal_type_ok = all().all(|s| s.gradient > PRINCIPAL_TYPE_FLOOR);
    let p2_scale = all().fold(0.0f64, |m, s| m.max(s.p2.abs()));
    let (p2_min, p2_max) = all().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.p2), hi.max(s.p2))
    });
    let epsilon = match energies.epsilon {
        Some(eps) => eps,
        None => {
            let eps = DEFAULT_EPSILON_FRACTION * (p2_max - p2_min);
            if !(eps > 0.0) {
                return Err(AdmissibilityError::BadEpsilon(eps));
            }
            eps
        }
    };
    let threshold_abs = match threshold {
        Threshold::Relative(c) => c * p2_scale,
        Threshold::Absolute(v) => v,
    };
    let in_band = |p2: f64| (p2 - energies.e2).abs() < epsilon;

    let mut band_points = 0;
    let mut best: Option<Witness> = None;
    let mut consider = |s: &Sample, derivative: f64| {
        if best.is_none_or(|w| derivative.abs() < w.derivative.abs()) {
            best = Some(Witness {
                tau: s.tau,
                sigma: s.sigma,
                t: s.point.t,
                phi: s.point.phi,
                xi_t: s.point.xi_t,
                xi_phi: s.point.xi_phi,
                derivative,
            });
        }
    };
    for slice in &slices {
        for s in slice.iter().flatten() {
            if in_band(s.p2) {
                band_points += 1;
                consider(s, s.derivative);
            }
        }
    }

    // A sign change of ∂_τ p2 between neighbouring band samples brackets a
    // zero of the derivative; locate it so the grid cannot step over it.
    for j in 0..grid.n_fiber {
        for pair in slices.windows(2) {
            let (Some(a), Some(b)) = (pair[0][j], pair[1][j]) else {
                continue;
            };
            if !(in_band(a.p2) && in_band(b.p2)) || a.derivative * b.derivative >= 0.0 {
                continue;
            }
            if let Some(root) = refine_zero(map, geodesic, energies.e1, a, b)? {
                if in_band(root.p2) {
                    consider(&root, root.derivative);
                }
            }
        }
    }

    let Some(witness) = best else {
        return Ok(AdmissibilityReport {
            verdict: Verdict::EmptyBand,
            min_derivative: f64::NAN,
            witness: None,
            principal_type_ok,
            grid,
            epsilon,
            threshold: threshold_abs,
            p2_scale,
            band_points: 0,
        });
    };
    let min_derivative = witness.derivative.abs();
    let verdict = if principal_type_ok && min_derivative > threshold_abs {
        Verdict::Admissible
    } else {
        Verdict::NotAdmissible
    };
    Ok(AdmissibilityReport {
        verdict,
        min_derivative,
        witness: Some(witness),
        principal_type_ok,
        grid,
        epsilon,
        threshold: threshold_abs,
        p2_scale,
        band_points,
    })
}

fn refine_zero(
    map: &MomentMap,
    geodesic: &Geodesic,
    e1: f64,
    a: Sample,
    b: Sample,
) -> Result<Option<Sample>> {
    let (mut lo, mut hi) = (a, b);
    let mut best = if a.derivative.abs() < b.derivative.abs() { a } else { b };
    for _ in 0..60 {
        let tau = 0.5 * (lo.tau + hi.tau);
        if tau <= lo.tau || tau >= hi.tau {
            break;
        }
        let x = geodesic.point_unchecked(tau);
        let Some(mid) = sample_at(map, geodesic, e1, tau, a.sigma, x.t, x.phi, Some(lo.radius))? else {
            return Ok(None);
        };
        if mid.derivative.abs() < best.derivative.abs() {
            best = mid;
        }
        if mid.derivative == 0.0 {
            break;
        }
        if mid.derivative * lo.derivative < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(best))
}
