//! Surfaces of revolution and their unit-speed geodesic arcs.
//!
//! A profile is described by `f²(t) = (1 − t²)·q(t)` on `[−1, 1]` with `q` a
//! polynomial that stays positive on the closed interval. Two metrics are
//! attached to the same profile:
//!
//! * the profile chart `g = dt² + f²(t) dφ²`, in which admissibility is
//!   evaluated and longitude arcs are parametrized by `τ = t`;
//! * the polar model `g = dθ² + f(cos θ)² dφ²` with `t = cos θ`, which is
//!   the round unit sphere for `q ≡ 1` and is the surface the eigensolver
//!   and the harmonic sweeps work on.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Tolerance used when locating the maximum of `f²`.
const T0_TOLERANCE: f64 = 1e-12;
/// Number of scan cells used to find critical points of `f²`.
const SCAN_CELLS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("sphere profiles take no coefficients (got {0})")]
    SphereWithCoefficients(usize),
    #[error("polynomial-perturbed profile needs at least one coefficient")]
    EmptyPolynomial,
    #[error("coefficient {index} is not finite")]
    NonFiniteCoefficient { index: usize },
    #[error("q(t) must stay positive on [-1, 1]; q({t}) = {value}")]
    NonPositive { t: f64, value: f64 },
    #[error("f² must have exactly one interior critical point, found {0}")]
    CriticalPointCount(usize),
    #[error("maximum of f² at t0 = {t0} is degenerate ((f²)'' = {second})")]
    DegenerateMaximum { t0: f64, second: f64 },
    #[error("latitude circle t = {t} is not a geodesic (only t0 = {t0} is)")]
    NotAGeodesic { t: f64, t0: f64 },
    #[error("empty or reversed parameter range [{0}, {1}]")]
    EmptyRange(f64, f64),
    #[error("range [{0}, {1}] leaves the coordinate chart")]
    OutOfChart(f64, f64),
    #[error("parameter {tau} outside the arc range [{start}, {end}]")]
    OutOfRange { tau: f64, start: f64, end: f64 },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Sphere,
    PolynomialPerturbed,
}

/// JSON form of a profile: `{"kind": "...", "coefficients": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    #[serde(default)]
    pub coefficients: Vec<f64>,
}

/// Validated profile function with its unique maximum `t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct ProfileFunction {
    kind: ProfileKind,
    coefficients: Vec<f64>,
    t0: f64,
}

impl TryFrom<ProfileSpec> for ProfileFunction {
    type Error = GeometryError;

    fn try_from(spec: ProfileSpec) -> Result<Self> {
        make_profile(spec.kind, spec.coefficients)
    }
}

impl From<ProfileFunction> for ProfileSpec {
    fn from(p: ProfileFunction) -> Self {
        ProfileSpec {
            kind: p.kind,
            coefficients: p.coefficients,
        }
    }
}

/// Builds a profile and locates the maximum of `f²`.
///
/// For [`ProfileKind::Sphere`] the coefficient list must be empty and
/// `q ≡ 1`. For [`ProfileKind::PolynomialPerturbed`] the list holds the
/// ascending coefficients of `q`.
pub fn make_profile(kind: ProfileKind, coefficients: Vec<f64>) -> Result<ProfileFunction> {
    match kind {
        ProfileKind::Sphere if !coefficients.is_empty() => {
            return Err(GeometryError::SphereWithCoefficients(coefficients.len()))
        }
        ProfileKind::PolynomialPerturbed if coefficients.is_empty() => {
            return Err(GeometryError::EmptyPolynomial)
        }
        _ => {}
    }
    if let Some(index) = coefficients.iter().position(|c| !c.is_finite()) {
        return Err(GeometryError::NonFiniteCoefficient { index });
    }
    let mut profile = ProfileFunction {
        kind,
        coefficients,
        t0: 0.0,
    };
    for i in 0..=SCAN_CELLS {
        let t = -1.0 + 2.0 * i as f64 / SCAN_CELLS as f64;
        let q = profile.q(t);
        if q <= 0.0 {
            return Err(GeometryError::NonPositive { t, value: q });
        }
    }
    profile.t0 = profile.locate_maximum()?;
    Ok(profile)
}

impl ProfileFunction {
    pub fn sphere() -> Self {
        make_profile(ProfileKind::Sphere, Vec::new()).expect("unit sphere profile is valid")
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Location of the unique non-degenerate maximum of `f²`.
    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// True when the profile is the round unit sphere (`q ≡ 1`).
    pub fn is_round_sphere(&self) -> bool {
        match self.kind {
            ProfileKind::Sphere => true,
            ProfileKind::PolynomialPerturbed => {
                self.coefficients[0] == 1.0 && self.coefficients[1..].iter().all(|&c| c == 0.0)
            }
        }
    }

    pub fn spec(&self) -> ProfileSpec {
        self.clone().into()
    }

    fn q(&self, t: f64) -> f64 {
        if self.coefficients.is_empty() {
            return 1.0;
        }
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    fn dq(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coefficients.iter().enumerate().skip(1).rev() {
            acc = acc * t + j as f64 * c;
        }
        acc
    }

    fn d2q(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coefficients.iter().enumerate().skip(2).rev() {
            acc = acc * t + (j * (j - 1)) as f64 * c;
        }
        acc
    }

    /// `f²(t)`.
    pub fn f2(&self, t: f64) -> f64 {
        (1.0 - t * t) * self.q(t)
    }

    /// `(f²)'(t)`.
    pub fn df2(&self, t: f64) -> f64 {
        -2.0 * t * self.q(t) + (1.0 - t * t) * self.dq(t)
    }

    /// `(f²)''(t)`.
    pub fn d2f2(&self, t: f64) -> f64 {
        -2.0 * self.q(t) - 4.0 * t * self.dq(t) + (1.0 - t * t) * self.d2q(t)
    }

    /// Profile value; zero at the poles, NaN outside `[−1, 1]`.
    pub fn f(&self, t: f64) -> f64 {
        if t.abs() == 1.0 {
            return 0.0;
        }
        self.f2(t).sqrt()
    }

    /// `f'(t) = (f²)' / (2f)`, finite on the open interval.
    pub fn fp(&self, t: f64) -> f64 {
        self.df2(t) / (2.0 * self.f(t))
    }

    /// Radius of the polar model at meridian arc length `θ`: `f(cos θ)`.
    ///
    /// Written as `sin θ·√q(cos θ)` so it stays accurate near the poles.
    pub fn polar_radius(&self, theta: f64) -> f64 {
        theta.sin() * self.q(theta.cos()).sqrt()
    }

    /// Derivative of [`Self::polar_radius`] in `θ`.
    pub fn polar_radius_derivative(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let q = self.q(c);
        c * q.sqrt() - s * s * self.dq(c) / (2.0 * q.sqrt())
    }

    fn locate_maximum(&self) -> Result<f64> {
        let grid: Vec<f64> = (0..=SCAN_CELLS)
            .map(|i| -1.0 + 2.0 * i as f64 / SCAN_CELLS as f64)
            .collect();
        let slope: Vec<f64> = grid.iter().map(|&t| self.df2(t)).collect();
        let mut brackets = Vec::new();
        // Endpoints are excluded: (f²)' is nonzero there for positive q.
        for i in 1..SCAN_CELLS {
            let (a, b) = (slope[i], slope[i + 1]);
            if a == 0.0 {
                brackets.push((grid[i], grid[i]));
            } else if a * b < 0.0 {
                brackets.push((grid[i], grid[i + 1]));
            }
        }
        if brackets.len() != 1 {
            return Err(GeometryError::CriticalPointCount(brackets.len()));
        }
        let (mut lo, mut hi) = brackets[0];
        while hi - lo > T0_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.df2(lo) * self.df2(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut t0 = 0.5 * (lo + hi);
        if t0.abs() < T0_TOLERANCE {
            t0 = 0.0;
        }
        let second = self.d2f2(t0);
        if second > -1e-8 {
            return Err(GeometryError::DegenerateMaximum { t0, second });
        }
        Ok(t0)
    }
}

/// Polar angle for a profile coordinate, `θ = arccos t`.
pub fn theta_of_t(t: f64) -> f64 {
    t.clamp(-1.0, 1.0).acos()
}

/// Profile coordinate for a polar angle, `t = cos θ`.
pub fn t_of_theta(theta: f64) -> f64 {
    theta.cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeodesicKind {
    EquatorLatitude,
    Longitude,
}

/// Which metric a longitude arc is parametrized in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// `τ = t`, unit speed for `dt² + f² dφ²`.
    #[default]
    Profile,
    /// `τ = θ`, unit speed for `dθ² + f(cos θ)² dφ²`.
    Polar,
}

/// A unit-speed geodesic arc on a surface of revolution.
///
/// Latitude arcs are parametrized by arc length from `0`; longitude arcs by
/// the meridian coordinate of their chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    kind: GeodesicKind,
    chart: Chart,
    fixed: f64,
    range: (f64, f64),
    surface: ProfileFunction,
}

/// Position and velocity on an arc, both in `(t, φ)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicPoint {
    pub t: f64,
    pub phi: f64,
    /// `(dt/dτ, dφ/dτ)`.
    pub tangent: [f64; 2],
}

/// Equator arc at `t0` covering `φ ∈ [α, β]`.
pub fn latitude_arc(profile: &ProfileFunction, phi_range: (f64, f64)) -> Result<Geodesic> {
    latitude_arc_at(profile, profile.t0(), phi_range)
}

/// Latitude arc at an explicit `t`; only `t = t0` is a geodesic.
pub fn latitude_arc_at(
    profile: &ProfileFunction,
    t: f64,
    phi_range: (f64, f64),
) -> Result<Geodesic> {
    let t0 = profile.t0();
    if (t - t0).abs() > 1e-9 {
        return Err(GeometryError::NotAGeodesic { t, t0 });
    }
    let (alpha, beta) = phi_range;
    if !(alpha < beta) {
        return Err(GeometryError::EmptyRange(alpha, beta));
    }
    if beta - alpha >= 2.0 * PI {
        return Err(GeometryError::OutOfChart(alpha, beta));
    }
    Ok(Geodesic {
        kind: GeodesicKind::EquatorLatitude,
        chart: Chart::Profile,
        fixed: t0,
        range: (alpha, beta),
        surface: profile.clone(),
    })
}

/// Meridian arc `t ∈ [a, b]` at longitude `φ0`, parametrized by `τ = t`.
pub fn longitude_arc(profile: &ProfileFunction, t_range: (f64, f64), phi0: f64) -> Result<Geodesic> {
    let (a, b) = t_range;
    if !(a < b) {
        return Err(GeometryError::EmptyRange(a, b));
    }
    if a <= -1.0 || b >= 1.0 {
        return Err(GeometryError::OutOfChart(a, b));
    }
    Ok(Geodesic {
        kind: GeodesicKind::Longitude,
        chart: Chart::Profile,
        fixed: phi0,
        range: (a, b),
        surface: profile.clone(),
    })
}

/// Meridian arc `θ ∈ [θa, θb]` of the polar model at longitude `φ0`,
/// parametrized by `τ = θ`.
pub fn polar_longitude_arc(
    profile: &ProfileFunction,
    theta_range: (f64, f64),
    phi0: f64,
) -> Result<Geodesic> {
    let (a, b) = theta_range;
    if !(a < b) {
        return Err(GeometryError::EmptyRange(a, b));
    }
    if a <= 0.0 || b >= PI {
        return Err(GeometryError::OutOfChart(a, b));
    }
    Ok(Geodesic {
        kind: GeodesicKind::Longitude,
        chart: Chart::Polar,
        fixed: phi0,
        range: (a, b),
        surface: profile.clone(),
    })
}

impl Geodesic {
    pub fn kind(&self) -> GeodesicKind {
        self.kind
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn surface(&self) -> &ProfileFunction {
        &self.surface
    }

    /// `t0` for latitude arcs, `φ0` for longitude arcs.
    pub fn fixed_coordinate(&self) -> f64 {
        self.fixed
    }

    /// The range the arc was constructed from (φ, t or θ).
    pub fn coordinate_range(&self) -> (f64, f64) {
        self.range
    }

    /// Parameter interval of `τ`.
    pub fn param_range(&self) -> (f64, f64) {
        match self.kind {
            GeodesicKind::EquatorLatitude => (0.0, self.length()),
            GeodesicKind::Longitude => self.range,
        }
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.range;
        match self.kind {
            GeodesicKind::EquatorLatitude => self.surface.f(self.fixed) * (b - a),
            GeodesicKind::Longitude => b - a,
        }
    }

    /// Point and unit tangent at parameter `τ`.
    pub fn point(&self, tau: f64) -> Result<GeodesicPoint> {
        let (start, end) = self.param_range();
        let slack = 1e-12 * (end - start).abs().max(1.0);
        if !(tau >= start - slack && tau <= end + slack) {
            return Err(GeometryError::OutOfRange { tau, start, end });
        }
        Ok(self.point_unchecked(tau))
    }

    /// [`Self::point`] without the range check; used by finite differences
    /// that step slightly past the endpoints.
    pub fn point_unchecked(&self, tau: f64) -> GeodesicPoint {
        match (self.kind, self.chart) {
            (GeodesicKind::EquatorLatitude, _) => {
                let radius = self.surface.f(self.fixed);
                GeodesicPoint {
                    t: self.fixed,
                    phi: self.range.0 + tau / radius,
                    tangent: [0.0, 1.0 / radius],
                }
            }
            (GeodesicKind::Longitude, Chart::Profile) => GeodesicPoint {
                t: tau,
                phi: self.fixed,
                tangent: [1.0, 0.0],
            },
            (GeodesicKind::Longitude, Chart::Polar) => GeodesicPoint {
                t: tau.cos(),
                phi: self.fixed,
                tangent: [-tau.sin(), 0.0],
            },
        }
    }

    /// Metric speed `|γ'(τ)|_g` in the arc's own chart.
    pub fn speed(&self, tau: f64) -> f64 {
        let p = self.point_unchecked(tau);
        match self.chart {
            Chart::Profile => {
                let f = self.surface.f(p.t);
                (p.tangent[0].powi(2) + f * f * p.tangent[1].powi(2)).sqrt()
            }
            Chart::Polar => {
                let theta = tau;
                let dtheta = -p.tangent[0] / theta.sin();
                let radius = self.surface.polar_radius(theta);
                (dtheta.powi(2) + radius * radius * p.tangent[1].powi(2)).sqrt()
            }
        }
    }

    /// Splits the arc at an interior parameter value.
    pub fn split(&self, tau: f64) -> Result<(Geodesic, Geodesic)> {
        let (start, end) = self.param_range();
        if !(tau > start && tau < end) {
            return Err(GeometryError::OutOfRange { tau, start, end });
        }
        let cut = match self.kind {
            GeodesicKind::EquatorLatitude => self.range.0 + tau / self.surface.f(self.fixed),
            GeodesicKind::Longitude => tau,
        };
        let mut left = self.clone();
        let mut right = self.clone();
        left.range.1 = cut;
        right.range.0 = cut;
        Ok((left, right))
    }
}

/// Free-function form of [`Geodesic::point`].
pub fn geodesic_point(geodesic: &Geodesic, tau: f64) -> Result<GeodesicPoint> {
    geodesic.point(tau)
}
