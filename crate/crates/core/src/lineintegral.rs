//! `∫_γ u ds` by composite Gauss–Legendre over wavelength-sized panels.
//!
//! Arcs are unit speed, so `ds = dτ`. Panels have length at most
//! `2πh / panels_per_wavelength`; panel sums are reduced pairwise in panel
//! order, which keeps the result bit-stable for a fixed panel count
//! regardless of thread scheduling.

use crate::eigensolve::JointEigenfunction;
use crate::geometry::{Chart, Geodesic, GeodesicKind};
use crate::quadrature::{pairwise_sum, GaussLegendre};
use crate::specfun::assoc_legendre_norm_theta;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineIntegralError {
    #[error("h = {h} needs {needed} panels, above the cap of {max}")]
    TooManyPanels { h: f64, needed: f64, max: usize },
    #[error("semiclassical parameter must be positive and finite, got {0}")]
    BadH(f64),
    #[error("invalid quadrature spec: {0}")]
    BadSpec(String),
}

pub type Result<T> = std::result::Result<T, LineIntegralError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub nodes_per_panel: usize,
    pub panels_per_wavelength: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_panel: 12,
            panels_per_wavelength: 4.0,
            max_panels: 1_000_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 4 {
            return Err(LineIntegralError::BadSpec(format!(
                "nodes_per_panel = {} (need >= 4)",
                self.nodes_per_panel
            )));
        }
        if !(self.panels_per_wavelength >= 2.0) {
            return Err(LineIntegralError::BadSpec(format!(
                "panels_per_wavelength = {} (need >= 2)",
                self.panels_per_wavelength
            )));
        }
        Ok(())
    }

    /// Same rule with twice as many panels per wavelength.
    pub fn doubled(&self) -> Self {
        Self {
            panels_per_wavelength: 2.0 * self.panels_per_wavelength,
            ..*self
        }
    }

    pub fn panel_count(&self, length: f64, h: f64) -> Result<usize> {
        let width = 2.0 * PI * h / self.panels_per_wavelength;
        let needed = (length / width).ceil().max(1.0);
        if needed > self.max_panels as f64 {
            return Err(LineIntegralError::TooManyPanels {
                h,
                needed,
                max: self.max_panels,
            });
        }
        Ok(needed as usize)
    }
}

/// A complex-valued function on the surface.
pub trait SurfaceFunction: Sync {
    /// Value at profile coordinates `(t, φ)`.
    fn value(&self, t: f64, phi: f64) -> Complex64;

    /// Value at polar coordinates; override when `θ` is available more
    /// accurately than through `arccos t`.
    fn value_polar(&self, theta: f64, phi: f64) -> Complex64 {
        self.value(theta.cos(), phi)
    }
}

impl<F> SurfaceFunction for F
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    fn value(&self, t: f64, phi: f64) -> Complex64 {
        self(t, phi)
    }
}

/// The normalized spherical harmonic `N_l^k(cos θ) e^{ikφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphericalHarmonic {
    pub l: u32,
    pub k: u32,
}

impl SurfaceFunction for SphericalHarmonic {
    fn value(&self, t: f64, phi: f64) -> Complex64 {
        self.value_polar(t.clamp(-1.0, 1.0).acos(), phi)
    }

    fn value_polar(&self, theta: f64, phi: f64) -> Complex64 {
        let radial = assoc_legendre_norm_theta(self.l, self.k, theta).expect("k <= l checked at construction");
        if self.k == 0 {
            return Complex64::new(radial, 0.0);
        }
        Complex64::from_polar(1.0, self.k as f64 * phi) * radial
    }
}

impl SurfaceFunction for JointEigenfunction {
    fn value(&self, t: f64, phi: f64) -> Complex64 {
        self.value_polar(t.clamp(-1.0, 1.0).acos(), phi)
    }

    fn value_polar(&self, theta: f64, phi: f64) -> Complex64 {
        let radial = self.radial_at_theta(theta);
        if self.k == 0 {
            return Complex64::new(radial, 0.0);
        }
        Complex64::from_polar(1.0, self.k as f64 * phi) * radial
    }
}

fn sample(u: &dyn SurfaceFunction, geodesic: &Geodesic, tau: f64) -> Complex64 {
    let p = geodesic.point_unchecked(tau);
    match (geodesic.kind(), geodesic.chart()) {
        (GeodesicKind::Longitude, Chart::Polar) => u.value_polar(tau, p.phi),
        _ => u.value(p.t, p.phi),
    }
}

/// Integral of `u` along the arc with a fixed number of panels.
pub fn integrate_panels(
    u: &dyn SurfaceFunction,
    geodesic: &Geodesic,
    nodes_per_panel: usize,
    panels: usize,
) -> Complex64 {
    let rule = GaussLegendre::new(nodes_per_panel);
    let (a, b) = geodesic.param_range();
    let width = (b - a) / panels as f64;
    let sums: Vec<Complex64> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let lo = a + p as f64 * width;
            let hi = if p + 1 == panels { b } else { lo + width };
            rule.mapped(lo, hi)
                .map(|(tau, w)| sample(u, geodesic, tau) * w)
                .fold(Complex64::default(), |acc, x| acc + x)
        })
        .collect();
    pairwise_sum(&sums)
}

/// `∫_γ u ds` with panels sized from the wavelength `2πh`.
pub fn integrate_restriction(
    u: &dyn SurfaceFunction,
    geodesic: &Geodesic,
    spec: &QuadratureSpec,
    h: f64,
) -> Result<Complex64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(LineIntegralError::BadH(h));
    }
    spec.validate()?;
    let panels = spec.panel_count(geodesic.length(), h)?;
    Ok(integrate_panels(u, geodesic, spec.nodes_per_panel, panels))
}

/// Integrates at `spec` and at doubled panel density; returns the finer
/// value and the magnitude of the difference.
pub fn integrate_adaptive(
    u: &dyn SurfaceFunction,
    geodesic: &Geodesic,
    spec: &QuadratureSpec,
    h: f64,
) -> Result<(Complex64, f64)> {
    let coarse = integrate_restriction(u, geodesic, spec, h)?;
    let fine = integrate_restriction(u, geodesic, &spec.doubled(), h)?;
    Ok((fine, (fine - coarse).norm()))
}
