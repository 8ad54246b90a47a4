//! Families of `(h, |∫_γ u_h ds|)` experiments with fitted decay exponents.

mod fit;
mod report;

pub use fit::{fit_decay, DecayFit, FitError};
pub use report::{load_report, parse_csv, rows_to_csv, save_report, sidecar_path, write_atomic, CSV_HEADER};

use crate::eigensolve::{joint_eigenfunctions, EigenError, CELLS_PER_MODE, MIN_GRID};
use crate::geometry::{latitude_arc, polar_longitude_arc, Geodesic, GeodesicKind, GeometryError, ProfileFunction};
use crate::lineintegral::{integrate_restriction, LineIntegralError, QuadratureSpec, SphericalHarmonic};
use crate::specfun::{assoc_legendre_norm_theta, semiclassical_h, turning_points, HarmonicIndex, SpecfunError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Largest degree accepted by the zonal sweep.
pub const MAX_ZONAL_DEGREE: u32 = 2000;
pub const DEFAULT_DELTA0: f64 = 0.3;
pub const DEFAULT_WINDOW: f64 = 1.0;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("zonal degree k = {0} is odd; odd zonal harmonics vanish on the equator")]
    OddZonal(u32),
    #[error("zonal degree k = {k} outside 2..={MAX_ZONAL_DEGREE}")]
    ZonalRange { k: u32 },
    #[error("order k = {0} must be positive")]
    ZeroOrder(u32),
    #[error("zonal sweep needs an equator latitude arc on the round sphere")]
    NotEquator,
    #[error("closed-form harmonics need the round sphere profile")]
    NotSphere,
    #[error("δ0 = {delta0} puts the arc outside (0, π) for k = {k} (θ0 = {theta0})")]
    ArcOutOfChart { k: u32, delta0: f64, theta0: f64 },
    #[error("window factor must be positive, got {0}")]
    BadWindow(f64),
    #[error("empty k list")]
    EmptyList,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    LineIntegral(#[from] LineIntegralError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("{path} line {line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SweepError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ZonalEquator,
    TesseralCaustic,
    TransitionPeak,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::ZonalEquator => "zonal-equator",
            Self::TesseralCaustic => "tesseral-caustic",
            Self::TransitionPeak => "transition-peak",
            Self::Custom => "custom",
        }
    }
}

/// Which side of the turning point the tesseral arc lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArcPlacement {
    /// `θ ∈ [θ0 − δ0, θ0]`.
    #[default]
    Forbidden,
    /// `θ ∈ [θ0, θ0 + δ0]`.
    Allowed,
}

/// Eigenfunction family for custom sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Angular mode 0, radial index `k` (degree `k` on the sphere).
    Zonal,
    /// Angular mode `k`, radial index `k` (degree `2k` on the sphere).
    #[default]
    Tesseral,
}

/// One row: angular mode `k`, degree `l`, `h`, and the measured value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: u32,
    pub l: u32,
    pub h: f64,
    pub abs_i: f64,
    pub re_i: f64,
    pub im_i: f64,
}

impl SweepRow {
    fn new(k: u32, l: u32, h: f64, value: num_complex::Complex64) -> Self {
        Self {
            k,
            l,
            h,
            abs_i: value.norm(),
            re_i: value.re,
            im_i: value.im,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub experiment: Experiment,
    /// Sorted by `h` descending.
    pub rows: Vec<SweepRow>,
    pub slope: Option<f64>,
    pub intercept_log_c: Option<f64>,
    pub r_squared: Option<f64>,
    pub delta0: Option<f64>,
    pub quadrature: QuadratureSpec,
}

impl SweepReport {
    /// Sorts rows and fits them; fails when the fit is impossible.
    pub fn fitted(
        experiment: Experiment,
        mut rows: Vec<SweepRow>,
        delta0: Option<f64>,
        quadrature: QuadratureSpec,
    ) -> Result<Self> {
        rows.sort_by(|a, b| b.h.total_cmp(&a.h).then(a.k.cmp(&b.k)));
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.abs_i)).collect();
        let fit = fit_decay(&points)?;
        Ok(Self {
            experiment,
            rows,
            slope: Some(fit.slope),
            intercept_log_c: Some(fit.intercept_log_c),
            r_squared: Some(fit.r_squared),
            delta0,
            quadrature,
        })
    }

    pub fn fit(&self) -> Option<DecayFit> {
        Some(DecayFit {
            slope: self.slope?,
            intercept_log_c: self.intercept_log_c?,
            r_squared: self.r_squared?,
            dropped: self.rows.iter().filter(|r| !(r.abs_i > 0.0)).count(),
        })
    }
}

fn nonempty(k_list: &[u32]) -> Result<()> {
    if k_list.is_empty() {
        Err(SweepError::EmptyList)
    } else {
        Ok(())
    }
}

/// `∫ N_k^0 ds` over a latitude arc of the equator for each even degree `k`.
pub fn run_zonal_sweep(k_list: &[u32], arc: &Geodesic, spec: &QuadratureSpec) -> Result<SweepReport> {
    nonempty(k_list)?;
    for &k in k_list {
        if k % 2 == 1 {
            return Err(SweepError::OddZonal(k));
        }
        if k == 0 || k > MAX_ZONAL_DEGREE {
            return Err(SweepError::ZonalRange { k });
        }
    }
    if arc.kind() != GeodesicKind::EquatorLatitude || !arc.surface().is_round_sphere() || arc.fixed_coordinate() != 0.0 {
        return Err(SweepError::NotEquator);
    }
    let rows = k_list
        .par_iter()
        .map(|&k| {
            let h = semiclassical_h(k);
            let value = integrate_restriction(&SphericalHarmonic { l: k, k: 0 }, arc, spec, h)?;
            Ok(SweepRow::new(0, k, h, value))
        })
        .collect::<Result<Vec<_>>>()?;
    SweepReport::fitted(Experiment::ZonalEquator, rows, None, *spec)
}

/// Meridian arc of depth `δ0` on one side of the turning point of `(2k, k)`.
pub fn tesseral_arc(k: u32, delta0: f64, placement: ArcPlacement) -> Result<Geodesic> {
    if k == 0 {
        return Err(SweepError::ZeroOrder(k));
    }
    let (theta0, _) = turning_points(HarmonicIndex::new(2 * k, k)?)?;
    let range = match placement {
        ArcPlacement::Forbidden => (theta0 - delta0, theta0),
        ArcPlacement::Allowed => (theta0, theta0 + delta0),
    };
    if !(delta0 > 0.0) || range.0 <= 0.0 || range.1 >= PI {
        return Err(SweepError::ArcOutOfChart { k, delta0, theta0 });
    }
    Ok(polar_longitude_arc(&ProfileFunction::sphere(), range, 0.0)?)
}

/// `∫ N_{2k}^k ds` over the meridian arc ending (or starting) at the turning
/// point `θ0 = arcsin(kh)`.
pub fn run_tesseral_sweep(
    k_list: &[u32],
    delta0: f64,
    profile: &ProfileFunction,
    placement: ArcPlacement,
    spec: &QuadratureSpec,
) -> Result<SweepReport> {
    nonempty(k_list)?;
    if !profile.is_round_sphere() {
        return Err(SweepError::NotSphere);
    }
    let arcs = k_list
        .iter()
        .map(|&k| tesseral_arc(k, delta0, placement))
        .collect::<Result<Vec<_>>>()?;
    let rows = k_list
        .par_iter()
        .zip(&arcs)
        .map(|(&k, arc)| {
            let h = semiclassical_h(2 * k);
            let value = integrate_restriction(&SphericalHarmonic { l: 2 * k, k }, arc, spec, h)?;
            Ok(SweepRow::new(k, 2 * k, h, value))
        })
        .collect::<Result<Vec<_>>>()?;
    SweepReport::fitted(Experiment::TesseralCaustic, rows, Some(delta0), *spec)
}

/// Number of samples for the coarse scan of the transition window.
const PEAK_SAMPLES: usize = 512;

/// Maximizes `|g|` on `[a, b]`: dense scan, then golden-section refinement
/// around the best sample. Returns `(θ, g(θ))`.
fn peak<G: Fn(f64) -> f64>(g: G, a: f64, b: f64) -> (f64, f64) {
    let step = (b - a) / PEAK_SAMPLES as f64;
    let (best, _) = (0..=PEAK_SAMPLES)
        .map(|i| (i, g(a + i as f64 * step).abs()))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut lo = (a + (best as f64 - 1.0) * step).max(a);
    let mut hi = (a + (best as f64 + 1.0) * step).min(b);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (g(x1).abs(), g(x2).abs());
    for _ in 0..80 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = g(x1).abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = g(x2).abs();
        }
    }
    let grid_best = a + best as f64 * step;
    [grid_best, x1, x2]
        .into_iter()
        .map(|x| (x, g(x)))
        .fold((grid_best, 0.0), |acc, x| if x.1.abs() > acc.1.abs() { x } else { acc })
}

/// `sup |N_{2k}^k(cos θ)|` over `θ0 ± width·h^{2/3}`.
pub fn run_transition_peak_sweep(k_list: &[u32], width: f64) -> Result<SweepReport> {
    run_transition_peak_sweep_with(k_list, width, |l, k, theta| {
        assoc_legendre_norm_theta(l, k, theta).expect("k <= l")
    })
}

/// Transition-peak sweep over an arbitrary radial function `g(l, k, θ)`.
pub fn run_transition_peak_sweep_with<G>(k_list: &[u32], width: f64, g: G) -> Result<SweepReport>
where
    G: Fn(u32, u32, f64) -> f64 + Sync,
{
    nonempty(k_list)?;
    if !(width > 0.0 && width.is_finite()) {
        return Err(SweepError::BadWindow(width));
    }
    let rows = k_list
        .par_iter()
        .map(|&k| {
            if k == 0 {
                return Err(SweepError::ZeroOrder(k));
            }
            let l = 2 * k;
            let h = semiclassical_h(l);
            let (theta0, _) = turning_points(HarmonicIndex::new(l, k)?)?;
            let half = width * h.powf(2.0 / 3.0);
            if theta0 - half <= 0.0 || theta0 + half >= PI {
                return Err(SweepError::ArcOutOfChart { k, delta0: half, theta0 });
            }
            let (_, value) = peak(|theta| g(l, k, theta), theta0 - half, theta0 + half);
            Ok(SweepRow::new(k, l, h, num_complex::Complex64::new(value, 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    SweepReport::fitted(Experiment::TransitionPeak, rows, None, QuadratureSpec::default())
}

/// Grid used by custom sweeps for radial index `index` at mode `k`.
pub fn custom_grid(k: u32, index: usize) -> usize {
    let degree = k as usize + index;
    let n = (32 * (degree + 1)).max(CELLS_PER_MODE * k as usize).max(MIN_GRID);
    n.next_multiple_of(2)
}

/// Integrates computed eigenfunctions of `profile` over a fixed arc.
///
/// `n` overrides the automatic grid; it must satisfy the eigensolver's
/// preconditions for every `k`.
pub fn run_custom_sweep(
    k_list: &[u32],
    family: Family,
    geodesic: &Geodesic,
    n: Option<usize>,
    spec: &QuadratureSpec,
) -> Result<SweepReport> {
    nonempty(k_list)?;
    let profile = geodesic.surface();
    let rows = k_list
        .par_iter()
        .map(|&k| {
            let (mode, index) = match family {
                Family::Zonal => (0, k as usize),
                Family::Tesseral => (k, k as usize),
            };
            if index == 0 {
                return Err(SweepError::ZeroOrder(k));
            }
            let grid = n.unwrap_or_else(|| custom_grid(mode, index));
            let modes = joint_eigenfunctions(profile, mode, grid, index + 1)?;
            let u = &modes[index];
            let value = integrate_restriction(u, geodesic, spec, u.h)?;
            Ok(SweepRow::new(mode, mode + index as u32, u.h, value))
        })
        .collect::<Result<Vec<_>>>()?;
    SweepReport::fitted(Experiment::Custom, rows, None, *spec)
}

/// The equator arc `φ ∈ [0, π/3]` on the round sphere.
pub fn default_equator_arc() -> Geodesic {
    latitude_arc(&ProfileFunction::sphere(), (0.0, PI / 3.0)).expect("valid arc")
}
