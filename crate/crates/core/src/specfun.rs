//! Legendre and fully normalized associated Legendre functions.
//!
//! The normalized functions `N_l^k(x)` satisfy
//! `2π ∫₀^π N_l^k(cos θ)² sin θ dθ = 1`, so `N_l^k(cos θ) e^{ikφ}` is an
//! L²-normalized spherical harmonic. No Condon–Shortley phase is applied.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("order k = {k} exceeds degree l = {l}")]
    OrderExceedsDegree { l: u32, k: u32 },
    #[error("argument x = {0} outside [-1, 1]")]
    OutOfDomain(f64),
    #[error("angle {theta} too close to a pole (sin θ = {sin} < 0.1)")]
    NearPole { theta: f64, sin: f64 },
    #[error("no classically allowed region: k·h = {0} > 1")]
    NoAllowedRegion(f64),
    #[error("turning points need k ≥ 1")]
    ZonalTurningPoint,
    #[error("degree l = 0 has no semiclassical parameter")]
    ZeroDegree,
}

pub type Result<T> = std::result::Result<T, SpecfunError>;

/// Rescaling threshold for the recurrence's running values.
const RESCALE: f64 = 1e200;

/// Degree/order pair of a spherical harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    pub l: u32,
    pub k: u32,
}

impl HarmonicIndex {
    pub fn new(l: u32, k: u32) -> Result<Self> {
        if k > l {
            return Err(SpecfunError::OrderExceedsDegree { l, k });
        }
        Ok(Self { l, k })
    }

    /// `h = 1/√(l(l+1))`.
    pub fn h(&self) -> Result<f64> {
        if self.l == 0 {
            return Err(SpecfunError::ZeroDegree);
        }
        Ok(semiclassical_h(self.l))
    }

    pub fn eigenvalue(&self) -> f64 {
        let l = self.l as f64;
        l * (l + 1.0)
    }
}

/// `h = 1/√(l(l+1))`.
pub fn semiclassical_h(l: u32) -> f64 {
    let l = l as f64;
    1.0 / (l * (l + 1.0)).sqrt()
}

/// Legendre polynomial `P_k(x)` by the three-term recurrence.
pub fn legendre_p(k: u32, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0) * x * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `Π_{j=1}^{n} (2j−1)/(2j)`, i.e. `(2n−1)!!/(2n)!!`.
fn half_double_factorial_ratio(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, j| {
        let j = j as f64;
        acc * (2.0 * j - 1.0) / (2.0 * j)
    })
}

/// Exact `P_k(0)`: `(−1)^{k/2} (k−1)!!/k!!` for even `k`, `0` for odd `k`.
pub fn legendre_p0(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let magnitude = half_double_factorial_ratio(k / 2);
    if (k / 2).is_multiple_of(2) {
        magnitude
    } else {
        -magnitude
    }
}

/// Fully normalized associated Legendre function `N_l^k(x)`.
pub fn assoc_legendre_norm(l: u32, k: u32, x: f64) -> Result<f64> {
    if k > l {
        return Err(SpecfunError::OrderExceedsDegree { l, k });
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(SpecfunError::OutOfDomain(x));
    }
    let sin = ((1.0 - x) * (1.0 + x)).sqrt();
    Ok(normalized_recurrence(l, k, x, sin))
}

/// Same as [`assoc_legendre_norm`] but takes `θ` directly, which keeps
/// `sin θ` accurate close to the poles.
pub fn assoc_legendre_norm_theta(l: u32, k: u32, theta: f64) -> Result<f64> {
    if k > l {
        return Err(SpecfunError::OrderExceedsDegree { l, k });
    }
    let (sin, cos) = theta.sin_cos();
    Ok(normalized_recurrence(l, k, cos, sin.abs()))
}

fn normalized_recurrence(l: u32, k: u32, x: f64, sin: f64) -> f64 {
    // N_k^k = sqrt((2k+1)/(4π) · (2k−1)!!/(2k)!!) · sin^k θ, carried as
    // mantissa 1 with the magnitude in log form.
    let log_start = 0.5 * ((2.0 * k as f64 + 1.0) / (4.0 * PI)).ln()
        + 0.5 * half_double_factorial_ratio(k).ln();
    let mut log_scale = if k == 0 {
        log_start
    } else if sin == 0.0 {
        return 0.0;
    } else {
        log_start + k as f64 * sin.ln()
    };
    let kf = k as f64;
    let mut cur = 1.0;
    if l > k {
        let mut prev = cur;
        cur = (2.0 * kf + 3.0).sqrt() * x * prev;
        for j in (k + 2)..=l {
            let jf = j as f64;
            let a = ((4.0 * jf * jf - 1.0) / (jf * jf - kf * kf)).sqrt();
            let b = (((jf - 1.0).powi(2) - kf * kf) / (4.0 * (jf - 1.0).powi(2) - 1.0)).sqrt();
            let next = a * (x * cur - b * prev);
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                cur /= RESCALE;
                prev /= RESCALE;
                log_scale += RESCALE.ln();
            }
        }
    }
    if cur == 0.0 {
        return 0.0;
    }
    let log_value = log_scale + cur.abs().ln();
    log_value.exp().copysign(cur)
}

/// Main term of the Szegő asymptotic
/// `P_k(cos θ) ≈ √(2/(πk sin θ)) cos((k+½)θ − π/4)`.
pub fn szego_main_term(k: u32, theta: f64) -> Result<f64> {
    let sin = theta.sin();
    if !(sin >= 0.1) {
        return Err(SpecfunError::NearPole { theta, sin });
    }
    let kf = k as f64;
    Ok((2.0 / (PI * kf * sin)).sqrt() * ((kf + 0.5) * theta - PI / 4.0).cos())
}

/// Turning points `θ0 = arcsin(k·h)`, `θ1 = π − θ0` bounding the region
/// where `ξ_t² = 1 − k²h²/sin²θ ≥ 0`.
pub fn turning_points(idx: HarmonicIndex) -> Result<(f64, f64)> {
    if idx.k == 0 {
        return Err(SpecfunError::ZonalTurningPoint);
    }
    let kh = idx.k as f64 * idx.h()?;
    if kh > 1.0 {
        return Err(SpecfunError::NoAllowedRegion(kh));
    }
    let theta0 = kh.asin();
    Ok((theta0, PI - theta0))
}
