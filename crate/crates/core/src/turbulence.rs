//! Kolmogorov second-order statistics for a collimated Gaussian beam on a
//! horizontal path of constant Cn².
//!
//! All lengths are meters, angles radians, Cn² in m^(-2/3). The closed forms
//! are the weak-fluctuation expressions; they are evaluated regardless of
//! the Rytov variance and [`TurbulenceStats::strong_fluctuation`] marks the
//! results where σ_R² > 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};

const RYTOV_COEFF: f64 = 1.23;
const LONG_TERM_COEFF: f64 = 1.33;
const WANDER_COEFF: f64 = 2.42;
const AOA_COEFF: f64 = 2.91;

/// Default upper limit for the boundary search, m.
pub const DEFAULT_MAX_SEARCH_RANGE_M: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbulenceParams {
    /// Refractive-index structure constant, m^(-2/3). Zero is vacuum.
    pub cn2: f64,
}

/// Named turbulence strengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Average,
    VeryStrong,
    ExtremelyStrong,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Average, Regime::VeryStrong, Regime::ExtremelyStrong];

    pub fn cn2(self) -> f64 {
        match self {
            Regime::Average => 1e-15,
            Regime::VeryStrong => 1e-14,
            Regime::ExtremelyStrong => 1e-13,
        }
    }
}

impl TurbulenceParams {
    pub const VACUUM: TurbulenceParams = TurbulenceParams { cn2: 0.0 };

    pub fn new(cn2: f64) -> Result<Self> {
        let p = TurbulenceParams { cn2 };
        p.validate()?;
        Ok(p)
    }

    pub fn regime(r: Regime) -> Self {
        TurbulenceParams { cn2: r.cn2() }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("turbulence.cn2", self.cn2).map(|_| ())
    }
}

impl Default for TurbulenceParams {
    fn default() -> Self {
        TurbulenceParams::regime(Regime::Average)
    }
}

/// Transmit beam at the launch plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamGeometry {
    /// 1/e² intensity radius at the transmitter, m.
    pub w0_m: f64,
    pub wavelength_m: f64,
    /// Only collimated launches are modeled; `false` is rejected.
    pub collimated: bool,
}

impl Default for BeamGeometry {
    fn default() -> Self {
        BeamGeometry {
            w0_m: 0.020,
            wavelength_m: 850e-9,
            collimated: true,
        }
    }
}

impl BeamGeometry {
    pub fn validate(&self) -> Result<()> {
        positive("tx_beam.w0_m", self.w0_m)?;
        positive("tx_beam.wavelength_m", self.wavelength_m)?;
        if !self.collimated {
            return Err(Error::domain(
                "tx_beam.collimated",
                0.0,
                "only collimated launches are modeled",
            ));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength_m
    }

    /// Rayleigh range πW0²/λ.
    pub fn rayleigh_range(&self) -> f64 {
        PI * self.w0_m * self.w0_m / self.wavelength_m
    }
}

/// Derived statistics at one range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceStats {
    pub range_m: f64,
    pub rytov_var: f64,
    pub w_diff: f64,
    pub w_lt: f64,
    /// Two-axis centroid variance ⟨r_c²⟩, m².
    pub wander_var: f64,
    /// Two-axis angle-of-arrival variance ⟨β_a²⟩, rad².
    pub aoa_var: f64,
    /// Fresnel ratio 2L/(kW²).
    pub lambda_param: f64,
    /// σ_R² > 1: the weak-fluctuation forms are outside their validity range.
    pub strong_fluctuation: bool,
}

impl TurbulenceStats {
    pub fn compute(
        t: &TurbulenceParams,
        b: &BeamGeometry,
        range_m: f64,
        rx_aperture_diameter_m: f64,
    ) -> Result<Self> {
        let rytov_var = rytov_variance(t, b, range_m)?;
        let w_diff = diffraction_radius(b, range_m)?;
        Ok(TurbulenceStats {
            range_m,
            rytov_var,
            w_diff,
            w_lt: long_term_radius(t, b, range_m)?,
            wander_var: beam_wander_variance(t, b, range_m)?,
            aoa_var: aoa_variance(t, rx_aperture_diameter_m, range_m)?,
            lambda_param: fresnel_ratio(b, range_m)?,
            strong_fluctuation: rytov_var > 1.0,
        })
    }
}

fn check_inputs(t: &TurbulenceParams, b: &BeamGeometry, range_m: f64) -> Result<()> {
    t.validate()?;
    b.validate()?;
    non_negative("range_m", range_m)?;
    Ok(())
}

/// σ_R² = 1.23·Cn²·k^(7/6)·L^(11/6).
pub fn rytov_variance(t: &TurbulenceParams, b: &BeamGeometry, range_m: f64) -> Result<f64> {
    check_inputs(t, b, range_m)?;
    Ok(RYTOV_COEFF * t.cn2 * b.wavenumber().powf(7.0 / 6.0) * range_m.powf(11.0 / 6.0))
}

/// Free-space radius W(L) = W0·√(1 + (L/z_R)²).
pub fn diffraction_radius(b: &BeamGeometry, range_m: f64) -> Result<f64> {
    b.validate()?;
    non_negative("range_m", range_m)?;
    let x = range_m / b.rayleigh_range();
    Ok(b.w0_m * (1.0 + x * x).sqrt())
}

/// Λ = 2L/(kW²) evaluated with the diffraction radius at range.
pub fn fresnel_ratio(b: &BeamGeometry, range_m: f64) -> Result<f64> {
    let w = diffraction_radius(b, range_m)?;
    Ok(2.0 * range_m / (b.wavenumber() * w * w))
}

/// W_LT = W·√(1 + 1.33·σ_R²·Λ^(5/6)).
pub fn long_term_radius(t: &TurbulenceParams, b: &BeamGeometry, range_m: f64) -> Result<f64> {
    let w = diffraction_radius(b, range_m)?;
    let sigma2 = rytov_variance(t, b, range_m)?;
    let lambda = fresnel_ratio(b, range_m)?;
    Ok(w * (1.0 + LONG_TERM_COEFF * sigma2 * lambda.powf(5.0 / 6.0)).sqrt())
}

/// ⟨r_c²⟩ = 2.42·Cn²·L³·W0^(-1/3).
pub fn beam_wander_variance(t: &TurbulenceParams, b: &BeamGeometry, range_m: f64) -> Result<f64> {
    check_inputs(t, b, range_m)?;
    Ok(WANDER_COEFF * t.cn2 * range_m.powi(3) * b.w0_m.powf(-1.0 / 3.0))
}

/// ⟨β_a²⟩ = 2.91·Cn²·L·D^(-1/3) for a plane wave on aperture diameter D.
pub fn aoa_variance(t: &TurbulenceParams, aperture_diameter_m: f64, range_m: f64) -> Result<f64> {
    t.validate()?;
    positive("aperture_diameter_m", aperture_diameter_m)?;
    non_negative("range_m", range_m)?;
    Ok(AOA_COEFF * t.cn2 * range_m * aperture_diameter_m.powf(-1.0 / 3.0))
}

/// Probability that the beam centroid lies outside `capture_radius_m`.
///
/// The centroid is an isotropic zero-mean Gaussian with per-axis variance
/// ⟨r_c²⟩/2, so its radius is Rayleigh and the tail is exp(−a²/⟨r_c²⟩).
pub fn interruption_fraction(
    t: &TurbulenceParams,
    b: &BeamGeometry,
    range_m: f64,
    capture_radius_m: f64,
) -> Result<f64> {
    positive_or_infinite("capture_radius_m", capture_radius_m)?;
    let var = beam_wander_variance(t, b, range_m)?;
    Ok(rayleigh_tail(capture_radius_m, var))
}

/// P(|r| > a) for a 2-D isotropic Gaussian with total variance `radial_var`.
pub fn rayleigh_tail(radius: f64, radial_var: f64) -> f64 {
    if radial_var <= 0.0 || radius.is_infinite() {
        return 0.0;
    }
    (-(radius * radius) / radial_var).exp()
}

fn positive_or_infinite(field: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::domain(field, v, "must be positive"))
    }
}

/// Receiver aperture over long-term beam diameter, D / (2·W_LT).
pub fn aperture_ratio(
    t: &TurbulenceParams,
    b: &BeamGeometry,
    range_m: f64,
    receiver_aperture_diameter_m: f64,
) -> Result<f64> {
    positive("receiver_aperture_diameter_m", receiver_aperture_diameter_m)?;
    Ok(receiver_aperture_diameter_m / (2.0 * long_term_radius(t, b, range_m)?))
}

/// Where the aperture ratio crosses one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub distance_m: f64,
    /// No crossing below the search cap; `distance_m` is the cap itself.
    pub saturated: bool,
}

/// Range at which the receiver aperture equals the long-term diameter,
/// searched up to [`DEFAULT_MAX_SEARCH_RANGE_M`].
pub fn boundary_distance(
    t: &TurbulenceParams,
    b: &BeamGeometry,
    receiver_aperture_diameter_m: f64,
) -> Result<Boundary> {
    boundary_distance_capped(t, b, receiver_aperture_diameter_m, DEFAULT_MAX_SEARCH_RANGE_M)
}

pub fn boundary_distance_capped(
    t: &TurbulenceParams,
    b: &BeamGeometry,
    receiver_aperture_diameter_m: f64,
    max_range_m: f64,
) -> Result<Boundary> {
    positive("max_range_m", max_range_m)?;
    let ratio = |l: f64| aperture_ratio(t, b, l, receiver_aperture_diameter_m);
    let at_launch = ratio(0.0)?;
    if at_launch <= 1.0 {
        return Err(Error::NoBoundary {
            ratio_at_launch: at_launch,
        });
    }

    let mut lo = 0.0;
    let mut hi = 1.0_f64.min(max_range_m);
    while ratio(hi)? > 1.0 {
        if hi >= max_range_m {
            return Ok(Boundary {
                distance_m: max_range_m,
                saturated: true,
            });
        }
        lo = hi;
        hi = (hi * 2.0).min(max_range_m);
    }

    // ratio(lo) > 1 >= ratio(hi)
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if ratio(mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Boundary {
        distance_m: 0.5 * (lo + hi),
        saturated: false,
    })
}
