//! Static link budget: aperture capture, band attenuation, receiver optics,
//! fiber field of view and sky-background count rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, probability, Result};
use crate::turbulence::BeamGeometry;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub range_m: f64,
    pub tx_beam: BeamGeometry,
    pub rx_aperture_diameter_m: f64,
    /// Scalar band loss at the data wavelength.
    pub atm_attenuation_db_per_km: f64,
    /// Throughput of the receiver optics up to the detector fibers.
    pub optics_efficiency: f64,
    pub fiber_core_diameter_m: f64,
    /// Effective receiver focal length (assumed; not a measured value).
    pub focal_length_m: f64,
    pub spectral_filter_fwhm_nm: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            range_m: 300.0,
            tx_beam: BeamGeometry::default(),
            rx_aperture_diameter_m: 0.08,
            atm_attenuation_db_per_km: 3.0,
            optics_efficiency: 0.6,
            fiber_core_diameter_m: 62.5e-6,
            focal_length_m: 2.0,
            spectral_filter_fwhm_nm: 0.8,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        non_negative("link.range_m", self.range_m)?;
        self.tx_beam.validate()?;
        positive("link.rx_aperture_diameter_m", self.rx_aperture_diameter_m)?;
        non_negative("link.atm_attenuation_db_per_km", self.atm_attenuation_db_per_km)?;
        probability("link.optics_efficiency", self.optics_efficiency)?;
        non_negative("link.fiber_core_diameter_m", self.fiber_core_diameter_m)?;
        positive("link.focal_length_m", self.focal_length_m)?;
        non_negative("link.spectral_filter_fwhm_nm", self.spectral_filter_fwhm_nm)?;
        Ok(())
    }

    pub fn rx_aperture_radius(&self) -> f64 {
        0.5 * self.rx_aperture_diameter_m
    }

    pub fn rx_aperture_area(&self) -> f64 {
        let a = self.rx_aperture_radius();
        PI * a * a
    }

    /// Band attenuation over the path as a linear fraction.
    pub fn atmospheric_transmittance(&self) -> f64 {
        db_to_fraction(self.atm_attenuation_db_per_km * self.range_m * 1e-3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackgroundEnvironment {
    /// Sky spectral radiance at the data wavelength, W·m⁻²·sr⁻¹·nm⁻¹.
    pub sky_radiance: f64,
    pub label: String,
}

impl Default for BackgroundEnvironment {
    fn default() -> Self {
        BackgroundEnvironment {
            sky_radiance: 0.001,
            label: "post-sunset".into(),
        }
    }
}

impl BackgroundEnvironment {
    pub fn validate(&self) -> Result<()> {
        non_negative("background.sky_radiance", self.sky_radiance).map(|_| ())
    }
}

pub fn db_to_fraction(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Power fraction of a Gaussian spot of radius `w_lt_m` captured by a
/// centered circular aperture: 1 − exp(−2a²/W²).
pub fn geometric_coupling(w_lt_m: f64, rx_aperture_diameter_m: f64) -> Result<f64> {
    non_negative("w_lt_m", w_lt_m)?;
    positive("rx_aperture_diameter_m", rx_aperture_diameter_m)?;
    if w_lt_m == 0.0 {
        return Ok(1.0);
    }
    let a = 0.5 * rx_aperture_diameter_m;
    Ok(-(-2.0 * a * a / (w_lt_m * w_lt_m)).exp_m1())
}

/// Half-angle field of view defined by the fiber core at the focal plane.
pub fn fiber_fov_halfangle(l: &LinkConfig) -> Result<f64> {
    positive("link.focal_length_m", l.focal_length_m)?;
    non_negative("link.fiber_core_diameter_m", l.fiber_core_diameter_m)?;
    Ok(l.fiber_core_diameter_m / (2.0 * l.focal_length_m))
}

/// Aperture capture × band attenuation × receiver optics.
pub fn total_transmittance(l: &LinkConfig, w_lt_m: f64) -> Result<f64> {
    l.validate()?;
    let coupling = geometric_coupling(w_lt_m, l.rx_aperture_diameter_m)?;
    Ok(coupling * l.atmospheric_transmittance() * l.optics_efficiency)
}

/// Sky-background detection rate for one detector, counts/s.
///
/// N_b = L_sky · Δλ · A_rx · Ω_fov · η_opt · η_det / (hc/λ), with
/// Ω_fov = π·θ² for the fiber half-angle θ.
pub fn background_count_rate(
    l: &LinkConfig,
    env: &BackgroundEnvironment,
    detector_efficiency: f64,
) -> Result<f64> {
    l.validate()?;
    env.validate()?;
    probability("detector.efficiency", detector_efficiency)?;
    let fov = fiber_fov_halfangle(l)?;
    let solid_angle = PI * fov * fov;
    let photon_energy = PLANCK * SPEED_OF_LIGHT / l.tx_beam.wavelength_m;
    Ok(env.sky_radiance
        * l.spectral_filter_fwhm_nm
        * l.rx_aperture_area()
        * solid_angle
        * l.optics_efficiency
        * detector_efficiency
        / photon_energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turbulence::{long_term_radius, TurbulenceParams};
    use approx::assert_relative_eq;

    #[test]
    fn coupling_examples() {
        assert_relative_eq!(geometric_coupling(1e-6, 0.08).unwrap(), 1.0);
        assert_eq!(geometric_coupling(0.0, 0.08).unwrap(), 1.0);
        assert_relative_eq!(
            geometric_coupling(0.04, 0.08).unwrap(),
            1.0 - (-2.0f64).exp(),
            max_relative = 1e-14
        );
        // 1 − exp(−2·0.04²/0.0414²), evaluated independently
        assert_relative_eq!(
            geometric_coupling(0.0414, 0.08).unwrap(),
            0.845_416_581_182_710,
            max_relative = 1e-8
        );
    }

    #[test]
    fn fov_examples() {
        let mut l = LinkConfig::default();
        assert_relative_eq!(fiber_fov_halfangle(&l).unwrap(), 15.625e-6, max_relative = 1e-12);
        l.focal_length_m = 1.0;
        assert_relative_eq!(fiber_fov_halfangle(&l).unwrap(), 31.25e-6, max_relative = 1e-12);
        l.fiber_core_diameter_m = 0.0;
        assert_eq!(fiber_fov_halfangle(&l).unwrap(), 0.0);
        l.focal_length_m = 0.0;
        assert!(fiber_fov_halfangle(&l).is_err());
    }

    #[test]
    fn transmittance_examples() {
        let mut l = LinkConfig {
            atm_attenuation_db_per_km: 0.0,
            optics_efficiency: 1.0,
            ..LinkConfig::default()
        };
        assert_relative_eq!(total_transmittance(&l, 1e-5).unwrap(), 1.0);

        l.atm_attenuation_db_per_km = 3.0;
        l.range_m = 1000.0;
        assert_relative_eq!(
            total_transmittance(&l, 1e-5).unwrap(),
            0.501_187_233_627_272_3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn transmittance_composes_from_turbulence() {
        let l = LinkConfig {
            optics_efficiency: 0.5,
            ..LinkConfig::default()
        };
        let t = TurbulenceParams { cn2: 1e-15 };
        let w = long_term_radius(&t, &l.tx_beam, l.range_m).unwrap();
        let expected = geometric_coupling(w, 0.08).unwrap() * 10f64.powf(-0.09) * 0.5;
        assert_relative_eq!(total_transmittance(&l, w).unwrap(), expected, max_relative = 1e-14);
        assert!(expected > 0.40 && expected < 0.41);
    }

    #[test]
    fn attenuation_is_multiplicative_over_segments() {
        let full = LinkConfig {
            range_m: 2400.0,
            atm_attenuation_db_per_km: 4.7,
            ..LinkConfig::default()
        };
        let half = LinkConfig {
            range_m: 1200.0,
            ..full
        };
        assert_relative_eq!(
            full.atmospheric_transmittance(),
            half.atmospheric_transmittance().powi(2),
            max_relative = 1e-14
        );
    }

    #[test]
    fn background_examples() {
        let mut l = LinkConfig {
            optics_efficiency: 0.5,
            focal_length_m: 1.0,
            fiber_core_diameter_m: 62e-6,
            spectral_filter_fwhm_nm: 1.0,
            ..LinkConfig::default()
        };
        let dark = BackgroundEnvironment {
            sky_radiance: 0.0,
            label: "night".into(),
        };
        assert_eq!(background_count_rate(&l, &dark, 0.5).unwrap(), 0.0);

        let day = BackgroundEnvironment {
            sky_radiance: 0.01,
            label: "midday".into(),
        };
        // Dimensional check done by hand:
        // W/(m²·sr·nm) · nm · m² · sr = W;  W / J = 1/s.
        // 0.01 · 1 · π·0.04² · π·(31e-6)² · 0.25 / (hc/850nm)
        let e_photon = 6.626_070_15e-34 * 299_792_458.0 / 850e-9;
        let expected = 0.01
            * 1.0
            * (PI * 0.04 * 0.04)
            * (PI * 31e-6 * 31e-6)
            * 0.25
            / e_photon;
        let got = background_count_rate(&l, &day, 0.5).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        assert_relative_eq!(got, 1.623_399_163e5, max_relative = 1e-8);

        l.spectral_filter_fwhm_nm = 2.0;
        assert_relative_eq!(
            background_count_rate(&l, &day, 0.5).unwrap(),
            2.0 * got,
            max_relative = 1e-14
        );
    }

    #[test]
    fn invalid_link_rejected() {
        let l = LinkConfig {
            optics_efficiency: 1.5,
            ..LinkConfig::default()
        };
        assert!(l.validate().is_err());
        assert!(total_transmittance(&l, 0.01).is_err());
    }
}
