use serde::{Deserialize, Serialize};

use super::{run_scenario_with, Scenario, SimResult};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::tracking::{select_strategy, CompensationStrategy};
use crate::turbulence::{interruption_fraction, TurbulenceStats};

/// Scalar scenario fields addressable by a sweep.
pub const PARAMETER_PATHS: &[&str] = &[
    "link.range_m",
    "link.rx_aperture_diameter_m",
    "link.atm_attenuation_db_per_km",
    "link.optics_efficiency",
    "link.fiber_core_diameter_m",
    "link.focal_length_m",
    "link.spectral_filter_fwhm_nm",
    "link.tx_beam.w0_m",
    "link.tx_beam.wavelength_m",
    "turbulence.cn2",
    "source.clock_rate_hz",
    "source.mu",
    "source.extinction_ratio_db",
    "detector.efficiency",
    "detector.dark_count_rate_hz",
    "detector.dead_time_s",
    "detector.gate_window_s",
    "background.sky_radiance",
    "fade.wander_bandwidth_hz",
    "duration_s",
];

impl Scenario {
    fn field_mut(&mut self, path: &str) -> Result<&mut f64> {
        Ok(match path {
            "link.range_m" => &mut self.link.range_m,
            "link.rx_aperture_diameter_m" => &mut self.link.rx_aperture_diameter_m,
            "link.atm_attenuation_db_per_km" => &mut self.link.atm_attenuation_db_per_km,
            "link.optics_efficiency" => &mut self.link.optics_efficiency,
            "link.fiber_core_diameter_m" => &mut self.link.fiber_core_diameter_m,
            "link.focal_length_m" => &mut self.link.focal_length_m,
            "link.spectral_filter_fwhm_nm" => &mut self.link.spectral_filter_fwhm_nm,
            "link.tx_beam.w0_m" => &mut self.link.tx_beam.w0_m,
            "link.tx_beam.wavelength_m" => &mut self.link.tx_beam.wavelength_m,
            "turbulence.cn2" => &mut self.turbulence.cn2,
            "source.clock_rate_hz" => &mut self.source.clock_rate_hz,
            "source.mu" => &mut self.source.mu,
            "source.extinction_ratio_db" => &mut self.source.extinction_ratio_db,
            "detector.efficiency" => &mut self.detector.efficiency,
            "detector.dark_count_rate_hz" => &mut self.detector.dark_count_rate_hz,
            "detector.dead_time_s" => &mut self.detector.dead_time_s,
            "detector.gate_window_s" => &mut self.detector.gate_window_s,
            "background.sky_radiance" => &mut self.background.sky_radiance,
            "fade.wander_bandwidth_hz" => &mut self.fade.wander_bandwidth_hz,
            "duration_s" => &mut self.duration_s,
            _ => {
                return Err(Error::UnknownParameter {
                    path: path.to_string(),
                    valid: PARAMETER_PATHS,
                })
            }
        })
    }

    pub fn parameter(&self, path: &str) -> Result<f64> {
        let mut copy = self.clone();
        copy.field_mut(path).map(|v| *v)
    }

    /// Copy of the scenario with one scalar field replaced.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Scenario> {
        let mut copy = self.clone();
        *copy.field_mut(path)? = value;
        Ok(copy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub result: SimResult,
}

/// Full Monte Carlo per value. Every row keeps the scenario's master seed,
/// so rows are paired; output is in value order.
pub fn sweep(s: &Scenario, path: &str, values: &[f64], exec: Execution) -> Result<Vec<SweepRow>> {
    let scenarios = prepare(s, path, values)?;
    let rows = exec::map_slice(exec, &scenarios, |(index, value, sc)| {
        run_scenario_with(sc, exec)
            .map(|result| SweepRow {
                index: *index,
                value: *value,
                result,
            })
            .map_err(|e| e.with_context(format!("sweep row {index} ({path} = {value})")))
    });
    rows.into_iter().collect()
}

/// Closed-form turbulence and strategy columns, without Monte Carlo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRow {
    pub index: usize,
    pub value: f64,
    pub turbulence: TurbulenceStats,
    pub aperture_ratio: f64,
    /// Centroid outage probability against the receiver aperture radius.
    pub interruption_fraction: f64,
    pub strategy: CompensationStrategy,
    pub boundary_distance_m: Option<f64>,
}

pub fn analytic_sweep(s: &Scenario, path: &str, values: &[f64]) -> Result<Vec<AnalyticRow>> {
    let scenarios = prepare(s, path, values)?;
    scenarios
        .into_iter()
        .map(|(index, value, sc)| {
            let l = &sc.link;
            let turbulence =
                TurbulenceStats::compute(&sc.turbulence, &l.tx_beam, l.range_m, l.rx_aperture_diameter_m)?;
            let decision = select_strategy(&sc.turbulence, &l.tx_beam, l)?;
            Ok(AnalyticRow {
                index,
                value,
                turbulence,
                aperture_ratio: decision.aperture_ratio,
                interruption_fraction: interruption_fraction(
                    &sc.turbulence,
                    &l.tx_beam,
                    l.range_m,
                    l.rx_aperture_radius(),
                )?,
                strategy: decision.strategy,
                boundary_distance_m: decision.boundary.map(|b| b.distance_m),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.with_context(format!("analytic sweep over {path}")))
}

fn prepare(s: &Scenario, path: &str, values: &[f64]) -> Result<Vec<(usize, f64, Scenario)>> {
    if values.is_empty() {
        return Err(Error::Shape("sweep needs at least one value".into()));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| Ok((i, v, s.with_parameter(path, v)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_path_lists_valid_ones() {
        let e = Scenario::default().with_parameter("link.nope", 1.0).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("link.nope"));
        assert!(msg.contains("background.sky_radiance"));
    }

    #[test]
    fn every_listed_path_resolves() {
        let s = Scenario::default();
        for p in PARAMETER_PATHS {
            let v = s.parameter(p).unwrap();
            assert_eq!(s.with_parameter(p, v).unwrap(), s, "{p}");
        }
    }

    #[test]
    fn only_swept_field_changes() {
        let s = Scenario::default();
        let t = s.with_parameter("background.sky_radiance", 0.05).unwrap();
        let mut back = t.clone();
        back.background.sky_radiance = s.background.sky_radiance;
        assert_eq!(back, s);
    }

    #[test]
    fn empty_values_rejected() {
        assert!(analytic_sweep(&Scenario::default(), "link.range_m", &[]).is_err());
    }

    #[test]
    fn analytic_distance_sweep_is_monotone() {
        let values: Vec<f64> = (1..=10).map(|i| 500.0 * i as f64).collect();
        for cn2 in [1e-15, 1e-14, 1e-13] {
            let s = Scenario::default().with_parameter("turbulence.cn2", cn2).unwrap();
            let rows = analytic_sweep(&s, "link.range_m", &values).unwrap();
            for w in rows.windows(2) {
                assert!(w[1].interruption_fraction >= w[0].interruption_fraction);
                assert!(w[1].aperture_ratio < w[0].aperture_ratio);
            }
        }
    }

    #[test]
    fn parallel_and_sequential_sweeps_agree() {
        let s = Scenario {
            slots: 100_000,
            duration_s: 0.05,
            ..Scenario::default()
        };
        let v = [0.0, 0.02, 0.05];
        let a = sweep(&s, "background.sky_radiance", &v, Execution::Parallel).unwrap();
        let b = sweep(&s, "background.sky_radiance", &v, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }
}
