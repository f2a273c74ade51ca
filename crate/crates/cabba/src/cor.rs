//! Hourly channel-occupancy summaries over a traffic capture.

use cabba_core::airspace::{
    cor_adsb, cor_cabba, hourly_window_starts, AirspaceError, CorResult, ScenarioParams, TrafficCapture,
};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

pub const HOUR_S: f64 = 3600.0;
/// Two-sided confidence level of the hourly intervals.
pub const CONFIDENCE: f64 = 0.95;

/// Mean and Student-t confidence interval of one hour's window samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourlyStat {
    /// Hours since the start of the capture's first hour.
    pub hour: u32,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn mean_ci(samples: &[f64]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, mean, mean);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("degrees of freedom positive")
        .inverse_cdf(0.5 + CONFIDENCE / 2.0);
    let half = t * (var / n).sqrt();
    (mean, mean - half, mean + half)
}

/// Start times of the capture's hours, aligned to multiples of an hour.
pub fn capture_hours(capture: &TrafficCapture) -> Vec<(u32, f64)> {
    let first = (capture.start() / HOUR_S).floor();
    let last = (capture.end() / HOUR_S).floor();
    (0..=(last - first) as u32)
        .map(|h| (h, (first + h as f64) * HOUR_S))
        .collect()
}

/// Occupancy of every sampled window of one hour under `scenario`.
pub fn hour_windows(
    capture: &TrafficCapture,
    hour_start: f64,
    window_s: f64,
    scenario: &ScenarioParams,
) -> Result<Vec<CorResult>, AirspaceError> {
    hourly_window_starts(hour_start)
        .iter()
        .map(|&s| cor_cabba(capture, s, window_s, scenario))
        .collect()
}

/// Per-hour mean and interval of the CABBA occupancy.
pub fn hourly_cabba(
    capture: &TrafficCapture,
    window_s: f64,
    scenario: &ScenarioParams,
) -> Result<Vec<HourlyStat>, AirspaceError> {
    capture_hours(capture)
        .par_iter()
        .map(|&(hour, start)| {
            let g: Vec<f64> = hour_windows(capture, start, window_s, scenario)?
                .iter()
                .map(|r| r.gamma_cabba)
                .collect();
            let (mean, lo, hi) = mean_ci(&g);
            Ok(HourlyStat { hour, mean, lo, hi })
        })
        .collect()
}

/// One row of the scenario comparison: plain ADS-B and each scenario,
/// averaged over the hour's windows.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyComparison {
    pub hour: u32,
    pub gamma_adsb: f64,
    pub gamma_scenarios: Vec<f64>,
}

pub fn hourly_comparison(
    capture: &TrafficCapture,
    window_s: f64,
    scenarios: &[ScenarioParams],
) -> Result<Vec<HourlyComparison>, AirspaceError> {
    capture_hours(capture)
        .par_iter()
        .map(|&(hour, start)| {
            let starts = hourly_window_starts(start);
            let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
            let gamma_adsb = mean(starts.iter().map(|&s| cor_adsb(capture, s, window_s)).collect());
            let gamma_scenarios = scenarios
                .iter()
                .map(|sc| {
                    Ok(mean(
                        hour_windows(capture, start, window_s, sc)?
                            .iter()
                            .map(|r| r.gamma_cabba)
                            .collect(),
                    ))
                })
                .collect::<Result<_, AirspaceError>>()?;
            Ok(HourlyComparison {
                hour,
                gamma_adsb,
                gamma_scenarios,
            })
        })
        .collect()
}

/// Mean relative overhead across all windows that carried ADS-B traffic.
pub fn mean_overhead(
    capture: &TrafficCapture,
    window_s: f64,
    scenario: &ScenarioParams,
) -> Result<Option<f64>, AirspaceError> {
    let mut fracs = Vec::new();
    for (_, start) in capture_hours(capture) {
        for r in hour_windows(capture, start, window_s, scenario)? {
            fracs.extend(r.overhead_frac);
        }
    }
    Ok((!fracs.is_empty()).then(|| fracs.iter().sum::<f64>() / fracs.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_of_constant_samples_is_degenerate() {
        assert_eq!(mean_ci(&[2.0; 6]), (2.0, 2.0, 2.0));
    }

    #[test]
    fn ci_uses_student_t() {
        // t(0.975, 5) = 2.570582
        let (m, lo, hi) = mean_ci(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let se = (3.5f64 / 6.0).sqrt();
        assert!((m - 3.5).abs() < 1e-12);
        assert!((hi - m - 2.570582 * se).abs() < 1e-5);
        assert!((m - lo - 2.570582 * se).abs() < 1e-5);
    }
}
