//! Channel occupancy, overhead, uncertainty delay and line-of-sight figures.

use alloc::vec::Vec;

use crate::frame::{frame_airtime_us, FrameType, Icao};

pub const NM_TO_KM: f64 = 1.852;
/// Default COR sampling window in seconds.
pub const DEFAULT_WINDOW_S: f64 = 30.0;
/// Windows sampled per hour, 10 minutes apart.
pub const WINDOWS_PER_HOUR: usize = 6;
pub const WINDOW_SPACING_S: f64 = 600.0;

/// SAT overhead per aircraft per minute as printed in the SAT comparison.
pub const SAT_REPORTED_BITS_PER_MIN: f64 = 14752.0;
/// SAT overhead bit rate derived from the reported per-minute figure.
pub const SAT_REPORTED_BPS: f64 = 245.8;
/// Plain ADS-B bit rate at 6.2 messages per second.
pub const ADSB_BASELINE_BPS: f64 = 694.4;
/// Reported relative SAT bandwidth increase.
pub const SAT_REPORTED_INCREASE: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AirspaceError {
    #[error("capture has no valid rows")]
    ZeroValidRows,
    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),
    #[error("probability must lie in [0, 1)")]
    ProbabilityOutOfRange,
    #[error("altitude must be non-negative")]
    NegativeAltitude,
    #[error("loss ECDF is empty")]
    EmptyEcdf,
    #[error("loss ECDF must have increasing distances and non-decreasing probabilities in [0, 1]")]
    NonMonotoneEcdf,
    #[error("parameters must be positive")]
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrafficRecord {
    pub timestamp_s: f64,
    pub icao: Icao,
}

/// Time-ordered ADS-B receptions.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficCapture {
    records: Vec<TrafficRecord>,
}

impl TrafficCapture {
    /// Sorts by timestamp; rows with equal timestamps keep their order.
    pub fn new(mut records: Vec<TrafficRecord>) -> Result<Self, AirspaceError> {
        records.retain(|r| r.timestamp_s.is_finite());
        if records.is_empty() {
            return Err(AirspaceError::ZeroValidRows);
        }
        records.sort_by(|a, b| a.timestamp_s.total_cmp(&b.timestamp_s));
        Ok(Self { records })
    }

    pub fn records(&self) -> &[TrafficRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.records[0].timestamp_s
    }

    pub fn end(&self) -> f64 {
        self.records[self.records.len() - 1].timestamp_s
    }

    /// Records with `from <= t < to`.
    pub fn between(&self, from: f64, to: f64) -> &[TrafficRecord] {
        let lo = self.records.partition_point(|r| r.timestamp_s < from);
        let hi = self.records.partition_point(|r| r.timestamp_s < to);
        &self.records[lo..hi.max(lo)]
    }

    pub fn count(&self, from: f64, to: f64) -> usize {
        self.between(from, to).len()
    }

    pub fn distinct_icaos(&self, from: f64, to: f64) -> usize {
        let mut ids: Vec<u32> = self.between(from, to).iter().map(|r| r.icao.get()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Transmission periods of the key and certificate frames, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioParams {
    pub t_b1: f64,
    pub t_b2: f64,
    pub t_c: f64,
}

impl ScenarioParams {
    pub const S1: Self = Self::new(5.0, 5.0, 5.0);
    pub const S2: Self = Self::new(5.0, 10.0, 15.0);
    pub const S3: Self = Self::new(5.0, 10.0, 20.0);
    pub const S4: Self = Self::new(5.0, 15.0, 30.0);
    pub const ALL: [(&'static str, Self); 4] = [("s1", Self::S1), ("s2", Self::S2), ("s3", Self::S3), ("s4", Self::S4)];

    pub const fn new(t_b1: f64, t_b2: f64, t_c: f64) -> Self {
        Self { t_b1, t_b2, t_c }
    }

    pub fn preset(name: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, s)| *s)
    }

    pub fn validate(&self) -> Result<(), AirspaceError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.t_b1) && positive(self.t_b2) && positive(self.t_c)) {
            return Err(AirspaceError::InvalidScenario("periods must be positive and finite"));
        }
        let k = self.t_b2 / self.t_b1;
        if k < 1.0 - 1e-9 || libm::fabs(k - libm::round(k)) > 1e-9 {
            return Err(AirspaceError::InvalidScenario("T_B2 must be a positive multiple of T_B1"));
        }
        Ok(())
    }
}

/// Channel occupancy of one sampling window.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorResult {
    pub window_start: f64,
    pub window_s: f64,
    pub gamma_adsb: f64,
    pub gamma_cabba: f64,
    /// `(γ_cabba − γ_adsb) / γ_adsb`; `None` when the window has no ADS-B traffic.
    pub overhead_frac: Option<f64>,
    pub n_a: f64,
    pub n_b1: f64,
    pub n_b2: f64,
    pub n_c: f64,
}

fn airtime_s(t: FrameType) -> f64 {
    frame_airtime_us(t) as f64 * 1e-6
}

/// `γ = n · 120 µs / Δt` over `[start, start + window_s)`.
pub fn cor_adsb(capture: &TrafficCapture, start: f64, window_s: f64) -> f64 {
    if window_s <= 0.0 {
        return 0.0;
    }
    capture.count(start, start + window_s) as f64 * airtime_s(FrameType::A) / window_s
}

/// CABBA occupancy of the window. Key and certificate counts come from the
/// number of distinct aircraft heard in the `T` seconds before the window
/// end, scaled to packets per window by `window/T`. A B2 replaces the B1 of
/// its interval, so B1 frames go out at rate `1/T_B1 − 1/T_B2`.
pub fn cor_cabba(
    capture: &TrafficCapture,
    start: f64,
    window_s: f64,
    scenario: &ScenarioParams,
) -> Result<CorResult, AirspaceError> {
    scenario.validate()?;
    if !(window_s > 0.0) {
        return Err(AirspaceError::NonPositive);
    }
    let end = start + window_s;
    let trailing = |t: f64| capture.distinct_icaos(end - t, end) as f64;
    let n_a = capture.count(start, end) as f64;
    let n_b1 = trailing(scenario.t_b1) * window_s * (1.0 / scenario.t_b1 - 1.0 / scenario.t_b2);
    let n_b2 = trailing(scenario.t_b2) * window_s / scenario.t_b2;
    let n_c = trailing(scenario.t_c) * window_s / scenario.t_c;
    let gamma_adsb = n_a * airtime_s(FrameType::A) / window_s;
    let gamma_cabba = (n_a * airtime_s(FrameType::A)
        + n_b1 * airtime_s(FrameType::B1)
        + n_b2 * airtime_s(FrameType::B2)
        + n_c * airtime_s(FrameType::C))
        / window_s;
    Ok(CorResult {
        window_start: start,
        window_s,
        gamma_adsb,
        gamma_cabba,
        overhead_frac: (gamma_adsb > 0.0).then(|| (gamma_cabba - gamma_adsb) / gamma_adsb),
        n_a,
        n_b1,
        n_b2,
        n_c,
    })
}

/// Window starts sampled within the hour beginning at `hour_start`.
pub fn hourly_window_starts(hour_start: f64) -> [f64; WINDOWS_PER_HOUR] {
    core::array::from_fn(|k| hour_start + k as f64 * WINDOW_SPACING_S)
}

/// Extra bits per aircraft per minute under SAT:
/// `f_A·60·24 + (60/T_B)·184 + (60/T_C)·1520`.
pub fn sat_overhead_bits_per_min(f_a: f64, t_b: f64, t_c: f64) -> Result<f64, AirspaceError> {
    if !(f_a >= 0.0 && t_b > 0.0 && t_c > 0.0) {
        return Err(AirspaceError::NonPositive);
    }
    Ok(f_a * 60.0 * 24.0 + 60.0 / t_b * 184.0 + 60.0 / t_c * 1520.0)
}

/// Expected delay before a message can be authenticated when key frames are
/// sent every `t` seconds and lost with probability `p`: `(t/2)(1 + 2p + 4p²)`.
pub fn expected_uncertainty_delay(p: f64, t: f64) -> Result<f64, AirspaceError> {
    if !(0.0..1.0).contains(&p) {
        return Err(AirspaceError::ProbabilityOutOfRange);
    }
    if !(t > 0.0) {
        return Err(AirspaceError::NonPositive);
    }
    Ok(t / 2.0 * (1.0 + 2.0 * p + 4.0 * p * p))
}

/// Radio horizon in nautical miles: `1.06·√altitude_ft`.
pub fn los_range_nm(altitude_ft: f64) -> Result<f64, AirspaceError> {
    if !(altitude_ft >= 0.0) {
        return Err(AirspaceError::NegativeAltitude);
    }
    Ok(1.06 * libm::sqrt(altitude_ft))
}

/// Line-of-sight range between two aircraft: the sum of both horizons.
pub fn mutual_los_range_nm(alt1_ft: f64, alt2_ft: f64) -> Result<f64, AirspaceError> {
    Ok(los_range_nm(alt1_ft)? + los_range_nm(alt2_ft)?)
}

/// Packet-loss probability against distance, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEcdf {
    points: Vec<(f64, f64)>,
}

impl LossEcdf {
    /// Points are `(distance_km, p)`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, AirspaceError> {
        if points.is_empty() {
            return Err(AirspaceError::EmptyEcdf);
        }
        let in_range = points.iter().all(|&(d, p)| d.is_finite() && (0.0..=1.0).contains(&p));
        let monotone = points.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1);
        if !(in_range && monotone) {
            return Err(AirspaceError::NonMonotoneEcdf);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Loss probability at `distance_km`, clamped outside the table.
    pub fn p_at(&self, distance_km: f64) -> f64 {
        let pts = &self.points;
        if distance_km <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((d0, p0), (d1, p1)) = (w[0], w[1]);
            if distance_km <= d1 {
                return p0 + (p1 - p0) * (distance_km - d0) / (d1 - d0);
            }
        }
        pts[pts.len() - 1].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SafetyDomain {
    Tcas,
    Atc,
}

/// Line-of-sight range used to bound the time an approaching aircraft is heard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LosRange {
    /// Horizon of a single aircraft at this altitude (ft).
    Horizon(f64),
    /// Two aircraft at these altitudes (ft).
    Mutual(f64, f64),
    /// Nominal range in NM.
    Fixed(f64),
}

impl LosRange {
    pub fn nm(&self) -> Result<f64, AirspaceError> {
        match *self {
            LosRange::Horizon(a) => los_range_nm(a),
            LosRange::Mutual(a, b) => mutual_los_range_nm(a, b),
            LosRange::Fixed(nm) => Ok(nm),
        }
    }
}

/// One operational situation: where loss is evaluated and how long an
/// approaching aircraft stays in radio range before it matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyCase {
    pub name: &'static str,
    /// Outer radius of the protected volume or sector.
    pub radius_nm: f64,
    /// Reaction window (TCAS) or surveillance update period (ATC), seconds.
    pub budget_s: (f64, f64),
    /// `(range, closure speed kt)` pairs bounding the time in LOS.
    pub los_cases: &'static [(LosRange, f64)],
}

/// Terminal arrivals both at 3000 ft closing at 500 kt; oceanic cruise at
/// 35000 ft closing at 1200 kt.
const TCAS_LOS: [(LosRange, f64); 2] = [
    (LosRange::Mutual(3000.0, 3000.0), 500.0),
    (LosRange::Mutual(35000.0, 35000.0), 1200.0),
];

pub const TCAS_CASES: [SafetyCase; 2] = [
    SafetyCase {
        name: "TA",
        radius_nm: 16.0,
        budget_s: (20.0, 48.0),
        los_cases: &TCAS_LOS,
    },
    SafetyCase {
        name: "RA",
        radius_nm: 11.6,
        budget_s: (15.0, 35.0),
        los_cases: &TCAS_LOS,
    },
];

pub const ATC_CASES: [SafetyCase; 3] = [
    SafetyCase {
        name: "Tower",
        radius_nm: 5.0,
        budget_s: (10.0, 10.0),
        los_cases: &[(LosRange::Horizon(3000.0), 250.0)],
    },
    SafetyCase {
        name: "Terminal",
        radius_nm: 40.0,
        budget_s: (10.0, 10.0),
        los_cases: &[(LosRange::Horizon(12500.0), 250.0)],
    },
    SafetyCase {
        name: "ACC",
        radius_nm: 150.0,
        budget_s: (10.0, 10.0),
        // class A cruise, horizon taken as the nominal 140 NM
        los_cases: &[(LosRange::Fixed(140.0), 450.0)],
    },
];

pub fn safety_cases(domain: SafetyDomain) -> &'static [SafetyCase] {
    match domain {
        SafetyDomain::Tcas => &TCAS_CASES,
        SafetyDomain::Atc => &ATC_CASES,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SafetyRow {
    pub name: &'static str,
    pub radius_km: f64,
    pub p: f64,
    pub du_b1_s: f64,
    pub du_c_s: f64,
    pub budget_s: (f64, f64),
    /// Shortest and longest time in LOS before reaching the radius, minutes.
    pub los_min: (f64, f64),
}

pub fn safety_row(case: &SafetyCase, scenario: &ScenarioParams, ecdf: &LossEcdf) -> Result<SafetyRow, AirspaceError> {
    let radius_km = case.radius_nm * NM_TO_KM;
    let p = ecdf.p_at(radius_km);
    let minutes = case
        .los_cases
        .iter()
        .map(|(range, kt)| range.nm().map(|nm| nm / kt * 60.0))
        .collect::<Result<Vec<f64>, _>>()?;
    let lo = minutes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = minutes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SafetyRow {
        name: case.name,
        radius_km,
        p,
        du_b1_s: expected_uncertainty_delay(p, scenario.t_b1)?,
        du_c_s: expected_uncertainty_delay(p, scenario.t_c)?,
        budget_s: case.budget_s,
        los_min: (lo, hi),
    })
}

pub fn safety_table(
    domain: SafetyDomain,
    scenario: &ScenarioParams,
    ecdf: &LossEcdf,
) -> Result<Vec<SafetyRow>, AirspaceError> {
    safety_cases(domain).iter().map(|c| safety_row(c, scenario, ecdf)).collect()
}

/// `T_B1 = 5 s`, `T_C = 30 s`: the slowest key and certificate cadence.
pub const SAFETY_SCENARIO: ScenarioParams = ScenarioParams::new(5.0, 30.0, 30.0);

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, icao: u32) -> TrafficRecord {
        TrafficRecord {
            timestamp_s: t,
            icao: Icao::new(icao).unwrap(),
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn capture_sorting_and_counts() {
        assert_eq!(TrafficCapture::new(Vec::new()), Err(AirspaceError::ZeroValidRows));
        let c = TrafficCapture::new(alloc::vec![rec(3.0, 1), rec(1.0, 2), rec(2.0, 1)]).unwrap();
        let ts: Vec<f64> = c.records().iter().map(|r| r.timestamp_s).collect();
        assert_eq!(ts, [1.0, 2.0, 3.0]);
        let d = TrafficCapture::new(alloc::vec![rec(1.0, 7), rec(1.0, 7)]).unwrap();
        assert_eq!(d.count(0.0, 2.0), 2);
        assert_eq!(d.distinct_icaos(0.0, 2.0), 1);
    }

    #[test]
    fn adsb_occupancy_hand_values() {
        let recs: Vec<_> = (0..1000).map(|i| rec(i as f64 * 0.03, 1)).collect();
        let c = TrafficCapture::new(recs).unwrap();
        assert!(close(cor_adsb(&c, 0.0, 30.0), 0.004, 1e-15));
        assert_eq!(cor_adsb(&c, 100.0, 30.0), 0.0);
    }

    #[test]
    fn b1_absent_when_all_periods_match() {
        let c = TrafficCapture::new(alloc::vec![rec(10.0, 1)]).unwrap();
        let r = cor_cabba(&c, 0.0, 30.0, &ScenarioParams::S1).unwrap();
        assert_eq!(r.n_b1, 0.0);
    }

    #[test]
    fn silent_aircraft_still_sends_keys() {
        let c = TrafficCapture::new(alloc::vec![rec(25.0, 1)]).unwrap();
        let r = cor_cabba(&c, 30.0, 30.0, &ScenarioParams::S4).unwrap();
        assert_eq!(r.n_a, 0.0);
        assert_eq!(r.overhead_frac, None);
        let r = cor_cabba(&c, 0.0, 30.0, &ScenarioParams::S4).unwrap();
        assert!(r.n_b1 > 0.0 && r.gamma_cabba > r.gamma_adsb);
    }

    #[test]
    fn scenario_validation() {
        assert!(ScenarioParams::new(5.0, 12.0, 30.0).validate().is_err());
        assert!(ScenarioParams::new(5.0, 0.0, 30.0).validate().is_err());
        assert!(ScenarioParams::new(5.0, 2.5, 30.0).validate().is_err());
        for (_, s) in ScenarioParams::ALL {
            s.validate().unwrap();
        }
        assert_eq!(ScenarioParams::preset("S3"), Some(ScenarioParams::S3));
    }

    #[test]
    fn sat_formula() {
        assert_eq!(sat_overhead_bits_per_min(6.2, 5.0, 30.0).unwrap(), 14176.0);
        assert_eq!(sat_overhead_bits_per_min(6.2, 1e300, 1e300).unwrap(), 6.2 * 60.0 * 24.0);
        assert!(close(SAT_REPORTED_BITS_PER_MIN / 60.0, SAT_REPORTED_BPS, 0.1));
        assert!(close(6.2 * 112.0, ADSB_BASELINE_BPS, 1e-9));
        assert!(close(SAT_REPORTED_BPS / ADSB_BASELINE_BPS, SAT_REPORTED_INCREASE, 0.01));
    }

    #[test]
    fn uncertainty_delay() {
        assert_eq!(expected_uncertainty_delay(0.0, 5.0).unwrap(), 2.5);
        assert!(close(expected_uncertainty_delay(0.089, 5.0).unwrap(), 3.0, 0.1));
        assert!(close(expected_uncertainty_delay(0.833, 5.0).unwrap(), 14.0, 0.5));
        assert!(expected_uncertainty_delay(1.0, 5.0).is_err());
        assert!(expected_uncertainty_delay(-0.1, 5.0).is_err());
    }

    #[test]
    fn los_values() {
        assert!(close(los_range_nm(3000.0).unwrap(), 58.06, 0.01));
        assert!(close(mutual_los_range_nm(35000.0, 35000.0).unwrap(), 396.6, 0.05));
        assert_eq!(los_range_nm(0.0).unwrap(), 0.0);
        assert!(los_range_nm(-1.0).is_err());
        let a = los_range_nm(1234.0).unwrap();
        assert!(close(los_range_nm(4.0 * 1234.0).unwrap(), 2.0 * a, 1e-12));
    }

    #[test]
    fn ecdf_interpolation() {
        assert_eq!(LossEcdf::new(Vec::new()), Err(AirspaceError::EmptyEcdf));
        assert_eq!(
            LossEcdf::new(alloc::vec![(0.0, 0.5), (1.0, 0.2)]),
            Err(AirspaceError::NonMonotoneEcdf)
        );
        let e = LossEcdf::new(alloc::vec![(0.0, 0.0), (10.0, 0.1), (20.0, 0.3)]).unwrap();
        assert!(close(e.p_at(5.0), 0.05, 1e-15));
        assert!(close(e.p_at(15.0), 0.2, 1e-15));
        assert_eq!(e.p_at(-3.0), 0.0);
        assert_eq!(e.p_at(99.0), 0.3);
    }

    #[test]
    fn zero_loss_gives_half_periods() {
        let e = LossEcdf::new(alloc::vec![(0.0, 0.0), (1000.0, 0.0)]).unwrap();
        for d in [SafetyDomain::Tcas, SafetyDomain::Atc] {
            for r in safety_table(d, &SAFETY_SCENARIO, &e).unwrap() {
                assert_eq!((r.du_b1_s, r.du_c_s), (2.5, 15.0));
            }
        }
    }

    #[test]
    fn los_minutes() {
        let e = LossEcdf::new(alloc::vec![(0.0, 0.0)]).unwrap();
        let atc = safety_table(SafetyDomain::Atc, &SAFETY_SCENARIO, &e).unwrap();
        assert!(close(atc[0].los_min.0, 13.9, 0.05));
        assert!(close(atc[1].los_min.0, 28.4, 0.05));
        assert!(close(atc[2].los_min.0, 18.67, 0.01));
        let tcas = safety_table(SafetyDomain::Tcas, &SAFETY_SCENARIO, &e).unwrap();
        assert!(close(tcas[0].los_min.0, 13.93, 0.01));
        assert!(close(tcas[0].los_min.1, 19.83, 0.01));
    }
}
