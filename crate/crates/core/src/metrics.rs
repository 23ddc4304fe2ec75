//! Steady-state oscillation measurement and HB-vs-simulation comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonic_balance::LimitCyclePrediction;
use crate::scalar::Scalar;
use crate::simulator::{Signal, TimeSeries};

/// Fraction of the horizon discarded as transient by default.
pub const DEFAULT_DISCARD: f64 = 0.5;
pub const MIN_WINDOW_SAMPLES: usize = 1000;
pub const MIN_PERIODS: usize = 10;
/// Peak-to-peak below which a signal counts as constant.
pub const CONSTANT_P2P: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("signal '{0}' not present in the time series")]
    MissingSignal(&'static str),
    #[error("discard fraction must lie in [0, 1), got {0}")]
    BadDiscard(f64),
    #[error("analysis window holds {0} samples, need at least 1000")]
    TooFewSamples(usize),
    #[error("only {0} full periods in the analysis window; no sustained oscillation")]
    TooFewPeriods(usize),
    #[error("signal is constant over the analysis window")]
    ConstantSignal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport<T> {
    pub signal: String,
    /// Half peak-to-peak of the mean-removed window.
    pub amplitude: T,
    /// Angular frequency in rad/s from upward zero crossings.
    pub frequency: T,
    pub window: (T, T),
    pub n_periods: usize,
    /// Window mean that was removed before measuring.
    pub mean: T,
}

/// Measures amplitude and frequency over the tail of the series.
pub fn measure_oscillation<T: Scalar>(
    ts: &TimeSeries<T>,
    signal: Signal,
    discard_fraction: T,
) -> Result<OscillationReport<T>, MetricsError> {
    if !(discard_fraction >= T::zero() && discard_fraction < T::one()) {
        return Err(MetricsError::BadDiscard(discard_fraction.as_f64()));
    }
    let values = ts
        .signal(signal)
        .ok_or(MetricsError::MissingSignal(signal.name()))?;
    let (Some(&t_first), Some(&t_last)) = (ts.t.first(), ts.t.last()) else {
        return Err(MetricsError::TooFewSamples(0));
    };
    let t_start = t_first + discard_fraction * (t_last - t_first);
    let start = ts.t.partition_point(|&t| t < t_start);
    let t = &ts.t[start..];
    let v = &values[start..];
    if v.len() < MIN_WINDOW_SAMPLES {
        return Err(MetricsError::TooFewSamples(v.len()));
    }

    let n = T::from_usize(v.len()).unwrap();
    let mean = v.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (lo, hi) = v
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &b| {
            (lo.min(b - mean), hi.max(b - mean))
        });
    if hi - lo < T::lit(CONSTANT_P2P) {
        return Err(MetricsError::ConstantSignal);
    }

    let mut first_crossing = None;
    let mut last_crossing = T::zero();
    let mut crossings = 0usize;
    for i in 0..v.len() - 1 {
        let a = v[i] - mean;
        let b = v[i + 1] - mean;
        if a < T::zero() && b >= T::zero() {
            let tc = t[i] + (t[i + 1] - t[i]) * (-a) / (b - a);
            first_crossing.get_or_insert(tc);
            last_crossing = tc;
            crossings += 1;
        }
    }
    let n_periods = crossings.saturating_sub(1);
    if n_periods < MIN_PERIODS {
        return Err(MetricsError::TooFewPeriods(n_periods));
    }
    let period = (last_crossing - first_crossing.unwrap()) / T::from_usize(n_periods).unwrap();

    Ok(OscillationReport {
        signal: signal.name().to_string(),
        amplitude: (hi - lo) * T::lit(0.5),
        frequency: T::TAU() / period,
        window: (t[0], *t.last().unwrap()),
        n_periods,
        mean,
    })
}

/// One line of the HB-vs-simulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow<T> {
    pub label: String,
    pub sigma_hb: T,
    pub sigma_sim: T,
    pub x_hb: T,
    pub x_sim: T,
    pub omega_hb: T,
    pub omega_sim: T,
    pub sigma_rel_err: T,
    pub x_rel_err: T,
    pub omega_rel_err: T,
}

fn rel_err<T: Scalar>(sim: T, hb: T) -> T {
    (sim - hb).abs() / hb
}

/// Relative errors are `|sim - hb| / hb`; the simulated frequency is taken from `sim_sigma`.
pub fn compare<T: Scalar>(
    hb: &LimitCyclePrediction<T>,
    sim_sigma: &OscillationReport<T>,
    sim_x: &OscillationReport<T>,
    label: &str,
) -> ComparisonRow<T> {
    ComparisonRow {
        label: label.to_string(),
        sigma_hb: hb.sigma_hat,
        sigma_sim: sim_sigma.amplitude,
        x_hb: hb.x_hat,
        x_sim: sim_x.amplitude,
        omega_hb: hb.omega_p,
        omega_sim: sim_sigma.frequency,
        sigma_rel_err: rel_err(sim_sigma.amplitude, hb.sigma_hat),
        x_rel_err: rel_err(sim_x.amplitude, hb.x_hat),
        omega_rel_err: rel_err(sim_sigma.frequency, hb.omega_p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic_balance::PredictionMethod;

    fn sine(amp: f64, omega: f64, t0: f64, t1: f64, dt: f64, offset: f64) -> TimeSeries<f64> {
        let n = ((t1 - t0) / dt).round() as usize;
        let t: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt).collect();
        let v = t
            .iter()
            .map(|&t| offset + amp * (omega * t).sin())
            .collect();
        TimeSeries::from_samples(t, v)
    }

    #[test]
    fn synthetic_sine_round_trip() {
        // window [1, 2] s after discarding the first half of [0, 2]
        let ts = sine(0.0068, 100.0, 0.0, 2.0, 1e-4, 0.0);
        let r = measure_oscillation(&ts, Signal::X, 0.5).unwrap();
        assert!((r.amplitude - 0.0068).abs() / 0.0068 < 1e-3);
        assert!((r.frequency - 100.0).abs() / 100.0 < 1e-3);
        assert!((r.window.0 - 1.0).abs() < 1e-9);
        assert!(r.n_periods >= 10);
    }

    #[test]
    fn constant_signal_rejected() {
        let ts = sine(0.0, 1.0, 0.0, 2.0, 1e-3, 0.3);
        assert_eq!(
            measure_oscillation(&ts, Signal::X, 0.5),
            Err(MetricsError::ConstantSignal)
        );
    }

    #[test]
    fn slow_signal_has_too_few_periods() {
        let ts = sine(1.0, 2.0, 0.0, 10.0, 1e-3, 0.0);
        assert!(matches!(
            measure_oscillation(&ts, Signal::X, 0.5),
            Err(MetricsError::TooFewPeriods(_))
        ));
    }

    #[test]
    fn short_window_rejected() {
        let ts = sine(1.0, 100.0, 0.0, 1.0, 1e-3, 0.0);
        assert!(matches!(
            measure_oscillation(&ts, Signal::X, 0.5),
            Err(MetricsError::TooFewSamples(_))
        ));
        assert!(matches!(
            measure_oscillation(&ts, Signal::X, 1.0),
            Err(MetricsError::BadDiscard(_))
        ));
        assert_eq!(
            measure_oscillation(&ts, Signal::Z, 0.0),
            Err(MetricsError::MissingSignal("z"))
        );
    }

    fn report(amplitude: f64, frequency: f64) -> OscillationReport<f64> {
        OscillationReport {
            signal: "sigma".into(),
            amplitude,
            frequency,
            window: (1.0, 2.0),
            n_periods: 20,
            mean: 0.0,
        }
    }

    fn hb(sigma: f64, x: f64, omega: f64) -> LimitCyclePrediction<f64> {
        LimitCyclePrediction {
            omega_p: omega,
            sigma_hat: sigma,
            x_hat: x,
            u_hb_hat: 4.0 / std::f64::consts::PI,
            method: PredictionMethod::ClosedFormSsm,
        }
    }

    #[test]
    fn comparison_rows() {
        let row = compare(
            &hb(0.0637, 0.0637, 10.0),
            &report(0.0660, 10.0),
            &report(0.0660, 10.0),
            "ssm",
        );
        assert!((row.sigma_rel_err - 0.0361).abs() < 1e-3);
        assert_eq!(row.omega_rel_err, 0.0);

        let same = compare(
            &hb(0.0029, 0.0031, 134.0),
            &report(0.0029, 134.0),
            &report(0.0031, 134.0),
            "dsm",
        );
        assert_eq!(same.sigma_rel_err, 0.0);
        assert_eq!(same.x_rel_err, 0.0);
        assert_eq!(same.omega_rel_err, 0.0);
        assert_eq!(same.label, "dsm");
    }
}
