//! Dynamic-manifold design for a bound on the chattering frequency over a range of actuator time constants.

use chatter_core::{
    closed_form_dsm_limit, predict_numeric, DsmParams64, HbError, HbSolution64,
    LimitCyclePrediction64, ManifoldSpec64, PlantParams64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ALPHA: f64 = 0.98;
/// Most negative `f` the tuner returns.
pub const F_FLOOR: f64 = -1e4;
pub const SCAN_POINTS: usize = 100;
/// Relative slack of the scan check, absorbing rounding in the inversion.
const SCAN_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunerRequest {
    pub tau_min: f64,
    pub tau_max: f64,
    pub omega_max: f64,
    pub k: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuneError {
    #[error("invalid request: requires {0}")]
    InvalidRequest(&'static str),
    #[error("infeasible: omega_max = {omega_max} does not exceed 1/tau_min = {ssm_omega}, the frequency reached as f -> 0-")]
    Infeasible { omega_max: f64, ssm_omega: f64 },
    #[error("frequency bound violated at tau = {tau} after tuning (omega = {omega})")]
    ScanViolation { tau: f64, omega: f64 },
    #[error(transparent)]
    Hb(#[from] HbError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointPrediction {
    pub tau: f64,
    /// Limit `g -> -f`.
    pub closed_form: LimitCyclePrediction64,
    /// With the returned finite `g`.
    pub numeric: HbSolution64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub manifold: ManifoldSpec64,
    /// True when the frequency bound alone would allow `f < F_FLOOR`.
    pub floor_active: bool,
    /// Largest predicted frequency over the scanned interval.
    pub max_scan_omega: f64,
    /// At `tau_min` and `tau_max`.
    pub endpoints: Vec<EndpointPrediction>,
}

/// Limit-cycle frequency `sqrt(1 - 2 f tau) / tau` in the limit `g -> -f`.
pub fn dsm_frequency(f: f64, tau: f64) -> f64 {
    (1.0 - 2.0 * f * tau).sqrt() / tau
}

/// Least `f` with `dsm_frequency(f, tau) <= omega_max`.
pub fn f_bound(tau: f64, omega_max: f64) -> f64 {
    (1.0 - omega_max * omega_max * tau * tau) / (2.0 * tau)
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| match i {
        0 => lo,
        i if i == n - 1 => hi,
        i => lo + (hi - lo) * i as f64 / (n - 1) as f64,
    })
}

pub fn tune_dsm(req: &TunerRequest) -> Result<TuneResult, TuneError> {
    let TunerRequest {
        tau_min,
        tau_max,
        omega_max,
        k,
        alpha,
    } = *req;
    if !(tau_min > 0.0 && tau_min <= tau_max && tau_max.is_finite()) {
        return Err(TuneError::InvalidRequest("0 < tau_min ≤ tau_max"));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(TuneError::InvalidRequest("K > 0"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TuneError::InvalidRequest("0 < alpha < 1"));
    }
    if omega_max.is_nan() {
        return Err(TuneError::InvalidRequest("omega_max a number"));
    }
    let ssm_omega = 1.0 / tau_min;
    if !(omega_max > ssm_omega) {
        return Err(TuneError::Infeasible {
            omega_max,
            ssm_omega,
        });
    }

    // The bound binds where f_bound is largest; scan rather than assume it is tau_min.
    let binding = linspace(tau_min, tau_max, SCAN_POINTS)
        .map(|t| f_bound(t, omega_max))
        .fold(f_bound(tau_min, omega_max), f64::max);
    let floor_active = binding < F_FLOOR;
    let f = binding.max(F_FLOOR);

    let mut max_scan_omega = 0.0f64;
    for tau in linspace(tau_min, tau_max, SCAN_POINTS) {
        let omega = dsm_frequency(f, tau);
        if omega > omega_max * (1.0 + SCAN_REL_TOL) {
            return Err(TuneError::ScanViolation { tau, omega });
        }
        max_scan_omega = max_scan_omega.max(omega);
    }

    let d = DsmParams64::scaled_family(f, alpha);
    let manifold = ManifoldSpec64::Dynamic(d);
    let endpoints = [tau_min, tau_max]
        .into_iter()
        .map(|tau| {
            let plant = PlantParams64 { k, tau };
            Ok(EndpointPrediction {
                tau,
                closed_form: closed_form_dsm_limit(&plant, f)?,
                numeric: predict_numeric(&plant, &manifold)?,
            })
        })
        .collect::<Result<Vec<_>, TuneError>>()?;

    Ok(TuneResult {
        manifold,
        floor_active,
        max_scan_omega,
        endpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(tau_min: f64, tau_max: f64, omega_max: f64) -> TunerRequest {
        TunerRequest {
            tau_min,
            tau_max,
            omega_max,
            k: 1.0,
            alpha: DEFAULT_ALPHA,
        }
    }

    #[test]
    fn frequency_law_inverts() {
        for (tau, f) in [(0.01, -40.0), (0.1, -3.0), (1e-3, -1e3)] {
            assert!((f_bound(tau, dsm_frequency(f, tau)) - f).abs() < 1e-9 * f.abs());
        }
    }

    #[test]
    fn single_point_interval_recovers_reference_design() {
        let r = tune_dsm(&req(0.01, 0.01, 134.17)).unwrap();
        let ManifoldSpec64::Dynamic(d) = r.manifold else {
            panic!()
        };
        assert!((d.f + 40.0).abs() < 0.05, "{}", d.f);
        assert_eq!((d.h, d.l), (-1.0, 1.0));
        assert_eq!(d.g, -DEFAULT_ALPHA * d.f);
        assert!(!r.floor_active);
        assert_eq!(r.endpoints.len(), 2);
        assert!((r.endpoints[0].closed_form.omega_p - 134.17).abs() < 1e-9);
    }

    #[test]
    fn unconstrained_request_hits_floor() {
        let r = tune_dsm(&req(0.01, 0.1, 1e9)).unwrap();
        let ManifoldSpec64::Dynamic(d) = r.manifold else {
            panic!()
        };
        assert_eq!(d.f, F_FLOOR);
        assert!(r.floor_active);
    }

    #[test]
    fn slow_bound_is_infeasible() {
        assert!(matches!(
            tune_dsm(&req(0.01, 0.1, 99.0)),
            Err(TuneError::Infeasible { .. })
        ));
        assert!(matches!(
            tune_dsm(&req(0.01, 0.1, 100.0)),
            Err(TuneError::Infeasible { .. })
        ));
    }

    #[test]
    fn bound_holds_over_interval_and_binds_at_tau_min() {
        let r = tune_dsm(&req(0.005, 0.2, 500.0)).unwrap();
        let ManifoldSpec64::Dynamic(d) = r.manifold else {
            panic!()
        };
        // Oracle: fine scan of the interval.
        let worst = (0..=10_000)
            .map(|i| dsm_frequency(d.f, 0.005 + (0.2 - 0.005) * i as f64 / 10_000.0))
            .fold(0.0, f64::max);
        assert!(worst <= 500.0 * (1.0 + 1e-12));
        assert!((r.max_scan_omega - 500.0).abs() < 1e-9);
        // Any more negative f breaks the bound.
        assert!(dsm_frequency(d.f * 1.001, 0.005) > 500.0);
    }

    #[test]
    fn numeric_prediction_tracks_limit_for_alpha_near_one() {
        let r = tune_dsm(&TunerRequest {
            alpha: 0.999,
            ..req(0.01, 0.1, 134.17)
        })
        .unwrap();
        for e in &r.endpoints {
            let rel = (e.numeric.prediction.sigma_hat - e.closed_form.sigma_hat).abs()
                / e.closed_form.sigma_hat;
            assert!(rel < 0.05, "tau {}: {rel}", e.tau);
        }
    }

    #[test]
    fn invalid_requests_are_rejected() {
        for r in [
            req(0.1, 0.01, 1e3),
            req(0.0, 0.1, 1e3),
            TunerRequest {
                k: 0.0,
                ..req(0.01, 0.1, 1e3)
            },
            TunerRequest {
                alpha: 1.0,
                ..req(0.01, 0.1, 1e3)
            },
        ] {
            assert!(
                matches!(tune_dsm(&r), Err(TuneError::InvalidRequest(_))),
                "{r:?}"
            );
        }
    }
}
