//! Describing-function analysis of the sign element in the partially closed loop.
//!
//! With `N(a) = 4 / (pi a)` for the ideal relay, the harmonic-balance condition
//! `-1/N(a) = G(i w)` is solved on the positive real axis of `G`, because the
//! loop transfer functions built in [`crate::models`] already carry the `-K`
//! input factor and the negative feedback of the sign element. The crossing
//! frequency is where `Im G(i w) = 0`, and the amplitude follows from
//! `a = (4/pi) Re G(i w)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{sigma_transfer, x_transfer, ManifoldSpec, ModelError, PlantParams};
use crate::ratfun::{tf_eval, RatfunError, TransferFunction};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HbError {
    #[error("describing function needs a positive amplitude, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("closed-form dynamic-manifold limit needs f < 0, got {0}")]
    NonNegativeF(f64),
    #[error("no imaginary-axis crossing with positive real part: no chattering predicted")]
    NoCrossing,
    #[error("loop transfer function must be strictly proper")]
    NotStrictlyProper,
    #[error("invalid frequency range: {0}")]
    InvalidRange(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ratfun(#[from] RatfunError),
}

/// Grid size of the crossing scan.
pub const SCAN_POINTS: usize = 2000;
/// Decades scanned on either side of `1/tau_ref`.
pub const SCAN_HALF_DECADES: f64 = 3.0;
/// Relative bisection tolerance on the crossing frequency.
pub const CROSSING_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMethod {
    ClosedFormSsm,
    ClosedFormDsmLimit,
    Numeric,
}

/// Predicted fundamental of the chattering limit cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCyclePrediction<T> {
    /// Oscillation frequency in rad/s.
    pub omega_p: T,
    /// Amplitude of the sliding variable.
    pub sigma_hat: T,
    /// Amplitude of the plant state.
    pub x_hat: T,
    /// Fundamental amplitude of the relay output, always `4/pi`.
    pub u_hb_hat: T,
    pub method: PredictionMethod,
}

/// `N(a) = 4 / (pi a)`.
pub fn describing_function<T: Scalar>(sigma_hat: T) -> Result<T, HbError> {
    if !(sigma_hat > T::zero()) || !sigma_hat.is_finite() {
        return Err(HbError::NonPositiveAmplitude(sigma_hat.as_f64()));
    }
    Ok(relay_fundamental::<T>() / sigma_hat)
}

/// `4/pi`, the fundamental amplitude of a unit sign output.
pub fn relay_fundamental<T: Scalar>() -> T {
    T::lit(4.0) / T::PI()
}

/// Static manifold: `w = 1/tau`, `sigma_hat = x_hat = 2 K tau / pi`.
pub fn closed_form_ssm<T: Scalar>(p: &PlantParams<T>) -> LimitCyclePrediction<T> {
    let amp = T::lit(2.0) * p.k * p.tau / T::PI();
    LimitCyclePrediction {
        omega_p: T::one() / p.tau,
        sigma_hat: amp,
        x_hat: amp,
        u_hb_hat: relay_fundamental(),
        method: PredictionMethod::ClosedFormSsm,
    }
}

/// Dynamic manifold with `h = -1`, `l = 1` in the limit `g -> -f`.
///
/// With `ft = f tau`: `w = sqrt(1 - 2 ft) / tau`,
/// `sigma_hat = 4 K tau / (pi (2 ft^2 - 5 ft + 2))` and
/// `x_hat = |4 K tau (ft - 1) / (pi sqrt(1 - 2 ft) (2 ft^2 - 5 ft + 2))|`.
pub fn closed_form_dsm_limit<T: Scalar>(
    p: &PlantParams<T>,
    f: T,
) -> Result<LimitCyclePrediction<T>, HbError> {
    if !(f < T::zero()) {
        return Err(HbError::NonNegativeF(f.as_f64()));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let ft = f * p.tau;
    let root = (one - two * ft).sqrt();
    let quad = two * ft * ft - T::lit(5.0) * ft + two;
    let scale = T::lit(4.0) * p.k * p.tau / T::PI();
    Ok(LimitCyclePrediction {
        omega_p: root / p.tau,
        sigma_hat: scale / quad,
        x_hat: (scale * (ft - one) / (root * quad)).abs(),
        u_hb_hat: relay_fundamental(),
        method: PredictionMethod::ClosedFormDsmLimit,
    })
}

/// Scan settings for [`solve_limit_cycle_numeric_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions<T> {
    /// Reference time constant; the grid is centred on `1/tau_ref`.
    pub tau_ref: T,
    pub points: usize,
    pub half_decades: T,
    pub rel_tol: T,
}

impl<T: Scalar> Default for ScanOptions<T> {
    fn default() -> Self {
        Self::around(T::one())
    }
}

impl<T: Scalar> ScanOptions<T> {
    pub fn around(tau_ref: T) -> Self {
        Self {
            tau_ref,
            points: SCAN_POINTS,
            half_decades: T::lit(SCAN_HALF_DECADES),
            rel_tol: T::lit(CROSSING_REL_TOL),
        }
    }

    fn bounds(&self) -> (T, T) {
        let span = T::lit(10.0).powf(self.half_decades);
        (T::one() / (self.tau_ref * span), span / self.tau_ref)
    }
}

/// Imaginary-axis crossing of the loop frequency response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing<T> {
    pub omega: T,
    pub re: T,
}

/// Numeric harmonic-balance result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbSolution<T> {
    /// Prediction at the lowest-frequency admissible crossing.
    pub prediction: LimitCyclePrediction<T>,
    /// Every crossing with positive real part, in increasing frequency.
    pub crossings: Vec<Crossing<T>>,
}

impl<T: Scalar> HbSolution<T> {
    pub fn has_multiple_crossings(&self) -> bool {
        self.crossings.len() > 1
    }
}

/// Solves `Im g_sigma(i w) = 0`, `Re g_sigma(i w) > 0` on the default grid around 1 rad/s.
pub fn solve_limit_cycle_numeric<T: Scalar>(
    g_sigma: &TransferFunction<T>,
    g_x: &TransferFunction<T>,
) -> Result<HbSolution<T>, HbError> {
    solve_limit_cycle_numeric_with(g_sigma, g_x, &ScanOptions::default())
}

pub fn solve_limit_cycle_numeric_with<T: Scalar>(
    g_sigma: &TransferFunction<T>,
    g_x: &TransferFunction<T>,
    opts: &ScanOptions<T>,
) -> Result<HbSolution<T>, HbError> {
    if !g_sigma.is_strictly_proper() {
        return Err(HbError::NotStrictlyProper);
    }
    if opts.points < 2 || !(opts.tau_ref > T::zero()) {
        return Err(HbError::InvalidRange(
            "scan needs >= 2 points and tau_ref > 0",
        ));
    }
    let (lo, hi) = opts.bounds();
    let grid = log_grid(lo, hi, opts.points);
    let response: Vec<Option<Complex<T>>> =
        grid.iter().map(|&w| tf_eval(g_sigma, w).ok()).collect();

    let mut crossings = Vec::new();
    for i in 0..grid.len() {
        let Some(v) = response[i] else { continue };
        if v.im.is_zero() {
            if v.re > T::zero() {
                crossings.push(Crossing {
                    omega: grid[i],
                    re: v.re,
                });
            }
            continue;
        }
        let Some(next) = response.get(i + 1).copied().flatten() else {
            continue;
        };
        if next.im.is_zero() || v.im.signum() == next.im.signum() {
            continue;
        }
        if let Some(c) = refine(g_sigma, grid[i], grid[i + 1], v, next, opts.rel_tol) {
            if c.re > T::zero() {
                crossings.push(c);
            }
        }
    }

    let first = *crossings.first().ok_or(HbError::NoCrossing)?;
    let u_hb_hat = relay_fundamental::<T>();
    let x_resp = tf_eval(g_x, first.omega)?;
    Ok(HbSolution {
        prediction: LimitCyclePrediction {
            omega_p: first.omega,
            sigma_hat: u_hb_hat * first.re,
            x_hat: u_hb_hat * x_resp.norm(),
            u_hb_hat,
            method: PredictionMethod::Numeric,
        },
        crossings,
    })
}

/// Bisection on the sign of `Im g(i w)`; rejects brackets that straddle a pole.
fn refine<T: Scalar>(
    g: &TransferFunction<T>,
    mut lo: T,
    mut hi: T,
    at_lo: Complex<T>,
    at_hi: Complex<T>,
    rel_tol: T,
) -> Option<Crossing<T>> {
    let lo_sign = at_lo.im.signum();
    let bracket_scale = at_lo.norm().max(at_hi.norm());
    while hi - lo > rel_tol * lo {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = tf_eval(g, mid).ok()?;
        if v.im.is_zero() {
            lo = mid;
            hi = mid;
            break;
        }
        if v.im.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let omega = (lo + hi) * T::lit(0.5);
    let v = tf_eval(g, omega).ok()?;
    if v.norm() > T::lit(1e6) * bracket_scale {
        return None;
    }
    Some(Crossing { omega, re: v.re })
}

/// Numeric prediction for a plant/manifold pair, scanning around `1/tau`.
pub fn predict_numeric<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
) -> Result<HbSolution<T>, HbError> {
    let gs = sigma_transfer(p, m)?;
    let gx = x_transfer(p, m)?;
    solve_limit_cycle_numeric_with(&gs, &gx, &ScanOptions::around(p.tau))
}

/// Closed-form prediction where one exists: always for the static manifold,
/// and for the dynamic manifold with `h = -1`, `l = 1`, `f < 0` (limit `g -> -f`).
pub fn predict_closed_form<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
) -> Option<LimitCyclePrediction<T>> {
    match m {
        ManifoldSpec::Static => Some(closed_form_ssm(p)),
        ManifoldSpec::Dynamic(d) if d.h == -T::one() && d.l == T::one() => {
            closed_form_dsm_limit(p, d.f).ok()
        }
        ManifoldSpec::Dynamic(_) => None,
    }
}

/// `n` log-spaced points with exact endpoints.
pub fn log_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    // Interpolating exponents of ten puts decade-aligned grids exactly on decades.
    let (a, b) = (lo.log10(), hi.log10());
    let last = T::from_usize(n - 1).unwrap();
    let ten = T::lit(10.0);
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => ten.powf(a + (b - a) * T::from_usize(i).unwrap() / last),
        })
        .collect()
}

/// One frequency-response sample; `value` is `None` where the response has a pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NyquistSample<T> {
    pub omega: T,
    pub value: Option<Complex<T>>,
}

/// The `-1/N(a)` locus of the ideal relay: `a -> (-(pi/4) a, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfLine<T> {
    /// Real-axis displacement per unit amplitude (`-pi/4`).
    pub re_per_amplitude: T,
}

impl<T: Scalar> Default for DfLine<T> {
    fn default() -> Self {
        Self {
            re_per_amplitude: -T::PI() / T::lit(4.0),
        }
    }
}

impl<T: Scalar> DfLine<T> {
    pub fn point(&self, sigma_hat: T) -> Complex<T> {
        Complex::new(self.re_per_amplitude * sigma_hat, T::zero())
    }

    /// Locus points on a log grid of amplitudes.
    pub fn sample(&self, amp_min: T, amp_max: T, n: usize) -> Vec<(T, Complex<T>)> {
        log_grid(amp_min, amp_max, n)
            .into_iter()
            .map(|a| (a, self.point(a)))
            .collect()
    }
}

/// Sampled frequency response together with the relay locus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NyquistCurve<T> {
    pub samples: Vec<NyquistSample<T>>,
    pub df_line: DfLine<T>,
}

/// `n` log-spaced samples of `g(i w)` on `[omega_min, omega_max]`.
pub fn nyquist_sample<T: Scalar>(
    g: &TransferFunction<T>,
    omega_min: T,
    omega_max: T,
    n: usize,
) -> Result<NyquistCurve<T>, HbError> {
    if !(omega_min > T::zero()) || !(omega_max > omega_min) || !omega_max.is_finite() {
        return Err(HbError::InvalidRange("need 0 < omega_min < omega_max"));
    }
    if n < 2 {
        return Err(HbError::InvalidRange("need at least 2 points"));
    }
    let samples = log_grid(omega_min, omega_max, n)
        .into_iter()
        .map(|omega| NyquistSample {
            omega,
            value: tf_eval(g, omega).ok(),
        })
        .collect();
    Ok(NyquistCurve {
        samples,
        df_line: DfLine::default(),
    })
}
