//! Frequency-response export of a scenario's sigma-loop.

use chatter_core::{nyquist_sample, sigma_transfer, HbError, NyquistCurve64, PlantParams64};

use crate::config::Scenario;
use crate::output::num;

pub const DEFAULT_POINTS: usize = 2000;
/// Decades on each side of `1/tau` covered by default.
pub const DEFAULT_HALF_DECADES: f64 = 3.0;
pub const DF_LOCUS_POINTS: usize = 200;

/// `[1e-3/tau, 1e3/tau]`.
pub fn default_omega_range(p: &PlantParams64) -> (f64, f64) {
    let span = 10f64.powf(DEFAULT_HALF_DECADES);
    (1.0 / (span * p.tau), span / p.tau)
}

/// Relay-locus amplitudes `[1e-3 K tau, 1e3 K tau]`, bracketing every predicted amplitude.
pub fn default_amplitude_range(p: &PlantParams64) -> (f64, f64) {
    let span = 10f64.powf(DEFAULT_HALF_DECADES);
    (p.k * p.tau / span, p.k * p.tau * span)
}

pub fn emit_nyquist(
    s: &Scenario,
    omega_min: f64,
    omega_max: f64,
    points: usize,
) -> Result<NyquistCurve64, HbError> {
    let g = sigma_transfer(&s.plant, &s.manifold)?;
    nyquist_sample(&g, omega_min, omega_max, points)
}

/// `omega,re,im`; `re` and `im` are empty at poles.
pub fn nyquist_csv(c: &NyquistCurve64) -> String {
    let mut out = String::from("omega,re,im\n");
    for s in &c.samples {
        out.push_str(&num(s.omega));
        match s.value {
            Some(v) => {
                out.push(',');
                out.push_str(&num(v.re));
                out.push(',');
                out.push_str(&num(v.im));
            }
            None => out.push_str(",,"),
        }
        out.push('\n');
    }
    out
}

/// `sigma_hat,re,im` for the `-1/N(sigma_hat)` locus on a log grid.
pub fn df_locus_csv(c: &NyquistCurve64, amp_min: f64, amp_max: f64, points: usize) -> String {
    let mut out = String::from("sigma_hat,re,im\n");
    for (a, p) in c.df_line.sample(amp_min, amp_max, points) {
        out.push_str(&format!("{},{},{}\n", num(a), num(p.re), num(p.im)));
    }
    out
}
