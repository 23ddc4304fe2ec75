//! Actuator-induced chattering in first-order sliding-mode control.
//!
//! A scalar integrator is driven through a critically damped second-order
//! actuator by a sign-based sliding-mode law. The crate predicts the resulting
//! limit cycle with describing functions ([`harmonic_balance`]), measures it
//! in fixed-step simulation ([`simulator`], [`metrics`]) and compares static
//! against dynamic sliding manifolds.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

// `!(x > 0)` style guards intentionally reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod harmonic_balance;
pub mod metrics;
pub mod models;
pub mod ratfun;
pub mod scalar;
pub mod simulator;

pub use num_complex::Complex;
pub use scalar::Scalar;

pub use harmonic_balance::{
    closed_form_dsm_limit, closed_form_ssm, describing_function, nyquist_sample,
    predict_closed_form, predict_numeric, solve_limit_cycle_numeric, HbError, HbSolution,
    LimitCyclePrediction, NyquistCurve, PredictionMethod,
};
pub use metrics::{compare, measure_oscillation, ComparisonRow, MetricsError, OscillationReport};
pub use models::{
    build_state_space, check_stability, sigma_transfer, state_space_to_tf, x_transfer, DsmParams,
    ManifoldSpec, ModelError, PlantParams, StabilityReport, StateSpace,
};
pub use ratfun::{
    hurwitz_stable, poly_eval, poly_roots, tf_eval, Polynomial, RatfunError, TransferFunction,
};
pub use simulator::{initial_state, simulate, Signal, SimConfig, SimError, TimeSeries};

pub type Polynomial64 = Polynomial<f64>;
pub type TransferFunction64 = TransferFunction<f64>;
pub type PlantParams64 = PlantParams<f64>;
pub type ManifoldSpec64 = ManifoldSpec<f64>;
pub type DsmParams64 = DsmParams<f64>;
pub type StateSpace64 = StateSpace<f64>;
pub type LimitCyclePrediction64 = LimitCyclePrediction<f64>;
pub type NyquistCurve64 = NyquistCurve<f64>;
pub type HbSolution64 = HbSolution<f64>;
pub type SimConfig64 = SimConfig<f64>;
pub type TimeSeries64 = TimeSeries<f64>;
pub type OscillationReport64 = OscillationReport<f64>;
pub type ComparisonRow64 = ComparisonRow<f64>;

pub type Polynomial32 = Polynomial<f32>;
pub type TransferFunction32 = TransferFunction<f32>;
pub type PlantParams32 = PlantParams<f32>;
pub type ManifoldSpec32 = ManifoldSpec<f32>;
