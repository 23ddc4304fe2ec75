//! Fixed-step RK4 simulation of the discontinuous closed loop.
//!
//! The combined state is `(z, x, xi1, xi2)`; `z` stays zero for the static
//! manifold. The sign law is re-evaluated at every Runge–Kutta stage and
//! `sign(0) = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{check_stability, ManifoldSpec, ModelError, PlantParams};
use crate::scalar::Scalar;

/// Default initial plant state. Exactly zero would be an equilibrium of the
/// sign law with `sign(0) = 0`, so the default sits just off the manifold.
pub const DEFAULT_X0: f64 = 1e-6;
/// Default steps per actuator time constant.
pub const DEFAULT_STEPS_PER_TAU: f64 = 200.0;
/// Coarsest step accepted, as a fraction of `tau`.
pub const MAX_DT_OVER_TAU: f64 = 1.0 / 50.0;
/// Shortest horizon accepted, in multiples of `tau`.
pub const MIN_HORIZON_OVER_TAU: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("state became non-finite; last finite sample index {last_finite_index}")]
    NonFiniteState { last_finite_index: usize },
    #[error("dynamic manifold with h = 0 cannot be initialised on sigma = 0")]
    DegenerateManifold,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    /// Step size in seconds.
    pub dt: T,
    /// Horizon in seconds.
    pub t_end: T,
    pub x0: T,
    pub xi0: (T, T),
    /// Record every `record_stride`-th step.
    pub record_stride: usize,
}

impl<T: Scalar> SimConfig<T> {
    /// `dt = tau/200`, `t_end = max(2 s, 500 tau)`.
    pub fn for_plant(p: &PlantParams<T>) -> Self {
        Self {
            dt: p.tau / T::lit(DEFAULT_STEPS_PER_TAU),
            t_end: T::lit(2.0).max(T::lit(500.0) * p.tau),
            x0: T::lit(DEFAULT_X0),
            xi0: (T::zero(), T::zero()),
            record_stride: 1,
        }
    }

    pub fn validate(&self, tau: T) -> Result<(), SimError> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(SimError::InvalidConfig("dt must be positive".into()));
        }
        // Small slack so that dt = tau/50 computed in floating point is accepted.
        if self.dt > tau * T::lit(MAX_DT_OVER_TAU) * (T::one() + T::lit(1e-9)) {
            return Err(SimError::InvalidConfig(format!(
                "dt = {} exceeds tau/50 = {}",
                self.dt,
                tau * T::lit(MAX_DT_OVER_TAU)
            )));
        }
        if !(self.t_end >= tau * T::lit(MIN_HORIZON_OVER_TAU) * (T::one() - T::lit(1e-9))) {
            return Err(SimError::InvalidConfig(format!(
                "t_end = {} shorter than 100 tau",
                self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(SimError::InvalidConfig("record_stride must be >= 1".into()));
        }
        if !self.x0.is_finite() || !self.xi0.0.is_finite() || !self.xi0.1.is_finite() {
            return Err(SimError::InvalidConfig(
                "initial state must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    X,
    Sigma,
    Ua,
    Xi1,
    Z,
}

impl Signal {
    pub fn name(self) -> &'static str {
        match self {
            Signal::X => "x",
            Signal::Sigma => "sigma",
            Signal::Ua => "u_a",
            Signal::Xi1 => "xi1",
            Signal::Z => "z",
        }
    }
}

/// Sampled closed-loop trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T> {
    pub t: Vec<T>,
    pub x: Vec<T>,
    pub sigma: Vec<T>,
    pub u_a: Vec<T>,
    pub xi1: Vec<T>,
    /// Manifold state, present for the dynamic manifold only.
    pub z: Option<Vec<T>>,
    /// Non-fatal diagnostics (e.g. a dynamic design violating its constraints).
    pub warnings: Vec<String>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn signal(&self, s: Signal) -> Option<&[T]> {
        match s {
            Signal::X => Some(&self.x),
            Signal::Sigma => Some(&self.sigma),
            Signal::Ua => Some(&self.u_a),
            Signal::Xi1 => Some(&self.xi1),
            Signal::Z => self.z.as_deref(),
        }
    }

    /// Single-signal series, mainly for analysing externally produced data.
    pub fn from_samples(t: Vec<T>, values: Vec<T>) -> Self {
        assert_eq!(t.len(), values.len(), "time and value arrays must align");
        Self {
            x: values.clone(),
            sigma: values,
            u_a: vec![T::zero(); t.len()],
            xi1: vec![T::zero(); t.len()],
            z: None,
            t,
            warnings: Vec::new(),
        }
    }
}

fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

type State<T> = [T; 4];

/// Plant, actuator and switching law as one vector field.
struct ClosedLoop<T> {
    plant: PlantParams<T>,
    manifold: ManifoldSpec<T>,
}

impl<T: Scalar> ClosedLoop<T> {
    fn sigma(&self, y: &State<T>) -> T {
        match self.manifold {
            ManifoldSpec::Static => y[1],
            ManifoldSpec::Dynamic(d) => d.h * y[0] + d.l * y[1],
        }
    }

    fn control(&self, y: &State<T>) -> T {
        let s = sign(self.sigma(y));
        match self.manifold {
            ManifoldSpec::Static => -self.plant.k * s,
            ManifoldSpec::Dynamic(d) => {
                -(self.plant.k * s + d.h * d.f * y[0] + d.h * d.g * y[1]) / d.l
            }
        }
    }

    fn rhs(&self, y: &State<T>) -> State<T> {
        let tau = self.plant.tau;
        let u_a = self.control(y);
        let z_dot = match self.manifold {
            ManifoldSpec::Static => T::zero(),
            ManifoldSpec::Dynamic(d) => d.f * y[0] + d.g * y[1],
        };
        [
            z_dot,
            y[2],
            y[3],
            (u_a - y[2] - T::lit(2.0) * tau * y[3]) / (tau * tau),
        ]
    }

    fn rk4_step(&self, y: &State<T>, dt: T) -> State<T> {
        let half = dt * T::lit(0.5);
        let axpy = |a: &State<T>, h: T, k: &State<T>| -> State<T> {
            [
                a[0] + h * k[0],
                a[1] + h * k[1],
                a[2] + h * k[2],
                a[3] + h * k[3],
            ]
        };
        let k1 = self.rhs(y);
        let k2 = self.rhs(&axpy(y, half, &k1));
        let k3 = self.rhs(&axpy(y, half, &k2));
        let k4 = self.rhs(&axpy(y, dt, &k3));
        let sixth = dt / T::lit(6.0);
        let two = T::lit(2.0);
        std::array::from_fn(|i| y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
    }
}

/// Initial state with the sliding variable at zero for the dynamic manifold:
/// `(x0, 0, 0)` or `(z0, x0, 0, 0)` with `z0 = -l x0 / h`.
pub fn initial_state<T: Scalar>(
    _p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
    x0: T,
) -> Result<Vec<T>, SimError> {
    match m {
        ManifoldSpec::Static => Ok(vec![x0, T::zero(), T::zero()]),
        ManifoldSpec::Dynamic(d) => {
            m.validate()?;
            if d.h.is_zero() {
                return Err(SimError::DegenerateManifold);
            }
            Ok(vec![-d.l * x0 / d.h, x0, T::zero(), T::zero()])
        }
    }
}

/// Integrates the closed loop from [`initial_state`] with the actuator at `cfg.xi0`.
pub fn simulate<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
    cfg: &SimConfig<T>,
) -> Result<TimeSeries<T>, SimError> {
    m.validate()?;
    if !(p.tau > T::zero()) || !p.tau.is_finite() || !p.k.is_finite() {
        return Err(SimError::Model(ModelError::InvalidPlant(
            "tau > 0 and finite K required",
        )));
    }
    cfg.validate(p.tau)?;

    let mut warnings = Vec::new();
    if m.is_dynamic() {
        let report = check_stability(p, m)?;
        if !report.overall {
            warnings.push(format!(
                "dynamic manifold violates design constraints: {report:?}"
            ));
        }
    }

    let init = initial_state(p, m, cfg.x0)?;
    let mut y: State<T> = match m {
        ManifoldSpec::Static => [T::zero(), init[0], cfg.xi0.0, cfg.xi0.1],
        ManifoldSpec::Dynamic(_) => [init[0], init[1], cfg.xi0.0, cfg.xi0.1],
    };
    let sys = ClosedLoop {
        plant: *p,
        manifold: *m,
    };

    let steps = cfg.steps();
    let capacity = steps / cfg.record_stride + 1;
    let mut ts = TimeSeries {
        t: Vec::with_capacity(capacity),
        x: Vec::with_capacity(capacity),
        sigma: Vec::with_capacity(capacity),
        u_a: Vec::with_capacity(capacity),
        xi1: Vec::with_capacity(capacity),
        z: m.is_dynamic().then(|| Vec::with_capacity(capacity)),
        warnings,
    };
    let record = |ts: &mut TimeSeries<T>, k: usize, y: &State<T>| {
        ts.t.push(T::from_usize(k).unwrap() * cfg.dt);
        ts.x.push(y[1]);
        ts.sigma.push(sys.sigma(y));
        ts.u_a.push(sys.control(y));
        ts.xi1.push(y[2]);
        if let Some(z) = ts.z.as_mut() {
            z.push(y[0]);
        }
    };

    record(&mut ts, 0, &y);
    for k in 1..=steps {
        y = sys.rk4_step(&y, cfg.dt);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteState {
                last_finite_index: ts.len() - 1,
            });
        }
        if k % cfg.record_stride == 0 {
            record(&mut ts, k, &y);
        }
    }
    Ok(ts)
}
