//! Plant, actuator and sliding-manifold definitions.
//!
//! The plant is the scalar integrator `x' = u`, driven through the critically
//! damped actuator `tau^2 xi'' + 2 tau xi' + xi = u_a`. Replacing the sign
//! element by an auxiliary input `u_hb` yields the linear, partially closed
//! loop whose transfer functions feed the harmonic-balance analysis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratfun::{hurwitz_stable, Polynomial, RatfunError, TransferFunction};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid manifold: {0}")]
    InvalidManifold(&'static str),
    #[error("invalid plant: {0}")]
    InvalidPlant(&'static str),
    #[error(transparent)]
    Ratfun(#[from] RatfunError),
}

/// Reaching-law gain and actuator time constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams<T> {
    /// Control gain `K`.
    pub k: T,
    /// Actuator time constant `tau` in seconds.
    pub tau: T,
}

impl<T: Scalar> PlantParams<T> {
    /// Validated constructor (`K > 0`, `tau > 0`).
    pub fn new(k: T, tau: T) -> Result<Self, ModelError> {
        let p = Self { k, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.k > T::zero()) || !self.k.is_finite() {
            return Err(ModelError::InvalidPlant("K > 0 required"));
        }
        self.check_tau()
    }

    // Construction routines accept K = 0 for degenerate experiments.
    fn check_tau(&self) -> Result<(), ModelError> {
        if !(self.tau > T::zero()) || !self.tau.is_finite() {
            return Err(ModelError::InvalidPlant("tau > 0 required"));
        }
        if !self.k.is_finite() {
            return Err(ModelError::InvalidPlant("K must be finite"));
        }
        Ok(())
    }
}

/// Parameters of the dynamic manifold `z' = f z + g x`, `sigma = h z + l x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DsmParams<T> {
    pub f: T,
    pub g: T,
    pub h: T,
    pub l: T,
}

impl<T: Scalar> DsmParams<T> {
    pub fn new(f: T, g: T, h: T, l: T) -> Self {
        Self { f, g, h, l }
    }

    /// The parameter family with `h = -1`, `l = 1` and `g = -alpha f`.
    pub fn scaled_family(f: T, alpha: T) -> Self {
        Self::new(f, -alpha * f, -T::one(), T::one())
    }

    /// Constant term `g h - f l` of the loop polynomial.
    pub fn loop_constant(&self) -> T {
        self.g * self.h - self.f * self.l
    }

    /// Rate `f - g h / l` of the reduced sliding dynamics.
    pub fn reduced_rate(&self) -> T {
        self.f - self.g * self.h / self.l
    }
}

/// Static (`sigma = x`) or dynamic sliding manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum ManifoldSpec<T> {
    Static,
    Dynamic(DsmParams<T>),
}

impl<T: Scalar> ManifoldSpec<T> {
    pub fn dynamic(f: T, g: T, h: T, l: T) -> Self {
        Self::Dynamic(DsmParams::new(f, g, h, l))
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self, Self::Dynamic(_))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::Static => Ok(()),
            Self::Dynamic(d) => {
                if d.l.is_zero() {
                    return Err(ModelError::InvalidManifold("l != 0 required"));
                }
                if ![d.f, d.g, d.h, d.l].iter().all(|v| v.is_finite()) {
                    return Err(ModelError::InvalidManifold("parameters must be finite"));
                }
                Ok(())
            }
        }
    }
}

/// Linear single-input single-output realization `x' = A x + B u`, `y = C x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace<T> {
    /// Row-major state matrix.
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub labels: Vec<String>,
}

impl<T: Scalar> StateSpace<T> {
    pub fn new(
        a: Vec<Vec<T>>,
        b: Vec<T>,
        c: Vec<T>,
        labels: Vec<String>,
    ) -> Result<Self, ModelError> {
        let n = a.len();
        if n == 0
            || a.iter().any(|row| row.len() != n)
            || b.len() != n
            || c.len() != n
            || labels.len() != n
        {
            return Err(ModelError::InvalidPlant(
                "inconsistent state-space dimensions",
            ));
        }
        Ok(Self { a, b, c, labels })
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }
}

/// Outcome of the design constraints for a plant/manifold pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `f < 0` (vacuously true for the static manifold).
    pub f_negative: bool,
    /// `f - g h / l < 0` (vacuously true for the static manifold).
    pub reduced_order_stable: bool,
    /// Loop polynomial without the structural integrator factor is Hurwitz.
    pub loop_denominator_hurwitz: bool,
    pub overall: bool,
}

/// State-space model of the partially closed loop.
///
/// State order is `(x, xi1, xi2)` for the static and `(z, x, xi1, xi2)` for
/// the dynamic manifold.
pub fn build_state_space<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
) -> Result<StateSpace<T>, ModelError> {
    p.check_tau()?;
    m.validate()?;
    let zero = T::zero();
    let one = T::one();
    let tau2 = p.tau * p.tau;
    let damping = -T::lit(2.0) / p.tau;
    let ss = match m {
        ManifoldSpec::Static => StateSpace::new(
            vec![
                vec![zero, one, zero],
                vec![zero, zero, one],
                vec![zero, -one / tau2, damping],
            ],
            vec![zero, zero, -p.k / tau2],
            vec![one, zero, zero],
            labels(&["x", "xi1", "xi2"]),
        )?,
        ManifoldSpec::Dynamic(d) => {
            let lt2 = d.l * tau2;
            StateSpace::new(
                vec![
                    vec![d.f, d.g, zero, zero],
                    vec![zero, zero, one, zero],
                    vec![zero, zero, zero, one],
                    vec![-d.h * d.f / lt2, -d.h * d.g / lt2, -one / tau2, damping],
                ],
                vec![zero, zero, zero, -p.k / lt2],
                vec![d.h, d.l, zero, zero],
                labels(&["z", "x", "xi1", "xi2"]),
            )?
        }
    };
    Ok(ss)
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Loop polynomial with the integrator factor removed:
/// `tau^2 s^2 + 2 tau s + 1` (static) or `l tau^2 s^3 + a2 s^2 + a1 s + (g h - f l)` (dynamic).
pub fn loop_polynomial<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
) -> Result<Polynomial<T>, ModelError> {
    p.check_tau()?;
    m.validate()?;
    let tau = p.tau;
    let two = T::lit(2.0);
    Ok(match m {
        ManifoldSpec::Static => Polynomial::new(vec![T::one(), two * tau, tau * tau]),
        ManifoldSpec::Dynamic(d) => {
            let a2 = two * d.l * tau - d.f * d.l * tau * tau;
            let a1 = d.l - two * d.f * d.l * tau;
            Polynomial::new(vec![d.loop_constant(), a1, a2, d.l * tau * tau])
        }
    })
}

fn full_denominator<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
) -> Result<Polynomial<T>, ModelError> {
    Ok(&Polynomial::s() * &loop_polynomial(p, m)?)
}

/// Transfer function from the auxiliary input to the sliding variable.
pub fn sigma_transfer<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
) -> Result<TransferFunction<T>, ModelError> {
    let den = full_denominator(p, m)?;
    let num = match m {
        ManifoldSpec::Static => Polynomial::constant(-p.k),
        ManifoldSpec::Dynamic(d) => Polynomial::new(vec![-p.k * d.loop_constant(), -p.k * d.l]),
    };
    Ok(TransferFunction::new(num, den)?)
}

/// Transfer function from the auxiliary input to the plant state `x`.
pub fn x_transfer<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
) -> Result<TransferFunction<T>, ModelError> {
    match m {
        ManifoldSpec::Static => sigma_transfer(p, m),
        ManifoldSpec::Dynamic(d) => {
            let den = full_denominator(p, m)?;
            let num = Polynomial::new(vec![p.k * d.f, -p.k]);
            Ok(TransferFunction::new(num, den)?)
        }
    }
}

/// Evaluates every design constraint independently.
pub fn check_stability<T: Scalar>(
    p: &PlantParams<T>,
    m: &ManifoldSpec<T>,
) -> Result<StabilityReport, ModelError> {
    let (f_negative, reduced_order_stable) = match m {
        ManifoldSpec::Static => (true, true),
        ManifoldSpec::Dynamic(d) => {
            m.validate()?;
            (d.f < T::zero(), d.reduced_rate() < T::zero())
        }
    };
    let loop_denominator_hurwitz = hurwitz_stable(&loop_polynomial(p, m)?)?;
    Ok(StabilityReport {
        f_negative,
        reduced_order_stable,
        loop_denominator_hurwitz,
        overall: f_negative && reduced_order_stable && loop_denominator_hurwitz,
    })
}

fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j]))
                .collect()
        })
        .collect()
}

/// Orders up to this use cofactor expansion; larger ones use Faddeev–LeVerrier.
const COFACTOR_MAX_ORDER: usize = 6;

/// `C (sI - A)^-1 B` as a rational function with the monic characteristic
/// polynomial of `A` as denominator.
///
/// Low orders expand `det(sI - A)` and the bordered determinant
/// `det [[sI - A, B], [-C, 0]]` by cofactors over polynomial entries, so
/// structurally zero coefficients (such as an integrator pole) come out exactly zero.
pub fn state_space_to_tf<T: Scalar>(ss: &StateSpace<T>) -> Result<TransferFunction<T>, ModelError> {
    if ss.order() > COFACTOR_MAX_ORDER {
        return faddeev_leverrier(ss);
    }
    let n = ss.order();
    let entry = |i: usize, j: usize| -> Polynomial<T> {
        let diag = if i == j { T::one() } else { T::zero() };
        Polynomial::new(vec![-ss.a[i][j], diag])
    };
    let resolvent: Vec<Vec<Polynomial<T>>> = (0..n)
        .map(|i| (0..n).map(|j| entry(i, j)).collect())
        .collect();
    let mut bordered = resolvent.clone();
    for (i, row) in bordered.iter_mut().enumerate() {
        row.push(Polynomial::constant(ss.b[i]));
    }
    let mut last: Vec<Polynomial<T>> = ss.c.iter().map(|&c| Polynomial::constant(-c)).collect();
    last.push(Polynomial::zero());
    bordered.push(last);
    Ok(TransferFunction::new(
        poly_det(&bordered),
        poly_det(&resolvent),
    )?)
}

/// Determinant of a polynomial matrix by cofactor expansion along the first row.
fn poly_det<T: Scalar>(m: &[Vec<Polynomial<T>>]) -> Polynomial<T> {
    let cols: Vec<usize> = (0..m.len()).collect();
    det_minor(m, 0, &cols)
}

fn det_minor<T: Scalar>(m: &[Vec<Polynomial<T>>], row: usize, cols: &[usize]) -> Polynomial<T> {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = Polynomial::zero();
    for (pos, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&k| k != c).collect();
        let term = &m[row][c] * &det_minor(m, row + 1, &rest);
        acc = if pos % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

fn faddeev_leverrier<T: Scalar>(ss: &StateSpace<T>) -> Result<TransferFunction<T>, ModelError> {
    let n = ss.order();
    let identity: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let mut char_poly = vec![T::zero(); n + 1];
    char_poly[n] = T::one();
    let mut num = vec![T::zero(); n];
    let mut m_k = identity;
    for k in 1..=n {
        // adj(sI - A) = sum_k M_k s^(n-k)
        let cmb = (0..n).fold(T::zero(), |acc, i| {
            acc + ss.c[i] * (0..n).fold(T::zero(), |a, j| a + m_k[i][j] * ss.b[j])
        });
        num[n - k] = cmb;
        let am = mat_mul(&ss.a, &m_k);
        let trace = (0..n).fold(T::zero(), |acc, i| acc + am[i][i]);
        let c = -trace / T::from_usize(k).unwrap();
        char_poly[n - k] = c;
        m_k = am;
        for (i, row) in m_k.iter_mut().enumerate() {
            row[i] += c;
        }
    }
    Ok(TransferFunction::new(
        Polynomial::new(num),
        Polynomial::new(char_poly),
    )?)
}
