//! Real polynomials and rational transfer functions in the Laplace variable.
//!
//! Coefficients are stored in ascending powers of `s` (index = power) and
//! trailing zeros are trimmed on construction, so the degree is always the
//! index of the last stored coefficient. The zero polynomial has no stored
//! coefficients and degree `-1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Denominator magnitudes below this are treated as a pole on the imaginary axis.
pub const POLE_THRESHOLD: f64 = 1e-300;

/// Relative size below which a Routh pivot is considered zero.
pub const ROUTH_ZERO_PIVOT: f64 = 1e-12;

/// Absolute bound on root updates at which the root finder stops.
pub const ROOT_UPDATE_TOL: f64 = 1e-10;

/// Iteration cap of the root finder.
pub const ROOT_MAX_ITER: usize = 200;

/// Accepted backward residual of a computed root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatfunError {
    #[error("transfer function has a pole on the imaginary axis at omega = {omega}")]
    PoleOnAxis { omega: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("non-finite coefficient or argument")]
    NonFinite,
    #[error("root finder did not converge after {iterations} iterations")]
    ConvergenceFailure {
        iterations: usize,
        /// Best root estimates at the time the iteration cap was hit.
        partial: Vec<Complex<f64>>,
    },
}

/// Real-coefficient polynomial in `s`, ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<T>", from = "Vec<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> From<Vec<T>> for Polynomial<T> {
    fn from(coeffs: Vec<T>) -> Self {
        Self::new(coeffs)
    }
}

impl<T: Scalar> From<Polynomial<T>> for Vec<T> {
    fn from(p: Polynomial<T>) -> Self {
        p.coeffs
    }
}

impl<T: Scalar> Polynomial<T> {
    /// Builds a polynomial from ascending coefficients, trimming trailing zeros.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_slice(coeffs: &[T]) -> Self {
        Self::new(coeffs.to_vec())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Self::new(vec![T::zero(), T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Degree, or `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest-order coefficient (zero for the zero polynomial).
    pub fn leading(&self) -> T {
        self.coeffs.last().copied().unwrap_or_else(T::zero)
    }

    /// Coefficient of `s^power`, zero beyond the degree.
    pub fn coeff(&self, power: usize) -> T {
        self.coeffs.get(power).copied().unwrap_or_else(T::zero)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * s + c)
    }

    pub fn eval_real(&self, s: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize(k).unwrap())
                .collect(),
        )
    }

    pub fn scale(&self, factor: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * factor).collect())
    }

    /// Divides every coefficient by the leading one.
    pub fn monic(&self) -> Self {
        let lead = self.leading();
        if lead.is_zero() {
            return self.clone();
        }
        self.scale(T::one() / lead)
    }

    /// Number of exact zero roots, i.e. the power of the `s` factor.
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Sum of `|a_k| |s|^k`, the natural scale for the residual at `s`.
    fn abs_eval(&self, r: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * r + c.abs())
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn neg(self) -> Polynomial<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*s")?,
                _ => write!(f, "{c}*s^{k}")?,
            }
        }
        Ok(())
    }
}

/// Evaluates `p(s)` with Horner's scheme.
pub fn poly_eval<T: Scalar>(p: &Polynomial<T>, s: Complex<T>) -> Complex<T> {
    p.eval(s)
}

/// Rational function `numerator(s) / denominator(s)`, kept unreduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct TransferFunction<T> {
    numerator: Polynomial<T>,
    denominator: Polynomial<T>,
}

impl<T: Scalar> TransferFunction<T> {
    pub fn new(numerator: Polynomial<T>, denominator: Polynomial<T>) -> Result<Self, RatfunError> {
        if denominator.is_zero() {
            return Err(RatfunError::DegenerateInput("zero denominator"));
        }
        if !numerator.is_finite() || !denominator.is_finite() {
            return Err(RatfunError::NonFinite);
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn numerator(&self) -> &Polynomial<T> {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial<T> {
        &self.denominator
    }

    /// Relative degree, `deg(den) - deg(num)`.
    pub fn relative_degree(&self) -> isize {
        self.denominator.degree() - self.numerator.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.numerator.is_zero() || self.relative_degree() > 0
    }

    /// Multiplies numerator and denominator by the same factor.
    pub fn scale_both(&self, factor: T) -> Self {
        Self {
            numerator: self.numerator.scale(factor),
            denominator: self.denominator.scale(factor),
        }
    }

    /// Same function with a monic denominator.
    pub fn normalized(&self) -> Self {
        self.scale_both(T::one() / self.denominator.leading())
    }

    /// Evaluates at an arbitrary complex point.
    pub fn eval(&self, s: Complex<T>) -> Option<Complex<T>> {
        let den = self.denominator.eval(s);
        if den.norm() < pole_threshold::<T>() {
            return None;
        }
        Some(self.numerator.eval(s) / den)
    }

    /// Frequency response `G(i omega)`.
    pub fn freq_response(&self, omega: T) -> Result<Complex<T>, RatfunError> {
        tf_eval(self, omega)
    }
}

fn pole_threshold<T: Scalar>() -> T {
    T::from_f64(POLE_THRESHOLD)
        .unwrap_or_else(T::zero)
        .max(T::min_positive_value())
}

/// Frequency response `g(i omega)`.
pub fn tf_eval<T: Scalar>(g: &TransferFunction<T>, omega: T) -> Result<Complex<T>, RatfunError> {
    if !omega.is_finite() {
        return Err(RatfunError::NonFinite);
    }
    let s = Complex::new(T::zero(), omega);
    let value = g.eval(s).ok_or(RatfunError::PoleOnAxis {
        omega: omega.as_f64(),
    })?;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(RatfunError::NonFinite);
    }
    Ok(value)
}

/// Routh–Hurwitz test: `true` iff every root lies strictly in the open left half-plane.
///
/// A vanishing first-column entry (relative to its row) is reported as not Hurwitz,
/// so marginally stable polynomials are rejected.
pub fn hurwitz_stable<T: Scalar>(p: &Polynomial<T>) -> Result<bool, RatfunError> {
    if p.degree() < 1 {
        return Err(RatfunError::DegenerateInput(
            "Hurwitz test needs degree >= 1",
        ));
    }
    if !p.is_finite() {
        return Err(RatfunError::NonFinite);
    }
    let n = p.degree() as usize;
    let desc: Vec<T> = p.coeffs().iter().rev().copied().collect();
    let width = n / 2 + 1;
    let row_from = |start: usize| -> Vec<T> {
        (0..width)
            .map(|j| desc.get(start + 2 * j).copied().unwrap_or_else(T::zero))
            .collect()
    };
    let mut prev = row_from(0);
    let mut cur = row_from(1);
    let lead_sign = prev[0].signum();
    let zero_rel = T::lit(ROUTH_ZERO_PIVOT);

    for _ in 1..=n {
        let pivot = cur[0];
        let row_max = cur.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        if pivot.is_zero() || pivot.abs() < zero_rel * row_max {
            return Ok(false);
        }
        if pivot.signum() != lead_sign {
            return Ok(false);
        }
        let next: Vec<T> = (0..width)
            .map(|j| {
                let a = prev.get(j + 1).copied().unwrap_or_else(T::zero);
                let b = cur.get(j + 1).copied().unwrap_or_else(T::zero);
                (pivot * a - prev[0] * b) / pivot
            })
            .collect();
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(true)
}

/// All complex roots, repeated according to multiplicity (Aberth–Ehrlich iteration).
pub fn poly_roots<T: Scalar>(p: &Polynomial<T>) -> Result<Vec<Complex<T>>, RatfunError> {
    if p.degree() < 1 {
        return Err(RatfunError::DegenerateInput(
            "root finding needs degree >= 1",
        ));
    }
    if !p.is_finite() {
        return Err(RatfunError::NonFinite);
    }
    let zero = Complex::new(T::zero(), T::zero());
    let m = p.zero_root_multiplicity();
    let mut roots = vec![zero; m];
    let reduced = Polynomial::from_slice(&p.coeffs()[m..]);
    let n = reduced.degree() as usize;
    match n {
        0 => return Ok(roots),
        1 => {
            roots.push(Complex::new(
                -reduced.coeff(0) / reduced.coeff(1),
                T::zero(),
            ));
            return Ok(roots);
        }
        _ => {}
    }

    let monic = reduced.monic();
    let dp = monic.derivative();
    // Fujiwara-style bound on root moduli for the starting circle.
    let radius = (0..n)
        .map(|k| {
            monic
                .coeff(k)
                .abs()
                .powf(T::one() / T::from_usize(n - k).unwrap())
        })
        .fold(T::zero(), T::max)
        .max(T::lit(1e-3));
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let angle =
                T::TAU() * T::from_usize(k).unwrap() / T::from_usize(n).unwrap() + T::lit(0.4);
            Complex::from_polar(radius, angle)
        })
        .collect();

    let eps = T::epsilon() * T::lit(16.0);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < ROOT_MAX_ITER {
        iterations += 1;
        let mut max_rel_update = T::zero();
        for k in 0..n {
            let zk = z[k];
            let pk = monic.eval(zk);
            if pk.norm().is_zero() {
                continue;
            }
            let ratio = pk / dp.eval(zk);
            let repulsion = z
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold(zero, |acc, (_, &zj)| acc + (zk - zj).inv());
            let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[k] = zk - step;
            let tol = T::lit(ROOT_UPDATE_TOL).max(eps * zk.norm().max(T::one()));
            max_rel_update = max_rel_update.max(step.norm() / tol);
        }
        if max_rel_update <= T::one() {
            converged = true;
            break;
        }
    }

    let residual_tol = T::lit(ROOT_RESIDUAL_TOL).max(eps * T::lit(64.0));
    let residual_ok = z.iter().all(|r| {
        let scale = monic.abs_eval(r.norm());
        monic.eval(*r).norm() <= residual_tol * scale
    });
    if !residual_ok || (!converged && z.iter().any(|r| !r.re.is_finite() || !r.im.is_finite())) {
        return Err(RatfunError::ConvergenceFailure {
            iterations,
            partial: roots
                .iter()
                .chain(z.iter())
                .map(|r| Complex::new(r.re.as_f64(), r.im.as_f64()))
                .collect(),
        });
    }
    roots.extend(z);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(Polynomial::<f64>::new(vec![0.0, 0.0]).degree(), -1);
    }

    #[test]
    fn eval_examples() {
        let one = Polynomial::new(vec![1.0]);
        assert_eq!(poly_eval(&one, c(0.0, 7.0)), c(1.0, 0.0));
        assert_eq!(poly_eval(&Polynomial::s(), c(0.0, 3.0)), c(0.0, 3.0));
        // (i)^2 + 2i + 1 = 2i
        let p = Polynomial::new(vec![1.0, 2.0, 1.0]);
        let direct = c(0.0, 1.0) * c(0.0, 1.0) + c(0.0, 2.0) + c(1.0, 0.0);
        assert_eq!(poly_eval(&p, c(0.0, 1.0)), direct);
        assert_eq!(direct, c(0.0, 2.0));
    }

    #[test]
    fn integrator_response() {
        let g = TransferFunction::new(Polynomial::constant(1.0), Polynomial::s()).unwrap();
        let v = tf_eval(&g, 1.0).unwrap();
        assert_relative_eq!(v.re, 0.0);
        assert_relative_eq!(v.im, -1.0);
    }

    #[test]
    fn pole_on_axis_is_reported() {
        // 1 / (s^2 + 1) at omega = 1
        let g = TransferFunction::new(
            Polynomial::constant(1.0),
            Polynomial::new(vec![1.0, 0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(
            tf_eval(&g, 1.0),
            Err(RatfunError::PoleOnAxis { omega: 1.0 })
        );
    }

    #[test]
    fn zero_denominator_rejected() {
        let err = TransferFunction::new(Polynomial::constant(1.0), Polynomial::zero());
        assert!(matches!(err, Err(RatfunError::DegenerateInput(_))));
    }

    #[test]
    fn hurwitz_examples() {
        assert!(hurwitz_stable(&Polynomial::new(vec![1.0, 1.0])).unwrap());
        assert!(!hurwitz_stable(&Polynomial::new(vec![1.0, 0.0, 1.0])).unwrap());
        assert!(!hurwitz_stable(&Polynomial::new(vec![-1.0, 1.0])).unwrap());
        assert!(!hurwitz_stable(&Polynomial::new(vec![0.0, 1.0, 1.0])).unwrap());
        // (s+1)(s+2)(s+3)
        assert!(hurwitz_stable(&Polynomial::new(vec![6.0, 11.0, 6.0, 1.0])).unwrap());
        // s^3 + s^2 + 2s + 8 has a right half-plane pair
        assert!(!hurwitz_stable(&Polynomial::new(vec![8.0, 2.0, 1.0, 1.0])).unwrap());
        // negative leading coefficient: -(s+1)(s+2)
        assert!(hurwitz_stable(&Polynomial::new(vec![-2.0, -3.0, -1.0])).unwrap());
    }

    #[test]
    fn hurwitz_rejects_degenerate() {
        assert!(matches!(
            hurwitz_stable(&Polynomial::<f64>::zero()),
            Err(RatfunError::DegenerateInput(_))
        ));
        assert!(matches!(
            hurwitz_stable(&Polynomial::constant(3.0)),
            Err(RatfunError::DegenerateInput(_))
        ));
    }

    fn sorted_re(mut r: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        r.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        r
    }

    #[test]
    fn roots_examples() {
        let r = sorted_re(poly_roots(&Polynomial::new(vec![-1.0, 0.0, 1.0])).unwrap());
        assert_relative_eq!(r[0].re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(r[1].re, 1.0, epsilon = 1e-12);

        let r = poly_roots(&Polynomial::new(vec![0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(r, vec![c(0.0, 0.0); 3]);

        // (0.1 s + 1)^2
        let tau = 0.1;
        let p = Polynomial::new(vec![1.0, 2.0 * tau, tau * tau]);
        let r = poly_roots(&p).unwrap();
        assert_eq!(r.len(), 2);
        for root in &r {
            assert!((root - c(-10.0, 0.0)).norm() < 1e-6, "{root}");
            assert!(p.eval(*root).norm() / p.abs_eval(root.norm()) <= 1e-8);
        }
    }

    #[test]
    fn roots_of_cubic_with_complex_pair() {
        // (s + 2)(s^2 + 2s + 5): roots -2, -1 +- 2i
        let p = &Polynomial::new(vec![2.0, 1.0]) * &Polynomial::new(vec![5.0, 2.0, 1.0]);
        let r = sorted_re(poly_roots(&p).unwrap());
        assert!((r[0] - c(-2.0, 0.0)).norm() < 1e-9);
        assert!((r[1] - c(-1.0, -2.0)).norm() < 1e-9);
        assert!((r[2] - c(-1.0, 2.0)).norm() < 1e-9);
    }

    #[test]
    fn display_is_readable() {
        let p = Polynomial::new(vec![1.0, 0.0, -2.5]);
        assert_eq!(p.to_string(), "-2.5*s^2 + 1");
    }

    #[test]
    fn f32_evaluation() {
        let p = Polynomial::new(vec![1.0f32, 2.0, 1.0]);
        assert_eq!(p.eval(Complex::new(0.0, 1.0)), Complex::new(0.0f32, 2.0));
        assert!(hurwitz_stable(&p).unwrap());
    }
}
