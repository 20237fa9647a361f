//! Elementary and special functions shared by the kernels.

use alloc::format;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{domain_err, Error, Result};

/// Default absolute tolerance for the `theta_1` series.
pub const THETA_TOL: f64 = 1e-13;

/// Maximum number of paired terms summed by [`theta1`]. Enough for nomes up
/// to 0.95 with `|Im z| <= log(1/q)/2 + 2`; kernel call sites converge in far
/// fewer.
pub const THETA_MAX_PAIRS: usize = 256;

/// Largest `n` for which `n!!` fits in a `u64`.
pub const EXACT_DOUBLE_FACTORIAL_MAX: i64 = 33;

/// Nome of the theta series, equal to the inner radius of the annulus
/// `{mu < |z| < 1}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct Nome(f64);

impl Nome {
    pub fn new(mu: f64) -> Result<Self> {
        if mu > 0.0 && mu < 1.0 {
            Ok(Nome(mu))
        } else {
            Err(domain_err(format!("nome must lie in (0, 1), got {mu}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Nome {
    type Error = Error;

    fn try_from(mu: f64) -> Result<Self> {
        Nome::new(mu)
    }
}

impl From<Nome> for f64 {
    fn from(q: Nome) -> f64 {
        q.0
    }
}

fn check_dim(d: u32) -> Result<()> {
    if d < 2 {
        Err(domain_err(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

/// Fundamental solution of the Laplace equation: `-log rho` in the plane,
/// `rho^(2-d) / (d-2)` for `d >= 3`.
pub fn mu_d(rho: f64, d: u32) -> Result<f64> {
    check_dim(d)?;
    if !(rho > 0.0) {
        return Err(domain_err(format!("mu_d needs rho > 0, got {rho}")));
    }
    Ok(mu_d_unchecked(rho, d))
}

#[inline]
pub(crate) fn mu_d_unchecked(rho: f64, d: u32) -> f64 {
    match d {
        2 => -rho.ln(),
        3 => 1.0 / rho,
        _ => rho.powi(2 - d as i32) / f64::from(d - 2),
    }
}

/// Area of the unit sphere in `R^d`, `2 pi^(d/2) / Gamma(d/2)`.
///
/// `Gamma(d/2)` is evaluated exactly from factorials: `(k-1)!` for `d = 2k`
/// and `(2k-1)!! sqrt(pi) / 2^k` for `d = 2k+1`.
pub fn w_d(d: u32) -> Result<f64> {
    check_dim(d)?;
    Ok(w_d_unchecked(d))
}

pub(crate) fn w_d_unchecked(d: u32) -> f64 {
    let k = (d / 2) as i32;
    if d % 2 == 0 {
        2.0 * PI.powi(k) / factorial_f64((k - 1) as u32)
    } else {
        2.0.powi(k + 1) * PI.powi(k) / double_factorial_f64(i64::from(2 * k - 1))
    }
}

/// Value of a double factorial: exact while it fits in a `u64`
/// (`n <= 33`), floating point beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DoubleFactorial {
    Exact(u64),
    Approx(f64),
}

impl DoubleFactorial {
    pub fn to_f64(self) -> f64 {
        match self {
            DoubleFactorial::Exact(v) => v as f64,
            DoubleFactorial::Approx(v) => v,
        }
    }

    pub fn exact(self) -> Option<u64> {
        match self {
            DoubleFactorial::Exact(v) => Some(v),
            DoubleFactorial::Approx(_) => None,
        }
    }
}

/// `n!!` with the conventions `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> Result<DoubleFactorial> {
    if n < -1 {
        return Err(domain_err(format!("double factorial needs n >= -1, got {n}")));
    }
    if n <= EXACT_DOUBLE_FACTORIAL_MAX {
        Ok(DoubleFactorial::Exact(double_factorial_u64(n)))
    } else {
        Ok(DoubleFactorial::Approx(double_factorial_f64(n)))
    }
}

pub(crate) fn double_factorial_u64(n: i64) -> u64 {
    let mut acc = 1u64;
    let mut k = n;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    acc
}

pub(crate) fn double_factorial_f64(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

pub(crate) fn factorial_u64(n: u32) -> u64 {
    (1..=u64::from(n)).product()
}

pub(crate) fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Jacobi theta function
/// `theta_1(z; q) = -i sum_n (-1)^n q^((n+1/2)^2) e^(i(2n+1)z)`.
///
/// The terms `n` and `-n-1` are summed as one pair,
/// `2 (-1)^n q^((n+1/2)^2) sin((2n+1) z)`, so the partial sum is exactly odd
/// in `z`. Summation stops once a geometric bound on the remaining pairs is
/// below `tol`.
pub fn theta1(z: Complex64, q: Nome, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(domain_err("theta1 tolerance must be positive"));
    }
    let ln_q = q.value().ln();
    let y = z.im.abs();
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..THETA_MAX_PAIRS {
        let h = n as f64 + 0.5;
        let odd = (2 * n + 1) as f64;
        let weight = (h * h * ln_q).exp();
        let term = (z * odd).sin() * (2.0 * weight);
        if n % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        // bound on |pair n+1| and on the ratio of consecutive bounds
        let next = n + 1;
        let hn = next as f64 + 0.5;
        let ln_bound = core::f64::consts::LN_2 + hn * hn * ln_q + (2 * next + 1) as f64 * y;
        let ln_ratio = (2 * next + 2) as f64 * ln_q + 2.0 * y;
        if ln_ratio < 0.0 {
            let tail = ln_bound.exp() / (1.0 - ln_ratio.exp());
            if tail < tol {
                return Ok(sum);
            }
        }
    }
    let hn = THETA_MAX_PAIRS as f64 + 0.5;
    Err(Error::Convergence {
        terms: THETA_MAX_PAIRS,
        tail: (core::f64::consts::LN_2 + hn * hn * ln_q + (2.0 * hn) * y).exp(),
    })
}

/// `theta_1'(0; q) = 2 sum_{n>=0} (-1)^n (2n+1) q^((n+1/2)^2)`, the
/// term-wise derivative of the defining series at the origin.
pub fn theta1_prime_at_zero(q: Nome, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(domain_err("theta1 tolerance must be positive"));
    }
    let ln_q = q.value().ln();
    let mut sum = 0.0;
    for n in 0..THETA_MAX_PAIRS {
        let h = n as f64 + 0.5;
        let term = 2.0 * (2 * n + 1) as f64 * (h * h * ln_q).exp();
        if n % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        let next = (n + 1) as f64;
        let hn = next + 0.5;
        let bound = 2.0 * (2.0 * next + 1.0) * (hn * hn * ln_q).exp();
        let ratio = (2.0 * next + 3.0) / (2.0 * next + 1.0) * ((2.0 * next + 2.0) * ln_q).exp();
        if ratio < 1.0 && bound / (1.0 - ratio) < tol {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        terms: THETA_MAX_PAIRS,
        tail: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fundamental_solution_values() {
        assert_eq!(mu_d(1.0, 2).unwrap(), 0.0);
        assert_eq!(mu_d(2.0, 3).unwrap(), 0.5);
        assert_eq!(mu_d(2.0, 4).unwrap(), 0.125);
        assert!(mu_d(0.0, 3).is_err());
        assert!(mu_d(-1.0, 2).is_err());
        assert!(mu_d(1.0, 1).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert_abs_diff_eq!(w_d(2).unwrap(), 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(w_d(3).unwrap(), 4.0 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(w_d(4).unwrap(), 2.0 * PI * PI, epsilon = 1e-14);
        assert!(w_d(1).is_err());
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1).unwrap(), DoubleFactorial::Exact(1));
        assert_eq!(double_factorial(0).unwrap(), DoubleFactorial::Exact(1));
        assert_eq!(double_factorial(5).unwrap(), DoubleFactorial::Exact(15));
        assert_eq!(double_factorial(6).unwrap(), DoubleFactorial::Exact(48));
        assert_eq!(
            double_factorial(33).unwrap(),
            DoubleFactorial::Exact(6_332_659_870_762_850_625)
        );
        assert!(matches!(double_factorial(34).unwrap(), DoubleFactorial::Approx(_)));
        assert!(double_factorial(-2).is_err());
        for n in 1..=30 {
            let lhs = double_factorial(n).unwrap().exact().unwrap();
            let rhs = n as u64 * double_factorial(n - 2).unwrap().exact().unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn theta_is_zero_at_origin_and_odd() {
        let q = Nome::new(0.5).unwrap();
        let v = theta1(Complex64::new(0.0, 0.0), q, 1e-12).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        let z = Complex64::new(0.3, 0.1);
        assert_eq!(theta1(-z, q, 1e-12).unwrap(), -theta1(z, q, 1e-12).unwrap());
    }

    #[test]
    fn theta_rejects_divergent_arguments() {
        let q = Nome::new(0.9).unwrap();
        let err = theta1(Complex64::new(0.0, 40.0), q, 1e-13).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
        assert!(Nome::new(1.0).is_err());
        assert!(Nome::new(0.0).is_err());
    }
}
