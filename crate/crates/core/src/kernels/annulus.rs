//! Planar annulus `{mu < |z| < 1}`.
//!
//! The theta-function expression
//! `-log|theta_1(i log(z1 conj z2) / 2) theta_1(i log(z1 / z2) / 2)| / (2 pi)`
//! is harmonic with a logarithmic pole, but its whole boundary flux leaves
//! through the inner circle. Adding the harmonic term
//! `-(log|z1| + log|z2|) / (2 pi (1 + mu))` spreads the flux uniformly over
//! both circles, giving the Neumann function with normal derivative
//! `-1 / (2 pi (1 + mu))` everywhere on the boundary. Energies of neutral
//! charge systems built from the two forms differ only through the radii of
//! the points, so angular comparisons agree.

use alloc::format;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{domain_err, Error, Result};
use crate::special::{theta1, theta1_prime_at_zero, Nome, THETA_TOL};

fn check_open(z: Complex64, mu: Nome) -> Result<()> {
    let r = z.norm();
    if r > mu.value() && r < 1.0 {
        Ok(())
    } else {
        Err(domain_err(format!(
            "point {z} is outside the open annulus {} < |z| < 1",
            mu.value()
        )))
    }
}

pub(crate) fn check_closed(z: Complex64, mu: Nome) -> Result<()> {
    let r = z.norm();
    if r >= mu.value() * (1.0 - 1e-12) && r <= 1.0 + 1e-12 {
        Ok(())
    } else {
        Err(domain_err(format!(
            "point {z} is outside the closed annulus {} <= |z| <= 1",
            mu.value()
        )))
    }
}

/// Total boundary length `2 pi (1 + mu)`.
pub fn boundary_length(mu: Nome) -> f64 {
    TAU * (1.0 + mu.value())
}

/// `log|theta_1(u)|`, with the series tolerance scaled to the size of the
/// leading term so that small values keep their relative accuracy.
fn ln_abs_theta(u: Complex64, mu: Nome, tol: f64) -> Result<f64> {
    let lead = 2.0 * mu.value().powf(0.25) * u.sin().norm();
    let t = theta1(u, mu, tol * lead.clamp(1e-280, 1.0))?;
    Ok(t.norm().ln())
}

/// Theta-function form of the kernel, as in the module notes.
pub fn annulus_theta_form(z1: Complex64, z2: Complex64, mu: Nome, tol: f64) -> Result<f64> {
    check_open(z1, mu)?;
    check_open(z2, mu)?;
    if z1 == z2 {
        return Err(Error::Singular);
    }
    theta_value(z1, z2, mu, tol)
}

/// Diagonal regular part of [`annulus_theta_form`]:
/// `log(4 |z|^2 sinh|log|z|| / ((1 - |z|^2) |theta_1(i log|z|) theta_1'(0)|)) / (2 pi)`.
pub fn annulus_theta_form_diag(z: Complex64, mu: Nome, tol: f64) -> Result<f64> {
    check_open(z, mu)?;
    theta_diag(z, mu, tol)
}

pub(crate) fn theta_value(z1: Complex64, z2: Complex64, mu: Nome, tol: f64) -> Result<f64> {
    let i = Complex64::i();
    let u1 = i * (z1 * z2.conj()).ln() * 0.5;
    let u2 = i * (z1 / z2).ln() * 0.5;
    let s = ln_abs_theta(u1, mu, tol)? + ln_abs_theta(u2, mu, tol)?;
    Ok(-s / (2.0 * PI))
}

pub(crate) fn theta_diag(z: Complex64, mu: Nome, tol: f64) -> Result<f64> {
    let r2 = z.norm_sqr();
    let l = z.norm().ln();
    let th = theta1(Complex64::new(0.0, l), mu, tol)?.norm();
    let dth = theta1_prime_at_zero(mu, tol)?.abs();
    let num = 4.0 * r2 * l.abs().sinh();
    let den = (1.0 - r2) * th * dth;
    Ok((num.ln() - den.ln()) / (2.0 * PI))
}

/// Neumann function of the annulus with uniform boundary flux.
pub fn neumann_annulus(z1: Complex64, z2: Complex64, mu: Nome) -> Result<f64> {
    neumann_annulus_with_tol(z1, z2, mu, THETA_TOL)
}

pub fn neumann_annulus_with_tol(z1: Complex64, z2: Complex64, mu: Nome, tol: f64) -> Result<f64> {
    check_open(z1, mu)?;
    check_open(z2, mu)?;
    if z1 == z2 {
        return Err(Error::Singular);
    }
    value(z1, z2, mu, tol)
}

/// Diagonal regular part of [`neumann_annulus`].
pub fn neumann_annulus_diag(z: Complex64, mu: Nome) -> Result<f64> {
    neumann_annulus_diag_with_tol(z, mu, THETA_TOL)
}

pub fn neumann_annulus_diag_with_tol(z: Complex64, mu: Nome, tol: f64) -> Result<f64> {
    check_open(z, mu)?;
    Ok(theta_diag(z, mu, tol)? - 2.0 * z.norm().ln() / boundary_length(mu))
}

pub(crate) fn value(z1: Complex64, z2: Complex64, mu: Nome, tol: f64) -> Result<f64> {
    let shift = (z1.norm().ln() + z2.norm().ln()) / boundary_length(mu);
    Ok(theta_value(z1, z2, mu, tol)? - shift)
}
