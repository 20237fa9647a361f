//! Unit disk `{|z| < 1}`.

use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{domain_err, Error, Result};

fn check_open(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(domain_err(alloc::format!("point {z} is outside the open unit disk")))
    }
}

/// `N(z1, z2) = -log(|z1 - z2| |1 - z1 conj(z2)|) / (2 pi)`.
pub fn neumann_disk(z1: Complex64, z2: Complex64) -> Result<f64> {
    check_open(z1)?;
    check_open(z2)?;
    if z1 == z2 {
        return Err(Error::Singular);
    }
    Ok(value(z1, z2))
}

/// Regular part on the diagonal, `-log(1 - |z|^2) / (2 pi)`.
pub fn neumann_disk_diag(z: Complex64) -> Result<f64> {
    check_open(z)?;
    Ok(-(-z.norm_sqr()).ln_1p() / (2.0 * PI))
}

#[inline]
pub(crate) fn value(z1: Complex64, z2: Complex64) -> f64 {
    let a = (z1 - z2).norm();
    let b = (Complex64::new(1.0, 0.0) - z1 * z2.conj()).norm();
    -(a.ln() + b.ln()) / (2.0 * PI)
}
