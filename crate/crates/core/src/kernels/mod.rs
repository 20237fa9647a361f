//! Neumann kernels `N(x, y, D)` of the supported domains.
//!
//! Every kernel is harmonic in `x` away from `y`, behaves like
//! `mu_d(|x - y|) / w_d` near `y` and has constant normal derivative
//! `-1 / s_{d-1}(dD)` on the boundary. Points are plain coordinate slices;
//! planar points are `[re, im]`.

mod annulus;
mod ball;
mod disk;

pub use annulus::{
    annulus_theta_form, annulus_theta_form_diag, boundary_length as annulus_boundary_length,
    neumann_annulus, neumann_annulus_diag, neumann_annulus_diag_with_tol, neumann_annulus_with_tol,
};
pub use ball::{epsilon1, neumann_ball, neumann_ball_diag};
pub use disk::{neumann_disk, neumann_disk_diag};

#[cfg(test)]
pub(crate) use ball::{value_with as ball_value_with, Form as BallForm};

use alloc::format;

use num_complex::Complex64;

use crate::error::{domain_err, Error, Result};
use crate::geometry::Domain;
use crate::special::{Nome, THETA_TOL};

/// A Neumann-type kernel on a fixed domain.
pub trait Kernel {
    fn domain(&self) -> Domain;

    /// `N(x, y)` for distinct interior points.
    fn value(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    /// Regular part `eta(x)` of the kernel on the diagonal.
    fn diag(&self, x: &[f64]) -> Result<f64>;

    /// `N(x, y)` with `x` allowed on the boundary and `y` interior.
    fn boundary_value(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    /// `N(x, y) - mu_d(|x - y|) / w_d`, which tends to [`Kernel::diag`] as
    /// `y -> x`. The default subtracts; kernels whose singular part
    /// overwhelms double precision override it.
    fn regular(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = self.domain().dim() as u32;
        let r = crate::geometry::dist(x, y);
        Ok(self.value(x, y)? - crate::special::mu_d(r, d)? / crate::special::w_d_unchecked(d))
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        (**self).value(x, y)
    }
    fn diag(&self, x: &[f64]) -> Result<f64> {
        (**self).diag(x)
    }
    fn boundary_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        (**self).boundary_value(x, y)
    }
    fn regular(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        (**self).regular(x, y)
    }
}

pub(crate) fn planar(x: &[f64]) -> Result<Complex64> {
    match x {
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(Error::Dimension {
            expected: 2,
            found: x.len(),
        }),
    }
}

/// The Neumann function of a [`Domain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannKernel {
    domain: Domain,
    theta_tol: f64,
}

impl NeumannKernel {
    pub fn new(domain: Domain) -> Result<Self> {
        domain.validate()?;
        Ok(NeumannKernel {
            domain,
            theta_tol: THETA_TOL,
        })
    }

    /// Absolute tolerance handed to the theta series (annulus only).
    pub fn with_theta_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(domain_err(format!("theta tolerance must be positive, got {tol}")));
        }
        self.theta_tol = tol;
        Ok(self)
    }
}

impl Kernel for NeumannKernel {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self.domain {
            Domain::Disk => neumann_disk(planar(x)?, planar(y)?),
            Domain::Annulus { mu } => neumann_annulus_with_tol(planar(x)?, planar(y)?, mu, self.theta_tol),
            Domain::Ball { d } => neumann_ball(x, y, d),
        }
    }

    fn diag(&self, x: &[f64]) -> Result<f64> {
        match self.domain {
            Domain::Disk => neumann_disk_diag(planar(x)?),
            Domain::Annulus { mu } => neumann_annulus_diag_with_tol(planar(x)?, mu, self.theta_tol),
            Domain::Ball { d } => neumann_ball_diag(x, d),
        }
    }

    fn boundary_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self.domain {
            Domain::Disk => {
                let (z, w) = (planar(x)?, planar(y)?);
                if z.norm() > 1.0 + 1e-12 {
                    return Err(domain_err(format!("point {z} is outside the closed disk")));
                }
                if w.norm() >= 1.0 {
                    return Err(domain_err(format!("source {w} is outside the open disk")));
                }
                Ok(disk::value(z, w))
            }
            Domain::Annulus { mu } => {
                let (z, w) = (planar(x)?, planar(y)?);
                annulus::check_closed(z, mu)?;
                if !(w.norm() > mu.value() && w.norm() < 1.0) {
                    return Err(domain_err(format!("source {w} is outside the open annulus")));
                }
                annulus::value(z, w, mu, self.theta_tol)
            }
            Domain::Ball { d } => ball::boundary_value(x, y, d),
        }
    }

    fn regular(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self.domain {
            Domain::Ball { d } => ball::regular(x, y, d),
            _ => {
                let r = crate::geometry::dist(x, y);
                Ok(self.value(x, y)? - crate::special::mu_d(r, 2)? / core::f64::consts::TAU)
            }
        }
    }
}

/// The theta-function form of the annulus kernel, whose boundary flux is
/// concentrated on the inner circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusThetaKernel {
    mu: Nome,
    tol: f64,
}

impl AnnulusThetaKernel {
    pub fn new(mu: Nome) -> Self {
        AnnulusThetaKernel { mu, tol: THETA_TOL }
    }
}

impl Kernel for AnnulusThetaKernel {
    fn domain(&self) -> Domain {
        Domain::Annulus { mu: self.mu }
    }
    fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        annulus_theta_form(planar(x)?, planar(y)?, self.mu, self.tol)
    }
    fn diag(&self, x: &[f64]) -> Result<f64> {
        annulus_theta_form_diag(planar(x)?, self.mu, self.tol)
    }
    fn boundary_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (z, w) = (planar(x)?, planar(y)?);
        annulus::check_closed(z, self.mu)?;
        if !(w.norm() > self.mu.value() && w.norm() < 1.0) {
            return Err(domain_err(format!("source {w} is outside the open annulus")));
        }
        annulus::theta_value(z, w, self.mu, self.tol)
    }
}

/// A kernel plus a constant; neutral charge systems cannot tell the two
/// apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shifted<K> {
    pub inner: K,
    pub shift: f64,
}

impl<K: Kernel> Kernel for Shifted<K> {
    fn domain(&self) -> Domain {
        self.inner.domain()
    }
    fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.inner.value(x, y)? + self.shift)
    }
    fn diag(&self, x: &[f64]) -> Result<f64> {
        Ok(self.inner.diag(x)? + self.shift)
    }
    fn boundary_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.inner.boundary_value(x, y)? + self.shift)
    }
    fn regular(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.inner.regular(x, y)? + self.shift)
    }
}
