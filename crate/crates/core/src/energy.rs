//! Discrete Neumann energy
//! `En = sum_{k != l} delta_k delta_l N(x_k, x_l)`, the quadratic form
//! `Qn = En + sum_k delta_k^2 eta(x_k)`, the potential
//! `u(x) = sum_k delta_k N(x, x_k)` and its expansion coefficients `a_k`.
//!
//! Pair terms are evaluated with their arguments in a canonical
//! (lexicographic) order, sorted, and added with compensated summation, so
//! the result is bit-for-bit independent of how the points are listed.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;


use crate::error::{Error, Result};
use crate::geometry::{Domain, PointSet, Scheme};
use crate::kernels::Kernel;

/// Relative tolerance on `sum delta = 0`.
pub const NEUTRALITY_TOL: f64 = 1e-12;

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of `terms` after sorting them by value.
pub fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn check_inputs<K: Kernel + ?Sized>(kernel: &K, points: &PointSet, charges: &[f64], min_points: usize) -> Result<()> {
    let dom = kernel.domain();
    if points.dim() != dom.dim() {
        return Err(Error::Dimension {
            expected: dom.dim(),
            found: points.dim(),
        });
    }
    if points.len() != charges.len() {
        return Err(Error::Precondition(format!(
            "{} points but {} charges",
            points.len(),
            charges.len()
        )));
    }
    if points.len() < min_points {
        return Err(Error::Precondition(format!(
            "need at least {min_points} points, got {}",
            points.len()
        )));
    }
    if let Some(q) = charges.iter().find(|q| !q.is_finite()) {
        return Err(Error::Precondition(format!("non-finite charge {q}")));
    }
    Ok(())
}

fn check_neutral(charges: &[f64]) -> Result<()> {
    let total: f64 = charges.iter().sum();
    let scale: f64 = charges.iter().map(|q| q.abs()).sum();
    if total.abs() > NEUTRALITY_TOL * scale.max(f64::MIN_POSITIVE) {
        Err(Error::Precondition(format!(
            "charges must sum to zero, got {total}"
        )))
    } else {
        Ok(())
    }
}

/// Sorted pair terms `delta_k delta_l N(x_k, x_l)` over `k < l`.
fn pair_terms<K: Kernel + ?Sized>(kernel: &K, points: &PointSet, charges: &[f64]) -> Result<Vec<f64>> {
    let n = points.len();
    let mut terms = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for k in 0..n {
        for l in k + 1..n {
            let (p, q) = (points.get(k), points.get(l));
            let v = match lex(p, q) {
                Ordering::Greater => kernel.value(q, p)?,
                _ => kernel.value(p, q)?,
            };
            terms.push(charges[k] * charges[l] * v);
        }
    }
    Ok(terms)
}

fn diag_terms<K: Kernel + ?Sized>(kernel: &K, points: &PointSet, charges: &[f64]) -> Result<Vec<f64>> {
    points
        .iter()
        .zip(charges)
        .map(|(p, q)| Ok(q * q * kernel.diag(p)?))
        .collect()
}

/// `En(X, Delta)`.
pub fn neumann_energy<K: Kernel + ?Sized>(kernel: &K, points: &PointSet, charges: &[f64]) -> Result<f64> {
    check_inputs(kernel, points, charges, 1)?;
    Ok(2.0 * sorted_sum(pair_terms(kernel, points, charges)?))
}

/// `sum_k delta_k^2 eta(x_k)`.
pub fn self_energy<K: Kernel + ?Sized>(kernel: &K, points: &PointSet, charges: &[f64]) -> Result<f64> {
    check_inputs(kernel, points, charges, 1)?;
    Ok(sorted_sum(diag_terms(kernel, points, charges)?))
}

/// `Qn(X, Delta) = En + sum_k delta_k^2 eta(x_k)`.
pub fn quadratic_form_qn<K: Kernel + ?Sized>(kernel: &K, points: &PointSet, charges: &[f64]) -> Result<f64> {
    Ok(neumann_energy(kernel, points, charges)? + self_energy(kernel, points, charges)?)
}

/// `u(x) = sum_k delta_k N(x, x_k)` for a neutral system.
pub fn potential<K: Kernel + ?Sized>(kernel: &K, x: &[f64], points: &PointSet, charges: &[f64]) -> Result<f64> {
    check_inputs(kernel, points, charges, 1)?;
    check_neutral(charges)?;
    let mut acc = CompensatedSum::new();
    for (p, q) in points.iter().zip(charges) {
        if p == x {
            return Err(Error::Singular);
        }
        acc.add(q * kernel.value(x, p)?);
    }
    Ok(acc.value())
}

/// `a_k = delta_k eta(x_k) + sum_{l != k} delta_l N(x_l, x_k)`, the constant
/// term of `u` near `x_k`.
pub fn expansion_coefficients<K: Kernel + ?Sized>(kernel: &K, points: &PointSet, charges: &[f64]) -> Result<Vec<f64>> {
    check_inputs(kernel, points, charges, 1)?;
    check_neutral(charges)?;
    let n = points.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = CompensatedSum::new();
        acc.add(charges[k] * kernel.diag(points.get(k))?);
        for l in 0..n {
            if l != k {
                acc.add(charges[l] * kernel.value(points.get(l), points.get(k))?);
            }
        }
        out.push(acc.value());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyMetadata {
    pub domain: Domain,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub scheme: Option<Scheme>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub seed: Option<u64>,
}

/// Energy, quadratic form and expansion coefficients of one point set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyReport {
    pub en: f64,
    pub qn: f64,
    /// `sum_k delta_k^2 eta(x_k)`, so that `qn = en + self_energy`.
    pub self_energy: f64,
    /// Expansion coefficients; empty when the charges are not neutral.
    pub a: Vec<f64>,
    pub n: usize,
    pub metadata: EnergyMetadata,
}

impl EnergyReport {
    pub fn compute<K: Kernel + ?Sized>(
        kernel: &K,
        points: &PointSet,
        charges: &[f64],
        scheme: Option<Scheme>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let en = neumann_energy(kernel, points, charges)?;
        let self_energy = self_energy(kernel, points, charges)?;
        let a = if check_neutral(charges).is_ok() {
            expansion_coefficients(kernel, points, charges)?
        } else {
            Vec::new()
        };
        Ok(EnergyReport {
            en,
            qn: en + self_energy,
            self_energy,
            a,
            n: points.len(),
            metadata: EnergyMetadata {
                domain: kernel.domain(),
                scheme,
                seed,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{NeumannKernel, Shifted};
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    fn two_point_disk() -> (NeumannKernel, PointSet, Vec<f64>) {
        let k = NeumannKernel::new(Domain::Disk).unwrap();
        let pts = PointSet::from_points(2, [[0.5, 0.0], [-0.5, 0.0]]).unwrap();
        (k, pts, vec![1.0, -1.0])
    }

    #[test]
    fn two_point_disk_values() {
        let (k, pts, q) = two_point_disk();
        let en = neumann_energy(&k, &pts, &q).unwrap();
        assert_abs_diff_eq!(en, 2.0 * (1.25f64).ln() / (2.0 * PI), epsilon = 1e-16);
        assert_abs_diff_eq!(en, 0.0710290, epsilon = 5e-7);
        let qn = quadratic_form_qn(&k, &pts, &q).unwrap();
        let diag = 2.0 * -(0.75f64).ln() / (2.0 * PI);
        assert_abs_diff_eq!(qn, 2.0 * (1.25f64).ln() / (2.0 * PI) + diag, epsilon = 1e-15);
        assert_abs_diff_eq!(qn, 0.1626, epsilon = 1e-4);
        assert_abs_diff_eq!(qn - en, diag, epsilon = 1e-14);
        let a = expansion_coefficients(&k, &pts, &q).unwrap();
        assert_abs_diff_eq!(a[0] * q[0] + a[1] * q[1], qn, epsilon = 1e-14);
    }

    #[test]
    fn single_point_at_centre() {
        let k = NeumannKernel::new(Domain::Disk).unwrap();
        let pts = PointSet::from_points(2, [[0.0, 0.0]]).unwrap();
        assert_eq!(quadratic_form_qn(&k, &pts, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn order_of_points_does_not_matter() {
        let k = NeumannKernel::new(Domain::ball(4).unwrap()).unwrap();
        let raw = [
            [0.3, 0.1, 0.0, 0.2],
            [-0.2, 0.4, 0.1, 0.0],
            [0.0, -0.5, 0.2, 0.1],
            [0.6, 0.0, -0.1, -0.3],
        ];
        let q = [1.0, -0.5, 2.0, -2.5];
        let pts = PointSet::from_points(4, raw).unwrap();
        let rev = PointSet::from_points(4, raw.iter().rev()).unwrap();
        let qr: Vec<f64> = q.iter().rev().copied().collect();
        assert_eq!(
            neumann_energy(&k, &pts, &q).unwrap().to_bits(),
            neumann_energy(&k, &rev, &qr).unwrap().to_bits()
        );
    }

    #[test]
    fn constant_shift_is_invisible_to_neutral_systems() {
        let (k, pts, q) = two_point_disk();
        let base = neumann_energy(&k, &pts, &q).unwrap();
        for c in [-3.0, 1.0, 10.0] {
            let shifted = Shifted { inner: k, shift: c };
            let en = neumann_energy(&shifted, &pts, &q).unwrap();
            // sum_{k != l} c delta_k delta_l = c ((sum delta)^2 - sum delta^2)
            assert_abs_diff_eq!(en, base - 2.0 * c, epsilon = 1e-12);
        }
    }

    #[test]
    fn potential_properties() {
        let (k, pts, q) = two_point_disk();
        assert_abs_diff_eq!(potential(&k, &[0.0, 0.3], &pts, &q).unwrap(), 0.0, epsilon = 1e-15);
        assert!(potential(&k, &[0.0, 0.3], &pts, &[1.0, 1.0]).is_err());
        assert!(matches!(potential(&k, &[0.5, 0.0], &pts, &q), Err(Error::Singular)));
        let a = expansion_coefficients(&k, &pts, &q).unwrap();
        let h = 1e-6;
        let u = potential(&k, &[0.5 + h, 0.0], &pts, &q).unwrap();
        assert_abs_diff_eq!(u - q[0] * -h.ln() / (2.0 * PI), a[0], epsilon = 1e-4);
    }
}
