//! Points, normalized domains and charge configurations on circles.
//!
//! A circle `S = {(r0, theta, x'0) : 0 <= theta <= 2 pi}` is the orbit of a
//! point under rotations about the axis `J = {x1 = x2 = 0}`. A
//! [`Configuration`] intersects a family of such circles with `m` half-planes
//! `{theta = theta_j}` and assigns charges according to a [`Scheme`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::error::{domain_err, Error, Result};
use crate::special::{w_d_unchecked, Nome};

/// Largest ball dimension supported by the closed-form kernels.
pub const MAX_BALL_DIM: u32 = 12;

/// Default minimal circular gap between sampled angles.
pub const DEFAULT_MIN_GAP: f64 = 1e-3;

const CLOSED_SLACK: f64 = 1e-12;

/// Normalized domain: outer radius one.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum Domain {
    /// `{|z| < 1}` in the complex plane.
    Disk,
    /// `{mu < |z| < 1}` in the complex plane.
    Annulus { mu: Nome },
    /// `{|x| < 1}` in `R^d`, `3 <= d <= MAX_BALL_DIM`.
    Ball { d: u32 },
}

impl Domain {
    pub fn disk() -> Self {
        Domain::Disk
    }

    pub fn annulus(mu: f64) -> Result<Self> {
        Ok(Domain::Annulus { mu: Nome::new(mu)? })
    }

    pub fn ball(d: u32) -> Result<Self> {
        let dom = Domain::Ball { d };
        dom.validate()?;
        Ok(dom)
    }

    /// Re-checks invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Disk => Ok(()),
            Domain::Annulus { mu } => Nome::new(mu.value()).map(|_| ()),
            Domain::Ball { d } if (3..=MAX_BALL_DIM).contains(&d) => Ok(()),
            Domain::Ball { d } => Err(domain_err(format!(
                "ball dimension must lie in [3, {MAX_BALL_DIM}], got {d}"
            ))),
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match *self {
            Domain::Disk | Domain::Annulus { .. } => 2,
            Domain::Ball { d } => d as usize,
        }
    }

    /// Short identifier such as `disk`, `annulus0.3` or `ball5`.
    pub fn label(&self) -> String {
        match *self {
            Domain::Disk => String::from("disk"),
            Domain::Annulus { mu } => format!("annulus{}", mu.value()),
            Domain::Ball { d } => format!("ball{d}"),
        }
    }

    /// Whether `x` lies in the open domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.distance_to_boundary(x) > 0.0
    }

    /// Whether `x` lies in the closed domain, up to rounding slack.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.distance_to_boundary(x) >= -CLOSED_SLACK
    }

    /// Signed distance to the boundary, positive inside.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        match *self {
            Domain::Disk | Domain::Ball { .. } => 1.0 - r,
            Domain::Annulus { mu } => (1.0 - r).min(r - mu.value()),
        }
    }

    /// Surface measure `s_{d-1}` of the boundary.
    pub fn boundary_measure(&self) -> f64 {
        match *self {
            Domain::Disk => TAU,
            Domain::Annulus { mu } => TAU * (1.0 + mu.value()),
            Domain::Ball { d } => w_d_unchecked(d),
        }
    }

    /// Lebesgue measure of the domain.
    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Disk => PI,
            Domain::Annulus { mu } => PI * (1.0 - mu.value() * mu.value()),
            Domain::Ball { d } => w_d_unchecked(d) / f64::from(d),
        }
    }

    fn check_circle(&self, c: &Circle) -> Result<()> {
        let d = self.dim();
        if c.x_prime0.len() != d - 2 {
            return Err(Error::Dimension {
                expected: d - 2,
                found: c.x_prime0.len(),
            });
        }
        if !(c.r0 > 0.0) || !c.r0.is_finite() {
            return Err(Error::Config(format!("circle radius must be positive, got {}", c.r0)));
        }
        if !(c.magnitude != 0.0) || !c.magnitude.is_finite() {
            return Err(Error::Config(format!(
                "circle charge magnitude must be finite and non-zero, got {}",
                c.magnitude
            )));
        }
        let mut probe = Vec::with_capacity(d);
        probe.push(c.r0);
        probe.push(0.0);
        probe.extend_from_slice(&c.x_prime0);
        if !self.contains(&probe) {
            return Err(Error::Config(format!(
                "circle r0={} x'={:?} is not inside {}",
                c.r0,
                c.x_prime0,
                self.label()
            )));
        }
        Ok(())
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Point in cylindrical coordinates `(r, theta, x')` about the axis `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylPoint {
    pub r: f64,
    pub theta: f64,
    pub x_prime: Vec<f64>,
}

impl CylPoint {
    /// Builds a point, normalizing `theta` into `[0, 2 pi)`.
    pub fn new(r: f64, theta: f64, x_prime: Vec<f64>) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(domain_err(format!("cylindrical radius must be >= 0, got {r}")));
        }
        Ok(CylPoint {
            r,
            theta: normalize_angle(theta),
            x_prime,
        })
    }

    /// `x1 = r cos theta`, `x2 = r sin theta`, remaining coordinates `x'`.
    pub fn to_cartesian(&self, d: usize) -> Result<Vec<f64>> {
        if d < 2 || self.x_prime.len() != d - 2 {
            return Err(Error::Dimension {
                expected: d.saturating_sub(2),
                found: self.x_prime.len(),
            });
        }
        let mut out = Vec::with_capacity(d);
        out.push(self.r * self.theta.cos());
        out.push(self.r * self.theta.sin());
        out.extend_from_slice(&self.x_prime);
        Ok(out)
    }

    pub fn from_cartesian(x: &[f64]) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: x.len(),
            });
        }
        CylPoint::new(x[0].hypot(x[1]), x[1].atan2(x[0]), x[2..].to_vec())
    }
}

/// Maps an angle into `[0, 2 pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = num_traits::Euclid::rem_euclid(&theta, &TAU);
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Convenience wrapper for [`CylPoint::to_cartesian`].
pub fn cyl_to_cartesian(p: &CylPoint, d: usize) -> Result<Vec<f64>> {
    p.to_cartesian(d)
}

/// Circle `{(r0, theta, x'0)}` carrying a per-circle charge magnitude.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Circle {
    pub r0: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub x_prime0: Vec<f64>,
    pub magnitude: f64,
}

impl Circle {
    pub fn new(r0: f64, x_prime0: Vec<f64>, magnitude: f64) -> Self {
        Circle {
            r0,
            x_prime0,
            magnitude,
        }
    }

    /// Circle in the plane `x' = 0` of a `d`-dimensional space.
    pub fn planar(r0: f64, d: usize, magnitude: f64) -> Self {
        Circle::new(r0, alloc::vec![0.0; d - 2], magnitude)
    }
}

/// Charge assignment rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Scheme {
    /// Every point of a circle carries that circle's magnitude; the total
    /// charge vanishes. The equally spaced configuration minimizes the energy.
    Theorem1,
    /// The point on circle `S` and half-plane `j` carries
    /// `(-1)^j * S.magnitude`; `m` is even. The equally spaced
    /// configuration maximizes the energy.
    Theorem2,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Theorem1 => "theorem1",
            Scheme::Theorem2 => "theorem2",
        }
    }
}

/// Flat storage for `n` points of a common dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        PointSet {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn from_points<I, P>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[f64]>,
    {
        let mut set = PointSet::new(dim);
        for p in points {
            set.push(p.as_ref())?;
        }
        Ok(set)
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: p.len(),
            });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn get(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Applies a rotation by `phi` in the `(x1, x2)` plane to every point.
    pub fn rotated(&self, phi: f64) -> PointSet {
        let (s, c) = phi.sin_cos();
        let mut out = self.clone();
        for p in out.coords.chunks_exact_mut(self.dim) {
            let (x, y) = (p[0], p[1]);
            p[0] = c * x - s * y;
            p[1] = s * x + c * y;
        }
        out
    }
}

/// Points and charges produced by [`Configuration::realize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub points: PointSet,
    pub charges: Vec<f64>,
    /// `(circle index, half-plane index)` of every point.
    pub labels: Vec<(usize, usize)>,
}

/// Circle family, half-plane angles and charge scheme.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Configuration {
    pub domain: Domain,
    pub circles: Vec<Circle>,
    pub angles: Vec<f64>,
    pub scheme: Scheme,
}

impl Configuration {
    pub fn new(domain: Domain, circles: Vec<Circle>, angles: Vec<f64>, scheme: Scheme) -> Result<Self> {
        let c = Configuration {
            domain,
            circles,
            angles,
            scheme,
        };
        c.validate()?;
        Ok(c)
    }

    /// Number of half-planes.
    pub fn m(&self) -> usize {
        self.angles.len()
    }

    /// Number of points, `m * |circles|`.
    pub fn n_points(&self) -> usize {
        self.angles.len() * self.circles.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.circles.is_empty() {
            return Err(Error::Config("configuration has no circles".into()));
        }
        validate_angles(&self.angles)?;
        for c in &self.circles {
            self.domain.check_circle(c)?;
        }
        for (i, a) in self.circles.iter().enumerate() {
            for b in &self.circles[i + 1..] {
                if a.r0 == b.r0 && a.x_prime0 == b.x_prime0 {
                    return Err(Error::Config(format!(
                        "duplicate circle r0={} x'={:?}",
                        a.r0, a.x_prime0
                    )));
                }
            }
        }
        match self.scheme {
            Scheme::Theorem1 => {
                let total: f64 = self.circles.iter().map(|c| c.magnitude).sum();
                let scale: f64 = self.circles.iter().map(|c| c.magnitude.abs()).sum();
                if total.abs() > 1e-12 * scale {
                    return Err(Error::Config(format!(
                        "theorem1 scheme needs zero total charge, circle magnitudes sum to {total}"
                    )));
                }
            }
            Scheme::Theorem2 => {
                if self.m() % 2 != 0 {
                    return Err(Error::Config(format!(
                        "theorem2 scheme needs an even number of half-planes, got m={}",
                        self.m()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same circles and scheme with new angles.
    pub fn with_angles(&self, angles: Vec<f64>) -> Result<Configuration> {
        Configuration::new(self.domain, self.circles.clone(), angles, self.scheme)
    }

    /// Equally spaced angles `2 pi j / m`.
    pub fn symmetrize(&self) -> Result<Configuration> {
        self.validate()?;
        self.with_angles(symmetric_angles(self.m()))
    }

    /// Intersection points ordered by (circle index, angle index) with their
    /// charges.
    pub fn realize(&self) -> Result<Realization> {
        self.validate()?;
        let d = self.domain.dim();
        let n = self.n_points();
        let mut points = PointSet::new(d);
        points.coords.reserve(n * d);
        let mut charges = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let mut buf = Vec::with_capacity(d);
        for (ci, c) in self.circles.iter().enumerate() {
            for (j, &theta) in self.angles.iter().enumerate() {
                buf.clear();
                let (s, co) = theta.sin_cos();
                buf.push(c.r0 * co);
                buf.push(c.r0 * s);
                buf.extend_from_slice(&c.x_prime0);
                points.push(&buf)?;
                let q = match self.scheme {
                    Scheme::Theorem1 => c.magnitude,
                    Scheme::Theorem2 if j % 2 == 0 => c.magnitude,
                    Scheme::Theorem2 => -c.magnitude,
                };
                charges.push(q);
                labels.push((ci, j));
            }
        }
        Ok(Realization {
            points,
            charges,
            labels,
        })
    }
}

/// `2 pi j / m` for `j = 0..m`.
pub fn symmetric_angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| TAU * j as f64 / m as f64).collect()
}

fn validate_angles(angles: &[f64]) -> Result<()> {
    if angles.is_empty() {
        return Err(Error::Config("configuration has no half-planes".into()));
    }
    for (j, &t) in angles.iter().enumerate() {
        if !(0.0..TAU).contains(&t) {
            return Err(Error::Config(format!("angle {j} = {t} outside [0, 2pi)")));
        }
        if j > 0 && !(angles[j - 1] < t) {
            return Err(Error::Config(format!(
                "angles must be strictly increasing: theta_{} = {} >= theta_{j} = {t}",
                j - 1,
                angles[j - 1]
            )));
        }
    }
    Ok(())
}

/// Smallest circular gap between consecutive angles.
pub fn min_circular_gap(angles: &[f64]) -> f64 {
    let m = angles.len();
    if m < 2 {
        return TAU;
    }
    let wrap = angles[0] + TAU - angles[m - 1];
    angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::min)
}

/// `m` strictly increasing angles in `[0, 2 pi)` with circular gaps of at
/// least `min_gap`, drawn from a generator seeded with `seed`.
pub fn sample_random_angles(m: usize, min_gap: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = crate::rng::seeded(seed);
    sample_random_angles_with(m, min_gap, &mut rng)
}

/// As [`sample_random_angles`], drawing from `rng`.
///
/// Gaps are `min_gap` plus a uniform spacing of the remaining slack, the
/// whole pattern then rotated by a uniform offset.
pub fn sample_random_angles_with<R: Rng + ?Sized>(m: usize, min_gap: f64, rng: &mut R) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::Precondition(format!("need at least 2 angles, got {m}")));
    }
    if !(min_gap >= 0.0) || m as f64 * min_gap >= TAU {
        return Err(Error::Precondition(format!(
            "infeasible min_gap: {m} * {min_gap} >= 2pi"
        )));
    }
    // leave a hair of slack so rounding cannot push a gap under min_gap
    let slack = (TAU - m as f64 * min_gap) * (1.0 - 1e-12);
    let mut weights = Vec::with_capacity(m);
    for _ in 0..m {
        let u: f64 = rng.random();
        weights.push(-(1.0 - u).ln());
    }
    let total: f64 = weights.iter().sum();
    let offset: f64 = rng.random::<f64>() * TAU;
    let mut angles = Vec::with_capacity(m);
    let mut acc = 0.0;
    for w in &weights {
        angles.push(normalize_angle(offset + acc));
        acc += min_gap + slack * w / total;
    }
    angles.sort_by(f64::total_cmp);
    if angles.windows(2).any(|w| !(w[0] < w[1])) || min_circular_gap(&angles) < min_gap * (1.0 - 1e-9) {
        // astronomically unlikely: two angles collapsed under rounding
        return Err(Error::Precondition("sampled angles collapsed; retry with another seed".into()));
    }
    Ok(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn two_circle_disk(angles: Vec<f64>) -> Configuration {
        Configuration::new(
            Domain::Disk,
            vec![Circle::new(0.3, vec![], 1.0), Circle::new(0.6, vec![], -1.0)],
            angles,
            Scheme::Theorem1,
        )
        .unwrap()
    }

    #[test]
    fn cylindrical_to_cartesian() {
        let p = CylPoint::new(1.0, 0.0, vec![]).unwrap();
        assert_eq!(p.to_cartesian(2).unwrap(), vec![1.0, 0.0]);
        let p = CylPoint::new(1.0, PI / 2.0, vec![0.3]).unwrap();
        let x = p.to_cartesian(3).unwrap();
        assert_abs_diff_eq!(x[0], 0.0, epsilon = 1e-16);
        assert_eq!(x[1], 1.0);
        assert_eq!(x[2], 0.3);
        let p = CylPoint::new(0.5, PI, vec![]).unwrap();
        let x = p.to_cartesian(2).unwrap();
        assert_eq!(x[0], -0.5);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-16);
        assert!(p.to_cartesian(3).is_err());
        assert!(CylPoint::new(-1.0, 0.0, vec![]).is_err());
    }

    #[test]
    fn angle_normalization() {
        let p = CylPoint::new(1.0, -PI / 2.0, vec![]).unwrap();
        assert_abs_diff_eq!(p.theta, 1.5 * PI, epsilon = 1e-15);
        assert_eq!(normalize_angle(-1e-300), 0.0);
        assert!(normalize_angle(7.0 * PI) < TAU);
    }

    #[test]
    fn realize_theorem2_single_circle() {
        let c = Configuration::new(
            Domain::Disk,
            vec![Circle::new(0.5, vec![], 1.0)],
            vec![0.0, PI],
            Scheme::Theorem2,
        )
        .unwrap();
        let r = c.realize().unwrap();
        assert_eq!(r.points.get(0), &[0.5, 0.0]);
        assert_eq!(r.points.get(1)[0], -0.5);
        assert_abs_diff_eq!(r.points.get(1)[1], 0.0, epsilon = 1e-16);
        assert_eq!(r.charges, vec![1.0, -1.0]);
    }

    #[test]
    fn realize_theorem1_two_circles() {
        let c = two_circle_disk(symmetric_angles(3));
        let r = c.realize().unwrap();
        assert_eq!(r.points.len(), 6);
        assert_eq!(r.charges, vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0]);
        assert_eq!(r.charges.iter().sum::<f64>(), 0.0);
        assert_eq!(r.labels[4], (1, 1));
    }

    #[test]
    fn realize_rejects_invalid_configurations() {
        let odd = Configuration::new(
            Domain::Disk,
            vec![Circle::new(0.5, vec![], 1.0)],
            vec![0.0, PI / 2.0, PI],
            Scheme::Theorem2,
        );
        assert!(matches!(odd, Err(Error::Config(msg)) if msg.contains("even")));
        let unbalanced = Configuration::new(
            Domain::Disk,
            vec![Circle::new(0.5, vec![], 1.0)],
            vec![0.0, PI],
            Scheme::Theorem1,
        );
        assert!(matches!(unbalanced, Err(Error::Config(msg)) if msg.contains("zero total")));
        let decreasing = Configuration::new(
            Domain::Disk,
            vec![Circle::new(0.5, vec![], 1.0)],
            vec![1.0, 0.5],
            Scheme::Theorem2,
        );
        assert!(matches!(decreasing, Err(Error::Config(msg)) if msg.contains("increasing")));
        let outside = Configuration::new(
            Domain::annulus(0.3).unwrap(),
            vec![Circle::new(0.2, vec![], 1.0)],
            vec![0.0, PI],
            Scheme::Theorem2,
        );
        assert!(matches!(outside, Err(Error::Config(msg)) if msg.contains("not inside")));
        let ball_outside = Configuration::new(
            Domain::ball(3).unwrap(),
            vec![Circle::new(0.8, vec![0.7], 1.0)],
            vec![0.0, PI],
            Scheme::Theorem2,
        );
        assert!(ball_outside.is_err());
        let dup = Configuration::new(
            Domain::Disk,
            vec![Circle::new(0.5, vec![], 1.0), Circle::new(0.5, vec![], -1.0)],
            vec![0.0, PI],
            Scheme::Theorem1,
        );
        assert!(matches!(dup, Err(Error::Config(msg)) if msg.contains("duplicate")));
        // same r0 but different axial offset is a different circle
        let shifted = Configuration::new(
            Domain::ball(3).unwrap(),
            vec![Circle::new(0.5, vec![0.1], 1.0), Circle::new(0.5, vec![-0.1], -1.0)],
            vec![0.0, PI],
            Scheme::Theorem1,
        );
        assert!(shifted.is_ok());
    }

    #[test]
    fn symmetrize_examples() {
        let c = two_circle_disk(vec![0.1, 1.0, 4.0]);
        assert_eq!(c.symmetrize().unwrap().angles, vec![0.0, TAU / 3.0, 2.0 * TAU / 3.0]);
        let c = two_circle_disk(vec![0.2, 0.5, 3.3, 5.0]);
        assert_eq!(c.symmetrize().unwrap().angles, vec![0.0, PI / 2.0, PI, 1.5 * PI]);
        let c = two_circle_disk(vec![0.0, PI]);
        assert_eq!(c.symmetrize().unwrap().angles, c.angles);
    }

    #[test]
    fn symmetric_gaps_are_exact() {
        for m in 2..12 {
            let a = symmetric_angles(m);
            for w in a.windows(2) {
                assert_abs_diff_eq!(w[1] - w[0], TAU / m as f64, epsilon = 1e-15);
            }
            assert_abs_diff_eq!(a[0] + TAU - a[m - 1], TAU / m as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn random_angles_contract() {
        let a = sample_random_angles(2, 0.1, 7).unwrap();
        assert_eq!(a.len(), 2);
        assert!(min_circular_gap(&a) >= 0.1);
        assert_eq!(a, sample_random_angles(2, 0.1, 7).unwrap());
        assert!(sample_random_angles(4, 3.0, 1).is_err());
        for seed in 0..200 {
            let a = sample_random_angles(6, 0.5, seed).unwrap();
            assert!(a.windows(2).all(|w| w[0] < w[1]));
            assert!(a.iter().all(|t| (0.0..TAU).contains(t)));
            assert!(min_circular_gap(&a) >= 0.5 * (1.0 - 1e-9));
        }
    }

    #[test]
    fn domain_measures() {
        assert_abs_diff_eq!(Domain::ball(3).unwrap().volume(), 4.0 * PI / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            Domain::annulus(0.5).unwrap().boundary_measure(),
            3.0 * PI,
            epsilon = 1e-14
        );
        assert!(Domain::ball(2).is_err());
        assert!(Domain::ball(MAX_BALL_DIM + 1).is_err());
        let a = Domain::annulus(0.3).unwrap();
        assert!(!a.contains(&[0.1, 0.0]));
        assert!(a.contains(&[0.5, 0.0]));
        assert!(a.contains_closed(&[1.0, 0.0]));
    }
}
