//! Unit ball `{|x| < 1}` in `R^d`, `d >= 3`.
//!
//! `N(x, y) = (mu_d(|x - y|) + mu_d(rho*) + eps1(x, y)) / w_d` with the image
//! distance `rho* = |x |y| - y / |y|| = sqrt(|x|^2 |y|^2 - 2 (x, y) + 1)`.
//!
//! With `a = |x| |y|`, `b = (x, y)` and `s^2 = a^2 - b^2`, the correction is
//! `eps1 = int_0^1 ((1 - 2 b t + a^2 t^2)^(1 - d/2) - 1) dt / t`, evaluated in
//! closed form away from collinear configurations and by its Gegenbauer
//! expansion `sum_j C_j^(d/2-1)(b/a) a^j / j` near them.

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{domain_err, Error, Result};
use crate::geometry::MAX_BALL_DIM;
use crate::special::{double_factorial_u64, factorial_u64, mu_d_unchecked, w_d_unchecked};

/// Below this ratio `s^2 / a^2` the closed forms lose digits to cancellation
/// and the series is used instead.
const NEAR_COLLINEAR: f64 = 0.25;

/// Below this `a = |x||y|` the series converges in a few dozen terms and the
/// closed forms divide small quantities.
const SMALL_PRODUCT: f64 = 0.5;

/// Term budget of the Gegenbauer series.
const SERIES_MAX_TERMS: usize = 1_000_000;

/// Which reading of the closed forms to evaluate. Only [`Reading::Frozen`]
/// is harmonic with the right flux; the others are kept so tests can show
/// why they were rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum Reading {
    Frozen,
    /// Even `d`: coefficient `(k+1)!` and `- (x, y)` in the double sum.
    EvenLiteral,
    /// Odd `d`: `a^2 - b^2` in place of `a^2 - b` in the double sum.
    OddSquared,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Form {
    pub reading: Reading,
    /// Multiplies the `(k, i) = (1, 0)` double-sum coefficient.
    pub first_coefficient_scale: f64,
    /// Forces the closed forms even near collinear points.
    pub closed_only: bool,
}

impl Form {
    pub(crate) const FROZEN: Form = Form {
        reading: Reading::Frozen,
        first_coefficient_scale: 1.0,
        closed_only: false,
    };
}

#[derive(Debug, Clone, Copy)]
struct Invariants {
    /// `|x|^2 |y|^2`
    a2: f64,
    /// `(x, y)`
    b: f64,
    /// `|x|^2 |y|^2 - (x, y)^2`, via the Lagrange identity
    s2: f64,
    /// image distance `rho*`
    rho: f64,
}

fn invariants(x: &[f64], y: &[f64]) -> Invariants {
    let nx: f64 = x.iter().map(|v| v * v).sum();
    let ny: f64 = y.iter().map(|v| v * v).sum();
    let b: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
    let mut s2 = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let w = x[i] * y[j] - x[j] * y[i];
            s2 += w * w;
        }
    }
    let a2 = nx * ny;
    // 1 - 2b + a^2 = (1 - b)^2 + s^2, which never cancels
    let rho = ((1.0 - b) * (1.0 - b) + s2).sqrt();
    Invariants { a2, b, s2, rho }
}

fn check_dim(d: u32) -> Result<()> {
    if (3..=MAX_BALL_DIM).contains(&d) {
        Ok(())
    } else {
        Err(domain_err(format!(
            "ball dimension must lie in [3, {MAX_BALL_DIM}], got {d}"
        )))
    }
}

fn check_point(x: &[f64], d: u32, closed: bool) -> Result<()> {
    if x.len() != d as usize {
        return Err(Error::Dimension {
            expected: d as usize,
            found: x.len(),
        });
    }
    let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let inside = if closed { r <= 1.0 + 1e-12 } else { r < 1.0 };
    if inside {
        Ok(())
    } else {
        Err(domain_err(format!("point at radius {r} is outside the unit ball")))
    }
}

fn check_source(y: &[f64]) -> Result<()> {
    if y.iter().all(|v| *v == 0.0) {
        Err(domain_err("the source point must not be the centre of the ball"))
    } else {
        Ok(())
    }
}

/// Harmonic correction `eps1(x, y)` of the ball kernel.
pub fn epsilon1(x: &[f64], y: &[f64], d: u32) -> Result<f64> {
    check_dim(d)?;
    check_point(x, d, false)?;
    check_point(y, d, false)?;
    check_source(y)?;
    epsilon1_with(x, y, d, Form::FROZEN)
}

pub(crate) fn epsilon1_with(x: &[f64], y: &[f64], d: u32, form: Form) -> Result<f64> {
    let inv = invariants(x, y);
    if !(inv.b < 1.0) {
        return Err(Error::Precondition(format!("(x, y) = {} must be below 1", inv.b)));
    }
    epsilon1_inv(&inv, d, form)
}

fn epsilon1_inv(inv: &Invariants, d: u32, form: Form) -> Result<f64> {
    let a = inv.a2.sqrt();
    if !form.closed_only && (a < SMALL_PRODUCT || inv.s2 < NEAR_COLLINEAR * inv.a2) {
        return gegenbauer_series(a, inv.b, d);
    }
    if inv.s2 == 0.0 {
        return Ok(collinear(inv.rho, d));
    }
    Ok(if d % 2 == 1 {
        closed_odd(inv, d, form)
    } else {
        closed_even(inv, d, form)
    })
}

/// `sum_{j>=1} C_j^lambda(c) a^j / j` with `lambda = d/2 - 1`, `c = b / a`.
fn gegenbauer_series(a: f64, b: f64, d: u32) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    let lam = 0.5 * f64::from(d) - 1.0;
    let c = (b / a).clamp(-1.0, 1.0);
    let mut prev = 1.0;
    let mut cur = 2.0 * lam * c;
    // C_j(1) = binom(j + 2 lambda - 1, j) bounds |C_j(c)|
    let mut at_one = 2.0 * lam;
    let mut pow = a;
    let mut sum = cur * a;
    for j in 1..SERIES_MAX_TERMS {
        let jf = j as f64;
        let bound = at_one * pow / jf;
        if j >= 2 {
            // ratio of consecutive bounds beyond j is at most a * max(1, f(j+1)),
            // f(i) = (i + 2 lambda) i / (i + 1)^2, decreasing for i >= 3
            let i = jf + 1.0;
            let ratio = a * ((i + 2.0 * lam) * i / ((i + 1.0) * (i + 1.0))).max(1.0);
            if ratio < 1.0 {
                let tail = bound * ratio / (1.0 - ratio);
                if tail <= 0.1 * f64::EPSILON * sum.abs().max(1.0) {
                    return Ok(sum);
                }
            }
        }
        let n = jf + 1.0;
        let next = (2.0 * c * (n + lam - 1.0) * cur - (n + 2.0 * lam - 2.0) * prev) / n;
        prev = cur;
        cur = next;
        at_one *= (n + 2.0 * lam - 1.0) / n;
        pow *= a;
        sum += cur * pow / n;
    }
    Err(Error::Convergence {
        terms: SERIES_MAX_TERMS,
        tail: at_one * pow,
    })
}

/// Exact value at `s = 0`:
/// `-log rho* + sum_{k=1}^{d-3} (rho*^(-k) - 1) / k`.
fn collinear(rho: f64, d: u32) -> f64 {
    let mut e = -rho.ln();
    let inv = 1.0 / rho;
    let mut p = 1.0;
    for k in 1..=(d as i32 - 3) {
        p *= inv;
        e += (p - 1.0) / f64::from(k);
    }
    e
}

fn ratio(num: u64, den: u64) -> f64 {
    let g = gcd(num, den);
    (num / g) as f64 / (den / g) as f64
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `d = 2p + 1`:
/// `log(2 / (1 - b + rho*)) + sum_k (rho*^(1-2k) - 1) / (2k - 1)
///  + sum_{k,i} c_ki b a^(2i) / s^(2i+2) ((a^2 - b) / rho*^(2k-1) + b)`,
/// `c_ki = 2^i (k+i-1)! (2k-3)!! / ((k-1)! (2k+2i-1)!!)`.
fn closed_odd(inv: &Invariants, d: u32, form: Form) -> f64 {
    let p = (d as i64 - 1) / 2;
    let Invariants { a2, b, s2, rho } = *inv;
    let mut e = (2.0 / (1.0 - b + rho)).ln();
    let rho_pows: Vec<f64> = (0..p).map(|k| rho.powi(1 - 2 * k as i32)).collect();
    for k in 1..p {
        e += (rho_pows[k as usize] - 1.0) / (2 * k - 1) as f64;
    }
    let x = match form.reading {
        Reading::OddSquared => a2 - b * b,
        _ => a2 - b,
    };
    for k in 1..p {
        for i in 0..(p - k) {
            let num = (1u64 << i) * factorial_u64((k + i - 1) as u32) * double_factorial_u64(2 * k - 3);
            let den = factorial_u64((k - 1) as u32) * double_factorial_u64(2 * k + 2 * i - 1);
            let mut c = ratio(num, den);
            if k == 1 && i == 0 {
                c *= form.first_coefficient_scale;
            }
            e += c * b * a2.powi(i as i32) / s2.powi(i as i32 + 1) * (x * rho_pows[k as usize] + b);
        }
    }
    e
}

/// `d = 2p + 2`:
/// `-log rho* + sum_k (rho*^(-2k) - 1) / (2k)
///  + b atan(s / (1 - b)) sum_{k=0}^{p-1} (2k-1)!! / (2^k k!) a^(2k) / s^(2k+1)
///  + sum_{k,i} e_ki b a^(2i) / s^(2i+2) ((a^2 - b) / rho*^(2k) + b)`,
/// `e_ki = (2k+2i-1)!! (k-1)! / (2^(i+1) (2k-1)!! (k+i)!)`.
fn closed_even(inv: &Invariants, d: u32, form: Form) -> f64 {
    let p = (d as i64 - 2) / 2;
    let Invariants { a2, b, s2, rho } = *inv;
    let s = s2.sqrt();
    let literal = form.reading == Reading::EvenLiteral;
    let mut e = -rho.ln();
    let rho2 = rho * rho;
    for k in 1..p {
        e += (rho2.powi(-(k as i32)) - 1.0) / (2 * k) as f64;
    }
    let mut lead = 0.0;
    for k in 0..p {
        let c = ratio(double_factorial_u64(2 * k - 1), (1u64 << k) * factorial_u64(k as u32));
        lead += c * a2.powi(k as i32) / s.powi(2 * k as i32 + 1);
    }
    e += b * (s / (1.0 - b)).atan() * lead;
    let sign = if literal { -1.0 } else { 1.0 };
    for k in 1..p {
        for i in 0..(p - k) {
            let fk = if literal { k + 1 } else { k - 1 };
            let num = double_factorial_u64(2 * k + 2 * i - 1) * factorial_u64(fk as u32);
            let den = (1u64 << (i + 1)) * double_factorial_u64(2 * k - 1) * factorial_u64((k + i) as u32);
            let mut c = ratio(num, den);
            if k == 1 && i == 0 {
                c *= form.first_coefficient_scale;
            }
            e += c * b * a2.powi(i as i32) / s2.powi(i as i32 + 1)
                * ((a2 - b) / rho2.powi(k as i32) + sign * b);
        }
    }
    e
}

/// Neumann function of the unit ball, additive constant zero.
pub fn neumann_ball(x: &[f64], y: &[f64], d: u32) -> Result<f64> {
    check_dim(d)?;
    check_point(x, d, false)?;
    check_point(y, d, false)?;
    check_source(y)?;
    value_with(x, y, d, Form::FROZEN)
}

/// As [`neumann_ball`] with `x` allowed on the sphere.
pub(crate) fn boundary_value(x: &[f64], y: &[f64], d: u32) -> Result<f64> {
    check_dim(d)?;
    check_point(x, d, true)?;
    check_point(y, d, false)?;
    check_source(y)?;
    value_with(x, y, d, Form::FROZEN)
}

/// `N(x, y) - mu_d(|x - y|) / w_d`, evaluated without the singular term.
pub(crate) fn regular(x: &[f64], y: &[f64], d: u32) -> Result<f64> {
    check_dim(d)?;
    check_point(x, d, false)?;
    check_point(y, d, false)?;
    check_source(y)?;
    if x == y {
        return Err(Error::Singular);
    }
    let inv = invariants(x, y);
    let e = epsilon1_inv(&inv, d, Form::FROZEN)?;
    Ok((mu_d_unchecked(inv.rho, d) + e) / w_d_unchecked(d))
}

pub(crate) fn value_with(x: &[f64], y: &[f64], d: u32, form: Form) -> Result<f64> {
    let r = crate::geometry::dist(x, y);
    if r == 0.0 {
        return Err(Error::Singular);
    }
    let inv = invariants(x, y);
    if !(inv.b < 1.0) {
        return Err(Error::Precondition(format!("(x, y) = {} must be below 1", inv.b)));
    }
    let e = epsilon1_inv(&inv, d, form)?;
    Ok((mu_d_unchecked(r, d) + mu_d_unchecked(inv.rho, d) + e) / w_d_unchecked(d))
}

/// Regular part on the diagonal, `(mu_d(1 - |x|^2) + eps1(x, x)) / w_d`.
pub fn neumann_ball_diag(x: &[f64], d: u32) -> Result<f64> {
    check_dim(d)?;
    check_point(x, d, false)?;
    check_source(x)?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let rho = 1.0 - r2;
    Ok((mu_d_unchecked(rho, d) + collinear(rho, d)) / w_d_unchecked(d))
}
