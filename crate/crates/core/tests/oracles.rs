use std::f64::consts::PI;

use neumann_core::special::{theta1, theta1_prime_at_zero, w_d, THETA_TOL};
use neumann_core::verification::theta1_triple_product;
use neumann_core::{Complex64, Nome};
use statrs::function::gamma::gamma;

#[test]
fn sphere_area_times_gamma() {
    for d in 2..=12u32 {
        let lhs = w_d(d).unwrap() * gamma(f64::from(d) / 2.0);
        let rhs = 2.0 * PI.powf(f64::from(d) / 2.0);
        assert!((lhs - rhs).abs() <= 1e-13 * rhs, "d={d}: {lhs} vs {rhs}");
    }
}

fn grid() -> Vec<(Complex64, Nome)> {
    let mut out = Vec::new();
    for q in [0.1_f64, 0.3, 0.5, 0.7, 0.9] {
        let h = 0.5 * (1.0 / q).ln();
        for i in 0..=12 {
            for j in 0..=8 {
                let re = PI * f64::from(i) / 12.0;
                let im = -h + 2.0 * h * f64::from(j) / 8.0;
                out.push((Complex64::new(re, im), Nome::new(q).unwrap()));
            }
        }
    }
    out
}

#[test]
fn theta_series_matches_the_product() {
    let mut worst: f64 = 0.0;
    for (z, q) in grid() {
        let s = theta1(z, q, THETA_TOL).unwrap();
        let p = theta1_triple_product(z, q, 400);
        worst = worst.max((s - p).norm());
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn theta_is_antiperiodic() {
    for (z, q) in grid() {
        let a = theta1(z + PI, q, THETA_TOL).unwrap();
        let b = theta1(z, q, THETA_TOL).unwrap();
        assert!((a + b).norm() <= 10.0 * THETA_TOL * b.norm().max(1.0), "{z} {q:?}");
    }
}

#[test]
fn theta_derivative_at_zero() {
    for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let q = Nome::new(q).unwrap();
        let h = 1e-5;
        let fd = (theta1(Complex64::new(h, 0.0), q, 1e-15).unwrap() - theta1(Complex64::new(-h, 0.0), q, 1e-15).unwrap()).re
            / (2.0 * h);
        let exact = theta1_prime_at_zero(q, 1e-15).unwrap();
        assert!((fd - exact).abs() <= 1e-8, "{fd} vs {exact}");
    }
}
