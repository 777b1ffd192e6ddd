//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

/// Principal eigenvalue of `-d phi'' + phi' = lambda phi`,
/// `-d phi'(0) + phi(0) = 0`, `phi'(1) = 0`, from the closed form.
///
/// Writing `phi = e^{x/(2d)} psi` gives `lambda = 1/(4d) + d w^2` where `w`
/// is the first positive root of `2w cos w + (1/(2d) - 2dw^2) sin w = 0`.
pub fn lambda_transcendental(d: f64) -> f64 {
    let f = |w: f64| 2.0 * w * w.cos() + (0.5 / d - 2.0 * d * w * w) * w.sin();
    let steps = 20_000;
    let h = std::f64::consts::PI / steps as f64;
    let mut a = h * 1e-3;
    let mut fa = f(a);
    for k in 1..=steps {
        let b = k as f64 * h;
        let fb = f(b);
        if fa.signum() != fb.signum() {
            let mut lo = a;
            let mut hi = b;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == fa.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let w = 0.5 * (lo + hi);
            return 0.25 / d + d * w * w;
        }
        a = b;
        fa = fb;
    }
    panic!("no root found for d = {d}");
}

/// `phi'(1)` for the initial-value problem with `phi(0) = 1`,
/// `phi'(0) = 1/d`, integrated by classical RK4, normalised by `|phi(1)|`.
fn shoot(d: f64, lambda: f64, steps: usize) -> f64 {
    let h = 1.0 / steps as f64;
    let rhs = |y: [f64; 2]| [y[1], (y[1] - lambda * y[0]) / d];
    let mut y = [1.0, 1.0 / d];
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        y = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    y[1] / (y[0].abs() + y[1].abs())
}

/// Same eigenvalue by shooting: scan `lambda` upward from 1 for the first
/// sign change of `phi'(1)`, then bisect.
pub fn lambda_shooting(d: f64) -> f64 {
    let steps = ((40.0 / d) as usize).max(4000);
    let top = 0.25 / d + std::f64::consts::PI.powi(2) * d + 2.0;
    let scan = 2000;
    let mut a = 1.0;
    let mut fa = shoot(d, a, steps);
    for k in 1..=scan {
        let b = 1.0 + (top - 1.0) * k as f64 / scan as f64;
        let fb = shoot(d, b, steps);
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if shoot(d, mid, steps).signum() == fa.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        a = b;
        fa = fb;
    }
    panic!("shooting found no sign change for d = {d}");
}

/// Composite Simpson rule on an odd number of equispaced nodes over [0, 1].
pub fn simpson(f: &[f64]) -> f64 {
    let n = f.len();
    assert!(n % 2 == 1 && n >= 3);
    let h = 1.0 / (n - 1) as f64;
    let mut s = f[0] + f[n - 1];
    for (j, x) in f.iter().enumerate().take(n - 1).skip(1) {
        s += if j % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    s * h / 3.0
}

/// Observed convergence order from errors at `n` and `4n`-ish grids.
pub fn order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}
