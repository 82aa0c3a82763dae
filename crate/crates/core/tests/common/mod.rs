//! Independent ground truth for the test suites: direct three-dimensional
//! quadrature that shares no code with the library's radial machinery.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Legendre polynomial `P_ell(z)`.
pub fn legendre(ell: usize, z: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, z);
    if ell == 0 {
        return 1.0;
    }
    for k in 2..=ell {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Nodes per axis of the brute-force rule.
pub const NODES: usize = 48;

/// `∫_{R³} g(y) |x − y|^{−beta} dy` in spherical coordinates centred at `x`.
///
/// The radial variable is `ρ = scale·(u/(1−u))^k` with `k = 1/(3 − beta)`,
/// which turns `ρ^{2−beta} dρ` into a bounded density in `u`; the polar
/// direction uses Gauss–Legendre in `cos θ` and the azimuth the midpoint rule.
pub fn brute_convolution(g: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], beta: f64, scale: f64) -> f64 {
    brute_convolution_with(g, x, beta, scale, NODES)
}

pub fn brute_convolution_with(
    g: &dyn Fn([f64; 3]) -> f64,
    x: [f64; 3],
    beta: f64,
    scale: f64,
    nodes: usize,
) -> f64 {
    assert!(beta < 3.0);
    let k = 1.0 / (3.0 - beta);
    let (gx, gw) = gauss_legendre(nodes);
    let mut total = 0.0;
    for (&ui, &wi) in gx.iter().zip(&gw) {
        let u = 0.5 * (ui + 1.0);
        let rho = scale * (u / (1.0 - u)).powf(k);
        let jac = 0.5 * wi * scale.powf(3.0 - beta) * k / ((1.0 - u) * (1.0 - u));
        let mut shell = 0.0;
        for (&c, &wc) in gx.iter().zip(&gw) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for j in 0..nodes {
                let phi = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
                let y = [x[0] + rho * c, x[1] + rho * s * phi.cos(), x[2] + rho * s * phi.sin()];
                shell += wc * g(y);
            }
        }
        total += jac * shell * 2.0 * PI / nodes as f64;
    }
    total
}

/// `∫_{R³} h(y) dy` for `h` axially symmetric about `e₁`, centred at the origin.
pub fn brute_integral_axial(h: &dyn Fn([f64; 3]) -> f64, scale: f64) -> f64 {
    let (gx, gw) = gauss_legendre(2 * NODES);
    let mut total = 0.0;
    for (&ui, &wi) in gx.iter().zip(&gw) {
        let u = 0.5 * (ui + 1.0);
        let r = scale * u / (1.0 - u);
        let jac = 0.5 * wi * scale / ((1.0 - u) * (1.0 - u));
        let mut shell = 0.0;
        for (&c, &wc) in gx.iter().zip(&gw) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            shell += wc * h([r * c, r * s, 0.0]);
        }
        total += jac * r * r * shell * 2.0 * PI;
    }
    total
}

/// Central-difference gradient with step `h`.
pub fn gradient(f: &dyn Fn([f64; 3]) -> f64, x: [f64; 3], h: f64) -> [f64; 3] {
    let mut g = [0.0; 3];
    for i in 0..3 {
        let (mut a, mut b) = (x, x);
        a[i] += h;
        b[i] -= h;
        g[i] = (f(a) - f(b)) / (2.0 * h);
    }
    g
}

/// Standard bubble `(t/(t² + |x|²))^{1/2}` in three dimensions (unit amplitude).
pub fn bubble3(t: f64, x: [f64; 3]) -> f64 {
    (t / (t * t + x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).sqrt()
}

/// `Γ(x)` for `x > 0` by Lanczos (g = 7, n = 9), independent of the library's routine.
pub fn gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Normalization of `I_μ` in three dimensions.
pub fn riesz_norm3(mu: f64) -> f64 {
    gamma(mu / 2.0) / (gamma((3.0 - mu) / 2.0) * PI.powf(1.5) * 2f64.powf(3.0 - mu))
}
