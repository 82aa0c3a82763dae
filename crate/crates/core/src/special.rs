//! Special functions and fixed quadrature rules shared by every module.

use std::f64::consts::PI;
use std::sync::OnceLock;

const LANCZOS_G: f64 = 4.742_187_5;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_103_83e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    acc
}

/// Gamma function for real arguments.
///
/// Lanczos approximation (g = 607/128) on `x >= 0.5`, reflection below.
/// Poles at non-positive integers return `f64::INFINITY` with the sign of the
/// nearest branch undefined, matching the usual convention of signalling overflow.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    // Integers up to 20 are exact in f64; return them exactly.
    if x == x.floor() && x <= 21.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (-t).exp() * half * lanczos_sum(z)
}

/// Natural log of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    if (x - 1.0).abs() < 1e-300 || (x - 2.0).abs() < 1e-300 {
        return 0.0;
    }
    if x < 20.0 {
        return gamma(x).abs().ln();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// Γ(a)/Γ(b) evaluated without intermediate overflow.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 150.0 && b < 150.0 {
        gamma(a) / gamma(b)
    } else {
        (ln_gamma(a) - ln_gamma(b)).exp()
    }
}

/// Surface area of the unit sphere S^{n-1} ⊂ ℝ^n.
pub fn sphere_area(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball in ℝ^n.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared Gauss–Legendre rule with `n` points, cached per size.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (1..=64).map(GaussLegendre::new).collect());
    assert!((1..=64).contains(&n), "cached rules cover 1..=64 points");
    &cache[n - 1]
}

/// Legendre polynomials of ℝ^dim, normalised so that P_ℓ(1) = 1, for ℓ = 0..=ell_max.
///
/// These are Gegenbauer polynomials C_ℓ^{(dim-2)/2}(t) / C_ℓ^{(dim-2)/2}(1).
pub fn dimensional_legendre(dim: usize, ell_max: usize, t: f64, out: &mut [f64]) {
    debug_assert!(out.len() > ell_max);
    let n = dim as f64;
    out[0] = 1.0;
    if ell_max == 0 {
        return;
    }
    out[1] = t;
    for l in 1..ell_max {
        let lf = l as f64;
        out[l + 1] = ((2.0 * lf + n - 2.0) * t * out[l] - lf * out[l - 1]) / (lf + n - 2.0);
    }
}

/// Number of linearly independent degree-ℓ spherical harmonics on S^{dim-1}.
pub fn harmonic_multiplicity(dim: usize, ell: usize) -> usize {
    if ell == 0 {
        return 1;
    }
    // (2ℓ+N−2)(ℓ+N−3)! / (ℓ!(N−2)!)
    let n = dim;
    let mut binom: u128 = 1;
    // C(ℓ+N−3, ℓ)
    for k in 1..=ell as u128 {
        binom = binom * (k + n as u128 - 3) / k;
    }
    let num = (2 * ell + n - 2) as u128 * binom;
    (num / (n as u128 - 2)) as usize
}
