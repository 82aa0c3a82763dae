mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use choquard_core::bubbles::bubble_profile;
use choquard_core::constants::ProblemParams;
use choquard_core::radial::{bubble_grid, lp_norm, make_grid, Mapping, RadialFunction};
use choquard_core::riesz::{
    extremal_spread, hls_check, newtonian_potential, newtonian_potential_green, riesz_bound_ratio,
    riesz_convolve, riesz_identity_gap, riesz_target_exponent, sector_convolve, sector_kernel, SectorKernel,
};
use common::{brute_convolution, bubble3, gauss_legendre, legendre, riesz_norm3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(n: usize, mu: f64) -> ProblemParams {
    ProblemParams::new(n, mu).unwrap()
}

fn closed_form_k0(beta: f64, r: f64, s: f64) -> f64 {
    if (beta - 2.0).abs() < 1e-15 {
        ((r + s) / (r - s).abs()).ln() / (2.0 * r * s)
    } else {
        ((r + s).powf(2.0 - beta) - (r - s).abs().powf(2.0 - beta)) / (2.0 * r * s * (2.0 - beta))
    }
}

#[test]
fn kernel_is_symmetric_and_dominated_by_degree_zero() {
    let g = Arc::new(make_grid(3, 50.0, 48, Mapping::Log).unwrap());
    let k0 = sector_kernel(&g, 2.5, 0).unwrap();
    let k2 = sector_kernel(&g, 2.5, 2).unwrap();
    let nodes = g.nodes();
    for i in (0..nodes.len()).step_by(5) {
        for j in (0..nodes.len()).step_by(7) {
            if i == j {
                continue;
            }
            let (r, s) = (nodes[i], nodes[j]);
            let a = k0.kernel_value(r, s);
            assert!((a - k0.kernel_value(s, r)).abs() <= 1e-14 * a);
            assert!(a > 0.0);
            assert!(k2.kernel_value(r, s).abs() <= a * (1.0 + 1e-12));
        }
    }
    let m = k0.nodal_matrix();
    let n = nodes.len();
    for i in 0..n {
        for j in 0..n {
            assert_eq!(m[i * n + j].to_bits(), m[j * n + i].to_bits());
        }
    }
}

#[test]
fn degree_zero_kernel_matches_closed_forms() {
    let g = Arc::new(make_grid(3, 10.0, 32, Mapping::Log).unwrap());
    for beta in [1.0, 1.5, 2.0, 2.7] {
        let k = sector_kernel(&g, beta, 0).unwrap();
        for (r, s) in [(0.3, 2.0), (1.0, 1.5), (4.0, 0.01), (1.0, 1.001)] {
            let want = closed_form_k0(beta, r, s);
            let got = k.kernel_value(r, s);
            assert!((got - want).abs() / want < 1e-10, "beta={beta} r={r} s={s}: {got} {want}");
        }
        if beta == 1.0 {
            assert!((k.kernel_value(0.5, 3.0) - 1.0 / 3.0).abs() < 1e-12);
        }
    }
    // Adjacent nodes of a fine grid.
    let fine = Arc::new(make_grid(3, 10.0, 1024, Mapping::Log).unwrap());
    let k = sector_kernel(&fine, 2.5, 0).unwrap();
    let nodes = fine.nodes();
    let (r, s) = (nodes[600], nodes[601]);
    assert!((k.kernel_value(r, s) - closed_form_k0(2.5, r, s)).abs() / closed_form_k0(2.5, r, s) < 1e-6);
}

#[test]
fn extremal_convolution_is_self_similar_and_matches_direct_quadrature() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    assert!(extremal_spread(&p, &g, 1.0).unwrap() < 1e-5);
    let f = RadialFunction::from_fn(&g, |r| bubble_profile(3, 1.0, 1.0, r).powi(4));
    let conv = riesz_convolve(&p, &f, true).unwrap();
    for r in [0.0, 0.5, 1.0, 3.0, 9.0] {
        let brute = riesz_norm3(2.0) * brute_convolution(&|y| bubble3(1.0, y).powi(4), [r, 0.0, 0.0], 2.0, 1.0 + r);
        let got = conv.eval(r);
        assert!((got - brute).abs() / brute < 1e-2, "r={r}: {got} vs {brute}");
    }
}

#[test]
fn exterior_of_a_ball_sees_a_point_mass() {
    let p = params(3, 1.0);
    let g = Arc::new(make_grid(3, 4.0, 512, Mapping::Algebraic).unwrap());
    let ball = RadialFunction::from_fn(&g, |r| if r <= 1.0 { 1.0 } else { 0.0 });
    let conv = riesz_convolve(&p, &ball, false).unwrap();
    let want = 4.0 / 3.0 * PI / 2.0;
    assert!((conv.eval(2.0) - want).abs() / want < 2e-2, "{} vs {want}", conv.eval(2.0));
}

#[test]
fn degree_zero_sector_is_the_radial_convolution() {
    let p = params(3, 2.3);
    let g = bubble_grid(3, 1.0, 256).unwrap();
    let f = RadialFunction::from_fn(&g, |r| (-(r * r)).exp());
    let a = riesz_convolve(&p, &f, true).unwrap();
    let b = sector_convolve(&p, &f, 0, true).unwrap();
    assert_eq!(a.values(), b.values());
}

fn reconstruction_error(l_max: usize) -> f64 {
    let p = params(3, 2.5);
    let g = bubble_grid(3, 1.0, 512).unwrap();
    let a = 0.7;
    let source = move |y: [f64; 3]| (-((y[0] - a).powi(2) + y[1] * y[1] + y[2] * y[2])).exp();
    let x = [1.3f64, 0.4, 0.0];
    let rx = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let brute = brute_convolution(&source, x, 2.5, 1.0);
    let (gx, gw) = gauss_legendre(64);
    let mut sum = 0.0;
    for ell in 0..=l_max {
        let fl = RadialFunction::from_fn(&g, |r| {
            (2 * ell + 1) as f64 / 2.0
                * gx.iter()
                    .zip(&gw)
                    .map(|(&z, &w)| w * legendre(ell, z) * (-(r * r - 2.0 * a * r * z + a * a)).exp())
                    .sum::<f64>()
        });
        let cl = sector_convolve(&p, &fl, ell, false).unwrap();
        sum += cl.eval(rx) * legendre(ell, x[0] / rx);
    }
    (sum - brute).abs() / brute
}

#[test]
fn sector_sum_reconstructs_off_center_convolution() {
    let e4 = reconstruction_error(4);
    let e8 = reconstruction_error(8);
    assert!(e8 < 1e-2, "L=8 error {e8}");
    assert!(e8 < e4, "L=8 error {e8} not below L=4 error {e4}");
}

#[test]
fn higher_sectors_are_pointwise_bounded() {
    let p = params(3, 2.5);
    let g = bubble_grid(3, 1.0, 256).unwrap();
    let f = RadialFunction::from_fn(&g, |r| (1.0 - r) * (-(r * r)).exp());
    let abs = f.map(f64::abs);
    let bound = riesz_convolve(&p, &abs, true).unwrap();
    for ell in 1..4 {
        let c = sector_convolve(&p, &f, ell, true).unwrap();
        for (a, b) in c.values().iter().zip(bound.values()) {
            assert!(a.abs() <= b * (1.0 + 1e-8) + 1e-14);
        }
    }
}

#[test]
fn green_potential_inverts_the_laplacian() {
    let g = Arc::new(make_grid(3, 40.0, 512, Mapping::Algebraic).unwrap());
    let f = RadialFunction::from_fn(&g, |r| (-(r * r)).exp());
    let w = newtonian_potential_green(&f).unwrap();
    let lap = g.sector_laplacian(w.values(), 0);
    let minus_lap = RadialFunction::new(Arc::clone(&g), lap.iter().map(|v| -v).collect()).unwrap();
    let diff = minus_lap.zip_with(&f, |a, b| a - b).unwrap();
    let rel = lp_norm(&diff, 2.0).unwrap() / lp_norm(&f, 2.0).unwrap();
    assert!(rel < 1e-4, "relative L2 error {rel}");
}

#[test]
fn newtonian_potential_is_harmonic_outside_support() {
    let g = Arc::new(make_grid(3, 20.0, 512, Mapping::Algebraic).unwrap());
    let f = RadialFunction::from_fn(&g, |r| if r < 1.0 { (1.0 - r * r).powi(4) } else { 0.0 });
    let w = newtonian_potential(&f).unwrap();
    let q1 = w.eval(3.0) * 3.0;
    let q2 = w.eval(9.0) * 9.0;
    assert!((q1 - q2).abs() / q1 < 1e-8, "{q1} vs {q2}");
}

#[test]
fn identity_gap_shrinks_toward_the_local_limit() {
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    let gauss = RadialFunction::from_fn(&g, |r| (-(r * r)).exp());
    let gaps: Vec<f64> = [2.5, 2.9, 2.99, 2.999]
        .iter()
        .map(|&mu| riesz_identity_gap(&params(3, mu), &gauss).unwrap())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[2] < 0.05);
    let cube = RadialFunction::from_fn(&g, |r| bubble_profile(3, 1.0, 1.0, r).powi(3));
    let seq: Vec<f64> = (2..=6)
        .map(|k| riesz_identity_gap(&params(3, 3.0 - 0.5f64.powi(k)), &cube).unwrap())
        .collect();
    for w in seq.windows(2) {
        assert!(w[1] <= 0.75 * w[0], "{seq:?}");
    }
}

#[test]
fn hls_inequality_and_equality_case() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    let ext = RadialFunction::from_fn(&g, |r| (1.0 + r * r).powf(-2.0));
    let (l, r) = hls_check(&p, &ext, &ext).unwrap();
    assert!(l / r >= 0.999 && l / r <= 1.0 + 1e-6, "{}", l / r);
    let gauss = RadialFunction::from_fn(&g, |r| (-(r * r)).exp());
    let (l, r) = hls_check(&p, &gauss, &gauss).unwrap();
    assert!(l < r);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=3))
            .map(|_| (rng.random_range(0.1..2.0), rng.random_range(0.0..3.0), rng.random_range(0.2..2.0)))
            .collect();
        let f = RadialFunction::from_fn(&g, |r| bumps.iter().map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum());
        let (l, r) = hls_check(&p, &f, &f).unwrap();
        assert!(l <= r, "{l} > {r}");
    }
}

#[test]
fn bounded_ratio_behaviour() {
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    let gauss = RadialFunction::from_fn(&g, |r| (-(r * r)).exp());
    let ratios: Vec<f64> = [2.9, 2.99]
        .iter()
        .map(|&mu| riesz_bound_ratio(&params(3, mu), &gauss, 2.0).unwrap())
        .collect();
    assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    assert!(ratios[1] / ratios[0] < 2.0 && ratios[0] / ratios[1] < 2.0);
    let far = riesz_bound_ratio(&params(3, 1.5), &gauss, 1.2).unwrap();
    assert!(far.is_finite() && far > 0.0);
    // Dilation invariance of the conformal ratio.
    let p = params(3, 2.9);
    let wide = RadialFunction::from_fn(&g, |r| (-(r * r) / 4.0).exp());
    let a = riesz_bound_ratio(&p, &gauss, 2.0).unwrap();
    let b = riesz_bound_ratio(&p, &wide, 2.0).unwrap();
    assert!((a - b).abs() / a < 1e-6, "{a} vs {b}");
    assert!(riesz_target_exponent(&params(3, 1.0), 2.0).is_err());
}

#[test]
fn kernel_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = Arc::new(make_grid(3, 20.0, 48, Mapping::Log).unwrap());
    let k = sector_kernel(&g, 2.2, 1).unwrap();
    let path = dir.path().join("k.bin");
    k.save(&path).unwrap();
    let back = SectorKernel::load(&path, &g, 2.2, 1).unwrap();
    assert_eq!(back.operator(), k.operator());
    assert!(SectorKernel::load(&path, &g, 2.3, 1).is_err());
    assert!(SectorKernel::load(&path, &g, 2.2, 2).is_err());
}

#[test]
fn exponent_outside_range_is_rejected() {
    let g = bubble_grid(3, 1.0, 64).unwrap();
    assert!(sector_kernel(&g, 3.0, 0).is_err());
    assert!(sector_kernel(&g, 0.0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn convolution_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, w in 0.3f64..3.0) {
        let p = params(3, 2.4);
        let g = bubble_grid(3, 1.0, 128).unwrap();
        let f = RadialFunction::from_fn(&g, |r| (-(r / w).powi(2)).exp());
        let h = RadialFunction::from_fn(&g, |r| (1.0 + r * r).powi(-2));
        let comb = f.zip_with(&h, |a, b| alpha * a + beta * b).unwrap();
        let lhs = riesz_convolve(&p, &comb, true).unwrap();
        let cf = riesz_convolve(&p, &f, true).unwrap();
        let ch = riesz_convolve(&p, &h, true).unwrap();
        let scale = cf.max_abs().max(ch.max_abs());
        for i in 0..g.len() {
            let rhs = alpha * cf.values()[i] + beta * ch.values()[i];
            prop_assert!((lhs.values()[i] - rhs).abs() <= 1e-12 * scale * 10.0);
        }
    }
}
