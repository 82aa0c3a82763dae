use choquard_core::bubbles::{
    eval_u0, eval_umu, fit_bubble, hls_extremal, tangent_di, tangent_dt, BubbleParams,
};
use choquard_core::constants::{bubble_amplitude, ProblemParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn random_points(rng: &mut ChaCha8Rng, center: &[f64], count: usize, spread: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| center.iter().map(|c| c + rng.random_range(-spread..spread)).collect())
        .collect()
}

#[test]
fn umu_amplitude_multiplies_standard_bubble() {
    let p = ProblemParams::new(3, 2.0).unwrap();
    let b = BubbleParams::standard(3, 1.0).unwrap();
    let v = eval_umu(&p, &b, &[0.0; 3]).unwrap();
    let want = bubble_amplitude(&p).unwrap() * 3f64.powf(0.25);
    assert!((v - want).abs() < 1e-14);
    assert!((bubble_amplitude(&p).unwrap() - 1.024).abs() < 1e-3);
}

#[test]
fn far_field_decay_law() {
    let b = BubbleParams::standard(3, 1.0).unwrap();
    let limit = 3f64.powf(0.25);
    let mut prev = f64::INFINITY;
    for r in [1e2, 1e3, 1e4, 1e5, 1e6] {
        let err = (r * eval_u0(&b, &[r, 0.0, 0.0]) - limit).abs() / limit;
        if r == 1e2 {
            assert!(err < 1e-3);
        }
        assert!(err < prev);
        if prev.is_finite() {
            // r^{-2} improvement: a factor 100 per decade, allow some slack.
            assert!(err < prev / 50.0 || err < 1e-14);
        }
        prev = err;
    }
}

#[test]
fn dilation_covariance() {
    let n = 3;
    let b = BubbleParams::standard(n, 1.0).unwrap();
    let k = 2.7;
    let bk = BubbleParams { width: 1.0 / k, ..b.clone() };
    for x in [[0.0, 0.0, 0.0], [0.3, -0.4, 1.0], [5.0, 2.0, -1.0]] {
        let kx: Vec<f64> = x.iter().map(|v| k * v).collect();
        let lhs = k.powf(0.5) * eval_u0(&b, &kx);
        let rhs = eval_u0(&bk, &x);
        assert!((lhs - rhs).abs() < 1e-13 * rhs.max(1.0));
    }
}

#[test]
fn hls_extremal_at_its_center() {
    let p = ProblemParams::new(3, 2.0).unwrap();
    let a = [0.4, -1.0, 2.0];
    let v = hls_extremal(1.5, &a, 2.0, &a, &p).unwrap();
    assert!((v - 2.0 * 1.5f64.powf(-4.0)).abs() < 1e-15);
}

#[test]
fn tangents_vanish_or_match_differences_at_center() {
    let p = ProblemParams::new(3, 2.5).unwrap();
    let b = BubbleParams::new(1.0, 1.0, vec![0.0; 3]).unwrap();
    for axis in 0..3 {
        assert_eq!(tangent_di(&p, &b, &[0.0; 3], axis).unwrap(), 0.0);
    }
    let h = 1e-5;
    let fd = (eval_umu(&p, &BubbleParams { width: 1.0 + h, ..b.clone() }, &[0.0; 3]).unwrap()
        - eval_umu(&p, &BubbleParams { width: 1.0 - h, ..b.clone() }, &[0.0; 3]).unwrap())
        / (2.0 * h);
    assert!((tangent_dt(&p, &b, &[0.0; 3]).unwrap() - fd).abs() < 1e-8);
}

#[test]
fn fit_recovers_exact_bubble() {
    let truth = BubbleParams::new(1.3, 2.0, vec![1.0, 0.0, 0.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<(Vec<f64>, f64)> = random_points(&mut rng, &truth.center, 50, 3.0)
        .into_iter()
        .map(|x| {
            let v = eval_u0(&truth, &x);
            (x, v)
        })
        .collect();
    let (fit, res) = fit_bubble(&samples).unwrap();
    assert!(res < 1e-12, "residual {res}");
    assert!((fit.amplitude - 1.3).abs() < 1e-10);
    assert!((fit.width - 2.0).abs() < 1e-10);
    for (a, b) in fit.center.iter().zip(&truth.center) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn fit_tolerates_one_percent_noise() {
    let truth = BubbleParams::new(1.0, 1.0, vec![0.2, -0.3, 0.1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let samples: Vec<(Vec<f64>, f64)> = random_points(&mut rng, &truth.center, 400, 2.5)
        .into_iter()
        .map(|x| {
            let v = eval_u0(&truth, &x) * (1.0 + noise.sample(&mut rng));
            (x, v)
        })
        .collect();
    let (fit, res) = fit_bubble(&samples).unwrap();
    assert!((res - 0.01).abs() < 3e-3, "residual {res}");
    assert!((fit.amplitude - 1.0).abs() < 0.05);
    assert!((fit.width - 1.0).abs() < 0.05);
}

#[test]
fn gaussian_is_not_a_bubble() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<(Vec<f64>, f64)> = random_points(&mut rng, &[0.0; 3], 200, 2.0)
        .into_iter()
        .map(|x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (x, (-r2).exp())
        })
        .collect();
    let (_, res) = fit_bubble(&samples).unwrap();
    assert!(res > 0.05, "residual {res}");
}

#[test]
fn fit_rejects_nonpositive_samples() {
    let samples = vec![
        (vec![0.0, 0.0, 0.0], 1.0),
        (vec![1.0, 0.0, 0.0], 0.5),
        (vec![0.0, 1.0, 0.0], 0.0),
        (vec![0.0, 0.0, 1.0], 0.5),
        (vec![1.0, 1.0, 0.0], 0.3),
    ];
    assert!(fit_bubble(&samples).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fit_inverts_sampling(
        t in prop::sample::select(vec![0.5, 1.0, 4.0]),
        cx in -0.5f64..0.5, cy in -0.5f64..0.5, cz in -0.5f64..0.5,
        seed in 0u64..1000,
    ) {
        let truth = BubbleParams::new(1.0, t, vec![cx, cy, cz]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<(Vec<f64>, f64)> = random_points(&mut rng, &truth.center, 60, 2.0 * t)
            .into_iter()
            .map(|x| { let v = eval_u0(&truth, &x); (x, v) })
            .collect();
        let (fit, _) = fit_bubble(&samples).unwrap();
        prop_assert!((fit.width - t).abs() < 1e-8 * t.max(1.0));
        prop_assert!((fit.amplitude - 1.0).abs() < 1e-8);
        for (a, b) in fit.center.iter().zip(&truth.center) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn bubble_is_positive_and_radially_decreasing(r1 in 0.0f64..50.0, dr in 0.0f64..50.0, t in 0.1f64..10.0) {
        let b = BubbleParams::standard(3, t).unwrap();
        let a = eval_u0(&b, &[r1, 0.0, 0.0]);
        let c = eval_u0(&b, &[0.0, r1 + dr, 0.0]);
        prop_assert!(a > 0.0 && c > 0.0 && c <= a);
    }
}
