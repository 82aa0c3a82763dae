use std::sync::Arc;

use choquard_core::bubbles::bubble_profile;
use choquard_core::constants::{c_star, s_star_hl, sobolev_constant, standard_bubble_amplitude, ProblemParams};
use choquard_core::radial::{bubble_grid, lp_norm, RadialFunction, RadialGrid};
use choquard_core::system::{
    bubble_pair, energy, energy_with, fit_profile, fixed_point_solve, minimize_rayleigh, pde_residual, rayleigh_quotient,
    system_residual, umu_profile, FixedPointOptions, MinimizeOptions, NonlocalTerm, Normalization, SolutionPair,
};
use choquard_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(n: usize, mu: f64) -> ProblemParams {
    ProblemParams::new(n, mu).unwrap()
}

fn gaussian(g: &Arc<RadialGrid>, w: f64) -> RadialFunction {
    RadialFunction::from_fn(g, |r| (-(r / w).powi(2)).exp())
}

#[test]
fn quotient_of_umu_equals_the_best_constant() {
    for (n, mu) in [(3, 2.0), (3, 2.5), (4, 2.0), (4, 3.0)] {
        let p = params(n, mu);
        let g = bubble_grid(n, 1.0, 1024).unwrap();
        let u = umu_profile(&p, &g, 1.0).unwrap();
        let q = rayleigh_quotient(&p, &u).unwrap();
        let nf = n as f64;
        let target = sobolev_constant(n).unwrap() / c_star(&p).powf((nf - 2.0) / (2.0 * nf - mu));
        let s = s_star_hl(&p).unwrap();
        assert!((q - target).abs() / s < 1e-4, "N={n} mu={mu}: {q} vs {target}");
    }
}

#[test]
fn coupled_sobolev_inequality_on_random_profiles() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 512).unwrap();
    let term = NonlocalTerm::new(&p, &g).unwrap();
    let expo = (3.0 - 2.0) / (6.0 - p.mu());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=3))
            .map(|_| (rng.random_range(0.1..2.0), rng.random_range(0.0..3.0), rng.random_range(0.2..2.0)))
            .collect();
        let u = RadialFunction::from_fn(&g, |r| bumps.iter().map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum());
        let lhs = term.coupling_values(u.values()).powf(expo);
        let norm = lp_norm(&u, 6.0).unwrap();
        let rhs = c_star(&p).powf(expo) * norm * norm;
        assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} > {rhs}");
    }
}

#[test]
fn bubble_pair_closes_the_system() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    for norm in [Normalization::Bare, Normalization::Green] {
        let sp = bubble_pair(&p, &g, 1.0, norm).unwrap();
        let (ru, rv) = system_residual(&sp).unwrap();
        assert!(ru < 1e-4 && rv < 1e-4, "{norm:?}: {ru} {rv}");
    }
    let sp = bubble_pair(&p, &g, 1.0, Normalization::Bare).unwrap();
    let bumped = sp.u.map_with_r(|r, v| v * (1.0 + 0.1 * (-(r * r)).exp()));
    let perturbed = SolutionPair::new(bumped, sp.v.clone(), p, Normalization::Bare).unwrap();
    let (ru, _) = system_residual(&perturbed).unwrap();
    assert!(ru > 1e-2, "{ru}");
    let zero = SolutionPair::new(RadialFunction::zeros(&g), RadialFunction::zeros(&g), p, Normalization::Bare).unwrap();
    assert!(system_residual(&zero).is_err());
}

#[test]
fn umu_solves_the_equation_and_u0_does_not() {
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    for mu in [2.0, 2.5, 2.9] {
        let p = params(3, mu);
        let r = pde_residual(&p, &umu_profile(&p, &g, 1.0).unwrap()).unwrap();
        assert!(r < 1e-4, "mu={mu}: {r}");
    }
    let u0 = RadialFunction::from_fn(&g, |r| bubble_profile(3, standard_bubble_amplitude(3), 1.0, r));
    assert!(pde_residual(&params(3, 2.0), &u0).unwrap() > 1e-2);
    assert!(pde_residual(&params(3, 2.999), &u0).unwrap() < 5e-3);
}

#[test]
fn energy_is_stationary_at_umu() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    assert_eq!(energy(&p, &RadialFunction::zeros(&g)).unwrap(), 0.0);
    let u = umu_profile(&p, &g, 1.0).unwrap();
    let term = NonlocalTerm::new(&p, &g).unwrap();
    let e0 = energy_with(&term, &u).unwrap();
    assert!((e0 - energy(&p, &u).unwrap()).abs() <= 1e-14 * e0);
    assert!(e0 > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let eps = 1e-4;
    for _ in 0..10 {
        let (w, c) = (rng.random_range(0.3..3.0), rng.random_range(0.0..2.0));
        let phi = RadialFunction::from_fn(&g, |r| (-((r - c) / w).powi(2)).exp());
        let norm = g.sector_form_values(phi.values(), phi.values(), 0).sqrt();
        let plus = u.zip_with(&phi, |a, b| a + eps * b).unwrap();
        let minus = u.zip_with(&phi, |a, b| a - eps * b).unwrap();
        let d = (energy_with(&term, &plus).unwrap() - energy_with(&term, &minus).unwrap()) / (2.0 * eps);
        assert!(d.abs() < 1e-4 * norm, "{d} vs {norm}");
    }
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for k in 0..=400 {
        let a = 0.98 + 1e-4 * k as f64;
        let e = energy_with(&term, &u.scale(a)).unwrap();
        if e > best {
            best = e;
            arg = a;
        }
    }
    assert!((arg - 1.0).abs() < 1e-3, "critical scaling at {arg}");
}

#[test]
fn quotient_is_dilation_invariant_and_above_the_minimum_for_gaussians() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    let s = s_star_hl(&p).unwrap();
    let q1 = rayleigh_quotient(&p, &gaussian(&g, 1.0)).unwrap();
    let q2 = rayleigh_quotient(&p, &gaussian(&g, 2.5)).unwrap();
    assert!(q1 > s);
    assert!((q1 - q2).abs() / q1 < 1e-8, "{q1} vs {q2}");
    assert!(rayleigh_quotient(&p, &RadialFunction::zeros(&g)).is_err());
}

#[test]
fn minimizer_reproduces_the_best_constant() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    let s = s_star_hl(&p).unwrap();
    let out = minimize_rayleigh(&p, &gaussian(&g, 1.0), &MinimizeOptions::default()).unwrap();
    assert!((out.value - s).abs() / s < 1e-3);
    assert!(out.history.windows(2).all(|w| w[1] <= w[0]), "quotient increased: {:?}", out.history);
    let (_, _, rms) = fit_profile(&out.u).unwrap();
    assert!(rms < 1e-2, "fit residual {rms}");

    let wide = minimize_rayleigh(&p, &gaussian(&g, 3.0), &MinimizeOptions::default()).unwrap();
    assert!((wide.value - out.value).abs() < 1e-6 * s);

    let two = RadialFunction::from_fn(&g, |r| (-(r * r)).exp() + 0.5 * (-((r - 4.0) / 1.5).powi(2)).exp());
    let two_out = minimize_rayleigh(&p, &two, &MinimizeOptions::default()).unwrap();
    assert!((two_out.value - s).abs() / s < 1e-3);
    assert!(fit_profile(&two_out.u).unwrap().2 < 1e-2);
}

#[test]
fn minimizer_starting_at_the_solution_stops_immediately() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    let u = umu_profile(&p, &g, 1.0).unwrap();
    let q = rayleigh_quotient(&p, &u).unwrap();
    let out = minimize_rayleigh(&p, &u, &MinimizeOptions::default()).unwrap();
    assert!(out.iterations <= 2, "{} iterations", out.iterations);
    assert!((out.value - q).abs() / q < 1e-10);
}

#[test]
fn minimizer_reports_its_last_iterate_when_stopped_early() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 256).unwrap();
    let opts = MinimizeOptions { max_iter: 1, tolerance: 0.0, ..Default::default() };
    match minimize_rayleigh(&p, &gaussian(&g, 1.0), &opts) {
        Err(Error::NonConvergence { last_iterate, .. }) => assert_eq!(last_iterate.len(), g.len()),
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn fixed_point_iteration_finds_the_bubble() {
    let p = params(3, 2.5);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    let out = fixed_point_solve(&p, &gaussian(&g, 1.0), &FixedPointOptions::default()).unwrap();
    let (_, _, rms) = fit_profile(&out.pair.u).unwrap();
    assert!(rms < 1e-2);
    let (ru, rv) = system_residual(&out.pair).unwrap();
    assert!(ru < 1e-4 && rv < 1e-4, "{ru} {rv}");

    let exact = bubble_pair(&p, &g, 1.0, Normalization::Bare).unwrap();
    let opts = FixedPointOptions { tolerance: 1e-8, ..Default::default() };
    let again = fixed_point_solve(&p, &exact.u, &opts).unwrap();
    assert!(again.sweeps <= 3, "{} sweeps", again.sweeps);

    let signed = RadialFunction::from_fn(&g, |r| (1.0 - r) * (-(r * r)).exp());
    assert!(matches!(fixed_point_solve(&p, &signed, &opts), Err(Error::Domain(_))));
}

#[test]
fn green_normalized_fixed_point_matches_umu() {
    let p = params(3, 2.0);
    let g = bubble_grid(3, 1.0, 1024).unwrap();
    let opts = FixedPointOptions { normalization: Normalization::Green, ..Default::default() };
    let out = fixed_point_solve(&p, &gaussian(&g, 1.0), &opts).unwrap();
    let r = pde_residual(&p, &out.pair.u).unwrap();
    assert!(r < 1e-4, "{r}");
}
