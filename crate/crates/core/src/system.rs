//! The Choquard equation and its equivalent integral system on radial grids:
//! residuals, energy, the Rayleigh quotient, its minimization and a
//! normalized fixed-point iteration.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bubbles::{bubble_profile, fit_radial_profile, umu_amplitude};
use crate::constants::{riesz_normalization, ProblemParams};
use crate::error::{Error, Result};
use crate::radial::{lp_norm, RadialFunction, RadialGrid};
use crate::riesz::{green_constant, sector_kernel, SectorKernel};
use crate::special::gamma;
use std::f64::consts::PI;

/// Which constants the integral system carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `u = |x|^{2−N} ∗ (v u^{p−1})`, `v = |x|^{−μ} ∗ u^p`.
    Bare,
    /// `u = c_N |x|^{2−N} ∗ (v u^{p−1})`, `v = I_μ ∗ u^p`, equivalent to the PDE.
    Green,
}

/// A pair `(u, v)` on a common grid.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub u: RadialFunction,
    pub v: RadialFunction,
    pub params: ProblemParams,
    pub normalization: Normalization,
}

impl SolutionPair {
    pub fn new(
        u: RadialFunction,
        v: RadialFunction,
        params: ProblemParams,
        normalization: Normalization,
    ) -> Result<Self> {
        u.check_same_grid(&v)?;
        if u.grid().dim() != params.dim() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            u,
            v,
            params,
            normalization,
        })
    }
}

/// `π^{N/2} Γ((N−β)/2)/Γ(N−β/2)`: the factor in
/// `|x|^{−β} ∗ (1+|x|²)^{−(2N−β)/2} = J (1+|x|²)^{−β/2}`.
pub fn extremal_convolution_factor(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    PI.powf(0.5 * nf) * gamma(0.5 * (nf - beta)) / gamma(nf - 0.5 * beta)
}

/// Amplitude `c` for which `u = c (t/(t²+r²))^{(N−2)/2}` closes the system
/// in the given normalization.
pub fn system_bubble_amplitude(p: &ProblemParams, normalization: Normalization) -> Result<f64> {
    p.require_nonlocal()?;
    let n = p.dim();
    let j_mu = extremal_convolution_factor(n, p.mu());
    let j_2 = extremal_convolution_factor(n, n as f64 - 2.0);
    let (a, b) = match normalization {
        Normalization::Bare => (1.0, 1.0),
        Normalization::Green => (riesz_normalization(p), green_constant(n)),
    };
    let exponent = 2.0 * p.two_star_mu() - 2.0;
    Ok((1.0 / (a * b * j_mu * j_2)).powf(1.0 / exponent))
}

/// Exact bubble pair of width `t` sampled on `grid`.
pub fn bubble_pair(
    p: &ProblemParams,
    grid: &Arc<RadialGrid>,
    t: f64,
    normalization: Normalization,
) -> Result<SolutionPair> {
    let n = p.dim();
    let c = system_bubble_amplitude(p, normalization)?;
    let pw = p.two_star_mu();
    let pref = match normalization {
        Normalization::Bare => 1.0,
        Normalization::Green => riesz_normalization(p),
    };
    let j_mu = extremal_convolution_factor(n, p.mu());
    let u = RadialFunction::from_fn(grid, |r| bubble_profile(n, c, t, r));
    // u^p = c^p t^{-(2N-μ)/2} (1 + (r/t)²)^{-(2N-μ)/2}
    let nf = n as f64;
    let v = RadialFunction::from_fn(grid, |r| {
        pref * c.powf(pw) * j_mu * t.powf(-(2.0 * nf - p.mu()) / 2.0) * t.powf(nf - p.mu())
            * (1.0 + (r / t).powi(2)).powf(-0.5 * p.mu())
    });
    SolutionPair::new(u, v, *p, normalization)
}

/// The nonlocal term `(I_μ ∗ |u|^p)` with its kernel assembled once.
#[derive(Clone, Debug)]
pub struct NonlocalTerm {
    params: ProblemParams,
    kernel: SectorKernel,
    prefactor: f64,
}

impl NonlocalTerm {
    /// Normalized Riesz potential `I_μ` on `grid`.
    pub fn new(p: &ProblemParams, grid: &Arc<RadialGrid>) -> Result<Self> {
        p.require_nonlocal()?;
        if grid.dim() != p.dim() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            params: *p,
            kernel: sector_kernel(grid, p.mu(), 0)?,
            prefactor: riesz_normalization(p),
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }
    pub fn kernel(&self) -> &SectorKernel {
        &self.kernel
    }
    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.kernel.grid()
    }
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    fn check(&self, u: &RadialFunction) -> Result<()> {
        if self.kernel.grid().same_as(u.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `I_μ ∗ |u|^p` at the nodes.
    pub fn potential_values(&self, u: &[f64]) -> Vec<f64> {
        let pw = self.params.two_star_mu();
        let src: Vec<f64> = u.iter().map(|x| x.abs().powf(pw)).collect();
        self.kernel.apply(&src).into_iter().map(|x| self.prefactor * x).collect()
    }

    /// `∫ (I_μ ∗ |u|^p) |u|^p dx`.
    pub fn coupling_values(&self, u: &[f64]) -> f64 {
        let pw = self.params.two_star_mu();
        let pot = self.potential_values(u);
        let dens: Vec<f64> = u.iter().zip(&pot).map(|(x, v)| v * x.abs().powf(pw)).collect();
        self.grid().integrate_values(&dens)
    }

    /// Exact gradient of [`NonlocalTerm::coupling_values`] with respect to nodal values.
    pub fn coupling_gradient(&self, u: &[f64]) -> Vec<f64> {
        let pw = self.params.two_star_mu();
        let grid = self.grid();
        let m = u.len();
        let w = grid.weights();
        let omega = grid.surface();
        let src: Vec<f64> = u.iter().map(|x| x.abs().powf(pw)).collect();
        let pot = self.kernel.apply(&src);
        let op = self.kernel.operator();
        // Qᵀ (w ⊙ |u|^p)
        let wu: Vec<f64> = (0..m).map(|i| w[i] * src[i]).collect();
        let mut qt = vec![0.0; m];
        for i in 0..m {
            let row = &op[i * m..(i + 1) * m];
            let a = wu[i];
            if a == 0.0 {
                continue;
            }
            for (q, r) in qt.iter_mut().zip(row) {
                *q += a * r;
            }
        }
        (0..m)
            .map(|k| {
                let d = pw * u[k].abs().powf(pw - 1.0) * u[k].signum();
                self.prefactor * omega * d * (w[k] * pot[k] + qt[k])
            })
            .collect()
    }
}

fn dirichlet(u: &RadialFunction) -> f64 {
    u.grid().sector_form_values(u.values(), u.values(), 0)
}

/// `½∫|∇u|² − 1/(2·2*_μ) ∫(I_μ ∗ u^{2*_μ}) u^{2*_μ}`.
pub fn energy(p: &ProblemParams, u: &RadialFunction) -> Result<f64> {
    let term = NonlocalTerm::new(p, u.grid())?;
    energy_with(&term, u)
}

pub fn energy_with(term: &NonlocalTerm, u: &RadialFunction) -> Result<f64> {
    term.check(u)?;
    let pw = term.params.two_star_mu();
    Ok(0.5 * dirichlet(u) - term.coupling_values(u.values()) / (2.0 * pw))
}

/// `∫|∇u|² / (∫(I_μ ∗ |u|^{2*_μ})|u|^{2*_μ})^{(N−2)/(2N−μ)}`.
pub fn rayleigh_quotient(p: &ProblemParams, u: &RadialFunction) -> Result<f64> {
    let term = NonlocalTerm::new(p, u.grid())?;
    rayleigh_quotient_with(&term, u)
}

pub fn rayleigh_quotient_with(term: &NonlocalTerm, u: &RadialFunction) -> Result<f64> {
    term.check(u)?;
    let g = term.coupling_values(u.values());
    if !(g > 0.0) {
        return Err(Error::Domain("Rayleigh quotient of the zero function".into()));
    }
    Ok(dirichlet(u) / g.powf(quotient_exponent(&term.params)))
}

fn quotient_exponent(p: &ProblemParams) -> f64 {
    let n = p.dim() as f64;
    (n - 2.0) / (2.0 * n - p.mu())
}

/// Radial test functions used by [`pde_residual`], scaled to width `scale`.
pub fn residual_test_basis(grid: &Arc<RadialGrid>, scale: f64) -> Vec<RadialFunction> {
    let mut basis = Vec::new();
    for c in [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let center = c * scale;
        basis.push(RadialFunction::from_fn(grid, move |r| {
            let z = (r / center).ln() / 0.6;
            (-0.5 * z * z).exp()
        }));
    }
    for c in [0.5, 1.0, 3.0] {
        let width = c * scale;
        basis.push(RadialFunction::from_fn(grid, move |r| (-(r / width).powi(2)).exp()));
    }
    basis
}

/// Weak-form residual `max_j |∫∇u·∇ν_j − ∫(I_μ∗u^p)u^{p−1}ν_j| / (‖ν_j‖_D ‖u‖_D)`
/// over [`residual_test_basis`] at the half-height radius of `u`.
pub fn pde_residual(p: &ProblemParams, u: &RadialFunction) -> Result<f64> {
    let term = NonlocalTerm::new(p, u.grid())?;
    pde_residual_with(&term, u)
}

pub fn pde_residual_with(term: &NonlocalTerm, u: &RadialFunction) -> Result<f64> {
    term.check(u)?;
    if u.values().iter().any(|x| *x < 0.0) || u.max_abs() == 0.0 {
        return Err(Error::Domain("PDE residual needs a positive profile".into()));
    }
    let scale = u
        .half_height_radius()
        .ok_or_else(|| Error::Domain("profile never falls to half height".into()))?;
    let pw = term.params.two_star_mu();
    let pot = term.potential_values(u.values());
    let rhs_density: Vec<f64> = u
        .values()
        .iter()
        .zip(&pot)
        .map(|(x, v)| v * x.powf(pw - 1.0))
        .collect();
    let grid = u.grid();
    let norm_u = dirichlet(u).sqrt();
    let mut worst = 0.0f64;
    for nu in residual_test_basis(grid, scale) {
        let lhs = grid.sector_form_values(u.values(), nu.values(), 0);
        let dens: Vec<f64> = rhs_density.iter().zip(nu.values()).map(|(a, b)| a * b).collect();
        let rhs = grid.integrate_values(&dens);
        let norm_nu = dirichlet(&nu).sqrt();
        worst = worst.max((lhs - rhs).abs() / (norm_nu * norm_u));
    }
    Ok(worst)
}

/// Relative residuals of the two integral equations, measured in the
/// critical norms `L^{2*}` (for `u`) and `L^{2N/μ}` (for `v`).
pub fn system_residual(sp: &SolutionPair) -> Result<(f64, f64)> {
    let p = &sp.params;
    p.require_nonlocal()?;
    let n = p.dim();
    if sp.u.values().iter().chain(sp.v.values()).any(|x| !(*x > 0.0)) {
        return Err(Error::Domain("system residual needs positive u and v".into()));
    }
    let pw = p.two_star_mu();
    let grid = sp.u.grid();
    let newton = sector_kernel(grid, n as f64 - 2.0, 0)?;
    let riesz = sector_kernel(grid, p.mu(), 0)?;
    let (cu, cv) = match sp.normalization {
        Normalization::Bare => (1.0, 1.0),
        Normalization::Green => (green_constant(n), riesz_normalization(p)),
    };
    let src_u: Vec<f64> = sp
        .u
        .values()
        .iter()
        .zip(sp.v.values())
        .map(|(u, v)| v * u.powf(pw - 1.0))
        .collect();
    let tu: Vec<f64> = newton.apply(&src_u).into_iter().map(|x| cu * x).collect();
    let src_v: Vec<f64> = sp.u.values().iter().map(|u| u.powf(pw)).collect();
    let tv: Vec<f64> = riesz.apply(&src_v).into_iter().map(|x| cv * x).collect();
    let du = RadialFunction::new(Arc::clone(grid), sp.u.values().iter().zip(&tu).map(|(a, b)| a - b).collect())?;
    let dv = RadialFunction::new(Arc::clone(grid), sp.v.values().iter().zip(&tv).map(|(a, b)| a - b).collect())?;
    let qu = 2.0 * n as f64 / (n as f64 - 2.0);
    let qv = 2.0 * n as f64 / p.mu();
    Ok((
        lp_norm(&du, qu)? / lp_norm(&sp.u, qu)?,
        lp_norm(&dv, qv)? / lp_norm(&sp.v, qv)?,
    ))
}

/// Options of [`minimize_rayleigh`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Initial trial step of the backtracking line search.
    pub step: f64,
    pub max_iter: usize,
    /// Stop once the relative decrease of the quotient falls below this value.
    pub tolerance: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            step: 1.0,
            max_iter: 2000,
            tolerance: 1e-10,
        }
    }
}

/// Result of [`minimize_rayleigh`].
#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    pub u: RadialFunction,
    pub value: f64,
    pub iterations: usize,
    /// Quotient after every accepted step, starting with the initial value.
    pub history: Vec<f64>,
    /// Number of dilation resamplings performed.
    pub regauges: usize,
}

/// Preconditioned gradient descent on the Rayleigh quotient over radial profiles.
///
/// Each step uses the `D^{1,2}` Riesz representative of the gradient, a
/// halving line search and renormalization to unit Dirichlet energy. When the
/// half-height radius drifts by more than a factor 1.5 from its initial value
/// the iterate is dilated back (the quotient is dilation invariant).
pub fn minimize_rayleigh(
    p: &ProblemParams,
    u0: &RadialFunction,
    opts: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    let term = NonlocalTerm::new(p, u0.grid())?;
    minimize_rayleigh_with(&term, u0, opts)
}

pub fn minimize_rayleigh_with(
    term: &NonlocalTerm,
    u0: &RadialFunction,
    opts: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    term.check(u0)?;
    if !u0.values().iter().any(|x| *x > 0.0) {
        return Err(Error::Domain("initial profile must be positive somewhere".into()));
    }
    let grid = Arc::clone(u0.grid());
    let n = grid.dim();
    let theta = quotient_exponent(&term.params);
    let b = grid.sector_form_matrix(0);
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigenBreakdown("Dirichlet matrix is not positive definite".into()))?;
    let weight = 0.5 * (n as f64 - 2.0);

    let value_of = |u: &[f64]| -> (f64, f64, f64) {
        let v = DVector::from_column_slice(u);
        let d = v.dot(&(&b * &v));
        let g = term.coupling_values(u);
        (d / g.powf(theta), d, g)
    };
    let normalize = |u: &mut Vec<f64>| {
        let v = DVector::from_column_slice(u);
        let d = v.dot(&(&b * &v));
        let s = 1.0 / d.sqrt();
        u.iter_mut().for_each(|x| *x *= s);
    };

    let mut u = u0.values().to_vec();
    normalize(&mut u);
    let r_ref = u0.half_height_radius();
    let (mut q, mut d, mut g) = value_of(&u);
    let mut history = vec![q];
    let mut regauges = 0;
    for iter in 1..=opts.max_iter {
        let uv = DVector::from_column_slice(&u);
        let grad_g = DVector::from_vec(term.coupling_gradient(&u));
        let grad = (&b * &uv) * 2.0 - grad_g * (theta * d / g);
        let grad = grad / g.powf(theta);
        let dir: DVector<f64> = -chol.solve(&grad) / (2.0 * q);
        let mut alpha = opts.step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..u.len()).map(|i| u[i] + alpha * dir[i]).collect();
            let (qt, _, gt) = value_of(&trial);
            if qt.is_finite() && gt > 0.0 && qt < q {
                accepted = Some((trial, qt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((mut next, qn)) = accepted else {
            // no decrease representable: stationary to round-off
            return finish(&grid, u, q, iter, history, regauges);
        };
        let decrease = (q - qn) / q;
        normalize(&mut next);
        let (qn, dn, gn) = value_of(&next);
        u = next;
        q = qn;
        d = dn;
        g = gn;
        history.push(q);
        if let Some(r0) = r_ref {
            let current = RadialFunction::new(Arc::clone(&grid), u.clone())?;
            if let Some(r) = current.half_height_radius() {
                let ratio = r / r0;
                if !(1.0 / 1.5..=1.5).contains(&ratio) {
                    let mut moved = current.dilated(ratio, weight, n as f64 - 2.0).into_values();
                    normalize(&mut moved);
                    let (qm, dm, gm) = value_of(&moved);
                    if qm <= q {
                        u = moved;
                        q = qm;
                        d = dm;
                        g = gm;
                        regauges += 1;
                        *history.last_mut().expect("history is never empty") = q;
                    }
                }
            }
        }
        if decrease < opts.tolerance {
            return finish(&grid, u, q, iter, history, regauges);
        }
    }
    Err(Error::NonConvergence {
        message: format!("Rayleigh quotient still decreasing after {} iterations", opts.max_iter),
        iterations: opts.max_iter,
        last_iterate: u,
        last_value: q,
    })
}

fn finish(
    grid: &Arc<RadialGrid>,
    u: Vec<f64>,
    value: f64,
    iterations: usize,
    history: Vec<f64>,
    regauges: usize,
) -> Result<MinimizeOutcome> {
    let mut u = u;
    if u.iter().sum::<f64>() < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(MinimizeOutcome {
        u: RadialFunction::new(Arc::clone(grid), u)?,
        value,
        iterations,
        history,
        regauges,
    })
}

/// Options of [`fixed_point_solve`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub max_sweeps: usize,
    /// Stop when the sup-norm change of the normalized iterate is below this value.
    pub tolerance: f64,
    pub normalization: Normalization,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 200,
            tolerance: 1e-9,
            normalization: Normalization::Bare,
        }
    }
}

/// Result of [`fixed_point_solve`].
#[derive(Clone, Debug)]
pub struct FixedPointOutcome {
    pub pair: SolutionPair,
    pub sweeps: usize,
    /// Sup-norm change of the normalized iterate in the final sweep.
    pub last_change: f64,
}

/// Normalized fixed-point iteration of the integral system.
///
/// Each sweep applies both integral operators, rescales to `u(0) = 1` and
/// dilates back to the half-height radius of `u0`. The converged profile is
/// finally scaled by the amplitude that closes the system.
pub fn fixed_point_solve(
    p: &ProblemParams,
    u0: &RadialFunction,
    opts: &FixedPointOptions,
) -> Result<FixedPointOutcome> {
    p.require_nonlocal()?;
    let n = p.dim();
    if u0.values().iter().any(|x| *x < 0.0) {
        return Err(Error::Domain("fixed-point iteration needs a nonnegative start (sign change found)".into()));
    }
    if u0.values()[0] <= 0.0 {
        return Err(Error::Domain("initial profile must be positive at the origin".into()));
    }
    let grid = Arc::clone(u0.grid());
    let r0 = u0
        .half_height_radius()
        .ok_or_else(|| Error::Domain("initial profile never falls to half height".into()))?;
    let pw = p.two_star_mu();
    let newton = sector_kernel(&grid, n as f64 - 2.0, 0)?;
    let riesz = sector_kernel(&grid, p.mu(), 0)?;
    let (cu, cv) = match opts.normalization {
        Normalization::Bare => (1.0, 1.0),
        Normalization::Green => (green_constant(n), riesz_normalization(p)),
    };
    let apply = |u: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let src: Vec<f64> = u.iter().map(|x| x.max(0.0).powf(pw)).collect();
        let v: Vec<f64> = riesz.apply(&src).into_iter().map(|x| cv * x).collect();
        let src2: Vec<f64> = u.iter().zip(&v).map(|(x, y)| y * x.max(0.0).powf(pw - 1.0)).collect();
        let tu: Vec<f64> = newton.apply(&src2).into_iter().map(|x| cu * x).collect();
        (tu, v)
    };
    let u00 = u0.values()[0];
    let mut u: Vec<f64> = u0.values().iter().map(|x| x / u00).collect();
    let mut last_change = f64::INFINITY;
    let mut growth = 0;
    for sweep in 1..=opts.max_sweeps {
        let (tu, _) = apply(&u);
        if tu.iter().any(|x| !x.is_finite()) || tu[0] <= 0.0 {
            return Err(Error::Divergence(format!("iterate lost positivity or finiteness at sweep {sweep}")));
        }
        let t0 = tu[0];
        let w = RadialFunction::new(Arc::clone(&grid), tu.iter().map(|x| x / t0).collect())?;
        let r = w
            .half_height_radius()
            .ok_or_else(|| Error::Divergence(format!("iterate lost its half-height radius at sweep {sweep}")))?;
        let w = w.dilated(r / r0, 0.0, n as f64 - 2.0);
        let w0 = w.values()[0];
        let next: Vec<f64> = w.values().iter().map(|x| x / w0).collect();
        let change = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = next;
        if change < opts.tolerance {
            let (tu, _) = apply(&u);
            let lambda = tu[0] / u[0];
            let c = lambda.powf(-1.0 / (2.0 * pw - 2.0));
            let uf: Vec<f64> = u.iter().map(|x| c * x).collect();
            let (_, v) = apply(&uf);
            let pair = SolutionPair::new(
                RadialFunction::new(Arc::clone(&grid), uf)?,
                RadialFunction::new(Arc::clone(&grid), v)?,
                *p,
                opts.normalization,
            )?;
            return Ok(FixedPointOutcome {
                pair,
                sweeps: sweep,
                last_change: change,
            });
        }
        if change > last_change {
            growth += 1;
            if growth >= 8 {
                return Err(Error::Divergence(format!(
                    "sweep-to-sweep change grew for {growth} consecutive sweeps (now {change:e})"
                )));
            }
        } else {
            growth = 0;
        }
        last_change = change;
    }
    Err(Error::NonConvergence {
        message: format!("fixed-point change {last_change:e} above tolerance"),
        iterations: opts.max_sweeps,
        last_iterate: u,
        last_value: last_change,
    })
}

/// The `U_μ` profile of width `t` on `grid`.
pub fn umu_profile(p: &ProblemParams, grid: &Arc<RadialGrid>, t: f64) -> Result<RadialFunction> {
    let a = umu_amplitude(p)?;
    let n = p.dim();
    Ok(RadialFunction::from_fn(grid, |r| bubble_profile(n, a, t, r)))
}

/// Fit of a centered bubble to a radial profile on the nodes where it
/// exceeds `1e-6` of its maximum and lies within `100` half-height radii.
pub fn fit_profile(u: &RadialFunction) -> Result<(f64, f64, f64)> {
    let peak = u.max_abs();
    let scale = u.half_height_radius().unwrap_or(u.grid().cutoff());
    let mut radii = Vec::new();
    let mut vals = Vec::new();
    for (&r, &v) in u.grid().nodes().iter().zip(u.values()) {
        if v > 1e-6 * peak && r < 100.0 * scale {
            radii.push(r);
            vals.push(v);
        }
    }
    fit_radial_profile(u.grid().dim(), &radii, &vals)
}

/// Matrix of the sector-0 Dirichlet form (convenience re-export for solvers).
pub fn dirichlet_matrix(grid: &RadialGrid) -> DMatrix<f64> {
    grid.sector_form_matrix(0)
}
