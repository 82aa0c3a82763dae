//! Symmetries of the integral system: Kelvin transforms, translations,
//! dilations, reflections and the moving-plane sets.
//!
//! Transforms act lazily on [`Field`]s (closures over point evaluation), so a
//! chain of transforms is only resampled when a residual is requested.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::ProblemParams;
use crate::error::{Error, Result};
use crate::radial::{ball_volume, RadialFunction, RadialGrid};
use crate::riesz::green_constant;
use crate::special::gauss_legendre;
use crate::system::{Normalization, SolutionPair};

type Eval = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;

/// A scalar function on `R^N`, optionally radial about a tracked center.
#[derive(Clone)]
pub struct Field {
    dim: usize,
    center: Option<Vec<f64>>,
    eval: Arc<Eval>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("dim", &self.dim)
            .field("center", &self.center)
            .finish_non_exhaustive()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl Field {
    /// `x ↦ f(|x − center|)`, continued beyond the grid by `r^{−decay}`.
    pub fn radial(f: RadialFunction, center: Vec<f64>, decay: f64) -> Result<Self> {
        let dim = f.grid().dim();
        if center.len() != dim {
            return Err(Error::ParameterDomain(format!(
                "center has {} coordinates, expected {dim}",
                center.len()
            )));
        }
        let c = center.clone();
        Ok(Self {
            dim,
            center: Some(center),
            eval: Arc::new(move |x: &[f64]| Ok(f.eval_with_tail(distance(x, &c), decay))),
        })
    }

    /// Wrap an arbitrary function; `center` marks it as radial about that point.
    pub fn from_fn(
        dim: usize,
        center: Option<Vec<f64>>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            center,
            eval: Arc::new(move |x: &[f64]| Ok(f(x))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Point about which the field is radial, when known.
    pub fn center(&self) -> Option<&[f64]> {
        self.center.as_deref()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::ParameterDomain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.dim
            )));
        }
        (self.eval)(x)
    }

    /// Sample along the first coordinate axis from the tracked center.
    pub fn sample_radial(&self, grid: &Arc<RadialGrid>) -> Result<RadialFunction> {
        let c = self
            .center
            .as_ref()
            .ok_or_else(|| Error::Domain("field has no tracked center; cannot resample radially".into()))?;
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch);
        }
        let mut x = c.clone();
        let values = grid
            .nodes()
            .iter()
            .map(|&r| {
                x[0] = c[0] + r;
                self.eval(&x)
            })
            .collect::<Result<Vec<_>>>()?;
        RadialFunction::new(Arc::clone(grid), values)
    }
}

/// `x^λ = (2λ − x₁, x₂, …, x_N)`.
pub fn reflect_point(x: &[f64], lambda: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    if let Some(first) = y.first_mut() {
        *first = 2.0 * lambda - *first;
    }
    y
}

fn inversion(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let r2: f64 = x.iter().map(|a| a * a).sum();
    if r2 == 0.0 {
        return Err(Error::SingularPoint("Kelvin transform is singular at the origin".into()));
    }
    Ok((x.iter().map(|a| a / r2).collect(), r2.sqrt()))
}

/// `|x|^{−weight} f(x/|x|²)`.
pub fn kelvin_weighted(f: &Field, weight: f64, x: &[f64]) -> Result<f64> {
    let (y, r) = inversion(x)?;
    Ok(r.powf(-weight) * f.eval(&y)?)
}

/// `s(x) = |x|^{2−N} u(x/|x|²)`.
pub fn kelvin_u(u: &Field, x: &[f64]) -> Result<f64> {
    kelvin_weighted(u, u.dim as f64 - 2.0, x)
}

/// `t(x) = |x|^{−μ} v(x/|x|²)`.
pub fn kelvin_v(v: &Field, mu: f64, x: &[f64]) -> Result<f64> {
    kelvin_weighted(v, mu, x)
}

/// The Kelvin transform with weight `|x|^{−weight}` as a lazy field.
pub fn kelvin(f: &Field, weight: f64) -> Field {
    let inner = f.clone();
    let center = match &f.center {
        Some(c) if c.iter().all(|a| *a == 0.0) => Some(c.clone()),
        _ => None,
    };
    Field {
        dim: f.dim,
        center,
        eval: Arc::new(move |x: &[f64]| kelvin_weighted(&inner, weight, x)),
    }
}

/// `x ↦ f(x + a)`.
pub fn translate(f: &Field, a: &[f64]) -> Result<Field> {
    if a.len() != f.dim {
        return Err(Error::ParameterDomain(format!(
            "shift has {} coordinates, expected {}",
            a.len(),
            f.dim
        )));
    }
    let inner = f.clone();
    let shift = a.to_vec();
    let center = f
        .center
        .as_ref()
        .map(|c| c.iter().zip(a).map(|(ci, ai)| ci - ai).collect());
    Ok(Field {
        dim: f.dim,
        center,
        eval: Arc::new(move |x: &[f64]| {
            let y: Vec<f64> = x.iter().zip(&shift).map(|(xi, ai)| xi + ai).collect();
            inner.eval(&y)
        }),
    })
}

/// `x ↦ k^{weight} f(k x)`.
pub fn dilate_weighted(f: &Field, k: f64, weight: f64) -> Result<Field> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::ParameterDomain(format!("dilation factor must be positive, got {k}")));
    }
    let inner = f.clone();
    let scale = k.powf(weight);
    let center = f.center.as_ref().map(|c| c.iter().map(|ci| ci / k).collect());
    Ok(Field {
        dim: f.dim,
        center,
        eval: Arc::new(move |x: &[f64]| {
            let y: Vec<f64> = x.iter().map(|xi| k * xi).collect();
            Ok(scale * inner.eval(&y)?)
        }),
    })
}

/// `x ↦ k^{(N−2)/2} u(k x)`.
pub fn dilate(u: &Field, k: f64) -> Result<Field> {
    dilate_weighted(u, k, 0.5 * (u.dim as f64 - 2.0))
}

/// A pair `(u, v)` of fields for the integral system.
#[derive(Clone, Debug)]
pub struct PairField {
    pub u: Field,
    pub v: Field,
    pub params: ProblemParams,
    pub normalization: Normalization,
}

impl PairField {
    /// Radial fields about `center` built from a discrete pair.
    pub fn from_pair(sp: &SolutionPair, center: Vec<f64>) -> Result<Self> {
        let n = sp.params.dim();
        Ok(Self {
            u: Field::radial(sp.u.clone(), center.clone(), n as f64 - 2.0)?,
            v: Field::radial(sp.v.clone(), center, sp.params.mu())?,
            params: sp.params,
            normalization: sp.normalization,
        })
    }

    pub fn translate(&self, a: &[f64]) -> Result<Self> {
        Ok(Self {
            u: translate(&self.u, a)?,
            v: translate(&self.v, a)?,
            ..self.clone()
        })
    }

    /// `(k^{(N−2)/2} u(kx), k^{μ/2} v(kx))`.
    pub fn dilate(&self, k: f64) -> Result<Self> {
        Ok(Self {
            u: dilate(&self.u, k)?,
            v: dilate_weighted(&self.v, k, 0.5 * self.params.mu())?,
            ..self.clone()
        })
    }

    /// `(s, t) = (|x|^{2−N} u(x/|x|²), |x|^{−μ} v(x/|x|²))`.
    pub fn kelvin(&self) -> Self {
        let n = self.params.dim() as f64;
        Self {
            u: kelvin(&self.u, n - 2.0),
            v: kelvin(&self.v, self.params.mu()),
            ..self.clone()
        }
    }

    /// Resample both fields radially about the tracked center of `u`.
    pub fn resample(&self, grid: &Arc<RadialGrid>) -> Result<SolutionPair> {
        if self.u.center() != self.v.center() {
            return Err(Error::Domain("u and v are radial about different centers".into()));
        }
        SolutionPair::new(
            self.u.sample_radial(grid)?,
            self.v.sample_radial(grid)?,
            self.params,
            self.normalization,
        )
    }

    fn newton_constant(&self) -> f64 {
        match self.normalization {
            Normalization::Bare => 1.0,
            Normalization::Green => green_constant(self.params.dim()),
        }
    }
}

/// Quadrature resolution of [`reflection_difference`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReflectionOptions {
    /// Radius of the ball around `0^λ` removed from the integration domain.
    pub epsilon: f64,
    /// Gauss–Legendre nodes per half of the polar angle measured from `e₁`.
    pub polar_nodes: usize,
    /// Nodes per remaining angle (trapezoidal in the azimuth).
    pub azimuth_nodes: usize,
    /// Gauss–Legendre nodes per radial panel.
    pub radial_nodes: usize,
    /// Length scale of the profiles; sets the first radial panel.
    pub scale: f64,
}

impl Default for ReflectionOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            polar_nodes: 24,
            azimuth_nodes: 32,
            radial_nodes: 16,
            scale: 1.0,
        }
    }
}

/// Value of the reflection identity at one point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReflectionDifference {
    /// `∫_{Σ_λ} [|x−y|^{2−N} − |x^λ−y|^{2−N}] [t s^{p−1}(y) − t s^{p−1}(y^λ)] dy`.
    pub value: f64,
    /// `s(x) − s(x^λ)` evaluated directly; `None` when `x` or `x^λ` is a
    /// singular point of the field (for example `x = 0^λ` after a Kelvin transform).
    pub direct: Option<f64>,
    pub epsilon: f64,
    /// Volume of the excluded ball intersected with `Σ_λ`.
    pub excluded_measure: f64,
}

/// Points and weights of a product rule on the sphere `S^{m}` (embedded in `R^{m+1}`).
fn sphere_rule(m: usize, polar: usize, azimuth: usize) -> Vec<(Vec<f64>, f64)> {
    if m == 0 {
        return vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)];
    }
    if m == 1 {
        let h = 2.0 * std::f64::consts::PI / azimuth as f64;
        return (0..azimuth)
            .map(|j| {
                let phi = (j as f64 + 0.5) * h;
                (vec![phi.cos(), phi.sin()], h)
            })
            .collect();
    }
    let inner = sphere_rule(m - 1, polar, azimuth);
    let gl = gauss_legendre(polar);
    let mut out = Vec::new();
    for (th, w) in gl.on_interval(0.0, std::f64::consts::PI) {
        let (s, c) = th.sin_cos();
        for (p, wi) in &inner {
            let mut v = Vec::with_capacity(m + 1);
            v.push(c);
            v.extend(p.iter().map(|a| s * a));
            out.push((v, w * s.powi(m as i32 - 1) * wi));
        }
    }
    out
}

/// Right-hand side of the reflection identity for `s − s_λ` at `x ∈ Σ_λ`,
/// computed by quadrature in polar coordinates centred at `x`.
pub fn reflection_difference(
    pair: &PairField,
    lambda: f64,
    x: &[f64],
    opts: &ReflectionOptions,
) -> Result<ReflectionDifference> {
    let n = pair.params.dim();
    if x.len() != n {
        return Err(Error::ParameterDomain(format!("point has {} coordinates, expected {n}", x.len())));
    }
    if !(x[0] > lambda) {
        return Err(Error::Domain(format!("x₁ = {} must exceed λ = {lambda}", x[0])));
    }
    let zero_l = reflect_point(&vec![0.0; n], lambda);
    let pw = pair.params.two_star_mu();
    let xl = reflect_point(x, lambda);
    let nf = n as f64;
    let source = |y: &[f64]| -> Result<f64> {
        let s = pair.u.eval(y)?;
        let t = pair.v.eval(y)?;
        Ok(t * s.max(0.0).powf(pw - 1.0))
    };
    let integrand = |y: &[f64]| -> Result<f64> {
        if distance(y, &zero_l) < opts.epsilon {
            return Ok(0.0);
        }
        let yl = reflect_point(y, lambda);
        let kx = distance(x, y).powf(2.0 - nf);
        let kl = distance(&xl, y).powf(2.0 - nf);
        Ok((kx - kl) * (source(y)? - source(&yl)?))
    };
    // Polar angle from e₁ on two halves; the rest of the sphere as a product rule.
    let rest = sphere_rule(n - 2, opts.polar_nodes, opts.azimuth_nodes);
    let gl_polar = gauss_legendre(opts.polar_nodes);
    let gl_r = gauss_legendre(opts.radial_nodes);
    let d = x[0] - lambda;
    let first = 0.05 * d.min(opts.scale);
    let far = 1e6 * opts.scale.max(norm(x));
    let half = 0.5 * std::f64::consts::PI;
    let mut total = 0.0;
    let mut y = vec![0.0; n];
    for (a, b) in [(0.0, half), (half, 2.0 * half)] {
        for (th, wt) in gl_polar.on_interval(a, b) {
            let (sn, cs) = th.sin_cos();
            let rho_max = if cs < 0.0 { d / -cs } else { f64::INFINITY };
            let jac_polar = wt * sn.powi(n as i32 - 2);
            for (dir, wd) in &rest {
                let mut inner = 0.0;
                let mut lo = 0.0;
                let mut hi = first;
                loop {
                    let top = hi.min(rho_max).min(far);
                    for (rho, wr) in gl_r.on_interval(lo, top) {
                        y[0] = x[0] + rho * cs;
                        for k in 1..n {
                            y[k] = x[k] + rho * sn * dir[k - 1];
                        }
                        inner += wr * rho.powi(n as i32 - 1) * integrand(&y)?;
                    }
                    if top >= rho_max || top >= far {
                        break;
                    }
                    lo = top;
                    hi = 2.0 * top;
                }
                total += jac_polar * wd * inner;
            }
        }
    }
    let value = pair.newton_constant() * total;
    let direct = match (pair.u.eval(x), pair.u.eval(&xl)) {
        (Ok(a), Ok(b)) => Some(a - b),
        (Err(Error::SingularPoint(_)), _) | (_, Err(Error::SingularPoint(_))) => None,
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let excluded_measure = ball_volume(n, opts.epsilon.min(lambda.abs()));
    Ok(ReflectionDifference {
        value,
        direct,
        epsilon: opts.epsilon,
        excluded_measure,
    })
}

/// Uniform sample of a box `[0, L] × [−L, L]^{N−1}` used for the Σ-sets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleBox {
    pub half_width: f64,
    /// Cells per unit of `2L` along each axis.
    pub cells: usize,
    /// Excluded radius around `0^λ`; `None` means two cell widths.
    pub epsilon: Option<f64>,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            half_width: 16.0,
            cells: 48,
            epsilon: None,
        }
    }
}

impl SampleBox {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(2.0 * self.spacing())
    }
}

/// Sampled `Σ_λ` with the sets where `s > s_λ` and `t > t_λ`.
#[derive(Clone, Debug)]
pub struct HalfSpaceSets {
    pub lambda: f64,
    pub points: Vec<Vec<f64>>,
    pub cell_volume: f64,
    pub sigma_s_mask: Vec<bool>,
    pub sigma_t_mask: Vec<bool>,
    /// `s(x) − s(x^λ)` at each point.
    pub s_gap: Vec<f64>,
    pub s_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub epsilon: f64,
    /// Number of box cells dropped because they fall in the ball around `0^λ`.
    pub excluded_cells: usize,
}

impl HalfSpaceSets {
    pub fn sample(pair: &PairField, lambda: f64, bx: &SampleBox) -> Result<Self> {
        let n = pair.params.dim();
        if bx.cells < 2 || !(bx.half_width > 0.0) {
            return Err(Error::ParameterDomain("sample box needs at least two cells and a positive width".into()));
        }
        let h = bx.spacing();
        let eps = bx.epsilon();
        let zero_l = reflect_point(&vec![0.0; n], lambda);
        let first_cells = bx.cells / 2;
        let mut idx = vec![0usize; n];
        let mut points = Vec::new();
        let mut excluded = 0;
        'outer: loop {
            let mut x = vec![0.0; n];
            x[0] = (idx[0] as f64 + 0.5) * h;
            for k in 1..n {
                x[k] = -bx.half_width + (idx[k] as f64 + 0.5) * h;
            }
            if x[0] > lambda {
                if distance(&x, &zero_l) < eps {
                    excluded += 1;
                } else {
                    points.push(x);
                }
            }
            for (k, slot) in idx.iter_mut().enumerate().take(n) {
                *slot += 1;
                let limit = if k == 0 { first_cells } else { bx.cells };
                if *slot < limit {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
        let mut sigma_s = Vec::with_capacity(points.len());
        let mut sigma_t = Vec::with_capacity(points.len());
        let mut s_gap = Vec::with_capacity(points.len());
        let mut s_values = Vec::with_capacity(points.len());
        let mut t_values = Vec::with_capacity(points.len());
        for x in &points {
            let xl = reflect_point(x, lambda);
            let s = pair.u.eval(x)?;
            let t = pair.v.eval(x)?;
            let gap = s - pair.u.eval(&xl)?;
            sigma_s.push(gap > 0.0);
            sigma_t.push(t > pair.v.eval(&xl)?);
            s_gap.push(gap);
            s_values.push(s);
            t_values.push(t);
        }
        Ok(Self {
            lambda,
            points,
            cell_volume: h.powi(n as i32),
            sigma_s_mask: sigma_s,
            sigma_t_mask: sigma_t,
            s_gap,
            s_values,
            t_values,
            epsilon: eps,
            excluded_cells: excluded,
        })
    }

    /// Fraction of sampled `Σ_λ` that lies in `Σ^s_λ`.
    pub fn sigma_s_fraction(&self) -> f64 {
        if self.points.is_empty() {
            0.0
        } else {
            self.sigma_s_mask.iter().filter(|b| **b).count() as f64 / self.points.len() as f64
        }
    }

    /// Largest `s − s_λ` over the sample (`−∞` when the sample is empty).
    pub fn max_gap(&self) -> f64 {
        self.s_gap.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn norm_on(&self, values: &[f64], mask: &[bool], q: f64) -> f64 {
        let s: f64 = values
            .iter()
            .zip(mask)
            .filter(|(_, m)| **m)
            .map(|(v, _)| v.abs().powf(q))
            .sum();
        (s * self.cell_volume).powf(1.0 / q)
    }
}

/// Which half-space estimate to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateVariant {
    /// `0 < μ < min(4, N)`.
    Standard,
    /// `N > 4`, `μ = 4`.
    Borderline,
}

/// Left side and bracket (without the constant) of the half-space estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateNorms {
    pub lambda: f64,
    pub lhs: f64,
    pub bracket: f64,
    pub sigma_s_fraction: f64,
}

/// `‖s − s_λ‖_{L^{2*}(Σ^s_λ)}` and the bracketed factor of the estimate, on a
/// sampled box. Returns `lhs = 0` when `Σ^s_λ` is empty.
pub fn half_space_norms(
    sets: &HalfSpaceSets,
    params: &ProblemParams,
    variant: EstimateVariant,
) -> Result<EstimateNorms> {
    let n = params.dim() as f64;
    let pw = params.two_star_mu();
    let two_star = 2.0 * n / (n - 2.0);
    if variant == EstimateVariant::Borderline && !(params.dim() > 4 && (params.mu() - 4.0).abs() < 1e-12) {
        return Err(Error::ParameterDomain("the borderline estimate needs N > 4 and μ = 4".into()));
    }
    let ms = &sets.sigma_s_mask;
    let mt = &sets.sigma_t_mask;
    let lhs = sets.norm_on(&sets.s_gap, ms, two_star);
    let s_on_s = sets.norm_on(&sets.s_values, ms, two_star);
    let s_on_t = sets.norm_on(&sets.s_values, mt, two_star);
    let bracket = match variant {
        EstimateVariant::Standard => {
            let t_on_s = sets.norm_on(&sets.t_values, ms, 2.0 * n / params.mu());
            t_on_s * s_on_s.powf(pw - 2.0) + s_on_t.powf(pw - 1.0) * s_on_s.powf(pw - 1.0)
        }
        EstimateVariant::Borderline => {
            let t_on_s = sets.norm_on(&sets.t_values, ms, 0.5 * n);
            t_on_s + s_on_t * s_on_s
        }
    };
    Ok(EstimateNorms {
        lambda: sets.lambda,
        lhs,
        bracket,
        sigma_s_fraction: sets.sigma_s_fraction(),
    })
}

/// One row of the moving-plane table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MovingPlaneRow {
    pub lambda: f64,
    pub sigma_s_fraction: f64,
    pub lhs: f64,
    pub bracket: f64,
    pub max_gap: f64,
}

/// Evaluate the half-space estimate and the largest `s − s_λ` for each `λ`.
pub fn moving_plane_table(pair: &PairField, lambdas: &[f64], bx: &SampleBox) -> Result<Vec<MovingPlaneRow>> {
    let variant = if pair.params.dim() > 4 && (pair.params.mu() - 4.0).abs() < 1e-12 {
        EstimateVariant::Borderline
    } else {
        EstimateVariant::Standard
    };
    lambdas
        .iter()
        .map(|&lambda| {
            let sets = HalfSpaceSets::sample(pair, lambda, bx)?;
            let est = half_space_norms(&sets, &pair.params, variant)?;
            Ok(MovingPlaneRow {
                lambda,
                sigma_s_fraction: est.sigma_s_fraction,
                lhs: est.lhs,
                bracket: est.bracket,
                max_gap: sets.max_gap(),
            })
        })
        .collect()
}

/// Write rows as CSV with header `lambda,sigma_s_fraction,lhs,bracket,max_gap`.
pub fn write_moving_plane_csv<W: Write>(rows: &[MovingPlaneRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
