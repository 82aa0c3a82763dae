//! Radial grids, product-integration quadrature, finite differences and
//! sector Dirichlet forms.
//!
//! A grid is uniform in a mapped coordinate `s` and carries nodes `r(s_i)`.
//! Two mappings are offered: logarithmic (`r = e^s` between an inner radius
//! and the cutoff) and algebraic (`r = R σ³`, `σ_i = (i+1)/M`). Integrals use
//! local six-point Lagrange interpolation in `s` integrated exactly against
//! `r^{N-1} r'(s)`, so smooth integrands converge at sixth order.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gauss_legendre, harmonic_multiplicity, sphere_area};

/// Number of nodes in the local interpolation stencil.
pub const STENCIL: usize = 6;
const MIN_NODES: usize = 16;
const GAUSS_POINTS: usize = 16;
/// Inner radius of the logarithmic mapping relative to the cutoff when not given.
pub const DEFAULT_INNER_RATIO: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    Log,
    Algebraic,
}

impl std::str::FromStr for Mapping {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log" => Ok(Mapping::Log),
            "algebraic" => Ok(Mapping::Algebraic),
            other => Err(Error::Config(format!(
                "unknown mapping `{other}` (expected `log` or `algebraic`)"
            ))),
        }
    }
}

impl std::fmt::Display for Mapping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mapping::Log => "log",
            Mapping::Algebraic => "algebraic",
        })
    }
}

/// Serializable description of a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub cutoff: f64,
    pub size: usize,
    pub mapping: Mapping,
    /// Smallest node of the logarithmic mapping; ignored by the algebraic one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<f64>,
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.clone())
    }
}

/// Immutable radial grid with quadrature weights and difference stencils.
#[derive(Debug)]
pub struct RadialGrid {
    spec: GridSpec,
    s0: f64,
    h: f64,
    nodes: Vec<f64>,
    dr_ds: Vec<f64>,
    d2r_ds2: Vec<f64>,
    weights: Vec<f64>,
    surface: f64,
    mid_radii: Vec<f64>,
    mid_weights: Vec<f64>,
    mid_stencils: Vec<(usize, [f64; 5])>,
    d1: Vec<(usize, [f64; 5])>,
    d2: Vec<(usize, [f64; 6])>,
    hash: u64,
}

/// Build a grid with `size` nodes on `(0, cutoff]`.
pub fn make_grid(dim: usize, cutoff: f64, size: usize, mapping: Mapping) -> Result<RadialGrid> {
    RadialGrid::new(GridSpec {
        dim,
        cutoff,
        size,
        mapping,
        inner: None,
    })
}

impl RadialGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.dim < 1 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if !(spec.cutoff > 0.0 && spec.cutoff.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "cutoff must be positive and finite, got {}",
                spec.cutoff
            )));
        }
        if spec.size < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "at least {MIN_NODES} nodes required, got {}",
                spec.size
            )));
        }
        let m = spec.size;
        let (s0, h) = match spec.mapping {
            Mapping::Log => {
                let inner = spec.inner.unwrap_or(spec.cutoff * DEFAULT_INNER_RATIO);
                if !(inner > 0.0 && inner < spec.cutoff) {
                    return Err(Error::InvalidGrid(format!(
                        "inner radius {inner} must lie in (0, cutoff)"
                    )));
                }
                let s0 = inner.ln();
                (s0, (spec.cutoff.ln() - s0) / (m - 1) as f64)
            }
            Mapping::Algebraic => (1.0 / m as f64, 1.0 / m as f64),
        };
        let mut grid = RadialGrid {
            spec,
            s0,
            h,
            nodes: Vec::new(),
            dr_ds: Vec::new(),
            d2r_ds2: Vec::new(),
            weights: Vec::new(),
            surface: 0.0,
            mid_radii: Vec::new(),
            mid_weights: Vec::new(),
            mid_stencils: Vec::new(),
            d1: Vec::new(),
            d2: Vec::new(),
            hash: 0,
        };
        grid.surface = sphere_area(grid.spec.dim);
        for i in 0..m {
            let s = grid.s_at(i as f64);
            grid.nodes.push(grid.r_of_s(s));
            grid.dr_ds.push(grid.dr(s));
            grid.d2r_ds2.push(grid.d2r(s));
        }
        if let Mapping::Log = grid.spec.mapping {
            // pin the last node to the cutoff exactly
            grid.nodes[m - 1] = grid.spec.cutoff;
        }
        if grid.nodes.windows(2).any(|w| w[1] <= w[0]) || grid.nodes[0] <= 0.0 {
            return Err(Error::InvalidGrid("nodes are not strictly increasing".into()));
        }
        grid.weights = grid.product_weights();
        grid.build_stencils();
        grid.hash = grid.compute_hash();
        Ok(grid)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn dim(&self) -> usize {
        self.spec.dim
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn cutoff(&self) -> f64 {
        self.spec.cutoff
    }
    pub fn mapping(&self) -> Mapping {
        self.spec.mapping
    }
    /// Weights for `∫ f(r) r^{N-1} dr`, without the sphere area.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Area of the unit sphere S^{N-1}.
    pub fn surface(&self) -> f64 {
        self.surface
    }
    /// Spacing of the mapped coordinate.
    pub fn step(&self) -> f64 {
        self.h
    }
    /// Mapped coordinate of node 0.
    pub fn s_start(&self) -> f64 {
        self.s0
    }
    /// FNV-1a hash of the dimension and node bit patterns.
    pub fn hash(&self) -> u64 {
        self.hash
    }
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other)
            || (self.hash == other.hash && self.len() == other.len() && self.dim() == other.dim())
    }

    fn compute_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= *b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(&(self.spec.dim as u64).to_le_bytes());
        for r in &self.nodes {
            feed(&r.to_bits().to_le_bytes());
        }
        h
    }

    /// Mapped coordinate at fractional index `z`.
    pub fn s_at(&self, z: f64) -> f64 {
        self.s0 + z * self.h
    }

    pub fn r_of_s(&self, s: f64) -> f64 {
        match self.spec.mapping {
            Mapping::Log => s.exp(),
            Mapping::Algebraic => self.spec.cutoff * s * s * s,
        }
    }

    pub fn s_of_r(&self, r: f64) -> f64 {
        match self.spec.mapping {
            Mapping::Log => r.ln(),
            Mapping::Algebraic => (r / self.spec.cutoff).cbrt(),
        }
    }

    /// dr/ds.
    pub fn dr(&self, s: f64) -> f64 {
        match self.spec.mapping {
            Mapping::Log => s.exp(),
            Mapping::Algebraic => 3.0 * self.spec.cutoff * s * s,
        }
    }

    fn d2r(&self, s: f64) -> f64 {
        match self.spec.mapping {
            Mapping::Log => s.exp(),
            Mapping::Algebraic => 6.0 * self.spec.cutoff * s,
        }
    }

    /// r(s1) − r(s2) without cancellation when s1 ≈ s2.
    pub fn r_diff(&self, s1: f64, s2: f64) -> f64 {
        match self.spec.mapping {
            Mapping::Log => s2.exp() * (s1 - s2).exp_m1(),
            Mapping::Algebraic => {
                self.spec.cutoff * (s1 - s2) * (s1 * s1 + s1 * s2 + s2 * s2)
            }
        }
    }

    /// Index of the first node of the interpolation stencil used on the
    /// interval between nodes `k` and `k+1` (`k = -1` is the algebraic cap).
    pub fn stencil_start(&self, k: isize) -> usize {
        let m = self.len() as isize;
        (k - 2).clamp(0, m - STENCIL as isize) as usize
    }

    /// Intervals covered by product integration: `-1` denotes `[0, σ_0]`.
    pub fn interval_range(&self) -> std::ops::Range<isize> {
        let first = match self.spec.mapping {
            Mapping::Log => 0,
            Mapping::Algebraic => -1,
        };
        first..(self.len() as isize - 1)
    }

    /// Mapped-coordinate bounds of interval `k`.
    pub fn interval_bounds(&self, k: isize) -> (f64, f64) {
        if k < 0 {
            (0.0, self.s0)
        } else {
            (self.s_at(k as f64), self.s_at(k as f64 + 1.0))
        }
    }

    /// Centred quadrature stencil `(start, len)` for interval `k`; its width
    /// shrinks next to the ends so that every weight stays positive.
    fn quadrature_stencil(&self, k: isize) -> (usize, usize) {
        let m = self.len() as isize;
        if k < 0 {
            return (0, 2);
        }
        let half = 3.min(k + 1).min(m - 1 - k);
        ((k - half + 1) as usize, (2 * half) as usize)
    }

    fn product_weights(&self) -> Vec<f64> {
        let n = self.spec.dim as i32;
        let mut w = vec![0.0; self.len()];
        let rule = gauss_legendre(GAUSS_POINTS);
        for k in self.interval_range() {
            let (a, b) = self.interval_bounds(k);
            let (start, len) = self.quadrature_stencil(k);
            for (s, gw) in rule.on_interval(a, b) {
                let x = (s - self.s0) / self.h - start as f64;
                let f = self.r_of_s(s).powi(n - 1) * self.dr(s) * gw;
                for j in 0..len {
                    let mut l = 1.0;
                    for q in 0..len {
                        if q != j {
                            l *= (x - q as f64) / (j as f64 - q as f64);
                        }
                    }
                    w[start + j] += l * f;
                }
            }
        }
        if let Mapping::Log = self.spec.mapping {
            w[0] += self.nodes[0].powi(n) / n as f64;
        }
        w
    }

    fn build_stencils(&mut self) {
        let m = self.len();
        let n = self.spec.dim as i32;
        let h = self.h;
        for i in 0..m - 1 {
            let (start, mut coef, weight) = if let Some((start, c, w)) = boundary_closure(i, m) {
                (start, c, w)
            } else {
                let start = if i == 0 { 0 } else { (i - 1).min(m - 4) };
                let z: Vec<f64> = (start..start + 4).map(|j| j as f64).collect();
                let c = fd_weights(&z, i as f64 + 0.5, 1);
                let mut coef = [0.0; 5];
                coef[..4].copy_from_slice(&c[1]);
                (start, coef, 1.0)
            };
            coef.iter_mut().for_each(|c| *c /= h);
            self.mid_stencils.push((start, coef));
            let s = self.s_at(i as f64 + 0.5);
            let r = self.r_of_s(s);
            self.mid_radii.push(r);
            self.mid_weights.push(weight * h * r.powi(n - 1) / self.dr(s));
        }
        for i in 0..m {
            let start = i.saturating_sub(2).min(m - 5);
            let z: Vec<f64> = (start..start + 5).map(|j| j as f64).collect();
            let c = fd_weights(&z, i as f64, 1);
            let mut coef = [0.0; 5];
            for j in 0..5 {
                coef[j] = c[1][j] / h;
            }
            self.d1.push((start, coef));
            let (start2, len2) = if i >= 2 && i + 2 < m {
                (i - 2, 5)
            } else {
                (i.saturating_sub(2).min(m - 6), 6)
            };
            let z: Vec<f64> = (start2..start2 + len2).map(|j| j as f64).collect();
            let c = fd_weights(&z, i as f64, 2);
            let mut coef = [0.0; 6];
            for j in 0..len2 {
                coef[j] = c[2][j] / (h * h);
            }
            self.d2.push((start2, coef));
        }
    }

    /// ∫_{|x|<R} f(|x|) dx from nodal values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.surface * dot(&self.weights, values)
    }

    /// Staggered derivative d/ds at the midpoints `s_{i+1/2}`.
    pub fn midpoint_derivative_s(&self, values: &[f64]) -> Vec<f64> {
        self.mid_stencils
            .iter()
            .map(|(start, c)| {
                c.iter()
                    .enumerate()
                    .filter(|(_, cj)| **cj != 0.0)
                    .map(|(j, cj)| cj * values[start + j])
                    .sum()
            })
            .collect()
    }

    /// Midpoint stencils `(first index, coefficients)` of d/ds.
    pub fn midpoint_stencils(&self) -> &[(usize, [f64; 5])] {
        &self.mid_stencils
    }

    /// Weights `h r^{N-1}/r'(s)` at the midpoints (sphere area excluded).
    pub fn midpoint_weights(&self) -> &[f64] {
        &self.mid_weights
    }

    pub fn midpoint_radii(&self) -> &[f64] {
        &self.mid_radii
    }

    /// df/dr at the nodes, fourth order in the mapped coordinate.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        self.d1
            .iter()
            .zip(&self.dr_ds)
            .map(|((start, c), rp)| (0..5).map(|j| c[j] * values[start + j]).sum::<f64>() / rp)
            .collect()
    }

    /// d²f/dr² at the nodes.
    pub fn second_derivative(&self, values: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let (s1, c1) = &self.d1[i];
                let fs: f64 = (0..5).map(|j| c1[j] * values[s1 + j]).sum();
                let (s2, c2) = &self.d2[i];
                let len = if i >= 2 && i + 2 < m { 5 } else { 6 };
                let fss: f64 = (0..len).map(|j| c2[j] * values[s2 + j]).sum();
                let rp = self.dr_ds[i];
                (fss - fs * self.d2r_ds2[i] / rp) / (rp * rp)
            })
            .collect()
    }

    /// Radial part of the Laplacian in sector ℓ: f'' + (N-1)f'/r − ℓ(ℓ+N−2)f/r².
    pub fn sector_laplacian(&self, values: &[f64], ell: usize) -> Vec<f64> {
        let n = self.spec.dim as f64;
        let l = (ell * (ell + self.spec.dim - 2)) as f64;
        let d1 = self.derivative(values);
        let d2 = self.second_derivative(values);
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, r)| d2[i] + (n - 1.0) * d1[i] / r - l * values[i] / (r * r))
            .collect()
    }

    /// Coefficient of the exterior term `f(R) g(R)` in the sector form.
    pub fn exterior_coefficient(&self, ell: usize) -> f64 {
        let n = self.spec.dim;
        (n - 2 + ell) as f64 * self.spec.cutoff.powi(n as i32 - 2)
    }

    /// Dirichlet form of sector ℓ on nodal values (sphere area included).
    ///
    /// Beyond the cutoff each function is continued by the decaying harmonic
    /// `f(R)(R/r)^{N-2+ℓ}`, whose exterior energy is added in closed form.
    pub fn sector_form_values(&self, f: &[f64], g: &[f64], ell: usize) -> f64 {
        let df = self.midpoint_derivative_s(f);
        let dg = self.midpoint_derivative_s(g);
        let mut acc: f64 = (0..df.len()).map(|j| self.mid_weights[j] * df[j] * dg[j]).sum();
        if ell > 0 {
            let l = (ell * (ell + self.spec.dim - 2)) as f64;
            acc += l * (0..self.len())
                .map(|i| self.weights[i] * f[i] * g[i] / (self.nodes[i] * self.nodes[i]))
                .sum::<f64>();
        }
        let m = self.len() - 1;
        acc += self.exterior_coefficient(ell) * f[m] * g[m];
        self.surface * acc
    }

    /// Matrix of the sector Dirichlet form (sphere area included).
    pub fn sector_form_matrix(&self, ell: usize) -> DMatrix<f64> {
        let m = self.len();
        let mut b = DMatrix::<f64>::zeros(m, m);
        for (j, (start, c)) in self.mid_stencils.iter().enumerate() {
            let w = self.surface * self.mid_weights[j];
            let width = c.iter().rposition(|x| *x != 0.0).map_or(0, |p| p + 1);
            for a in 0..width {
                for bb in 0..width {
                    b[(start + a, start + bb)] += w * c[a] * c[bb];
                }
            }
        }
        if ell > 0 {
            let l = (ell * (ell + self.spec.dim - 2)) as f64;
            for i in 0..m {
                b[(i, i)] += self.surface * l * self.weights[i] / (self.nodes[i] * self.nodes[i]);
            }
        }
        b[(m - 1, m - 1)] += self.surface * self.exterior_coefficient(ell);
        b
    }

    /// Value at radius `r` from nodal values by local Lagrange interpolation.
    ///
    /// Below the first node the interpolant is held constant (log mapping) or
    /// extrapolated through the first stencil (algebraic mapping); beyond the
    /// cutoff the value is zero.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        if r > self.spec.cutoff {
            return 0.0;
        }
        self.interpolate_inside(values, r)
    }

    fn interpolate_inside(&self, values: &[f64], r: f64) -> f64 {
        if r <= self.nodes[0] {
            if let Mapping::Log = self.spec.mapping {
                return values[0];
            }
        }
        let s = if r <= 0.0 { 0.0 } else { self.s_of_r(r) };
        let z = (s - self.s0) / self.h;
        let k = (z.floor() as isize).clamp(-1, self.len() as isize - 2);
        let start = self.stencil_start(k);
        let basis = lagrange_basis(start, z);
        basis.iter().enumerate().map(|(j, l)| l * values[start + j]).sum()
    }

    /// Interpolation with a power-law continuation `f(R)(R/r)^decay` past the cutoff.
    pub fn interpolate_with_tail(&self, values: &[f64], r: f64, decay: f64) -> f64 {
        if r > self.spec.cutoff {
            let last = values[self.len() - 1];
            return last * (self.spec.cutoff / r).powf(decay);
        }
        self.interpolate_inside(values, r)
    }
}

/// Summation-by-parts closure of the staggered derivative on the last three
/// midpoints (mirrored at the first three). With these stencils and the
/// quadrature factors `13/12, 7/8, 25/24` the column sums of the weighted
/// difference operator telescope exactly, so the discrete form reproduces the
/// boundary flux of harmonic tails; every stencil stays exact for cubics.
fn boundary_closure(i: usize, m: usize) -> Option<(usize, [f64; 5], f64)> {
    const LAST: [(usize, [f64; 5], f64); 3] = [
        (2, [1.0 / 24.0, -1.0 / 8.0, -7.0 / 8.0, 23.0 / 24.0, 0.0], 13.0 / 12.0),
        (1, [-1.0 / 504.0, 25.0 / 504.0, -191.0 / 168.0, 571.0 / 504.0, -11.0 / 252.0], 7.0 / 8.0),
        (1, [1.0 / 24.0, -9.0 / 8.0, 9.0 / 8.0, -1.0 / 24.0, 0.0], 25.0 / 24.0),
    ];
    let from_end = m - 2 - i;
    if from_end < 3 {
        let (offset, c, w) = LAST[from_end];
        // local node 0 is m − 6
        let width = c.iter().rposition(|x| *x != 0.0).map_or(0, |p| p + 1);
        let start = m - 6 + offset;
        let mut coef = [0.0; 5];
        coef[..width].copy_from_slice(&c[..width]);
        return Some((start, coef, w));
    }
    if i < 3 {
        let (offset, c, w) = LAST[i];
        let width = c.iter().rposition(|x| *x != 0.0).map_or(0, |p| p + 1);
        // mirror: node k ↦ 5 − k, derivative changes sign
        let mut coef = [0.0; 5];
        for (j, cj) in c[..width].iter().enumerate() {
            coef[width - 1 - j] = -cj;
        }
        let start = 5 - (offset + width - 1);
        return Some((start, coef, w));
    }
    None
}

/// Lagrange basis values at fractional index `z` for nodes `start..start+6`.
pub fn lagrange_basis(start: usize, z: f64) -> [f64; STENCIL] {
    let mut out = [0.0; STENCIL];
    let x = z - start as f64;
    for (m, o) in out.iter_mut().enumerate() {
        let mut v = 1.0;
        for j in 0..STENCIL {
            if j != m {
                v *= (x - j as f64) / (m as f64 - j as f64);
            }
        }
        *o = v;
    }
    out
}

/// Monomial coefficients of the Lagrange basis on nodes `offset + 0..6`,
/// expressed in the local variable `x` (`x = 0` at `offset`).
pub fn lagrange_monomials(offset: f64) -> [[f64; STENCIL]; STENCIL] {
    let mut out = [[0.0; STENCIL]; STENCIL];
    for (m, row) in out.iter_mut().enumerate() {
        let mut poly = [0.0; STENCIL];
        poly[0] = 1.0;
        let mut deg = 0;
        let mut denom = 1.0;
        for j in 0..STENCIL {
            if j == m {
                continue;
            }
            let root = offset + j as f64;
            // multiply by (x - root)
            for d in (0..=deg + 1).rev() {
                let lower = if d > 0 { poly[d - 1] } else { 0.0 };
                poly[d] = lower - root * poly[d];
            }
            deg += 1;
            denom *= m as f64 - j as f64;
        }
        for d in 0..STENCIL {
            row[d] = poly[d] / denom;
        }
    }
    out
}

/// Finite-difference weights (Fornberg) for derivatives 0..=order at `x0`.
pub fn fd_weights(z: &[f64], x0: f64, order: usize) -> Vec<Vec<f64>> {
    let n = z.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = z[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = z[i] - x0;
        for j in 0..i {
            let c3 = z[i] - z[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Samples of a radial profile on a grid.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite sample at node {i} (r = {})",
                grid.nodes()[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise map with access to the radius.
    pub fn map_with_r(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .grid
                .nodes()
                .iter()
                .zip(&self.values)
                .map(|(&r, &v)| f(r, v))
                .collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }

    /// Value at radius `r`; zero past the cutoff.
    pub fn eval(&self, r: f64) -> f64 {
        self.grid.interpolate(&self.values, r)
    }

    /// Value at radius `r` with a power-law tail past the cutoff.
    pub fn eval_with_tail(&self, r: f64, decay: f64) -> f64 {
        self.grid.interpolate_with_tail(&self.values, r, decay)
    }

    pub fn derivative(&self) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.grid.derivative(&self.values),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl RadialFunction {
    /// First radius where the profile falls to half of its value at the first node.
    pub fn half_height_radius(&self) -> Option<f64> {
        let v = &self.values;
        let target = 0.5 * v[0];
        let nodes = self.grid.nodes();
        let i = v.iter().position(|&x| x <= target)?;
        if i == 0 {
            return Some(nodes[0]);
        }
        let (mut lo, mut hi) = (nodes[i - 1], nodes[i]);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// `r ↦ k^{weight} f(k r)`, resampled on the same grid with a power-law
    /// tail `r^{−decay}` where `k r` leaves the grid.
    pub fn dilated(&self, k: f64, weight: f64, decay: f64) -> Self {
        let scale = k.powf(weight);
        let values = self
            .grid
            .nodes()
            .iter()
            .map(|&r| scale * self.eval_with_tail(k * r, decay))
            .collect();
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }
}

/// Logarithmic grid for bubble work at width `t`: nodes from `1e-5 t` to `1e5 t`.
pub fn bubble_grid(dim: usize, width: f64, size: usize) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::new(GridSpec {
        dim,
        cutoff: 1e5 * width,
        size,
        mapping: Mapping::Log,
        inner: Some(1e-5 * width),
    })?))
}

/// ∫_{|x|<R} f(|x|) dx.
pub fn integrate(f: &RadialFunction) -> f64 {
    f.integrate()
}

/// (∫|f|^p dx)^{1/p} over the ball of radius R.
pub fn lp_norm(f: &RadialFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::ParameterDomain(format!("Lebesgue exponent must be ≥ 1, got {p}")));
    }
    let s = f.grid.integrate_values(&f.values.iter().map(|v| v.abs().powf(p)).collect::<Vec<_>>());
    Ok(s.max(0.0).powf(1.0 / p))
}

/// ω_{N-1}∫ [f'g' + ℓ(ℓ+N−2) f g / r²] r^{N-1} dr, plus the exterior harmonic energy.
pub fn sector_laplacian_form(f: &RadialFunction, g: &RadialFunction, ell: usize) -> Result<f64> {
    f.check_same_grid(g)?;
    Ok(f.grid.sector_form_values(&f.values, &g.values, ell))
}

/// Degree-ℓ spherical-harmonic sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngularSector {
    pub ell: usize,
    pub multiplicity: usize,
}

impl AngularSector {
    pub fn new(dim: usize, ell: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::ParameterDomain(format!("dimension must be ≥ 3, got {dim}")));
        }
        Ok(Self {
            ell,
            multiplicity: harmonic_multiplicity(dim, ell),
        })
    }
}

/// Volume of the ball of radius `r` in ℝ^dim.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    sphere_area(dim) * r.powi(dim as i32) / dim as f64
}
