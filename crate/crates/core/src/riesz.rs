//! Power-law convolutions of radial and single-sector functions.
//!
//! For `g(x) = f(|x|) Y_ℓ(x/|x|)` with `Y_ℓ` a degree-ℓ spherical harmonic,
//! Funk–Hecke gives `(|·|^{−β} ∗ g)(x) = Y_ℓ(x/|x|) ∫ A_ℓ(|x|, s) f(s) s^{N−1} ds`
//! with the angular profile
//! `A_ℓ(r, s) = ω_{N−2} ∫_0^π (r² + s² − 2rs cos θ)^{−β/2} P_ℓ(cos θ) sin^{N−2}θ dθ`.
//! The sector kernel is `K_ℓ = A_ℓ / ω_{N−1}`.
//!
//! Discretization is by product integration: `f` is replaced by its local
//! six-point interpolant in the grid's mapped coordinate and the singular
//! kernel is integrated against each interpolation monomial with panels
//! graded toward the diagonal. On logarithmic grids the kernel is homogeneous
//! in `(r, s)`, so moments depend only on the index offset.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::constants::{hls_sharp_constant, riesz_normalization, ProblemParams};
use crate::error::{Error, Result};
use crate::radial::{lagrange_monomials, lp_norm, Mapping, RadialFunction, RadialGrid, STENCIL};
use crate::special::{dimensional_legendre, gamma, gauss_legendre, sphere_area};

/// Environment variable naming a directory for cached kernel matrices.
pub const CACHE_ENV: &str = "CHOQUARD_KERNEL_CACHE";

const ANGULAR_POINTS: usize = 12;
const RADIAL_POINTS: usize = 10;
const GRADING_LEVELS: usize = 44;
const MAX_PANEL: f64 = 0.5;
const CACHE_MAGIC: &[u8; 4] = b"CHQK";
const CACHE_VERSION: u32 = 1;

/// `ω_{N−2} ∫_0^π q^{−β/2} P_ℓ(cos θ) sin^{N−2}θ dθ` with
/// `q = δ² + 4ρ sin²(θ/2)`, `δ = 1 − ρ`, for `0 ≤ ρ ≤ 1`.
///
/// `delta` must be supplied separately so that it keeps full relative
/// precision when `ρ` is close to one. At `δ = 0` the integral is finite only
/// for `β < N − 1`; otherwise `+∞` is returned.
pub fn angular_profile(dim: usize, beta: f64, ell: usize, rho: f64, delta: f64) -> f64 {
    let n = dim as f64;
    let rule = gauss_legendre(ANGULAR_POINTS);
    let mut p = vec![0.0; ell + 1];
    let mut acc = 0.0;
    let mut panel = |a: f64, b: f64, acc: &mut f64| {
        for (theta, w) in rule.on_interval(a, b) {
            let half = (0.5 * theta).sin();
            let q = delta * delta + 4.0 * rho * half * half;
            dimensional_legendre(dim, ell, theta.cos(), &mut p);
            *acc += w * q.powf(-0.5 * beta) * p[ell] * theta.sin().powi(dim as i32 - 2);
        }
    };
    let mut breaks = vec![0.0];
    if delta >= 0.5 || rho == 0.0 {
        // smooth integrand: uniform panels
    } else {
        let first = if delta > 0.0 {
            0.25 * delta / rho.sqrt()
        } else {
            PI * 2f64.powi(-(GRADING_LEVELS as i32))
        };
        let mut x = first;
        if delta == 0.0 {
            breaks[0] = first;
        } else {
            breaks.push(x);
        }
        while x * 2.0 < PI {
            x *= 2.0;
            breaks.push(x);
        }
    }
    // subdivide long panels
    let mut all = Vec::with_capacity(breaks.len() + 8);
    breaks.push(PI);
    for w in breaks.windows(2) {
        let pieces = ((w[1] - w[0]) / MAX_PANEL).ceil().max(1.0) as usize;
        for j in 0..pieces {
            all.push(w[0] + (w[1] - w[0]) * j as f64 / pieces as f64);
        }
    }
    all.push(PI);
    for w in all.windows(2) {
        panel(w[0], w[1], &mut acc);
    }
    if delta == 0.0 {
        let gamma_exp = n - 1.0 - beta;
        if gamma_exp <= 0.0 {
            return f64::INFINITY;
        }
        acc += all[0].powf(gamma_exp) / gamma_exp;
    }
    sphere_area(dim - 1) * acc
}

/// `A_ℓ(r, s)` evaluated through its homogeneity `r_>^{−β} A_ℓ(r_</r_>)`.
pub fn sector_profile(dim: usize, beta: f64, ell: usize, r: f64, s: f64) -> f64 {
    let (lo, hi) = if r < s { (r, s) } else { (s, r) };
    let delta = (hi - lo) / hi;
    hi.powf(-beta) * angular_profile(dim, beta, ell, lo / hi, delta)
}

/// Leading coefficient `κ` of `A_ℓ(r, s) ≈ κ |r − s|^{N−1−β} / r^{N−1}` near
/// the diagonal, defined for `β > N − 1`.
fn diagonal_coefficient(dim: usize, beta: f64) -> f64 {
    let n = dim as f64;
    PI.powf(0.5 * (n - 1.0)) * gamma(0.5 * (beta - n + 1.0)) / gamma(0.5 * beta)
}

/// Geometry of the source variable for moment integration.
enum Geometry<'a> {
    /// Target at `r = 1`, source `s = e^σ`.
    UnitLog,
    /// Target at grid node with mapped coordinate `s_t`.
    Grid(&'a RadialGrid, f64),
}

struct MomentContext<'a> {
    dim: usize,
    beta: f64,
    ell: usize,
    geometry: Geometry<'a>,
    /// Mapped coordinate of the target (the singular point).
    s_target: f64,
    /// Jacobian `dr/dσ` at the target.
    dr_target: f64,
}

impl MomentContext<'_> {
    /// Integrand `A_ℓ(r_t, r(σ)) r(σ)^{N−1} r'(σ)`.
    fn integrand(&self, sigma: f64) -> f64 {
        let n = self.dim as i32;
        let (hi, rho, delta, jac) = match self.geometry {
            Geometry::UnitLog => {
                let u = sigma;
                let hi = if u > 0.0 { u.exp() } else { 1.0 };
                (hi, (-u.abs()).exp(), -(-u.abs()).exp_m1(), (n as f64 * u).exp())
            }
            Geometry::Grid(grid, s_t) => {
                let r = grid.r_of_s(sigma);
                let rt = grid.r_of_s(s_t);
                let d = grid.r_diff(sigma, s_t);
                let hi = r.max(rt);
                let lo = r.min(rt);
                (hi, lo / hi, d.abs() / hi, r.powi(n - 1) * grid.dr(sigma))
            }
        };
        hi.powf(-self.beta) * angular_profile(self.dim, self.beta, self.ell, rho, delta) * jac
    }

    /// `∫_a^b G(σ) x^p dσ` for `p = 0..6`, `x = (σ − origin)/h`.
    fn moments(&self, a: f64, b: f64, origin: f64, h: f64) -> [f64; STENCIL] {
        let mut out = [0.0; STENCIL];
        let rule = gauss_legendre(RADIAL_POINTS);
        let add_panel = |lo: f64, hi: f64, out: &mut [f64; STENCIL]| {
            for (sigma, w) in rule.on_interval(lo, hi) {
                let g = w * self.integrand(sigma);
                let x = (sigma - origin) / h;
                let mut xp = 1.0;
                for o in out.iter_mut() {
                    *o += g * xp;
                    xp *= x;
                }
            }
        };
        let st = self.s_target;
        let len = b - a;
        let singular_left = st == a;
        let singular_right = st == b;
        if singular_left || singular_right {
            // geometric grading toward the singular end
            let mut outer = len;
            for _ in 0..GRADING_LEVELS {
                let inner = 0.5 * outer;
                if singular_left {
                    add_panel(a + inner, a + outer, &mut out);
                } else {
                    add_panel(b - outer, b - inner, &mut out);
                }
                outer = inner;
            }
            let gexp = self.dim as f64 - 1.0 - self.beta;
            if gexp < 0.0 {
                let kappa = diagonal_coefficient(self.dim, self.beta) * self.dr_target.powf(gexp + 1.0);
                let piece = kappa * outer.powf(gexp + 1.0) / (gexp + 1.0);
                let xs = (st - origin) / h;
                let mut xp = 1.0;
                for o in out.iter_mut() {
                    *o += piece * xp;
                    xp *= xs;
                }
            }
            return out;
        }
        let dist = if st < a {
            a - st
        } else if st > b {
            st - b
        } else {
            // interior singularity: split
            let left = self.moments(a, st, origin, h);
            let right = self.moments(st, b, origin, h);
            for p in 0..STENCIL {
                out[p] = left[p] + right[p];
            }
            return out;
        };
        if dist >= len {
            add_panel(a, b, &mut out);
            return out;
        }
        // panels of width dist, 2 dist, 4 dist, … from the end nearest the singularity
        let mut width = dist;
        let mut covered = 0.0;
        while covered < len {
            let w = width.min(len - covered);
            if st < a {
                add_panel(a + covered, a + covered + w, &mut out);
            } else {
                add_panel(b - covered - w, b - covered, &mut out);
            }
            covered += w;
            width *= 2.0;
        }
        out
    }
}

/// Sector-ℓ convolution operator with kernel `|x − y|^{−β}` on a radial grid.
#[derive(Debug, Clone)]
pub struct SectorKernel {
    exponent: f64,
    ell: usize,
    grid: Arc<RadialGrid>,
    /// Row-major `M × M`: `(A f)(r_i) = Σ_j op[i][j] f_j`, where
    /// `(A f)(r) = ∫ A_ℓ(r, s) f(s) s^{N−1} ds`.
    operator: Vec<f64>,
}

/// Assemble the sector kernel of `|x−y|^{−β}` for degree `ell` on `grid`.
pub fn sector_kernel(grid: &Arc<RadialGrid>, beta: f64, ell: usize) -> Result<SectorKernel> {
    let n = grid.dim();
    if n < 3 {
        return Err(Error::ParameterDomain(format!("dimension must be ≥ 3, got {n}")));
    }
    if !(beta > 0.0 && beta < n as f64) {
        return Err(Error::ParameterDomain(format!(
            "kernel exponent must satisfy 0 < beta < N, got beta = {beta} with N = {n}"
        )));
    }
    if let Some(dir) = cache_dir() {
        let path = cache_path(&dir, grid, beta, ell);
        if path.exists() {
            match SectorKernel::load(&path, grid, beta, ell) {
                Ok(k) => return Ok(k),
                Err(e) => log::warn!("ignoring unusable kernel cache {}: {e}", path.display()),
            }
        }
        let k = assemble(grid, beta, ell)?;
        if let Err(e) = std::fs::create_dir_all(&dir).map_err(Error::from).and_then(|_| k.save(&path)) {
            log::warn!("could not write kernel cache {}: {e}", path.display());
        }
        return Ok(k);
    }
    assemble(grid, beta, ell)
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn cache_path(dir: &Path, grid: &RadialGrid, beta: f64, ell: usize) -> PathBuf {
    dir.join(format!(
        "kernel_n{}_l{}_m{}_b{:016x}_g{:016x}.bin",
        grid.dim(),
        ell,
        grid.len(),
        beta.to_bits(),
        grid.hash()
    ))
}

fn assemble(grid: &Arc<RadialGrid>, beta: f64, ell: usize) -> Result<SectorKernel> {
    let operator = match grid.mapping() {
        Mapping::Log => assemble_log(grid, beta, ell),
        Mapping::Algebraic => assemble_generic(grid, beta, ell),
    };
    if let Some(pos) = operator.iter().position(|v| !v.is_finite()) {
        let m = grid.len();
        return Err(Error::QuadratureNonconvergence(format!(
            "non-finite kernel moment at row {}, column {}",
            pos / m,
            pos % m
        )));
    }
    Ok(SectorKernel {
        exponent: beta,
        ell,
        grid: Arc::clone(grid),
        operator,
    })
}

fn assemble_log(grid: &Arc<RadialGrid>, beta: f64, ell: usize) -> Vec<f64> {
    let m = grid.len();
    let n = grid.dim();
    let h = grid.step();
    let ctx = MomentContext {
        dim: n,
        beta,
        ell,
        geometry: Geometry::UnitLog,
        s_target: 0.0,
        dr_target: 1.0,
    };
    // moments for offsets d = −M ..= M−2, interval [d h, (d+1) h]
    let offsets: Vec<isize> = (-(m as isize)..=(m as isize - 2)).collect();
    let moments: Vec<[f64; STENCIL]> = offsets
        .par_iter()
        .map(|&d| {
            let a = d as f64 * h;
            let b = if d == -1 { 0.0 } else { (d + 1) as f64 * h };
            let a = if d == 0 { 0.0 } else { a };
            ctx.moments(a, b, a, h)
        })
        .collect();
    let mom = |d: isize| &moments[(d + m as isize) as usize];
    // cap below the first node: ∫_{−∞}^{−i h} H(u) du, with f held at f_0
    let tail_u = -(m as f64) * h;
    let tail = ctx.integrand(tail_u) / (n + ell) as f64;
    let mut cap = vec![0.0; m];
    let mut acc = tail;
    for i in (0..m).rev() {
        // add interval [−(i+1)h, −ih]
        acc += mom(-(i as isize) - 1)[0];
        cap[i] = acc;
    }
    let stencils: Vec<(usize, [[f64; STENCIL]; STENCIL])> = (0..m as isize - 1)
        .map(|k| {
            let start = grid.stencil_start(k);
            (start, lagrange_monomials(start as f64 - k as f64))
        })
        .collect();
    let nodes = grid.nodes();
    let mut op = vec![0.0; m * m];
    op.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        for (k, (start, coef)) in stencils.iter().enumerate() {
            let mo = mom(k as isize - i as isize);
            for (j, c) in coef.iter().enumerate() {
                let v: f64 = (0..STENCIL).map(|p| c[p] * mo[p]).sum();
                row[start + j] += v;
            }
        }
        row[0] += cap[i];
        let scale = nodes[i].powf(n as f64 - beta);
        for v in row.iter_mut() {
            *v *= scale;
        }
    });
    op
}

fn assemble_generic(grid: &Arc<RadialGrid>, beta: f64, ell: usize) -> Vec<f64> {
    let m = grid.len();
    let h = grid.step();
    let intervals: Vec<isize> = grid.interval_range().collect();
    let mut op = vec![0.0; m * m];
    op.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let s_t = grid.s_at(i as f64);
        let ctx = MomentContext {
            dim: grid.dim(),
            beta,
            ell,
            geometry: Geometry::Grid(grid, s_t),
            s_target: s_t,
            dr_target: grid.dr(s_t),
        };
        for &k in &intervals {
            let (a, b) = grid.interval_bounds(k);
            let origin = if k < 0 { grid.s_at(-1.0) } else { a };
            let mo = ctx.moments(a, b, origin, h);
            let start = grid.stencil_start(k);
            let coef = lagrange_monomials(start as f64 - if k < 0 { -1.0 } else { k as f64 });
            for (j, c) in coef.iter().enumerate() {
                row[start + j] += (0..STENCIL).map(|p| c[p] * mo[p]).sum::<f64>();
            }
        }
    });
    op
}

impl SectorKernel {
    pub fn exponent(&self) -> f64 {
        self.exponent
    }
    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Discrete operator `f ↦ ∫ A_ℓ(r_i, s) f(s) s^{N−1} ds`, row-major.
    pub fn operator(&self) -> &[f64] {
        &self.operator
    }

    /// Kernel value `K_ℓ(r, s) = A_ℓ(r, s)/ω_{N−1}`.
    pub fn kernel_value(&self, r: f64, s: f64) -> f64 {
        let n = self.grid.dim();
        sector_profile(n, self.exponent, self.ell, r, s) / sphere_area(n)
    }

    /// Nodal matrix `K_ℓ(r_i, r_j)`; diagonal entries are `+∞` when the
    /// kernel is not locally bounded.
    pub fn nodal_matrix(&self) -> Vec<f64> {
        let nodes = self.grid.nodes();
        let m = nodes.len();
        let mut out = vec![0.0; m * m];
        out.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
            for (j, cell) in row.iter_mut().enumerate() {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                *cell = self.kernel_value(nodes[a], nodes[b]);
            }
        });
        out
    }

    /// Apply the unnormalized sector convolution to nodal values.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let m = self.len();
        assert_eq!(values.len(), m, "vector length must match the grid");
        self.operator
            .par_chunks(m)
            .map(|row| row.iter().zip(values).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Write the operator to `path` (header + row-major little-endian f64).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(40 + 8 * self.operator.len());
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.grid.dim() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.ell as u32).to_le_bytes());
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        buf.extend_from_slice(&self.exponent.to_le_bytes());
        buf.extend_from_slice(&self.grid.hash().to_le_bytes());
        for v in &self.operator {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Read an operator written by [`SectorKernel::save`], checking that it
    /// belongs to `grid`, `beta` and `ell`.
    pub fn load(path: &Path, grid: &Arc<RadialGrid>, beta: f64, ell: usize) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let m = grid.len();
        let header = 4 + 4 + 4 + 4 + 8 + 8 + 8;
        if bytes.len() != header + 8 * m * m || &bytes[..4] != CACHE_MAGIC {
            return Err(Error::Cache(format!("{} has the wrong size or magic", path.display())));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        if u32_at(4) != CACHE_VERSION {
            return Err(Error::Cache("unsupported cache version".into()));
        }
        if u32_at(8) as usize != grid.dim()
            || u32_at(12) as usize != ell
            || u64_at(16) as usize != m
            || u64_at(24) != beta.to_bits()
            || u64_at(32) != grid.hash()
        {
            return Err(Error::Cache(format!(
                "{} was built for a different grid or kernel",
                path.display()
            )));
        }
        let operator = bytes[header..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            exponent: beta,
            ell,
            grid: Arc::clone(grid),
            operator,
        })
    }
}

/// Convolve sector data with a prebuilt kernel; `prefactor` multiplies the result.
pub fn apply_kernel(kernel: &SectorKernel, f: &RadialFunction, prefactor: f64) -> Result<RadialFunction> {
    if !kernel.grid().same_as(f.grid()) {
        return Err(Error::GridMismatch);
    }
    let v = kernel.apply(f.values());
    RadialFunction::new(Arc::clone(f.grid()), v.into_iter().map(|x| prefactor * x).collect())
}

fn riesz_prefactor(p: &ProblemParams, normalized: bool) -> f64 {
    if normalized {
        riesz_normalization(p)
    } else {
        1.0
    }
}

fn check_dim(p: &ProblemParams, f: &RadialFunction) -> Result<()> {
    p.require_nonlocal()?;
    if f.grid().dim() != p.dim() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `I_μ ∗ f` (normalized) or `|x|^{−μ} ∗ f` for a radial profile.
pub fn riesz_convolve(p: &ProblemParams, f: &RadialFunction, normalized: bool) -> Result<RadialFunction> {
    sector_convolve(p, f, 0, normalized)
}

/// Sector-ℓ version of [`riesz_convolve`].
pub fn sector_convolve(
    p: &ProblemParams,
    f: &RadialFunction,
    ell: usize,
    normalized: bool,
) -> Result<RadialFunction> {
    check_dim(p, f)?;
    let k = sector_kernel(f.grid(), p.mu(), ell)?;
    apply_kernel(&k, f, riesz_prefactor(p, normalized))
}

/// `|x|^{2−N} ∗ f`, without any Green constant.
pub fn newtonian_potential(f: &RadialFunction) -> Result<RadialFunction> {
    let n = f.grid().dim();
    let k = sector_kernel(f.grid(), n as f64 - 2.0, 0)?;
    apply_kernel(&k, f, 1.0)
}

/// Green constant `Γ(N/2 − 1)/(4π^{N/2})` of `−Δ` in ℝ^N.
pub fn green_constant(n: usize) -> f64 {
    gamma(0.5 * n as f64 - 1.0) / (4.0 * PI.powf(0.5 * n as f64))
}

/// `c_N |x|^{2−N} ∗ f`, the solution of `−Δw = f` decaying at infinity.
pub fn newtonian_potential_green(f: &RadialFunction) -> Result<RadialFunction> {
    let c = green_constant(f.grid().dim());
    Ok(newtonian_potential(f)?.scale(c))
}

/// `‖I_μ ∗ f − f‖₂ / ‖f‖₂`.
pub fn riesz_identity_gap(p: &ProblemParams, f: &RadialFunction) -> Result<f64> {
    let conv = riesz_convolve(p, f, true)?;
    let diff = conv.zip_with(f, |a, b| a - b)?;
    let den = lp_norm(f, 2.0)?;
    if den == 0.0 {
        return Err(Error::Domain("identity gap of the zero function".into()));
    }
    Ok(lp_norm(&diff, 2.0)? / den)
}

/// Relative spread `(max − min)/max` of `(I_μ ∗ U₀^{2*_μ})(r) (t² + r²)^{μ/2}`
/// over the nodes with `r ≤ 10 t`, for the unit-amplitude bubble of width `t`
/// on `grid`. The product is constant for the exact extremal.
pub fn extremal_spread(p: &ProblemParams, grid: &Arc<RadialGrid>, t: f64) -> Result<f64> {
    p.require_nonlocal()?;
    if grid.dim() != p.dim() {
        return Err(Error::GridMismatch);
    }
    let n = p.dim();
    let pw = p.two_star_mu();
    let f = RadialFunction::from_fn(grid, |r| crate::bubbles::bubble_profile(n, 1.0, t, r).powf(pw));
    let conv = riesz_convolve(p, &f, true)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&r, &v) in grid.nodes().iter().zip(conv.values()) {
        if r <= 10.0 * t {
            let q = v * (t * t + r * r).powf(0.5 * p.mu());
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    if !(hi > 0.0) {
        return Err(Error::Domain("no grid node inside [0, 10t]".into()));
    }
    Ok((hi - lo) / hi)
}

/// Both sides of the conformal HLS inequality: `(∬ f(x)h(y)|x−y|^{−μ}, C(N,μ)|f|_t|h|_t)`.
pub fn hls_check(p: &ProblemParams, f: &RadialFunction, h: &RadialFunction) -> Result<(f64, f64)> {
    check_dim(p, f)?;
    f.check_same_grid(h)?;
    if f.values().iter().chain(h.values()).any(|v| *v < 0.0) {
        return Err(Error::Domain("HLS check needs nonnegative profiles".into()));
    }
    let conv = riesz_convolve(p, f, false)?;
    let lhs = conv.zip_with(h, |a, b| a * b)?.integrate();
    let n = p.dim() as f64;
    let t = 2.0 * n / (2.0 * n - p.mu());
    let rhs = hls_sharp_constant(p) * lp_norm(f, t)? * lp_norm(h, t)?;
    Ok((lhs, rhs))
}

/// Exponent `s` with `1/r − 1/s = (N − μ)/N`, or an error if none exists.
pub fn riesz_target_exponent(p: &ProblemParams, r_exp: f64) -> Result<f64> {
    let n = p.dim() as f64;
    let inv = 1.0 / r_exp - (n - p.mu()) / n;
    if !(r_exp >= 1.0) || !(inv > 0.0) {
        return Err(Error::ExponentRelation(format!(
            "need 1 ≤ r and 1/r > (N−μ)/N, got r = {r_exp}, (N−μ)/N = {}",
            (n - p.mu()) / n
        )));
    }
    Ok(1.0 / inv)
}

/// `‖I_μ ∗ f‖_s / ‖f‖_r` with `1/r − 1/s = (N − μ)/N`.
pub fn riesz_bound_ratio(p: &ProblemParams, f: &RadialFunction, r_exp: f64) -> Result<f64> {
    let s = riesz_target_exponent(p, r_exp)?;
    let conv = riesz_convolve(p, f, true)?;
    let den = lp_norm(f, r_exp)?;
    if den == 0.0 {
        return Err(Error::Domain("ratio undefined for the zero function".into()));
    }
    Ok(lp_norm(&conv, s)? / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_3d(beta: f64, r: f64, s: f64) -> f64 {
        if (beta - 2.0).abs() < 1e-15 {
            ((r + s) / (r - s).abs()).ln() / (2.0 * r * s)
        } else {
            ((r + s).powf(2.0 - beta) - (r - s).abs().powf(2.0 - beta)) / (2.0 * r * s * (2.0 - beta))
        }
    }

    #[test]
    fn angular_profile_matches_closed_forms() {
        for beta in [0.5, 1.0, 2.0, 2.5, 2.9] {
            for (r, s) in [(1.0, 0.3), (1.0, 0.999), (2.0, 7.0), (1.0, 1.0 - 1e-9)] {
                let got = sector_profile(3, beta, 0, r, s) / (4.0 * PI);
                let want = closed_form_3d(beta, r, s);
                assert!((got - want).abs() / want < 1e-11, "beta={beta} r={r} s={s}: {got} {want}");
            }
        }
    }

    #[test]
    fn diagonal_value_is_finite_below_codimension_one() {
        // N=3, β=1: K_0(r,r) = 1/r
        let v = sector_profile(3, 1.0, 0, 2.0, 2.0) / (4.0 * PI);
        assert!((v - 0.5).abs() < 1e-10);
        assert!(sector_profile(3, 2.5, 0, 1.0, 1.0).is_infinite());
    }

    #[test]
    fn diagonal_coefficient_matches_three_dimensional_expansion() {
        // N=3: A_0(1,s) ≈ 4π |1−s|^{2−β}/(2−β)·(1/2)… check κ through the closed form
        let beta = 2.5;
        let d: f64 = 1e-7;
        let exact = closed_form_3d(beta, 1.0, 1.0 + d) * 4.0 * PI;
        let approx = diagonal_coefficient(3, beta) * d.powf(2.0 - beta);
        assert!((exact - approx).abs() / exact < 1e-3);
    }

    #[test]
    fn parameter_validation() {
        let g = Arc::new(crate::radial::make_grid(3, 10.0, 32, Mapping::Log).unwrap());
        assert!(sector_kernel(&g, 0.0, 0).is_err());
        assert!(sector_kernel(&g, 3.0, 0).is_err());
    }
}
