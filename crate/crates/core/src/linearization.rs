//! The linearized operator at the bubble, sector by sector, and the
//! nondegeneracy verdict built from its spectra.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bubbles::{bubble_profile, bubble_profile_dr, bubble_profile_dt, umu_amplitude, BubbleParams};
use crate::constants::{riesz_normalization, standard_bubble_amplitude, ProblemParams};
use crate::error::{Error, Result};
use crate::radial::RadialGrid;
use crate::riesz::sector_kernel;
use crate::special::harmonic_multiplicity;

/// Quadratic forms of the linearized operator (`a`) and of the Dirichlet
/// energy (`b`) on one spherical-harmonic sector, in nodal values.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    pub ell: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub params: ProblemParams,
    pub grid: Arc<RadialGrid>,
}

impl SectorOperator {
    /// `‖A − Aᵀ‖_F / ‖A‖_F`.
    pub fn asymmetry(&self) -> f64 {
        (&self.a - self.a.transpose()).norm() / self.a.norm()
    }
}

/// The bubble `U_μ` of width `t` centred at the origin.
pub fn umu_bubble(p: &ProblemParams, t: f64) -> Result<BubbleParams> {
    BubbleParams::new(umu_amplitude(p)?, t, vec![0.0; p.dim()])
}

fn check_setup(p: &ProblemParams, b: &BubbleParams, grid: &RadialGrid) -> Result<()> {
    p.require_nonlocal()?;
    if grid.dim() != p.dim() || b.dim() != p.dim() {
        return Err(Error::GridMismatch);
    }
    if b.center.iter().any(|c| *c != 0.0) {
        log::warn!("sector decomposition uses the origin; the bubble center is ignored");
    }
    if !(3..=4).contains(&p.dim()) {
        log::warn!("nondegeneracy is only established for N = 3 (and claimed for N = 4); N = {} is exploratory", p.dim());
    }
    Ok(())
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// `A = B − 2*_μ W_ℓ − (2*_μ − 1) P` at the bubble `b` on `grid`.
pub fn assemble_sector(
    p: &ProblemParams,
    b: &BubbleParams,
    ell: usize,
    grid: &Arc<RadialGrid>,
) -> Result<SectorOperator> {
    check_setup(p, b, grid)?;
    let n = p.dim();
    let m = grid.len();
    let pw = p.two_star_mu();
    let nodes = grid.nodes();
    let w = grid.weights();
    let omega = grid.surface();
    let pref = riesz_normalization(p);
    let u: Vec<f64> = nodes.iter().map(|&r| bubble_profile(n, b.amplitude, b.width, r)).collect();
    let up1: Vec<f64> = u.iter().map(|x| x.powf(pw - 1.0)).collect();

    let k0 = sector_kernel(grid, p.mu(), 0)?;
    let potential: Vec<f64> = k0
        .apply(&u.iter().map(|x| x.powf(pw)).collect::<Vec<_>>())
        .into_iter()
        .map(|x| pref * x)
        .collect();
    let kl = if ell == 0 { k0 } else { sector_kernel(grid, p.mu(), ell)? };
    let q = kl.operator();

    let bmat = grid.sector_form_matrix(ell);
    let mut wmat = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let left = pref * omega * w[i] * up1[i];
        if left == 0.0 {
            continue;
        }
        for j in 0..m {
            wmat[(i, j)] = left * q[i * m + j] * up1[j];
        }
    }
    symmetrize(&mut wmat);
    let mut a = bmat.clone() - wmat * pw;
    for i in 0..m {
        a[(i, i)] -= (pw - 1.0) * omega * w[i] * potential[i] * u[i].powf(pw - 2.0);
    }
    Ok(SectorOperator {
        ell,
        a,
        b: bmat,
        params: *p,
        grid: Arc::clone(grid),
    })
}

/// Local operator `−Δ − p U₀^{p−1}` with `p = (N+2)/(N−2)` at the standard
/// bubble of width `t`, on sector `ell`.
pub fn assemble_local_sector(n: usize, t: f64, ell: usize, grid: &Arc<RadialGrid>) -> Result<SectorOperator> {
    let params = ProblemParams::local_limit(n)?;
    if grid.dim() != n {
        return Err(Error::GridMismatch);
    }
    let p_loc = (n as f64 + 2.0) / (n as f64 - 2.0);
    let amp = standard_bubble_amplitude(n);
    let bmat = grid.sector_form_matrix(ell);
    let mut a = bmat.clone();
    let w = grid.weights();
    let omega = grid.surface();
    for (i, &r) in grid.nodes().iter().enumerate() {
        a[(i, i)] -= p_loc * omega * w[i] * bubble_profile(n, amp, t, r).powf(p_loc - 1.0);
    }
    Ok(SectorOperator {
        ell,
        a,
        b: bmat,
        params,
        grid: Arc::clone(grid),
    })
}

/// Eigenpairs of the pencil `A x = λ B x`, ascending.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub ell: usize,
    pub values: Vec<f64>,
    /// Columns are `B`-orthonormal eigenvectors in nodal values.
    pub vectors: DMatrix<f64>,
}

struct Pencil {
    scale: DVector<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl Pencil {
    fn new(op: &SectorOperator) -> Result<Self> {
        let scale = DVector::from_iterator(op.b.nrows(), op.b.diagonal().iter().map(|d| 1.0 / d.sqrt()));
        if scale.iter().any(|s| !s.is_finite()) {
            return Err(Error::EigenBreakdown("Dirichlet matrix has a nonpositive diagonal".into()));
        }
        let bs = scaled(&op.b, &scale);
        let chol = bs
            .cholesky()
            .ok_or_else(|| Error::EigenBreakdown(format!("Dirichlet matrix of sector {} is not positive definite", op.ell)))?;
        Ok(Self { scale, chol })
    }

    /// `B⁻¹ r` for a residual vector `r`.
    fn solve_b(&self, r: &DVector<f64>) -> DVector<f64> {
        let rs = r.component_mul(&self.scale);
        self.chol.solve(&rs).component_mul(&self.scale)
    }
}

fn scaled(m: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out[(i, j)] *= s[i] * s[j];
        }
    }
    out
}

/// The `k` smallest eigenpairs of the symmetric pencil of `op`.
pub fn sector_spectrum(op: &SectorOperator, k: usize) -> Result<SectorSpectrum> {
    let m = op.a.nrows();
    if k > m {
        return Err(Error::ParameterDomain(format!("requested {k} eigenvalues of a {m}×{m} pencil")));
    }
    let pencil = Pencil::new(op)?;
    let l = pencil.chol.l();
    let a_s = scaled(&op.a, &pencil.scale);
    // C = L⁻¹ A_s L⁻ᵀ
    let y = l
        .solve_lower_triangular(&a_s)
        .ok_or_else(|| Error::EigenBreakdown("triangular solve failed".into()))?;
    let mut c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::EigenBreakdown("triangular solve failed".into()))?;
    symmetrize(&mut c);
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenBreakdown(format!("symmetric eigensolver failed on sector {}", op.ell)))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut vectors = DMatrix::<f64>::zeros(m, k);
    let mut values = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[idx];
        if !lambda.is_finite() {
            return Err(Error::EigenBreakdown(format!("non-finite eigenvalue in sector {}", op.ell)));
        }
        values.push(lambda);
        let z = lt
            .solve_upper_triangular(&eig.eigenvectors.column(idx).into_owned())
            .ok_or_else(|| Error::EigenBreakdown("triangular solve failed".into()))?;
        vectors.set_column(col, &z.component_mul(&pencil.scale));
    }
    Ok(SectorSpectrum {
        ell: op.ell,
        values,
        vectors,
    })
}

/// `‖A ψ‖_{B⁻¹} / ‖ψ‖_B`.
pub fn dual_residual(op: &SectorOperator, psi: &[f64]) -> Result<f64> {
    let pencil = Pencil::new(op)?;
    let v = DVector::from_column_slice(psi);
    let r = &op.a * &v;
    let num = r.dot(&pencil.solve_b(&r));
    let den = v.dot(&(&op.b * &v));
    Ok((num.max(0.0) / den).sqrt())
}

/// Cosine similarity in the `B` inner product.
pub fn b_similarity(b: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let xv = DVector::from_column_slice(x);
    let yv = DVector::from_column_slice(y);
    let bx = b * &xv;
    let by = b * &yv;
    (bx.dot(&yv)).abs() / (xv.dot(&bx) * yv.dot(&by)).sqrt()
}

/// Nodal profile of `∂_t U`.
pub fn dilation_tangent(p: &ProblemParams, b: &BubbleParams, grid: &RadialGrid) -> Vec<f64> {
    let n = p.dim();
    grid.nodes().iter().map(|&r| bubble_profile_dt(n, b.amplitude, b.width, r)).collect()
}

/// Nodal profile of `U′(r)`, the radial factor of `∂_i U`.
pub fn translation_tangent(p: &ProblemParams, b: &BubbleParams, grid: &RadialGrid) -> Vec<f64> {
    let n = p.dim();
    grid.nodes().iter().map(|&r| bubble_profile_dr(n, b.amplitude, b.width, r)).collect()
}

/// Residuals of the linearized equation on `∂_t U` (sector 0) and `U′` (sector 1).
pub fn tangent_residual(p: &ProblemParams, b: &BubbleParams, grid: &Arc<RadialGrid>) -> Result<(f64, f64)> {
    let a0 = assemble_sector(p, b, 0, grid)?;
    let a1 = assemble_sector(p, b, 1, grid)?;
    tangent_residual_with(&a0, &a1, b)
}

fn tangent_residual_with(a0: &SectorOperator, a1: &SectorOperator, b: &BubbleParams) -> Result<(f64, f64)> {
    let p = &a0.params;
    Ok((
        dual_residual(a0, &dilation_tangent(p, b, &a0.grid))?,
        dual_residual(a1, &translation_tangent(p, b, &a1.grid))?,
    ))
}

/// Options of [`nondegeneracy_report`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub ell_max: usize,
    /// Zero tolerance; `None` calibrates it as ten times the larger tangent residual.
    pub tau: Option<f64>,
    /// Number of smallest eigenvalues reported per sector.
    pub keep: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            ell_max: 6,
            tau: None,
            keep: 6,
        }
    }
}

/// Spectrum summary of one sector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectorSummary {
    pub ell: usize,
    pub multiplicity: usize,
    /// Smallest eigenvalues of the pencil, ascending.
    pub eigenvalues: Vec<f64>,
    pub zero_mode_count: usize,
    /// `B`-similarity of the zero modes with the analytic tangent profile
    /// (sectors 0 and 1 only).
    pub tangent_similarity: Vec<f64>,
    /// Eigenvalues with `τ ≤ |λ| ≤ 3τ`.
    pub ambiguous: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Nondegenerate,
    Degenerate,
    Inconclusive,
}

/// Aggregated nondegeneracy verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub params: ProblemParams,
    pub grid_size: usize,
    pub tau: f64,
    pub tangent_residual_t: f64,
    pub tangent_residual_x: f64,
    pub sectors: Vec<SectorSummary>,
    pub kernel_dimension: usize,
    pub nondegenerate: bool,
    pub verdict: Verdict,
    /// Set for configurations outside `N = 3`.
    pub experimental: bool,
}

/// Spectra of sectors `0..=ell_max` and the resulting kernel dimension.
pub fn nondegeneracy_report(
    p: &ProblemParams,
    b: &BubbleParams,
    grid: &Arc<RadialGrid>,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    if opts.ell_max < 2 {
        return Err(Error::ParameterDomain("ell_max must be at least 2".into()));
    }
    check_setup(p, b, grid)?;
    let n = p.dim();
    let ops = (0..=opts.ell_max)
        .into_par_iter()
        .map(|ell| assemble_sector(p, b, ell, grid))
        .collect::<Result<Vec<_>>>()?;
    let (res_t, res_x) = tangent_residual_with(&ops[0], &ops[1], b)?;
    let tau = opts.tau.unwrap_or(10.0 * res_t.max(res_x));
    if !(tau > 0.0) {
        return Err(Error::ParameterDomain(format!("zero tolerance must be positive, got {tau}")));
    }
    let keep = opts.keep.max(3).min(grid.len());
    let tangents = [dilation_tangent(p, b, grid), translation_tangent(p, b, grid)];
    let sectors = ops
        .par_iter()
        .map(|op| -> Result<SectorSummary> {
            let spec = sector_spectrum(op, keep)?;
            let mut zero = 0;
            let mut sims = Vec::new();
            let mut ambiguous = Vec::new();
            for (k, &lam) in spec.values.iter().enumerate() {
                if lam.abs() < tau {
                    zero += 1;
                    if op.ell < 2 {
                        let v: Vec<f64> = spec.vectors.column(k).iter().copied().collect();
                        sims.push(b_similarity(&op.b, &v, &tangents[op.ell]));
                    }
                } else if lam.abs() <= 3.0 * tau {
                    ambiguous.push(lam);
                }
            }
            Ok(SectorSummary {
                ell: op.ell,
                multiplicity: harmonic_multiplicity(n, op.ell),
                eigenvalues: spec.values,
                zero_mode_count: zero,
                tangent_similarity: sims,
                ambiguous,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kernel_dimension = sectors.iter().map(|s| s.zero_mode_count * s.multiplicity).sum();
    let structure = sectors.iter().all(|s| match s.ell {
        0 | 1 => s.zero_mode_count == 1,
        _ => s.zero_mode_count == 0,
    });
    let nondegenerate = kernel_dimension == n + 1 && structure;
    let verdict = if sectors.iter().any(|s| !s.ambiguous.is_empty()) {
        Verdict::Inconclusive
    } else if nondegenerate {
        Verdict::Nondegenerate
    } else {
        Verdict::Degenerate
    };
    Ok(SpectrumReport {
        params: *p,
        grid_size: grid.len(),
        tau,
        tangent_residual_t: res_t,
        tangent_residual_x: res_x,
        sectors,
        kernel_dimension,
        nondegenerate,
        verdict,
        experimental: n != 3,
    })
}

impl SpectrumReport {
    /// Write `ell,mu,lambda_1,lambda_2,lambda_3` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ell", "mu", "lambda_1", "lambda_2", "lambda_3"])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for s in &self.sectors {
            let mut rec = vec![s.ell.to_string(), self.params.mu().to_string()];
            rec.extend(s.eigenvalues.iter().take(3).map(|v| v.to_string()));
            w.write_record(&rec).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }
}
