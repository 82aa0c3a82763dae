//! The bubble family, the HLS extremal, tangent fields and bubble fitting.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::{bubble_amplitude, standard_bubble_amplitude, ProblemParams};
use crate::error::{Error, Result};

/// Amplitude `c`, width `t` and center `ξ` of a bubble
/// `c (t/(t² + |x−ξ|²))^{(N−2)/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub amplitude: f64,
    pub width: f64,
    pub center: Vec<f64>,
}

impl BubbleParams {
    pub fn new(amplitude: f64, width: f64, center: Vec<f64>) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::ParameterDomain(format!("amplitude must be positive, got {amplitude}")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::ParameterDomain(format!("width must be positive, got {width}")));
        }
        if center.len() < 3 || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::ParameterDomain(
                "center needs at least 3 finite coordinates".into(),
            ));
        }
        Ok(Self {
            amplitude,
            width,
            center,
        })
    }

    /// The standard bubble `U_0` with width `t` centered at the origin of ℝ^N.
    pub fn standard(n: usize, width: f64) -> Result<Self> {
        Self::new(standard_bubble_amplitude(n), width, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn dist2(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.center.len());
        x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

fn half_exponent(n: usize) -> f64 {
    0.5 * (n as f64 - 2.0)
}

/// `c (t/(t² + r²))^{(N−2)/2}`.
pub fn bubble_profile(n: usize, amplitude: f64, t: f64, r: f64) -> f64 {
    amplitude * (t / (t * t + r * r)).powf(half_exponent(n))
}

/// Radial derivative of [`bubble_profile`].
pub fn bubble_profile_dr(n: usize, amplitude: f64, t: f64, r: f64) -> f64 {
    let q = half_exponent(n);
    -2.0 * q * amplitude * t.powf(q) * r * (t * t + r * r).powf(-q - 1.0)
}

/// Derivative of [`bubble_profile`] with respect to the width.
pub fn bubble_profile_dt(n: usize, amplitude: f64, t: f64, r: f64) -> f64 {
    let q = half_exponent(n);
    amplitude * q * t.powf(q - 1.0) * (r * r - t * t) * (t * t + r * r).powf(-q - 1.0)
}

/// Total amplitude of `U_μ`: the minimizer prefactor times `[N(N−2)]^{(N−2)/4}`.
pub fn umu_amplitude(p: &ProblemParams) -> Result<f64> {
    Ok(bubble_amplitude(p)? * standard_bubble_amplitude(p.dim()))
}

/// Value of the bubble with the parameters' own amplitude.
pub fn eval_u0(b: &BubbleParams, x: &[f64]) -> f64 {
    let t = b.width;
    b.amplitude * (t / (t * t + b.dist2(x))).powf(half_exponent(b.dim()))
}

/// Value of `U_μ` with width and center from `b`; `b.amplitude` is ignored.
pub fn eval_umu(p: &ProblemParams, b: &BubbleParams, x: &[f64]) -> Result<f64> {
    check_dim(p, b)?;
    let a = umu_amplitude(p)?;
    let t = b.width;
    Ok(a * (t / (t * t + b.dist2(x))).powf(half_exponent(b.dim())))
}

fn check_dim(p: &ProblemParams, b: &BubbleParams) -> Result<()> {
    if b.dim() != p.dim() {
        return Err(Error::ParameterDomain(format!(
            "bubble center has {} coordinates but N = {}",
            b.dim(),
            p.dim()
        )));
    }
    Ok(())
}

/// HLS extremal `A (γ² + |x−a|²)^{−(2N−μ)/2}`.
pub fn hls_extremal(gamma: f64, a: &[f64], amp: f64, x: &[f64], p: &ProblemParams) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::ParameterDomain("extremal needs gamma ≠ 0".into()));
    }
    let d2: f64 = x.iter().zip(a).map(|(u, v)| (u - v) * (u - v)).sum();
    let n = p.dim() as f64;
    Ok(amp * (gamma * gamma + d2).powf(-(2.0 * n - p.mu()) / 2.0))
}

/// ∂U_μ/∂t in closed form.
pub fn tangent_dt(p: &ProblemParams, b: &BubbleParams, x: &[f64]) -> Result<f64> {
    check_dim(p, b)?;
    let a = umu_amplitude(p)?;
    Ok(bubble_profile_dt(p.dim(), a, b.width, b.dist2(x).sqrt()))
}

/// ∂U_μ/∂x_i in closed form, with `axis` counted from zero.
pub fn tangent_di(p: &ProblemParams, b: &BubbleParams, x: &[f64], axis: usize) -> Result<f64> {
    check_dim(p, b)?;
    if axis >= p.dim() {
        return Err(Error::ParameterDomain(format!(
            "axis {axis} out of range for N = {}",
            p.dim()
        )));
    }
    let a = umu_amplitude(p)?;
    let q = half_exponent(p.dim());
    let t = b.width;
    Ok(-2.0 * q * a * t.powf(q) * (x[axis] - b.center[axis]) * (t * t + b.dist2(x)).powf(-q - 1.0))
}

const FIT_MAX_ITER: usize = 200;

/// Least-squares fit of `c (t/(t²+|x−x₀|²))^{(N−2)/2}` in log space.
///
/// Returns the fitted parameters and the RMS of the log residuals.
pub fn fit_bubble(samples: &[(Vec<f64>, f64)]) -> Result<(BubbleParams, f64)> {
    let n = samples
        .first()
        .map(|s| s.0.len())
        .ok_or_else(|| Error::FitSingular("no samples".into()))?;
    if n < 3 {
        return Err(Error::ParameterDomain("samples need at least 3 coordinates".into()));
    }
    if samples.iter().any(|s| s.0.len() != n) {
        return Err(Error::ParameterDomain("samples have inconsistent dimensions".into()));
    }
    if let Some((_, v)) = samples.iter().find(|s| !(s.1 > 0.0) || !s.1.is_finite()) {
        return Err(Error::Domain(format!("bubble fit needs positive samples, found {v}")));
    }
    if samples.len() < n + 3 {
        return Err(Error::FitSingular(format!(
            "need at least {} samples, got {}",
            n + 3,
            samples.len()
        )));
    }
    let q = half_exponent(n);
    let (peak_x, peak) = samples
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(x, v)| (x.clone(), *v))
        .expect("non-empty");

    let mut widths: Vec<f64> = samples
        .iter()
        .filter_map(|(x, v)| {
            let y = (v / peak).powf(1.0 / q);
            let rho2: f64 = x.iter().zip(&peak_x).map(|(a, b)| (a - b) * (a - b)).sum();
            (y > 0.05 && y < 0.95 && rho2 > 0.0).then(|| (y * rho2 / (1.0 - y)).sqrt())
        })
        .collect();
    let t0 = if widths.is_empty() {
        let spread = samples
            .iter()
            .map(|(x, _)| x.iter().zip(&peak_x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .fold(0.0f64, f64::max)
            .sqrt();
        if spread > 0.0 { spread } else { 1.0 }
    } else {
        widths.sort_by(f64::total_cmp);
        widths[widths.len() / 2]
    };

    let np = n + 2;
    let mut theta = DVector::<f64>::zeros(np);
    theta[0] = (peak * t0.powf(q)).ln();
    theta[1] = t0.ln();
    for j in 0..n {
        theta[2 + j] = peak_x[j];
    }
    let logs: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();

    let residuals = |th: &DVector<f64>| -> (DVector<f64>, DMatrix<f64>) {
        let t = th[1].exp();
        let m = samples.len();
        let mut r = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, np);
        for (i, (x, _)) in samples.iter().enumerate() {
            let mut d2 = 0.0;
            for j in 0..n {
                let dx = x[j] - th[2 + j];
                d2 += dx * dx;
            }
            let den = t * t + d2;
            let model = th[0] + q * th[1] - q * den.ln();
            r[i] = logs[i] - model;
            jac[(i, 0)] = -1.0;
            jac[(i, 1)] = -(q - 2.0 * q * t * t / den);
            for j in 0..n {
                jac[(i, 2 + j)] = -2.0 * q * (x[j] - th[2 + j]) / den;
            }
        }
        (r, jac)
    };

    let (mut r, mut jac) = residuals(&theta);
    let sv = jac.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::FitSingular(format!(
            "Jacobian is rank deficient (condition {:.3e}); samples do not determine center and width",
            smax / smin
        )));
    }
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..FIT_MAX_ITER {
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..np {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let cand = &theta + &step;
            let (rc, jc) = residuals(&cand);
            let cc = rc.norm_squared();
            if cc.is_finite() && cc <= cost {
                let small = step.norm() <= 1e-15 * (1.0 + theta.norm());
                theta = cand;
                r = rc;
                jac = jc;
                let rel = (cost - cc) / cost.max(1e-300);
                cost = cc;
                lambda = (lambda / 10.0).max(1e-15);
                improved = !(small || rel < 1e-15 && step.norm() < 1e-12);
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let rms = (cost / samples.len() as f64).sqrt();
    let params = BubbleParams::new(
        theta[0].exp(),
        theta[1].exp(),
        (0..n).map(|j| theta[2 + j]).collect(),
    )?;
    Ok((params, rms))
}

/// Fit of a centered radial profile `c (t/(t²+r²))^{(N−2)/2}` to samples
/// `(r_i, u_i)`; returns `(c, t, log-RMS residual)`.
pub fn fit_radial_profile(n: usize, radii: &[f64], values: &[f64]) -> Result<(f64, f64, f64)> {
    if radii.len() != values.len() || radii.len() < 3 {
        return Err(Error::FitSingular("need at least 3 radial samples".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("radial fit needs positive samples, found {v}")));
    }
    let q = half_exponent(n);
    let peak_i = (0..values.len())
        .max_by(|a, b| values[*a].total_cmp(&values[*b]))
        .expect("non-empty");
    let peak = values[peak_i];
    let mut widths: Vec<f64> = radii
        .iter()
        .zip(values)
        .filter_map(|(&r, &v)| {
            let y = (v / peak).powf(1.0 / q);
            (y > 0.05 && y < 0.95 && r > 0.0).then(|| (y * r * r / (1.0 - y)).sqrt())
        })
        .collect();
    if widths.is_empty() {
        return Err(Error::FitSingular("profile never drops to half height".into()));
    }
    widths.sort_by(f64::total_cmp);
    let mut lt = widths[widths.len() / 2].ln();
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    // c enters linearly in log space: eliminate it in closed form.
    let eval = |lt: f64| -> (f64, f64, f64) {
        let t = lt.exp();
        let mut base = Vec::with_capacity(radii.len());
        for &r in radii {
            base.push(q * lt - q * (t * t + r * r).ln());
        }
        let lc = logs.iter().zip(&base).map(|(l, b)| l - b).sum::<f64>() / radii.len() as f64;
        let cost: f64 = logs.iter().zip(&base).map(|(l, b)| (l - b - lc).powi(2)).sum();
        (lc, cost, t)
    };
    let mut step = 0.5;
    let (_, mut cost, _) = eval(lt);
    while step > 1e-14 {
        let (_, c_plus, _) = eval(lt + step);
        let (_, c_minus, _) = eval(lt - step);
        if c_plus < cost {
            lt += step;
            cost = c_plus;
        } else if c_minus < cost {
            lt -= step;
            cost = c_minus;
        } else {
            step *= 0.5;
        }
    }
    let (lc, cost, t) = eval(lt);
    Ok((lc.exp(), t, (cost / radii.len() as f64).sqrt()))
}
