//! Gamma-function constants of the critical Choquard problem.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{GridSpec, Mapping, RadialGrid};
use crate::special::{gamma, gamma_ratio};

/// Distance to `N` below which `μ` is considered to approach the delta limit.
pub const DELTA_LIMIT_WARNING: f64 = 1e-6;

/// Dimension `N` and Riesz exponent `μ`.
///
/// The upper critical exponent `2*_μ = (2N−μ)/(N−2)` is always recomputed
/// from the two stored values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct ProblemParams {
    n: usize,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    #[serde(rename = "N")]
    n: usize,
    mu: f64,
    #[serde(default, skip_deserializing)]
    two_star_mu: f64,
}

impl TryFrom<ParamsRepr> for ProblemParams {
    type Error = Error;
    fn try_from(r: ParamsRepr) -> Result<Self> {
        ProblemParams::new(r.n, r.mu)
    }
}

impl From<ProblemParams> for ParamsRepr {
    fn from(p: ProblemParams) -> Self {
        ParamsRepr {
            n: p.n,
            mu: p.mu,
            two_star_mu: p.two_star_mu(),
        }
    }
}

impl ProblemParams {
    /// Validated parameters with `N ≥ 3` and `0 < μ < N`.
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::ParameterDomain(format!(
                "dimension N must be at least 3, got N = {n}"
            )));
        }
        if !(mu > 0.0 && mu < n as f64) {
            return Err(Error::ParameterDomain(format!(
                "exponent must satisfy 0 < mu < N, got mu = {mu} with N = {n}"
            )));
        }
        if mu > n as f64 - DELTA_LIMIT_WARNING {
            log::warn!(
                "mu = {mu} is within {DELTA_LIMIT_WARNING:e} of N = {n}; the Riesz kernel is close to its delta limit"
            );
        }
        Ok(Self { n, mu })
    }

    /// The local endpoint `μ = N`, where the Riesz potential degenerates to the
    /// identity. Only constants with a finite limit are meaningful here.
    pub fn local_limit(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::ParameterDomain(format!(
                "dimension N must be at least 3, got N = {n}"
            )));
        }
        Ok(Self { n, mu: n as f64 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_local_limit(&self) -> bool {
        self.mu == self.n as f64
    }

    /// `(2N − μ)/(N − 2)`.
    pub fn two_star_mu(&self) -> f64 {
        let n = self.n as f64;
        (2.0 * n - self.mu) / (n - 2.0)
    }

    /// Sobolev critical exponent `2N/(N−2)`.
    pub fn two_star(&self) -> f64 {
        let n = self.n as f64;
        2.0 * n / (n - 2.0)
    }

    /// Requires `μ < N`, returning a domain error at the local endpoint.
    pub fn require_nonlocal(&self) -> Result<()> {
        if self.is_local_limit() {
            Err(Error::ParameterDomain(
                "operation needs mu < N; the local endpoint has no Riesz kernel".into(),
            ))
        } else {
            Ok(())
        }
    }
}

/// `2*_μ = (2N − μ)/(N − 2)`.
pub fn critical_exponent(p: &ProblemParams) -> f64 {
    p.two_star_mu()
}

/// Coefficient of `|x|^{−μ}` in the Riesz potential `I_μ`.
pub fn riesz_normalization(p: &ProblemParams) -> f64 {
    let n = p.n as f64;
    let mu = p.mu;
    gamma(0.5 * mu) / (gamma(0.5 * (n - mu)) * PI.powf(0.5 * n) * 2f64.powf(n - mu))
}

/// Sharp Hardy–Littlewood–Sobolev constant `C(N, μ)` in the conformal case.
pub fn hls_sharp_constant(p: &ProblemParams) -> f64 {
    let n = p.n as f64;
    let mu = p.mu;
    PI.powf(0.5 * mu)
        * gamma_ratio(0.5 * (n - mu), n - 0.5 * mu)
        * gamma_ratio(n, 0.5 * n).powf((n - mu) / n)
}

/// `C*(N, μ)`, the sharp constant of the normalized Riesz double integral.
pub fn c_star(p: &ProblemParams) -> f64 {
    let n = p.n as f64;
    let mu = p.mu;
    (0.5 / PI.sqrt()).powf(n - mu)
        * gamma_ratio(0.5 * mu, n - 0.5 * mu)
        * gamma_ratio(n, 0.5 * n).powf((n - mu) / n)
}

/// Relative tolerance for the two-resolution Sobolev quadrature.
pub const SOBOLEV_TOLERANCE: f64 = 1e-8;

/// Sobolev constant `S`, computed as the Rayleigh quotient of the standard bubble.
pub fn sobolev_constant(n: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    if n < 3 {
        return Err(Error::ParameterDomain(format!("dimension N must be at least 3, got {n}")));
    }
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("sobolev cache poisoned").get(&n) {
        return Ok(*v);
    }
    let coarse = bubble_sobolev_quotient(n, 1.0, 2048)?;
    let fine = bubble_sobolev_quotient(n, 1.0, 4096)?;
    let drift = (fine - coarse).abs() / fine;
    if !(drift < SOBOLEV_TOLERANCE) {
        return Err(Error::QuadratureNonconvergence(format!(
            "Sobolev quotient changed by {drift:e} under grid doubling (N = {n})"
        )));
    }
    cache.lock().expect("sobolev cache poisoned").insert(n, fine);
    Ok(fine)
}

/// Rayleigh quotient `∫|∇U|² / (∫U^{2*})^{2/2*}` of the width-`t` bubble,
/// using `size` nodes of a logarithmic grid spanning twenty decades around `t`.
pub fn bubble_sobolev_quotient(n: usize, t: f64, size: usize) -> Result<f64> {
    let grid = Arc::new(RadialGrid::new(GridSpec {
        dim: n,
        cutoff: 1e12 * t,
        size,
        mapping: Mapping::Log,
        inner: Some(1e-8 * t),
    })?);
    let q = 0.5 * (n as f64 - 2.0);
    let two_star = 2.0 * n as f64 / (n as f64 - 2.0);
    let grad2: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let d = 2.0 * q * t.powf(q) * r * (t * t + r * r).powf(-q - 1.0);
            d * d
        })
        .collect();
    let pow: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| (t / (t * t + r * r)).powf(q * two_star))
        .collect();
    let num = grid.integrate_values(&grad2);
    let den = grid.integrate_values(&pow).powf(2.0 / two_star);
    Ok(num / den)
}

/// `S*_{H,L} = S / C*^{(N−2)/(2N−μ)}`.
pub fn s_star_hl(p: &ProblemParams) -> Result<f64> {
    let n = p.n as f64;
    Ok(sobolev_constant(p.n)? / c_star(p).powf((n - 2.0) / (2.0 * n - p.mu)))
}

/// Scalar multiplying the standard bubble `U_0` in the minimizer `U_μ`.
pub fn bubble_amplitude(p: &ProblemParams) -> Result<f64> {
    let n = p.n as f64;
    let mu = p.mu;
    let s = sobolev_constant(p.n)?;
    let e_s = (n - mu) * (2.0 - n) / (4.0 * (n - mu + 2.0));
    let e_c = (2.0 - n) / (2.0 * (n - mu + 2.0));
    Ok(s.powf(e_s) * c_star(p).powf(e_c))
}

/// Amplitude `[N(N−2)]^{(N−2)/4}` of the standard bubble `U_0`.
pub fn standard_bubble_amplitude(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0)
}

/// Every constant of the problem for one parameter pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantBundle {
    pub params: ProblemParams,
    pub two_star_mu: f64,
    pub riesz_norm: f64,
    pub hls_sharp: f64,
    pub c_star: f64,
    pub sobolev: f64,
    pub s_star_hl: f64,
    pub bubble_amp: f64,
}

impl ConstantBundle {
    pub fn compute(p: &ProblemParams) -> Result<Self> {
        p.require_nonlocal()?;
        let bundle = Self {
            params: *p,
            two_star_mu: critical_exponent(p),
            riesz_norm: riesz_normalization(p),
            hls_sharp: hls_sharp_constant(p),
            c_star: c_star(p),
            sobolev: sobolev_constant(p.n)?,
            s_star_hl: s_star_hl(p)?,
            bubble_amp: bubble_amplitude(p)?,
        };
        for (name, v) in [
            ("riesz_norm", bundle.riesz_norm),
            ("hls_sharp", bundle.hls_sharp),
            ("c_star", bundle.c_star),
            ("sobolev", bundle.sobolev),
            ("s_star_hl", bundle.s_star_hl),
            ("bubble_amp", bundle.bubble_amp),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ParameterDomain(format!(
                    "{name} = {v} is not positive and finite for N = {}, mu = {}",
                    p.n, p.mu
                )));
            }
        }
        Ok(bundle)
    }
}
