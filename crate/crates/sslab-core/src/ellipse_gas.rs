//! The elliptic condensate: Schwarz function of the ellipse, the jump density
//! on the focal segment, the g- and f-functions, φ, the theta-function model
//! solution and the step-like periodic profile.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dressing_solver::{expand_spectrum, q_at, DressingError, PhaseParams};
use crate::numerics::{integrate_adaptive, linear_fit, C64, I};
use crate::special_functions::{
    abel_map, elliptic_k, gamma_quartic, jacobi_dn, r_surd, theta3, Segment, Side, SpecialError,
    SurfaceContext,
};
use crate::spectral_model::{
    evaluate_density, sample_condensate, AnalyticDensity, DomainDescriptor, EllipseDomain,
    SampleRequest, SampleScheme, SolitonPlacement, SpectralData, SpectralError,
};

/// Points closer than this to ±iη₁, ±iη₂ are rejected by g and f.
pub const ENDPOINT_CLEARANCE: f64 = 1e-3;
const BOUNDARY_SAMPLES: usize = 200;
const BRANCH_TOL: f64 = 1e-8;
const DENSITY_SAMPLES: usize = 64;
const CAUCHY_TOL: f64 = 1e-11;
const THETA_FLOOR: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GasError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Dressing(#[from] DressingError),
    #[error("Schwarz function misses the boundary identity by {max_error:e}")]
    BranchValidation { max_error: f64 },
    #[error("{0} is not strictly inside the segment (i eta1, i eta2)")]
    NotOnBand(C64),
    #[error("jump density vanishes at i*{y}")]
    VanishingDensity { y: f64 },
    #[error("r crosses the negative real axis near i*{y}; principal log is discontinuous there")]
    LogBranch { y: f64 },
    #[error("{0} is within {ENDPOINT_CLEARANCE:e} of a branch point")]
    TooCloseToEndpoint(C64),
    #[error("a side must be given for {0}, which lies on a jump contour")]
    SideRequired(C64),
    #[error("theta denominator vanishes at z = {0}")]
    ThetaZero(C64),
    #[error("sign pattern violated at offset {delta} for {} points", points.len())]
    SignCheckFailed { delta: f64, points: Vec<C64> },
    #[error("|q| fell below 1e-300 at every sample")]
    UnderflowFloor,
    #[error("invalid range: {0}")]
    InvalidRange(String),
}

/// Ellipse together with the two densities ϖ₁ (breathers) and ϖ₂ (solitons).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasConfig {
    pub ellipse: EllipseDomain,
    pub w1: AnalyticDensity,
    pub w2: AnalyticDensity,
    /// Replaces r on ℐ by a constant; used to isolate parts of the formulas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_override: Option<C64>,
}

impl GasConfig {
    pub fn new(
        ellipse: EllipseDomain,
        w1: AnalyticDensity,
        w2: AnalyticDensity,
    ) -> Result<Self, GasError> {
        let cfg = Self {
            ellipse,
            w1,
            w2,
            r_override: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_constant_r(ellipse: EllipseDomain, r: C64) -> Result<Self, GasError> {
        let cfg = Self {
            ellipse,
            w1: AnalyticDensity::zero(),
            w2: AnalyticDensity::zero(),
            r_override: Some(r),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GasError> {
        let e = &self.ellipse;
        EllipseDomain::new(e.eta1, e.eta2, e.rho)?;
        validate_schwarz(e)?;
        let w = e.eta2 - e.eta1;
        for k in 0..DENSITY_SAMPLES {
            let frac = (k as f64 + 0.5) / DENSITY_SAMPLES as f64;
            let (lo, hi) = (w * frac, w * (1.0 - frac));
            let r = band_density(self, lo, hi);
            if !(r.norm() > 1e-14) || !r.is_finite() {
                return Err(GasError::VanishingDensity { y: e.eta1 + lo });
            }
        }
        Ok(())
    }
}

fn schwarz_coefficients(e: &EllipseDomain) -> (f64, f64, f64) {
    let c = e.focal_half();
    let y0 = 0.5 * (e.eta1 + e.eta2);
    let lin = 1.0 - 2.0 * e.rho * e.rho / (c * c);
    let root = 2.0 * e.rho * e.minor_axis() / (c * c);
    (lin, root, y0)
}

fn on_band(z: C64, e: &EllipseDomain) -> bool {
    z.re == 0.0 && z.im > e.eta1 && z.im < e.eta2
}

/// Schwarz function of the ellipse, S(z) = z̄ on the boundary.
///
/// S(z) = (1 − 2ρ²/c²)(z − iy₀) − iy₀ + (2ρb/c²)·√((z−iη₁)(z−iη₂)) with
/// y₀ the centre height, c the focal half-distance and b the minor semi-axis.
/// On ℐ itself a side is required.
pub fn schwarz_ellipse(z: C64, e: &EllipseDomain, side: Side) -> Result<C64, GasError> {
    let (lin, root, y0) = schwarz_coefficients(e);
    let u = z - I * y0;
    let tilde = if on_band(z, e) {
        let p = ((z.im - e.eta1) * (e.eta2 - z.im)).sqrt();
        match side {
            Side::Plus => -p,
            Side::Minus => p,
            Side::Auto => return Err(GasError::SideRequired(z)),
        }
        .into()
    } else {
        let c = e.focal_half();
        u * (C64::new(1.0, 0.0) + c * c / (u * u)).sqrt()
    };
    Ok(lin * u - I * y0 + root * tilde)
}

/// Largest |S(z) − z̄| over boundary samples; fails past 1e−8.
pub fn validate_schwarz(e: &EllipseDomain) -> Result<f64, GasError> {
    let mut worst = 0.0f64;
    for k in 0..BOUNDARY_SAMPLES {
        let phi = 2.0 * PI * k as f64 / BOUNDARY_SAMPLES as f64;
        let z = e.boundary(phi);
        let s = schwarz_ellipse(z, e, Side::Auto)?;
        worst = worst.max((s - z.conj()).norm());
    }
    if worst > BRANCH_TOL {
        return Err(GasError::BranchValidation { max_error: worst });
    }
    Ok(worst)
}

/// δS = S₊ − S₋ at iy, with y − η₁ = lo and η₂ − y = hi given separately.
fn delta_s_parts(e: &EllipseDomain, lo: f64, hi: f64) -> f64 {
    let (_, root, _) = schwarz_coefficients(e);
    -2.0 * root * (lo * hi).sqrt()
}

/// δS(z) = S₊(z) − S₋(z) on ℐ. Real and negative.
pub fn delta_s(z: C64, e: &EllipseDomain) -> Result<C64, GasError> {
    if !on_band(z, e) {
        return Err(GasError::NotOnBand(z));
    }
    Ok(delta_s_parts(e, z.im - e.eta1, e.eta2 - z.im).into())
}

fn band_density(cfg: &GasConfig, lo: f64, hi: f64) -> C64 {
    if let Some(r) = cfg.r_override {
        return r;
    }
    let e = &cfg.ellipse;
    let z = C64::new(0.0, e.eta1 + lo);
    let w1 = evaluate_density(&cfg.w1, z) - evaluate_density(&cfg.w1, z.conj()).conj();
    let w2 = evaluate_density(&cfg.w2, z);
    delta_s_parts(e, lo, hi) * (w1 + w2)
}

/// r(z) = δS(z)(ϖ₁(z) − conj ϖ₁(z̄) + ϖ₂(z)) on ℐ.
pub fn r_density(z: C64, cfg: &GasConfig) -> Result<C64, GasError> {
    let e = &cfg.ellipse;
    if !on_band(z, e) {
        return Err(GasError::NotOnBand(z));
    }
    Ok(band_density(cfg, z.im - e.eta1, e.eta2 - z.im))
}

/// Ω(x, t) = πη₂(x − 2(η₁²+η₂²)t)/K(m).
pub fn omega_of_xt(x: f64, t: f64, surface: &SurfaceContext) -> f64 {
    let (e1, e2) = (surface.eta1, surface.eta2);
    PI * e2 * (x - 2.0 * (e1 * e1 + e2 * e2) * t) / surface.k_m
}

/// One of the three oriented contours ℐ, ℐ̄ (both upward) and the gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cut {
    Upper,
    Lower,
    Gap,
}

const CUTS: [Cut; 3] = [Cut::Upper, Cut::Lower, Cut::Gap];

/// A node on a cut: the point, its distances to the band ends, the oriented
/// ds/dψ and ds/(R₊ dψ).
#[derive(Debug, Clone, Copy)]
struct CutNode {
    s: C64,
    lo: f64,
    hi: f64,
    ds: C64,
    jac: C64,
}

impl Cut {
    fn range(self) -> (f64, f64) {
        match self {
            Cut::Gap => (-PI / 2.0, PI / 2.0),
            _ => (0.0, PI / 2.0),
        }
    }

    fn ends(self, ctx: &SurfaceContext) -> (C64, C64) {
        let (e1, e2) = (ctx.eta1, ctx.eta2);
        match self {
            Cut::Upper => (C64::new(0.0, e1), C64::new(0.0, e2)),
            Cut::Lower => (C64::new(0.0, -e2), C64::new(0.0, -e1)),
            Cut::Gap => (C64::new(0.0, -e1), C64::new(0.0, e1)),
        }
    }

    fn node(self, psi: f64, ctx: &SurfaceContext) -> CutNode {
        let (e1, e2) = (ctx.eta1, ctx.eta2);
        match self {
            Cut::Gap => {
                let y = e1 * psi.sin();
                CutNode {
                    s: C64::new(0.0, y),
                    lo: 0.0,
                    hi: 0.0,
                    ds: C64::new(0.0, e1 * psi.cos()),
                    jac: I / ((e2 - y) * (e2 + y)).sqrt(),
                }
            }
            _ => {
                let w = e2 - e1;
                let (sn, cs) = psi.sin_cos();
                let (lo, hi) = (w * sn * sn, w * cs * cs);
                let y = e1 + lo;
                let scale = 2.0 / ((y + e1) * (y + e2)).sqrt();
                let ds = C64::new(0.0, w * (2.0 * psi).sin());
                let (s, jac) = if self == Cut::Upper {
                    (I * y, -scale)
                } else {
                    (-I * y, scale)
                };
                CutNode {
                    s,
                    lo,
                    hi,
                    ds,
                    jac: jac.into(),
                }
            }
        }
    }

    /// Parameter of z if it lies strictly inside this cut.
    fn locate(self, z: C64, ctx: &SurfaceContext) -> Option<f64> {
        match (ctx.segment_of(z), self) {
            (Segment::Upper, Cut::Upper) => {
                Some(((z.im - ctx.eta1) / (ctx.eta2 - ctx.eta1)).sqrt().asin())
            }
            (Segment::Lower, Cut::Lower) => {
                Some(((-z.im - ctx.eta1) / (ctx.eta2 - ctx.eta1)).sqrt().asin())
            }
            (Segment::Gap, Cut::Gap) => Some((z.im / ctx.eta1).clamp(-1.0, 1.0).asin()),
            _ => None,
        }
    }
}

/// (1/2πi)∫_cut F(s)/(R₊(s)(s − z)) ds, or its boundary value from `side`
/// when z lies on the cut.
fn cauchy<F>(
    cut: Cut,
    z: C64,
    side: Side,
    ctx: &SurfaceContext,
    density: F,
) -> Result<C64, GasError>
where
    F: Fn(&CutNode) -> C64,
{
    let (a, b) = cut.range();
    let mid = cut.node(0.5 * (a + b), ctx);
    let scale = (density(&mid) * mid.jac).norm().max(1.0);
    let tol = CAUCHY_TOL * scale;
    let two_pi_i = 2.0 * PI * I;
    let Some(psi0) = cut.locate(z, ctx) else {
        let v = integrate_adaptive(a, b, tol, |psi| {
            let n = cut.node(psi, ctx);
            density(&n) * n.jac / (n.s - z)
        });
        return Ok(v.value / two_pi_i);
    };
    let sign = match side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
        Side::Auto => return Err(GasError::SideRequired(z)),
    };
    let n0 = cut.node(psi0, ctx);
    let g0 = density(&n0) * n0.jac / n0.ds;
    let smooth = |psi: f64| {
        let n = cut.node(psi, ctx);
        (density(&n) * n.jac - g0 * n.ds) / (n.s - z)
    };
    let left = integrate_adaptive(a, psi0, tol, smooth);
    let right = integrate_adaptive(psi0, b, tol, smooth);
    let (za, zb) = cut.ends(ctx);
    let log = ((zb - z).norm() / (za - z).norm()).ln();
    Ok((left.value + right.value + g0 * log) / two_pi_i + sign * 0.5 * g0)
}

fn check_clearance(z: C64, ctx: &SurfaceContext) -> Result<(), GasError> {
    for y in [ctx.eta1, ctx.eta2, -ctx.eta1, -ctx.eta2] {
        if (z - C64::new(0.0, y)).norm() < ENDPOINT_CLEARANCE {
            return Err(GasError::TooCloseToEndpoint(z));
        }
    }
    Ok(())
}

fn surd(z: C64, ctx: &SurfaceContext, side: Side) -> Result<C64, GasError> {
    match ctx.segment_of(z) {
        Segment::Gap => r_surd(z, ctx, Side::Auto).map_err(Into::into),
        Segment::Upper | Segment::Lower if side == Side::Auto => Err(GasError::SideRequired(z)),
        _ => r_surd(z, ctx, side).map_err(Into::into),
    }
}

fn needs_side(z: C64, ctx: &SurfaceContext, side: Side) -> Result<(), GasError> {
    let on_contour = matches!(
        ctx.segment_of(z),
        Segment::Upper | Segment::Lower | Segment::Gap
    );
    if on_contour && side == Side::Auto {
        return Err(GasError::SideRequired(z));
    }
    Ok(())
}

/// The elliptic gas with its surface and the constant Δ resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipseGas {
    pub config: GasConfig,
    pub surface: SurfaceContext,
    pub delta: C64,
}

impl EllipseGas {
    pub fn new(config: GasConfig) -> Result<Self, GasError> {
        config.validate()?;
        let surface = SurfaceContext::new(config.ellipse.eta1, config.ellipse.eta2)?;
        let delta = delta_constant(&config, &surface)?;
        Ok(Self {
            config,
            surface,
            delta,
        })
    }

    pub fn theta_context(&self, x: f64, t: f64) -> ThetaModelContext {
        ThetaModelContext::new(self.surface, omega_of_xt(x, t, &self.surface), self.delta)
    }
}

/// Surface data plus the x,t-dependent shift of the theta model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaModelContext {
    pub surface: SurfaceContext,
    pub omega: f64,
    pub delta: C64,
    /// ϖ = (Ω + Δ)/(2π)
    pub varpi: C64,
}

impl ThetaModelContext {
    pub fn new(surface: SurfaceContext, omega: f64, delta: C64) -> Self {
        Self {
            surface,
            omega,
            delta,
            varpi: (omega + delta) / (2.0 * PI),
        }
    }
}

fn log_density(cfg: &GasConfig, n: &CutNode) -> C64 {
    band_density(cfg, n.lo, n.hi).ln()
}

/// Δ = −i(∫₀^{iη₁} ds/R)⁻¹ ∫_ℐ ln r/R₊ ds, principal logarithm.
pub fn delta_constant(cfg: &GasConfig, surface: &SurfaceContext) -> Result<C64, GasError> {
    let e = &cfg.ellipse;
    let w = e.eta2 - e.eta1;
    let mut prev: Option<C64> = None;
    for k in 0..=DENSITY_SAMPLES {
        let frac = (k as f64 + 0.5) / (DENSITY_SAMPLES as f64 + 1.0);
        let r = band_density(cfg, w * frac, w * (1.0 - frac));
        if let Some(p) = prev {
            let jump = (r.arg() - p.arg()).abs();
            if jump > PI {
                return Err(GasError::LogBranch {
                    y: e.eta1 + w * frac,
                });
            }
        }
        prev = Some(r);
    }
    let gap = integrate_adaptive(0.0, PI / 2.0, CAUCHY_TOL, |psi| {
        Cut::Gap.node(psi, surface).jac
    });
    let band = integrate_adaptive(0.0, PI / 2.0, CAUCHY_TOL, |psi| {
        let n = Cut::Upper.node(psi, surface);
        log_density(cfg, &n) * n.jac
    });
    Ok(-I * band.value / gap.value)
}

/// g(z; x, t) from the cut integrals of −2xs − 8ts³ over ℐ ∪ ℐ̄ and of Ω
/// over the gap, times R(z).
pub fn g_function(
    z: C64,
    x: f64,
    t: f64,
    surface: &SurfaceContext,
    side: Side,
) -> Result<C64, GasError> {
    check_clearance(z, surface)?;
    needs_side(z, surface, side)?;
    let omega = omega_of_xt(x, t, surface);
    let mut sum = C64::new(0.0, 0.0);
    for cut in CUTS {
        sum += match cut {
            Cut::Gap => cauchy(cut, z, side, surface, |_| C64::new(-omega, 0.0))?,
            _ => cauchy(cut, z, side, surface, |n| {
                -2.0 * x * n.s - 8.0 * t * n.s * n.s * n.s
            })?,
        };
    }
    Ok(surd(z, surface, side)? * sum)
}

/// f(z) = exp{R(z)[−∫_ℐ ln r + ∫_ℐ̄ ln conj r(s̄) + ∫_gap iΔ]/(2πi)}, each
/// integrand over R₊(s)(s − z).
pub fn f_function(z: C64, gas: &EllipseGas, side: Side) -> Result<C64, GasError> {
    let surface = &gas.surface;
    check_clearance(z, surface)?;
    needs_side(z, surface, side)?;
    let cfg = &gas.config;
    let mut sum = C64::new(0.0, 0.0);
    for cut in CUTS {
        sum += match cut {
            Cut::Upper => cauchy(cut, z, side, surface, |n| -log_density(cfg, n))?,
            Cut::Lower => cauchy(cut, z, side, surface, |n| {
                band_density(cfg, n.lo, n.hi).conj().ln()
            })?,
            Cut::Gap => cauchy(cut, z, side, surface, |_| I * gas.delta)?,
        };
    }
    Ok((surd(z, surface, side)? * sum).exp())
}

/// φ = g + zx + 4z³t.
pub fn phi(z: C64, x: f64, t: f64, surface: &SurfaceContext, side: Side) -> Result<C64, GasError> {
    Ok(g_function(z, x, t, surface, side)? + z * x + 4.0 * t * z * z * z)
}

/// g₀ = lim g(z), from g at 10³e^{iπ/4} and 10⁴e^{iπ/4} with the 1/z tail
/// eliminated.
pub fn g_infinity(x: f64, t: f64, surface: &SurfaceContext) -> Result<C64, GasError> {
    let dir = C64::from_polar(1.0, PI / 4.0);
    let (z1, z2) = (1e3 * dir, 1e4 * dir);
    let g1 = g_function(z1, x, t, surface, Side::Auto)?;
    let g2 = g_function(z2, x, t, surface, Side::Auto)?;
    Ok((z2 * g2 - z1 * g1) / (z2 - z1))
}

/// Residuals of the boundary relations of g, f and φ, and endpoint
/// exponents of φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRelationReport {
    pub x: f64,
    pub t: f64,
    /// Max residual per identity.
    pub residuals: BTreeMap<String, f64>,
    /// Fitted exponent p in |φ(z)| ~ |z − endpoint|^p, approached along the
    /// imaginary axis from outside the segment.
    pub endpoint_exponents: BTreeMap<String, f64>,
}

impl BoundaryRelationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

const PROP_SAMPLES: usize = 20;

fn band_samples(e1: f64, e2: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| e1 + (e2 - e1) * (k as f64 + 0.5) / n as f64)
        .collect()
}

/// Checks the boundary relations of g, f and φ at interior samples of each
/// segment, and fits the endpoint exponents of φ at ±iη₂.
pub fn verify_boundary_relations(
    x: f64,
    t: f64,
    gas: &EllipseGas,
) -> Result<BoundaryRelationReport, GasError> {
    let ctx = &gas.surface;
    let (e1, e2) = (ctx.eta1, ctx.eta2);
    let omega = omega_of_xt(x, t, ctx);
    let mut res: BTreeMap<String, f64> = BTreeMap::new();
    let mut bump = |key: &str, v: f64| {
        let e = res.entry(key.to_string()).or_insert(0.0);
        *e = e.max(v);
    };
    for y in band_samples(e1, e2, PROP_SAMPLES) {
        for z in [C64::new(0.0, y), C64::new(0.0, -y)] {
            let gp = g_function(z, x, t, ctx, Side::Plus)?;
            let gm = g_function(z, x, t, ctx, Side::Minus)?;
            let target = -8.0 * t * z * z * z - 2.0 * x * z;
            bump(
                "g_sum_bands",
                (gp + gm - target).norm() / target.norm().max(1.0),
            );
            let pp = gp + z * x + 4.0 * t * z * z * z;
            let pm = gm + z * x + 4.0 * t * z * z * z;
            bump("phi_sum_bands", (pp + pm).norm() / target.norm().max(1.0));
            let fp = f_function(z, gas, Side::Plus)?;
            let fm = f_function(z, gas, Side::Minus)?;
            let r = band_density(&gas.config, y - e1, e2 - y);
            if z.im > 0.0 {
                bump("f_product_upper", (fp * fm * r - 1.0).norm());
            } else {
                bump(
                    "f_product_lower",
                    (fp * fm - r.conj()).norm() / r.norm().max(1e-300),
                );
            }
        }
    }
    let shift = (I * gas.delta).exp();
    for k in 0..PROP_SAMPLES {
        let y = e1 * (-1.0 + 2.0 * (k as f64 + 0.5) / PROP_SAMPLES as f64);
        let z = C64::new(0.0, y);
        let gp = g_function(z, x, t, ctx, Side::Plus)?;
        let gm = g_function(z, x, t, ctx, Side::Minus)?;
        bump(
            "g_difference_gap",
            (gp - gm + omega).norm() / omega.abs().max(1.0),
        );
        let fp = f_function(z, gas, Side::Plus)?;
        let fm = f_function(z, gas, Side::Minus)?;
        bump("f_ratio_gap", (fp / fm - shift).norm());
    }
    let mut endpoint_exponents = BTreeMap::new();
    for (name, sign) in [("upper_outer", 1.0), ("lower_outer", -1.0)] {
        let (logs_d, logs_phi): (Vec<f64>, Vec<f64>) = (0..8)
            .map(|k| {
                let d = 2e-3 * 1.4f64.powi(k);
                let z = C64::new(0.0, sign * (e2 + d));
                phi(z, x, t, ctx, Side::Auto).map(|p| (d.ln(), p.norm().ln()))
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        endpoint_exponents.insert(name.to_string(), linear_fit(&logs_d, &logs_phi).0);
    }
    Ok(BoundaryRelationReport {
        x,
        t,
        residuals: res,
        endpoint_exponents,
    })
}

/// Im φ on the contours ℐ ± δ (expected positive) and ℐ̄ ± δ (expected
/// negative), clipped 0.1 from the endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensReport {
    pub delta: f64,
    pub min_upper: f64,
    pub max_lower: f64,
    pub violations: Vec<C64>,
}

impl LensReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

const LENS_SAMPLES: usize = 20;
const LENS_CLIP: f64 = 0.1;

/// Samples Im φ on the four lens contours at horizontal offset δ.
pub fn lens_sign_report(
    x: f64,
    t: f64,
    surface: &SurfaceContext,
    delta: f64,
) -> Result<LensReport, GasError> {
    let (e1, e2) = (surface.eta1 + LENS_CLIP, surface.eta2 - LENS_CLIP);
    let mut rep = LensReport {
        delta,
        min_upper: f64::INFINITY,
        max_lower: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for k in 0..LENS_SAMPLES {
        let y = e1 + (e2 - e1) * k as f64 / (LENS_SAMPLES - 1) as f64;
        for dx in [-delta, delta] {
            let up = C64::new(dx, y);
            let v = phi(up, x, t, surface, Side::Auto)?.im;
            rep.min_upper = rep.min_upper.min(v);
            if !(v > 0.0) {
                rep.violations.push(up);
            }
            let down = C64::new(dx, -y);
            let v = phi(down, x, t, surface, Side::Auto)?.im;
            rep.max_lower = rep.max_lower.max(v);
            if !(v < 0.0) {
                rep.violations.push(down);
            }
        }
    }
    Ok(rep)
}

/// Tries each offset in turn; succeeds with the first report whose sign
/// pattern holds.
pub fn lens_sign_check(
    x: f64,
    t: f64,
    surface: &SurfaceContext,
    deltas: &[f64],
) -> Result<LensReport, GasError> {
    if !(t > 0.0) {
        return Err(GasError::InvalidRange(
            "t > 0 required for the sign check".into(),
        ));
    }
    let mut last = None;
    for &d in deltas {
        let rep = lens_sign_report(x, t, surface, d)?;
        if rep.holds() {
            return Ok(rep);
        }
        last = Some(rep);
    }
    match last {
        Some(rep) => Err(GasError::SignCheckFailed {
            delta: rep.delta,
            points: rep.violations,
        }),
        None => Err(GasError::InvalidRange("no offsets given".into())),
    }
}

/// Which theta characteristics the model matrix uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Shift d = 1/4 + τ/2 with per-row constants; solves the model problem.
    HalfPeriod,
    /// Shift ±1/4 with the common constant θ(0)/θ(ϖ).
    QuarterPeriod,
}

pub type Matrix2 = [[C64; 2]; 2];

fn theta_ratio(num: C64, den: C64, tau: C64, z: C64) -> Result<C64, GasError> {
    let d = theta3(den, tau)?;
    if d.norm() < THETA_FLOOR {
        return Err(GasError::ThetaZero(z));
    }
    Ok(theta3(num, tau)? / d)
}

/// Solution of the model problem: jumps [[0,−1],[1,0]] on ℐ, [[0,1],[−1,0]]
/// on ℐ̄, diag(e^{2πiϖ}, e^{−2πiϖ}) on the gap, S → I at infinity.
pub fn model_s(z: C64, ctx: &ThetaModelContext, side: Side) -> Result<Matrix2, GasError> {
    model_s_variant(z, ctx, side, ModelVariant::HalfPeriod)
}

pub fn model_s_variant(
    z: C64,
    ctx: &ThetaModelContext,
    side: Side,
    variant: ModelVariant,
) -> Result<Matrix2, GasError> {
    let surf = &ctx.surface;
    needs_side(z, surf, side)?;
    let tau = surf.tau;
    let vp = ctx.varpi;
    let q = C64::new(0.25, 0.0);
    let d = match variant {
        ModelVariant::HalfPeriod => q + 0.5 * tau,
        ModelVariant::QuarterPeriod => q,
    };
    let c1 = theta_ratio(d - q, d - q + vp, tau, z)?;
    let c2 = theta_ratio(q - d, q - d + vp, tau, z)?;
    let a = abel_map(z, surf, side)?;
    let g = match surf.segment_of(z) {
        Segment::Gap => gamma_quartic(z, surf, Side::Auto)?,
        _ => gamma_quartic(z, surf, side)?,
    };
    let gp = g + 1.0 / g;
    let gm = g - 1.0 / g;
    let r = |s: C64| theta_ratio(s + vp, s, tau, z);
    Ok([
        [0.5 * c1 * r(a + d)? * gp, -0.5 * I * c1 * r(-a + d)? * gm],
        [0.5 * I * c2 * r(a - d)? * gm, 0.5 * c2 * r(-a - d)? * gp],
    ])
}

pub fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn det2(a: &Matrix2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn max_entry_diff(a: &Matrix2, b: &Matrix2) -> f64 {
    let mut m = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// Max ‖S₊ − S₋V‖ (entrywise) on each segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJumpReport {
    pub varpi: C64,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
}

impl ModelJumpReport {
    pub fn max(&self) -> f64 {
        self.upper.max(self.lower).max(self.gap)
    }
}

pub fn model_jump_residuals(
    ctx: &ThetaModelContext,
    n: usize,
    variant: ModelVariant,
) -> Result<ModelJumpReport, GasError> {
    let (e1, e2) = (ctx.surface.eta1, ctx.surface.eta2);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let v_upper = [[zero, -one], [one, zero]];
    let v_lower = [[zero, one], [-one, zero]];
    let ph = (2.0 * PI * I * ctx.varpi).exp();
    let v_gap = [[ph, zero], [zero, 1.0 / ph]];
    let jump = |z: C64, v: &Matrix2| -> Result<f64, GasError> {
        let sp = model_s_variant(z, ctx, Side::Plus, variant)?;
        let sm = model_s_variant(z, ctx, Side::Minus, variant)?;
        Ok(max_entry_diff(&sp, &mat_mul(&sm, v)))
    };
    let mut rep = ModelJumpReport {
        varpi: ctx.varpi,
        upper: 0.0,
        lower: 0.0,
        gap: 0.0,
    };
    for y in band_samples(e1, e2, n) {
        rep.upper = rep.upper.max(jump(C64::new(0.0, y), &v_upper)?);
        rep.lower = rep.lower.max(jump(C64::new(0.0, -y), &v_lower)?);
    }
    for y in band_samples(-e1, e1, n) {
        rep.gap = rep.gap.max(jump(C64::new(0.0, y), &v_gap)?);
    }
    Ok(rep)
}

/// m₁ = 4η₁η₂/(η₁+η₂)².
pub fn landen_parameter(eta1: f64, eta2: f64) -> f64 {
    4.0 * eta1 * eta2 / (eta1 + eta2).powi(2)
}

/// −(η₂−η₁)θ(1/2+ϖ)θ(0)/(θ(1/2)θ(ϖ)) with ϖ = (Ω(x,t)+Δ)/(2π).
pub fn profile_theta(x: f64, t: f64, gas: &EllipseGas) -> Result<f64, GasError> {
    let ctx = gas.theta_context(x, t);
    profile_theta_at(&ctx)
}

pub fn profile_theta_at(ctx: &ThetaModelContext) -> Result<f64, GasError> {
    let s = &ctx.surface;
    let tau = s.tau;
    let half = C64::new(0.5, 0.0);
    let zero = C64::new(0.0, 0.0);
    let num = theta3(half + ctx.varpi, tau)? * theta3(zero, tau)?;
    let den = theta3(half, tau)? * theta3(ctx.varpi, tau)?;
    if den.norm() < THETA_FLOOR {
        return Err(GasError::ThetaZero(ctx.varpi));
    }
    Ok((-(s.eta2 - s.eta1) * num / den).re)
}

/// −(η₁+η₂)dn((η₁+η₂)(x − 2(η₁²+η₂²)t − x₀); m₁), x₀ = K(m)(Δ−π)/(η₂π).
pub fn profile_dn(x: f64, t: f64, gas: &EllipseGas) -> Result<f64, GasError> {
    let s = &gas.surface;
    let (e1, e2) = (s.eta1, s.eta2);
    let x0 = s.k_m * (gas.delta.re - PI) / (e2 * PI);
    let m1 = landen_parameter(e1, e2);
    let u = (e1 + e2) * (x - 2.0 * (e1 * e1 + e2 * e2) * t - x0);
    Ok(-(e1 + e2) * jacobi_dn(u, m1)?)
}

/// x-period of the profile, 2K(m₁)/(η₁+η₂).
pub fn profile_period(eta1: f64, eta2: f64) -> Result<f64, GasError> {
    Ok(2.0 * elliptic_k(landen_parameter(eta1, eta2))? / (eta1 + eta2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftTailReport {
    pub n: usize,
    /// Fitted c in log|q| ≈ c·x + b.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of log|q| from the fit.
    pub residual: f64,
    /// (x, |q(x, 0)|) at the samples kept.
    pub samples: Vec<(f64, f64)>,
    /// Samples dropped below the 1e−300 floor.
    pub clipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeftTailRequest {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub scheme: SampleScheme,
    pub seed: u64,
}

const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Finite-N spectral data of the gas: N soliton-type poles from ϖ₂ and, when
/// ϖ₁ is nonzero, N breathers from ϖ₁.
pub fn sampled_gas(
    gas: &EllipseGas,
    n: usize,
    scheme: SampleScheme,
    seed: u64,
) -> Result<SpectralData, GasError> {
    let cfg = &gas.config;
    let domain = DomainDescriptor::Ellipse(cfg.ellipse);
    let n1 = if cfg.w1.is_zero() { 0 } else { n };
    Ok(sample_condensate(&SampleRequest {
        domain: &domain,
        w1: &cfg.w1,
        w2: &cfg.w2,
        n1,
        n2: n,
        scheme,
        seed,
        placement: SolitonPlacement::Domain,
    })?)
}

/// Decay rate of the sampled condensate on the quiescent side.
///
/// The dressing solution of a finite sample decays as x → +∞; the gas is
/// quiescent as x → −∞, so q_gas(x, 0) is evaluated as q(−x, 0), which is
/// again an mKdV solution.
pub fn left_tail_estimate(
    gas: &EllipseGas,
    req: &LeftTailRequest,
) -> Result<LeftTailReport, GasError> {
    if !(req.x_min < req.x_max && req.x_max <= -5.0) {
        return Err(GasError::InvalidRange(
            "x range must satisfy x_min < x_max <= -5".into(),
        ));
    }
    if req.points < 2 || req.n == 0 {
        return Err(GasError::InvalidRange(
            "need N >= 1 and at least two x samples".into(),
        ));
    }
    let data = sampled_gas(gas, req.n, req.scheme, req.seed)?;
    let system = expand_spectrum(&data)?;
    let mut samples = Vec::with_capacity(req.points);
    let mut clipped = 0;
    for k in 0..req.points {
        let x = req.x_min + (req.x_max - req.x_min) * k as f64 / (req.points - 1) as f64;
        let q = q_at(&system, &PhaseParams::new(-x, 0.0))?.norm();
        if q < UNDERFLOW_FLOOR {
            clipped += 1;
        } else {
            samples.push((x, q));
        }
    }
    if samples.len() < 2 {
        return Err(GasError::UnderflowFloor);
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(LeftTailReport {
        n: req.n,
        slope,
        intercept,
        residual,
        samples,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> EllipseGas {
        let e = EllipseDomain::new(1.0, 2.0, 0.6).unwrap();
        let cfg = GasConfig::new(
            e,
            AnalyticDensity::zero(),
            AnalyticDensity::constant(C64::new(-1.0, 0.0)),
        )
        .unwrap();
        EllipseGas::new(cfg).unwrap()
    }

    #[test]
    fn density_is_positive_for_negative_constant() {
        let gas = reference();
        let r = r_density(C64::new(0.0, 1.5), &gas.config).unwrap();
        assert!(r.re > 0.0 && r.im == 0.0);
        assert!(gas.delta.im.abs() < 1e-10);
    }

    #[test]
    fn side_required_on_contours() {
        let gas = reference();
        let z = C64::new(0.0, 1.5);
        assert!(matches!(
            g_function(z, 1.0, 0.0, &gas.surface, Side::Auto),
            Err(GasError::SideRequired(_))
        ));
        assert!(matches!(
            g_function(C64::new(0.0, 2.0005), 1.0, 0.0, &gas.surface, Side::Auto),
            Err(GasError::TooCloseToEndpoint(_))
        ));
    }
}
