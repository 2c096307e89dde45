//! Spectral data, condensate domains, densities and the samplers that turn a
//! domain-filling condensate into finite spectral data.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{gl32, gl64, Integral, C64, I};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid spectral datum: {0}")]
    InvalidDatum(String),
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("no sample point landed in the domain: {0}")]
    EmptyDomainSample(String),
}

/// A soliton pole κ = iζ with norming constant h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonDatum {
    pub kappa: C64,
    pub h: C64,
}

impl SolitonDatum {
    /// Strict soliton: κ on the positive imaginary axis.
    pub fn new(kappa: C64, h: C64) -> Result<Self, SpectralError> {
        if kappa.re != 0.0 {
            return Err(SpectralError::InvalidDatum(format!(
                "soliton pole {kappa} must be purely imaginary"
            )));
        }
        Self::condensate(kappa, h)
    }

    /// Condensate point: a soliton-type pole anywhere in the upper half-plane,
    /// as produced by sampling a two-dimensional domain.
    pub fn condensate(kappa: C64, h: C64) -> Result<Self, SpectralError> {
        if !(kappa.im > 0.0) || !kappa.re.is_finite() {
            return Err(SpectralError::InvalidDatum(format!(
                "soliton pole {kappa} must lie in the upper half-plane"
            )));
        }
        if h == C64::new(0.0, 0.0) || !h.is_finite() {
            return Err(SpectralError::InvalidDatum(
                "norming constant h must be nonzero".into(),
            ));
        }
        Ok(Self { kappa, h })
    }

    pub fn zeta(&self) -> f64 {
        self.kappa.im
    }
}

/// A breather pole z = a + ib (a, b > 0) with norming constant c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreatherDatum {
    pub z: C64,
    pub c: C64,
}

impl BreatherDatum {
    pub fn new(z: C64, c: C64) -> Result<Self, SpectralError> {
        if !(z.re > 0.0 && z.im > 0.0) {
            return Err(SpectralError::InvalidDatum(format!(
                "breather pole {z} needs positive real and imaginary parts"
            )));
        }
        if c == C64::new(0.0, 0.0) || !c.is_finite() {
            return Err(SpectralError::InvalidDatum(
                "norming constant c must be nonzero".into(),
            ));
        }
        Ok(Self { z, c })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub solitons: Vec<SolitonDatum>,
    pub breathers: Vec<BreatherDatum>,
}

impl SpectralData {
    pub fn new(
        solitons: Vec<SolitonDatum>,
        breathers: Vec<BreatherDatum>,
    ) -> Result<Self, SpectralError> {
        let data = Self {
            solitons,
            breathers,
        };
        let poles: Vec<C64> = data
            .solitons
            .iter()
            .map(|s| s.kappa)
            .chain(data.breathers.iter().map(|b| b.z))
            .collect();
        for (i, a) in poles.iter().enumerate() {
            if poles[..i].contains(a) {
                return Err(SpectralError::InvalidDatum(format!(
                    "pole {a} appears twice"
                )));
            }
        }
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.solitons.len() + self.breathers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Polynomial density Σ a_k z^k, lowest degree first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDensity {
    pub coefficients: Vec<C64>,
}

impl AnalyticDensity {
    pub fn new(coefficients: Vec<C64>) -> Self {
        Self { coefficients }
    }

    pub fn constant(c: C64) -> Self {
        Self {
            coefficients: vec![c],
        }
    }

    pub fn zero() -> Self {
        Self {
            coefficients: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    /// z ↦ conj(ϖ(conj z)), the polynomial with conjugated coefficients.
    pub fn reflected(&self) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c.conj()).collect(),
        }
    }
}

pub fn evaluate_density(density: &AnalyticDensity, z: C64) -> C64 {
    density
        .coefficients
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Quadrature domain |(z − d₀)^m − d₁| < ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureDomain {
    pub d0: C64,
    pub d1: C64,
    pub rho: f64,
    pub m: u32,
}

impl QuadratureDomain {
    pub fn new(d0: C64, d1: C64, rho: f64, m: u32) -> Result<Self, SpectralError> {
        if m == 0 {
            return Err(SpectralError::DegenerateDomain("m >= 1 required".into()));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(SpectralError::DegenerateDomain("rho > 0 required".into()));
        }
        if !(d0.im > 0.0) {
            return Err(SpectralError::DegenerateDomain("Im d0 > 0 required".into()));
        }
        // |d1| < rho keeps 0 inside the w-disk, so the preimage is one
        // star-shaped region about d0 with a smooth simple boundary.
        if d1.norm() >= rho {
            return Err(SpectralError::DegenerateDomain(
                "|d1| < rho required for a single closed boundary".into(),
            ));
        }
        let dom = Self { d0, d1, rho, m };
        let n = 4096;
        let min_im = (0..n)
            .map(|k| dom.radial_point(2.0 * PI * k as f64 / n as f64).im)
            .fold(f64::INFINITY, f64::min);
        if !(min_im > 0.0) {
            return Err(SpectralError::DegenerateDomain(
                "boundary must lie in the open upper half-plane".into(),
            ));
        }
        Ok(dom)
    }

    /// Boundary distance from d₀ along direction e^{iψ}.
    pub fn radial_extent(&self, psi: f64) -> f64 {
        let mf = self.m as f64;
        let u = self.d1 * C64::from_polar(1.0, -mf * psi);
        let rm = u.re + (self.rho * self.rho - u.im * u.im).sqrt();
        rm.powf(1.0 / mf)
    }

    fn radial_point(&self, psi: f64) -> C64 {
        self.d0 + C64::from_polar(self.radial_extent(psi), psi)
    }

    /// Boundary point w(φ) = d₀ + (d₁ + ρe^{iφ})^{1/m} on the continuous
    /// root, φ ∈ [0, 2πm), together with dw/dφ.
    pub fn boundary(&self, phi: f64) -> (C64, C64) {
        let mf = self.m as f64;
        let e = C64::from_polar(1.0, phi);
        let ratio = 1.0 + self.d1 / self.rho * e.conj();
        let root = self.rho.powf(1.0 / mf) * C64::from_polar(1.0, phi / mf) * ratio.powf(1.0 / mf);
        let u = self.d1 + self.rho * e;
        let dw = root * I * self.rho * e / (mf * u);
        (self.d0 + root, dw)
    }

    pub fn contains(&self, z: C64) -> bool {
        ((z - self.d0).powu(self.m) - self.d1).norm() < self.rho
    }

    /// (S(w) − d̄₀)^m, single-valued: d̄₁ + ρ²/((w−d₀)^m − d₁).
    pub fn schwarz_power(&self, w: C64) -> C64 {
        self.d1.conj() + self.rho * self.rho / ((w - self.d0).powu(self.m) - self.d1)
    }
}

/// Ellipse with foci iη₁, iη₂ and distance sum 2ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseDomain {
    pub eta1: f64,
    pub eta2: f64,
    pub rho: f64,
}

impl EllipseDomain {
    pub fn new(eta1: f64, eta2: f64, rho: f64) -> Result<Self, SpectralError> {
        if !(eta1 > 0.0) {
            return Err(SpectralError::DegenerateDomain("eta1 > 0 required".into()));
        }
        if !(eta1 < eta2) {
            return Err(SpectralError::DegenerateDomain(
                "eta1 < eta2 required".into(),
            ));
        }
        if !(rho > 0.5 * (eta2 - eta1)) {
            return Err(SpectralError::DegenerateDomain(
                "rho > (eta2 - eta1)/2 required".into(),
            ));
        }
        if !(0.5 * (eta1 + eta2) - rho > 0.0) {
            return Err(SpectralError::DegenerateDomain(
                "(eta1 + eta2)/2 - rho > 0 required (ellipse in upper half-plane)".into(),
            ));
        }
        Ok(Self { eta1, eta2, rho })
    }

    pub fn center(&self) -> C64 {
        C64::new(0.0, 0.5 * (self.eta1 + self.eta2))
    }

    /// Focal half-distance c = (η₂ − η₁)/2.
    pub fn focal_half(&self) -> f64 {
        0.5 * (self.eta2 - self.eta1)
    }

    /// Horizontal semi-axis √(ρ² − c²); the vertical one is ρ.
    pub fn minor_axis(&self) -> f64 {
        (self.rho * self.rho - self.focal_half().powi(2)).sqrt()
    }

    pub fn radial_extent(&self, psi: f64) -> f64 {
        let b = self.minor_axis();
        let (s, c) = psi.sin_cos();
        1.0 / ((c / b).powi(2) + (s / self.rho).powi(2)).sqrt()
    }

    pub fn boundary(&self, phi: f64) -> C64 {
        self.center() + C64::new(self.minor_axis() * phi.cos(), self.rho * phi.sin())
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - C64::new(0.0, self.eta1)).norm() + (z - C64::new(0.0, self.eta2)).norm()
            < 2.0 * self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainDescriptor {
    Quadrature(QuadratureDomain),
    Ellipse(EllipseDomain),
}

impl DomainDescriptor {
    pub fn contains(&self, z: C64) -> bool {
        match self {
            Self::Quadrature(q) => q.contains(z),
            Self::Ellipse(e) => e.contains(z),
        }
    }

    /// Interior point about which the domain is star-shaped.
    pub fn center(&self) -> C64 {
        match self {
            Self::Quadrature(q) => q.d0,
            Self::Ellipse(e) => e.center(),
        }
    }

    pub fn radial_extent(&self, psi: f64) -> f64 {
        match self {
            Self::Quadrature(q) => q.radial_extent(psi),
            Self::Ellipse(e) => e.radial_extent(psi),
        }
    }

    /// (re_min, re_max, im_min, im_max) from dense polar sampling.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let c = self.center();
        let n = 4096;
        let mut bb = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for k in 0..n {
            let psi = 2.0 * PI * k as f64 / n as f64;
            let p = c + C64::from_polar(self.radial_extent(psi) * (1.0 + 1e-9), psi);
            bb.0 = bb.0.min(p.re);
            bb.1 = bb.1.max(p.re);
            bb.2 = bb.2.min(p.im);
            bb.3 = bb.3.max(p.im);
        }
        bb
    }

    /// α(z, z̄) built from an analytic density: m(z̄−d̄₀)^{m−1}ϖ(z) for
    /// quadrature domains, ϖ(z) for the ellipse.
    pub fn alpha(&self, density: &AnalyticDensity, z: C64) -> C64 {
        let w = evaluate_density(density, z);
        match self {
            Self::Quadrature(q) if q.m > 1 => {
                (q.m as f64) * (z.conj() - q.d0.conj()).powu(q.m - 1) * w
            }
            _ => w,
        }
    }

    /// ∬_𝒟 f dA in polar coordinates about the centre: periodic trapezoid
    /// in angle, Gauss–Legendre in radius, angle count doubled until two
    /// successive values agree to `tol` (relative to max(1, |I|)).
    pub fn integrate<F>(&self, tol: f64, f: F) -> Integral
    where
        F: Fn(C64) -> C64 + Sync,
    {
        let eval = |n_psi: usize, rule: &crate::numerics::GaussLegendre| -> C64 {
            let c = self.center();
            let parts: Vec<C64> = (0..n_psi)
                .into_par_iter()
                .map(|k| {
                    let psi = 2.0 * PI * k as f64 / n_psi as f64;
                    let e = C64::from_polar(1.0, psi);
                    let rmax = self.radial_extent(psi);
                    rule.integrate(0.0, rmax, |r| f(c + r * e) * r)
                })
                .collect();
            parts.iter().fold(C64::new(0.0, 0.0), |a, b| a + b) * (2.0 * PI / n_psi as f64)
        };
        let mut n_psi = 32;
        let mut prev = eval(n_psi, gl32());
        loop {
            n_psi *= 2;
            let cur = eval(n_psi, gl32());
            let err = (cur - prev).norm();
            if err <= tol * cur.norm().max(1.0) || n_psi >= 1 << 14 {
                let fine = eval(n_psi, gl64());
                let err = err.max((fine - cur).norm());
                return Integral {
                    value: fine,
                    error: err,
                    panels: n_psi,
                };
            }
            prev = cur;
        }
    }
}

pub fn domain_area(domain: &DomainDescriptor) -> f64 {
    domain.integrate(1e-13, |_| C64::new(1.0, 0.0)).value.re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleScheme {
    Grid,
    Halton,
}

/// Which points of 𝒟 may carry soliton-type poles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolitonPlacement {
    /// All of 𝒟, as in the two-dimensional condensate limit.
    Domain,
    /// Only 𝒟 ∩ iℝ₊, giving genuine solitons.
    Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRequest<'a> {
    pub domain: &'a DomainDescriptor,
    pub w1: &'a AnalyticDensity,
    pub w2: &'a AnalyticDensity,
    pub n1: usize,
    pub n2: usize,
    pub scheme: SampleScheme,
    pub seed: u64,
    pub placement: SolitonPlacement,
}

/// Discretizes the condensate: c_k = S·α₁(z_k)/(πN₁), h_j = S·α₂(κ_j)/(πN₂).
pub fn sample_condensate(req: &SampleRequest<'_>) -> Result<SpectralData, SpectralError> {
    if req.n1 + req.n2 == 0 {
        return Err(SpectralError::EmptyDomainSample(
            "N1 + N2 >= 1 required".into(),
        ));
    }
    let area = domain_area(req.domain);
    let mut solitons = Vec::with_capacity(req.n2);
    if req.n2 > 0 {
        let pts = match req.placement {
            SolitonPlacement::Domain => sample_points(
                req.domain,
                req.n2,
                req.scheme,
                req.seed,
                Stream::Soliton,
                |z| req.domain.contains(z),
            )?,
            SolitonPlacement::Axis => axis_points(req.domain, req.n2, req.scheme, req.seed)?,
        };
        let scale = area / (PI * req.n2 as f64);
        for p in pts {
            solitons.push(SolitonDatum::condensate(
                p,
                req.domain.alpha(req.w2, p) * scale,
            )?);
        }
    }
    let mut breathers = Vec::with_capacity(req.n1);
    if req.n1 > 0 {
        let pts = sample_points(
            req.domain,
            req.n1,
            req.scheme,
            req.seed,
            Stream::Breather,
            |z| z.re > 0.0 && req.domain.contains(z),
        )?;
        let scale = area / (PI * req.n1 as f64);
        for p in pts {
            breathers.push(BreatherDatum::new(p, req.domain.alpha(req.w1, p) * scale)?);
        }
    }
    SpectralData::new(solitons, breathers)
}

/// Solitons and breathers draw from disjoint point sets. The two lattices sit
/// a quarter and three quarters of a cell off the domain centre, which is
/// also where the quadrature-domain weight (z̄ − d̄₀)^{m−1} vanishes. The
/// breather Halton stream uses bases 5 and 7, whose radical inverses never
/// coincide with those of bases 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stream {
    Soliton,
    Breather,
}

impl Stream {
    fn cell_offset(self) -> f64 {
        match self {
            Self::Soliton => 0.25,
            Self::Breather => 0.75,
        }
    }

    fn bases(self) -> (u64, u64) {
        match self {
            Self::Soliton => (2, 3),
            Self::Breather => (5, 7),
        }
    }
}

fn sample_points<F: Fn(C64) -> bool>(
    domain: &DomainDescriptor,
    n: usize,
    scheme: SampleScheme,
    seed: u64,
    stream: Stream,
    inside: F,
) -> Result<Vec<C64>, SpectralError> {
    let bb = domain.bounding_box();
    match scheme {
        SampleScheme::Grid => grid_points(bb, n, stream.cell_offset(), &inside),
        SampleScheme::Halton => halton_points(bb, n, seed, stream.bases(), &inside),
    }
}

fn lattice(
    bb: (f64, f64, f64, f64),
    h: f64,
    offset: f64,
    inside: &dyn Fn(C64) -> bool,
) -> Vec<C64> {
    let (x0, x1, y0, y1) = bb;
    let (cx, cy) = (0.5 * (x0 + x1) + offset * h, 0.5 * (y0 + y1) + offset * h);
    let nx = ((0.5 * (x1 - x0)) / h).ceil() as i64 + 1;
    let ny = ((0.5 * (y1 - y0)) / h).ceil() as i64 + 1;
    let mut out = Vec::new();
    for j in -ny..=ny {
        for i in -nx..=nx {
            let z = C64::new(cx + h * i as f64, cy + h * j as f64);
            if inside(z) {
                out.push(z);
            }
        }
    }
    out
}

/// Largest lattice spacing (to bisection accuracy) with at least n interior
/// points; the first n in row-major order (Im, then Re, ascending) are kept.
fn grid_points(
    bb: (f64, f64, f64, f64),
    n: usize,
    offset: f64,
    inside: &dyn Fn(C64) -> bool,
) -> Result<Vec<C64>, SpectralError> {
    let lattice = |h: f64| lattice(bb, h, offset, inside);
    let box_area = (bb.1 - bb.0) * (bb.3 - bb.2);
    let mut hi = (box_area / n as f64).sqrt();
    if lattice(hi).len() >= n {
        let pts = lattice(hi);
        return Ok(pts.into_iter().take(n).collect());
    }
    let mut lo = hi;
    let mut tries = 0;
    loop {
        lo *= 0.5;
        tries += 1;
        if lattice(lo).len() >= n {
            break;
        }
        if tries > 30 {
            return Err(SpectralError::EmptyDomainSample(format!(
                "lattice never reached {n} interior points"
            )));
        }
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if lattice(mid).len() >= n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lattice(lo).into_iter().take(n).collect())
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    r
}

fn halton_points(
    bb: (f64, f64, f64, f64),
    n: usize,
    seed: u64,
    (bx, by): (u64, u64),
    inside: &dyn Fn(C64) -> bool,
) -> Result<Vec<C64>, SpectralError> {
    let mut out = Vec::with_capacity(n);
    let limit = 1000 * n as u64 + 100_000;
    let mut idx = seed + 1;
    let mut tried = 0;
    while out.len() < n {
        if tried > limit {
            return Err(SpectralError::EmptyDomainSample(format!(
                "Halton sequence found only {} of {n} interior points",
                out.len()
            )));
        }
        let z = C64::new(
            bb.0 + (bb.1 - bb.0) * radical_inverse(idx, bx),
            bb.2 + (bb.3 - bb.2) * radical_inverse(idx, by),
        );
        if inside(z) {
            out.push(z);
        }
        idx += 1;
        tried += 1;
    }
    Ok(out)
}

fn axis_points(
    domain: &DomainDescriptor,
    n: usize,
    scheme: SampleScheme,
    seed: u64,
) -> Result<Vec<C64>, SpectralError> {
    let c = domain.center();
    if c.re != 0.0 {
        return Err(SpectralError::EmptyDomainSample(
            "axis placement needs a domain centred on the imaginary axis".into(),
        ));
    }
    let lo = c.im - domain.radial_extent(-PI / 2.0);
    let hi = c.im + domain.radial_extent(PI / 2.0);
    let pts = (0..n)
        .map(|k| {
            let u = match scheme {
                SampleScheme::Grid => (k as f64 + 0.5) / n as f64,
                SampleScheme::Halton => radical_inverse(seed + 1 + k as u64, 2),
            };
            C64::new(0.0, lo + (hi - lo) * u)
        })
        .filter(|z| z.im > 0.0 && domain.contains(*z))
        .collect::<Vec<_>>();
    if pts.len() < n {
        return Err(SpectralError::EmptyDomainSample(
            "axis trace too short".into(),
        ));
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_soliton_rejects_off_axis() {
        assert!(SolitonDatum::new(C64::new(0.1, 1.0), C64::new(0.0, 1.0)).is_err());
        assert!(SolitonDatum::new(C64::new(0.0, -1.0), C64::new(0.0, 1.0)).is_err());
        assert!(SolitonDatum::new(C64::new(0.0, 1.0), C64::new(0.0, 0.0)).is_err());
        assert!(SolitonDatum::condensate(C64::new(0.1, 1.0), C64::new(0.0, 1.0)).is_ok());
    }

    #[test]
    fn breather_needs_first_quadrant() {
        assert!(BreatherDatum::new(C64::new(-0.1, 1.0), C64::new(1.0, 0.0)).is_err());
        assert!(BreatherDatum::new(C64::new(0.1, 1.0), C64::new(1.0, 0.0)).is_ok());
    }

    #[test]
    fn duplicate_poles_rejected() {
        let s = SolitonDatum::new(C64::new(0.0, 1.0), C64::new(0.0, 1.0)).unwrap();
        assert!(SpectralData::new(vec![s, s], vec![]).is_err());
    }

    #[test]
    fn ellipse_validation_messages() {
        let e = EllipseDomain::new(2.0, 1.0, 0.6).unwrap_err();
        assert!(e.to_string().contains("eta1 < eta2 required"));
        assert!(EllipseDomain::new(1.0, 2.0, 0.4).is_err());
        assert!(EllipseDomain::new(1.0, 2.0, 1.6).is_err());
    }

    #[test]
    fn quadrature_validation() {
        assert!(QuadratureDomain::new(C64::new(0.0, 1.0), C64::new(0.02, 0.0), 0.01, 2).is_err());
        assert!(QuadratureDomain::new(C64::new(0.0, 0.1), C64::new(0.0, 0.0), 0.3, 1).is_err());
        assert!(QuadratureDomain::new(C64::new(0.0, 1.0), C64::new(0.0, 0.0), 0.3, 0).is_err());
    }

    #[test]
    fn quadrature_boundary_satisfies_level_set() {
        let q = QuadratureDomain::new(C64::new(0.0, 1.0), C64::new(0.008, 0.0), 0.012, 3).unwrap();
        for k in 0..60 {
            let (w, _) = q.boundary(2.0 * PI * 3.0 * k as f64 / 60.0);
            let lvl = ((w - q.d0).powu(3) - q.d1).norm();
            assert!((lvl - q.rho).abs() < 1e-15, "{lvl}");
        }
    }

    #[test]
    fn halton_radical_inverse() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(2, 3) - 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn empty_request_is_an_error() {
        let d = DomainDescriptor::Ellipse(EllipseDomain::new(1.0, 2.0, 0.6).unwrap());
        let w = AnalyticDensity::constant(C64::new(1.0, 0.0));
        let req = SampleRequest {
            domain: &d,
            w1: &w,
            w2: &w,
            n1: 0,
            n2: 0,
            scheme: SampleScheme::Grid,
            seed: 0,
            placement: SolitonPlacement::Domain,
        };
        assert!(matches!(
            sample_condensate(&req),
            Err(SpectralError::EmptyDomainSample(_))
        ));
    }
}
