//! Soliton shielding for quadrature domains: a condensate filling
//! |(z − d₀)^m − d₁| < ρ with density m(z̄ − d̄₀)^{m−1}ϖ(z) produces the same
//! solution as m solitons at the roots of (z − d₀)^m = d₁.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dressing_solver::{q_on_grid, DressingError, EvaluationGrid, PhaseParams};
use crate::numerics::{CompensatedSum, C64, I};
use crate::spectral_model::{
    evaluate_density, sample_condensate, AnalyticDensity, DomainDescriptor, QuadratureDomain,
    SampleRequest, SampleScheme, SolitonDatum, SolitonPlacement, SpectralData, SpectralError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShieldingError {
    #[error("quadrature node {0} falls outside the domain")]
    NodeOutsideDomain(C64),
    #[error("probe point {0} lies in the closed domain")]
    ProbeInsideDomain(C64),
    #[error("no unique Schwarz branch at {0}")]
    BranchAmbiguity(C64),
    #[error("density exponent {n} must equal the symmetry order m = {m}")]
    ExponentMismatch { n: u32, m: u32 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dressing(#[from] DressingError),
}

/// Fixed probe points, all outside the reference domains.
pub const PROBES: [C64; 10] = [
    C64::new(3.0, 3.0),
    C64::new(-2.0, 4.0),
    C64::new(0.0, 5.0),
    C64::new(10.0, 1.0),
    C64::new(-10.0, 2.0),
    C64::new(1.0, -2.0),
    C64::new(-3.0, -3.0),
    C64::new(0.5, 0.2),
    C64::new(0.0, 2.0),
    C64::new(-1.0, 0.5),
];

/// Roots of (z − d₀)^N = d₁.
pub fn quadrature_nodes(domain: &QuadratureDomain, n: u32) -> Result<Vec<C64>, ShieldingError> {
    if n != domain.m {
        return Err(ShieldingError::ExponentMismatch { n, m: domain.m });
    }
    let nf = n as f64;
    let r = domain.d1.norm().powf(1.0 / nf);
    let arg = domain.d1.arg();
    let nodes: Vec<C64> = (0..n)
        .map(|j| domain.d0 + C64::from_polar(r, (arg + 2.0 * PI * j as f64) / nf))
        .collect();
    if let Some(bad) = nodes.iter().find(|k| !domain.contains(**k)) {
        return Err(ShieldingError::NodeOutsideDomain(*bad));
    }
    Ok(nodes)
}

/// S(z) = d̄₀ + (d̄₁ + ρ²/((z−d₀)^m − d₁))^{1/m}, taking the m-th root that
/// lands closest to z̄. On ∂𝒟 this is the branch with S(z) = z̄.
pub fn schwarz_quadrature(z: C64, domain: &QuadratureDomain) -> Result<C64, ShieldingError> {
    let p = domain.schwarz_power(z);
    let mf = domain.m as f64;
    let target = z.conj() - domain.d0.conj();
    let base = p.powf(1.0 / mf);
    let mut dist: Vec<(f64, C64)> = (0..domain.m)
        .map(|k| {
            let cand = base * C64::from_polar(1.0, 2.0 * PI * k as f64 / mf);
            ((cand - target).norm(), cand)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    if !p.is_finite() {
        return Err(ShieldingError::BranchAmbiguity(z));
    }
    if dist.len() > 1 && dist[1].0 <= dist[0].0 * (1.0 + 1e-6) {
        return Err(ShieldingError::BranchAmbiguity(z));
    }
    Ok(domain.d0.conj() + dist[0].1)
}

/// h_j = ρ²ϖ(κ_j)/Π_{s≠j}(κ_j − κ_s).
pub fn effective_norming(
    domain: &QuadratureDomain,
    density: &AnalyticDensity,
    n: u32,
) -> Result<Vec<C64>, ShieldingError> {
    let nodes = quadrature_nodes(domain, n)?;
    Ok(effective_from_nodes(domain.rho, density, &nodes))
}

fn effective_from_nodes(rho: f64, density: &AnalyticDensity, nodes: &[C64]) -> Vec<C64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, kj)| {
            let prod = nodes
                .iter()
                .enumerate()
                .filter(|(s, _)| *s != j)
                .fold(C64::new(1.0, 0.0), |acc, (_, ks)| acc * (kj - ks));
            rho * rho * evaluate_density(density, *kj) / prod
        })
        .collect()
}

/// Effective finite soliton data: one pole per quadrature node.
pub fn effective_spectral_data(
    domain: &QuadratureDomain,
    density: &AnalyticDensity,
) -> Result<SpectralData, ShieldingError> {
    let nodes = quadrature_nodes(domain, domain.m)?;
    let h = effective_from_nodes(domain.rho, density, &nodes);
    let solitons = nodes
        .iter()
        .zip(&h)
        .map(|(k, h)| SolitonDatum::condensate(*k, *h))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpectralData::new(solitons, vec![])?)
}

fn check_probe(z: C64, domain: &DomainDescriptor) -> Result<(), ShieldingError> {
    // closure test: points within a hair of the boundary count as inside
    let c = domain.center();
    let r = (z - c).norm();
    if domain.contains(z) || (r - domain.radial_extent((z - c).arg())).abs() < 1e-12 {
        return Err(ShieldingError::ProbeInsideDomain(z));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectIntegral {
    pub value: C64,
    pub error: f64,
}

/// ∬_𝒟 α(w, w̄) e^{2iθ(w)}/(z − w) dA/π by polar quadrature.
pub fn domain_integral_direct(
    z: C64,
    domain: &DomainDescriptor,
    density: &AnalyticDensity,
    phase: &PhaseParams,
) -> Result<DirectIntegral, ShieldingError> {
    check_probe(z, domain)?;
    if density.is_zero() {
        return Ok(DirectIntegral {
            value: C64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    let r = domain.integrate(1e-11, |w| {
        domain.alpha(density, w) * (2.0 * I * phase.theta(w)).exp() / (z - w)
    });
    Ok(DirectIntegral {
        value: r.value / PI,
        error: r.error / PI,
    })
}

/// Nodes per boundary sheet for the periodic trapezoid rule.
pub const GREEN_NODES_PER_SHEET: usize = 1 << 12;

/// ∮_{∂𝒟} ϖ(w)(S(w) − d̄₀)^m e^{2iθ(w)}/(z − w) dw/(2πi), using the
/// single-valued form of (S − d̄₀)^m on the boundary.
pub fn domain_integral_green(
    z: C64,
    domain: &QuadratureDomain,
    density: &AnalyticDensity,
    n: u32,
    phase: &PhaseParams,
) -> Result<C64, ShieldingError> {
    if n != domain.m {
        return Err(ShieldingError::ExponentMismatch { n, m: domain.m });
    }
    check_probe(z, &DomainDescriptor::Quadrature(*domain))?;
    let total = GREEN_NODES_PER_SHEET * domain.m as usize;
    let span = 2.0 * PI * domain.m as f64;
    let h = span / total as f64;
    let mut acc = CompensatedSum::default();
    for k in 0..total {
        let (w, dw) = domain.boundary(h * k as f64);
        let f = evaluate_density(density, w)
            * domain.schwarz_power(w)
            * (2.0 * I * phase.theta(w)).exp()
            / (z - w);
        acc.add(f * dw);
    }
    Ok(acc.value() * h / (2.0 * PI * I))
}

/// ρ² Σ_j ϖ(κ_j) e^{2iθ(κ_j)} / (Π_{s≠j}(κ_j − κ_s)·(z − κ_j)).
pub fn residue_sum(
    z: C64,
    domain: &QuadratureDomain,
    density: &AnalyticDensity,
    n: u32,
    phase: &PhaseParams,
) -> Result<C64, ShieldingError> {
    let nodes = quadrature_nodes(domain, n)?;
    let h = effective_from_nodes(domain.rho, density, &nodes);
    Ok(nodes
        .iter()
        .zip(&h)
        .map(|(k, h)| h * (2.0 * I * phase.theta(*k)).exp() / (z - k))
        .sum())
}

/// Lower-left entry of the finite-sample jump: the discrete Cauchy sum over
/// soliton points plus the breather pair z_k, −z̄_k.
pub fn finite_sum_jump(z: C64, data: &SpectralData, phase: &PhaseParams) -> C64 {
    let e = |w: C64| (2.0 * I * phase.theta(w)).exp();
    let mut acc = CompensatedSum::default();
    for s in &data.solitons {
        acc.add(s.h * e(s.kappa) / (z - s.kappa));
    }
    for b in &data.breathers {
        acc.add(b.c * e(b.z) / (z - b.z));
        let mirror = -b.z.conj();
        acc.add(-b.c.conj() * e(mirror) / (z - mirror));
    }
    acc.value()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub n: usize,
    pub q_error: f64,
    /// |finite_sum_jump − direct| at the first probe point.
    pub jump_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShieldingReport {
    pub nodes: Vec<C64>,
    pub effective_constants: Vec<C64>,
    /// "direct-green", "green-residue", "direct-residue" → max |Δ| over probes.
    pub integral_discrepancies: BTreeMap<String, f64>,
    pub samples: Vec<SampleError>,
    /// sup |q_eff − q_sample| for the largest sample size.
    pub q_discrepancy: f64,
    /// q of the effective soliton solution on the grid, in grid order.
    pub effective_q: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShieldingRequest<'a> {
    pub domain: &'a QuadratureDomain,
    pub density: &'a AnalyticDensity,
    pub grid: &'a EvaluationGrid,
    pub sample_sizes: &'a [usize],
    pub scheme: SampleScheme,
    pub seed: u64,
}

/// Builds the effective m-soliton and the sampled condensates, compares q on
/// the grid, and checks the three integral representations at the probes
/// with phase (x, t) = (0, first grid time).
pub fn verify_shielding(req: &ShieldingRequest<'_>) -> Result<ShieldingReport, ShieldingError> {
    let domain = req.domain;
    let desc = DomainDescriptor::Quadrature(*domain);
    let m = domain.m;
    let nodes = quadrature_nodes(domain, m)?;
    let effective_constants = effective_from_nodes(domain.rho, req.density, &nodes);
    let effective = effective_spectral_data(domain, req.density)?;
    let eff = q_on_grid(&effective, req.grid)?;
    if let Some((_, e)) = eff.errors.first() {
        return Err(e.clone().into());
    }

    let phase = PhaseParams::new(0.0, req.grid.t.first().copied().unwrap_or(0.0));
    let mut worst = BTreeMap::new();
    let mut direct_first = None;
    for z in PROBES {
        let direct = domain_integral_direct(z, &desc, req.density, &phase)?.value;
        let green = domain_integral_green(z, domain, req.density, m, &phase)?;
        let residue = residue_sum(z, domain, req.density, m, &phase)?;
        direct_first.get_or_insert(direct);
        for (key, v) in [
            ("direct-green", (direct - green).norm()),
            ("green-residue", (green - residue).norm()),
            ("direct-residue", (direct - residue).norm()),
        ] {
            let slot = worst.entry(key.to_string()).or_insert(0.0f64);
            *slot = slot.max(v);
        }
    }

    let zero = AnalyticDensity::zero();
    let mut samples = Vec::with_capacity(req.sample_sizes.len());
    for &n in req.sample_sizes {
        let data = sample_condensate(&SampleRequest {
            domain: &desc,
            w1: &zero,
            w2: req.density,
            n1: 0,
            n2: n,
            scheme: req.scheme,
            seed: req.seed,
            placement: SolitonPlacement::Domain,
        })?;
        // sample constants carry S·α/(πN); α includes the m(z̄ − d̄₀)^{m−1} factor
        let sampled = q_on_grid(&data, req.grid)?;
        if let Some((_, e)) = sampled.errors.first() {
            return Err(e.clone().into());
        }
        let q_error = eff
            .values
            .iter()
            .zip(&sampled.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let jump_error =
            (finite_sum_jump(PROBES[0], &data, &phase) - direct_first.unwrap_or_default()).norm();
        samples.push(SampleError {
            n,
            q_error,
            jump_error,
        });
    }
    let q_discrepancy = samples.last().map(|s| s.q_error).unwrap_or(0.0);
    Ok(ShieldingReport {
        nodes,
        effective_constants,
        integral_discrepancies: worst,
        samples,
        q_discrepancy,
        effective_q: eff.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_must_match() {
        let d = QuadratureDomain::new(I, C64::new(0.001, 0.0), 0.01, 2).unwrap();
        assert!(matches!(
            quadrature_nodes(&d, 3),
            Err(ShieldingError::ExponentMismatch { .. })
        ));
    }

    #[test]
    fn probe_inside_is_rejected() {
        let d = QuadratureDomain::new(I, C64::new(0.0, 0.0), 0.3, 1).unwrap();
        let w = AnalyticDensity::constant(C64::new(1.0, 0.0));
        let r = domain_integral_direct(
            I,
            &DomainDescriptor::Quadrature(d),
            &w,
            &PhaseParams::new(0.0, 0.0),
        );
        assert!(matches!(r, Err(ShieldingError::ProbeInsideDomain(_))));
    }

    #[test]
    fn probes_outside_reference_domains() {
        let refs = [
            QuadratureDomain::new(C64::new(0.0, 0.25), C64::new(0.0, 0.0), 0.1, 1).unwrap(),
            QuadratureDomain::new(I, C64::new(0.001, 0.0), 0.01, 2).unwrap(),
            QuadratureDomain::new(I, C64::new(0.008, 0.0), 0.012, 3).unwrap(),
        ];
        for d in refs {
            assert!(PROBES.iter().all(|z| !d.contains(*z)));
        }
    }
}
