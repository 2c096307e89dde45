//! Elliptic and theta functions on the genus-one surface
//! w² = (z²+η₁²)(z²+η₂²), with explicit branch and side handling.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{integrate_adaptive, C64, I};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point {0} lies strictly inside a branch cut; request a side")]
    OnCut(C64),
    #[error("no integration path reaches {0} without crossing a cut")]
    PathThroughCut(C64),
}

/// Which boundary value to take on a cut. `Plus` is the left side of the
/// upward-oriented imaginary-axis segments (Re z < 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Auto,
    Plus,
    Minus,
}

pub fn agm(a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "agm needs positive arguments");
    let (mut a, mut b) = (a, b);
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, parameter convention m = k².
pub fn elliptic_k(m: f64) -> Result<f64, SpecialError> {
    if !(0.0..1.0).contains(&m) {
        return Err(SpecialError::Domain(format!(
            "elliptic_k needs 0 <= m < 1, got {m}"
        )));
    }
    Ok(PI / (2.0 * agm(1.0, (1.0 - m).sqrt())))
}

/// Jacobi dn(u | m) by the descending Landen (AGM) scheme.
pub fn jacobi_dn(u: f64, m: f64) -> Result<f64, SpecialError> {
    if !(0.0..1.0).contains(&m) {
        return Err(SpecialError::Domain(format!(
            "jacobi_dn needs 0 <= m < 1, got {m}"
        )));
    }
    if m == 0.0 {
        return Ok(1.0);
    }
    let mut a = vec![1.0];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > 1e-17 && a.len() < 40 {
        let an = *a.last().unwrap();
        a.push(0.5 * (an + b));
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for k in (1..=n).rev() {
        phi = 0.5 * (phi + (c[k] / a[k] * phi.sin()).asin());
    }
    Ok((1.0 - m * phi.sin().powi(2)).sqrt())
}

/// θ(z; τ) = Σ exp(iπn²τ + 2iπnz).
pub fn theta3(z: C64, tau: C64) -> Result<C64, SpecialError> {
    if tau.im <= 0.0 {
        return Err(SpecialError::Domain(format!(
            "theta3 needs Im tau > 0, got {tau}"
        )));
    }
    // z = w + kτ with |Im w| <= Im τ / 2, then strip the integer real part.
    let k = (z.im / tau.im).round();
    let mut w = z - tau * k;
    w.re -= w.re.round();
    let prefactor = if k != 0.0 {
        (-I * PI * k * k * tau - 2.0 * I * PI * k * w).exp()
    } else {
        C64::new(1.0, 0.0)
    };
    let mut nmax = 1usize;
    loop {
        let nf = nmax as f64;
        let lhs = (-PI * tau.im * nf * nf).exp() * (2.0 * nf + 1.0);
        let rhs = 1e-16 * (2.0 * PI * nf * w.im.abs()).exp().max(1.0);
        if lhs < rhs || nmax > 200 {
            break;
        }
        nmax += 1;
    }
    let mut sum = C64::new(1.0, 0.0);
    for n in 1..=nmax {
        let nf = n as f64;
        let base = I * PI * nf * nf * tau;
        let shift = 2.0 * I * PI * nf * w;
        sum += (base + shift).exp() + (base - shift).exp();
    }
    Ok(prefactor * sum)
}

/// Data of the genus-one surface attached to the foci iη₁, iη₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceContext {
    pub eta1: f64,
    pub eta2: f64,
    pub m_param: f64,
    pub tau: C64,
    pub k_m: f64,
    pub k_1m: f64,
    /// A(+∞), integrated numerically once at construction.
    pub abel_infinity: C64,
}

impl SurfaceContext {
    pub fn new(eta1: f64, eta2: f64) -> Result<Self, SpecialError> {
        if !(eta1 > 0.0 && eta2 > eta1 && eta2.is_finite()) {
            return Err(SpecialError::Domain(
                "eta1 < eta2 required (both positive)".into(),
            ));
        }
        let m_param = eta1 * eta1 / (eta2 * eta2);
        let k_m = elliptic_k(m_param)?;
        let k_1m = elliptic_k(1.0 - m_param)?;
        let mut ctx = Self {
            eta1,
            eta2,
            m_param,
            tau: C64::new(0.0, k_1m / (2.0 * k_m)),
            k_m,
            k_1m,
            abel_infinity: C64::new(0.0, 0.0),
        };
        ctx.abel_infinity = abel_at_infinity(&ctx);
        Ok(ctx)
    }

    fn center(&self) -> f64 {
        0.5 * (self.eta1 + self.eta2)
    }

    fn half_gap(&self) -> f64 {
        0.5 * (self.eta2 - self.eta1)
    }

    /// Prefactor of ω = omega_scale · dz / R(z).
    pub fn omega_scale(&self) -> C64 {
        C64::new(self.eta2, 0.0) / (4.0 * I * self.k_m)
    }

    /// Classifies a point on the imaginary axis relative to the cuts.
    pub fn segment_of(&self, z: C64) -> Segment {
        if z.re != 0.0 {
            return Segment::Off;
        }
        let y = z.im;
        let a = y.abs();
        if a > self.eta1 && a < self.eta2 {
            if y > 0.0 {
                Segment::Upper
            } else {
                Segment::Lower
            }
        } else if a < self.eta1 {
            Segment::Gap
        } else if a == self.eta1 || a == self.eta2 {
            Segment::Endpoint
        } else {
            Segment::Off
        }
    }
}

/// Location of a point relative to [−iη₂, iη₂].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Off,
    /// ℐ = (iη₁, iη₂)
    Upper,
    /// ℐ̄ = (−iη₂, −iη₁)
    Lower,
    /// (−iη₁, iη₁)
    Gap,
    Endpoint,
}

/// √((z²+η₁²)(z²+η₂²)) cut on ℐ ∪ ℐ̄, R ~ z² at infinity.
pub fn r_surd(z: C64, ctx: &SurfaceContext, side: Side) -> Result<C64, SpecialError> {
    let (e1, e2) = (ctx.eta1, ctx.eta2);
    match ctx.segment_of(z) {
        Segment::Endpoint => return Ok(C64::new(0.0, 0.0)),
        seg @ (Segment::Upper | Segment::Lower) => {
            let y = z.im;
            let p = ((y - e1) * (y + e1) * (e2 - y) * (e2 + y)).abs().sqrt();
            let sign = match (seg, side) {
                (_, Side::Auto) => return Err(SpecialError::OnCut(z)),
                (Segment::Upper, Side::Plus) | (Segment::Lower, Side::Minus) => -1.0,
                _ => 1.0,
            };
            return Ok(C64::new(0.0, sign * p));
        }
        _ => {}
    }
    Ok(r_surd_offset(z, C64::new(0.0, 0.0), ctx))
}

/// R(base + delta) off the cuts, with every factor z − a formed as
/// (base − a) + delta. When base is an endpoint the coincident factor is
/// exactly delta, which keeps endpoint-anchored quadratures accurate.
pub fn r_surd_offset(base: C64, delta: C64, ctx: &SurfaceContext) -> C64 {
    let (e1, e2) = (ctx.eta1, ctx.eta2);
    let y0 = ctx.center();
    let f = |a: f64| (base - I * a) + delta;
    let u = f(y0);
    let l = f(-y0);
    // u·√(1 + c²/u²) with u² + c² = (z − iη₁)(z − iη₂)
    let up = u * (f(e1) * f(e2) / (u * u)).sqrt();
    let lo = l * (f(-e1) * f(-e2) / (l * l)).sqrt();
    up * lo
}

/// ((z²+η₁²)/(z²+η₂²))^{1/4}, cut on ℐ ∪ ℐ̄, γ(∞) = 1.
pub fn gamma_quartic(z: C64, ctx: &SurfaceContext, side: Side) -> Result<C64, SpecialError> {
    let (e1, e2) = (ctx.eta1, ctx.eta2);
    match ctx.segment_of(z) {
        Segment::Endpoint => {
            return Err(SpecialError::Domain(format!(
                "gamma is singular or zero at endpoint {z}"
            )))
        }
        seg @ (Segment::Upper | Segment::Lower) => {
            let y = z.im;
            let modulus = ((y * y - e1 * e1) / (e2 * e2 - y * y)).abs().powf(0.25);
            // one ratio is negative real on the cut, the other positive
            let quarter = match (seg, side) {
                (_, Side::Auto) => return Err(SpecialError::OnCut(z)),
                (Segment::Upper, Side::Plus) | (Segment::Lower, Side::Minus) => -PI / 4.0,
                _ => PI / 4.0,
            };
            return Ok(C64::from_polar(modulus, quarter));
        }
        _ => {}
    }
    let r1 = (z - I * e1) / (z - I * e2);
    let r2 = (z + I * e1) / (z + I * e2);
    Ok(r1.powf(0.25) * r2.powf(0.25))
}

/// ω / dz at z.
pub fn omega_density(z: C64, ctx: &SurfaceContext, side: Side) -> Result<C64, SpecialError> {
    Ok(ctx.omega_scale() / r_surd(z, ctx, side)?)
}

const ABEL_TOL: f64 = 1e-14;

/// A(+∞) = ∫ ω from iη₂ up the imaginary axis to i∞ (no cut there).
pub fn abel_at_infinity(ctx: &SurfaceContext) -> C64 {
    let e2 = ctx.eta2;
    // y = η₂ + (v/(1−v))², v ∈ (0,1)
    let val = integrate_adaptive(0.0, 1.0, ABEL_TOL, |v| {
        if v <= 0.0 || v >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        let s = (v / (1.0 - v)).powi(2);
        let ds = 2.0 * v / (1.0 - v).powi(3);
        let r = r_surd_offset(C64::new(0.0, e2), C64::new(0.0, s), ctx);
        if r.norm() > 0.0 {
            ctx.omega_scale() * I / r * ds
        } else {
            C64::new(0.0, 0.0)
        }
    });
    val.value
}

/// Abel map A(z) = ∫_{iη₂}^z ω in ℂ \ [−iη₂, iη₂].
///
/// The value is A(+∞) minus the integral along the horizontal ray from z to
/// ±∞; the ray direction keeps the path off the cuts (leftward for the
/// plus side, rightward for the minus side).
pub fn abel_map(z: C64, ctx: &SurfaceContext, side: Side) -> Result<C64, SpecialError> {
    let on_axis_segment = z.re == 0.0 && z.im.abs() <= ctx.eta2;
    let dir = if on_axis_segment {
        match side {
            Side::Plus => -1.0,
            Side::Minus => 1.0,
            Side::Auto => return Err(SpecialError::PathThroughCut(z)),
        }
    } else if z.re < 0.0 {
        -1.0
    } else {
        1.0
    };
    let tail = integrate_adaptive(0.0, 1.0, ABEL_TOL, |v| {
        if v <= 0.0 || v >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        let s = (v / (1.0 - v)).powi(2);
        let ds = 2.0 * v / (1.0 - v).powi(3);
        let r = r_surd_offset(z, C64::new(dir * s, 0.0), ctx);
        if r.norm() > 0.0 {
            ctx.omega_scale() / r * (dir * ds)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(ctx.abel_infinity - tail.value)
}

/// ∮_a ω, the a-cycle crossing the gap (−iη₁, iη₁) upward on sheet one and
/// returning on sheet two.
pub fn a_cycle(ctx: &SurfaceContext) -> C64 {
    let half = integrate_adaptive(-PI / 2.0, PI / 2.0, ABEL_TOL, |psi| {
        let (base, delta, ds) = gap_point(ctx.eta1, psi);
        let r = r_surd_offset(base, delta, ctx);
        if r.norm() > 0.0 {
            ctx.omega_scale() * ds / r
        } else {
            C64::new(0.0, 0.0)
        }
    });
    half.value * 2.0
}

/// s = iη₁ sin ψ on the gap, as (nearest endpoint, offset, ds/dψ); the offset
/// uses half-angle forms so it stays accurate as ψ → ±π/2.
pub fn gap_point(eta1: f64, psi: f64) -> (C64, C64, C64) {
    let ds = C64::new(0.0, eta1 * psi.cos());
    if psi >= 0.0 {
        let h = (0.5 * (PI / 2.0 - psi)).sin();
        (C64::new(0.0, eta1), C64::new(0.0, -2.0 * eta1 * h * h), ds)
    } else {
        let h = (0.5 * (PI / 2.0 + psi)).sin();
        (C64::new(0.0, -eta1), C64::new(0.0, 2.0 * eta1 * h * h), ds)
    }
}

/// s = iη₁ + i(η₂−η₁)sin²ψ on ℐ, ψ ∈ [0, π/2], in the same
/// (endpoint, offset, ds/dψ) form.
pub fn band_point(eta1: f64, eta2: f64, psi: f64) -> (C64, C64, C64) {
    let w = eta2 - eta1;
    let ds = C64::new(0.0, w * (2.0 * psi).sin());
    if psi <= PI / 4.0 {
        (
            C64::new(0.0, eta1),
            C64::new(0.0, w * psi.sin().powi(2)),
            ds,
        )
    } else {
        (
            C64::new(0.0, eta2),
            C64::new(0.0, -w * psi.cos().powi(2)),
            ds,
        )
    }
}

/// ∮_b ω along a clockwise circle enclosing ℐ only.
pub fn b_cycle(ctx: &SurfaceContext) -> C64 {
    let center = C64::new(0.0, ctx.center());
    let radius = ctx.half_gap() + 0.5 * ctx.eta1;
    let n = 4096;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let e = C64::from_polar(1.0, phi);
        let z = center + radius * e;
        let r = r_surd(z, ctx, Side::Auto).expect("circle avoids the cuts");
        acc += ctx.omega_scale() / r * (I * radius * e);
    }
    -acc * (2.0 * PI / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> SurfaceContext {
        SurfaceContext::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn agm_fixed_point_and_symmetry() {
        assert_eq!(agm(1.0, 1.0), 1.0);
        assert!((agm(1.0, 0.5) - agm(0.5, 1.0)).abs() < 1e-16);
    }

    #[test]
    fn k_rejects_m_one() {
        assert!(elliptic_k(1.0).is_err());
        assert!(elliptic_k(-0.1).is_err());
        assert!((elliptic_k(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn dn_degenerate_cases() {
        assert_eq!(jacobi_dn(0.7, 0.0).unwrap(), 1.0);
        assert!((jacobi_dn(0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(jacobi_dn(0.0, 1.0).is_err());
    }

    #[test]
    fn tau_for_reference_foci() {
        let c = ctx();
        assert!((c.tau.im - 0.6396307855855031).abs() < 1e-13);
        assert_eq!(c.tau.re, 0.0);
    }

    #[test]
    fn theta_rejects_lower_half_plane() {
        assert!(theta3(C64::new(0.1, 0.0), C64::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn r_cut_values_and_endpoints() {
        let c = ctx();
        assert_eq!(
            r_surd(C64::new(0.0, 1.0), &c, Side::Auto).unwrap(),
            C64::new(0.0, 0.0)
        );
        assert!(r_surd(C64::new(0.0, 1.5), &c, Side::Auto).is_err());
        let rp = r_surd(C64::new(0.0, 1.5), &c, Side::Plus).unwrap();
        let off = r_surd(C64::new(-1e-12, 1.5), &c, Side::Auto).unwrap();
        assert!((rp - off).norm() < 1e-9, "{rp} {off}");
        let rp = r_surd(C64::new(0.0, -1.5), &c, Side::Plus).unwrap();
        let off = r_surd(C64::new(-1e-12, -1.5), &c, Side::Auto).unwrap();
        assert!((rp - off).norm() < 1e-9, "{rp} {off}");
    }

    #[test]
    fn r_is_positive_at_origin_and_on_gap() {
        let c = ctx();
        assert!((r_surd(C64::new(0.0, 0.0), &c, Side::Auto).unwrap() - 2.0).norm() < 1e-15);
        let v = r_surd(C64::new(0.0, 0.5), &c, Side::Auto).unwrap();
        assert!(v.re > 0.0 && v.im.abs() < 1e-15);
    }

    #[test]
    fn gamma_side_values_match_offsets() {
        let c = ctx();
        for y in [1.3, -1.7] {
            for (side, dx) in [(Side::Plus, -1e-13), (Side::Minus, 1e-13)] {
                let v = gamma_quartic(C64::new(0.0, y), &c, side).unwrap();
                let off = gamma_quartic(C64::new(dx, y), &c, Side::Auto).unwrap();
                assert!((v - off).norm() < 1e-6, "y={y} {side:?} {v} {off}");
            }
        }
    }

    #[test]
    fn gamma_has_no_cut_on_gap() {
        let c = ctx();
        let l = gamma_quartic(C64::new(-1e-12, 0.5), &c, Side::Auto).unwrap();
        let r = gamma_quartic(C64::new(1e-12, 0.5), &c, Side::Auto).unwrap();
        assert!((l - r).norm() < 1e-10);
    }

    #[test]
    fn abel_needs_side_on_segment() {
        let c = ctx();
        assert!(abel_map(C64::new(0.0, 0.5), &c, Side::Auto).is_err());
        assert!(abel_map(C64::new(0.0, 3.0), &c, Side::Auto).is_ok());
    }
}
