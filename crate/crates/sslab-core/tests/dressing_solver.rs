use proptest::prelude::*;
use sslab_core::dressing_solver::*;
use sslab_core::numerics::C64;
use sslab_core::spectral_model::{BreatherDatum, SolitonDatum, SpectralData};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn solitons(list: &[(f64, C64)]) -> SpectralData {
    let s = list
        .iter()
        .map(|&(z, h)| SolitonDatum::new(c(0.0, z), h).unwrap())
        .collect();
    SpectralData::new(s, vec![]).unwrap()
}

fn q(data: &SpectralData, x: f64, t: f64) -> C64 {
    q_at(&expand_spectrum(data).unwrap(), &PhaseParams::new(x, t)).unwrap()
}

/// Closed-form one-soliton: q = (−i h̄/|h|)·2ζ·sech(2ζ(x − 4ζ²t − x₀)),
/// x₀ = ln(|h|/2ζ)/(2ζ).
fn sech_soliton(zeta: f64, h: C64, x: f64, t: f64) -> C64 {
    let x0 = (h.norm() / (2.0 * zeta)).ln() / (2.0 * zeta);
    let phase = -C64::new(0.0, 1.0) * h.conj() / h.norm();
    phase * (2.0 * zeta / (2.0 * zeta * (x - 4.0 * zeta * zeta * t - x0)).cosh())
}

/// Hand elimination of the 2×2 residue system for one soliton, d = κ − κ̄:
/// b₁ = βd²/(d²+αβ), a₁ = αb₁/d, a₂ = αd²/(d²+αβ), b₂ = −βa₂/d.
fn one_soliton_m(zeta: f64, h: C64, x: f64, t: f64, z: C64) -> [[C64; 2]; 2] {
    let p = c(0.0, zeta);
    let s = p.conj();
    let th = |w: C64| w * x + w * w * w * (4.0 * t);
    let i = c(0.0, 1.0);
    let alpha = h * (2.0 * i * th(p)).exp();
    let beta = -h.conj() * (-2.0 * i * th(s)).exp();
    let d = p - s;
    let den = d * d + alpha * beta;
    let b1 = beta * d * d / den;
    let a1 = alpha * b1 / d;
    let a2 = alpha * d * d / den;
    let b2 = -beta * a2 / d;
    [
        [1.0 + a1 / (z - p), b1 / (z - s)],
        [a2 / (z - p), 1.0 + b2 / (z - s)],
    ]
}

fn det(m: &[[C64; 2]; 2]) -> C64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn mixed() -> SpectralData {
    SpectralData::new(
        vec![
            SolitonDatum::new(c(0.0, 0.4), c(0.0, -1.0)).unwrap(),
            SolitonDatum::new(c(0.0, 0.9), c(0.0, 2.0)).unwrap(),
        ],
        vec![BreatherDatum::new(c(0.5, 0.6), c(0.3, -0.8)).unwrap()],
    )
    .unwrap()
}

#[test]
fn one_soliton_unit_amplitude() {
    let v = q(&solitons(&[(0.5, c(0.0, -1.0))]), 0.0, 0.0);
    assert!((v - 1.0).norm() < 1e-14, "{v}");
}

#[test]
fn one_soliton_sech_profile() {
    for (zeta, h) in [(0.5, c(0.0, -1.0)), (0.8, c(0.0, 0.3)), (1.2, c(0.7, -2.0))] {
        let data = solitons(&[(zeta, h)]);
        for t in [0.0, 0.7] {
            for k in 0..=200 {
                let x = -10.0 + 0.1 * k as f64;
                let got = q(&data, x, t);
                let want = sech_soliton(zeta, h, x, t);
                assert!(
                    (got - want).norm() < 1e-10,
                    "ζ={zeta} x={x} t={t}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn velocity_is_four_zeta_squared() {
    let zeta = 0.6;
    let data = solitons(&[(zeta, c(0.0, -2.0 * zeta))]);
    // peak of |q| at t = 2 sits at x = 4ζ²·2
    let peak = (0..4001)
        .map(|k| -5.0 + 0.0025 * k as f64)
        .max_by(|a, b| {
            q(&data, *a, 2.0)
                .norm()
                .total_cmp(&q(&data, *b, 2.0).norm())
        })
        .unwrap();
    assert!((peak - 8.0 * zeta * zeta).abs() < 3e-3, "{peak}");
}

#[test]
fn m_matches_hand_elimination() {
    let (zeta, h) = (0.7, c(0.4, -1.1));
    let data = solitons(&[(zeta, h)]);
    let sys = expand_spectrum(&data).unwrap();
    for (x, t) in [(0.0, 0.0), (1.3, -0.2), (-2.0, 0.5)] {
        let sol = solve_m(&sys, &PhaseParams::new(x, t)).unwrap();
        for z in [c(0.3, 0.2), c(-1.0, 2.0), c(0.0, -0.3), c(5.0, -5.0)] {
            let got = evaluate_m(&sol, z).unwrap();
            let want = one_soliton_m(zeta, h, x, t, z);
            for r in 0..2 {
                for k in 0..2 {
                    assert!((got[r][k] - want[r][k]).norm() < 1e-12, "{r}{k} at {z}");
                }
            }
        }
    }
}

#[test]
fn determinant_is_one() {
    let sys = expand_spectrum(&mixed()).unwrap();
    let mut seed = 12345u64;
    let mut next = || {
        seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((seed >> 11) as f64 / (1u64 << 53) as f64) * 6.0 - 3.0
    };
    for (x, t) in [(0.0, 0.0), (-1.5, 0.3), (2.0, -0.1)] {
        let sol = solve_m(&sys, &PhaseParams::new(x, t)).unwrap();
        for _ in 0..100 {
            let z = c(next(), next());
            let d = det(&evaluate_m(&sol, z).unwrap());
            assert!((d - 1.0).norm() < 1e-10, "{z}: {d}");
        }
    }
}

#[test]
fn m_tends_to_identity() {
    let sys = expand_spectrum(&mixed()).unwrap();
    let sol = solve_m(&sys, &PhaseParams::new(0.3, 0.1)).unwrap();
    let dev = |z: C64| {
        let m = evaluate_m(&sol, z).unwrap();
        ((m[0][0] - 1.0).norm())
            .max(m[0][1].norm())
            .max(m[1][0].norm())
            .max((m[1][1] - 1.0).norm())
    };
    assert!(dev(c(1e8, 0.0)) < 1e-7);
    // |z|·‖M − I‖ settles to a constant over 10² … 10⁶
    let scaled: Vec<f64> = (2..=6)
        .map(|k| 10f64.powi(k) * dev(c(0.0, 10f64.powi(k))))
        .collect();
    let cmax = scaled.iter().cloned().fold(0.0, f64::max);
    let cmin = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(cmax / cmin < 1.1, "{scaled:?}");
}

#[test]
fn evaluating_at_a_pole_is_an_error() {
    let sys = expand_spectrum(&solitons(&[(0.5, c(0.0, -1.0))])).unwrap();
    let sol = solve_m(&sys, &PhaseParams::new(0.0, 0.0)).unwrap();
    assert!(matches!(
        evaluate_m(&sol, c(0.0, 0.5)),
        Err(DressingError::PoleEvaluation(_))
    ));
}

#[test]
fn two_solitons_real() {
    let data = solitons(&[(0.4, c(0.0, -1.0)), (0.8, c(0.0, -1.0))]);
    for k in 0..=100 {
        let x = -10.0 + 0.2 * k as f64;
        assert!(q(&data, x, 0.0).im.abs() < 1e-12);
    }
}

#[test]
fn breathers_are_real() {
    let data = mixed();
    for k in 0..=60 {
        let x = -6.0 + 0.2 * k as f64;
        for t in [-0.5, 0.0, 0.4] {
            let v = q(&data, x, t);
            assert!(v.im.abs() < 1e-10 * v.norm().max(1.0), "x={x} t={t}: {v}");
        }
    }
}

#[test]
fn flipping_norming_constants_flips_q() {
    let data = mixed();
    let flipped = SpectralData::new(
        data.solitons
            .iter()
            .map(|s| SolitonDatum::new(s.kappa, -s.h).unwrap())
            .collect(),
        data.breathers
            .iter()
            .map(|b| BreatherDatum::new(b.z, -b.c).unwrap())
            .collect(),
    )
    .unwrap();
    for k in 0..=40 {
        let x = -4.0 + 0.2 * k as f64;
        let a = q(&data, x, 0.2);
        let b = q(&flipped, x, 0.2);
        assert!((a + b).norm() < 1e-13 * a.norm().max(1.0));
    }
}

#[test]
fn translation_rescales_norming_constants() {
    let list = [
        (0.4, c(0.0, -1.0)),
        (0.75, c(0.0, 0.5)),
        (1.1, c(0.0, -3.0)),
    ];
    let s = 1.7;
    let data = solitons(&list);
    let moved: Vec<(f64, C64)> = list
        .iter()
        .map(|&(z, h)| (z, h * (-2.0 * z * s).exp()))
        .collect();
    let moved = solitons(&moved);
    for k in 0..=40 {
        let x = -6.0 + 0.3 * k as f64;
        assert!((q(&data, x + s, 0.3) - q(&moved, x, 0.3)).norm() < 1e-10);
    }
}

#[test]
fn two_soliton_asymptotic_separation() {
    // For t → ±∞ each soliton is a single sech whose norming constant picks up
    // ((ζ_j − ζ_k)/(ζ_j + ζ_k))² from every soliton ahead of it.
    let (z1, z2) = (0.4, 0.8);
    let (h1, h2) = (c(0.0, -1.0), c(0.0, -1.0));
    let data = solitons(&[(z1, h1), (z2, h2)]);
    let f = ((z1 - z2) / (z1 + z2)).powi(2);
    for t in [50.0, -50.0] {
        // at t > 0 the faster soliton (ζ₂) leads
        let (h1s, h2s) = if t > 0.0 { (h1 * f, h2) } else { (h1, h2 * f) };
        for x in [4.0 * z1 * z1 * t, 4.0 * z2 * z2 * t] {
            for dx in [-3.0, -1.0, 0.0, 1.0, 3.0] {
                let got = q(&data, x + dx, t);
                let want = sech_soliton(z1, h1s, x + dx, t) + sech_soliton(z2, h2s, x + dx, t);
                assert!(
                    (got - want).norm() < 1e-6,
                    "t={t} x={}: {got} vs {want}",
                    x + dx
                );
            }
        }
    }
}

#[test]
fn grid_matches_pointwise_solves() {
    let data = solitons(&[(0.5, c(0.0, -1.0))]);
    let grid = EvaluationGrid::new(vec![-1.0, 0.0, 2.5], vec![0.0]);
    let out = q_on_grid(&data, &grid).unwrap();
    assert!(out.errors.is_empty());
    for (k, x) in grid.x.iter().enumerate() {
        assert_eq!(out.values[k], q(&data, *x, 0.0));
    }
}

#[test]
fn grid_bit_identical_across_thread_counts() {
    let data = mixed();
    let grid = EvaluationGrid::uniform_x(-5.0, 5.0, 0.25, vec![-0.2, 0.0, 0.3]);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| q_on_grid(&data, &grid).unwrap())
    };
    let a = run(1);
    let b = run(8);
    assert_eq!(a.values.len(), 123);
    for (u, v) in a.values.iter().zip(&b.values) {
        assert_eq!(u.re.to_bits(), v.re.to_bits());
        assert_eq!(u.im.to_bits(), v.im.to_bits());
    }
}

#[test]
fn grid_order_is_t_major() {
    let grid = EvaluationGrid::new(vec![0.0, 1.0], vec![5.0, 6.0]);
    assert_eq!(grid.point(1), PhaseParams::new(1.0, 5.0));
    assert_eq!(grid.point(2), PhaseParams::new(0.0, 6.0));
    let g = EvaluationGrid::uniform_x(-1.0, 1.0, 0.1, vec![0.0]);
    assert_eq!(g.x.len(), 21);
}

fn pair(coef_up: C64, coef_down: C64) -> PoleSystem {
    PoleSystem {
        poles: vec![
            Pole {
                position: c(0.0, -0.5),
                kind: ResidueKind::UpperTriangular,
                coefficient: coef_down,
            },
            Pole {
                position: c(0.0, 0.5),
                kind: ResidueKind::LowerTriangular,
                coefficient: coef_up,
            },
        ],
    }
}

#[test]
fn singular_and_ill_conditioned_systems_are_reported() {
    // with d = κ − κ̄ = i the 2×2 determinant is d² + αβ, zero for α = β = 1
    let at0 = PhaseParams::new(0.0, 0.0);
    assert!(matches!(
        solve_m(&pair(c(1.0, 0.0), c(1.0, 0.0)), &at0),
        Err(DressingError::SingularSystem { .. })
    ));
    let near = solve_m(&pair(c(1.0 + 1e-13, 0.0), c(1.0, 0.0)), &at0).unwrap();
    assert!(near.diagnostics.ill_conditioned, "{:?}", near.diagnostics);
    let physical = solve_m(&expand_spectrum(&mixed()).unwrap(), &at0).unwrap();
    assert!(!physical.diagnostics.ill_conditioned);
    assert!(physical.diagnostics.condition >= 1.0);
}

#[test]
fn coincident_poles_rejected() {
    let data = solitons(&[(0.5, c(0.0, -1.0)), (0.5 + 1e-11, c(0.0, -1.0))]);
    assert!(matches!(
        expand_spectrum(&data),
        Err(DressingError::DuplicatePole(..))
    ));
}

fn soliton_slab(data: &SpectralData, xs: &[f64], ts: &[f64]) -> Vec<f64> {
    let sys = expand_spectrum(data).unwrap();
    ts.iter()
        .flat_map(|&t| xs.iter().map(move |&x| (x, t)).collect::<Vec<_>>())
        .map(|(x, t)| q_at(&sys, &PhaseParams::new(x, t)).unwrap().re)
        .collect()
}

fn max_residual(data: &SpectralData, h: f64) -> f64 {
    let n = (8.0 / h).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|k| -4.0 + h * k as f64).collect();
    let ts = [0.1 - h, 0.1, 0.1 + h];
    let q = soliton_slab(data, &xs, &ts);
    let r = mkdv_residual(&q, xs.len(), 3, h, h).unwrap();
    r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn residual_of_zero_is_zero() {
    let r = mkdv_residual(&vec![0.0; 7 * 4], 7, 4, 0.1, 0.1).unwrap();
    assert_eq!(r.len(), 2);
    assert!(r.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn one_soliton_solves_mkdv() {
    let data = solitons(&[(0.5, c(0.0, -1.0))]);
    let r = max_residual(&data, 1e-3);
    assert!(r < 1e-4, "{r}");
}

#[test]
fn residual_converges_at_second_order() {
    let data = solitons(&[
        (0.6, c(0.0, -1.2)),
        (0.75, c(0.0, -1.5)),
        (0.9, c(0.0, -1.8)),
    ]);
    let coarse = max_residual(&data, 2e-3);
    let fine = max_residual(&data, 1e-3);
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "{coarse} {fine} {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn soliton_gas_is_real_and_unimodular(
        zetas in prop::collection::btree_set(1u32..40, 1..6),
        hs in prop::collection::vec(-3.0f64..3.0, 6),
        x in -5.0f64..5.0, t in -0.5f64..0.5,
    ) {
        let list: Vec<(f64, C64)> = zetas.iter().zip(&hs).map(|(&z, &h)| {
            let h = if h.abs() < 0.1 { 0.1 } else { h };
            (0.05 * z as f64, c(0.0, h))
        }).collect();
        let data = solitons(&list);
        let sys = expand_spectrum(&data).unwrap();
        let sol = solve_m(&sys, &PhaseParams::new(x, t)).unwrap();
        let v = recover_q(&sol);
        prop_assert!(v.im.abs() < 1e-10 * v.norm().max(1.0));
        let d = det(&evaluate_m(&sol, c(0.37, 0.11)).unwrap());
        prop_assert!((d - 1.0).norm() < 1e-8);
    }

    #[test]
    fn amplitude_bounded_by_twice_zeta_sum(
        zetas in prop::collection::btree_set(1u32..30, 1..5),
        x in -8.0f64..8.0,
    ) {
        // |q| ≤ 2Σζ_j for reflectionless potentials
        let list: Vec<(f64, C64)> = zetas.iter().map(|&z| (0.05 * z as f64, c(0.0, -1.0))).collect();
        let bound: f64 = list.iter().map(|(z, _)| 2.0 * z).sum();
        let v = q(&solitons(&list), x, 0.0);
        prop_assert!(v.norm() <= bound * (1.0 + 1e-10));
    }
}
