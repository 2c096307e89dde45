//! Exact solution of the meromorphic Riemann–Hilbert problem for a finite set
//! of soliton and breather poles.
//!
//! With M(z) = I + Σ_p A_p/(z − p), every upper half-plane pole carries a
//! residue whose only nonzero column is the first, and every lower half-plane
//! pole one whose only nonzero column is the second. The residue conditions
//! become a dense 2N×2N linear system with two right-hand sides (one per row
//! of M).

use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{CompensatedSum, C64, I};
use crate::spectral_model::SpectralData;

/// Poles closer than this are treated as coincident.
pub const POLE_SEPARATION: f64 = 1e-10;

/// Condition estimates above this raise the ill-conditioning flag.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DressingError {
    #[error("poles {0} and {1} are closer than {POLE_SEPARATION:e}")]
    DuplicatePole(C64, C64),
    #[error("dressing system is singular at x = {x}, t = {t}")]
    SingularSystem { x: f64, t: f64 },
    #[error("M(z) evaluated at the pole {0}")]
    PoleEvaluation(C64),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
}

/// The physical coordinates entering θ(z) = xz + 4tz³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub x: f64,
    pub t: f64,
}

impl PhaseParams {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }

    pub fn theta(&self, z: C64) -> C64 {
        z * self.x + z * z * z * (4.0 * self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidueKind {
    /// Upper half-plane pole, residue lim M(z)·[[0,0],[c e^{2iθ},0]].
    LowerTriangular,
    /// Lower half-plane pole, residue lim M(z)·[[0,c e^{−2iθ}],[0,0]].
    UpperTriangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub position: C64,
    pub kind: ResidueKind,
    pub coefficient: C64,
}

impl Pole {
    /// log of the nilpotent entry c·e^{±2iθ(p)}, kept in log form so huge
    /// and tiny exponentials never overflow.
    fn log_weight(&self, phase: &PhaseParams) -> C64 {
        let th = 2.0 * I * phase.theta(self.position);
        let lc = self.coefficient.ln();
        match self.kind {
            ResidueKind::LowerTriangular => lc + th,
            ResidueKind::UpperTriangular => lc - th,
        }
    }
}

/// All poles of the problem in assembly order, (Im, Re) ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PoleSystem {
    pub poles: Vec<Pole>,
}

impl PoleSystem {
    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }
}

/// Expands solitons into the pair {κ, κ̄} and breathers into the quadruple
/// {z, z̄, −z̄, −z}.
pub fn expand_spectrum(data: &SpectralData) -> Result<PoleSystem, DressingError> {
    use ResidueKind::*;
    let mut poles = Vec::with_capacity(2 * data.solitons.len() + 4 * data.breathers.len());
    for s in &data.solitons {
        poles.push(Pole {
            position: s.kappa,
            kind: LowerTriangular,
            coefficient: s.h,
        });
        poles.push(Pole {
            position: s.kappa.conj(),
            kind: UpperTriangular,
            coefficient: -s.h.conj(),
        });
    }
    for b in &data.breathers {
        let (z, c) = (b.z, b.c);
        poles.push(Pole {
            position: z,
            kind: LowerTriangular,
            coefficient: c,
        });
        poles.push(Pole {
            position: z.conj(),
            kind: UpperTriangular,
            coefficient: -c.conj(),
        });
        poles.push(Pole {
            position: -z.conj(),
            kind: LowerTriangular,
            coefficient: -c.conj(),
        });
        poles.push(Pole {
            position: -z,
            kind: UpperTriangular,
            coefficient: c,
        });
    }
    poles.sort_by(|a, b| {
        a.position
            .im
            .total_cmp(&b.position.im)
            .then(a.position.re.total_cmp(&b.position.re))
    });
    // sorting by Im makes near-coincident poles neighbours only per row, so
    // check all pairs; N is at most a few thousand
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            if (poles[i].position - poles[j].position).norm() < POLE_SEPARATION {
                return Err(DressingError::DuplicatePole(
                    poles[i].position,
                    poles[j].position,
                ));
            }
        }
    }
    Ok(PoleSystem { poles })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    /// 1-norm condition estimate of the scaled system.
    pub condition: f64,
    pub ill_conditioned: bool,
    pub refinement_steps: usize,
    /// Relative residual after refinement.
    pub residual: f64,
}

/// Nonzero residue columns of M at each pole: column 1 for lower-triangular
/// poles, column 2 for upper-triangular ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DressingSolution {
    pub positions: Vec<C64>,
    pub kinds: Vec<ResidueKind>,
    pub columns: Vec<[C64; 2]>,
    pub diagnostics: SolveDiagnostics,
}

/// Scaled equation row k: s_k·u_k − w_k·Σ_j u_j/(p_k − p_j) = w_k·e, where
/// (s_k, w_k) is (1, c e^{±2iθ}) or (1/(c e^{±2iθ}), 1), whichever keeps
/// both entries bounded by one.
struct Assembly {
    n: usize,
    diag: Vec<C64>,
    weight: Vec<C64>,
    positions: Vec<C64>,
    kinds: Vec<ResidueKind>,
}

impl Assembly {
    fn new(system: &PoleSystem, phase: &PhaseParams) -> Self {
        let n = system.len();
        let mut diag = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        for p in &system.poles {
            let e = p.log_weight(phase);
            if e.re <= 0.0 {
                diag.push(C64::new(1.0, 0.0));
                weight.push(e.exp());
            } else {
                diag.push((-e).exp());
                weight.push(C64::new(1.0, 0.0));
            }
        }
        Self {
            n,
            diag,
            weight,
            positions: system.poles.iter().map(|p| p.position).collect(),
            kinds: system.poles.iter().map(|p| p.kind).collect(),
        }
    }

    fn entry(&self, k: usize, j: usize) -> C64 {
        if k == j {
            self.diag[k]
        } else if self.kinds[k] == self.kinds[j] {
            C64::new(0.0, 0.0)
        } else {
            -self.weight[k] / (self.positions[k] - self.positions[j])
        }
    }

    fn matrix(&self) -> Mat<C64> {
        Mat::from_fn(self.n, self.n, |k, j| self.entry(k, j))
    }

    /// Column r ∈ {0, 1} is the row-r component of the unknown vectors.
    fn rhs(&self) -> Mat<C64> {
        Mat::from_fn(self.n, 2, |k, r| {
            let hit = match self.kinds[k] {
                ResidueKind::LowerTriangular => r == 1,
                ResidueKind::UpperTriangular => r == 0,
            };
            if hit {
                self.weight[k]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// b − A x with every product and sum carried in double-double.
    fn residual(&self, b: &Mat<C64>, x: &Mat<C64>) -> Mat<C64> {
        Mat::from_fn(self.n, 2, |k, r| {
            let mut acc = CompensatedSum::default();
            acc.add(b[(k, r)]);
            for j in 0..self.n {
                let a = self.entry(k, j);
                if a != C64::new(0.0, 0.0) {
                    acc.add_product(-a, x[(j, r)]);
                }
            }
            acc.value()
        })
    }

    fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|k| self.entry(k, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn col_norm1(m: &Mat<C64>, c: usize) -> f64 {
    (0..m.nrows()).map(|k| m[(k, c)].norm()).sum()
}

fn max_abs(m: &Mat<C64>) -> f64 {
    let mut best = 0.0f64;
    for c in 0..m.ncols() {
        for k in 0..m.nrows() {
            best = best.max(m[(k, c)].norm());
        }
    }
    best
}

/// Hager–Higham estimate of ‖A⁻¹‖₁ from solves with A and Aᴴ.
fn inverse_norm1_estimate<S: Solve<C64>>(lu: &S, n: usize) -> f64 {
    let mut x = Mat::<C64>::from_fn(n, 1, |_, _| C64::new(1.0 / n as f64, 0.0));
    let mut y = lu.solve(&x);
    let mut est = col_norm1(&y, 0);
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let xi = Mat::<C64>::from_fn(n, 1, |k, _| {
            let v = y[(k, 0)];
            if v.norm() > 0.0 {
                v / v.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        });
        let z = lu.solve_adjoint(&xi);
        let (mut j, mut zmax) = (0, 0.0);
        for k in 0..n {
            if z[(k, 0)].norm() > zmax {
                zmax = z[(k, 0)].norm();
                j = k;
            }
        }
        let zx: f64 = (0..n).map(|k| (z[(k, 0)].conj() * x[(k, 0)]).re).sum();
        if zmax <= zx || j == last_j {
            break;
        }
        last_j = j;
        x = Mat::<C64>::from_fn(n, 1, |k, _| {
            if k == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        y = lu.solve(&x);
        let new = col_norm1(&y, 0);
        if new <= est {
            break;
        }
        est = new;
    }
    if n > 1 {
        let b = Mat::<C64>::from_fn(n, 1, |k, _| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(sign * (1.0 + k as f64 / (n - 1) as f64), 0.0)
        });
        let alt = 2.0 * col_norm1(&lu.solve(&b), 0) / (3.0 * n as f64);
        est = est.max(alt);
    }
    est
}

const MAX_REFINEMENT: usize = 3;

/// Solves the residue conditions at the given (x, t).
pub fn solve_m(
    system: &PoleSystem,
    phase: &PhaseParams,
) -> Result<DressingSolution, DressingError> {
    let n = system.len();
    if n == 0 {
        return Ok(DressingSolution {
            positions: Vec::new(),
            kinds: Vec::new(),
            columns: Vec::new(),
            diagnostics: SolveDiagnostics {
                condition: 1.0,
                ill_conditioned: false,
                refinement_steps: 0,
                residual: 0.0,
            },
        });
    }
    let asm = Assembly::new(system, phase);
    let a = asm.matrix();
    let b = asm.rhs();
    let lu = a.partial_piv_lu();
    let mut x = lu.solve(&b);
    let singular = || DressingError::SingularSystem {
        x: phase.x,
        t: phase.t,
    };
    if !max_abs(&x).is_finite() {
        return Err(singular());
    }
    let scale = max_abs(&b).max(f64::MIN_POSITIVE);
    let mut steps = 0;
    let mut res = asm.residual(&b, &x);
    let mut res_norm = max_abs(&res);
    while steps < MAX_REFINEMENT && res_norm > 4.0 * f64::EPSILON * scale {
        let d = lu.solve(&res);
        if !max_abs(&d).is_finite() {
            break;
        }
        let trial = &x + &d;
        let trial_res = asm.residual(&b, &trial);
        let trial_norm = max_abs(&trial_res);
        steps += 1;
        if trial_norm >= res_norm {
            break;
        }
        x = trial;
        res = trial_res;
        res_norm = trial_norm;
    }
    let inv = inverse_norm1_estimate(&lu, n);
    let condition = asm.norm1() * inv;
    if !condition.is_finite() {
        return Err(singular());
    }
    let columns = (0..n).map(|k| [x[(k, 0)], x[(k, 1)]]).collect();
    Ok(DressingSolution {
        positions: asm.positions,
        kinds: asm.kinds,
        columns,
        diagnostics: SolveDiagnostics {
            condition,
            ill_conditioned: condition > ILL_CONDITIONED,
            refinement_steps: steps,
            residual: res_norm / scale,
        },
    })
}

/// M(z) as a 2×2 array indexed [row][column].
pub fn evaluate_m(solution: &DressingSolution, z: C64) -> Result<[[C64; 2]; 2], DressingError> {
    let mut col1 = CompensatedPair::unit(0);
    let mut col2 = CompensatedPair::unit(1);
    for ((p, kind), u) in solution
        .positions
        .iter()
        .zip(&solution.kinds)
        .zip(&solution.columns)
    {
        let d = z - p;
        if d.norm() < POLE_SEPARATION * p.norm().max(1.0) {
            return Err(DressingError::PoleEvaluation(*p));
        }
        let inv = 1.0 / d;
        match kind {
            ResidueKind::LowerTriangular => col1.add_scaled(u, inv),
            ResidueKind::UpperTriangular => col2.add_scaled(u, inv),
        }
    }
    let (c1, c2) = (col1.value(), col2.value());
    Ok([[c1[0], c2[0]], [c1[1], c2[1]]])
}

struct CompensatedPair([CompensatedSum; 2]);

impl CompensatedPair {
    fn unit(k: usize) -> Self {
        let mut s = [CompensatedSum::default(), CompensatedSum::default()];
        s[k].add(C64::new(1.0, 0.0));
        Self(s)
    }

    fn add_scaled(&mut self, u: &[C64; 2], f: C64) {
        self.0[0].add(u[0] * f);
        self.0[1].add(u[1] * f);
    }

    fn value(&self) -> [C64; 2] {
        [self.0[0].value(), self.0[1].value()]
    }
}

/// q = 2i·lim z·M₁₂(z) = 2i Σ (row-1 entries of the second-column residues).
pub fn recover_q(solution: &DressingSolution) -> C64 {
    let mut acc = CompensatedSum::default();
    for (kind, u) in solution.kinds.iter().zip(&solution.columns) {
        if *kind == ResidueKind::UpperTriangular {
            acc.add(u[0]);
        }
    }
    2.0 * I * acc.value()
}

/// Rectangular (x, t) sample set; points are ordered t-major, x-minor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationGrid {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl EvaluationGrid {
    pub fn new(x: Vec<f64>, t: Vec<f64>) -> Self {
        Self { x, t }
    }

    /// x_min, x_min + step, … up to x_max (inclusive within 1e−9 of a step).
    pub fn uniform_x(x_min: f64, x_max: f64, step: f64, t: Vec<f64>) -> Self {
        let count = ((x_max - x_min) / step + 1e-9).floor() as usize + 1;
        let x = (0..count).map(|k| x_min + step * k as f64).collect();
        Self { x, t }
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> PhaseParams {
        let nx = self.x.len();
        PhaseParams::new(self.x[index % nx], self.t[index / nx])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEvaluation {
    pub grid: EvaluationGrid,
    /// q in grid order; NaN where the solve failed.
    pub values: Vec<C64>,
    pub errors: Vec<(usize, DressingError)>,
    pub max_condition: f64,
    pub ill_conditioned_points: usize,
}

/// Evaluates q at every grid point. Each point is an independent solve and
/// the results are placed by index, so the output does not depend on how
/// rayon schedules the work.
pub fn q_on_grid(
    data: &SpectralData,
    grid: &EvaluationGrid,
) -> Result<GridEvaluation, DressingError> {
    if grid.is_empty() {
        return Err(DressingError::GridTooSmall(
            "evaluation grid is empty".into(),
        ));
    }
    let system = expand_spectrum(data)?;
    let results: Vec<Result<(C64, SolveDiagnostics), DressingError>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let sol = solve_m(&system, &grid.point(k))?;
            Ok((recover_q(&sol), sol.diagnostics))
        })
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    let mut max_condition = 0.0f64;
    let mut ill = 0;
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok((q, d)) => {
                values.push(q);
                max_condition = max_condition.max(d.condition);
                ill += d.ill_conditioned as usize;
            }
            Err(e) => {
                values.push(C64::new(f64::NAN, f64::NAN));
                errors.push((k, e));
            }
        }
    }
    Ok(GridEvaluation {
        grid: grid.clone(),
        values,
        errors,
        max_condition,
        ill_conditioned_points: ill,
    })
}

/// Convenience wrapper: q at a single (x, t).
pub fn q_at(system: &PoleSystem, phase: &PhaseParams) -> Result<C64, DressingError> {
    solve_m(system, phase).map(|s| recover_q(&s))
}

/// Central-difference residual of q_t + 6q²q_x + q_xxx on the interior of a
/// real grid stored t-major (`nt` rows of `nx` values). Returns the interior
/// block, rows t = 1..nt−1 and columns x = 2..nx−2.
pub fn mkdv_residual(
    q: &[f64],
    nx: usize,
    nt: usize,
    dx: f64,
    dt: f64,
) -> Result<Vec<Vec<f64>>, DressingError> {
    if nx < 5 || nt < 3 {
        return Err(DressingError::GridTooSmall(format!(
            "need at least 5 x-points and 3 t-levels, got {nx}×{nt}"
        )));
    }
    if q.len() != nx * nt {
        return Err(DressingError::GridTooSmall(format!(
            "grid holds {} values, expected {}",
            q.len(),
            nx * nt
        )));
    }
    let at = |i: usize, j: usize| q[j * nx + i];
    let mut out = Vec::with_capacity(nt - 2);
    for j in 1..nt - 1 {
        let mut row = Vec::with_capacity(nx - 4);
        for i in 2..nx - 2 {
            let qt = (at(i, j + 1) - at(i, j - 1)) / (2.0 * dt);
            let qx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * dx);
            let qxxx = (at(i + 2, j) - 2.0 * at(i + 1, j) + 2.0 * at(i - 1, j) - at(i - 2, j))
                / (2.0 * dx * dx * dx);
            let v = at(i, j);
            row.push(qt + 6.0 * v * v * qx + qxxx);
        }
        out.push(row);
    }
    Ok(out)
}
