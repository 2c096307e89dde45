//! Quadrature rules and compensated arithmetic shared by the solvers.

use std::sync::OnceLock;

use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n started from the Tricomi asymptotic guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Applies the rule on [a, b].
    pub fn integrate<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, mut f: F) -> C64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = C64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    /// Applies the rule on `panels` equal sub-intervals of [a, b].
    pub fn composite<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> C64 {
        let h = (b - a) / panels as f64;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..panels {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            acc += self.integrate(lo, hi, &mut f);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

pub fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

pub fn gl64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}

/// Result of a panel-doubling integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: C64,
    pub error: f64,
    pub panels: usize,
}

/// Composite 32-point Gauss–Legendre with panel doubling until two successive
/// estimates agree to `tol` (absolute, scaled by max(1, |I|)).
pub fn integrate_doubling<F: FnMut(f64) -> C64>(a: f64, b: f64, tol: f64, mut f: F) -> Integral {
    let rule = gl32();
    let mut panels = 2;
    let mut prev = rule.composite(a, b, panels, &mut f);
    loop {
        panels *= 2;
        let cur = rule.composite(a, b, panels, &mut f);
        let err = (cur - prev).norm();
        if err <= tol * cur.norm().max(1.0) || panels >= 1 << 12 {
            return Integral {
                value: cur,
                error: err,
                panels,
            };
        }
        prev = cur;
    }
}

/// Recursive bisection with a 16-point rule; robust for integrands with a
/// sharp but integrable feature somewhere in the interval. Each panel gets a
/// share of `tol` proportional to its length, floored at roundoff level.
pub fn integrate_adaptive<F: FnMut(f64) -> C64>(a: f64, b: f64, tol: f64, mut f: F) -> Integral {
    let rule = gl16();
    let whole = rule.integrate(a, b, &mut f);
    let mut st = Bisection {
        rule,
        density: tol / (b - a).abs(),
        panels: 0,
        error: 0.0,
    };
    let value = st.run(a, b, whole, 0, &mut f);
    Integral {
        value,
        error: st.error,
        panels: st.panels,
    }
}

const MAX_PANELS: usize = 1 << 16;

struct Bisection<'r> {
    rule: &'r GaussLegendre,
    density: f64,
    panels: usize,
    error: f64,
}

impl Bisection<'_> {
    fn run<F: FnMut(f64) -> C64>(
        &mut self,
        a: f64,
        b: f64,
        whole: C64,
        depth: usize,
        f: &mut F,
    ) -> C64 {
        let mid = 0.5 * (a + b);
        let left = self.rule.integrate(a, mid, &mut *f);
        let right = self.rule.integrate(mid, b, &mut *f);
        let both = left + right;
        let diff = (both - whole).norm();
        let local = (self.density * (b - a).abs()).max(64.0 * f64::EPSILON * both.norm());
        if diff <= local || depth >= 40 || self.panels >= MAX_PANELS || !diff.is_finite() {
            self.panels += 2;
            self.error += diff;
            return both;
        }
        self.run(a, mid, left, depth + 1, f) + self.run(mid, b, right, depth + 1, f)
    }
}

/// Error-free product: a*b = p + e exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Error-free sum: a+b = s + e exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Accumulator carrying a double-double real part and imaginary part.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

impl CompensatedSum {
    #[inline]
    fn add_real(acc: &mut (f64, f64), v: f64, err: f64) {
        let (s, e) = two_sum(acc.0, v);
        acc.0 = s;
        acc.1 += e + err;
    }

    #[inline]
    pub fn add(&mut self, v: C64) {
        Self::add_real(&mut self.re, v.re, 0.0);
        Self::add_real(&mut self.im, v.im, 0.0);
    }

    /// Adds the product a*b with every partial product captured exactly.
    #[inline]
    pub fn add_product(&mut self, a: C64, b: C64) {
        let (p1, e1) = two_prod(a.re, b.re);
        let (p2, e2) = two_prod(-a.im, b.im);
        let (p3, e3) = two_prod(a.re, b.im);
        let (p4, e4) = two_prod(a.im, b.re);
        Self::add_real(&mut self.re, p1, e1);
        Self::add_real(&mut self.re, p2, e2);
        Self::add_real(&mut self.im, p3, e3);
        Self::add_real(&mut self.im, p4, e4);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
