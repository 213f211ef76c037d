//! Jost solutions of `-ψ'' + Vψ = ζ²ψ` and their Wronskian.
//!
//! `θ₊ = e^{iζx} F` where `F = 1 + ∫_x^∞ K(y-x) V(y) F(y) dy` and
//! `K(t) = (e^{2iζt} - 1)/(2iζ)`. The equation is solved by summing the
//! successive-approximation series `F = Σ F_n`, each term computed by a
//! Gauss–Legendre panel discretisation aligned with the potential segments.
//! Truncation uses the factorial majorant `|F_n| ≤ ⟨x⁻⟩ aⁿ/n!`,
//! `a = √2 M₊/⟨ζ⟩`, which also gives a certified bound on the dropped tail.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{Grid, NumericsError, PanelRule, Tolerance};
use crate::potentials::{MomentData, Potential, PotentialError};

const PANEL_ORDER: usize = 16;
const MAX_TERMS: usize = 600;

#[derive(Debug, Error)]
pub enum JostError {
    #[error("spectral parameter {zeta} lies outside the closed upper half-plane")]
    LowerHalfPlane { zeta: Complex64 },
    #[error("series did not reach tolerance within {terms} terms (majorant {tail:e})")]
    TruncationFailure { terms: usize, tail: f64 },
    #[error("Wronskian varies by {spread:e} (relative) across x; solver is inconsistent")]
    InconsistentWronskian { spread: f64 },
    #[error("estimate {estimate} violated at x = {x}: ratio {ratio}")]
    BoundViolation { estimate: &'static str, x: f64, ratio: f64 },
    #[error("spectral parameter {zeta} is within 1e-6 of a branch point ±√g")]
    NearBranchPoint { zeta: Complex64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlane {
    Boundary,
    Interior,
}

/// `ζ` with `Im ζ ≥ 0` and `z = ζ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub zeta: Complex64,
    pub z: Complex64,
    pub half_plane_tag: HalfPlane,
}

impl SpectralPoint {
    pub fn new(zeta: Complex64) -> Result<Self, JostError> {
        if !(zeta.im >= 0.0) || !zeta.is_finite() {
            return Err(JostError::LowerHalfPlane { zeta });
        }
        let tag = if zeta.im == 0.0 { HalfPlane::Boundary } else { HalfPlane::Interior };
        Ok(Self { zeta, z: zeta * zeta, half_plane_tag: tag })
    }

    pub fn from_real(zeta: f64) -> Result<Self, JostError> {
        Self::new(Complex64::new(zeta, 0.0))
    }

    /// The root `ζ = √z` with `Im ζ ≥ 0`; for `z ≥ 0` this is the nonnegative root.
    pub fn from_z(z: Complex64) -> Result<Self, JostError> {
        let s = z.sqrt();
        let zeta = if s.im < 0.0 { -s } else { s };
        let zeta = if zeta.im == 0.0 { Complex64::new(zeta.re.abs(), 0.0) } else { zeta };
        let mut sp = Self::new(zeta)?;
        sp.z = z;
        Ok(sp)
    }

    /// `⟨ζ⟩ = (1 + |ζ|²)^{1/2}`.
    pub fn bracket(&self) -> f64 {
        (1.0 + self.zeta.norm_sqr()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

/// Sampled Jost solution with its truncation certificate.
#[derive(Debug, Clone, Serialize)]
pub struct JostSolution {
    pub grid: Grid,
    pub theta: Vec<Complex64>,
    pub dtheta: Vec<Complex64>,
    pub side: Side,
    pub truncation_terms: usize,
    pub certified_tail: f64,
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// `sinh(w)/w`, accurate near zero.
fn sinhc(w: Complex64) -> Complex64 {
    if w.norm() < 0.1 {
        let w2 = w * w;
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..8 {
            term *= w2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    } else {
        w.sinh() / w
    }
}

/// `sin(w)/w`, accurate near zero.
pub(crate) fn sinc(w: Complex64) -> Complex64 {
    sinhc(i() * w)
}

/// `(e^{2iζt} - 1)/(2iζ)`, equal to `t` at `ζ = 0`.
pub(crate) fn kfun(zeta: Complex64, t: f64) -> Complex64 {
    let w = i() * zeta * t;
    w.exp() * sinhc(w) * t
}

pub(crate) fn efun(zeta: Complex64, t: f64) -> Complex64 {
    (2.0 * i() * zeta * t).exp()
}

/// Square root of `w` continued from the upper half-plane in `ζ`.
///
/// Returns the root with nonnegative imaginary part; on the real axis the
/// sign follows `Re ζ`, which is the limit from `Im ζ > 0`.
pub fn upper_sqrt(w: Complex64, zeta: Complex64) -> Complex64 {
    let s = w.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && zeta.re < 0.0 && s.re > 0.0) {
        -s
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    p: Complex64,
    q: Complex64,
    d: Complex64,
}

impl Acc {
    /// Accumulators referenced to a point `dist` to the left.
    fn shift(self, zeta: Complex64, dist: f64) -> Acc {
        if dist == 0.0 {
            return self;
        }
        let e = efun(zeta, dist);
        Acc { p: e * self.p + kfun(zeta, dist) * self.q, q: self.q, d: e * self.d }
    }
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    x: Vec<f64>,
    v: Vec<Complex64>,
    // row-major p×p local operator ∫_{x_i}^{b} K(y - x_i)·
    lk: Vec<Complex64>,
    // whole-panel rows referenced to a
    fk: Vec<Complex64>,
    fe: Vec<Complex64>,
    fq: Vec<f64>,
    eb: Vec<Complex64>,
    kb: Vec<Complex64>,
}

impl Panel {
    fn new(a: f64, b: f64, rule: &PanelRule, v: &Potential, seg: usize, zeta: Complex64) -> Self {
        let p = rule.len();
        let hw = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let x: Vec<f64> = rule.nodes.iter().map(|t| mid + hw * t).collect();
        let s = &v.segments()[seg];
        let vals: Vec<Complex64> = x.iter().map(|&y| s.eval(y)).collect();
        let mut lk = vec![Complex64::new(0.0, 0.0); p * p];
        for r in 0..p {
            for j in 0..p {
                lk[r * p + j] = kfun(zeta, x[j] - x[r]) * (hw * rule.partial[r][j]);
            }
        }
        let fk = (0..p).map(|j| kfun(zeta, x[j] - a) * (hw * rule.weights[j])).collect();
        let fe = (0..p).map(|j| efun(zeta, x[j] - a) * (hw * rule.weights[j])).collect();
        let fq = (0..p).map(|j| hw * rule.weights[j]).collect();
        let eb = x.iter().map(|&xi| efun(zeta, b - xi)).collect();
        let kb = x.iter().map(|&xi| kfun(zeta, b - xi)).collect();
        Self { a, b, x, v: vals, lk, fk, fe, fq, eb, kb }
    }
}

struct SweepOut {
    f: Vec<Complex64>,
    left: Vec<Acc>,
    right: Vec<Acc>,
}

/// Jost solution `θ₊` (or `θ₋` via reflection) evaluable at any `x`.
#[derive(Debug, Clone)]
pub struct JostEvaluator {
    zeta: Complex64,
    side: Side,
    panels: Vec<Panel>,
    rule: PanelRule,
    h: Vec<Complex64>,
    f_nodes: Vec<Complex64>,
    left: Vec<Acc>,
    right: Vec<Acc>,
    terms: usize,
    certified_tail: f64,
    volterra_residual: f64,
}

impl JostEvaluator {
    pub fn new(v: &Potential, sp: &SpectralPoint, side: Side, tol: &Tolerance) -> Result<Self, JostError> {
        let moments = v.moments(&Tolerance { rel: 1e-13, abs: 1e-15, max_iter: 2000 })?;
        Self::with_moments(v, sp, side, &moments, tol)
    }

    fn with_moments(
        v: &Potential,
        sp: &SpectralPoint,
        side: Side,
        moments: &MomentData,
        tol: &Tolerance,
    ) -> Result<Self, JostError> {
        let reflected;
        let pot = match side {
            Side::Plus => v,
            Side::Minus => {
                reflected = v.reflect();
                &reflected
            }
        };
        let zeta = sp.zeta;
        let rule = PanelRule::new(PANEL_ORDER);
        let width = (2.0 / (1.0 + zeta.norm())).min(0.5);
        let mut panels = Vec::new();
        for (k, s) in pot.segments().iter().enumerate() {
            let n = ((s.b - s.a) / width).ceil().max(1.0) as usize;
            for j in 0..n {
                let a = s.a + (s.b - s.a) * j as f64 / n as f64;
                let b = if j + 1 == n { s.b } else { s.a + (s.b - s.a) * (j + 1) as f64 / n as f64 };
                panels.push(Panel::new(a, b, &rule, pot, k, zeta));
            }
        }

        let mut ev = Self {
            zeta,
            side,
            panels,
            rule,
            h: Vec::new(),
            f_nodes: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            terms: 0,
            certified_tail: 0.0,
            volterra_residual: 0.0,
        };
        let p = ev.rule.len();
        let nodes = ev.panels.len() * p;

        let m = moments.total;
        let leftmost = pot.support_hull().map_or(0.0, |(a, _)| a);
        let xfac = if leftmost < 0.0 { (1.0 + leftmost * leftmost).sqrt() } else { 1.0 };
        let a_maj = std::f64::consts::SQRT_2 * m / sp.bracket();
        let b_maj = if zeta.norm() > 0.0 { m / zeta.norm() } else { f64::INFINITY };
        let tail_after = |n: usize| -> f64 {
            let fact = |a: f64| -> f64 {
                if a == 0.0 {
                    return 0.0;
                }
                // a^{n+1}/(n+1)! e^a, in logs to avoid overflow
                let k = (n + 1) as f64;
                ((k * a.ln()) - ln_factorial(n + 1) + a).exp()
            };
            let t1 = xfac * fact(a_maj);
            let t2 = if b_maj.is_finite() { fact(b_maj) } else { f64::INFINITY };
            t1.min(t2)
        };

        let mut f_total = vec![Complex64::new(1.0, 0.0); nodes];
        let mut h: Vec<Complex64> = ev.panels.iter().flat_map(|pl| pl.v.clone()).collect();
        let mut terms = 0usize;
        let mut tail = tail_after(0);
        while tail > tol.abs && h.iter().any(|c| c.norm() > 0.0) {
            if terms >= MAX_TERMS {
                return Err(JostError::TruncationFailure { terms, tail });
            }
            let out = ev.sweep(&h);
            terms += 1;
            for k in 0..nodes {
                f_total[k] += out.f[k];
            }
            let vals = ev.panels.iter().flat_map(|pl| pl.v.iter());
            h = out.f.iter().zip(vals).map(|(f, v)| f * v).collect();
            tail = tail_after(terms);
        }
        if h.iter().all(|c| c.norm() == 0.0) {
            tail = 0.0;
        }

        let vals: Vec<Complex64> = ev.panels.iter().flat_map(|pl| pl.v.iter().copied()).collect();
        ev.h = f_total.iter().zip(&vals).map(|(f, v)| f * v).collect();
        let out = ev.sweep(&ev.h.clone());
        let mut resid = 0.0f64;
        for k in 0..nodes {
            let rhs = Complex64::new(1.0, 0.0) + out.f[k];
            resid = resid.max((rhs - f_total[k]).norm() / rhs.norm().max(1.0));
        }
        ev.f_nodes = f_total;
        ev.left = out.left;
        ev.right = out.right;
        ev.terms = terms;
        ev.certified_tail = tail;
        ev.volterra_residual = resid;
        Ok(ev)
    }

    /// One application of `h ↦ ∫_x^∞ K(y-x) h(y) dy` at every node, with the panel accumulators.
    fn sweep(&self, h: &[Complex64]) -> SweepOut {
        let p = self.rule.len();
        let np = self.panels.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut f = vec![zero; np * p];
        let mut left = vec![Acc::default(); np];
        let mut right = vec![Acc::default(); np];
        let mut acc = Acc::default();
        let mut pos: Option<f64> = None;
        for k in (0..np).rev() {
            let pl = &self.panels[k];
            if let Some(x0) = pos {
                acc = acc.shift(self.zeta, x0 - pl.b);
            }
            right[k] = acc;
            let hk = &h[k * p..(k + 1) * p];
            for r in 0..p {
                let mut lk = zero;
                for j in 0..p {
                    lk += pl.lk[r * p + j] * hk[j];
                }
                f[k * p + r] = lk + pl.eb[r] * acc.p + pl.kb[r] * acc.q;
            }
            let shifted = acc.shift(self.zeta, pl.b - pl.a);
            let mut next = shifted;
            for j in 0..p {
                next.p += pl.fk[j] * hk[j];
                next.q += hk[j] * pl.fq[j];
                next.d += pl.fe[j] * hk[j];
            }
            acc = next;
            left[k] = acc;
            pos = Some(pl.a);
        }
        SweepOut { f, left, right }
    }

    /// `(F, F')` in the frame of the evaluator's own potential.
    fn eval_f(&self, x: f64) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let k = self.panels.partition_point(|pl| pl.b < x);
        if k == self.panels.len() {
            return (one, zero);
        }
        let pl = &self.panels[k];
        if x < pl.a {
            let acc = self.left[k];
            let d = pl.a - x;
            return (one + efun(self.zeta, d) * acc.p + kfun(self.zeta, d) * acc.q, -efun(self.zeta, d) * acc.d);
        }
        let p = self.rule.len();
        let hw = 0.5 * (pl.b - pl.a);
        let t = ((x - 0.5 * (pl.a + pl.b)) / hw).clamp(-1.0, 1.0);
        let tw = self.rule.tail_weights(t);
        let hk = &self.h[k * p..(k + 1) * p];
        let mut lk = zero;
        let mut le = zero;
        for j in 0..p {
            let s = pl.x[j] - x;
            lk += kfun(self.zeta, s) * hk[j] * (hw * tw[j]);
            le += efun(self.zeta, s) * hk[j] * (hw * tw[j]);
        }
        let acc = self.right[k];
        let d = pl.b - x;
        let e = efun(self.zeta, d);
        (one + lk + e * acc.p + kfun(self.zeta, d) * acc.q, -(le + e * acc.d))
    }

    /// `(θ, ∂ₓθ)` at `x`.
    pub fn eval(&self, x: f64) -> (Complex64, Complex64) {
        let iz = i() * self.zeta;
        match self.side {
            Side::Plus => {
                let (f, df) = self.eval_f(x);
                let ph = (iz * x).exp();
                (ph * f, ph * (iz * f + df))
            }
            Side::Minus => {
                let (f, df) = self.eval_f(-x);
                let ph = (-iz * x).exp();
                (ph * f, -(ph * (iz * f + df)))
            }
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn certified_tail(&self) -> f64 {
        self.certified_tail
    }

    /// Largest relative mismatch between the summed series and one more application of the integral equation.
    pub fn volterra_residual(&self) -> f64 {
        self.volterra_residual
    }

    /// `F = e^{-iζx}θ₊` at the internal quadrature nodes (own frame).
    pub fn node_values(&self) -> Vec<(f64, Complex64)> {
        let p = self.rule.len();
        self.panels
            .iter()
            .enumerate()
            .flat_map(|(k, pl)| (0..p).map(move |r| (pl.x[r], k * p + r)))
            .map(|(x, idx)| (x, self.f_nodes[idx]))
            .collect()
    }

    pub fn sample(&self, grid: &Grid) -> JostSolution {
        let (theta, dtheta) = grid.nodes().iter().map(|&x| self.eval(x)).unzip();
        JostSolution {
            grid: grid.clone(),
            theta,
            dtheta,
            side: self.side,
            truncation_terms: self.terms,
            certified_tail: self.certified_tail,
        }
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `θ₊(·, ζ)` sampled on `grid`.
pub fn jost_plus(v: &Potential, sp: &SpectralPoint, grid: &Grid, tol: &Tolerance) -> Result<JostSolution, JostError> {
    Ok(JostEvaluator::new(v, sp, Side::Plus, tol)?.sample(grid))
}

/// `θ₋(x, ζ; V) = θ₊(-x, ζ; V(-·))` sampled on `grid`.
pub fn jost_minus(v: &Potential, sp: &SpectralPoint, grid: &Grid, tol: &Tolerance) -> Result<JostSolution, JostError> {
    Ok(JostEvaluator::new(v, sp, Side::Minus, tol)?.sample(grid))
}

/// Both Jost solutions at one spectral point.
#[derive(Debug, Clone)]
pub struct JostPair {
    pub plus: JostEvaluator,
    pub minus: JostEvaluator,
    pub sp: SpectralPoint,
    support: f64,
}

/// Wronskian value with the consistency data gathered while computing it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WronskianReport {
    pub value: Complex64,
    /// Largest relative deviation across the sample points, scaled by the term magnitude.
    pub spread: f64,
    pub scale: f64,
}

impl JostPair {
    pub fn new(v: &Potential, sp: &SpectralPoint, tol: &Tolerance) -> Result<Self, JostError> {
        let moments = v.moments(&Tolerance { rel: 1e-13, abs: 1e-15, max_iter: 2000 })?;
        Ok(Self {
            plus: JostEvaluator::with_moments(v, sp, Side::Plus, &moments, tol)?,
            minus: JostEvaluator::with_moments(v, sp, Side::Minus, &moments, tol)?,
            sp: *sp,
            support: v.support_radius(),
        })
    }

    /// `(θ₊θ₋' - θ₊'θ₋)(x)` and the magnitude of the two products.
    pub fn wronskian_at(&self, x: f64) -> (Complex64, f64) {
        let (tp, dtp) = self.plus.eval(x);
        let (tm, dtm) = self.minus.eval(x);
        let a = tp * dtm;
        let b = dtp * tm;
        (a - b, a.norm() + b.norm())
    }

    /// `w(ζ)` at `x = 0`, checked against two further interior points.
    pub fn wronskian(&self, tol: &Tolerance) -> Result<WronskianReport, JostError> {
        let (w0, s0) = self.wronskian_at(0.0);
        let r = 0.5 * self.support;
        let mut scale = s0;
        let mut dev = 0.0f64;
        for x in [-r, r] {
            let (w, s) = self.wronskian_at(x);
            scale = scale.max(s);
            dev = dev.max((w - w0).norm());
        }
        let spread = if scale > 0.0 { dev / scale } else { 0.0 };
        if spread > 100.0 * tol.rel {
            return Err(JostError::InconsistentWronskian { spread });
        }
        Ok(WronskianReport { value: w0, spread, scale })
    }
}

/// `w(ζ) = W(θ₊, θ₋)(0)`.
pub fn wronskian(v: &Potential, sp: &SpectralPoint, tol: &Tolerance) -> Result<Complex64, JostError> {
    Ok(JostPair::new(v, sp, tol)?.wronskian(tol)?.value)
}

pub fn wronskian_report(v: &Potential, sp: &SpectralPoint, tol: &Tolerance) -> Result<WronskianReport, JostError> {
    JostPair::new(v, sp, tol)?.wronskian(tol)
}

/// `2|ζ| - 2(2+√2) M e^{2√2 M/⟨ζ⟩}`; a lower bound for `|w(ζ)|` whenever positive.
pub fn wronskian_lower_bound(m: f64, sp: &SpectralPoint) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    2.0 * sp.zeta.norm() - 2.0 * (2.0 + s2) * m * (2.0 * s2 * m / sp.bracket()).exp()
}

/// Worst ratio of each pointwise estimate to its right-hand side over a sampled solution.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub side: Side,
    /// `|θ| ≤ ⟨x∓⟩ e^{√2 M±/⟨ζ⟩} e^{∓x Im ζ}`.
    pub theta: f64,
    /// `|θ| ≤ e^{M±/|ζ|} e^{∓x Im ζ}`; absent at `ζ = 0`.
    pub theta_over_zeta: Option<f64>,
    /// `|θ - e^{±iζx}| ≤ √2⟨x∓⟩/⟨ζ⟩ e^{√2 M±/⟨ζ⟩} e^{∓x Im ζ} M±`.
    pub theta_minus_free: f64,
    /// `|∂θ ∓ iζe^{±iζx}| ≤ e^{√2 M±/⟨ζ⟩} e^{∓x Im ζ} M±`.
    pub dtheta_minus_free: f64,
    pub worst_x: f64,
}

impl BoundReport {
    pub fn max_ratio(&self) -> f64 {
        self.theta.max(self.theta_over_zeta.unwrap_or(0.0)).max(self.theta_minus_free).max(self.dtheta_minus_free)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num <= 1e-13 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Ratios of the sampled solution to the a-priori estimates (no error on violation).
pub fn jost_bound_ratios(v: &Potential, sp: &SpectralPoint, sol: &JostSolution) -> Result<BoundReport, JostError> {
    let moments = v.moments(&Tolerance { rel: 1e-13, abs: 1e-15, max_iter: 2000 })?;
    let zeta = sp.zeta;
    let br = sp.bracket();
    let s2 = std::f64::consts::SQRT_2;
    let mut rep = BoundReport {
        side: sol.side,
        theta: 0.0,
        theta_over_zeta: if zeta.norm() > 0.0 { Some(0.0) } else { None },
        theta_minus_free: 0.0,
        dtheta_minus_free: 0.0,
        worst_x: f64::NAN,
    };
    let mut worst = -1.0;
    for (k, &x) in sol.grid.nodes().iter().enumerate() {
        // mirror the minus side onto the plus-side formulas
        let (xs, m, free, dfree) = match sol.side {
            Side::Plus => (x, moments.mplus(x), (i() * zeta * x).exp(), i() * zeta * (i() * zeta * x).exp()),
            Side::Minus => (-x, moments.mminus(x), (-i() * zeta * x).exp(), -i() * zeta * (-i() * zeta * x).exp()),
        };
        let xminus = if xs < 0.0 { (1.0 + xs * xs).sqrt() } else { 1.0 };
        let decay = (-xs * zeta.im).exp();
        let growth = (s2 * m / br).exp();
        let th = sol.theta[k].norm();
        let r1 = ratio(th, xminus * growth * decay);
        rep.theta = rep.theta.max(r1);
        let mut local = r1;
        if let Some(cur) = rep.theta_over_zeta {
            let r2 = ratio(th, (m / zeta.norm()).exp() * decay);
            rep.theta_over_zeta = Some(cur.max(r2));
            local = local.max(r2);
        }
        let r3 = ratio((sol.theta[k] - free).norm(), s2 * xminus / br * growth * decay * m);
        let r4 = ratio((sol.dtheta[k] - dfree).norm(), growth * decay * m);
        rep.theta_minus_free = rep.theta_minus_free.max(r3);
        rep.dtheta_minus_free = rep.dtheta_minus_free.max(r4);
        local = local.max(r3).max(r4);
        if local > worst {
            worst = local;
            rep.worst_x = x;
        }
    }
    Ok(rep)
}

/// Checks every estimate holds up to a factor `1 + slack`.
pub fn verify_jost_bounds(
    v: &Potential,
    sp: &SpectralPoint,
    sol: &JostSolution,
    slack: f64,
) -> Result<BoundReport, JostError> {
    let rep = jost_bound_ratios(v, sp, sol)?;
    let checks = [
        ("theta", rep.theta),
        ("theta_over_zeta", rep.theta_over_zeta.unwrap_or(0.0)),
        ("theta_minus_free", rep.theta_minus_free),
        ("dtheta_minus_free", rep.dtheta_minus_free),
    ];
    for (name, r) in checks {
        if !(r <= 1.0 + slack) {
            return Err(JostError::BoundViolation { estimate: name, x: rep.worst_x, ratio: r });
        }
    }
    Ok(rep)
}

/// Closed forms for the barrier `g·𝟙_{[-1,1]}`.
pub mod barrier {
    use super::*;

    /// `Z = √(ζ² - g)` in the closed upper half-plane.
    pub fn z_of(zeta: Complex64, g: f64) -> Complex64 {
        upper_sqrt(zeta * zeta - g, zeta)
    }

    fn near_branch(zeta: Complex64, g: f64) -> bool {
        let r = g.abs().sqrt();
        g > 0.0 && ((zeta - r).norm() < 1e-6 || (zeta + r).norm() < 1e-6)
    }

    /// `(S, R)` with `θ₊ = S e^{iZx} + R e^{-iZx}` on `[-1, 1]`.
    pub fn coefficients(zeta: Complex64, g: f64) -> Result<(Complex64, Complex64), JostError> {
        if near_branch(zeta, g) {
            return Err(JostError::NearBranchPoint { zeta });
        }
        let z = z_of(zeta, g);
        let s = (i() * (zeta - z)).exp() * (z + zeta) / (2.0 * z);
        let r = (i() * (zeta + z)).exp() * (z - zeta) / (2.0 * z);
        Ok((s, r))
    }

    /// `(i/2Z)[e^{2i(ζ+Z)}(Z-ζ)² - e^{2i(ζ-Z)}(Z+ζ)²]`.
    pub fn wronskian_formula(zeta: Complex64, g: f64) -> Result<Complex64, JostError> {
        if near_branch(zeta, g) {
            return Err(JostError::NearBranchPoint { zeta });
        }
        let z = z_of(zeta, g);
        let a = (2.0 * i() * (zeta + z)).exp() * (z - zeta) * (z - zeta);
        let b = (2.0 * i() * (zeta - z)).exp() * (z + zeta) * (z + zeta);
        Ok(i() / (2.0 * z) * (a - b))
    }

    /// `θ₊(x)` and `∂ₓθ₊(x)` in a form that stays finite at `Z = 0`.
    pub fn theta_plus(zeta: Complex64, g: f64, x: f64) -> (Complex64, Complex64) {
        let iz = i() * zeta;
        if x >= 1.0 {
            let e = (iz * x).exp();
            return (e, iz * e);
        }
        let z = z_of(zeta, g);
        let e1 = iz.exp();
        let inside = |x: f64| {
            let u = x - 1.0;
            let c = (z * u).cos();
            let sc = sinc(z * u) * u;
            (e1 * (c + iz * sc), e1 * (-z * z * sc + iz * c))
        };
        if x >= -1.0 {
            return inside(x);
        }
        let (t0, d0) = inside(-1.0);
        let u = x + 1.0;
        let c = (zeta * u).cos();
        let sc = sinc(zeta * u) * u;
        (t0 * c + d0 * sc, -t0 * zeta * zeta * sc + d0 * c)
    }

    /// Wronskian from the closed-form Jost solutions (even potential: `θ₋(x) = θ₊(-x)`).
    pub fn wronskian_closed(zeta: Complex64, g: f64) -> Complex64 {
        let (t, d) = theta_plus(zeta, g, 0.0);
        -2.0 * t * d
    }

    /// Formula where it is valid, the series solver within `1e-6` of `±√g`.
    pub fn wronskian(zeta: Complex64, g: f64, tol: &Tolerance) -> Result<Complex64, JostError> {
        match wronskian_formula(zeta, g) {
            Err(JostError::NearBranchPoint { .. }) => super::wronskian(&Potential::barrier(g), &SpectralPoint::new(zeta)?, tol),
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerance {
        Tolerance { rel: 1e-10, abs: 1e-14, max_iter: 1000 }
    }

    #[test]
    fn kernel_functions_at_zero_frequency() {
        assert!((kfun(c(0.0, 0.0), 2.5) - c(2.5, 0.0)).norm() < 1e-15);
        let z = c(0.3, 0.2);
        let direct = ((2.0 * i() * z * 1.7).exp() - 1.0) / (2.0 * i() * z);
        assert!((kfun(z, 1.7) - direct).norm() < 1e-14);
        let tiny = c(1e-9, 0.0);
        assert!((kfun(tiny, 1.0) - c(1.0, 1e-9)).norm() < 1e-15);
    }

    #[test]
    fn free_solution_is_exact() {
        let sp = SpectralPoint::new(c(0.7, 0.3)).unwrap();
        let ev = JostEvaluator::new(&Potential::zero(), &sp, Side::Plus, &tol()).unwrap();
        assert_eq!(ev.terms(), 0);
        for &x in &[-3.0, 0.0, 2.0] {
            let (t, d) = ev.eval(x);
            let e = (i() * sp.zeta * x).exp();
            assert!((t - e).norm() < 1e-15);
            assert!((d - i() * sp.zeta * e).norm() < 1e-15);
        }
    }

    #[test]
    fn barrier_series_matches_closed_form() {
        for (g, z) in [(1.0, c(0.0, 1.0)), (1.0, c(0.0, 0.0)), (0.5, c(0.3, 0.2)), (2.0, c(2.5, 0.0))] {
            let sp = SpectralPoint::new(z).unwrap();
            let ev = JostEvaluator::new(&Potential::barrier(g), &sp, Side::Plus, &tol()).unwrap();
            for &x in &[-2.3, -1.0, -0.4, 0.0, 0.77, 1.0, 1.5] {
                let (t, d) = ev.eval(x);
                let (tc, dc) = barrier::theta_plus(z, g, x);
                assert!((t - tc).norm() <= 1e-11 * tc.norm().max(1.0), "g={g} z={z} x={x}: {t} vs {tc}");
                assert!((d - dc).norm() <= 1e-11 * dc.norm().max(1.0), "g={g} z={z} x={x}: {d} vs {dc}");
            }
        }
    }

    #[test]
    fn closed_forms_agree() {
        for (g, z) in [(1.0, c(0.5, 0.5)), (0.01, c(2.0, 0.1)), (1.0, c(0.0, 2.0))] {
            let (s, r) = barrier::coefficients(z, g).unwrap();
            let zz = barrier::z_of(z, g);
            let x = 0.3;
            let lhs = s * (i() * zz * x).exp() + r * (-i() * zz * x).exp();
            assert!((lhs - barrier::theta_plus(z, g, x).0).norm() < 1e-12);
            let w1 = barrier::wronskian_formula(z, g).unwrap();
            let w2 = barrier::wronskian_closed(z, g);
            assert!((w1 - w2).norm() < 1e-12 * w1.norm());
        }
    }

    #[test]
    fn threshold_value_of_unit_barrier() {
        let w = barrier::wronskian_closed(c(0.0, 0.0), 1.0);
        assert!((w - c(2f64.sinh(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn branch_point_is_flagged() {
        assert!(matches!(barrier::wronskian_formula(c(1.0, 0.0), 1.0), Err(JostError::NearBranchPoint { .. })));
        let w = barrier::wronskian(c(1.0, 0.0), 1.0, &tol()).unwrap();
        assert!((w - barrier::wronskian_closed(c(1.0, 0.0), 1.0)).norm() < 1e-10);
    }

    #[test]
    fn lower_half_plane_rejected() {
        assert!(SpectralPoint::new(c(1.0, -0.1)).is_err());
        let sp = SpectralPoint::from_z(c(-4.0, 0.0)).unwrap();
        assert!((sp.zeta - c(0.0, 2.0)).norm() < 1e-15);
        let sp = SpectralPoint::from_z(c(4.0, -1e-3)).unwrap();
        assert!(sp.zeta.im > 0.0 && sp.zeta.re < 0.0);
    }

    #[test]
    fn lower_bound_values() {
        let sp = SpectralPoint::from_real(100.0).unwrap();
        assert_eq!(wronskian_lower_bound(0.0, &sp), 200.0);
        let b = wronskian_lower_bound(1.0, &sp);
        let expect = 200.0 - 2.0 * (2.0 + 2f64.sqrt()) * (2.0 * 2f64.sqrt() / 10001f64.sqrt()).exp();
        assert!((b - expect).abs() < 1e-12);
    }
}
