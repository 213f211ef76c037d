//! Gauss–Legendre rules, adaptive Gauss–Kronrod integration and sampling grids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{NumericsError, Tolerance};

/// How a [`Grid`] assigns its weights; used when a grid is coarsened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridRule {
    /// Composite trapezoid on the given nodes.
    Trapezoid,
    /// Composite midpoint: each node is the centre of a cell of equal width.
    Midpoint,
    /// Weights supplied by the caller.
    Custom,
}

/// Quadrature grid: strictly increasing nodes with nonnegative weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    rule: GridRule,
}

impl Grid {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self, NumericsError> {
        Self::with_rule(nodes, weights, GridRule::Custom)
    }

    fn with_rule(nodes: Vec<f64>, weights: Vec<f64>, rule: GridRule) -> Result<Self, NumericsError> {
        if nodes.len() != weights.len() {
            return Err(NumericsError::InvalidGrid("nodes and weights differ in length"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NumericsError::InvalidGrid("nodes must be strictly increasing"));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(NumericsError::InvalidGrid("nodes must be finite"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(NumericsError::InvalidGrid("weights must be nonnegative"));
        }
        Ok(Self { nodes, weights, rule })
    }

    /// Trapezoid weights on arbitrary increasing nodes.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, NumericsError> {
        let weights = trapezoid_weights(&nodes);
        Self::with_rule(nodes, weights, GridRule::Trapezoid)
    }

    /// `n` equispaced nodes on `[a, b]` including both endpoints.
    pub fn trapezoid(a: f64, b: f64, n: usize) -> Result<Self, NumericsError> {
        if n < 2 || !(b > a) {
            return Err(NumericsError::InvalidGrid("trapezoid grid needs n >= 2 and a < b"));
        }
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n).map(|i| a + h * i as f64).collect::<Vec<_>>();
        Self::from_nodes(nodes)
    }

    /// `n` cell centres of an equispaced partition of `[a, b]`; never touches the endpoints.
    pub fn midpoint(a: f64, b: f64, n: usize) -> Result<Self, NumericsError> {
        if n < 1 || !(b > a) {
            return Err(NumericsError::InvalidGrid("midpoint grid needs n >= 1 and a < b"));
        }
        let h = (b - a) / n as f64;
        let nodes = (0..n).map(|i| a + h * (i as f64 + 0.5)).collect();
        Self::with_rule(nodes, vec![h; n], GridRule::Midpoint)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> GridRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Grid at half the resolution, same rule and same covered interval.
    pub fn coarsen(&self) -> Result<Self, NumericsError> {
        match self.rule {
            GridRule::Midpoint => {
                let h = self.weights[0];
                let a = self.nodes[0] - 0.5 * h;
                let b = self.hi() + 0.5 * h;
                Self::midpoint(a, b, (self.len() / 2).max(1))
            }
            _ => {
                let mut nodes: Vec<f64> = self.nodes.iter().step_by(2).copied().collect();
                if self.len().is_multiple_of(2) {
                    nodes.push(self.hi());
                }
                Self::from_nodes(nodes)
            }
        }
    }

    /// Grid at twice the resolution.
    pub fn refine(&self) -> Result<Self, NumericsError> {
        match self.rule {
            GridRule::Midpoint => {
                let h = self.weights[0];
                Self::midpoint(self.nodes[0] - 0.5 * h, self.hi() + 0.5 * h, 2 * self.len())
            }
            _ => {
                let mut nodes = Vec::with_capacity(2 * self.len() - 1);
                for w in self.nodes.windows(2) {
                    nodes.push(w[0]);
                    nodes.push(0.5 * (w[0] + w[1]));
                }
                nodes.push(self.hi());
                Self::from_nodes(nodes)
            }
        }
    }
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Result<(Complex64, f64), NumericsError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kronrod = kronrod * h;
    let gauss = gauss * h;
    if !(kronrod.re.is_finite() && kronrod.im.is_finite()) {
        return Err(NumericsError::NonFinite { at: c });
    }
    Ok((kronrod, (kronrod - gauss).norm()))
}

struct Interval {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive 7/15-point Gauss–Kronrod integration of a complex integrand over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `max(tol.abs, tol.rel * |result|)`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<Complex64, NumericsError>
where
    F: Fn(f64) -> Complex64,
{
    if !(a < b) {
        if a == b {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(NumericsError::InvalidInterval { a, b });
    }
    let (v, e) = gk15(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut subdivisions = 0usize;
    loop {
        if total_err <= tol.abs.max(tol.rel * total.norm()) {
            return Ok(total);
        }
        if subdivisions >= tol.max_iter {
            return Err(NumericsError::NonConvergence {
                what: "adaptive quadrature",
                iterations: subdivisions,
                residual: total_err,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval collapsed to machine resolution; accept its estimate
            return Ok(total);
        }
        let (v1, e1) = gk15(&f, worst.a, mid)?;
        let (v2, e2) = gk15(&f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, error: e2 });
        subdivisions += 1;
        if subdivisions.is_multiple_of(64) {
            // resum to keep the running totals free of drift
            total = heap.iter().map(|i| i.value).sum();
            total_err = heap.iter().map(|i| i.error).sum();
        }
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, tol).map(|c| c.re)
}

/// Reference-panel integration operator for a `p`-point Gauss–Legendre panel.
///
/// `partial[i][j] = ∫_{t_i}^{1} ℓ_j(t) dt`, where `ℓ_j` is the Lagrange basis
/// polynomial on the Gauss nodes `t`. Applying a row to nodal values of a smooth
/// function gives the integral from node `i` to the right end of the panel.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub partial: Vec<Vec<f64>>,
    bary: Vec<f64>,
}

impl PanelRule {
    pub fn new(p: usize) -> Self {
        let (nodes, weights) = gauss_legendre(p);
        let bary = barycentric_weights(&nodes);
        let mut rule = Self { nodes, weights, partial: Vec::new(), bary };
        let partial = (0..p).map(|i| rule.tail_weights(rule.nodes[i])).collect();
        rule.partial = partial;
        rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lagrange basis values at reference point `t`.
    pub fn basis(&self, t: f64) -> Vec<f64> {
        let n = self.nodes.len();
        if let Some(k) = self.nodes.iter().position(|&x| x == t) {
            let mut out = vec![0.0; n];
            out[k] = 1.0;
            return out;
        }
        let terms: Vec<f64> = (0..n).map(|j| self.bary[j] / (t - self.nodes[j])).collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|v| v / denom).collect()
    }

    /// Weights `c_j = ∫_t^1 ℓ_j` for an arbitrary reference point `t ∈ [-1, 1]`.
    pub fn tail_weights(&self, t: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        let half = 0.5 * (1.0 - t);
        if half <= 0.0 {
            return out;
        }
        for (q, wq) in self.nodes.iter().zip(&self.weights) {
            let s = t + half * (q + 1.0);
            let l = self.basis(s);
            for j in 0..n {
                out[j] += half * wq * l[j];
            }
        }
        out
    }
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect()
}
