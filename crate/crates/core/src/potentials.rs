//! Compactly supported, piecewise-polynomial complex potentials.
//!
//! Each segment stores coefficients in powers of `(x - m)` where `m` is the
//! segment midpoint, so that `coeffs = [c0, c1, ...]` evaluates to
//! `c0 + c1 (x - m) + c2 (x - m)^2 + ...` on `[a, b]`.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{integrate_real, NumericsError, Tolerance};

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("segment [{a}, {b}] is empty or reversed")]
    EmptySegment { a: f64, b: f64 },
    #[error("segments [{a0}, {b0}] and [{a1}, {b1}] overlap")]
    Overlap { a0: f64, b0: f64, a1: f64, b1: f64 },
    #[error("segment [{a}, {b}] leaves the support [-{radius}, {radius}]")]
    OutsideSupport { a: f64, b: f64, radius: f64 },
    #[error("non-finite coefficient or endpoint")]
    NonFinite,
    #[error("cannot read potential file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed potential file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<Complex64>,
}

impl Segment {
    pub fn new(a: f64, b: f64, coeffs: Vec<Complex64>) -> Self {
        Self { a, b, coeffs }
    }

    pub fn constant(a: f64, b: f64, value: Complex64) -> Self {
        Self { a, b, coeffs: vec![value] }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let t = x - self.midpoint();
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    /// Coefficients of the same polynomial in powers of `(x - m)`.
    pub fn recentered(&self, m: f64) -> Vec<Complex64> {
        taylor_shift(&self.coeffs, m - self.midpoint())
    }

    /// Upper bound for `|V|` on the segment.
    pub fn sup_bound(&self) -> f64 {
        let h = 0.5 * (self.b - self.a);
        self.coeffs.iter().enumerate().map(|(k, c)| c.norm() * h.powi(k as i32)).sum()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }
}

/// Coefficients of `p(t + d)` given those of `p(t)`.
fn taylor_shift(coeffs: &[Complex64], d: f64) -> Vec<Complex64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    if d == 0.0 {
        return out;
    }
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = out[j + 1];
            out[j] += next * d;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    segments: Vec<Segment>,
    support_radius: f64,
}

impl Potential {
    /// Validates and sorts the segments. Touching endpoints are allowed.
    pub fn new(mut segments: Vec<Segment>, support_radius: f64) -> Result<Self, PotentialError> {
        if !support_radius.is_finite() || support_radius < 0.0 {
            return Err(PotentialError::NonFinite);
        }
        for s in &segments {
            if !(s.a.is_finite() && s.b.is_finite()) || s.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(PotentialError::NonFinite);
            }
            if !(s.a < s.b) {
                return Err(PotentialError::EmptySegment { a: s.a, b: s.b });
            }
            if s.a < -support_radius || s.b > support_radius {
                return Err(PotentialError::OutsideSupport { a: s.a, b: s.b, radius: support_radius });
            }
        }
        segments.sort_by(|p, q| p.a.total_cmp(&q.a));
        for w in segments.windows(2) {
            if w[1].a < w[0].b {
                return Err(PotentialError::Overlap { a0: w[0].a, b0: w[0].b, a1: w[1].a, b1: w[1].b });
            }
        }
        Ok(Self { segments, support_radius })
    }

    /// Support radius is the smallest symmetric interval holding every segment.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self, PotentialError> {
        let r = segments.iter().map(|s| s.a.abs().max(s.b.abs())).fold(0.0, f64::max);
        Self::new(segments, r)
    }

    pub fn zero() -> Self {
        Self { segments: Vec::new(), support_radius: 0.0 }
    }

    pub fn constant(a: f64, b: f64, value: Complex64) -> Result<Self, PotentialError> {
        Self::from_segments(vec![Segment::constant(a, b, value)])
    }

    /// `g` times the indicator of `[-1, 1]`.
    pub fn barrier(g: f64) -> Self {
        Self { segments: vec![Segment::constant(-1.0, 1.0, Complex64::new(g, 0.0))], support_radius: 1.0 }
    }

    /// Piecewise-constant potential with `values[i]` on `[breaks[i], breaks[i+1]]`.
    pub fn piecewise_constant(breaks: &[f64], values: &[Complex64]) -> Result<Self, PotentialError> {
        if breaks.len() != values.len() + 1 {
            return Err(PotentialError::EmptySegment { a: f64::NAN, b: f64::NAN });
        }
        let segs = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Segment::constant(breaks[i], breaks[i + 1], v))
            .collect();
        Self::from_segments(segs)
    }

    /// Piecewise interpolation of `f` on `[a, b]`: `pieces` equal segments, each
    /// interpolated at `degree + 1` Chebyshev points. Returns the potential and the
    /// largest deviation seen at cell centres of a grid four times denser than the nodes.
    pub fn interpolate<F>(f: F, a: f64, b: f64, pieces: usize, degree: usize) -> Result<(Self, f64), PotentialError>
    where
        F: Fn(f64) -> Complex64,
    {
        if !(b > a) || pieces == 0 {
            return Err(PotentialError::EmptySegment { a, b });
        }
        let d = degree + 1;
        let u: Vec<f64> = (0..d).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / d as f64).cos()).collect();
        let vander = nalgebra::DMatrix::from_fn(d, d, |j, k| Complex64::new(u[j].powi(k as i32), 0.0));
        let lu = vander.lu();
        let width = (b - a) / pieces as f64;
        let mut segments = Vec::with_capacity(pieces);
        let mut worst = 0.0f64;
        for p in 0..pieces {
            let lo = a + width * p as f64;
            let hi = if p + 1 == pieces { b } else { lo + width };
            let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let rhs = nalgebra::DVector::from_iterator(d, u.iter().map(|&t| f(m + h * t)));
            let c = lu.solve(&rhs).ok_or(PotentialError::NonFinite)?;
            let coeffs: Vec<Complex64> = c.iter().enumerate().map(|(k, v)| v / h.powi(k as i32)).collect();
            let seg = Segment::new(lo, hi, coeffs);
            for q in 0..4 * d {
                let x = lo + (hi - lo) * (q as f64 + 0.5) / (4 * d) as f64;
                worst = worst.max((seg.eval(x) - f(x)).norm());
            }
            segments.push(seg);
        }
        Ok((Self::from_segments(segments)?, worst))
    }

    pub fn from_json(text: &str) -> Result<Self, PotentialError> {
        #[derive(Deserialize)]
        struct Raw {
            segments: Vec<Segment>,
            support_radius: Option<f64>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        match raw.support_radius {
            Some(r) => Self::new(raw.segments, r),
            None => Self::from_segments(raw.segments),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, PotentialError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("potential serializes")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Smallest interval containing every segment, if any.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        Some((self.segments.first()?.a, self.segments.last()?.b))
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(Segment::is_zero)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.segments
            .iter()
            .find(|s| s.a <= x && x <= s.b)
            .map_or(Complex64::new(0.0, 0.0), |s| s.eval(x))
    }

    /// Limit of `V` at `x` from the left (`right == false`) or from the right.
    pub fn eval_one_sided(&self, x: f64, right: bool) -> Complex64 {
        let hit = self.segments.iter().find(|s| if right { s.a <= x && x < s.b } else { s.a < x && x <= s.b });
        hit.map_or(Complex64::new(0.0, 0.0), |s| s.eval(x))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.segments.iter().flat_map(|s| [s.a, s.b]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn sup_bound(&self) -> f64 {
        self.segments.iter().map(Segment::sup_bound).fold(0.0, f64::max)
    }

    /// `x ↦ V(-x)`.
    pub fn reflect(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                a: -s.b,
                b: -s.a,
                coeffs: s.coeffs.iter().enumerate().map(|(k, &c)| if k % 2 == 1 { -c } else { c }).collect(),
            })
            .collect();
        Self { segments, support_radius: self.support_radius }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment { a: s.a, b: s.b, coeffs: s.coeffs.iter().map(|&c| c * factor).collect() })
            .collect();
        Self { segments, support_radius: self.support_radius }
    }

    /// Pointwise sum, split at the union of both sets of breakpoints.
    pub fn add(&self, other: &Potential) -> Self {
        let mut pts = self.breakpoints();
        pts.extend(other.breakpoints());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut segments = Vec::new();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let m = 0.5 * (a + b);
            let mut coeffs: Vec<Complex64> = Vec::new();
            let mut covered = false;
            for pot in [self, other] {
                if let Some(s) = pot.segments.iter().find(|s| s.a <= m && m <= s.b) {
                    covered = true;
                    let c = s.recentered(m);
                    if c.len() > coeffs.len() {
                        coeffs.resize(c.len(), Complex64::new(0.0, 0.0));
                    }
                    for (k, v) in c.into_iter().enumerate() {
                        coeffs[k] += v;
                    }
                }
            }
            if covered {
                segments.push(Segment { a, b, coeffs });
            }
        }
        Self { segments, support_radius: self.support_radius.max(other.support_radius) }
    }

    /// Tail moments and the total first moment.
    pub fn moments(&self, tol: &Tolerance) -> Result<MomentData, PotentialError> {
        let per_segment = self
            .segments
            .iter()
            .map(|s| weighted_abs_integral(s, s.a, s.b, tol))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MomentData { total: per_segment.iter().sum(), per_segment, potential: self.clone(), tol: *tol })
    }
}

fn weighted_abs_integral(s: &Segment, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64, PotentialError> {
    if hi <= lo || s.is_zero() {
        return Ok(0.0);
    }
    Ok(integrate_real(|x| (1.0 + x * x).sqrt() * s.eval(x).norm(), lo, hi, tol)?)
}

/// `∫⟨x⟩|V(x)| dx`.
pub fn first_moment(v: &Potential, tol: &Tolerance) -> Result<f64, PotentialError> {
    Ok(v.moments(tol)?.total)
}

/// `(M₊(x), M₋(x))`.
pub fn tail_moments(v: &Potential, x: f64, tol: &Tolerance) -> Result<(f64, f64), PotentialError> {
    let m = v.moments(tol)?;
    Ok((m.mplus(x), m.mminus(x)))
}

/// First moment with cached per-segment contributions.
#[derive(Debug, Clone)]
pub struct MomentData {
    pub total: f64,
    per_segment: Vec<f64>,
    potential: Potential,
    tol: Tolerance,
}

impl MomentData {
    /// `∫_x^∞ ⟨y⟩|V(y)| dy`.
    pub fn mplus(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (s, &full) in self.potential.segments.iter().zip(&self.per_segment) {
            if s.a >= x {
                acc += full;
            } else if s.b > x {
                acc += weighted_abs_integral(s, x, s.b, &self.tol).unwrap_or(full);
            }
        }
        acc
    }

    /// `∫_{-∞}^x ⟨y⟩|V(y)| dy`.
    pub fn mminus(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (s, &full) in self.potential.segments.iter().zip(&self.per_segment) {
            if s.b <= x {
                acc += full;
            } else if s.a < x {
                acc += weighted_abs_integral(s, s.a, x, &self.tol).unwrap_or(full);
            }
        }
        acc
    }
}

/// Random piecewise-constant potential on `[-2, 2]` with first moment at most `max_moment`.
pub fn random_piecewise_constant<R: Rng>(rng: &mut R, max_moment: f64) -> Potential {
    let pieces = rng.gen_range(1..=4);
    let mut breaks: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-2.0..2.0)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    if breaks.len() < 2 {
        breaks = vec![-1.0, 1.0];
    }
    let values: Vec<Complex64> = (0..breaks.len() - 1)
        .map(|_| Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
        .collect();
    let v = Potential::piecewise_constant(&breaks, &values).expect("sorted breaks give valid segments");
    let m = first_moment(&v, &Tolerance::default()).expect("constant pieces integrate");
    let target = rng.gen_range(0.05..1.0) * max_moment;
    if m > 0.0 {
        v.scale(Complex64::new(target / m, 0.0))
    } else {
        v
    }
}
