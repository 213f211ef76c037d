//! Zero location for complex-valued functions of a real or complex variable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{NumericsError, Tolerance};

const SCAN_SAMPLES: usize = 256;

fn central_diff<F: Fn(f64) -> Complex64>(f: &F, t: f64, scale: f64) -> Complex64 {
    let h = 1e-6 * scale.max(t.abs()).max(1e-300);
    (f(t + h) - f(t - h)) / (2.0 * h)
}

/// Refine a local minimum of `|f|²` inside `[lo, hi]`.
///
/// Gauss–Newton steps on `|f|²`; a step that leaves the current bracket is
/// replaced by bisection on the sign of `d|f|²/dt`.
fn refine_minimum<F: Fn(f64) -> Complex64>(f: &F, mut lo: f64, mut hi: f64, t0: f64, tol: &Tolerance) -> f64 {
    let scale = hi - lo;
    let mut t = t0;
    for _ in 0..tol.max_iter.max(60) {
        let ft = f(t);
        if ft.norm() <= 1e-3 * tol.abs {
            return t;
        }
        let d = central_diff(f, t, scale);
        let slope = 2.0 * (ft.conj() * d).re;
        if slope > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let dn = d.norm_sqr();
        let mut next = if dn > 0.0 { t - (ft.conj() * d).re / dn } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(scale) || hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            return if f(next).norm() < ft.norm() { next } else { t };
        }
        t = next;
    }
    t
}

/// Every point in `bracket` where `|f|` has a local minimum not exceeding `tol.abs`.
pub fn find_zeros<F>(f: F, bracket: (f64, f64), tol: &Tolerance) -> Result<Vec<f64>, NumericsError>
where
    F: Fn(f64) -> Complex64,
{
    scan_zeros(&f, bracket, SCAN_SAMPLES, tol).map(|(roots, _)| roots)
}

fn scan_zeros<F: Fn(f64) -> Complex64>(
    f: &F,
    bracket: (f64, f64),
    samples: usize,
    tol: &Tolerance,
) -> Result<(Vec<f64>, f64), NumericsError> {
    let (a, b) = bracket;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(NumericsError::InvalidInterval { a, b });
    }
    let n = samples.max(8);
    let ts: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let mags: Vec<f64> = ts.iter().map(|&t| f(t).norm_sqr()).collect();
    if let Some(i) = mags.iter().position(|m| !m.is_finite()) {
        return Err(NumericsError::NonFinite { at: ts[i] });
    }
    let mut roots: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let left = if i == 0 { f64::INFINITY } else { mags[i - 1] };
        let right = if i == n { f64::INFINITY } else { mags[i + 1] };
        if mags[i] > left || mags[i] > right {
            continue;
        }
        let lo = ts[i.saturating_sub(1)];
        let hi = ts[(i + 1).min(n)];
        let t = refine_minimum(f, lo, hi, ts[i], tol);
        let v = f(t).norm();
        best = best.min(v);
        if v <= tol.abs && !roots.iter().any(|&r| (r - t).abs() <= 0.5 * (b - a) / n as f64) {
            roots.push(t);
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok((roots, best))
}

/// The leftmost zero of `f` in `bracket`, with `|f(t)| ≤ tol.abs`.
pub fn find_zero<F>(f: F, bracket: (f64, f64), tol: &Tolerance) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> Complex64,
{
    let (roots, best) = scan_zeros(&f, bracket, SCAN_SAMPLES, tol)?;
    roots.first().copied().ok_or(NumericsError::NoRoot { what: "find_zero", best })
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    pub fn centered(c: Complex64, half_width: f64) -> Self {
        Self { re: (c.re - half_width, c.re + half_width), im: (c.im - half_width, c.im + half_width) }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    pub fn diameter(&self) -> f64 {
        (self.re.1 - self.re.0).hypot(self.im.1 - self.im.0)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }

    // split off-centre so roots on symmetry lines do not land on a cut
    fn quarters(&self) -> [Rect; 4] {
        let c = Complex64::new(
            self.re.0 + SPLIT * (self.re.1 - self.re.0),
            self.im.0 + SPLIT * (self.im.1 - self.im.0),
        );
        [
            Rect::new((self.re.0, c.re), (self.im.0, c.im)),
            Rect::new((c.re, self.re.1), (self.im.0, c.im)),
            Rect::new((c.re, self.re.1), (c.im, self.im.1)),
            Rect::new((self.re.0, c.re), (c.im, self.im.1)),
        ]
    }
}

const SPLIT: f64 = 0.4871;

enum Winding {
    Count(i64),
    BoundaryZero(Complex64),
}

fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg()
}

fn edge_phase<F: Fn(Complex64) -> Complex64>(
    f: &F,
    z0: Complex64,
    f0: Complex64,
    z1: Complex64,
    f1: Complex64,
    depth: usize,
    floor: f64,
) -> Result<f64, Complex64> {
    let d = phase_step(f0, f1);
    if d.abs() < std::f64::consts::FRAC_PI_4 || depth == 0 {
        return Ok(d);
    }
    let zm = 0.5 * (z0 + z1);
    let fm = f(zm);
    if fm.norm() <= floor {
        return Err(zm);
    }
    Ok(edge_phase(f, z0, f0, zm, fm, depth - 1, floor)? + edge_phase(f, zm, fm, z1, f1, depth - 1, floor)?)
}

fn winding<F: Fn(Complex64) -> Complex64>(f: &F, rect: &Rect, floor: f64) -> Winding {
    let corners = rect.corners();
    let per_edge = 8;
    let mut total = 0.0;
    for e in 0..4 {
        let (za, zb) = (corners[e], corners[(e + 1) % 4]);
        let mut zp = za;
        let mut fp = f(za);
        if fp.norm() <= floor {
            return Winding::BoundaryZero(za);
        }
        for k in 1..=per_edge {
            let z = za + (zb - za) * (k as f64 / per_edge as f64);
            let fz = f(z);
            if fz.norm() <= floor {
                return Winding::BoundaryZero(z);
            }
            match edge_phase(f, zp, fp, z, fz, 24, floor) {
                Ok(d) => total += d,
                Err(z) => return Winding::BoundaryZero(z),
            }
            zp = z;
            fp = fz;
        }
    }
    Winding::Count((total / std::f64::consts::TAU).round() as i64)
}

/// Newton's method with a centred-difference derivative, for analytic `f`.
pub fn newton_polish<F: Fn(Complex64) -> Complex64>(f: &F, z0: Complex64, scale: f64, tol: &Tolerance) -> Complex64 {
    let mut z = z0;
    let mut fz = f(z);
    for _ in 0..60 {
        if fz.norm() <= 1e-3 * tol.abs {
            break;
        }
        let h = 1e-6 * scale.max(1e-8);
        let d = (f(z + h) - f(z - h)) / (2.0 * h);
        if d.norm() == 0.0 || !d.is_finite() {
            break;
        }
        let step = fz / d;
        let znew = z - step;
        let fnew = f(znew);
        if !fnew.is_finite() || fnew.norm() > 2.0 * fz.norm() {
            break;
        }
        z = znew;
        fz = fnew;
        if step.norm() <= 1e-15 * z.norm().max(scale) {
            break;
        }
    }
    z
}

/// Zeros of an analytic `f` inside `rect` by argument-principle subdivision.
///
/// Cells with nonzero winding number are split into quarters until they are
/// small, then the candidate is polished by Newton iteration. Only points with
/// `|f| ≤ tol.abs` are returned.
pub fn find_complex_zeros<F>(f: F, rect: Rect, tol: &Tolerance) -> Result<Vec<Complex64>, NumericsError>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(rect.re.0 < rect.re.1 && rect.im.0 < rect.im.1) {
        return Err(NumericsError::InvalidInterval { a: rect.re.0, b: rect.re.1 });
    }
    let diam = rect.diameter();
    let min_size = 1e-4 * diam;
    let floor = 1e-3 * tol.abs;
    let mut found: Vec<Complex64> = Vec::new();
    let mut stack = vec![(rect, 0usize)];
    let mut visited = 0usize;
    let accept = |z: Complex64, found: &mut Vec<Complex64>| {
        let v = f(z).norm();
        if v <= tol.abs && rect.contains(z) && !found.iter().any(|w| (w - z).norm() <= 1e-9 * diam.max(1.0)) {
            found.push(z);
        }
    };
    while let Some((cell, depth)) = stack.pop() {
        visited += 1;
        if visited > 64 * tol.max_iter.max(16) {
            return Err(NumericsError::NonConvergence { what: "complex zero search", iterations: visited, residual: cell.diameter() });
        }
        match winding(&f, &cell, floor) {
            Winding::BoundaryZero(z) => {
                let z = newton_polish(&f, z, cell.diameter(), tol);
                accept(z, &mut found);
                // any other zero in this cell is still found by its quarters
                if cell.diameter() > min_size && depth < 40 {
                    for q in cell.quarters() {
                        stack.push((q, depth + 1));
                    }
                }
            }
            Winding::Count(0) => {}
            Winding::Count(n) => {
                let exhausted = cell.diameter() <= min_size || depth >= 40;
                if n == 1 || exhausted {
                    let z = newton_polish(&f, cell.center(), cell.diameter(), tol);
                    let converged = cell.contains(z) && f(z).norm() <= tol.abs;
                    if (n == 1 && converged) || exhausted {
                        accept(z, &mut found);
                        continue;
                    }
                }
                for q in cell.quarters() {
                    stack.push((q, depth + 1));
                }
            }
        }
    }
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(found)
}
