//! Radial problem for `-Δ + g𝟙_{|x|<1}` in the plane.
//!
//! `φ` is regular at the origin, `θ` is outgoing (`H₀⁽¹⁾(ζr)` outside the
//! disk). Both are matched across `r = 1`; the matching coefficients are
//! `a, b` for `φ` and `A, B` for `θ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bessel::{bessel0, bessel01, j1, BesselError};
use crate::jost::{upper_sqrt, SpectralPoint};
use crate::numerics::{solve_ivp, NumericsError, Tolerance};

/// Radius around `±√g` where the matching representation is refused.
pub const BRANCH_EXCLUSION: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DiskError {
    #[error("spectral parameter {zeta} is within 1e-6 of a branch point ±√g")]
    NearBranchPoint { zeta: Complex64 },
    #[error("|B(ζ)| = {value:e} is too small to invert the Wronskian")]
    WronskianTooSmall { value: f64 },
    #[error("mode m = {m} is not strictly decreasing near r = {r}")]
    MonotonicityViolation { m: u32, r: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Matching data at `r = 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiskCoefficients {
    pub zeta: Complex64,
    pub g: f64,
    #[serde(rename = "Z")]
    pub big_z: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    #[serde(rename = "A")]
    pub big_a: Complex64,
    #[serde(rename = "B")]
    pub big_b: Complex64,
}

impl DiskCoefficients {
    /// `w_g(1, ζ) = W(θ, φ)(1) = -2B/π`.
    pub fn wronskian(&self) -> Complex64 {
        -2.0 * self.big_b / PI
    }

    /// Argument used for `Y₀(Zr)`; equals `Z` except on the negative real axis,
    /// where `-Z` is taken (`B` does not depend on the choice, `A` does).
    fn y_arg(&self) -> Complex64 {
        if self.big_z.im == 0.0 && self.big_z.re < 0.0 {
            -self.big_z
        } else {
            self.big_z
        }
    }
}

pub fn near_branch_point(zeta: Complex64, g: f64) -> bool {
    let r = g.sqrt();
    (zeta - r).norm() < BRANCH_EXCLUSION || (zeta + r).norm() < BRANCH_EXCLUSION
}

/// `Z = √(ζ² - g)` in the closed upper half-plane.
pub fn z_of(zeta: Complex64, g: f64) -> Complex64 {
    upper_sqrt(zeta * zeta - g, zeta)
}

pub fn disk_coefficients(zeta: Complex64, g: f64) -> Result<DiskCoefficients, DiskError> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(DiskError::InvalidParameter("g must be finite and nonnegative"));
    }
    if !(zeta.im >= 0.0) {
        return Err(DiskError::InvalidParameter("zeta must lie in the closed upper half-plane"));
    }
    if near_branch_point(zeta, g) {
        return Err(DiskError::NearBranchPoint { zeta });
    }
    let z = z_of(zeta, g);
    let outer = bessel0(zeta)?;
    // J₀(Z) and Z·J₀'(Z) are even in Z, so the cut is irrelevant for them
    let jz = crate::bessel::j0(z);
    let zdjz = -z * j1(z);
    let mut c = DiskCoefficients { zeta, g, big_z: z, a: 0.0.into(), b: 0.0.into(), big_a: 0.0.into(), big_b: 0.0.into() };
    let zy = c.y_arg();
    let inner = bessel0(zy)?;

    c.a = FRAC_PI_2 * (zeta * jz * outer.dy0 - zdjz * outer.y0);
    c.b = FRAC_PI_2 * (zdjz * outer.j0 - zeta * jz * outer.dj0);
    c.big_a = FRAC_PI_2 * (zy * outer.h1_0 * inner.dy0 - zeta * outer.dh1_0() * inner.y0);
    c.big_b = FRAC_PI_2 * (zeta * outer.dh1_0() * jz - zdjz * outer.h1_0);
    Ok(c)
}

/// `Γ = i√g J₀'(i√g) = √g I₁(√g)`.
pub fn gamma(g: f64) -> f64 {
    let s = g.sqrt();
    (-i() * s * j1(i() * s)).re
}

/// `φ, θ` and their `r`-derivatives.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadialValues {
    pub r: f64,
    pub phi: Complex64,
    pub theta: Complex64,
    pub dphi: Complex64,
    pub dtheta: Complex64,
}

fn phi_at(c: &DiskCoefficients, r: f64) -> Result<(Complex64, Complex64), DiskError> {
    if r <= 1.0 {
        let zr = c.big_z * r;
        Ok((crate::bessel::j0(zr), -c.big_z * j1(zr)))
    } else {
        let o = bessel0(c.zeta * r)?;
        Ok((c.a * o.j0 + c.b * o.y0, c.zeta * (c.a * o.dj0 + c.b * o.dy0)))
    }
}

fn theta_at(c: &DiskCoefficients, r: f64) -> Result<(Complex64, Complex64), DiskError> {
    if r <= 1.0 {
        let zy = c.y_arg();
        let o = bessel0(zy * r)?;
        Ok((c.big_a * o.j0 + c.big_b * o.y0, zy * (c.big_a * o.dj0 + c.big_b * o.dy0)))
    } else {
        let o = bessel0(c.zeta * r)?;
        Ok((o.h1_0, c.zeta * o.dh1_0()))
    }
}

pub fn radial_solutions_with(c: &DiskCoefficients, r: f64) -> Result<RadialValues, DiskError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(DiskError::InvalidParameter("r must be positive"));
    }
    let (phi, dphi) = phi_at(c, r)?;
    let (theta, dtheta) = theta_at(c, r)?;
    Ok(RadialValues { r, phi, theta, dphi, dtheta })
}

pub fn radial_solutions(r: f64, zeta: Complex64, g: f64) -> Result<RadialValues, DiskError> {
    radial_solutions_with(&disk_coefficients(zeta, g)?, r)
}

/// `|B|` below which the kernel is refused.
pub const TOL_B: f64 = 1e-12;

/// Radial resolvent kernel `φ(r<)θ(r>)/w` with respect to `s ds`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadialKernel2D {
    pub g: f64,
    pub sp: SpectralPoint,
    pub coefficients: DiskCoefficients,
    w: Complex64,
}

pub fn kernel2d_radial(g: f64, sp: &SpectralPoint) -> Result<RadialKernel2D, DiskError> {
    let c = disk_coefficients(sp.zeta, g)?;
    if c.big_b.norm() <= TOL_B {
        return Err(DiskError::WronskianTooSmall { value: c.big_b.norm() });
    }
    Ok(RadialKernel2D { g, sp: *sp, coefficients: c, w: c.wronskian() })
}

impl RadialKernel2D {
    pub fn wronskian(&self) -> Complex64 {
        self.w
    }

    pub fn eval(&self, r: f64, s: f64) -> Result<Complex64, DiskError> {
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        let (p, _) = phi_at(&self.coefficients, lo)?;
        let (t, _) = theta_at(&self.coefficients, hi)?;
        Ok(p * t / self.w)
    }

    /// `θ(r)/w`, the factor that tends to `1/Γ` for `r ≥ 1` as `ζ → 0`.
    pub fn theta_over_w(&self, r: f64) -> Result<Complex64, DiskError> {
        Ok(theta_at(&self.coefficients, r)?.0 / self.w)
    }

    /// `(φ(r), θ(r)/w)` at each node; the kernel is `left[min]·right[max]`.
    pub fn factors(&self, rs: &[f64]) -> Result<(Vec<Complex64>, Vec<Complex64>), DiskError> {
        let mut left = Vec::with_capacity(rs.len());
        let mut right = Vec::with_capacity(rs.len());
        for &r in rs {
            left.push(phi_at(&self.coefficients, r)?.0);
            right.push(theta_at(&self.coefficients, r)?.0 / self.w);
        }
        Ok((left, right))
    }
}

/// `C·ln(2+r<)·ln(2+1/r>)`, the shape of the pointwise kernel bound.
pub fn log_bound_profile(r: f64, s: f64) -> f64 {
    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
    (2.0 + lo).ln() * (2.0 + 1.0 / hi).ln()
}

/// Smallest `C` with `|K(r,s)| ≤ C·profile(r,s)` over the given nodes.
pub fn empirical_bound_constant(k: &RadialKernel2D, rs: &[f64]) -> Result<f64, DiskError> {
    let (left, right) = k.factors(rs)?;
    let mut c = 0.0f64;
    for (a, &r) in rs.iter().enumerate() {
        for (b, &s) in rs.iter().enumerate() {
            let val = if r <= s { left[a] * right[b] } else { left[b] * right[a] };
            c = c.max(val.norm() / log_bound_profile(r, s));
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct BScan {
    /// `min |B| / ln(2 + 1/|ζ|)` over the grid.
    pub c_emp: f64,
    pub witness: Complex64,
    /// Largest `|A/B|` among points with `|ζ² - g| ≥ g/2`; `None` if there are none.
    pub max_a_over_b: Option<f64>,
    pub points: usize,
    pub skipped: usize,
}

/// Lower-bound scan of `|B(ζ)|` against `ln(2 + |ζ|⁻¹)`.
pub fn b_lower_bound_scan(g: f64, zeta_grid: &[Complex64]) -> Result<BScan, DiskError> {
    let mut c_emp = f64::INFINITY;
    let mut witness = Complex64::new(f64::NAN, f64::NAN);
    let mut max_ab: Option<f64> = None;
    let mut skipped = 0;
    for &zeta in zeta_grid {
        let c = match disk_coefficients(zeta, g) {
            Ok(c) => c,
            Err(DiskError::NearBranchPoint { .. }) | Err(DiskError::Bessel(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let ratio = c.big_b.norm() / (2.0 + 1.0 / zeta.norm()).ln();
        if ratio < c_emp {
            c_emp = ratio;
            witness = zeta;
        }
        if (zeta * zeta - g).norm() >= 0.5 * g {
            let ab = (c.big_a / c.big_b).norm();
            max_ab = Some(max_ab.map_or(ab, |m| m.max(ab)));
        }
    }
    if skipped == zeta_grid.len() {
        return Err(DiskError::InvalidParameter("no usable grid points"));
    }
    Ok(BScan { c_emp, witness, max_a_over_b: max_ab, points: zeta_grid.len() - skipped, skipped })
}

/// Points `ζ = √w` (upper branch) for `w` on a polar grid of `D_ε(0)`.
pub fn zeta_grid_in_disk(eps: f64, n_radial: usize, n_angular: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_radial * n_angular);
    for a in 0..n_radial {
        let rho = eps * (a as f64 + 1.0) / n_radial as f64;
        for b in 0..n_angular {
            // half-offset angles keep clear of the positive axis through √g
            let t = 2.0 * PI * (b as f64 + 0.5) / n_angular as f64;
            let w = Complex64::from_polar(rho, t);
            out.push(upper_sqrt(w, Complex64::new(0.0, 1.0)));
        }
    }
    out
}

/// Inward solution of the angular mode `m` inside the unit disk.
#[derive(Debug, Clone, Serialize)]
pub struct ModeProfile {
    pub m: u32,
    pub g: f64,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// `min φ(r)/|ln r|` over nodes with `r ≤ 0.1`.
    pub log_growth: f64,
}

/// Integrate `(-∂² - r⁻¹∂ + m²/r² + g)φ = 0` from `r = 1` inward with
/// `φ(1) = 1`, `φ'(1) = -m`, and check that `φ` decreases strictly in `r`.
pub fn nonradial_mode_profile(m: u32, g: f64, grid: &[f64]) -> Result<ModeProfile, DiskError> {
    if !(g >= 0.0) {
        return Err(DiskError::InvalidParameter("g must be nonnegative"));
    }
    if grid.is_empty() || grid.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(DiskError::InvalidParameter("grid must lie in (0, 1]"));
    }
    let mut nodes: Vec<f64> = grid.to_vec();
    nodes.sort_by(|a, b| b.total_cmp(a));
    nodes.dedup();
    let r_min = *nodes.last().unwrap();
    let m2 = (m as f64).powi(2);
    let tol = Tolerance { rel: 1e-11, abs: 1e-13, max_iter: 1000 };
    let y0 = [Complex64::new(1.0, 0.0), Complex64::new(-(m as f64), 0.0)];
    let traj = solve_ivp(
        |r, y, d| {
            d[0] = y[1];
            d[1] = -y[1] / r + (m2 / (r * r) + g) * y[0];
        },
        &y0,
        (1.0, r_min),
        &nodes,
        &tol,
    )?;

    // trajectory runs from r = 1 downwards; report ascending in r
    let mut r = Vec::new();
    let mut phi = Vec::new();
    let mut dphi = Vec::new();
    for (t, y) in traj.t.iter().zip(&traj.y).rev() {
        if nodes.contains(t) {
            r.push(*t);
            phi.push(y[0].re);
            dphi.push(y[1].re);
        }
    }
    let degenerate = m == 0 && g == 0.0;
    for k in 1..r.len() {
        let ok = if degenerate { phi[k - 1] >= phi[k] - 1e-12 } else { phi[k - 1] > phi[k] };
        if !ok {
            return Err(DiskError::MonotonicityViolation { m, r: r[k] });
        }
    }
    let log_growth = r
        .iter()
        .zip(&phi)
        .filter(|(&x, _)| x <= 0.1)
        .map(|(&x, &p)| p / x.ln().abs())
        .fold(f64::INFINITY, f64::min);
    Ok(ModeProfile { m, g, r, phi, dphi, log_growth })
}

/// Free resolvent on the angular sector `e^{imφ}`: `(iπ/2) J_m(ζr<) H_m⁽¹⁾(ζr>)` with
/// respect to `s ds`, for `m ∈ {0, 1}`.
pub fn free_sector_kernel(m: u32, sp: &SpectralPoint, r: f64, s: f64) -> Result<Complex64, DiskError> {
    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
    let zeta = sp.zeta;
    let val = match m {
        0 => crate::bessel::j0(zeta * lo) * bessel0(zeta * hi)?.h1_0,
        1 => j1(zeta * lo) * bessel01(zeta * hi)?.1.h1_1,
        _ => return Err(DiskError::InvalidParameter("sector kernel is available for m = 0, 1")),
    };
    Ok(i() * FRAC_PI_2 * val)
}
