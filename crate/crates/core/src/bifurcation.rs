//! Eigenvalues emerging from threshold points.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::jost::{JostError, JostEvaluator, Side, SpectralPoint};
use crate::numerics::{find_complex_zeros, find_zero, NumericsError, Rect, Tolerance};
use crate::potentials::{Potential, PotentialError};
use crate::resolvent::tol_w;

#[derive(Debug, Error)]
pub enum BifurcationError {
    #[error("no eigenvalue found for g = {g}")]
    NoRoot { g: f64 },
    #[error("lost track of the eigenvalue at epsilon = {epsilon}")]
    EigenvalueLost { epsilon: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Jost(#[from] JostError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn w_at(v: &Potential, zeta: Complex64, tol: &Tolerance) -> Complex64 {
    SpectralPoint::new(zeta)
        .and_then(|sp| crate::jost::wronskian(v, &sp, tol))
        .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShallowWell {
    pub g: f64,
    pub kappa: f64,
    pub energy: Complex64,
    pub wronskian_abs: f64,
}

/// Ground state `E = -κ²` of `-∂² - g𝟙_{[-1,1]}` from the zero of `κ ↦ w(iκ)` in `(0, g]`.
pub fn shallow_well_eigenvalue(g: f64, tol: &Tolerance) -> Result<ShallowWell, BifurcationError> {
    if !(g > 0.0 && g <= 0.5) {
        return Err(BifurcationError::InvalidArgument("g must lie in (0, 0.5]"));
    }
    let v = Potential::barrier(-g);
    let f = |kappa: f64| w_at(&v, Complex64::new(0.0, kappa), tol);
    let search = Tolerance { abs: tol_w(Complex64::new(0.0, g)), ..*tol };
    let kappa = match find_zero(f, (1e-3 * g, g), &search) {
        Ok(k) => k,
        Err(NumericsError::NoRoot { .. }) => return Err(BifurcationError::NoRoot { g }),
        Err(e) => return Err(e.into()),
    };
    let energy = Complex64::new(-kappa * kappa, 0.0);
    if !(energy.re > -g && energy.re < 0.0) {
        return Err(BifurcationError::NoRoot { g });
    }
    Ok(ShallowWell { g, kappa, energy, wronskian_abs: f(kappa).norm() })
}

/// Least-squares fit `y ≈ prefactor·x^exponent` on log-log axes.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, (my - slope * mx).exp())
}

/// Radial state of the three-dimensional family and the potential it defines.
#[derive(Debug, Clone, Serialize)]
pub struct Family3d {
    pub zeta: Complex64,
    pub r: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub potential: Vec<Complex64>,
    /// `max |-ψ'' - 2ψ'/r + Vψ - ζ²ψ|` over the sampled `r`.
    pub residual: f64,
    /// Jumps of `ψ` and `ψ'` across `r = 1`.
    pub jump_psi: f64,
    pub jump_dpsi: f64,
}

/// `ψ, ψ', ψ''` of the family at radius `r`.
pub fn family_state(zeta: Complex64, r: f64) -> (Complex64, Complex64, Complex64) {
    let iz = i() * zeta;
    if r >= 1.0 {
        let e = (iz * r).exp();
        let psi = e / r;
        let d = (iz / r - 1.0 / (r * r)) * e;
        let dd = (iz * iz / r - 2.0 * iz / (r * r) + 2.0 / (r * r * r)) * e;
        (psi, d, dd)
    } else {
        let p = 0.5 * (3.0 - r * r);
        let e = (0.5 * iz * (1.0 + r * r)).exp();
        let psi = p * e;
        let d = (-r + iz * r * p) * e;
        let dd = (-1.0 - 2.0 * iz * r * r + iz * p + iz * iz * r * r * p) * e;
        (psi, d, dd)
    }
}

/// `V(r, ζ) = ζ²(1-r²) + 3iζ - (3 + 2iζr²)/p`, `p = (3-r²)/2`, for `r < 1`; zero outside.
pub fn family_potential(zeta: Complex64, r: f64) -> Complex64 {
    if r >= 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    let p = 0.5 * (3.0 - r * r);
    zeta * zeta * (1.0 - r * r) + 3.0 * i() * zeta - (3.0 + 2.0 * i() * zeta * r * r) / p
}

pub fn construct_3d_family(zeta: Complex64, grid: &[f64]) -> Result<Family3d, BifurcationError> {
    if !(zeta.im >= 0.0) {
        return Err(BifurcationError::InvalidArgument("zeta must lie in the closed upper half-plane"));
    }
    if grid.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(BifurcationError::InvalidArgument("radii must be positive"));
    }
    let mut psi = Vec::with_capacity(grid.len());
    let mut potential = Vec::with_capacity(grid.len());
    let mut residual = 0.0f64;
    for &r in grid {
        let (p, d, dd) = family_state(zeta, r);
        let v = family_potential(zeta, r);
        let res = -dd - 2.0 * d / r + v * p - zeta * zeta * p;
        residual = residual.max(res.norm() / (1.0 + p.norm()));
        psi.push(p);
        potential.push(v);
    }
    let (p_in, d_in, _) = family_state(zeta, 1.0 - 1e-12);
    let (p_out, d_out, _) = family_state(zeta, 1.0);
    Ok(Family3d {
        zeta,
        r: grid.to_vec(),
        psi,
        potential,
        residual,
        jump_psi: (p_in - p_out).norm(),
        jump_dpsi: (d_in - d_out).norm(),
    })
}

/// `V(·, ζ)` as a piecewise polynomial on `[0, 1]` and the interpolation error.
pub fn family_potential_fit(zeta: Complex64) -> Result<(Potential, f64), BifurcationError> {
    Ok(Potential::interpolate(|r| family_potential(zeta, r), 0.0, 1.0, 8, 14)?)
}

/// Half-line Jost function `f(k) = θ₊(0, k)` for `-u'' + V(·, ζ₀)u = k²u`, `u = rψ`.
pub fn family_jost_function(v: &Potential, k: Complex64, tol: &Tolerance) -> Result<Complex64, BifurcationError> {
    let sp = SpectralPoint::new(k)?;
    let ev = JostEvaluator::new(v, &sp, Side::Plus, tol)?;
    Ok(ev.eval(0.0).0)
}

/// `(ε, E(ε), |w|)` along a perturbation path.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationPath {
    pub epsilons: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub wronskian_abs: Vec<f64>,
    pub z0: Complex64,
    /// `|E(ε) - z0| ≈ prefactor·ε^exponent`.
    pub law_fit: Option<(f64, f64)>,
}

impl BifurcationPath {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,re_E,im_E,wronskian_abs\n");
        for k in 0..self.epsilons.len() {
            let e = self.eigenvalues[k];
            out.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", self.epsilons[k], e.re, e.im, self.wronskian_abs[k]));
        }
        out
    }
}

pub const DEFAULT_EPSILONS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

/// `ζ` with `|ζ²-z0|` small in a rectangle of half-size `radius` above `√z0`.
fn search_rect(z0: f64, radius: f64) -> Rect {
    let c = z0.max(0.0).sqrt();
    Rect::new((c - radius, c + radius), (1e-3 * radius, radius))
}

/// Zeros of `w` for `V` with `ζ` in `search_rect(z0, radius)`, as energies.
pub fn eigenvalues_near(v: &Potential, z0: f64, radius: f64, tol: &Tolerance) -> Result<Vec<(Complex64, f64)>, BifurcationError> {
    let rect = search_rect(z0, radius);
    let search = Tolerance { abs: tol_w(rect.center()), ..*tol };
    let zetas = find_complex_zeros(|zeta| w_at(v, zeta, tol), rect, &search)?;
    Ok(zetas.into_iter().map(|zeta| (zeta * zeta, w_at(v, zeta, tol).norm())).collect())
}

/// Follow the eigenvalue of `-∂² + V - εW` nearest `z0` as `ε` decreases.
pub fn track_bifurcation(
    v: &Potential,
    w: &Potential,
    z0: f64,
    eps_list: &[f64],
    tol: &Tolerance,
) -> Result<BifurcationPath, BifurcationError> {
    if eps_list.is_empty() || eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(BifurcationError::InvalidArgument("epsilons must be positive"));
    }
    let zeta0 = Complex64::new(z0.max(0.0).sqrt(), 0.0);
    let mut radius = 0.5;
    let mut path = BifurcationPath { epsilons: Vec::new(), eigenvalues: Vec::new(), wronskian_abs: Vec::new(), z0: z0.into(), law_fit: None };
    for &eps in eps_list {
        let pert = v.add(&w.scale(Complex64::new(-eps, 0.0)));
        let mut found = eigenvalues_near(&pert, z0, radius, tol)?;
        if found.is_empty() && radius < 0.5 {
            found = eigenvalues_near(&pert, z0, 0.5, tol)?;
        }
        let best = found
            .into_iter()
            .filter(|(e, wabs)| *wabs <= tol_w(upper_root(*e)))
            .min_by(|a, b| (a.0 - z0).norm().total_cmp(&(b.0 - z0).norm()))
            .ok_or(BifurcationError::EigenvalueLost { epsilon: eps })?;
        radius = (1.5 * (upper_root(best.0) - zeta0).norm()).min(0.5);
        path.epsilons.push(eps);
        path.eigenvalues.push(best.0);
        path.wronskian_abs.push(best.1);
    }
    if path.epsilons.len() >= 2 {
        let d: Vec<f64> = path.eigenvalues.iter().map(|e| (e - z0).norm()).collect();
        path.law_fit = Some(power_law_fit(&path.epsilons, &d));
    }
    Ok(path)
}

fn upper_root(e: Complex64) -> Complex64 {
    let s = e.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}
