//! Resolvent kernels built from Jost solutions, their action on sampled
//! functions, and threshold classification.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disk2d::{kernel2d_radial, DiskError, RadialKernel2D};
use crate::jost::{barrier, sinc, JostError, JostPair, SpectralPoint};
use crate::lapnorm::{lap_sweep, GridSpec, NormSweep, SpaceTag, WeightPair};
use crate::numerics::{find_complex_zeros, find_zeros, Grid, NumericsError, Rect, Tolerance};
use crate::potentials::Potential;

#[derive(Debug, Error)]
pub enum ResolventError {
    #[error("|w(ζ)| = {value:e} is below the threshold {threshold:e}")]
    WronskianTooSmall { value: f64, threshold: f64 },
    #[error("residual {residual:e} exceeds {limit:e}; refine the grid")]
    ResidualTooLarge { residual: f64, limit: f64 },
    #[error("sample count {samples} does not match the grid ({nodes} nodes)")]
    LengthMismatch { samples: usize, nodes: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Jost(#[from] JostError),
    #[error(transparent)]
    Disk(#[from] DiskError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// `1e-8·(1 + |ζ|)`.
pub fn tol_w(zeta: Complex64) -> f64 {
    1e-8 * (1.0 + zeta.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelFamily {
    Free1d,
    Barrier1d { g: f64 },
    Generic1d { potential: Potential },
    /// Half-line kernel of `u = rψ` for radial functions in three dimensions.
    Free3d,
    Disk2dRadial { g: f64 },
}

impl KernelFamily {
    pub fn is_radial(&self) -> bool {
        matches!(self, Self::Free3d | Self::Disk2dRadial { .. })
    }

    /// Discontinuities of the potential term.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Barrier1d { .. } => vec![-1.0, 1.0],
            Self::Generic1d { potential } => potential.breakpoints(),
            Self::Disk2dRadial { .. } => vec![1.0],
            _ => Vec::new(),
        }
    }

    /// Potential at `x`, averaging the one-sided limits at a jump.
    pub fn potential_at(&self, x: f64) -> Complex64 {
        let step = |g: f64, inside: bool, edge: bool| {
            if edge {
                0.5 * g
            } else if inside {
                g
            } else {
                0.0
            }
        };
        match self {
            Self::Free1d | Self::Free3d => Complex64::new(0.0, 0.0),
            Self::Barrier1d { g } => step(*g, x.abs() < 1.0, x.abs() == 1.0).into(),
            Self::Disk2dRadial { g } => step(*g, x < 1.0, x == 1.0).into(),
            Self::Generic1d { potential } => 0.5 * (potential.eval_one_sided(x, false) + potential.eval_one_sided(x, true)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Free1d => "free1d".into(),
            Self::Barrier1d { g } => format!("barrier1d(g={g})"),
            Self::Generic1d { .. } => "generic1d".into(),
            Self::Free3d => "free3d".into(),
            Self::Disk2dRadial { g } => format!("disk2d_radial(g={g})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Free1d,
    Barrier { g: f64, w: Complex64 },
    Generic { pair: Box<JostPair>, w: Complex64 },
    Free3d,
    Disk(RadialKernel2D),
}

/// Resolvent kernel of one family at one spectral point.
#[derive(Debug, Clone)]
pub struct KernelHandle {
    pub family: KernelFamily,
    pub sp: SpectralPoint,
    repr: Repr,
}

/// Generic 1D kernel `θ₊(max)θ₋(min)/w`.
pub fn kernel(v: &Potential, sp: &SpectralPoint, tol: &Tolerance) -> Result<KernelHandle, ResolventError> {
    KernelHandle::new(KernelFamily::Generic1d { potential: v.clone() }, sp, tol)
}

impl KernelHandle {
    pub fn new(family: KernelFamily, sp: &SpectralPoint, tol: &Tolerance) -> Result<Self, ResolventError> {
        let threshold = tol_w(sp.zeta);
        let check = |w: Complex64| {
            if w.norm() <= threshold {
                Err(ResolventError::WronskianTooSmall { value: w.norm(), threshold })
            } else {
                Ok(w)
            }
        };
        let repr = match &family {
            KernelFamily::Free1d => {
                check(-2.0 * i() * sp.zeta)?;
                Repr::Free1d
            }
            KernelFamily::Barrier1d { g } => {
                let w = check(barrier::wronskian_closed(sp.zeta, *g))?;
                Repr::Barrier { g: *g, w }
            }
            KernelFamily::Generic1d { potential } => {
                let pair = JostPair::new(potential, sp, tol)?;
                let w = check(pair.wronskian(tol)?.value)?;
                Repr::Generic { pair: Box::new(pair), w }
            }
            KernelFamily::Free3d => Repr::Free3d,
            KernelFamily::Disk2dRadial { g } => {
                let k = kernel2d_radial(*g, sp)?;
                Repr::Disk(k)
            }
        };
        Ok(Self { family, sp: *sp, repr })
    }

    /// Wronskian entering the denominator (`1` for the free 3D half-line kernel).
    pub fn wronskian(&self) -> Complex64 {
        match &self.repr {
            Repr::Free1d => -2.0 * i() * self.sp.zeta,
            Repr::Barrier { w, .. } | Repr::Generic { w, .. } => *w,
            Repr::Free3d => Complex64::new(1.0, 0.0),
            Repr::Disk(k) => k.wronskian(),
        }
    }

    pub fn is_radial(&self) -> bool {
        self.family.is_radial()
    }

    /// Density of the integration measure: `r` for the 2D radial kernel, `1` otherwise.
    pub fn measure(&self, y: f64) -> f64 {
        match self.repr {
            Repr::Disk(_) => y,
            _ => 1.0,
        }
    }

    fn check_point(&self, x: f64) -> Result<(), ResolventError> {
        if !x.is_finite() || (self.is_radial() && x <= 0.0) {
            return Err(ResolventError::InvalidArgument("kernel argument outside the domain"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<Complex64, ResolventError> {
        self.check_point(x)?;
        self.check_point(y)?;
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let zeta = self.sp.zeta;
        Ok(match &self.repr {
            Repr::Free1d => i() * (i() * zeta * (hi - lo)).exp() / (2.0 * zeta),
            Repr::Free3d => free3d_radial(zeta, lo, hi),
            Repr::Disk(k) => k.eval(lo, hi)?,
            _ => {
                let (l, _) = self.left(lo);
                let (r, _) = self.right(hi);
                l * r
            }
        })
    }

    /// `θ₋` (value, derivative).
    fn left(&self, x: f64) -> (Complex64, Complex64) {
        match &self.repr {
            Repr::Barrier { g, .. } => {
                let (t, d) = barrier::theta_plus(self.sp.zeta, *g, -x);
                (t, -d)
            }
            Repr::Generic { pair, .. } => pair.minus.eval(x),
            _ => unreachable!("factorised form is only used for Jost-based kernels"),
        }
    }

    /// `θ₊/w` (value, derivative).
    fn right(&self, x: f64) -> (Complex64, Complex64) {
        let w = self.wronskian();
        let (t, d) = match &self.repr {
            Repr::Barrier { g, .. } => barrier::theta_plus(self.sp.zeta, *g, x),
            Repr::Generic { pair, .. } => pair.plus.eval(x),
            _ => unreachable!("factorised form is only used for Jost-based kernels"),
        };
        (t / w, d / w)
    }

    /// Dense matrix `K(xs[i], ys[j])`.
    pub fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<DMatrix<Complex64>, ResolventError> {
        for &x in xs.iter().chain(ys) {
            self.check_point(x)?;
        }
        let zeta = self.sp.zeta;
        let m = match &self.repr {
            Repr::Free1d => DMatrix::from_fn(xs.len(), ys.len(), |a, b| {
                i() * (i() * zeta * (xs[a] - ys[b]).abs()).exp() / (2.0 * zeta)
            }),
            Repr::Free3d => DMatrix::from_fn(xs.len(), ys.len(), |a, b| {
                let (lo, hi) = if xs[a] <= ys[b] { (xs[a], ys[b]) } else { (ys[b], xs[a]) };
                free3d_radial(zeta, lo, hi)
            }),
            Repr::Disk(k) => {
                let (lx, rx) = k.factors(xs)?;
                let (ly, ry) = k.factors(ys)?;
                DMatrix::from_fn(xs.len(), ys.len(), |a, b| if xs[a] <= ys[b] { lx[a] * ry[b] } else { ly[b] * rx[a] })
            }
            _ => {
                let lx: Vec<_> = xs.iter().map(|&x| self.left(x).0).collect();
                let rx: Vec<_> = xs.iter().map(|&x| self.right(x).0).collect();
                let ly: Vec<_> = ys.iter().map(|&y| self.left(y).0).collect();
                let ry: Vec<_> = ys.iter().map(|&y| self.right(y).0).collect();
                DMatrix::from_fn(xs.len(), ys.len(), |a, b| if xs[a] <= ys[b] { lx[a] * ry[b] } else { ly[b] * rx[a] })
            }
        };
        Ok(m)
    }
}

/// `sin(ζr<) e^{iζr>}/ζ`, continuous at `ζ = 0`.
fn free3d_radial(zeta: Complex64, lo: f64, hi: f64) -> Complex64 {
    sinc(zeta * lo) * lo * (i() * zeta * hi).exp()
}

/// `e^{iζ|x-y|}/(4π|x-y|)`, the full three-dimensional free kernel.
pub fn free3d_point_kernel(sp: &SpectralPoint, x: [f64; 3], y: [f64; 3]) -> Complex64 {
    let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
    (i() * sp.zeta * d).exp() / (4.0 * std::f64::consts::PI * d)
}

/// Right-hand side of the pointwise kernel estimate in terms of the potential size `m`.
pub fn kernel_bound(m: f64, sp: &SpectralPoint, w: Complex64, x: f64, y: f64) -> f64 {
    let pre = (2.0 * std::f64::consts::SQRT_2 * m / sp.bracket()).exp() / w.norm();
    let shape = if (x <= 0.0 && 0.0 <= y) || (y <= 0.0 && 0.0 <= x) {
        1.0
    } else if (x <= y && y <= 0.0) || (0.0 <= y && y <= x) {
        1.0 + y.abs()
    } else {
        1.0 + x.abs()
    };
    pre * shape
}

/// `e^{2M/|ζ|}/|w|`, a uniform bound for `ζ ≠ 0`.
pub fn kernel_bound_nonzero(m: f64, sp: &SpectralPoint, w: Complex64) -> f64 {
    (2.0 * m / sp.zeta.norm()).exp() / w.norm()
}

/// Result of [`apply`].
#[derive(Debug, Clone, Serialize)]
pub struct Applied {
    pub u: Vec<Complex64>,
    /// `‖(-D² + V - z)u - f‖∞` over the checked interior nodes.
    pub residual: f64,
    pub limit: f64,
    pub checked_nodes: usize,
}

/// `u = ∫K f` by the grid quadrature, with a finite-difference residual check.
///
/// The residual skips nodes whose three-point stencil has a jump of the
/// potential strictly inside it, where `u''` is not defined pointwise.
pub fn apply(k: &KernelHandle, f: &[Complex64], grid: &Grid, tol: &Tolerance) -> Result<Applied, ResolventError> {
    let x = grid.nodes();
    if f.len() != x.len() {
        return Err(ResolventError::LengthMismatch { samples: f.len(), nodes: x.len() });
    }
    let m = k.matrix(x, x)?;
    let wf: Vec<Complex64> = (0..x.len()).map(|j| f[j] * grid.weights()[j] * k.measure(x[j])).collect();
    let u: Vec<Complex64> = (0..x.len()).map(|a| (0..x.len()).map(|b| m[(a, b)] * wf[b]).sum()).collect();

    let breaks = k.family.breakpoints();
    let z = k.sp.z;
    let disk = matches!(k.family, KernelFamily::Disk2dRadial { .. });
    let mut residual = 0.0f64;
    let mut checked = 0;
    for c in 1..x.len().saturating_sub(1) {
        let (xl, xc, xr) = (x[c - 1], x[c], x[c + 1]);
        if breaks.iter().any(|&b| xl < b && b < xr) {
            continue;
        }
        let (h1, h2) = (xc - xl, xr - xc);
        let d2 = 2.0 * ((u[c + 1] - u[c]) / h2 - (u[c] - u[c - 1]) / h1) / (h1 + h2);
        let mut lhs = -d2 + (k.family.potential_at(xc) - z) * u[c];
        if disk {
            let d1 = (u[c + 1] - u[c - 1]) / (h1 + h2);
            lhs -= d1 / xc;
        }
        residual = residual.max((lhs - f[c]).norm());
        checked += 1;
    }
    let fmax = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let limit = tol.rel * (1.0 + fmax);
    if !(residual <= limit) {
        return Err(ResolventError::ResidualTooLarge { residual, limit });
    }
    Ok(Applied { u, residual, limit, checked_nodes: checked })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Regular,
    VirtualLevel,
    BoundState,
    Excluded,
}

/// Function values on a set of nodes.
#[derive(Debug, Clone, Serialize)]
pub struct SampledFunction {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VirtualLevelReport {
    pub z0: Complex64,
    pub zeta: Complex64,
    pub wronskian_value: Complex64,
    pub tol_w: f64,
    pub classification: Classification,
    /// `1` for a virtual level or eigenvalue, `0` otherwise.
    pub rank: u32,
    pub virtual_state: Option<SampledFunction>,
    pub evidence: Option<NormSweep>,
    pub evidence_error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DetectOptions {
    /// Nodes on which a virtual state or eigenfunction is sampled; `None` picks
    /// 201 points on `[-(R+5), R+5]`.
    pub state_nodes: Option<Vec<f64>>,
    /// Attach a norm sweep towards `z0` when the point is regular.
    pub evidence: bool,
    pub evidence_weights: WeightPair,
    /// Path `ζ₀ + i·10^{-k}`, `k = 1..=evidence_steps`.
    pub evidence_steps: u32,
    pub evidence_grid: Option<GridSpec>,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            state_nodes: None,
            evidence: true,
            evidence_weights: WeightPair { s: 1.1, sprime: 1.1, space_tag: SpaceTag::L2sToL2ms },
            evidence_steps: 4,
            evidence_grid: None,
        }
    }
}

pub fn detect_virtual_level(v: &Potential, z0: f64, tol: &Tolerance) -> VirtualLevelReport {
    detect_virtual_level_with(v, z0, tol, &DetectOptions::default())
}

/// Classify `z0`: virtual level (`z0 ≥ 0`, `w(√z0) ≈ 0`), eigenvalue (`z0 < 0`,
/// `w(i√-z0) ≈ 0`), regular (`z0 ≥ 0` otherwise) or excluded.
pub fn detect_virtual_level_with(v: &Potential, z0: f64, tol: &Tolerance, opts: &DetectOptions) -> VirtualLevelReport {
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut report = VirtualLevelReport {
        z0: z0.into(),
        zeta: nan,
        wronskian_value: nan,
        tol_w: f64::NAN,
        classification: Classification::Excluded,
        rank: 0,
        virtual_state: None,
        evidence: None,
        evidence_error: None,
    };
    if !z0.is_finite() {
        return report;
    }
    let zeta = if z0 >= 0.0 { Complex64::new(z0.sqrt(), 0.0) } else { Complex64::new(0.0, (-z0).sqrt()) };
    report.zeta = zeta;
    report.tol_w = tol_w(zeta);
    let sp = match SpectralPoint::new(zeta) {
        Ok(sp) => sp,
        Err(_) => return report,
    };
    let pair = match JostPair::new(v, &sp, tol).and_then(|p| p.wronskian(tol).map(|w| (p, w))) {
        Ok(x) => x,
        Err(e) => {
            report.evidence_error = Some(e.to_string());
            return report;
        }
    };
    let (pair, w) = pair;
    report.wronskian_value = w.value;
    let vanishing = w.value.norm() <= report.tol_w;
    report.classification = match (z0 >= 0.0, vanishing) {
        (true, true) => Classification::VirtualLevel,
        (true, false) => Classification::Regular,
        (false, true) => Classification::BoundState,
        (false, false) => Classification::Excluded,
    };
    if vanishing {
        report.rank = 1;
        let nodes = opts.state_nodes.clone().unwrap_or_else(|| {
            let r = v.support_radius() + 5.0;
            (0..201).map(|k| -r + 2.0 * r * k as f64 / 200.0).collect()
        });
        let values = nodes.iter().map(|&x| pair.plus.eval(x).0).collect();
        report.virtual_state = Some(SampledFunction { x: nodes, values });
    }
    if report.classification == Classification::Regular && opts.evidence {
        let path: Vec<SpectralPoint> = (1..=opts.evidence_steps)
            .filter_map(|k| SpectralPoint::new(zeta + i() * 10f64.powi(-(k as i32))).ok())
            .collect();
        let spec = opts.evidence_grid.clone().unwrap_or(GridSpec {
            extent: (4.0 * v.support_radius()).max(20.0),
            points: 400,
        });
        let family = KernelFamily::Generic1d { potential: v.clone() };
        match lap_sweep(&family, &opts.evidence_weights, &path, Complex64::new(z0, 0.0), &spec, tol) {
            Ok(sweep) => report.evidence = Some(sweep),
            Err(e) => report.evidence_error = Some(e.to_string()),
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundState {
    pub kappa: f64,
    pub energy: f64,
    pub wronskian_abs: f64,
}

/// Zeros of `κ ↦ w(iκ)` in `[κmin, κmax]`, each with `|w| ≤ tol_w`.
pub fn bound_states(v: &Potential, kappa_range: (f64, f64), tol: &Tolerance) -> Result<Vec<BoundState>, ResolventError> {
    let (lo, hi) = kappa_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(ResolventError::InvalidArgument("kappa range must satisfy 0 < kmin < kmax"));
    }
    let w_of = |kappa: f64| -> Complex64 {
        SpectralPoint::new(Complex64::new(0.0, kappa))
            .and_then(|sp| crate::jost::wronskian(v, &sp, tol))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let search = Tolerance { abs: tol_w(Complex64::new(0.0, lo)), ..*tol };
    let roots = find_zeros(w_of, kappa_range, &search)?;
    Ok(roots
        .into_iter()
        .filter_map(|kappa| {
            let w = w_of(kappa).norm();
            (w <= tol_w(Complex64::new(0.0, kappa))).then_some(BoundState { kappa, energy: -kappa * kappa, wronskian_abs: w })
        })
        .collect())
}

/// Zeros of `w` in a rectangle of the `ζ`-plane inside `Im ζ ≥ 0`; each gives an
/// eigenvalue `ζ²` (or a virtual level on the real axis).
pub fn complex_eigenvalues(v: &Potential, rect: Rect, tol: &Tolerance) -> Result<Vec<Complex64>, ResolventError> {
    if rect.im.0 < 0.0 {
        return Err(ResolventError::InvalidArgument("rectangle must lie in the closed upper half-plane"));
    }
    let w_of = |zeta: Complex64| -> Complex64 {
        SpectralPoint::new(zeta)
            .and_then(|sp| crate::jost::wronskian(v, &sp, tol))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let search = Tolerance { abs: tol_w(rect.center()), ..*tol };
    Ok(find_complex_zeros(w_of, rect, &search)?)
}
