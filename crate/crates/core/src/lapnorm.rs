//! Discretised weighted operator norms of resolvent kernels and sweeps of the
//! spectral parameter towards a threshold.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jost::SpectralPoint;
use crate::numerics::{top_singular_value, Grid, NumericsError, Tolerance};
use crate::resolvent::{KernelFamily, KernelHandle, ResolventError};

#[derive(Debug, Error)]
pub enum LapError {
    #[error("norm changes from {coarse} to {fine} between resolutions; grid too coarse")]
    GridTooCoarse { fine: f64, coarse: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    /// `L²_s → L²_{-s'}`: `s` weights the input, `s'` the output.
    #[serde(rename = "L2s_to_L2ms")]
    L2sToL2ms,
    /// `L¹ → L²_{-s}`.
    #[serde(rename = "L1_to_L2ms")]
    L1ToL2ms,
    /// `L²_s → L∞`.
    #[serde(rename = "L2s_to_Linf")]
    L2sToLinf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub s: f64,
    pub sprime: f64,
    pub space_tag: SpaceTag,
}

impl WeightPair {
    pub fn l2(s: f64, sprime: f64) -> Self {
        Self { s, sprime, space_tag: SpaceTag::L2sToL2ms }
    }

    pub fn validate(&self) -> Result<(), LapError> {
        if !(self.s >= 0.0 && self.sprime >= 0.0) || !self.s.is_finite() || !self.sprime.is_finite() {
            return Err(LapError::InvalidArgument("weights must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// `[-L, L]` with a trapezoid rule, or `(0, L]` with a midpoint rule for radial families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub extent: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn grid(&self, radial: bool) -> Result<Grid, NumericsError> {
        if radial {
            Grid::midpoint(0.0, self.extent, self.points)
        } else {
            Grid::trapezoid(-self.extent, self.extent, self.points)
        }
    }
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Norm of the discretised operator for an already assembled kernel matrix.
pub fn matrix_norm(
    m: &DMatrix<Complex64>,
    nodes: &[f64],
    measure: &[f64],
    w: &WeightPair,
    tol: &Tolerance,
) -> Result<f64, LapError> {
    let n = nodes.len();
    if m.nrows() != n || m.ncols() != n || measure.len() != n {
        return Err(LapError::InvalidArgument("matrix and grid sizes differ"));
    }
    let col = |s: f64| -> Vec<f64> { (0..n).map(|k| measure[k] * bracket(nodes[k]).powf(-2.0 * s)).collect() };
    Ok(match w.space_tag {
        SpaceTag::L2sToL2ms => {
            let out: Vec<f64> = (0..n).map(|k| measure[k].sqrt() * bracket(nodes[k]).powf(-w.sprime)).collect();
            let inp: Vec<f64> = (0..n).map(|k| measure[k].sqrt() * bracket(nodes[k]).powf(-w.s)).collect();
            let a = DMatrix::from_fn(n, n, |p, q| m[(p, q)] * (out[p] * inp[q]));
            top_singular_value(&a, tol)?
        }
        SpaceTag::L1ToL2ms => {
            let d = col(w.s);
            (0..n).map(|q| (0..n).map(|p| d[p] * m[(p, q)].norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max)
        }
        SpaceTag::L2sToLinf => {
            let d = col(w.s);
            (0..n).map(|p| (0..n).map(|q| d[q] * m[(p, q)].norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max)
        }
    })
}

fn grid_measure(k: &KernelHandle, grid: &Grid) -> Vec<f64> {
    grid.nodes().iter().zip(grid.weights()).map(|(&x, &d)| d * k.measure(x)).collect()
}

/// Weighted norm of `K` on one grid, without extrapolation.
pub fn discrete_norm(k: &KernelHandle, w: &WeightPair, grid: &Grid, tol: &Tolerance) -> Result<f64, LapError> {
    w.validate()?;
    let m = k.matrix(grid.nodes(), grid.nodes())?;
    matrix_norm(&m, grid.nodes(), &grid_measure(k, grid), w, tol)
}

/// Fine-grid norm with its half-resolution companion and the Richardson value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub coarse: f64,
    pub refined: f64,
    pub resolution: usize,
}

pub fn weighted_norm(k: &KernelHandle, w: &WeightPair, grid: &Grid, tol: &Tolerance) -> Result<NormEstimate, LapError> {
    let fine = discrete_norm(k, w, grid, tol)?;
    let coarse = discrete_norm(k, w, &grid.coarsen()?, tol)?;
    if (fine - coarse).abs() > 0.1 * fine.abs() {
        return Err(LapError::GridTooCoarse { fine, coarse });
    }
    Ok(NormEstimate { norm: fine, coarse, refined: fine + (fine - coarse) / 3.0, resolution: grid.len() })
}

/// `max |K(xᵢ, xⱼ)|` over the grid, the `L¹ → L∞` surrogate.
pub fn kernel_sup(k: &KernelHandle, grid: &Grid) -> Result<f64, LapError> {
    let m = k.matrix(grid.nodes(), grid.nodes())?;
    Ok(m.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DivergenceLaw {
    /// `norm ~ |z - z₀|^exponent`.
    Power { exponent: f64 },
    /// `norm ~ rate·ln(1/|z - z₀|)`.
    Log { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SweepClass {
    UniformlyBounded,
    Diverging { fit: DivergenceLaw },
}

#[derive(Debug, Clone, Serialize)]
pub struct NormSweep {
    pub path: Vec<SpectralPoint>,
    pub z0: Complex64,
    pub norms: Vec<f64>,
    pub refined_norms: Vec<f64>,
    pub grid_resolutions: Vec<usize>,
    /// Least-squares slope of `ln norm` against `ln |z - z₀|` over the last three points.
    pub tail_slope: f64,
    /// `(max - min)/max` of the last three norms.
    pub tail_variation: f64,
    pub classification: SweepClass,
}

impl NormSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_z,im_z,norm,resolution,refined_norm\n");
        for k in 0..self.path.len() {
            let z = self.path[k].z;
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{},{:.17e}\n",
                z.re, z.im, self.norms[k], self.grid_resolutions[k], self.refined_norms[k]
            ));
        }
        out
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Bounded if the last three norms vary by less than 20% and their log-log
/// slope against `|z - z₀|` exceeds `-0.1`.
pub fn classify(distances: &[f64], norms: &[f64]) -> (SweepClass, f64, f64) {
    let k = norms.len().min(3);
    if k < 2 {
        return (SweepClass::UniformlyBounded, 0.0, 0.0);
    }
    let d = &distances[distances.len() - k..];
    let v = &norms[norms.len() - k..];
    let lx: Vec<f64> = d.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let s = slope(&lx, &ly);
    let max = v.iter().copied().fold(f64::MIN, f64::max);
    let min = v.iter().copied().fold(f64::MAX, f64::min);
    let variation = (max - min) / max;
    let class = if variation < 0.2 && s > -0.1 {
        SweepClass::UniformlyBounded
    } else if s <= -0.1 {
        SweepClass::Diverging { fit: DivergenceLaw::Power { exponent: s } }
    } else {
        let inv: Vec<f64> = lx.iter().map(|x| -x).collect();
        SweepClass::Diverging { fit: DivergenceLaw::Log { rate: slope(&inv, v) } }
    };
    (class, s, variation)
}

/// Weighted norms along `path`, computed in parallel and reported in path order.
pub fn lap_sweep(
    family: &KernelFamily,
    w: &WeightPair,
    path: &[SpectralPoint],
    z0: Complex64,
    spec: &GridSpec,
    tol: &Tolerance,
) -> Result<NormSweep, LapError> {
    if path.is_empty() {
        return Err(LapError::InvalidArgument("empty path"));
    }
    let grid = spec.grid(family.is_radial())?;
    let estimates: Vec<NormEstimate> = path
        .par_iter()
        .map(|sp| {
            let k = KernelHandle::new(family.clone(), sp, tol)?;
            weighted_norm(&k, w, &grid, tol)
        })
        .collect::<Result<_, _>>()?;
    let distances: Vec<f64> = path.iter().map(|sp| (sp.z - z0).norm()).collect();
    let norms: Vec<f64> = estimates.iter().map(|e| e.norm).collect();
    let (classification, tail_slope, tail_variation) = classify(&distances, &norms);
    Ok(NormSweep {
        path: path.to_vec(),
        z0,
        refined_norms: estimates.iter().map(|e| e.refined).collect(),
        grid_resolutions: estimates.iter().map(|e| e.resolution).collect(),
        norms,
        tail_slope,
        tail_variation,
        classification,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// `‖K(zₖ) - K(z_last)‖` for every path point before the last.
    pub differences: Vec<f64>,
    pub final_difference: f64,
    /// Differences never grow by more than `1e-9` relative.
    pub monotone: bool,
}

/// Weighted distance of each kernel along the path to the last one.
pub fn convergence_check(
    family: &KernelFamily,
    w: &WeightPair,
    path: &[SpectralPoint],
    spec: &GridSpec,
    tol: &Tolerance,
) -> Result<ConvergenceReport, LapError> {
    if path.len() < 2 {
        return Err(LapError::InvalidArgument("path needs at least two points"));
    }
    w.validate()?;
    let grid = spec.grid(family.is_radial())?;
    let nodes = grid.nodes();
    let handles: Vec<KernelHandle> =
        path.par_iter().map(|sp| KernelHandle::new(family.clone(), sp, tol)).collect::<Result<_, _>>()?;
    let measure = grid_measure(&handles[0], &grid);
    let matrices: Vec<DMatrix<Complex64>> =
        handles.par_iter().map(|k| k.matrix(nodes, nodes)).collect::<Result<_, _>>()?;
    let last = matrices.last().unwrap();
    let differences: Vec<f64> = matrices[..matrices.len() - 1]
        .par_iter()
        .map(|m| {
            let d = m - last;
            if d.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                Ok(0.0)
            } else {
                matrix_norm(&d, nodes, &measure, w, tol)
            }
        })
        .collect::<Result<_, _>>()?;
    let monotone = differences.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-9));
    Ok(ConvergenceReport { final_difference: *differences.last().unwrap(), differences, monotone })
}
