//! Dormand–Prince 5(4) integrator for complex first-order systems.

use num_complex::Complex64;

use super::{NumericsError, Tolerance};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Solution samples at the requested output times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<Complex64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &[Complex64] {
        self.y.last().expect("trajectory has at least the initial state")
    }
}

/// Integrate `y' = rhs(t, y)` from `span.0` to `span.1` (either direction).
///
/// The state is reported at every time in `outputs` (which must lie inside the
/// span, ordered in the direction of integration) and at the final time. The
/// stepper lands on each output time exactly, so no interpolation error enters.
pub fn solve_ivp<F>(
    rhs: F,
    y0: &[Complex64],
    span: (f64, f64),
    outputs: &[f64],
    tol: &Tolerance,
) -> Result<Trajectory, NumericsError>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let (t0, t1) = span;
    let dim = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let length = (t1 - t0).abs();
    let mut stops: Vec<f64> = outputs
        .iter()
        .copied()
        .filter(|&t| (t - t0) * dir > 0.0 && (t1 - t) * dir >= 0.0)
        .collect();
    stops.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    stops.dedup();
    if stops.last().is_none_or(|&t| t != t1) {
        stops.push(t1);
    }

    let mut traj = Trajectory { t: vec![t0], y: vec![y0.to_vec()], accepted_steps: 0, rejected_steps: 0 };
    if length == 0.0 {
        return Ok(traj);
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
    rhs(t, &y, &mut k[0]);
    let mut h = initial_step(&y, &k[0], length, tol) * dir;
    let floor = 1e-13 * length.max(1.0);
    let mut next_stop = 0usize;
    let mut iterations = 0usize;

    while next_stop < stops.len() {
        iterations += 1;
        if iterations > tol.max_iter.max(1000) * 100 {
            return Err(NumericsError::NonConvergence { what: "ode integration", iterations, residual: h.abs() });
        }
        let target = stops[next_stop];
        let mut landing = false;
        let h_free = h;
        if (t + h - target) * dir >= 0.0 {
            h = target - t;
            landing = true;
        }
        if h.abs() < floor && !landing {
            return Err(NumericsError::StepUnderflow { t, step: h.abs() });
        }

        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        acc += kj[i] * (h * A[s][j]);
                    }
                }
                tmp[i] = acc;
            }
            rhs(t + C[s] * h, &tmp, &mut k[s]);
        }
        // stage 7 is evaluated at the 5th-order solution (FSAL)
        let y_new: Vec<Complex64> = (0..dim)
            .map(|i| y[i] + (0..6).map(|j| k[j][i] * (h * B5[j])).sum::<Complex64>())
            .collect();
        let mut err = 0.0f64;
        for i in 0..dim {
            let e: Complex64 = (0..7).map(|j| k[j][i] * (h * (B5[j] - B4[j]))).sum();
            let scale = tol.abs + tol.rel * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            return Err(NumericsError::NonFinite { at: t });
        }

        if err <= 1.0 {
            t = if landing { target } else { t + h };
            y = y_new;
            k.swap(0, 6);
            traj.accepted_steps += 1;
            if landing {
                traj.t.push(t);
                traj.y.push(y.clone());
                next_stop += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // a landing step was clipped; grow from the unclipped proposal instead
            h = if landing { h_free.abs().max((h * factor).abs()) * dir } else { h * factor };
        } else {
            traj.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < floor {
                return Err(NumericsError::StepUnderflow { t, step: h.abs() });
            }
        }
    }
    Ok(traj)
}

fn initial_step(y: &[Complex64], f: &[Complex64], length: f64, tol: &Tolerance) -> f64 {
    let ynorm = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let fnorm = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = tol.abs + tol.rel * ynorm;
    let h = if fnorm > 0.0 { 0.01 * (scale / fnorm).powf(0.2) * (ynorm.max(1.0) / fnorm).powf(0.8) } else { 0.01 * length };
    h.clamp(1e-6 * length, 0.1 * length)
}
