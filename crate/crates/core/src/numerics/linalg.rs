//! Largest singular value by power iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{NumericsError, Tolerance};

fn start_vector(n: usize) -> DVector<Complex64> {
    // fixed, non-symmetric start so no singular direction is missed systematically
    let v = DVector::from_fn(n, |i, _| {
        let t = i as f64 + 1.0;
        Complex64::new(1.0 + 0.37 * (1.3 * t).sin(), 0.21 * (0.7 * t).cos())
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// `‖M‖₂` via power iteration on `MᴴM`.
///
/// Stops when the estimate changes by less than `tol.rel` (relative) between
/// sweeps; the estimate `‖Mv‖` for a unit `v` is always a lower bound.
pub fn top_singular_value(m: &DMatrix<Complex64>, tol: &Tolerance) -> Result<f64, NumericsError> {
    if m.is_empty() {
        return Err(NumericsError::InvalidMatrix);
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::InvalidMatrix);
    }
    let mut v = start_vector(m.ncols());
    let mut sigma = 0.0f64;
    let limit = tol.max_iter.max(1) * 20;
    for it in 0..limit {
        let w = m * &v;
        let next = w.norm();
        if next == 0.0 {
            if it == 0 {
                // start vector might lie in the kernel; try the column with largest norm
                let (j, cn) = (0..m.ncols()).map(|j| (j, m.column(j).norm())).fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
                if cn == 0.0 {
                    return Ok(0.0);
                }
                v = DVector::from_fn(m.ncols(), |i, _| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
                continue;
            }
            return Ok(0.0);
        }
        let u = m.ad_mul(&w);
        let un = u.norm();
        if un == 0.0 {
            return Ok(next);
        }
        v = u / Complex64::new(un, 0.0);
        // Rayleigh quotient of MᴴM: ‖M v‖² grows monotonically to σ²
        if it > 0 && (next - sigma).abs() <= 0.25 * tol.rel * next {
            return Ok(next.max(sigma));
        }
        sigma = next;
    }
    Err(NumericsError::NonConvergence { what: "power iteration", iterations: limit, residual: sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tight() -> Tolerance {
        Tolerance { rel: 1e-12, abs: 1e-14, max_iter: 5000 }
    }

    #[test]
    fn identity() {
        let m = DMatrix::<Complex64>::identity(3, 3);
        assert!((top_singular_value(&m, &tight()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
        ]));
        assert!((top_singular_value(&m, &tight()).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let m = DMatrix::<Complex64>::zeros(4, 4);
        assert_eq!(top_singular_value(&m, &tight()).unwrap(), 0.0);
    }

    #[test]
    fn start_vector_in_kernel() {
        // rank one, annihilates everything orthogonal to e_2
        let mut m = DMatrix::<Complex64>::zeros(3, 3);
        m[(0, 2)] = Complex64::new(2.0, 0.0);
        assert!((top_singular_value(&m, &tight()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = DMatrix::from_fn(6, 4, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let a = top_singular_value(&m, &tight()).unwrap();
            let b = top_singular_value(&m.adjoint(), &tight()).unwrap();
            assert!((a - b).abs() <= 1e-9 * a);
        }
    }
}
