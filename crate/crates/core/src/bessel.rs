//! Bessel functions of order zero and one for complex argument.
//!
//! Ascending series for `|z| ≤ 12`, Hankel asymptotic expansions beyond. The
//! asymptotic series is summed up to its smallest term, which keeps the
//! relative error near `1e-11` already at `|z| = 12`. Inside the series disk
//! with `Im z > 3` the Hankel functions come from their integral
//! representation, since `J + iY` cancels there.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SERIES_RADIUS: f64 = 12.0;
const HANKEL_INTEGRAL_IM: f64 = 3.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BesselError {
    #[error("argument {0} is zero or on the branch cut (-∞, 0]")]
    DomainError(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Series,
    Asymptotic,
}

/// `J₀, Y₀, H₀⁽¹⁾` and derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselValue {
    pub j0: Complex64,
    pub y0: Complex64,
    pub h1_0: Complex64,
    pub dj0: Complex64,
    pub dy0: Complex64,
    /// `H₁⁽¹⁾`, kept separately since `J₁ + iY₁` cancels when `Im z` is large.
    pub h1_1: Complex64,
    pub arg: Complex64,
    pub regime: Regime,
}

impl BesselValue {
    /// `d/dz H₀⁽¹⁾ = -H₁⁽¹⁾`.
    pub fn dh1_0(&self) -> Complex64 {
        -self.h1_1
    }
}

/// `J₁, Y₁, H₁⁽¹⁾` at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselValue1 {
    pub j1: Complex64,
    pub y1: Complex64,
    pub h1_1: Complex64,
    pub arg: Complex64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy)]
struct Orders {
    j0: Complex64,
    j1: Complex64,
    y0: Complex64,
    y1: Complex64,
    h0: Complex64,
    h1: Complex64,
    regime: Regime,
}

fn check_domain(z: Complex64) -> Result<(), BesselError> {
    if !z.is_finite() || z.norm() == 0.0 || (z.im == 0.0 && z.re < 0.0) {
        return Err(BesselError::DomainError(z));
    }
    Ok(())
}

fn series(z: Complex64) -> Orders {
    let one = Complex64::new(1.0, 0.0);
    let q = -(z * z) / 4.0;
    let half = z / 2.0;
    let log_term = half.ln() + EULER_GAMMA;

    let mut t0 = one; // q^k/(k!)^2
    let mut t1 = one; // q^k/(k!(k+1)!)
    let mut j0 = one;
    let mut j1s = one;
    let mut y0s = Complex64::new(0.0, 0.0);
    let mut y1s = one; // (H_0 + H_1) = 1 at k = 0
    let mut harmonic = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        j0 += t0;
        j1s += t1;
        // (-1)^{k+1} H_k (z²/4)^k/(k!)² = -H_k q^k/(k!)²
        y0s -= t0 * harmonic;
        y1s += t1 * (2.0 * harmonic + 1.0 / (kf + 1.0));
        let mag = t0.norm().max(t1.norm()) * (harmonic + 1.0);
        if kf > z.norm() && mag < 1e-17 * (j0.norm().max(j1s.norm()).max(y0s.norm())).max(1e-300) {
            break;
        }
    }
    let j1 = half * j1s;
    let y0 = (2.0 / PI) * (log_term * j0 + y0s);
    let y1 = -2.0 / (PI * z) + (2.0 / PI) * log_term * j1 - half * y1s / PI;
    let i = Complex64::new(0.0, 1.0);
    Orders { j0, j1, y0, y1, h0: j0 + i * y0, h1: j1 + i * y1, regime: Regime::Series }
}

/// `Σ_k i^k a_k(ν) z^{-k}` (and the same with `(-i)^k`) truncated at the smallest term.
fn hankel_sums(nu: f64, z: Complex64) -> (Complex64, Complex64) {
    let mu = 4.0 * nu * nu;
    let i = Complex64::new(0.0, 1.0);
    let inv = 1.0 / z;
    let mut u = Complex64::new(1.0, 0.0);
    let mut plus = u;
    let mut minus = u;
    let mut ipow = Complex64::new(1.0, 0.0);
    let mut prev = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = u * ((mu - odd * odd) / (kf * 8.0)) * inv;
        if next.norm() >= prev || next.norm() < 1e-18 {
            if next.norm() < 1e-18 {
                ipow *= i;
                plus += ipow * next;
                minus += ipow.conj() * next;
            }
            break;
        }
        u = next;
        prev = u.norm();
        ipow *= i;
        plus += ipow * u;
        minus += ipow.conj() * u;
    }
    (plus, minus)
}

fn asymptotic(z: Complex64) -> Orders {
    let i = Complex64::new(0.0, 1.0);
    let pref = (2.0 / (PI * z)).sqrt();
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (n, nu) in [0.0, 1.0].into_iter().enumerate() {
        let chi = z - nu * FRAC_PI_2 - FRAC_PI_4;
        let (sp, sm) = hankel_sums(nu, z);
        let h1 = pref * (i * chi).exp() * sp;
        let h2 = pref * (-i * chi).exp() * sm;
        out[2 * n] = h1;
        out[2 * n + 1] = h2;
    }
    let [h10, h20, h11, h21] = out;
    Orders {
        j0: 0.5 * (h10 + h20),
        y0: (h10 - h20) / (2.0 * i),
        j1: 0.5 * (h11 + h21),
        y1: (h11 - h21) / (2.0 * i),
        h0: h10,
        h1: h11,
        regime: Regime::Asymptotic,
    }
}

fn orders(z: Complex64) -> Result<Orders, BesselError> {
    check_domain(z)?;
    if z.norm() > SERIES_RADIUS {
        return Ok(asymptotic(z));
    }
    let mut o = series(z);
    // J + iY loses e^{2 Im z} ulps
    if z.im > HANKEL_INTEGRAL_IM {
        (o.h0, o.h1) = hankel_integral(z);
    }
    Ok(o)
}

/// `H_ν⁽¹⁾(z) = (2/iπ) e^{-iνπ/2} ∫₀^∞ e^{iz cosh t} cosh νt dt` for `ν = 0, 1`, `Im z > 0`.
///
/// Trapezoid rule on the even, analytic integrand, halving the step until two
/// levels agree.
fn hankel_integral(z: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let sums = |h: f64| {
        let (mut s0, mut s1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 0.. {
            let t = k as f64 * h;
            let ch = t.cosh();
            let w = if k == 0 { 0.5 } else { 1.0 };
            let e = (i * z * ch).exp() * w;
            s0 += e;
            s1 += e * ch;
            if z.im * (ch - 1.0) - t > 42.0 {
                break;
            }
        }
        (s0 * h, s1 * h)
    };
    let mut h = 0.1;
    let mut prev = sums(h);
    for _ in 0..8 {
        h /= 2.0;
        let next = sums(h);
        let done = (next.0 - prev.0).norm() <= 1e-14 * next.0.norm() && (next.1 - prev.1).norm() <= 1e-14 * next.1.norm();
        prev = next;
        if done {
            break;
        }
    }
    let c = 2.0 / (i * PI);
    (c * prev.0, -i * c * prev.1)
}

/// Order-zero functions and their derivatives `J₀' = -J₁`, `Y₀' = -Y₁`.
pub fn bessel0(z: Complex64) -> Result<BesselValue, BesselError> {
    let o = orders(z)?;
    Ok(BesselValue { j0: o.j0, y0: o.y0, h1_0: o.h0, dj0: -o.j1, dy0: -o.y1, h1_1: o.h1, arg: z, regime: o.regime })
}

pub fn bessel1(z: Complex64) -> Result<BesselValue1, BesselError> {
    let o = orders(z)?;
    Ok(BesselValue1 { j1: o.j1, y1: o.y1, h1_1: o.h1, arg: z, regime: o.regime })
}

/// Both orders from one evaluation.
pub fn bessel01(z: Complex64) -> Result<(BesselValue, BesselValue1), BesselError> {
    let o = orders(z)?;
    Ok((
        BesselValue { j0: o.j0, y0: o.y0, h1_0: o.h0, dj0: -o.j1, dy0: -o.y1, h1_1: o.h1, arg: z, regime: o.regime },
        BesselValue1 { j1: o.j1, y1: o.y1, h1_1: o.h1, arg: z, regime: o.regime },
    ))
}

/// `J₀` alone, entire; `J₀(0) = 1`.
pub fn j0(z: Complex64) -> Complex64 {
    if z.norm() == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if z.norm() <= SERIES_RADIUS {
        series_j0(z)
    } else {
        // J₀ is even, so the cut never matters here
        let w = if z.re < 0.0 { -z } else { z };
        asymptotic(w).j0
    }
}

/// `J₁`, odd and entire.
pub fn j1(z: Complex64) -> Complex64 {
    if z.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.norm() <= SERIES_RADIUS {
        series(z).j1
    } else if z.re < 0.0 {
        -asymptotic(-z).j1
    } else {
        asymptotic(z).j1
    }
}

fn series_j0(z: Complex64) -> Complex64 {
    let q = -(z * z) / 4.0;
    let mut t = Complex64::new(1.0, 0.0);
    let mut s = t;
    for k in 1..200 {
        let kf = k as f64;
        t *= q / (kf * kf);
        s += t;
        if kf > z.norm() && t.norm() < 1e-17 * s.norm().max(1e-300) {
            break;
        }
    }
    s
}

/// `W(J₀, H₀⁽¹⁾)(z) - 2i/(πz)`.
pub fn hankel_wronskian_check(z: Complex64) -> Result<Complex64, BesselError> {
    let b = bessel0(z)?;
    let w = b.j0 * b.dh1_0() - b.dj0 * b.h1_0;
    Ok(w - Complex64::new(0.0, 2.0) / (PI * z))
}

/// `W(J₀, Y₀)(z) - 2/(πz)`.
pub fn wronskian_check(z: Complex64) -> Result<Complex64, BesselError> {
    let b = bessel0(z)?;
    Ok(b.j0 * b.dy0 - b.dj0 * b.y0 - 2.0 / (PI * z))
}
