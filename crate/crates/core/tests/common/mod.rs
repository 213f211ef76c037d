//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's solvers: the transfer-matrix
//! propagation, the barrier closed form, the Bessel series and the SVD rank
//! are all written from scratch so that agreement means something.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;
use thresholdscope::potentials::Potential;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub const I: C = C::new(0.0, 1.0);

/// Values computed with mpmath at 30 digits.
pub mod frozen {
    pub const J0_1: f64 = 0.765_197_686_557_966_551_45;
    pub const Y0_1: f64 = 0.088_256_964_215_676_957_983;
    pub const J0_2_1: (f64, f64) = (0.187_853_728_082_461_716_19, -0.646_169_435_153_980_716_38);
    pub const Y0_2_1: (f64, f64) = (0.800_451_120_409_993_979_17, 0.075_638_550_286_393_791_814);
    pub const J0_005: f64 = 0.999_375_097_649_468_580_81;
    pub const Y0_005: f64 = -1.979_311_000_817_209_636_6;
    pub const H0_10_2: (f64, f64) = (-0.031_997_036_504_322_113_74, 0.010_625_441_593_043_097_847);
    pub const J0_20: f64 = 0.167_024_664_340_583_154_73;
    pub const Y0_20: f64 = 0.062_640_596_809_383_831_162;
    pub const H0_2_8: (f64, f64) = (7.843_784_842_788_294_906_4e-5, 4.791_658_797_722_377_035_9e-5);
    pub const H1_2_8: (f64, f64) = (5.175_965_537_397_917_319_1e-5, -8.226_694_296_325_320_550_3e-5);
    pub const H0_05_3: (f64, f64) = (0.011_997_488_084_259_248_712, -0.018_419_389_900_540_003_053);

    /// `(ζ, g, Z, a, b, A, B)` for the disk matching coefficients.
    pub const DISK: [((f64, f64), f64, [(f64, f64); 5]); 3] = [
        (
            (0.3, 0.2),
            0.5,
            [
                (0.088_671_418_415_971_874_153, 0.676_655_466_573_573_443_07),
                (1.419_960_949_540_977_580_4, -0.169_237_537_419_596_435_14),
                (0.412_385_494_024_530_777_92, -0.012_376_980_567_861_430_566),
                (1.779_520_219_708_736_682_6, 0.143_107_198_539_058_708_61),
                (-0.243_147_956_604_934_342_78, 1.432_337_930_108_839_011),
            ],
        ),
        (
            (0.0, 0.05),
            0.01,
            [
                (0.0, 0.111_803_398_874_989_486_99),
                (1.018_091_425_101_591_022_2, -0.007_868_719_615_332_118_983_3),
                (0.007_868_719_615_332_118_983_3, 0.0),
                (1.018_091_425_101_591_022_2, -0.479_163_789_057_010_550_57),
                (0.0, 1.018_091_425_101_591_022_2),
            ],
        ),
        (
            (1.5, 0.1),
            1.0,
            [
                (1.121_555_677_330_680_93, 0.133_742_802_993_964_796_14),
                (1.007_836_451_455_476_894_2, -0.027_505_807_102_147_958_505),
                (0.506_564_857_508_377_117_09, -0.037_388_250_153_112_272_181),
                (0.889_241_767_177_197_780_8, 0.334_200_744_673_239_264_45),
                (-0.479_059_050_406_229_158_58, 1.045_224_701_608_589_166_3),
            ],
        ),
    ];

    /// `√g I₁(√g)`.
    pub const GAMMA: [(f64, f64); 3] = [
        (0.01, 0.005_006_252_604_709_269_315_7),
        (0.5, 0.265_953_932_956_676_381_19),
        (0.04, 0.020_100_166_805_625_023_574),
    ];

    /// `∫₀¹ ⟨x⟩ dx`.
    pub const MOMENT_UNIT: f64 = 1.147_793_574_696_319_037;

    /// Even ground state `κ` of the well `-g𝟙_{[-1,1]}`: `√(g-κ²) tan √(g-κ²) = κ`.
    pub const SHALLOW_KAPPA: [(f64, f64); 5] = [
        (0.1, 0.094_032_648_963_967_161_534),
        (0.03, 0.029_420_697_401_409_891_997),
        (0.01, 0.009_934_121_836_655_334_052_2),
        (0.003, 0.002_994_021_505_828_492_463_7),
        (0.001, 0.000_999_334_132_166_966_762_24),
    ];

    /// `2|ζ| - 2(2+√2) M e^{2√2 M/⟨ζ⟩}` at `M = 1`, `ζ = 100`.
    pub const LOWER_BOUND_M1_Z100: f64 = 192.975_688_417_815_152_39;
}

/// Contiguous piecewise-constant potential described by its break points.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant {
    pub breaks: Vec<f64>,
    pub values: Vec<C>,
}

fn bracket_antiderivative(x: f64) -> f64 {
    0.5 * (x * (1.0 + x * x).sqrt() + x.asinh())
}

impl PiecewiseConstant {
    /// Up to four pieces inside `[-2, 2]`, rescaled to first moment `≤ max_moment`.
    pub fn random<R: Rng>(rng: &mut R, max_moment: f64) -> Self {
        let pieces = rng.gen_range(1..=4);
        let mut breaks: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-2.0..2.0)).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        if breaks.len() < 2 {
            breaks = vec![-1.0, 1.0];
        }
        let values: Vec<C> = (0..breaks.len() - 1).map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
        let mut pc = Self { breaks, values };
        let m = pc.moment();
        let target = rng.gen_range(0.05..1.0) * max_moment;
        if m > 0.0 {
            for v in &mut pc.values {
                *v *= target / m;
            }
        }
        pc
    }

    pub fn potential(&self) -> Potential {
        Potential::piecewise_constant(&self.breaks, &self.values).expect("valid pieces")
    }

    /// `∫⟨x⟩|V|` in closed form.
    pub fn moment(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm() * (bracket_antiderivative(self.breaks[k + 1]) - bracket_antiderivative(self.breaks[k])))
            .sum()
    }

    pub fn left(&self) -> f64 {
        self.breaks[0]
    }

    pub fn right(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    fn value_at(&self, x: f64) -> C {
        for k in 0..self.values.len() {
            if x >= self.breaks[k] && x < self.breaks[k + 1] {
                return self.values[k];
            }
        }
        c(0.0, 0.0)
    }

    /// Pieces between `from` and `to` (either order), including zero stretches.
    fn cuts(&self, from: f64, to: f64) -> Vec<f64> {
        let (lo, hi) = if from < to { (from, to) } else { (to, from) };
        let mut pts = vec![lo, hi];
        pts.extend(self.breaks.iter().copied().filter(|&b| b > lo && b < hi));
        pts.sort_by(f64::total_cmp);
        if from > to {
            pts.reverse();
        }
        pts
    }

    /// Propagate `(ψ, ψ')` from `from` to `to` with exact exponentials on each piece.
    pub fn propagate(&self, zeta: C, from: f64, to: f64, mut state: (C, C)) -> (C, C) {
        let pts = self.cuts(from, to);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let v = self.value_at(0.5 * (a + b));
            state = step(zeta * zeta - v, b - a, state);
        }
        state
    }

    pub fn theta_plus(&self, zeta: C, x: f64) -> (C, C) {
        let r = self.right().max(x);
        let e = (I * zeta * r).exp();
        self.propagate(zeta, r, x, (e, I * zeta * e))
    }

    pub fn theta_minus(&self, zeta: C, x: f64) -> (C, C) {
        let l = self.left().min(x);
        let e = (-I * zeta * l).exp();
        self.propagate(zeta, l, x, (e, -I * zeta * e))
    }

    pub fn wronskian(&self, zeta: C) -> C {
        let (p, dp) = self.theta_plus(zeta, 0.0);
        let (m, dm) = self.theta_minus(zeta, 0.0);
        p * dm - dp * m
    }
}

/// `ψ'' = -k² ψ` over a signed distance `h`; entire in `k²`.
fn step(k2: C, h: f64, (psi, dpsi): (C, C)) -> (C, C) {
    let k = k2.sqrt();
    let kh = k * h;
    let (cos, sinc) = if kh.norm() < 1e-4 {
        let t = kh * kh;
        (1.0 - t / 2.0 + t * t / 24.0, 1.0 - t / 6.0 + t * t / 120.0)
    } else {
        (kh.cos(), kh.sin() / kh)
    };
    let s_over_k = sinc * h;
    (cos * psi + s_over_k * dpsi, -k2 * s_over_k * psi + cos * dpsi)
}

/// `(i/2Z)[e^{2i(ζ+Z)}(Z-ζ)² - e^{2i(ζ-Z)}(Z+ζ)²]`, `Z = √(ζ²-g)`.
pub fn barrier_wronskian_formula(zeta: C, g: f64) -> C {
    let mut z = (zeta * zeta - g).sqrt();
    if z.im < 0.0 {
        z = -z;
    }
    // the expression is even in Z, so the branch only matters for round-off
    I / (2.0 * z) * ((2.0 * I * (zeta + z)).exp() * (z - zeta).powi(2) - (2.0 * I * (zeta - z)).exp() * (z + zeta).powi(2))
}

/// `Σ (-z²/4)^k / (k!)²`, summed until terms stop mattering.
pub fn j0_series(z: C) -> C {
    let q = -z * z / 4.0;
    let mut term = c(1.0, 0.0);
    let mut sum = term;
    for k in 1..400 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() && k as f64 > z.norm() {
            break;
        }
    }
    sum
}

/// Singular values below `rel · σ_max` (all of them for the zero matrix).
pub fn svd_nullity(m: &DMatrix<C>, rel: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        sv.len()
    } else {
        sv.iter().filter(|&&s| s <= rel * top).count()
    }
}

/// Random complex matrix of rank exactly `n - nullity` (almost surely).
pub fn matrix_with_nullity<R: Rng>(rng: &mut R, n: usize, nullity: usize) -> DMatrix<C> {
    let k = n - nullity;
    let a = DMatrix::<C>::from_fn(n, k, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let b = DMatrix::<C>::from_fn(k, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    a * b
}

/// `ζ = r e^{iα}` on a polar grid of the closed quarter-disk of radius `rmax`.
pub fn quarter_disk_grid(rmax: f64, n: usize) -> Vec<C> {
    let mut out = Vec::new();
    for a in 0..n {
        let alpha = std::f64::consts::FRAC_PI_2 * a as f64 / (n - 1) as f64;
        for k in 0..n {
            let r = rmax * k as f64 / (n - 1) as f64;
            let z = C::from_polar(r, alpha);
            // cos(π/2) is not exactly zero
            let z = c(if a == n - 1 { 0.0 } else { z.re }, z.im.max(0.0));
            if !out.iter().any(|w: &C| (w - z).norm() < 1e-12) {
                out.push(z);
            }
        }
    }
    out
}
