mod common;

use common::{c, frozen, PiecewiseConstant, I};
use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thresholdscope::bessel::{self, Regime};
use thresholdscope::bifurcation::{
    construct_3d_family, family_jost_function, family_potential_fit, shallow_well_eigenvalue, track_bifurcation, DEFAULT_EPSILONS,
};
use thresholdscope::discrete::{self, Sequence, VirtualStateKind};
use thresholdscope::disk2d;
use thresholdscope::jost::{self, barrier, SpectralPoint};
use thresholdscope::numerics::{Grid, Tolerance};
use thresholdscope::potentials::{first_moment, tail_moments, Potential};
use thresholdscope::resolvent::{self, Classification, KernelFamily, KernelHandle};

fn sp(z: C) -> SpectralPoint {
    SpectralPoint::new(z).unwrap()
}

fn tol() -> Tolerance {
    Tolerance::default()
}

#[test]
fn wronskian_matches_transfer_matrix_on_random_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let pc = PiecewiseConstant::random(&mut rng, 5.0);
        let v = pc.potential();
        for zeta in [c(0.0, 0.0), c(0.4, 0.0), c(1.3, 0.7), c(0.0, 2.0), c(2.5, 0.1)] {
            let w = jost::wronskian(&v, &sp(zeta), &tol()).unwrap();
            let o = pc.wronskian(zeta);
            worst = worst.max((w - o).norm() / o.norm().max(1.0));
        }
    }
    assert!(worst < 1e-9, "worst relative deviation {worst:e}");
}

#[test]
fn jost_solutions_match_transfer_matrix_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pc = PiecewiseConstant::random(&mut rng, 3.0);
    let v = pc.potential();
    let grid = Grid::trapezoid(-4.0, 4.0, 160).unwrap();
    let zeta = c(0.6, 0.3);
    let plus = jost::jost_plus(&v, &sp(zeta), &grid, &tol()).unwrap();
    let minus = jost::jost_minus(&v, &sp(zeta), &grid, &tol()).unwrap();
    for (k, &x) in grid.nodes().iter().enumerate() {
        let (tp, dtp) = pc.theta_plus(zeta, x);
        let (tm, dtm) = pc.theta_minus(zeta, x);
        assert!((plus.theta[k] - tp).norm() <= 1e-9 * tp.norm().max(1.0), "θ₊ at {x}");
        assert!((plus.dtheta[k] - dtp).norm() <= 1e-9 * dtp.norm().max(1.0), "θ₊' at {x}");
        assert!((minus.theta[k] - tm).norm() <= 1e-9 * tm.norm().max(1.0), "θ₋ at {x}");
        assert!((minus.dtheta[k] - dtm).norm() <= 1e-9 * dtm.norm().max(1.0), "θ₋' at {x}");
    }
}

#[test]
fn barrier_jost_solution_at_imaginary_zeta() {
    // g = 1, ζ = i: Z = i√2 inside the barrier
    let pc = PiecewiseConstant { breaks: vec![-1.0, 1.0], values: vec![c(1.0, 0.0)] };
    let grid = Grid::trapezoid(-3.0, 3.0, 60).unwrap();
    let sol = jost::jost_plus(&Potential::barrier(1.0), &sp(I), &grid, &tol()).unwrap();
    for (k, &x) in grid.nodes().iter().enumerate() {
        let (t, _) = pc.theta_plus(I, x);
        assert!((sol.theta[k] - t).norm() < 1e-10 * t.norm().max(1.0));
        let (closed, _) = barrier::theta_plus(I, 1.0, x);
        assert!((closed - t).norm() < 1e-10 * t.norm().max(1.0));
    }
}

#[test]
fn barrier_closed_form_against_formula() {
    for g in [0.01f64, 0.5, 1.0, 4.0] {
        for zeta in common::quarter_disk_grid(3.0, 7) {
            if (zeta - g.sqrt()).norm() < 1e-6 {
                continue;
            }
            let f = common::barrier_wronskian_formula(zeta, g);
            let closed = barrier::wronskian_closed(zeta, g);
            assert!((closed - f).norm() <= 1e-10 * f.norm(), "g={g} ζ={zeta}");
        }
    }
}

#[test]
fn threshold_wronskian_of_barrier_is_sinh() {
    // ζ = 0: θ₊ = cosh(x - 1) on [-1, 1], so w = sinh 2 for g = 1
    let w = jost::wronskian(&Potential::barrier(1.0), &sp(c(0.0, 0.0)), &tol()).unwrap();
    assert!((w.re - 2f64.sinh()).abs() < 1e-12 && w.im.abs() < 1e-12);
    for g in [0.25, 2.0] {
        let w = jost::wronskian(&Potential::barrier(g), &sp(c(0.0, 0.0)), &tol()).unwrap();
        let s = f64::sqrt(g);
        assert!((w.re - s * (2.0 * s).sinh()).abs() < 1e-10 * w.norm());
    }
}

#[test]
fn free_wronskian_is_exact() {
    for zeta in [c(0.0, 0.0), c(1.0, 0.0), c(0.3, 2.0)] {
        let w = jost::wronskian(&Potential::zero(), &sp(zeta), &tol()).unwrap();
        assert_eq!(w, -2.0 * I * zeta);
    }
}

#[test]
fn moments_have_closed_forms() {
    let unit = Potential::constant(0.0, 1.0, c(1.0, 0.0)).unwrap();
    assert!((first_moment(&unit, &tol()).unwrap() - frozen::MOMENT_UNIT).abs() < 1e-12);
    let bar = Potential::barrier(1.0);
    let m = first_moment(&bar, &tol()).unwrap();
    assert!((m - 2.0 * frozen::MOMENT_UNIT).abs() < 1e-12);
    let (p, q) = tail_moments(&bar, 0.0, &tol()).unwrap();
    assert!((p - m / 2.0).abs() < 1e-12 && (q - m / 2.0).abs() < 1e-12);
    let (p1, _) = tail_moments(&unit, 1.0, &tol()).unwrap();
    assert_eq!(p1, 0.0);
    assert_eq!(first_moment(&Potential::zero(), &tol()).unwrap(), 0.0);
}

#[test]
fn lower_bound_example() {
    let b = jost::wronskian_lower_bound(1.0, &sp(c(100.0, 0.0)));
    assert!((b - frozen::LOWER_BOUND_M1_Z100).abs() < 1e-10);
    assert_eq!(jost::wronskian_lower_bound(0.0, &sp(c(3.0, 4.0))), 10.0);
}

#[test]
fn bessel_against_frozen_values() {
    let cases: [(C, C, C); 4] = [
        (c(1.0, 0.0), c(frozen::J0_1, 0.0), c(frozen::Y0_1, 0.0)),
        (c(2.0, 1.0), c(frozen::J0_2_1.0, frozen::J0_2_1.1), c(frozen::Y0_2_1.0, frozen::Y0_2_1.1)),
        (c(0.05, 0.0), c(frozen::J0_005, 0.0), c(frozen::Y0_005, 0.0)),
        (c(20.0, 0.0), c(frozen::J0_20, 0.0), c(frozen::Y0_20, 0.0)),
    ];
    for (z, j, y) in cases {
        let b = bessel::bessel0(z).unwrap();
        assert!((b.j0 - j).norm() <= 1e-10 * j.norm(), "J0({z})");
        assert!((b.y0 - y).norm() <= 1e-10 * y.norm(), "Y0({z})");
        assert_eq!(b.h1_0, b.j0 + I * b.y0);
    }
    for (z, h) in [(c(10.0, 2.0), frozen::H0_10_2), (c(0.5, 3.0), frozen::H0_05_3)] {
        let b = bessel::bessel0(z).unwrap();
        let h = c(h.0, h.1);
        assert!((b.h1_0 - h).norm() <= 1e-10 * h.norm(), "H0({z})");
    }
    let z = c(2.0, 8.0);
    let (b0, b1) = bessel::bessel01(z).unwrap();
    let (h0, h1) = (c(frozen::H0_2_8.0, frozen::H0_2_8.1), c(frozen::H1_2_8.0, frozen::H1_2_8.1));
    assert!((b0.h1_0 - h0).norm() <= 1e-12 * h0.norm());
    assert!((b1.h1_1 - h1).norm() <= 1e-12 * h1.norm());
    assert!((b0.dh1_0() + h1).norm() <= 1e-12 * h1.norm());
    assert_eq!(bessel::bessel0(c(20.0, 0.0)).unwrap().regime, Regime::Asymptotic);
    assert_eq!(bessel::bessel0(c(1.0, 0.0)).unwrap().regime, Regime::Series);
}

#[test]
fn j0_matches_independent_series() {
    assert!((bessel::j0(c(1.0, 0.0)) - common::j0_series(c(1.0, 0.0))).norm() < 1e-15);
    for z in [c(0.3, 0.2), c(3.0, -1.0), c(7.0, 2.0), c(11.0, 0.5)] {
        let s = common::j0_series(z);
        assert!((bessel::j0(z) - s).norm() <= 1e-11 * s.norm().max(1.0), "{z}");
    }
    assert!((bessel::j0(c(1e-8, 0.0)) - 1.0).norm() < 1e-16);
}

#[test]
fn hankel_wronskian_examples() {
    assert!(bessel::hankel_wronskian_check(c(1.0, 0.0)).unwrap().norm() <= 1e-10);
    assert!(bessel::hankel_wronskian_check(c(0.05, 0.0)).unwrap().norm() <= 1e-9);
    assert!(bessel::hankel_wronskian_check(c(10.0, 2.0)).unwrap().norm() <= 1e-9);
    for z in [c(1.0, 0.0), c(2.0, 1.0), c(0.1, 0.0)] {
        assert!(bessel::wronskian_check(z).unwrap().norm() <= 1e-10);
    }
}

#[test]
fn disk_coefficients_against_frozen_values() {
    for ((zr, zi), g, vals) in frozen::DISK {
        let k = disk2d::disk_coefficients(c(zr, zi), g).unwrap();
        let got = [k.big_z, k.a, k.b, k.big_a, k.big_b];
        for (name, (x, (re, im))) in ["Z", "a", "b", "A", "B"].iter().zip(got.iter().zip(vals)) {
            let want = c(re, im);
            assert!((x - want).norm() <= 1e-9 * want.norm().max(1.0), "{name} at ζ={zr}+{zi}i g={g}: {x} vs {want}");
        }
    }
}

#[test]
fn gamma_against_frozen_values() {
    for (g, want) in frozen::GAMMA {
        assert!((disk2d::gamma(g) - want).abs() <= 1e-14 * want, "g={g}");
    }
    // Γ = g/2 + O(g²)
    assert!((disk2d::gamma(1e-4) / 5e-5 - 1.0).abs() < 1e-4);
}

#[test]
fn shallow_well_against_exact_root() {
    for (g, kappa) in frozen::SHALLOW_KAPPA {
        let s = shallow_well_eigenvalue(g, &tol()).unwrap();
        assert!((s.kappa - kappa).abs() <= 1e-9 * kappa, "g={g}: {} vs {kappa}", s.kappa);
        assert!(s.energy.im == 0.0 && s.energy.re < 0.0 && s.energy.re > -g);
    }
}

#[test]
fn bound_states_of_square_well_match_transcendental_roots() {
    // depth 10 on [-1, 1]: even q tan q = κ, odd -q cot q = κ, q = √(10 - κ²)
    let v = Potential::barrier(-10.0);
    let states = resolvent::bound_states(&v, (1e-4, 4.0), &tol()).unwrap();
    assert_eq!(states.len(), 3);
    for b in &states {
        let q = (10.0 - b.kappa * b.kappa).sqrt();
        let even = q * q.tan() - b.kappa;
        let odd = -q / q.tan() - b.kappa;
        assert!(even.abs().min(odd.abs()) < 1e-8, "κ = {}", b.kappa);
    }
    assert!(resolvent::bound_states(&Potential::barrier(1.0), (1e-4, 2.0), &tol()).unwrap().is_empty());
}

#[test]
fn detect_examples() {
    let opts = resolvent::DetectOptions { evidence: false, ..Default::default() };
    let zero = resolvent::detect_virtual_level_with(&Potential::zero(), 0.0, &tol(), &opts);
    assert_eq!(zero.classification, Classification::VirtualLevel);
    assert_eq!(zero.rank, 1);
    assert!(zero.virtual_state.unwrap().values.iter().all(|v| (v - 1.0).norm() < 1e-12));

    let g_star = std::f64::consts::FRAC_PI_2.powi(2);
    let tuned = resolvent::detect_virtual_level_with(&Potential::barrier(-g_star), 0.0, &tol(), &opts);
    assert_eq!(tuned.classification, Classification::VirtualLevel);
    assert!(tuned.wronskian_value.norm() <= tuned.tol_w);

    let reg = resolvent::detect_virtual_level(&Potential::barrier(1.0), 0.0, &tol());
    assert_eq!(reg.classification, Classification::Regular);
    assert!((reg.wronskian_value.re - 2f64.sinh()).abs() < 1e-10);
    assert!(reg.evidence.is_some());

    let kappa = frozen::SHALLOW_KAPPA[2].1;
    let bound = resolvent::detect_virtual_level_with(&Potential::barrier(-0.01), -kappa * kappa, &tol(), &opts);
    assert_eq!(bound.classification, Classification::BoundState);
}

#[test]
fn free_kernel_closed_form() {
    let zeta = c(0.4, 0.3);
    let k = KernelHandle::new(KernelFamily::Free1d, &sp(zeta), &tol()).unwrap();
    for (x, y) in [(0.0, 0.0), (1.0, -2.0), (3.5, 0.25)] {
        let want = I * (I * zeta * f64::abs(x - y)).exp() / (2.0 * zeta);
        assert!((k.eval(x, y).unwrap() - want).norm() < 1e-14);
    }
}

#[test]
fn free3d_kernel_closed_form() {
    let zeta = c(0.7, 0.2);
    for (x, y) in [([0.0f64, 0.0, 1.0], [1.0f64, 0.5, -0.5]), ([2.0, -1.0, 0.0], [0.1, 0.1, 0.1])] {
        let r: f64 = (0..3).map(|k| (x[k] - y[k]).powi(2)).sum::<f64>().sqrt();
        let want = (I * zeta * r).exp() / (4.0 * std::f64::consts::PI * r);
        assert!((resolvent::free3d_point_kernel(&sp(zeta), x, y) - want).norm() < 1e-14);
    }
}

#[test]
fn three_d_family_is_a_virtual_level_of_its_own_potential() {
    let zeta = c(0.5, 0.0);
    let (v, err) = family_potential_fit(zeta).unwrap();
    assert!(err < 1e-10, "interpolation error {err:e}");
    let f0 = family_jost_function(&v, zeta, &tol()).unwrap();
    let f_lo = family_jost_function(&v, c(0.45, 0.0), &tol()).unwrap();
    let f_hi = family_jost_function(&v, c(0.55, 0.0), &tol()).unwrap();
    assert!(f0.norm() < 1e-8, "f(ζ₀) = {f0}");
    assert!(f_lo.norm() > 1e3 * f0.norm() && f_hi.norm() > 1e3 * f0.norm());

    let grid: Vec<f64> = (1..=400).map(|k| k as f64 * 0.01).collect();
    let fam = construct_3d_family(zeta, &grid).unwrap();
    // ψ = e^{iζr}/r outside the ball, so |ψ| r = 1
    for (r, p) in fam.r.iter().zip(&fam.psi) {
        if *r >= 1.0 {
            assert!((p.norm() * r - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn tuned_well_eigenvalue_emerges_quadratically() {
    let g_star = std::f64::consts::FRAC_PI_2.powi(2);
    let path = track_bifurcation(&Potential::barrier(-g_star), &Potential::barrier(1.0), 0.0, &DEFAULT_EPSILONS, &tol()).unwrap();
    let (exponent, _) = path.law_fit.unwrap();
    assert!((exponent - 2.0).abs() < 0.05, "exponent {exponent}");
    for (e, w) in path.eigenvalues.iter().zip(&path.wronskian_abs) {
        assert!(e.re < 0.0 && e.im.abs() < 1e-10);
        assert!(*w <= resolvent::tol_w(e.sqrt()));
    }
}

#[test]
fn shift_resolvent_examples() {
    let r = discrete::shift_resolvent(3, c(2.0, 0.0)).unwrap();
    assert_eq!((r[(0, 0)], r[(1, 1)], r[(0, 1)], r[(0, 2)]), (c(-0.5, 0.0), c(-0.5, 0.0), c(-0.25, 0.0), c(-0.125, 0.0)));
    assert!(discrete::shift_resolvent(3, c(1.0, 0.0)).is_err());
    // entrywise limit at the unit circle
    let theta = 0.7;
    let near = discrete::shift_resolvent(4, C::from_polar(1.0 + 1e-9, theta)).unwrap();
    for k in 0..4 {
        let want = -C::from_polar(1.0, -theta * (1 + k) as f64);
        assert!((near[(0, k)] - want).norm() < 1e-8);
    }
}

#[test]
fn shift_state_decays_like_one_over_n() {
    let (_, s) = discrete::engineered_virtual_state(400, c(1.0, 0.0), &Sequence::InversePower { p: 2.0 }).unwrap();
    // Ψᵢ = -Σ_{k≥i} k^{-2} = -1/i + O(i^{-2})
    let i = 400.0;
    assert!((s.psi[399].re * i + 1.0).abs() < 2.0 / i);
    assert!((s.decay_exponent - 1.0).abs() < 0.05);
    assert_eq!(s.kind, VirtualStateKind::L2Eigenvector);
    let (_, slow) = discrete::engineered_virtual_state(400, c(1.0, 0.0), &Sequence::InversePower { p: 1.5 }).unwrap();
    assert_eq!(slow.kind, VirtualStateKind::Genuine);
    let (_, fin) = discrete::engineered_virtual_state(32, c(1.0, 0.0), &Sequence::Finite { values: vec![c(1.0, 0.0), c(0.5, 0.0)] }).unwrap();
    assert_eq!(fin.kind, VirtualStateKind::Degenerate);
    assert!(fin.psi[2..].iter().all(|p| p.norm() == 0.0));
}

#[test]
fn min_rank_examples() {
    assert_eq!(discrete::min_rank_regularizer(&discrete::jordan3(), 7, 1).unwrap(), 1);
    let zero = nalgebra::DMatrix::<C>::zeros(4, 4);
    assert_eq!(discrete::min_rank_regularizer(&zero, 7, 1).unwrap(), 4);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inv = common::matrix_with_nullity(&mut rng, 5, 0);
    assert_eq!(discrete::min_rank_regularizer(&inv, 7, 1).unwrap(), 0);
}
