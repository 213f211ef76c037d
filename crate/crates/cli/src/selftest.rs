use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thresholdscope::bessel;
use thresholdscope::bifurcation::{construct_3d_family, shallow_well_eigenvalue, track_bifurcation, DEFAULT_EPSILONS};
use thresholdscope::discrete::{self, Sequence};
use thresholdscope::disk2d;
use thresholdscope::jost::{self, barrier, SpectralPoint};
use thresholdscope::lapnorm::{discrete_norm, GridSpec, WeightPair};
use thresholdscope::numerics::{Grid, Tolerance};
use thresholdscope::potentials::{first_moment, random_piecewise_constant, Potential};
use thresholdscope::resolvent::{self, Classification, KernelFamily, KernelHandle};

use crate::output::{csv_table, emit, num, Artifact};
use crate::{CliError, Command, GlobalArgs};

#[derive(serde::Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

fn check(name: &'static str, value: f64, limit: f64) -> Check {
    Check { name, passed: value <= limit, value, limit }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sp(zeta: Complex64) -> SpectralPoint {
    SpectralPoint::new(zeta).expect("upper half-plane")
}

/// A failed computation counts as an infinitely bad value.
fn or_inf<T>(r: Result<T, impl std::fmt::Debug>, f: impl FnOnce(T) -> f64) -> f64 {
    r.map(f).unwrap_or(f64::INFINITY)
}

pub fn run(cmd: &Command, seed: u64) -> Vec<Check> {
    let tol = Tolerance::default();
    match cmd {
        Command::Jost { .. } => jost_checks(seed, &tol),
        Command::Wronskian { .. } => wronskian_checks(seed, &tol),
        Command::Detect { .. } => detect_checks(&tol),
        Command::BoundStates { .. } => bound_state_checks(&tol),
        Command::LapSweep { .. } => lap_checks(&tol),
        Command::Disk2d { .. } => disk_checks(),
        Command::Bifurcate { .. } => bifurcation_checks(&tol),
        Command::BesselSelftest { .. } => bessel_checks(),
        Command::ShiftDemo { .. } => shift_checks(),
        Command::RankDemo { .. } => rank_checks(seed),
    }
}

pub fn report(name: &str, checks: &[Check], g: &GlobalArgs) -> Result<(), CliError> {
    let csv = csv_table(
        "subcommand,check,status,value,limit",
        checks.iter().map(|k| format!("{name},{},{},{},{}", k.name, if k.passed { "pass" } else { "fail" }, num(k.value), num(k.limit))),
    );
    emit(&Artifact::new(&checks, csv, Vec::new())?, g)?;
    let failed = checks.iter().filter(|k| !k.passed).count();
    if failed > 0 {
        Err(CliError::SelftestFailed(failed))
    } else {
        Ok(())
    }
}

fn jost_checks(seed: u64, tol: &Tolerance) -> Vec<Check> {
    let grid = Grid::trapezoid(-4.0, 4.0, 80).expect("valid grid");
    let zeta = c(0.7, 0.3);
    let free = or_inf(jost::jost_plus(&Potential::zero(), &sp(zeta), &grid, tol), |s| {
        grid.nodes().iter().zip(&s.theta).map(|(x, t)| (t - (c(0.0, 1.0) * zeta * x).exp()).norm()).fold(0.0, f64::max)
    });
    let closed = or_inf(jost::jost_plus(&Potential::barrier(1.0), &sp(c(0.0, 1.0)), &grid, tol), |s| {
        grid.nodes().iter().zip(&s.theta).map(|(x, t)| (t - barrier::theta_plus(c(0.0, 1.0), 1.0, *x).0).norm() / t.norm().max(1.0)).fold(0.0, f64::max)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let v = random_piecewise_constant(&mut rng, 5.0);
        for zeta in [c(0.0, 0.0), c(1.0, 0.5), c(0.3, 2.0)] {
            let r = jost::jost_plus(&v, &sp(zeta), &grid, tol).and_then(|s| jost::jost_bound_ratios(&v, &sp(zeta), &s));
            worst = worst.max(or_inf(r, |rep| rep.max_ratio()));
        }
    }
    vec![
        check("free_solution_is_exponential", free, 1e-13),
        check("barrier_matches_closed_form", closed, 1e-8),
        check("random_suite_bound_ratio", worst, 1.0 + 1e-6),
    ]
}

fn wronskian_checks(seed: u64, tol: &Tolerance) -> Vec<Check> {
    let zeta = c(0.4, 0.9);
    let free = or_inf(jost::wronskian(&Potential::zero(), &sp(zeta), tol), |w| (w + c(0.0, 2.0) * zeta).norm());
    let mut formula = 0.0f64;
    for zeta in [c(0.0, 0.0), c(0.5, 0.5), c(2.0, 0.0), c(0.0, 3.0)] {
        let numeric = jost::wronskian(&Potential::barrier(1.0), &sp(zeta), tol);
        let closed = barrier::wronskian_closed(zeta, 1.0);
        formula = formula.max(or_inf(numeric, |w| (w - closed).norm() / closed.norm()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_piecewise_constant(&mut rng, 3.0);
    let zeta = c(0.8, 0.2);
    let reflection = or_inf(
        jost::wronskian(&v, &sp(zeta), tol).and_then(|a| jost::wronskian(&v.reflect(), &sp(zeta), tol).map(|b| (a - b).norm() / a.norm())),
        |d| d,
    );
    let big = c(100.0, 0.0);
    let lower = or_inf(first_moment(&v, tol), |m| {
        let b = jost::wronskian_lower_bound(m, &sp(big));
        or_inf(jost::wronskian(&v, &sp(big), tol), |w| if b > 0.0 && w.norm() < b { 1.0 } else { 0.0 })
    });
    vec![
        check("free_wronskian", free, 1e-13),
        check("barrier_formula_relative", formula, 1e-8),
        check("reflection_invariance", reflection, 1e-9),
        check("lower_bound_violations", lower, 0.0),
    ]
}

fn class_is(r: &resolvent::VirtualLevelReport, want: Classification) -> f64 {
    if r.classification == want {
        0.0
    } else {
        1.0
    }
}

fn detect_checks(tol: &Tolerance) -> Vec<Check> {
    let opts = resolvent::DetectOptions { evidence: false, ..Default::default() };
    let zero = resolvent::detect_virtual_level_with(&Potential::zero(), 0.0, tol, &opts);
    let state_dev = zero.virtual_state.as_ref().map(|s| s.values.iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max)).unwrap_or(f64::INFINITY);
    let regular = resolvent::detect_virtual_level_with(&Potential::barrier(1.0), 0.0, tol, &opts);
    let tuned = resolvent::detect_virtual_level_with(&Potential::barrier(-FRAC_PI_2 * FRAC_PI_2), 0.0, tol, &opts);
    vec![
        check("zero_potential_is_virtual", class_is(&zero, Classification::VirtualLevel), 0.0),
        check("zero_potential_state_is_one", state_dev, 1e-12),
        check("barrier_is_regular", class_is(&regular, Classification::Regular), 0.0),
        check("tuned_well_is_virtual", class_is(&tuned, Classification::VirtualLevel), 0.0),
    ]
}

fn bound_state_checks(tol: &Tolerance) -> Vec<Check> {
    let shallow = or_inf(shallow_well_eigenvalue(0.01, tol), |s| (s.energy.re / 1e-4 + 1.0).abs());
    let repulsive = or_inf(resolvent::bound_states(&Potential::barrier(1.0), (1e-4, 2.0), tol), |b| b.len() as f64);
    // depth 10 on [-1, 1]: 2√10 / π ≈ 2.01, so three states
    let deep = or_inf(resolvent::bound_states(&Potential::barrier(-10.0), (1e-4, 4.0), tol), |b| (b.len() as f64 - 3.0).abs());
    vec![
        check("shallow_well_ratio_deviation", shallow, 0.1),
        check("repulsive_barrier_has_none", repulsive, 0.0),
        check("deep_well_count", deep, 0.0),
    ]
}

fn lap_checks(tol: &Tolerance) -> Vec<Check> {
    let p = sp(c(0.3, 0.2));
    let sym = or_inf(KernelHandle::new(KernelFamily::Barrier1d { g: 1.0 }, &p, tol), |k| {
        let pts = [-2.0, -0.5, 0.3, 1.7];
        let mut worst = 0.0f64;
        for &x in &pts {
            for &y in &pts {
                worst = worst.max(or_inf(k.eval(x, y).and_then(|a| k.eval(y, x).map(|b| (a - b).norm())), |d| d));
            }
        }
        worst
    });
    let grid = GridSpec { extent: 20.0, points: 200 }.grid(false).expect("valid grid");
    let monotone = or_inf(KernelHandle::new(KernelFamily::Free1d, &sp(c(0.0, 0.3)), tol), |k| {
        let a = discrete_norm(&k, &WeightPair::l2(1.1, 1.1), &grid, tol);
        let b = discrete_norm(&k, &WeightPair::l2(1.5, 1.5), &grid, tol);
        match (a, b) {
            (Ok(a), Ok(b)) => (b - a).max(0.0),
            _ => f64::INFINITY,
        }
    });
    let fine = Grid::trapezoid(-10.0, 10.0, 2000).expect("valid grid");
    let f: Vec<Complex64> = fine.nodes().iter().map(|x| c((-x * x).exp(), 0.0)).collect();
    let residual = or_inf(KernelHandle::new(KernelFamily::Barrier1d { g: 1.0 }, &sp(c(0.2, 0.4)), tol), |k| {
        or_inf(resolvent::apply(&k, &f, &fine, &tol.with_rel(1e-3)), |a| a.residual)
    });
    vec![
        check("barrier_kernel_symmetry", sym, 1e-12),
        check("norm_nonincreasing_in_s", monotone, 1e-12),
        check("apply_residual", residual, 1e-3),
    ]
}

fn disk_checks() -> Vec<Check> {
    let gamma = (disk2d::gamma(0.04) - 0.020_100_166_805_625_023).abs();
    let free = or_inf(disk2d::disk_coefficients(c(0.3, 0.1), 0.0), |k| (k.big_a - 1.0).norm() + (k.big_b - c(0.0, 1.0)).norm());
    let zs = disk2d::zeta_grid_in_disk(0.05, 4, 8);
    let b_min = or_inf(disk2d::b_lower_bound_scan(0.01, &zs), |s| if s.points > 0 { 0.0 } else { 1.0 })
        + zs.iter().map(|z| or_inf(disk2d::disk_coefficients(*z, 0.01), |k| if k.big_b.norm() > 0.5 { 0.0 } else { 1.0 })).sum::<f64>();
    let grid: Vec<f64> = (1..=100).map(|k| k as f64 * 0.01).collect();
    let mono = or_inf(disk2d::nonradial_mode_profile(1, 0.5, &grid), |_| 0.0);
    vec![
        check("gamma_0_04", gamma, 1e-15),
        check("free_limit_coefficients", free, 1e-10),
        check("b_exceeds_half_count", b_min, 0.0),
        check("mode_one_monotone", mono, 0.0),
    ]
}

fn bifurcation_checks(tol: &Tolerance) -> Vec<Check> {
    let law = or_inf(track_bifurcation(&Potential::zero(), &Potential::barrier(1.0), 0.0, &DEFAULT_EPSILONS, tol), |p| {
        p.law_fit.map(|(e, _)| (e - 2.0).abs()).unwrap_or(f64::INFINITY)
    });
    let grid: Vec<f64> = (1..=200).map(|k| k as f64 * 0.01).collect();
    let fam = or_inf(construct_3d_family(c(0.5, 0.1), &grid), |f| f.residual.max(f.jump_psi).max(f.jump_dpsi));
    let outside = or_inf(construct_3d_family(c(0.5, 0.0), &grid), |f| {
        f.r.iter().zip(&f.potential).filter(|(r, _)| **r >= 1.0).map(|(_, v)| v.norm()).fold(0.0, f64::max)
    });
    vec![
        check("free_line_exponent_minus_two", law, 0.05),
        check("family_residual_and_matching", fam, 1e-9),
        check("family_potential_vanishes_outside", outside, 0.0),
    ]
}

fn bessel_checks() -> Vec<Check> {
    let zs = crate::commands::bessel_arguments(50);
    let rows = crate::commands::bessel_table(&zs);
    let worst = or_inf(rows, |r| r.iter().map(|x| x.wronskian_dev.max(x.hankel_dev)).fold(0.0, f64::max));
    // J₀(1) summed independently of the library series
    let mut term = 1.0f64;
    let mut series = 1.0f64;
    for k in 1..30 {
        term *= -0.25 / (k * k) as f64;
        series += term;
    }
    let j01 = (bessel::j0(c(1.0, 0.0)).re - series).abs();
    let y_small = or_inf(bessel::bessel0(c(0.01, 0.0)), |b| (b.y0.re - (2.0 / PI) * 0.01f64.ln()).abs());
    vec![
        check("wronskian_identity_50_points", worst, 1e-9),
        check("j0_at_one", j01, 1e-12),
        check("y0_log_law_offset", y_small, 1.0),
    ]
}

fn shift_checks() -> Vec<Check> {
    let r = discrete::shift_resolvent(3, c(2.0, 0.0));
    let entries = or_inf(r, |m| (m[(0, 0)] + 0.5).norm() + (m[(0, 1)] + 0.25).norm() + (m[(0, 2)] + 0.125).norm());
    let phi = Sequence::InversePower { p: 2.0 };
    let r200 = or_inf(discrete::engineered_virtual_state(200, c(1.0, 0.0), &phi), |(_, s)| s.residual);
    let r400 = or_inf(discrete::engineered_virtual_state(400, c(1.0, 0.0), &phi), |(_, s)| s.residual);
    let finite = or_inf(discrete::engineered_virtual_state(16, c(1.0, 0.0), &Sequence::Finite { values: vec![c(1.0, 0.0), c(0.5, 0.0)] }), |(_, s)| {
        if s.kind == discrete::VirtualStateKind::Degenerate {
            0.0
        } else {
            1.0
        }
    });
    vec![
        check("resolvent_entries_n3_z2", entries, 1e-15),
        check("residual_ratio_shortfall", (1.8 - r200 / r400).max(0.0), 0.0),
        check("finite_phi_is_degenerate", finite, 0.0),
    ]
}

fn rank_checks(seed: u64) -> Vec<Check> {
    let jordan = or_inf(discrete::min_rank_regularizer(&discrete::jordan3(), 7, seed), |r| (r as f64 - 1.0).abs());
    let zero = or_inf(
        discrete::planted_nullity(4, 4, seed).map_err(|e| e.to_string()).and_then(|m| discrete::min_rank_regularizer(&m, 7, seed).map_err(|e| e.to_string())),
        |r| (r as f64 - 4.0).abs(),
    );
    let mut mismatches = 0.0;
    for k in 0..10u64 {
        let n = 3 + (k as usize % 4);
        let nullity = k as usize % 3;
        let m = match discrete::planted_nullity(n, nullity, seed.wrapping_add(k)) {
            Ok(m) => m,
            Err(_) => {
                mismatches += 1.0;
                continue;
            }
        };
        if discrete::min_rank_regularizer(&m, 7, seed.wrapping_add(k)).ok() != Some(discrete::svd_nullity(&m, 1e-10)) {
            mismatches += 1.0;
        }
    }
    vec![
        check("jordan_block_needs_rank_one", jordan, 0.0),
        check("zero_matrix_needs_full_rank", zero, 0.0),
        check("planted_nullity_mismatches", mismatches, 0.0),
    ]
}
