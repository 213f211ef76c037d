use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use thresholdscope::bessel;
use thresholdscope::bifurcation::{construct_3d_family, track_bifurcation};
use thresholdscope::discrete::{self, Sequence};
use thresholdscope::disk2d;
use thresholdscope::jost::{self, BoundReport, SpectralPoint};
use thresholdscope::lapnorm::{lap_sweep, GridSpec, SpaceTag, WeightPair};
use thresholdscope::numerics::{Grid, Tolerance};
use thresholdscope::potentials::Potential;
use thresholdscope::resolvent::{self, DetectOptions, KernelFamily};

use crate::output::{cplx, csv_table, num, Artifact};
use crate::{CliError, Command, FamilyArg, GlobalArgs, MatrixArg, PathArg, PotentialArgs, SequenceArg, SpaceArg};

/// Arguments of the Bessel table: a spiral through both regimes.
pub fn bessel_arguments(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let t = k as f64 / (n.max(2) - 1) as f64;
            let r = 0.05 * (50.0f64 / 0.05).powf(t);
            let angle = (k % 7) as f64 * 0.2 - 0.6;
            let z = Complex64::from_polar(r, angle);
            Complex64::new(z.re, z.im.clamp(-6.0, 6.0))
        })
        .collect()
}

pub fn load_potential(args: &PotentialArgs) -> Result<Potential, CliError> {
    match (&args.potential, args.barrier_g) {
        (Some(path), _) => read_potential(path),
        (None, Some(g)) => Ok(Potential::barrier(g)),
        (None, None) => Ok(Potential::zero()),
    }
}

fn read_potential(path: &Path) -> Result<Potential, CliError> {
    Ok(Potential::from_file(path)?)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn need_positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {x}")))
    }
}

fn spectral_point(zeta: Complex64, flag: &str) -> Result<SpectralPoint, CliError> {
    SpectralPoint::new(zeta).map_err(|_| usage(format!("--{flag} must have nonnegative imaginary part, got {zeta}")))
}

pub fn dispatch(cmd: &Command, g: &GlobalArgs) -> Result<Artifact, CliError> {
    let tol = Tolerance::default();
    match cmd {
        Command::Jost { pot, zeta, extent, points } => jost_cmd(pot, *zeta, *extent, *points, &tol),
        Command::Wronskian { pot, zeta, re_min, re_max, im_min, im_max, n } => {
            let zetas = match zeta {
                Some(z) => vec![*z],
                None => {
                    if *n < 1 || !(re_min <= re_max) || !(im_min <= im_max) || *im_min < 0.0 {
                        return Err(usage("grid needs n ≥ 1, ordered ranges and --im-min ≥ 0"));
                    }
                    let step = |lo: f64, hi: f64, k: usize| if *n == 1 { lo } else { lo + (hi - lo) * k as f64 / (*n - 1) as f64 };
                    let mut out = Vec::with_capacity(n * n);
                    for a in 0..*n {
                        for b in 0..*n {
                            out.push(Complex64::new(step(*re_min, *re_max, b), step(*im_min, *im_max, a)));
                        }
                    }
                    out
                }
            };
            wronskian_cmd(pot, &zetas, &tol)
        }
        Command::Detect { pot, z0, no_evidence } => {
            let v = load_potential(pot)?;
            let opts = DetectOptions { evidence: !no_evidence, ..DetectOptions::default() };
            let rep = resolvent::detect_virtual_level_with(&v, *z0, &tol, &opts);
            let class = serde_json::to_value(rep.classification).expect("enum serializes");
            let csv = csv_table(
                "re_z0,im_z0,re_zeta,im_zeta,re_w,im_w,abs_w,tol_w,classification,rank",
                [format!(
                    "{},{},{},{},{},{},{}",
                    cplx(rep.z0),
                    cplx(rep.zeta),
                    cplx(rep.wronskian_value),
                    num(rep.wronskian_value.norm()),
                    num(rep.tol_w),
                    class.as_str().unwrap_or("unknown"),
                    rep.rank
                )],
            );
            let plot = rep.virtual_state.as_ref().map(|s| s.x.iter().zip(&s.values).map(|(x, v)| (*x, v.re)).collect()).unwrap_or_default();
            Artifact::new(&rep, csv, plot)
        }
        Command::BoundStates { pot, kappa_min, kappa_max } => {
            let v = load_potential(pot)?;
            need_positive("kappa-min", *kappa_min)?;
            let kmax = kappa_max.unwrap_or(v.sup_bound().sqrt() + 1.0);
            if !(kmax > *kappa_min) {
                return Err(usage("--kappa-max must exceed --kappa-min"));
            }
            let states = resolvent::bound_states(&v, (*kappa_min, kmax), &tol)?;
            let csv = csv_table(
                "kappa,energy,wronskian_abs",
                states.iter().map(|b| format!("{},{},{}", num(b.kappa), num(b.energy), num(b.wronskian_abs))),
            );
            let plot = states.iter().map(|b| (b.kappa, b.energy)).collect();
            Artifact::new(&states, csv, plot)
        }
        Command::LapSweep { family, g, potential, s, sprime, space, z0, path, kmin, kmax, extent, points } => {
            let fam = family_of(*family, *g, potential.as_deref())?;
            let w = WeightPair { s: *s, sprime: *sprime, space_tag: space_of(*space) };
            if !(kmin <= kmax) {
                return Err(usage("--kmin must not exceed --kmax"));
            }
            let sps = sweep_path(*path, *z0, *kmin, *kmax)?;
            let spec = GridSpec { extent: *extent, points: *points };
            let z0c = Complex64::new(*z0, 0.0);
            let sweep = lap_sweep(&fam, &w, &sps, z0c, &spec, &tol)?;
            let plot = sweep.path.iter().zip(&sweep.norms).map(|(sp, n)| ((sp.z - z0c).norm(), *n)).collect();
            Artifact::new(&sweep, sweep.to_csv(), plot)
        }
        Command::Disk2d { g: gg, zeta, rmax, points, sweep, s, kmax, extent, sweep_points } => {
            need_positive("g", *gg)?;
            if *sweep {
                let fam = KernelFamily::Disk2dRadial { g: *gg };
                let w = WeightPair { s: *s, sprime: *s, space_tag: SpaceTag::L1ToL2ms };
                let sps = sweep_path(PathArg::Zeta, 0.0, 1, *kmax)?;
                let spec = GridSpec { extent: *extent, points: *sweep_points };
                let sw = lap_sweep(&fam, &w, &sps, Complex64::new(0.0, 0.0), &spec, &tol)?;
                let plot = sw.path.iter().zip(&sw.norms).map(|(sp, n)| (sp.zeta.norm(), *n)).collect();
                return Artifact::new(&sw, sw.to_csv(), plot);
            }
            need_positive("rmax", *rmax)?;
            if *points < 1 {
                return Err(usage("--points must be at least 1"));
            }
            disk_cmd(*gg, *zeta, *rmax, *points)
        }
        Command::Bifurcate { pot, perturbation, w_barrier, z0, eps, family3d } => {
            if let Some(zeta) = family3d {
                let grid: Vec<f64> = (1..=300).map(|k| k as f64 * 0.01).collect();
                let fam = construct_3d_family(*zeta, &grid)?;
                let csv = csv_table(
                    "r,re_psi,im_psi,re_V,im_V",
                    (0..fam.r.len()).map(|k| format!("{},{},{}", num(fam.r[k]), cplx(fam.psi[k]), cplx(fam.potential[k]))),
                );
                let plot = fam.r.iter().zip(&fam.psi).map(|(r, p)| (*r, p.norm())).collect();
                return Artifact::new(&fam, csv, plot);
            }
            let v = load_potential(pot)?;
            let w = match perturbation {
                Some(path) => read_potential(path)?,
                None => Potential::barrier(*w_barrier),
            };
            let path = track_bifurcation(&v, &w, *z0, eps, &tol)?;
            let plot = path.epsilons.iter().zip(&path.eigenvalues).map(|(e, ev)| (*e, (ev - z0).norm())).collect();
            Artifact::new(&path, path.to_csv(), plot)
        }
        Command::BesselSelftest { points } => {
            if *points < 2 {
                return Err(usage("--points must be at least 2"));
            }
            let rows = bessel_table(&bessel_arguments(*points))?;
            let csv = csv_table(
                "re_z,im_z,regime,wronskian_dev,hankel_dev",
                rows.iter().map(|r| format!("{},{},{},{}", cplx(r.z), r.regime, num(r.wronskian_dev), num(r.hankel_dev))),
            );
            let plot = rows.iter().map(|r| (r.z.norm(), r.wronskian_dev.max(r.hankel_dev))).collect();
            Artifact::new(&rows, csv, plot)
        }
        Command::ShiftDemo { n, sequence, param, theta } => {
            let phi = match sequence {
                SequenceArg::InversePower => Sequence::InversePower { p: *param },
                SequenceArg::Geometric => Sequence::Geometric { r: *param },
                SequenceArg::Finite => Sequence::Finite { values: vec![Complex64::new(1.0, 0.0), Complex64::new(*param, 0.0)] },
            };
            let z0 = Complex64::from_polar(1.0, *theta);
            let (_, state) = discrete::engineered_virtual_state(*n, z0, &phi)?;
            let csv = csv_table("i,re_psi,im_psi", state.psi.iter().enumerate().map(|(k, p)| format!("{},{}", k + 1, cplx(*p))));
            let plot = state.psi.iter().enumerate().map(|(k, p)| ((k + 1) as f64, p.norm())).collect();
            Artifact::new(&state, csv, plot)
        }
        Command::RankDemo { matrix, n, nullity, trials } => {
            let (label, m) = match matrix {
                MatrixArg::Jordan3 => ("jordan3", discrete::jordan3()),
                // rank zero factors give the zero matrix
                MatrixArg::Zero => ("zero", discrete::planted_nullity(*n, *n, 0)?),
                MatrixArg::Random => ("random", discrete::planted_nullity(*n, *nullity, g.seed)?),
            };
            let min_rank = discrete::min_rank_regularizer(&m, *trials, g.seed)?;
            let nullity = discrete::svd_nullity(&m, 1e-10);
            let report = RankReport { matrix: label, n: m.nrows(), min_rank, svd_nullity: nullity };
            let csv = csv_table("matrix,n,min_rank,svd_nullity", [format!("{label},{},{min_rank},{nullity}", m.nrows())]);
            Artifact::new(&report, csv, vec![(m.nrows() as f64, min_rank as f64)])
        }
    }
}

#[derive(Serialize)]
struct RankReport {
    matrix: &'static str,
    n: usize,
    min_rank: usize,
    svd_nullity: usize,
}

pub fn family_of(f: FamilyArg, g: Option<f64>, potential: Option<&Path>) -> Result<KernelFamily, CliError> {
    let need_g = || g.ok_or_else(|| usage("--g is required for this family"));
    Ok(match f {
        FamilyArg::Free1d => KernelFamily::Free1d,
        FamilyArg::Free3d => KernelFamily::Free3d,
        FamilyArg::Barrier1d => KernelFamily::Barrier1d { g: need_g()? },
        FamilyArg::Disk2d => {
            let g = need_g()?;
            need_positive("g", g)?;
            KernelFamily::Disk2dRadial { g }
        }
        FamilyArg::Generic1d => {
            let path = potential.ok_or_else(|| usage("--potential is required for generic1d"))?;
            KernelFamily::Generic1d { potential: read_potential(path)? }
        }
    })
}

fn space_of(s: SpaceArg) -> SpaceTag {
    match s {
        SpaceArg::L2 => SpaceTag::L2sToL2ms,
        SpaceArg::L1 => SpaceTag::L1ToL2ms,
        SpaceArg::Linf => SpaceTag::L2sToLinf,
    }
}

pub fn sweep_path(path: PathArg, z0: f64, kmin: u32, kmax: u32) -> Result<Vec<SpectralPoint>, CliError> {
    (kmin..=kmax)
        .map(|k| {
            let d = 10f64.powi(-(k as i32));
            let sp = match path {
                PathArg::Real => SpectralPoint::from_z(Complex64::new(z0 - d, 0.0)),
                PathArg::Imag => SpectralPoint::from_z(Complex64::new(z0, d)),
                PathArg::Zeta => {
                    if z0 < 0.0 {
                        return Err(usage("--path zeta needs --z0 ≥ 0"));
                    }
                    SpectralPoint::new(Complex64::new(z0.sqrt(), d))
                }
            };
            Ok(sp?)
        })
        .collect()
}

#[derive(Serialize)]
struct JostDump {
    zeta: Complex64,
    plus: jost::JostSolution,
    minus: jost::JostSolution,
    bounds: [BoundReport; 2],
}

fn jost_cmd(pot: &PotentialArgs, zeta: Complex64, extent: Option<f64>, points: usize, tol: &Tolerance) -> Result<Artifact, CliError> {
    let v = load_potential(pot)?;
    let sp = spectral_point(zeta, "zeta")?;
    let l = extent.unwrap_or(v.support_radius() + 5.0);
    need_positive("extent", l)?;
    if points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let grid = Grid::trapezoid(-l, l, points)?;
    let plus = jost::jost_plus(&v, &sp, &grid, tol)?;
    let minus = jost::jost_minus(&v, &sp, &grid, tol)?;
    let bounds = [jost::jost_bound_ratios(&v, &sp, &plus)?, jost::jost_bound_ratios(&v, &sp, &minus)?];
    let xs = grid.nodes();
    let csv = csv_table(
        "x,re_theta_plus,im_theta_plus,re_dtheta_plus,im_dtheta_plus,re_theta_minus,im_theta_minus,re_dtheta_minus,im_dtheta_minus",
        (0..xs.len()).map(|k| {
            format!(
                "{},{},{},{},{}",
                num(xs[k]),
                cplx(plus.theta[k]),
                cplx(plus.dtheta[k]),
                cplx(minus.theta[k]),
                cplx(minus.dtheta[k])
            )
        }),
    );
    let plot = xs.iter().zip(&plus.theta).map(|(x, t)| (*x, t.norm())).collect();
    Artifact::new(&JostDump { zeta, plus, minus, bounds }, csv, plot)
}

#[derive(Serialize)]
struct WronskianRow {
    zeta: Complex64,
    w: Complex64,
}

fn wronskian_cmd(pot: &PotentialArgs, zetas: &[Complex64], tol: &Tolerance) -> Result<Artifact, CliError> {
    let v = load_potential(pot)?;
    let mut rows = Vec::with_capacity(zetas.len());
    for &z in zetas {
        let sp = spectral_point(z, "zeta")?;
        rows.push(WronskianRow { zeta: z, w: jost::wronskian(&v, &sp, tol)? });
    }
    let csv = csv_table(
        "re_zeta,im_zeta,re_w,im_w,abs_w",
        rows.iter().map(|r| format!("{},{},{}", cplx(r.zeta), cplx(r.w), num(r.w.norm()))),
    );
    let plot = rows.iter().map(|r| (r.zeta.re, r.w.norm())).collect();
    Artifact::new(&rows, csv, plot)
}

#[derive(Serialize)]
struct DiskSample {
    r: f64,
    phi: Complex64,
    theta: Complex64,
    theta_over_w: Complex64,
}

#[derive(Serialize)]
struct DiskReport {
    coefficients: disk2d::DiskCoefficients,
    wronskian: Complex64,
    gamma: f64,
    inverse_gamma: f64,
    samples: Vec<DiskSample>,
}

fn disk_cmd(g: f64, zeta: Complex64, rmax: f64, points: usize) -> Result<Artifact, CliError> {
    spectral_point(zeta, "zeta")?;
    let c = disk2d::disk_coefficients(zeta, g)?;
    let w = c.wronskian();
    let gamma = disk2d::gamma(g);
    let mut samples = Vec::with_capacity(points);
    for k in 1..=points {
        let r = rmax * k as f64 / points as f64;
        let rv = disk2d::radial_solutions_with(&c, r)?;
        samples.push(DiskSample { r, phi: rv.phi, theta: rv.theta, theta_over_w: rv.theta / w });
    }
    let csv = csv_table(
        "r,re_phi,im_phi,re_theta,im_theta,re_theta_over_w,im_theta_over_w",
        samples.iter().map(|s| format!("{},{},{},{}", num(s.r), cplx(s.phi), cplx(s.theta), cplx(s.theta_over_w))),
    );
    let plot = samples.iter().map(|s| (s.r, s.theta_over_w.norm())).collect();
    Artifact::new(&DiskReport { coefficients: c, wronskian: w, gamma, inverse_gamma: 1.0 / gamma, samples }, csv, plot)
}

#[derive(Serialize)]
pub struct BesselRow {
    pub z: Complex64,
    pub regime: &'static str,
    pub wronskian_dev: f64,
    pub hankel_dev: f64,
}

pub fn bessel_table(zs: &[Complex64]) -> Result<Vec<BesselRow>, CliError> {
    zs.iter()
        .map(|&z| {
            let b = bessel::bessel0(z)?;
            Ok(BesselRow {
                z,
                regime: match b.regime {
                    bessel::Regime::Series => "series",
                    bessel::Regime::Asymptotic => "asymptotic",
                },
                wronskian_dev: bessel::wronskian_check(z)?.norm(),
                hankel_dev: bessel::hankel_wronskian_check(z)?.norm(),
            })
        })
        .collect()
}
