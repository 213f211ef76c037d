mod commands;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use output::Format;

const CSV_SCHEMAS: &str = "\
CSV columns by subcommand:
  jost           x,re_theta_plus,im_theta_plus,re_dtheta_plus,im_dtheta_plus,re_theta_minus,im_theta_minus,re_dtheta_minus,im_dtheta_minus
  wronskian      re_zeta,im_zeta,re_w,im_w,abs_w
  detect         re_z0,im_z0,re_zeta,im_zeta,re_w,im_w,abs_w,tol_w,classification,rank
  bound-states   kappa,energy,wronskian_abs
  lap-sweep      re_z,im_z,norm,resolution,refined_norm
  disk2d         r,re_phi,im_phi,re_theta,im_theta,re_theta_over_w,im_theta_over_w  (with --sweep: as lap-sweep)
  bifurcate      epsilon,re_E,im_E,wronskian_abs  (with --family3d: r,re_psi,im_psi,re_V,im_V)
  bessel-selftest re_z,im_z,regime,wronskian_dev,hankel_dev
  shift-demo     i,re_psi,im_psi
  rank-demo      matrix,n,min_rank,svd_nullity
--plot-data writes two columns x,y.
Exit codes: 0 success, 1 computational error, 2 usage error.
THRESHOLDSCOPE_THREADS caps the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "thresholdscope", version, about = "Threshold resonances, Jost solutions and weighted resolvent norms", after_help = CSV_SCHEMAS)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write the artifact here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Also write an x,y column file for plotting.
    #[arg(long, global = true)]
    pub plot_data: Option<PathBuf>,
    /// Run the subcommand's self-checks instead of the computation.
    #[arg(long, global = true)]
    pub selftest: bool,
}

/// Either a JSON potential file or the barrier `g·𝟙_{[-1,1]}`; neither means `V ≡ 0`.
#[derive(Debug, Clone, Args)]
pub struct PotentialArgs {
    /// Potential file: {"segments": [{"a", "b", "coeffs": [[re, im], ...]}], "support_radius"}.
    #[arg(long, conflicts_with = "barrier_g")]
    pub potential: Option<PathBuf>,
    /// Use V = g on [-1, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub barrier_g: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Free1d,
    Barrier1d,
    Generic1d,
    Free3d,
    Disk2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    L2,
    L1,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    /// z = z0 - 10^-k
    Real,
    /// z = z0 + i·10^-k
    Imag,
    /// ζ = √z0 + i·10^-k
    Zeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixArg {
    Jordan3,
    Zero,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequenceArg {
    InversePower,
    Geometric,
    Finite,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample θ± on a grid and check the a-priori Jost estimates.
    Jost {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, value_parser = parse_complex, default_value = "0")]
        zeta: Complex64,
        /// Half-width of the sampling interval (default: support radius + 5).
        #[arg(long)]
        extent: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Evaluate w(ζ) at one point or on a rectangular grid.
    Wronskian {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, value_parser = parse_complex, conflicts_with_all = ["re_min", "re_max", "im_min", "im_max"])]
        zeta: Option<Complex64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        re_min: f64,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        re_max: f64,
        #[arg(long, default_value_t = 0.0)]
        im_min: f64,
        #[arg(long, default_value_t = 3.0)]
        im_max: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 7)]
        n: usize,
    },
    /// Classify z0 as regular, a virtual level or an eigenvalue.
    Detect {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        z0: f64,
        /// Skip the norm sweep attached to regular points.
        #[arg(long)]
        no_evidence: bool,
    },
    /// Negative eigenvalues -κ² with κ in a bracket.
    BoundStates {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, default_value_t = 1e-4)]
        kappa_min: f64,
        /// Default: sqrt(sup|V|) + 1.
        #[arg(long)]
        kappa_max: Option<f64>,
    },
    /// Weighted resolvent norms along a path towards z0.
    LapSweep {
        #[arg(long, value_enum, default_value_t = FamilyArg::Free1d)]
        family: FamilyArg,
        #[arg(long, allow_negative_numbers = true)]
        g: Option<f64>,
        #[arg(long)]
        potential: Option<PathBuf>,
        #[arg(long, default_value_t = 1.1)]
        s: f64,
        #[arg(long, default_value_t = 1.1)]
        sprime: f64,
        #[arg(long, value_enum, default_value_t = SpaceArg::L2)]
        space: SpaceArg,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        z0: f64,
        #[arg(long, value_enum, default_value_t = PathArg::Real)]
        path: PathArg,
        #[arg(long, default_value_t = 1)]
        kmin: u32,
        #[arg(long, default_value_t = 5)]
        kmax: u32,
        #[arg(long, default_value_t = 60.0)]
        extent: f64,
        #[arg(long, default_value_t = 600)]
        points: usize,
    },
    /// Regularized disk problem: coefficients, Γ(g), radial factors, optional sweep.
    Disk2d {
        #[arg(long, default_value_t = 0.01)]
        g: f64,
        #[arg(long, value_parser = parse_complex, default_value = "0+0.01i")]
        zeta: Complex64,
        #[arg(long, default_value_t = 5.0)]
        rmax: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Emit the L¹ → L²_{-s} sweep along ζ = i·10^-k instead of samples.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 1.5)]
        s: f64,
        #[arg(long, default_value_t = 5)]
        kmax: u32,
        #[arg(long, default_value_t = 60.0)]
        extent: f64,
        #[arg(long, default_value_t = 600)]
        sweep_points: usize,
    },
    /// Follow the eigenvalue of V - εW emerging from z0.
    Bifurcate {
        #[command(flatten)]
        pot: PotentialArgs,
        /// Perturbation file; default W = w_barrier·𝟙_{[-1,1]}.
        #[arg(long)]
        perturbation: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        w_barrier: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        z0: f64,
        /// Comma-separated ε schedule.
        #[arg(long, value_delimiter = ',', default_values_t = thresholdscope::bifurcation::DEFAULT_EPSILONS.to_vec())]
        eps: Vec<f64>,
        /// Report the three-dimensional family at this ζ instead.
        #[arg(long, value_parser = parse_complex)]
        family3d: Option<Complex64>,
    },
    /// Wronskian identities of J₀, Y₀, H₀ on a fixed set of arguments.
    BesselSelftest {
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Truncated shift with an engineered virtual state.
    ShiftDemo {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, value_enum, default_value_t = SequenceArg::InversePower)]
        sequence: SequenceArg,
        /// Exponent p for φᵢ = i^-p, or ratio r for φᵢ = rⁱ.
        #[arg(long, default_value_t = 2.0)]
        param: f64,
        /// z0 = e^{iθ}.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta: f64,
    },
    /// Nullity as the least rank of a regularizing perturbation.
    RankDemo {
        #[arg(long, value_enum, default_value_t = MatrixArg::Jordan3)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        nullity: usize,
        #[arg(long, default_value_t = 7)]
        trials: usize,
    },
}

/// Accepts `1.5`, `0.3+0.2i`, `2i` or `re,im`.
fn parse_complex(text: &str) -> Result<Complex64, String> {
    let t = text.trim();
    if let Some((re, im)) = t.split_once(',') {
        let re: f64 = re.trim().parse().map_err(|e| format!("{e}"))?;
        let im: f64 = im.trim().parse().map_err(|e| format!("{e}"))?;
        return Ok(Complex64::new(re, im));
    }
    t.parse::<Complex64>().map_err(|e| format!("not a complex number: {e}"))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(thresholdscope::Error),
    Io(std::io::Error),
    SelftestFailed(usize),
}

impl<E: Into<thresholdscope::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Compute(e.into())
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("THRESHOLDSCOPE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("THRESHOLDSCOPE_THREADS must be a positive integer, got {raw:?}")))?;
    // a second initialisation in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let g = &cli.global;
    if g.selftest {
        let name = cli.command.name();
        let results = selftest::run(&cli.command, g.seed);
        return selftest::report(name, &results, g);
    }
    let artifact = commands::dispatch(&cli.command, g)?;
    output::emit(&artifact, g)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {}: {e}", e.module());
            ExitCode::from(1)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: io: {e}");
            ExitCode::from(1)
        }
        Err(CliError::SelftestFailed(n)) => {
            eprintln!("error: {n} self-check(s) failed");
            ExitCode::from(1)
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Jost { .. } => "jost",
            Command::Wronskian { .. } => "wronskian",
            Command::Detect { .. } => "detect",
            Command::BoundStates { .. } => "bound-states",
            Command::LapSweep { .. } => "lap-sweep",
            Command::Disk2d { .. } => "disk2d",
            Command::Bifurcate { .. } => "bifurcate",
            Command::BesselSelftest { .. } => "bessel-selftest",
            Command::ShiftDemo { .. } => "shift-demo",
            Command::RankDemo { .. } => "rank-demo",
        }
    }
}
