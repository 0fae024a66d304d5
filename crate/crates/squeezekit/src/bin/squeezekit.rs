//! Command-line front end: squeezed-vacuum construction, equivalence
//! certification, cyclic no-go scans, thermofield-double spectra, and the
//! appendix identity checks. One subcommand per result.
//!
//! Exit codes: 0 success, 1 domain error (for example `|alpha| >= 1`),
//! 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use squeezekit::closed_form::{
    auto_cutoff, exp_pair_coupling, exp_quadratic_single, gen_fn_partial_sum, smsv_closed_form,
    tmsv_closed_form, AlphaContext, SqueezeParamAlpha, DEFAULT_CUTOFF_EPS,
};
use squeezekit::fock::fidelity;
use squeezekit::io::{
    complex_pair, spectrum_to_csv, to_json_bytes, write_atomic, AppendixDoc, CommutatorCheckDoc,
    EquivDoc, GenFnCheckDoc, NogoScanDoc, OffDiagonalCheckDoc, PairwiseChainDoc, SqueezeDoc,
    StateDoc, TfdRowDoc, TfdSpectrumDoc, SCHEMA_VERSION,
};
use squeezekit::solver::{
    build_constraint_matrix, classify, constraint_residual, cutoff_scan, kernel_analysis,
    pairwise_chain_check, ConstraintSystem, MemoryBudget, DEFAULT_KERNEL_TOL,
};
use squeezekit::tfd::{tfd_spectrum, GridKind, TfdConfig};
use squeezekit::unitary::{
    alpha_from_xi, commutator_check_single, squeeze_single, squeeze_two, SqueezeParamXi,
};

type C64 = Complex64;

#[derive(Parser)]
#[command(
    name = "squeezekit",
    version,
    about = "Squeezed vacua, cyclic no-go scans, and thermofield-double spectra on truncated Fock spaces"
)]
struct Cli {
    /// Write the result to this path (atomic: temp file then rename)
    /// instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Output format. `csv` is only available for `tfd spectrum` (its
    /// default); everything else emits JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Seed for randomized property sweeps (`check appendix`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Construct squeezed vacua from the annihilation-condition parameter.
    Squeeze {
        #[command(subcommand)]
        which: SqueezeCmd,
    },
    /// Certify the unitary vs exponential-form equivalences.
    Equiv {
        #[command(subcommand)]
        which: EquivCmd,
    },
    /// Cyclic N-mode constraint analysis.
    Nogo {
        #[command(subcommand)]
        which: NogoCmd,
    },
    /// Thermofield-double spectra.
    Tfd {
        #[command(subcommand)]
        which: TfdCmd,
    },
    /// Numerical verification suites.
    Check {
        #[command(subcommand)]
        which: CheckCmd,
    },
}

#[derive(Subcommand)]
enum SqueezeCmd {
    /// Single-mode squeezed vacuum for `(a - alpha a^dag) psi = 0`.
    Single {
        /// Coupling, e.g. `0.5` or `0.3+0.2i`; requires `|alpha| < 1`.
        #[arg(long)]
        alpha: String,
        /// Fock cutoff; defaults to the smallest even cutoff with a
        /// truncation tail below 1e-12.
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Two-mode squeezed vacuum for the coupled pair of conditions.
    Two {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        cutoff: Option<usize>,
    },
}

#[derive(Subcommand)]
enum EquivCmd {
    /// Fidelity of `S(xi)|0>` against the normalized `exp(alpha a^dag^2/2)|0>`.
    Single {
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Fidelity of `T(xi)|0,0>` against the normalized `exp(alpha a^dag b^dag)|0,0>`.
    Two {
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        cutoff: Option<usize>,
    },
}

#[derive(Subcommand)]
enum NogoCmd {
    /// Kernel scan of the cyclic system across cutoffs, with a verdict.
    Scan {
        #[arg(long)]
        modes: usize,
        /// Comma-separated couplings (one value broadcasts to all modes).
        #[arg(long)]
        alpha: String,
        /// Ascending cutoffs, at least three, e.g. `4,5,6,7`.
        #[arg(long, value_delimiter = ',')]
        cutoffs: Vec<usize>,
        /// Relative SVD tolerance for kernel membership.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Product-of-pairs state: per-pair conditions hold, the cycle fails.
    PairwiseChain {
        #[arg(long)]
        modes: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 32)]
        cutoff: usize,
    },
}

#[derive(Subcommand)]
enum TfdCmd {
    /// Per-frequency squeezing spectrum, CSV by default.
    Spectrum {
        /// Inverse Unruh temperature.
        #[arg(long)]
        beta: f64,
        /// Frequency grid as `min:max:points:grid` with grid `lin` or `log`.
        #[arg(long)]
        omega: String,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Generating-function, commutator, and off-diagonal identity checks.
    Appendix,
}

enum CliError {
    Usage(String),
    Domain(squeezekit::Error),
}

impl From<squeezekit::Error> for CliError {
    fn from(e: squeezekit::Error) -> Self {
        CliError::Domain(e)
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SQUEEZEKIT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let format = cli.format;
    let is_spectrum = matches!(
        cli.command,
        Command::Tfd { which: TfdCmd::Spectrum { .. } }
    );
    if format == Some(OutputFormat::Csv) && !is_spectrum {
        return Err(CliError::Usage(
            "csv output is only available for `tfd spectrum`".into(),
        ));
    }

    let bytes = match cli.command {
        Command::Squeeze { which } => match which {
            SqueezeCmd::Single { alpha, cutoff } => run_squeeze_single(&alpha, cutoff)?,
            SqueezeCmd::Two { alpha, cutoff } => run_squeeze_two(&alpha, cutoff)?,
        },
        Command::Equiv { which } => match which {
            EquivCmd::Single { r, theta, cutoff } => run_equiv(r, theta, cutoff, true)?,
            EquivCmd::Two { r, theta, cutoff } => run_equiv(r, theta, cutoff, false)?,
        },
        Command::Nogo { which } => match which {
            NogoCmd::Scan { modes, alpha, cutoffs, tol } => {
                run_nogo_scan(modes, &alpha, &cutoffs, tol)?
            }
            NogoCmd::PairwiseChain { modes, alpha, cutoff } => {
                run_pairwise(modes, &alpha, cutoff)?
            }
        },
        Command::Tfd { which } => match which {
            TfdCmd::Spectrum { beta, omega } => {
                run_tfd_spectrum(beta, &omega, format.unwrap_or(OutputFormat::Csv))?
            }
        },
        Command::Check { which } => match which {
            CheckCmd::Appendix => run_check_appendix(cli.seed.unwrap_or(0))?,
        },
    };

    match &cli.output {
        Some(path) => write_atomic(path, &bytes).map_err(CliError::Domain)?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Domain(e.into()))?;
        }
    }
    Ok(())
}

fn parse_complex(s: &str) -> Result<C64, CliError> {
    let t: String = s.trim().replace(' ', "");
    if t.is_empty() {
        return Err(CliError::Usage("empty complex literal".into()));
    }
    let parse_re = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("cannot parse '{p}' as a real number")))
    };
    let parse_im = |p: &str| -> Result<f64, CliError> {
        let body = p
            .strip_suffix('i')
            .ok_or_else(|| CliError::Usage(format!("expected an 'i' suffix in '{p}'")))?;
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => body
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse '{p}' as imaginary"))),
        }
    };
    let bytes = t.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    if t.ends_with('i') {
        if let Some(i) = split {
            let (re_s, im_s) = t.split_at(i);
            return Ok(C64::new(parse_re(re_s)?, parse_im(im_s)?));
        }
        return Ok(C64::new(0.0, parse_im(&t)?));
    }
    Ok(C64::new(parse_re(&t)?, 0.0))
}

fn parse_alpha_list(s: &str, modes: usize) -> Result<Vec<C64>, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    let values: Vec<C64> = parts
        .iter()
        .map(|p| parse_complex(p))
        .collect::<Result<_, _>>()?;
    if values.len() == 1 {
        return Ok(vec![values[0]; modes]);
    }
    if values.len() != modes {
        return Err(CliError::Usage(format!(
            "{} couplings given for {modes} modes",
            values.len()
        )));
    }
    Ok(values)
}

fn resolve_cutoff(alpha_abs: f64, requested: Option<usize>) -> Result<usize, CliError> {
    match requested {
        Some(k) => Ok(k),
        None => Ok(auto_cutoff(alpha_abs, DEFAULT_CUTOFF_EPS)?),
    }
}

fn run_squeeze_single(alpha_arg: &str, cutoff_arg: Option<usize>) -> Result<Vec<u8>, CliError> {
    let alpha = parse_complex(alpha_arg)?;
    let param = SqueezeParamAlpha::single(alpha)?;
    let cutoff = resolve_cutoff(param.abs(), cutoff_arg)?;
    let cf = smsv_closed_form(&param, cutoff)?;
    let config = json!({
        "command": "squeeze single",
        "alpha": complex_pair(alpha),
        "cutoff": cutoff,
        "format": "json",
    });
    let doc = SqueezeDoc {
        schema_version: SCHEMA_VERSION.to_string(),
        config,
        alpha: complex_pair(alpha),
        cutoff,
        truncation_deficit: cf.truncation_deficit,
        c0: complex_pair(cf.state.amplitude(&[0])?),
        mean_occupation: cf.state.mean_occupation(1)?,
        defining_residuals: vec![constraint_residual(&cf.state, 1, 1, alpha)?],
        state: StateDoc::from_state(&cf.state),
    };
    Ok(to_json_bytes(&doc)?)
}

fn run_squeeze_two(alpha_arg: &str, cutoff_arg: Option<usize>) -> Result<Vec<u8>, CliError> {
    let alpha = parse_complex(alpha_arg)?;
    let param = SqueezeParamAlpha::two(alpha)?;
    let cutoff = resolve_cutoff(param.abs(), cutoff_arg)?;
    let cf = tmsv_closed_form(&param, cutoff)?;
    let config = json!({
        "command": "squeeze two",
        "alpha": complex_pair(alpha),
        "cutoff": cutoff,
        "format": "json",
    });
    let doc = SqueezeDoc {
        schema_version: SCHEMA_VERSION.to_string(),
        config,
        alpha: complex_pair(alpha),
        cutoff,
        truncation_deficit: cf.truncation_deficit,
        c0: complex_pair(cf.state.amplitude(&[0, 0])?),
        mean_occupation: cf.state.mean_occupation(1)?,
        defining_residuals: vec![
            constraint_residual(&cf.state, 1, 2, alpha)?,
            constraint_residual(&cf.state, 2, 1, alpha)?,
        ],
        state: StateDoc::from_state(&cf.state),
    };
    Ok(to_json_bytes(&doc)?)
}

fn run_equiv(
    r: f64,
    theta: f64,
    cutoff_arg: Option<usize>,
    single: bool,
) -> Result<Vec<u8>, CliError> {
    let xi = SqueezeParamXi::new(r, theta)?;
    let context = if single {
        AlphaContext::SingleMode
    } else {
        AlphaContext::TwoMode
    };
    let alpha = alpha_from_xi(&xi, context)?;
    let cutoff = resolve_cutoff(alpha.abs(), cutoff_arg)?;
    let (unitary_state, exp_state) = if single {
        (
            squeeze_single(&xi, cutoff)?,
            exp_quadratic_single(alpha.value(), cutoff)?.state,
        )
    } else {
        (
            squeeze_two(&xi, cutoff)?,
            exp_pair_coupling(alpha.value(), cutoff)?.state,
        )
    };
    let fid = fidelity(&unitary_state, &exp_state)?;
    let config = json!({
        "command": if single { "equiv single" } else { "equiv two" },
        "r": r,
        "theta": xi.theta(),
        "cutoff": cutoff,
        "format": "json",
    });
    let doc = EquivDoc {
        schema_version: SCHEMA_VERSION.to_string(),
        config,
        context: if single { "single".into() } else { "two".into() },
        r: xi.r(),
        theta: xi.theta(),
        alpha: complex_pair(alpha.value()),
        cutoff,
        fidelity: fid,
        fidelity_deficit: 1.0 - fid,
        unitary_norm_deficit: (unitary_state.norm() - 1.0).abs(),
        pass: fid >= 1.0 - 1e-8,
    };
    Ok(to_json_bytes(&doc)?)
}

fn run_nogo_scan(
    modes: usize,
    alpha_arg: &str,
    cutoffs: &[usize],
    tol: Option<f64>,
) -> Result<Vec<u8>, CliError> {
    let alphas = parse_alpha_list(alpha_arg, modes)?;
    let tol = tol.unwrap_or(DEFAULT_KERNEL_TOL);
    let budget = MemoryBudget::default();
    let reports = cutoff_scan(modes, &alphas, cutoffs, tol, &budget)?;
    let verdict = classify(&reports, &alphas);
    let config = json!({
        "command": "nogo scan",
        "modes": modes,
        "alpha": alphas.iter().map(|&a| complex_pair(a)).collect::<Vec<_>>(),
        "cutoffs": cutoffs,
        "tolerance": tol,
        "max_rows": budget.max_rows,
        "format": "json",
    });
    Ok(to_json_bytes(&NogoScanDoc::new(config, &verdict, &reports))?)
}

fn run_pairwise(modes: usize, alpha_arg: &str, cutoff: usize) -> Result<Vec<u8>, CliError> {
    let alphas = parse_alpha_list(alpha_arg, modes)?;
    let report = pairwise_chain_check(modes, &alphas, cutoff)?;
    let config = json!({
        "command": "nogo pairwise-chain",
        "modes": modes,
        "alpha": alphas.iter().map(|&a| complex_pair(a)).collect::<Vec<_>>(),
        "cutoff": cutoff,
        "format": "json",
    });
    let doc = PairwiseChainDoc {
        schema_version: SCHEMA_VERSION.to_string(),
        config,
        pair_residuals: report.pair_residuals,
        cyclic_residuals: report.cyclic_residuals,
        max_pair_residual: report.max_pair_residual,
        min_linking_residual: report.min_linking_residual,
    };
    Ok(to_json_bytes(&doc)?)
}

fn parse_omega_spec(s: &str) -> Result<(f64, f64, usize, GridKind), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!(
            "omega grid must be min:max:points:grid, got '{s}'"
        )));
    }
    let min = parts[0]
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("bad omega min '{}'", parts[0])))?;
    let max = parts[1]
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("bad omega max '{}'", parts[1])))?;
    let points = parts[2]
        .parse::<usize>()
        .map_err(|_| CliError::Usage(format!("bad point count '{}'", parts[2])))?;
    let grid = match parts[3] {
        "lin" | "linear" => GridKind::Linear,
        "log" | "logarithmic" => GridKind::Logarithmic,
        other => {
            return Err(CliError::Usage(format!(
                "grid must be lin or log, got '{other}'"
            )))
        }
    };
    Ok((min, max, points, grid))
}

fn run_tfd_spectrum(
    beta: f64,
    omega_arg: &str,
    format: OutputFormat,
) -> Result<Vec<u8>, CliError> {
    let (omega_min, omega_max, points, grid) = parse_omega_spec(omega_arg)?;
    let config = TfdConfig::new(beta, omega_min, omega_max, points, grid)?;
    let rows = tfd_spectrum(&config)?;
    match format {
        OutputFormat::Csv => Ok(spectrum_to_csv(&rows).into_bytes()),
        OutputFormat::Json => {
            let config_json = json!({
                "command": "tfd spectrum",
                "beta": beta,
                "omega_min": omega_min,
                "omega_max": omega_max,
                "num_points": points,
                "grid": if grid == GridKind::Linear { "linear" } else { "logarithmic" },
                "format": "json",
            });
            let doc = TfdSpectrumDoc {
                schema_version: SCHEMA_VERSION.to_string(),
                config: config_json,
                rows: rows.iter().map(TfdRowDoc::from_row).collect(),
            };
            Ok(to_json_bytes(&doc)?)
        }
    }
}

fn run_check_appendix(seed: u64) -> Result<Vec<u8>, CliError> {
    // generating function for the double factorial ratio
    let mut generating_function = Vec::new();
    for (x, terms) in [(0.25, 60usize), (-0.5, 80), (0.6, 100)] {
        let partial_sum = gen_fn_partial_sum(x, terms)?;
        let exact = (1.0 - x).powf(-0.5);
        generating_function.push(GenFnCheckDoc {
            x,
            terms,
            partial_sum,
            exact,
            abs_error: (partial_sum - exact).abs(),
        });
    }

    // commutator identity on fixed and seeded-random couplings
    let cutoff = 60;
    let window = 20;
    let mut draws = vec![C64::new(0.5, 0.0), C64::new(0.0, 0.3)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..3 {
        let radius = 0.8 * rng.gen::<f64>().sqrt();
        let angle = std::f64::consts::TAU * rng.gen::<f64>();
        draws.push(C64::from_polar(radius, angle));
    }
    let mut commutator = Vec::new();
    for alpha in draws {
        let residual = commutator_check_single(alpha, cutoff, window)?;
        commutator.push(CommutatorCheckDoc {
            alpha: complex_pair(alpha),
            cutoff,
            window,
            residual,
        });
    }

    // off-diagonal coefficients: closed form and numerical kernel basis
    let alpha = C64::new(0.5, 0.0);
    let tmsv = tmsv_closed_form(&SqueezeParamAlpha::two(alpha)?, 40)?.state;
    let mut closed_form_max = 0.0f64;
    for m in 0..=40usize {
        for n in 0..=40usize {
            if m != n {
                closed_form_max = closed_form_max.max(tmsv.amplitude(&[m, n])?.norm());
            }
        }
    }
    let system = ConstraintSystem::new(2, vec![alpha, alpha], 20)?;
    let matrix = build_constraint_matrix(&system, &MemoryBudget::default())?;
    let report = kernel_analysis(&matrix, 1e-3)?;
    let mut kernel_basis_max = 0.0f64;
    for basis in &report.kernel_basis {
        for m in 0..=20usize {
            for n in 0..=20usize {
                if m != n {
                    kernel_basis_max = kernel_basis_max.max(basis.amplitude(&[m, n])?.norm());
                }
            }
        }
    }

    let config = json!({
        "command": "check appendix",
        "seed": seed,
        "commutator_cutoff": cutoff,
        "commutator_window": window,
        "off_diagonal_alpha": complex_pair(alpha),
        "format": "json",
    });
    let doc = AppendixDoc {
        schema_version: SCHEMA_VERSION.to_string(),
        config,
        generating_function,
        commutator,
        off_diagonal: OffDiagonalCheckDoc {
            alpha: complex_pair(alpha),
            cutoff: 40,
            closed_form_max,
            kernel_basis_max,
        },
    };
    Ok(to_json_bytes(&doc)?)
}
