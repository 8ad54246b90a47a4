//! Command-line front end.
//!
//! Exit codes: 0 success or admissible, 2 usage/config/runtime error,
//! 3 not admissible, 4 empty band, 5 degenerate fit.

use crate::admissibility::{check_admissible, Verdict};
use crate::config::{ExperimentConfig, IntegrandConfig};
use crate::eigensolve::cache::{cache_dir, load_or_solve, CacheStatus};
use crate::eigensolve::joint_eigenfunctions;
use crate::lineintegral::{integrate_adaptive, SphericalHarmonic, SurfaceFunction};
use crate::specfun::HarmonicIndex;
use crate::sweep::{
    default_equator_arc, load_report, run_custom_sweep, run_tesseral_sweep, run_transition_peak_sweep,
    run_zonal_sweep, save_report, write_atomic, Experiment, SweepError, SweepReport,
};
use crate::symbol::MomentMap;
use clap::{Parser, Subcommand};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_ADMISSIBLE: i32 = 3;
pub const EXIT_EMPTY_BAND: i32 = 4;
pub const EXIT_FIT_DEGENERATE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "qcilab", version, about = "Geodesic restriction experiments for integrable Laplacians")]
pub struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for reports, plot data and the eigenpair cache.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Reserved; accepted and ignored (all computations are deterministic).
    #[arg(long, global = true, value_name = "SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check admissibility of the configured geodesic; verdict in the exit code.
    Admissible,
    /// Solve for joint eigenpairs and print the eigenvalue table.
    Eigen,
    /// Integrate the configured integrand over the configured geodesic.
    Integrate,
    /// Run a sweep, save CSV + JSON, print the fitted slope.
    Sweep,
    /// Turn a saved sweep report into two-column plot data.
    Plotdata {
        /// Report CSV written by `sweep`.
        report: PathBuf,
    },
}

/// A failure with its exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs a parsed command line, writing results to `out` and notes to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Some(n) = cli.threads {
        if n == 0 {
            let _ = writeln!(err, "error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // Fails only if a pool already exists (e.g. repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Admissible => cmd_admissible(cli, out),
        Command::Eigen => cmd_eigen(cli, out, err),
        Command::Integrate => cmd_integrate(cli, out),
        Command::Sweep => cmd_sweep(cli, out),
        Command::Plotdata { report } => cmd_plotdata(cli, report, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::usage("this command needs --config <path>"))?;
    ExperimentConfig::from_path(path).map_err(Failure::usage)
}

fn out_dir(cli: &Cli, config: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| config.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::usage(format!("cannot write output: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn cmd_admissible(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let config = load_config(cli)?;
    let profile = config.profile_function().map_err(Failure::usage)?;
    let geodesic = config.geodesic(&profile).map_err(Failure::usage)?;
    let energies = config
        .energies
        .ok_or_else(|| Failure::usage("invalid config: missing `energies` section"))?;
    let map = MomentMap::from_sources(&profile, config.p1.as_deref(), config.p2.as_deref())
        .map_err(|e| Failure::usage(format!("symbol: {e}")))?;
    let report = check_admissible(
        &map,
        &geodesic,
        energies,
        config.admissibility.grid(),
        config.admissibility.threshold,
    )
    .map_err(|e| Failure::usage(format!("admissibility: {e}")))?;
    emit(out, &to_json(&report))?;
    Ok(match report.verdict {
        Verdict::Admissible => EXIT_OK,
        Verdict::NotAdmissible => EXIT_NOT_ADMISSIBLE,
        Verdict::EmptyBand => EXIT_EMPTY_BAND,
    })
}

fn cmd_eigen(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let config = load_config(cli)?;
    let profile = config.profile_function().map_err(Failure::usage)?;
    let eigen = config
        .eigen
        .ok_or_else(|| Failure::usage("invalid config: missing `eigen` section"))?;
    let root = config
        .output
        .cache_dir
        .clone()
        .unwrap_or_else(|| out_dir(cli, Some(&config)).join("cache"));
    let (modes, status) =
        load_or_solve(&root, &profile, eigen.k, eigen.n, eigen.count).map_err(|e| Failure::usage(format!("eigen: {e}")))?;
    if status == CacheStatus::Hit {
        let _ = writeln!(err, "cache hit: {}", cache_dir(&root, &profile, eigen.k, eigen.n).display());
    }
    let mut table = format!("# k={} n={} count={}\nindex,lambda,h\n", eigen.k, eigen.n, eigen.count);
    for m in &modes {
        let _ = writeln!(table, "{},{:.6},{:.9e}", m.l_index, m.lambda, m.h);
    }
    emit(out, &table)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct IntegralOutput {
    h: f64,
    re: f64,
    im: f64,
    abs: f64,
    error_estimate: f64,
    length: f64,
}

fn cmd_integrate(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let config = load_config(cli)?;
    let profile = config.profile_function().map_err(Failure::usage)?;
    let geodesic = config.geodesic(&profile).map_err(Failure::usage)?;
    let integrand = config
        .integrand
        .ok_or_else(|| Failure::usage("invalid config: missing `integrand` section"))?;
    let eigenfunction;
    let harmonic;
    let (u, h): (&dyn SurfaceFunction, f64) = match integrand {
        IntegrandConfig::Harmonic { l, k } => {
            if !profile.is_round_sphere() {
                return Err(Failure::usage("integrand: closed-form harmonics need the sphere profile"));
            }
            let idx = HarmonicIndex::new(l, k).map_err(|e| Failure::usage(format!("integrand: {e}")))?;
            harmonic = SphericalHarmonic { l, k };
            (&harmonic, idx.h().map_err(|e| Failure::usage(format!("integrand: {e}")))?)
        }
        IntegrandConfig::Eigenfunction { k, index, n } => {
            let n = n.unwrap_or_else(|| crate::sweep::custom_grid(k, index));
            let mut modes =
                joint_eigenfunctions(&profile, k, n, index + 1).map_err(|e| Failure::usage(format!("eigen: {e}")))?;
            eigenfunction = modes.swap_remove(index);
            if !eigenfunction.h.is_finite() {
                return Err(Failure::usage("integrand: the constant mode has no semiclassical parameter"));
            }
            (&eigenfunction, eigenfunction.h)
        }
    };
    let (value, error_estimate) =
        integrate_adaptive(u, &geodesic, &config.quadrature, h).map_err(|e| Failure::usage(format!("quadrature: {e}")))?;
    let result = IntegralOutput {
        h,
        re: value.re,
        im: value.im,
        abs: value.norm(),
        error_estimate,
        length: geodesic.length(),
    };
    emit(out, &to_json(&result))?;
    Ok(EXIT_OK)
}

fn sweep_failure(e: SweepError) -> Failure {
    let code = match e {
        SweepError::Fit(_) => EXIT_FIT_DEGENERATE,
        _ => EXIT_USAGE,
    };
    Failure {
        code,
        message: format!("sweep: {e}"),
    }
}

/// Runs the sweep described by `config`.
pub fn run_configured_sweep(config: &ExperimentConfig) -> Result<SweepReport, Failure> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Failure::usage("invalid config: missing `sweep` section"))?;
    let ks = sweep.k_values().map_err(Failure::usage)?;
    let profile = config.profile_function().map_err(Failure::usage)?;
    let spec = &config.quadrature;
    let report = match sweep.experiment {
        Experiment::ZonalEquator => {
            let arc = match &config.geodesic {
                Some(g) => g.build(&profile).map_err(Failure::usage)?,
                None => default_equator_arc(),
            };
            run_zonal_sweep(&ks, &arc, spec)
        }
        Experiment::TesseralCaustic => run_tesseral_sweep(&ks, sweep.delta0(), &profile, sweep.arc, spec),
        Experiment::TransitionPeak => {
            if !profile.is_round_sphere() {
                return Err(Failure::usage("sweep: transition-peak needs the sphere profile"));
            }
            run_transition_peak_sweep(&ks, sweep.width())
        }
        Experiment::Custom => {
            let arc = config.geodesic(&profile).map_err(Failure::usage)?;
            run_custom_sweep(&ks, sweep.family, &arc, sweep.n, spec)
        }
    };
    report.map_err(sweep_failure)
}

fn cmd_sweep(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let config = load_config(cli)?;
    let report = run_configured_sweep(&config)?;
    let name = config
        .output
        .report
        .clone()
        .unwrap_or_else(|| format!("{}.csv", report.experiment.name()));
    let path = out_dir(cli, Some(&config)).join(name);
    save_report(&report, &path).map_err(|e| Failure::usage(format!("cannot save report: {e}")))?;
    emit(
        out,
        &format!(
            "slope={} R2={}\n",
            report.slope.expect("fitted report"),
            report.r_squared.expect("fitted report")
        ),
    )?;
    Ok(EXIT_OK)
}

/// Plot text for a report: `#` comment header, then `log h  log|I|` rows.
pub fn plot_text(report: &SweepReport) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
    let mut text = format!("# experiment: {}\n", report.experiment.name());
    let _ = writeln!(text, "# columns: log_h log_abs_I");
    let _ = writeln!(text, "# fit: log_abs_I = slope * log_h + intercept_logC");
    let _ = writeln!(text, "# slope: {}", opt(report.slope));
    let _ = writeln!(text, "# intercept_logC: {}", opt(report.intercept_log_c));
    let _ = writeln!(text, "# r_squared: {}", opt(report.r_squared));
    for row in &report.rows {
        if row.abs_i > 0.0 {
            let _ = writeln!(text, "{:.12e} {:.12e}", row.h.ln(), row.abs_i.ln());
        } else {
            let _ = writeln!(text, "# k={} l={}: zero magnitude, no data point", row.k, row.l);
        }
    }
    text
}

fn cmd_plotdata(cli: &Cli, report_path: &Path, out: &mut dyn Write) -> Outcome {
    let report = load_report(report_path).map_err(|e| Failure::usage(format!("report: {e}")))?;
    let text = plot_text(&report);
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
        let stem = report_path.file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
        write_atomic(&dir.join(format!("{stem}.dat")), &text)
            .map_err(|e| Failure::usage(format!("cannot write plot data: {e}")))?;
    }
    emit(out, &text)?;
    Ok(EXIT_OK)
}
