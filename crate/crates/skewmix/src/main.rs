//! Command-line front end: reads a distribution specification as JSON,
//! runs one pipeline stage, and writes a JSON (or CSV) report.
//!
//! Exit codes: 0 success; 2 malformed input (bad JSON, invalid parameters);
//! 3 operation undefined for the distribution (missing mixing moments,
//! proportional scatter pair); 4 numerical failure or failed validation.

use std::fs;
use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use skewmix::canonical::{self, CanonicalMethod};
use skewmix::distributions::ScaleMixtureSN;
use skewmix::error::Error;
use skewmix::io as sio;
use skewmix::mc_oracle;
use skewmix::mode;
use skewmix::moments;

#[derive(Parser)]
#[command(
    name = "skewmix",
    version,
    about = "Scale mixtures of multivariate skew-normal distributions: \
             canonical transforms, skewness/kurtosis indices, and modes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct IoArgs {
    /// Input JSON file with the distribution specification; `-` reads stdin.
    #[arg(long, short = 'i', default_value = "-")]
    input: String,
    /// Output file; omitted means stdout.
    #[arg(long, short = 'o')]
    output: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Cholesky factor of the scale matrix plus an orthogonal completion.
    Cp,
    /// Joint diagonalization of the scale matrix and the covariance.
    OmegaSigma,
    /// Joint diagonalization of the covariance and a fourth-moment scatter.
    SigmaKappa,
}

impl MethodArg {
    fn to_method(self) -> CanonicalMethod {
        match self {
            MethodArg::Cp => CanonicalMethod::Cp,
            MethodArg::OmegaSigma => CanonicalMethod::IcsOmegaSigma,
            MethodArg::SigmaKappa => CanonicalMethod::IcsSigmaKappa,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Report the parameters and derived summaries (overlap vector, scalar
    /// shape, mean, covariance) of a distribution.
    Describe {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Compute a canonicalizing transform `H` and the canonical form.
    Canonicalize {
        #[command(flatten)]
        io: IoArgs,
        /// Construction to use.
        #[arg(long, value_enum, default_value_t = MethodArg::Cp)]
        method: MethodArg,
        /// Power of the radius weight in the fourth-moment scatter
        /// (sigma-kappa method only).
        #[arg(long, default_value_t = 1)]
        exponent: u32,
        /// Verify the transform against the source distribution and embed
        /// the deviations in the report.
        #[arg(long)]
        verify: bool,
    },
    /// Compute the closed-form skewness/kurtosis indices, optionally with a
    /// Monte-Carlo cross-check.
    Indices {
        #[command(flatten)]
        io: IoArgs,
        /// Draw this many samples and report the sample statistics
        /// alongside the closed forms.
        #[arg(long)]
        mc: Option<usize>,
        /// Random seed for the Monte-Carlo sample.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Bootstrap resamples for standard errors (0 disables).
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
    },
    /// Locate the mode by root finding on the canonical axis.
    Mode {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Draw samples and write them as headerless CSV, one row per draw.
    Sample {
        #[command(flatten)]
        io: IoArgs,
        /// Number of draws.
        #[arg(long)]
        n: usize,
        /// Random seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Cross-validate the closed-form results against the built-in
    /// Monte-Carlo and grid-search oracles; exits 4 if any check fails.
    Validate {
        #[command(flatten)]
        io: IoArgs,
        /// Monte-Carlo sample size.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// Random seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override a tolerance, e.g. `--tol mc_z=8`. Keys: mc_z, mean_z,
        /// normalization, shape, grid_margin.
        #[arg(long = "tol", value_parser = parse_tol)]
        tol: Vec<(String, f64)>,
    },
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (key, val) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let val: f64 = val
        .parse()
        .map_err(|_| format!("tolerance value '{val}' is not a number"))?;
    if !(val > 0.0) {
        return Err(format!("tolerance must be positive, got {val}"));
    }
    Ok((key.to_string(), val))
}

/// Thresholds used by `validate`, echoed in its report.
#[derive(Serialize, Clone, Copy)]
struct Tolerances {
    /// Bootstrap z-score limit for sample vs closed-form indices.
    mc_z: f64,
    /// z-score limit for the sample mean against the analytic mean.
    mean_z: f64,
    /// Identity deviation limit for the normalized matrix.
    normalization: f64,
    /// Canonical-shape deviation limit, scaled by `1 + alpha_star`.
    shape: f64,
    /// Allowed mode discrepancy in units of the final grid step.
    grid_margin: f64,
}

impl Tolerances {
    fn with_overrides(overrides: &[(String, f64)]) -> Result<Self, Error> {
        let mut t = Tolerances {
            mc_z: 6.0,
            mean_z: 6.0,
            normalization: 1e-8,
            shape: 1e-6,
            grid_margin: 1.5,
        };
        for (key, val) in overrides {
            match key.as_str() {
                "mc_z" => t.mc_z = *val,
                "mean_z" => t.mean_z = *val,
                "normalization" => t.normalization = *val,
                "shape" => t.shape = *val,
                "grid_margin" => t.grid_margin = *val,
                other => {
                    return Err(Error::InvalidArgument {
                        what: format!(
                            "unknown tolerance '{other}' (expected mc_z, mean_z, \
                             normalization, shape, or grid_margin)"
                        ),
                    })
                }
            }
        }
        Ok(t)
    }
}

#[derive(Serialize)]
struct CheckReport {
    name: String,
    /// `"pass"`, `"fail"`, or `"skipped"` (not applicable here).
    status: String,
    detail: String,
}

#[derive(Serialize)]
struct ValidateReport {
    passed: bool,
    n: usize,
    seed: u64,
    tolerances: Tolerances,
    checks: Vec<CheckReport>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e.class() {
        skewmix::ErrorClass::InvalidInput => 2,
        skewmix::ErrorClass::Unsupported => 3,
        skewmix::ErrorClass::Numerical => 4,
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    let mut text = String::new();
    let outcome = if path == "-" {
        std::io::stdin().read_to_string(&mut text)
    } else {
        fs::File::open(path).and_then(|mut f| f.read_to_string(&mut text))
    };
    outcome.map_err(|e| Error::InvalidArgument {
        what: format!("cannot read '{path}': {e}"),
    })?;
    Ok(text)
}

fn write_output(path: &Option<String>, content: &str) -> Result<(), Error> {
    let outcome = match path {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())
                .and_then(|_| lock.write_all(b"\n"))
        }
        Some(p) => fs::write(p, format!("{content}\n")),
    };
    outcome.map_err(|e| Error::InvalidArgument {
        what: format!("cannot write output: {e}"),
    })
}

fn load(io: &IoArgs) -> Result<ScaleMixtureSN, Error> {
    sio::parse_spec(&read_input(&io.input)?)?.to_distribution()
}

fn run(cmd: Cmd) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::Describe { io } => {
            let report = sio::describe_report(&load(&io)?)?;
            write_output(&io.output, &sio::to_json(&report)?)?;
        }
        Cmd::Canonicalize {
            io,
            method,
            exponent,
            verify,
        } => {
            let report =
                sio::canonicalize_report(&load(&io)?, method.to_method(), exponent, verify)?;
            write_output(&io.output, &sio::to_json(&report)?)?;
        }
        Cmd::Indices {
            io,
            mc,
            seed,
            bootstrap,
        } => {
            let mc = mc.map(|n| (n, seed, bootstrap));
            let report = sio::indices_report(&load(&io)?, mc)?;
            write_output(&io.output, &sio::to_json(&report)?)?;
        }
        Cmd::Mode { io } => {
            let report = sio::mode_report(&load(&io)?)?;
            write_output(&io.output, &sio::to_json(&report)?)?;
        }
        Cmd::Sample { io, n, seed } => {
            let samples = load(&io)?.sample(n, seed)?;
            let mut buf = Vec::new();
            sio::write_samples_csv(&mut buf, &samples)?;
            let text = String::from_utf8(buf).expect("CSV output is UTF-8");
            // write_output appends the trailing newline the CSV writer
            // already produced, so strip one.
            write_output(&io.output, text.trim_end_matches('\n'))?;
        }
        Cmd::Validate { io, n, seed, tol } => {
            let smsn = load(&io)?;
            let tolerances = Tolerances::with_overrides(&tol)?;
            let report = validate(&smsn, n, seed, tolerances)?;
            let passed = report.passed;
            write_output(&io.output, &sio::to_json(&report)?)?;
            if !passed {
                return Ok(ExitCode::from(4));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Runs every cross-check that applies to the distribution. A check that
/// does not apply (missing moments, dimension too high for the grid) is
/// reported as skipped, not failed.
fn validate(
    smsn: &ScaleMixtureSN,
    n: usize,
    seed: u64,
    tol: Tolerances,
) -> Result<ValidateReport, Error> {
    let mut checks = Vec::new();
    let samples = smsn.sample(n, seed)?;

    // Sample mean against the analytic mean, coordinate by coordinate.
    match moments::mean_cov(smsn) {
        Ok((mean, cov)) => {
            let d = smsn.dim();
            let mut worst = 0.0f64;
            for k in 0..d {
                let avg = samples.column(k).sum() / n as f64;
                let se = (cov[(k, k)] / n as f64).sqrt();
                worst = worst.max((avg - mean[k]).abs() / se);
            }
            push_check(
                &mut checks,
                "sample_mean",
                worst <= tol.mean_z,
                format!("worst coordinate z-score {worst:.3} (limit {})", tol.mean_z),
            );
        }
        Err(Error::MomentNotFinite { required }) => {
            skip_check(&mut checks, "sample_mean", format!("requires {required}"));
        }
        Err(e) => return Err(e),
    }

    // Sample Mardia statistics against the closed-form indices, with
    // bootstrap standard errors setting the scale. A z-test is only
    // meaningful when the sample statistic obeys a central limit theorem:
    // the skewness statistic needs finite sixth mixing moments and the
    // kurtosis statistic finite eighth; without them the statistic still
    // converges but with heavy-tailed fluctuations no bootstrap standard
    // error can calibrate, so the check is reported as skipped.
    let mardia = moments::mardia_indices(smsn)?;
    let clt1 = smsn.mixing().moment(6);
    let clt2 = smsn.mixing().moment(8);
    let testable1 = mardia.gamma1.filter(|_| clt1.is_ok());
    let testable2 = mardia.gamma2.filter(|_| clt2.is_ok());
    if testable1.is_some() || testable2.is_some() {
        let em = mc_oracle::empirical_mardia(&samples)?;
        let bs = mc_oracle::bootstrap_mardia(&samples, 100, seed ^ 0x9e37_79b9)?;
        if let Some(g1) = testable1 {
            let z = (em.b1 - g1).abs() / bs.b1_se.max(f64::MIN_POSITIVE);
            push_check(
                &mut checks,
                "skewness_index_mc",
                z <= tol.mc_z,
                format!(
                    "closed form {g1:.6}, sample {:.6}, z-score {z:.3} (limit {})",
                    em.b1, tol.mc_z
                ),
            );
        }
        if let Some(g2) = testable2 {
            let d = smsn.dim() as f64;
            let target = g2 + d * (d + 2.0);
            let z = (em.b2 - target).abs() / bs.b2_se.max(f64::MIN_POSITIVE);
            push_check(
                &mut checks,
                "kurtosis_index_mc",
                z <= tol.mc_z,
                format!(
                    "closed form {target:.6}, sample {:.6}, z-score {z:.3} (limit {})",
                    em.b2, tol.mc_z
                ),
            );
        }
    }
    if testable1.is_none() {
        let why = match (&mardia.gamma1_blocked_by, &clt1) {
            (Some(blocked), _) => format!("index undefined: requires {blocked}"),
            (None, Err(e)) => format!("no central-limit backing for the z-test: {e}"),
            _ => unreachable!("gamma1 present and sixth moment finite"),
        };
        skip_check(&mut checks, "skewness_index_mc", why);
    }
    if testable2.is_none() {
        let why = match (&mardia.gamma2_blocked_by, &clt2) {
            (Some(blocked), _) => format!("index undefined: requires {blocked}"),
            (None, Err(e)) => format!("no central-limit backing for the z-test: {e}"),
            _ => unreachable!("gamma2 present and eighth moment finite"),
        };
        skip_check(&mut checks, "kurtosis_index_mc", why);
    }

    // Each canonical construction, verified against the source parameters.
    for (name, method) in [
        ("canonical_cp", CanonicalMethod::Cp),
        ("canonical_omega_sigma", CanonicalMethod::IcsOmegaSigma),
        ("canonical_sigma_kappa", CanonicalMethod::IcsSigmaKappa),
    ] {
        match canonical::canonical(smsn, method, 1) {
            Ok(t) => {
                let check = canonical::verify_canonical(smsn, &t)?;
                let shape_limit = tol.shape * (1.0 + check.alpha_star);
                let ok = check.max_normalization_deviation <= tol.normalization
                    && check.max_shape_deviation <= shape_limit;
                push_check(
                    &mut checks,
                    name,
                    ok,
                    format!(
                        "{} deviation {:.3e} (limit {:.1e}), shape deviation {:.3e} (limit {:.1e})",
                        check.normalized_matrix,
                        check.max_normalization_deviation,
                        tol.normalization,
                        check.max_shape_deviation,
                        shape_limit
                    ),
                );
            }
            Err(
                e @ (Error::MomentNotFinite { .. } | Error::DegenerateScatterPair { .. }),
            ) => {
                skip_check(&mut checks, name, format!("not applicable: {e}"));
            }
            Err(e) => return Err(e),
        }
    }

    // Root-finding mode against the dense grid oracle.
    if smsn.dim() <= 3 {
        match mode::smsn_mode(smsn) {
            Ok(m) => {
                let grid = mc_oracle::grid_mode_search(smsn, 3.0, 17)?;
                let mut worst = 0.0f64;
                for k in 0..smsn.dim() {
                    worst = worst.max((m.mode[k] - grid.mode[k]).abs() / grid.step[k]);
                }
                let exact_density = smsn.density(&m.mode)?;
                // The root-finding mode must sit within a grid cell of the
                // grid optimum and have at least as high a density.
                let ok = worst <= tol.grid_margin
                    && exact_density >= grid.density * (1.0 - 1e-9);
                push_check(
                    &mut checks,
                    "mode_grid",
                    ok,
                    format!(
                        "worst axis offset {worst:.3} grid steps (limit {}), density at \
                         root-finding mode {exact_density:.6e} vs grid {:.6e}",
                        tol.grid_margin, grid.density
                    ),
                );
            }
            Err(e @ Error::DensityUnavailable { .. }) => {
                skip_check(&mut checks, "mode_grid", format!("not applicable: {e}"));
            }
            Err(e) => return Err(e),
        }
    } else {
        skip_check(
            &mut checks,
            "mode_grid",
            format!("grid oracle is limited to d <= 3, got {}", smsn.dim()),
        );
    }

    Ok(ValidateReport {
        passed: checks.iter().all(|c| c.status != "fail"),
        n,
        seed,
        tolerances: tol,
        checks,
    })
}

fn push_check(checks: &mut Vec<CheckReport>, name: &str, ok: bool, detail: String) {
    checks.push(CheckReport {
        name: name.to_string(),
        status: if ok { "pass" } else { "fail" }.to_string(),
        detail,
    });
}

fn skip_check(checks: &mut Vec<CheckReport>, name: &str, detail: String) {
    checks.push(CheckReport {
        name: name.to_string(),
        status: "skipped".to_string(),
        detail,
    });
}
