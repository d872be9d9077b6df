//! The `vbchain` command line.
//!
//! Every subcommand writes plot-ready CSV to standard output (or to the
//! file named by `--out`) and is deterministic given its inputs and seed.
//! Exit codes: 0 success, 1 a library error (one line on stderr), 2 a usage
//! error, 3 a missing input file.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::io::{read_kernel, read_proposal, read_vector, write_kernel};
use crate::kernel::{build_example9, example9_states, DEFAULT_DB_TOL};
use crate::mh_continuous::{
    check_umid, log_increment_density, normal_pdf, rejection_probability, symmetrized_log_increment,
    transformed_increment_density, Grid, GridReport, SamplerSpec, Target,
};
use crate::mh_finite::build_sub_mh;
use crate::peskun::{ordering_report, random_functionals};
use crate::simulate::{clt_diagnostic, simulate_path, stream, CltConfig, CltReport, Example9Chain, KernelSampler};
use crate::spectral::{classify, eigendecompose, Thresholds};
use crate::variance::{asymptotic_variance_exact, variance_report, Functional};

/// Seed used when neither `--seed` nor `VBCHAIN_SEED` is given.
pub const DEFAULT_SEED: u64 = 1;

pub const EXIT_MODULE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "vbchain",
    version,
    about = "Variance bounding diagnostics for reversible Markov chains"
)]
pub struct Cli {
    /// Detailed-balance tolerance applied when loading kernel files.
    #[arg(long, global = true, default_value_t = DEFAULT_DB_TOL, value_parser = parse_tol)]
    pub tol: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainArg {
    P1,
    P2,
}

impl From<ChainArg> for Example9Chain {
    fn from(c: ChainArg) -> Self {
        match c {
            ChainArg::P1 => Example9Chain::P1,
            ChainArg::P2 => Example9Chain::P2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UmidCase {
    /// Langevin proposal for the smooth Laplace-tail target.
    Mala,
    /// Log-transformed chain of the `N(x, x^2)` proposal.
    Log,
    /// Power-transformed chain of the `N(x, x^b)` proposal, `0 < b < 2`.
    Power,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral summary of a kernel: n, Lambda, lambda_min, K_bound, flags.
    Analyze { kernel: PathBuf },
    /// Finite-n and asymptotic variance of a functional.
    Variance {
        kernel: PathBuf,
        functional: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 100, 10000], value_parser = parse_count)]
        horizons: Vec<usize>,
    },
    /// Off-diagonal ordering of two kernels plus variances of random functionals.
    Compare {
        kernel1: PathBuf,
        kernel2: PathBuf,
        #[arg(long, default_value_t = 50)]
        functionals: usize,
        #[arg(long, env = "VBCHAIN_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Sub-Metropolis–Hastings kernel from target weights and a VBQ1 proposal.
    MhBuild {
        target: PathBuf,
        proposal: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Writes the truncated periodic/Metropolis pair and their comparison.
    Example9 {
        #[arg(long = "N", default_value_t = 25)]
        radius: usize,
        #[arg(long, default_value = "ex9")]
        out_prefix: String,
    },
    /// Seeded trace of a finite kernel (or one of the periodic/Metropolis pair on Z).
    Simulate {
        #[arg(required_unless_present = "example9", conflicts_with = "example9")]
        kernel: Option<PathBuf>,
        /// Functional values per state; defaults to the state index.
        functional: Option<PathBuf>,
        #[arg(long)]
        example9: Option<ChainArg>,
        #[arg(long, value_parser = parse_count)]
        n: usize,
        /// Start state; drawn from the stationary law when omitted.
        #[arg(long, allow_hyphen_values = true)]
        start: Option<i64>,
        #[arg(long, env = "VBCHAIN_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replicated normalized sums against the exact asymptotic variance.
    Clt {
        #[arg(required_unless_present = "example9", conflicts_with = "example9")]
        kernel: Option<PathBuf>,
        #[arg(required_unless_present = "example9")]
        functional: Option<PathBuf>,
        /// Run the periodic (p1) or Metropolis (p2) chain on Z with h(x) = x instead.
        #[arg(long)]
        example9: Option<ChainArg>,
        /// Window radius of the truncated spectral reference for `--example9`.
        #[arg(long, default_value_t = 40)]
        oracle_radius: usize,
        #[arg(long, value_parser = parse_count, default_value = "1e5")]
        n: usize,
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        #[arg(long, env = "VBCHAIN_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Monte Carlo holding probability of the N(x, x^b) sampler on a half-Cauchy target.
    ProbeRejection {
        #[arg(long)]
        b: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, value_parser = parse_count, default_value = "10000")]
        samples: usize,
        #[arg(long, env = "VBCHAIN_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Transformed proposal-increment density next to its normal limit.
    IncrementDensity {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, allow_hyphen_values = true, default_value = "-3:3:0.01")]
        grid: String,
    },
    /// Grid evidence for the uniform minorization of a proposal.
    CheckUmid {
        #[arg(long, value_enum)]
        case: UmidCase,
        /// Langevin step.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Exponent of the state-dependent proposal for `--case power`.
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// Standard deviation of the normal minorant for `mala` and `power`.
        #[arg(long, default_value_t = 0.5)]
        s_sd: f64,
        #[arg(long, allow_hyphen_values = true)]
        s_grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x_grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        w_grid: Option<String>,
    },
}

fn parse_tol(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

/// Accepts plain integers and exact float notation such as `1e5`.
pub fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 => Ok(v as usize),
        _ => Err(format!("expected a non-negative integer, got {s:?}")),
    }
}

impl Command {
    fn input_paths(&self) -> Vec<&Path> {
        match self {
            Command::Analyze { kernel } => vec![kernel],
            Command::Variance { kernel, functional, .. } => vec![kernel, functional],
            Command::Compare { kernel1, kernel2, .. } => vec![kernel1, kernel2],
            Command::MhBuild { target, proposal, .. } => vec![target, proposal],
            Command::Simulate { kernel, functional, .. } | Command::Clt { kernel, functional, .. } => {
                kernel.iter().chain(functional).map(PathBuf::as_path).collect()
            }
            _ => Vec::new(),
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else if v == 0.0 || (1e-5..1e16).contains(&v.abs()) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Runs a parsed command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let tol = cli.tol;
    match &cli.command {
        Command::Analyze { kernel } => {
            let k = read_kernel(kernel, tol)?;
            let c = classify(&eigendecompose(&k)?, Thresholds::default());
            writeln!(
                out,
                "n,Lambda,lambda_min,K_bound,variance_bounding,geometrically_ergodic,positive,near_periodic,reducible"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                k.n(),
                fmt_num(c.lambda),
                fmt_num(c.lambda_min),
                fmt_num(c.k_bound),
                c.variance_bounding,
                c.geometrically_ergodic,
                c.positive,
                c.near_periodic,
                c.reducible
            )?;
        }
        Command::Variance {
            kernel,
            functional,
            horizons,
        } => {
            let k = read_kernel(kernel, tol)?;
            let h = Functional::for_kernel(&read_vector(functional)?, &k)?;
            let r = variance_report(&eigendecompose(&k)?, &h, horizons, 0)?;
            writeln!(out, "n,var")?;
            for (n, v) in &r.finite_n {
                writeln!(out, "{n},{}", fmt_num(*v))?;
            }
            writeln!(out, "var_pi,v_exact,ratio,K_bound")?;
            writeln!(
                out,
                "{},{},{},{}",
                fmt_num(r.var_pi),
                r.v_exact,
                fmt_num(r.ratio),
                fmt_num(r.k_bound)
            )?;
        }
        Command::Compare {
            kernel1,
            kernel2,
            functionals,
            seed,
        } => {
            let k1 = read_kernel(kernel1, tol)?;
            let k2 = read_kernel(kernel2, tol)?;
            let hs = random_functionals(k1.n(), *functionals, *seed);
            let r = ordering_report(&k1, &k2, &hs)?;
            let (l1, l2) = r.lambda_pair.expect("ordering report fills the Lambda pair");
            writeln!(out, "dominates,worst_violation,Lambda1,Lambda2")?;
            writeln!(
                out,
                "{},{},{},{}",
                r.dominates,
                fmt_num(r.worst_violation),
                fmt_num(l1),
                fmt_num(l2)
            )?;
            writeln!(out, "functional,var1,var2")?;
            for (id, v1, v2) in &r.variance_pairs {
                writeln!(out, "{id},{v1},{v2}")?;
            }
        }
        Command::MhBuild {
            target,
            proposal,
            out: path,
        } => {
            let t = read_vector(target)?;
            let q = read_proposal(proposal)?;
            let m = build_sub_mh(&t, &q)?;
            write_kernel(path, &m)?;
            writeln!(out, "n,db_residual")?;
            writeln!(out, "{},{}", m.n(), fmt_num(m.db_residual()))?;
        }
        Command::Example9 { radius, out_prefix } => {
            let (p1, p2) = build_example9(*radius)?;
            write_kernel(Path::new(&format!("{out_prefix}_p1.vbk")), &p1)?;
            write_kernel(Path::new(&format!("{out_prefix}_p2.vbk")), &p2)?;
            let dom = crate::peskun::dominates_off_diagonal(&p1, &p2)?;
            let (d1, d2) = (eigendecompose(&p1)?, eigendecompose(&p2)?);
            let csv = format!(
                "N,dominates,worst_violation,Lambda_p1,Lambda_p2,lambda_min_p1,lambda_min_p2\n{},{},{},{},{},{},{}\n",
                radius,
                dom.dominates,
                fmt_num(dom.worst_violation),
                fmt_num(d1.lambda_max()),
                fmt_num(d2.lambda_max()),
                fmt_num(d1.lambda_min()),
                fmt_num(d2.lambda_min()),
            );
            let path = format!("{out_prefix}_compare.csv");
            std::fs::write(&path, &csv).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            out.write_all(csv.as_bytes())?;
        }
        Command::Simulate {
            kernel,
            functional,
            example9,
            n,
            start,
            seed,
            out: path,
        } => {
            let trace = match (kernel, example9) {
                (Some(kpath), _) => {
                    let k = read_kernel(kpath, tol)?;
                    let h = match functional {
                        Some(f) => read_vector(f)?,
                        None => (0..k.n()).map(|i| i as f64).collect(),
                    };
                    if h.len() != k.n() {
                        return Err(Error::DimensionMismatch {
                            expected: k.n(),
                            got: h.len(),
                        });
                    }
                    let sampler = KernelSampler::new(&k);
                    let x0 = match start {
                        Some(s) => {
                            usize::try_from(*s).map_err(|_| Error::InvalidStart(format!("state {s} is negative")))?
                        }
                        // stream 1 keeps the start draw off the path stream
                        None => sampler.sample_stationary(&mut stream(*seed, 1)),
                    };
                    simulate_path(&sampler, x0, *n, *seed, |&x| h[x])?
                }
                (None, Some(chain)) => {
                    let x0 = start.unwrap_or_else(|| Example9Chain::sample_stationary(&mut stream(*seed, 1)));
                    simulate_path(&Example9Chain::from(*chain), x0, *n, *seed, |&x| x as f64)?
                }
                (None, None) => unreachable!("clap requires a source"),
            };
            let mut body = String::with_capacity(trace.values.len() * 12);
            body.push_str(&format!(
                "# source={}; seed={}; generator={}\nstep,value\n",
                trace.source, trace.seed, trace.generator
            ));
            for (i, v) in trace.values.iter().enumerate() {
                body.push_str(&format!("{},{}\n", i + 1, v));
            }
            match path {
                Some(p) => {
                    let mut w = create(p)?;
                    w.write_all(body.as_bytes())?;
                    w.flush()?;
                }
                None => out.write_all(body.as_bytes())?,
            }
        }
        Command::Clt {
            kernel,
            functional,
            example9,
            oracle_radius,
            n,
            replicates,
            seed,
        } => {
            let report = match (kernel, functional, example9) {
                (Some(kpath), Some(fpath), _) => {
                    let k = read_kernel(kpath, tol)?;
                    let h = Functional::for_kernel(&read_vector(fpath)?, &k)?;
                    let v = asymptotic_variance_exact(&eigendecompose(&k)?, &h)?;
                    let sampler = KernelSampler::new(&k);
                    let values = h.values().to_vec();
                    clt_diagnostic(
                        &sampler,
                        |&x| values[x],
                        h.mean(),
                        v,
                        |r| sampler.sample_stationary(r),
                        CltConfig {
                            n: *n,
                            replicates: *replicates,
                            seed: *seed,
                            burn_in: 0,
                        },
                    )?
                }
                (None, _, Some(chain)) => example9_clt((*chain).into(), *oracle_radius, *n, *replicates, *seed)?,
                _ => unreachable!("clap requires a source"),
            };
            write_clt(out, &report)?;
        }
        Command::ProbeRejection { b, x, samples, seed } => {
            let spec = SamplerSpec::state_dependent(Target::HalfCauchy { scale: 1.0 }, *b)?;
            writeln!(out, "x,rejection,se")?;
            for (i, &xi) in x.iter().enumerate() {
                let est = rejection_probability(&spec, xi, *samples, &mut stream(*seed, i as u64))?;
                writeln!(out, "{},{},{}", xi, est.value, est.se)?;
            }
        }
        Command::IncrementDensity { a, x, grid } => {
            let grid = Grid::parse(grid)?;
            writeln!(out, "w,density,limit_density")?;
            for w in grid.points() {
                let d = transformed_increment_density(*x, w, *a)?;
                writeln!(out, "{},{},{}", w, d, normal_pdf(w, 0.0, *a))?;
            }
        }
        Command::CheckUmid {
            case,
            delta,
            b,
            s_sd,
            s_grid,
            x_grid,
            w_grid,
        } => {
            let grid = |g: &Option<String>, default: &str| Grid::parse(g.as_deref().unwrap_or(default));
            let (mt, umid) = match case {
                UmidCase::Mala => {
                    let spec = SamplerSpec::langevin(Target::SmoothLaplace, *delta)?;
                    let sd = *s_sd;
                    check_umid(
                        &|x, y| spec.proposal_density(x, y),
                        &|u| normal_pdf(u, 0.0, sd),
                        &grid(s_grid, "-10:10:0.01")?,
                        &grid(x_grid, "-50:50:0.5")?,
                        &grid(w_grid, "-5:5:0.05")?,
                    )?
                }
                UmidCase::Log => {
                    let (s, _) = symmetrized_log_increment();
                    check_umid(
                        &|x: f64, y: f64| log_increment_density(y - x),
                        &s,
                        &grid(s_grid, "-3:3:0.01")?,
                        &grid(x_grid, "-50:50:0.5")?,
                        &grid(w_grid, "-3:3:0.01")?,
                    )?
                }
                UmidCase::Power => {
                    if !(*b > 0.0 && *b < 2.0) {
                        return Err(Error::InvalidSpec(format!("power case needs 0 < b < 2, got {b}")));
                    }
                    let a = 1.0 - b / 2.0;
                    let sd = *s_sd;
                    // transformed state y = x^a, so the base state is y^{1/a}
                    check_umid(
                        &|y: f64, z: f64| transformed_increment_density(y.powf(1.0 / a), z - y, a).unwrap_or(0.0),
                        &|u| normal_pdf(u, 0.0, sd),
                        &grid(s_grid, "-10:10:0.01")?,
                        &grid(x_grid, "10:1000:10")?,
                        &grid(w_grid, "-2:2:0.05")?,
                    )?
                }
            };
            writeln!(out, "check,grid,verdict,witness,value")?;
            for r in [&mt, &umid] {
                write_grid_report(out, r)?;
            }
        }
    }
    Ok(())
}

fn write_grid_report(out: &mut dyn Write, r: &GridReport) -> Result<()> {
    for (name, v) in &r.witnesses {
        writeln!(out, "{},{},{},{},{}", r.check, r.grid, r.verdict, name, fmt_num(*v))?;
    }
    Ok(())
}

/// Periodic or Metropolis chain on Z with `h(x) = x`, referenced against the spectral
/// variance of the window `{-radius, ..., radius}`.
pub fn example9_clt(chain: Example9Chain, radius: usize, n: usize, replicates: usize, seed: u64) -> Result<CltReport> {
    let (p1, p2) = build_example9(radius)?;
    let k = match chain {
        Example9Chain::P1 => p1,
        Example9Chain::P2 => p2,
    };
    let xs: Vec<f64> = example9_states(radius).into_iter().map(|m| m as f64).collect();
    let v = asymptotic_variance_exact(&eigendecompose(&k)?, &Functional::for_kernel(&xs, &k)?)?;
    clt_diagnostic(
        &chain,
        |&x| x as f64,
        0.0,
        v,
        Example9Chain::sample_stationary,
        CltConfig {
            n,
            replicates,
            seed,
            burn_in: 0,
        },
    )
}

fn write_clt(out: &mut dyn Write, r: &CltReport) -> Result<()> {
    writeln!(
        out,
        "n,replicates,mean,variance,reference,z_score,mean_z,skewness,excess_kurtosis,growth_ratio,diverging"
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.n,
        r.replicates,
        r.mean,
        r.variance,
        r.reference,
        fmt_opt(r.z_score),
        r.mean_z,
        r.skewness,
        r.excess_kurtosis,
        r.growth_ratio,
        r.diverging
    )?;
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    if let Some(missing) = cli.command.input_paths().into_iter().find(|p| !p.exists()) {
        eprintln!("vbchain: file not found: {}", missing.display());
        return EXIT_NOT_FOUND;
    }
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out).and_then(|_| out.flush().map_err(Error::from));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vbchain: {e}");
            EXIT_MODULE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("vbchain").chain(args.iter().copied()))
    }

    #[test]
    fn analyze_defaults() {
        let cli = parse(&["analyze", "k.vbk"]).unwrap();
        assert_eq!(cli.tol, DEFAULT_DB_TOL);
        assert!(matches!(cli.command, Command::Analyze { .. }));
    }

    #[test]
    fn horizons_are_split() {
        let cli = parse(&["variance", "k.vbk", "h.txt", "--horizons", "1,100"]).unwrap();
        match cli.command {
            Command::Variance { horizons, .. } => assert_eq!(horizons, vec![1, 100]),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn usage_errors() {
        assert!(parse(&["analyze"]).is_err());
        assert!(parse(&["analyze", "k.vbk", "--bogus"]).is_err());
        assert!(parse(&["--tol", "-1", "analyze", "k.vbk"]).is_err());
        assert!(parse(&["clt"]).is_err());
    }

    #[test]
    fn counts_accept_float_notation() {
        assert_eq!(parse_count("1e5"), Ok(100_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn hyphenated_grid() {
        let cli = parse(&["increment-density", "--a", "0.5", "--x", "1e8", "--grid", "-3:3:0.01"]).unwrap();
        match cli.command {
            Command::IncrementDensity { grid, .. } => assert_eq!(grid, "-3:3:0.01"),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn example9_flag_is_uppercase() {
        let cli = parse(&["example9", "--N", "12", "--out-prefix", "x"]).unwrap();
        match cli.command {
            Command::Example9 { radius, .. } => assert_eq!(radius, 12),
            c => panic!("{c:?}"),
        }
    }
}
