//! `fflab` — a laboratory for random matrices over finite fields: exact
//! statistics, q-series tables, anti-concentration reports, seeded Monte
//! Carlo experiments, and exhaustive enumeration oracles.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage error.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use serde_json::json;

use fflab::anticonc::{build_report, DistributionSpec, RhoMode, ULCDParams};
use fflab::error::{Error, Result};
use fflab::experiments::{enumerate_oracle, run_experiment, ExperimentConfig, OracleStatistic};
use fflab::field::PrimeModulus;
use fflab::partition::Partition;
use fflab::poly::{irreducible_count, Poly};
use fflab::qpoch::Bounded;
use fflab::stats::{
    cohen_lenstra_measure, count_all_identity_check, derangement_series, divisibility_limit,
    fine_herstein_limit, gl_order, uniform_rank_prob, universal_corank_prob,
};

mod selftest;

#[derive(Parser)]
#[command(name = "fflab", version, about = "Random matrices over finite fields: exact laws, q-series, anti-concentration, Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact finite-size and limiting statistics
    Exact {
        #[command(subcommand)]
        which: ExactCmd,
    },
    /// Generating-function tables and identity checks
    Qseries {
        #[command(subcommand)]
        which: QseriesCmd,
    },
    /// Anti-concentration report for a vector over F_p
    Anticonc(AnticoncArgs),
    /// Seeded Monte Carlo experiment from a JSON config
    Mc(McArgs),
    /// Exhaustive enumeration oracle over all matrices in budget
    Oracle(OracleArgs),
    /// Run the built-in invariant suite; nonzero exit on any failure
    Selftest,
}

#[derive(Subcommand)]
enum ExactCmd {
    /// P(corank = k) for an n x n uniform matrix over F_q, exact rational
    Rank {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: usize,
    },
    /// Limiting corank-d probability as n grows
    CorankLimit {
        #[arg(long, visible_alias = "q")]
        p: u64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Limiting measure of the module type lambda over F_q
    ClMeasure {
        #[arg(long)]
        q: u64,
        /// Partition, e.g. "[2,1]" or "[]"
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Limiting probability that a fixed degree-d irreducible divides the
    /// characteristic polynomial
    DivisibilityLimit {
        #[arg(long, visible_alias = "p")]
        q: u64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Limiting eigenvalue-free probability over F_q
    FineHerstein {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// |GL_n(F_q)|
    GlOrder {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
    },
    /// Number of monic irreducible polynomials of degree d over F_q
    IrreducibleCount {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        d: u64,
    },
}

#[derive(Subcommand)]
enum QseriesCmd {
    /// Coefficients a_0..a_N of the eigenvalue-free proportion series
    Derangement {
        #[arg(long)]
        q: u64,
        #[arg(long = "N")]
        n: usize,
        /// Series truncations beyond this are refused
        #[arg(long, default_value_t = 24)]
        max: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Verify the cycle-index product identity through order N
    IdentityCheck {
        #[arg(long)]
        q: u64,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 24)]
        max: usize,
    },
}

#[derive(Args)]
struct AnticoncArgs {
    /// Input file: first line "n p", then n residues
    #[arg(long)]
    vector: std::path::PathBuf,
    /// Scale parameter gamma in (0,1); default is the dimension-based choice
    #[arg(long)]
    gamma: Option<f64>,
    /// Scale parameter kappa > 0
    #[arg(long)]
    kappa: Option<f64>,
    /// Largest k for the R_k table
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Progression dimension budget for structure detection
    #[arg(long)]
    nprime: Option<usize>,
    /// Step distribution for the walk
    #[arg(long, value_enum, default_value_t = Dist::Pm1)]
    dist: Dist,
    /// Arithmetic for the convolution
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
}

#[derive(Args)]
struct McArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: std::path::PathBuf,
    /// Override the config's worker count (execution only; not echoed)
    #[arg(long)]
    workers: Option<usize>,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: u64,
    #[arg(long, value_enum)]
    stat: OracleStat,
    /// Modulus polynomial, lowest coefficient first (e.g. "1,0,1" for x^2+1)
    #[arg(long)]
    phi: Option<String>,
    /// Entry distribution (uniform weights every matrix equally)
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    dist: Dist,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    /// Uniform on all of F_p
    Uniform,
    /// Uniform signs +-1
    Pm1,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleStat {
    Rank,
    Eigfree,
    EigfreeInvertible,
    Divisibility,
    Partition,
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes, like other unix filters
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Exact { which } => {
            cmd_exact(which)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Qseries { which } => cmd_qseries(which),
        Cmd::Anticonc(args) => {
            cmd_anticonc(args)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Mc(args) => {
            cmd_mc(args)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Oracle(args) => {
            cmd_oracle(args)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selftest => Ok(selftest::run()),
    }
}

fn print_exact(statistic: &str, params: serde_json::Value, value: &BigRational) {
    let out = json!({
        "statistic": statistic,
        "params": params,
        "value": value.to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
}

fn print_bounded(statistic: &str, params: serde_json::Value, b: &Bounded) {
    let out = json!({
        "statistic": statistic,
        "params": params,
        "value": format!("{:.15}", b.value),
        "error_bound": format!("{:e}", b.error_bound),
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
}

fn cmd_exact(which: ExactCmd) -> Result<()> {
    match which {
        ExactCmd::Rank { n, q, k } => {
            let v = uniform_rank_prob(n, q, k)?;
            print_exact("uniform_rank_prob", json!({"n": n, "q": q, "k": k}), &v);
        }
        ExactCmd::CorankLimit { p, d, tol } => {
            let b = universal_corank_prob(p, d, tol)?;
            print_bounded("universal_corank_prob", json!({"p": p, "d": d}), &b);
        }
        ExactCmd::ClMeasure { q, lambda, tol } => {
            let lam: Partition = lambda.parse()?;
            let b = cohen_lenstra_measure(q, &lam, tol)?;
            print_bounded(
                "cohen_lenstra_measure",
                json!({"q": q, "lambda": lam.to_string()}),
                &b,
            );
        }
        ExactCmd::DivisibilityLimit { q, d, tol } => {
            let b = divisibility_limit(q, d, tol)?;
            print_bounded("divisibility_limit", json!({"q": q, "d": d}), &b);
        }
        ExactCmd::FineHerstein { q, tol } => {
            let b = fine_herstein_limit(q, tol)?;
            print_bounded("fine_herstein_limit", json!({"q": q}), &b);
        }
        ExactCmd::GlOrder { n, q } => {
            let v = gl_order(n, q)?;
            let out = json!({
                "statistic": "gl_order",
                "params": {"n": n, "q": q},
                "value": v.to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        ExactCmd::IrreducibleCount { q, d } => {
            let v = irreducible_count(q, d)?;
            let out = json!({
                "statistic": "irreducible_count",
                "params": {"q": q, "d": d},
                "value": v.to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
    }
    Ok(())
}

fn cmd_qseries(which: QseriesCmd) -> Result<ExitCode> {
    match which {
        QseriesCmd::Derangement { q, n, max, format } => {
            if n > max {
                return Err(Error::Config(format!(
                    "truncation order {n} exceeds the configured maximum {max}"
                )));
            }
            let series = derangement_series(q, n)?;
            match format {
                Format::Json => {
                    let coeffs: Vec<String> =
                        series.coeffs().iter().map(|c| c.to_string()).collect();
                    let out = json!({
                        "statistic": "derangement_series",
                        "params": {"q": q, "N": n},
                        "coefficients": coeffs,
                    });
                    println!("{}", serde_json::to_string_pretty(&out).unwrap());
                }
                Format::Csv | Format::Table => {
                    let mut text = String::from("k,coefficient\n");
                    for (k, c) in series.coeffs().iter().enumerate() {
                        writeln!(text, "{k},{c}").unwrap();
                    }
                    print!("{text}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        QseriesCmd::IdentityCheck { q, n, max } => {
            if n > max {
                return Err(Error::Config(format!(
                    "truncation order {n} exceeds the configured maximum {max}"
                )));
            }
            let (pass, residual) = count_all_identity_check(q, n)?;
            let out = json!({
                "statistic": "count_all_identity_check",
                "params": {"q": q, "N": n},
                "pass": pass,
                "max_residual_coefficient": format!("{:e}", residual.max_abs_coeff_f64()),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn make_dist(field: &PrimeModulus, dist: Dist) -> Result<DistributionSpec> {
    match dist {
        Dist::Uniform => DistributionSpec::uniform(field),
        Dist::Pm1 => DistributionSpec::bernoulli_pm1(field),
    }
}

fn cmd_anticonc(args: AnticoncArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.vector)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.vector.display())))?;
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("vector file is empty".into()))?
        .parse()
        .map_err(|_| Error::Parse("first token must be the length n".into()))?;
    let p: u64 = tokens
        .next()
        .ok_or_else(|| Error::Parse("missing modulus p".into()))?
        .parse()
        .map_err(|_| Error::Parse("second token must be the modulus p".into()))?;
    let w: Vec<u64> = tokens
        .map(|t| t.parse::<u64>().map_err(|_| Error::Parse(format!("bad residue {t:?}"))))
        .collect::<Result<_>>()?;
    if w.len() != n {
        return Err(Error::Parse(format!(
            "header promises {n} residues, file has {}",
            w.len()
        )));
    }
    let field = PrimeModulus::new(p)?;
    let mu = make_dist(&field, args.dist)?;
    let params = match (args.gamma, args.kappa) {
        (None, None) => ULCDParams::default_for_dimension(n),
        (g, k) => {
            let defaults = ULCDParams::default_for_dimension(n);
            ULCDParams::new(g.unwrap_or(defaults.gamma), k.unwrap_or(defaults.kappa))?
        }
    };
    let mode = match args.mode {
        Mode::Exact => RhoMode::ExactRational,
        Mode::Float => RhoMode::Float,
    };
    let report = build_report(&field, &w, &mu, &params, args.k, args.nprime, mode)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn cmd_mc(args: McArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    let result = run_experiment(&cfg, args.workers)?;
    match args.format {
        Format::Json => println!("{}", result.to_json()),
        Format::Table => print!("{}", result.to_table()),
        Format::Csv => print!("{}", result.to_csv()),
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let field = PrimeModulus::new(args.p)?;
    let mu = make_dist(&field, args.dist)?;
    let parse_phi = |spec: &Option<String>| -> Result<Poly> {
        let s = spec
            .as_ref()
            .ok_or_else(|| Error::Config("this statistic needs --phi".into()))?;
        Poly::parse(field.clone(), s)
    };
    let stat = match args.stat {
        OracleStat::Rank => OracleStatistic::Rank,
        OracleStat::Eigfree => OracleStatistic::EigfreeCount,
        OracleStat::EigfreeInvertible => OracleStatistic::EigfreeInvertibleCount,
        OracleStat::Divisibility => OracleStatistic::Divisibility(parse_phi(&args.phi)?),
        OracleStat::Partition => OracleStatistic::Partition(parse_phi(&args.phi)?),
    };
    let dist = enumerate_oracle(&field, args.n, &stat, &mu)?;
    let buckets: serde_json::Map<String, serde_json::Value> = dist
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.to_string())))
        .collect();
    let out = json!({
        "statistic": "enumerate_oracle",
        "params": {"n": args.n, "p": args.p},
        "buckets": buckets,
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(())
}
