use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use serde_json::json;

use monodromy_core::catalog::{classify, verify_lemmas, ClassifyOptions, LemmaBounds, SUITES};
use monodromy_core::spec_json::parse_spec;
use monodromy_core::spectra::{classify_case, ord_bar, spectrum, TorusSpec};
use monodromy_core::vtest::{run_vtest, witness_search, SweepConfig, DEFAULT_BUDGET};
use monodromy_core::{qz::try_v_eval, Error, HypSpec, Qz};

/// Exact V-function arithmetic and finite-monodromy tests for hypergeometric
/// sheaves in characteristic 2.
#[derive(Parser)]
#[command(name = "monodromy", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Largest layer m: x runs over denominators dividing 2^(d m) - 1.
    #[arg(long, default_value_t = 1)]
    m_max: u32,
    /// Cap on swept points (also capped by MONODROMY_BUDGET).
    #[arg(long)]
    budget: Option<u64>,
    /// Worker threads. Output does not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Prints V(num/den) for the prime p.
    VEval {
        p: u32,
        #[arg(allow_hyphen_values = true)]
        num: String,
        den: String,
    },
    /// Runs the bounded V-test on a JSON spec.
    Vtest {
        spec: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Evaluate every character term instead of the closed forms.
        #[arg(long)]
        naive: bool,
    },
    /// Scans the x(i_1, ..., i_t) lattice of a product spec for a violation.
    WitnessSearch {
        spec: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Classifies all candidates up to n = n_max.
    Classify {
        #[arg(long, default_value_t = 3)]
        n_max: u32,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Add per-row wall time (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
        /// Append the (8,7,6,4) product over the trivial character.
        #[arg(long)]
        regression: bool,
    },
    /// Runs a named lemma suite.
    Verify {
        /// One of the suite names, or `all`.
        suite: String,
    },
    /// Eigenvalue spectrum and m2sp case of a torus element.
    Spectrum { torus: PathBuf },
}

/// Failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(2, e.to_string())
    }
}

fn budget(flag: Option<u64>) -> Result<u64, Fail> {
    let env = match std::env::var("MONODROMY_BUDGET") {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| Fail(2, format!("MONODROMY_BUDGET is not an integer: {s:?}")))?,
        ),
        Err(_) => None,
    };
    let b = flag.unwrap_or(DEFAULT_BUDGET);
    Ok(env.map_or(b, |e| e.min(b)))
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path)
        .map_err(|e| Fail(2, format!("cannot read {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<HypSpec, Fail> {
    parse_spec::<u64>(&read(path)?).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn pretty<T: serde::Serialize>(v: &T) -> Result<String, Fail> {
    serde_json::to_string_pretty(v).map_err(|e| Fail(2, e.to_string()))
}

fn run(cli: Cli) -> Result<u8, Fail> {
    match cli.cmd {
        Command::VEval { p, num, den } => {
            let n: BigInt = num
                .parse()
                .map_err(|_| Fail(2, format!("bad numerator {num:?}")))?;
            let d: BigUint = den
                .parse()
                .map_err(|_| Fail(2, format!("bad denominator {den:?}")))?;
            let x = Qz::from_bigint(&n, &d, p)?;
            println!("{}", try_v_eval(p, &x)?);
            Ok(0)
        }
        Command::Vtest { spec, sweep, naive } => {
            let spec = load_spec(&spec)?;
            let cfg = SweepConfig {
                m_max: sweep.m_max,
                budget: budget(sweep.budget)?,
                jobs: sweep.jobs,
                force_naive: naive,
            };
            let v = run_vtest(&spec, &cfg)?;
            println!("{}", pretty(&v)?);
            Ok(if v.passed() { 0 } else { 1 })
        }
        Command::WitnessSearch {
            spec,
            budget: b,
            jobs,
        } => {
            let spec = load_spec(&spec)?;
            let cfg = SweepConfig {
                budget: budget(b)?,
                jobs,
                ..Default::default()
            };
            match witness_search(&spec, &cfg)? {
                Some((w, points)) => {
                    println!(
                        "{}",
                        pretty(&json!({"found": true, "points": points, "witness": w}))?
                    );
                    Ok(1)
                }
                None => {
                    println!(
                        "{}",
                        pretty(&json!({"found": false, "budget": cfg.budget}))?
                    );
                    Ok(0)
                }
            }
        }
        Command::Classify {
            n_max,
            sweep,
            format,
            timings,
            regression,
        } => {
            let opts = ClassifyOptions {
                n_max,
                sweep: SweepConfig {
                    m_max: sweep.m_max,
                    budget: budget(sweep.budget)?,
                    jobs: sweep.jobs,
                    force_naive: false,
                },
                timings,
                regression,
            };
            let rep = classify(&opts)?;
            match format {
                Format::Json => print!("{}", rep.to_json()?),
                Format::Csv => print!("{}", rep.to_csv()?),
            }
            if !rep.summary.mismatches.is_empty() {
                eprintln!("mismatches: {}", rep.summary.mismatches.join(", "));
                Ok(1)
            } else if !rep.summary.unresolved.is_empty() {
                eprintln!("unresolved (budget): {}", rep.summary.unresolved.join(", "));
                Ok(2)
            } else {
                Ok(0)
            }
        }
        Command::Verify { suite } => {
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let bounds = LemmaBounds::default();
            let mut reports = Vec::new();
            for s in names {
                reports.push(verify_lemmas(s, &bounds)?);
            }
            let ok = reports.iter().all(|r| r.passed);
            if reports.len() == 1 {
                println!("{}", pretty(&reports[0])?);
            } else {
                println!("{}", pretty(&reports)?);
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Spectrum { torus } => {
            let ts: TorusSpec = serde_json::from_str(&read(&torus)?)
                .map_err(|e| Fail(2, format!("{}: {e}", torus.display())))?;
            ts.validate()?;
            let sp = spectrum(&ts);
            let case = classify_case(&ts);
            let ord = case.map(|_| ord_bar(&ts)).transpose()?;
            println!(
                "{}",
                pretty(&json!({
                    "n": ts.n(),
                    "spectrum": sp,
                    "max_multiplicity": sp.max_multiplicity(),
                    "ssp": sp.is_ssp(),
                    "m2sp": sp.is_m2sp(),
                    "case": case,
                    "ord_bar": ord,
                }))?
            );
            Ok(if sp.is_m2sp() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
