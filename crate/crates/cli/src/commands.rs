use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use rinv_core::decomposition::{conditioned_diagonal, random_operator, random_tight_frame};
use rinv_core::matrix::gram_min_eigenvalue;
use rinv_core::{
    compare_to_guarantee, run_selection, verify, verify_classical, Certificate, CertificateRecord,
    Decomposition, DenseMatrix, FrameMode, PivotRule, SelectionResult, StepTrace, Tolerances,
};

use crate::exit;
use crate::mm::{read_matrix, write_matrix};

#[derive(Debug, Parser)]
#[command(
    name = "rinv",
    version,
    about = "Restricted invertibility subset selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Any decomposition of the identity.
    Frame,
    /// Standard basis, unit-norm columns of L.
    Columns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pivot {
    First,
    Greedy,
}

impl From<Pivot> for PivotRule {
    fn from(p: Pivot) -> Self {
        match p {
            Pivot::First => PivotRule::FirstFeasible,
            Pivot::Greedy => PivotRule::GreedyMinPotential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operator {
    Random,
    Identity,
    Diag,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Input {
    /// Operator L (Matrix Market, n x n).
    #[arg(long = "L", value_name = "PATH")]
    pub operator: PathBuf,
    /// Vectors v_i as the rows of an m x n Matrix Market array; standard basis if omitted.
    #[arg(long = "V", value_name = "PATH")]
    pub frame: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Frame)]
    pub mode: Mode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a subset and print its certificate as JSON.
    Select {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Pivot::First)]
        pivot: Pivot,
        /// Write one JSON line per step here.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        /// Also write the certificate here.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Recheck a certificate against its input.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "PATH")]
        cert: PathBuf,
    },
    /// Compare the selection with an exhaustive search of the same size.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        epsilon: f64,
    },
    /// Write a random instance: L.mtx and V.mtx.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Operator::Random)]
        operator: Operator,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Compare the selection with random subsets of the same size.
    Bench {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        epsilon: f64,
        /// Number of random subsets.
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        bail!("--epsilon must lie strictly between 0 and 1, got {epsilon}");
    }
    Ok(())
}

fn load(input: &Input, tol: &Tolerances) -> Result<Decomposition> {
    let l = read_matrix(&input.operator)?;
    let dec = match (&input.frame, input.mode) {
        (None, Mode::Frame) => Decomposition::from_standard_basis(l)?,
        (None, Mode::Columns) => Decomposition::classical(l, tol)?,
        (Some(path), mode) => {
            let v = read_matrix(path)?;
            let mode = match mode {
                Mode::Frame => FrameMode::Frame,
                Mode::Columns => FrameMode::ClassicalColumns,
            };
            Decomposition::new(l, v, mode)?
        }
    };
    Ok(dec.validate(tol)?)
}

fn certify(
    dec: &Decomposition,
    epsilon: f64,
    sigma: &[usize],
    tol: &Tolerances,
) -> Result<Certificate> {
    Ok(match dec.mode() {
        FrameMode::Frame => verify(dec, epsilon, sigma, tol)?,
        FrameMode::ClassicalColumns => verify_classical(dec.operator(), epsilon, sigma, tol)?,
    })
}

pub fn certificate_json(cert: &Certificate) -> String {
    serde_json::to_string(&cert.record()).expect("certificate serializes")
}

/// One trace line; `chosen` is shifted to 1-based.
pub fn trace_json(trace: &StepTrace) -> String {
    let mut value = serde_json::to_value(trace).expect("trace serializes");
    value["chosen"] = serde_json::Value::from(trace.chosen + 1);
    value.to_string()
}

fn write_trace(path: &Path, result: &SelectionResult) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for t in &result.traces {
        writeln!(w, "{}", trace_json(t))?;
    }
    w.flush()?;
    Ok(())
}

fn emit(out: &mut dyn Write, json: &str) -> Result<()> {
    writeln!(out, "{json}")?;
    Ok(())
}

fn pass_code(passes: bool) -> i32 {
    if passes {
        exit::PASS
    } else {
        exit::CERTIFICATE_FAILED
    }
}

#[derive(Debug, Serialize)]
struct OracleOutput {
    epsilon: f64,
    t: usize,
    algo_sigma: Vec<usize>,
    algo_lambda: Option<f64>,
    oracle_sigma: Vec<usize>,
    oracle_lambda: Option<f64>,
    bound: f64,
    vacuous: bool,
    holds: bool,
}

#[derive(Debug, Serialize)]
struct RandomStats {
    k: usize,
    min: f64,
    mean: f64,
    max: f64,
    fraction_above_bound: f64,
}

#[derive(Debug, Serialize)]
struct BenchOutput {
    epsilon: f64,
    t: usize,
    bound: f64,
    barrier_lambda: Option<f64>,
    random: Option<RandomStats>,
}

fn one_based(sigma: &[usize]) -> Vec<usize> {
    sigma.iter().map(|i| i + 1).collect()
}

/// Runs one subcommand, writing results to `out`, and returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let tol = Tolerances::from_env();
    match cli.command {
        Command::Select {
            input,
            epsilon,
            pivot,
            trace,
            out: cert_path,
        } => {
            check_epsilon(epsilon)?;
            let dec = load(&input, &tol)?;
            let result = match run_selection(&dec, epsilon, pivot.into(), &tol) {
                Ok(r) => r,
                Err(e @ rinv_core::Error::Infeasible { .. }) => {
                    eprintln!("error: {e}");
                    return Ok(exit::CERTIFICATE_FAILED);
                }
                Err(e) => return Err(e.into()),
            };
            if let Some(path) = trace {
                write_trace(&path, &result)?;
            }
            let cert = certify(&dec, epsilon, &result.sigma, &tol)?;
            let json = certificate_json(&cert);
            if let Some(path) = cert_path {
                std::fs::write(&path, format!("{json}\n"))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            emit(out, &json)?;
            Ok(pass_code(cert.passes))
        }
        Command::Verify { input, cert } => {
            let text = std::fs::read_to_string(&cert)
                .with_context(|| format!("reading {}", cert.display()))?;
            let record: CertificateRecord = serde_json::from_str(&text)
                .with_context(|| format!("parsing certificate {}", cert.display()))?;
            check_epsilon(record.epsilon)?;
            let dec = load(&input, &tol)?;
            let sigma = record.zero_based_sigma()?;
            let fresh = certify(&dec, record.epsilon, &sigma, &tol)?;
            if fresh.passes != record.passes {
                eprintln!(
                    "warning: certificate claims passes={} but recheck gives passes={}",
                    record.passes, fresh.passes
                );
            }
            emit(out, &certificate_json(&fresh))?;
            Ok(pass_code(fresh.passes))
        }
        Command::Oracle { input, epsilon } => {
            check_epsilon(epsilon)?;
            let dec = load(&input, &tol)?;
            let r = compare_to_guarantee(&dec, epsilon, &tol)?;
            let report = OracleOutput {
                epsilon,
                t: r.t,
                algo_sigma: one_based(&r.algo_sigma),
                algo_lambda: r.algo_lambda.is_finite().then_some(r.algo_lambda),
                oracle_sigma: one_based(&r.oracle_sigma),
                oracle_lambda: r.oracle_lambda.is_finite().then_some(r.oracle_lambda),
                bound: r.bound,
                vacuous: r.vacuous,
                holds: r.holds,
            };
            emit(out, &serde_json::to_string(&report)?)?;
            Ok(pass_code(r.holds))
        }
        Command::Gen {
            n,
            m,
            seed,
            operator,
            out: dir,
        } => {
            let frame = random_tight_frame(n, m, seed)?;
            let l = match operator {
                Operator::Random => random_operator(n, seed),
                Operator::Identity => DenseMatrix::identity(n),
                Operator::Diag => conditioned_diagonal(n, 10.0),
            };
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let (lp, vp) = (dir.join("L.mtx"), dir.join("V.mtx"));
            write_matrix(&lp, &l)?;
            write_matrix(&vp, &frame)?;
            writeln!(out, "{}\n{}", lp.display(), vp.display())?;
            Ok(exit::PASS)
        }
        Command::Bench {
            input,
            epsilon,
            k,
            seed,
        } => {
            check_epsilon(epsilon)?;
            let dec = load(&input, &tol)?;
            let result = run_selection(&dec, epsilon, PivotRule::FirstFeasible, &tol)?;
            let cert = certify(&dec, epsilon, &result.sigma, &tol)?;
            let t = result.sigma.len();
            let random = (t > 0 && k > 0).then(|| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                let lambdas: Vec<f64> = (0..k)
                    .map(|_| {
                        let idx = rand::seq::index::sample(&mut rng, dec.m(), t);
                        let images: Vec<_> = idx.iter().map(|i| dec.image(i)).collect();
                        gram_min_eigenvalue(&images).expect("nonempty subset")
                    })
                    .collect();
                let above = lambdas
                    .iter()
                    .filter(|&&l| l > cert.guarantee_bound)
                    .count();
                RandomStats {
                    k,
                    min: lambdas.iter().cloned().fold(f64::INFINITY, f64::min),
                    mean: lambdas.iter().sum::<f64>() / k as f64,
                    max: lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    fraction_above_bound: above as f64 / k as f64,
                }
            });
            let report = BenchOutput {
                epsilon,
                t,
                bound: cert.guarantee_bound,
                barrier_lambda: cert.lambda_min.is_finite().then_some(cert.lambda_min),
                random,
            };
            emit(out, &serde_json::to_string(&report)?)?;
            Ok(exit::PASS)
        }
    }
}
