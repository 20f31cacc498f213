//! `bsk`: command-line front-end for the block-sparse recovery toolkit.
//!
//! All matrices and vectors travel in the BSK1 text format. Block indices
//! are 1-based in every report and CSV this tool emits.
//!
//! Exit codes: 0 success, 2 invalid input, 3 when the only problem was an
//! iterative solver failing to converge (outputs are still written).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use bsk_core::coherence::{coherence_report, exact_recovery_condition, max_guaranteed_block_sparsity};
use bsk_core::dictionary::{
    build_incoherent_pair, random_block_dictionary, random_block_sparse_vector, AmplitudeModel,
};
use bsk_core::harness::{
    phase_csv, run_phase_transition, DictionarySource, ExperimentConfig,
};
use bsk_core::io;
use bsk_core::recovery::{
    bomp, l21_minimize, omp, oracle_support_search, Algorithm, RecoveryResult, SolverParams,
};
use bsk_core::uncertainty::uncertainty_check;
use bsk_core::{BlockShape, Error, Result};

const DEFAULT_ORACLE_BUDGET: u64 = 1_000_000;

#[derive(Parser)]
#[command(name = "bsk", version, about = "block-sparse recovery toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate dictionaries, basis pairs, and sparse test signals.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Coherence diagnostics and recovery-guarantee levels for a dictionary.
    Coherence(CoherenceArgs),
    /// Recover a block-sparse vector from measurements.
    Recover(RecoverArgs),
    /// Evaluate the sparsity uncertainty relation for a basis pair.
    Uncertainty(UncertaintyArgs),
    /// Monte-Carlo phase-transition sweep driven by a config file.
    Phase(PhaseArgs),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random dictionary with orthonormal blocks (L x M*d).
    Dict {
        #[arg(long = "L")]
        l: usize,
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// The maximally block-incoherent basis pair (identity, DFT x U).
    Pair {
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        d: usize,
        /// Optional d x d unitary in BSK1 format; identity when absent.
        #[arg(long)]
        unitary: Option<PathBuf>,
        #[arg(long)]
        out_phi: PathBuf,
        #[arg(long)]
        out_psi: PathBuf,
    },
    /// Random block k-sparse signal.
    Signal {
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Amplitude model: gaussian | unit-blocks
        #[arg(long, default_value = "gaussian")]
        model: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CoherenceArgs {
    #[arg(long)]
    dict: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the pairwise block spectral-radius grid as CSV.
    #[arg(long)]
    grid: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    alg: String,
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    y: PathBuf,
    /// Block sparsity when known; bomp/omp stop on residual without it,
    /// oracle requires it.
    #[arg(long)]
    k: Option<usize>,
    /// Solver parameter overrides, flat key-value file.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Include recovery-guarantee certificate values in the report.
    #[arg(long)]
    certify: bool,
}

#[derive(Args)]
struct UncertaintyArgs {
    #[arg(long)]
    phi: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    /// Signal to analyze; required unless --sweep is given.
    #[arg(long)]
    x: Option<PathBuf>,
    /// Relative tolerance when counting nonzero expansion blocks.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Run TRIALS random signals instead and emit CSV: --sweep TRIALS SEED
    #[arg(long, num_args = 2, value_names = ["TRIALS", "SEED"])]
    sweep: Option<Vec<u64>>,
    /// Write the report/CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseArgs {
    /// Flat key-value config file; see README for the grammar.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("BSK_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: BSK_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(converged) => {
            if converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Ok(true) = clean success, Ok(false) = outputs written but an iterative
/// solver did not converge.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Gen { what } => {
            run_gen(what)?;
            Ok(true)
        }
        Command::Coherence(args) => {
            run_coherence(args)?;
            Ok(true)
        }
        Command::Recover(args) => run_recover(args),
        Command::Uncertainty(args) => {
            run_uncertainty(args)?;
            Ok(true)
        }
        Command::Phase(args) => {
            run_phase(args)?;
            Ok(true)
        }
    }
}

fn run_gen(what: GenCommand) -> Result<()> {
    match what {
        GenCommand::Dict { l, m, d, seed, out } => {
            let dict = random_block_dictionary(l, m, d, seed)?;
            io::write_matrix_file(out, &dict)
        }
        GenCommand::Pair { m, d, unitary, out_phi, out_psi } => {
            let u = unitary.map(io::read_matrix_file).transpose()?;
            let (phi, psi) = build_incoherent_pair(m, d, u.as_ref().map(|b| b.entries()))?;
            io::write_matrix_file(out_phi, &phi)?;
            io::write_matrix_file(out_psi, &psi)
        }
        GenCommand::Signal { m, d, k, seed, model, out } => {
            let model = match model.as_str() {
                "gaussian" => AmplitudeModel::Gaussian,
                "unit-blocks" => AmplitudeModel::UnitNormBlocks,
                other => {
                    return Err(Error::InvalidParam(format!(
                        "unknown amplitude model '{other}' (gaussian | unit-blocks)"
                    )))
                }
            };
            let shape = BlockShape::new(d, m)?;
            let x = random_block_sparse_vector(shape, k, seed, model)?;
            io::write_vector_file(out, &x)
        }
    }
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_coherence(args: CoherenceArgs) -> Result<()> {
    let dict = io::read_matrix_file(args.dict)?;
    let report = coherence_report(&dict)?;
    if let Some(grid) = args.grid {
        std::fs::write(grid, io::coherence_grid_csv(&report))?;
    }
    emit(args.out, &io::coherence_report_text(&report))
}

fn load_params(path: Option<&PathBuf>) -> Result<SolverParams> {
    let mut p = SolverParams::default();
    let Some(path) = path else { return Ok(p) };
    for (lineno, key, value) in read_keyvalue_file(path)? {
        let bad = |what: &str| Error::Parse {
            line: lineno,
            msg: format!("bad {what} value '{value}'"),
        };
        match key.as_str() {
            "maxIterations" => p.max_iterations = value.parse().map_err(|_| bad("maxIterations"))?,
            "residualTol" => p.residual_tol = value.parse().map_err(|_| bad("residualTol"))?,
            "penalty" => p.penalty = value.parse().map_err(|_| bad("penalty"))?,
            "primalTol" => p.primal_tol = value.parse().map_err(|_| bad("primalTol"))?,
            "dualTol" => p.dual_tol = value.parse().map_err(|_| bad("dualTol"))?,
            "supportThreshold" => {
                p.support_threshold = value.parse().map_err(|_| bad("supportThreshold"))?
            }
            "debias" => p.debias = parse_bool(&value, lineno)?,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown solver parameter '{other}'"),
                })
            }
        }
    }
    p.validate()?;
    Ok(p)
}

fn recovery_report(
    result: &RecoveryResult,
    args: &RecoverArgs,
    dict: &bsk_core::BlockMatrix,
) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "algorithm = {}", result.algorithm.tag());
    let support_1based: Vec<String> =
        result.support.sorted().iter().map(|i| (i + 1).to_string()).collect();
    let _ = writeln!(s, "support = {}", support_1based.join(","));
    let _ = writeln!(s, "block_sparsity = {}", result.support.len());
    let _ = writeln!(s, "iterations = {}", result.iterations);
    let _ = writeln!(s, "residual = {:.12e}", result.residual_norm);
    let _ = writeln!(s, "converged = {}", result.converged);
    if args.certify {
        let erc = exact_recovery_condition(dict, &result.support)?;
        let _ = writeln!(s, "erc_value = {:.12}", erc.value);
        let _ = writeln!(s, "erc_holds = {}", erc.holds);
        let g = max_guaranteed_block_sparsity(dict)?;
        let _ = writeln!(s, "k_max_block = {}", g.k_block);
        let _ = writeln!(
            s,
            "coherence_guarantee_holds = {}",
            result.support.len() <= g.k_block
        );
    }
    Ok(s)
}

fn run_recover(args: RecoverArgs) -> Result<bool> {
    let alg = Algorithm::from_str(&args.alg)?;
    let dict = io::read_matrix_file(&args.dict)?;
    let y = io::read_vector_file(&args.y)?;
    let y = y.into_values();
    if y.len() != dict.nrows() {
        return Err(Error::DimensionMismatch(
            "measurement length != dictionary rows".into(),
        ));
    }
    let params = load_params(args.params.as_ref())?;
    let result = match alg {
        Algorithm::Bomp => bomp(&dict, &y, args.k, &params)?,
        Algorithm::Omp => omp(&dict, &y, args.k.map(|k| k * dict.col_shape().block_len()), &params)?,
        Algorithm::L21 => l21_minimize(&dict, &y, &params)?,
        Algorithm::Oracle => {
            let k = args.k.ok_or_else(|| {
                Error::InvalidParam("--k is required for the oracle algorithm".into())
            })?;
            oracle_support_search(&dict, &y, k, DEFAULT_ORACLE_BUDGET)?
        }
    };
    io::write_vector_file(&args.out, &result.x_hat)?;
    let report = recovery_report(&result, &args, &dict)?;
    std::fs::write(&args.report, report)?;
    Ok(result.converged)
}

fn run_uncertainty(args: UncertaintyArgs) -> Result<()> {
    let phi = io::read_matrix_file(&args.phi)?;
    let psi = io::read_matrix_file(&args.psi)?;
    if let Some(sweep) = &args.sweep {
        let trials = sweep[0] as usize;
        let seed = sweep[1];
        if trials == 0 {
            return Err(Error::InvalidParam("sweep trials must be >= 1".into()));
        }
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = phi.nrows();
        let mut csv = String::from("trial,A,B,sqrtAB,bound\n");
        for t in 0..trials {
            let x = bsk_core::linalg::complex_gaussian(n, 1, &mut rng).column(0).into_owned();
            let r = uncertainty_check(&x, &phi, &psi, args.tol)?;
            let _ = writeln!(
                csv,
                "{},{},{},{:.12},{:.12}",
                t + 1,
                r.a_sparsity,
                r.b_sparsity,
                r.geometric_mean,
                r.block_bound
            );
        }
        return emit(args.out, &csv);
    }
    let x_path = args
        .x
        .ok_or_else(|| Error::InvalidParam("--x is required unless --sweep is given".into()))?;
    let x = io::read_vector_file(&x_path)?.into_values();
    let r = uncertainty_check(&x, &phi, &psi, args.tol)?;
    let mut s = String::new();
    let _ = writeln!(s, "a_block_sparsity = {}", r.a_sparsity);
    let _ = writeln!(s, "b_block_sparsity = {}", r.b_sparsity);
    let _ = writeln!(s, "geometric_mean = {:.12}", r.geometric_mean);
    let _ = writeln!(s, "arithmetic_mean = {:.12}", r.arithmetic_mean);
    let _ = writeln!(s, "block_bound = {:.12}", r.block_bound);
    let _ = writeln!(s, "conventional_bound = {:.12}", r.conventional_bound);
    let _ = writeln!(s, "holds = {}", r.holds);
    emit(args.out, &s)
}

fn parse_bool(v: &str, line: usize) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse { line, msg: format!("expected true/false, got '{other}'") }),
    }
}

/// `key = value` lines; blank lines and `#` comments ignored.
fn read_keyvalue_file(path: &PathBuf) -> Result<Vec<(usize, String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 'key = value', got '{raw}'"),
            });
        };
        out.push((i + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn parse_experiment_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let entries = read_keyvalue_file(path)?;
    let mut map = std::collections::BTreeMap::new();
    for (line, key, value) in entries {
        if map.insert(key.clone(), (line, value)).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key '{key}'") });
        }
    }
    let get = |key: &str| -> Result<(usize, String)> {
        map.get(key)
            .cloned()
            .ok_or_else(|| Error::InvalidParam(format!("config missing required key '{key}'")))
    };
    let num = |key: &str| -> Result<u64> {
        let (line, v) = get(key)?;
        v.parse()
            .map_err(|_| Error::Parse { line, msg: format!("bad integer for '{key}': '{v}'") })
    };

    let (_, source_kind) = get("source")?;
    let source = match source_kind.as_str() {
        "generated" => DictionarySource::Generated {
            l: num("L")? as usize,
            m: num("M")? as usize,
            d: num("d")? as usize,
            seed: num("seed")?,
        },
        "pair" => DictionarySource::IncoherentPair {
            m: num("M")? as usize,
            d: num("d")? as usize,
        },
        "file" => DictionarySource::File(PathBuf::from(get("path")?.1)),
        other => {
            return Err(Error::InvalidParam(format!(
                "source must be generated | pair | file, got '{other}'"
            )))
        }
    };

    let (alg_line, alg_list) = get("algorithms")?;
    let algorithms: Vec<Algorithm> = alg_list
        .split(',')
        .map(|s| {
            Algorithm::from_str(s.trim())
                .map_err(|e| Error::Parse { line: alg_line, msg: e.to_string() })
        })
        .collect::<Result<_>>()?;

    let success_tol = match map.get("successTol") {
        Some((line, v)) => v.parse().map_err(|_| Error::Parse {
            line: *line,
            msg: format!("bad successTol '{v}'"),
        })?,
        None => 1e-6,
    };
    let certify = match map.get("certify") {
        Some((line, v)) => parse_bool(v, *line)?,
        None => false,
    };
    let oracle_budget = match map.get("oracleBudget") {
        Some((line, v)) => v.parse().map_err(|_| Error::Parse {
            line: *line,
            msg: format!("bad oracleBudget '{v}'"),
        })?,
        None => DEFAULT_ORACLE_BUDGET,
    };

    Ok(ExperimentConfig {
        source,
        k_min: num("kMin")? as usize,
        k_max: num("kMax")? as usize,
        algorithms,
        trials_per_cell: num("trialsPerCell")? as usize,
        master_seed: num("masterSeed")?,
        success_tol,
        certify,
        oracle_budget,
    })
}

fn run_phase(args: PhaseArgs) -> Result<()> {
    let config = parse_experiment_config(&args.config)?;
    let cells = run_phase_transition(&config)?;
    std::fs::write(&args.out, phase_csv(&cells))?;
    Ok(())
}
