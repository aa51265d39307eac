//! Command-line front end: scenario simulation, single-target attacks,
//! experiment sweeps and solver/oracle cross-checks, all deterministic
//! given `--seed` (env `PTTS_SEED` as fallback).

use clap::{Parser, Subcommand};
use ptts::attack::{
    estimate_balance_range, goodness, goodness_to_f64, verify_contiguity_seeded, AttackerView,
    ExperimentConfig, ExperimentReport,
};
use ptts::oracle::{cross_check, solver_objective, OracleLimits};
use ptts::scenario::{generate_scenario, replay_on_ledger, select_leaked, Scenario};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Largest supply the exact 64-bit solver arithmetic is specified for.
const MAX_SUPPLY: u64 = 1 << 40;

const DEFAULT_CONTIGUITY_SAMPLES: usize = 9;

#[derive(Parser)]
#[command(
    name = "ptts",
    version,
    about = "Private token transfer simulator and balance range attack toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario and replay it through the ledger,
    /// writing scenario.json and transcript.json
    Simulate {
        /// Number of addresses (at least 2)
        #[arg(long)]
        addresses: u32,
        /// Number of transfers to generate
        #[arg(long)]
        transactions: usize,
        /// Total token supply minted to the deployer
        #[arg(long, default_value_t = 1_000_000)]
        supply: u64,
        #[arg(long, env = "PTTS_SEED", default_value_t = 0)]
        seed: u64,
        /// Output directory for the two JSON artifacts
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate one address's feasible balance range from a leaked subset
    Attack {
        /// Scenario JSON produced by `simulate`
        #[arg(long)]
        scenario: PathBuf,
        /// Fraction of transfer amounts leaked to the adversary
        #[arg(long, default_value_t = 0.5)]
        leakage: f64,
        /// Address under attack
        #[arg(long)]
        target: u32,
        #[arg(long, env = "PTTS_SEED", default_value_t = 0)]
        seed: u64,
        /// Skip the feasibility probes across the estimated range
        #[arg(long)]
        no_contiguity: bool,
        /// Treat the initial mint as unknown to the adversary
        #[arg(long)]
        hide_mint: bool,
        /// JSON report path
        #[arg(long, default_value = "attack_report.json")]
        out: PathBuf,
    },
    /// Run the full cross-product of sizes and leakage ratios, averaging
    /// goodness and solve time over independent runs per cell
    Sweep {
        /// Address counts, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        addresses: Vec<u32>,
        /// Transaction counts, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        transactions: Vec<usize>,
        /// Leakage ratios, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        leakage: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        supply: u64,
        /// Independent runs per cell
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, env = "PTTS_SEED", default_value_t = 0)]
        seed: u64,
        /// Worker threads (default: available cores)
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        no_contiguity: bool,
        #[arg(long)]
        hide_mint: bool,
        /// Summary CSV path; per-run detail goes to `<out>.detail.csv`
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the solver against the brute-force oracle on random
    /// instances
    OracleCheck {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, env = "PTTS_SEED", default_value_t = 0)]
        seed: u64,
    },
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            addresses,
            transactions,
            supply,
            seed,
            out,
        } => cmd_simulate(addresses, transactions, supply, seed, &out),
        Command::Attack {
            scenario,
            leakage,
            target,
            seed,
            no_contiguity,
            hide_mint,
            out,
        } => cmd_attack(&scenario, leakage, target, seed, no_contiguity, hide_mint, &out),
        Command::Sweep {
            addresses,
            transactions,
            leakage,
            supply,
            runs,
            seed,
            jobs,
            no_contiguity,
            hide_mint,
            out,
        } => cmd_sweep(SweepConfig {
            addresses,
            transactions,
            leakage,
            supply,
            runs,
            seed,
            jobs,
            no_contiguity,
            hide_mint,
            out,
        }),
        Command::OracleCheck { instances, seed } => cmd_oracle_check(instances, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn check_supply(supply: u64) -> Result<(), CliError> {
    if supply == 0 || supply > MAX_SUPPLY {
        return Err(CliError::usage(format!(
            "--supply must be in [1, {MAX_SUPPLY}], got {supply}"
        )));
    }
    Ok(())
}

fn check_leakage(ratio: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(CliError::usage(format!(
            "--leakage must be in [0, 1], got {ratio}"
        )));
    }
    Ok(())
}

fn cmd_simulate(
    addresses: u32,
    transactions: usize,
    supply: u64,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    if addresses < 2 {
        return Err(CliError::usage(format!(
            "--addresses must be at least 2, got {addresses}"
        )));
    }
    check_supply(supply)?;
    let scenario = generate_scenario(addresses, transactions, supply, seed)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let outcome = replay_on_ledger(&scenario)
        .map_err(|e| CliError::runtime(format!("ledger replay failed: {e}")))?;

    fs::create_dir_all(out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out.display())))?;
    let scenario_path = out.join("scenario.json");
    let transcript_path = out.join("transcript.json");
    write_json(&scenario_path, &scenario)?;
    write_json(&transcript_path, &outcome.transcript)?;
    println!(
        "wrote {} ({} transfers) and {} ({} steps)",
        scenario_path.display(),
        scenario.transfers.len(),
        transcript_path.display(),
        outcome.transcript.len()
    );
    Ok(())
}

fn cmd_attack(
    scenario_path: &Path,
    leakage: f64,
    target: u32,
    seed: u64,
    no_contiguity: bool,
    hide_mint: bool,
    out: &Path,
) -> Result<(), CliError> {
    check_leakage(leakage)?;
    if !scenario_path.exists() {
        return Err(CliError::usage(format!(
            "scenario file {} does not exist",
            scenario_path.display()
        )));
    }
    let text = fs::read_to_string(scenario_path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", scenario_path.display())))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::runtime(format!("bad scenario file: {e}")))?;
    if target >= scenario.n_addresses {
        return Err(CliError::usage(format!(
            "--target {target} out of range for {} addresses",
            scenario.n_addresses
        )));
    }

    let leaked = select_leaked(&scenario, leakage, seed);
    let mut view = AttackerView::from_scenario(&scenario, &leaked);
    view.hide_mint = hide_mint;
    let estimate =
        estimate_balance_range(&view, target).map_err(|e| CliError::runtime(e.to_string()))?;
    let range = estimate.range;
    let rate = goodness(&range, scenario.total_supply);

    let contiguous = if no_contiguity {
        None
    } else {
        let ok =
            verify_contiguity_seeded(&view, target, &range, DEFAULT_CONTIGUITY_SAMPLES, seed)
                .map_err(|e| CliError::runtime(e.to_string()))?;
        if !ok {
            return Err(CliError::runtime(format!(
                "contiguity probe failed on range [{}, {}] for target {target}",
                range.min_value, range.max_value
            )));
        }
        Some(true)
    };

    println!(
        "{},{},{},{:.2}",
        target,
        range.min_value,
        range.max_value,
        goodness_to_f64(rate)
    );
    let report = serde_json::json!({
        "target": target,
        "min_value": range.min_value,
        "max_value": range.max_value,
        "goodness": goodness_to_f64(rate),
        "goodness_exact": { "numer": *rate.numer(), "denom": *rate.denom() },
        "leakage_ratio": leakage,
        "leaked_count": view.leaked_count(),
        "n_addresses": scenario.n_addresses,
        "n_transactions": scenario.transfers.len(),
        "total_supply": scenario.total_supply,
        "hide_mint": hide_mint,
        "seed": seed,
        "solve_time_s": estimate.solve_time.as_secs_f64(),
        "contiguity_verified": contiguous,
    });
    write_json(out, &report)?;
    Ok(())
}

struct SweepConfig {
    addresses: Vec<u32>,
    transactions: Vec<usize>,
    leakage: Vec<f64>,
    supply: u64,
    runs: usize,
    seed: u64,
    jobs: Option<usize>,
    no_contiguity: bool,
    hide_mint: bool,
    out: PathBuf,
}

fn cmd_sweep(config: SweepConfig) -> Result<(), CliError> {
    check_supply(config.supply)?;
    for &ratio in &config.leakage {
        check_leakage(ratio)?;
    }
    for &a in &config.addresses {
        if a < 2 {
            return Err(CliError::usage(format!("--addresses entries must be >= 2, got {a}")));
        }
    }
    if config.runs == 0 {
        return Err(CliError::usage("--runs must be at least 1"));
    }
    if config.jobs == Some(0) {
        return Err(CliError::usage("--jobs must be at least 1"));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0)) // 0 = available cores
        .build()
        .map_err(|e| CliError::runtime(format!("cannot build thread pool: {e}")))?;

    let mut summary = String::new();
    let mut detail = String::new();
    summary.push_str(ExperimentReport::SUMMARY_HEADER);
    summary.push('\n');
    detail.push_str(ExperimentReport::DETAIL_HEADER);
    detail.push('\n');

    // Cells run in config order; runs within a cell parallelize.
    for &n_addresses in &config.addresses {
        for &n_transactions in &config.transactions {
            for &ratio in &config.leakage {
                let cell = ExperimentConfig {
                    n_addresses,
                    n_transactions,
                    total_supply: config.supply,
                    leakage_ratio: ratio,
                    runs: config.runs,
                    base_seed: config.seed,
                    check_contiguity: !config.no_contiguity,
                    contiguity_samples: DEFAULT_CONTIGUITY_SAMPLES,
                    hide_mint: config.hide_mint,
                };
                let report = pool
                    .install(|| ptts::attack::run_experiment(&cell))
                    .map_err(|e| CliError::runtime(e.to_string()))?;
                if let Some(bad) = report
                    .rows
                    .iter()
                    .find(|r| r.contiguous == Some(false))
                {
                    return Err(CliError::runtime(format!(
                        "contiguity probe failed at cell {n_addresses}/{n_transactions}/{ratio} \
                         run {} (seed {})",
                        bad.run, bad.seed
                    )));
                }
                let row = report.summary_csv_row();
                println!("{row}");
                let _ = writeln!(summary, "{row}");
                for line in report.detail_csv_rows() {
                    let _ = writeln!(detail, "{line}");
                }
            }
        }
    }

    write_text(&config.out, &summary)?;
    write_text(&detail_path(&config.out), &detail)?;
    Ok(())
}

fn detail_path(out: &Path) -> PathBuf {
    out.with_extension("detail.csv")
}

fn cmd_oracle_check(instances: usize, seed: u64) -> Result<(), CliError> {
    if instances == 0 {
        return Err(CliError::usage("--instances must be at least 1"));
    }
    let limits = OracleLimits::default();
    let mismatches = cross_check(instances, seed, &limits, solver_objective)
        .map_err(|e| CliError::runtime(format!("solver error during cross-check: {e}")))?;
    if mismatches.is_empty() {
        println!("oracle check: {instances}/{instances} instances agree");
        return Ok(());
    }
    let mut message = format!(
        "oracle check: {} of {instances} instances disagree\n",
        mismatches.len()
    );
    for m in &mismatches {
        let _ = writeln!(
            message,
            "instance {}: solver {:?} (feasible {}), oracle {:?} (feasible {})\n{}",
            m.instance,
            m.solver_objective,
            m.solver_feasible,
            m.oracle_objective,
            m.oracle_feasible,
            m.network_dimacs
        );
    }
    Err(CliError::runtime(message))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}
