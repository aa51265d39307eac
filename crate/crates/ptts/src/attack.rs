//! Balance range estimation from an attacker's view of the ledger:
//! build the flow network over the public transfer topology, run one
//! minimum-cost solve with cost -1 on the target's balance edge (maximum
//! feasible balance) and one with cost +1 (minimum feasible balance),
//! score the range with the goodness rate, and probe contiguity.
//!
//! The experiment harness sweeps scenario sizes and leakage ratios,
//! averaging goodness and solve time over independent runs.

use crate::flow::{is_feasible, solve_min_cost_flow, FlowError, FlowNetwork, SolveResult};
use crate::protocol::Address;
use crate::scenario::{generate_scenario, select_leaked, LeakedSet, Scenario, ScenarioError};
use crate::seeding::{stream_rng, STREAM_PROBES, STREAM_TARGET};
use crate::TokenAmount;
use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Exact goodness rate: `1 - (max - min) / supply`.
pub type Goodness = Ratio<u64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AttackError {
    #[error("target {target} out of range for {n_addresses} addresses")]
    UnknownTarget { target: Address, n_addresses: u32 },
    #[error("leaked amounts admit no feasible flow; the view is corrupted")]
    InconsistentLeak,
    #[error("total supply {0} too large for exact 64-bit arithmetic")]
    SupplyTooLarge(TokenAmount),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(
        "soundness violated: true balance {true_balance} outside [{min_value}, {max_value}] \
         for target {target} (seed {seed})"
    )]
    SoundnessViolation {
        seed: u64,
        target: Address,
        min_value: TokenAmount,
        max_value: TokenAmount,
        true_balance: TokenAmount,
    },
}

/// One transfer as the adversary sees it: endpoints always, the amount
/// only if that index leaked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedTransfer {
    pub index: usize,
    pub from: Address,
    pub to: Address,
    pub amount: Option<TokenAmount>,
}

/// Everything the adversary holds: the address set, the public transfer
/// topology and the leaked amounts. No unleaked amount and no blind
/// factor ever enters this structure, and the scenario seed is dropped
/// (it would regenerate the ground truth).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackerView {
    pub n_addresses: u32,
    pub deployer: Address,
    pub total_supply: TokenAmount,
    pub transfers: Vec<ObservedTransfer>,
    /// Treat the mint as unknown: bound the supply edge by `[0, supply]`
    /// instead of forcing it. Deployment metadata is public, so the
    /// default is a known mint.
    #[serde(default)]
    pub hide_mint: bool,
}

impl AttackerView {
    pub fn from_scenario(scenario: &Scenario, leaked: &LeakedSet) -> Self {
        AttackerView {
            n_addresses: scenario.n_addresses,
            deployer: scenario.deployer,
            total_supply: scenario.total_supply,
            transfers: scenario
                .transfers
                .iter()
                .map(|t| ObservedTransfer {
                    index: t.index,
                    from: t.from,
                    to: t.to,
                    amount: leaked.contains(t.index).then_some(t.amount),
                })
                .collect(),
            hide_mint: false,
        }
    }

    pub fn leaked_count(&self) -> usize {
        self.transfers.iter().filter(|t| t.amount.is_some()).count()
    }
}

/// Feasible balance interval for one address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceRange {
    pub target: Address,
    pub min_value: TokenAmount,
    pub max_value: TokenAmount,
}

impl BalanceRange {
    pub fn width(&self) -> TokenAmount {
        self.max_value - self.min_value
    }

    pub fn contains(&self, balance: TokenAmount) -> bool {
        self.min_value <= balance && balance <= self.max_value
    }
}

/// Which end of the feasible interval a solve pins down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeEnd {
    /// Cost +1 on the target's balance edge: the solver ships as little
    /// as possible through it.
    Min,
    /// Cost -1: the solver ships as much as possible through it.
    Max,
}

impl RangeEnd {
    fn cost(self) -> i32 {
        match self {
            RangeEnd::Min => 1,
            RangeEnd::Max => -1,
        }
    }
}

/// Shared construction: source/sink plus one node per address, the mint
/// edge, one edge per transfer (leaked ones forced), and one balance edge
/// per address into the sink. Returns the network and the index of the
/// target's balance edge. `balance_edge_cost` is the only nonzero cost;
/// `forced_balance` pins the target's balance edge to an exact value for
/// feasibility probes.
fn build_network(
    view: &AttackerView,
    target: Address,
    balance_edge_cost: i32,
    forced_balance: Option<TokenAmount>,
) -> Result<(FlowNetwork, usize), AttackError> {
    let n = view.n_addresses as usize;
    if target >= view.n_addresses {
        return Err(AttackError::UnknownTarget {
            target,
            n_addresses: view.n_addresses,
        });
    }
    let supply = view.total_supply;
    let supply_signed =
        i64::try_from(supply).map_err(|_| AttackError::SupplyTooLarge(supply))?;

    let source = n;
    let sink = n + 1;
    let mut network = FlowNetwork::new(n + 2);
    network.set_supply(source, supply_signed);
    network.set_supply(sink, -supply_signed);

    let mint_lower = if view.hide_mint { 0 } else { supply };
    network.add_edge(source, view.deployer as usize, mint_lower, supply, 0)?;

    for t in &view.transfers {
        let (lower, upper) = match t.amount {
            Some(v) => (v, v),
            None => (0, supply),
        };
        network.add_edge(t.from as usize, t.to as usize, lower, upper, 0)?;
    }

    let mut target_edge = 0;
    for address in 0..n {
        let (lower, upper, cost) = if address == target as usize {
            match forced_balance {
                Some(m) => (m, m, balance_edge_cost),
                None => (0, supply, balance_edge_cost),
            }
        } else {
            (0, supply, 0)
        };
        let edge = network.add_edge(address, sink, lower, upper, cost)?;
        if address == target as usize {
            target_edge = edge;
        }
    }
    Ok((network, target_edge))
}

/// The disclosure network for one end of the target's balance range.
pub fn build_attack_network(
    view: &AttackerView,
    target: Address,
    end: RangeEnd,
) -> Result<(FlowNetwork, usize), AttackError> {
    build_network(view, target, end.cost(), None)
}

/// All-zero-cost variant for feasibility probing; `forced_balance` pins
/// the target's balance edge when given.
pub fn build_probe_network(
    view: &AttackerView,
    target: Address,
    forced_balance: Option<TokenAmount>,
) -> Result<(FlowNetwork, usize), AttackError> {
    build_network(view, target, 0, forced_balance)
}

/// A balance range plus the wall-clock time spent inside the two solves
/// (network construction excluded).
#[derive(Debug, Clone)]
pub struct RangeEstimate {
    pub range: BalanceRange,
    pub solve_time: Duration,
}

fn timed_bound(
    view: &AttackerView,
    target: Address,
    end: RangeEnd,
) -> Result<(TokenAmount, Duration), AttackError> {
    let (network, target_edge) = build_attack_network(view, target, end)?;
    let started = Instant::now();
    let result = solve_min_cost_flow(&network)?;
    let elapsed = started.elapsed();
    match result {
        SolveResult::Optimal(solution) => {
            let bound = solution.flow(target_edge);
            // Only the target edge carries cost, so the objective is
            // exactly +-(flow on that edge).
            debug_assert_eq!(
                solution.objective,
                i64::from(end.cost()) * bound as i64,
                "objective should equal the signed target-edge flow"
            );
            Ok((bound, elapsed))
        }
        SolveResult::Infeasible => Err(AttackError::InconsistentLeak),
    }
}

/// Two minimum-cost solves bound the target's feasible balance from both
/// sides. The solves are independent and run in parallel; the reported
/// time is the sum of the two solver phases.
pub fn estimate_balance_range(
    view: &AttackerView,
    target: Address,
) -> Result<RangeEstimate, AttackError> {
    let (min_result, max_result) = rayon::join(
        || timed_bound(view, target, RangeEnd::Min),
        || timed_bound(view, target, RangeEnd::Max),
    );
    let (min_value, min_time) = min_result?;
    let (max_value, max_time) = max_result?;
    Ok(RangeEstimate {
        range: BalanceRange {
            target,
            min_value,
            max_value,
        },
        solve_time: min_time + max_time,
    })
}

/// `1 - (max - min) / supply`, in exact rational arithmetic.
pub fn goodness(range: &BalanceRange, token_supply: TokenAmount) -> Goodness {
    assert!(token_supply > 0, "goodness needs a positive supply");
    Ratio::new(token_supply - range.width(), token_supply)
}

pub fn goodness_to_f64(g: Goodness) -> f64 {
    *g.numer() as f64 / *g.denom() as f64
}

/// Probe `samples` balances across `[min, max]` (both endpoints and the
/// midpoint always, the rest uniform) by forcing the target's balance
/// edge and checking feasibility. True iff every probe is feasible, as
/// the convexity of the feasible region predicts.
pub fn verify_contiguity<R: Rng + ?Sized>(
    view: &AttackerView,
    target: Address,
    range: &BalanceRange,
    samples: usize,
    rng: &mut R,
) -> Result<bool, AttackError> {
    let mut probes = vec![
        range.min_value,
        range.max_value,
        range.min_value + range.width() / 2,
    ];
    for _ in probes.len()..samples {
        probes.push(rng.gen_range(range.min_value..=range.max_value));
    }
    probes.sort_unstable();
    probes.dedup();
    for balance in probes {
        let (network, _) = build_probe_network(view, target, Some(balance))?;
        if !is_feasible(&network) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// [`verify_contiguity`] with probes drawn from the same deterministic
/// stream the experiment harness uses.
pub fn verify_contiguity_seeded(
    view: &AttackerView,
    target: Address,
    range: &BalanceRange,
    samples: usize,
    seed: u64,
) -> Result<bool, AttackError> {
    let mut rng = stream_rng(seed, STREAM_PROBES);
    verify_contiguity(view, target, range, samples, &mut rng)
}

/// One experiment cell: scenario shape, leakage, and how many independent
/// runs to average over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_addresses: u32,
    pub n_transactions: usize,
    pub total_supply: TokenAmount,
    pub leakage_ratio: f64,
    pub runs: usize,
    pub base_seed: u64,
    pub check_contiguity: bool,
    pub contiguity_samples: usize,
    pub hide_mint: bool,
}

impl ExperimentConfig {
    pub fn new(n_addresses: u32, n_transactions: usize, leakage_ratio: f64) -> Self {
        ExperimentConfig {
            n_addresses,
            n_transactions,
            total_supply: 1_000_000,
            leakage_ratio,
            runs: 20,
            base_seed: 0,
            check_contiguity: true,
            contiguity_samples: 9,
            hide_mint: false,
        }
    }
}

/// Outcome of one run: the attacked target, its estimated range, the
/// goodness rate and the ground truth it must contain.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub target: Address,
    pub min_value: TokenAmount,
    pub max_value: TokenAmount,
    pub goodness: Goodness,
    pub true_balance: TokenAmount,
    pub in_range: bool,
    pub contiguous: Option<bool>,
    pub solve_time: Duration,
}

/// Aggregated sweep cell. `rows` keeps per-run detail in run order.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<RunRow>,
    pub avg_goodness: Goodness,
    pub avg_solve_time: Duration,
}

impl ExperimentReport {
    pub const SUMMARY_HEADER: &'static str =
        "n_addresses,n_transactions,leakage_ratio,runs,avg_goodness,avg_solve_time_s";

    pub const DETAIL_HEADER: &'static str = "n_addresses,n_transactions,leakage_ratio,run,seed,\
         target,min,max,goodness,true_balance,in_range";

    pub fn summary_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.2},{:.2}",
            self.config.n_addresses,
            self.config.n_transactions,
            self.config.leakage_ratio,
            self.config.runs,
            goodness_to_f64(self.avg_goodness),
            self.avg_solve_time.as_secs_f64(),
        )
    }

    pub fn detail_csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.rows.iter().map(|row| {
            format!(
                "{},{},{},{},{},{},{},{},{:.2},{},{}",
                self.config.n_addresses,
                self.config.n_transactions,
                self.config.leakage_ratio,
                row.run,
                row.seed,
                row.target,
                row.min_value,
                row.max_value,
                goodness_to_f64(row.goodness),
                row.true_balance,
                row.in_range,
            )
        })
    }
}

fn run_once(config: &ExperimentConfig, run: usize) -> Result<RunRow, AttackError> {
    let seed = config.base_seed.wrapping_add(run as u64);
    let scenario = generate_scenario(
        config.n_addresses,
        config.n_transactions,
        config.total_supply,
        seed,
    )?;
    let leaked = select_leaked(&scenario, config.leakage_ratio, seed);
    let mut view = AttackerView::from_scenario(&scenario, &leaked);
    view.hide_mint = config.hide_mint;

    let target = stream_rng(seed, STREAM_TARGET).gen_range(0..config.n_addresses);
    let estimate = estimate_balance_range(&view, target)?;
    let true_balance = scenario.true_balance(target);
    if !estimate.range.contains(true_balance) {
        return Err(AttackError::SoundnessViolation {
            seed,
            target,
            min_value: estimate.range.min_value,
            max_value: estimate.range.max_value,
            true_balance,
        });
    }
    let contiguous = if config.check_contiguity {
        let mut probe_rng = stream_rng(seed, STREAM_PROBES);
        Some(verify_contiguity(
            &view,
            target,
            &estimate.range,
            config.contiguity_samples,
            &mut probe_rng,
        )?)
    } else {
        None
    };
    Ok(RunRow {
        run,
        seed,
        target,
        min_value: estimate.range.min_value,
        max_value: estimate.range.max_value,
        goodness: goodness(&estimate.range, config.total_supply),
        true_balance,
        in_range: true,
        contiguous,
        solve_time: estimate.solve_time,
    })
}

/// Run every seed of the cell (in parallel), hard-asserting that the true
/// balance falls inside every estimated range, and average goodness and
/// solve time.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, AttackError> {
    assert!(config.runs >= 1, "an experiment needs at least one run");
    let rows: Vec<RunRow> = (0..config.runs)
        .into_par_iter()
        .map(|run| run_once(config, run))
        .collect::<Result<_, _>>()?;
    let total_goodness: Goodness = rows
        .iter()
        .map(|r| r.goodness)
        .fold(Ratio::from_integer(0), |acc, g| acc + g);
    let avg_goodness = total_goodness / Ratio::from_integer(rows.len() as u64);
    let total_time: Duration = rows.iter().map(|r| r.solve_time).sum();
    let avg_solve_time = total_time / rows.len() as u32;
    Ok(ExperimentReport {
        config: config.clone(),
        rows,
        avg_goodness,
        avg_solve_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::generate_scenario;

    fn full_leak_view(scenario: &Scenario) -> AttackerView {
        let leaked = select_leaked(scenario, 1.0, scenario.seed);
        AttackerView::from_scenario(scenario, &leaked)
    }

    #[test]
    fn network_shape_matches_construction() {
        let scenario = generate_scenario(7, 12, 1_000, 3).unwrap();
        let view = full_leak_view(&scenario);
        let (network, target_edge) = build_attack_network(&view, 2, RangeEnd::Max).unwrap();
        // nodes: addresses + source + sink; edges: transfers + mint + balances
        assert_eq!(network.node_count(), 7 + 2);
        assert_eq!(network.edges().len(), 12 + 1 + 7);
        assert_eq!(target_edge, 1 + 12 + 2);
        let balance_edge = network.edges()[target_edge];
        assert_eq!(balance_edge.cost, -1);
        assert_eq!((balance_edge.lower, balance_edge.upper), (0, 1_000));
        // every other cost is zero
        let nonzero: Vec<_> = network
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.cost != 0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nonzero, vec![target_edge]);
    }

    #[test]
    fn leaked_edges_are_forced() {
        let scenario = generate_scenario(4, 6, 1_000, 5).unwrap();
        let leaked = select_leaked(&scenario, 0.5, 99);
        let view = AttackerView::from_scenario(&scenario, &leaked);
        let (network, _) = build_attack_network(&view, 1, RangeEnd::Min).unwrap();
        for (t, edge) in scenario.transfers.iter().zip(&network.edges()[1..]) {
            if leaked.contains(t.index) {
                assert_eq!((edge.lower, edge.upper), (t.amount, t.amount));
            } else {
                assert_eq!((edge.lower, edge.upper), (0, 1_000));
            }
        }
        // mint edge forced by default
        let mint = network.edges()[0];
        assert_eq!((mint.lower, mint.upper), (1_000, 1_000));
    }

    #[test]
    fn hide_mint_relaxes_the_supply_edge() {
        let scenario = generate_scenario(4, 6, 1_000, 5).unwrap();
        let mut view = full_leak_view(&scenario);
        view.hide_mint = true;
        let (network, _) = build_attack_network(&view, 1, RangeEnd::Min).unwrap();
        assert_eq!((network.edges()[0].lower, network.edges()[0].upper), (0, 1_000));
    }

    #[test]
    fn unknown_target_is_rejected() {
        let scenario = generate_scenario(4, 2, 100, 1).unwrap();
        let view = full_leak_view(&scenario);
        assert_eq!(
            build_attack_network(&view, 9, RangeEnd::Min).unwrap_err(),
            AttackError::UnknownTarget { target: 9, n_addresses: 4 }
        );
    }

    #[test]
    fn full_leakage_pins_every_balance() {
        let scenario = generate_scenario(8, 30, 1_000_000, 11).unwrap();
        let view = full_leak_view(&scenario);
        for target in scenario.addresses() {
            let estimate = estimate_balance_range(&view, target).unwrap();
            let truth = scenario.true_balance(target);
            assert_eq!(estimate.range.min_value, truth);
            assert_eq!(estimate.range.max_value, truth);
            assert_eq!(goodness(&estimate.range, 1_000_000), Ratio::from_integer(1));
        }
    }

    #[test]
    fn inactive_target_is_pinned_to_zero() {
        // one transfer 0 -> 1 fully leaked; address 2 never transacts
        let scenario: Scenario = serde_json::from_value(serde_json::json!({
            "n_addresses": 3,
            "total_supply": 500u64,
            "deployer": 0,
            "seed": 4,
            "transfers": [{"index": 0, "from": 0, "to": 1, "amount": 200u64}]
        }))
        .unwrap();
        let leaked = select_leaked(&scenario, 0.0, 1);
        let view = AttackerView::from_scenario(&scenario, &leaked);
        let estimate = estimate_balance_range(&view, 2).unwrap();
        assert_eq!((estimate.range.min_value, estimate.range.max_value), (0, 0));
        assert_eq!(goodness(&estimate.range, 500), Ratio::from_integer(1));
    }

    #[test]
    fn known_mint_one_unleaked_transfer_gives_full_span() {
        // mint S->0 of 100 known, one unleaked transfer 0 -> 1:
        // enumeration puts the receiver anywhere in [0, 100]
        let scenario: Scenario = serde_json::from_value(serde_json::json!({
            "n_addresses": 2,
            "total_supply": 100u64,
            "deployer": 0,
            "seed": 0,
            "transfers": [{"index": 0, "from": 0, "to": 1, "amount": 37u64}]
        }))
        .unwrap();
        let leaked = select_leaked(&scenario, 0.0, 0);
        let view = AttackerView::from_scenario(&scenario, &leaked);
        let estimate = estimate_balance_range(&view, 1).unwrap();
        assert_eq!((estimate.range.min_value, estimate.range.max_value), (0, 100));
        assert_eq!(goodness(&estimate.range, 100), Ratio::from_integer(0));
    }

    #[test]
    fn objectives_equal_signed_target_edge_flow() {
        // cost -1 solve: objective == -max_value; cost +1: objective ==
        // +min_value (every other edge costs zero)
        let scenario = generate_scenario(6, 15, 5_000, 8).unwrap();
        let leaked = select_leaked(&scenario, 0.4, 8);
        let view = AttackerView::from_scenario(&scenario, &leaked);
        for target in scenario.addresses() {
            let range = estimate_balance_range(&view, target).unwrap().range;
            for (end, expected) in [
                (RangeEnd::Max, -(range.max_value as i64)),
                (RangeEnd::Min, range.min_value as i64),
            ] {
                let (network, edge) = build_attack_network(&view, target, end).unwrap();
                let solution = crate::flow::solve_min_cost_flow(&network).unwrap();
                let solution = solution.optimal().unwrap();
                assert_eq!(solution.objective, expected);
                assert_eq!(
                    solution.flow(edge),
                    if end == RangeEnd::Max { range.max_value } else { range.min_value }
                );
            }
        }
    }

    #[test]
    fn corrupted_leak_is_reported_as_inconsistent() {
        // leaked amount exceeds everything the sender could ever receive
        let view = AttackerView {
            n_addresses: 2,
            deployer: 0,
            total_supply: 100,
            transfers: vec![ObservedTransfer { index: 0, from: 0, to: 1, amount: Some(150) }],
            hide_mint: false,
        };
        assert_eq!(
            estimate_balance_range(&view, 1).unwrap_err(),
            AttackError::InconsistentLeak
        );
    }

    #[test]
    fn goodness_formula_cases() {
        let supply = 1_000;
        let exact = BalanceRange { target: 0, min_value: 4, max_value: 4 };
        assert_eq!(goodness(&exact, supply), Ratio::from_integer(1));
        let vacuous = BalanceRange { target: 0, min_value: 0, max_value: supply };
        assert_eq!(goodness(&vacuous, supply), Ratio::from_integer(0));
        let half = BalanceRange { target: 0, min_value: 250, max_value: 750 };
        assert_eq!(goodness(&half, supply), Ratio::new(1, 2));
    }

    #[test]
    fn contiguity_holds_and_beyond_max_is_infeasible() {
        let scenario = generate_scenario(6, 20, 10_000, 21).unwrap();
        let leaked = select_leaked(&scenario, 0.5, 21);
        let view = AttackerView::from_scenario(&scenario, &leaked);
        for target in scenario.addresses() {
            let estimate = estimate_balance_range(&view, target).unwrap();
            let mut rng = stream_rng(21, STREAM_PROBES);
            assert!(
                verify_contiguity(&view, target, &estimate.range, 9, &mut rng).unwrap(),
                "range {:?} should be contiguous",
                estimate.range
            );
            // probing past the proven maximum must be infeasible
            if estimate.range.max_value < scenario.total_supply {
                let (network, _) =
                    build_probe_network(&view, target, Some(estimate.range.max_value + 1))
                        .unwrap();
                assert!(!is_feasible(&network));
            }
        }
    }

    #[test]
    fn nested_leaks_never_widen_the_range() {
        let scenario = generate_scenario(10, 50, 100_000, 31).unwrap();
        let target = 3;
        let mut previous: Option<BalanceRange> = None;
        for ratio in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let leaked = select_leaked(&scenario, ratio, 7);
            let view = AttackerView::from_scenario(&scenario, &leaked);
            let range = estimate_balance_range(&view, target).unwrap().range;
            if let Some(prev) = previous {
                assert!(range.min_value >= prev.min_value);
                assert!(range.max_value <= prev.max_value);
            }
            assert!(range.contains(scenario.true_balance(target)));
            previous = Some(range);
        }
    }

    #[test]
    fn experiment_full_leakage_averages_to_one() {
        let mut config = ExperimentConfig::new(10, 20, 1.0);
        config.runs = 5;
        config.total_supply = 10_000;
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.rows.len(), 5);
        assert_eq!(report.avg_goodness, Ratio::from_integer(1));
        assert!(report.rows.iter().all(|r| r.in_range));
        assert!(report.rows.iter().all(|r| r.contiguous == Some(true)));
        assert!(report.summary_csv_row().contains("1.00"));
    }

    #[test]
    fn attacker_view_serializes_unleaked_amounts_as_null() {
        let scenario = generate_scenario(3, 2, 100, 1).unwrap();
        let mut leaked = select_leaked(&scenario, 0.5, 1);
        assert_eq!(leaked.indices.len(), 1);
        let leaked_index = *leaked.indices.iter().next().unwrap();
        leaked.indices = [leaked_index].into_iter().collect();
        let view = AttackerView::from_scenario(&scenario, &leaked);

        let json: serde_json::Value = serde_json::to_value(&view).unwrap();
        assert!(json.get("seed").is_none(), "the generator seed must not leak");
        for t in json["transfers"].as_array().unwrap() {
            let index = t["index"].as_u64().unwrap() as usize;
            if index == leaked_index {
                assert!(t["amount"].is_u64());
            } else {
                assert!(t["amount"].is_null(), "unleaked amount must be null");
            }
        }
        let back: AttackerView = serde_json::from_value(json).unwrap();
        assert_eq!(back, view);
    }

    #[test]
    fn experiment_rows_are_deterministic() {
        let mut config = ExperimentConfig::new(8, 15, 0.5);
        config.runs = 4;
        config.base_seed = 77;
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a.avg_goodness, b.avg_goodness);
        let key = |r: &RunRow| (r.run, r.seed, r.target, r.min_value, r.max_value);
        assert_eq!(
            a.rows.iter().map(key).collect::<Vec<_>>(),
            b.rows.iter().map(key).collect::<Vec<_>>()
        );
    }
}
