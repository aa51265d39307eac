//! Brute-force reference for tiny flow instances. Enumerates every integer
//! assignment to the free edges and filters by exact conservation; no
//! cleverness on purpose. Anchors the solver and the attack range
//! estimates in tests.

use crate::attack::{build_probe_network, AttackError, AttackerView, BalanceRange};
use crate::flow::{dimacs, is_feasible, solve_min_cost_flow, FlowError, FlowNetwork, SolveResult};
use crate::protocol::Address;
use crate::seeding::{stream_rng, STREAM_SCENARIO};
use rand::Rng;
use thiserror::Error;

/// Hard ceiling on enumeration size, independent of the configured limits.
const MAX_ENUMERATION: u128 = 100_000_000;

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_free_edges: usize,
    pub max_bound_span: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_free_edges: 6,
            max_bound_span: 20,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds oracle limits: {0}")]
    LimitsExceeded(String),
    #[error("no feasible assignment exists for the leaked amounts")]
    InconsistentLeak,
    #[error(transparent)]
    Attack(#[from] AttackError),
}

/// Free (non-forced) edges of a network, checked against the limits.
fn free_edges(n: &FlowNetwork, limits: &OracleLimits) -> Result<Vec<usize>, OracleError> {
    let free: Vec<usize> = n
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.lower < e.upper)
        .map(|(i, _)| i)
        .collect();
    if free.len() > limits.max_free_edges {
        return Err(OracleError::LimitsExceeded(format!(
            "{} free edges > {}",
            free.len(),
            limits.max_free_edges
        )));
    }
    let mut combinations: u128 = 1;
    for &i in &free {
        let e = &n.edges()[i];
        let span = e.upper - e.lower;
        if span > limits.max_bound_span {
            return Err(OracleError::LimitsExceeded(format!(
                "edge {i} span {span} > {}",
                limits.max_bound_span
            )));
        }
        combinations = combinations.saturating_mul(u128::from(span) + 1);
    }
    if combinations > MAX_ENUMERATION {
        return Err(OracleError::LimitsExceeded(format!(
            "{combinations} assignments > {MAX_ENUMERATION}"
        )));
    }
    Ok(free)
}

/// Walk every integer assignment of the free edges; `visit` receives the
/// full flow vector of each assignment that satisfies conservation.
fn enumerate_feasible(
    n: &FlowNetwork,
    limits: &OracleLimits,
    mut visit: impl FnMut(&[u64]),
) -> Result<(), OracleError> {
    let free = free_edges(n, limits)?;
    let mut flows: Vec<u64> = n.edges().iter().map(|e| e.lower).collect();
    loop {
        if conserves(n, &flows) {
            visit(&flows);
        }
        // Odometer step over the free edges, lexicographic by edge index.
        let mut advanced = false;
        for &i in free.iter().rev() {
            let e = &n.edges()[i];
            if flows[i] < e.upper {
                flows[i] += 1;
                advanced = true;
                break;
            }
            flows[i] = e.lower;
        }
        if !advanced {
            return Ok(());
        }
    }
}

fn conserves(n: &FlowNetwork, flows: &[u64]) -> bool {
    let mut net_out = vec![0i128; n.node_count()];
    for (e, &x) in n.edges().iter().zip(flows) {
        net_out[e.from] += i128::from(x);
        net_out[e.to] -= i128::from(x);
    }
    net_out
        .iter()
        .zip(n.supplies())
        .all(|(&net, &b)| net == i128::from(b))
}

/// Exhaustive minimum of `sum(cost * flow)` over feasible integer flows.
/// `None` means infeasible.
pub fn brute_force_min_cost(
    n: &FlowNetwork,
    limits: &OracleLimits,
) -> Result<Option<i64>, OracleError> {
    let mut best: Option<i128> = None;
    enumerate_feasible(n, limits, |flows| {
        let objective: i128 = n
            .edges()
            .iter()
            .zip(flows)
            .map(|(e, &x)| i128::from(e.cost) * i128::from(x))
            .sum();
        best = Some(match best {
            Some(b) => b.min(objective),
            None => objective,
        });
    })?;
    Ok(best.map(|b| b as i64))
}

/// Exhaustive feasibility check.
pub fn brute_force_feasible(n: &FlowNetwork, limits: &OracleLimits) -> Result<bool, OracleError> {
    let mut feasible = false;
    enumerate_feasible(n, limits, |_| feasible = true)?;
    Ok(feasible)
}

/// Enumerate every feasible flow of the attack network for `target` and
/// return the min/max flow seen on the target's balance edge. Shares the
/// network construction with the attack but none of the optimization.
pub fn brute_force_range(
    view: &AttackerView,
    target: Address,
    limits: &OracleLimits,
) -> Result<BalanceRange, OracleError> {
    let (network, balance_edge) = build_probe_network(view, target, None)?;
    let mut min_seen: Option<u64> = None;
    let mut max_seen: Option<u64> = None;
    enumerate_feasible(&network, limits, |flows| {
        let x = flows[balance_edge];
        min_seen = Some(min_seen.map_or(x, |m| m.min(x)));
        max_seen = Some(max_seen.map_or(x, |m| m.max(x)));
    })?;
    match (min_seen, max_seen) {
        (Some(min_value), Some(max_value)) => Ok(BalanceRange {
            target,
            min_value,
            max_value,
        }),
        _ => Err(OracleError::InconsistentLeak),
    }
}

/// Random instance guaranteed inside the given limits: forward-only edges
/// (so negative costs can never form a cycle), small spans, and supplies
/// that are consistent with some in-bounds flow about half the time.
pub fn random_limited_network<R: Rng + ?Sized>(rng: &mut R, limits: &OracleLimits) -> FlowNetwork {
    let nodes = rng.gen_range(2..=5);
    let edges = rng.gen_range(1..=limits.max_free_edges);
    let mut n = FlowNetwork::new(nodes);
    for _ in 0..edges {
        let from = rng.gen_range(0..nodes - 1);
        let to = rng.gen_range(from + 1..nodes);
        let lower = rng.gen_range(0..=4u64);
        let span = rng.gen_range(0..=limits.max_bound_span.min(10));
        let cost = rng.gen_range(-2..=2);
        n.add_edge(from, to, lower, lower + span, cost).unwrap();
    }
    if rng.gen_bool(0.5) {
        let mut net = vec![0i64; nodes];
        for e in n.edges() {
            let x = rng.gen_range(e.lower..=e.upper) as i64;
            net[e.from] += x;
            net[e.to] -= x;
        }
        for (node, &b) in net.iter().enumerate() {
            n.set_supply(node, b);
        }
    } else {
        let mut total = 0i64;
        for node in 0..nodes - 1 {
            let b = rng.gen_range(-6..=6);
            n.set_supply(node, b);
            total += b;
        }
        n.set_supply(nodes - 1, -total);
    }
    n
}

/// One disagreement between a solver and the oracle, with the instance
/// dumped in the DIMACS-like format for replay.
#[derive(Debug, Clone)]
pub struct OracleMismatch {
    pub instance: usize,
    pub network_dimacs: String,
    pub solver_objective: Option<i64>,
    pub oracle_objective: Option<i64>,
    pub solver_feasible: bool,
    pub oracle_feasible: bool,
}

/// Adapter giving the production solver the signature [`cross_check`]
/// expects: `Some(objective)` or `None` for infeasible.
pub fn solver_objective(n: &FlowNetwork) -> Result<Option<i64>, FlowError> {
    Ok(match solve_min_cost_flow(n)? {
        SolveResult::Optimal(s) => Some(s.objective),
        SolveResult::Infeasible => None,
    })
}

/// Run `instances` random in-limits networks through `solver` and the
/// brute-force oracle, collecting every objective or feasibility
/// disagreement. Generic over the solver so a deliberately broken one can
/// exercise the harness itself.
pub fn cross_check<F>(
    instances: usize,
    seed: u64,
    limits: &OracleLimits,
    solver: F,
) -> Result<Vec<OracleMismatch>, FlowError>
where
    F: Fn(&FlowNetwork) -> Result<Option<i64>, FlowError>,
{
    let mut rng = stream_rng(seed, STREAM_SCENARIO);
    let mut mismatches = Vec::new();
    for instance in 0..instances {
        let n = random_limited_network(&mut rng, limits);
        let solver_objective = solver(&n)?;
        let oracle_objective = brute_force_min_cost(&n, limits)
            .expect("generator stays within oracle limits");
        let solver_feasible = is_feasible(&n);
        let oracle_feasible = oracle_objective.is_some();
        if solver_objective != oracle_objective || solver_feasible != oracle_feasible {
            mismatches.push(OracleMismatch {
                instance,
                network_dimacs: dimacs::network_to_string(&n),
                solver_objective,
                oracle_objective,
                solver_feasible,
                oracle_feasible,
            });
        }
    }
    Ok(mismatches)
}
