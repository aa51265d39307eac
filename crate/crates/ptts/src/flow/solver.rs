//! Two-phase solve: Dinic max-flow for feasibility on the reduced network,
//! then successive shortest augmenting paths with node potentials for the
//! optimum. Potentials start from one Bellman-Ford pass (all-zero init, a
//! virtual source to every node), which absorbs negative edge costs and
//! detects negative cycles.

use super::{
    reduce_lower_bounds, verify_certificate, FlowError, FlowNetwork, FlowSolution, SolveResult,
};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

const INF: i64 = i64::MAX / 4;

/// Residual graph with twin-paired edges: edge `e` and `e ^ 1` are
/// mutual reverses, so `to[e ^ 1]` recovers the tail of `e`.
struct Residual {
    node_count: usize,
    adj: Vec<Vec<u32>>,
    to: Vec<u32>,
    cap: Vec<i64>,
    cost: Vec<i64>,
}

impl Residual {
    fn new(node_count: usize) -> Self {
        Residual {
            node_count,
            adj: vec![Vec::new(); node_count],
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        let id = self.to.len();
        self.to.push(to as u32);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[from].push(id as u32);
        self.to.push(from as u32);
        self.cap.push(0);
        self.cost.push(-cost);
        self.adj[to].push(id as u32 + 1);
        id
    }

    fn tail(&self, edge: usize) -> usize {
        self.to[edge ^ 1] as usize
    }
}

/// Residual of a reduced (all lower bounds zero) network plus a super
/// source feeding every excess node and a super sink draining every
/// deficit node. Returns `(residual, source, sink, required_flow)`.
fn build_residual(red: &FlowNetwork) -> Result<(Residual, usize, usize, i64), FlowError> {
    let n = red.node_count();
    let source = n;
    let sink = n + 1;
    let mut res = Residual::new(n + 2);
    for e in red.edges() {
        let cap = i64::try_from(e.upper).map_err(|_| FlowError::Overflow)?;
        res.add(e.from, e.to, cap, i64::from(e.cost));
    }
    let mut required: i128 = 0;
    for (node, &b) in red.supplies().iter().enumerate() {
        if b > 0 {
            res.add(source, node, b, 0);
            required += i128::from(b);
        } else if b < 0 {
            res.add(node, sink, -b, 0);
        }
    }
    let required = i64::try_from(required).map_err(|_| FlowError::Overflow)?;
    Ok((res, source, sink, required))
}

/// Dinic max-flow over the edges `admit` allows; costs are ignored.
/// Blocking flows use an explicit path stack, so deep level graphs cannot
/// overflow the call stack.
fn max_flow_where<F: Fn(&Residual, usize) -> bool>(
    res: &mut Residual,
    source: usize,
    sink: usize,
    admit: F,
) -> i64 {
    let n = res.node_count;
    let mut total: i64 = 0;
    let mut level = vec![-1i32; n];
    let mut iter = vec![0usize; n];
    loop {
        level.fill(-1);
        level[source] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &e in &res.adj[u] {
                let v = res.to[e as usize] as usize;
                if res.cap[e as usize] > 0 && level[v] < 0 && admit(res, e as usize) {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[sink] < 0 {
            return total;
        }
        iter.fill(0);
        let mut path: Vec<usize> = Vec::new();
        let mut u = source;
        loop {
            if u == sink {
                let bottleneck = path.iter().map(|&e| res.cap[e]).min().unwrap_or(0);
                for &e in &path {
                    res.cap[e] -= bottleneck;
                    res.cap[e ^ 1] += bottleneck;
                }
                total += bottleneck;
                // Retreat to just before the first saturated edge.
                let cut = path
                    .iter()
                    .position(|&e| res.cap[e] == 0)
                    .unwrap_or(path.len());
                path.truncate(cut);
                u = path.last().map_or(source, |&e| res.to[e] as usize);
                continue;
            }
            let mut advanced = false;
            while iter[u] < res.adj[u].len() {
                let e = res.adj[u][iter[u]] as usize;
                let v = res.to[e] as usize;
                if res.cap[e] > 0 && level[v] == level[u] + 1 && admit(res, e) {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                iter[u] += 1;
            }
            if !advanced {
                level[u] = -1;
                if u == source {
                    break;
                }
                let e = path.pop().expect("non-source node reached without a path");
                u = res.tail(e);
                iter[u] += 1;
            }
        }
    }
}

fn max_flow(res: &mut Residual, source: usize, sink: usize) -> i64 {
    max_flow_where(res, source, sink, |_, _| true)
}

/// Ship `required` units from `source` to `sink` at minimum cost, assuming
/// feasibility was already established. Returns the final node potentials.
fn min_cost_phase(
    res: &mut Residual,
    source: usize,
    sink: usize,
    required: i64,
) -> Result<Vec<i64>, FlowError> {
    let n = res.node_count;
    let mut potential = vec![0i64; n];

    // Bellman-Ford from a virtual source connected to every node at
    // distance zero. Settles in at most n passes; a pass-n update means a
    // negative cycle.
    for round in 0..=n {
        let mut updated = false;
        for e in 0..res.to.len() {
            if res.cap[e] > 0 {
                let u = res.tail(e);
                let v = res.to[e] as usize;
                let candidate = potential[u] + res.cost[e];
                if candidate < potential[v] {
                    potential[v] = candidate;
                    updated = true;
                }
            }
        }
        if !updated {
            break;
        }
        if round == n {
            return Err(FlowError::NegativeCycle);
        }
    }

    let mut remaining = required;
    let mut dist = vec![INF; n];
    // Min-heap on (distance, Reverse(node)): among equal distances the
    // highest-numbered node pops first, which is the sink. Any tie order
    // is a valid Dijkstra; this one lets the early exit fire sooner.
    let mut heap: BinaryHeap<Reverse<(i64, Reverse<u32>)>> = BinaryHeap::new();
    while remaining > 0 {
        // Super-source arcs saturate for good: augmenting paths start at
        // the source and end at the sink, so nothing ever flows back.
        {
            let Residual { adj, cap, .. } = &mut *res;
            adj[source].retain(|&e| cap[e as usize] > 0);
        }
        dist.fill(INF);
        dist[source] = 0;
        heap.clear();
        heap.push(Reverse((0, Reverse(source as u32))));
        // Stops as soon as the sink is finalized; unfinalized labels are
        // then >= dist[sink], which the potential update below relies on.
        while let Some(Reverse((d, Reverse(u)))) = heap.pop() {
            let u = u as usize;
            if d > dist[u] {
                continue;
            }
            if u == sink {
                break;
            }
            for &e in &res.adj[u] {
                let e = e as usize;
                if res.cap[e] <= 0 {
                    continue;
                }
                let v = res.to[e] as usize;
                let reduced = res.cost[e] + potential[u] - potential[v];
                debug_assert!(reduced >= 0, "negative reduced cost under potentials");
                let candidate = d + reduced;
                if candidate < dist[v] {
                    dist[v] = candidate;
                    heap.push(Reverse((candidate, Reverse(v as u32))));
                }
            }
        }
        if dist[sink] >= INF {
            return Err(FlowError::Internal("sink unreachable after feasibility phase"));
        }

        let sink_dist = dist[sink];
        for (p, &d) in potential.iter_mut().zip(&dist) {
            *p += d.min(sink_dist);
        }

        // Maximal augmentation for this distance class: every edge of
        // every shortest path now has zero reduced cost, so a max-flow
        // restricted to zero-reduced-cost residual edges ships the whole
        // class at once and keeps reduced costs nonnegative.
        let admissible = |res: &Residual, e: usize| {
            res.cost[e] + potential[res.tail(e)] - potential[res.to[e] as usize] == 0
        };
        let pushed = max_flow_where(res, source, sink, admissible);
        if pushed <= 0 {
            return Err(FlowError::Internal("no admissible augmenting flow"));
        }
        remaining -= pushed;
    }
    Ok(potential)
}

pub(super) fn reduced_is_feasible(red: &FlowNetwork) -> bool {
    match build_residual(red) {
        Ok((mut res, source, sink, required)) => max_flow(&mut res, source, sink) >= required,
        Err(_) => false,
    }
}

pub(super) fn solve(n: &FlowNetwork) -> Result<SolveResult, FlowError> {
    if !n.supply_balanced() {
        return Ok(SolveResult::Infeasible);
    }
    let red = reduce_lower_bounds(n)?;

    // Phase 1: feasibility only. Phase 2 never starts on infeasible input.
    let (mut probe, source, sink, required) = build_residual(&red.network)?;
    if max_flow(&mut probe, source, sink) < required {
        return Ok(SolveResult::Infeasible);
    }

    // Phase 2: fresh residual, shortest-path augmentation to the optimum.
    let (mut res, source, sink, required) = build_residual(&red.network)?;
    let potential = min_cost_phase(&mut res, source, sink, required)?;

    let mut flows = Vec::with_capacity(n.edges().len());
    for (i, e) in red.network.edges().iter().enumerate() {
        let shipped = i64::try_from(e.upper).map_err(|_| FlowError::Overflow)? - res.cap[2 * i];
        flows.push(n.edges()[i].lower + shipped as u64);
    }
    let objective: i128 = n
        .edges()
        .iter()
        .zip(&flows)
        .map(|(e, &x)| i128::from(e.cost) * i128::from(x))
        .sum();
    let solution = FlowSolution {
        flows,
        objective: i64::try_from(objective).map_err(|_| FlowError::Overflow)?,
        potentials: potential[..n.node_count()].to_vec(),
    };
    if !verify_certificate(n, &solution) {
        return Err(FlowError::Internal("optimality certificate failed"));
    }
    Ok(SolveResult::Optimal(solution))
}
