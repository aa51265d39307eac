//! Desk-scale simulator of a private token transfer protocol (SHA-256
//! commitments, consent handshake, proof-gated deposit/withdraw) together
//! with a balance range attack toolkit that bounds per-address balances
//! from partially leaked transaction amounts via two minimum-cost-flow
//! solves per target.

pub mod attack;
pub mod commitment;
pub mod flow;
pub mod oracle;
pub mod protocol;
pub mod scenario;
mod seeding;

pub use attack::{
    estimate_balance_range, goodness, run_experiment, AttackerView, BalanceRange,
    ExperimentConfig, ExperimentReport,
};
pub use commitment::{commit, generate_blind, verify_open, BlindFactor, Commitment, TokenAmount};
pub use flow::{is_feasible, solve_min_cost_flow, FlowNetwork, FlowSolution, SolveResult};
pub use protocol::{Address, LedgerState, ProtocolError};
pub use scenario::{generate_scenario, replay_on_ledger, select_leaked, LeakedSet, Scenario};
