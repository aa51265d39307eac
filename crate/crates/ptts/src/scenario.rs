//! Random protocol-valid transaction histories with ground truth, the
//! leaked-subset selection, and end-to-end replay through the ledger.

use crate::commitment::{commit, generate_blind, BlindFactor, TokenAmount};
use crate::protocol::{
    open_sealed, prove, seal_message, Address, LedgerState, ProtocolError, PublicInputs,
    RelationKind, StepKind, TranscriptEntry, Witness,
};
use crate::seeding::{stream_rng, STREAM_LEAK, STREAM_REPLAY, STREAM_SCENARIO};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("need at least 2 addresses, got {0}")]
    TooFewAddresses(u32),
    #[error("total supply must be positive")]
    ZeroSupply,
    #[error("deployer {deployer} out of range for {n_addresses} addresses")]
    DeployerOutOfRange { deployer: Address, n_addresses: u32 },
    #[error("transfer {index}: {reason}")]
    InvalidTransfer { index: usize, reason: String },
}

/// One ground-truth transfer. The amount is hidden from the attacker
/// unless its index is leaked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub index: usize,
    pub from: Address,
    pub to: Address,
    pub amount: TokenAmount,
}

/// Ground-truth world: ordered transfers plus the final balances they
/// produce. Serializes as `{n_addresses, total_supply, deployer, seed,
/// transfers}`; the balances are re-derived (and the history re-validated)
/// on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioFile", into = "ScenarioFile")]
pub struct Scenario {
    pub n_addresses: u32,
    pub deployer: Address,
    pub total_supply: TokenAmount,
    pub seed: u64,
    pub transfers: Vec<TransferRecord>,
    true_balances: BTreeMap<Address, TokenAmount>,
}

impl Scenario {
    pub fn addresses(&self) -> impl Iterator<Item = Address> {
        0..self.n_addresses
    }

    pub fn true_balance(&self, address: Address) -> TokenAmount {
        self.true_balances.get(&address).copied().unwrap_or(0)
    }

    pub fn true_balances(&self) -> &BTreeMap<Address, TokenAmount> {
        &self.true_balances
    }
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    n_addresses: u32,
    total_supply: TokenAmount,
    deployer: Address,
    seed: u64,
    transfers: Vec<TransferRecord>,
}

impl From<Scenario> for ScenarioFile {
    fn from(s: Scenario) -> Self {
        ScenarioFile {
            n_addresses: s.n_addresses,
            total_supply: s.total_supply,
            deployer: s.deployer,
            seed: s.seed,
            transfers: s.transfers,
        }
    }
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = ScenarioError;

    fn try_from(f: ScenarioFile) -> Result<Self, ScenarioError> {
        if f.n_addresses < 2 {
            return Err(ScenarioError::TooFewAddresses(f.n_addresses));
        }
        if f.total_supply == 0 {
            return Err(ScenarioError::ZeroSupply);
        }
        if f.deployer >= f.n_addresses {
            return Err(ScenarioError::DeployerOutOfRange {
                deployer: f.deployer,
                n_addresses: f.n_addresses,
            });
        }
        let true_balances = derive_balances(&f)?;
        Ok(Scenario {
            n_addresses: f.n_addresses,
            deployer: f.deployer,
            total_supply: f.total_supply,
            seed: f.seed,
            transfers: f.transfers,
            true_balances,
        })
    }
}

/// Replay the transfer amounts arithmetically, validating every record
/// against the balance it would see on the ledger.
fn derive_balances(f: &ScenarioFile) -> Result<BTreeMap<Address, TokenAmount>, ScenarioError> {
    let invalid = |index: usize, reason: String| ScenarioError::InvalidTransfer { index, reason };
    let mut balances: BTreeMap<Address, TokenAmount> =
        (0..f.n_addresses).map(|a| (a, 0)).collect();
    balances.insert(f.deployer, f.total_supply);
    for (position, t) in f.transfers.iter().enumerate() {
        if t.index != position {
            return Err(invalid(position, format!("index {} out of order", t.index)));
        }
        if t.from >= f.n_addresses || t.to >= f.n_addresses {
            return Err(invalid(position, format!("endpoint {}->{} out of range", t.from, t.to)));
        }
        if t.amount == 0 {
            return Err(invalid(position, "amount must be at least 1".into()));
        }
        let from_balance = balances[&t.from];
        if t.amount > from_balance {
            return Err(invalid(
                position,
                format!("amount {} exceeds sender balance {}", t.amount, from_balance),
            ));
        }
        *balances.get_mut(&t.from).unwrap() -= t.amount;
        *balances.get_mut(&t.to).unwrap() += t.amount;
    }
    Ok(balances)
}

/// Generate a random, protocol-valid history: the deployer starts with the
/// whole supply; each transfer picks a sender uniformly among the
/// positive-balance addresses, a receiver uniformly among the others, and
/// an amount uniformly in `[1, sender balance]`.
pub fn generate_scenario(
    n_addresses: u32,
    n_transactions: usize,
    total_supply: TokenAmount,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    if n_addresses < 2 {
        return Err(ScenarioError::TooFewAddresses(n_addresses));
    }
    if total_supply == 0 {
        return Err(ScenarioError::ZeroSupply);
    }
    let deployer: Address = 0;
    let mut rng = stream_rng(seed, STREAM_SCENARIO);
    let n = n_addresses as usize;
    let mut balances = vec![0u64; n];
    balances[deployer as usize] = total_supply;

    // Positive-balance addresses, with each address's slot in the list so
    // membership updates stay O(1).
    let mut positive: Vec<Address> = vec![deployer];
    let mut slot: Vec<Option<usize>> = vec![None; n];
    slot[deployer as usize] = Some(0);

    let mut transfers = Vec::with_capacity(n_transactions);
    for index in 0..n_transactions {
        let from = positive[rng.gen_range(0..positive.len())];
        let mut to = rng.gen_range(0..n_addresses - 1);
        if to >= from {
            to += 1;
        }
        let amount = rng.gen_range(1..=balances[from as usize]);

        balances[from as usize] -= amount;
        if balances[from as usize] == 0 {
            let vacated = slot[from as usize].take().unwrap();
            positive.swap_remove(vacated);
            if let Some(&moved) = positive.get(vacated) {
                slot[moved as usize] = Some(vacated);
            }
        }
        if balances[to as usize] == 0 {
            slot[to as usize] = Some(positive.len());
            positive.push(to);
        }
        balances[to as usize] += amount;

        transfers.push(TransferRecord { index, from, to, amount });
    }

    let true_balances = (0..n_addresses).map(|a| (a, balances[a as usize])).collect();
    Ok(Scenario {
        n_addresses,
        deployer,
        total_supply,
        seed,
        transfers,
        true_balances,
    })
}

/// The subset of transfer indices whose amounts the adversary holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakedSet {
    pub ratio: f64,
    pub indices: BTreeSet<usize>,
}

impl LeakedSet {
    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }
}

/// Uniform sample without replacement of `round(ratio * transfers)`
/// indices, taken as a prefix of one seeded permutation. For a fixed seed
/// the samples are therefore nested across ratios, which is what the
/// leakage-monotonicity experiments rely on.
pub fn select_leaked(s: &Scenario, ratio: f64, seed: u64) -> LeakedSet {
    assert!((0.0..=1.0).contains(&ratio), "leakage ratio must be in [0, 1]");
    let m = s.transfers.len();
    // round-half-up
    let k = ((ratio * m as f64) + 0.5).floor() as usize;
    let k = k.min(m);
    let mut rng = stream_rng(seed, STREAM_LEAK);
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    LeakedSet {
        ratio,
        indices: order[..k].iter().copied().collect(),
    }
}

/// Where a ledger replay failed, and on which step.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("replay failed at step {step} ({kind:?} {sender}->{receiver}): {source}")]
pub struct ReplayError {
    pub step: usize,
    pub kind: StepKind,
    pub sender: Address,
    pub receiver: Address,
    #[source]
    pub source: ProtocolError,
}

/// Result of replaying a scenario through the ledger: the final contract
/// state, the public transcript, and each party's retained witness
/// (final balance and blind factor).
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub ledger: LedgerState,
    pub transcript: Vec<TranscriptEntry>,
    pub witnesses: BTreeMap<Address, (TokenAmount, BlindFactor)>,
}

/// Execute deploy plus the four-step consent/deposit/withdraw flow for
/// every transfer. Generator output always replays cleanly; an error here
/// means a corrupted scenario (or a protocol bug).
pub fn replay_on_ledger(s: &Scenario) -> Result<ReplayOutcome, Box<ReplayError>> {
    let mut rng = stream_rng(s.seed, STREAM_REPLAY);
    let mut transcript = Vec::with_capacity(1 + 4 * s.transfers.len());
    let mut step = 0usize;

    // Wallet state: every address knows its own balance and blind. The
    // zero blind matches the ledger's default commitment for fresh
    // addresses.
    let mut balances = vec![0u64; s.n_addresses as usize];
    let mut blinds = vec![BlindFactor::ZERO; s.n_addresses as usize];

    let deployer_blind = generate_blind(&mut rng);
    let mut ledger = LedgerState::deploy_token(
        "Private Token",
        "PTT",
        s.total_supply,
        s.deployer,
        deployer_blind,
    )
    .map_err(|source| {
        Box::new(ReplayError {
            step,
            kind: StepKind::Deploy,
            sender: s.deployer,
            receiver: s.deployer,
            source,
        })
    })?;
    balances[s.deployer as usize] = s.total_supply;
    blinds[s.deployer as usize] = deployer_blind;
    transcript.push(TranscriptEntry {
        step_type: StepKind::Deploy,
        sender: s.deployer,
        receiver: s.deployer,
        public_inputs: None,
        result: "ok".into(),
    });
    step += 1;

    for t in &s.transfers {
        let fail = |step: usize, kind: StepKind, source: ProtocolError| {
            Box::new(ReplayError { step, kind, sender: t.from, receiver: t.to, source })
        };

        ledger.get_consent(t.from, t.to);
        transcript.push(TranscriptEntry {
            step_type: StepKind::GetConsent,
            sender: t.from,
            receiver: t.to,
            public_inputs: None,
            result: "ok".into(),
        });
        step += 1;

        ledger
            .give_consent(t.from, t.to)
            .map_err(|e| fail(step, StepKind::GiveConsent, e))?;
        transcript.push(TranscriptEntry {
            step_type: StepKind::GiveConsent,
            sender: t.from,
            receiver: t.to,
            public_inputs: None,
            result: "ok".into(),
        });
        step += 1;

        // Sender proves and deposits.
        let amount_blind = generate_blind(&mut rng);
        let next_blind = generate_blind(&mut rng);
        let balance = balances[t.from as usize];
        let witness = Witness {
            amount: t.amount,
            balance,
            amount_blind,
            balance_blind: blinds[t.from as usize],
            next_balance_blind: next_blind,
        };
        let deposit_publics = PublicInputs {
            amount_hash: commit(t.amount, amount_blind),
            balance_hash: ledger.balance_commitment(t.from),
            next_balance_hash: commit(balance.wrapping_sub(t.amount), next_blind),
        };
        let token = prove(RelationKind::Sender, &witness, &deposit_publics)
            .map_err(|e| fail(step, StepKind::PrivateDeposit, e))?;
        ledger
            .private_deposit(
                t.from,
                t.to,
                deposit_publics.amount_hash,
                deposit_publics.next_balance_hash,
                seal_message(t.to, t.amount, amount_blind),
                &token,
            )
            .map_err(|e| fail(step, StepKind::PrivateDeposit, e))?;
        balances[t.from as usize] = balance - t.amount;
        blinds[t.from as usize] = next_blind;
        transcript.push(TranscriptEntry {
            step_type: StepKind::PrivateDeposit,
            sender: t.from,
            receiver: t.to,
            public_inputs: Some(deposit_publics),
            result: "ok".into(),
        });
        step += 1;

        // Receiver opens the sealed channel, proves and withdraws.
        let sealed = ledger
            .sealed_message(t.from, t.to)
            .expect("deposit just stored this message");
        let (recv_amount, recv_amount_blind) =
            open_sealed(sealed, t.to).map_err(|e| fail(step, StepKind::PrivateWithdraw, e))?;
        let recv_next_blind = generate_blind(&mut rng);
        let recv_balance = balances[t.to as usize];
        let recv_witness = Witness {
            amount: recv_amount,
            balance: recv_balance,
            amount_blind: recv_amount_blind,
            balance_blind: blinds[t.to as usize],
            next_balance_blind: recv_next_blind,
        };
        let withdraw_publics = PublicInputs {
            amount_hash: commit(recv_amount, recv_amount_blind),
            balance_hash: ledger.balance_commitment(t.to),
            next_balance_hash: commit(
                recv_balance.wrapping_add(recv_amount),
                recv_next_blind,
            ),
        };
        let token = prove(RelationKind::Receiver, &recv_witness, &withdraw_publics)
            .map_err(|e| fail(step, StepKind::PrivateWithdraw, e))?;
        ledger
            .private_withdraw(
                t.from,
                t.to,
                withdraw_publics.amount_hash,
                withdraw_publics.next_balance_hash,
                &token,
            )
            .map_err(|e| fail(step, StepKind::PrivateWithdraw, e))?;
        balances[t.to as usize] = recv_balance + recv_amount;
        blinds[t.to as usize] = recv_next_blind;
        transcript.push(TranscriptEntry {
            step_type: StepKind::PrivateWithdraw,
            sender: t.from,
            receiver: t.to,
            public_inputs: Some(withdraw_publics),
            result: "ok".into(),
        });
        step += 1;
    }

    let witnesses = (0..s.n_addresses)
        .map(|a| (a, (balances[a as usize], blinds[a as usize])))
        .collect();
    Ok(ReplayOutcome {
        ledger,
        transcript,
        witnesses,
    })
}
