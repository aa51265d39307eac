//! Sender/receiver relations, a simulated proof-token scheme standing in
//! for zk-SNARK proofs, and the ledger state machine with replay
//! protection.
//!
//! A proof token binds a relation kind to its three public commitments;
//! verification recomputes the binder. Completeness and public-input
//! binding are real and testable. Zero-knowledge and soundness against
//! arbitrary forgers are simulated: the binder mixes in a fixed library
//! constant rather than a real proving key.

use crate::commitment::{commit, BlindFactor, Commitment, TokenAmount};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub type Address = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("balance + amount overflows 64 bits")]
    ArithmeticOverflow,
    #[error("witness does not satisfy the {0:?} relation")]
    RelationUnsatisfied(RelationKind),
    #[error("token supply must be positive")]
    ZeroSupply,
    #[error("no pending transfer request from {sender} to {receiver}")]
    MissingRequest { sender: Address, receiver: Address },
    #[error("receiver {receiver} has not consented to sender {sender}")]
    NoConsent { sender: Address, receiver: Address },
    #[error("proof rejected for the supplied public inputs")]
    ProofInvalid,
    #[error("amount commitment does not match the stored allowance")]
    AllowanceMismatch,
    #[error("sealed message addressed to {recipient}, not {caller}")]
    WrongRecipient { recipient: Address, caller: Address },
}

/// The private data satisfying a transfer relation. Held only by the
/// owning party, never stored in [`LedgerState`].
#[derive(Debug, Clone, Copy)]
pub struct Witness {
    pub amount: TokenAmount,
    pub balance: TokenAmount,
    pub amount_blind: BlindFactor,
    pub balance_blind: BlindFactor,
    pub next_balance_blind: BlindFactor,
}

/// The three public commitments a transfer proof is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicInputs {
    pub amount_hash: Commitment,
    pub balance_hash: Commitment,
    pub next_balance_hash: Commitment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationKind {
    Sender,
    Receiver,
}

/// Does the witness satisfy the relation for these public inputs?
///
/// Sender: `amount <= balance` and the three commitments open, with the
/// next balance at `balance - amount`. Receiver: no ordering guard, next
/// balance at `balance + amount`; overflow there is an error, not `false`.
pub fn check_relation(
    kind: RelationKind,
    w: &Witness,
    p: &PublicInputs,
) -> Result<bool, ProtocolError> {
    let next_balance = match kind {
        RelationKind::Sender => {
            if w.amount > w.balance {
                return Ok(false);
            }
            w.balance - w.amount
        }
        RelationKind::Receiver => w
            .balance
            .checked_add(w.amount)
            .ok_or(ProtocolError::ArithmeticOverflow)?,
    };
    Ok(commit(w.amount, w.amount_blind) == p.amount_hash
        && commit(w.balance, w.balance_blind) == p.balance_hash
        && commit(next_balance, w.next_balance_blind) == p.next_balance_hash)
}

// Fixed constant standing in for the proving/verifying key pair. Anyone
// with the library can forge tokens; the protocol analysis only needs the
// binding of a token to its public inputs.
const SIMULATION_SECRET: &[u8; 32] = b"ptts-simulated-proof-secret-v1\0\0";

fn binder(kind: RelationKind, publics: &PublicInputs) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update([match kind {
        RelationKind::Sender => 0u8,
        RelationKind::Receiver => 1u8,
    }]);
    hasher.update(publics.amount_hash.as_bytes());
    hasher.update(publics.balance_hash.as_bytes());
    hasher.update(publics.next_balance_hash.as_bytes());
    hasher.update(SIMULATION_SECRET);
    let mut out = [0u8; 32];
    out.copy_from_slice(&hasher.finalize());
    out
}

/// Simulated zero-knowledge proof: binds a relation kind to its public
/// inputs and carries no witness data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofToken {
    kind: RelationKind,
    publics: PublicInputs,
    binder: [u8; 32],
}

impl ProofToken {
    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    pub fn publics(&self) -> &PublicInputs {
        &self.publics
    }
}

/// Generate a proof token, modelling off-chain proof generation. Fails
/// when the witness does not satisfy the relation: no proof exists for a
/// false statement.
pub fn prove(
    kind: RelationKind,
    w: &Witness,
    p: &PublicInputs,
) -> Result<ProofToken, ProtocolError> {
    if !check_relation(kind, w, p)? {
        return Err(ProtocolError::RelationUnsatisfied(kind));
    }
    Ok(ProofToken {
        kind,
        publics: *p,
        binder: binder(kind, p),
    })
}

/// Verify a token against the expected kind and public inputs. False as
/// soon as any public input differs from the ones the token was created
/// for; in particular a stale `balance_hash` invalidates the token, which
/// is what defeats deposit replay.
pub fn verify_proof(t: &ProofToken, kind: RelationKind, p: &PublicInputs) -> bool {
    t.kind == kind && t.publics == *p && t.binder == binder(kind, p)
}

/// Private channel from sender to receiver carrying the transfer amount
/// and its blind factor. Modelled as an access-guarded envelope rather
/// than real asymmetric encryption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedMessage {
    recipient: Address,
    payload: Vec<u8>,
}

pub fn seal_message(recipient: Address, amount: TokenAmount, blind: BlindFactor) -> SealedMessage {
    let mut payload = Vec::with_capacity(16);
    payload.extend_from_slice(&amount.to_be_bytes());
    payload.extend_from_slice(&blind.value().to_be_bytes());
    SealedMessage { recipient, payload }
}

pub fn open_sealed(
    m: &SealedMessage,
    caller: Address,
) -> Result<(TokenAmount, BlindFactor), ProtocolError> {
    if caller != m.recipient {
        return Err(ProtocolError::WrongRecipient {
            recipient: m.recipient,
            caller,
        });
    }
    let amount = TokenAmount::from_be_bytes(m.payload[0..8].try_into().unwrap());
    let bits = u64::from_be_bytes(m.payload[8..16].try_into().unwrap());
    let blind = BlindFactor::new(bits).expect("sealed blind factors are in range");
    Ok((amount, blind))
}

/// The contract's public state: balance commitments plus the consent,
/// allowance and sealed-message maps. Transitions check every requirement
/// before touching state, so a failed call leaves the ledger unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerState {
    token_name: String,
    token_symbol: String,
    total_supply: TokenAmount,
    deployer: Address,
    balance_hash: BTreeMap<Address, Commitment>,
    request: BTreeSet<(Address, Address)>,
    consent: BTreeSet<(Address, Address)>,
    allowance: BTreeMap<(Address, Address), Commitment>,
    sealed: BTreeMap<(Address, Address), SealedMessage>,
}

impl LedgerState {
    /// Deploy a fresh token: the deployer's commitment covers the entire
    /// supply, everything else is empty. The supply itself is public
    /// metadata.
    pub fn deploy_token(
        name: &str,
        symbol: &str,
        supply: TokenAmount,
        deployer: Address,
        deployer_blind: BlindFactor,
    ) -> Result<Self, ProtocolError> {
        if supply == 0 {
            return Err(ProtocolError::ZeroSupply);
        }
        let mut balance_hash = BTreeMap::new();
        balance_hash.insert(deployer, commit(supply, deployer_blind));
        Ok(LedgerState {
            token_name: name.to_string(),
            token_symbol: symbol.to_string(),
            total_supply: supply,
            deployer,
            balance_hash,
            request: BTreeSet::new(),
            consent: BTreeSet::new(),
            allowance: BTreeMap::new(),
            sealed: BTreeMap::new(),
        })
    }

    pub fn token_name(&self) -> &str {
        &self.token_name
    }

    pub fn token_symbol(&self) -> &str {
        &self.token_symbol
    }

    pub fn total_supply(&self) -> TokenAmount {
        self.total_supply
    }

    pub fn deployer(&self) -> Address {
        self.deployer
    }

    /// On-ledger balance commitment of an address. Addresses that have
    /// never transacted default to the public zero commitment
    /// `commit(0, BlindFactor::ZERO)`, the convention that lets a fresh
    /// receiver construct its first withdrawal proof.
    pub fn balance_commitment(&self, address: Address) -> Commitment {
        self.balance_hash
            .get(&address)
            .copied()
            .unwrap_or_else(|| commit(0, BlindFactor::ZERO))
    }

    pub fn has_requested(&self, sender: Address, receiver: Address) -> bool {
        self.request.contains(&(sender, receiver))
    }

    pub fn has_consented(&self, sender: Address, receiver: Address) -> bool {
        self.consent.contains(&(sender, receiver))
    }

    /// The outstanding allowance for a pair, if any. A cleared slot is
    /// absence, distinct from any commitment.
    pub fn allowance(&self, sender: Address, receiver: Address) -> Option<&Commitment> {
        self.allowance.get(&(sender, receiver))
    }

    pub fn sealed_message(&self, sender: Address, receiver: Address) -> Option<&SealedMessage> {
        self.sealed.get(&(sender, receiver))
    }

    /// Sender asks the receiver for permission to transfer. Idempotent;
    /// self-requests are permitted.
    pub fn get_consent(&mut self, sender: Address, receiver: Address) {
        self.request.insert((sender, receiver));
    }

    /// Receiver approves a pending request. Idempotent once requested.
    pub fn give_consent(
        &mut self,
        sender: Address,
        receiver: Address,
    ) -> Result<(), ProtocolError> {
        if !self.request.contains(&(sender, receiver)) {
            return Err(ProtocolError::MissingRequest { sender, receiver });
        }
        self.consent.insert((sender, receiver));
        Ok(())
    }

    /// Sender deposits a private amount. The sender's current balance
    /// commitment is read from the ledger, never supplied by the caller;
    /// a token proved against an outdated commitment no longer verifies,
    /// so resubmitting a validated deposit fails.
    pub fn private_deposit(
        &mut self,
        sender: Address,
        receiver: Address,
        amount_hash: Commitment,
        next_balance_hash: Commitment,
        sealed: SealedMessage,
        proof: &ProofToken,
    ) -> Result<(), ProtocolError> {
        if !self.consent.contains(&(sender, receiver)) {
            return Err(ProtocolError::NoConsent { sender, receiver });
        }
        let publics = PublicInputs {
            amount_hash,
            balance_hash: self.balance_commitment(sender),
            next_balance_hash,
        };
        if !verify_proof(proof, RelationKind::Sender, &publics) {
            return Err(ProtocolError::ProofInvalid);
        }
        self.balance_hash.insert(sender, next_balance_hash);
        self.allowance.insert((sender, receiver), amount_hash);
        self.sealed.insert((sender, receiver), sealed);
        Ok(())
    }

    /// Receiver withdraws exactly the deposited amount. The allowance is
    /// cleared on success, so a replayed withdrawal fails on the
    /// allowance check.
    pub fn private_withdraw(
        &mut self,
        sender: Address,
        receiver: Address,
        amount_hash: Commitment,
        next_balance_hash: Commitment,
        proof: &ProofToken,
    ) -> Result<(), ProtocolError> {
        if !self.consent.contains(&(sender, receiver)) {
            return Err(ProtocolError::NoConsent { sender, receiver });
        }
        if self.allowance.get(&(sender, receiver)) != Some(&amount_hash) {
            return Err(ProtocolError::AllowanceMismatch);
        }
        let publics = PublicInputs {
            amount_hash,
            balance_hash: self.balance_commitment(receiver),
            next_balance_hash,
        };
        if !verify_proof(proof, RelationKind::Receiver, &publics) {
            return Err(ProtocolError::ProofInvalid);
        }
        self.balance_hash.insert(receiver, next_balance_hash);
        self.allowance.remove(&(sender, receiver));
        Ok(())
    }
}

/// One protocol step in a serialized transcript. Witnesses never appear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub step_type: StepKind,
    pub sender: Address,
    pub receiver: Address,
    pub public_inputs: Option<PublicInputs>,
    pub result: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Deploy,
    GetConsent,
    GiveConsent,
    PrivateDeposit,
    PrivateWithdraw,
}
