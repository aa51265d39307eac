//! SHA-256 commitment scheme binding token amounts to public digests via
//! blind factors.
//!
//! A commitment is `sha256(blind || value)` where both operands are encoded
//! as 32-byte big-endian integers. The layout is frozen by the pinned
//! `commit(0, 0)` test vector below.

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use std::fmt;
use thiserror::Error;

/// Number of tokens. Bounded by the total supply of the scenario it
/// appears in; that bound is contextual, so no newtype.
pub type TokenAmount = u64;

/// Entropy of a blind factor in bits.
pub const BLIND_FACTOR_BITS: u32 = 52;

const BLIND_FACTOR_LIMIT: u64 = 1 << BLIND_FACTOR_BITS;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommitmentError {
    #[error("blind factor {0} exceeds the 52-bit range")]
    BlindFactorOutOfRange(u64),
}

/// Random salt mixed into a commitment to defeat preimage and lookup
/// attacks. Exactly 52 bits of entropy, stored in a u64 with the upper
/// 12 bits zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlindFactor(u64);

impl BlindFactor {
    /// The all-zero blind factor. Used as the public convention for
    /// addresses whose zero balance has not yet been privately committed.
    pub const ZERO: BlindFactor = BlindFactor(0);

    pub fn new(bits: u64) -> Result<Self, CommitmentError> {
        if bits < BLIND_FACTOR_LIMIT {
            Ok(BlindFactor(bits))
        } else {
            Err(CommitmentError::BlindFactorOutOfRange(bits))
        }
    }

    pub fn value(&self) -> u64 {
        self.0
    }
}

// Debug output is redacted so witnesses cannot leak through logs.
impl fmt::Debug for BlindFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BlindFactor([redacted])")
    }
}

/// Draw a fresh blind factor uniformly from `[0, 2^52)`.
///
/// Identically seeded sources yield identical sequences.
pub fn generate_blind<R: Rng + ?Sized>(rng: &mut R) -> BlindFactor {
    BlindFactor(rng.gen_range(0..BLIND_FACTOR_LIMIT))
}

/// 32-byte binding digest of a (blind factor, value) pair; the on-ledger
/// representation of every private amount and balance.
///
/// Only [`commit`] produces commitments; protocol code never assembles
/// digests by hand.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Commitment([u8; 32]);

impl Commitment {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(s, &mut bytes)?;
        Ok(Commitment(bytes))
    }
}

impl fmt::Display for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Commitment({})", self.to_hex())
    }
}

// Commitments serialize as lowercase 64-character hex strings in all JSON
// artifacts.
impl Serialize for Commitment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Commitment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Commitment::from_hex(&s).map_err(|e| D::Error::custom(format!("bad commitment hex: {e}")))
    }
}

/// Commit to `value` under `blind`: SHA-256 over the 64-byte message
/// `[32-byte BE blind || 32-byte BE value]`.
pub fn commit(value: TokenAmount, blind: BlindFactor) -> Commitment {
    let mut message = [0u8; 64];
    message[24..32].copy_from_slice(&blind.0.to_be_bytes());
    message[56..64].copy_from_slice(&value.to_be_bytes());
    let digest = Sha256::digest(message);
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    Commitment(out)
}

/// True iff `c` opens to `(value, blind)`.
pub fn verify_open(c: &Commitment, value: TokenAmount, blind: BlindFactor) -> bool {
    commit(value, blind) == *c
}
