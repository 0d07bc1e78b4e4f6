//! Transactions and their canonical byte encoding.
//!
//! The canonical encoding is the hashed and signed region of a transaction:
//!
//! ```text
//! channel (1) | kind (1) | from (32) | to (32) | amount (8, BE) | day (8, BE) | nonce (8, BE)
//! ```
//!
//! The signature is not part of it. `tx_id` is the SHA-256 of these 90 bytes.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::amount::Amount;
use crate::hash::{sha256, Hash32};
use crate::model::{AccountId, Channel, Day};

pub const CANONICAL_TX_LEN: usize = 90;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxKind {
    Sale,
    Donation,
    MintGenesis,
    MintBirth,
    Penalty,
}

impl TxKind {
    pub fn code(self) -> u8 {
        match self {
            TxKind::Sale => 0,
            TxKind::Donation => 1,
            TxKind::MintGenesis => 2,
            TxKind::MintBirth => 3,
            TxKind::Penalty => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => TxKind::Sale,
            1 => TxKind::Donation,
            2 => TxKind::MintGenesis,
            3 => TxKind::MintBirth,
            4 => TxKind::Penalty,
            _ => return None,
        })
    }

    /// System transactions carry no signature.
    pub fn is_system(self) -> bool {
        matches!(self, TxKind::MintGenesis | TxKind::MintBirth | TxKind::Penalty)
    }

    pub fn is_transfer(self) -> bool {
        matches!(self, TxKind::Sale | TxKind::Donation)
    }
}

/// Transfer flavour accepted from users: the threshold rules treat sales and
/// donations differently.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    Sale,
    Donation,
}

impl From<TransferKind> for TxKind {
    fn from(value: TransferKind) -> Self {
        match value {
            TransferKind::Sale => TxKind::Sale,
            TransferKind::Donation => TxKind::Donation,
        }
    }
}

/// Raw signature bytes. Length is not checked here; verification rejects
/// malformed signatures.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignatureBytes(pub Vec<u8>);

impl fmt::Debug for SignatureBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignatureBytes({})", hex::encode(&self.0))
    }
}

impl Serialize for SignatureBytes {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&hex::encode(&self.0))
    }
}

impl<'de> Deserialize<'de> for SignatureBytes {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        hex::decode(s).map(SignatureBytes).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TxDecodeError {
    #[error("canonical transaction must be {CANONICAL_TX_LEN} bytes, got {0}")]
    Length(usize),
    #[error("unknown channel code {0}")]
    Channel(u8),
    #[error("unknown kind code {0}")]
    Kind(u8),
    #[error("tx_id {stored} does not match content hash {computed}")]
    IdMismatch { stored: Hash32, computed: Hash32 },
}

/// A typed movement of millicoin on one channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TxRecord")]
pub struct Transaction {
    pub tx_id: Hash32,
    pub channel: Channel,
    pub kind: TxKind,
    pub from: AccountId,
    pub to: AccountId,
    pub amount: Amount,
    pub timestamp: Day,
    pub nonce: u64,
    pub signature: Option<SignatureBytes>,
}

// Deserialization goes through this record so a stored tx_id is always
// checked against the content.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TxRecord {
    tx_id: Hash32,
    channel: Channel,
    kind: TxKind,
    from: AccountId,
    to: AccountId,
    amount: Amount,
    timestamp: Day,
    nonce: u64,
    signature: Option<SignatureBytes>,
}

impl TryFrom<TxRecord> for Transaction {
    type Error = TxDecodeError;

    fn try_from(r: TxRecord) -> Result<Self, Self::Error> {
        let tx = Transaction::new(r.channel, r.kind, r.from, r.to, r.amount, r.timestamp, r.nonce);
        if tx.tx_id != r.tx_id {
            return Err(TxDecodeError::IdMismatch {
                stored: r.tx_id,
                computed: tx.tx_id,
            });
        }
        Ok(Transaction {
            signature: r.signature,
            ..tx
        })
    }
}

impl Transaction {
    /// Builds an unsigned transaction and computes its id.
    pub fn new(
        channel: Channel,
        kind: TxKind,
        from: AccountId,
        to: AccountId,
        amount: Amount,
        timestamp: Day,
        nonce: u64,
    ) -> Self {
        let mut tx = Transaction {
            tx_id: Hash32::ZERO,
            channel,
            kind,
            from,
            to,
            amount,
            timestamp,
            nonce,
            signature: None,
        };
        tx.tx_id = tx.compute_id();
        tx
    }

    pub fn canonical_bytes(&self) -> [u8; CANONICAL_TX_LEN] {
        let mut out = [0u8; CANONICAL_TX_LEN];
        out[0] = self.channel.code();
        out[1] = self.kind.code();
        out[2..34].copy_from_slice(self.from.as_bytes());
        out[34..66].copy_from_slice(self.to.as_bytes());
        out[66..74].copy_from_slice(&self.amount.millicoin().to_be_bytes());
        out[74..82].copy_from_slice(&self.timestamp.to_be_bytes());
        out[82..90].copy_from_slice(&self.nonce.to_be_bytes());
        out
    }

    /// Decodes the canonical encoding into an unsigned transaction.
    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, TxDecodeError> {
        if bytes.len() != CANONICAL_TX_LEN {
            return Err(TxDecodeError::Length(bytes.len()));
        }
        let channel = Channel::from_code(bytes[0]).ok_or(TxDecodeError::Channel(bytes[0]))?;
        let kind = TxKind::from_code(bytes[1]).ok_or(TxDecodeError::Kind(bytes[1]))?;
        let id = |range: std::ops::Range<usize>| {
            let mut b = [0u8; 32];
            b.copy_from_slice(&bytes[range]);
            AccountId(Hash32(b))
        };
        let word = |at: usize| u64::from_be_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
        Ok(Transaction::new(
            channel,
            kind,
            id(2..34),
            id(34..66),
            Amount::from_millicoin(word(66)),
            word(74),
            word(82),
        ))
    }

    pub fn compute_id(&self) -> Hash32 {
        sha256(&self.canonical_bytes())
    }

    pub fn id_is_consistent(&self) -> bool {
        self.tx_id == self.compute_id()
    }

    /// Single-line canonical JSON, fields in declaration order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transaction serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Transaction {
        Transaction::new(
            Channel::People,
            TxKind::Sale,
            AccountId(Hash32([1; 32])),
            AccountId(Hash32([2; 32])),
            Amount::from_millicoin(300),
            7,
            3,
        )
    }

    #[test]
    fn canonical_layout() {
        let b = sample().canonical_bytes();
        assert_eq!(b.len(), 90);
        assert_eq!(b[0], 0);
        assert_eq!(b[1], 0);
        assert_eq!(&b[2..34], &[1u8; 32]);
        assert_eq!(&b[34..66], &[2u8; 32]);
        assert_eq!(&b[66..74], &300u64.to_be_bytes());
        assert_eq!(&b[74..82], &7u64.to_be_bytes());
        assert_eq!(&b[82..90], &3u64.to_be_bytes());
    }

    #[test]
    fn json_field_order_and_id_check() {
        let tx = sample();
        let json = tx.to_json();
        let keys: Vec<_> = ["tx_id", "channel", "kind", "from", "to", "amount", "timestamp", "nonce", "signature"]
            .iter()
            .map(|k| json.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "{json}");
        assert!(json.contains("\"amount\":300"));
        let back: Transaction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tx);

        let tampered = json.replace("\"amount\":300", "\"amount\":301");
        assert!(serde_json::from_str::<Transaction>(&tampered).is_err());
    }

    #[test]
    fn bad_codes_rejected() {
        let mut b = sample().canonical_bytes();
        b[0] = 9;
        assert_eq!(Transaction::from_canonical_bytes(&b), Err(TxDecodeError::Channel(9)));
        assert_eq!(Transaction::from_canonical_bytes(&b[..10]), Err(TxDecodeError::Length(10)));
    }

    proptest! {
        #[test]
        fn canonical_roundtrip(
            ch in 0u8..2, kind in 0u8..5, from in any::<[u8; 32]>(), to in any::<[u8; 32]>(),
            amount in any::<u64>(), day in any::<u64>(), nonce in any::<u64>(),
        ) {
            let tx = Transaction::new(
                Channel::from_code(ch).unwrap(),
                TxKind::from_code(kind).unwrap(),
                AccountId(Hash32(from)),
                AccountId(Hash32(to)),
                Amount::from_millicoin(amount),
                day,
                nonce,
            );
            let back = Transaction::from_canonical_bytes(&tx.canonical_bytes()).unwrap();
            prop_assert_eq!(back, tx);
        }
    }
}
