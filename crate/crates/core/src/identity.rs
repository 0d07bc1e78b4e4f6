//! Key generation, account-id derivation and transaction signatures.
//!
//! Ed25519 over 32-byte seeds: signing is deterministic, so simulation runs
//! stay bit-reproducible. Account ids are SHA-256 of the verification key.

use std::fmt;
use std::path::Path;

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use sha2::{Digest, Sha256};

use crate::hash::sha256;
use crate::model::{AccountId, CountryCode};
use crate::tx::{SignatureBytes, Transaction};

/// Public verification key bytes.
pub type PublicKey = [u8; 32];

pub struct Keypair {
    signing: SigningKey,
}

impl Keypair {
    pub fn from_seed(seed: &[u8; 32]) -> Self {
        Keypair {
            signing: SigningKey::from_bytes(seed),
        }
    }

    pub fn public(&self) -> PublicKey {
        self.signing.verifying_key().to_bytes()
    }

    pub fn account_id(&self) -> AccountId {
        account_id_of(&self.public())
    }
}

impl Clone for Keypair {
    fn clone(&self) -> Self {
        Keypair {
            signing: SigningKey::from_bytes(&self.signing.to_bytes()),
        }
    }
}

impl fmt::Debug for Keypair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Keypair")
            .field("public", &hex::encode(self.public()))
            .finish_non_exhaustive()
    }
}

pub fn account_id_of(public: &PublicKey) -> AccountId {
    AccountId(sha256(public))
}

/// Deterministically derives a keypair and its account id from a seed.
pub fn generate_identity(seed: &[u8; 32]) -> (Keypair, AccountId) {
    let kp = Keypair::from_seed(seed);
    let id = kp.account_id();
    (kp, id)
}

/// Signs the canonical encoding of `tx` (the signature field is not covered).
pub fn sign_tx(tx: &Transaction, key: &Keypair) -> SignatureBytes {
    SignatureBytes(key.signing.sign(&tx.canonical_bytes()).to_bytes().to_vec())
}

/// Checks `signature` over the canonical encoding of `tx`. Malformed keys or
/// signatures yield `false`.
pub fn verify_tx(tx: &Transaction, signature: &SignatureBytes, public: &PublicKey) -> bool {
    PreparedKey::new(public).is_some_and(|k| k.verify(tx, signature))
}

/// A public key decoded once for repeated verification.
#[derive(Clone, Debug)]
pub struct PreparedKey(VerifyingKey);

impl PreparedKey {
    /// `None` if the bytes are not a valid curve point.
    pub fn new(public: &PublicKey) -> Option<Self> {
        VerifyingKey::from_bytes(public).ok().map(PreparedKey)
    }

    pub fn verify(&self, tx: &Transaction, signature: &SignatureBytes) -> bool {
        let Ok(sig) = Signature::from_slice(&signature.0) else {
            return false;
        };
        self.0.verify(&tx.canonical_bytes(), &sig).is_ok()
    }
}

/// Seed derived from a domain tag and a list of labels.
pub fn derive_seed(domain: &str, labels: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(domain.as_bytes());
    for label in labels {
        h.update((label.len() as u64).to_be_bytes());
        h.update(label);
    }
    h.finalize().into()
}

/// The government keypair of a country.
///
/// Governments sign through the global sequencer, which derives their keys
/// from the country code.
pub fn government_identity(country: &CountryCode) -> (Keypair, AccountId) {
    generate_identity(&derive_seed("worldcoin/government", &[country.as_str().as_bytes()]))
}

/// Seed of the `index`-th genesis citizen of `country`.
pub fn genesis_person_seed(country: &CountryCode, index: u64) -> [u8; 32] {
    derive_seed("worldcoin/genesis-person", &[country.as_str().as_bytes(), &index.to_be_bytes()])
}

/// Seed of a newborn identified by a scenario label.
pub fn named_person_seed(country: &CountryCode, name: &str) -> [u8; 32] {
    derive_seed("worldcoin/person", &[country.as_str().as_bytes(), name.as_bytes()])
}

#[derive(Debug, thiserror::Error)]
pub enum SeedFileError {
    #[error("reading seed file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected 64 hex characters")]
    Malformed { line: usize },
}

/// Parses hex seeds, one per line. Blank lines and `#` comments are skipped.
pub fn parse_seed_lines(text: &str) -> Result<Vec<[u8; 32]>, SeedFileError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut seed = [0u8; 32];
        hex::decode_to_slice(line, &mut seed).map_err(|_| SeedFileError::Malformed { line: i + 1 })?;
        out.push(seed);
    }
    Ok(out)
}

pub fn read_seed_file(path: &Path) -> Result<Vec<[u8; 32]>, SeedFileError> {
    parse_seed_lines(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amount::Amount;
    use crate::hash::Hash32;
    use crate::model::Channel;
    use crate::tx::TxKind;
    use proptest::prelude::*;

    fn tx(from: AccountId, to: AccountId, amount: u64) -> Transaction {
        Transaction::new(Channel::People, TxKind::Sale, from, to, Amount::from_millicoin(amount), 4, 0)
    }

    #[test]
    fn identities_are_deterministic_and_distinct() {
        let (_, a) = generate_identity(&[7; 32]);
        let (_, b) = generate_identity(&[7; 32]);
        let (_, c) = generate_identity(&[8; 32]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.as_bytes().len(), 32);
    }

    #[test]
    fn sign_verify() {
        let (ka, a) = generate_identity(&[1; 32]);
        let (kb, b) = generate_identity(&[2; 32]);
        let t = tx(a, b, 250);
        let sig = sign_tx(&t, &ka);
        assert!(verify_tx(&t, &sig, &ka.public()));
        assert_eq!(sig, sign_tx(&t, &ka));
        assert!(!verify_tx(&t, &sig, &kb.public()));

        let mut changed = t.clone();
        changed.amount = Amount::from_millicoin(251);
        assert!(!verify_tx(&changed, &sig, &ka.public()));

        assert!(!verify_tx(&t, &SignatureBytes(vec![1, 2, 3]), &ka.public()));
        assert!(!verify_tx(&t, &SignatureBytes(vec![0; 64]), &ka.public()));
    }

    #[test]
    fn seed_lines() {
        let text = format!("# actors\n{}\n\n{}\n", "ab".repeat(32), "01".repeat(32));
        let seeds = parse_seed_lines(&text).unwrap();
        assert_eq!(seeds.len(), 2);
        assert_eq!(seeds[0], [0xab; 32]);
        assert!(matches!(parse_seed_lines("zz\n"), Err(SeedFileError::Malformed { line: 1 })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn any_byte_flip_breaks_signature(seed in any::<[u8; 32]>(), pos in 0usize..90, bit in 0u8..8) {
            let (k, a) = generate_identity(&seed);
            let t = tx(a, AccountId(Hash32([3; 32])), 1000);
            let sig = sign_tx(&t, &k);
            prop_assert!(verify_tx(&t, &sig, &k.public()));
            let mut bytes = t.canonical_bytes();
            bytes[pos] ^= 1 << bit;
            if let Ok(mutated) = Transaction::from_canonical_bytes(&bytes) {
                prop_assert!(!verify_tx(&mutated, &sig, &k.public()));
            }
        }
    }
}
