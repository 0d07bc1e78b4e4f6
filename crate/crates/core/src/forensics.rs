//! Backward traceability from anchored checkpoints to individual transactions.
//!
//! Anchored summaries are treated as claims: tracing recomputes the Merkle
//! root from archived transactions, and the supply audit replays the whole
//! global chain instead of trusting stored aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{Amount, MILLICOIN_PER_WORLDCOIN};
use crate::gov_ledger::{BlockPayload, GlobalBlock, WorldState};
use crate::hash::{sha256, Hash32};
use crate::identity;
use crate::merkle::{self, InclusionProof};
use crate::model::{ChannelPolicy, CountryCode};
use crate::people_ledger::{BatchFlows, BatchStore, CheckpointSummary, LocalLedger};
use crate::tx::{Transaction, TxKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForensicError {
    #[error("no archived batch for {country} checkpoint {seq_no}")]
    MissingBatch { country: CountryCode, seq_no: u64 },
    #[error("archived batch does not reproduce the anchored Merkle root")]
    RootMismatch,
    #[error("transaction {0} is not in the batch")]
    UnknownTx(Hash32),
}

/// Archived batches of any number of countries.
#[derive(Clone, Debug, Default)]
pub struct Archive {
    batches: BTreeMap<(CountryCode, u64), Vec<Transaction>>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, country: CountryCode, seq_no: u64, txs: Vec<Transaction>) {
        self.batches.insert((country, seq_no), txs);
    }

    pub fn batch_mut(&mut self, country: &CountryCode, seq_no: u64) -> Option<&mut Vec<Transaction>> {
        self.batches.get_mut(&(country.clone(), seq_no))
    }

    /// Copies every sealed batch out of the given ledgers.
    pub fn from_ledgers<'a>(ledgers: impl IntoIterator<Item = &'a LocalLedger>) -> Self {
        let mut archive = Archive::new();
        for ledger in ledgers {
            for s in ledger.summaries() {
                let txs = ledger.batch(&s.country, s.seq_no).expect("sealed batch is archived");
                archive.insert(s.country.clone(), s.seq_no, txs.to_vec());
            }
        }
        archive
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }
}

impl BatchStore for Archive {
    fn batch(&self, country: &CountryCode, seq_no: u64) -> Option<&[Transaction]> {
        self.batches.get(&(country.clone(), seq_no)).map(Vec::as_slice)
    }
}

/// Expands an anchored checkpoint into its transactions, in commit order.
pub fn trace_checkpoint(summary: &CheckpointSummary, store: &dyn BatchStore) -> Result<Vec<Transaction>, ForensicError> {
    let txs = store.batch(&summary.country, summary.seq_no).ok_or_else(|| ForensicError::MissingBatch {
        country: summary.country.clone(),
        seq_no: summary.seq_no,
    })?;
    let root = merkle::root_of_transactions(txs);
    if txs.len() as u64 != summary.tx_count || root != Some(summary.merkle_root) {
        return Err(ForensicError::RootMismatch);
    }
    Ok(txs.to_vec())
}

/// Like [`trace_checkpoint`] but over raw canonical encodings. The root is
/// checked before anything is decoded.
pub fn trace_encoded(summary: &CheckpointSummary, encoded: &[Vec<u8>]) -> Result<Vec<Transaction>, ForensicError> {
    let leaves: Vec<Hash32> = encoded.iter().map(|b| sha256(b)).collect();
    if leaves.len() as u64 != summary.tx_count || merkle::merkle_root(&leaves) != Some(summary.merkle_root) {
        return Err(ForensicError::RootMismatch);
    }
    encoded
        .iter()
        .map(|b| Transaction::from_canonical_bytes(b).map_err(|_| ForensicError::RootMismatch))
        .collect()
}

pub fn prove_inclusion(
    store: &dyn BatchStore,
    country: &CountryCode,
    seq_no: u64,
    tx_id: &Hash32,
) -> Result<InclusionProof, ForensicError> {
    let txs = store.batch(country, seq_no).ok_or_else(|| ForensicError::MissingBatch {
        country: country.clone(),
        seq_no,
    })?;
    let index = txs.iter().position(|t| &t.tx_id == tx_id).ok_or(ForensicError::UnknownTx(*tx_id))?;
    let leaves: Vec<Hash32> = txs.iter().map(merkle::leaf_hash).collect();
    Ok(merkle::prove(&leaves, index).expect("index in range"))
}

pub fn verify_inclusion(proof: &InclusionProof, leaf_tx: &Transaction, root: &Hash32) -> bool {
    proof.fold(merkle::leaf_hash(leaf_tx)) == *root
}

/// Balances some party claims the world had after applying block `height`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplyClaim {
    pub height: u64,
    pub gov_balances: BTreeMap<CountryCode, Amount>,
    pub people_supplies: BTreeMap<CountryCode, Amount>,
}

impl SupplyClaim {
    pub fn of(world: &WorldState) -> Self {
        SupplyClaim {
            height: world.height().saturating_sub(1),
            gov_balances: world.gov_balances().clone(),
            people_supplies: world.people_supplies().clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum Finding {
    InvalidBlock { height: u64, message: String },
    MissingBatch { height: u64, country: CountryCode, seq_no: u64 },
    RootMismatch { height: u64, country: CountryCode, seq_no: u64 },
    AggregateMismatch { height: u64, country: CountryCode, seq_no: u64, field: String },
    SupplyMismatch { height: u64, expected: Amount, replayed: Amount },
    BalanceMismatch { height: u64, country: CountryCode, field: String, claimed: Option<Amount>, replayed: Option<Amount> },
}

impl Finding {
    pub fn height(&self) -> u64 {
        match self {
            Finding::InvalidBlock { height, .. }
            | Finding::MissingBatch { height, .. }
            | Finding::RootMismatch { height, .. }
            | Finding::AggregateMismatch { height, .. }
            | Finding::SupplyMismatch { height, .. }
            | Finding::BalanceMismatch { height, .. } => *height,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub blocks: u64,
    pub joined_population: u64,
    pub traced_births: u64,
    pub expected_supply: Amount,
    pub replayed_supply: Amount,
    pub findings: Vec<Finding>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn first_divergent_height(&self) -> Option<u64> {
        self.findings.iter().map(Finding::height).min()
    }
}

/// Replays `chain` from scratch and checks, at every height, that the world
/// supply equals 2000 mc × (joined population + births traced from the
/// archives), that each anchored summary matches its archived batch, and
/// that any supplied claims match the replayed balances.
pub fn audit_supply(
    chain: &[GlobalBlock],
    archives: &dyn BatchStore,
    government_policy: &ChannelPolicy,
    claims: &[SupplyClaim],
) -> AuditReport {
    let claims: BTreeMap<u64, &SupplyClaim> = claims.iter().map(|c| (c.height, c)).collect();
    let mut world = WorldState::new(government_policy.clone());
    let mut findings = Vec::new();
    let mut population = 0u64;
    let mut births = 0u64;

    for block in chain {
        let height = block.height;
        match &block.payload {
            BlockPayload::Join { population: p, .. } => population = population.saturating_add(*p),
            BlockPayload::CheckpointAnchor(s) => match audit_anchor(height, s, archives) {
                Ok(b) => births += b,
                Err(f) => findings.push(f),
            },
            BlockPayload::GovTransfer(_) => {}
        }
        if let Err(e) = world.apply_block(block.clone()) {
            findings.push(Finding::InvalidBlock { height, message: e.to_string() });
            break;
        }

        let expected = population
            .checked_add(births)
            .and_then(|u| u.checked_mul(2 * MILLICOIN_PER_WORLDCOIN))
            .map(Amount::from_millicoin)
            .unwrap_or(Amount::MAX);
        let replayed = world.world_supply();
        if expected != replayed {
            findings.push(Finding::SupplyMismatch { height, expected, replayed });
        }
        if let Some(claim) = claims.get(&height) {
            compare_claim(height, claim, &world, &mut findings);
        }
    }

    let blocks = world.height();
    AuditReport {
        blocks,
        joined_population: population,
        traced_births: births,
        expected_supply: Amount::from_millicoin(
            population.saturating_add(births).saturating_mul(2 * MILLICOIN_PER_WORLDCOIN),
        ),
        replayed_supply: world.world_supply(),
        findings,
    }
}

fn audit_anchor(height: u64, s: &CheckpointSummary, archives: &dyn BatchStore) -> Result<u64, Finding> {
    let txs = trace_checkpoint(s, archives).map_err(|e| match e {
        ForensicError::MissingBatch { .. } => Finding::MissingBatch {
            height,
            country: s.country.clone(),
            seq_no: s.seq_no,
        },
        _ => Finding::RootMismatch {
            height,
            country: s.country.clone(),
            seq_no: s.seq_no,
        },
    })?;
    let (_, government) = identity::government_identity(&s.country);
    let mismatch = |field: &str| Finding::AggregateMismatch {
        height,
        country: s.country.clone(),
        seq_no: s.seq_no,
        field: field.to_string(),
    };
    let flows = BatchFlows::of(&txs, government).map_err(|_| mismatch("overflow"))?;
    for (field, traced, claimed) in [
        ("minted", flows.minted, s.minted),
        ("minted_government", flows.minted_government, s.minted_government),
        ("penalties", flows.penalties, s.penalties),
        ("volume", flows.volume, s.volume),
    ] {
        if traced != claimed {
            return Err(mismatch(field));
        }
    }
    Ok(txs
        .iter()
        .filter(|t| t.kind == TxKind::MintBirth && t.to != government)
        .count() as u64)
}

fn compare_claim(height: u64, claim: &SupplyClaim, world: &WorldState, findings: &mut Vec<Finding>) {
    for (field, claimed, replayed) in [
        ("gov_balance", &claim.gov_balances, world.gov_balances()),
        ("people_supply", &claim.people_supplies, world.people_supplies()),
    ] {
        let countries: std::collections::BTreeSet<&CountryCode> = claimed.keys().chain(replayed.keys()).collect();
        for c in countries {
            let (a, b) = (claimed.get(c).copied(), replayed.get(c).copied());
            if a != b {
                findings.push(Finding::BalanceMismatch {
                    height,
                    country: c.clone(),
                    field: field.to_string(),
                    claimed: a,
                    replayed: b,
                });
            }
        }
    }
}
