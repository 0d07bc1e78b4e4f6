//! The global government channel.
//!
//! A hash-chained sequence of blocks recording country joins, government
//! transfers and donations, and checkpoint anchors from the people channels.
//! Every replica rebuilds the same balances by applying the same blocks;
//! [`WorldState::apply_block`] validates each block completely before it
//! changes anything.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{Amount, MILLICOIN_PER_WORLDCOIN};
use crate::error::AmountError;
use crate::hash::{sha256, Hash32};
use crate::identity;
use crate::model::{Account, AccountId, AccountKind, Channel, ChannelPolicy, CountryCode, Day};
use crate::people_ledger::CheckpointSummary;
use crate::policy::{self, RejectReason, TransferDecision};
use crate::tx::{TransferKind, Transaction, TxKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GovError {
    #[error("{0} is already a member")]
    AlreadyMember(CountryCode),
    #[error("{0} is not a member")]
    NotMember(CountryCode),
    #[error("a government cannot transfer to itself")]
    SameCountry,
    #[error("transfer rejected: {0:?}")]
    Rejected(RejectReason),
    #[error("{country}: expected checkpoint {expected}, got {got}")]
    GapInSequence { country: CountryCode, expected: u64, got: u64 },
    #[error("{country}: checkpoint does not chain onto the last anchored summary")]
    ChainMismatch { country: CountryCode },
    #[error("{country}: anchored birth mints are not split evenly between government and newborns")]
    UnbalancedMint { country: CountryCode },
    #[error("expected block height {expected}, got {got}")]
    BadHeight { expected: u64, got: u64 },
    #[error("block {height}: prev_hash does not link to the previous block")]
    BadPrevHash { height: u64 },
    #[error("block {height}: stored hash does not match content")]
    BadBlockHash { height: u64 },
    #[error("government transfer signature does not verify")]
    BadSignature,
    #[error("government transfer nonce {got}, expected {expected}")]
    BadNonce { expected: u64, got: u64 },
    #[error("malformed government transfer: {0}")]
    MalformedTransfer(&'static str),
    #[error("chain import, line {line}: {message}")]
    Import { line: usize, message: String },
    #[error(transparent)]
    Amount(#[from] AmountError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum BlockPayload {
    Join { country: CountryCode, population: u64, day: Day },
    GovTransfer(Transaction),
    CheckpointAnchor(CheckpointSummary),
}

impl BlockPayload {
    fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            BlockPayload::Join { country, population, day } => {
                out.push(0);
                out.push(country.as_str().len() as u8);
                out.extend_from_slice(country.as_str().as_bytes());
                out.extend_from_slice(&population.to_be_bytes());
                out.extend_from_slice(&day.to_be_bytes());
            }
            BlockPayload::GovTransfer(tx) => {
                out.push(1);
                out.extend_from_slice(&tx.canonical_bytes());
                let sig = tx.signature.as_ref().map_or(&[][..], |s| &s.0[..]);
                out.extend_from_slice(&(sig.len() as u16).to_be_bytes());
                out.extend_from_slice(sig);
            }
            BlockPayload::CheckpointAnchor(summary) => {
                out.push(2);
                out.extend_from_slice(&summary.canonical_bytes());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalBlock {
    pub height: u64,
    pub prev_hash: Hash32,
    pub payload: BlockPayload,
    pub block_hash: Hash32,
}

impl GlobalBlock {
    pub fn new(height: u64, prev_hash: Hash32, payload: BlockPayload) -> Self {
        let block_hash = Self::compute_hash(height, &prev_hash, &payload);
        GlobalBlock {
            height,
            prev_hash,
            payload,
            block_hash,
        }
    }

    pub fn compute_hash(height: u64, prev_hash: &Hash32, payload: &BlockPayload) -> Hash32 {
        let mut bytes = Vec::with_capacity(128);
        bytes.extend_from_slice(&height.to_be_bytes());
        bytes.extend_from_slice(prev_hash.as_bytes());
        bytes.extend_from_slice(&payload.canonical_bytes());
        sha256(&bytes)
    }

    pub fn hash_is_consistent(&self) -> bool {
        self.block_hash == Self::compute_hash(self.height, &self.prev_hash, &self.payload)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("block serializes")
    }
}

/// One row of the transparency report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldingsRow {
    pub country: CountryCode,
    pub gov_balance: Amount,
    pub people_supply: Amount,
    pub total: Amount,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldingsReport {
    pub world_supply: Amount,
    pub rows: Vec<HoldingsRow>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct AnchorCursor {
    next_seq: u64,
    last_hash: Hash32,
}

/// Replica of the global ledger and the balances derived from it.
#[derive(Clone, Debug)]
pub struct WorldState {
    policy: ChannelPolicy,
    chain: Vec<GlobalBlock>,
    gov_balances: BTreeMap<CountryCode, Amount>,
    people_supplies: BTreeMap<CountryCode, Amount>,
    members: BTreeSet<CountryCode>,
    gov_ids: BTreeMap<AccountId, CountryCode>,
    populations: BTreeMap<CountryCode, u64>,
    anchors: BTreeMap<CountryCode, AnchorCursor>,
    gov_nonces: BTreeMap<CountryCode, u64>,
    anchored_births: u64,
}

impl WorldState {
    /// Empty world governed by `policy` on the government channel.
    pub fn new(policy: ChannelPolicy) -> Self {
        WorldState {
            policy,
            chain: Vec::new(),
            gov_balances: BTreeMap::new(),
            people_supplies: BTreeMap::new(),
            members: BTreeSet::new(),
            gov_ids: BTreeMap::new(),
            populations: BTreeMap::new(),
            anchors: BTreeMap::new(),
            gov_nonces: BTreeMap::new(),
            anchored_births: 0,
        }
    }

    pub fn policy(&self) -> &ChannelPolicy {
        &self.policy
    }

    pub fn chain(&self) -> &[GlobalBlock] {
        &self.chain
    }

    pub fn height(&self) -> u64 {
        self.chain.len() as u64
    }

    pub fn tip_hash(&self) -> Hash32 {
        self.chain.last().map_or(Hash32::ZERO, |b| b.block_hash)
    }

    pub fn members(&self) -> &BTreeSet<CountryCode> {
        &self.members
    }

    pub fn is_member(&self, country: &CountryCode) -> bool {
        self.members.contains(country)
    }

    pub fn gov_balance(&self, country: &CountryCode) -> Option<Amount> {
        self.gov_balances.get(country).copied()
    }

    pub fn people_supply(&self, country: &CountryCode) -> Option<Amount> {
        self.people_supplies.get(country).copied()
    }

    pub fn gov_balances(&self) -> &BTreeMap<CountryCode, Amount> {
        &self.gov_balances
    }

    pub fn people_supplies(&self) -> &BTreeMap<CountryCode, Amount> {
        &self.people_supplies
    }

    pub fn total_joined_population(&self) -> u64 {
        self.populations.values().sum()
    }

    pub fn anchored_births(&self) -> u64 {
        self.anchored_births
    }

    /// Sequence number the next anchor from `country` must carry.
    pub fn next_anchor_seq(&self, country: &CountryCode) -> u64 {
        self.anchors.get(country).map_or(0, |c| c.next_seq)
    }

    pub fn join_country(&mut self, country: CountryCode, population: u64, day: Day) -> Result<&GlobalBlock, GovError> {
        self.append(BlockPayload::Join { country, population, day })
    }

    /// Builds, signs and commits a government transfer.
    pub fn submit_gov_transfer(
        &mut self,
        from: &CountryCode,
        to: &CountryCode,
        amount: Amount,
        kind: TransferKind,
        day: Day,
    ) -> Result<&GlobalBlock, GovError> {
        for c in [from, to] {
            if !self.is_member(c) {
                return Err(GovError::NotMember(c.clone()));
            }
        }
        if from == to {
            return Err(GovError::SameCountry);
        }
        let (key, from_id) = identity::government_identity(from);
        let (_, to_id) = identity::government_identity(to);
        let nonce = self.gov_nonces.get(from).copied().unwrap_or(0);
        let mut tx = Transaction::new(Channel::Government, kind.into(), from_id, to_id, amount, day, nonce);
        tx.signature = Some(identity::sign_tx(&tx, &key));
        self.append(BlockPayload::GovTransfer(tx))
    }

    pub fn anchor_checkpoint(&mut self, summary: CheckpointSummary) -> Result<&GlobalBlock, GovError> {
        self.append(BlockPayload::CheckpointAnchor(summary))
    }

    fn append(&mut self, payload: BlockPayload) -> Result<&GlobalBlock, GovError> {
        let block = GlobalBlock::new(self.height(), self.tip_hash(), payload);
        self.apply_block(block)?;
        Ok(self.chain.last().expect("just appended"))
    }

    /// Validates `block` against the current tip and applies it.
    pub fn apply_block(&mut self, block: GlobalBlock) -> Result<(), GovError> {
        if block.height != self.height() {
            return Err(GovError::BadHeight {
                expected: self.height(),
                got: block.height,
            });
        }
        if block.prev_hash != self.tip_hash() {
            return Err(GovError::BadPrevHash { height: block.height });
        }
        if !block.hash_is_consistent() {
            return Err(GovError::BadBlockHash { height: block.height });
        }
        match &block.payload {
            BlockPayload::Join { country, population, .. } => self.apply_join(country, *population)?,
            BlockPayload::GovTransfer(tx) => self.apply_transfer(tx)?,
            BlockPayload::CheckpointAnchor(summary) => self.apply_anchor(summary)?,
        }
        self.chain.push(block);
        Ok(())
    }

    fn apply_join(&mut self, country: &CountryCode, population: u64) -> Result<(), GovError> {
        if self.is_member(country) {
            return Err(GovError::AlreadyMember(country.clone()));
        }
        let alloc = policy::genesis_allocation(population)?;
        let people = alloc.per_person_grant.checked_mul(population)?;
        // overflow guard on the world total before committing
        self.world_supply_checked()?.checked_add(alloc.total_minted)?;
        let (_, gov_id) = identity::government_identity(country);
        self.members.insert(country.clone());
        self.gov_ids.insert(gov_id, country.clone());
        self.gov_balances.insert(country.clone(), alloc.government_grant);
        self.people_supplies.insert(country.clone(), people);
        self.populations.insert(country.clone(), population);
        Ok(())
    }

    fn gov_account(&self, country: &CountryCode, id: AccountId) -> Account {
        Account::new(id, AccountKind::Government, country.clone(), self.gov_balances[country])
    }

    fn apply_transfer(&mut self, tx: &Transaction) -> Result<(), GovError> {
        if tx.channel != Channel::Government {
            return Err(GovError::MalformedTransfer("not a government-channel transaction"));
        }
        let kind = match tx.kind {
            TxKind::Sale => TransferKind::Sale,
            TxKind::Donation => TransferKind::Donation,
            _ => return Err(GovError::MalformedTransfer("only sales and donations are allowed")),
        };
        if tx.amount.is_zero() {
            return Err(GovError::MalformedTransfer("zero amount"));
        }
        let from = self.gov_ids.get(&tx.from).cloned().ok_or(GovError::MalformedTransfer("unknown sender government"))?;
        let to = self.gov_ids.get(&tx.to).cloned().ok_or(GovError::MalformedTransfer("unknown receiver government"))?;
        if from == to {
            return Err(GovError::SameCountry);
        }
        let (key, _) = identity::government_identity(&from);
        let sig = tx.signature.as_ref().ok_or(GovError::BadSignature)?;
        if !identity::verify_tx(tx, sig, &key.public()) {
            return Err(GovError::BadSignature);
        }
        let expected = self.gov_nonces.get(&from).copied().unwrap_or(0);
        if tx.nonce != expected {
            return Err(GovError::BadNonce { expected, got: tx.nonce });
        }
        let sender = self.gov_account(&from, tx.from);
        let receiver = self.gov_account(&to, tx.to);
        if let TransferDecision::Reject(r) = policy::validate_transfer(&sender, &receiver, tx.amount, kind, &self.policy, tx.timestamp) {
            return Err(GovError::Rejected(r));
        }
        let new_from = sender.total.checked_sub(tx.amount)?;
        let new_to = receiver.total.checked_add(tx.amount)?;
        self.gov_balances.insert(from.clone(), new_from);
        self.gov_balances.insert(to, new_to);
        self.gov_nonces.insert(from, expected + 1);
        Ok(())
    }

    fn apply_anchor(&mut self, s: &CheckpointSummary) -> Result<(), GovError> {
        let country = &s.country;
        if !self.is_member(country) {
            return Err(GovError::NotMember(country.clone()));
        }
        let cursor = self.anchors.get(country).cloned().unwrap_or_default();
        if s.seq_no != cursor.next_seq {
            return Err(GovError::GapInSequence {
                country: country.clone(),
                expected: cursor.next_seq,
                got: s.seq_no,
            });
        }
        if s.prev_summary_hash != cursor.last_hash {
            return Err(GovError::ChainMismatch { country: country.clone() });
        }
        if s.minted != s.minted_government || !s.minted.millicoin().is_multiple_of(MILLICOIN_PER_WORLDCOIN) {
            return Err(GovError::UnbalancedMint { country: country.clone() });
        }
        let people = self.people_supplies[country].checked_add(s.minted)?.checked_sub(s.penalties)?;
        let gov = self.gov_balances[country].checked_add(s.minted_government)?.checked_add(s.penalties)?;
        self.world_supply_checked()?.checked_add(s.minted)?.checked_add(s.minted_government)?;

        self.people_supplies.insert(country.clone(), people);
        self.gov_balances.insert(country.clone(), gov);
        self.anchors.insert(
            country.clone(),
            AnchorCursor {
                next_seq: cursor.next_seq + 1,
                last_hash: s.hash(),
            },
        );
        self.anchored_births += s.births();
        Ok(())
    }

    fn world_supply_checked(&self) -> Result<Amount, AmountError> {
        Amount::checked_sum(self.gov_balances.values().chain(self.people_supplies.values()).copied())
    }

    /// Σ government balances + Σ people supplies.
    pub fn world_supply(&self) -> Amount {
        self.world_supply_checked().expect("supply bounded at every applied block")
    }

    /// `2000 mc × (Σ join populations + anchored births)`.
    pub fn expected_supply(&self) -> Result<Amount, AmountError> {
        let units = self.total_joined_population().checked_add(self.anchored_births).ok_or(AmountError::Overflow)?;
        Amount::from_millicoin(2 * MILLICOIN_PER_WORLDCOIN).checked_mul(units)
    }

    pub fn holdings_report(&self) -> HoldingsReport {
        let world = self.world_supply();
        let rows = self
            .members
            .iter()
            .map(|c| {
                let gov = self.gov_balances[c];
                let people = self.people_supplies[c];
                let total = gov.checked_add(people).expect("bounded by world supply");
                let share = if world.is_zero() { 0.0 } else { total.millicoin() as f64 / world.millicoin() as f64 };
                HoldingsRow {
                    country: c.clone(),
                    gov_balance: gov,
                    people_supply: people,
                    total,
                    share,
                }
            })
            .collect();
        HoldingsReport { world_supply: world, rows }
    }

    /// The chain as canonical JSON lines.
    pub fn export_chain(&self) -> String {
        let mut out = String::new();
        for b in &self.chain {
            out.push_str(&b.to_json());
            out.push('\n');
        }
        out
    }

    /// Rebuilds a world by replaying exported chain lines, checking every
    /// hash and link.
    pub fn import_chain(text: &str, policy: ChannelPolicy) -> Result<WorldState, GovError> {
        let mut world = WorldState::new(policy);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let block: GlobalBlock = serde_json::from_str(line).map_err(|e| GovError::Import {
                line: i + 1,
                message: e.to_string(),
            })?;
            world.apply_block(block).map_err(|e| GovError::Import {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(world)
    }
}

/// Checks hashes and links of a block sequence without applying balances.
pub fn verify_chain_links(chain: &[GlobalBlock]) -> Result<(), GovError> {
    let mut prev = Hash32::ZERO;
    for (i, b) in chain.iter().enumerate() {
        if b.height != i as u64 {
            return Err(GovError::BadHeight { expected: i as u64, got: b.height });
        }
        if b.prev_hash != prev {
            return Err(GovError::BadPrevHash { height: b.height });
        }
        if !b.hash_is_consistent() {
            return Err(GovError::BadBlockHash { height: b.height });
        }
        prev = b.block_hash;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(s: &str) -> CountryCode {
        CountryCode::new(s).unwrap()
    }

    fn wc(v: u64) -> Amount {
        Amount::from_worldcoin(v).unwrap()
    }

    fn four() -> WorldState {
        let mut w = WorldState::new(ChannelPolicy::government_default());
        for (c, p) in [("AA", 1000), ("BB", 500), ("CC", 2000), ("DD", 100)] {
            w.join_country(cc(c), p, 0).unwrap();
        }
        w
    }

    fn summary(country: &str, seq_no: u64, prev: Hash32, births: u64) -> CheckpointSummary {
        CheckpointSummary {
            country: cc(country),
            seq_no,
            tx_count: 2 * births.max(1),
            merkle_root: sha256(&seq_no.to_be_bytes()),
            minted: wc(births),
            minted_government: wc(births),
            penalties: Amount::ZERO,
            volume: Amount::ZERO,
            prev_summary_hash: prev,
            day: 1,
        }
    }

    #[test]
    fn four_country_genesis() {
        let w = four();
        assert_eq!(w.world_supply(), Amount::from_millicoin(7_200_000));
        assert_eq!(w.height(), 4);
        assert_eq!(w.chain()[0].prev_hash, Hash32::ZERO);
        verify_chain_links(w.chain()).unwrap();

        let report = w.holdings_report();
        let shares: Vec<f64> = report.rows.iter().map(|r| (r.share * 1000.0).round() / 10.0).collect();
        assert_eq!(shares, vec![27.8, 13.9, 55.6, 2.8]);
        let sum: u64 = report.rows.iter().map(|r| r.total.millicoin()).sum();
        assert_eq!(sum, 7_200_000);
    }

    #[test]
    fn join_edge_cases() {
        let mut w = four();
        w.join_country(cc("EE"), 0, 3).unwrap();
        assert_eq!(w.world_supply(), Amount::from_millicoin(7_200_000));
        let before = w.export_chain();
        assert_eq!(w.join_country(cc("AA"), 5, 3).unwrap_err(), GovError::AlreadyMember(cc("AA")));
        assert_eq!(w.export_chain(), before);

        let empty = WorldState::new(ChannelPolicy::government_default());
        assert_eq!(empty.world_supply(), Amount::ZERO);
        assert!(empty.holdings_report().rows.is_empty());

        let mut single = WorldState::new(ChannelPolicy::government_default());
        single.join_country(cc("AA"), 7, 0).unwrap();
        assert_eq!(single.holdings_report().rows[0].share, 1.0);
    }

    #[test]
    fn gov_transfers() {
        let mut w = WorldState::new(ChannelPolicy::government_default());
        w.join_country(cc("AA"), 2_000_000, 0).unwrap();
        w.join_country(cc("BB"), 3_000_000, 0).unwrap();
        w.join_country(cc("CC"), 500_000, 0).unwrap();
        let supply = w.world_supply();

        w.submit_gov_transfer(&cc("AA"), &cc("BB"), wc(50_000), TransferKind::Sale, 1).unwrap();
        assert_eq!(w.gov_balance(&cc("AA")), Some(wc(1_950_000)));
        assert_eq!(w.gov_balance(&cc("BB")), Some(wc(3_050_000)));

        let h = w.height();
        let err = w.submit_gov_transfer(&cc("CC"), &cc("BB"), wc(10_000), TransferKind::Sale, 1).unwrap_err();
        assert_eq!(err, GovError::Rejected(RejectReason::LimitThresholdBuyerTooRich));
        assert_eq!(w.height(), h);

        w.submit_gov_transfer(&cc("CC"), &cc("BB"), wc(100_000), TransferKind::Donation, 2).unwrap();
        assert_eq!(w.gov_balance(&cc("CC")), Some(wc(400_000)));

        // CT floor at 200,000 WC
        let err = w.submit_gov_transfer(&cc("CC"), &cc("AA"), wc(200_001), TransferKind::Donation, 2).unwrap_err();
        assert_eq!(err, GovError::Rejected(RejectReason::WouldBreachCutoff));

        assert_eq!(w.world_supply(), supply);
        assert_eq!(
            w.submit_gov_transfer(&cc("AA"), &cc("ZZ"), wc(1), TransferKind::Sale, 2).unwrap_err(),
            GovError::NotMember(cc("ZZ"))
        );
        assert_eq!(w.submit_gov_transfer(&cc("AA"), &cc("AA"), wc(1), TransferKind::Sale, 2).unwrap_err(), GovError::SameCountry);
    }

    #[test]
    fn anchors() {
        let mut w = four();
        let s0 = summary("AA", 0, Hash32::ZERO, 2);
        w.anchor_checkpoint(s0.clone()).unwrap();
        assert_eq!(w.people_supply(&cc("AA")), Some(wc(1002)));
        assert_eq!(w.gov_balance(&cc("AA")), Some(wc(1002)));
        assert_eq!(w.world_supply(), w.expected_supply().unwrap());

        let skip = summary("AA", 2, s0.hash(), 0);
        assert_eq!(
            w.anchor_checkpoint(skip).unwrap_err(),
            GovError::GapInSequence { country: cc("AA"), expected: 1, got: 2 }
        );
        let unlinked = summary("AA", 1, Hash32::ZERO, 0);
        assert_eq!(w.anchor_checkpoint(unlinked).unwrap_err(), GovError::ChainMismatch { country: cc("AA") });
        assert_eq!(w.anchor_checkpoint(summary("ZZ", 0, Hash32::ZERO, 0)).unwrap_err(), GovError::NotMember(cc("ZZ")));
        let mut lopsided = summary("BB", 0, Hash32::ZERO, 1);
        lopsided.minted_government = Amount::ZERO;
        assert!(matches!(w.anchor_checkpoint(lopsided), Err(GovError::UnbalancedMint { .. })));
        w.anchor_checkpoint(summary("AA", 1, s0.hash(), 0)).unwrap();
    }

    #[test]
    fn export_import_roundtrip() {
        let mut w = WorldState::new(ChannelPolicy::government_default());
        w.join_country(cc("AA"), 2_000_000, 0).unwrap();
        w.join_country(cc("BB"), 300, 0).unwrap();
        w.submit_gov_transfer(&cc("AA"), &cc("BB"), wc(5), TransferKind::Donation, 1).unwrap();
        w.anchor_checkpoint(summary("BB", 0, Hash32::ZERO, 1)).unwrap();
        let text = w.export_chain();
        let back = WorldState::import_chain(&text, ChannelPolicy::government_default()).unwrap();
        assert_eq!(back.chain(), w.chain());
        assert_eq!(back.export_chain(), text);
        assert_eq!(back.holdings_report(), w.holdings_report());

        let tampered = text.replacen("\"population\":300", "\"population\":301", 1);
        assert!(matches!(
            WorldState::import_chain(&tampered, ChannelPolicy::government_default()),
            Err(GovError::Import { line: 2, .. })
        ));
    }

    #[test]
    fn replica_rejects_forged_transfer() {
        let mut w = WorldState::new(ChannelPolicy::government_default());
        w.join_country(cc("AA"), 2_000_000, 0).unwrap();
        w.join_country(cc("BB"), 10, 0).unwrap();
        let (_, a) = identity::government_identity(&cc("AA"));
        let (kb, b) = identity::government_identity(&cc("BB"));
        let mut tx = Transaction::new(Channel::Government, TxKind::Sale, a, b, wc(1), 1, 0);
        tx.signature = Some(identity::sign_tx(&tx, &kb));
        let block = GlobalBlock::new(w.height(), w.tip_hash(), BlockPayload::GovTransfer(tx));
        assert_eq!(w.apply_block(block), Err(GovError::BadSignature));
    }
}
