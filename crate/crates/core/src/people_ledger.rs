//! Per-country people channel.
//!
//! Holds person balances, accepts signed person-to-person transfers, records
//! birth mints and penalties, and seals committed transactions into
//! Merkle-committed checkpoint summaries.
//!
//! Genesis citizens are materialized lazily: a country of population `P`
//! starts with `P × 1000` mc of people supply, but an individual citizen
//! account only exists once [`LocalLedger::open_genesis_account`] has been
//! called for its index. The government account is not tracked here; coins
//! owed to it travel in checkpoint summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{Amount, MILLICOIN_PER_WORLDCOIN};
use crate::error::AmountError;
use crate::hash::{sha256, Hash32};
use crate::identity::{self, PreparedKey, PublicKey};
use crate::merkle;
use crate::model::{Account, AccountId, AccountKind, Channel, ChannelPolicy, CountryCode, Day};
use crate::policy::{self, RejectReason, TransferDecision};
use crate::tx::{TransferKind, Transaction, TxKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("unknown account {0}")]
    UnknownAccount(AccountId),
    #[error("account {0} already exists")]
    DuplicateAccount(AccountId),
    #[error("genesis index {index} out of range for population {population}")]
    UnknownGenesisIndex { index: u64, population: u64 },
    #[error("invalid parents: {0}")]
    InvalidParents(String),
    #[error("signature missing")]
    MissingSignature,
    #[error("signature does not verify")]
    BadSignature,
    #[error("nonce {got} not above last accepted nonce {last}")]
    DuplicateNonce { last: u64, got: u64 },
    #[error("transaction is not on the people channel")]
    WrongChannel,
    #[error("{0:?} transactions cannot be submitted")]
    NotATransfer(TxKind),
    #[error("zero-amount transfer")]
    ZeroAmount,
    #[error("sender and receiver are the same account")]
    SelfTransfer,
    #[error("tx_id does not match transaction content")]
    InconsistentId,
    #[error("transfer rejected: {0:?}")]
    Rejected(RejectReason),
    #[error("no pending transactions to seal")]
    EmptyBatch,
    #[error(transparent)]
    Amount(#[from] AmountError),
}

impl LedgerError {
    /// The policy reason, when the error is a threshold-rule rejection.
    pub fn reject_reason(&self) -> Option<RejectReason> {
        match self {
            LedgerError::Rejected(r) => Some(*r),
            _ => None,
        }
    }
}

/// Commitment and flow aggregates over one sealed batch of local transactions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub country: CountryCode,
    pub seq_no: u64,
    pub tx_count: u64,
    pub merkle_root: Hash32,
    /// Birth grants credited to newborns.
    pub minted: Amount,
    /// Birth grants credited to the government.
    pub minted_government: Amount,
    /// Penalties moved from parents to the government.
    pub penalties: Amount,
    /// Person-to-person sale and donation volume.
    pub volume: Amount,
    pub prev_summary_hash: Hash32,
    pub day: Day,
}

impl CheckpointSummary {
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let code = self.country.as_str().as_bytes();
        let mut out = Vec::with_capacity(1 + code.len() + 8 * 7 + 64);
        out.push(code.len() as u8);
        out.extend_from_slice(code);
        out.extend_from_slice(&self.seq_no.to_be_bytes());
        out.extend_from_slice(&self.tx_count.to_be_bytes());
        out.extend_from_slice(self.merkle_root.as_bytes());
        for a in [self.minted, self.minted_government, self.penalties, self.volume] {
            out.extend_from_slice(&a.millicoin().to_be_bytes());
        }
        out.extend_from_slice(self.prev_summary_hash.as_bytes());
        out.extend_from_slice(&self.day.to_be_bytes());
        out
    }

    pub fn hash(&self) -> Hash32 {
        sha256(&self.canonical_bytes())
    }

    /// Births recorded in the batch.
    pub fn births(&self) -> u64 {
        self.minted.millicoin() / MILLICOIN_PER_WORLDCOIN
    }
}

/// Flow aggregates of a batch, computed from its transactions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BatchFlows {
    pub minted: Amount,
    pub minted_government: Amount,
    pub penalties: Amount,
    pub volume: Amount,
}

impl BatchFlows {
    pub fn of(txs: &[Transaction], government: AccountId) -> Result<Self, AmountError> {
        let mut f = BatchFlows::default();
        for tx in txs {
            let slot = match tx.kind {
                TxKind::MintBirth if tx.to == government => &mut f.minted_government,
                TxKind::MintBirth | TxKind::MintGenesis => &mut f.minted,
                TxKind::Penalty => &mut f.penalties,
                TxKind::Sale | TxKind::Donation => &mut f.volume,
            };
            *slot = slot.checked_add(tx.amount)?;
        }
        Ok(f)
    }
}

/// Read access to archived checkpoint batches.
pub trait BatchStore {
    fn batch(&self, country: &CountryCode, seq_no: u64) -> Option<&[Transaction]>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceView {
    pub total: Amount,
    pub locked: Amount,
    pub spendable: Amount,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LocalAccount {
    account: Account,
    public_key: String,
    #[serde(skip)]
    prepared: Option<PreparedKey>,
    last_nonce: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SealedBatch {
    summary: CheckpointSummary,
    start: usize,
    end: usize,
}

/// Transactions produced by one birth.
#[derive(Clone, Debug)]
pub struct BirthRecord {
    pub newborn: AccountId,
    pub mints: [Transaction; 2],
    pub penalties: Vec<Transaction>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalLedger {
    country: CountryCode,
    government: AccountId,
    genesis_population: u64,
    genesis_day: Day,
    accounts: BTreeMap<AccountId, LocalAccount>,
    genesis_index: BTreeMap<u64, AccountId>,
    children: BTreeMap<AccountId, BTreeMap<AccountId, u32>>,
    log: Vec<Transaction>,
    sealed_len: usize,
    batches: BTreeMap<u64, SealedBatch>,
    people_supply: Amount,
    next_seq: u64,
    last_summary_hash: Hash32,
    system_nonce: u64,
}

impl LocalLedger {
    pub fn new(country: CountryCode, population: u64, day: Day) -> Result<Self, LedgerError> {
        let alloc = policy::genesis_allocation(population)?;
        let (_, government) = identity::government_identity(&country);
        Ok(LocalLedger {
            country,
            government,
            genesis_population: population,
            genesis_day: day,
            accounts: BTreeMap::new(),
            genesis_index: BTreeMap::new(),
            children: BTreeMap::new(),
            log: Vec::new(),
            sealed_len: 0,
            batches: BTreeMap::new(),
            people_supply: alloc.per_person_grant.checked_mul(population)?,
            next_seq: 0,
            last_summary_hash: Hash32::ZERO,
            system_nonce: 0,
        })
    }

    pub fn country(&self) -> &CountryCode {
        &self.country
    }

    pub fn government_id(&self) -> AccountId {
        self.government
    }

    pub fn genesis_population(&self) -> u64 {
        self.genesis_population
    }

    /// Materializes the genesis citizen at `index` (idempotent).
    pub fn open_genesis_account(&mut self, index: u64) -> Result<AccountId, LedgerError> {
        if index >= self.genesis_population {
            return Err(LedgerError::UnknownGenesisIndex {
                index,
                population: self.genesis_population,
            });
        }
        if let Some(id) = self.genesis_index.get(&index) {
            return Ok(*id);
        }
        let (kp, id) = identity::generate_identity(&identity::genesis_person_seed(&self.country, index));
        let mut account = Account::new(id, AccountKind::Person, self.country.clone(), Amount::from_millicoin(MILLICOIN_PER_WORLDCOIN));
        account.born_at = Some(self.genesis_day);
        self.insert_account(account, kp.public())?;
        self.genesis_index.insert(index, id);
        Ok(id)
    }

    pub fn genesis_account_id(&self, index: u64) -> Option<AccountId> {
        self.genesis_index.get(&index).copied()
    }

    /// Materialized genesis citizens as (index, id).
    pub fn genesis_accounts(&self) -> impl Iterator<Item = (u64, AccountId)> + '_ {
        self.genesis_index.iter().map(|(i, id)| (*i, *id))
    }

    fn insert_account(&mut self, account: Account, public: PublicKey) -> Result<(), LedgerError> {
        if self.accounts.contains_key(&account.id) || account.id == self.government {
            return Err(LedgerError::DuplicateAccount(account.id));
        }
        self.accounts.insert(
            account.id,
            LocalAccount {
                account,
                public_key: hex::encode(public),
                prepared: PreparedKey::new(&public),
                last_nonce: None,
            },
        );
        Ok(())
    }

    pub fn account(&self, id: &AccountId) -> Option<&Account> {
        self.accounts.get(id).map(|a| &a.account)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values().map(|a| &a.account)
    }

    pub fn public_key(&self, id: &AccountId) -> Option<PublicKey> {
        let entry = self.accounts.get(id)?;
        let mut out = [0u8; 32];
        hex::decode_to_slice(&entry.public_key, &mut out).ok()?;
        Some(out)
    }

    /// Next nonce the sender may use.
    pub fn next_nonce(&self, sender: &AccountId) -> u64 {
        self.accounts
            .get(sender)
            .and_then(|a| a.last_nonce)
            .map_or(0, |n| n + 1)
    }

    pub fn child_count(&self, a: &AccountId, b: &AccountId) -> u32 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.children.get(lo).and_then(|m| m.get(hi)).copied().unwrap_or(0)
    }

    /// Creates a newborn account and records its mint and any parent penalties.
    pub fn register_birth(
        &mut self,
        newborn_public: PublicKey,
        parents: (AccountId, AccountId),
        policy: &ChannelPolicy,
        now: Day,
    ) -> Result<BirthRecord, LedgerError> {
        let newborn = identity::account_id_of(&newborn_public);
        if self.accounts.contains_key(&newborn) || newborn == self.government {
            return Err(LedgerError::DuplicateAccount(newborn));
        }
        let (pa, pb) = parents;
        if pa == pb {
            return Err(LedgerError::InvalidParents("parents must be distinct".into()));
        }
        for p in [&pa, &pb] {
            if !self.accounts.contains_key(p) {
                return Err(LedgerError::UnknownAccount(*p));
            }
        }
        let unlock = now.checked_add(policy.unlock_age_days()).ok_or(AmountError::Overflow)?;
        let people_after_mint = self.people_supply.checked_add(Amount::from_millicoin(MILLICOIN_PER_WORLDCOIN))?;

        // Everything fallible is done; mutate from here on.
        let mints = policy::birth_mint(self.government, newborn, now, self.system_nonce);
        self.system_nonce += 2;
        let mut account = Account::new(newborn, AccountKind::Person, self.country.clone(), mints[1].amount);
        account.locked = mints[1].amount;
        account.locked_until = unlock;
        account.born_at = Some(now);
        account.parents = Some((pa, pb));
        self.insert_account(account, newborn_public)?;
        self.people_supply = people_after_mint;
        self.log.extend(mints.iter().cloned());

        let (lo, hi) = if pa <= pb { (pa, pb) } else { (pb, pa) };
        let count = {
            let c = self.children.entry(lo).or_default().entry(hi).or_insert(0);
            *c += 1;
            *c
        };
        let penalties = policy::assess_penalty(
            [&self.accounts[&pa].account, &self.accounts[&pb].account],
            count,
            policy,
            self.government,
            now,
            self.system_nonce,
        );
        for tx in &penalties {
            self.system_nonce += 1;
            let payer = &mut self.accounts.get_mut(&tx.from).expect("parent exists").account;
            payer.total = payer.total.checked_sub(tx.amount)?;
            self.people_supply = self.people_supply.checked_sub(tx.amount)?;
            self.log.push(tx.clone());
        }
        Ok(BirthRecord { newborn, mints, penalties })
    }

    /// Validates and commits a signed person-to-person transfer.
    ///
    /// Any error leaves the ledger untouched.
    pub fn submit_local_tx(&mut self, tx: Transaction, policy: &ChannelPolicy, now: Day) -> Result<Hash32, LedgerError> {
        if tx.channel != Channel::People {
            return Err(LedgerError::WrongChannel);
        }
        let kind = match tx.kind {
            TxKind::Sale => TransferKind::Sale,
            TxKind::Donation => TransferKind::Donation,
            other => return Err(LedgerError::NotATransfer(other)),
        };
        if !tx.id_is_consistent() {
            return Err(LedgerError::InconsistentId);
        }
        if tx.amount.is_zero() {
            return Err(LedgerError::ZeroAmount);
        }
        if tx.from == tx.to {
            return Err(LedgerError::SelfTransfer);
        }
        let sig = tx.signature.as_ref().ok_or(LedgerError::MissingSignature)?;
        let sender = self.accounts.get(&tx.from).ok_or(LedgerError::UnknownAccount(tx.from))?;
        let receiver = self.accounts.get(&tx.to).ok_or(LedgerError::UnknownAccount(tx.to))?;
        let key = self.accounts[&tx.from].prepared.as_ref().ok_or(LedgerError::BadSignature)?;
        if !key.verify(&tx, sig) {
            return Err(LedgerError::BadSignature);
        }
        if let Some(last) = sender.last_nonce {
            if tx.nonce <= last {
                return Err(LedgerError::DuplicateNonce { last, got: tx.nonce });
            }
        }
        if let TransferDecision::Reject(reason) =
            policy::validate_transfer(&sender.account, &receiver.account, tx.amount, kind, policy, now)
        {
            return Err(LedgerError::Rejected(reason));
        }

        let sender = self.accounts.get_mut(&tx.from).expect("checked");
        sender.account.total = sender.account.total.checked_sub(tx.amount)?;
        sender.last_nonce = Some(tx.nonce);
        let receiver = self.accounts.get_mut(&tx.to).expect("checked");
        receiver.account.total = receiver.account.total.checked_add(tx.amount)?;
        let id = tx.tx_id;
        self.log.push(tx);
        Ok(id)
    }

    /// Committed but not yet sealed transactions, in commit order.
    pub fn pending(&self) -> &[Transaction] {
        &self.log[self.sealed_len..]
    }

    pub fn log(&self) -> &[Transaction] {
        &self.log
    }

    /// Seals all pending transactions into the next checkpoint.
    pub fn seal_checkpoint(&mut self, now: Day) -> Result<CheckpointSummary, LedgerError> {
        let batch = self.pending();
        let merkle_root = merkle::root_of_transactions(batch).ok_or(LedgerError::EmptyBatch)?;
        let flows = BatchFlows::of(batch, self.government)?;
        let summary = CheckpointSummary {
            country: self.country.clone(),
            seq_no: self.next_seq,
            tx_count: batch.len() as u64,
            merkle_root,
            minted: flows.minted,
            minted_government: flows.minted_government,
            penalties: flows.penalties,
            volume: flows.volume,
            prev_summary_hash: self.last_summary_hash,
            day: now,
        };
        self.batches.insert(
            summary.seq_no,
            SealedBatch {
                summary: summary.clone(),
                start: self.sealed_len,
                end: self.log.len(),
            },
        );
        self.sealed_len = self.log.len();
        self.next_seq += 1;
        self.last_summary_hash = summary.hash();
        Ok(summary)
    }

    pub fn summaries(&self) -> impl Iterator<Item = &CheckpointSummary> {
        self.batches.values().map(|b| &b.summary)
    }

    pub fn summary(&self, seq_no: u64) -> Option<&CheckpointSummary> {
        self.batches.get(&seq_no).map(|b| &b.summary)
    }

    pub fn balance_of(&self, id: &AccountId, now: Day) -> Result<BalanceView, LedgerError> {
        let account = self.account(id).ok_or(LedgerError::UnknownAccount(*id))?;
        let spendable = policy::spendable(account, now);
        Ok(BalanceView {
            total: account.total,
            locked: account.total.saturating_sub(spendable),
            spendable,
        })
    }

    /// Sum of all person balances in the country, untouched genesis citizens
    /// included.
    pub fn country_people_supply(&self) -> Amount {
        self.people_supply
    }

    /// Recomputes the people supply from account state.
    pub fn recount_people_supply(&self) -> Result<Amount, AmountError> {
        let untouched = self.genesis_population - self.genesis_index.len() as u64;
        let base = Amount::from_millicoin(MILLICOIN_PER_WORLDCOIN).checked_mul(untouched)?;
        Amount::checked_sum(std::iter::once(base).chain(self.accounts().map(|a| a.total)))
    }

    /// JSON snapshot of the complete ledger state.
    pub fn snapshot(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("ledger serializes")
    }
}

impl BatchStore for LocalLedger {
    fn batch(&self, country: &CountryCode, seq_no: u64) -> Option<&[Transaction]> {
        if country != &self.country {
            return None;
        }
        self.batches.get(&seq_no).map(|b| &self.log[b.start..b.end])
    }
}
