//! Stateless minting and transfer rules.
//!
//! A transfer is allowed only when all of the following hold, checked in
//! this order (the first failing rule names the rejection):
//!
//! 1. people channel: sender and receiver live in the same country;
//! 2. the sender is not already below the cutoff threshold;
//! 3. the sender's spendable balance covers the amount;
//! 4. the sender's post-debit balance stays at or above the cutoff;
//! 5. a sale by a sender below the limit threshold goes to a receiver whose
//!    balance is not over the limit threshold;
//! 6. the receiver's balance does not overflow.
//!
//! Receiving is otherwise unconditional. Donations skip rule 5.

use serde::{Deserialize, Serialize};

use crate::amount::{Amount, MILLICOIN_PER_WORLDCOIN};
use crate::error::AmountError;
use crate::model::{Account, AccountId, Channel, ChannelPolicy, Day};
use crate::tx::{TransferKind, Transaction, TxKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RejectReason {
    BelowCutoff,
    WouldBreachCutoff,
    LimitThresholdBuyerTooRich,
    InsufficientSpendable,
    LockedFunds,
    CrossCountryLocal,
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum TransferDecision {
    Allow,
    Reject(RejectReason),
}

impl TransferDecision {
    pub fn is_allow(&self) -> bool {
        matches!(self, TransferDecision::Allow)
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match self {
            TransferDecision::Allow => None,
            TransferDecision::Reject(r) => Some(*r),
        }
    }
}

/// Coins granted to a country and its citizens on joining.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub government_grant: Amount,
    pub per_person_grant: Amount,
    pub total_minted: Amount,
}

/// One Worldcoin per citizen to the government and one to each citizen.
pub fn genesis_allocation(population: u64) -> Result<Allocation, AmountError> {
    let per_person_grant = Amount::from_millicoin(MILLICOIN_PER_WORLDCOIN);
    let government_grant = per_person_grant.checked_mul(population)?;
    let people_total = per_person_grant.checked_mul(population)?;
    Ok(Allocation {
        government_grant,
        per_person_grant,
        total_minted: government_grant.checked_add(people_total)?,
    })
}

/// Balance the account may debit at `now`. The lock lifts on the unlock day.
pub fn spendable(account: &Account, now: Day) -> Amount {
    if now < account.locked_until {
        account.total.saturating_sub(account.locked)
    } else {
        account.total
    }
}

pub fn validate_transfer(
    sender: &Account,
    receiver: &Account,
    amount: Amount,
    kind: TransferKind,
    policy: &ChannelPolicy,
    now: Day,
) -> TransferDecision {
    use RejectReason::*;
    let t = policy.effective_thresholds();

    if policy.channel() == Channel::People && sender.country != receiver.country {
        return TransferDecision::Reject(CrossCountryLocal);
    }
    if sender.total < t.ct {
        return TransferDecision::Reject(BelowCutoff);
    }
    if spendable(sender, now) < amount {
        let reason = if sender.total >= amount { LockedFunds } else { InsufficientSpendable };
        return TransferDecision::Reject(reason);
    }
    // spendable ≤ total, so this cannot underflow
    let remaining = sender.total.saturating_sub(amount);
    if remaining < t.ct {
        return TransferDecision::Reject(WouldBreachCutoff);
    }
    if kind == TransferKind::Sale && sender.total < t.lt && receiver.total > t.lt {
        return TransferDecision::Reject(LimitThresholdBuyerTooRich);
    }
    if receiver.total.checked_add(amount).is_err() {
        return TransferDecision::Reject(Overflow);
    }
    TransferDecision::Allow
}

/// The two 1-Worldcoin mint transactions for a birth: government first, then
/// the newborn. They use nonces `nonce` and `nonce + 1`.
pub fn birth_mint(government: AccountId, newborn: AccountId, now: Day, nonce: u64) -> [Transaction; 2] {
    let grant = Amount::from_millicoin(MILLICOIN_PER_WORLDCOIN);
    let mint = |to, n| Transaction::new(Channel::People, TxKind::MintBirth, AccountId::MINT, to, grant, now, n);
    [mint(government, nonce), mint(newborn, nonce.wrapping_add(1))]
}

/// Penalty charged to each parent once a couple exceeds the child limit.
///
/// Each parent pays `min(penalty, total − ct, spendable)` to the government;
/// a parent who cannot pay anything produces no transaction.
pub fn assess_penalty(
    parents: [&Account; 2],
    child_count_after_birth: u32,
    policy: &ChannelPolicy,
    government: AccountId,
    now: Day,
    nonce: u64,
) -> Vec<Transaction> {
    if child_count_after_birth <= policy.penalty_child_limit() {
        return Vec::new();
    }
    let ct = policy.effective_thresholds().ct;
    let mut out = Vec::with_capacity(2);
    for parent in parents {
        let charge = policy
            .penalty_amount()
            .min(parent.total.saturating_sub(ct))
            .min(spendable(parent, now));
        if charge.is_zero() {
            continue;
        }
        let n = nonce.wrapping_add(out.len() as u64);
        out.push(Transaction::new(Channel::People, TxKind::Penalty, parent.id, government, charge, now, n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::Hash32;
    use crate::model::{AccountKind, CountryCode};
    use proptest::prelude::*;

    fn id(n: u8) -> AccountId {
        AccountId(Hash32([n; 32]))
    }

    fn person(n: u8, country: &str, total: u64) -> Account {
        Account::new(id(n), AccountKind::Person, CountryCode::new(country).unwrap(), Amount::from_millicoin(total))
    }

    fn gov(n: u8, wc: u64) -> Account {
        Account::new(id(n), AccountKind::Government, CountryCode::new(&format!("G{n}")).unwrap(), Amount::from_worldcoin(wc).unwrap())
    }

    fn mc(v: u64) -> Amount {
        Amount::from_millicoin(v)
    }

    #[test]
    fn genesis_examples() {
        assert_eq!(genesis_allocation(0).unwrap().total_minted, Amount::ZERO);
        let one = genesis_allocation(1).unwrap();
        assert_eq!((one.government_grant, one.per_person_grant, one.total_minted), (mc(1000), mc(1000), mc(2000)));
        let world: u64 = [1000, 500, 2000, 100]
            .iter()
            .map(|p| genesis_allocation(*p).unwrap().total_minted.millicoin())
            .sum();
        assert_eq!(world, 7_200_000);
        assert_eq!(genesis_allocation(u64::MAX / 1000 + 1), Err(AmountError::Overflow));
    }

    #[test]
    fn people_transfer_examples() {
        let p = ChannelPolicy::people_default();
        let d = |s: u64, r: u64, a: u64| {
            validate_transfer(&person(1, "AA", s), &person(2, "AA", r), mc(a), TransferKind::Sale, &p, 0)
        };
        for amount in [1, 50, 90] {
            assert_eq!(d(90, 0, amount), TransferDecision::Reject(RejectReason::BelowCutoff));
        }
        assert_eq!(d(400, 600, 100), TransferDecision::Reject(RejectReason::LimitThresholdBuyerTooRich));
        assert_eq!(d(400, 450, 300), TransferDecision::Allow);
        assert_eq!(d(400, 450, 301), TransferDecision::Reject(RejectReason::WouldBreachCutoff));
        assert_eq!(d(400, 500, 100), TransferDecision::Allow, "LT is inclusive for the buyer");
        assert_eq!(d(400, 450, 401), TransferDecision::Reject(RejectReason::InsufficientSpendable));

        let cross = validate_transfer(&person(1, "AA", 1000), &person(2, "BB", 0), mc(10), TransferKind::Sale, &p, 0);
        assert_eq!(cross, TransferDecision::Reject(RejectReason::CrossCountryLocal));
    }

    #[test]
    fn government_transfer_examples() {
        let p = ChannelPolicy::government_default();
        let wc = |v| Amount::from_worldcoin(v).unwrap();
        let donate = validate_transfer(&gov(1, 500_000), &gov(2, 5_000_000), wc(100_000), TransferKind::Donation, &p, 0);
        assert_eq!(donate, TransferDecision::Allow);
        let sell = validate_transfer(&gov(1, 2_000_000), &gov(2, 3_000_000), wc(50_000), TransferKind::Sale, &p, 0);
        assert_eq!(sell, TransferDecision::Allow);
        let sell = validate_transfer(&gov(3, 500_000), &gov(2, 3_000_000), wc(50_000), TransferKind::Sale, &p, 0);
        assert_eq!(sell, TransferDecision::Reject(RejectReason::LimitThresholdBuyerTooRich));
        // governments of different countries may trade
        let below = validate_transfer(&gov(3, 150_000), &gov(2, 0), wc(1), TransferKind::Donation, &p, 0);
        assert_eq!(below, TransferDecision::Reject(RejectReason::BelowCutoff));
    }

    #[test]
    fn locked_and_overflow() {
        let p = ChannelPolicy::people_default();
        let mut baby = person(1, "AA", 1500);
        baby.locked = mc(1000);
        baby.locked_until = 100;
        assert_eq!(spendable(&baby, 99), mc(500));
        assert_eq!(spendable(&baby, 100), mc(1500));
        let rich = person(2, "AA", u64::MAX - 5);
        assert_eq!(
            validate_transfer(&baby, &rich, mc(600), TransferKind::Donation, &p, 50),
            TransferDecision::Reject(RejectReason::LockedFunds)
        );
        assert_eq!(
            validate_transfer(&baby, &rich, mc(400), TransferKind::Donation, &p, 50),
            TransferDecision::Reject(RejectReason::Overflow)
        );
    }

    #[test]
    fn spendable_examples() {
        let mut a = person(1, "AA", 1000);
        a.locked = mc(1000);
        a.locked_until = 6580;
        assert_eq!(spendable(&a, 10), Amount::ZERO);
        assert_eq!(spendable(&a, 6580), mc(1000));
        a.total = mc(1500);
        assert_eq!(spendable(&a, 10), mc(500));
    }

    #[test]
    fn birth_mint_examples() {
        let [g, n] = birth_mint(id(9), id(1), 10, 0);
        assert_eq!((g.to, g.amount, g.kind), (id(9), mc(1000), TxKind::MintBirth));
        assert_eq!((n.to, n.amount, n.from), (id(1), mc(1000), AccountId::MINT));
        assert!(g.signature.is_none() && n.signature.is_none());
        assert_ne!(g.tx_id, n.tx_id);
    }

    #[test]
    fn penalty_examples() {
        let p = ChannelPolicy::people_default();
        let (a, b) = (person(1, "AA", 2000), person(2, "AA", 2000));
        let txs = assess_penalty([&a, &b], 4, &p, id(9), 5, 0);
        assert_eq!(txs.len(), 2);
        assert!(txs.iter().all(|t| t.amount == mc(500) && t.to == id(9) && t.kind == TxKind::Penalty));
        assert!(assess_penalty([&a, &b], 3, &p, id(9), 5, 0).is_empty());

        let poor = person(3, "AA", 300);
        let txs = assess_penalty([&poor, &b], 4, &p, id(9), 5, 0);
        assert_eq!(txs[0].amount, mc(200));

        let broke = person(4, "AA", 100);
        assert_eq!(assess_penalty([&broke, &broke], 4, &p, id(9), 5, 0).len(), 0);
    }

    fn arb_account(n: u8) -> impl Strategy<Value = Account> {
        (0u64..3000, 0u64..1500, 0u64..20).prop_map(move |(total, locked, until)| {
            let mut a = person(n, "AA", total);
            a.locked = mc(locked.min(total));
            a.locked_until = until;
            a
        })
    }

    proptest! {
        #[test]
        fn allowed_transfers_respect_thresholds(
            s in arb_account(1), r in arb_account(2), amount in 0u64..3000,
            sale in any::<bool>(), now in 0u64..20,
        ) {
            let p = ChannelPolicy::people_default();
            let t = p.effective_thresholds();
            let kind = if sale { TransferKind::Sale } else { TransferKind::Donation };
            if validate_transfer(&s, &r, mc(amount), kind, &p, now).is_allow() {
                prop_assert!(s.total.millicoin() - amount >= t.ct.millicoin());
                prop_assert!(spendable(&s, now).millicoin() >= amount);
                if sale && s.total < t.lt {
                    prop_assert!(r.total <= t.lt);
                }
            }
        }

        #[test]
        fn receiver_only_matters_for_under_lt_sales(s in arb_account(1), r in arb_account(2), amount in 0u64..3000) {
            let p = ChannelPolicy::people_default();
            let t = p.effective_thresholds();
            let poor = person(2, "AA", 0);
            let with_r = validate_transfer(&s, &r, mc(amount), TransferKind::Sale, &p, 0);
            let with_poor = validate_transfer(&s, &poor, mc(amount), TransferKind::Sale, &p, 0);
            if with_r != with_poor {
                prop_assert_eq!(with_r, TransferDecision::Reject(RejectReason::LimitThresholdBuyerTooRich));
                prop_assert!(s.total < t.lt);
            }
        }

        #[test]
        fn penalties_conserve_and_respect_floor(total_a in 0u64..3000, total_b in 0u64..3000, children in 0u32..8) {
            let p = ChannelPolicy::people_default();
            let (a, b) = (person(1, "AA", total_a), person(2, "AA", total_b));
            for tx in assess_penalty([&a, &b], children, &p, id(9), 0, 0) {
                let payer = if tx.from == a.id { &a } else { &b };
                prop_assert!(payer.total.millicoin() - tx.amount.millicoin() >= 100);
                prop_assert!(tx.amount <= p.penalty_amount());
                prop_assert_eq!(tx.to, id(9));
            }
        }
    }
}
