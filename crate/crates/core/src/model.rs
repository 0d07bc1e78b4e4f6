//! Identifiers, channel policies and account state shared by both ledgers.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amount::{Amount, Ratio};
use crate::error::ModelError;
use crate::hash::Hash32;

/// Simulation time: an integer day counter.
pub type Day = u64;

/// Default people-channel age lock: 18 years of 365 days.
pub const DEFAULT_UNLOCK_AGE_DAYS: u64 = 18 * 365;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CountryCode(String);

impl CountryCode {
    pub fn new(code: &str) -> Result<Self, ModelError> {
        let ok = (2..=8).contains(&code.len())
            && code.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit());
        if ok {
            Ok(CountryCode(code.to_string()))
        } else {
            Err(ModelError::InvalidCountryCode(code.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for CountryCode {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        CountryCode::new(&value)
    }
}

impl From<CountryCode> for String {
    fn from(value: CountryCode) -> Self {
        value.0
    }
}

impl FromStr for CountryCode {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CountryCode::new(s)
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Account identifier: SHA-256 of the account's public key.
///
/// The all-zero id is reserved as the mint sentinel used as the source of
/// system-created coins.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AccountId(pub Hash32);

impl AccountId {
    pub const MINT: AccountId = AccountId(Hash32::ZERO);

    pub fn is_mint(&self) -> bool {
        *self == Self::MINT
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        self.0.as_bytes()
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AccountId({})", &self.0.to_hex()[..12])
    }
}

impl FromStr for AccountId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Hash32::from_hex(s).map(AccountId)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountKind {
    Person,
    Government,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    People,
    Government,
}

impl Channel {
    pub fn code(self) -> u8 {
        match self {
            Channel::People => 0,
            Channel::Government => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Channel::People),
            1 => Some(Channel::Government),
            _ => None,
        }
    }
}

/// Raw, unchecked policy parameters. Convert with `ChannelPolicy::try_from`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub channel: Channel,
    pub lt_base: Amount,
    pub ct_base: Amount,
    pub c1: Ratio,
    pub c2: Ratio,
    pub unlock_age_days: u64,
    pub penalty_child_limit: u32,
    pub penalty_amount: Amount,
}

/// Effective thresholds after applying the scaling constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub lt: Amount,
    pub ct: Amount,
}

/// Threshold and minting rules for one channel.
///
/// Construction enforces `c1 × lt_base ≥ c2 × ct_base`; a value of this type
/// is always internally consistent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PolicyParams", into = "PolicyParams")]
pub struct ChannelPolicy {
    params: PolicyParams,
    thresholds: Thresholds,
}

impl TryFrom<PolicyParams> for ChannelPolicy {
    type Error = ModelError;

    fn try_from(params: PolicyParams) -> Result<Self, Self::Error> {
        if params.c1.cmp_scaled(params.lt_base, &params.c2, params.ct_base) == Ordering::Less {
            return Err(ModelError::ThresholdOrdering {
                lt: format!("{} x {}", params.c1, params.lt_base.millicoin()),
                ct: format!("{} x {}", params.c2, params.ct_base.millicoin()),
            });
        }
        let lt = params.c1.mul_floor(params.lt_base).ok_or(ModelError::ThresholdOverflow)?;
        let ct = params.c2.mul_floor(params.ct_base).ok_or(ModelError::ThresholdOverflow)?;
        Ok(ChannelPolicy {
            params,
            thresholds: Thresholds { lt, ct },
        })
    }
}

impl From<ChannelPolicy> for PolicyParams {
    fn from(value: ChannelPolicy) -> Self {
        value.params
    }
}

impl ChannelPolicy {
    /// People channel: LT 500 mc, CT 100 mc, c1 = c2 = 1, 6570-day birth lock.
    ///
    /// The penalty rule defaults to 500 mc per parent once a couple has more
    /// than three children.
    pub fn people_default() -> Self {
        PolicyParams {
            channel: Channel::People,
            lt_base: Amount::from_millicoin(500),
            ct_base: Amount::from_millicoin(100),
            c1: Ratio::ONE,
            c2: Ratio::ONE,
            unlock_age_days: DEFAULT_UNLOCK_AGE_DAYS,
            penalty_child_limit: 3,
            penalty_amount: Amount::from_millicoin(500),
        }
        .try_into()
        .expect("default people policy is ordered")
    }

    /// Government channel: LT 1,000,000 WC and CT 200,000 WC (same CT/LT ratio
    /// as the people channel), c1 = c2 = 1.
    pub fn government_default() -> Self {
        PolicyParams {
            channel: Channel::Government,
            lt_base: Amount::from_millicoin(1_000_000_000),
            ct_base: Amount::from_millicoin(200_000_000),
            c1: Ratio::ONE,
            c2: Ratio::ONE,
            unlock_age_days: 0,
            penalty_child_limit: 0,
            penalty_amount: Amount::ZERO,
        }
        .try_into()
        .expect("default government policy is ordered")
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn channel(&self) -> Channel {
        self.params.channel
    }

    pub fn unlock_age_days(&self) -> u64 {
        self.params.unlock_age_days
    }

    pub fn penalty_child_limit(&self) -> u32 {
        self.params.penalty_child_limit
    }

    pub fn penalty_amount(&self) -> Amount {
        self.params.penalty_amount
    }

    /// `(floor(c1 × lt_base), floor(c2 × ct_base))`.
    pub fn effective_thresholds(&self) -> Thresholds {
        self.thresholds
    }
}

/// Balance state of one account.
///
/// `locked` is the portion of `total` frozen until `locked_until`; the lock
/// lifts wholesale on that day.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub id: AccountId,
    pub kind: AccountKind,
    pub country: CountryCode,
    pub total: Amount,
    pub locked: Amount,
    pub locked_until: Day,
    pub born_at: Option<Day>,
    pub parents: Option<(AccountId, AccountId)>,
}

impl Account {
    /// An unlocked account holding `total`.
    pub fn new(id: AccountId, kind: AccountKind, country: CountryCode, total: Amount) -> Self {
        Account {
            id,
            kind,
            country,
            total,
            locked: Amount::ZERO,
            locked_until: 0,
            born_at: None,
            parents: None,
        }
    }

    pub fn is_locked_at(&self, now: Day) -> bool {
        now < self.locked_until && !self.locked.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(lt: u64, ct: u64, c1: Ratio, c2: Ratio) -> PolicyParams {
        PolicyParams {
            channel: Channel::People,
            lt_base: Amount::from_millicoin(lt),
            ct_base: Amount::from_millicoin(ct),
            c1,
            c2,
            unlock_age_days: 0,
            penalty_child_limit: 0,
            penalty_amount: Amount::ZERO,
        }
    }

    #[test]
    fn default_thresholds() {
        let people = ChannelPolicy::people_default().effective_thresholds();
        assert_eq!(people.lt.millicoin(), 500);
        assert_eq!(people.ct.millicoin(), 100);
        let gov = ChannelPolicy::government_default().effective_thresholds();
        assert_eq!(gov.lt, Amount::from_worldcoin(1_000_000).unwrap());
        assert_eq!(gov.ct, Amount::from_worldcoin(200_000).unwrap());
        assert_eq!(ChannelPolicy::people_default().unlock_age_days(), 6570);
    }

    #[test]
    fn effective_threshold_examples() {
        let p = ChannelPolicy::try_from(params(500, 100, Ratio::ONE, Ratio::ONE)).unwrap();
        assert_eq!(p.effective_thresholds(), Thresholds { lt: Amount::from_millicoin(500), ct: Amount::from_millicoin(100) });

        let p = ChannelPolicy::try_from(params(777, 333, Ratio::ZERO, Ratio::ZERO)).unwrap();
        assert_eq!(p.effective_thresholds(), Thresholds { lt: Amount::ZERO, ct: Amount::ZERO });

        let p = ChannelPolicy::try_from(params(500, 100, Ratio::integer(2), Ratio::integer(3))).unwrap();
        assert_eq!(p.effective_thresholds(), Thresholds { lt: Amount::from_millicoin(1000), ct: Amount::from_millicoin(300) });
    }

    #[test]
    fn misordered_policy_rejected() {
        let err = ChannelPolicy::try_from(params(100, 500, Ratio::ONE, Ratio::ONE)).unwrap_err();
        assert!(matches!(err, ModelError::ThresholdOrdering { .. }));
        // ordering is exact: 1/3 × 300 == 100 passes, 1/3 × 299 does not
        let third = Ratio::new(1, 3).unwrap();
        assert!(ChannelPolicy::try_from(params(300, 100, third, Ratio::ONE)).is_ok());
        assert!(ChannelPolicy::try_from(params(299, 100, third, Ratio::ONE)).is_err());
    }

    #[test]
    fn country_codes() {
        assert!(CountryCode::new("US").is_ok());
        assert!(CountryCode::new("ABCDEFGH").is_ok());
        assert!(CountryCode::new("A").is_err());
        assert!(CountryCode::new("ABCDEFGHI").is_err());
        assert!(CountryCode::new("us").is_err());
        assert!(serde_json::from_str::<CountryCode>("\"x\"").is_err());
    }

    proptest! {
        #[test]
        fn constructed_policies_are_ordered(
            lt in 0u64..5_000, ct in 0u64..5_000,
            c1n in 0u64..20, c1d in 1u64..20, c2n in 0u64..20, c2d in 1u64..20,
        ) {
            let c1 = Ratio::new(c1n, c1d).unwrap();
            let c2 = Ratio::new(c2n, c2d).unwrap();
            let ordered = u128::from(c1n) * u128::from(lt) * u128::from(c2d)
                >= u128::from(c2n) * u128::from(ct) * u128::from(c1d);
            match ChannelPolicy::try_from(params(lt, ct, c1, c2)) {
                Ok(p) => {
                    prop_assert!(ordered);
                    let t = p.effective_thresholds();
                    prop_assert!(t.lt >= t.ct);
                }
                Err(_) => prop_assert!(!ordered),
            }
        }
    }
}
