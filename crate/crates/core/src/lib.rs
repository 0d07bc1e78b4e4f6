//! A two-channel, population-minted currency ledger.
//!
//! Governments trade on a single replicated, hash-chained global ledger.
//! Citizens trade on per-country local ledgers whose transactions are sealed
//! into Merkle-committed checkpoints and anchored globally. Both channels
//! enforce a cutoff threshold (no debit may leave a balance below it) and a
//! limit threshold (sellers under it may only sell to buyers not over it).

pub mod amount;
pub mod error;
pub mod forensics;
pub mod gov_ledger;
pub mod hash;
pub mod identity;
pub mod merkle;
pub mod model;
pub mod netsim;
pub mod people_ledger;
pub mod policy;
pub mod scenario;
pub mod store;
pub mod tx;

pub use amount::{worldcoin_to_millicoin, Amount, Ratio};
pub use hash::Hash32;
pub use model::{Account, AccountId, AccountKind, Channel, ChannelPolicy, CountryCode, Day};
pub use tx::{TransferKind, Transaction, TxKind};
