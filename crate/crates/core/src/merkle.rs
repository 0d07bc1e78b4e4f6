//! Binary Merkle tree over transaction leaves.
//!
//! Leaves are SHA-256 of the canonical transaction encoding, internal nodes
//! are `SHA-256(left ‖ right)`, and an unpaired node at the end of a level is
//! carried up unchanged (never duplicated).

use serde::{Deserialize, Serialize};

use crate::hash::{sha256, sha256_pair, Hash32};
use crate::tx::Transaction;

pub fn leaf_hash(tx: &Transaction) -> Hash32 {
    sha256(&tx.canonical_bytes())
}

/// Which side of the running hash a proof sibling sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    pub hash: Hash32,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionProof {
    pub leaf_index: u64,
    pub siblings: Vec<ProofStep>,
}

impl InclusionProof {
    /// Folds `leaf` through the sibling path.
    pub fn fold(&self, leaf: Hash32) -> Hash32 {
        self.siblings.iter().fold(leaf, |acc, step| match step.side {
            Side::Left => sha256_pair(&step.hash, &acc),
            Side::Right => sha256_pair(&acc, &step.hash),
        })
    }
}

fn next_level(level: &[Hash32]) -> Vec<Hash32> {
    level
        .chunks(2)
        .map(|pair| match pair {
            [l, r] => sha256_pair(l, r),
            [single] => *single,
            _ => unreachable!(),
        })
        .collect()
}

/// Root over `leaves`, or `None` for an empty list.
pub fn merkle_root(leaves: &[Hash32]) -> Option<Hash32> {
    if leaves.is_empty() {
        return None;
    }
    let mut level = leaves.to_vec();
    while level.len() > 1 {
        level = next_level(&level);
    }
    Some(level[0])
}

pub fn root_of_transactions(txs: &[Transaction]) -> Option<Hash32> {
    let leaves: Vec<_> = txs.iter().map(leaf_hash).collect();
    merkle_root(&leaves)
}

/// Sibling path for the leaf at `index`.
pub fn prove(leaves: &[Hash32], index: usize) -> Option<InclusionProof> {
    if index >= leaves.len() {
        return None;
    }
    let mut siblings = Vec::new();
    let mut level = leaves.to_vec();
    let mut idx = index;
    while level.len() > 1 {
        if idx % 2 == 1 {
            siblings.push(ProofStep { hash: level[idx - 1], side: Side::Left });
        } else if idx + 1 < level.len() {
            siblings.push(ProofStep { hash: level[idx + 1], side: Side::Right });
        }
        level = next_level(&level);
        idx /= 2;
    }
    Some(InclusionProof {
        leaf_index: index as u64,
        siblings,
    })
}
