//! Run output directories.
//!
//! ```text
//! out/
//!   report.json            simulation report
//!   run.json               seed, final day and both channel policies
//!   chain.jsonl            global ledger, one block per line
//!   snapshots.jsonl        sequencer balances after every block
//!   countries/<CODE>/
//!     ledger.jsonl         every committed local transaction
//!     accounts.json        materialized accounts with actor names
//!     summaries.jsonl      sealed checkpoint summaries
//!     batches/<seq>.json   archived batch per checkpoint
//! ```
//!
//! Everything except the `informational` key of `report.json` is a pure
//! function of the scenario.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;
use crate::forensics::{Archive, SupplyClaim};
use crate::gov_ledger::{BlockPayload, GovError, WorldState};
use crate::model::{Account, AccountId, ChannelPolicy, CountryCode, Day};
use crate::netsim::{ActorRef, SimReport, Simulation};
use crate::people_ledger::CheckpointSummary;
use crate::policy;
use crate::tx::Transaction;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("chain.jsonl: {0}")]
    Chain(#[from] GovError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInfo {
    pub seed: u64,
    pub final_day: Day,
    pub people_policy: ChannelPolicy,
    pub government_policy: ChannelPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountRecord {
    pub actor: Option<ActorRef>,
    pub account: Account,
    /// Spendable balance on the run's final day.
    pub spendable: Amount,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("serializable"));
        out.push('\n');
    }
    out
}

/// Writes every artifact of a finished run under `out`.
pub fn export_run(out: &Path, report: &SimReport, sim: &Simulation) -> Result<(), StoreError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let countries_dir = out.join("countries");
    if countries_dir.exists() {
        fs::remove_dir_all(&countries_dir).map_err(io_err(&countries_dir))?;
    }
    write_file(&out.join("report.json"), report.to_json().as_bytes())?;
    let info = RunInfo {
        seed: sim.config().seed,
        final_day: sim.day(),
        people_policy: sim.config().people_policy.clone(),
        government_policy: sim.config().government_policy.clone(),
    };
    write_file(&out.join("run.json"), serde_json::to_string(&info).expect("serializable").as_bytes())?;
    write_file(&out.join("chain.jsonl"), sim.sequencer().export_chain().as_bytes())?;
    write_file(&out.join("snapshots.jsonl"), jsonl(sim.claims()).as_bytes())?;

    for (code, node) in sim.nodes() {
        let dir = countries_dir.join(code.as_str());
        let batches = dir.join("batches");
        fs::create_dir_all(&batches).map_err(io_err(&batches))?;
        let ledger = node.ledger();
        write_file(&dir.join("ledger.jsonl"), jsonl(ledger.log()).as_bytes())?;
        write_file(&dir.join("summaries.jsonl"), jsonl(ledger.summaries()).as_bytes())?;
        for s in ledger.summaries() {
            let txs = crate::people_ledger::BatchStore::batch(ledger, code, s.seq_no).expect("sealed batch");
            write_file(&batches.join(format!("{}.json", s.seq_no)), serde_json::to_string(txs).expect("serializable").as_bytes())?;
        }
        let mut names = std::collections::BTreeMap::new();
        for (i, id) in ledger.genesis_accounts() {
            names.insert(id, ActorRef::genesis(code, i));
        }
        for (n, id) in node.newborns() {
            names.insert(*id, ActorRef::named(code, n));
        }
        let records: Vec<AccountRecord> = ledger
            .accounts()
            .map(|a| AccountRecord {
                actor: names.get(&a.id).cloned(),
                account: a.clone(),
                spendable: policy::spendable(a, sim.day()),
            })
            .collect();
        write_file(&dir.join("accounts.json"), serde_json::to_string(&records).expect("serializable").as_bytes())?;
    }
    Ok(())
}

/// A run directory opened for queries.
#[derive(Debug)]
pub struct StateDir {
    root: PathBuf,
    info: RunInfo,
    world: WorldState,
}

fn read(path: &Path) -> Result<String, StoreError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, line: usize, text: &str) -> Result<T, StoreError> {
    serde_json::from_str(text).map_err(|e| StoreError::Parse {
        path: path.to_path_buf(),
        line: if line == 0 { e.line() } else { line },
        message: e.to_string(),
    })
}

fn parse_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, StoreError> {
    let text = read(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse(path, i + 1, l))
        .collect()
}

impl StateDir {
    /// Loads `run.json` and re-validates the whole chain.
    pub fn open(root: &Path) -> Result<Self, StoreError> {
        let info_path = root.join("run.json");
        let info: RunInfo = parse(&info_path, 0, &read(&info_path)?)?;
        let world = WorldState::import_chain(&read(&root.join("chain.jsonl"))?, info.government_policy.clone())?;
        Ok(StateDir {
            root: root.to_path_buf(),
            info,
            world,
        })
    }

    pub fn info(&self) -> &RunInfo {
        &self.info
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn countries(&self) -> impl Iterator<Item = &CountryCode> {
        self.world.members().iter()
    }

    /// Summary as anchored on the global chain.
    pub fn anchored_summary(&self, country: &CountryCode, seq_no: u64) -> Option<&CheckpointSummary> {
        self.world.chain().iter().find_map(|b| match &b.payload {
            BlockPayload::CheckpointAnchor(s) if &s.country == country && s.seq_no == seq_no => Some(s),
            _ => None,
        })
    }

    pub fn batch(&self, country: &CountryCode, seq_no: u64) -> Result<Option<Vec<Transaction>>, StoreError> {
        let path = self.root.join("countries").join(country.as_str()).join("batches").join(format!("{seq_no}.json"));
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(parse(&path, 0, &read(&path)?)?))
    }

    /// Every archived batch of every country.
    pub fn archive(&self) -> Result<Archive, StoreError> {
        let mut archive = Archive::new();
        for country in self.countries() {
            let dir = self.root.join("countries").join(country.as_str()).join("batches");
            let Ok(entries) = fs::read_dir(&dir) else { continue };
            for entry in entries {
                let path = entry.map_err(io_err(&dir))?.path();
                let Some(seq) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<u64>().ok()) else { continue };
                archive.insert(country.clone(), seq, parse(&path, 0, &read(&path)?)?);
            }
        }
        Ok(archive)
    }

    pub fn claims(&self) -> Result<Vec<SupplyClaim>, StoreError> {
        parse_lines(&self.root.join("snapshots.jsonl"))
    }

    pub fn accounts(&self, country: &CountryCode) -> Result<Vec<AccountRecord>, StoreError> {
        let path = self.root.join("countries").join(country.as_str()).join("accounts.json");
        if !path.exists() {
            return Ok(Vec::new());
        }
        parse(&path, 0, &read(&path)?)
    }

    pub fn find_account(&self, id: &AccountId) -> Result<Option<AccountRecord>, StoreError> {
        for c in self.countries() {
            if let Some(r) = self.accounts(c)?.into_iter().find(|r| &r.account.id == id) {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }

    pub fn find_actor(&self, actor: &ActorRef) -> Result<Option<AccountRecord>, StoreError> {
        Ok(self.accounts(&actor.country)?.into_iter().find(|r| r.actor.as_ref() == Some(actor)))
    }
}
