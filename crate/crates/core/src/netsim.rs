//! Deterministic multi-node simulation.
//!
//! One node per country holds that country's authoritative local ledger and a
//! replica of the global ledger. A single logical sequencer orders global
//! submissions; each committed block is applied at the originating node
//! immediately and broadcast to every other member with a seeded integer
//! delay in `[0, max_delay_days]`. Replicas buffer out-of-order blocks and
//! ignore duplicates.
//!
//! Time is a day counter. On each day, due messages are delivered first,
//! then countries joining that day, then the day's events in order. After
//! every event, messages due on the current day are delivered again.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;
use crate::forensics::SupplyClaim;
use crate::gov_ledger::{BlockPayload, GlobalBlock, GovError, HoldingsReport, WorldState};
use crate::identity::{self, Keypair};
use crate::model::{AccountId, ChannelPolicy, CountryCode, Day};
use crate::people_ledger::{LedgerError, LocalLedger};
use crate::policy::{self, TransferDecision};
use crate::tx::{TransferKind, Transaction, TxKind};

pub const DEFAULT_CHECKPOINT_INTERVAL: u64 = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountrySpec {
    pub code: CountryCode,
    pub population: u64,
    #[serde(default)]
    pub join_day: Day,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub countries: Vec<CountrySpec>,
    pub max_delay_days: u64,
    pub checkpoint_interval: u64,
    pub people_policy: ChannelPolicy,
    pub government_policy: ChannelPolicy,
}

impl SimConfig {
    pub fn new(seed: u64, countries: Vec<CountrySpec>) -> Self {
        SimConfig {
            seed,
            countries,
            max_delay_days: 0,
            checkpoint_interval: DEFAULT_CHECKPOINT_INTERVAL,
            people_policy: ChannelPolicy::people_default(),
            government_policy: ChannelPolicy::government_default(),
        }
    }

    /// Four countries, populations 1000 / 500 / 2000 / 100, all joining on day 0.
    pub fn four_countries(seed: u64) -> Self {
        let countries = [("AA", 1000), ("BB", 500), ("CC", 2000), ("DD", 100)]
            .into_iter()
            .map(|(c, p)| CountrySpec {
                code: CountryCode::new(c).expect("valid code"),
                population: p,
                join_day: 0,
            })
            .collect();
        SimConfig::new(seed, countries)
    }
}

/// Who an event refers to: genesis citizen `index` or a named newborn.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Person {
    Genesis(u64),
    Named(String),
}

/// `"AA:17"` is genesis citizen 17 of AA; `"AA:maria"` is the newborn
/// registered as `maria` in AA.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ActorRef {
    pub country: CountryCode,
    pub person: Person,
}

impl ActorRef {
    pub fn genesis(country: &CountryCode, index: u64) -> Self {
        ActorRef {
            country: country.clone(),
            person: Person::Genesis(index),
        }
    }

    pub fn named(country: &CountryCode, name: &str) -> Self {
        ActorRef {
            country: country.clone(),
            person: Person::Named(name.to_string()),
        }
    }
}

impl FromStr for ActorRef {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (code, who) = s.split_once(':').ok_or_else(|| format!("actor {s:?} must look like CODE:index or CODE:name"))?;
        let country = CountryCode::new(code).map_err(|e| e.to_string())?;
        if who.is_empty() {
            return Err(format!("actor {s:?} has an empty name"));
        }
        let person = if who.bytes().all(|b| b.is_ascii_digit()) {
            Person::Genesis(who.parse().map_err(|_| format!("actor index in {s:?} out of range"))?)
        } else {
            Person::Named(who.to_string())
        };
        Ok(ActorRef { country, person })
    }
}

impl TryFrom<String> for ActorRef {
    type Error = String;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<ActorRef> for String {
    fn from(value: ActorRef) -> Self {
        value.to_string()
    }
}

impl fmt::Display for ActorRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.person {
            Person::Genesis(i) => write!(f, "{}:{i}", self.country),
            Person::Named(n) => write!(f, "{}:{n}", self.country),
        }
    }
}

impl fmt::Debug for ActorRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Birth {
        country: CountryCode,
        child: String,
        parents: [ActorRef; 2],
        seed: Option<[u8; 32]>,
    },
    LocalTransfer {
        from: ActorRef,
        to: ActorRef,
        amount: Amount,
        kind: TransferKind,
    },
    GovTransfer {
        from: CountryCode,
        to: CountryCode,
        amount: Amount,
    },
    Donation {
        from: CountryCode,
        to: CountryCode,
        amount: Amount,
    },
    Checkpoint {
        country: CountryCode,
    },
    AdvanceDay,
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::Birth { .. } => "birth",
            Event::LocalTransfer { .. } => "local_transfer",
            Event::GovTransfer { .. } => "gov_transfer",
            Event::Donation { .. } => "donation",
            Event::Checkpoint { .. } => "checkpoint",
            Event::AdvanceDay => "advance_day",
        }
    }

    /// True for events that only touch a country's local ledger.
    pub fn is_local(&self) -> bool {
        matches!(self, Event::Birth { .. } | Event::LocalTransfer { .. } | Event::Checkpoint { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedEvent {
    pub day: Day,
    pub event: Event,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnReject {
    #[default]
    Record,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub event_index: usize,
    pub day: Day,
    pub event: String,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {}", .0.iter().map(Issue::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Issue>),
    #[error("event {index} ({event}) on day {day} rejected: {reason}")]
    Rejected { index: usize, day: Day, event: String, reason: String },
    #[error("event {index}: {source}")]
    Ledger { index: usize, source: LedgerError },
    #[error("global ledger: {0}")]
    Gov(#[from] GovError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Informational {
    pub wall_seconds: f64,
    pub local_tx_per_second: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub final_day: Day,
    pub world_supply: Amount,
    pub expected_supply: Amount,
    pub holdings: HoldingsReport,
    pub chain_length: u64,
    pub join_blocks: u64,
    pub gov_transfer_blocks: u64,
    pub anchor_blocks: u64,
    pub message_count: u64,
    pub local_tx_committed: u64,
    pub births: u64,
    pub rejections: Vec<Rejection>,
    pub converged: bool,
    /// Wall-clock figures; the only non-deterministic part of the report.
    pub informational: Informational,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Canonical JSON with the wall-clock key removed.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("informational");
        v.to_string()
    }
}

/// A block in transit to one replica.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub deliver_day: Day,
    pub send_day: Day,
    pub sender: CountryCode,
    pub seq: u64,
    pub to: CountryCode,
    pub block: GlobalBlock,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub to: CountryCode,
    pub height: u64,
}

/// A node's copy of the global ledger.
#[derive(Clone, Debug)]
pub struct Replica {
    state: WorldState,
    buffer: BTreeMap<u64, GlobalBlock>,
}

impl Replica {
    pub fn new(state: WorldState) -> Self {
        Replica {
            state,
            buffer: BTreeMap::new(),
        }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// Applies `block` and any buffered successors. Blocks already applied are
    /// ignored; blocks from the future wait in the buffer.
    pub fn receive(&mut self, block: GlobalBlock) -> Result<(), GovError> {
        let height = self.state.height();
        if block.height < height {
            let have = &self.state.chain()[block.height as usize];
            if have.block_hash != block.block_hash {
                return Err(GovError::BadBlockHash { height: block.height });
            }
            return Ok(());
        }
        self.buffer.entry(block.height).or_insert(block);
        while let Some(next) = self.buffer.remove(&self.state.height()) {
            self.state.apply_block(next)?;
        }
        Ok(())
    }

    pub fn export(&self) -> String {
        self.state.export_chain()
    }
}

/// Message layer: replicas plus blocks in flight.
#[derive(Debug)]
pub struct Network {
    replicas: BTreeMap<CountryCode, Replica>,
    in_flight: Vec<Envelope>,
    rng: ChaCha8Rng,
    max_delay_days: u64,
    next_seq: u64,
    sent: u64,
}

impl Network {
    pub fn new(seed: u64, max_delay_days: u64) -> Self {
        Network {
            replicas: BTreeMap::new(),
            in_flight: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_delay_days,
            next_seq: 0,
            sent: 0,
        }
    }

    pub fn add_node(&mut self, country: CountryCode, bootstrap: WorldState) {
        self.replicas.insert(country, Replica::new(bootstrap));
    }

    pub fn replica(&self, country: &CountryCode) -> Option<&Replica> {
        self.replicas.get(country)
    }

    pub fn replicas(&self) -> impl Iterator<Item = (&CountryCode, &Replica)> {
        self.replicas.iter()
    }

    pub fn in_flight(&self) -> &[Envelope] {
        &self.in_flight
    }

    pub fn messages_sent(&self) -> u64 {
        self.sent
    }

    /// Applies a block at its originating node without a message.
    pub fn originate(&mut self, origin: &CountryCode, block: &GlobalBlock) -> Result<(), GovError> {
        match self.replicas.get_mut(origin) {
            Some(r) => r.receive(block.clone()),
            None => Ok(()),
        }
    }

    /// Sends `block` to every node except `sender`, each with a seeded delay.
    pub fn broadcast(&mut self, sender: &CountryCode, block: &GlobalBlock, now: Day) {
        let peers: Vec<CountryCode> = self.replicas.keys().filter(|c| *c != sender).cloned().collect();
        for to in peers {
            let delay = self.rng.gen_range(0..=self.max_delay_days);
            self.send(sender, &to, block, now, delay);
        }
    }

    pub fn send(&mut self, sender: &CountryCode, to: &CountryCode, block: &GlobalBlock, now: Day, delay: u64) {
        self.in_flight.push(Envelope {
            deliver_day: now.saturating_add(delay),
            send_day: now,
            sender: sender.clone(),
            seq: self.next_seq,
            to: to.clone(),
            block: block.clone(),
        });
        self.next_seq += 1;
        self.sent += 1;
    }

    pub fn next_delivery_day(&self) -> Option<Day> {
        self.in_flight.iter().map(|e| e.deliver_day).min()
    }

    /// Delivers every message due by `now`, ordered by (send day, sender, sequence).
    pub fn deliver_step(&mut self, now: Day) -> Result<Vec<Delivery>, GovError> {
        if self.in_flight.iter().all(|e| e.deliver_day > now) {
            return Ok(Vec::new());
        }
        let (mut due, later): (Vec<_>, Vec<_>) = self.in_flight.drain(..).partition(|e| e.deliver_day <= now);
        self.in_flight = later;
        due.sort_by(|a, b| (a.send_day, &a.sender, a.seq).cmp(&(b.send_day, &b.sender, b.seq)));
        let mut delivered = Vec::with_capacity(due.len());
        for env in due {
            if let Some(r) = self.replicas.get_mut(&env.to) {
                let height = env.block.height;
                r.receive(env.block)?;
                delivered.push(Delivery { to: env.to, height });
            }
        }
        Ok(delivered)
    }

    /// No messages in flight and every replica serializes identically.
    pub fn converged(&self) -> bool {
        if !self.in_flight.is_empty() {
            return false;
        }
        let mut exports = self.replicas.values().map(|r| (r.state.height(), r.state.tip_hash(), r.buffer.is_empty()));
        let Some(first) = exports.next() else { return true };
        if !first.2 || !exports.all(|e| e == first) {
            return false;
        }
        let mut texts = self.replicas.values().map(Replica::export);
        let first = texts.next().expect("non-empty");
        texts.all(|t| t == first)
    }
}

/// One country's node.
#[derive(Debug)]
pub struct Node {
    ledger: LocalLedger,
    newborns: BTreeMap<String, AccountId>,
    keys: HashMap<AccountId, Keypair>,
}

impl Node {
    fn new(ledger: LocalLedger) -> Self {
        Node {
            ledger,
            newborns: BTreeMap::new(),
            keys: HashMap::new(),
        }
    }

    pub fn ledger(&self) -> &LocalLedger {
        &self.ledger
    }

    /// Newborns by scenario name.
    pub fn newborns(&self) -> &BTreeMap<String, AccountId> {
        &self.newborns
    }

    fn resolve(&mut self, person: &Person) -> Result<AccountId, LedgerError> {
        match person {
            Person::Genesis(i) => {
                let id = self.ledger.open_genesis_account(*i)?;
                if !self.keys.contains_key(&id) {
                    let seed = identity::genesis_person_seed(self.ledger.country(), *i);
                    self.keys.insert(id, Keypair::from_seed(&seed));
                }
                Ok(id)
            }
            Person::Named(name) => self
                .newborns
                .get(name)
                .copied()
                .ok_or_else(|| LedgerError::InvalidParents(format!("unknown person {name:?}"))),
        }
    }
}

/// A problem found by [`validate`], tied to an event when it concerns one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub event: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.event {
            Some(i) => write!(f, "event {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks a scenario before anything runs.
pub fn validate(config: &SimConfig, events: &[TimedEvent]) -> Vec<Issue> {
    let mut errs = Vec::new();
    let mut declared: BTreeMap<&CountryCode, &CountrySpec> = BTreeMap::new();
    let config_issue = |message: String| Issue { event: None, message };
    for c in &config.countries {
        if declared.insert(&c.code, c).is_some() {
            errs.push(config_issue(format!("country {} declared twice", c.code)));
        }
    }
    if config.checkpoint_interval == 0 {
        errs.push(config_issue("checkpoint_interval must be at least 1".into()));
    }
    let mut born: BTreeSet<(CountryCode, String)> = BTreeSet::new();
    let mut last_day = 0;
    for (i, te) in events.iter().enumerate() {
        let mut err = |message: String| errs.push(Issue { event: Some(i), message });
        if te.day < last_day {
            err(format!("day {} is before the previous event's day {last_day}; events must be sorted by day", te.day));
        }
        last_day = last_day.max(te.day);
        let check_country = |c: &CountryCode, err: &mut dyn FnMut(String)| match declared.get(c) {
            None => err(format!("country {c} is not declared")),
            Some(spec) if spec.join_day > te.day => err(format!("country {c} joins on day {}, after day {}", spec.join_day, te.day)),
            Some(_) => {}
        };
        let check_actor = |a: &ActorRef, err: &mut dyn FnMut(String)| {
            check_country(&a.country, err);
            match (&a.person, declared.get(&a.country)) {
                (Person::Genesis(idx), Some(spec)) if *idx >= spec.population => {
                    err(format!("actor {a} exceeds population {}", spec.population))
                }
                (Person::Named(n), _) if !born.contains(&(a.country.clone(), n.clone())) => {
                    err(format!("actor {a} is not born before this event"))
                }
                _ => {}
            }
        };
        match &te.event {
            Event::Birth { country, child, parents, .. } => {
                check_country(country, &mut err);
                for p in parents {
                    check_actor(p, &mut err);
                    if &p.country != country {
                        err(format!("parent {p} does not live in {country}"));
                    }
                }
                if parents[0] == parents[1] {
                    err("parents must be distinct".into());
                }
                if child.is_empty() || child.bytes().all(|b| b.is_ascii_digit()) {
                    err(format!("child name {child:?} must contain a non-digit character"));
                } else if !born.insert((country.clone(), child.clone())) {
                    err(format!("child {country}:{child} already born"));
                }
            }
            Event::LocalTransfer { from, to, amount, .. } => {
                check_actor(from, &mut err);
                check_actor(to, &mut err);
                if amount.is_zero() {
                    err("amount must be positive".into());
                }
            }
            Event::GovTransfer { from, to, amount } | Event::Donation { from, to, amount } => {
                check_country(from, &mut err);
                check_country(to, &mut err);
                if from == to {
                    err("a government cannot transfer to itself".into());
                }
                if amount.is_zero() {
                    err("amount must be positive".into());
                }
            }
            Event::Checkpoint { country } => check_country(country, &mut err),
            Event::AdvanceDay => {}
        }
    }
    errs
}

/// Whole simulated world: sequencer, nodes and network.
#[derive(Debug)]
pub struct Simulation {
    config: SimConfig,
    sequencer: WorldState,
    nodes: BTreeMap<CountryCode, Node>,
    network: Network,
    day: Day,
    rejections: Vec<Rejection>,
    claims: Vec<SupplyClaim>,
    local_committed: u64,
    births: u64,
}

enum Step {
    Join(usize),
    Event(usize),
}

impl Simulation {
    pub fn new(config: SimConfig) -> Self {
        let sequencer = WorldState::new(config.government_policy.clone());
        let network = Network::new(config.seed, config.max_delay_days);
        Simulation {
            config,
            sequencer,
            nodes: BTreeMap::new(),
            network,
            day: 0,
            rejections: Vec::new(),
            claims: Vec::new(),
            local_committed: 0,
            births: 0,
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn sequencer(&self) -> &WorldState {
        &self.sequencer
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.network
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&CountryCode, &Node)> {
        self.nodes.iter()
    }

    pub fn ledger(&self, country: &CountryCode) -> Option<&LocalLedger> {
        self.nodes.get(country).map(Node::ledger)
    }

    /// Balance claims recorded by the sequencer after every block.
    pub fn claims(&self) -> &[SupplyClaim] {
        &self.claims
    }

    pub fn rejections(&self) -> &[Rejection] {
        &self.rejections
    }

    pub fn day(&self) -> Day {
        self.day
    }

    pub fn converged(&self) -> bool {
        self.network.converged()
    }

    /// Account id an actor reference resolves to, if it exists yet.
    pub fn account_of(&self, actor: &ActorRef) -> Option<AccountId> {
        let node = self.nodes.get(&actor.country)?;
        match &actor.person {
            Person::Genesis(i) => node.ledger.genesis_account_id(*i),
            Person::Named(n) => node.newborns.get(n).copied(),
        }
    }

    /// Runs every event, then delivers messages until quiescence.
    pub fn run(&mut self, events: &[TimedEvent], on_reject: OnReject) -> Result<SimReport, SimError> {
        let issues = validate(&self.config, events);
        if !issues.is_empty() {
            return Err(SimError::Invalid(issues));
        }
        let started = Instant::now();

        let mut steps: Vec<(Day, u8, usize, Step)> = Vec::with_capacity(events.len() + self.config.countries.len());
        for (i, c) in self.config.countries.iter().enumerate() {
            steps.push((c.join_day, 0, i, Step::Join(i)));
        }
        for (i, e) in events.iter().enumerate() {
            steps.push((e.day, 1, i, Step::Event(i)));
        }
        steps.sort_by_key(|(d, k, i, _)| (*d, *k, *i));

        for (day, _, _, step) in steps {
            self.advance_to(day)?;
            match step {
                Step::Join(i) => {
                    let spec = self.config.countries[i].clone();
                    self.join(&spec)?;
                }
                Step::Event(i) => self.apply_event(i, &events[i], on_reject)?,
            }
            self.network.deliver_step(self.day)?;
        }
        while let Some(next) = self.network.next_delivery_day() {
            self.advance_to(next)?;
        }

        let wall = started.elapsed().as_secs_f64();
        Ok(self.report(wall))
    }

    fn advance_to(&mut self, day: Day) -> Result<(), SimError> {
        while let Some(next) = self.network.next_delivery_day() {
            if next > day {
                break;
            }
            self.day = self.day.max(next);
            self.network.deliver_step(self.day)?;
        }
        self.day = self.day.max(day);
        self.network.deliver_step(self.day)?;
        Ok(())
    }

    fn commit(&mut self, origin: &CountryCode) -> Result<(), SimError> {
        let block = self.sequencer.chain().last().expect("block committed").clone();
        self.claims.push(SupplyClaim::of(&self.sequencer));
        self.network.originate(origin, &block)?;
        self.network.broadcast(origin, &block, self.day);
        Ok(())
    }

    fn join(&mut self, spec: &CountrySpec) -> Result<(), SimError> {
        let before = self.sequencer.clone();
        self.sequencer.join_country(spec.code.clone(), spec.population, self.day)?;
        let ledger = LocalLedger::new(spec.code.clone(), spec.population, self.day).map_err(|source| SimError::Ledger { index: 0, source })?;
        self.nodes.insert(spec.code.clone(), Node::new(ledger));
        // state transfer: the newcomer starts from the sequencer's chain
        self.network.add_node(spec.code.clone(), before);
        self.commit(&spec.code)
    }

    fn reject(&mut self, index: usize, te: &TimedEvent, reason: String, on_reject: OnReject) -> Result<(), SimError> {
        match on_reject {
            OnReject::Record => {
                self.rejections.push(Rejection {
                    event_index: index,
                    day: te.day,
                    event: te.event.name().to_string(),
                    reason,
                });
                Ok(())
            }
            OnReject::Fail => Err(SimError::Rejected {
                index,
                day: te.day,
                event: te.event.name().to_string(),
                reason,
            }),
        }
    }

    fn apply_event(&mut self, index: usize, te: &TimedEvent, on_reject: OnReject) -> Result<(), SimError> {
        let now = self.day;
        match &te.event {
            Event::AdvanceDay => Ok(()),
            Event::Birth { country, child, parents, seed } => {
                let node = self.nodes.get_mut(country).expect("validated country");
                let resolved: Result<Vec<AccountId>, LedgerError> = parents.iter().map(|p| node.resolve(&p.person)).collect();
                let seed = seed.unwrap_or_else(|| identity::named_person_seed(country, child));
                let key = Keypair::from_seed(&seed);
                let outcome = resolved.and_then(|ps| node.ledger.register_birth(key.public(), (ps[0], ps[1]), &self.config.people_policy, now));
                match outcome {
                    Ok(rec) => {
                        node.newborns.insert(child.clone(), rec.newborn);
                        node.keys.insert(rec.newborn, key);
                        self.births += 1;
                        self.maybe_checkpoint(country)
                    }
                    Err(e) => self.reject(index, te, describe(&e), on_reject),
                }
            }
            Event::LocalTransfer { from, to, amount, kind } => {
                let sender = self.resolve(from).map_err(|source| SimError::Ledger { index, source })?;
                let receiver = self.resolve(to).map_err(|source| SimError::Ledger { index, source })?;
                if from.country != to.country {
                    let s = self.nodes[&from.country].ledger.account(&sender).expect("resolved").clone();
                    let r = self.nodes[&to.country].ledger.account(&receiver).expect("resolved").clone();
                    let decision = policy::validate_transfer(&s, &r, *amount, *kind, &self.config.people_policy, now);
                    let reason = match decision {
                        TransferDecision::Reject(r) => format!("{r:?}"),
                        TransferDecision::Allow => unreachable!("people-channel transfers never cross countries"),
                    };
                    return self.reject(index, te, reason, on_reject);
                }
                let node = self.nodes.get_mut(&from.country).expect("validated country");
                let nonce = node.ledger.next_nonce(&sender);
                let mut tx = Transaction::new(crate::model::Channel::People, TxKind::from(*kind), sender, receiver, *amount, now, nonce);
                tx.signature = Some(identity::sign_tx(&tx, &node.keys[&sender]));
                match node.ledger.submit_local_tx(tx, &self.config.people_policy, now) {
                    Ok(_) => {
                        self.local_committed += 1;
                        self.maybe_checkpoint(&from.country)
                    }
                    Err(e) => self.reject(index, te, describe(&e), on_reject),
                }
            }
            Event::GovTransfer { from, to, amount } | Event::Donation { from, to, amount } => {
                let kind = if matches!(te.event, Event::Donation { .. }) { TransferKind::Donation } else { TransferKind::Sale };
                match self.sequencer.submit_gov_transfer(from, to, *amount, kind, now) {
                    Ok(_) => self.commit(from),
                    Err(GovError::Rejected(r)) => self.reject(index, te, format!("{r:?}"), on_reject),
                    Err(e) => self.reject(index, te, e.to_string(), on_reject),
                }
            }
            Event::Checkpoint { country } => match self.seal_and_anchor(country) {
                Err(SimError::Ledger { source: LedgerError::EmptyBatch, .. }) => {
                    self.reject(index, te, describe(&LedgerError::EmptyBatch), on_reject)
                }
                other => other,
            },
        }
    }

    fn resolve(&mut self, actor: &ActorRef) -> Result<AccountId, LedgerError> {
        self.nodes.get_mut(&actor.country).expect("validated country").resolve(&actor.person)
    }

    fn maybe_checkpoint(&mut self, country: &CountryCode) -> Result<(), SimError> {
        let pending = self.nodes[country].ledger.pending().len() as u64;
        if pending >= self.config.checkpoint_interval {
            self.seal_and_anchor(country)?;
        }
        Ok(())
    }

    fn seal_and_anchor(&mut self, country: &CountryCode) -> Result<(), SimError> {
        let node = self.nodes.get_mut(country).expect("validated country");
        let summary = node
            .ledger
            .seal_checkpoint(self.day)
            .map_err(|source| SimError::Ledger { index: 0, source })?;
        self.sequencer.anchor_checkpoint(summary)?;
        self.commit(country)
    }

    fn report(&self, wall_seconds: f64) -> SimReport {
        let chain = self.sequencer.chain();
        let count = |f: fn(&BlockPayload) -> bool| chain.iter().filter(|b| f(&b.payload)).count() as u64;
        SimReport {
            seed: self.config.seed,
            final_day: self.day,
            world_supply: self.sequencer.world_supply(),
            expected_supply: self.sequencer.expected_supply().unwrap_or(Amount::MAX),
            holdings: self.sequencer.holdings_report(),
            chain_length: self.sequencer.height(),
            join_blocks: count(|p| matches!(p, BlockPayload::Join { .. })),
            gov_transfer_blocks: count(|p| matches!(p, BlockPayload::GovTransfer(_))),
            anchor_blocks: count(|p| matches!(p, BlockPayload::CheckpointAnchor(_))),
            message_count: self.network.messages_sent(),
            local_tx_committed: self.local_committed,
            births: self.births,
            rejections: self.rejections.clone(),
            converged: self.network.converged(),
            informational: Informational {
                wall_seconds,
                local_tx_per_second: if wall_seconds > 0.0 { self.local_committed as f64 / wall_seconds } else { 0.0 },
            },
        }
    }
}

fn describe(e: &LedgerError) -> String {
    match e.reject_reason() {
        Some(r) => format!("{r:?}"),
        None => e.to_string(),
    }
}

/// Runs a scenario to quiescence and returns the finished simulation.
pub fn run_scenario(config: SimConfig, events: &[TimedEvent], on_reject: OnReject) -> Result<(SimReport, Simulation), SimError> {
    let mut sim = Simulation::new(config);
    let report = sim.run(events, on_reject)?;
    Ok((report, sim))
}
