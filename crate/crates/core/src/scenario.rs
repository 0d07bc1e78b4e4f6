//! Scenario files: JSON configuration plus an ordered event script.
//!
//! ```json
//! {
//!   "version": 1,
//!   "config": {
//!     "seed": 42, "max_delay_days": 2, "checkpoint_interval": 1000,
//!     "countries": [{"code": "AA", "population": 1000, "join_day": 0}],
//!     "policies": {"people": {"lt_base": "0.5"}}
//!   },
//!   "on_reject": "record",
//!   "events": [
//!     {"day": 1, "type": "local_transfer", "from": "AA:1", "to": "AA:2", "amount": 250}
//!   ]
//! }
//! ```
//!
//! Amounts are integer millicoin or decimal Worldcoin strings with at most
//! three decimals. Every problem found is reported with a line and column.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use serde_json::value::RawValue;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::amount::{parse_worldcoin, Amount, Ratio};
use crate::identity::read_seed_file;
use crate::model::{ChannelPolicy, CountryCode, Day, PolicyParams};
use crate::netsim::{self, ActorRef, CountrySpec, Event, OnReject, SimConfig, TimedEvent, DEFAULT_CHECKPOINT_INTERVAL};
use crate::tx::TransferKind;

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub config: SimConfig,
    pub on_reject: OnReject,
    pub events: Vec<TimedEvent>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaIssue {
    pub position: Option<Position>,
    pub event: Option<usize>,
    pub message: String,
}

impl fmt::Display for SchemaIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.position {
            write!(f, "line {}, column {}: ", p.line, p.column)?;
        }
        if let Some(i) = self.event {
            write!(f, "event {i}: ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{} schema error(s): {}", .0.len(), .0.iter().map(SchemaIssue::to_string).collect::<Vec<_>>().join("; "))]
    Schema(Vec<SchemaIssue>),
}

impl ScenarioError {
    pub fn issues(&self) -> &[SchemaIssue] {
        match self {
            ScenarioError::Schema(v) => v,
            ScenarioError::Io { .. } => &[],
        }
    }
}

/// Millicoin amount given as an integer or a decimal Worldcoin string.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct AmountInput(Amount);

impl<'de> Deserialize<'de> for AmountInput {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = AmountInput;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("integer millicoin or a decimal Worldcoin string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<AmountInput, E> {
                Ok(AmountInput(Amount::from_millicoin(v)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<AmountInput, E> {
                Err(E::custom(format!("amount {v} is negative")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<AmountInput, E> {
                parse_worldcoin(v).map(AmountInput).map_err(|e| E::custom(format!("amount {v:?}: {e}")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document<'a> {
    version: u32,
    #[serde(borrow)]
    config: &'a RawValue,
    #[serde(default)]
    on_reject: OnReject,
    #[serde(default)]
    key_file: Option<String>,
    #[serde(borrow, default)]
    events: Vec<&'a RawValue>,
}

fn default_interval() -> u64 {
    DEFAULT_CHECKPOINT_INTERVAL
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    max_delay_days: u64,
    #[serde(default = "default_interval")]
    checkpoint_interval: u64,
    countries: Vec<CountrySpec>,
    #[serde(default)]
    policies: PoliciesDoc,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoliciesDoc {
    people: Option<PolicyOverride>,
    government: Option<PolicyOverride>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyOverride {
    lt_base: Option<AmountInput>,
    ct_base: Option<AmountInput>,
    c1: Option<Ratio>,
    c2: Option<Ratio>,
    unlock_age_days: Option<u64>,
    penalty_child_limit: Option<u32>,
    penalty_amount: Option<AmountInput>,
}

impl PolicyOverride {
    fn apply(self, base: ChannelPolicy) -> Result<ChannelPolicy, String> {
        let mut p: PolicyParams = base.params().clone();
        if let Some(v) = self.lt_base {
            p.lt_base = v.0;
        }
        if let Some(v) = self.ct_base {
            p.ct_base = v.0;
        }
        if let Some(v) = self.c1 {
            p.c1 = v;
        }
        if let Some(v) = self.c2 {
            p.c2 = v;
        }
        if let Some(v) = self.unlock_age_days {
            p.unlock_age_days = v;
        }
        if let Some(v) = self.penalty_child_limit {
            p.penalty_child_limit = v;
        }
        if let Some(v) = self.penalty_amount {
            p.penalty_amount = v.0;
        }
        ChannelPolicy::try_from(p).map_err(|e| e.to_string())
    }
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum EventDoc {
    Birth {
        country: CountryCode,
        child: String,
        parents: [ActorRef; 2],
        /// Line index into the scenario's key file.
        #[serde(default)]
        key: Option<usize>,
    },
    LocalTransfer {
        from: ActorRef,
        to: ActorRef,
        amount: AmountInput,
        #[serde(default = "sale")]
        kind: TransferKind,
    },
    GovTransfer {
        from: CountryCode,
        to: CountryCode,
        amount: AmountInput,
    },
    Donation {
        from: CountryCode,
        to: CountryCode,
        amount: AmountInput,
    },
    Checkpoint {
        country: CountryCode,
    },
    AdvanceDay {},
}

fn sale() -> TransferKind {
    TransferKind::Sale
}

fn position_of(text: &str, offset: usize) -> Position {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Position { line, column }
}

/// Byte offset of a borrowed raw value inside `text`.
fn offset_in(text: &str, raw: &RawValue) -> usize {
    raw.get().as_ptr() as usize - text.as_ptr() as usize
}

/// Position of a serde_json error raised while parsing `raw`.
fn nested_position(text: &str, raw: &RawValue, err: &serde_json::Error) -> Position {
    let base = position_of(text, offset_in(text, raw));
    if err.line() == 0 {
        return base;
    }
    if err.line() == 1 {
        Position { line: base.line, column: base.column + err.column().saturating_sub(1) }
    } else {
        Position { line: base.line + err.line() - 1, column: err.column() }
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    parse_scenario_str(&text, path.parent())
}

/// Parses scenario text. `base_dir` resolves a relative `key_file`.
pub fn parse_scenario_str(text: &str, base_dir: Option<&Path>) -> Result<Scenario, ScenarioError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| {
        ScenarioError::Schema(vec![SchemaIssue {
            position: Some(Position { line: e.line(), column: e.column() }),
            event: None,
            message: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
        }])
    })?;
    let mut issues = Vec::new();
    let top = |message: String| SchemaIssue { position: Some(Position { line: 1, column: 1 }), event: None, message };
    if doc.version != SCENARIO_VERSION {
        issues.push(top(format!("unsupported version {}, expected {SCENARIO_VERSION}", doc.version)));
    }

    let config_pos = position_of(text, offset_in(text, doc.config));
    let config = match serde_json::from_str::<ConfigDoc>(doc.config.get()) {
        Err(e) => {
            issues.push(SchemaIssue {
                position: Some(nested_position(text, doc.config, &e)),
                event: None,
                message: format!("config: {}", strip_location(&e)),
            });
            None
        }
        Ok(c) => {
            let mut config = SimConfig::new(c.seed, c.countries);
            config.max_delay_days = c.max_delay_days;
            config.checkpoint_interval = c.checkpoint_interval;
            for (name, over, slot) in [
                ("people", c.policies.people, &mut config.people_policy),
                ("government", c.policies.government, &mut config.government_policy),
            ] {
                if let Some(over) = over {
                    match over.apply(slot.clone()) {
                        Ok(p) => *slot = p,
                        Err(m) => issues.push(SchemaIssue { position: Some(config_pos), event: None, message: format!("{name} policy: {m}") }),
                    }
                }
            }
            Some(config)
        }
    };

    let keys = match &doc.key_file {
        None => None,
        Some(f) => {
            let path = base_dir.map_or_else(|| PathBuf::from(f), |d| d.join(f));
            match read_seed_file(&path) {
                Ok(k) => Some(k),
                Err(e) => {
                    issues.push(top(format!("key_file {}: {e}", path.display())));
                    Some(Vec::new())
                }
            }
        }
    };

    let mut events = Vec::with_capacity(doc.events.len());
    let mut event_pos = Vec::with_capacity(doc.events.len());
    for (i, raw) in doc.events.iter().enumerate() {
        let pos = position_of(text, offset_in(text, raw));
        event_pos.push(pos);
        let issue = |message: String| SchemaIssue { position: Some(pos), event: Some(i), message };
        match parse_event(raw.get(), keys.as_deref()) {
            Ok(e) => events.push(e),
            Err(m) => issues.push(issue(m)),
        }
    }

    if let Some(config) = config {
        if issues.is_empty() {
            for found in netsim::validate(&config, &events) {
                let position = Some(found.event.map_or(config_pos, |i| event_pos[i]));
                issues.push(SchemaIssue { position, event: found.event, message: found.message });
            }
        }
        if issues.is_empty() {
            return Ok(Scenario { config, on_reject: doc.on_reject, events });
        }
    }
    Err(ScenarioError::Schema(issues))
}

fn strip_location(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

fn parse_event(raw: &str, keys: Option<&[[u8; 32]]>) -> Result<TimedEvent, String> {
    let mut map: Map<String, Value> = serde_json::from_str(raw).map_err(|e| strip_location(&e))?;
    let day: Day = match map.remove("day") {
        None => return Err("missing field `day`".into()),
        Some(v) => v.as_u64().ok_or_else(|| format!("day must be a non-negative integer, got {v}"))?,
    };
    let doc: EventDoc = serde_json::from_value(Value::Object(map)).map_err(|e| e.to_string())?;
    let event = match doc {
        EventDoc::Birth { country, child, parents, key } => {
            let seed = match (key, keys) {
                (None, _) => None,
                (Some(_), None) => return Err("birth names a key but the scenario has no key_file".into()),
                (Some(k), Some(ks)) => Some(*ks.get(k).ok_or_else(|| format!("key {k} not in key file ({} keys)", ks.len()))?),
            };
            Event::Birth { country, child, parents, seed }
        }
        EventDoc::LocalTransfer { from, to, amount, kind } => Event::LocalTransfer { from, to, amount: amount.0, kind },
        EventDoc::GovTransfer { from, to, amount } => Event::GovTransfer { from, to, amount: amount.0 },
        EventDoc::Donation { from, to, amount } => Event::Donation { from, to, amount: amount.0 },
        EventDoc::Checkpoint { country } => Event::Checkpoint { country },
        EventDoc::AdvanceDay {} => Event::AdvanceDay,
    };
    Ok(TimedEvent { day, event })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        parse_scenario_str(text, None)
    }

    const BASE: &str = r#"{
  "version": 1,
  "config": {
    "seed": 7,
    "countries": [
      {"code": "AA", "population": 1000},
      {"code": "BB", "population": 500, "join_day": 3}
    ]
  },
  "events": [EVENTS]
}"#;

    fn with_events(events: &str) -> String {
        BASE.replace("EVENTS", events)
    }

    #[test]
    fn minimal() {
        let s = parse(&with_events("")).unwrap();
        assert_eq!(s.config.seed, 7);
        assert_eq!(s.config.countries.len(), 2);
        assert_eq!(s.config.countries[1].join_day, 3);
        assert_eq!(s.config.checkpoint_interval, 1000);
        assert_eq!(s.on_reject, OnReject::Record);
        assert!(s.events.is_empty());
    }

    #[test]
    fn events_and_amount_forms() {
        let s = parse(&with_events(
            r#"
    {"day": 1, "type": "local_transfer", "from": "AA:1", "to": "AA:2", "amount": 250},
    {"day": 1, "type": "local_transfer", "from": "AA:1", "to": "AA:2", "amount": "0.5", "kind": "donation"},
    {"day": 2, "type": "birth", "country": "AA", "child": "kim", "parents": ["AA:1", "AA:2"]},
    {"day": 3, "type": "gov_transfer", "from": "AA", "to": "BB", "amount": "1.25"},
    {"day": 3, "type": "donation", "from": "BB", "to": "AA", "amount": 1},
    {"day": 4, "type": "checkpoint", "country": "AA"},
    {"day": 5, "type": "advance_day"}"#,
        ))
        .unwrap();
        assert_eq!(s.events.len(), 7);
        match &s.events[1].event {
            Event::LocalTransfer { amount, kind, .. } => {
                assert_eq!(amount.millicoin(), 500);
                assert_eq!(*kind, TransferKind::Donation);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&s.events[3].event, Event::GovTransfer { amount, .. } if amount.millicoin() == 1250));
        assert_eq!(s.events[6], TimedEvent { day: 5, event: Event::AdvanceDay });
    }

    #[test]
    fn policy_overrides() {
        let text = BASE.replace(
            "\"countries\"",
            r#""policies": {"people": {"lt_base": "0.6", "c2": "1/2"}, "government": {"ct_base": 0}}, "countries""#,
        );
        let s = parse(&text.replace("EVENTS", "")).unwrap();
        let t = s.config.people_policy.effective_thresholds();
        assert_eq!((t.lt.millicoin(), t.ct.millicoin()), (600, 50));
        assert_eq!(s.config.government_policy.effective_thresholds().ct, Amount::ZERO);

        let bad = BASE.replace("\"countries\"", r#""policies": {"people": {"ct_base": 900}}, "countries""#);
        let err = parse(&bad.replace("EVENTS", "")).unwrap_err();
        assert!(err.to_string().contains("people policy"), "{err}");
    }

    #[test]
    fn undeclared_country_is_named() {
        let err = parse(&with_events(r#"{"day": 1, "type": "checkpoint", "country": "ZZ"}"#)).unwrap_err();
        let issues = err.issues();
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.contains("ZZ"));
        assert_eq!(issues[0].event, Some(0));
        assert_eq!(issues[0].position.unwrap().line, 10);
    }

    #[test]
    fn unsorted_events() {
        let err = parse(&with_events(
            r#"{"day": 2, "type": "advance_day"},
    {"day": 1, "type": "advance_day"}"#,
        ))
        .unwrap_err();
        let issues = err.issues();
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.contains("sorted"));
        assert_eq!(issues[0].position, Some(Position { line: 11, column: 5 }));
    }

    #[test]
    fn errors_are_aggregated() {
        let err = parse(&with_events(
            r#"{"day": 1, "type": "teleport"},
    {"day": 1, "type": "local_transfer", "from": "AA:1", "to": "AA:2", "amount": "0.0001"},
    {"type": "advance_day"},
    {"day": 1, "type": "checkpoint", "country": "AA", "extra": true}"#,
        ))
        .unwrap_err();
        let issues = err.issues();
        assert_eq!(issues.iter().map(|i| i.event).collect::<Vec<_>>(), vec![Some(0), Some(1), Some(2), Some(3)]);
        assert!(issues[0].message.contains("teleport"));
        assert!(issues[1].message.contains("0.0001"));
        assert!(issues[2].message.contains("day"));
        assert!(issues[3].message.contains("extra"));
        assert_eq!(issues[3].position.unwrap().line, 13);
    }

    #[test]
    fn syntax_and_config_errors_have_positions() {
        let err = parse("{\n  \"version\": 1,\n  \"config\": {\"countries\": [}\n}").unwrap_err();
        assert_eq!(err.issues()[0].position.unwrap().line, 3);
        let err = parse("{\n  \"version\": 1,\n  \"config\": {\n    \"countries\": [],\n    \"sed\": 1\n  }\n}").unwrap_err();
        let issue = &err.issues()[0];
        assert!(issue.message.contains("sed"));
        assert_eq!(issue.position.unwrap().line, 5);
        let err = parse(r#"{"version": 2, "config": {"countries": []}}"#).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn country_not_yet_joined() {
        let err = parse(&with_events(r#"{"day": 1, "type": "gov_transfer", "from": "AA", "to": "BB", "amount": 5}"#)).unwrap_err();
        assert!(err.issues()[0].message.contains("joins on day 3"));
    }

    #[test]
    fn key_file_seeds_births() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("keys.txt"), format!("# actors\n{}\n", "07".repeat(32))).unwrap();
        let text = with_events(r#"{"day": 1, "type": "birth", "country": "AA", "child": "kim", "parents": ["AA:1", "AA:2"], "key": 0}"#)
            .replacen("\"version\": 1,", "\"version\": 1, \"key_file\": \"keys.txt\",", 1);
        let path = dir.path().join("s.json");
        std::fs::write(&path, &text).unwrap();
        let s = parse_scenario(&path).unwrap();
        assert!(matches!(&s.events[0].event, Event::Birth { seed: Some(k), .. } if *k == [7u8; 32]));

        let bad = text.replace("\"key\": 0", "\"key\": 3");
        std::fs::write(&path, bad).unwrap();
        assert!(parse_scenario(&path).unwrap_err().to_string().contains("key 3"));
        assert!(matches!(parse_scenario(&dir.path().join("missing.json")), Err(ScenarioError::Io { .. })));
    }
}
