//! `worldcoin` command-line front end.
//!
//! Every command prints one canonical JSON document on stdout. Failures print
//! a JSON error on stderr and exit with 1 (usage), 2 (schema) or 3 (runtime).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use worldcoin::forensics::{self, Archive};
use worldcoin::merkle::InclusionProof;
use worldcoin::netsim::{self, ActorRef, OnReject, SimError};
use worldcoin::scenario::{self, ScenarioError};
use worldcoin::store::{self, StateDir, StoreError};
use worldcoin::{AccountId, CountryCode, Hash32, Transaction};

const TEMPLATE: &str = include_str!("../../../scenarios/template.json");

#[derive(Parser)]
#[command(name = "worldcoin", version, about = "Two-channel Worldcoin ledger simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a template scenario
    Init,
    /// Run a scenario and export its ledgers
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's on_reject mode
        #[arg(long, value_enum)]
        on_reject: Option<RejectMode>,
    },
    /// Query an exported run
    Query {
        #[arg(value_enum)]
        what: QueryKind,
        #[arg(long)]
        state: PathBuf,
        /// Account id (hex), actor (CODE:index, CODE:name) or country code
        #[arg(long)]
        account: Option<String>,
    },
    /// Expand an anchored checkpoint into its transactions
    Trace {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        country: String,
        #[arg(long)]
        seq: u64,
    },
    /// Build an inclusion proof for one transaction of a checkpoint
    Prove {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        country: String,
        #[arg(long)]
        seq: u64,
        /// Transaction id (hex)
        #[arg(long)]
        tx: String,
    },
    /// Check an inclusion proof against a Merkle root
    Verify {
        #[arg(long)]
        proof: PathBuf,
        #[arg(long)]
        tx: PathBuf,
        #[arg(long)]
        root: String,
    },
    /// Replay the chain and audit world supply
    Audit {
        #[arg(long)]
        state: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RejectMode {
    Record,
    Fail,
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryKind {
    Supply,
    Holdings,
    Balance,
}

enum Failure {
    Usage(String),
    Schema(Value),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Schema(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Usage(m) => json!({"error": "usage", "message": m}),
            Failure::Schema(v) => v.clone(),
            Failure::Runtime(m) => json!({"error": "runtime", "message": m}),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse_country(s: &str) -> Result<CountryCode, Failure> {
    CountryCode::new(s).map_err(|e| Failure::Usage(format!("--country {s:?}: {e}")))
}

fn parse_hash(flag: &str, s: &str) -> Result<Hash32, Failure> {
    s.parse().map_err(|e| Failure::Usage(format!("{flag} {s:?}: {e}")))
}

fn read_json<T: serde::de::DeserializeOwned>(flag: &str, path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{flag} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Runtime(format!("{flag} {}: {e}", path.display())))
}

fn schema_failure(e: ScenarioError, path: &Path) -> Failure {
    match e {
        ScenarioError::Io { .. } => Failure::Runtime(e.to_string()),
        ScenarioError::Schema(issues) => Failure::Schema(json!({
            "error": "schema",
            "file": path.display().to_string(),
            "issues": issues.iter().map(|i| json!({
                "line": i.position.map(|p| p.line),
                "column": i.position.map(|p| p.column),
                "event": i.event,
                "message": i.message,
            })).collect::<Vec<_>>(),
        })),
    }
}

fn execute(command: Command) -> Result<Value, Failure> {
    match command {
        Command::Init => Ok(serde_json::from_str(TEMPLATE).expect("template is valid JSON")),
        Command::Run { scenario, seed, out, on_reject } => {
            let mut sc = scenario::parse_scenario(&scenario).map_err(|e| schema_failure(e, &scenario))?;
            if let Some(seed) = seed {
                sc.config.seed = seed;
            }
            let mode = match on_reject {
                Some(RejectMode::Record) => OnReject::Record,
                Some(RejectMode::Fail) => OnReject::Fail,
                None => sc.on_reject,
            };
            let (report, sim) = netsim::run_scenario(sc.config, &sc.events, mode).map_err(|e| match e {
                SimError::Invalid(issues) => Failure::Schema(json!({
                    "error": "schema",
                    "issues": issues.iter().map(|i| json!({"event": i.event, "message": i.message})).collect::<Vec<_>>(),
                })),
                other => Failure::Runtime(other.to_string()),
            })?;
            store::export_run(&out, &report, &sim)?;
            Ok(to_value(&report))
        }
        Command::Query { what, state, account } => {
            let st = StateDir::open(&state)?;
            match what {
                QueryKind::Supply => {
                    let w = st.world();
                    Ok(json!({
                        "height": w.height(),
                        "world_supply": w.world_supply(),
                        "expected_supply": w.expected_supply().map_err(|e| Failure::Runtime(e.to_string()))?,
                        "joined_population": w.total_joined_population(),
                        "anchored_births": w.anchored_births(),
                    }))
                }
                QueryKind::Holdings => Ok(to_value(&st.world().holdings_report())),
                QueryKind::Balance => {
                    let account = account.ok_or_else(|| Failure::Usage("query balance needs --account".into()))?;
                    balance(&st, &account)
                }
            }
        }
        Command::Trace { state, country, seq } => {
            let country = parse_country(&country)?;
            let st = StateDir::open(&state)?;
            let (summary, archive) = checkpoint(&st, &country, seq)?;
            let txs = forensics::trace_checkpoint(&summary, &archive).map_err(|e| Failure::Runtime(e.to_string()))?;
            Ok(json!({"summary": to_value(&summary), "transactions": to_value(&txs)}))
        }
        Command::Prove { state, country, seq, tx } => {
            let country = parse_country(&country)?;
            let tx_id = parse_hash("--tx", &tx)?;
            let st = StateDir::open(&state)?;
            let (summary, archive) = checkpoint(&st, &country, seq)?;
            forensics::trace_checkpoint(&summary, &archive).map_err(|e| Failure::Runtime(e.to_string()))?;
            let proof = forensics::prove_inclusion(&archive, &country, seq, &tx_id).map_err(|e| Failure::Runtime(e.to_string()))?;
            Ok(to_value(&proof))
        }
        Command::Verify { proof, tx, root } => {
            let root = parse_hash("--root", &root)?;
            let proof: InclusionProof = read_json("--proof", &proof)?;
            let tx: Transaction = read_json("--tx", &tx)?;
            let valid = forensics::verify_inclusion(&proof, &tx, &root);
            if valid {
                Ok(json!({"valid": true}))
            } else {
                Err(Failure::Runtime(format!("proof for {} does not reach root {root}", tx.tx_id)))
            }
        }
        Command::Audit { state } => {
            let st = StateDir::open(&state)?;
            let report = forensics::audit_supply(st.world().chain(), &st.archive()?, &st.info().government_policy, &st.claims()?);
            if report.is_clean() {
                Ok(to_value(&report))
            } else {
                Err(Failure::Runtime(serde_json::to_string(&report).expect("serializable")))
            }
        }
    }
}

fn checkpoint(st: &StateDir, country: &CountryCode, seq: u64) -> Result<(worldcoin::people_ledger::CheckpointSummary, Archive), Failure> {
    let summary = st
        .anchored_summary(country, seq)
        .ok_or_else(|| Failure::Runtime(format!("no anchored checkpoint {seq} for {country}")))?
        .clone();
    let mut archive = Archive::new();
    if let Some(txs) = st.batch(country, seq)? {
        archive.insert(country.clone(), seq, txs);
    }
    Ok((summary, archive))
}

fn balance(st: &StateDir, account: &str) -> Result<Value, Failure> {
    if let Ok(country) = CountryCode::new(account) {
        if let Some(b) = st.world().gov_balance(&country) {
            return Ok(json!({"country": country, "kind": "government", "total": b}));
        }
    }
    let record = if account.contains(':') {
        let actor: ActorRef = account.parse().map_err(|e| Failure::Usage(format!("--account: {e}")))?;
        st.find_actor(&actor)?
    } else {
        let id = AccountId(parse_hash("--account", account)?);
        st.find_account(&id)?
    };
    let r = record.ok_or_else(|| Failure::Runtime(format!("account {account} not found (untouched genesis citizens hold 1000 mc)")))?;
    Ok(json!({
        "account": r.account.id,
        "actor": r.actor,
        "country": r.account.country,
        "kind": "person",
        "total": r.account.total,
        "locked": r.account.total.saturating_sub(r.spendable),
        "spendable": r.spendable,
        "day": st.info().final_day,
    }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", f.to_json());
            return ExitCode::from(f.code());
        }
    };
    match execute(cli.command) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code())
        }
    }
}
