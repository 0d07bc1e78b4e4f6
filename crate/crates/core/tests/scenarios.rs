use std::path::PathBuf;

use worldcoin::netsim::{run_scenario, Event, OnReject, TimedEvent};
use worldcoin::scenario::{parse_scenario, Scenario};
use worldcoin::store::{export_run, StateDir};
use worldcoin::{Amount, CountryCode};

fn bundled(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    parse_scenario(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn cc(s: &str) -> CountryCode {
    CountryCode::new(s).unwrap()
}

#[test]
fn genesis4() {
    let s = bundled("genesis4.json");
    assert_eq!(s.config.countries.len(), 4);
    assert!(s.events.is_empty());
    let (report, _) = run_scenario(s.config, &s.events, s.on_reject).unwrap();
    assert_eq!(report.world_supply, Amount::from_millicoin(7_200_000));
    assert_eq!(report.chain_length, 4);
    assert!(report.converged);
}

#[test]
fn forbidden_sale_is_recorded_or_fatal() {
    let s = bundled("forbidden_sale.json");
    let (report, _) = run_scenario(s.config.clone(), &s.events, OnReject::Record).unwrap();
    assert_eq!(report.rejections.len(), 1);
    assert_eq!(report.rejections[0].event_index, 1);
    assert_eq!(report.rejections[0].reason, "LimitThresholdBuyerTooRich");
    assert_eq!(report.local_tx_committed, 1);

    let err = run_scenario(s.config, &s.events, OnReject::Fail).unwrap_err();
    assert!(err.to_string().contains("event 1"), "{err}");
}

#[test]
fn births_penalties_and_unlock() {
    let s = bundled("births.json");
    let (report, sim) = run_scenario(s.config, &s.events, s.on_reject).unwrap();
    assert_eq!(report.births, 5);
    // five births, each 2 WC; penalties move coins, they do not create them
    assert_eq!(report.world_supply, Amount::from_millicoin(2000 * (50 + 20 + 5)));
    assert_eq!(report.world_supply, report.expected_supply);
    let reasons: Vec<&str> = report.rejections.iter().map(|r| r.reason.as_str()).collect();
    assert_eq!(reasons, ["LockedFunds"]);
    assert_eq!(report.rejections[0].day, 20);

    let aa = sim.ledger(&cc("AA")).unwrap();
    let parent = aa.balance_of(&aa.genesis_account_id(0).unwrap(), report.final_day).unwrap();
    assert_eq!(parent.total.millicoin(), 500, "fourth child costs each parent the penalty");
    let ana = sim.account_of(&"AA:ana".parse().unwrap()).unwrap();
    assert_eq!(aa.balance_of(&ana, report.final_day).unwrap().total.millicoin(), 900);
    // AA government: 50 WC genesis + 4 newborn grants + 2 penalties
    let gov = report.holdings.rows.iter().find(|r| r.country == cc("AA")).unwrap();
    assert_eq!(gov.gov_balance.millicoin(), 50_000 + 4_000 + 1_000);
}

#[test]
fn mixed_outcomes() {
    let s = bundled("mixed.json");
    let (report, _) = run_scenario(s.config, &s.events, s.on_reject).unwrap();
    let got: Vec<(usize, &str)> = report.rejections.iter().map(|r| (r.event_index, r.reason.as_str())).collect();
    assert_eq!(got, [(2, "CrossCountryLocal"), (4, "WouldBreachCutoff")]);
    assert_eq!(report.gov_transfer_blocks, 3);
    assert_eq!(report.births, 1);
    assert!(report.converged);
    assert_eq!(report.world_supply, report.expected_supply);
    assert_eq!(report.world_supply, Amount::from_millicoin(2000 * (950_100 + 1)));
}

#[test]
fn template_runs() {
    let s = bundled("template.json");
    let (report, _) = run_scenario(s.config, &s.events, OnReject::Fail).unwrap();
    assert!(report.converged);
    assert_eq!(report.births, 1);
}

#[test]
fn exported_directories_are_reproducible() {
    for name in ["genesis4.json", "births.json", "mixed.json", "forbidden_sale.json"] {
        let s = bundled(name);
        let dirs: Vec<_> = (0..2)
            .map(|_| {
                let (report, sim) = run_scenario(s.config.clone(), &s.events, s.on_reject).unwrap();
                let dir = tempfile::tempdir().unwrap();
                export_run(dir.path(), &report, &sim).unwrap();
                dir
            })
            .collect();
        let files = |d: &std::path::Path| {
            let mut out = Vec::new();
            let mut stack = vec![d.to_path_buf()];
            while let Some(p) = stack.pop() {
                for e in std::fs::read_dir(&p).unwrap() {
                    let path = e.unwrap().path();
                    if path.is_dir() {
                        stack.push(path);
                    } else {
                        let rel = path.strip_prefix(d).unwrap().to_path_buf();
                        let mut bytes = std::fs::read(&path).unwrap();
                        if rel == std::path::Path::new("report.json") {
                            let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                            v.as_object_mut().unwrap().remove("informational");
                            bytes = v.to_string().into_bytes();
                        }
                        out.push((rel, bytes));
                    }
                }
            }
            out.sort();
            out
        };
        assert_eq!(files(dirs[0].path()), files(dirs[1].path()), "{name}");
        let state = StateDir::open(dirs[0].path()).unwrap();
        let audit = worldcoin::forensics::audit_supply(
            state.world().chain(),
            &state.archive().unwrap(),
            &state.info().government_policy,
            &state.claims().unwrap(),
        );
        assert!(audit.is_clean(), "{name}: {:?}", audit.findings);
    }
}

#[test]
fn local_events_do_not_touch_global_blocks() {
    let s = bundled("mixed.json");
    let (_, full) = run_scenario(s.config.clone(), &s.events, s.on_reject).unwrap();
    let global_only: Vec<TimedEvent> = s.events.iter().filter(|e| !e.event.is_local()).cloned().collect();
    let (_, bare) = run_scenario(s.config, &global_only, s.on_reject).unwrap();
    let non_anchor = |sim: &worldcoin::netsim::Simulation| -> Vec<String> {
        sim.sequencer()
            .chain()
            .iter()
            .filter(|b| !matches!(b.payload, worldcoin::gov_ledger::BlockPayload::CheckpointAnchor(_)))
            .map(|b| serde_json::to_string(&b.payload).unwrap())
            .collect()
    };
    assert_eq!(non_anchor(&full), non_anchor(&bare));
    assert!(global_only.iter().all(|e| !matches!(e.event, Event::Birth { .. })));
}
