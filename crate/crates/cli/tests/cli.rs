use std::path::PathBuf;
use std::process::{Command, Output};

use ncs_core::config::{RunConfig, EXAMPLE_CONFIG};
use ncs_core::criterion::{check_stability, DelayScan, StabilityReport};
use ncs_core::uncertainty::{OracleResult, Protocol, Table1Row};

fn ncs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ncs-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn maxdelay_on_the_example() {
    for (args, want) in [
        (&["maxdelay"][..], "6"),
        (&["maxdelay", "--protocol", "p3"][..], "3"),
        (&["maxdelay", "--causal"][..], "4"),
        (&["maxdelay", "--protocol", "p3", "--causal"][..], "2"),
    ] {
        let o = ncs(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout(&o).trim(), want, "{args:?}");
    }
}

#[test]
fn maxdelay_writes_the_verdict_vector() {
    let path = scratch("scan.csv");
    let o = ncs(&["maxdelay", "--cap", "8", "--out", path.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "6");
    let table = std::fs::read_to_string(&path).unwrap();
    let verdicts: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(
        verdicts,
        ["true", "true", "true", "true", "true", "true", "false", "false"]
    );
}

#[test]
fn check_exit_codes() {
    assert_eq!(
        ncs(&["check", "--protocol", "p3", "--tau-hi", "3"])
            .status
            .code(),
        Some(0)
    );
    let o = ncs(&["check", "--protocol", "p3", "--tau-hi", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",false,-0.159916534234"));
}

#[test]
fn check_json_round_trips() {
    let o = ncs(&["check", "--format", "json", "--tau-hi", "7"]);
    assert_eq!(o.status.code(), Some(2));
    let parsed: StabilityReport = serde_json::from_str(&stdout(&o)).unwrap();
    let cfg = RunConfig::example();
    let direct = check_stability(
        &cfg.plant().unwrap(),
        &cfg.controller_spec().unwrap(),
        0,
        7,
        Protocol::P1,
        &cfg.criterion_options(),
    )
    .unwrap();
    assert_eq!(parsed, direct);

    let o = ncs(&["maxdelay", "--format", "json", "--cap", "4"]);
    let scan: DelayScan = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(scan.max_admissible, 4);
    assert_eq!(
        serde_json::to_string_pretty(&scan).unwrap() + "\n",
        stdout(&o)
    );
}

#[test]
fn table1_matches_the_fixture() {
    let o = ncs(&["table1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        include_str!("../../core/tests/fixtures/table1.csv")
    );

    let o = ncs(&["table1", "--to", "4", "--overestimate", "--format", "json"]);
    let rows: Vec<Table1Row> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rows
        .iter()
        .all(|r| r.tau_a_star == r.tau_hat_n && r.alpha_star == r.tau_hat_n as f64));
}

#[test]
fn oracle_command() {
    let o = ncs(&["oracle", "P1", "1", "0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("alpha_t,norm_sq\n1,1\n"));

    let o = ncs(&["oracle", "p3", "2", "1", "3", "--format", "json"]);
    let r: OracleResult = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.witness.norm_sq, r.norm_sq);
}

#[test]
fn distinct_diagnostics() {
    let bad = scratch("bad.cfg");
    std::fs::write(&bad, format!("{EXAMPLE_CONFIG}\nbogus = 1\n")).unwrap();
    let o = ncs(&["check", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));

    let o = ncs(&["oracle", "p3", "6", "3", "20", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));

    // a direct controller with far too much gain
    let unstable = scratch("unstable.cfg");
    let text = EXAMPLE_CONFIG.replace(
        "kind = \"smith_predictor\"\nc_num = [29.504, -29.017184]\nc_den = [1.0, -1.0]\nfilter_pole = 0.95",
        "kind = \"direct\"\nr_num = [500.0]\nr_den = [1.0]",
    );
    std::fs::write(&unstable, text).unwrap();
    let o = ncs(&["check", "--config", unstable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nominal loop is unstable"));
}

#[test]
fn simulate_and_bode_outputs() {
    let packets = scratch("packets.csv");
    let o = ncs(&[
        "simulate",
        "--horizon",
        "300",
        "--tau-hi",
        "3",
        "--packets",
        packets.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let trace = stdout(&o);
    assert_eq!(trace.lines().next(), Some("k,r,u,y,n,selected"));
    assert_eq!(trace.lines().count(), 301);
    let log = std::fs::read_to_string(&packets).unwrap();
    assert!(log.starts_with("packet,sent,delay,arrival,status\n"));

    let o = ncs(&["bode", "--spans", "3,4", "--protocol", "p3"]);
    assert_eq!(o.status.code(), Some(0));
    let peak = |span: &str| {
        stdout(&o)
            .lines()
            .skip(1)
            .filter(|l| l.starts_with(&format!("{span},")))
            .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .fold(0.0, f64::max)
    };
    assert!(peak("3") < 1.0 && peak("4") > 1.0);
}

#[test]
fn search_reports_divergence_exit_code() {
    let o = ncs(&[
        "search",
        "--tau-hi",
        "10",
        "--horizon",
        "1000",
        "--patterns",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).lines().nth(1).unwrap().contains(",true,"));
}
