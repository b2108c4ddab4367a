use std::path::PathBuf;
use std::process::{Command, Output};

fn system(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "systems", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn finv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finv"))
        .args(args)
        .env_remove("FINV_CAP")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_temp(name: &str, body: &str) -> String {
    let p = std::env::temp_dir().join(format!("finv-cli-test-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn bernoulli_routes_agree() {
    let o = finv(&["f", &system("bernoulli.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for route in ["ball-limit", "sphere-formula", "decay-series"] {
        let line = out.lines().find(|l| l.starts_with(route)).unwrap();
        assert!(line.contains("0.6931472") && line.contains("true"), "{line}");
    }
    assert!(out.contains("status: agree"));
}

#[test]
fn coset_decay_profile_is_supported_on_marked_letter() {
    let o = finv(&["--format", "csv", "decay-profile", "--radius", "2", &system("coset.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n_or_g,term_value,cumulative"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 17);
    for r in &rows[1..] {
        let nonzero = r[1] != "0";
        assert_eq!(nonzero, r[0] == "a" || r[0] == "A", "{r:?}");
    }
    assert_eq!(rows.last().unwrap()[2], "0");
}

#[test]
fn one_point_action_is_zero() {
    let o = finv(&["f", &system("one-point.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("atomic-closed-form")).unwrap();
    assert!(line.split_whitespace().nth(2) == Some("0"), "{line}");
}

#[test]
fn bits_rescale() {
    let o = finv(&["--bits", "f", &system("bernoulli.toml")]);
    assert!(stdout(&o).contains("1.000000"));
}

#[test]
fn parse_errors_report_position() {
    let bad = write_temp("bad.toml", "rank = 2\n[system\nkind = \"bernoulli\"\n");
    let o = finv(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2, column"), "{}", stderr(&o));
}

#[test]
fn invalid_system_exits_with_validation_code() {
    let bad = write_temp(
        "nonstat.toml",
        r#"rank = 2
[system]
kind = "markov"
stationary = { "0" = "1/3", "1" = "2/3" }
[system.transitions]
a = [["9/10", "1/10"], ["1/10", "9/10"]]
b = [["9/10", "1/10"], ["1/10", "9/10"]]
"#,
    );
    let o = finv(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(format!("{}{}", stdout(&o), stderr(&o)).contains("stationarity"));
}

#[test]
fn rank_mismatch_is_rejected() {
    let o = finv(&["--rank", "3", "f", &system("bernoulli.toml")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cap_exceeded_has_its_own_code() {
    let o = finv(&["--cap", "4", "f", &system("hmm.toml")]);
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_finv"))
        .args(["f", &system("hmm.toml")])
        .env("FINV_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_and_help() {
    assert_eq!(finv(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(finv(&["--cap", "0", "corpus"]).status.code(), Some(1));
    assert_eq!(finv(&["--help"]).status.code(), Some(0));
    assert_eq!(finv(&["validate", "/nonexistent/system.toml"]).status.code(), Some(1));
}

#[test]
fn decompose_agrees() {
    let o = finv(&["decompose", &system("mixture.toml")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("agree").count(), 2);
}

#[test]
fn order_flag_changes_nothing_on_markov_systems() {
    let base = stdout(&finv(&["f", &system("markov-r1.toml")]));
    let o = finv(&["--order", "Aa", "f", &system("markov-r1.toml")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), base);
}

#[test]
fn in_process_run_matches_binary() {
    let args = ["finv", "validate", &system("bernoulli.toml")];
    let cfg = finv_cli::parse_args(args.iter().map(|s| s.to_string())).unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = finv_cli::run(cfg, &mut out, &mut err);
    assert_eq!(code, 0);
    assert_eq!(out, finv(&args[1..]).stdout);
}
