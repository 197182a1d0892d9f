use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use polorg_core::json::ModelJson;
use polorg_core::{parse_str, propagate, OrgModel, PropagationTrace, Scenario};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn polorg(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_polorg"))
        .args(args)
        .env("POLORG_NO_COLOR", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let input = stdin.unwrap_or_default().to_string();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn paper_path() -> String {
    fixture("paper.pog").display().to_string()
}

fn paper() -> OrgModel {
    parse_str(&std::fs::read_to_string(fixture("paper.pog")).unwrap()).model.unwrap()
}

#[test]
fn check_clean_fixture() {
    let out = polorg(&["check", &paper_path()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty() && out.stderr.is_empty());
}

#[test]
fn check_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pog");
    std::fs::write(&bad, "org \"x\"\nentity A\nformal A -> A\n").unwrap();
    let out = polorg(&["check", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("bad.pog:3:1 E-SELF-LOOP"), "{}", text(&out.stderr));

    let out = polorg(&["check", bad.to_str().unwrap(), "--json"], None);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["diagnostics"][0]["code"], "E-SELF-LOOP");
    assert_eq!(report["diagnostics"][0]["span"]["line"], 3);
}

#[test]
fn warnings_do_not_fail() {
    let out = polorg(&["check", "-"], Some("org \"x\"\nentity A [mood=sad, mood=happy]\n"));
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stderr).contains("<stdin>:2:"));
    assert!(text(&out.stderr).contains("W-DUP-ATTR"));
}

#[test]
fn missing_file_and_bad_flags() {
    let out = polorg(&["check", "/definitely/missing.pog"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("E-IO"));
    assert_eq!(polorg(&["render", "--format", "png", &paper_path()], None).status.code(), Some(2));
    assert_eq!(polorg(&["propagate", &paper_path(), "--threshold", "0"], None).status.code(), Some(2));
    assert_eq!(polorg(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(polorg(&[], None).status.code(), Some(2));
    assert_eq!(polorg(&["--help"], None).status.code(), Some(0));
}

#[test]
fn fmt_is_idempotent() {
    let messy = "org \"x\"  # trailing\n\n  entity B [mood=happy, label=\"Bee\"]\nentity A\nformal A -> B [power=1]\n";
    let once = polorg(&["fmt", "-"], Some(messy));
    assert_eq!(once.status.code(), Some(0));
    let twice = polorg(&["fmt", "-"], Some(&text(&once.stdout)));
    assert_eq!(once.stdout, twice.stdout);
    assert_eq!(polorg(&["fmt", "--check", "-"], Some(&text(&once.stdout))).status.code(), Some(0));
    assert_eq!(polorg(&["fmt", "--check", "-"], Some(messy)).status.code(), Some(1));
}

#[test]
fn propagate_json_reproduces_the_worked_example() {
    let out = polorg(&["propagate", &paper_path(), "--json"], None);
    assert_eq!(out.status.code(), Some(0));
    let trace: PropagationTrace = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(trace, propagate(&paper(), &Scenario::default()).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["final"]["A"], "sad");
    assert_eq!(v["final"]["B"], "sad");
    assert_eq!(v["final"]["C"], "happy");
}

#[test]
fn propagate_with_scenarios_and_flags() {
    let base = fixture("base.scn").display().to_string();
    let out = polorg(&["propagate", &paper_path(), "--scenario", &base, "--json"], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["final"]["A"], "happy");

    let dir = tempfile::tempdir().unwrap();
    let json_scn = dir.path().join("s.json");
    std::fs::write(&json_scn, r#"{"activations":[{"source":"D","target":"A","active":false}]}"#).unwrap();
    let out = polorg(&["propagate", &paper_path(), "--scenario", json_scn.to_str().unwrap(), "--json"], None);
    let w: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["final"], w["final"]);

    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "activate A ~> G\n").unwrap();
    let out = polorg(&["propagate", &paper_path(), "--scenario", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("E-UNKNOWN-EDGE"));
}

#[test]
fn strict_fails_on_oscillation() {
    let model = "org \"pair\"\nentity P [mood=happy]\nentity Q [mood=sad]\ninformal P ~> Q\ninformal Q ~> P\n";
    assert_eq!(polorg(&["propagate", "-"], Some(model)).status.code(), Some(0));
    let out = polorg(&["propagate", "-", "--strict"], Some(model));
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains("oscillation (period 2)"));
}

#[test]
fn whatif_table() {
    let out = polorg(
        &["whatif", &paper_path(), "--scenario", &fixture("base.scn").display().to_string(), &fixture("leak.scn").display().to_string()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let report = text(&out.stdout);
    let starred: Vec<&str> = report.lines().filter(|l| l.ends_with('*')).map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(starred, ["A", "B"]);
}

#[test]
fn rank_and_access() {
    let out = polorg(&["rank", &paper_path(), "--json"], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["entity"], "D");
    assert_eq!(v[0]["score"], 2);
    assert_eq!(v[1]["entity"], "A");

    let blocked = fixture("blocked.pog").display().to_string();
    let out = polorg(&["access", &blocked, "--entry", "M", "--json"], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["E"]["status"], "blocked");
    let out = polorg(&["access", &blocked, "--entry", "Z"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("E-BAD-ENTRY"));
}

#[test]
fn diff_models() {
    let dir = tempfile::tempdir().unwrap();
    let after = dir.path().join("after.pog");
    std::fs::write(&after, std::fs::read_to_string(fixture("paper.pog")).unwrap().replace("entity C [mood=happy]", "entity C [mood=sad]"))
        .unwrap();
    let out = polorg(&["diff", &paper_path(), after.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout), "C: happy -> sad\n");

    let out = polorg(&["diff", &paper_path(), &fixture("blocked.pog").display().to_string()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("E-DIFF-DOMAIN"));
}

#[test]
fn render_both_formats() {
    let svg = polorg(&["render", &paper_path()], None);
    assert!(text(&svg.stdout).starts_with("<?xml"));
    let dot = polorg(&["render", &paper_path(), "--format", "dot", "--no-informal"], None);
    assert!(text(&dot.stdout).starts_with("digraph"));
    assert!(!text(&dot.stdout).contains("dotted"));
}

#[test]
fn redact_hides_names() {
    let out = polorg(&["redact", "-", "--seed", "5"], Some("org \"Acme\"\nentity boss [title=\"CEO\"]\nentity dev\nformal boss -> dev\n"));
    assert_eq!(out.status.code(), Some(0));
    let redacted = text(&out.stdout);
    assert!(redacted.starts_with("org \"REDACTED\""));
    for word in ["Acme", "boss", "dev", "CEO"] {
        assert!(!redacted.contains(word));
    }
    let json = polorg(&["redact", &paper_path(), "--json"], None);
    let m: ModelJson = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(m.entities.len(), 7);
}

#[test]
fn serve_refuses_exposure_without_acknowledgement() {
    let out = polorg(&["serve", "--listen", "0.0.0.0", "--port", "0"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("acknowledge-exposure"));
}

/// `--json` reports are byte-identical to the frozen wire format.
#[test]
fn json_reports_match_goldens() {
    let golden = |name: &str| std::fs::read(fixture("golden").join(name)).unwrap();
    let blocked = fixture("blocked.pog").display().to_string();
    let (base, leak) = (fixture("base.scn").display().to_string(), fixture("leak.scn").display().to_string());
    assert_eq!(polorg(&["propagate", &paper_path(), "--json"], None).stdout, golden("propagate.json"));
    assert_eq!(polorg(&["rank", &paper_path(), "--json"], None).stdout, golden("rank.json"));
    assert_eq!(polorg(&["access", &blocked, "--entry", "M", "--json"], None).stdout, golden("access.json"));
    assert_eq!(polorg(&["whatif", &paper_path(), "--scenario", &base, &leak, "--json"], None).stdout, golden("whatif.json"));
}
