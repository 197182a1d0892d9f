//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr, SocketAddr, TcpStream, UdpSocket};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use polorg_core::redact::pseudonyms;
use polorg_core::{
    access_report, format, influence_rank, layout, parse_str, propagate, redact, to_dot, to_svg, AccessStatus, EntityId, Mood, OrgModel,
    PropagationParams, PropagationTrace, RenderOptions, Scenario, Termination,
};
use polorg_testkit::{oracle_family, random_model, reference_propagate, rng, FAMILY_SEED};

const FIG7_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const ORACLE_CASES: usize = 500;
const MAX_ENTITIES: usize = 8;
const ROUND_TRIP_CASES: usize = 200;
const DETERMINISM_RUNS: usize = 10;
const REDACT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> OrgModel {
    parse_str(&std::fs::read_to_string(fixture(name)).unwrap()).model.unwrap()
}

type Outcome = Result<String, String>;

fn fig7_end_to_end() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_polorg"))
        .args(["propagate", fixture("paper.pog").to_str().unwrap(), "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if out.status.code() != Some(0) {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let trace: PropagationTrace = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let expected = [
        ("A", Mood::Sad),
        ("B", Mood::Sad),
        ("C", Mood::Happy),
        ("D", Mood::Sad),
        ("E", Mood::Happy),
        ("F", Mood::Happy),
        ("G", Mood::Happy),
    ];
    let got: Vec<(&str, Mood)> = trace.final_moods.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let detail = format!("final {got:?}, {:?}, {} change rounds, {elapsed:.2?}", trace.termination, trace.change_rounds());
    if got == expected && trace.termination == Termination::Fixpoint && trace.change_rounds() == 2 && elapsed < FIG7_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn informal_subverts_formal() -> Outcome {
    let ranking = influence_rank(&load("paper.pog"), &PropagationParams::default());
    let (d, a) = (ranking.entry("D").unwrap(), ranking.entry("A").unwrap());
    let (pd, pa) = (ranking.position("D").unwrap(), ranking.position("A").unwrap());
    let detail = format!("D score {} at #{}, A score {} at #{}", d.score, pd + 1, a.score, pa + 1);
    if pd < pa && d.score == 2 && a.score == 1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let family = oracle_family(FAMILY_SEED, ORACLE_CASES);
    let oversized = family.iter().filter(|(m, _)| m.len() > MAX_ENTITIES).count();
    let start = Instant::now();
    let mut mismatches = 0;
    for (model, scenario) in &family {
        let trace = propagate(model, scenario).map_err(|e| e.to_string())?;
        let reference = reference_propagate(model, scenario);
        let finals: BTreeMap<String, Mood> = trace.final_moods.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        if finals != reference.final_moods {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("{}/{} agree, {oversized} oversized, {elapsed:.2?}", family.len() - mismatches, family.len());
    if mismatches == 0 && oversized == 0 && family.len() >= ORACLE_CASES && elapsed < ORACLE_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn round_trip() -> Outcome {
    let mut r = rng(FAMILY_SEED ^ 0x5eed);
    let mut failures = 0;
    for _ in 0..ROUND_TRIP_CASES {
        let m = random_model(&mut r, 12);
        let text = format(&m);
        let parsed = parse_str(&text);
        let ok = parsed.diagnostics.is_empty() && parsed.model.as_ref() == Some(&m) && format(parsed.model.as_ref().unwrap()) == text;
        if !ok {
            failures += 1;
        }
    }
    let detail = format!("{}/{ROUND_TRIP_CASES} round-trip and idempotent", ROUND_TRIP_CASES - failures);
    if failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let run = || {
        let m = load("paper.pog");
        let opts = RenderOptions::default();
        let trace = serde_json::to_string(&propagate(&m, &Scenario::default()).unwrap()).unwrap();
        let plan = serde_json::to_string(&layout(&m)).unwrap();
        [trace, plan, to_dot(&m, &opts), to_svg(&m, &opts)]
    };
    let first = run();
    let identical = (1..DETERMINISM_RUNS).filter(|_| run() == first).count() + 1;
    let detail = format!("{identical}/{DETERMINISM_RUNS} runs byte-identical (propagate, layout, dot, svg)");
    if identical == DETERMINISM_RUNS {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn access_semantics() -> Outcome {
    let text = std::fs::read_to_string(fixture("blocked.pog")).unwrap();
    let entry: BTreeSet<EntityId> = [EntityId::new("M").unwrap()].into();
    let without = access_report(&parse_str(&text).model.unwrap(), &entry).map_err(|e| e.to_string())?;
    let with_informal = parse_str(&format!("{text}informal E ~> M\n")).model.unwrap();
    let with = access_report(&with_informal, &entry).map_err(|e| e.to_string())?;
    let (a, b) = (&without["E"], &with["E"]);
    let detail = format!("without informal: {a:?}; with one informal edge: {b:?}");
    let workaround = matches!(b, AccessStatus::Workaround { path } if path.iter().map(EntityId::as_str).eq(["M", "E"]));
    if *a == AccessStatus::Blocked && workaround {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Raising the cascade threshold from t to t + 1, for every t up to the
/// largest power in the model (beyond it no formal edge relays anyway).
fn threshold_monotonicity() -> Outcome {
    let family = oracle_family(FAMILY_SEED, ORACLE_CASES);
    let mut violating_models = 0;
    let mut first = None;
    let mut pairs = 0;
    for (i, (model, scenario)) in family.iter().enumerate() {
        let max_power = model.formal().iter().map(|f| f.power).max().unwrap_or(1);
        let changed = |t: u64| {
            let mut s = scenario.clone();
            s.params = PropagationParams { cascade_threshold: std::num::NonZeroU64::new(t).unwrap(), ..s.params };
            propagate(model, &s).unwrap().changed_entities()
        };
        let mut bad = false;
        for t in 1..=max_power {
            pairs += 1;
            let (low, high) = (changed(t), changed(t + 1));
            if !high.is_subset(&low) {
                bad = true;
                first.get_or_insert_with(|| format!("case {i} t={t}: {:?} not within {:?}", ids(&high), ids(&low)));
            }
        }
        violating_models += usize::from(bad);
    }
    let detail = format!("{violating_models}/{} models violate ({pairs} threshold pairs){}", family.len(), first.map(|f| format!("; {f}")).unwrap_or_default());
    if violating_models == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ids(set: &BTreeSet<EntityId>) -> Vec<&str> {
    set.iter().map(EntityId::as_str).collect()
}

/// Addresses with a listening TCP socket on `port`, from the kernel's table.
fn kernel_listeners(port: u16) -> Option<Vec<IpAddr>> {
    fn v4(hex: &str) -> Option<IpAddr> {
        let word = u32::from_str_radix(hex, 16).ok()?;
        Some(IpAddr::V4(Ipv4Addr::from(word.swap_bytes())))
    }
    fn v6(hex: &str) -> Option<IpAddr> {
        let mut bytes = [0u8; 16];
        for w in 0..4 {
            let word = u32::from_str_radix(hex.get(w * 8..w * 8 + 8)?, 16).ok()?.swap_bytes();
            bytes[w * 4..w * 4 + 4].copy_from_slice(&word.to_be_bytes());
        }
        Some(IpAddr::V6(Ipv6Addr::from(bytes)))
    }
    let mut found = Vec::new();
    let mut any_table = false;
    for (table, parse) in [("/proc/net/tcp", v4 as fn(&str) -> Option<IpAddr>), ("/proc/net/tcp6", v6)] {
        let Ok(text) = std::fs::read_to_string(table) else { continue };
        any_table = true;
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split_whitespace().collect();
            let (Some(local), Some(state)) = (cols.get(1), cols.get(3)) else { continue };
            let Some((addr, p)) = local.split_once(':') else { continue };
            if *state == "0A" && u16::from_str_radix(p, 16).ok() == Some(port) {
                found.extend(parse(addr));
            }
        }
    }
    any_table.then_some(found)
}

fn http_get(addr: SocketAddr, path: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect_timeout(&addr, Duration::from_secs(2))?;
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")?;
    let mut response = String::new();
    stream.read_to_string(&mut response)?;
    Ok(response)
}

fn serve_default_is_loopback() -> Outcome {
    let mut child = Command::new(env!("CARGO_BIN_EXE_polorg"))
        .args(["serve", fixture("paper.pog").to_str().unwrap()])
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).map_err(|e| e.to_string())?;
    let result = (|| {
        let url = line.trim().strip_prefix("listening on http://").ok_or_else(|| format!("unexpected startup output {line:?}"))?;
        let addr: SocketAddr = url.trim_end_matches("/api").parse().map_err(|e| format!("{e}: {url}"))?;
        if !addr.ip().is_loopback() {
            return Err(format!("bound {addr}"));
        }
        let body = http_get(addr, "/api/model").map_err(|e| e.to_string())?;
        if !body.starts_with("HTTP/1.1 200") || !body.contains("\"revision\":1") {
            return Err(format!("unexpected response {:?}", body.lines().next()));
        }
        let listeners = kernel_listeners(addr.port());
        if let Some(ls) = &listeners {
            if ls.is_empty() || ls.iter().any(|ip| !ip.is_loopback()) {
                return Err(format!("listeners on port {}: {ls:?}", addr.port()));
            }
        }
        // The outward-facing address, when the host has one, must refuse.
        let outward = UdpSocket::bind("0.0.0.0:0").and_then(|s| s.connect("192.0.2.1:9").and_then(|_| s.local_addr())).ok().map(|a| a.ip());
        let outward = outward.filter(|ip| !ip.is_loopback() && !ip.is_unspecified());
        if let Some(ip) = outward {
            if TcpStream::connect_timeout(&SocketAddr::new(ip, addr.port()), Duration::from_secs(1)).is_ok() {
                return Err(format!("reachable via {ip}"));
            }
        }
        Ok(format!(
            "serve bound {addr}; kernel listeners {}; outward address {}",
            listeners.map_or("unavailable".into(), |l| format!("{l:?}")),
            outward.map_or("none".into(), |ip| format!("{ip} refused"))
        ))
    })();
    let _ = child.kill();
    let _ = child.wait();
    result
}

fn redact_isomorphism() -> Outcome {
    let m = load("paper.pog");
    let base = propagate(&m, &Scenario::default()).map_err(|e| e.to_string())?;
    for seed in REDACT_SEEDS {
        let names = pseudonyms(&m, seed);
        let hidden = redact(&m, seed);
        let trace = propagate(&hidden, &Scenario::default()).map_err(|e| e.to_string())?;
        let renamed: Vec<BTreeSet<(String, Mood, Mood)>> = base
            .rounds
            .iter()
            .map(|r| r.changes.iter().map(|c| (names[&c.entity].to_string(), c.before, c.after)).collect())
            .collect();
        let actual: Vec<BTreeSet<(String, Mood, Mood)>> =
            trace.rounds.iter().map(|r| r.changes.iter().map(|c| (c.entity.to_string(), c.before, c.after)).collect()).collect();
        let finals: BTreeMap<&EntityId, Mood> = base.final_moods.iter().map(|(k, v)| (&names[k], *v)).collect();
        let same_finals = finals.iter().all(|(k, v)| trace.final_moods[*k] == *v);
        if renamed != actual || trace.termination != base.termination || !same_finals {
            return Err(format!("seed {seed}: traces differ under renaming"));
        }
    }
    Ok(format!("{} seeds isomorphic", REDACT_SEEDS.len()))
}

fn privacy_posture() -> Outcome {
    match (serve_default_is_loopback(), redact_isomorphism()) {
        (Ok(a), Ok(b)) => Ok(format!("{a}; {b}")),
        (a, b) => Err(format!("{}; {}", a.unwrap_or_else(|e| e), b.unwrap_or_else(|e| e))),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("worked example end-to-end", fig7_end_to_end),
        ("informal influence outranks formal", informal_subverts_formal),
        ("oracle equivalence", oracle_equivalence),
        ("round-trip and idempotence", round_trip),
        ("determinism", determinism),
        ("access semantics", access_semantics),
        ("threshold monotonicity", threshold_monotonicity),
        ("privacy posture", privacy_posture),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    std::io::stdout().flush().unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
