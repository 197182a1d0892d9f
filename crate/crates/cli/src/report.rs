//! Plain-text reports for terminals.

use std::collections::BTreeMap;

use anstyle::{AnsiColor, Style};
use polorg_core::analysis::{InfluenceRanking, ScenarioOutcome, WhatIfTable};
use polorg_core::{AccessStatus, EntityId, Mood, OrgModel, PropagationTrace, Termination};

use crate::Io;

fn mood(io: &Io<'_>, m: Mood) -> String {
    let color = match m {
        Mood::Happy => AnsiColor::Green,
        Mood::Sad => AnsiColor::Red,
        Mood::Neutral => AnsiColor::White,
    };
    format!("{} {}", m.emoji(), io.styled(Style::new().fg_color(Some(color.into())), m.as_str()))
}

fn termination(t: &Termination) -> String {
    match t {
        Termination::Fixpoint => "fixpoint".into(),
        Termination::Oscillation { period } => format!("oscillation (period {period})"),
        Termination::RoundCap => "round cap reached".into(),
    }
}

pub fn trace(io: &mut Io<'_>, model: &OrgModel, trace: &PropagationTrace) {
    for c in &trace.overrides {
        let line = format!("override {}: {} -> {}", c.entity, mood(io, c.before), mood(io, c.after));
        let _ = writeln!(io.out, "{line}");
    }
    for round in &trace.rounds {
        let _ = writeln!(io.out, "round {}", round.index);
        for r in round.resolutions.iter().filter(|r| r.before != r.after) {
            let sources = r.contenders.iter().map(EntityId::as_str).collect::<Vec<_>>().join(", ");
            let why = if r.conflict { format!("conflict between {sources}") } else { format!("from {sources}") };
            let line = format!("  {}: {} -> {}  ({why})", r.target, mood(io, r.before), mood(io, r.after));
            let _ = writeln!(io.out, "{line}");
        }
    }
    let _ = writeln!(io.out, "termination: {} after {} change rounds", termination(&trace.termination), trace.change_rounds());
    let _ = writeln!(io.out, "final moods:");
    for id in model.canonical_order() {
        let line = format!("  {id}  {}", mood(io, trace.final_moods[&id]));
        let _ = writeln!(io.out, "{line}");
    }
}

pub fn whatif(io: &mut Io<'_>, table: &WhatIfTable) {
    let width = table.matrix.iter().map(|r| r.entity.as_str().len()).max().unwrap_or(0).max("entity".len());
    let mut header = format!("{:width$}  {:8}", "entity", "initial");
    for name in &table.scenarios {
        header.push_str(&format!("  {name:8}"));
    }
    let _ = writeln!(io.out, "{}", header.trim_end());
    for row in &table.matrix {
        let mut line = format!("{:width$}  {:8}", row.entity.as_str(), row.initial.as_str());
        for m in &row.moods {
            line.push_str(&format!("  {:8}", m.map_or("error", Mood::as_str)));
        }
        if row.differs() {
            line.push_str("  *");
        }
        let _ = writeln!(io.out, "{}", line.trim_end());
    }
    for row in &table.rows {
        if let ScenarioOutcome::Ok { termination: t, .. } = &row.outcome {
            let _ = writeln!(io.out, "{}: {}", row.name, termination(t));
        }
    }
}

pub fn rank(io: &mut Io<'_>, ranking: &InfluenceRanking) {
    for (i, e) in ranking.entries.iter().enumerate() {
        let set = e.influence_set.iter().map(EntityId::as_str).collect::<Vec<_>>().join(", ");
        let _ = writeln!(io.out, "{:>2}. {}  {}  [{set}]", i + 1, e.entity, e.score);
    }
}

pub fn access(io: &mut Io<'_>, model: &OrgModel, report: &BTreeMap<EntityId, AccessStatus>) {
    for id in model.canonical_order() {
        let line = match &report[&id] {
            AccessStatus::Open => format!("{id}  open"),
            AccessStatus::Blocked => format!("{id}  {}", io.styled(Style::new().fg_color(Some(AnsiColor::Red.into())), "blocked")),
            AccessStatus::Workaround { path } => {
                format!("{id}  workaround via {}", path.iter().map(EntityId::as_str).collect::<Vec<_>>().join(" -> "))
            }
        };
        let _ = writeln!(io.out, "{line}");
    }
}
