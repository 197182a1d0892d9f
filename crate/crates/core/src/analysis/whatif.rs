use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{diff_moods, propagate, MoodChange, Termination};
use crate::diagnostic::Diagnostic;
use crate::error::{Error, Result};
use crate::model::{EntityId, Mood, OrgModel};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ScenarioOutcome {
    Ok {
        #[serde(rename = "final")]
        final_moods: BTreeMap<EntityId, Mood>,
        diff: Vec<MoodChange>,
        termination: Termination,
    },
    Error {
        error: Diagnostic,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfRow {
    pub name: String,
    #[serde(flatten)]
    pub outcome: ScenarioOutcome,
}

/// Final mood of one entity under each scenario, in scenario order.
/// `None` marks a scenario that failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub entity: EntityId,
    pub initial: Mood,
    pub moods: Vec<Option<Mood>>,
}

impl MatrixRow {
    /// Whether the successful scenarios disagree on this entity.
    pub fn differs(&self) -> bool {
        let mut seen = self.moods.iter().flatten();
        match seen.next() {
            Some(first) => seen.any(|m| m != first),
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WhatIfTable {
    pub scenarios: Vec<String>,
    pub rows: Vec<WhatIfRow>,
    pub matrix: Vec<MatrixRow>,
}

/// Runs each named scenario independently; a failing scenario is reported
/// in its own row without affecting the others.
pub fn whatif(model: &OrgModel, scenarios: &[(String, Scenario)]) -> Result<WhatIfTable> {
    let mut names = BTreeSet::new();
    for (name, _) in scenarios {
        if !names.insert(name.as_str()) {
            return Err(Error::DupScenario(name.clone()));
        }
    }
    if scenarios.is_empty() {
        return Ok(WhatIfTable::default());
    }

    let initial = model.moods();
    let rows: Vec<WhatIfRow> = scenarios
        .iter()
        .map(|(name, scenario)| {
            let outcome = match propagate(model, scenario) {
                Ok(trace) => ScenarioOutcome::Ok {
                    diff: diff_moods(&initial, &trace.final_moods).expect("propagation preserves the entity set"),
                    final_moods: trace.final_moods,
                    termination: trace.termination,
                },
                Err(e) => ScenarioOutcome::Error { error: e.diagnostics().remove(0) },
            };
            WhatIfRow { name: name.clone(), outcome }
        })
        .collect();

    let matrix = model
        .canonical_order()
        .into_iter()
        .map(|id| {
            let moods = rows
                .iter()
                .map(|r| match &r.outcome {
                    ScenarioOutcome::Ok { final_moods, .. } => Some(final_moods[&id]),
                    ScenarioOutcome::Error { .. } => None,
                })
                .collect();
            MatrixRow { initial: initial[&id], entity: id, moods }
        })
        .collect();

    Ok(WhatIfTable { scenarios: scenarios.iter().map(|(n, _)| n.clone()).collect(), rows, matrix })
}
