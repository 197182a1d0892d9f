//! Analyses over a validated model: propagation, influence ranking,
//! elicitation access, mood diffs and scenario comparison.

mod access;
mod propagate;
mod whatif;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use access::{access_report, AccessStatus};
pub use propagate::{propagate, Delivery, EdgeKind, MoodChange, PropagationTrace, Resolution, Round, Termination};
pub use whatif::{whatif, MatrixRow, ScenarioOutcome, WhatIfRow, WhatIfTable};

use crate::error::{Error, Result};
use crate::model::{EntityId, Mood, OrgModel};
use crate::scenario::{PropagationParams, Scenario};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub entity: EntityId,
    pub score: usize,
    pub influence_set: BTreeSet<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfluenceRanking {
    pub entries: Vec<RankEntry>,
}

impl InfluenceRanking {
    pub fn entry(&self, id: &str) -> Option<&RankEntry> {
        self.entries.iter().find(|e| e.entity.as_str() == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.entity.as_str() == id)
    }
}

/// Scores every entity by how many others end up Sad when it alone dissents.
///
/// Each probe starts from an all-Happy organisation with every informal edge
/// active, overrides the probe entity to Sad and holds it there while the
/// propagation runs.
pub fn influence_rank(model: &OrgModel, params: &PropagationParams) -> InfluenceRanking {
    let happy: BTreeMap<EntityId, Mood> = model.entities().map(|e| (e.id.clone(), Mood::Happy)).collect();
    let base = model.with_moods(&happy);
    let activations = model.informal().iter().map(|e| ((e.source.clone(), e.target.clone()), true)).collect();

    let mut entries: Vec<RankEntry> = model
        .canonical_order()
        .into_iter()
        .map(|probe| {
            let scenario = Scenario {
                activations: BTreeMap::clone(&activations),
                overrides: BTreeMap::from([(probe.clone(), Mood::Sad)]),
                params: *params,
            };
            let pinned = BTreeSet::from([probe.clone()]);
            let trace = propagate::run(&base, &scenario, &pinned);
            let influence_set: BTreeSet<EntityId> =
                trace.final_moods.into_iter().filter(|(id, m)| *m == Mood::Sad && *id != probe).map(|(id, _)| id).collect();
            RankEntry { entity: probe, score: influence_set.len(), influence_set }
        })
        .collect();
    entries.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.entity.cmp(&b.entity)));
    InfluenceRanking { entries }
}

/// Lists the entities whose mood differs between two mappings, in id order.
pub fn diff_moods(before: &BTreeMap<EntityId, Mood>, after: &BTreeMap<EntityId, Mood>) -> Result<Vec<MoodChange>> {
    if !before.keys().eq(after.keys()) {
        let only = |a: &BTreeMap<EntityId, Mood>, b: &BTreeMap<EntityId, Mood>| -> Vec<String> {
            a.keys().filter(|k| !b.contains_key(*k)).map(ToString::to_string).collect()
        };
        return Err(Error::DiffDomain(format!(
            "only before: [{}]; only after: [{}]",
            only(before, after).join(", "),
            only(after, before).join(", ")
        )));
    }
    Ok(before
        .iter()
        .zip(after.values())
        .filter(|((_, b), a)| b != a)
        .map(|((id, b), a)| MoodChange { entity: id.clone(), before: *b, after: *a })
        .collect())
}
