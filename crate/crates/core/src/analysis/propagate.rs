//! Round-based mood propagation.
//!
//! Round 1 seeds deliveries along active informal edges whose source holds a
//! non-neutral mood different from its target's, plus the outgoing edges of
//! entities whose mood was overridden. Every later round only carries the
//! new moods of entities that changed in the previous round: down formal
//! edges with power at or above the cascade threshold, and along active
//! informal edges. All targets of a round resolve against the moods at the
//! start of the round.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{EntityId, Mood, OrgModel};
use crate::scenario::{InfluenceMode, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Informal,
    Formal,
}

/// One mood carried along one edge in one round. The edge is identified by
/// `kind` plus its endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Delivery {
    pub source: EntityId,
    pub target: EntityId,
    pub kind: EdgeKind,
    pub mood: Mood,
    pub strength: u64,
}

/// How one target settled the deliveries it received in a round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub target: EntityId,
    /// Mood the surviving deliveries pull towards; Neutral on conflict.
    pub resolved: Mood,
    pub conflict: bool,
    /// Sources of the deliveries that survived the strength and kind filters.
    pub contenders: Vec<EntityId>,
    pub strength: u64,
    pub before: Mood,
    pub after: Mood,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoodChange {
    pub entity: EntityId,
    pub before: Mood,
    pub after: Mood,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub index: usize,
    pub deliveries: Vec<Delivery>,
    pub resolutions: Vec<Resolution>,
    pub changes: Vec<MoodChange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Fixpoint,
    Oscillation { period: usize },
    RoundCap,
}

impl Termination {
    pub fn is_fixpoint(&self) -> bool {
        matches!(self, Termination::Fixpoint)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationTrace {
    /// Moods as stated in the model.
    pub initial: BTreeMap<EntityId, Mood>,
    /// Scenario overrides that actually changed a mood.
    pub overrides: Vec<MoodChange>,
    /// Rounds that carried at least one delivery.
    pub rounds: Vec<Round>,
    #[serde(rename = "final")]
    pub final_moods: BTreeMap<EntityId, Mood>,
    pub termination: Termination,
    /// Round in which termination was detected.
    pub last_round: usize,
}

impl PropagationTrace {
    /// Applies overrides and every round's changes to `initial`.
    pub fn replay(&self) -> BTreeMap<EntityId, Mood> {
        let mut moods = self.initial.clone();
        let changes = self.overrides.iter().chain(self.rounds.iter().flat_map(|r| r.changes.iter()));
        for c in changes {
            moods.insert(c.entity.clone(), c.after);
        }
        moods
    }

    /// Number of rounds in which at least one mood changed.
    pub fn change_rounds(&self) -> usize {
        self.rounds.iter().filter(|r| !r.changes.is_empty()).count()
    }

    /// Every entity that changed in some round (overrides excluded).
    pub fn changed_entities(&self) -> BTreeSet<EntityId> {
        self.rounds.iter().flat_map(|r| r.changes.iter().map(|c| c.entity.clone())).collect()
    }
}

/// Index-based view of a model under a scenario.
struct Net<'m> {
    order: Vec<&'m EntityId>,
    cascade: Vec<Vec<(usize, u64)>>,
    informal: Vec<Vec<(usize, u64)>>,
}

impl<'m> Net<'m> {
    fn new(model: &'m OrgModel, order: &'m [EntityId], scenario: &Scenario) -> Self {
        let index: HashMap<&EntityId, usize> = order.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let n = order.len();
        let threshold = scenario.params.cascade_threshold.get();
        let mut cascade = vec![Vec::new(); n];
        for f in model.formal() {
            if f.power >= threshold {
                cascade[index[&f.superior]].push((index[&f.subordinate], f.power));
            }
        }
        let mut informal = vec![Vec::new(); n];
        for e in model.informal() {
            if scenario.is_active(&e.source, &e.target, e.active) {
                informal[index[&e.source]].push((index[&e.target], e.strength));
            }
        }
        for list in cascade.iter_mut().chain(informal.iter_mut()) {
            list.sort_unstable();
        }
        Net { order: order.iter().collect(), cascade, informal }
    }
}

#[derive(Clone, Copy)]
struct RawDelivery {
    source: usize,
    target: usize,
    kind: EdgeKind,
    mood: Mood,
    strength: u64,
}

/// Runs the scenario against the model and records every round.
pub fn propagate(model: &OrgModel, scenario: &Scenario) -> Result<PropagationTrace> {
    scenario.check(model)?;
    Ok(run(model, scenario, &BTreeSet::new()))
}

/// Core loop. Entities in `pinned` keep their mood: nothing is delivered to
/// them.
pub(crate) fn run(model: &OrgModel, scenario: &Scenario, pinned: &BTreeSet<EntityId>) -> PropagationTrace {
    let order = model.canonical_order();
    let net = Net::new(model, &order, scenario);
    let n = order.len();
    let pinned: Vec<bool> = order.iter().map(|id| pinned.contains(id)).collect();
    let params = &scenario.params;
    let cap = params.round_cap(n);

    let initial = model.moods();
    let mut moods: Vec<Mood> = order.iter().map(|id| initial[id]).collect();
    let mut changed: Vec<usize> = Vec::new();
    let mut overrides = Vec::new();
    for (i, id) in order.iter().enumerate() {
        if let Some(&m) = scenario.overrides.get(id) {
            if m != moods[i] {
                overrides.push(MoodChange { entity: id.clone(), before: moods[i], after: m });
                moods[i] = m;
                changed.push(i);
            }
        }
    }

    let mut seen: HashMap<Vec<Mood>, usize> = HashMap::new();
    seen.insert(moods.clone(), 0);
    let mut rounds = Vec::new();
    let mut termination = Termination::RoundCap;
    let mut last_round = cap;

    for k in 1..=cap {
        let mut raw: Vec<RawDelivery> = Vec::new();
        if k == 1 {
            for s in 0..n {
                for &(t, strength) in &net.informal[s] {
                    if moods[s] != Mood::Neutral && moods[s] != moods[t] {
                        raw.push(RawDelivery { source: s, target: t, kind: EdgeKind::Informal, mood: moods[s], strength });
                    }
                }
            }
        }
        for &s in &changed {
            for &(t, power) in &net.cascade[s] {
                raw.push(RawDelivery { source: s, target: t, kind: EdgeKind::Formal, mood: moods[s], strength: power });
            }
            for &(t, strength) in &net.informal[s] {
                raw.push(RawDelivery { source: s, target: t, kind: EdgeKind::Informal, mood: moods[s], strength });
            }
        }
        raw.retain(|d| !pinned[d.target]);
        raw.sort_by_key(|d| (d.target, d.kind, d.source));
        // An overridden source can reach an edge twice in round 1.
        raw.dedup_by_key(|d| (d.target, d.kind, d.source));

        if raw.is_empty() {
            termination = Termination::Fixpoint;
            last_round = k;
            break;
        }

        let mut resolutions = Vec::new();
        let mut next = moods.clone();
        for group in raw.chunk_by(|a, b| a.target == b.target) {
            let t = group[0].target;
            let (resolved, strength, winners) = resolve(group);
            let after = match params.influence_mode {
                InfluenceMode::Adopt => resolved,
                InfluenceMode::Graded => moods[t].step_towards(resolved, strength),
            };
            next[t] = after;
            resolutions.push(Resolution {
                target: net.order[t].clone(),
                resolved,
                conflict: winners.iter().any(|w| w.mood != winners[0].mood),
                contenders: winners.iter().map(|w| net.order[w.source].clone()).collect(),
                strength,
                before: moods[t],
                after,
            });
        }

        changed = (0..n).filter(|&i| next[i] != moods[i]).collect();
        let changes = changed
            .iter()
            .map(|&i| MoodChange { entity: net.order[i].clone(), before: moods[i], after: next[i] })
            .collect();
        let deliveries = raw
            .iter()
            .map(|d| Delivery {
                source: net.order[d.source].clone(),
                target: net.order[d.target].clone(),
                kind: d.kind,
                mood: d.mood,
                strength: d.strength,
            })
            .collect();
        rounds.push(Round { index: k, deliveries, resolutions, changes });
        moods = next;

        if changed.is_empty() {
            termination = Termination::Fixpoint;
            last_round = k;
            break;
        }
        if let Some(&j) = seen.get(&moods) {
            termination = Termination::Oscillation { period: k - j };
            last_round = k;
            break;
        }
        seen.insert(moods.clone(), k);
    }

    let final_moods = order.iter().cloned().zip(moods).collect();
    PropagationTrace { initial, overrides, rounds, final_moods, termination, last_round }
}

/// Resolves the deliveries aimed at one target: strongest wins, informal
/// beats formal at equal strength, disagreement among the survivors yields
/// Neutral.
fn resolve(group: &[RawDelivery]) -> (Mood, u64, Vec<RawDelivery>) {
    let strength = group.iter().map(|d| d.strength).max().expect("non-empty delivery group");
    let strongest: Vec<RawDelivery> = group.iter().copied().filter(|d| d.strength == strength).collect();
    let winners: Vec<RawDelivery> = if strongest.iter().any(|d| d.kind == EdgeKind::Informal) {
        strongest.into_iter().filter(|d| d.kind == EdgeKind::Informal).collect()
    } else {
        strongest
    };
    let mood = winners[0].mood;
    let resolved = if winners.iter().all(|d| d.mood == mood) { mood } else { Mood::Neutral };
    (resolved, strength, winners)
}
