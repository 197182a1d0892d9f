//! Test support: a brute-force reference simulator for mood propagation and
//! seeded generators of small random organigrams.
//!
//! The simulator deliberately shares no code with `polorg_core::analysis`. It
//! reads the model through its public accessors, keeps the whole global state
//! in string-keyed maps and recomputes every round from scratch by scanning
//! all edges.

use std::collections::{BTreeMap, BTreeSet};

use polorg_core::model::{EntityDraft, FormalDraft, InformalDraft};
use polorg_core::{InfluenceMode, ModelDraft, Mood, OrgModel, Scenario};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefTermination {
    Fixpoint,
    Oscillation(usize),
    RoundCap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefOutcome {
    pub final_moods: BTreeMap<String, Mood>,
    pub termination: RefTermination,
    /// Number of mood changes in each round that carried deliveries.
    pub changes_per_round: Vec<usize>,
    /// Entities that changed in any round.
    pub changed: BTreeSet<String>,
}

fn score(m: Mood) -> i32 {
    match m {
        Mood::Happy => 1,
        Mood::Neutral => 0,
        Mood::Sad => -1,
    }
}

fn mood_of(score: i32) -> Mood {
    match score {
        1 => Mood::Happy,
        0 => Mood::Neutral,
        _ => Mood::Sad,
    }
}

/// A pending influence: (strength, informal?, mood).
type Pull = (u64, bool, Mood);

fn settle(pulls: &[Pull]) -> (Mood, u64) {
    let best = pulls.iter().map(|&(s, informal, _)| (s, informal)).max().unwrap();
    let moods: BTreeSet<Mood> = pulls.iter().filter(|&&(s, i, _)| (s, i) == best).map(|p| p.2).collect();
    let mood = if moods.len() == 1 { *moods.iter().next().unwrap() } else { Mood::Neutral };
    (mood, best.0)
}

/// Reference implementation of the propagation rules.
pub fn reference_propagate(model: &OrgModel, scenario: &Scenario) -> RefOutcome {
    let mut moods: BTreeMap<String, Mood> = model.entities().map(|e| (e.id.to_string(), e.mood)).collect();
    let mut emitters: BTreeSet<String> = BTreeSet::new();
    for (id, m) in &scenario.overrides {
        let cur = moods.get_mut(id.as_str()).unwrap();
        if *cur != *m {
            *cur = *m;
            emitters.insert(id.to_string());
        }
    }
    let active: Vec<(String, String, u64)> = model
        .informal()
        .iter()
        .filter(|e| *scenario.activations.get(&(e.source.clone(), e.target.clone())).unwrap_or(&e.active))
        .map(|e| (e.source.to_string(), e.target.to_string(), e.strength))
        .collect();
    let threshold = scenario.params.cascade_threshold.get();
    let cap = scenario.params.max_rounds.map(|n| n.get()).unwrap_or((4 * model.len()).max(1));

    let mut history = vec![moods.clone()];
    let mut changes_per_round = Vec::new();
    let mut changed_any = BTreeSet::new();
    let mut round = 0;
    loop {
        round += 1;
        if round > cap {
            return RefOutcome { final_moods: moods, termination: RefTermination::RoundCap, changes_per_round, changed: changed_any };
        }
        // Edge set of this round, deduplicated by (kind, source, target).
        let mut fired: BTreeMap<(bool, String, String), (u64, Mood)> = BTreeMap::new();
        for (s, t, w) in &active {
            let seed = round == 1 && moods[s] != Mood::Neutral && moods[s] != moods[t];
            if seed || emitters.contains(s) {
                fired.insert((true, s.clone(), t.clone()), (*w, moods[s]));
            }
        }
        for f in model.formal() {
            let s = f.superior.to_string();
            if emitters.contains(&s) && f.power >= threshold {
                fired.insert((false, s.clone(), f.subordinate.to_string()), (f.power, moods[&s]));
            }
        }
        if fired.is_empty() {
            return RefOutcome { final_moods: moods, termination: RefTermination::Fixpoint, changes_per_round, changed: changed_any };
        }
        let mut inbox: BTreeMap<String, Vec<Pull>> = BTreeMap::new();
        for ((informal, _, t), (w, m)) in fired {
            inbox.entry(t).or_default().push((w, informal, m));
        }
        let mut next = moods.clone();
        for (t, pulls) in &inbox {
            let (goal, strength) = settle(pulls);
            let after = match scenario.params.influence_mode {
                InfluenceMode::Adopt => goal,
                InfluenceMode::Graded => {
                    let (from, to) = (score(moods[t]), score(goal));
                    let steps = (strength.min(2)) as i32;
                    if from < to {
                        mood_of((from + steps).min(to))
                    } else {
                        mood_of((from - steps).max(to))
                    }
                }
            };
            next.insert(t.clone(), after);
        }
        emitters = next.iter().filter(|(k, v)| moods[*k] != **v).map(|(k, _)| k.clone()).collect();
        changes_per_round.push(emitters.len());
        changed_any.extend(emitters.iter().cloned());
        moods = next;
        if emitters.is_empty() {
            return RefOutcome { final_moods: moods, termination: RefTermination::Fixpoint, changes_per_round, changed: changed_any };
        }
        if let Some(pos) = history.iter().position(|h| *h == moods) {
            return RefOutcome {
                final_moods: moods,
                termination: RefTermination::Oscillation(round - pos),
                changes_per_round,
                changed: changed_any,
            };
        }
        history.push(moods.clone());
    }
}

const NAMES: [&str; 12] = ["A", "B", "C", "D", "E", "F", "G", "H", "ceo", "cfo", "x1", "Zed"];

/// A random valid model with `1..=max_entities` entities: a random forest
/// of formal edges, random informal edges and random moods.
pub fn random_model(rng: &mut impl Rng, max_entities: usize) -> OrgModel {
    let n = rng.random_range(1..=max_entities);
    let mut names: Vec<&str> = NAMES.to_vec();
    names.shuffle(rng);
    names.truncate(n);

    let mut draft = ModelDraft::new(format!("random {n}"));
    for name in &names {
        draft.entities.push(EntityDraft {
            id: name.to_string(),
            mood: *Mood::ALL.choose(rng).unwrap(),
            label: rng.random_bool(0.2).then(|| format!("Label of {name}")),
            title: rng.random_bool(0.2).then(|| "Head \"of\" things".to_string()),
            span: None,
        });
    }
    for i in 1..n {
        if rng.random_bool(0.75) {
            let parent = rng.random_range(0..i);
            draft.formal.push(FormalDraft {
                superior: names[parent].to_string(),
                subordinate: names[i].to_string(),
                power: rng.random_range(1..=4),
                blocked: rng.random_bool(0.2),
                span: None,
            });
        }
    }
    if n > 1 {
        let mut pairs = BTreeSet::new();
        for _ in 0..rng.random_range(0..=n + 2) {
            let s = rng.random_range(0..n);
            let t = rng.random_range(0..n);
            if s != t && pairs.insert((s, t)) {
                draft.informal.push(InformalDraft {
                    source: names[s].to_string(),
                    target: names[t].to_string(),
                    strength: rng.random_range(1..=3),
                    active: rng.random_bool(0.8),
                    note: rng.random_bool(0.1).then(|| "back channel # not a comment".to_string()),
                    span: None,
                });
            }
        }
    }
    draft.build().expect("generator produces valid models")
}

/// A random scenario valid for `model`.
pub fn random_scenario(rng: &mut impl Rng, model: &OrgModel) -> Scenario {
    let mut s = Scenario::default();
    for e in model.informal() {
        if rng.random_bool(0.2) {
            s.activations.insert((e.source.clone(), e.target.clone()), rng.random_bool(0.5));
        }
    }
    for e in model.entities() {
        if rng.random_bool(0.1) {
            s.overrides.insert(e.id.clone(), *Mood::ALL.choose(rng).unwrap());
        }
    }
    s.params.cascade_threshold = std::num::NonZeroU64::new(rng.random_range(1..=3)).unwrap();
    if rng.random_bool(0.25) {
        s.params.influence_mode = InfluenceMode::Graded;
    }
    s
}

/// The seeded oracle family: `count` (model, scenario) pairs with at most
/// eight entities each.
pub fn oracle_family(seed: u64, count: usize) -> Vec<(OrgModel, Scenario)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = random_model(&mut rng, 8);
            let s = random_scenario(&mut rng, &m);
            (m, s)
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed used by the acceptance family.
pub const FAMILY_SEED: u64 = 0x0067_7261_6d73;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settle_rules() {
        assert_eq!(settle(&[(2, false, Mood::Sad), (1, true, Mood::Happy)]), (Mood::Sad, 2));
        assert_eq!(settle(&[(2, false, Mood::Sad), (2, true, Mood::Happy)]), (Mood::Happy, 2));
        assert_eq!(settle(&[(1, true, Mood::Sad), (1, true, Mood::Happy)]), (Mood::Neutral, 1));
    }

    #[test]
    fn family_is_reproducible() {
        let a = oracle_family(7, 20);
        let b = oracle_family(7, 20);
        assert_eq!(a, b);
        assert!(a.iter().all(|(m, _)| m.len() <= 8));
    }
}
