//! The validated political organigram.
//!
//! A [`ModelDraft`] is the unchecked candidate produced by the parser or the
//! JSON projection. [`validate`] reports every violated invariant and
//! [`ModelDraft::build`] turns a clean draft into an immutable [`OrgModel`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};

use crate::diagnostic::{sort_diagnostics, Code, Diagnostic, Span};
use crate::error::{Error, Result};

/// Entity identifier: an ASCII letter followed by ASCII letters, digits or
/// underscores. Ordering is byte-wise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EntityId(String);

impl EntityId {
    pub fn new(value: impl Into<String>) -> Result<Self> {
        let value = value.into();
        if Self::is_valid(&value) {
            Ok(EntityId(value))
        } else {
            Err(Error::BadId(value))
        }
    }

    pub fn is_valid(value: &str) -> bool {
        let mut chars = value.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
            _ => false,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for EntityId {
    type Error = String;

    fn try_from(value: String) -> std::result::Result<Self, String> {
        if EntityId::is_valid(&value) {
            Ok(EntityId(value))
        } else {
            Err(format!("invalid entity id `{value}`"))
        }
    }
}

impl From<EntityId> for String {
    fn from(id: EntityId) -> String {
        id.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for EntityId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Stakeholder stance towards the current requirements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mood {
    Happy,
    Sad,
    #[default]
    Neutral,
}

impl Mood {
    pub const ALL: [Mood; 3] = [Mood::Happy, Mood::Sad, Mood::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Mood::Happy => "happy",
            Mood::Sad => "sad",
            Mood::Neutral => "neutral",
        }
    }

    pub fn parse(s: &str) -> Option<Mood> {
        match s {
            "happy" => Some(Mood::Happy),
            "sad" => Some(Mood::Sad),
            "neutral" => Some(Mood::Neutral),
            _ => None,
        }
    }

    /// Position on the Happy–Neutral–Sad scale.
    fn rank(self) -> i8 {
        match self {
            Mood::Happy => 1,
            Mood::Neutral => 0,
            Mood::Sad => -1,
        }
    }

    fn from_rank(rank: i8) -> Mood {
        match rank {
            r if r > 0 => Mood::Happy,
            0 => Mood::Neutral,
            _ => Mood::Sad,
        }
    }

    /// Moves up to `steps` positions towards `goal` along Happy ↔ Neutral ↔ Sad.
    pub fn step_towards(self, goal: Mood, steps: u64) -> Mood {
        let (from, to) = (self.rank(), goal.rank());
        let distance = (to - from).unsigned_abs() as u64;
        let moved = distance.min(steps) as i8;
        Mood::from_rank(from + moved * (to - from).signum())
    }

    pub fn emoji(self) -> &'static str {
        match self {
            Mood::Happy => "\u{1F60A}",
            Mood::Sad => "\u{2639}",
            Mood::Neutral => "\u{1F610}",
        }
    }
}

impl fmt::Display for Mood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mood::Happy => "Happy",
            Mood::Sad => "Sad",
            Mood::Neutral => "Neutral",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entity {
    pub id: EntityId,
    pub label: Option<String>,
    pub title: Option<String>,
    pub mood: Mood,
}

impl Entity {
    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(self.id.as_str())
    }
}

/// Formal power relationship. `power` counts the parallel lines of the
/// notation; `blocked` marks power to block access to the subordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormalEdge {
    pub superior: EntityId,
    pub subordinate: EntityId,
    pub power: u64,
    pub blocked: bool,
}

/// Directed informal influence of `source` on `target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InformalEdge {
    pub source: EntityId,
    pub target: EntityId,
    pub strength: u64,
    pub active: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntityDraft {
    pub id: String,
    pub label: Option<String>,
    pub title: Option<String>,
    pub mood: Mood,
    pub span: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalDraft {
    pub superior: String,
    pub subordinate: String,
    pub power: u64,
    pub blocked: bool,
    pub span: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformalDraft {
    pub source: String,
    pub target: String,
    pub strength: u64,
    pub active: bool,
    pub note: Option<String>,
    pub span: Option<Span>,
}

impl FormalDraft {
    pub fn new(superior: &str, subordinate: &str, power: u64) -> Self {
        FormalDraft { superior: superior.into(), subordinate: subordinate.into(), power, blocked: false, span: None }
    }
}

impl InformalDraft {
    pub fn new(source: &str, target: &str) -> Self {
        InformalDraft { source: source.into(), target: target.into(), strength: 1, active: true, note: None, span: None }
    }
}

/// An organigram candidate that may violate any invariant.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelDraft {
    pub name: String,
    pub entities: Vec<EntityDraft>,
    pub formal: Vec<FormalDraft>,
    pub informal: Vec<InformalDraft>,
}

impl ModelDraft {
    pub fn new(name: impl Into<String>) -> Self {
        ModelDraft { name: name.into(), ..Default::default() }
    }

    pub fn entity(mut self, id: &str, mood: Mood) -> Self {
        self.entities.push(EntityDraft { id: id.into(), mood, ..Default::default() });
        self
    }

    pub fn formal(mut self, superior: &str, subordinate: &str, power: u64) -> Self {
        self.formal.push(FormalDraft::new(superior, subordinate, power));
        self
    }

    pub fn informal(mut self, source: &str, target: &str) -> Self {
        self.informal.push(InformalDraft::new(source, target));
        self
    }

    /// Validates and freezes the draft. Warnings never block construction.
    pub fn build(self) -> Result<OrgModel, Vec<Diagnostic>> {
        let diags: Vec<_> = validate(&self).into_iter().filter(Diagnostic::is_error).collect();
        if !diags.is_empty() {
            return Err(diags);
        }
        let id = |s: String| EntityId(s);
        let entities = self
            .entities
            .into_iter()
            .map(|e| {
                let ent = Entity { id: id(e.id), label: e.label, title: e.title, mood: e.mood };
                (ent.id.clone(), ent)
            })
            .collect();
        let mut formal: Vec<_> = self
            .formal
            .into_iter()
            .map(|f| FormalEdge { superior: id(f.superior), subordinate: id(f.subordinate), power: f.power, blocked: f.blocked })
            .collect();
        formal.sort_by(|a, b| (&a.superior, &a.subordinate).cmp(&(&b.superior, &b.subordinate)));
        let mut informal: Vec<_> = self
            .informal
            .into_iter()
            .map(|i| InformalEdge { source: id(i.source), target: id(i.target), strength: i.strength, active: i.active, note: i.note })
            .collect();
        informal.sort_by(|a, b| (&a.source, &a.target).cmp(&(&b.source, &b.target)));
        Ok(OrgModel::assemble(self.name, entities, formal, informal))
    }
}

/// Reports every invariant violation of a candidate model, in deterministic
/// order. An empty result means [`ModelDraft::build`] succeeds.
pub fn validate(draft: &ModelDraft) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut declared: HashMap<&str, Option<Span>> = HashMap::new();

    for e in &draft.entities {
        if !EntityId::is_valid(&e.id) {
            out.push(Diagnostic::new(Code::BadId, format!("invalid entity id `{}`", e.id), e.span));
        }
        for (what, text) in [("label", &e.label), ("title", &e.title)] {
            if text.as_deref() == Some("") {
                out.push(Diagnostic::new(Code::EmptyText, format!("empty {what} on entity `{}`", e.id), e.span));
            }
        }
        if declared.insert(&e.id, e.span).is_some() {
            out.push(Diagnostic::new(Code::DupEntity, format!("entity `{}` declared more than once", e.id), e.span));
        }
    }

    let endpoint_check = |out: &mut Vec<Diagnostic>, ids: [&str; 2], span: Option<Span>| -> bool {
        let mut ok = true;
        for id in ids {
            if !declared.contains_key(id) {
                out.push(Diagnostic::new(Code::UnknownEntity, format!("unknown entity `{id}`"), span));
                ok = false;
            }
        }
        ok
    };

    // Formal edges that pass the local checks take part in the forest checks.
    let mut structural: Vec<&FormalDraft> = Vec::new();
    let mut seen_formal = BTreeSet::new();
    for f in &draft.formal {
        let mut ok = endpoint_check(&mut out, [&f.superior, &f.subordinate], f.span);
        if f.superior == f.subordinate {
            out.push(Diagnostic::new(Code::SelfLoop, format!("formal edge `{0} -> {0}` is a self-loop", f.superior), f.span));
            ok = false;
        }
        if f.power == 0 {
            out.push(Diagnostic::new(Code::BadPower, format!("formal edge `{} -> {}` needs power >= 1", f.superior, f.subordinate), f.span));
        }
        if !seen_formal.insert((f.superior.as_str(), f.subordinate.as_str())) {
            out.push(Diagnostic::new(Code::DupEdge, format!("duplicate formal edge `{} -> {}`", f.superior, f.subordinate), f.span));
            ok = false;
        }
        if ok {
            structural.push(f);
        }
    }

    let mut superiors: HashMap<&str, Vec<&str>> = HashMap::new();
    for f in &structural {
        let sups = superiors.entry(f.subordinate.as_str()).or_default();
        sups.push(f.superior.as_str());
        if sups.len() > 1 {
            out.push(Diagnostic::new(
                Code::MultiSuperior,
                format!("entity `{}` has more than one formal superior ({})", f.subordinate, sups.join(", ")),
                f.span,
            ));
        }
    }

    let mut graph = DiGraphMap::<&str, ()>::new();
    for f in &structural {
        graph.add_edge(f.superior.as_str(), f.subordinate.as_str(), ());
    }
    for scc in tarjan_scc(&graph) {
        if scc.len() < 2 {
            continue;
        }
        let members: BTreeSet<&str> = scc.iter().copied().collect();
        let span = structural
            .iter()
            .filter(|f| members.contains(f.superior.as_str()) && members.contains(f.subordinate.as_str()))
            .filter_map(|f| f.span)
            .min();
        let names: Vec<&str> = members.into_iter().collect();
        out.push(Diagnostic::new(Code::FormalCycle, format!("formal edges form a cycle through {}", names.join(", ")), span));
    }

    let mut seen_informal = BTreeSet::new();
    for i in &draft.informal {
        endpoint_check(&mut out, [&i.source, &i.target], i.span);
        if i.source == i.target {
            out.push(Diagnostic::new(Code::SelfLoop, format!("informal edge `{0} ~> {0}` is a self-loop", i.source), i.span));
        }
        if i.strength == 0 {
            out.push(Diagnostic::new(Code::BadPower, format!("informal edge `{} ~> {}` needs strength >= 1", i.source, i.target), i.span));
        }
        if i.note.as_deref() == Some("") {
            out.push(Diagnostic::new(Code::EmptyText, format!("empty note on informal edge `{} ~> {}`", i.source, i.target), i.span));
        }
        if !seen_informal.insert((i.source.as_str(), i.target.as_str())) {
            out.push(Diagnostic::new(Code::DupEdge, format!("duplicate informal edge `{} ~> {}`", i.source, i.target), i.span));
        }
    }

    sort_diagnostics(&mut out);
    out
}

/// A validated, immutable political organigram. Edge lists are kept sorted
/// by endpoint pair so structural equality ignores input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrgModel {
    name: String,
    entities: BTreeMap<EntityId, Entity>,
    formal: Vec<FormalEdge>,
    informal: Vec<InformalEdge>,
    superior: BTreeMap<EntityId, EntityId>,
    depth: BTreeMap<EntityId, usize>,
}

impl OrgModel {
    fn assemble(
        name: String,
        entities: BTreeMap<EntityId, Entity>,
        formal: Vec<FormalEdge>,
        informal: Vec<InformalEdge>,
    ) -> Self {
        let superior: BTreeMap<_, _> = formal.iter().map(|f| (f.subordinate.clone(), f.superior.clone())).collect();
        let mut depth = BTreeMap::new();
        for id in entities.keys() {
            let mut d = 0;
            let mut cur = id;
            while let Some(up) = superior.get(cur) {
                d += 1;
                cur = up;
            }
            depth.insert(id.clone(), d);
        }
        OrgModel { name, entities, formal, informal, superior, depth }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        OrgModel::assemble(name.into(), BTreeMap::new(), Vec::new(), Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entities.contains_key(id)
    }

    /// Looks up the canonical id value for `id`.
    pub fn id(&self, id: &str) -> Result<&EntityId> {
        self.entities.get_key_value(id).map(|(k, _)| k).ok_or_else(|| Error::UnknownEntity(id.to_string()))
    }

    pub fn formal(&self) -> &[FormalEdge] {
        &self.formal
    }

    pub fn informal(&self) -> &[InformalEdge] {
        &self.informal
    }

    pub fn informal_edge(&self, source: &str, target: &str) -> Option<&InformalEdge> {
        self.informal.iter().find(|e| e.source.as_str() == source && e.target.as_str() == target)
    }

    pub fn superior_of(&self, id: &str) -> Option<&EntityId> {
        self.superior.get(id)
    }

    /// Number of formal superior links between `id` and its root.
    pub fn depth(&self, id: &str) -> Result<usize> {
        self.depth.get(id).copied().ok_or_else(|| Error::UnknownEntity(id.to_string()))
    }

    /// Entities sorted by depth, then id. Every analysis uses this order to
    /// break ties.
    pub fn canonical_order(&self) -> Vec<EntityId> {
        let mut ids: Vec<&EntityId> = self.entities.keys().collect();
        ids.sort_by_key(|id| (self.depth[*id], *id));
        ids.into_iter().cloned().collect()
    }

    pub fn moods(&self) -> BTreeMap<EntityId, Mood> {
        self.entities.iter().map(|(id, e)| (id.clone(), e.mood)).collect()
    }

    /// Copy of the model with moods replaced for the listed entities.
    /// Unknown ids are ignored.
    pub fn with_moods(&self, moods: &BTreeMap<EntityId, Mood>) -> OrgModel {
        let mut next = self.clone();
        for (id, mood) in moods {
            if let Some(e) = next.entities.get_mut(id) {
                e.mood = *mood;
            }
        }
        next
    }

    pub fn to_draft(&self) -> ModelDraft {
        ModelDraft {
            name: self.name.clone(),
            entities: self
                .entities
                .values()
                .map(|e| EntityDraft {
                    id: e.id.to_string(),
                    label: e.label.clone(),
                    title: e.title.clone(),
                    mood: e.mood,
                    span: None,
                })
                .collect(),
            formal: self
                .formal
                .iter()
                .map(|f| FormalDraft {
                    superior: f.superior.to_string(),
                    subordinate: f.subordinate.to_string(),
                    power: f.power,
                    blocked: f.blocked,
                    span: None,
                })
                .collect(),
            informal: self
                .informal
                .iter()
                .map(|i| InformalDraft {
                    source: i.source.to_string(),
                    target: i.target.to_string(),
                    strength: i.strength,
                    active: i.active,
                    note: i.note.clone(),
                    span: None,
                })
                .collect(),
        }
    }
}
