//! What-if scenarios: informal-edge toggles, mood overrides and propagation
//! parameters, plus the scenario file syntax.
//!
//! ```text
//! scenario "leak"
//! activate D ~> A
//! override C mood=sad
//! param cascade_threshold=3
//! param mode=graded
//! ```

use std::collections::BTreeMap;
use std::num::{NonZeroU64, NonZeroUsize};

use serde::{Deserialize, Serialize};

use crate::diagnostic::{has_errors, sort_diagnostics, Code, Diagnostic};
use crate::dsl::{int_value, mood_value, AttrError};
use crate::error::{Error, Result};
use crate::lexer::{eol, lex_line, statement_span, unexpected, Tok, Token};
use crate::model::{EntityId, Mood, OrgModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfluenceMode {
    /// The target takes the resolved mood outright.
    #[default]
    Adopt,
    /// The target moves one mood step per point of winning strength.
    Graded,
}

impl InfluenceMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "adopt" => Some(InfluenceMode::Adopt),
            "graded" => Some(InfluenceMode::Graded),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagationParams {
    /// Minimum formal power at which a superior's mood change cascades.
    pub cascade_threshold: NonZeroU64,
    #[serde(rename = "mode")]
    pub influence_mode: InfluenceMode,
    /// Round cap; `None` means four rounds per entity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<NonZeroUsize>,
}

impl Default for PropagationParams {
    fn default() -> Self {
        PropagationParams { cascade_threshold: NonZeroU64::new(2).unwrap(), influence_mode: InfluenceMode::Adopt, max_rounds: None }
    }
}

impl PropagationParams {
    pub fn with_threshold(threshold: u64) -> Self {
        PropagationParams { cascade_threshold: NonZeroU64::new(threshold.max(1)).unwrap(), ..Default::default() }
    }

    pub fn round_cap(&self, entity_count: usize) -> usize {
        self.max_rounds.map_or((4 * entity_count).max(1), NonZeroUsize::get)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    /// Overrides of `InformalEdge::active`, keyed by (source, target).
    pub activations: BTreeMap<(EntityId, EntityId), bool>,
    /// Moods applied before the first round.
    pub overrides: BTreeMap<EntityId, Mood>,
    pub params: PropagationParams,
}

impl Scenario {
    pub fn activate(mut self, source: &str, target: &str, active: bool) -> Result<Self> {
        self.activations.insert((EntityId::new(source)?, EntityId::new(target)?), active);
        Ok(self)
    }

    pub fn override_mood(mut self, id: &str, mood: Mood) -> Result<Self> {
        self.overrides.insert(EntityId::new(id)?, mood);
        Ok(self)
    }

    /// Checks that every referenced entity and informal edge exists.
    pub fn check(&self, model: &OrgModel) -> Result<()> {
        for (source, target) in self.activations.keys() {
            if model.informal_edge(source.as_str(), target.as_str()).is_none() {
                return Err(Error::UnknownEdge(source.to_string(), target.to_string()));
            }
        }
        for id in self.overrides.keys() {
            if !model.contains(id.as_str()) {
                return Err(Error::UnknownEntity(id.to_string()));
            }
        }
        Ok(())
    }

    /// Whether the informal edge `source ~> target` is active under this scenario.
    pub fn is_active(&self, source: &EntityId, target: &EntityId, default: bool) -> bool {
        self.activations.get(&(source.clone(), target.clone())).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Activation {
    pub source: EntityId,
    pub target: EntityId,
    pub active: bool,
}

/// JSON shape of a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioJson {
    pub activations: Vec<Activation>,
    pub overrides: BTreeMap<EntityId, Mood>,
    pub params: PropagationParams,
}

impl From<&Scenario> for ScenarioJson {
    fn from(s: &Scenario) -> Self {
        ScenarioJson {
            activations: s
                .activations
                .iter()
                .map(|((source, target), active)| Activation { source: source.clone(), target: target.clone(), active: *active })
                .collect(),
            overrides: s.overrides.clone(),
            params: s.params,
        }
    }
}

impl From<ScenarioJson> for Scenario {
    fn from(j: ScenarioJson) -> Self {
        Scenario {
            activations: j.activations.into_iter().map(|a| ((a.source, a.target), a.active)).collect(),
            overrides: j.overrides,
            params: j.params,
        }
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ScenarioJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        ScenarioJson::deserialize(deserializer).map(Scenario::from)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParse {
    pub name: Option<String>,
    pub scenario: Option<Scenario>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses scenario file text. Entity and edge references are checked later,
/// against a model, by [`Scenario::check`].
pub fn parse_scenario(text: &str) -> ScenarioParse {
    let mut scenario = Scenario::default();
    let mut name = None;
    let mut diags = Vec::new();
    let mut statements = 0;

    for (idx, line) in text.lines().enumerate() {
        let tokens = match lex_line(line, idx + 1) {
            Ok(t) if t.is_empty() => continue,
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        statements += 1;
        let keyword = match &tokens[0].tok {
            Tok::Ident(k) => k.clone(),
            _ => {
                diags.push(unexpected(&tokens[0], "statement keyword"));
                continue;
            }
        };
        let result = match keyword.as_str() {
            "scenario" if statements == 1 => match (tokens.get(1), tokens.len()) {
                (Some(Token { tok: Tok::Str(n), .. }), 2) => {
                    name = Some(n.clone());
                    Ok(())
                }
                (Some(t), 2) => Err(unexpected(t, "quoted scenario name")),
                (None, _) => Err(eol(&tokens, "quoted scenario name")),
                _ => Err(unexpected(&tokens[2], "end of line")),
            },
            "scenario" => Err(Diagnostic::new(Code::Syntax, "`scenario` header must come first", Some(statement_span(&tokens)))),
            "activate" | "deactivate" => parse_toggle(&tokens).map(|(s, t)| {
                let key = (s, t);
                if scenario.activations.contains_key(&key) {
                    diags.push(Diagnostic::new(
                        Code::DupAttr,
                        format!("edge `{} ~> {}` toggled more than once; last wins", key.0, key.1),
                        Some(statement_span(&tokens)),
                    ));
                }
                scenario.activations.insert(key, keyword == "activate");
            }),
            "override" => parse_override(&tokens).map(|(id, mood)| {
                scenario.overrides.insert(id, mood);
            }),
            "param" => parse_param(&tokens, &mut scenario.params, &mut diags),
            other => Err(Diagnostic::new(Code::Syntax, format!("unknown scenario statement `{other}`"), Some(tokens[0].span))),
        };
        if let Err(d) = result {
            diags.push(d);
        }
    }
    sort_diagnostics(&mut diags);
    let scenario = (!has_errors(&diags)).then_some(scenario);
    ScenarioParse { name, scenario, diagnostics: diags }
}

fn id_at(tokens: &[Token], i: usize) -> std::result::Result<EntityId, Diagnostic> {
    match tokens.get(i) {
        Some(Token { tok: Tok::Ident(id), .. }) => Ok(EntityId::new(id.clone()).expect("lexer identifiers are valid ids")),
        Some(other) => Err(unexpected(other, "entity id")),
        None => Err(eol(tokens, "entity id")),
    }
}

fn parse_toggle(tokens: &[Token]) -> std::result::Result<(EntityId, EntityId), Diagnostic> {
    let source = id_at(tokens, 1)?;
    match tokens.get(2) {
        Some(t) if t.tok == Tok::Squiggle => {}
        Some(t) => return Err(unexpected(t, "`~>`")),
        None => return Err(eol(tokens, "`~>`")),
    }
    let target = id_at(tokens, 3)?;
    if let Some(extra) = tokens.get(4) {
        return Err(unexpected(extra, "end of line"));
    }
    Ok((source, target))
}

/// `KEY = VALUE` starting at `tokens[i]`, ending the line.
fn key_value(tokens: &[Token], i: usize) -> std::result::Result<(&str, &Token), Diagnostic> {
    let key = match tokens.get(i) {
        Some(Token { tok: Tok::Ident(k), .. }) => k.as_str(),
        Some(other) => return Err(unexpected(other, "parameter name")),
        None => return Err(eol(tokens, "parameter name")),
    };
    match tokens.get(i + 1) {
        Some(t) if t.tok == Tok::Eq => {}
        Some(t) => return Err(unexpected(t, "`=`")),
        None => return Err(eol(tokens, "`=`")),
    }
    let value = tokens.get(i + 2).ok_or_else(|| eol(tokens, "value"))?;
    if let Some(extra) = tokens.get(i + 3) {
        return Err(unexpected(extra, "end of line"));
    }
    Ok((key, value))
}

fn lift(value: &Token) -> impl FnOnce(AttrError) -> Diagnostic + '_ {
    move |(code, msg)| Diagnostic::new(code, msg, Some(value.span))
}

fn parse_override(tokens: &[Token]) -> std::result::Result<(EntityId, Mood), Diagnostic> {
    let id = id_at(tokens, 1)?;
    let (key, value) = key_value(tokens, 2)?;
    if key != "mood" {
        return Err(Diagnostic::new(Code::Syntax, format!("expected `mood=`, found `{key}`"), Some(tokens[2].span)));
    }
    let mood = mood_value(key, &value.tok).map_err(lift(value))?;
    Ok((id, mood))
}

fn parse_param(tokens: &[Token], params: &mut PropagationParams, diags: &mut Vec<Diagnostic>) -> std::result::Result<(), Diagnostic> {
    let (key, value) = key_value(tokens, 1)?;
    let positive = |v: u64| (v >= 1).then_some(v).ok_or_else(|| Diagnostic::new(Code::BadPower, format!("`{key}` must be >= 1"), Some(value.span)));
    match key {
        "cascade_threshold" | "threshold" => {
            let n = positive(int_value(key, &value.tok).map_err(lift(value))?)?;
            params.cascade_threshold = NonZeroU64::new(n).unwrap();
        }
        "max_rounds" => {
            let n = positive(int_value(key, &value.tok).map_err(lift(value))?)?;
            params.max_rounds = NonZeroUsize::new(usize::try_from(n).unwrap_or(usize::MAX));
        }
        "mode" => {
            let mode = match &value.tok {
                Tok::Ident(s) => InfluenceMode::parse(s),
                _ => None,
            };
            params.influence_mode = mode.ok_or_else(|| {
                Diagnostic::new(Code::Syntax, format!("`mode` expects adopt or graded, found {}", value.tok.describe()), Some(value.span))
            })?;
        }
        other => diags.push(Diagnostic::new(Code::UnknownAttr, format!("unknown parameter `{other}` ignored"), Some(tokens[1].span))),
    }
    Ok(())
}
