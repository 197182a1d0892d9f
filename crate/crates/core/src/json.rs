//! JSON projection of a model, shared by the HTTP service and `--json`
//! output. Entities are an object keyed by id; edges are arrays.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostic::{Code, Diagnostic, Span};
use crate::model::{EntityDraft, FormalDraft, InformalDraft, ModelDraft, Mood, OrgModel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub name: String,
    pub entities: BTreeMap<String, EntityJson>,
    #[serde(default)]
    pub formal: Vec<FormalJson>,
    #[serde(default)]
    pub informal: Vec<InformalJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default)]
    pub mood: Mood,
}

fn one() -> u64 {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormalJson {
    pub superior: String,
    pub subordinate: String,
    #[serde(default = "one")]
    pub power: u64,
    #[serde(default)]
    pub blocked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InformalJson {
    pub source: String,
    pub target: String,
    #[serde(default = "one")]
    pub strength: u64,
    #[serde(default = "yes")]
    pub active: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&OrgModel> for ModelJson {
    fn from(m: &OrgModel) -> Self {
        ModelJson {
            name: m.name().to_string(),
            entities: m
                .entities()
                .map(|e| (e.id.to_string(), EntityJson { label: e.label.clone(), title: e.title.clone(), mood: e.mood }))
                .collect(),
            formal: m
                .formal()
                .iter()
                .map(|f| FormalJson {
                    superior: f.superior.to_string(),
                    subordinate: f.subordinate.to_string(),
                    power: f.power,
                    blocked: f.blocked,
                })
                .collect(),
            informal: m
                .informal()
                .iter()
                .map(|i| InformalJson {
                    source: i.source.to_string(),
                    target: i.target.to_string(),
                    strength: i.strength,
                    active: i.active,
                    note: i.note.clone(),
                })
                .collect(),
        }
    }
}

impl ModelJson {
    pub fn into_draft(self) -> ModelDraft {
        ModelDraft {
            name: self.name,
            entities: self
                .entities
                .into_iter()
                .map(|(id, e)| EntityDraft { id, label: e.label, title: e.title, mood: e.mood, span: None })
                .collect(),
            formal: self
                .formal
                .into_iter()
                .map(|f| FormalDraft { superior: f.superior, subordinate: f.subordinate, power: f.power, blocked: f.blocked, span: None })
                .collect(),
            informal: self
                .informal
                .into_iter()
                .map(|i| InformalDraft {
                    source: i.source,
                    target: i.target,
                    strength: i.strength,
                    active: i.active,
                    note: i.note,
                    span: None,
                })
                .collect(),
        }
    }
}

/// Parses and validates a JSON model. Malformed JSON yields a single
/// E-SYNTAX diagnostic at the decoder's position.
pub fn model_from_json(text: &str) -> Result<OrgModel, Vec<Diagnostic>> {
    let json: ModelJson = serde_json::from_str(text).map_err(|e| {
        let span = (e.line() > 0).then(|| Span { line: e.line(), column: e.column().max(1), length: 1 });
        vec![Diagnostic::new(Code::Syntax, format!("invalid JSON model: {e}"), span)]
    })?;
    json.into_draft().build()
}

pub fn model_to_json(model: &OrgModel) -> serde_json::Value {
    serde_json::to_value(ModelJson::from(model)).expect("model projection serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_str;

    #[test]
    fn paper_round_trip() {
        let m = parse_str(include_str!("../../../fixtures/paper.pog")).model.unwrap();
        let text = serde_json::to_string(&ModelJson::from(&m)).unwrap();
        assert_eq!(model_from_json(&text).unwrap(), m);
    }

    #[test]
    fn defaults_apply() {
        let m = model_from_json(r#"{"name":"x","entities":{"A":{},"B":{"mood":"sad"}},"formal":[{"superior":"A","subordinate":"B"}]}"#).unwrap();
        assert_eq!(m.formal()[0].power, 1);
        assert_eq!(m.entity("A").unwrap().mood, Mood::Neutral);
    }

    #[test]
    fn invalid_models_report_diagnostics() {
        let err = model_from_json(r#"{"name":"x","entities":{"A":{}},"formal":[{"superior":"A","subordinate":"A"}]}"#).unwrap_err();
        assert_eq!(err[0].code, Code::SelfLoop);
        let err = model_from_json("{\"name\": 3}").unwrap_err();
        assert_eq!(err[0].code, Code::Syntax);
        assert_eq!(err[0].span.unwrap().line, 1);
        let err = model_from_json(r#"{"name":"x","entities":{"1a":{}}}"#).unwrap_err();
        assert_eq!(err[0].code, Code::BadId);
    }
}
