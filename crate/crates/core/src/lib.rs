//! Political organigrams: a validated model of formal power, informal
//! influence and stakeholder moods, with a text syntax, a deterministic
//! mood-propagation engine, influence and access analyses, and DOT/SVG
//! renderers.

pub mod analysis;
pub mod diagnostic;
pub mod dsl;
pub mod error;
pub mod json;
mod lexer;
pub mod model;
pub mod redact;
pub mod render;
pub mod scenario;

pub use analysis::{access_report, diff_moods, influence_rank, propagate, whatif, AccessStatus, PropagationTrace, Termination};
pub use diagnostic::{Code, Diagnostic, Severity, Span};
pub use dsl::{format, parse, parse_str, ParseResult, SourceText};
pub use error::{Error, Result};
pub use json::{model_from_json, model_to_json, ModelJson};
pub use model::{validate, Entity, EntityId, FormalEdge, InformalEdge, ModelDraft, Mood, OrgModel};
pub use redact::redact;
pub use render::{layout, render, to_dot, to_svg, LayoutPlan, RenderFormat, RenderOptions};
pub use scenario::{parse_scenario, InfluenceMode, PropagationParams, Scenario};
