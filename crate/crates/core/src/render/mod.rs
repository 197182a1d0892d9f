//! DOT and SVG output for the organigram notation.

mod dot;
mod layout;
mod svg;

use std::num::NonZeroU64;

use serde::{Deserialize, Serialize};

pub use dot::to_dot;
pub use layout::{layout, LayoutPlan, Point, Route};
pub use svg::to_svg;

use crate::model::OrgModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Dot,
    #[default]
    Svg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub format: RenderFormat,
    pub show_moods: bool,
    pub show_informal: bool,
    pub parallel_line_cap: NonZeroU64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { format: RenderFormat::Svg, show_moods: true, show_informal: true, parallel_line_cap: NonZeroU64::new(4).unwrap() }
    }
}

pub fn render(model: &OrgModel, opts: &RenderOptions) -> String {
    match opts.format {
        RenderFormat::Dot => to_dot(model, opts),
        RenderFormat::Svg => to_svg(model, opts),
    }
}
