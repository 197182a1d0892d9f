use std::fmt::Write;

use super::layout::{layout, Point};
use super::RenderOptions;
use crate::analysis::EdgeKind;
use crate::model::{EntityId, OrgModel};

const MARGIN: f64 = 40.0;
const SLOT: f64 = 120.0;
const LAYER: f64 = 130.0;
const RADIUS: f64 = 28.0;
const STROKE_GAP: f64 = 4.0;
const ARROW: f64 = 10.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn canvas(p: Point) -> Point {
    Point { x: MARGIN + RADIUS + p.x * SLOT, y: MARGIN + RADIUS + p.y * LAYER }
}

fn unit(a: Point, b: Point) -> (f64, f64) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len = (dx * dx + dy * dy).sqrt();
    (dx / len, dy / len)
}

fn arrowhead(out: &mut String, tip: Point, (ux, uy): (f64, f64), class: &str) {
    let base = Point { x: tip.x - ux * ARROW, y: tip.y - uy * ARROW };
    let (px, py) = (-uy * ARROW / 2.0, ux * ARROW / 2.0);
    let _ = writeln!(
        out,
        "    <polygon class=\"{class}\" points=\"{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}\"/>",
        tip.x,
        tip.y,
        base.x + px,
        base.y + py,
        base.x - px,
        base.y - py
    );
}

/// Standalone SVG 1.1 document over `layout(model)`. Formal power k is drawn
/// as min(k, cap) parallel strokes plus a `×k` numeral when k exceeds the cap.
pub fn to_svg(model: &OrgModel, opts: &RenderOptions) -> String {
    let plan = layout(model);
    let cap = opts.parallel_line_cap.get();
    let width = 2.0 * (MARGIN + RADIUS) + plan.width() * SLOT;
    let height = 2.0 * (MARGIN + RADIUS) + plan.layers.len().saturating_sub(1) as f64 * LAYER + 16.0;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.1}\" height=\"{height:.1}\" viewBox=\"0 0 {width:.1} {height:.1}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(out, "  <title>{}</title>", escape(model.name()));
    out.push_str("  <style>.power-stroke{stroke:#222;stroke-width:1.5}.arrow{fill:#222}.informal{fill:none;stroke:#555;stroke-width:1.5;stroke-dasharray:2 4}.informal.inactive{opacity:0.35}.open-arrow{fill:#fff;stroke:#555}.block{fill:#c00;font-size:18px;font-weight:bold}.entity circle{fill:#fff;stroke:#222;stroke-width:2}.title{font-size:11px;fill:#444}</style>\n");

    for f in model.formal() {
        let (a, b) = (canvas(plan.position(&f.superior)), canvas(plan.position(&f.subordinate)));
        let (ux, uy) = unit(a, b);
        let start = Point { x: a.x + ux * RADIUS, y: a.y + uy * RADIUS };
        let tip = Point { x: b.x - ux * RADIUS, y: b.y - uy * RADIUS };
        let end = Point { x: tip.x - ux * ARROW, y: tip.y - uy * ARROW };
        let _ = writeln!(
            out,
            "  <g class=\"formal\" data-from=\"{}\" data-to=\"{}\" data-power=\"{}\" data-blocked=\"{}\">",
            f.superior, f.subordinate, f.power, f.blocked
        );
        let strokes = f.power.min(cap);
        for i in 0..strokes {
            let off = (i as f64 - (strokes - 1) as f64 / 2.0) * STROKE_GAP;
            let (ox, oy) = (-uy * off, ux * off);
            let _ = writeln!(
                out,
                "    <line class=\"power-stroke\" x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\"/>",
                start.x + ox,
                start.y + oy,
                end.x + ox,
                end.y + oy
            );
        }
        arrowhead(&mut out, tip, (ux, uy), "arrow");
        let mid = Point { x: (start.x + tip.x) / 2.0, y: (start.y + tip.y) / 2.0 };
        if f.power > cap {
            let _ = writeln!(out, "    <text class=\"power-count\" x=\"{:.1}\" y=\"{:.1}\">\u{d7}{}</text>", mid.x + 10.0, mid.y - 6.0, f.power);
        }
        if f.blocked {
            let _ = writeln!(
                out,
                "    <text class=\"block\" x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" dominant-baseline=\"central\">\u{2717}</text>",
                mid.x, mid.y
            );
        }
        out.push_str("  </g>\n");
    }

    if opts.show_informal {
        for r in plan.routes.iter().filter(|r| r.kind == EdgeKind::Informal) {
            let e = model.informal_edge(r.from.as_str(), r.to.as_str()).expect("route matches an edge");
            let (a, bend, b) = (canvas(r.points[0]), canvas(r.points[1]), canvas(r.points[2]));
            let (sx, sy) = unit(a, bend);
            let (ex, ey) = unit(bend, b);
            let start = Point { x: a.x + sx * RADIUS, y: a.y + sy * RADIUS };
            let tip = Point { x: b.x - ex * RADIUS, y: b.y - ey * RADIUS };
            let end = Point { x: tip.x - ex * ARROW, y: tip.y - ey * ARROW };
            let class = if e.active { "informal" } else { "informal inactive" };
            let _ = writeln!(
                out,
                "  <g class=\"{class}\" data-from=\"{}\" data-to=\"{}\" data-strength=\"{}\" data-active=\"{}\">",
                e.source, e.target, e.strength, e.active
            );
            if let Some(note) = &e.note {
                let _ = writeln!(out, "    <title>{}</title>", escape(note));
            }
            let _ = writeln!(
                out,
                "    <path class=\"informal-line\" d=\"M {:.1} {:.1} Q {:.1} {:.1} {:.1} {:.1}\" fill=\"none\" stroke=\"#555\" stroke-width=\"{}\" stroke-dasharray=\"2 4\"/>",
                start.x,
                start.y,
                bend.x,
                bend.y,
                end.x,
                end.y,
                e.strength as f64 * 1.5
            );
            arrowhead(&mut out, tip, (ex, ey), "open-arrow");
            out.push_str("  </g>\n");
        }
    }

    for id in model.canonical_order() {
        let e = model.entity(id.as_str()).expect("ordered ids exist");
        let c = canvas(plan.position(&id));
        entity(&mut out, &id, c, e.display_name(), e.title.as_deref(), opts.show_moods.then(|| e.mood.emoji()));
    }
    out.push_str("</svg>\n");
    out
}

fn entity(out: &mut String, id: &EntityId, c: Point, name: &str, title: Option<&str>, emoji: Option<&str>) {
    let _ = writeln!(out, "  <g class=\"entity\" data-id=\"{id}\">");
    let _ = writeln!(out, "    <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"{RADIUS:.1}\"/>", c.x, c.y);
    let name_y = if emoji.is_some() { c.y - 4.0 } else { c.y + 4.0 };
    let _ = writeln!(out, "    <text class=\"name\" x=\"{:.1}\" y=\"{name_y:.1}\" text-anchor=\"middle\" font-size=\"12\">{}</text>", c.x, escape(name));
    if let Some(emoji) = emoji {
        let _ = writeln!(out, "    <text class=\"mood\" x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"16\">{emoji}</text>", c.x, c.y + 16.0);
    }
    if let Some(title) = title {
        let _ = writeln!(out, "    <text class=\"title\" x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", c.x, c.y + RADIUS + 14.0, escape(title));
    }
    out.push_str("  </g>\n");
}
