use std::fmt::Write;

use super::RenderOptions;
use crate::model::{Entity, OrgModel};

fn quoted(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_label(e: &Entity, opts: &RenderOptions) -> String {
    let mut label = quoted(e.display_name());
    if opts.show_moods {
        label.insert_str(label.len() - 1, &format!("\\n{}", e.mood.emoji()));
    }
    label
}

/// Graphviz rendering. Power maps to pen width, blocking to a `✗` label,
/// informal influence to dotted edges with open arrowheads (greyed when
/// inactive).
pub fn to_dot(model: &OrgModel, opts: &RenderOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quoted(model.name()));
    out.push_str("  graph [rankdir=TB];\n");
    out.push_str("  node [shape=circle, fontname=\"sans-serif\"];\n");
    for id in model.canonical_order() {
        let e = model.entity(id.as_str()).expect("ordered ids exist");
        let mut attrs = vec![format!("label={}", node_label(e, opts))];
        if let Some(title) = &e.title {
            attrs.push(format!("xlabel={}", quoted(title)));
        }
        let _ = writeln!(out, "  {} [{}];", quoted(id.as_str()), attrs.join(", "));
    }
    for f in model.formal() {
        let mut attrs = vec![format!("penwidth={}", f.power)];
        if f.blocked {
            attrs.push("label=\"\u{2717}\"".to_string());
        }
        let _ = writeln!(out, "  {} -> {} [{}];", quoted(f.superior.as_str()), quoted(f.subordinate.as_str()), attrs.join(", "));
    }
    if opts.show_informal {
        for i in model.informal() {
            let mut attrs = vec!["style=dotted".to_string(), "arrowhead=empty".to_string(), "constraint=false".to_string()];
            if i.strength > 1 {
                attrs.push(format!("penwidth={}", i.strength));
            }
            if !i.active {
                attrs.push("color=\"gray70\"".to_string());
            }
            if let Some(note) = &i.note {
                attrs.push(format!("tooltip={}", quoted(note)));
            }
            let _ = writeln!(out, "  {} -> {} [{}];", quoted(i.source.as_str()), quoted(i.target.as_str()), attrs.join(", "));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_str;

    #[test]
    fn neutral_default_node() {
        let m = parse_str("org \"x\"\nentity A\n").model.unwrap();
        let dot = to_dot(&m, &RenderOptions::default());
        assert!(dot.contains("\"A\" [label=\"A\\n\u{1F610}\"];"), "{dot}");
    }

    #[test]
    fn paper_edges() {
        let m = parse_str(include_str!("../../../../fixtures/paper.pog")).model.unwrap();
        let dot = to_dot(&m, &RenderOptions::default());
        assert!(dot.contains("\"A\" -> \"B\" [penwidth=2];"));
        assert!(dot.contains("\"A\" -> \"C\" [penwidth=1];"));
        assert!(dot.contains("\"D\" -> \"A\" [style=dotted, arrowhead=empty, constraint=false];"));
    }

    #[test]
    fn blocked_edge_gets_cross() {
        let m = parse_str("org \"x\"\nentity M\nentity E\nformal M -> E [block=true]\n").model.unwrap();
        let dot = to_dot(&m, &RenderOptions::default());
        assert!(dot.contains("\"M\" -> \"E\" [penwidth=1, label=\"\u{2717}\"];"), "{dot}");
    }

    #[test]
    fn options_hide_layers() {
        let m = parse_str(include_str!("../../../../fixtures/paper.pog")).model.unwrap();
        let opts = RenderOptions { show_moods: false, show_informal: false, ..Default::default() };
        let dot = to_dot(&m, &opts);
        assert!(!dot.contains("dotted"));
        assert!(!dot.contains('\u{1F60A}'));
    }

    #[test]
    fn escapes_text() {
        let m = parse_str("org \"a \\\"b\\\"\"\nentity A [label=\"x\\\\y\", title=\"line\\nbreak\"]\n").model.unwrap();
        let dot = to_dot(&m, &RenderOptions::default());
        assert!(dot.starts_with("digraph \"a \\\"b\\\"\" {"), "{dot}");
        assert!(dot.contains("label=\"x\\\\y\\n"));
        assert!(dot.contains("xlabel=\"line\\nbreak\""));
    }
}
