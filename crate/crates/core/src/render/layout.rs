use std::collections::BTreeMap;

use serde::Serialize;

use crate::analysis::EdgeKind;
use crate::model::{EntityId, OrgModel};

/// Perpendicular offset of the bend in an informal route, in layout units.
const INFORMAL_BEND: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    pub kind: EdgeKind,
    pub from: EntityId,
    pub to: EntityId,
    /// Formal routes are straight two-point segments; informal routes bend
    /// through a third, offset point so they never coincide with formal ones.
    pub points: Vec<Point>,
}

/// Positions in abstract units: one unit between neighbouring slots, one
/// unit per layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutPlan {
    pub positions: BTreeMap<EntityId, Point>,
    pub layers: Vec<Vec<EntityId>>,
    pub routes: Vec<Route>,
}

impl LayoutPlan {
    pub fn position(&self, id: &EntityId) -> Point {
        self.positions[id]
    }

    pub fn width(&self) -> f64 {
        self.positions.values().map(|p| p.x).fold(0.0, f64::max)
    }

    /// Number of pairwise crossings among formal edges between adjacent layers.
    pub fn crossings(&self) -> usize {
        let formal: Vec<(Point, Point)> = self
            .routes
            .iter()
            .filter(|r| r.kind == EdgeKind::Formal)
            .map(|r| (r.points[0], r.points[r.points.len() - 1]))
            .collect();
        let mut count = 0;
        for (i, a) in formal.iter().enumerate() {
            for b in &formal[i + 1..] {
                if a.0.y == b.0.y && (a.0.x - b.0.x) * (a.1.x - b.1.x) < 0.0 {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Layered tree layout. Layer k holds the entities of depth k; children are
/// grouped under their superior in the superior's layer order (ties by
/// canonical order) and every superior is centred over its children.
pub fn layout(model: &OrgModel) -> LayoutPlan {
    let order = model.canonical_order();
    let mut children: BTreeMap<&EntityId, Vec<&EntityId>> = BTreeMap::new();
    let mut roots = Vec::new();
    for id in &order {
        match model.superior_of(id.as_str()) {
            Some(sup) => children.entry(sup).or_default().push(id),
            None => roots.push(id),
        }
    }

    let mut positions = BTreeMap::new();
    let mut next_slot = 0.0;
    for root in &roots {
        place(model, root, &children, &mut next_slot, &mut positions);
    }

    let depth_count = order.iter().map(|id| model.depth(id.as_str()).unwrap() + 1).max().unwrap_or(0);
    let mut layers: Vec<Vec<EntityId>> = vec![Vec::new(); depth_count];
    for id in &order {
        layers[model.depth(id.as_str()).unwrap()].push(id.clone());
    }
    for layer in &mut layers {
        layer.sort_by(|a, b| positions[a].x.total_cmp(&positions[b].x));
    }

    let mut routes = Vec::new();
    for f in model.formal() {
        routes.push(Route {
            kind: EdgeKind::Formal,
            from: f.superior.clone(),
            to: f.subordinate.clone(),
            points: vec![positions[&f.superior], positions[&f.subordinate]],
        });
    }
    for e in model.informal() {
        let (a, b): (Point, Point) = (positions[&e.source], positions[&e.target]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len = (dx * dx + dy * dy).sqrt();
        let bend = Point { x: (a.x + b.x) / 2.0 - dy / len * INFORMAL_BEND, y: (a.y + b.y) / 2.0 + dx / len * INFORMAL_BEND };
        routes.push(Route { kind: EdgeKind::Informal, from: e.source.clone(), to: e.target.clone(), points: vec![a, bend, b] });
    }

    LayoutPlan { positions, layers, routes }
}

fn place(
    model: &OrgModel,
    id: &EntityId,
    children: &BTreeMap<&EntityId, Vec<&EntityId>>,
    next_slot: &mut f64,
    positions: &mut BTreeMap<EntityId, Point>,
) {
    let y = model.depth(id.as_str()).unwrap() as f64;
    let x = match children.get(id) {
        Some(kids) => {
            for kid in kids {
                place(model, kid, children, next_slot, positions);
            }
            (positions[kids[0]].x + positions[kids[kids.len() - 1]].x) / 2.0
        }
        None => {
            let x = *next_slot;
            *next_slot += 1.0;
            x
        }
    };
    positions.insert(id.clone(), Point { x, y });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_str;
    use crate::model::{ModelDraft, Mood};

    fn paper() -> OrgModel {
        parse_str(include_str!("../../../../fixtures/paper.pog")).model.unwrap()
    }

    fn names(layers: &[Vec<EntityId>]) -> Vec<Vec<&str>> {
        layers.iter().map(|l| l.iter().map(EntityId::as_str).collect()).collect()
    }

    #[test]
    fn paper_layers() {
        let plan = layout(&paper());
        assert_eq!(names(&plan.layers), [vec!["A"], vec!["B", "C"], vec!["D", "E", "F", "G"]]);
        assert_eq!(plan.crossings(), 0);
        let a = plan.position(&EntityId::new("A").unwrap());
        assert_eq!((a.x, a.y), (1.5, 0.0));
    }

    #[test]
    fn single_entity_at_origin() {
        let m = ModelDraft::new("x").entity("X", Mood::Neutral).build().unwrap();
        let plan = layout(&m);
        assert_eq!(names(&plan.layers), [vec!["X"]]);
        assert_eq!(plan.position(&EntityId::new("X").unwrap()), Point { x: 0.0, y: 0.0 });
    }

    #[test]
    fn informal_routes_bend() {
        let plan = layout(&paper());
        let informal = plan.routes.iter().find(|r| r.kind == EdgeKind::Informal).unwrap();
        assert_eq!(informal.points.len(), 3);
        assert!(plan.routes.iter().filter(|r| r.kind == EdgeKind::Formal).all(|r| r.points.len() == 2));
    }

    #[test]
    fn repeatable() {
        assert_eq!(layout(&paper()), layout(&paper()));
    }
}
