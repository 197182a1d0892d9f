use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EntityId, OrgModel};

/// Whether the requirements engineer can reach a stakeholder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum AccessStatus {
    /// Reachable along unblocked formal edges.
    Open,
    /// Reachable only through at least one informal relationship. `path`
    /// runs from an entry entity to the subject.
    Workaround { path: Vec<EntityId> },
    Blocked,
}

/// Undirected adjacency: `formal_only` holds unblocked formal edges, `all`
/// adds every informal edge regardless of activity.
struct Links<'m> {
    formal_only: BTreeMap<&'m EntityId, BTreeSet<&'m EntityId>>,
    all: BTreeMap<&'m EntityId, BTreeSet<&'m EntityId>>,
}

impl<'m> Links<'m> {
    fn new(model: &'m OrgModel) -> Self {
        let mut formal_only: BTreeMap<_, BTreeSet<_>> = BTreeMap::new();
        let mut all: BTreeMap<_, BTreeSet<_>> = BTreeMap::new();
        for e in model.entities() {
            formal_only.entry(&e.id).or_default();
            all.entry(&e.id).or_default();
        }
        let link = |map: &mut BTreeMap<&'m EntityId, BTreeSet<&'m EntityId>>, a: &'m EntityId, b: &'m EntityId| {
            map.entry(a).or_default().insert(b);
            map.entry(b).or_default().insert(a);
        };
        for f in model.formal().iter().filter(|f| !f.blocked) {
            link(&mut formal_only, &f.superior, &f.subordinate);
            link(&mut all, &f.superior, &f.subordinate);
        }
        for i in model.informal() {
            link(&mut all, &i.source, &i.target);
        }
        Links { formal_only, all }
    }
}

fn distances<'m>(adj: &BTreeMap<&'m EntityId, BTreeSet<&'m EntityId>>, sources: &[&'m EntityId]) -> BTreeMap<&'m EntityId, usize> {
    let mut dist = BTreeMap::new();
    let mut queue = VecDeque::new();
    for s in sources {
        dist.insert(*s, 0);
        queue.push_back(*s);
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u];
        for v in &adj[u] {
            if !dist.contains_key(v) {
                dist.insert(*v, d + 1);
                queue.push_back(*v);
            }
        }
    }
    dist
}

/// Classifies every entity as Open, Workaround or Blocked for an engineer
/// who starts from `entries`.
///
/// Formal edges are walked in both directions unless blocked; informal
/// edges always, in both directions. Workaround paths are shortest, ties
/// broken by the lexicographically smallest id sequence.
pub fn access_report(model: &OrgModel, entries: &BTreeSet<EntityId>) -> Result<BTreeMap<EntityId, AccessStatus>> {
    if entries.is_empty() {
        return Err(Error::BadEntry("at least one entry entity is required".into()));
    }
    let mut starts = Vec::new();
    for e in entries {
        let id = model.id(e.as_str()).map_err(|_| Error::BadEntry(format!("unknown entry entity `{e}`")))?;
        starts.push(id);
    }
    let links = Links::new(model);
    let open = distances(&links.formal_only, &starts);
    let reachable = distances(&links.all, &starts);

    let mut report = BTreeMap::new();
    for e in model.entities() {
        let status = if open.contains_key(&e.id) {
            AccessStatus::Open
        } else if reachable.contains_key(&e.id) {
            AccessStatus::Workaround { path: smallest_path(&links.all, &starts, &e.id) }
        } else {
            AccessStatus::Blocked
        };
        report.insert(e.id.clone(), status);
    }
    Ok(report)
}

/// Lexicographically smallest among the shortest paths from any start to
/// `target`. Links are symmetric, so distances from the target guide a
/// greedy walk forwards from the smallest eligible start.
fn smallest_path<'m>(adj: &BTreeMap<&'m EntityId, BTreeSet<&'m EntityId>>, starts: &[&'m EntityId], target: &'m EntityId) -> Vec<EntityId> {
    let to_target = distances(adj, &[target]);
    let best = starts.iter().filter_map(|s| to_target.get(s)).min().copied().expect("target is reachable");
    let mut cur = *starts.iter().filter(|s| to_target.get(*s) == Some(&best)).min().expect("some start at best distance");
    let mut path = vec![cur.clone()];
    while cur != target {
        let want = to_target[cur] - 1;
        cur = adj[cur].iter().find(|v| to_target.get(*v) == Some(&want)).expect("a neighbour one step closer");
        path.push(cur.clone());
    }
    path
}
