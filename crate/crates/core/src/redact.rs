//! Seeded pseudonymization that keeps structure, powers, moods, blocks and
//! informal topology intact.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{EntityId, ModelDraft, OrgModel};

pub const REDACTED_NAME: &str = "REDACTED";

/// The renaming applied by [`redact`] for this model and seed.
pub fn pseudonyms(model: &OrgModel, seed: u64) -> BTreeMap<EntityId, EntityId> {
    let mut order = model.canonical_order();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id, EntityId::new(format!("E{}", i + 1)).expect("pseudonyms are valid ids")))
        .collect()
}

/// Renames entities to E1..En in a seeded permutation of canonical order.
/// Labels and titles that are present become the entity's pseudonym; notes
/// become the pseudonym of their edge.
pub fn redact(model: &OrgModel, seed: u64) -> OrgModel {
    let names = pseudonyms(model, seed);
    let rename = |s: &str| names[s].to_string();
    let mut draft: ModelDraft = model.to_draft();
    draft.name = REDACTED_NAME.to_string();
    for e in &mut draft.entities {
        e.id = rename(&e.id);
        e.label = e.label.as_ref().map(|_| e.id.clone());
        e.title = e.title.as_ref().map(|_| e.id.clone());
    }
    for f in &mut draft.formal {
        f.superior = rename(&f.superior);
        f.subordinate = rename(&f.subordinate);
    }
    for i in &mut draft.informal {
        i.source = rename(&i.source);
        i.target = rename(&i.target);
        i.note = i.note.as_ref().map(|_| format!("{} ~> {}", i.source, i.target));
    }
    draft.build().expect("renaming preserves validity")
}
