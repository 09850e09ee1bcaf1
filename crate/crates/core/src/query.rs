//! Pure read-only combinators over actor sets: the unary generators
//! (Table 1) and binary relations (Table 3).
//!
//! Generators are applied element-wise and unioned (set-monad bind).
//! Relations return a filtering of their first argument: `same` and
//! `different` are intersection and difference; `similar` and `dissimilar`
//! return the whole first argument or nothing, and both return the empty
//! set when the first argument is empty so that a following guard fails.

use alloc::collections::BTreeSet;

use crate::actor::{ActorId, ActorKind};
use crate::opcode::Opcode;
use crate::world::World;

pub type ActorSet = BTreeSet<ActorId>;

pub fn generator(world: &World, op: Opcode, x: &ActorSet) -> ActorSet {
    let mut out = ActorSet::new();
    for &a in x {
        let actor = match world.actor(a) {
            Some(actor) => actor,
            None => {
                debug_assert!(false, "generator over dangling actor id");
                continue;
            }
        };
        match op {
            Opcode::Hands => out.extend(actor.hand),
            Opcode::Nexts => out.extend(actor.next),
            Opcode::Prevs => out.extend(actor.prev),
            Opcode::Bonds => {
                out.extend(actor.hand);
                out.extend(actor.next);
                out.extend(actor.prev);
            }
            Opcode::Neighbors => out.extend(world.neighborhood(a)),
            Opcode::Contents => {
                if let ActorKind::Object { contents, .. } = &actor.kind {
                    out.extend(contents.iter().copied());
                }
            }
            Opcode::Parents => out.extend(actor.parent),
            Opcode::Members => {
                if let Some(group) = world.group(actor.group) {
                    out.extend(group.members.iter().copied());
                }
            }
            Opcode::Others => {
                if let Some(group) = world.group(actor.group) {
                    out.extend(group.members.iter().copied().filter(|&m| m != a));
                }
            }
            other => panic!("`{other}` is not a generator"),
        }
    }
    out
}

fn kinds_equivalent(a: &ActorKind, b: &ActorKind) -> bool {
    match (a, b) {
        (ActorKind::Combinator(x), ActorKind::Combinator(y)) => x.hash() == y.hash(),
        (ActorKind::Behavior(x), ActorKind::Behavior(y)) => x.hash() == y.hash(),
        (ActorKind::Object { class: x, .. }, ActorKind::Object { class: y, .. }) => x == y,
        _ => false,
    }
}

fn equivalent(world: &World, a: ActorId, b: ActorId) -> bool {
    match (world.actor(a), world.actor(b)) {
        (Some(x), Some(y)) => kinds_equivalent(&x.kind, &y.kind),
        _ => false,
    }
}

pub fn relation(world: &World, op: Opcode, x: &ActorSet, y: &ActorSet) -> ActorSet {
    match op {
        Opcode::Same => x.intersection(y).copied().collect(),
        Opcode::Different => x.difference(y).copied().collect(),
        Opcode::Similar => {
            if !x.is_empty() && x.iter().all(|&a| y.iter().any(|&b| equivalent(world, a, b))) {
                x.clone()
            } else {
                ActorSet::new()
            }
        }
        Opcode::Dissimilar => {
            if !x.is_empty() && x.iter().all(|&a| !y.iter().any(|&b| equivalent(world, a, b))) {
                x.clone()
            } else {
                ActorSet::new()
            }
        }
        other => panic!("`{other}` is not a relation"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actor::{Composition, ObjectClass};
    use crate::grid::Position;
    use crate::opcode::Opcode::{
        Bonds, Contents, Different, Dissimilar, Hands, Members, Neighbors, Nexts, Others,
        Parents, Prevs, Same, Similar,
    };
    use alloc::vec::Vec;

    fn set(ids: &[ActorId]) -> ActorSet {
        ids.iter().copied().collect()
    }

    fn comb(op: Opcode) -> ActorKind {
        ActorKind::Combinator(Composition::single(op))
    }

    #[test]
    fn bond_generators_follow_slots() {
        let mut w = World::new(8, 8);
        let a = w.spawn_root(comb(Hands), Position { x: 1, y: 1 });
        let b = w.spawn_root(comb(Nexts), Position { x: 2, y: 1 });
        let c = w.spawn_root(comb(Prevs), Position { x: 1, y: 2 });
        w.create_hand(a, b);
        w.create_next(a, c);
        assert_eq!(generator(&w, Hands, &set(&[a])), set(&[b]));
        assert_eq!(generator(&w, Nexts, &set(&[a])), set(&[c]));
        assert_eq!(generator(&w, Prevs, &set(&[a])), set(&[]));
        // bonds = union of hands, nexts and prevs
        assert_eq!(generator(&w, Bonds, &set(&[a])), set(&[b, c]));
    }

    #[test]
    fn neighborhood_is_nine_sites_minus_self() {
        let mut w = World::new(8, 8);
        // fully occupied 3x3 block; center sees the 8 others
        let mut ids = Vec::new();
        for y in 0..3u16 {
            for x in 0..3u16 {
                ids.push(w.spawn_root(comb(Hands), Position { x: x + 1, y: y + 1 }));
            }
        }
        let center = ids[4];
        let nb = generator(&w, Neighbors, &set(&[center]));
        assert_eq!(nb.len(), 8);
        assert!(!nb.contains(&center));
        // co-located actors are addressable
        let stacked = w.spawn_root(comb(Nexts), Position { x: 2, y: 2 });
        let nb = generator(&w, Neighbors, &set(&[center]));
        assert!(nb.contains(&stacked));
        // lone actor on an empty patch sees nothing
        let lone = w.spawn_root(comb(Prevs), Position { x: 6, y: 6 });
        assert!(generator(&w, Neighbors, &set(&[lone])).is_empty());
    }

    #[test]
    fn containment_and_group_generators() {
        let mut w = World::new(8, 8);
        let obj = w.spawn_root(
            ActorKind::empty_object(ObjectClass::new(0).unwrap()),
            Position { x: 3, y: 3 },
        );
        let e = w.spawn_contained(comb(Hands), obj);
        assert_eq!(generator(&w, Contents, &set(&[obj])), set(&[e]));
        assert_eq!(generator(&w, Parents, &set(&[e])), set(&[obj]));
        assert_eq!(generator(&w, Parents, &set(&[obj])), set(&[]));
        // contents of a combinator is empty
        assert_eq!(generator(&w, Contents, &set(&[e])), set(&[]));
        // groups
        let other = w.spawn_root(comb(Nexts), Position { x: 4, y: 3 });
        w.move_to_group(other, w.expect_actor(obj).group);
        assert_eq!(generator(&w, Members, &set(&[obj])), set(&[obj, other]));
        assert_eq!(generator(&w, Others, &set(&[obj])), set(&[other]));
        // others of a singleton-group actor is empty
        assert_eq!(generator(&w, Others, &set(&[e])), set(&[]));
    }

    #[test]
    fn same_and_different_are_set_operations() {
        let mut w = World::new(8, 8);
        let a = w.spawn_root(comb(Hands), Position { x: 0, y: 0 });
        let b = w.spawn_root(comb(Hands), Position { x: 1, y: 0 });
        let c = w.spawn_root(comb(Hands), Position { x: 2, y: 0 });
        assert_eq!(relation(&w, Same, &set(&[a, b]), &set(&[b, c])), set(&[b]));
        assert_eq!(relation(&w, Different, &set(&[a, b]), &set(&[b, c])), set(&[a]));
    }

    #[test]
    fn similar_filters_by_type_equivalence() {
        let mut w = World::new(8, 8);
        let h2a = w.spawn_root(comb(Hands), Position { x: 0, y: 0 });
        let h2b = w.spawn_root(comb(Hands), Position { x: 1, y: 0 });
        let h3 = w.spawn_root(comb(Nexts), Position { x: 2, y: 0 });
        let beh = w.spawn_root(ActorKind::Behavior(Composition::single(Hands)), Position { x: 3, y: 0 });
        assert_eq!(relation(&w, Similar, &set(&[h2a]), &set(&[h2b])), set(&[h2a]));
        assert_eq!(relation(&w, Similar, &set(&[h2a]), &set(&[h3])), set(&[]));
        // vacuous truth on empty x still yields nothing
        assert_eq!(relation(&w, Similar, &set(&[]), &set(&[h2b])), set(&[]));
        assert_eq!(relation(&w, Dissimilar, &set(&[]), &set(&[h2b])), set(&[]));
        // a combinator is never equivalent to a behavior with the same hash
        assert_eq!(relation(&w, Dissimilar, &set(&[h2a]), &set(&[beh])), set(&[h2a]));
        // dissimilar against an empty right side passes everything through
        assert_eq!(relation(&w, Dissimilar, &set(&[h2a, h3]), &set(&[])), set(&[h2a, h3]));
    }
}
