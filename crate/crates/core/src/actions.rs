//! Semantics of the action combinators (Tables 4 and 5): precondition
//! checks followed by application through the world's primitive mutations.
//!
//! Preconditions are checked against the world as it currently stands,
//! which during a behavior run already includes earlier intents of the same
//! run. `apply` only mutates after every check has passed, so a rejected
//! action leaves no trace. Movers return the extra time penalty
//! (mass times L1 distance moved); everything else returns 0.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::actor::{ActorId, ActorKind, Composition};
use crate::grid::{Position, DIRS8};
use crate::opcode::Opcode;
use crate::world::World;

/// An action precondition did not hold; the branch that attempted it
/// fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rejected(pub &'static str);

type ActionResult = Result<u64, Rejected>;

/// Apply one action. `y` must be given exactly for binary actions.
pub fn apply(world: &mut World, op: Opcode, x: ActorId, y: Option<ActorId>) -> ActionResult {
    use Opcode::*;
    match op {
        Drop => drop_hand(world, x),
        Unbond => unbond(world, x),
        UnbondPrev => unbond_prev(world, x),
        Quit => quit(world, x),
        Exit => exit(world, x),
        Digest => digest(world, x),
        On => on(world, x),
        Off => off(world, x),
        Grab => grab(world, x, expect_y(y)?),
        Bond => bond(world, x, expect_y(y)?),
        BondPrev => bond_prev(world, x, expect_y(y)?),
        Join => join(world, x, expect_y(y)?),
        Eat => eat(world, x, expect_y(y)?),
        Compose => compose(world, x, expect_y(y)?),
        Swap => swap(world, x, expect_y(y)?),
        other => panic!("`{other}` is not an action"),
    }
}

fn expect_y(y: Option<ActorId>) -> Result<ActorId, Rejected> {
    y.ok_or(Rejected("binary action without second argument"))
}

fn exists(world: &World, a: ActorId) -> Result<(), Rejected> {
    if world.actor(a).is_some() {
        Ok(())
    } else {
        Err(Rejected("actor no longer exists"))
    }
}

/// Actors may associate when both are roots or when they share a parent.
fn may_associate(world: &World, x: ActorId, y: ActorId) -> Result<(), Rejected> {
    let xa = world.expect_actor(x);
    let ya = world.expect_actor(y);
    if (xa.is_root() && ya.is_root()) || (xa.parent.is_some() && xa.parent == ya.parent) {
        Ok(())
    } else {
        Err(Rejected("actors are neither roots nor siblings"))
    }
}

fn in_reach(world: &World, x: ActorId, y: ActorId) -> Result<(), Rejected> {
    if world.l1_between(x, y) <= 2 {
        Ok(())
    } else {
        Err(Rejected("actors farther apart than L1 2"))
    }
}

fn drop_hand(world: &mut World, x: ActorId) -> ActionResult {
    exists(world, x)?;
    if world.expect_actor(x).hand.is_none() {
        return Err(Rejected("no hand to drop"));
    }
    world.clear_hand(x);
    Ok(0)
}

fn unbond(world: &mut World, x: ActorId) -> ActionResult {
    exists(world, x)?;
    if world.expect_actor(x).next.is_none() {
        return Err(Rejected("no outgoing bond"));
    }
    world.clear_next(x);
    Ok(0)
}

fn unbond_prev(world: &mut World, x: ActorId) -> ActionResult {
    exists(world, x)?;
    if world.expect_actor(x).prev.is_none() {
        return Err(Rejected("no incoming bond"));
    }
    world.clear_prev(x);
    Ok(0)
}

fn quit(world: &mut World, x: ActorId) -> ActionResult {
    exists(world, x)?;
    let g = world.expect_actor(x).group;
    if world.group(g).map_or(0, |grp| grp.members.len()) < 2 {
        return Err(Rejected("already alone in its group"));
    }
    let fresh = world.fresh_group();
    world.move_to_group(x, fresh);
    Ok(0)
}

fn exit(world: &mut World, x: ActorId) -> ActionResult {
    exists(world, x)?;
    let parent = match world.expect_actor(x).parent {
        Some(p) => p,
        None => return Err(Rejected("actor has no parent")),
    };
    let grandparent = world.expect_actor(parent).parent;
    match grandparent {
        Some(q) => {
            world.contents_remove(parent, x);
            world.contents_push(q, x);
        }
        None => {
            // parent is a root: reify at its site, no distance moved
            let site = world.expect_actor(parent).pos.expect("root without position");
            world.contents_remove(parent, x);
            world.place_on_grid(x, site);
        }
    }
    Ok(0)
}

fn digest(world: &mut World, x: ActorId) -> ActionResult {
    exists(world, x)?;
    let comp = match &world.expect_actor(x).kind {
        ActorKind::Combinator(c) if !c.is_primitive() => c.clone(),
        ActorKind::Combinator(_) => return Err(Rejected("already primitive")),
        _ => return Err(Rejected("only combinators can be digested")),
    };
    let site = world.root_pos(x);
    world.clear_all_bonds(x);
    world.despawn(x);
    for &op in comp.ops() {
        world.spawn_root(ActorKind::Combinator(Composition::single(op)), site);
    }
    Ok(0)
}

fn on(world: &mut World, x: ActorId) -> ActionResult {
    exists(world, x)?;
    let comp = match &world.expect_actor(x).kind {
        ActorKind::Combinator(c) => c.clone(),
        _ => return Err(Rejected("only combinators can be enabled")),
    };
    world.set_kind(x, ActorKind::Behavior(comp));
    Ok(0)
}

fn off(world: &mut World, x: ActorId) -> ActionResult {
    exists(world, x)?;
    let comp = match &world.expect_actor(x).kind {
        ActorKind::Behavior(c) => c.clone(),
        _ => return Err(Rejected("only behaviors can be disabled")),
    };
    world.set_kind(x, ActorKind::Combinator(comp));
    Ok(0)
}

fn grab(world: &mut World, x: ActorId, y: ActorId) -> ActionResult {
    exists(world, x)?;
    exists(world, y)?;
    may_associate(world, x, y)?;
    if world.expect_actor(x).hand.is_some() || world.expect_actor(y).hand.is_some() {
        return Err(Rejected("a hand is already taken"));
    }
    in_reach(world, x, y)?;
    world.create_hand(x, y);
    Ok(0)
}

fn bond(world: &mut World, x: ActorId, y: ActorId) -> ActionResult {
    exists(world, x)?;
    exists(world, y)?;
    may_associate(world, x, y)?;
    if world.expect_actor(x).next.is_some() {
        return Err(Rejected("outgoing bond already taken"));
    }
    if world.expect_actor(y).prev.is_some() {
        return Err(Rejected("incoming bond already taken"));
    }
    in_reach(world, x, y)?;
    world.create_next(x, y);
    Ok(0)
}

fn bond_prev(world: &mut World, x: ActorId, y: ActorId) -> ActionResult {
    exists(world, x)?;
    exists(world, y)?;
    may_associate(world, x, y)?;
    if world.expect_actor(y).next.is_some() {
        return Err(Rejected("outgoing bond already taken"));
    }
    if world.expect_actor(x).prev.is_some() {
        return Err(Rejected("incoming bond already taken"));
    }
    in_reach(world, x, y)?;
    world.create_next(y, x);
    Ok(0)
}

fn join(world: &mut World, x: ActorId, y: ActorId) -> ActionResult {
    exists(world, x)?;
    exists(world, y)?;
    let target_group = world.expect_actor(y).group;
    if world.expect_actor(x).group == target_group {
        return Err(Rejected("already in the same group"));
    }
    may_associate(world, x, y)?;
    let mut penalty = 0;
    if world.l1_between(x, y) > 2 {
        // relocate next to the target group, paying for the transport;
        // the landing site is the nearest free one whose bonds stay legal
        if !world.expect_actor(x).is_root() {
            return Err(Rejected("contained actor cannot relocate"));
        }
        let from = world.expect_actor(x).pos.unwrap();
        let around = world.root_pos(y);
        let torus = world.torus();
        let mut candidates: Vec<Position> = DIRS8
            .iter()
            .map(|d| torus.offset(around, d.dx as i32, d.dy as i32))
            .filter(|&site| world.occupants(site).is_empty())
            .collect();
        candidates.sort_by_key(|&site| torus.l1(from, site));
        let target = candidates
            .into_iter()
            .find(|&site| world.spans_ok(&[(x, site)]))
            .ok_or(Rejected("no reachable free site near the target group"))?;
        penalty = world.mass_of(x) * torus.l1(from, target) as u64;
        world.move_root(x, target);
    }
    world.move_to_group(x, target_group);
    Ok(penalty)
}

fn eat(world: &mut World, x: ActorId, y: ActorId) -> ActionResult {
    exists(world, x)?;
    exists(world, y)?;
    if x == y {
        return Err(Rejected("cannot eat itself"));
    }
    if !world.expect_actor(x).is_root() {
        return Err(Rejected("only roots can be eaten"));
    }
    if !world.expect_actor(y).kind.is_object() {
        return Err(Rejected("only objects can contain"));
    }
    if world.root_of(y) == x {
        return Err(Rejected("containment cycle"));
    }
    let dest = world.root_pos(y);
    if !world.spans_ok(&[(x, dest)]) {
        return Err(Rejected("a bond would end up longer than 2"));
    }
    let dist = world.l1_between(x, y);
    let penalty = world.mass_of(x) * dist as u64;
    world.remove_from_grid(x);
    world.contents_push(y, x);
    Ok(penalty)
}

fn compose(world: &mut World, x: ActorId, y: ActorId) -> ActionResult {
    exists(world, x)?;
    exists(world, y)?;
    if x == y {
        return Err(Rejected("cannot compose with itself"));
    }
    let xc = match &world.expect_actor(x).kind {
        ActorKind::Combinator(c) => c.clone(),
        _ => return Err(Rejected("first argument is not a combinator")),
    };
    let yc = match &world.expect_actor(y).kind {
        ActorKind::Combinator(c) => c.clone(),
        _ => return Err(Rejected("second argument is not a combinator")),
    };
    let dist = world.l1_between(x, y);
    let penalty = yc.mass() * dist as u64;
    // y is absorbed: detach it from everything, then extend x
    world.clear_all_bonds(y);
    if world.expect_actor(y).pos.is_some() {
        world.remove_from_grid(y);
    }
    world.set_kind(x, ActorKind::Combinator(xc.concat(&yc)));
    world.despawn(y);
    Ok(penalty)
}

fn swap(world: &mut World, x: ActorId, y: ActorId) -> ActionResult {
    exists(world, x)?;
    exists(world, y)?;
    if x == y {
        return Err(Rejected("cannot swap with itself"));
    }
    if !world.expect_actor(x).is_root() || !world.expect_actor(y).is_root() {
        return Err(Rejected("both actors must be roots"));
    }
    let px = world.expect_actor(x).pos.unwrap();
    let py = world.expect_actor(y).pos.unwrap();
    // Direct bonds of x and y travel with the position, so their spans are
    // unchanged; bonds of *contained* actors move with their container and
    // must be rechecked.
    if !contained_spans_ok(world, x, py, y, px) {
        return Err(Rejected("a bond would end up longer than 2"));
    }
    let penalty = (world.mass_of(x) + world.mass_of(y)) * world.torus().l1(px, py) as u64;
    let remap = |a: ActorId| {
        if a == x {
            y
        } else if a == y {
            x
        } else {
            a
        }
    };
    // collect the bond edges incident to x or y, as position-preserving
    // edges, before tearing them down
    let mut hands: BTreeSet<(ActorId, ActorId)> = BTreeSet::new();
    let mut nexts: BTreeSet<(ActorId, ActorId)> = BTreeSet::new();
    for &a in &[x, y] {
        let actor = world.expect_actor(a);
        if let Some(h) = actor.hand {
            let (lo, hi) = if a.min(h) == a { (a, h) } else { (h, a) };
            hands.insert((lo, hi));
        }
        if let Some(n) = actor.next {
            nexts.insert((a, n));
        }
        if let Some(p) = actor.prev {
            nexts.insert((p, a));
        }
    }
    world.clear_all_bonds(x);
    world.clear_all_bonds(y);
    world.move_root(x, py);
    world.move_root(y, px);
    for (a, b) in hands {
        world.create_hand(remap(a), remap(b));
    }
    for (a, b) in nexts {
        world.create_next(remap(a), remap(b));
    }
    Ok(penalty)
}

/// Span check for swap: every bond held by a strictly contained actor of
/// `x` (or `y`) is re-anchored at the container's new position.
fn contained_spans_ok(world: &World, x: ActorId, x_to: Position, y: ActorId, y_to: Position) -> bool {
    let torus = world.torus();
    let new_root_pos = |root: ActorId| {
        if root == x {
            x_to
        } else if root == y {
            y_to
        } else {
            world.expect_actor(root).pos.expect("root without position")
        }
    };
    for (root, to) in [(x, x_to), (y, y_to)] {
        for s in world.subtree(root) {
            if s == root {
                continue;
            }
            let actor = world.expect_actor(s);
            for partner in [actor.hand, actor.next, actor.prev].into_iter().flatten() {
                let proot = world.root_of(partner);
                if torus.l1(to, new_root_pos(proot)) > 2 {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use crate::actor::ObjectClass;
    use crate::opcode::Opcode::{
        Bond, Compose, Digest, Drop, Eat, Exit, Grab, Hands, Join, Nexts, Off, On, Prevs, Quit,
        Swap, Unbond, UnbondPrev,
    };

    fn combinator(op: Opcode) -> ActorKind {
        ActorKind::Combinator(Composition::single(op))
    }

    fn world_with(actors: &[(u16, u16, ActorKind)]) -> (World, Vec<ActorId>) {
        let mut w = World::new(16, 16);
        let ids = actors
            .iter()
            .map(|(x, y, kind)| w.spawn_root(kind.clone(), Position { x: *x, y: *y }))
            .collect();
        (w, ids)
    }

    #[test]
    fn grab_then_drop_restores_hands() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands)), (1, 0, combinator(Nexts))]);
        assert_eq!(apply(&mut w, Grab, ids[0], Some(ids[1])), Ok(0));
        assert_eq!(w.expect_actor(ids[0]).hand, Some(ids[1]));
        assert_eq!(w.expect_actor(ids[1]).hand, Some(ids[0]));
        assert_eq!(apply(&mut w, Drop, ids[0], None), Ok(0));
        assert_eq!(w.expect_actor(ids[0]).hand, None);
        assert_eq!(w.expect_actor(ids[1]).hand, None);
        w.validate().unwrap();
    }

    #[test]
    fn bond_pairs_are_inverse_and_self_bond_allowed() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands)), (1, 1, combinator(Nexts))]);
        assert_eq!(apply(&mut w, Bond, ids[0], Some(ids[1])), Ok(0));
        assert_eq!(w.expect_actor(ids[0]).next, Some(ids[1]));
        assert_eq!(w.expect_actor(ids[1]).prev, Some(ids[0]));
        // second outgoing bond is rejected
        assert!(apply(&mut w, Bond, ids[0], Some(ids[1])).is_err());
        assert_eq!(apply(&mut w, Unbond, ids[0], None), Ok(0));
        // self-bond
        assert_eq!(apply(&mut w, Bond, ids[0], Some(ids[0])), Ok(0));
        assert_eq!(w.expect_actor(ids[0]).next, Some(ids[0]));
        assert_eq!(w.expect_actor(ids[0]).prev, Some(ids[0]));
        assert_eq!(apply(&mut w, UnbondPrev, ids[0], None), Ok(0));
        assert_eq!(w.expect_actor(ids[0]).next, None);
        w.validate().unwrap();
    }

    #[test]
    fn bond_out_of_reach_is_rejected() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands)), (5, 0, combinator(Nexts))]);
        assert!(apply(&mut w, Bond, ids[0], Some(ids[1])).is_err());
        assert!(apply(&mut w, Grab, ids[0], Some(ids[1])).is_err());
    }

    #[test]
    fn join_and_quit_are_inverse_on_groups() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands)), (1, 0, combinator(Nexts))]);
        let g1 = w.expect_actor(ids[1]).group;
        assert_eq!(apply(&mut w, Join, ids[0], Some(ids[1])), Ok(0));
        assert_eq!(w.expect_actor(ids[0]).group, g1);
        assert_eq!(w.group(g1).unwrap().members.len(), 2);
        assert_eq!(apply(&mut w, Quit, ids[0], None), Ok(0));
        assert_ne!(w.expect_actor(ids[0]).group, g1);
        assert!(apply(&mut w, Quit, ids[0], None).is_err());
        w.validate().unwrap();
    }

    #[test]
    fn join_relocates_and_charges_transport() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands)), (8, 0, combinator(Nexts))]);
        let penalty = apply(&mut w, Join, ids[0], Some(ids[1])).unwrap();
        // mass 1, landed on a free site adjacent to the target
        let d = w.l1_between(ids[0], ids[1]);
        assert!(d <= 2, "relocated out of reach: {d}");
        assert!(penalty >= 6, "transport penalty missing: {penalty}");
        w.validate().unwrap();
    }

    #[test]
    fn eat_then_exit_round_trips_containment() {
        let mut w = World::new(16, 16);
        let obj = w.spawn_root(
            ActorKind::empty_object(ObjectClass::new(0).unwrap()),
            Position { x: 3, y: 3 },
        );
        let c = w.spawn_root(combinator(Hands), Position { x: 4, y: 3 });
        assert_eq!(apply(&mut w, Eat, c, Some(obj)), Ok(1));
        assert_eq!(w.expect_actor(c).parent, Some(obj));
        assert_eq!(w.expect_actor(c).pos, None);
        assert_eq!(w.mass_of(obj), 2);
        assert_eq!(apply(&mut w, Exit, c, None), Ok(0));
        assert_eq!(w.expect_actor(c).parent, None);
        assert_eq!(w.expect_actor(c).pos, Some(Position { x: 3, y: 3 }));
        w.validate().unwrap();
    }

    #[test]
    fn eat_rejects_cycles_and_non_objects() {
        let mut w = World::new(16, 16);
        let outer = w.spawn_root(
            ActorKind::empty_object(ObjectClass::new(0).unwrap()),
            Position { x: 3, y: 3 },
        );
        let inner = w.spawn_root(
            ActorKind::empty_object(ObjectClass::new(1).unwrap()),
            Position { x: 4, y: 3 },
        );
        let c = w.spawn_root(combinator(Hands), Position { x: 5, y: 3 });
        assert!(apply(&mut w, Eat, c, Some(c)).is_err());
        assert!(apply(&mut w, Eat, outer, Some(c)).is_err());
        apply(&mut w, Eat, inner, Some(outer)).unwrap();
        // outer cannot climb into the object it now contains
        assert!(apply(&mut w, Eat, outer, Some(inner)).is_err());
        w.validate().unwrap();
    }

    #[test]
    fn on_off_round_trips_kind_and_hash() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands))]);
        let before = w.expect_actor(ids[0]).kind.type_hash();
        apply(&mut w, On, ids[0], None).unwrap();
        assert!(w.expect_actor(ids[0]).kind.is_behavior());
        assert!(apply(&mut w, On, ids[0], None).is_err());
        apply(&mut w, Off, ids[0], None).unwrap();
        assert_eq!(w.expect_actor(ids[0]).kind.type_hash(), before);
        w.validate().unwrap();
    }

    #[test]
    fn compose_absorbs_and_conserves_mass() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands)), (1, 0, combinator(Nexts))]);
        let total = w.total_mass();
        let penalty = apply(&mut w, Compose, ids[0], Some(ids[1])).unwrap();
        assert_eq!(penalty, 1); // mass 1 moved L1 1
        assert!(w.actor(ids[1]).is_none());
        let comp = w.expect_actor(ids[0]).kind.composition().unwrap();
        assert_eq!(comp.ops(), &[Hands, Nexts]);
        assert_eq!(comp.hash(), &num_bigint::BigUint::from(6u8));
        assert_eq!(w.total_mass(), total);
        assert!(apply(&mut w, Compose, ids[0], Some(ids[0])).is_err());
        w.validate().unwrap();
    }

    #[test]
    fn digest_reduces_to_primitives_at_site() {
        let mut w = World::new(16, 16);
        let comp = Composition::new(alloc::vec![Hands, Nexts, Hands]).unwrap();
        let c = w.spawn_root(ActorKind::Combinator(comp), Position { x: 2, y: 2 });
        let total = w.total_mass();
        apply(&mut w, Digest, c, None).unwrap();
        assert!(w.actor(c).is_none());
        assert_eq!(w.total_mass(), total);
        let here = w.occupants(Position { x: 2, y: 2 }).to_vec();
        assert_eq!(here.len(), 3);
        for id in here {
            let a = w.expect_actor(id);
            assert!(a.kind.composition().unwrap().is_primitive());
            assert_eq!(w.group(a.group).unwrap().members.len(), 1);
        }
        w.validate().unwrap();
    }

    #[test]
    fn swap_exchanges_positions_and_bonds() {
        let (mut w, ids) = world_with(&[
            (0, 0, combinator(Hands)),
            (1, 0, combinator(Nexts)),
            (2, 0, combinator(Prevs)),
        ]);
        let (a, b, anchor) = (ids[0], ids[1], ids[2]);
        apply(&mut w, Grab, b, Some(anchor)).unwrap();
        let penalty = apply(&mut w, Swap, a, Some(b)).unwrap();
        assert_eq!(penalty, 2); // masses 1+1, distance 1
        assert_eq!(w.expect_actor(a).pos, Some(Position { x: 1, y: 0 }));
        assert_eq!(w.expect_actor(b).pos, Some(Position { x: 0, y: 0 }));
        // a inherited b's hand to the anchor
        assert_eq!(w.expect_actor(a).hand, Some(anchor));
        assert_eq!(w.expect_actor(anchor).hand, Some(a));
        assert_eq!(w.expect_actor(b).hand, None);
        w.validate().unwrap();
    }

    #[test]
    fn swap_keeps_mutual_bonds() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands)), (1, 0, combinator(Nexts))]);
        apply(&mut w, Bond, ids[0], Some(ids[1])).unwrap();
        apply(&mut w, Swap, ids[0], Some(ids[1])).unwrap();
        // the bond keeps its position endpoints, so the pair's direction
        // follows the exchanged roles
        assert_eq!(w.expect_actor(ids[1]).next, Some(ids[0]));
        assert_eq!(w.expect_actor(ids[0]).prev, Some(ids[1]));
        w.validate().unwrap();
    }

    #[test]
    fn actions_reject_missing_actors() {
        let (mut w, ids) = world_with(&[(0, 0, combinator(Hands))]);
        let ghost = ActorId(999);
        assert!(apply(&mut w, Drop, ghost, None).is_err());
        assert!(apply(&mut w, Grab, ids[0], Some(ghost)).is_err());
    }
}
