//! The virtual world: actors on a toroidal lattice with bonds, groups and
//! containment.
//!
//! All mutation goes through primitive operations that maintain the
//! relational invariants (hand symmetric, next/prev inverse, grid occupancy
//! mirroring positions, groups partitioning the actor set). When a
//! transaction is open every primitive logs an undo entry, so a behavior
//! run can be rolled back to any earlier point; a failed run leaves the
//! world exactly as it found it.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::actor::{Actor, ActorId, ActorKind, GroupId};
use crate::grid::{Dir8, Position, Torus, DIRS8};
use crate::rng::SimRng;

/// An equivalence class of actors. Embedded groups (all members root)
/// diffuse as a unit and share one stream of action events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub members: BTreeSet<ActorId>,
    /// Bumped whenever the simulation invalidates the group's pending
    /// events.
    pub generation: u64,
}

#[derive(Clone, Debug, PartialEq)]
enum Undo {
    Actor(ActorId, Option<Actor>),
    Group(GroupId, Option<Group>),
    Meta {
        next_actor: u64,
        next_group: u64,
        mass: u64,
    },
    DirtyAdd(GroupId, bool),
}

#[derive(Clone, Debug, PartialEq, Default)]
struct Txn {
    log: Vec<Undo>,
}

/// Position in a transaction's undo log.
pub type TxnMark = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct World {
    torus: Torus,
    /// Slab indexed by actor id; ids are never reused.
    actors: Vec<Option<Box<Actor>>>,
    live_actors: BTreeSet<ActorId>,
    /// Slab indexed by group id; ids are never reused.
    groups: Vec<Option<Box<Group>>>,
    live_groups: BTreeSet<GroupId>,
    /// Root occupancy per site, indexed by `torus.index`; each list is
    /// sorted by id.
    sites: Vec<Vec<ActorId>>,
    next_actor: u64,
    next_group: u64,
    /// Total mass of all actors, maintained incrementally.
    mass: u64,
    /// Groups whose structure changed since the last `take_dirty`.
    dirty: BTreeSet<GroupId>,
    txn: Option<Txn>,
}

impl World {
    pub fn new(width: u16, height: u16) -> World {
        let torus = Torus::new(width, height);
        World {
            torus,
            actors: Vec::new(),
            live_actors: BTreeSet::new(),
            groups: Vec::new(),
            live_groups: BTreeSet::new(),
            sites: alloc::vec![Vec::new(); torus.sites()],
            next_actor: 0,
            next_group: 0,
            mass: 0,
            dirty: BTreeSet::new(),
            txn: None,
        }
    }

    pub fn torus(&self) -> Torus {
        self.torus
    }

    pub fn width(&self) -> u16 {
        self.torus.width
    }

    pub fn height(&self) -> u16 {
        self.torus.height
    }

    // ------------------------------------------------------------------
    // transactions

    pub fn begin_txn(&mut self) {
        assert!(self.txn.is_none(), "transaction already open");
        self.txn = Some(Txn::default());
    }

    pub fn txn_mark(&self) -> TxnMark {
        self.txn.as_ref().expect("no open transaction").log.len()
    }

    /// Undo everything logged after `mark`.
    pub fn rollback_to(&mut self, mark: TxnMark) {
        loop {
            let entry = {
                let txn = self.txn.as_mut().expect("no open transaction");
                if txn.log.len() <= mark {
                    break;
                }
                txn.log.pop().unwrap()
            };
            match entry {
                Undo::Actor(id, snapshot) => {
                    if let Some(cur) = self.actor(id) {
                        if let Some(p) = cur.pos {
                            self.site_remove(p, id);
                        }
                    }
                    self.remove_actor_slot(id);
                    if let Some(a) = snapshot {
                        if let Some(p) = a.pos {
                            self.site_insert(p, id);
                        }
                        self.insert_actor_slot(id, a);
                    }
                }
                Undo::Group(id, snapshot) => {
                    self.remove_group_slot(id);
                    if let Some(g) = snapshot {
                        self.insert_group_slot(id, g);
                    }
                }
                Undo::Meta {
                    next_actor,
                    next_group,
                    mass,
                } => {
                    self.next_actor = next_actor;
                    self.next_group = next_group;
                    self.mass = mass;
                }
                Undo::DirtyAdd(g, was_present) => {
                    if !was_present {
                        self.dirty.remove(&g);
                    }
                }
            }
        }
    }

    /// Undo everything and close the transaction.
    pub fn rollback_txn(&mut self) {
        self.rollback_to(0);
        self.txn = None;
    }

    /// Keep all changes and close the transaction.
    pub fn commit_txn(&mut self) {
        assert!(self.txn.is_some(), "no open transaction");
        self.txn = None;
    }

    fn touch_actor(&mut self, id: ActorId) {
        if self.txn.is_none() {
            return;
        }
        let snapshot = self.actor(id).cloned();
        self.txn
            .as_mut()
            .unwrap()
            .log
            .push(Undo::Actor(id, snapshot));
    }

    fn touch_group(&mut self, id: GroupId) {
        if self.txn.is_none() {
            return;
        }
        let snapshot = self.group(id).cloned();
        self.txn
            .as_mut()
            .unwrap()
            .log
            .push(Undo::Group(id, snapshot));
    }

    fn touch_meta(&mut self) {
        let entry = Undo::Meta {
            next_actor: self.next_actor,
            next_group: self.next_group,
            mass: self.mass,
        };
        if let Some(txn) = &mut self.txn {
            txn.log.push(entry);
        }
    }

    pub fn mark_dirty(&mut self, g: GroupId) {
        let was_present = !self.dirty.insert(g);
        if let Some(txn) = &mut self.txn {
            txn.log.push(Undo::DirtyAdd(g, was_present));
        }
    }

    /// Groups whose structure changed since the last call.
    pub fn take_dirty(&mut self) -> BTreeSet<GroupId> {
        core::mem::take(&mut self.dirty)
    }

    // ------------------------------------------------------------------
    // queries

    pub fn actor(&self, id: ActorId) -> Option<&Actor> {
        self.actors.get(id.0 as usize).and_then(|slot| slot.as_deref())
    }

    pub fn expect_actor(&self, id: ActorId) -> &Actor {
        self.actor(id).expect("dangling actor id")
    }

    fn actor_mut(&mut self, id: ActorId) -> &mut Actor {
        self.actors[id.0 as usize].as_deref_mut().expect("dangling actor id")
    }

    fn insert_actor_slot(&mut self, id: ActorId, actor: Actor) {
        let idx = id.0 as usize;
        if idx >= self.actors.len() {
            self.actors.resize_with(idx + 1, || None);
        }
        debug_assert!(self.actors[idx].is_none());
        self.actors[idx] = Some(Box::new(actor));
        self.live_actors.insert(id);
    }

    fn remove_actor_slot(&mut self, id: ActorId) -> Option<Box<Actor>> {
        self.live_actors.remove(&id);
        self.actors.get_mut(id.0 as usize).and_then(|slot| slot.take())
    }

    pub fn actors(&self) -> impl Iterator<Item = &Actor> {
        self.live_actors.iter().map(|&id| self.expect_actor(id))
    }

    pub fn actor_count(&self) -> usize {
        self.live_actors.len()
    }

    pub fn group(&self, g: GroupId) -> Option<&Group> {
        self.groups.get(g.0 as usize).and_then(|slot| slot.as_deref())
    }

    fn group_mut(&mut self, g: GroupId) -> &mut Group {
        self.groups[g.0 as usize].as_deref_mut().expect("dangling group id")
    }

    fn insert_group_slot(&mut self, g: GroupId, group: Group) {
        let idx = g.0 as usize;
        if idx >= self.groups.len() {
            self.groups.resize_with(idx + 1, || None);
        }
        debug_assert!(self.groups[idx].is_none());
        self.groups[idx] = Some(Box::new(group));
        self.live_groups.insert(g);
    }

    fn remove_group_slot(&mut self, g: GroupId) -> Option<Box<Group>> {
        self.live_groups.remove(&g);
        self.groups.get_mut(g.0 as usize).and_then(|slot| slot.take())
    }

    pub fn groups(&self) -> impl Iterator<Item = (GroupId, &Group)> {
        self.live_groups.iter().map(|&g| (g, self.group(g).expect("dangling group id")))
    }

    /// Outermost container of `a` (`a` itself when root).
    pub fn root_of(&self, a: ActorId) -> ActorId {
        let mut cur = a;
        loop {
            match self.expect_actor(cur).parent {
                Some(p) => cur = p,
                None => return cur,
            }
        }
    }

    pub fn root_pos(&self, a: ActorId) -> Position {
        let root = self.root_of(a);
        self.expect_actor(root).pos.expect("root without position")
    }

    /// Toroidal L1 distance between two actors, resolved through their
    /// roots.
    pub fn l1_between(&self, a: ActorId, b: ActorId) -> u32 {
        self.torus.l1(self.root_pos(a), self.root_pos(b))
    }

    pub fn occupants(&self, p: Position) -> &[ActorId] {
        &self.sites[self.torus.index(p)]
    }

    fn site_insert(&mut self, p: Position, id: ActorId) {
        let site = &mut self.sites[self.torus.index(p)];
        match site.binary_search(&id) {
            Ok(_) => panic!("actor already on the site"),
            Err(at) => site.insert(at, id),
        }
    }

    fn site_remove(&mut self, p: Position, id: ActorId) {
        let site = &mut self.sites[self.torus.index(p)];
        match site.binary_search(&id) {
            Ok(at) => {
                site.remove(at);
            }
            Err(_) => panic!("actor missing from its site"),
        }
    }

    /// Root actors on the 8 surrounding sites and the own site, excluding
    /// the actor's own root. Contained actors resolve through their root.
    pub fn neighborhood(&self, a: ActorId) -> BTreeSet<ActorId> {
        let root = self.root_of(a);
        let center = self.expect_actor(root).pos.expect("root without position");
        let mut out = BTreeSet::new();
        for &occ in self.occupants(center) {
            if occ != root {
                out.insert(occ);
            }
        }
        for d in DIRS8 {
            let site = self.torus.offset(center, d.dx as i32, d.dy as i32);
            for &occ in self.occupants(site) {
                if occ != root {
                    out.insert(occ);
                }
            }
        }
        out
    }

    /// All members of `g` are roots (and there is at least one).
    pub fn embedded(&self, g: GroupId) -> bool {
        match self.group(g) {
            Some(grp) if !grp.members.is_empty() => grp
                .members
                .iter()
                .all(|&m| self.expect_actor(m).is_root()),
            _ => false,
        }
    }

    /// Walk `a` and everything transitively contained in it, depth first,
    /// stopping early when the visitor returns true.
    pub fn walk_subtree(&self, a: ActorId, visit: &mut dyn FnMut(&Actor) -> bool) -> bool {
        let actor = self.expect_actor(a);
        if visit(actor) {
            return true;
        }
        if let ActorKind::Object { contents, .. } = &actor.kind {
            for &c in contents {
                if self.walk_subtree(c, visit) {
                    return true;
                }
            }
        }
        false
    }

    /// `a` plus everything transitively contained in it, depth first.
    pub fn subtree(&self, a: ActorId) -> Vec<ActorId> {
        let mut out = Vec::new();
        self.walk_subtree(a, &mut |actor| {
            out.push(actor.id);
            false
        });
        out
    }

    /// Mass of `a` including contents.
    pub fn mass_of(&self, a: ActorId) -> u64 {
        let mut total = 0;
        self.walk_subtree(a, &mut |actor| {
            total += actor.own_mass();
            false
        });
        total
    }

    pub fn group_mass(&self, g: GroupId) -> u64 {
        match self.group(g) {
            Some(grp) => grp.members.iter().map(|&m| self.mass_of(m)).sum(),
            None => 0,
        }
    }

    /// Behaviors among the group's members and their transitive contents,
    /// in deterministic (id-sorted member, containment) order.
    pub fn behaviors_in_closure(&self, g: GroupId) -> Vec<ActorId> {
        let mut out = Vec::new();
        if let Some(grp) = self.group(g) {
            for &m in &grp.members {
                self.walk_subtree(m, &mut |actor| {
                    if actor.kind.is_behavior() {
                        out.push(actor.id);
                    }
                    false
                });
            }
        }
        out
    }

    /// Does the group closure contain at least one behavior?
    pub fn has_behavior_in_closure(&self, g: GroupId) -> bool {
        match self.group(g) {
            Some(grp) => grp
                .members
                .iter()
                .any(|&m| self.walk_subtree(m, &mut |actor| actor.kind.is_behavior())),
            None => false,
        }
    }

    /// Total mass of all actors (maintained incrementally).
    pub fn total_mass(&self) -> u64 {
        self.mass
    }

    pub fn empty_sites(&self) -> Vec<Position> {
        (0..self.torus.sites())
            .filter(|&i| self.sites[i].is_empty())
            .map(|i| self.torus.position(i))
            .collect()
    }

    // ------------------------------------------------------------------
    // primitive mutations

    pub fn create_hand(&mut self, a: ActorId, b: ActorId) {
        assert!(self.expect_actor(a).hand.is_none(), "hand of x occupied");
        assert!(self.expect_actor(b).hand.is_none(), "hand of y occupied");
        assert!(self.l1_between(a, b) <= 2, "bond longer than 2");
        self.touch_actor(a);
        self.actor_mut(a).hand = Some(b);
        if b != a {
            self.touch_actor(b);
            self.actor_mut(b).hand = Some(a);
        }
    }

    pub fn clear_hand(&mut self, a: ActorId) {
        if let Some(b) = self.expect_actor(a).hand {
            self.touch_actor(a);
            self.actor_mut(a).hand = None;
            if b != a {
                self.touch_actor(b);
                self.actor_mut(b).hand = None;
            }
        }
    }

    /// Directed bond `a > b`: `next(a) = b`, `prev(b) = a`. Self-bonds are
    /// allowed.
    pub fn create_next(&mut self, a: ActorId, b: ActorId) {
        assert!(self.expect_actor(a).next.is_none(), "next of x occupied");
        assert!(self.expect_actor(b).prev.is_none(), "prev of y occupied");
        assert!(self.l1_between(a, b) <= 2, "bond longer than 2");
        self.touch_actor(a);
        self.actor_mut(a).next = Some(b);
        if b != a {
            self.touch_actor(b);
        }
        self.actor_mut(b).prev = Some(a);
    }

    pub fn clear_next(&mut self, a: ActorId) {
        if let Some(b) = self.expect_actor(a).next {
            self.touch_actor(a);
            self.actor_mut(a).next = None;
            if b != a {
                self.touch_actor(b);
            }
            self.actor_mut(b).prev = None;
        }
    }

    pub fn clear_prev(&mut self, a: ActorId) {
        if let Some(b) = self.expect_actor(a).prev {
            // delete from the owning side to keep the pair in step
            self.clear_next(b);
        }
    }

    pub fn clear_all_bonds(&mut self, a: ActorId) {
        self.clear_hand(a);
        self.clear_next(a);
        self.clear_prev(a);
    }

    pub fn move_root(&mut self, a: ActorId, to: Position) {
        let from = self
            .expect_actor(a)
            .pos
            .expect("moving an actor that is not on the grid");
        if from == to {
            return;
        }
        self.touch_actor(a);
        self.site_remove(from, a);
        self.site_insert(to, a);
        self.actor_mut(a).pos = Some(to);
    }

    pub fn remove_from_grid(&mut self, a: ActorId) {
        let p = self.expect_actor(a).pos.expect("actor not on the grid");
        self.touch_actor(a);
        self.site_remove(p, a);
        self.actor_mut(a).pos = None;
        let g = self.expect_actor(a).group;
        self.mark_dirty(g);
    }

    pub fn place_on_grid(&mut self, a: ActorId, p: Position) {
        assert!(self.expect_actor(a).pos.is_none(), "actor already placed");
        self.touch_actor(a);
        self.site_insert(p, a);
        self.actor_mut(a).pos = Some(p);
        let g = self.expect_actor(a).group;
        self.mark_dirty(g);
    }

    /// Replace the kind of `a`, adjusting total mass and invalidating the
    /// root group (behavior counts and diffusion rates may change).
    pub fn set_kind(&mut self, a: ActorId, kind: ActorKind) {
        let old_mass = self.expect_actor(a).own_mass();
        self.touch_meta();
        self.touch_actor(a);
        let actor = self.actor_mut(a);
        actor.kind = kind;
        let new_mass = self.expect_actor(a).own_mass();
        self.mass = self.mass - old_mass + new_mass;
        let rg = self.expect_actor(self.root_of(a)).group;
        self.mark_dirty(rg);
    }

    pub fn fresh_group(&mut self) -> GroupId {
        self.touch_meta();
        let g = GroupId(self.next_group);
        self.next_group += 1;
        self.touch_group(g);
        self.insert_group_slot(
            g,
            Group {
                members: BTreeSet::new(),
                generation: 0,
            },
        );
        self.mark_dirty(g);
        g
    }

    /// Move `a` into group `g`, deleting its old group if emptied.
    pub fn move_to_group(&mut self, a: ActorId, g: GroupId) {
        let old = self.expect_actor(a).group;
        if old == g {
            return;
        }
        self.touch_group(old);
        let old_group = self.group_mut(old);
        old_group.members.remove(&a);
        if old_group.members.is_empty() {
            self.remove_group_slot(old);
        }
        self.touch_group(g);
        self.group_mut(g).members.insert(a);
        self.touch_actor(a);
        self.actor_mut(a).group = g;
        self.mark_dirty(old);
        self.mark_dirty(g);
    }

    pub fn bump_generation(&mut self, g: GroupId) {
        if self.group(g).is_some() {
            self.touch_group(g);
            self.group_mut(g).generation += 1;
        }
    }

    fn insert_actor(&mut self, kind: ActorKind, pos: Option<Position>, parent: Option<ActorId>) -> ActorId {
        self.touch_meta();
        let id = ActorId(self.next_actor);
        self.next_actor += 1;
        let g = self.fresh_group();
        self.touch_group(g);
        self.group_mut(g).members.insert(id);
        let actor = Actor {
            id,
            kind,
            hand: None,
            next: None,
            prev: None,
            group: g,
            parent,
            pos,
        };
        self.mass += actor.own_mass();
        if let Some(txn) = &mut self.txn {
            txn.log.push(Undo::Actor(id, None));
        }
        if let Some(p) = pos {
            self.site_insert(p, id);
        }
        self.insert_actor_slot(id, actor);
        self.mark_dirty(g);
        id
    }

    /// Spawn a root actor in a fresh singleton group.
    pub fn spawn_root(&mut self, kind: ActorKind, pos: Position) -> ActorId {
        self.insert_actor(kind, Some(pos), None)
    }

    /// Spawn an actor directly inside an object, in a fresh singleton
    /// group.
    pub fn spawn_contained(&mut self, kind: ActorKind, parent: ActorId) -> ActorId {
        assert!(self.expect_actor(parent).kind.is_object(), "parent not an object");
        let id = self.insert_actor(kind, None, Some(parent));
        self.touch_actor(parent);
        match &mut self.actor_mut(parent).kind {
            ActorKind::Object { contents, .. } => contents.push(id),
            _ => unreachable!(),
        }
        let rg = self.expect_actor(self.root_of(parent)).group;
        self.mark_dirty(rg);
        id
    }

    /// Append `a` to the contents of `obj` and set its parent.
    pub fn contents_push(&mut self, obj: ActorId, a: ActorId) {
        assert!(self.expect_actor(a).parent.is_none(), "actor already contained");
        assert!(self.expect_actor(a).pos.is_none(), "actor still on the grid");
        self.touch_actor(obj);
        match &mut self.actor_mut(obj).kind {
            ActorKind::Object { contents, .. } => contents.push(a),
            _ => panic!("contents_push on a non-object"),
        }
        self.touch_actor(a);
        self.actor_mut(a).parent = Some(obj);
        let rg = self.expect_actor(self.root_of(obj)).group;
        self.mark_dirty(rg);
    }

    /// Remove `a` from the contents of `obj`, leaving it unparented (the
    /// caller must re-place it).
    pub fn contents_remove(&mut self, obj: ActorId, a: ActorId) {
        self.touch_actor(obj);
        match &mut self.actor_mut(obj).kind {
            ActorKind::Object { contents, .. } => {
                let idx = contents
                    .iter()
                    .position(|&c| c == a)
                    .expect("actor not contained in object");
                contents.remove(idx);
            }
            _ => panic!("contents_remove on a non-object"),
        }
        self.touch_actor(a);
        self.actor_mut(a).parent = None;
        let rg = self.expect_actor(self.root_of(obj)).group;
        self.mark_dirty(rg);
    }

    /// Delete an actor. Bonds must already be cleared and contents moved
    /// out; grid, group and containment links are dismantled here.
    pub fn despawn(&mut self, a: ActorId) {
        let actor = self.expect_actor(a).clone();
        assert!(
            actor.hand.is_none() && actor.next.is_none() && actor.prev.is_none(),
            "despawn with live bonds"
        );
        if let ActorKind::Object { contents, .. } = &actor.kind {
            assert!(contents.is_empty(), "despawn with contents");
        }
        if let Some(parent) = actor.parent {
            self.contents_remove(parent, a);
        }
        self.touch_meta();
        self.touch_actor(a);
        if let Some(p) = actor.pos {
            self.site_remove(p, a);
        }
        self.mass -= actor.own_mass();
        self.remove_actor_slot(a);
        let g = actor.group;
        self.touch_group(g);
        let group = self.group_mut(g);
        group.members.remove(&a);
        if group.members.is_empty() {
            self.remove_group_slot(g);
        }
        self.mark_dirty(g);
    }

    // ------------------------------------------------------------------
    // movement

    /// Would every bond still span at most L1 2 if the given roots moved to
    /// the given positions? Bonds between two moved roots are checked at
    /// their new positions.
    pub fn spans_ok(&self, moved: &[(ActorId, Position)]) -> bool {
        for &(root, new_pos) in moved {
            let violated = self.walk_subtree(root, &mut |actor| {
                for partner in [actor.hand, actor.next, actor.prev].into_iter().flatten() {
                    let proot = self.root_of(partner);
                    let ppos = match moved.iter().find(|(m, _)| *m == proot) {
                        Some(&(_, p)) => p,
                        None => self.expect_actor(proot).pos.expect("root without position"),
                    };
                    if self.torus.l1(new_pos, ppos) > 2 {
                        return true;
                    }
                }
                false
            });
            if violated {
                return false;
            }
        }
        true
    }

    /// Attempt a one-step diffusion move of an embedded group.
    ///
    /// Singleton groups never move onto an occupied site while an adjacent
    /// empty site exists; the move is redirected to a uniformly chosen
    /// empty adjacent site instead. Any move is a no-op if some bond would
    /// end up longer than L1 2.
    pub fn try_group_move(&mut self, g: GroupId, dir: Dir8, rng: &mut SimRng) -> bool {
        if !self.embedded(g) {
            return false;
        }
        let group = self.group(g).expect("embedded group exists");
        let moved: Vec<(ActorId, Position)> = if group.members.len() == 1 {
            let m = *group.members.iter().next().unwrap();
            let cur = self.expect_actor(m).pos.unwrap();
            let mut target = self.torus.offset(cur, dir.dx as i32, dir.dy as i32);
            if !self.occupants(target).is_empty() {
                let empties: Vec<Position> = DIRS8
                    .iter()
                    .map(|d| self.torus.offset(cur, d.dx as i32, d.dy as i32))
                    .filter(|&p| self.occupants(p).is_empty())
                    .collect();
                if !empties.is_empty() {
                    target = empties[rng.gen_range(0..empties.len())];
                }
            }
            alloc::vec![(m, target)]
        } else {
            group
                .members
                .iter()
                .map(|&m| {
                    let cur = self.expect_actor(m).pos.unwrap();
                    (m, self.torus.offset(cur, dir.dx as i32, dir.dy as i32))
                })
                .collect()
        };
        if !self.spans_ok(&moved) {
            return false;
        }
        for (m, p) in moved {
            self.move_root(m, p);
        }
        true
    }

    // ------------------------------------------------------------------
    // consistency

    /// Exhaustive structural check; used after events in small worlds and
    /// by tests.
    pub fn validate(&self) -> Result<(), String> {
        let mut mass = 0u64;
        for &id in &self.live_actors {
            let a = self.expect_actor(id);
            if a.id != id {
                return Err(format!("actor {id} has mismatched id field"));
            }
            if id.0 >= self.next_actor {
                return Err(format!("actor {id} above id counter"));
            }
            mass += a.own_mass();
            // bonds
            if let Some(b) = a.hand {
                let partner = self.actor(b).ok_or(format!("{id}: dangling hand"))?;
                if partner.hand != Some(id) {
                    return Err(format!("{id}: hand not symmetric"));
                }
            }
            if let Some(b) = a.next {
                let partner = self.actor(b).ok_or(format!("{id}: dangling next"))?;
                if partner.prev != Some(id) {
                    return Err(format!("{id}: next without inverse prev"));
                }
            }
            if let Some(b) = a.prev {
                let partner = self.actor(b).ok_or(format!("{id}: dangling prev"))?;
                if partner.next != Some(id) {
                    return Err(format!("{id}: prev without inverse next"));
                }
            }
            for partner in [a.hand, a.next, a.prev].into_iter().flatten() {
                if self.l1_between(id, partner) > 2 {
                    return Err(format!("{id}: bond longer than 2"));
                }
            }
            // position vs rootness
            match (a.parent, a.pos) {
                (None, None) => return Err(format!("{id}: root without position")),
                (Some(_), Some(_)) => return Err(format!("{id}: contained actor on grid")),
                (None, Some(p)) => {
                    if !self.occupants(p).contains(&id) {
                        return Err(format!("{id}: missing from occupancy index"));
                    }
                }
                (Some(parent), None) => {
                    let pa = self.actor(parent).ok_or(format!("{id}: dangling parent"))?;
                    match &pa.kind {
                        ActorKind::Object { contents, .. } => {
                            if contents.iter().filter(|&&c| c == id).count() != 1 {
                                return Err(format!("{id}: not listed once in parent contents"));
                            }
                        }
                        _ => return Err(format!("{id}: parent is not an object")),
                    }
                    // containment must be acyclic
                    let mut hops = 0usize;
                    let mut cur = id;
                    while let Some(p) = self.expect_actor(cur).parent {
                        cur = p;
                        hops += 1;
                        if hops > self.actors.len() {
                            return Err(format!("{id}: containment cycle"));
                        }
                    }
                }
            }
            // group membership
            let grp = self
                .group(a.group)
                .ok_or(format!("{id}: dangling group"))?;
            if !grp.members.contains(&id) {
                return Err(format!("{id}: not a member of its group"));
            }
            // contents point back
            if let ActorKind::Object { contents, .. } = &a.kind {
                for &c in contents {
                    let child = self.actor(c).ok_or(format!("{id}: dangling content"))?;
                    if child.parent != Some(id) {
                        return Err(format!("{id}: content {c} has wrong parent"));
                    }
                }
            }
        }
        for &gid in &self.live_groups {
            let grp = self.group(gid).expect("dangling live group");
            if gid.0 >= self.next_group {
                return Err(format!("group {gid} above id counter"));
            }
            if grp.members.is_empty() {
                return Err(format!("group {gid} is empty"));
            }
            for &m in &grp.members {
                let a = self.actor(m).ok_or(format!("group {gid}: dangling member"))?;
                if a.group != gid {
                    return Err(format!("group {gid}: member {m} claims another group"));
                }
            }
        }
        // occupancy matches positions exactly
        for i in 0..self.sites.len() {
            for &id in &self.sites[i] {
                let a = self.actor(id).ok_or(format!("site {i}: dangling occupant"))?;
                if a.pos != Some(self.torus.position(i)) {
                    return Err(format!("site {i}: occupant {id} has wrong position"));
                }
            }
        }
        if mass != self.mass {
            return Err(format!(
                "mass counter {} disagrees with computed {}",
                self.mass, mass
            ));
        }
        Ok(())
    }
}
