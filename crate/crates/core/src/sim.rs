//! Event-driven simulation: a priority queue of per-group diffusion and
//! action events with exponential waiting times.
//!
//! Diffusion events move an embedded group one step in a random direction;
//! the waiting time has mean `m * s / D` with `s = 1`, so heavy groups are
//! slow. Action events pick one behavior uniformly from the group closure
//! and run it; the next action event's waiting time has mean equal to the
//! time the run consumed, so expensive (or repeatedly failing) behaviors
//! act rarely. Stale events are invalidated by group generation counters
//! rather than removed from the queue.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;

use rand::Rng;

use crate::actor::{ActorId, ActorKind, GroupId, ObjectClass};
use crate::actor_vm;
use crate::grid::DIRS8;
use crate::opcode::Opcode;
use crate::rng::{sample_exp, SimRng};
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Diffusion,
    Action,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct QueuedEvent {
    time: f64,
    seq: u64,
    group: GroupId,
    generation: u64,
    kind: EventKind,
}

impl Eq for QueuedEvent {}

impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // min-heap via Reverse; ties broken by insertion order
        self.time
            .partial_cmp(&other.time)
            .expect("event times are finite")
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// What a free consumable looks like for replenishment and the census.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Template {
    Primitive(Opcode),
    EmptyObject(ObjectClass),
}

impl Template {
    /// A free instance: root, unbonded, alone in its group, matching kind.
    pub fn matches(&self, world: &World, actor: &crate::actor::Actor) -> bool {
        if !actor.is_root()
            || actor.hand.is_some()
            || actor.next.is_some()
            || actor.prev.is_some()
        {
            return false;
        }
        if world.group(actor.group).map_or(0, |g| g.members.len()) != 1 {
            return false;
        }
        match (self, &actor.kind) {
            (Template::Primitive(op), ActorKind::Combinator(c)) => {
                c.is_primitive() && c.ops()[0] == *op
            }
            (Template::EmptyObject(class), ActorKind::Object { class: c, contents }) => {
                c == class && contents.is_empty()
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplenishTarget {
    pub template: Template,
    pub target: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Ratio of computation to transport cost (D). One primitive machine
    /// operation per unit time; transporting unit mass over unit distance
    /// costs `1/D` of that.
    pub d_ratio: f64,
    /// Free-consumable counts to hold constant; empty disables
    /// replenishment.
    pub replenish: Vec<ReplenishTarget>,
    /// Run the exhaustive world checker after every event (small worlds
    /// only).
    pub validate_every_event: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            d_ratio: 10.0,
            replenish: Vec::new(),
            validate_every_event: false,
        }
    }
}

/// Mean diffusion waiting time for a group of the given mass (s = 1).
pub fn diffusion_mean(mass: u64, d_ratio: f64) -> f64 {
    mass as f64 / d_ratio
}

/// Sample the waiting time to a group's next diffusion event.
pub fn sample_diffusion_gap(rng: &mut SimRng, mass: u64, d_ratio: f64) -> f64 {
    sample_exp(rng, diffusion_mean(mass, d_ratio))
}

/// Sample the waiting time to a group's next action event, given the time
/// the last behavior run consumed.
pub fn sample_action_gap(rng: &mut SimRng, cost: f64) -> f64 {
    sample_exp(rng, cost.max(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventReport {
    pub time: f64,
    pub kind: EventKind,
    pub group: GroupId,
    /// Diffusion: whether the group actually moved.
    pub moved: bool,
    /// Action: which behavior ran.
    pub behavior: Option<ActorId>,
    pub succeeded: bool,
    /// Ticks logged by the run (action events).
    pub cost: u64,
    /// Whether any intents were committed.
    pub committed: bool,
}

pub struct Simulation {
    pub world: World,
    pub rng: SimRng,
    pub config: SimConfig,
    queue: BinaryHeap<core::cmp::Reverse<QueuedEvent>>,
    seq: u64,
    pub now: f64,
    pub event_count: u64,
    /// Time consumed by the last behavior run charged to each group.
    last_cost: BTreeMap<GroupId, f64>,
}

impl Simulation {
    pub fn new(world: World, config: SimConfig, rng: SimRng) -> Simulation {
        let mut sim = Simulation {
            world,
            rng,
            config,
            queue: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            event_count: 0,
            last_cost: BTreeMap::new(),
        };
        sim.world.take_dirty();
        if !sim.config.replenish.is_empty() {
            sim.replenish();
            sim.world.take_dirty();
        }
        let groups: Vec<GroupId> = sim.world.groups().map(|(g, _)| g).collect();
        for g in groups {
            sim.schedule_group(g);
        }
        sim
    }

    fn push(&mut self, time: f64, group: GroupId, kind: EventKind) {
        let generation = match self.world.group(group) {
            Some(g) => g.generation,
            None => return,
        };
        let ev = QueuedEvent {
            time,
            seq: self.seq,
            group,
            generation,
            kind,
        };
        self.seq += 1;
        self.queue.push(core::cmp::Reverse(ev));
    }

    pub fn schedule_diffusion(&mut self, g: GroupId) {
        if !self.world.embedded(g) {
            return;
        }
        let mass = self.world.group_mass(g);
        let gap = sample_diffusion_gap(&mut self.rng, mass, self.config.d_ratio);
        self.push(self.now + gap, g, EventKind::Diffusion);
    }

    pub fn schedule_action(&mut self, g: GroupId) {
        if !self.world.embedded(g) || !self.world.has_behavior_in_closure(g) {
            return;
        }
        let cost = self.last_cost.get(&g).copied().unwrap_or(1.0);
        let gap = sample_action_gap(&mut self.rng, cost);
        self.push(self.now + gap, g, EventKind::Action);
    }

    /// Schedule both event kinds for a group, as far as it is eligible.
    pub fn schedule_group(&mut self, g: GroupId) {
        self.schedule_diffusion(g);
        self.schedule_action(g);
    }

    fn is_valid(&self, ev: &QueuedEvent) -> bool {
        match self.world.group(ev.group) {
            Some(g) if g.generation == ev.generation => match ev.kind {
                EventKind::Diffusion => self.world.embedded(ev.group),
                EventKind::Action => {
                    self.world.embedded(ev.group) && self.world.has_behavior_in_closure(ev.group)
                }
            },
            _ => false,
        }
    }

    /// Time of the next valid event, discarding stale ones.
    pub fn peek_time(&mut self) -> Option<f64> {
        loop {
            let ev = self.queue.peek()?.0;
            if self.is_valid(&ev) {
                return Some(ev.time);
            }
            self.queue.pop();
        }
    }

    /// Process the next valid event, if any.
    pub fn step(&mut self) -> Option<EventReport> {
        let ev = loop {
            let core::cmp::Reverse(ev) = self.queue.pop()?;
            if self.is_valid(&ev) {
                break ev;
            }
        };
        debug_assert!(ev.time >= self.now, "event times must be non-decreasing");
        self.now = ev.time;
        self.event_count += 1;
        let report = match ev.kind {
            EventKind::Diffusion => {
                let dir = DIRS8[self.rng.gen_range(0..DIRS8.len())];
                let moved = self.world.try_group_move(ev.group, dir, &mut self.rng);
                self.schedule_diffusion(ev.group);
                EventReport {
                    time: ev.time,
                    kind: EventKind::Diffusion,
                    group: ev.group,
                    moved,
                    behavior: None,
                    succeeded: false,
                    cost: 0,
                    committed: false,
                }
            }
            EventKind::Action => {
                let behaviors = self.world.behaviors_in_closure(ev.group);
                let chosen = behaviors[self.rng.gen_range(0..behaviors.len())];
                let outcome = actor_vm::run_behavior(&mut self.world, &mut self.rng, chosen)
                    .expect("reified behaviors never hit unsupported opcodes");
                let committed = match &outcome.status {
                    crate::vm::Status::Succeeded { intents } => !intents.is_empty(),
                    crate::vm::Status::Failed => false,
                };
                let cost = outcome.cost.ticks;
                // charge the run to wherever the behavior now lives
                if self.world.actor(chosen).is_some() {
                    let home = self.world.expect_actor(self.world.root_of(chosen)).group;
                    self.last_cost.insert(home, (cost as f64).max(1.0));
                }
                if committed && !self.config.replenish.is_empty() {
                    self.replenish();
                }
                let dirty = self.world.take_dirty();
                for &g in &dirty {
                    self.world.bump_generation(g);
                }
                for &g in &dirty {
                    self.schedule_group(g);
                }
                if !dirty.contains(&ev.group) {
                    self.schedule_action(ev.group);
                }
                EventReport {
                    time: ev.time,
                    kind: EventKind::Action,
                    group: ev.group,
                    moved: false,
                    behavior: Some(chosen),
                    succeeded: outcome.succeeded(),
                    cost,
                    committed,
                }
            }
        };
        if self.config.validate_every_event {
            if let Err(msg) = self.world.validate() {
                panic!("world invariant broken after event: {msg}");
            }
        }
        Some(report)
    }

    /// Run until the next valid event would exceed `horizon` or `max_events`
    /// (0 = unlimited) have been processed.
    pub fn run_until(&mut self, horizon: f64, max_events: u64) {
        while max_events == 0 || self.event_count < max_events {
            match self.peek_time() {
                Some(t) if t <= horizon => {
                    self.step();
                }
                _ => break,
            }
        }
    }

    /// Top up free consumables to their configured counts, spawning at
    /// uniformly chosen empty sites.
    pub fn replenish(&mut self) {
        let targets = self.config.replenish.clone();
        let mut counts: Vec<u32> = alloc::vec![0; targets.len()];
        for actor in self.world.actors() {
            for (i, t) in targets.iter().enumerate() {
                if t.template.matches(&self.world, actor) {
                    counts[i] += 1;
                }
            }
        }
        let mut empties = self.world.empty_sites();
        for (i, t) in targets.iter().enumerate() {
            for _ in counts[i]..t.target {
                if empties.is_empty() {
                    return;
                }
                let site = empties.swap_remove(self.rng.gen_range(0..empties.len()));
                let kind = match t.template {
                    Template::Primitive(op) => {
                        ActorKind::Combinator(crate::actor::Composition::single(op))
                    }
                    Template::EmptyObject(class) => ActorKind::empty_object(class),
                };
                self.world.spawn_root(kind, site);
            }
        }
        // newly spawned groups need their first events
        let dirty = self.world.take_dirty();
        for &g in &dirty {
            self.world.bump_generation(g);
        }
        for &g in &dirty {
            self.schedule_group(g);
        }
    }
}
