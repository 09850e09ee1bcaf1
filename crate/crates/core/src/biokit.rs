//! Plasmids, enzymes, ribosomes and factories: the self-replication kit.
//!
//! A plasmid reifies a compiled program as a chain of combinator actors
//! linked by directed bonds, closed by a single undirected bond that marks
//! the origin. A ribosome is a class-0 object holding four enzymes that
//! translate plasmids into enzymes: association attaches the ribosome to
//! the origin's group, initiation swallows a combinator matching the
//! origin, elongation extends it combinator by combinator while walking
//! the chain, and termination promotes the finished combinator to a
//! behavior and expels it. A factory is a class-1 object holding five
//! enzymes that copy compositional information: it bonds a model object,
//! takes an empty container of the model's class by the hand, gathers
//! matching behaviors into the container, and releases the finished
//! product, installing the enabling self-bond when the product is a
//! ribosome. Hanging the product on the undirected hand (rather than a
//! directed bond) is what lets enzymes inside an unreleased product tell
//! their situation apart from a working factory and stay dormant.
//!
//! The ribosome tracks its position on the plasmid through group
//! membership (it shares a group with the combinator it is reading), so
//! the chain's own bonds are never disturbed.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::actor::{ActorId, ActorKind, Composition, ObjectClass};
use crate::compiler;
use crate::grid::{Position, DIRS8};
use crate::opcode::Opcode;
use crate::rng::SimRng;
use crate::sim::{ReplenishTarget, Template};
use crate::world::World;

/// Association: requires the enabling self-bond, picks an unclaimed
/// plasmid origin (hand and next, empty contents, alone in its group) in
/// the neighborhood, drops the self-bond and joins the origin's group.
/// The contents guard tells origins apart from working factories, which
/// also carry a hand (product) and a next (model).
pub const RIB_A: &str = "\
# ribosome association
t00: input
t01: op parents
t02: guard A
t03: op nexts
t04: op same
t05: guard S
t06: op neighbors
t07: guard A
t08: op hands
t09: guard S
t10: op nexts
t11: guard S
t12: op contents
t13: guard N
t14: op others
t15: guard N
z1: act unbond
z2: act join
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t02 ->2 t04
t04 -> t05
t02 -> t06
t06 -> t07
t07 -> t08
t08 -> t09
t07 -> t10
t10 -> t11
t07 -> t12
t12 -> t13
t07 -> t14
t14 -> t15
t02 -> z1
z1 -> z2
t07 ->2 z2
";

/// Initiation: at the origin (group mate with hand and next) and with no
/// chain started yet, swallow an unbonded neighbor of the origin's type.
pub const RIB_I: &str = "\
# ribosome initiation
t00: input
t01: op parents
t02: guard A
t03: op others
t04: guard A
t05: op hands
t06: guard S
t07: op nexts
t08: guard S
t09: op contents
t10: op dissimilar
t11: guard S
t12: op neighbors
t13: guard A
t14: op similar
t15: guard S
t16: op bonds
t17: guard N
z1: act eat
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t04 -> t05
t05 -> t06
t04 -> t07
t07 -> t08
t02 -> t09
t09 -> t10
t04 ->2 t10
t10 -> t11
t02 -> t12
t12 -> t13
t13 -> t14
t04 ->2 t14
t14 -> t15
t13 -> t16
t16 -> t17
t13 -> z1
t02 ->2 z1
";

/// Elongation: compose an unbonded neighbor matching the chain successor
/// onto the combinator inside, release the current chain position and pull
/// the successor (mass 1) into the ribosome's group; join's relocation
/// rule drags it adjacent when it is out of reach, so the chain threads
/// through the ribosome. The claim guard (successor alone in its group)
/// keeps ribosomes from stealing each other's position. Only the
/// combinator inside survives compose's precondition, which is what
/// singles it out among the contents.
pub const RIB_E: &str = "\
# ribosome elongation
t00: input
t01: op parents
t02: guard A
t03: op others
t04: guard A
t05: op nexts
t06: guard A
t07: op others
t08: guard N
t09: op neighbors
t10: guard A
t11: op similar
t12: guard S
t13: op bonds
t14: guard N
t15: op contents
t16: guard A
z1: act compose
z2: act quit
z3: act join
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t04 -> t05
t05 -> t06
t06 -> t07
t07 -> t08
t02 -> t09
t09 -> t10
t10 -> t11
t06 ->2 t11
t11 -> t12
t10 -> t13
t13 -> t14
t02 -> t15
t15 -> t16
t16 -> z1
t10 ->2 z1
t04 -> z2
t06 -> z3
t02 ->2 z3
z1 .-> z2
z2 .-> z3
";

/// Termination: at the chain's terminal combinator (hand, no next),
/// promote the finished combinator, expel it, leave the plasmid's group
/// and restore the enabling self-bond.
pub const RIB_T: &str = "\
# ribosome termination
t00: input
t01: op parents
t02: guard A
t03: op others
t04: guard A
t05: op nexts
t06: guard N
t07: op hands
t08: guard S
t09: op contents
t10: guard A
z1: act on
z2: act exit
z3: act quit
z4: act bond
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t04 -> t05
t05 -> t06
t04 -> t07
t07 -> t08
t02 -> t09
t09 -> t10
t10 -> z1
z1 -> z2
t02 -> z3
z3 -> z4
t02 ->2 z4
z2 .-> z3
";

/// Model association: a factory with neither model nor product bonds any
/// unbonded non-empty object in the neighborhood. The hand-empty guard
/// keeps enzymes dormant while they sit inside an unreleased product
/// (products hang on the factory's hand).
pub const FAC_A: &str = "\
# factory model association
t00: input
t01: op parents
t02: guard A
t03: op nexts
t04: guard N
t05: op hands
t06: guard N
t07: op neighbors
t08: guard A
t09: op contents
t10: guard S
t11: op bonds
t12: guard N
z1: act bond
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t02 -> t05
t05 -> t06
t02 -> t07
t07 -> t08
t08 -> t09
t09 -> t10
t08 -> t11
t11 -> t12
t02 -> z1
t08 ->2 z1
";

/// Product container: with a model but no product, take an empty unbonded
/// object of the model's class by the hand. Enzymes inside a product see
/// no model on their parent and stay dormant.
pub const FAC_B: &str = "\
# factory product container
t00: input
t01: op parents
t02: guard A
t03: op nexts
t04: guard A
t05: op hands
t06: guard N
t07: op neighbors
t08: guard A
t09: op contents
t10: guard N
t11: op bonds
t12: guard N
t13: op similar
t14: guard S
z1: act grab
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t02 -> t05
t05 -> t06
t02 -> t07
t07 -> t08
t08 -> t09
t09 -> t10
t08 -> t11
t11 -> t12
t08 -> t13
t04 ->2 t13
t13 -> t14
t02 -> z1
t08 ->2 z1
";

/// Collection: move a neighborhood behavior matching the model's contents
/// into the product hanging on the hand, skipping types the product
/// already holds.
pub const FAC_Y: &str = "\
# factory collection
t00: input
t01: op parents
t02: guard A
t03: op nexts
t04: guard A
t05: op hands
t06: guard A
t07: op contents
t08: op contents
t09: op neighbors
t10: guard A
t11: op similar
t12: guard S
t13: op dissimilar
t14: guard S
z1: act eat
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t02 -> t05
t05 -> t06
t04 -> t07
t06 -> t08
t02 -> t09
t09 -> t10
t10 -> t11
t07 ->2 t11
t11 -> t12
t10 -> t13
t08 ->2 t13
t13 -> t14
t10 -> z1
t06 ->2 z1
";

/// Release of a factory product: when model and product hold mutually
/// matching type sets and the model is of the factory's own class, let go
/// of the hand.
pub const FAC_Z: &str = "\
# factory release
t00: input
t01: op parents
t02: guard A
t03: op nexts
t04: guard A
t05: op hands
t06: guard A
t07: op similar
t08: guard S
t09: op contents
t10: op contents
t11: op similar
t12: guard S
t13: op similar
t14: guard S
z1: act drop
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t02 -> t05
t05 -> t06
t04 -> t07
t02 ->2 t07
t07 -> t08
t04 -> t09
t06 -> t10
t09 -> t11
t10 ->2 t11
t11 -> t12
t10 -> t13
t09 ->2 t13
t13 -> t14
t02 -> z1
";

/// Release of a ribosome product: same completeness test but for models
/// not of the factory's class; installs the enabling self-bond on the
/// product, then lets go of the hand.
pub const FAC_Z_PRIME: &str = "\
# factory release, ribosome product
t00: input
t01: op parents
t02: guard A
t03: op nexts
t04: guard A
t05: op hands
t06: guard A
t07: op dissimilar
t08: guard S
t09: op contents
t10: op contents
t11: op similar
t12: guard S
t13: op similar
t14: guard S
z1: act bond
z2: act drop
t00 -> t01
t01 -> t02
t02 -> t03
t03 -> t04
t02 -> t05
t05 -> t06
t04 -> t07
t02 ->2 t07
t07 -> t08
t04 -> t09
t06 -> t10
t09 -> t11
t10 ->2 t11
t11 -> t12
t10 -> t13
t09 ->2 t13
t13 -> t14
t06 -> z1
t06 ->2 z1
t02 -> z2
z1 .-> z2
";

pub const ENZYME_NAMES: [&str; 9] = [
    "ribA", "ribI", "ribE", "ribT", "facA", "facB", "facY", "facZ", "facZ'",
];

/// The four ribosomal behavior sources, in stage order.
pub fn ribosome_programs() -> [&'static str; 4] {
    [RIB_A, RIB_I, RIB_E, RIB_T]
}

/// The five factory behavior sources.
pub fn factory_programs() -> [&'static str; 5] {
    [FAC_A, FAC_B, FAC_Y, FAC_Z, FAC_Z_PRIME]
}

pub fn program_source(name: &str) -> Option<&'static str> {
    let sources = [RIB_A, RIB_I, RIB_E, RIB_T, FAC_A, FAC_B, FAC_Y, FAC_Z, FAC_Z_PRIME];
    ENZYME_NAMES
        .iter()
        .position(|&n| n == name)
        .map(|i| sources[i])
}

/// The nine canonical enzymes, compiled.
#[derive(Clone, Debug)]
pub struct EnzymeKit {
    pub compositions: Vec<Composition>,
}

impl EnzymeKit {
    pub fn standard() -> EnzymeKit {
        let compositions = ENZYME_NAMES
            .iter()
            .map(|name| {
                let prog = compiler::compile(program_source(name).unwrap())
                    .unwrap_or_else(|e| panic!("built-in program {name} failed to compile: {e}"));
                prog.to_composition()
                    .unwrap_or_else(|e| panic!("built-in program {name} is not reifiable: {e}"))
            })
            .collect();
        EnzymeKit { compositions }
    }

    pub fn name(&self, i: usize) -> &'static str {
        ENZYME_NAMES[i]
    }

    /// ribA, ribI, ribE, ribT.
    pub fn ribosomal(&self) -> &[Composition] {
        &self.compositions[0..4]
    }

    /// facA, facB, facY, facZ, facZ'.
    pub fn factory(&self) -> &[Composition] {
        &self.compositions[4..9]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetupError {
    RegionOccupied(Position),
    InsufficientSpace,
}

impl core::fmt::Display for SetupError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SetupError::RegionOccupied(p) => write!(f, "placement region occupied at {p}"),
            SetupError::InsufficientSpace => write!(f, "not enough free space in the world"),
        }
    }
}

/// Serpentine footprint of a plasmid of the given length, anchored at
/// `origin`: two rows, out along the first and back along the second, so
/// consecutive links span at most L1 2 and the ends meet for the closing
/// hand.
pub fn plasmid_sites(world: &World, origin: Position, len: usize) -> Vec<Position> {
    let torus = world.torus();
    let row = len.div_ceil(2);
    (0..len)
        .map(|i| {
            if i < row {
                torus.offset(origin, i as i32, 0)
            } else {
                torus.offset(origin, (len - 1 - i) as i32, 1)
            }
        })
        .collect()
}

/// Reify a program as a plasmid anchored at `origin`. Each combinator is a
/// root in its own group; directed bonds run down the chain and one hand
/// closes it, so the origin is the unique member with hand and next but no
/// prev.
pub fn build_plasmid(
    world: &mut World,
    ops: &Composition,
    origin: Position,
) -> Result<Vec<ActorId>, SetupError> {
    let sites = plasmid_sites(world, origin, ops.ops().len());
    for &site in &sites {
        if !world.occupants(site).is_empty() {
            return Err(SetupError::RegionOccupied(site));
        }
    }
    let ids: Vec<ActorId> = ops
        .ops()
        .iter()
        .zip(&sites)
        .map(|(&op, &site)| world.spawn_root(ActorKind::Combinator(Composition::single(op)), site))
        .collect();
    for pair in ids.windows(2) {
        world.create_next(pair[0], pair[1]);
    }
    world.create_hand(ids[0], ids[ids.len() - 1]);
    Ok(ids)
}

/// The plasmid origin signature: has hand and next but no prev.
pub fn is_plasmid_origin(world: &World, a: ActorId) -> bool {
    let actor = world.expect_actor(a);
    actor.hand.is_some() && actor.next.is_some() && actor.prev.is_none()
}

/// Build a ribosome: a class-0 object holding the four ribosomal enzymes.
/// Enabled ribosomes carry the self-bond that arms association; disabled
/// ones serve as models.
pub fn build_ribosome(world: &mut World, pos: Position, kit: &EnzymeKit, enabled: bool) -> ActorId {
    let class0 = ObjectClass::new(0).unwrap();
    let r = world.spawn_root(ActorKind::empty_object(class0), pos);
    for comp in kit.ribosomal() {
        world.spawn_contained(ActorKind::Behavior(comp.clone()), r);
    }
    if enabled {
        world.create_next(r, r);
    }
    r
}

/// Build a factory: a class-1 object holding the five factory enzymes.
pub fn build_factory(world: &mut World, pos: Position, kit: &EnzymeKit) -> ActorId {
    let class1 = ObjectClass::new(1).unwrap();
    let f = world.spawn_root(ActorKind::empty_object(class1), pos);
    for comp in kit.factory() {
        world.spawn_contained(ActorKind::Behavior(comp.clone()), f);
    }
    f
}

/// Counts of complete assemblies and free consumables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Census {
    /// Class-0 objects containing all four ribosomal enzyme types.
    pub ribosomes: u32,
    /// Class-1 objects containing all five factory enzyme types.
    pub factories: u32,
    /// Root behavior actors (loose enzymes).
    pub free_enzymes: u32,
    pub free_primitives: BTreeMap<Opcode, u32>,
    pub free_objects: [u32; 4],
    pub total_mass: u64,
}

fn contains_all_types(world: &World, contents: &[ActorId], wanted: &[Composition]) -> bool {
    wanted.iter().all(|comp| {
        contents.iter().any(|&c| match &world.expect_actor(c).kind {
            ActorKind::Behavior(b) => b.hash() == comp.hash(),
            _ => false,
        })
    })
}

pub fn is_complete_ribosome(world: &World, a: ActorId, kit: &EnzymeKit) -> bool {
    match &world.expect_actor(a).kind {
        ActorKind::Object { class, contents } if class.index() == 0 => {
            contains_all_types(world, contents, kit.ribosomal())
        }
        _ => false,
    }
}

pub fn is_complete_factory(world: &World, a: ActorId, kit: &EnzymeKit) -> bool {
    match &world.expect_actor(a).kind {
        ActorKind::Object { class, contents } if class.index() == 1 => {
            contains_all_types(world, contents, kit.factory())
        }
        _ => false,
    }
}

pub fn census(world: &World, kit: &EnzymeKit) -> Census {
    let mut out = Census {
        ribosomes: 0,
        factories: 0,
        free_enzymes: 0,
        free_primitives: BTreeMap::new(),
        free_objects: [0; 4],
        total_mass: world.total_mass(),
    };
    for actor in world.actors() {
        if is_complete_ribosome(world, actor.id, kit) {
            out.ribosomes += 1;
        }
        if is_complete_factory(world, actor.id, kit) {
            out.factories += 1;
        }
        if actor.is_root() && actor.kind.is_behavior() {
            out.free_enzymes += 1;
        }
        if let ActorKind::Combinator(c) = &actor.kind {
            if c.is_primitive() && Template::Primitive(c.ops()[0]).matches(world, actor) {
                *out.free_primitives.entry(c.ops()[0]).or_insert(0) += 1;
            }
        }
        if let ActorKind::Object { class, .. } = &actor.kind {
            if Template::EmptyObject(*class).matches(world, actor) {
                out.free_objects[class.index() as usize] += 1;
            }
        }
    }
    out
}

/// Configuration of the mutual-replication experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub width: u16,
    pub height: u16,
    /// Enabled ribosomes (the paper's r).
    pub ribosomes: u32,
    /// Factories pre-loaded with a disabled-ribosome model.
    pub rib_factories: u32,
    /// Factories pre-loaded with a factory model.
    pub fac_factories: u32,
    /// Copies of each of the nine plasmids.
    pub plasmid_copies: u32,
    /// Multiplier on the stoichiometric consumable targets.
    pub replenish_scale: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            width: 64,
            height: 64,
            ribosomes: 64,
            rib_factories: 1,
            fac_factories: 1,
            plasmid_copies: 1,
            replenish_scale: 1.0,
        }
    }
}

/// Free-consumable targets: each primitive weighted by its count across
/// two ribosome equivalents and three factory equivalents of enzymes, plus
/// two class-0 and three class-1 empty shells, all scaled.
pub fn replenish_targets(kit: &EnzymeKit, spec: &ExperimentSpec) -> Vec<ReplenishTarget> {
    let scale = |n: u32| -> u32 { libm::ceil(n as f64 * spec.replenish_scale) as u32 };
    let mut weights: BTreeMap<Opcode, u32> = BTreeMap::new();
    for comp in kit.ribosomal() {
        for (op, count) in comp.decompose() {
            *weights.entry(op).or_insert(0) += 2 * count;
        }
    }
    for comp in kit.factory() {
        for (op, count) in comp.decompose() {
            *weights.entry(op).or_insert(0) += 3 * count;
        }
    }
    let mut targets: Vec<ReplenishTarget> = weights
        .into_iter()
        .map(|(op, w)| ReplenishTarget {
            template: Template::Primitive(op),
            target: scale(w),
        })
        .collect();
    targets.push(ReplenishTarget {
        template: Template::EmptyObject(ObjectClass::new(0).unwrap()),
        target: scale(2),
    });
    targets.push(ReplenishTarget {
        template: Template::EmptyObject(ObjectClass::new(1).unwrap()),
        target: scale(3),
    });
    targets
}

fn random_empty(world: &World, rng: &mut SimRng) -> Result<Position, SetupError> {
    let empties = world.empty_sites();
    if empties.is_empty() {
        return Err(SetupError::InsufficientSpace);
    }
    Ok(empties[rng.gen_range(0..empties.len())])
}

/// An empty site with an empty neighbor, for bonded pairs.
fn random_empty_pair(world: &World, rng: &mut SimRng) -> Result<(Position, Position), SetupError> {
    for _ in 0..4096 {
        let p = random_empty(world, rng)?;
        let torus = world.torus();
        let free: Vec<Position> = DIRS8
            .iter()
            .map(|d| torus.offset(p, d.dx as i32, d.dy as i32))
            .filter(|&q| world.occupants(q).is_empty())
            .collect();
        if !free.is_empty() {
            return Ok((p, free[rng.gen_range(0..free.len())]));
        }
    }
    Err(SetupError::InsufficientSpace)
}

/// Populate a world for the mutual-replication experiment: the nine
/// plasmids, a surplus of enabled ribosomes, single factories carrying
/// ribosome and factory models, and the initial consumable pool at its
/// replenishment targets.
pub fn setup_experiment(
    spec: &ExperimentSpec,
    kit: &EnzymeKit,
    rng: &mut SimRng,
) -> Result<(World, Vec<ReplenishTarget>), SetupError> {
    let mut world = World::new(spec.width, spec.height);
    // plasmids first; they have the largest footprint
    for comp in &kit.compositions {
        for _ in 0..spec.plasmid_copies {
            let mut placed = false;
            for _ in 0..4096 {
                let anchor = random_empty(&world, rng)?;
                if build_plasmid(&mut world, comp, anchor).is_ok() {
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(SetupError::InsufficientSpace);
            }
        }
    }
    for _ in 0..spec.rib_factories {
        let (fp, mp) = random_empty_pair(&world, rng)?;
        let f = build_factory(&mut world, fp, kit);
        let model = build_ribosome(&mut world, mp, kit, false);
        world.create_next(f, model);
    }
    for _ in 0..spec.fac_factories {
        let (fp, mp) = random_empty_pair(&world, rng)?;
        let f = build_factory(&mut world, fp, kit);
        let model = build_factory(&mut world, mp, kit);
        world.create_next(f, model);
    }
    for _ in 0..spec.ribosomes {
        let p = random_empty(&world, rng)?;
        build_ribosome(&mut world, p, kit, true);
    }
    let targets = replenish_targets(kit, spec);
    for t in &targets {
        for _ in 0..t.target {
            let p = random_empty(&world, rng)?;
            let kind = match t.template {
                Template::Primitive(op) => ActorKind::Combinator(Composition::single(op)),
                Template::EmptyObject(class) => ActorKind::empty_object(class),
            };
            world.spawn_root(kind, p);
        }
    }
    Ok((world, targets))
}

/// A small world for exercising one ribosome against one plasmid: the
/// ribosome starts next to the origin and the needed primitive types are
/// held at a surplus.
pub fn translation_world(
    plasmid: &Composition,
    width: u16,
    height: u16,
    kit: &EnzymeKit,
    rng: &mut SimRng,
) -> Result<(World, Vec<ReplenishTarget>, ActorId), SetupError> {
    let mut world = World::new(width, height);
    let anchor = Position {
        x: width / 4,
        y: height / 2,
    };
    build_plasmid(&mut world, plasmid, anchor)?;
    // co-located with the origin: association usually fires first try
    let ribosome = build_ribosome(&mut world, anchor, kit, true);
    let mut targets = Vec::new();
    for (op, count) in plasmid.decompose() {
        let t = ReplenishTarget {
            template: Template::Primitive(op),
            target: 2 * count + 3,
        };
        for _ in 0..t.target {
            let p = random_empty(&world, rng)?;
            world.spawn_root(ActorKind::Combinator(Composition::single(op)), p);
        }
        targets.push(t);
    }
    Ok((world, targets, ribosome))
}

/// Find expelled enzymes: root behaviors whose composition sequence equals
/// the plasmid program.
pub fn expelled_enzymes(world: &World, plasmid: &Composition) -> Vec<ActorId> {
    world
        .actors()
        .filter(|a| a.is_root())
        .filter(|a| match &a.kind {
            ActorKind::Behavior(c) => c.ops() == plasmid.ops(),
            _ => false,
        })
        .map(|a| a.id)
        .collect()
}

/// One line per enzyme: name, mass, type hash.
pub fn describe_kit(kit: &EnzymeKit) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (i, comp) in kit.compositions.iter().enumerate() {
        let _ = writeln!(s, "{}: mass {} hash {}", ENZYME_NAMES[i], comp.mass(), comp.hash());
    }
    s
}
