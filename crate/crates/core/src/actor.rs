//! Actors: combinators, behaviors and objects, with type hashing and mass.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::grid::Position;
use crate::opcode::Opcode;

/// Identity of an actor. Ids are assigned in creation order and never
/// reused, so iteration by id is deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActorId(pub u64);

/// Identity of a group. Every actor belongs to exactly one group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId(pub u64);

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One of the four immutable object classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ObjectClass(u8);

impl ObjectClass {
    pub fn new(class: u8) -> Option<ObjectClass> {
        (class <= 3).then_some(ObjectClass(class))
    }

    pub fn index(self) -> u8 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompositionError {
    Empty,
    NotReifiable(Opcode),
}

impl fmt::Display for CompositionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompositionError::Empty => write!(f, "a composition must contain at least one opcode"),
            CompositionError::NotReifiable(op) => {
                write!(f, "opcode `{op}` is not reifiable")
            }
        }
    }
}

/// An ordered, non-empty sequence of reifiable opcodes. The execution order
/// is the sequence order; the type hash is the order-insensitive product of
/// the member primes, kept incrementally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composition {
    ops: Vec<Opcode>,
    hash: BigUint,
}

impl Composition {
    pub fn new(ops: Vec<Opcode>) -> Result<Composition, CompositionError> {
        if ops.is_empty() {
            return Err(CompositionError::Empty);
        }
        let mut hash = BigUint::from(1u8);
        for &op in &ops {
            let p = op.prime().ok_or(CompositionError::NotReifiable(op))?;
            hash *= p;
        }
        Ok(Composition { ops, hash })
    }

    pub fn single(op: Opcode) -> Composition {
        Composition::new(alloc::vec![op]).expect("primitive composition")
    }

    pub fn ops(&self) -> &[Opcode] {
        &self.ops
    }

    /// Number of primitive opcodes.
    pub fn mass(&self) -> u64 {
        self.ops.len() as u64
    }

    /// Product of the member primes.
    pub fn hash(&self) -> &BigUint {
        &self.hash
    }

    pub fn is_primitive(&self) -> bool {
        self.ops.len() == 1
    }

    /// Kleisli composition: sequence concatenation. Hash multiplies, mass
    /// adds.
    pub fn concat(&self, other: &Composition) -> Composition {
        let mut ops = self.ops.clone();
        ops.extend_from_slice(&other.ops);
        Composition {
            ops,
            hash: &self.hash * &other.hash,
        }
    }

    /// Append another composition in place.
    pub fn extend(&mut self, other: &Composition) {
        self.ops.extend_from_slice(&other.ops);
        self.hash *= &other.hash;
    }

    /// Multiset of primitive opcodes.
    pub fn decompose(&self) -> BTreeMap<Opcode, u32> {
        let mut multiset = BTreeMap::new();
        for &op in &self.ops {
            *multiset.entry(op).or_insert(0) += 1;
        }
        multiset
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{op}")?;
        }
        Ok(())
    }
}

/// Type of an actor, tagged by constructor. A combinator and a behavior are
/// never type-equivalent even with equal hash; object type is class only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeHash {
    Combinator(BigUint),
    Behavior(BigUint),
    Object(u8),
}

/// What an actor is: an inert combinator, an executable behavior, or a
/// container object of one of four immutable classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActorKind {
    Combinator(Composition),
    Behavior(Composition),
    Object {
        class: ObjectClass,
        /// Direct contents, in insertion order.
        contents: Vec<ActorId>,
    },
}

impl ActorKind {
    pub fn empty_object(class: ObjectClass) -> ActorKind {
        ActorKind::Object {
            class,
            contents: Vec::new(),
        }
    }

    pub fn type_hash(&self) -> TypeHash {
        match self {
            ActorKind::Combinator(c) => TypeHash::Combinator(c.hash().clone()),
            ActorKind::Behavior(c) => TypeHash::Behavior(c.hash().clone()),
            ActorKind::Object { class, .. } => TypeHash::Object(class.index()),
        }
    }

    pub fn composition(&self) -> Option<&Composition> {
        match self {
            ActorKind::Combinator(c) | ActorKind::Behavior(c) => Some(c),
            ActorKind::Object { .. } => None,
        }
    }

    pub fn is_behavior(&self) -> bool {
        matches!(self, ActorKind::Behavior(_))
    }

    pub fn is_combinator(&self) -> bool {
        matches!(self, ActorKind::Combinator(_))
    }

    pub fn is_object(&self) -> bool {
        matches!(self, ActorKind::Object { .. })
    }
}

/// True iff the kinds match and the hashes (or object classes) are equal.
pub fn type_equivalent(a: &ActorKind, b: &ActorKind) -> bool {
    a.type_hash() == b.type_hash()
}

/// A reified actor. `hand` is symmetric, `next`/`prev` are inverse, and
/// `pos` is present exactly when the actor is a root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Actor {
    pub id: ActorId,
    pub kind: ActorKind,
    pub hand: Option<ActorId>,
    pub next: Option<ActorId>,
    pub prev: Option<ActorId>,
    pub group: GroupId,
    pub parent: Option<ActorId>,
    pub pos: Option<Position>,
}

impl Actor {
    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }

    /// Mass ignoring contents: 1 for objects, composition length otherwise.
    pub fn own_mass(&self) -> u64 {
        match &self.kind {
            ActorKind::Combinator(c) | ActorKind::Behavior(c) => c.mass(),
            ActorKind::Object { .. } => 1,
        }
    }
}
