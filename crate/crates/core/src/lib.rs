//! Combinator chemistry in a 2D virtual world.
//!
//! Programs are sequences of combinators of a few fixed types. They are
//! compiled from dataflow graphs, executed by a non-deterministic stack
//! machine, and reified as actors that diffuse on a toroidal lattice.
//! The crate is `no_std` (alloc required); all IO lives in the companion
//! CLI crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod actions;
pub mod actor;
pub mod actor_vm;
pub mod biokit;
pub mod compiler;
pub mod dsl;
pub mod grid;
pub mod opcode;
pub mod query;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod vm;
pub mod world;

pub use actor::{Actor, ActorId, ActorKind, Composition, GroupId, ObjectClass, TypeHash};
pub use grid::{Dir8, Position};
pub use opcode::{Opcode, Shape};
pub use rng::SimRng;
pub use world::World;
