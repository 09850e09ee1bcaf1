//! The actor domain: generators and relations read the world, actions
//! mutate it under the run's transaction.

use alloc::vec::Vec;

use crate::actions;
use crate::actor::{ActorId, Composition};
use crate::opcode::Opcode;
use crate::query;
use crate::rng::SimRng;
use crate::vm::{self, ActionOutcome, Domain, EvalStack, Outcome, Value, VmError};
use crate::world::World;

pub struct ActorDomain<'w> {
    pub world: &'w mut World,
}

impl Domain for ActorDomain<'_> {
    type Elem = ActorId;

    fn eval_unary(&mut self, op: Opcode, x: &Value<ActorId>) -> Result<Value<ActorId>, VmError> {
        match op.shape() {
            crate::opcode::Shape::PureUnary if op.is_reifiable() => {
                Ok(query::generator(self.world, op, x))
            }
            _ => Err(VmError::Unsupported(op)),
        }
    }

    fn eval_binary(
        &mut self,
        op: Opcode,
        x: &Value<ActorId>,
        y: &Value<ActorId>,
    ) -> Result<Value<ActorId>, VmError> {
        match op.shape() {
            crate::opcode::Shape::PureBinary if op.is_reifiable() => {
                Ok(query::relation(self.world, op, x, y))
            }
            _ => Err(VmError::Unsupported(op)),
        }
    }

    fn action(&mut self, op: Opcode, x: ActorId, y: Option<ActorId>) -> Result<ActionOutcome, VmError> {
        match actions::apply(self.world, op, x, y) {
            Ok(penalty) => Ok(ActionOutcome::Applied { penalty }),
            Err(_) => Ok(ActionOutcome::Rejected),
        }
    }

    fn world_mark(&self) -> usize {
        self.world.txn_mark()
    }

    fn world_rollback(&mut self, mark: usize) {
        self.world.rollback_to(mark);
    }
}

/// Run a program in the actor domain under a transaction: a successful
/// branch commits its intents atomically, anything else leaves the world
/// untouched.
pub fn run_program(
    world: &mut World,
    rng: &mut SimRng,
    program: &[Opcode],
    initial: EvalStack<ActorId>,
) -> Result<Outcome<ActorId>, VmError> {
    world.begin_txn();
    let result = {
        let mut domain = ActorDomain { world };
        vm::run(&mut domain, program, initial, rng)
    };
    match &result {
        Ok(outcome) if outcome.succeeded() => world.commit_txn(),
        _ => world.rollback_txn(),
    }
    result
}

/// Run a behavior actor on the initial stack `[{self}]`.
pub fn run_behavior(
    world: &mut World,
    rng: &mut SimRng,
    behavior: ActorId,
) -> Result<Outcome<ActorId>, VmError> {
    let program: Composition = match world.actor(behavior) {
        Some(actor) if actor.kind.is_behavior() => {
            actor.kind.composition().expect("behavior carries a composition").clone()
        }
        _ => panic!("dispatching a non-behavior actor"),
    };
    let mut initial: Value<ActorId> = Value::new();
    initial.insert(behavior);
    let stack: EvalStack<ActorId> = {
        let mut v = Vec::new();
        v.push(initial);
        v
    };
    run_program(world, rng, program.ops(), stack)
}
