//! The non-deterministic stack machine.
//!
//! A program is a sequence of combinators transforming a stack of sets.
//! `amb` forks the computation over the elements of the set on top of the
//! stack; branch order is shuffled by the run's RNG and explored depth
//! first. Guards prune branches. Actions are applied to the world as they
//! are reached (so later preconditions see them) but are undone whenever a
//! pure combinator needs to read the world, so within one run no generator
//! or relation ever observes an effect of the same run. The first branch
//! that survives to the end of the program commits its actions atomically;
//! if every branch fails the world is left untouched.
//!
//! Logged time covers every combinator executed on every explored branch:
//! most cost one tick, binary relations cost the product of their operand
//! sizes, and movers additionally pay mass times distance.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::opcode::{Opcode, Shape};
use crate::rng::SimRng;

pub type Value<E> = BTreeSet<E>;
pub type EvalStack<E> = Vec<Value<E>>;

/// Accumulated abstract-machine time, in primitive operations. Monotone;
/// failed branches keep their cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CostLedger {
    pub ticks: u64,
}

impl CostLedger {
    pub fn charge(&mut self, ticks: u64) {
        self.ticks += ticks;
    }
}

/// A deferred world mutation recorded during the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionIntent<E> {
    pub op: Opcode,
    pub first: E,
    pub second: Option<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status<E> {
    /// A branch survived; its intents were committed in emission order.
    Succeeded { intents: Vec<ActionIntent<E>> },
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome<E> {
    pub status: Status<E>,
    pub cost: CostLedger,
    /// Final stack of the surviving branch; empty on failure.
    pub stack: EvalStack<E>,
}

impl<E> Outcome<E> {
    pub fn succeeded(&self) -> bool {
        matches!(self.status, Status::Succeeded { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VmError {
    /// The opcode is not meaningful in this value domain.
    Unsupported(Opcode),
    /// `run_exhaustive` only enumerates pure programs.
    ActionInExhaustiveRun(Opcode),
}

impl core::fmt::Display for VmError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            VmError::Unsupported(op) => write!(f, "opcode `{op}` is not supported in this domain"),
            VmError::ActionInExhaustiveRun(op) => {
                write!(f, "action `{op}` cannot be enumerated exhaustively")
            }
        }
    }
}

/// Outcome of attempting one action against the current world.
pub enum ActionOutcome {
    /// Applied; `penalty` is the extra mover cost beyond the base tick.
    Applied { penalty: u64 },
    /// A precondition failed; nothing was mutated.
    Rejected,
}

/// A value domain the machine can run over. Pure evaluation must not
/// depend on any effect applied by `action` (the engine guarantees the
/// world is rolled back before calling `eval_*`).
pub trait Domain {
    type Elem: Copy + Ord + core::fmt::Debug;

    fn eval_unary(&mut self, op: Opcode, x: &Value<Self::Elem>) -> Result<Value<Self::Elem>, VmError>;

    fn eval_binary(
        &mut self,
        op: Opcode,
        x: &Value<Self::Elem>,
        y: &Value<Self::Elem>,
    ) -> Result<Value<Self::Elem>, VmError>;

    /// Apply an action now. Rejection must leave the world untouched.
    fn action(
        &mut self,
        op: Opcode,
        x: Self::Elem,
        y: Option<Self::Elem>,
    ) -> Result<ActionOutcome, VmError>;

    /// Current undo position; the engine rolls back to marks when
    /// backtracking.
    fn world_mark(&self) -> usize;

    fn world_rollback(&mut self, mark: usize);
}

struct AppliedIntent<E> {
    intent: ActionIntent<E>,
    /// Undo position immediately before this intent's current application.
    mark_before: usize,
}

struct RunState<E> {
    cost: CostLedger,
    intents: Vec<AppliedIntent<E>>,
    /// How many of `intents` are currently applied to the world.
    applied: usize,
}

impl<E: Copy> RunState<E> {
    /// Re-apply recorded intents so the world again reflects all of them.
    /// Replays are deterministic, so they cannot be rejected.
    fn reapply<D: Domain<Elem = E>>(&mut self, domain: &mut D) -> Result<(), VmError> {
        while self.applied < self.intents.len() {
            let i = self.applied;
            self.intents[i].mark_before = domain.world_mark();
            let intent = &self.intents[i].intent;
            match domain.action(intent.op, intent.first, intent.second)? {
                ActionOutcome::Applied { .. } => {}
                ActionOutcome::Rejected => unreachable!("intent replay rejected"),
            }
            self.applied += 1;
        }
        Ok(())
    }

    /// Undo all applied intents (keeping them recorded) so pure combinators
    /// see the world as it was before the run.
    fn suspend<D: Domain<Elem = E>>(&mut self, domain: &mut D) {
        if self.applied > 0 {
            domain.world_rollback(self.intents[0].mark_before);
            self.applied = 0;
        }
    }
}

/// Run a program against a domain: randomized depth-first search over
/// `amb` branch orders. The caller is responsible for opening and closing
/// any world transaction (see `actor_vm::run_behavior`).
pub fn run<D: Domain>(
    domain: &mut D,
    program: &[Opcode],
    initial: EvalStack<D::Elem>,
    rng: &mut SimRng,
) -> Result<Outcome<D::Elem>, VmError> {
    let mut stack = initial;
    let mut state = RunState {
        cost: CostLedger::default(),
        intents: Vec::new(),
        applied: 0,
    };
    let ok = exec(domain, program, 0, &mut stack, &mut state, &mut Some(rng))?;
    let status = if ok {
        state.reapply(domain)?;
        Status::Succeeded {
            intents: state.intents.into_iter().map(|a| a.intent).collect(),
        }
    } else {
        Status::Failed
    };
    Ok(Outcome {
        status,
        cost: state.cost,
        stack: if ok { stack } else { Vec::new() },
    })
}

/// Enumerate every successful branch of a pure program, in deterministic
/// (sorted) branch order, returning the final stacks.
pub fn run_exhaustive<D: Domain>(
    domain: &mut D,
    program: &[Opcode],
    initial: EvalStack<D::Elem>,
) -> Result<Vec<EvalStack<D::Elem>>, VmError> {
    for &op in program {
        if op.is_action() {
            return Err(VmError::ActionInExhaustiveRun(op));
        }
    }
    let mut stack = initial;
    let mut out = Vec::new();
    exec_all(domain, program, 0, &mut stack, &mut out)?;
    Ok(out)
}

/// Depth-first execution from `pc`. `Ok(true)` means a branch succeeded
/// and the stack holds its final state; `Ok(false)` means this subtree is
/// exhausted and the stack is restored.
fn exec<D: Domain>(
    domain: &mut D,
    program: &[Opcode],
    pc: usize,
    stack: &mut EvalStack<D::Elem>,
    state: &mut RunState<D::Elem>,
    rng: &mut Option<&mut SimRng>,
) -> Result<bool, VmError> {
    if pc == program.len() {
        return Ok(true);
    }
    let op = program[pc];
    match op.shape() {
        Shape::Unit => {
            state.cost.charge(1);
            exec(domain, program, pc + 1, stack, state, rng)
        }
        Shape::Copy(k) => {
            state.cost.charge(1);
            let k = k as usize;
            if k >= stack.len() {
                return Ok(false);
            }
            stack.push(stack[k].clone());
            let ok = exec(domain, program, pc + 1, stack, state, rng)?;
            if !ok {
                stack.pop();
            }
            Ok(ok)
        }
        Shape::PureUnary => {
            state.cost.charge(1);
            let x = match stack.pop() {
                Some(x) => x,
                None => return Ok(false),
            };
            state.suspend(domain);
            let result = domain.eval_unary(op, &x)?;
            stack.push(result);
            let ok = exec(domain, program, pc + 1, stack, state, rng)?;
            if !ok {
                stack.pop();
                stack.push(x);
            }
            Ok(ok)
        }
        Shape::PureBinary => {
            let x = match stack.pop() {
                Some(x) => x,
                None => {
                    state.cost.charge(1);
                    return Ok(false);
                }
            };
            let y = match stack.pop() {
                Some(y) => y,
                None => {
                    state.cost.charge(1);
                    stack.push(x);
                    return Ok(false);
                }
            };
            state.cost.charge(x.len() as u64 * y.len() as u64);
            state.suspend(domain);
            let result = domain.eval_binary(op, &x, &y)?;
            stack.push(result);
            let ok = exec(domain, program, pc + 1, stack, state, rng)?;
            if !ok {
                stack.pop();
                stack.push(y);
                stack.push(x);
            }
            Ok(ok)
        }
        Shape::GuardSome | Shape::GuardNone => {
            state.cost.charge(1);
            let x = match stack.pop() {
                Some(x) => x,
                None => return Ok(false),
            };
            let pass = match op.shape() {
                Shape::GuardSome => !x.is_empty(),
                _ => x.is_empty(),
            };
            if !pass {
                stack.push(x);
                return Ok(false);
            }
            let ok = exec(domain, program, pc + 1, stack, state, rng)?;
            if !ok {
                stack.push(x);
            }
            Ok(ok)
        }
        Shape::Amb => {
            state.cost.charge(1);
            let x = match stack.pop() {
                Some(x) => x,
                None => return Ok(false),
            };
            if x.is_empty() {
                stack.push(x);
                return Ok(false);
            }
            let mut elems: Vec<D::Elem> = x.iter().copied().collect();
            if let Some(rng) = rng.as_deref_mut() {
                elems.shuffle(rng);
            }
            let cp_intents = state.intents.len();
            let cp_applied = state.applied;
            let cp_mark = domain.world_mark();
            for e in elems {
                let mut singleton = Value::new();
                singleton.insert(e);
                stack.push(singleton);
                if exec(domain, program, pc + 1, stack, state, rng)? {
                    return Ok(true);
                }
                stack.pop();
                domain.world_rollback(cp_mark);
                state.intents.truncate(cp_intents);
                state.applied = cp_applied;
            }
            stack.push(x);
            Ok(false)
        }
        Shape::ActionUnary | Shape::ActionBinary => {
            state.cost.charge(1);
            let binary = matches!(op.shape(), Shape::ActionBinary);
            let x_set = match stack.pop() {
                Some(x) => x,
                None => return Ok(false),
            };
            let y_set = if binary {
                match stack.pop() {
                    Some(y) => y,
                    None => {
                        stack.push(x_set);
                        return Ok(false);
                    }
                }
            } else {
                Value::new()
            };
            let restore = |stack: &mut EvalStack<D::Elem>, x_set: Value<D::Elem>, y_set: Value<D::Elem>| {
                if binary {
                    stack.push(y_set);
                }
                stack.push(x_set);
            };
            // actions operate on individual actors
            if x_set.len() != 1 || (binary && y_set.len() != 1) {
                restore(stack, x_set, y_set);
                return Ok(false);
            }
            let x = *x_set.iter().next().unwrap();
            let y = y_set.iter().next().copied();
            state.reapply(domain)?;
            let mark = domain.world_mark();
            match domain.action(op, x, y)? {
                ActionOutcome::Rejected => {
                    restore(stack, x_set, y_set);
                    Ok(false)
                }
                ActionOutcome::Applied { penalty } => {
                    state.cost.charge(penalty);
                    state.intents.push(AppliedIntent {
                        intent: ActionIntent {
                            op,
                            first: x,
                            second: y,
                        },
                        mark_before: mark,
                    });
                    state.applied += 1;
                    let mut result = Value::new();
                    result.insert(x);
                    stack.push(result);
                    let ok = exec(domain, program, pc + 1, stack, state, rng)?;
                    if !ok {
                        stack.pop();
                        restore(stack, x_set, y_set);
                        // world and intent rollback happen at the choice
                        // point (or at the top level) that owns this branch
                    }
                    Ok(ok)
                }
            }
        }
    }
}

/// Exhaustive twin of `exec` for pure programs: never stops at the first
/// success, collects them all.
fn exec_all<D: Domain>(
    domain: &mut D,
    program: &[Opcode],
    pc: usize,
    stack: &mut EvalStack<D::Elem>,
    out: &mut Vec<EvalStack<D::Elem>>,
) -> Result<(), VmError> {
    if pc == program.len() {
        out.push(stack.clone());
        return Ok(());
    }
    let op = program[pc];
    match op.shape() {
        Shape::Unit => exec_all(domain, program, pc + 1, stack, out),
        Shape::Copy(k) => {
            let k = k as usize;
            if k >= stack.len() {
                return Ok(());
            }
            stack.push(stack[k].clone());
            exec_all(domain, program, pc + 1, stack, out)?;
            stack.pop();
            Ok(())
        }
        Shape::PureUnary => {
            let x = match stack.pop() {
                Some(x) => x,
                None => return Ok(()),
            };
            let result = domain.eval_unary(op, &x)?;
            stack.push(result);
            exec_all(domain, program, pc + 1, stack, out)?;
            stack.pop();
            stack.push(x);
            Ok(())
        }
        Shape::PureBinary => {
            let x = match stack.pop() {
                Some(x) => x,
                None => return Ok(()),
            };
            let y = match stack.pop() {
                Some(y) => y,
                None => {
                    stack.push(x);
                    return Ok(());
                }
            };
            let result = domain.eval_binary(op, &x, &y)?;
            stack.push(result);
            exec_all(domain, program, pc + 1, stack, out)?;
            stack.pop();
            stack.push(y);
            stack.push(x);
            Ok(())
        }
        Shape::GuardSome | Shape::GuardNone => {
            let x = match stack.pop() {
                Some(x) => x,
                None => return Ok(()),
            };
            let pass = match op.shape() {
                Shape::GuardSome => !x.is_empty(),
                _ => x.is_empty(),
            };
            if pass {
                exec_all(domain, program, pc + 1, stack, out)?;
            }
            stack.push(x);
            Ok(())
        }
        Shape::Amb => {
            let x = match stack.pop() {
                Some(x) => x,
                None => return Ok(()),
            };
            for &e in &x {
                let mut singleton = Value::new();
                singleton.insert(e);
                stack.push(singleton);
                exec_all(domain, program, pc + 1, stack, out)?;
                stack.pop();
            }
            stack.push(x);
            Ok(())
        }
        Shape::ActionUnary | Shape::ActionBinary => {
            unreachable!("actions are rejected before an exhaustive run")
        }
    }
}

/// Kleisli composition of programs: plain concatenation. Running the
/// result is running `a`, then `b` on each surviving branch.
pub fn kleisli(a: &crate::actor::Composition, b: &crate::actor::Composition) -> crate::actor::Composition {
    a.concat(b)
}
