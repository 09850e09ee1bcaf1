//! From dataflow graphs to combinator sequences.
//!
//! Scheduling is a topological sort over data and control edges with two
//! rules: among ready nodes, non-actions go first (so every action runs
//! after every non-action it does not feed), and ties break on node id.
//! This realizes action deferral at compile time; the machine needs no
//! phase flag for compiled programs.
//!
//! Emission walks the schedule keeping a model of the machine stack. An
//! operand is consumed in place when its value sits on top of the model
//! and this is its last use; otherwise a copy combinator pushes it, which
//! requires its slot index to be at most 9.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::actor::{Composition, CompositionError};
use crate::dsl::{self, DataflowGraph, NodeId, NodeSpec, ParseError};
use crate::opcode::{Opcode, Shape};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompileError {
    Parse(ParseError),
    Invalid(String),
    Cycle,
    /// A needed value sits deeper than the copy combinators can reach.
    StackTooDeep { node: NodeId, slot: usize },
}

impl core::fmt::Display for CompileError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CompileError::Parse(e) => write!(f, "parse error: {e}"),
            CompileError::Invalid(msg) => write!(f, "invalid graph: {msg}"),
            CompileError::Cycle => write!(f, "invalid graph: cycle through data or control edges"),
            CompileError::StackTooDeep { node, slot } => write!(
                f,
                "stack too deep for copy combinator: `{node}` needs slot {slot}"
            ),
        }
    }
}

impl From<ParseError> for CompileError {
    fn from(e: ParseError) -> CompileError {
        CompileError::Parse(e)
    }
}

/// A compiled program plus the stack bookkeeping tests use as an oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledProgram {
    pub ops: Vec<Opcode>,
    pub schedule: Vec<NodeId>,
    /// Which node's value occupies each stack slot after a successful run.
    pub final_layout: Vec<NodeId>,
}

impl CompiledProgram {
    /// Reify as a composition; fails if the program uses scalar operators.
    pub fn to_composition(&self) -> Result<Composition, CompositionError> {
        Composition::new(self.ops.clone())
    }
}

/// Topological order over data and control edges: ready non-actions before
/// ready actions, ties by node id.
pub fn schedule(graph: &DataflowGraph) -> Result<Vec<NodeId>, CompileError> {
    let mut indegree: BTreeMap<&NodeId, usize> = graph.nodes.keys().map(|id| (id, 0)).collect();
    let mut successors: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    let data = graph.data_edges.iter().map(|e| (&e.src, &e.dst));
    let control = graph.control_edges.iter().map(|(s, d)| (s, d));
    for (src, dst) in data.chain(control) {
        *indegree.get_mut(dst).expect("edge endpoint validated") += 1;
        successors.entry(src).or_default().push(dst);
    }
    // ready set ordered by (is_action, id)
    let mut ready: BTreeSet<(bool, &NodeId)> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| (graph.nodes[id].is_action(), id))
        .collect();
    let mut order = Vec::with_capacity(graph.nodes.len());
    while let Some(&(is_action, id)) = ready.iter().next() {
        ready.remove(&(is_action, id));
        order.push(id.clone());
        if let Some(succ) = successors.get(id) {
            for &s in succ {
                let d = indegree.get_mut(s).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert((graph.nodes[s].is_action(), s));
                }
            }
        }
    }
    if order.len() != graph.nodes.len() {
        return Err(CompileError::Cycle);
    }
    Ok(order)
}

/// Emit a combinator sequence for a validated, scheduled graph.
pub fn emit(graph: &DataflowGraph, order: &[NodeId]) -> Result<CompiledProgram, CompileError> {
    let resolved = graph.resolve().map_err(CompileError::Invalid)?;
    let mut remaining_uses: BTreeMap<&NodeId, usize> = graph.nodes.keys().map(|id| (id, 0)).collect();
    for edge in &graph.data_edges {
        *remaining_uses.get_mut(&edge.src).unwrap() += 1;
    }
    let mut ops: Vec<Opcode> = Vec::new();
    // the input's value is the initial stack; slot 0 from the start
    let mut model: Vec<&NodeId> = alloc::vec![&resolved.input];
    for id in order {
        let spec = &graph.nodes[id];
        let opcode = match spec {
            NodeSpec::Input => continue,
            _ => spec.opcode().unwrap(),
        };
        let operands = &resolved.operands[id];
        // Push operands so that port 1 ends on top (popped first). Only the
        // first-settled operand can be consumed where it lies; any later
        // operand must land above it, so it is always copied.
        for (i, src) in operands.iter().rev().enumerate() {
            let uses = remaining_uses.get_mut(src).unwrap();
            let in_place = i == 0 && model.last() == Some(&src) && *uses == 1;
            *uses -= 1;
            if !in_place {
                let slot = model
                    .iter()
                    .position(|&s| s == src)
                    .expect("operand value no longer on the stack");
                if slot > 9 {
                    return Err(CompileError::StackTooDeep {
                        node: id.clone(),
                        slot,
                    });
                }
                ops.push(Opcode::copy(slot as u8));
                model.push(src);
            }
        }
        // the modeled stack must hold the operands in pop order
        debug_assert!(model.len() >= operands.len());
        debug_assert!(operands
            .iter()
            .zip(model.iter().rev())
            .all(|(a, &b)| a == b));
        ops.push(opcode);
        for _ in 0..opcode.arity() {
            model.pop();
        }
        let pushes = !matches!(opcode.shape(), Shape::GuardSome | Shape::GuardNone);
        if pushes {
            model.push(id);
        }
    }
    Ok(CompiledProgram {
        ops,
        schedule: order.to_vec(),
        final_layout: model.into_iter().cloned().collect(),
    })
}

/// parse, schedule and emit in one step.
pub fn compile(text: &str) -> Result<CompiledProgram, CompileError> {
    let graph = dsl::parse(text)?;
    graph.resolve().map_err(CompileError::Invalid)?;
    let order = schedule(&graph)?;
    emit(&graph, &order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use Opcode::{Amb, Equals, Iota, Pred, Times, X0, X1};
    use Opcode::Some as GuardS;

    /// The primality decision graph in DSL form.
    pub(crate) const PRIMALITY_DFG: &str = "\
# fail if n is prime, else return a factor
n:  input
p:  op pred
i1: op iota
x:  guard A
i2: op iota
y:  guard A
t:  op times
e:  op equals
s:  guard S
n -> p
p -> i1
i1 -> x
x -> i2
i2 -> y
x -> t      # first factor
y ->2 t
n -> e      # compare against n
t ->2 e
e -> s
";

    #[test]
    fn primality_graph_compiles_to_the_twelve_combinator_sequence() {
        let prog = compile(PRIMALITY_DFG).unwrap();
        assert_eq!(
            prog.ops,
            alloc::vec![X0, Pred, Iota, Amb, X1, Iota, Amb, X1, Times, X0, Equals, GuardS]
        );
        // surviving stack: n at the bottom, the chosen factor on top
        assert_eq!(prog.final_layout, alloc::vec!["n".to_string(), "x".to_string()]);
    }

    #[test]
    fn single_op_graph_consumes_the_input_in_place() {
        let prog = compile("a: input\nb: op pred\na -> b\n").unwrap();
        assert_eq!(prog.ops, alloc::vec![Pred]);
    }

    #[test]
    fn fanned_out_input_backs_two_copies() {
        let prog = compile("i: input\na: op pred\nb: op iota\ni -> a\ni -> b\n").unwrap();
        assert_eq!(prog.ops, alloc::vec![X0, Pred, X0, Iota]);
    }

    #[test]
    fn diamond_schedules_lexicographically() {
        let g = dsl::parse("a: input\nb: op pred\nc: op pred\nd: op times\na -> b\na -> c\nb -> d\nc ->2 d\n").unwrap();
        let order = schedule(&g).unwrap();
        assert_eq!(order, ["a", "b", "c", "d"].map(|s| s.to_string()).to_vec());
    }

    #[test]
    fn control_edge_flips_diamond_order() {
        let g = dsl::parse("a: input\nb: op pred\nc: op pred\nd: op times\na -> b\na -> c\nb -> d\nc ->2 d\nc .-> b\n").unwrap();
        let order = schedule(&g).unwrap();
        assert_eq!(order, ["a", "c", "b", "d"].map(|s| s.to_string()).to_vec());
    }

    #[test]
    fn actions_schedule_after_non_actions_and_respect_control_order() {
        let src = "\
i: input
g: op nexts
a1: act drop
a2: act quit
i -> a1
i -> a2
i -> g
a2 .-> a1
";
        let g = dsl::parse(src).unwrap();
        let order = schedule(&g).unwrap();
        assert_eq!(order, ["i", "g", "a2", "a1"].map(|s| s.to_string()).to_vec());
    }

    #[test]
    fn cycle_through_control_edges_is_detected() {
        let g = dsl::parse("i: input\na: op pred\nb: op pred\ni -> a\ni -> b\na .-> b\nb .-> a\n").unwrap();
        assert_eq!(schedule(&g).unwrap_err(), CompileError::Cycle);
    }

    #[test]
    fn deep_stacks_overflow_the_copy_range() {
        // n9's value ends up on slot 10; a copy from there is unreachable
        let mut src = String::from("i: input\n");
        for k in 0..10 {
            src.push_str(&alloc::format!("n{k}: op iota\ni -> n{k}\n"));
        }
        src.push_str("z1: op pred\nn9 -> z1\nz2: op pred\nn9 -> z2\n");
        let err = compile(&src).unwrap_err();
        match err {
            CompileError::StackTooDeep { slot, .. } => assert_eq!(slot, 10),
            other => panic!("expected stack depth error, got {other:?}"),
        }
    }

    #[test]
    fn recompilation_is_deterministic() {
        let a = compile(PRIMALITY_DFG).unwrap();
        let b = compile(PRIMALITY_DFG).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compiled_primality_runs_correctly() {
        use crate::scalar;
        let prog = compile(PRIMALITY_DFG).unwrap();
        let mut rng = crate::rng::seeded(17);
        for n in 1..=50u64 {
            let out = scalar::run(&prog.ops, scalar::stack_of(&[n]), &mut rng).unwrap();
            let composite = (2..n).any(|d| n % d == 0);
            assert_eq!(out.succeeded(), composite, "n = {n}");
        }
    }
}
