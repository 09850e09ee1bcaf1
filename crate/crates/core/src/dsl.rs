//! Line-based source form of dataflow graphs.
//!
//! One statement per line:
//!
//! ```text
//! <id>: input            node declarations
//! <id>: op <name>        pure operator (generator, relation, scalar op)
//! <id>: guard <A|S|N>    amb / some / none
//! <id>: act <name>       action
//! <src> -> <dst>         data edge; port is arrival order
//! <src> ->2 <dst>        data edge on the explicit second port
//! <src> .-> <dst>        control edge (execution order only)
//! # comment
//! ```

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::opcode::{Opcode, Shape};

pub type NodeId = String;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeSpec {
    Input,
    /// A pure operator: generator, relation, or scalar function.
    Op(Opcode),
    /// amb, some or none.
    Guard(Opcode),
    Action(Opcode),
}

impl NodeSpec {
    pub fn opcode(&self) -> Option<Opcode> {
        match self {
            NodeSpec::Input => None,
            NodeSpec::Op(op) | NodeSpec::Guard(op) | NodeSpec::Action(op) => Some(*op),
        }
    }

    pub fn arity(&self) -> usize {
        self.opcode().map_or(0, |op| op.arity())
    }

    pub fn is_action(&self) -> bool {
        matches!(self, NodeSpec::Action(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataEdge {
    pub src: NodeId,
    pub dst: NodeId,
    /// Explicit port (only `2` can be spelled); plain edges take arrival
    /// order.
    pub explicit_port: Option<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DataflowGraph {
    pub nodes: BTreeMap<NodeId, NodeSpec>,
    /// In source order; arrival order assigns ports.
    pub data_edges: Vec<DataEdge>,
    pub control_edges: Vec<(NodeId, NodeId)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

fn err(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        message: message.into(),
    }
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse DSL source into a graph. Duplicate ids, unknown names, bad
/// categories and self-edges are reported with line and column.
pub fn parse(text: &str) -> Result<DataflowGraph, ParseError> {
    let mut graph = DataflowGraph::default();
    let mut any_statement = false;
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let stmt = line.trim();
        if stmt.is_empty() {
            continue;
        }
        any_statement = true;
        let col = line.len() - line.trim_start().len() + 1;
        if let Some((id, rest)) = stmt.split_once(':') {
            parse_node(&mut graph, lineno, col, id.trim(), rest.trim())?;
        } else if let Some((src, dst)) = stmt.split_once(".->") {
            parse_edge(&mut graph, lineno, col, src.trim(), dst.trim(), EdgeKind::Control)?;
        } else if let Some((src, dst)) = stmt.split_once("->2") {
            parse_edge(&mut graph, lineno, col, src.trim(), dst.trim(), EdgeKind::Data(Some(2)))?;
        } else if let Some((src, dst)) = stmt.split_once("->") {
            parse_edge(&mut graph, lineno, col, src.trim(), dst.trim(), EdgeKind::Data(None))?;
        } else {
            return Err(err(lineno, col, format!("cannot parse statement `{stmt}`")));
        }
    }
    if !any_statement {
        return Err(err(1, 1, "empty graph source"));
    }
    Ok(graph)
}

enum EdgeKind {
    Data(Option<u8>),
    Control,
}

fn parse_node(
    graph: &mut DataflowGraph,
    line: usize,
    col: usize,
    id: &str,
    rest: &str,
) -> Result<(), ParseError> {
    if !valid_ident(id) {
        return Err(err(line, col, format!("invalid node id `{id}`")));
    }
    if graph.nodes.contains_key(id) {
        return Err(err(line, col, format!("duplicate node id `{id}`")));
    }
    let mut words = rest.split_whitespace();
    let kind = words
        .next()
        .ok_or_else(|| err(line, col, "missing node kind"))?;
    let spec = match kind {
        "input" => NodeSpec::Input,
        "op" => {
            let name = words
                .next()
                .ok_or_else(|| err(line, col, "missing operator name"))?;
            let op = Opcode::parse(name)
                .ok_or_else(|| err(line, col, format!("unknown op name `{name}`")))?;
            match op.shape() {
                Shape::PureUnary | Shape::PureBinary => NodeSpec::Op(op),
                _ => {
                    return Err(err(
                        line,
                        col,
                        format!("`{name}` cannot be used as a graph operator"),
                    ))
                }
            }
        }
        "guard" => {
            let letter = words
                .next()
                .ok_or_else(|| err(line, col, "missing guard letter"))?;
            let op = match letter {
                "A" => Opcode::Amb,
                "S" => Opcode::Some,
                "N" => Opcode::None,
                other => return Err(err(line, col, format!("unknown guard `{other}`"))),
            };
            NodeSpec::Guard(op)
        }
        "act" => {
            let name = words
                .next()
                .ok_or_else(|| err(line, col, "missing action name"))?;
            let op = Opcode::parse(name)
                .ok_or_else(|| err(line, col, format!("unknown action name `{name}`")))?;
            if !op.is_action() {
                return Err(err(line, col, format!("`{name}` is not an action")));
            }
            NodeSpec::Action(op)
        }
        other => return Err(err(line, col, format!("unknown node kind `{other}`"))),
    };
    if let Some(extra) = words.next() {
        return Err(err(line, col, format!("trailing tokens after declaration: `{extra}`")));
    }
    graph.nodes.insert(id.to_string(), spec);
    Ok(())
}

fn parse_edge(
    graph: &mut DataflowGraph,
    line: usize,
    col: usize,
    src: &str,
    dst: &str,
    kind: EdgeKind,
) -> Result<(), ParseError> {
    for id in [src, dst] {
        if !valid_ident(id) {
            return Err(err(line, col, format!("invalid node id `{id}`")));
        }
        if !graph.nodes.contains_key(id) {
            return Err(err(line, col, format!("edge references undeclared node `{id}`")));
        }
    }
    if src == dst {
        return Err(err(line, col, format!("cycle: `{src}` depends on itself")));
    }
    match kind {
        EdgeKind::Data(explicit_port) => graph.data_edges.push(DataEdge {
            src: src.to_string(),
            dst: dst.to_string(),
            explicit_port,
        }),
        EdgeKind::Control => graph
            .control_edges
            .push((src.to_string(), dst.to_string())),
    }
    Ok(())
}

/// Per-node operands, port 1 first, after arrival-order port resolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolved {
    pub operands: BTreeMap<NodeId, Vec<NodeId>>,
    pub input: NodeId,
}

impl DataflowGraph {
    /// Structural validation: one input, arities satisfied with distinct
    /// ports, no data flowing out of consuming guards.
    pub fn resolve(&self) -> Result<Resolved, String> {
        let inputs: Vec<&NodeId> = self
            .nodes
            .iter()
            .filter(|(_, spec)| matches!(spec, NodeSpec::Input))
            .map(|(id, _)| id)
            .collect();
        if inputs.len() != 1 {
            return Err(format!("expected exactly one input node, found {}", inputs.len()));
        }
        let input = inputs[0].clone();
        // some/none consume their operand and leave nothing behind
        for edge in &self.data_edges {
            if matches!(
                self.nodes[&edge.src],
                NodeSpec::Guard(Opcode::Some) | NodeSpec::Guard(Opcode::None)
            ) {
                return Err(format!(
                    "guard `{}` produces no value and cannot feed `{}`",
                    edge.src, edge.dst
                ));
            }
        }
        let mut operands: BTreeMap<NodeId, Vec<Option<NodeId>>> = BTreeMap::new();
        for edge in &self.data_edges {
            let arity = self.nodes[&edge.dst].arity();
            if arity == 0 {
                return Err(format!("node `{}` takes no operands", edge.dst));
            }
            let slots = operands
                .entry(edge.dst.clone())
                .or_insert_with(|| alloc::vec![None; arity]);
            let port = match edge.explicit_port {
                Some(p) => {
                    let p = p as usize;
                    if p > arity {
                        return Err(format!(
                            "arity mismatch: node `{}` has no port {p}",
                            edge.dst
                        ));
                    }
                    p - 1
                }
                None => match slots.iter().position(|s| s.is_none()) {
                    Some(free) => free,
                    None => {
                        return Err(format!(
                            "arity mismatch: too many operands for `{}`",
                            edge.dst
                        ))
                    }
                },
            };
            if slots[port].is_some() {
                return Err(format!(
                    "duplicate operand for port {} of `{}`",
                    port + 1,
                    edge.dst
                ));
            }
            slots[port] = Some(edge.src.clone());
        }
        let mut resolved = BTreeMap::new();
        for (id, spec) in &self.nodes {
            let arity = spec.arity();
            let slots = operands.remove(id).unwrap_or_default();
            if slots.len() != arity || slots.iter().any(|s| s.is_none()) {
                return Err(format!(
                    "arity mismatch: `{id}` needs {arity} operand(s), got {}",
                    slots.iter().filter(|s| s.is_some()).count()
                ));
            }
            resolved.insert(id.clone(), slots.into_iter().map(|s| s.unwrap()).collect());
        }
        Ok(Resolved {
            operands: resolved,
            input,
        })
    }
}
