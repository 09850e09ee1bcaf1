//! The instruction set: 42 reifiable combinators plus the four scalar
//! demonstration operators.
//!
//! The reifiable opcodes each carry a distinct prime; the type hash of a
//! composite combinator is the product of its members' primes, so opcodes
//! with distinct multisets hash differently and composites can be taken
//! apart again by factorization. Primes are assigned in table order:
//! generators, guards, relations, unary actions, binary actions, copies,
//! unit. The scalar operators (`pred`, `iota`, `times`, `equals`) exist so
//! the machine and compiler can be exercised on integer sets; they are not
//! reifiable and have no prime.

/// One machine instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Opcode {
    // generators (unary, over actor sets)
    Hands,
    Nexts,
    Prevs,
    Bonds,
    Neighbors,
    Contents,
    Parents,
    Members,
    Others,
    // guards
    Amb,
    Some,
    None,
    // binary relations
    Same,
    Different,
    Similar,
    Dissimilar,
    // unary actions
    Drop,
    Unbond,
    UnbondPrev,
    Quit,
    Exit,
    Digest,
    On,
    Off,
    // binary actions
    Grab,
    Bond,
    BondPrev,
    Join,
    Eat,
    Compose,
    Swap,
    // stack copies x0..x9
    X0,
    X1,
    X2,
    X3,
    X4,
    X5,
    X6,
    X7,
    X8,
    X9,
    // identity of Kleisli composition
    Unit,
    // scalar demonstration domain (not reifiable)
    Pred,
    Iota,
    Times,
    Equals,
}

/// Stack discipline of an opcode, as the machine sees it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Pop one set, push one set. Cost 1.
    PureUnary,
    /// Pop two sets, push one. Cost |x|*|y|.
    PureBinary,
    /// Pop a set, fork one branch per element (singleton pushed).
    Amb,
    /// Pop a set, fail the branch if it is empty.
    GuardSome,
    /// Pop a set, fail the branch if it is non-empty.
    GuardNone,
    /// Pop one actor, record an intent, push the actor back.
    ActionUnary,
    /// Pop two actors, record an intent, push the first back.
    ActionBinary,
    /// Push a copy of the slot `k` positions above the stack bottom.
    Copy(u8),
    /// No stack effect.
    Unit,
}

/// The 42 reifiable opcodes in table order. Index in this table determines
/// the prime assignment and is stable across runs.
pub const ACTOR_OPCODES: [Opcode; 42] = {
    use Opcode::*;
    [
        Hands, Nexts, Prevs, Bonds, Neighbors, Contents, Parents, Members, Others, Amb, Some,
        None, Same, Different, Similar, Dissimilar, Drop, Unbond, UnbondPrev, Quit, Exit, Digest,
        On, Off, Grab, Bond, BondPrev, Join, Eat, Compose, Swap, X0, X1, X2, X3, X4, X5, X6, X7,
        X8, X9, Unit,
    ]
};

/// The four scalar-only operators.
pub const SCALAR_OPCODES: [Opcode; 4] = [Opcode::Pred, Opcode::Iota, Opcode::Times, Opcode::Equals];

/// The first 42 primes, in step with [`ACTOR_OPCODES`].
const PRIMES: [u64; 42] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
];

impl Opcode {
    /// Canonical identifier, as used in DSL sources, `.cmb` files and
    /// snapshots.
    pub fn name(self) -> &'static str {
        use Opcode::*;
        match self {
            Hands => "hands",
            Nexts => "nexts",
            Prevs => "prevs",
            Bonds => "bonds",
            Neighbors => "neighbors",
            Contents => "contents",
            Parents => "parents",
            Members => "members",
            Others => "others",
            Amb => "amb",
            Some => "some",
            None => "none",
            Same => "same",
            Different => "different",
            Similar => "similar",
            Dissimilar => "dissimilar",
            Drop => "drop",
            Unbond => "unbond",
            UnbondPrev => "unbond'",
            Quit => "quit",
            Exit => "exit",
            Digest => "digest",
            On => "on",
            Off => "off",
            Grab => "grab",
            Bond => "bond",
            BondPrev => "bond'",
            Join => "join",
            Eat => "eat",
            Compose => "compose",
            Swap => "swap",
            X0 => "x0",
            X1 => "x1",
            X2 => "x2",
            X3 => "x3",
            X4 => "x4",
            X5 => "x5",
            X6 => "x6",
            X7 => "x7",
            X8 => "x8",
            X9 => "x9",
            Unit => "unit",
            Pred => "pred",
            Iota => "iota",
            Times => "times",
            Equals => "equals",
        }
    }

    /// Inverse of [`Opcode::name`].
    pub fn parse(s: &str) -> Option<Opcode> {
        ACTOR_OPCODES
            .iter()
            .chain(SCALAR_OPCODES.iter())
            .copied()
            .find(|op| op.name() == s)
    }

    /// Prime hash value of a reifiable opcode; `None` for the scalar ops.
    pub fn prime(self) -> Option<u64> {
        ACTOR_OPCODES
            .iter()
            .position(|&op| op == self)
            .map(|i| PRIMES[i])
    }

    /// True for the 42 opcodes that can appear in a reified composition.
    pub fn is_reifiable(self) -> bool {
        !matches!(self, Opcode::Pred | Opcode::Iota | Opcode::Times | Opcode::Equals)
    }

    pub fn shape(self) -> Shape {
        use Opcode::*;
        match self {
            Hands | Nexts | Prevs | Bonds | Neighbors | Contents | Parents | Members | Others
            | Pred | Iota => Shape::PureUnary,
            Same | Different | Similar | Dissimilar | Times | Equals => Shape::PureBinary,
            Amb => Shape::Amb,
            Some => Shape::GuardSome,
            None => Shape::GuardNone,
            Drop | Unbond | UnbondPrev | Quit | Exit | Digest | On | Off => Shape::ActionUnary,
            Grab | Bond | BondPrev | Join | Eat | Compose | Swap => Shape::ActionBinary,
            X0 => Shape::Copy(0),
            X1 => Shape::Copy(1),
            X2 => Shape::Copy(2),
            X3 => Shape::Copy(3),
            X4 => Shape::Copy(4),
            X5 => Shape::Copy(5),
            X6 => Shape::Copy(6),
            X7 => Shape::Copy(7),
            X8 => Shape::Copy(8),
            X9 => Shape::Copy(9),
            Unit => Shape::Unit,
        }
    }

    pub fn is_action(self) -> bool {
        matches!(self.shape(), Shape::ActionUnary | Shape::ActionBinary)
    }

    /// Number of operands consumed from the stack.
    pub fn arity(self) -> usize {
        match self.shape() {
            Shape::PureUnary
            | Shape::Amb
            | Shape::GuardSome
            | Shape::GuardNone
            | Shape::ActionUnary => 1,
            Shape::PureBinary | Shape::ActionBinary => 2,
            Shape::Copy(_) | Shape::Unit => 0,
        }
    }

    /// The copy combinator for stack slot `k`.
    pub fn copy(k: u8) -> Opcode {
        use Opcode::*;
        match k {
            0 => X0,
            1 => X1,
            2 => X2,
            3 => X3,
            4 => X4,
            5 => X5,
            6 => X6,
            7 => X7,
            8 => X8,
            9 => X9,
            _ => panic!("copy index out of range: {k}"),
        }
    }
}

impl core::fmt::Display for Opcode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}
