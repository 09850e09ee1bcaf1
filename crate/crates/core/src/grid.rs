//! Toroidal 2D coordinates and distances.

use core::fmt;

/// A site on the lattice. Coordinates are already reduced modulo the world
/// extent; all arithmetic on positions goes through [`Torus`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub x: u16,
    pub y: u16,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// One of the 8 unit directions (L-infinity 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dir8 {
    pub dx: i8,
    pub dy: i8,
}

/// The 8 neighborhood offsets in row-major scan order.
pub const DIRS8: [Dir8; 8] = [
    Dir8 { dx: -1, dy: -1 },
    Dir8 { dx: 0, dy: -1 },
    Dir8 { dx: 1, dy: -1 },
    Dir8 { dx: -1, dy: 0 },
    Dir8 { dx: 1, dy: 0 },
    Dir8 { dx: -1, dy: 1 },
    Dir8 { dx: 0, dy: 1 },
    Dir8 { dx: 1, dy: 1 },
];

/// Wrap-around geometry of a `width` by `height` lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Torus {
    pub width: u16,
    pub height: u16,
}

impl Torus {
    pub fn new(width: u16, height: u16) -> Torus {
        assert!(width > 0 && height > 0, "degenerate world");
        Torus { width, height }
    }

    pub fn sites(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn index(&self, p: Position) -> usize {
        p.y as usize * self.width as usize + p.x as usize
    }

    pub fn position(&self, index: usize) -> Position {
        Position {
            x: (index % self.width as usize) as u16,
            y: (index / self.width as usize) as u16,
        }
    }

    pub fn wrap(&self, x: i32, y: i32) -> Position {
        let w = self.width as i32;
        let h = self.height as i32;
        Position {
            x: x.rem_euclid(w) as u16,
            y: y.rem_euclid(h) as u16,
        }
    }

    pub fn offset(&self, p: Position, dx: i32, dy: i32) -> Position {
        self.wrap(p.x as i32 + dx, p.y as i32 + dy)
    }

    fn axis_dist(extent: u16, a: u16, b: u16) -> u32 {
        let d = (a as i32 - b as i32).unsigned_abs();
        d.min(extent as u32 - d)
    }

    /// Toroidal Manhattan distance.
    pub fn l1(&self, p: Position, q: Position) -> u32 {
        Torus::axis_dist(self.width, p.x, q.x) + Torus::axis_dist(self.height, p.y, q.y)
    }

    /// Toroidal Chebyshev distance.
    pub fn linf(&self, p: Position, q: Position) -> u32 {
        Torus::axis_dist(self.width, p.x, q.x).max(Torus::axis_dist(self.height, p.y, q.y))
    }
}
