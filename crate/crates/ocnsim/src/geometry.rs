//! Exact vector predicates on the counter plane.
//!
//! Everything is integer arithmetic in `i128`; ties decide game outcomes, so no
//! floating point is used anywhere.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("zero vector has no direction")]
    Zero,
    #[error("direction ({0},{1}) has a negative component")]
    Negative(i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Vec2 {
    pub x: i64,
    pub y: i64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0, y: 0 };

    pub fn new(x: i64, y: i64) -> Self {
        Vec2 { x, y }
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// Non-negative in both components and not zero.
    pub fn is_positive(self) -> bool {
        self.x >= 0 && self.y >= 0 && !self.is_zero()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// A primitive positive direction `(ρ, ρ')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Direction {
    pub x: i64,
    pub y: i64,
}

impl Direction {
    pub const UP: Direction = Direction { x: 0, y: 1 };
    pub const RIGHT: Direction = Direction { x: 1, y: 0 };

    /// Reduces `(x, y)` to its primitive representative.
    pub fn new(x: i64, y: i64) -> Result<Self, GeometryError> {
        if x < 0 || y < 0 {
            return Err(GeometryError::Negative(x, y));
        }
        if x == 0 && y == 0 {
            return Err(GeometryError::Zero);
        }
        let g = x.gcd(&y);
        Ok(Direction { x: x / g, y: y / g })
    }

    pub fn of(v: Vec2) -> Result<Self, GeometryError> {
        Direction::new(v.x, v.y)
    }

    pub fn vec(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Whether `w` lies strictly clockwise of this direction, by less than half a turn.
    pub fn is_behind(self, w: Vec2) -> bool {
        det(self.vec(), w) < 0
    }

    /// Orders directions from steepest to flattest.
    pub fn cmp_steepness(self, other: Direction) -> Ordering {
        let a = self.y as i128 * other.x as i128;
        let b = other.y as i128 * self.x as i128;
        b.cmp(&a)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.x, self.y)
    }
}

pub fn det(v: Vec2, w: Vec2) -> i128 {
    v.x as i128 * w.y as i128 - v.y as i128 * w.x as i128
}

/// True iff the clockwise angle from `v` to `w` is strictly between 0° and 180°.
pub fn behind(v: Vec2, w: Vec2) -> Result<bool, GeometryError> {
    if v.is_zero() {
        return Err(GeometryError::Zero);
    }
    Ok(det(v, w) < 0)
}

/// `a ≪ b`: `b` is steeper than `a`.
pub fn steeper(a: Direction, b: Direction) -> bool {
    b.is_behind(a.vec())
}

/// Point `(n, n')` lies above the line through `r·d` shifted by `c` for some real `r > 0`.
pub fn c_above(point: (u64, u64), d: Direction, c: u64) -> bool {
    let (n, n2) = (point.0 as i128, point.1 as i128);
    let (r, r2, c) = (d.x as i128, d.y as i128, c as i128);
    if r == 0 || n2 <= c {
        return false;
    }
    r2 == 0 || r2 * (n + c) < r * (n2 - c)
}

pub fn c_below(point: (u64, u64), d: Direction, c: u64) -> bool {
    let (n, n2) = (point.0 as i128, point.1 as i128);
    let (r, r2, c) = (d.x as i128, d.y as i128, c as i128);
    if r2 == 0 || n <= c {
        return false;
    }
    r == 0 || r * (n2 + c) < r2 * (n - c)
}

/// `a` subsumes `b` over `vs`: every vector behind `b` is behind `a`.
pub fn subsumes(a: Direction, b: Direction, vs: &[Vec2]) -> bool {
    vs.iter().all(|&v| !b.is_behind(v) || a.is_behind(v))
}

/// Index into the alternating list candidate, open sector, candidate, ... of a [`Sectors`] table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SectorIndex(pub usize);

impl SectorIndex {
    pub fn is_candidate(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

/// All primitive directions in `[0..c]²`, steepest first, and the open sectors between them.
#[derive(Debug, Clone)]
pub struct Sectors {
    candidates: Vec<Direction>,
}

impl Sectors {
    pub fn new(c: u64) -> Self {
        let c = c.max(1) as i64;
        let mut candidates = Vec::new();
        for x in 0..=c {
            for y in 0..=c {
                if (x, y) != (0, 0) && x.gcd(&y) == 1 {
                    candidates.push(Direction { x, y });
                }
            }
        }
        candidates.sort_by(|a, b| a.cmp_steepness(*b));
        Sectors { candidates }
    }

    pub fn candidates(&self) -> &[Direction] {
        &self.candidates
    }

    pub fn num_probes(&self) -> usize {
        2 * self.candidates.len() - 1
    }

    /// The probe direction of a sector: the candidate itself, or the sum of its neighbours.
    pub fn probe(&self, s: SectorIndex) -> Direction {
        let i = s.0 / 2;
        if s.is_candidate() {
            self.candidates[i]
        } else {
            let (a, b) = (self.candidates[i], self.candidates[i + 1]);
            Direction::new(a.x + b.x, a.y + b.y).expect("positive")
        }
    }

    pub fn sector_of(&self, d: Direction) -> SectorIndex {
        match self.candidates.binary_search_by(|c| c.cmp_steepness(d)) {
            Ok(i) => SectorIndex(2 * i),
            Err(i) => SectorIndex(2 * i - 1),
        }
    }
}
