use std::collections::BTreeMap;

use serde::Serialize;

use crate::geometry::{c_above, c_below, Direction, SectorIndex};
use crate::net::Pair;
use crate::product::ProductGraph;
use crate::slope::{Player, SlopeError, SlopeSolver};

/// Boundary directions of the belt of one state pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BeltSpec {
    pub pair: Pair,
    /// Direction above which (with margin `c`) Duplicator wins.
    pub gamma: Option<Direction>,
    /// Direction below which (with margin `c`) Spoiler wins.
    pub beta: Option<Direction>,
    pub c: u64,
    /// Index of the first Spoiler-winning probe, or the probe count if there is none.
    pub switch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BeltKind {
    Vertical,
    Horizontal,
    Sloped,
}

impl BeltSpec {
    /// `Some(true)` above the Duplicator boundary, `Some(false)` below the Spoiler boundary.
    pub fn classify(&self, point: (u64, u64)) -> Option<bool> {
        if self.gamma.is_some_and(|g| c_above(point, g, self.c)) {
            return Some(true);
        }
        if self.beta.is_some_and(|b| c_below(point, b, self.c)) {
            return Some(false);
        }
        None
    }

    pub fn kind(&self) -> BeltKind {
        if self.gamma.is_none_or(|g| g == Direction::UP) {
            BeltKind::Vertical
        } else if self.beta.is_none_or(|b| b == Direction::RIGHT) {
            BeltKind::Horizontal
        } else {
            BeltKind::Sloped
        }
    }
}

/// Belt width for a product graph: its number of nodes.
pub fn compute_c(product: &ProductGraph) -> u64 {
    product.size() as u64
}

/// Binary search for the switch from Duplicator to Spoiler along the probe list.
pub fn compute_belt(solver: &mut SlopeSolver, pair: Pair) -> Result<BeltSpec, SlopeError> {
    let probes = solver.sectors().num_probes();
    let (mut lo, mut hi) = (0, probes);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let slope = solver.sectors().probe(SectorIndex(mid));
        if solver.solve(pair, slope)?.winner == Player::Spoiler {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let j = lo;
    // Slopes strictly steeper than the belt slope are Duplicator wins and strictly
    // flatter ones Spoiler wins, so the belt slope is the candidate bordering the switch.
    let rho = solver.sectors().probe(SectorIndex(if j % 2 == 0 && j < probes { j } else { j - 1 }));
    let (gamma, beta) = (Some(rho), Some(rho));
    Ok(BeltSpec { pair, gamma, beta, c: solver.c(), switch: j })
}

/// Lazily computed belts for all pairs of one normalized net pair.
pub struct Belts {
    solver: SlopeSolver,
    specs: BTreeMap<Pair, BeltSpec>,
}

impl Belts {
    pub fn new(solver: SlopeSolver) -> Self {
        Belts { solver, specs: BTreeMap::new() }
    }

    pub fn get(&mut self, pair: Pair) -> Result<BeltSpec, SlopeError> {
        if let Some(b) = self.specs.get(&pair) {
            return Ok(*b);
        }
        let b = compute_belt(&mut self.solver, pair)?;
        self.specs.insert(pair, b);
        Ok(b)
    }

    pub fn computed(&self) -> usize {
        self.specs.len()
    }

    pub fn solver(&mut self) -> &mut SlopeSolver {
        &mut self.solver
    }
}
