//! The finitary slope game.
//!
//! A phase is an alternating walk through the product graph that stops at the
//! first repeated node. The effect of the closing cycle is compared against the
//! current slope and either ends the game or starts the next phase with the
//! cycle effect as the new slope. Phases are memoised on the start pair and the
//! sector of the slope, played at the sector's probe direction; within a phase the full path is carried along.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Direction, Sectors, Vec2};
use crate::net::{Effect, Net, Pair};
use crate::normal::{is_complete, is_non_blocking, unify_alphabets};
use crate::product::{product_graph, ProductGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Player {
    Spoiler,
    Duplicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseOutcome {
    DuplicatorImmediate,
    SpoilerImmediate,
    Continue(Direction),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlopeError {
    #[error("slope games need nets in normal form: {0}")]
    NotNormalForm(String),
    #[error("slope game search exceeded {0} positions")]
    Budget(u64),
    #[error("phase bound exceeded: {used} > {bound}")]
    PhaseBound { used: usize, bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SlopeGameResult {
    pub winner: Player,
    /// Largest number of phases along any line of play the search explored.
    pub phases: usize,
}

pub fn evaluate_lasso(cycle: Vec2, slope: Direction) -> PhaseOutcome {
    if !slope.is_behind(cycle) {
        PhaseOutcome::DuplicatorImmediate
    } else if !cycle.is_positive() {
        PhaseOutcome::SpoilerImmediate
    } else {
        PhaseOutcome::Continue(Direction::of(cycle).expect("positive"))
    }
}

pub struct SlopeSolver {
    spoiler: Net,
    dup: Net,
    product: ProductGraph,
    sectors: Sectors,
    /// Per product node, the outgoing edges grouped by Spoiler transition.
    choices: Vec<Vec<Vec<usize>>>,
    memo: HashMap<(usize, Direction), SlopeGameResult>,
    visited: u64,
    budget: u64,
    by_sector: bool,
}

impl SlopeSolver {
    /// `spoiler` must be non-blocking and `dup` complete.
    pub fn new(spoiler: &Net, dup: &Net, budget: u64) -> Result<Self, SlopeError> {
        let (spoiler, dup) = unify_alphabets(spoiler, dup);
        for n in [&spoiler, &dup] {
            if n.has_omega() || n.transitions().iter().any(|t| t.guard > 0) {
                return Err(SlopeError::NotNormalForm(format!("{} is not a plain net", n.name())));
            }
        }
        if !is_non_blocking(&spoiler) {
            return Err(SlopeError::NotNormalForm(format!("{} is blocking", spoiler.name())));
        }
        if !is_complete(&dup) {
            return Err(SlopeError::NotNormalForm(format!("{} is not complete", dup.name())));
        }
        let product = product_graph(&spoiler, &dup);
        let mut groups: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); product.size()];
        for (i, e) in product.edges().iter().enumerate() {
            let g = &mut groups[e.from];
            match g.iter_mut().find(|(l, _)| *l == e.left) {
                Some((_, v)) => v.push(i),
                None => g.push((e.left, vec![i])),
            }
        }
        // Spoiler transitions with no matching edge leave Duplicator stuck.
        for (node, g) in groups.iter_mut().enumerate() {
            let q = product.pair(node).0;
            for &t in spoiler.outgoing(q) {
                if !g.iter().any(|(l, _)| *l == t) {
                    g.push((t, Vec::new()));
                }
            }
            g.sort_by_key(|(l, _)| *l);
        }
        let choices = groups.into_iter().map(|g| g.into_iter().map(|(_, v)| v).collect()).collect();
        let sectors = Sectors::new(product.size() as u64);
        Ok(SlopeSolver { spoiler, dup, product, sectors, choices, memo: HashMap::new(), visited: 0, budget, by_sector: true })
    }

    /// Plays every phase at its literal slope instead of the sector probe.
    pub fn literal_slopes(mut self) -> Self {
        self.by_sector = false;
        self.memo.clear();
        self
    }

    pub fn sectors(&self) -> &Sectors {
        &self.sectors
    }

    pub fn product(&self) -> &ProductGraph {
        &self.product
    }

    /// Belt width: the number of product nodes.
    pub fn c(&self) -> u64 {
        self.product.size() as u64
    }

    pub fn phase_bound(&self) -> usize {
        let k = self.product.size() + 1;
        k * k
    }

    pub fn solve(&mut self, start: Pair, slope: Direction) -> Result<SlopeGameResult, SlopeError> {
        self.visited = 0;
        let node = self.product.node(start);
        let r = self.phase(node, slope)?;
        if r.phases > self.phase_bound() {
            return Err(SlopeError::PhaseBound { used: r.phases, bound: self.phase_bound() });
        }
        Ok(r)
    }

    fn phase(&mut self, start: usize, slope: Direction) -> Result<SlopeGameResult, SlopeError> {
        let slope = if self.by_sector { self.sectors.probe(self.sectors.sector_of(slope)) } else { slope };
        if let Some(r) = self.memo.get(&(start, slope)) {
            return Ok(*r);
        }
        let mut path = vec![(start, Vec2::ZERO)];
        let (winner, depth) = self.spoiler_turn(&mut path, slope)?;
        let r = SlopeGameResult { winner, phases: depth + 1 };
        self.memo.insert((start, slope), r);
        Ok(r)
    }

    fn spoiler_turn(&mut self, path: &mut Vec<(usize, Vec2)>, slope: Direction) -> Result<(Player, usize), SlopeError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(SlopeError::Budget(self.budget));
        }
        let (node, acc) = *path.last().expect("non-empty");
        let mut depth = 0;
        for gi in 0..self.choices[node].len() {
            let mut spoiler_wins = true;
            for k in 0..self.choices[node][gi].len() {
                let e = self.product.edges()[self.choices[node][gi][k]];
                let d = Vec2::new(fin(self.spoiler.transition(e.left).effect), fin(self.dup.transition(e.right).effect));
                let next = acc + d;
                let (winner, sub) = match path.iter().position(|&(v, _)| v == e.to) {
                    Some(i) => match evaluate_lasso(next - path[i].1, slope) {
                        PhaseOutcome::DuplicatorImmediate => (Player::Duplicator, 0),
                        PhaseOutcome::SpoilerImmediate => (Player::Spoiler, 0),
                        PhaseOutcome::Continue(s) => {
                            let r = self.phase(e.to, s)?;
                            (r.winner, r.phases)
                        }
                    },
                    None => {
                        path.push((e.to, next));
                        let r = self.spoiler_turn(path, slope);
                        path.pop();
                        r?
                    }
                };
                depth = depth.max(sub);
                if winner == Player::Duplicator {
                    spoiler_wins = false;
                    break;
                }
            }
            if spoiler_wins {
                return Ok((Player::Spoiler, depth));
            }
        }
        Ok((Player::Duplicator, depth))
    }
}

fn fin(e: Effect) -> i64 {
    e.finite().expect("plain net")
}

/// One-shot convenience wrapper around [`SlopeSolver`].
pub fn solve_slope_game(start: Pair, slope: Direction, spoiler: &Net, dup: &Net) -> Result<SlopeGameResult, SlopeError> {
    SlopeSolver::new(spoiler, dup, 50_000_000)?.solve(start, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_net;
    use crate::normal::normalize_pair;

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(x, y).unwrap()
    }

    fn solver(l: &Net, r: &Net) -> SlopeSolver {
        let (m, m2) = normalize_pair(l, r).unwrap();
        SlopeSolver::new(&m, &m2, 1_000_000).unwrap()
    }

    #[test]
    fn lasso_outcomes() {
        assert_eq!(evaluate_lasso(Vec2::new(0, -1), d(1, 1)), PhaseOutcome::SpoilerImmediate);
        assert_eq!(evaluate_lasso(Vec2::new(-1, 0), d(1, 1)), PhaseOutcome::DuplicatorImmediate);
        for s in [d(0, 1), d(1, 0), d(3, 7)] {
            assert_eq!(evaluate_lasso(Vec2::ZERO, s), PhaseOutcome::DuplicatorImmediate);
        }
        assert_eq!(evaluate_lasso(Vec2::new(2, 1), d(1, 1)), PhaseOutcome::Continue(d(2, 1)));
    }

    #[test]
    fn forced_drain() {
        let l = Net::ocn("l", &[("s", "a", 0, "s")]).unwrap();
        let r = Net::ocn("r", &[("d", "a", -1, "d")]).unwrap();
        let mut s = solver(&l, &r);
        for slope in [d(1, 0), d(1, 1), d(1, 2), d(2, 1), d(1, 5)] {
            assert_eq!(s.solve((0, 0), slope).unwrap().winner, Player::Spoiler, "{slope}");
        }
        // (0,-1) is parallel to (0,1), so it is not behind it.
        assert_eq!(s.solve((0, 0), Direction::UP).unwrap().winner, Player::Duplicator);
    }

    #[test]
    fn spoiler_drain_is_harmless() {
        let l = Net::ocn("l", &[("s", "a", -1, "s")]).unwrap();
        let r = Net::ocn("r", &[("d", "a", 0, "d")]).unwrap();
        let mut s = solver(&l, &r);
        for slope in [d(0, 1), d(1, 0), d(1, 1), d(1, 2), d(2, 1)] {
            assert_eq!(s.solve((0, 0), slope).unwrap().winner, Player::Duplicator);
        }
    }

    #[test]
    fn example_net_slopes() {
        let n = example_net();
        let mut s = solver(&n, &n);
        assert_eq!(s.solve((0, 0), d(1, 2)).unwrap().winner, Player::Duplicator);
        assert_eq!(s.solve((0, 0), d(1, 1)).unwrap().winner, Player::Duplicator);
        assert_eq!(s.solve((0, 0), d(2, 1)).unwrap().winner, Player::Spoiler);
        assert!(s.solve((0, 0), d(2, 1)).unwrap().phases <= s.phase_bound());
    }

    #[test]
    fn refuses_unnormalized() {
        let blocking = Net::ocn("l", &[("s", "a", -1, "s")]).unwrap();
        let n = example_net();
        assert!(matches!(SlopeSolver::new(&blocking, &n, 10), Err(SlopeError::NotNormalForm(_))));
        let incomplete = Net::ocn("r", &[("d", "b", 0, "d")]).unwrap();
        assert!(matches!(SlopeSolver::new(&n, &incomplete, 10), Err(SlopeError::NotNormalForm(_))));
    }

    #[test]
    fn budget_is_reported() {
        let n = example_net();
        let (m, m2) = normalize_pair(&n, &n).unwrap();
        let mut s = SlopeSolver::new(&m, &m2, 0).unwrap();
        assert_eq!(s.solve((0, 0), d(1, 1)), Err(SlopeError::Budget(0)));
    }
}
