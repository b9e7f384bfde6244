//! Bounded-round simulation games on an explicit counter grid.
//!
//! This is a deliberately naive backward induction, independent of the slope-game
//! and threshold machinery, used to cross-check them. Positions whose counters leave
//! `[0, cap]`, and ω-replies or silent pumping that escape past the cap, are resolved
//! by a [`BoundaryMode`].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coloring::{check_yes_certificate, extrapolate, CertificateSet};
use crate::net::{Config, Effect, Ext, Net, NetKind, Pair};
use crate::normal::unify_alphabets;
use crate::strong::{BudgetReport, Certificate, Verdict, Witness};

/// Simulation status of a pair at counters `(n, n')`; `n' = u64::MAX` asks about all large Duplicator counters.
pub type BeltCallback<'a> = &'a dyn Fn(Pair, u64, u64) -> Option<bool>;

#[derive(Clone, Copy)]
pub enum BoundaryMode<'a> {
    /// Off-grid positions count as Spoiler wins.
    Optimistic,
    /// Off-grid positions count as Duplicator wins, so every Spoiler win found is genuine.
    Pessimistic,
    /// Off-grid positions are Spoiler wins only where the callback says "not simulated".
    BeltResolved(BeltCallback<'a>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("grid cap must be positive")]
    ZeroCap,
    #[error("configuration ({0}, {1}) lies outside the grid")]
    OffGrid(usize, u64),
    #[error("the Spoiler net must be a plain net")]
    SpoilerNotPlain,
}

/// Where a Duplicator reply lands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Target {
    On(usize, u64),
    /// Past the cap at a known counter.
    Off(usize, u64),
    /// Past the cap at an unbounded counter; the states Duplicator may still move to.
    Escape(usize),
}

struct Arena<'m> {
    lhs: Net,
    rhs: Net,
    cap: u64,
    mode: BoundaryMode<'m>,
    /// Replies by `(q, m, action)`.
    replies: Vec<Vec<Target>>,
    /// Escape states widened to everything Duplicator can still reach, by `(state, action)`.
    escape_reach: BTreeMap<(usize, usize), Vec<usize>>,
}

/// Outcome of a bounded game over the whole grid.
#[derive(Debug, Clone)]
pub struct OracleTable {
    ls: usize,
    rs: usize,
    cap: u64,
    pub rounds: u32,
    /// True when another round would change nothing.
    pub converged: bool,
    win: Vec<bool>,
}

impl OracleTable {
    fn idx(&self, pair: Pair, n: u64, m: u64) -> usize {
        let w = self.cap as usize + 1;
        ((pair.0 * self.rs + pair.1) * w + n as usize) * w + m as usize
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn spoiler_wins(&self, pair: Pair, n: u64, m: u64) -> bool {
        self.win[self.idx(pair, n, m)]
    }

    /// Least Duplicator counter at which Spoiler has not won, or ω.
    pub fn survivor_threshold(&self, pair: Pair, n: u64) -> Ext {
        (0..=self.cap).find(|&m| !self.spoiler_wins(pair, n, m)).map_or(Ext::Omega, Ext::Fin)
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        (0..self.ls).flat_map(move |p| (0..self.rs).map(move |q| (p, q)))
    }
}

impl<'m> Arena<'m> {
    fn new(lhs: &Net, rhs: &Net, cap: u64, mode: BoundaryMode<'m>, weak: bool) -> Result<Self, OracleError> {
        if cap == 0 {
            return Err(OracleError::ZeroCap);
        }
        if lhs.kind() != NetKind::Ocn {
            return Err(OracleError::SpoilerNotPlain);
        }
        let (lhs, rhs) = unify_alphabets(lhs, rhs);
        let mut arena = Arena { lhs, rhs, cap, mode, replies: Vec::new(), escape_reach: BTreeMap::new() };
        arena.build_replies(weak);
        Ok(arena)
    }

    fn slot(&self, q: usize, m: u64, a: usize) -> usize {
        (q * (self.cap as usize + 1) + m as usize) * self.rhs.num_actions() + a
    }

    /// Single steps of the Duplicator net from `(q, m)` with label `a`.
    fn steps(&self, q: usize, m: u64, a: Option<usize>) -> Vec<Target> {
        let mut out = Vec::new();
        for &ti in self.rhs.outgoing(q) {
            let t = self.rhs.transition(ti);
            if a.is_some_and(|a| t.label != a) || m < t.guard {
                continue;
            }
            match t.effect {
                Effect::Fin(d) => {
                    let m2 = m as i128 + d as i128;
                    if m2 < 0 {
                        continue;
                    }
                    let m2 = m2 as u64;
                    out.push(if m2 <= self.cap { Target::On(t.dst, m2) } else { Target::Off(t.dst, m2) });
                }
                Effect::Omega => {
                    for m2 in m + 1..=self.cap {
                        out.push(Target::On(t.dst, m2));
                    }
                    out.push(Target::Escape(t.dst));
                }
            }
        }
        out
    }

    /// Silent closure of a set of on-grid configurations, including the configurations themselves.
    fn silent_closure(&self, start: Vec<Target>) -> Vec<Target> {
        let Some(tau) = self.rhs.tau() else { return start };
        let mut seen: Vec<Target> = Vec::new();
        let mut stack = start;
        while let Some(t) = stack.pop() {
            if seen.contains(&t) {
                continue;
            }
            seen.push(t);
            if let Target::On(q, m) = t {
                stack.extend(self.steps(q, m, Some(tau)));
            }
        }
        seen.sort_unstable();
        seen
    }

    fn build_replies(&mut self, weak: bool) {
        let rs = self.rhs.num_states();
        let na = self.rhs.num_actions();
        let tau = self.rhs.tau();
        self.replies = vec![Vec::new(); rs * (self.cap as usize + 1) * na];
        let closures: Vec<Vec<Target>> = if weak {
            (0..rs).flat_map(|q| (0..=self.cap).map(move |m| (q, m))).map(|(q, m)| self.silent_closure(vec![Target::On(q, m)])).collect()
        } else {
            Vec::new()
        };
        let closure_of = |q: usize, m: u64| &closures[q * (self.cap as usize + 1) + m as usize];
        for q in 0..rs {
            for m in 0..=self.cap {
                for a in 0..na {
                    let targets = if !weak {
                        self.steps(q, m, Some(a))
                    } else if Some(a) == tau {
                        closure_of(q, m).clone()
                    } else {
                        let mut mid = Vec::new();
                        for t in closure_of(q, m) {
                            match *t {
                                Target::On(s, c) => mid.extend(self.steps(s, c, Some(a))),
                                Target::Off(s, _) | Target::Escape(s) => mid.push(Target::Escape(s)),
                            }
                        }
                        let mut out = Vec::new();
                        for t in mid {
                            match t {
                                Target::On(s, c) => out.extend(closure_of(s, c).iter().copied()),
                                Target::Off(s, _) | Target::Escape(s) => out.push(Target::Escape(s)),
                            }
                        }
                        out.sort_unstable();
                        out.dedup();
                        out
                    };
                    let targets = if weak {
                        targets.into_iter().map(|t| if let Target::Off(s, _) = t { Target::Escape(s) } else { t }).collect()
                    } else {
                        targets
                    };
                    let slot = self.slot(q, m, a);
                    self.replies[slot] = targets;
                }
            }
        }
        if weak {
            // Escapes are widened as if they happened before the visible step, which only helps Duplicator.
            let mut reach = BTreeMap::new();
            for s in 0..rs {
                for a in 0..na {
                    reach.insert((s, a), self.reach_ignoring_counters(s, if Some(a) == tau { None } else { Some(a) }));
                }
            }
            self.escape_reach = reach;
        }
    }

    fn reach_ignoring_counters(&self, s: usize, visible: Option<usize>) -> Vec<usize> {
        let tau = self.rhs.tau();
        let silent = |from: Vec<usize>| -> Vec<usize> {
            let mut seen = from.clone();
            let mut stack = from;
            while let Some(q) = stack.pop() {
                for &ti in self.rhs.outgoing(q) {
                    let t = self.rhs.transition(ti);
                    if Some(t.label) == tau && !seen.contains(&t.dst) {
                        seen.push(t.dst);
                        stack.push(t.dst);
                    }
                }
            }
            seen
        };
        let first = silent(vec![s]);
        let mut out = first.clone();
        if let Some(a) = visible {
            let mid: Vec<usize> = first
                .iter()
                .flat_map(|&q| self.rhs.outgoing(q).iter().map(|&ti| self.rhs.transition(ti)).filter(|t| t.label == a).map(|t| t.dst))
                .collect();
            out.extend(silent(mid));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether Spoiler wins at a reply target, given the previous round's table.
    fn target_wins(&self, table: &OracleTable, p: usize, n: u64, a: usize, t: Target) -> bool {
        if n > self.cap {
            let q = match t {
                Target::On(q, _) | Target::Off(q, _) | Target::Escape(q) => q,
            };
            let m = match t {
                Target::On(_, m) | Target::Off(_, m) => m,
                Target::Escape(_) => u64::MAX,
            };
            return self.resolve(&[(p, q)], n, m);
        }
        match t {
            Target::On(q, m) => table.spoiler_wins((p, q), n, m),
            Target::Off(q, m) => self.resolve(&[(p, q)], n, m),
            Target::Escape(q) => {
                let states = self.escape_reach.get(&(q, a)).cloned().unwrap_or_else(|| vec![q]);
                let pairs: Vec<Pair> = states.into_iter().map(|r| (p, r)).collect();
                self.resolve(&pairs, n, u64::MAX)
            }
        }
    }

    /// Spoiler wins off the grid only if he wins at every listed pair.
    fn resolve(&self, pairs: &[Pair], n: u64, m: u64) -> bool {
        match self.mode {
            BoundaryMode::Optimistic => true,
            BoundaryMode::Pessimistic => false,
            BoundaryMode::BeltResolved(cb) => pairs.iter().all(|&pq| cb(pq, n, m) == Some(false)),
        }
    }

    fn solve(&self, rounds: u32) -> OracleTable {
        let (ls, rs) = (self.lhs.num_states(), self.rhs.num_states());
        let w = self.cap as usize + 1;
        let mut table = OracleTable { ls, rs, cap: self.cap, rounds: 0, converged: false, win: vec![false; ls * rs * w * w] };
        for _ in 0..rounds {
            let mut next = table.win.clone();
            let mut changed = false;
            for p in 0..ls {
                for q in 0..rs {
                    for n in 0..=self.cap {
                        for m in 0..=self.cap {
                            let i = table.idx((p, q), n, m);
                            if table.win[i] {
                                continue;
                            }
                            if self.spoiler_has_win(&table, p, q, n, m) {
                                next[i] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            table.win = next;
            table.rounds += 1;
            if !changed {
                table.converged = true;
                break;
            }
        }
        table
    }

    fn spoiler_has_win(&self, table: &OracleTable, p: usize, q: usize, n: u64, m: u64) -> bool {
        self.lhs.outgoing(p).iter().any(|&ti| {
            let t = self.lhs.transition(ti);
            let Effect::Fin(d) = t.effect else { return false };
            let n2 = n as i128 + d as i128;
            if n2 < 0 {
                return false;
            }
            let replies = &self.replies[self.slot(q, m, t.label)];
            replies.iter().all(|&r| self.target_wins(table, t.dst, n2 as u64, t.label, r))
        })
    }
}

/// Solves the bounded game on the full grid for up to `rounds` rounds.
pub fn solve_grid(lhs: &Net, rhs: &Net, rounds: u32, cap: u64, mode: BoundaryMode, weak: bool) -> Result<OracleTable, OracleError> {
    Ok(Arena::new(lhs, rhs, cap, mode, weak)?.solve(rounds))
}

fn on_grid(c: Config, cap: u64) -> Result<(), OracleError> {
    if cap == 0 {
        return Err(OracleError::ZeroCap);
    }
    if c.counter > cap {
        return Err(OracleError::OffGrid(c.state, c.counter));
    }
    Ok(())
}

/// Whether Spoiler wins the strong game from `(lhs, rhs)` within `k` rounds.
pub fn spoiler_wins_within(lhs_net: &Net, rhs_net: &Net, lhs: Config, rhs: Config, k: u32, cap: u64, mode: BoundaryMode) -> Result<bool, OracleError> {
    on_grid(lhs, cap)?;
    on_grid(rhs, cap)?;
    let t = solve_grid(lhs_net, rhs_net, k, cap, mode, false)?;
    Ok(t.spoiler_wins((lhs.state, rhs.state), lhs.counter, rhs.counter))
}

/// As [`spoiler_wins_within`] with Duplicator answering by weak steps.
pub fn weak_spoiler_wins_within(lhs_net: &Net, rhs_net: &Net, lhs: Config, rhs: Config, k: u32, cap: u64, mode: BoundaryMode) -> Result<bool, OracleError> {
    on_grid(lhs, cap)?;
    on_grid(rhs, cap)?;
    let t = solve_grid(lhs_net, rhs_net, k, cap, mode, true)?;
    Ok(t.spoiler_wins((lhs.state, rhs.state), lhs.counter, rhs.counter))
}

/// Strong sandwich: a pessimistic Spoiler win refutes; surviving rows, extrapolated
/// and checked as a certificate, confirm.
pub fn sandwich_decide(lhs_net: &Net, rhs_net: &Net, lhs: Config, rhs: Config, schedule: &[(u32, u64)]) -> Verdict {
    let mut last = (0, 0);
    for &(k, cap) in schedule {
        last = (k as u64, cap);
        if lhs.counter > cap || rhs.counter > cap {
            continue;
        }
        let Ok(t) = solve_grid(lhs_net, rhs_net, k, cap, BoundaryMode::Pessimistic, false) else { break };
        let pair = (lhs.state, rhs.state);
        if t.spoiler_wins(pair, lhs.counter, rhs.counter) {
            return Verdict::NotSimulated(Witness::Rounds { rounds: t.rounds, grid: cap });
        }
        if rhs_net.kind() != NetKind::Ocn {
            continue;
        }
        let top = cap - cap / 4;
        let mut rows = BTreeMap::new();
        for pq in t.pairs() {
            let values: Vec<Ext> = (0..=top).map(|n| t.survivor_threshold(pq, n)).collect();
            rows.insert(pq, extrapolate(&values));
        }
        let set = CertificateSet { rows, query: Some((pair, lhs.counter, rhs.counter)) };
        if check_yes_certificate(&set, lhs_net, rhs_net).is_ok() {
            return Verdict::Simulated(Certificate::Staircase(set));
        }
    }
    Verdict::Unknown(BudgetReport { grid: last.1, cap: last.0, reason: "sandwich schedule exhausted".into() })
}

/// Weak sandwich: a pessimistic Spoiler win refutes; a converged optimistic survivor set
/// containing the query is a weak simulation on the grid and confirms.
pub fn weak_sandwich_decide(lhs_net: &Net, rhs_net: &Net, lhs: Config, rhs: Config, schedule: &[(u32, u64)]) -> Verdict {
    let mut last = (0, 0);
    for &(k, cap) in schedule {
        last = (k as u64, cap);
        if lhs.counter > cap || rhs.counter > cap {
            continue;
        }
        let pair = (lhs.state, rhs.state);
        let Ok(t) = solve_grid(lhs_net, rhs_net, k, cap, BoundaryMode::Pessimistic, true) else { break };
        if t.spoiler_wins(pair, lhs.counter, rhs.counter) {
            return Verdict::NotSimulated(Witness::Rounds { rounds: t.rounds, grid: cap });
        }
        let Ok(o) = solve_grid(lhs_net, rhs_net, k, cap, BoundaryMode::Optimistic, true) else { break };
        if o.converged && !o.spoiler_wins(pair, lhs.counter, rhs.counter) {
            let size = o.win.iter().filter(|w| !**w).count();
            return Verdict::Simulated(Certificate::Grid { grid: cap, positions: size });
        }
    }
    Verdict::Unknown(BudgetReport { grid: last.1, cap: last.0, reason: "sandwich schedule exhausted".into() })
}
