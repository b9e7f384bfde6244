use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::belt::{BeltSpec, Belts};
use crate::coloring::{check_yes_certificate, extrapolate, minimize, CertificateSet, CheckFailure, Staircase, Tail};
use crate::geometry::Direction;
use crate::net::{Config, Effect, Ext, Net, NetError, Pair};
use crate::normal::{normalize_pair, unify_alphabets};
use crate::slope::SlopeSolver;
use crate::threshold::{Game, ThresholdError, Thresholds, OMEGA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Largest Spoiler counter range of the threshold engine.
    pub max_grid: u64,
    /// Largest value cap of the threshold engine.
    pub max_cap: u64,
    /// Positions a single slope game may visit.
    pub slope_nodes: u64,
    /// Products with more nodes than this get no belts.
    pub belt_limit: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_grid: 512, max_cap: 1 << 14, slope_nodes: 2_000_000, belt_limit: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// A checked simulation relation containing the query.
    Staircase(CertificateSet),
    /// The query lies C-above a direction at which Duplicator wins the slope game.
    Belt { gamma: Direction, c: u64 },
    /// A closed weak simulation on the explicit grid `[0, grid]²`.
    Grid { grid: u64, positions: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// The threshold at Spoiler counter `n` is at least `at_least`.
    Threshold { n: u64, at_least: u64 },
    /// A Spoiler strategy wins from Spoiler counter `from` against every Duplicator counter.
    Omega { from: u64 },
    /// The query lies C-below a direction at which Spoiler wins the slope game.
    Belt { beta: Direction, c: u64 },
    /// Spoiler wins the bounded game within `rounds` rounds on grid `[0, grid]²`.
    Rounds { rounds: u32, grid: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetReport {
    pub grid: u64,
    pub cap: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Simulated(Certificate),
    NotSimulated(Witness),
    Unknown(BudgetReport),
}

impl Verdict {
    pub fn holds(&self) -> Option<bool> {
        match self {
            Verdict::Simulated(_) => Some(true),
            Verdict::NotSimulated(_) => Some(false),
            Verdict::Unknown(_) => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Simulated(_) => "simulated",
            Verdict::NotSimulated(_) => "not-simulated",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrongError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error("pair {0:?} is outside the solver's roots")]
    NotARoot(Pair),
    #[error("budget exhausted: {0:?}")]
    Budget(BudgetReport),
}

/// Counters for reporting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub belts: usize,
    pub grid: u64,
    pub cap: u64,
    pub pairs: usize,
    pub rounds: u64,
}

struct Analysis {
    game: Game,
    th: Thresholds,
    cert: Option<CertificateSet>,
}

/// Answers strong simulation queries between two plain nets, caching all intermediate results.
pub struct StrongSolver {
    lhs: Net,
    rhs: Net,
    spoiler: Net,
    dup: Net,
    originals: (usize, usize),
    roots: Option<Vec<Pair>>,
    budget: Budget,
    belts: Option<Belts>,
    analysis: Option<Analysis>,
}

const FIRST_GRID: u64 = 16;

impl StrongSolver {
    pub fn new(lhs: &Net, rhs: &Net, budget: Budget) -> Result<Self, StrongError> {
        let (spoiler, dup) = normalize_pair(lhs, rhs)?;
        let (spoiler, dup) = unify_alphabets(&spoiler, &dup);
        let size = spoiler.num_states() * dup.num_states();
        let belts = if size <= budget.belt_limit {
            Some(Belts::new(SlopeSolver::new(&spoiler, &dup, budget.slope_nodes).expect("normalized nets")))
        } else {
            None
        };
        Ok(StrongSolver { lhs: lhs.clone(), rhs: rhs.clone(), spoiler, dup, originals: (lhs.num_states(), rhs.num_states()), roots: None, budget, belts, analysis: None })
    }

    /// Restricts all queries to `roots`, so the threshold engine only explores pairs reachable from them.
    pub fn with_roots(mut self, roots: Vec<Pair>) -> Result<Self, StrongError> {
        for &r in &roots {
            self.check_pair(r)?;
        }
        self.roots = Some(roots);
        self.analysis = None;
        Ok(self)
    }

    /// The normalized Spoiler net.
    pub fn spoiler(&self) -> &Net {
        &self.spoiler
    }

    /// The normalized Duplicator net.
    pub fn dup(&self) -> &Net {
        &self.dup
    }

    pub fn stats(&self) -> Stats {
        let mut s = Stats { belts: self.belts.as_ref().map_or(0, |b| b.computed()), ..Stats::default() };
        if let Some(a) = &self.analysis {
            s.grid = a.th.n_max();
            s.cap = a.th.cap();
            s.pairs = a.game.len();
            s.rounds = a.th.rounds();
        }
        s
    }

    fn check_pair(&self, pair: Pair) -> Result<(), StrongError> {
        if pair.0 >= self.originals.0 {
            return Err(NetError::StateOutOfRange(pair.0).into());
        }
        if pair.1 >= self.originals.1 {
            return Err(NetError::StateOutOfRange(pair.1).into());
        }
        if let Some(roots) = &self.roots {
            if !roots.contains(&pair) {
                return Err(StrongError::NotARoot(pair));
            }
        }
        Ok(())
    }

    /// The belt of an original pair, if the product is small enough and the slope games finish.
    pub fn belt(&mut self, pair: Pair) -> Option<BeltSpec> {
        self.belts.as_mut()?.get(pair).ok()
    }

    fn analysis(&mut self, n_max: u64) -> Result<&Analysis, StrongError> {
        if self.analysis.as_ref().is_none_or(|a| a.th.n_max() < n_max) {
            let (l, r) = self.originals;
            let roots = self.roots.clone().unwrap_or_else(|| (0..l).flat_map(|p| (0..r).map(move |q| (p, q))).collect());
            let game = Game::new(&self.spoiler, &self.dup, &roots)?;
            let cap = (4 * n_max + 16).min(self.budget.max_cap);
            let known = self.vertical_belts(&game);
            let th = Thresholds::compute_seeded(&game, n_max, cap, self.budget.max_cap, &known);
            let cert = certify(&game, &th, &self.spoiler, &self.dup);
            self.analysis = Some(Analysis { game, th, cert });
        }
        Ok(self.analysis.as_ref().expect("just computed"))
    }

    /// Pairs of `game` with a vertical belt, which are ω beyond the belt width.
    fn vertical_belts(&mut self, game: &Game) -> Vec<(usize, u64)> {
        let Some(belts) = self.belts.as_mut() else { return Vec::new() };
        let mut out = Vec::new();
        for (x, &pair) in game.pairs().iter().enumerate() {
            if let Ok(b) = belts.get(pair) {
                if b.beta == Some(Direction::UP) {
                    out.push((x, b.c + 1));
                }
            }
        }
        out
    }

    fn grids(&self, n: u64) -> Vec<u64> {
        let mut g = if n + 8 <= self.budget.max_grid { (n + 8).max(FIRST_GRID).next_power_of_two() } else { FIRST_GRID };
        g = g.min(self.budget.max_grid);
        let mut out = vec![g];
        while g < self.budget.max_grid {
            g = (g * 2).min(self.budget.max_grid);
            out.push(g);
        }
        out
    }

    /// Decides whether `lhs` (a Spoiler configuration) is simulated by `rhs`.
    pub fn decide(&mut self, lhs: Config, rhs: Config) -> Result<Verdict, StrongError> {
        let pair = (lhs.state, rhs.state);
        self.check_pair(pair)?;
        let (n, n2) = (lhs.counter, rhs.counter);
        let belt = self.belt(pair);
        let side = belt.and_then(|b| b.classify((n, n2)));
        if side == Some(false) {
            let b = belt.expect("classified");
            return Ok(Verdict::NotSimulated(Witness::Belt { beta: b.beta.expect("below beta"), c: b.c }));
        }
        let mut last = (0, 0);
        for grid in self.grids(n) {
            let (spoiler, dup) = (self.spoiler.clone(), self.dup.clone());
            let a = self.analysis(grid)?;
            last = (a.th.n_max(), a.th.cap());
            let x = a.game.index(pair).expect("root pair");
            let nn = n.min(a.th.n_max());
            let lb = a.th.get(x, nn);
            if lb == OMEGA {
                let from = (0..=nn).find(|&k| a.th.is_proven_omega(x, k)).expect("omega at nn");
                assert!(side != Some(true), "belt and threshold engine disagree at {pair:?} ({n}, {n2})");
                return Ok(Verdict::NotSimulated(Witness::Omega { from }));
            }
            if lb > n2 {
                assert!(side != Some(true), "belt and threshold engine disagree at {pair:?} ({n}, {n2})");
                return Ok(Verdict::NotSimulated(Witness::Threshold { n: nn, at_least: lb }));
            }
            if let Some(cert) = &a.cert {
                if cert.contains(pair, n, n2) {
                    let r = minimize(&restrict(cert, &spoiler, &dup, (pair, n, n2)), &self.lhs, &self.rhs);
                    debug_assert_eq!(check_yes_certificate(&r, &self.lhs, &self.rhs), Ok(()));
                    return Ok(Verdict::Simulated(Certificate::Staircase(r)));
                }
            }
        }
        if side == Some(true) {
            let b = belt.expect("classified");
            return Ok(Verdict::Simulated(Certificate::Belt { gamma: b.gamma.expect("above gamma"), c: b.c }));
        }
        Ok(Verdict::Unknown(BudgetReport { grid: last.0, cap: last.1, reason: "no certificate or lower bound decides the query".into() }))
    }

    /// Least Spoiler counter from which no Duplicator counter suffices, or ω.
    pub fn suff(&mut self, pair: Pair) -> Result<Ext, StrongError> {
        self.check_pair(pair)?;
        let mut last = (0, 0);
        for grid in self.grids(0) {
            let a = self.analysis(grid)?;
            last = (a.th.n_max(), a.th.cap());
            let x = a.game.index(pair).expect("root pair");
            if let Some(n0) = (0..=a.th.n_max()).find(|&k| a.th.is_proven_omega(x, k)) {
                if n0 == 0 || a.cert.as_ref().is_some_and(|c| !c.at(pair, n0 - 1).is_omega()) {
                    return Ok(Ext::Fin(n0));
                }
            }
            if a.cert.as_ref().and_then(|c| c.rows.get(&pair)).is_some_and(|s| s.is_total()) {
                return Ok(Ext::Omega);
            }
        }
        Err(StrongError::Budget(BudgetReport { grid: last.0, cap: last.1, reason: format!("suff of {pair:?} undetermined") }))
    }

    /// The verified maximal staircase of an original pair.
    pub fn coloring(&mut self, pair: Pair) -> Result<Staircase, StrongError> {
        self.check_pair(pair)?;
        let mut last = (0, 0);
        for grid in self.grids(0) {
            let a = self.analysis(grid)?;
            last = (a.th.n_max(), a.th.cap());
            if let Some(c) = &a.cert {
                return Ok(c.rows[&pair].clone());
            }
        }
        Err(StrongError::Budget(BudgetReport { grid: last.0, cap: last.1, reason: "no periodic certificate found".into() }))
    }

    /// Lower bound on the threshold of an original pair at Spoiler counter `n`, from the current analysis.
    pub fn lower_bound(&mut self, pair: Pair, n: u64) -> Result<Ext, StrongError> {
        self.check_pair(pair)?;
        let grid = self.grids(n)[0];
        let a = self.analysis(grid)?;
        let x = a.game.index(pair).expect("root pair");
        Ok(match a.th.get(x, n) {
            OMEGA => Ext::Omega,
            v => Ext::Fin(v),
        })
    }
}

/// Builds a staircase per pair from the lower bounds and keeps it only if it checks.
fn certify(game: &Game, th: &Thresholds, spoiler: &Net, dup: &Net) -> Option<CertificateSet> {
    let top = th.n_max() - th.n_max() / 4;
    let mut rows = BTreeMap::new();
    for (x, &pair) in game.pairs().iter().enumerate() {
        let values: Vec<Ext> = (0..=top)
            .map(|n| match th.get(x, n) {
                v if v > th.cap() => Ext::Omega,
                v => Ext::Fin(v),
            })
            .collect();
        let s = extrapolate(&values);
        if s.prefix.is_empty() && s.tail == Tail::Omega {
            continue;
        }
        rows.insert(pair, s);
    }
    let mut set = CertificateSet { rows, query: None };
    // Rows that overclaim are dropped until the rest checks.
    loop {
        match check_yes_certificate(&set, spoiler, dup) {
            Ok(()) => return Some(set),
            Err(CheckFailure::Malformed(pair) | CheckFailure::Unmatched { pair, .. }) => {
                set.rows.remove(&pair);
            }
            Err(CheckFailure::MissingQuery) => return None,
        }
    }
}

/// The part of a checked relation needed to justify `query`: the rows reached from it
/// by Spoiler moves answered with the first valid reply, plus every row from the
/// periodic region upwards.
pub fn restrict(cert: &CertificateSet, spoiler: &Net, dup: &Net, query: (Pair, u64, u64)) -> CertificateSet {
    let (spoiler, dup) = unify_alphabets(spoiler, dup);
    let max_drop = spoiler.transitions().iter().filter_map(|t| t.effect.finite()).map(|d| (-d).max(0) as u64).max().unwrap_or(0);
    let top = cert.rows.values().map(|s| s.prefix.len() as u64).max().unwrap_or(0) + 1;
    let mut reached: BTreeSet<(Pair, u64)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    let visit = |row: (Pair, u64), reached: &mut BTreeSet<(Pair, u64)>, queue: &mut VecDeque<(Pair, u64)>| {
        if !cert.at(row.0, row.1).is_omega() && reached.insert(row) {
            queue.push_back(row);
        }
    };
    if query.1 < top {
        visit((query.0, query.1), &mut reached, &mut queue);
    }
    for &pair in cert.rows.keys() {
        for m in top..top + max_drop {
            visit((pair, m), &mut reached, &mut queue);
        }
    }
    while let Some(((q, q2), m)) = queue.pop_front() {
        let Ext::Fin(m2) = cert.at((q, q2), m) else { continue };
        for &ti in spoiler.outgoing(q) {
            let t = spoiler.transition(ti);
            let Effect::Fin(d) = t.effect else { continue };
            let k = m as i128 + d as i128;
            if k < 0 {
                continue;
            }
            let reply = dup.outgoing(q2).iter().map(|&ri| dup.transition(ri)).find(|r| {
                r.label == t.label
                    && r.effect.finite().is_some_and(|d2| {
                        let k2 = m2 as i128 + d2 as i128;
                        k2 >= 0 && cert.contains((t.dst, r.dst), k as u64, k2 as u64)
                    })
            });
            if let Some(r) = reply {
                if (k as u64) < top {
                    visit(((t.dst, r.dst), k as u64), &mut reached, &mut queue);
                }
            }
        }
    }
    let mut rows = BTreeMap::new();
    for (&pair, s) in &cert.rows {
        let p = s.period().map_or(0, |(p, _)| p);
        let prefix: Vec<Ext> = (0..top + p)
            .map(|n| if n >= top || reached.contains(&(pair, n)) { s.at(n) } else { Ext::Omega })
            .collect();
        let r = Staircase { prefix, tail: s.tail };
        if r.prefix.iter().all(|v| v.is_omega()) && r.tail == Tail::Omega {
            continue;
        }
        rows.insert(pair, r);
    }
    CertificateSet { rows, query: Some(query) }
}

/// One-shot strong simulation query between original configurations.
pub fn decide_strong(lhs_net: &Net, lhs: Config, rhs_net: &Net, rhs: Config, budget: Budget) -> Result<Verdict, StrongError> {
    StrongSolver::new(lhs_net, rhs_net, budget)?.decide(lhs, rhs)
}

/// One-shot minimal sufficient value.
pub fn compute_suff(lhs_net: &Net, rhs_net: &Net, pair: Pair, budget: Budget) -> Result<Ext, StrongError> {
    StrongSolver::new(lhs_net, rhs_net, budget)?.suff(pair)
}
