//! Finite approximants of strong simulation against an ω-net.
//!
//! Level `k` replaces every Duplicator ω-transition by a forcing script that
//! leads into a test chain hard-wired with the sufficient values of level
//! `k - 1`. Strong simulation between the two resulting plain nets is the
//! level-`k` approximant, and the iteration stops as soon as a level
//! reproduces the sufficient values of the previous one.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fixtures;
use crate::net::{Config, Effect, Ext, Net, NetError, NetKind, Pair, StateId, Transition};
use crate::normal::unify_alphabets;
use crate::strong::{Budget, StrongError, StrongSolver, Verdict};
use crate::weak::{reduce_weak, ExpansionParams, WeakError};

pub const GADGET_E: &str = "$e";
pub const GADGET_F: &str = "$f";
pub const WIN: &str = "$W";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApproxError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Weak(#[from] WeakError),
    #[error("level {level}: {source}")]
    Strong { level: usize, source: StrongError },
    #[error("no stable level within {cap} levels; history: {history}")]
    LevelCap { cap: usize, history: String },
    #[error("approximant invariant violated at level {level}: {what}")]
    Invariant { level: usize, what: String },
}

/// A test chain for value `i` with Spoiler start `t0` and Duplicator start `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestChain {
    pub value: Ext,
    pub spoiler: Net,
    pub dup: Net,
}

pub fn build_test_chain(i: Ext) -> TestChain {
    let (spoiler, dup) = fixtures::test_chain(i);
    TestChain { value: i, spoiler, dup }
}

/// Sufficient values per forcing pair.
pub type SuffTable = BTreeMap<Pair, Ext>;

/// A Spoiler plain net, a Duplicator ω-net and the pairs their approximants track.
#[derive(Debug, Clone)]
pub struct ApproxProblem {
    spoiler: Net,
    dup: Net,
    pairs: Vec<Pair>,
}

impl ApproxProblem {
    /// Tracks every pair of a state in `spoiler_states` and the target of an ω-transition.
    /// `spoiler_states` must contain every Spoiler state that can be current right after
    /// Duplicator takes an ω-step.
    pub fn new(spoiler: &Net, dup: &Net, spoiler_states: &[StateId]) -> Result<ApproxProblem, ApproxError> {
        if spoiler.kind() != NetKind::Ocn {
            return Err(NetError::NotPlain(spoiler.name().to_string()).into());
        }
        if dup.kind() == NetKind::GuardedOmega {
            return Err(NetError::NotPlain(dup.name().to_string()).into());
        }
        for n in [spoiler, dup] {
            if let Some(a) = n.actions().iter().find(|a| a.starts_with("$(") || *a == GADGET_E || *a == GADGET_F) {
                return Err(NetError::Reserved(a.clone()).into());
            }
        }
        if let Some(&p) = spoiler_states.iter().find(|&&p| p >= spoiler.num_states()) {
            return Err(NetError::StateOutOfRange(p).into());
        }
        let mut targets: Vec<StateId> = dup.transitions().iter().filter(|t| t.effect.is_omega()).map(|t| t.dst).collect();
        targets.sort_unstable();
        targets.dedup();
        let mut pairs: Vec<Pair> = spoiler_states.iter().flat_map(|&p| targets.iter().map(move |&q| (p, q))).collect();
        pairs.sort_unstable();
        pairs.dedup();
        let (spoiler, dup) = unify_alphabets(spoiler, dup);
        Ok(ApproxProblem { spoiler, dup, pairs })
    }

    pub fn spoiler(&self) -> &Net {
        &self.spoiler
    }

    pub fn dup(&self) -> &Net {
        &self.dup
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn initial_table(&self) -> SuffTable {
        self.pairs.iter().map(|&p| (p, Ext::Omega)).collect()
    }

    fn pair_action(&self, (q, q2): Pair) -> String {
        format!("$({},{})", self.spoiler.state_name(q), self.dup.state_name(q2))
    }

    fn pair_states(&self, (q, q2): Pair) -> (String, String) {
        let tag = format!("[{},{}]", self.spoiler.state_name(q), self.dup.state_name(q2));
        (format!("$t{tag}"), format!("$u{tag}"))
    }
}

/// The plain nets of one approximant level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxNets {
    pub level: usize,
    pub spoiler: Net,
    pub dup: Net,
}

/// Builds the approximant nets of `level` from the sufficient values of `level - 1`.
pub fn build_sk(problem: &ApproxProblem, level: usize, prev: &SuffTable) -> Result<ApproxNets, ApproxError> {
    let m = &problem.spoiler;
    let mut s = m.clone();
    s.set_name(format!("S{level}"));
    for &pair in &problem.pairs {
        let value = prev.get(&pair).copied().unwrap_or(Ext::Omega);
        let (t, _) = problem.pair_states(pair);
        let start = format!("{t}0");
        match value {
            Ext::Omega => {
                s.connect(&start, GADGET_E, Effect::Fin(0), &start)?;
            }
            Ext::Fin(i) => {
                s.intern_state(&start);
                for j in 0..i {
                    s.connect(&format!("{t}{j}"), GADGET_E, Effect::Fin(-1), &format!("{t}{}", j + 1))?;
                }
                let last = format!("{t}{i}");
                s.connect(&last, GADGET_F, Effect::Fin(0), &last)?;
            }
        }
        s.connect(m.state_name(pair.0), &problem.pair_action(pair), Effect::Fin(0), &start)?;
    }
    Ok(ApproxNets { level, spoiler: s, dup: build_dup(problem, level)? })
}

/// The Duplicator net of every level from 1 on.
fn build_dup(problem: &ApproxProblem, level: usize) -> Result<Net, ApproxError> {
    let m2 = &problem.dup;
    let mut d = Net::new(format!("S{level}'"), NetKind::Ocn);
    for s in m2.states() {
        d.intern_state(s);
    }
    for a in m2.actions() {
        d.intern_action(a);
    }
    for t in m2.transitions().iter().filter(|t| !t.effect.is_omega()) {
        d.add_transition(*t)?;
    }
    d.intern_action(GADGET_E);
    d.intern_action(GADGET_F);
    let w = d.intern_state(WIN);
    let pair_actions: Vec<usize> = problem.pairs.iter().map(|&p| d.intern_action(&problem.pair_action(p))).collect();
    let mut chain: BTreeMap<Pair, StateId> = BTreeMap::new();
    for &pair in &problem.pairs {
        let u = d.intern_state(&problem.pair_states(pair).1);
        d.connect(&problem.pair_states(pair).1, GADGET_E, Effect::Fin(0), &problem.pair_states(pair).1)?;
        chain.insert(pair, u);
    }
    let zero = |src, label, dst| Transition { src, label, guard: 0, effect: Effect::Fin(0), dst };
    for t in m2.transitions().iter().filter(|t| t.effect.is_omega()) {
        for &(p, q2) in problem.pairs.iter().filter(|&&(_, q2)| q2 == t.dst) {
            d.add_transition(zero(t.src, t.label, chain[&(p, q2)]))?;
        }
    }
    for p2 in 0..m2.num_states() {
        for &a in &pair_actions {
            d.add_transition(zero(p2, a, w))?;
        }
    }
    for (i, &(q, q2)) in problem.pairs.iter().enumerate() {
        let u = chain[&(q, q2)];
        d.add_transition(zero(u, pair_actions[i], u))?;
        for (j, &(r, r2)) in problem.pairs.iter().enumerate() {
            if r == q && r2 != q2 {
                d.add_transition(zero(u, pair_actions[j], w))?;
            }
        }
        for a in 0..m2.num_actions() {
            d.add_transition(zero(u, a, w))?;
        }
    }
    for a in 0..d.num_actions() {
        d.add_transition(zero(w, a, w))?;
    }
    Ok(d)
}

/// Outcome of the approximant iteration.
#[derive(Debug, Clone)]
pub struct ApproxRun {
    /// Sufficient values of levels `0..=stable`; the last two agree.
    pub history: Vec<SuffTable>,
    /// First level whose table repeats the previous one.
    pub stable: usize,
    pub level_cap: usize,
    /// The nets of level `stable`, which characterize the limit.
    pub nets: ApproxNets,
}

/// Default level cap: `K (C1 + 1) + 1` with `K` the number of tracked pairs and
/// `C1` a bound on acyclic paths in the level-1 product.
pub fn level_cap(problem: &ApproxProblem, first: &ApproxNets) -> usize {
    let c1 = (first.spoiler.num_states() + 1) * (first.dup.num_states() + 1);
    problem.pairs.len() * (c1 + 1) + 1
}

fn render(history: &[SuffTable]) -> String {
    let rows: Vec<String> = history.iter().map(|t| t.values().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")).collect();
    rows.join(" | ")
}

pub fn iterate_approximants(problem: &ApproxProblem, cap: Option<usize>, budget: Budget) -> Result<ApproxRun, ApproxError> {
    let mut history = vec![problem.initial_table()];
    let first = build_sk(problem, 1, &history[0])?;
    let cap = cap.unwrap_or_else(|| level_cap(problem, &first));
    let size_bound = problem.spoiler.num_states() + problem.pairs.len() * (cap + 1);
    let mut nets = first.clone();
    for level in 1..=cap {
        if level > 1 {
            nets = build_sk(problem, level, &history[level - 1])?;
        }
        if !same_structure(&nets.dup, &first.dup) {
            return Err(ApproxError::Invariant { level, what: "Duplicator net changed".into() });
        }
        if nets.spoiler.num_states() > size_bound {
            return Err(ApproxError::Invariant { level, what: format!("{} Spoiler states exceed {size_bound}", nets.spoiler.num_states()) });
        }
        let table = level_table(problem, &nets, budget)?;
        let prev = &history[level - 1];
        if let Some((p, v)) = table.iter().find(|(p, v)| **v > prev[p]) {
            return Err(ApproxError::Invariant { level, what: format!("suff of {p:?} grew from {} to {v}", prev[p]) });
        }
        let done = table == *prev;
        history.push(table);
        if done {
            return Ok(ApproxRun { history, stable: level, level_cap: cap, nets });
        }
    }
    Err(ApproxError::LevelCap { cap, history: render(&history) })
}

/// Equal states, actions and transitions; names may differ.
pub fn same_structure(a: &Net, b: &Net) -> bool {
    a.states() == b.states() && a.actions() == b.actions() && a.transitions() == b.transitions()
}

fn level_table(problem: &ApproxProblem, nets: &ApproxNets, budget: Budget) -> Result<SuffTable, ApproxError> {
    if problem.pairs.is_empty() {
        return Ok(SuffTable::new());
    }
    let err = |source| ApproxError::Strong { level: nets.level, source };
    let mut solver = StrongSolver::new(&nets.spoiler, &nets.dup, budget).and_then(|s| s.with_roots(problem.pairs.clone())).map_err(err)?;
    let mut table = SuffTable::new();
    for &p in &problem.pairs {
        table.insert(p, solver.suff(p).map_err(err)?);
    }
    Ok(table)
}

/// Strong simulation between `lhs` in the plain net and `rhs` in the ω-net of `problem`.
pub fn decide_approx(problem: &ApproxProblem, lhs: Config, rhs: Config, budget: Budget) -> Result<(Verdict, ApproxRun), ApproxError> {
    let run = iterate_approximants(problem, None, budget)?;
    let err = |source| ApproxError::Strong { level: run.stable, source };
    let mut solver =
        StrongSolver::new(&run.nets.spoiler, &run.nets.dup, budget).and_then(|s| s.with_roots(vec![(lhs.state, rhs.state)])).map_err(err)?;
    let verdict = solver.decide(lhs, rhs).map_err(err)?;
    Ok((verdict, run))
}

/// A weak simulation verdict together with the approximant run behind it.
#[derive(Debug, Clone)]
pub struct WeakDecision {
    pub verdict: Verdict,
    pub params: ExpansionParams,
    pub run: ApproxRun,
    pub pairs: Vec<Pair>,
}

/// Decides `lhs ⪯_w rhs` for original configurations of two plain nets.
pub fn decide_weak(lhs_net: &Net, rhs_net: &Net, lhs: Config, rhs: Config, budget: Budget) -> Result<WeakDecision, ApproxError> {
    if lhs.state >= lhs_net.num_states() {
        return Err(NetError::StateOutOfRange(lhs.state).into());
    }
    if rhs.state >= rhs_net.num_states() {
        return Err(NetError::StateOutOfRange(rhs.state).into());
    }
    let red = reduce_weak(lhs_net, rhs_net)?;
    let originals: Vec<StateId> = (0..lhs_net.num_states()).collect();
    let problem = ApproxProblem::new(&red.spoiler, &red.dup, &originals)?;
    let (verdict, run) = decide_approx(&problem, lhs, rhs, budget)?;
    Ok(WeakDecision { verdict, params: red.params, run, pairs: problem.pairs.clone() })
}
