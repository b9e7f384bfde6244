//! Threshold functions of the simulation game on a truncated counter range.
//!
//! For a pair `X = (q, q')` the threshold `f_X(n)` is the least Duplicator
//! counter that simulates Spoiler counter `n`, or ω if none does. The engine
//! computes lower bounds by Kleene iteration of the one-step operator over
//! `n ∈ [0, N]`, where a Spoiler counter above `N` is read as `N`. Positions
//! whose bound outgrows the value cap are then proven ω by exhibiting a
//! positional Spoiler strategy under which every cycle Duplicator can close
//! has negative weight.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::net::{Effect, Net, Pair};
use crate::normal::unify_alphabets;

/// Marker for a threshold proven to be ω.
pub const OMEGA: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThresholdError {
    #[error("threshold games need finite effects and no guards: {0}")]
    Unsupported(String),
}

/// One Spoiler transition from a pair, with all label-matching Duplicator replies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub d: i64,
    /// `(successor pair index, Duplicator effect)`.
    pub replies: Vec<(usize, i64)>,
}

/// The pairs reachable from a set of roots and their moves.
#[derive(Debug, Clone)]
pub struct Game {
    pairs: Vec<Pair>,
    index: HashMap<Pair, usize>,
    moves: Vec<Vec<Move>>,
    preds: Vec<Vec<(usize, i64)>>,
}

impl Game {
    pub fn new(spoiler: &Net, dup: &Net, roots: &[Pair]) -> Result<Game, ThresholdError> {
        let (spoiler, dup) = unify_alphabets(spoiler, dup);
        for n in [&spoiler, &dup] {
            if n.transitions().iter().any(|t| t.effect.is_omega() || t.guard > 0) {
                return Err(ThresholdError::Unsupported(n.name().to_string()));
            }
        }
        let mut game = Game { pairs: Vec::new(), index: HashMap::new(), moves: Vec::new(), preds: Vec::new() };
        let mut queue = VecDeque::new();
        for &r in roots {
            game.intern(r, &mut queue);
        }
        while let Some(x) = queue.pop_front() {
            let (q, q2) = game.pairs[x];
            let mut moves = Vec::new();
            for &ti in spoiler.outgoing(q) {
                let t = spoiler.transition(ti);
                let mut replies = Vec::new();
                for &ri in dup.outgoing(q2) {
                    let r = dup.transition(ri);
                    if r.label == t.label {
                        let y = game.intern((t.dst, r.dst), &mut queue);
                        replies.push((y, fin(r.effect)));
                    }
                }
                replies.sort_unstable();
                replies.dedup();
                moves.push(Move { d: fin(t.effect), replies });
            }
            game.moves[x] = moves;
        }
        for x in 0..game.pairs.len() {
            for m in &game.moves[x] {
                for &(y, _) in &m.replies {
                    if !game.preds[y].contains(&(x, m.d)) {
                        game.preds[y].push((x, m.d));
                    }
                }
            }
        }
        Ok(game)
    }

    fn intern(&mut self, p: Pair, queue: &mut VecDeque<usize>) -> usize {
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        let i = self.pairs.len();
        self.pairs.push(p);
        self.index.insert(p, i);
        self.moves.push(Vec::new());
        self.preds.push(Vec::new());
        queue.push_back(i);
        i
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn index(&self, p: Pair) -> Option<usize> {
        self.index.get(&p).copied()
    }

    pub fn moves(&self, x: usize) -> &[Move] {
        &self.moves[x]
    }
}

fn fin(e: Effect) -> i64 {
    e.finite().expect("checked finite")
}

/// Least Duplicator counter that answers a reply with effect `d2` into a position needing `need`.
fn required(need: u64, d2: i64) -> u64 {
    if need == OMEGA {
        return OMEGA;
    }
    let r = need as i128 - d2 as i128;
    r.max(-d2 as i128).max(0) as u64
}

/// Lower bounds on all thresholds of a [`Game`] over `n ∈ [0, N]`.
#[derive(Debug, Clone)]
pub struct Thresholds {
    n_max: u64,
    cap: u64,
    vals: Vec<u64>,
    rounds: u64,
}

impl Thresholds {
    /// Runs the iteration until every position is below the value cap or proven ω,
    /// doubling the cap up to `max_cap`.
    pub fn compute(game: &Game, n_max: u64, cap: u64, max_cap: u64) -> Thresholds {
        Thresholds::compute_seeded(game, n_max, cap, max_cap, &[])
    }

    /// As [`Thresholds::compute`], with every `(x, n0)` in `known` marking pair `x` as ω
    /// from Spoiler counter `n0` on.
    pub fn compute_seeded(game: &Game, n_max: u64, cap: u64, max_cap: u64, known: &[(usize, u64)]) -> Thresholds {
        let width = n_max as usize + 1;
        let mut th = Thresholds { n_max, cap, vals: vec![0; game.len() * width], rounds: 0 };
        for &(x, n0) in known {
            for n in n0..=n_max {
                let i = th.pos(x, n);
                th.vals[i] = OMEGA;
            }
        }
        let mut queue: VecDeque<usize> = (0..th.vals.len()).collect();
        let mut queued = vec![true; th.vals.len()];
        loop {
            th.iterate(game, &mut queue, &mut queued);
            let truncated: Vec<usize> = (0..th.vals.len()).filter(|&i| th.vals[i] == th.cap + 1).collect();
            if truncated.is_empty() {
                break;
            }
            // Neighbours of truncated positions sit a few units below the cap.
            let candidates: Vec<usize> = (0..th.vals.len()).filter(|&i| th.vals[i] != OMEGA && th.vals[i] > th.cap / 2).collect();
            let proven = th.prove_omega(game, &candidates);
            if !proven.is_empty() {
                for &i in &proven {
                    th.vals[i] = OMEGA;
                }
                for &i in &proven {
                    th.push_preds(game, i, &mut queue, &mut queued);
                }
                continue;
            }
            if th.cap >= max_cap {
                break;
            }
            th.cap = (th.cap * 2).min(max_cap);
            for i in truncated {
                if !queued[i] {
                    queued[i] = true;
                    queue.push_back(i);
                }
            }
        }
        th
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Operator applications performed.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Lower bound for pair index `x` at Spoiler counter `n`, clamped into the computed range.
    /// Values above the cap are reported as `cap + 1`; proven ω as [`OMEGA`].
    pub fn get(&self, x: usize, n: u64) -> u64 {
        self.vals[self.pos(x, n.min(self.n_max))]
    }

    pub fn is_proven_omega(&self, x: usize, n: u64) -> bool {
        self.get(x, n) == OMEGA
    }

    fn pos(&self, x: usize, n: u64) -> usize {
        x * (self.n_max as usize + 1) + n as usize
    }

    fn split(&self, i: usize) -> (usize, u64) {
        let w = self.n_max as usize + 1;
        (i / w, (i % w) as u64)
    }

    fn iterate(&mut self, game: &Game, queue: &mut VecDeque<usize>, queued: &mut [bool]) {
        while let Some(i) = queue.pop_front() {
            queued[i] = false;
            let (x, n) = self.split(i);
            let v = self.phi(game, x, n);
            self.rounds += 1;
            if v > self.vals[i] {
                self.vals[i] = v;
                self.push_preds(game, i, queue, queued);
            }
        }
    }

    fn push_preds(&self, game: &Game, i: usize, queue: &mut VecDeque<usize>, queued: &mut [bool]) {
        let (y, m) = self.split(i);
        for &(x, d) in &game.preds[y] {
            for n in self.sources(m, d) {
                let j = self.pos(x, n);
                if !queued[j] {
                    queued[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }

    /// Spoiler counters `n` whose move with effect `d` lands on truncated counter `m`.
    fn sources(&self, m: u64, d: i64) -> impl Iterator<Item = u64> {
        let big = self.n_max as i128;
        let m = m as i128;
        let (lo, hi) = if m < big { (m - d as i128, m - d as i128) } else { (big - d as i128, big) };
        let lo = lo.max(0);
        let hi = hi.min(big);
        (lo..=hi).filter(|&n| n >= 0).map(|n| n as u64)
    }

    /// Best Spoiler move value at `(x, n)`: the requirement it imposes, capped.
    fn phi(&self, game: &Game, x: usize, n: u64) -> u64 {
        let mut best = 0u64;
        for mv in &game.moves[x] {
            let Some(v) = self.move_value(mv, n) else { continue };
            best = best.max(v);
            if best == OMEGA {
                return OMEGA;
            }
        }
        best.min(self.cap + 1)
    }

    /// `None` if the move is disabled at `n`.
    fn move_value(&self, mv: &Move, n: u64) -> Option<u64> {
        let m = n as i128 + mv.d as i128;
        if m < 0 {
            return None;
        }
        let m = (m as u64).min(self.n_max);
        let mut low = OMEGA;
        for &(y, d2) in &mv.replies {
            low = low.min(required(self.vals[self.pos(y, m)], d2));
        }
        Some(low)
    }

    /// Proves as many candidate positions ω as possible; returns those proven.
    fn prove_omega(&self, game: &Game, candidates: &[usize]) -> Vec<usize> {
        let inside: HashMap<usize, usize> = candidates.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let order: Vec<usize> = candidates.to_vec();
        // Shrink to a set closed under some Spoiler move whose replies all stay inside.
        let mut strategy: Vec<Option<usize>> = vec![None; order.len()];
        loop {
            let mut changed = false;
            for (k, &i) in order.iter().enumerate() {
                if strategy[k] == Some(usize::MAX) {
                    continue;
                }
                let (x, n) = self.split(i);
                let mut pick = None;
                let mut pick_val = 0;
                for (mi, mv) in game.moves[x].iter().enumerate() {
                    let Some(val) = self.move_value(mv, n) else { continue };
                    let m = (n as i128 + mv.d as i128) as u64;
                    let m = m.min(self.n_max);
                    let closed = mv.replies.iter().all(|&(y, _)| {
                        let j = self.pos(y, m);
                        self.vals[j] == OMEGA || inside.get(&j).is_some_and(|&kk| strategy[kk] != Some(usize::MAX))
                    });
                    if closed && (pick.is_none() || val > pick_val) {
                        pick = Some(mi);
                        pick_val = val;
                    }
                }
                match pick {
                    Some(mi) => strategy[k] = Some(mi),
                    None => {
                        strategy[k] = Some(usize::MAX);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let alive: Vec<usize> = (0..order.len()).filter(|&k| strategy[k] != Some(usize::MAX)).collect();
        let mut local = vec![usize::MAX; order.len()];
        for (li, &k) in alive.iter().enumerate() {
            local[k] = li;
        }
        // Strategy graph over the surviving candidates, weighted by Duplicator effects.
        let mut edges: Vec<Vec<(usize, i64)>> = vec![Vec::new(); alive.len()];
        for (li, &k) in alive.iter().enumerate() {
            let (x, n) = self.split(order[k]);
            let mv = &game.moves[x][strategy[k].expect("alive")];
            let m = ((n as i128 + mv.d as i128) as u64).min(self.n_max);
            for &(y, d2) in &mv.replies {
                let j = self.pos(y, m);
                if self.vals[j] == OMEGA {
                    continue;
                }
                edges[li].push((local[inside[&j]], d2));
            }
        }
        let bad = nonnegative_cycle_reach(&edges);
        alive.iter().enumerate().filter(|(li, _)| !bad[*li]).map(|(_, &k)| order[k]).collect()
    }
}

/// Marks the nodes that can reach a cycle of non-negative total weight.
pub fn nonnegative_cycle_reach(edges: &[Vec<(usize, i64)>]) -> Vec<bool> {
    let n = edges.len();
    let comp = scc(edges);
    let ncomp = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    let mut bad = vec![false; n];
    for nodes in &members {
        if component_has_nonnegative_cycle(edges, &comp, nodes) {
            for &v in nodes {
                bad[v] = true;
            }
        }
    }
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, es) in edges.iter().enumerate() {
        for &(w, _) in es {
            rev[w].push(v);
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| bad[v]).collect();
    while let Some(w) = stack.pop() {
        for &v in &rev[w] {
            if !bad[v] {
                bad[v] = true;
                stack.push(v);
            }
        }
    }
    bad
}

fn component_has_nonnegative_cycle(edges: &[Vec<(usize, i64)>], comp: &[usize], nodes: &[usize]) -> bool {
    let c = comp[nodes[0]];
    let internal = |v: usize| edges[v].iter().filter(move |&&(w, _)| comp[w] == c);
    if nodes.len() == 1 && internal(nodes[0]).next().is_none() {
        return false;
    }
    // Longest-path potentials; still relaxing after |nodes| passes means a positive cycle.
    let mut pot: HashMap<usize, i64> = nodes.iter().map(|&v| (v, 0)).collect();
    let mut settled = false;
    for _ in 0..=nodes.len() {
        let mut changed = false;
        for &v in nodes {
            let pv = pot[&v];
            for &(w, wt) in internal(v) {
                if pv + wt > pot[&w] {
                    pot.insert(w, pv + wt);
                    changed = true;
                }
            }
        }
        if !changed {
            settled = true;
            break;
        }
    }
    if !settled {
        return true;
    }
    // With settled potentials a zero-weight cycle consists of tight edges only.
    let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let tight: Vec<Vec<(usize, i64)>> = nodes
        .iter()
        .map(|&v| internal(v).filter(|&&(w, wt)| pot[&v] + wt == pot[&w]).map(|&(w, _)| (local[&w], 0)).collect())
        .collect();
    let tc = scc(&tight);
    let mut size = vec![0usize; nodes.len()];
    for &x in &tc {
        size[x] += 1;
    }
    tight.iter().enumerate().any(|(v, es)| es.iter().any(|&(w, _)| w == v) || size[tc[v]] > 1)
}

/// Strongly connected components, numbered in reverse topological order.
fn scc(edges: &[Vec<(usize, i64)>]) -> Vec<usize> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < edges[v].len() {
                let w = edges[v][*ei].0;
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("scc stack");
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}
