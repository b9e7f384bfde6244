//! Reduction of weak simulation between plain nets to strong simulation
//! between a plain Spoiler net and a Duplicator ω-net.
//!
//! The reduction runs in two steps. [`build_guarded_omega`] turns every weak
//! step of the Duplicator net into a single guarded transition, with ω effects
//! wherever a silent pumping cycle can be visited. [`normalize_effects`] then
//! spreads each round over `k` rounds so that guards can be tested and large
//! effects applied one unit at a time, marking the extra rounds with `$b`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::net::{Effect, Net, NetError, NetKind, StateId, Transition, TAU};
use crate::normal::unify_alphabets;

/// Largest net the silent path enumeration accepts by default.
pub const STATE_LIMIT: usize = 12;
/// Action of the padding rounds.
pub const PAD: &str = "$b";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeakError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("net `{name}` has {states} states, more than the limit of {limit}")]
    TooLarge { name: String, states: usize, limit: usize },
}

/// A path summary: `(guard, effect)`.
pub type Summary = (u64, i64);

fn concat(x: Summary, y: Summary) -> Summary {
    let g = (x.0 as i64).max(y.0 as i64 - x.1);
    (g as u64, x.1 + y.1)
}

fn step(d: i64) -> Summary {
    ((-d).max(0) as u64, d)
}

/// Direct paths between two states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SilentPathSummary {
    pub source: StateId,
    pub target: StateId,
    /// Summaries of all acyclic paths.
    pub direct: BTreeSet<Summary>,
    /// Summaries of the silent acyclic paths, the empty path included when source = target.
    pub silent: BTreeSet<Summary>,
    /// Silent positive simple cycles reachable by a silent direct path from the source:
    /// the cycle's state and the guard of entering and completing it once.
    pub pumps: Vec<(StateId, u64)>,
}

/// Silent direct paths and positive silent simple cycles of a whole net.
struct SilentPaths {
    sd: Vec<Vec<BTreeSet<Summary>>>,
    direct: Vec<Vec<BTreeSet<Summary>>>,
    cycles: Vec<BTreeSet<Summary>>,
}

impl SilentPaths {
    fn new(net: &Net) -> SilentPaths {
        let n = net.num_states();
        let tau = net.tau();
        let mut sp = SilentPaths {
            sd: vec![vec![BTreeSet::new(); n]; n],
            direct: vec![vec![BTreeSet::new(); n]; n],
            cycles: vec![BTreeSet::new(); n],
        };
        for s in 0..n {
            let mut on_path = vec![false; n];
            on_path[s] = true;
            sp.walk(net, tau, s, s, (0, 0), true, &mut on_path);
        }
        sp
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(&mut self, net: &Net, tau: Option<usize>, s: StateId, at: StateId, acc: Summary, silent: bool, on_path: &mut [bool]) {
        self.direct[s][at].insert(acc);
        if silent {
            self.sd[s][at].insert(acc);
        }
        for &ti in net.outgoing(at) {
            let t = net.transition(ti);
            let d = t.effect.finite().expect("plain net");
            let next = concat(acc, step(d));
            let silent = silent && Some(t.label) == tau;
            if t.dst == s {
                if silent && next.1 > 0 {
                    self.cycles[s].insert(next);
                }
                continue;
            }
            if on_path[t.dst] {
                continue;
            }
            on_path[t.dst] = true;
            self.walk(net, tau, s, t.dst, next, silent, on_path);
            on_path[t.dst] = false;
        }
    }

    /// Least guard of a silent direct path from `s` into `t` followed by a positive cycle at `t`.
    fn pump_guard(&self, s: StateId, t: StateId) -> Option<u64> {
        self.sd[s][t].iter().flat_map(|&x| self.cycles[t].iter().map(move |&c| concat(x, c).0)).min()
    }
}

fn check_plain(net: &Net, limit: usize) -> Result<(), WeakError> {
    if net.kind() != NetKind::Ocn {
        return Err(NetError::NotPlain(net.name().to_string()).into());
    }
    if net.num_states() > limit {
        return Err(WeakError::TooLarge { name: net.name().to_string(), states: net.num_states(), limit });
    }
    Ok(())
}

/// Direct and silent direct paths from `s` to `t`.
pub fn silent_direct_paths(net: &Net, s: StateId, t: StateId) -> Result<SilentPathSummary, WeakError> {
    check_plain(net, STATE_LIMIT)?;
    for x in [s, t] {
        if x >= net.num_states() {
            return Err(NetError::StateOutOfRange(x).into());
        }
    }
    let sp = SilentPaths::new(net);
    let pumps = (0..net.num_states()).filter_map(|u| sp.pump_guard(s, u).map(|g| (u, g))).collect();
    Ok(SilentPathSummary { source: s, target: t, direct: sp.direct[s][t].clone(), silent: sp.sd[s][t].clone(), pumps })
}

/// Candidate transitions of one `(p, a, q)` triple.
#[derive(Default)]
struct Options {
    finite: BTreeSet<Summary>,
    omega: Option<u64>,
}

impl Options {
    fn add_omega(&mut self, g: u64) {
        self.omega = Some(self.omega.map_or(g, |h| h.min(g)));
    }

    /// Options not dominated by a smaller guard with a larger effect.
    fn pareto(&self) -> (Vec<Summary>, Option<u64>) {
        let fin = self
            .finite
            .iter()
            .copied()
            .filter(|&(g, d)| {
                self.omega.is_none_or(|w| w > g) && !self.finite.iter().any(|&(g2, d2)| (g2, d2) != (g, d) && g2 <= g && d2 >= d)
            })
            .collect();
        (fin, self.omega)
    }
}

/// The guarded ω-net whose strong steps stand for the weak steps of `net`.
///
/// Among the transitions of one `(p, a, q)` triple only those not dominated by
/// a smaller guard together with a larger effect are kept; ω counts as the
/// largest effect. If `tau` is an action, every state also gets a silent stay
/// `(p, tau, 0, 0, p)` for answering a silent move with no move at all.
pub fn build_guarded_omega(net: &Net) -> Result<Net, WeakError> {
    build_guarded_omega_with_limit(net, STATE_LIMIT)
}

pub fn build_guarded_omega_with_limit(net: &Net, limit: usize) -> Result<Net, WeakError> {
    check_plain(net, limit)?;
    let n = net.num_states();
    let sp = SilentPaths::new(net);
    let mut opts: BTreeMap<(StateId, usize, StateId), Options> = BTreeMap::new();
    // Least guard of reaching `s` silently from `p` through a pump.
    let pre_pump: Vec<Vec<Option<u64>>> = (0..n)
        .map(|p| (0..n).map(|s| (0..n).filter(|&t| !sp.sd[t][s].is_empty()).filter_map(|t| sp.pump_guard(p, t)).min()).collect())
        .collect();
    for tr in net.transitions() {
        let (s, s2) = (tr.src, tr.dst);
        let mid = step(tr.effect.finite().expect("plain net"));
        for p in 0..n {
            for q in 0..n {
                if sp.sd[s2][q].is_empty() {
                    continue;
                }
                let o = opts.entry((p, tr.label, q)).or_default();
                for &x in &sp.sd[p][s] {
                    let head = concat(x, mid);
                    for &y in &sp.sd[s2][q] {
                        o.finite.insert(concat(head, y));
                    }
                    // A pump after the visible step.
                    for t in 0..n {
                        if sp.sd[t][q].is_empty() {
                            continue;
                        }
                        if let Some(g) = sp.sd[s2][t].iter().flat_map(|&y| sp.cycles[t].iter().map(move |&c| concat(concat(head, y), c).0)).min() {
                            o.add_omega(g);
                        }
                    }
                }
                // A pump before it.
                if let Some(g) = pre_pump[p][s] {
                    o.add_omega(g);
                }
                if o.finite.is_empty() && o.omega.is_none() {
                    opts.remove(&(p, tr.label, q));
                }
            }
        }
    }
    if let Some(tau) = net.tau() {
        for p in 0..n {
            opts.entry((p, tau, p)).or_default().finite.insert((0, 0));
        }
    }
    let mut g = Net::new(format!("{}+g", net.name()), NetKind::GuardedOmega);
    for s in net.states() {
        g.intern_state(s);
    }
    for a in net.actions() {
        g.intern_action(a);
    }
    for (&(p, a, q), o) in &opts {
        let (fin, omega) = o.pareto();
        for (guard, d) in fin {
            g.add_transition(Transition { src: p, label: a, guard, effect: Effect::Fin(d), dst: q })?;
        }
        if let Some(guard) = omega {
            g.add_transition(Transition { src: p, label: a, guard, effect: Effect::Omega, dst: q })?;
        }
    }
    Ok(g)
}

/// Maximal guard, maximal absolute finite effect and the resulting round count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExpansionParams {
    pub gamma_max: u64,
    pub delta_max: u64,
    /// Largest guard of an ω-transition, if any.
    pub omega_gamma_max: Option<u64>,
    pub k: u64,
}

impl ExpansionParams {
    pub fn of(g: &Net) -> ExpansionParams {
        let gamma_max = g.transitions().iter().map(|t| t.guard).max().unwrap_or(0);
        let delta_max = g.transitions().iter().filter_map(|t| t.effect.finite()).map(|d| d.unsigned_abs()).max().unwrap_or(0);
        let omega_gamma_max = g.transitions().iter().filter(|t| t.effect.is_omega()).map(|t| t.guard).max();
        let k = (2 * gamma_max + delta_max + 1).max(omega_gamma_max.map_or(0, |w| 2 * w + 2));
        ExpansionParams { gamma_max, delta_max, omega_gamma_max, k }
    }
}

fn reserved(net: &Net) -> Result<(), NetError> {
    match net.states().iter().chain(net.actions()).find(|s| s.contains('$')) {
        Some(s) => Err(NetError::Reserved(s.clone())),
        None => Ok(()),
    }
}

fn pad_effects(guard: u64, effect: Effect, k: u64) -> Vec<Effect> {
    let rounds = (k - 1) as usize;
    let mut out = vec![Effect::Fin(0); rounds];
    let g = guard as usize;
    for e in out.iter_mut().take(g) {
        *e = Effect::Fin(-1);
    }
    for e in out.iter_mut().skip(g).take(g) {
        *e = Effect::Fin(1);
    }
    match effect {
        Effect::Fin(d) => {
            for e in out.iter_mut().skip(2 * g).take(d.unsigned_abs() as usize) {
                *e = Effect::Fin(d.signum());
            }
        }
        Effect::Omega => out[rounds - 1] = Effect::Omega,
    }
    out
}

/// Spreads every round of `spoiler` against the guarded net `guarded` over `k` rounds.
///
/// Spoiler's step `p --a,d--> q` becomes `a` followed by `k - 1` zero `$b` steps.
/// Duplicator's transition `(p, a, g, d, q)` becomes a zero `a` step into a private
/// chain of `k - 1` `$b` steps: `g` decrements and `g` increments test the guard,
/// then `|d|` unit steps apply the effect, or the last step is ω. Original states
/// keep their ids in both results.
pub fn normalize_effects(spoiler: &Net, guarded: &Net) -> Result<(Net, Net, ExpansionParams), WeakError> {
    if spoiler.kind() != NetKind::Ocn {
        return Err(NetError::NotPlain(spoiler.name().to_string()).into());
    }
    reserved(spoiler)?;
    reserved(guarded)?;
    let (spoiler, guarded) = unify_alphabets(spoiler, guarded);
    let params = ExpansionParams::of(&guarded);
    let k = params.k;
    let mut m = Net::new(format!("{}+m", spoiler.name()), NetKind::Ocn);
    for s in spoiler.states() {
        m.intern_state(s);
    }
    for a in spoiler.actions() {
        m.intern_action(a);
    }
    let b = m.intern_action(PAD);
    let originals = spoiler.num_states();
    if k > 1 {
        for p in 0..originals {
            let name = spoiler.state_name(p).to_string();
            for i in 1..k {
                m.intern_state(&format!("{name}$b{i}"));
            }
            for i in (2..k).rev() {
                m.connect(&format!("{name}$b{i}"), PAD, Effect::Fin(0), &format!("{name}$b{}", i - 1))?;
            }
            m.add_transition(Transition { src: m.require_state(&format!("{name}$b1"))?, label: b, guard: 0, effect: Effect::Fin(0), dst: p })?;
        }
    }
    for t in spoiler.transitions() {
        let dst = if k > 1 { m.require_state(&format!("{}$b{}", spoiler.state_name(t.dst), k - 1))? } else { t.dst };
        m.add_transition(Transition { dst, ..*t })?;
    }

    let mut m2 = Net::new(format!("{}+m", guarded.name()), NetKind::Omega);
    for s in guarded.states() {
        m2.intern_state(s);
    }
    for a in guarded.actions() {
        m2.intern_action(a);
    }
    let b2 = m2.intern_action(PAD);
    for (j, t) in guarded.transitions().iter().enumerate() {
        if k == 1 {
            m2.add_transition(Transition { guard: 0, ..*t })?;
            continue;
        }
        let chain: Vec<StateId> = (1..k).map(|i| m2.intern_state(&format!("$t{j}.{i}"))).collect();
        m2.add_transition(Transition { src: t.src, label: t.label, guard: 0, effect: Effect::Fin(0), dst: chain[0] })?;
        for (i, e) in pad_effects(t.guard, t.effect, k).into_iter().enumerate() {
            let dst = chain.get(i + 1).copied().unwrap_or(t.dst);
            m2.add_transition(Transition { src: chain[i], label: b2, guard: 0, effect: e, dst })?;
        }
    }
    Ok((m, m2, params))
}

/// The full reduction with all intermediate results.
#[derive(Debug, Clone)]
pub struct WeakReduction {
    pub guarded: Net,
    pub spoiler: Net,
    pub dup: Net,
    pub params: ExpansionParams,
}

/// Weak simulation between `lhs` and `rhs` as strong simulation between the two results.
pub fn reduce_weak(lhs: &Net, rhs: &Net) -> Result<WeakReduction, WeakError> {
    for n in [lhs, rhs] {
        if n.kind() != NetKind::Ocn {
            return Err(NetError::NotPlain(n.name().to_string()).into());
        }
        reserved(n)?;
    }
    let (l, r) = unify_alphabets(lhs, rhs);
    let guarded = build_guarded_omega(&r)?;
    let (spoiler, dup, params) = normalize_effects(&l, &guarded)?;
    Ok(WeakReduction { guarded, spoiler, dup, params })
}

/// True if a `tau` action exists in `net`.
pub fn has_tau(net: &Net) -> bool {
    net.action_id(TAU).is_some()
}
