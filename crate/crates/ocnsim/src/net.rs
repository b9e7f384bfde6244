//! Nets, configurations and paths.
//!
//! States and actions are interned: every engine works on dense integer ids and
//! the symbol tables are only consulted for input and output.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub type StateId = usize;
pub type ActionId = usize;
/// A pair of states, Spoiler's first.
pub type Pair = (StateId, StateId);

/// The silent action used by weak simulation.
pub const TAU: &str = "tau";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("state id {0} out of range")]
    StateOutOfRange(StateId),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("effect {effect} not allowed in a {kind} net")]
    EffectNotAllowed { effect: Effect, kind: NetKind },
    #[error("guard {0} not allowed in a plain net")]
    GuardNotAllowed(u64),
    #[error("reserved symbol `{0}` already in use")]
    Reserved(String),
    #[error("expected a plain one-counter net, got `{0}`")]
    NotPlain(String),
    #[error("path is not well formed at step {0}")]
    BrokenPath(usize),
    #[error("path is not a lasso")]
    NotALasso,
}

/// A counter effect: an integer or the symbolic increase ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Effect {
    Fin(i64),
    Omega,
}

impl Effect {
    pub fn is_omega(self) -> bool {
        matches!(self, Effect::Omega)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Effect::Fin(d) => Some(d),
            Effect::Omega => None,
        }
    }

    /// Sum saturating at ω.
    pub fn plus(self, other: Effect) -> Effect {
        match (self, other) {
            (Effect::Fin(a), Effect::Fin(b)) => Effect::Fin(a + b),
            _ => Effect::Omega,
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::Fin(d) if *d > 0 => write!(f, "+{d}"),
            Effect::Fin(d) => write!(f, "{d}"),
            Effect::Omega => write!(f, "w"),
        }
    }
}

impl Serialize for Effect {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Effect::Fin(d) => s.serialize_i64(*d),
            Effect::Omega => s.serialize_str("omega"),
        }
    }
}

/// A natural number or ω, ordered with ω on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ext {
    Fin(u64),
    Omega,
}

impl Ext {
    pub fn is_omega(self) -> bool {
        matches!(self, Ext::Omega)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Ext::Fin(n) => Some(n),
            Ext::Omega => None,
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(n) => write!(f, "{n}"),
            Ext::Omega => write!(f, "w"),
        }
    }
}

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ext::Fin(n) => s.serialize_u64(*n),
            Ext::Omega => s.serialize_str("omega"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetKind {
    Ocn,
    Omega,
    GuardedOmega,
}

impl fmt::Display for NetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NetKind::Ocn => "ocn",
            NetKind::Omega => "omega",
            NetKind::GuardedOmega => "guarded-omega",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: StateId,
    pub label: ActionId,
    pub guard: u64,
    pub effect: Effect,
    pub dst: StateId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Config {
    pub state: StateId,
    pub counter: u64,
}

impl Config {
    pub fn new(state: StateId, counter: u64) -> Self {
        Config { state, counter }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    name: String,
    kind: NetKind,
    states: Vec<String>,
    actions: Vec<String>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

impl Net {
    pub fn new(name: impl Into<String>, kind: NetKind) -> Self {
        Net {
            name: name.into(),
            kind,
            states: Vec::new(),
            actions: Vec::new(),
            transitions: Vec::new(),
            outgoing: Vec::new(),
        }
    }

    /// Builds a plain net from `(src, action, delta, dst)` rows.
    pub fn ocn(name: &str, rows: &[(&str, &str, i64, &str)]) -> Result<Net, NetError> {
        let mut net = Net::new(name, NetKind::Ocn);
        for &(p, a, d, q) in rows {
            let (p, q) = (net.intern_state(p), net.intern_state(q));
            let a = net.intern_action(a);
            net.add_transition(Transition { src: p, label: a, guard: 0, effect: Effect::Fin(d), dst: q })?;
        }
        Ok(net)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn kind(&self) -> NetKind {
        self.kind
    }

    pub fn set_kind(&mut self, kind: NetKind) -> Result<(), NetError> {
        for t in &self.transitions {
            check_transition(kind, t)?;
        }
        self.kind = kind;
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, idx: usize) -> &Transition {
        &self.transitions[idx]
    }

    /// Indices of the transitions leaving `state`.
    pub fn outgoing(&self, state: StateId) -> &[usize] {
        &self.outgoing[state]
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id]
    }

    pub fn action_name(&self, id: ActionId) -> &str {
        &self.actions[id]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|s| s == name)
    }

    pub fn tau(&self) -> Option<ActionId> {
        self.action_id(TAU)
    }

    pub fn require_state(&self, name: &str) -> Result<StateId, NetError> {
        self.state_id(name).ok_or_else(|| NetError::UnknownState(name.to_string()))
    }

    pub fn has_omega(&self) -> bool {
        self.transitions.iter().any(|t| t.effect.is_omega())
    }

    /// Returns the id of `name`, adding the state if it is new.
    pub fn intern_state(&mut self, name: &str) -> StateId {
        match self.state_id(name) {
            Some(id) => id,
            None => {
                self.states.push(name.to_string());
                self.outgoing.push(Vec::new());
                self.states.len() - 1
            }
        }
    }

    /// Adds a state that must not exist yet.
    pub fn add_state(&mut self, name: &str) -> Result<StateId, NetError> {
        if self.state_id(name).is_some() {
            return Err(NetError::DuplicateState(name.to_string()));
        }
        Ok(self.intern_state(name))
    }

    pub fn intern_action(&mut self, name: &str) -> ActionId {
        match self.action_id(name) {
            Some(id) => id,
            None => {
                self.actions.push(name.to_string());
                self.actions.len() - 1
            }
        }
    }

    pub fn add_transition(&mut self, t: Transition) -> Result<usize, NetError> {
        if t.src >= self.states.len() {
            return Err(NetError::StateOutOfRange(t.src));
        }
        if t.dst >= self.states.len() {
            return Err(NetError::StateOutOfRange(t.dst));
        }
        if t.label >= self.actions.len() {
            return Err(NetError::UnknownAction(format!("#{}", t.label)));
        }
        check_transition(self.kind, &t)?;
        self.transitions.push(t);
        self.outgoing[t.src].push(self.transitions.len() - 1);
        Ok(self.transitions.len() - 1)
    }

    /// Adds a guard-free transition between named states, interning as needed.
    pub fn connect(&mut self, src: &str, action: &str, effect: Effect, dst: &str) -> Result<usize, NetError> {
        let (p, q) = (self.intern_state(src), self.intern_state(dst));
        let a = self.intern_action(action);
        self.add_transition(Transition { src: p, label: a, guard: 0, effect, dst: q })
    }

    /// Re-indexes the actions to `alphabet`, which must contain every action of the net.
    pub fn with_alphabet(&self, alphabet: &[String]) -> Result<Net, NetError> {
        let map: Vec<ActionId> = self
            .actions
            .iter()
            .map(|a| alphabet.iter().position(|b| b == a).ok_or_else(|| NetError::UnknownAction(a.clone())))
            .collect::<Result<_, _>>()?;
        let mut out = self.clone();
        out.actions = alphabet.to_vec();
        for t in &mut out.transitions {
            t.label = map[t.label];
        }
        Ok(out)
    }

    /// True if the step relation of `t` can leave counter `m`.
    pub fn fires(&self, t: &Transition, m: u64) -> bool {
        m >= t.guard
            && match t.effect {
                Effect::Fin(d) => m as i128 + d as i128 >= 0,
                Effect::Omega => true,
            }
    }
}

fn check_transition(kind: NetKind, t: &Transition) -> Result<(), NetError> {
    let ok = match (kind, t.effect) {
        (NetKind::Ocn, Effect::Fin(d)) | (NetKind::Omega, Effect::Fin(d)) => (-1..=1).contains(&d),
        (NetKind::Ocn, Effect::Omega) => false,
        (NetKind::Omega, Effect::Omega) | (NetKind::GuardedOmega, _) => true,
    };
    if !ok {
        return Err(NetError::EffectNotAllowed { effect: t.effect, kind });
    }
    if kind != NetKind::GuardedOmega && t.guard != 0 {
        return Err(NetError::GuardNotAllowed(t.guard));
    }
    Ok(())
}

/// Successors of a configuration, with ω-steps enumerated only up to a cap.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepSet {
    pub steps: BTreeSet<(ActionId, Config)>,
    /// `(action, target)` for every ω-transition whose successors continue beyond the cap.
    pub unbounded: Vec<(ActionId, StateId)>,
}

impl StepSet {
    pub fn is_unbounded(&self) -> bool {
        !self.unbounded.is_empty()
    }
}

pub fn enabled_steps(net: &Net, cfg: Config, cap: u64) -> Result<StepSet, NetError> {
    if cfg.state >= net.num_states() {
        return Err(NetError::StateOutOfRange(cfg.state));
    }
    let mut out = StepSet::default();
    for &ti in net.outgoing(cfg.state) {
        let t = net.transition(ti);
        if !net.fires(t, cfg.counter) {
            continue;
        }
        match t.effect {
            Effect::Fin(d) => {
                let n = (cfg.counter as i128 + d as i128) as u64;
                out.steps.insert((t.label, Config::new(t.dst, n)));
            }
            Effect::Omega => {
                for n in cfg.counter.saturating_add(1)..=cap {
                    out.steps.insert((t.label, Config::new(t.dst, n)));
                }
                if !out.unbounded.contains(&(t.label, t.dst)) {
                    out.unbounded.push((t.label, t.dst));
                }
            }
        }
    }
    Ok(out)
}

/// Sum of effects, ω if any effect is ω.
pub fn effect_of(effects: &[Effect]) -> Effect {
    effects.iter().fold(Effect::Fin(0), |acc, &e| acc.plus(e))
}

/// Least counter value that lets the effect sequence run without dropping below zero.
/// Only the prefix before the first ω counts.
pub fn guard_of(effects: &[Effect]) -> u64 {
    let mut sum = 0i64;
    let mut low = 0i64;
    for e in effects {
        match e {
            Effect::Fin(d) => {
                sum += d;
                low = low.min(sum);
            }
            Effect::Omega => break,
        }
    }
    (-low) as u64
}

/// A path given by its start state and the indices of its transitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub start: StateId,
    pub steps: Vec<usize>,
}

impl Path {
    pub fn empty(start: StateId) -> Self {
        Path { start, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self, net: &Net) -> StateId {
        self.steps.last().map_or(self.start, |&t| net.transition(t).dst)
    }

    pub fn check(&self, net: &Net) -> Result<(), NetError> {
        let mut at = self.start;
        for (i, &t) in self.steps.iter().enumerate() {
            let t = net.transitions().get(t).ok_or(NetError::BrokenPath(i))?;
            if t.src != at {
                return Err(NetError::BrokenPath(i));
            }
            at = t.dst;
        }
        Ok(())
    }

    pub fn effects(&self, net: &Net) -> Vec<Effect> {
        self.steps.iter().map(|&t| net.transition(t).effect).collect()
    }

    pub fn labels(&self, net: &Net) -> Vec<ActionId> {
        self.steps.iter().map(|&t| net.transition(t).label).collect()
    }
}

pub fn path_effect(net: &Net, path: &Path) -> Result<Effect, NetError> {
    path.check(net)?;
    Ok(effect_of(&path.effects(net)))
}

pub fn path_guard(net: &Net, path: &Path) -> Result<u64, NetError> {
    path.check(net)?;
    Ok(guard_of(&path.effects(net)))
}
