//! Ultimately periodic threshold staircases and the certificate checker.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::net::{Effect, Ext, Net, Pair};
use crate::normal::unify_alphabets;

/// Longest period looked for when extrapolating.
pub const MAX_PERIOD: u64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Tail {
    /// Every row past the prefix is empty.
    Omega,
    /// `g(n) = g(n - p) + rise` past the prefix.
    Periodic { p: u64, rise: u64 },
}

/// Row thresholds `g(n)`: the row of Spoiler counter `n` holds every Duplicator counter `≥ g(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Staircase {
    pub prefix: Vec<Ext>,
    pub tail: Tail,
}

impl Staircase {
    pub fn at(&self, n: u64) -> Ext {
        let len = self.prefix.len() as u64;
        if n < len {
            return self.prefix[n as usize];
        }
        match self.tail {
            Tail::Omega => Ext::Omega,
            Tail::Periodic { p, rise } => {
                let k = (n - len) / p + 1;
                let base = self.prefix[(n - k * p) as usize];
                match base {
                    Ext::Fin(v) => Ext::Fin(v + k * rise),
                    Ext::Omega => Ext::Omega,
                }
            }
        }
    }

    pub fn contains(&self, n: u64, n2: u64) -> bool {
        self.at(n) <= Ext::Fin(n2)
    }

    pub fn period(&self) -> Option<(u64, u64)> {
        match self.tail {
            Tail::Periodic { p, rise } => Some((p, rise)),
            Tail::Omega => None,
        }
    }

    /// True when no row is empty.
    pub fn is_total(&self) -> bool {
        matches!(self.tail, Tail::Periodic { .. }) && self.prefix.iter().all(|v| !v.is_omega())
    }

    /// The minimal points `(n, g(n))` of the explicit prefix.
    pub fn prefix_points(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.prefix.iter().enumerate().filter_map(|(n, v)| v.finite().map(|v| (n as u64, v)))
    }

    /// Writes rows out explicitly until row `n` no longer seeds the periodic tail.
    pub fn unroll_past(&mut self, n: u64) {
        if let Tail::Periodic { p, .. } = self.tail {
            while (self.prefix.len() as u64) < n + p + 1 {
                let v = self.at(self.prefix.len() as u64);
                self.prefix.push(v);
            }
        }
    }

    /// Drops trailing prefix entries that the periodic tail already produces.
    pub fn compact(&mut self) {
        if let Tail::Periodic { p, rise } = self.tail {
            let p = p as usize;
            while self.prefix.len() > p {
                let n = self.prefix.len();
                match (self.prefix[n - 1 - p], self.prefix[n - 1]) {
                    (Ext::Fin(a), Ext::Fin(b)) if a + rise == b => {
                        self.prefix.pop();
                    }
                    _ => break,
                }
            }
        }
    }

    fn well_formed(&self) -> bool {
        match self.tail {
            Tail::Omega => true,
            Tail::Periodic { p, .. } => p >= 1 && p as usize <= self.prefix.len(),
        }
    }
}

/// Finds an ultimately periodic staircase agreeing with `values` on all of it.
/// Needs at least two full periods of evidence; falls back to an ω tail past the data.
pub fn extrapolate(values: &[Ext]) -> Staircase {
    if let Some(first) = values.iter().position(|v| v.is_omega()) {
        if values[first..].iter().all(|v| v.is_omega()) {
            return Staircase { prefix: values[..first].to_vec(), tail: Tail::Omega };
        }
    }
    let len = values.len() as u64;
    let mut best: Option<(u64, u64, u64)> = None;
    for p in 1..=MAX_PERIOD {
        if 3 * p > len {
            break;
        }
        let diff = |n: u64| -> Option<i128> {
            match (values[(n + p) as usize], values[n as usize]) {
                (Ext::Fin(a), Ext::Fin(b)) => Some(a as i128 - b as i128),
                (Ext::Omega, Ext::Omega) => Some(0),
                _ => None,
            }
        };
        let last = len - 1 - p;
        let Some(target) = diff(last) else { continue };
        if target < 0 {
            continue;
        }
        let mut start = last;
        while start > 0 && diff(start - 1) == Some(target) {
            start -= 1;
        }
        if last + 1 - start < 2 * p {
            continue;
        }
        if best.is_none_or(|(s, _, _)| start < s) {
            best = Some((start, p, target as u64));
        }
    }
    match best {
        Some((start, p, rise)) => Staircase { prefix: values[..(start + p) as usize].to_vec(), tail: Tail::Periodic { p, rise } },
        None => Staircase { prefix: values.to_vec(), tail: Tail::Omega },
    }
}

/// A relation given by one staircase per state pair; pairs without one are empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateSet {
    #[serde(serialize_with = "rows_as_list")]
    pub rows: BTreeMap<Pair, Staircase>,
    /// A configuration pair the relation must contain.
    pub query: Option<(Pair, u64, u64)>,
}

#[derive(Serialize)]
struct Row<'a> {
    pair: Pair,
    staircase: &'a Staircase,
}

fn rows_as_list<S: Serializer>(rows: &BTreeMap<Pair, Staircase>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(rows.iter().map(|(&pair, staircase)| Row { pair, staircase }))
}

impl CertificateSet {
    pub fn contains(&self, pair: Pair, n: u64, n2: u64) -> bool {
        self.rows.get(&pair).is_some_and(|s| s.contains(n, n2))
    }

    pub fn at(&self, pair: Pair, n: u64) -> Ext {
        self.rows.get(&pair).map_or(Ext::Omega, |s| s.at(n))
    }

    /// Every explicit minimal point `(pair, n, g(n))`.
    pub fn points(&self) -> Vec<(Pair, u64, u64)> {
        self.rows.iter().flat_map(|(&p, s)| s.prefix_points().map(move |(n, v)| (p, n, v))).collect()
    }

    /// The same relation with one minimal point removed, so the row starts one higher.
    pub fn without_point(&self, pair: Pair, n: u64) -> CertificateSet {
        let mut out = self.clone();
        if let Some(s) = out.rows.get_mut(&pair) {
            s.unroll_past(n);
            if let Some(Ext::Fin(v)) = s.prefix.get(n as usize).copied() {
                s.prefix[n as usize] = Ext::Fin(v + 1);
            }
        }
        out
    }
}

/// Raises per row tried by [`minimize`].
const RAISE_LIMIT: usize = 64;
const MAX_PASSES: usize = 16;

/// Shrinks a checked relation while it keeps checking: rows are dropped whole or lose
/// their tail where possible, then every explicit row is emptied or raised one step at a
/// time, until nothing changes. Afterwards removing any single explicit point breaks the
/// check, up to the raise and pass limits.
pub fn minimize(set: &CertificateSet, spoiler: &Net, dup: &Net) -> CertificateSet {
    let ok = |c: &CertificateSet| check_yes_certificate(c, spoiler, dup).is_ok();
    let mut cur = set.clone();
    if !ok(&cur) {
        return cur;
    }
    for _ in 0..MAX_PASSES {
        let before = cur.clone();
        for s in cur.rows.values_mut() {
            s.compact();
        }
        let pairs: Vec<Pair> = cur.rows.keys().copied().collect();
        for pair in pairs {
            let mut c = cur.clone();
            c.rows.remove(&pair);
            if ok(&c) {
                cur = c;
                continue;
            }
            let mut c = cur.clone();
            c.rows.get_mut(&pair).expect("row").tail = Tail::Omega;
            if c != cur && ok(&c) {
                cur = c;
            }
        }
        // Periodic tails usually lean on each other, so they move up together first.
        for _ in 0..RAISE_LIMIT {
            let mut c = cur.clone();
            for s in c.rows.values_mut() {
                if let Some((p, _)) = s.period() {
                    let len = s.prefix.len();
                    for v in &mut s.prefix[len - p as usize..] {
                        if let Ext::Fin(x) = v {
                            *x += 1;
                        }
                    }
                }
            }
            if c == cur || !ok(&c) {
                break;
            }
            cur = c;
        }
        for (pair, n, _) in cur.points() {
            // Seeds of a periodic tail are first raised in place, which moves the whole tail.
            let seeds = cur.rows[&pair].period().map_or(usize::MAX, |(p, _)| cur.rows[&pair].prefix.len() - p as usize);
            if n as usize >= seeds {
                for _ in 0..RAISE_LIMIT {
                    let mut c = cur.clone();
                    let v = &mut c.rows.get_mut(&pair).expect("row").prefix[n as usize];
                    let Ext::Fin(x) = *v else { break };
                    *v = Ext::Fin(x + 1);
                    if !ok(&c) {
                        break;
                    }
                    cur = c;
                }
            }
            let mut c = cur.clone();
            if let Some(s) = c.rows.get_mut(&pair) {
                s.unroll_past(n);
                s.prefix[n as usize] = Ext::Omega;
            }
            if ok(&c) {
                cur = c;
                continue;
            }
            for _ in 0..RAISE_LIMIT {
                let c = cur.without_point(pair, n);
                if !ok(&c) {
                    break;
                }
                cur = c;
            }
        }
        if cur == before {
            break;
        }
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckFailure {
    #[error("malformed staircase for pair {0:?}")]
    Malformed(Pair),
    #[error("query point is not in the relation")]
    MissingQuery,
    #[error("pair {pair:?} at ({n}, {n2}): no reply to Spoiler's {action} move")]
    Unmatched { pair: Pair, n: u64, n2: u64, action: String },
}

struct Checker<'a> {
    spoiler: Net,
    dup: Net,
    set: &'a CertificateSet,
}

/// Verifies that `set` is a simulation relation for the Spoiler net `spoiler` and
/// Duplicator net `dup`, and that it contains the query if one is given.
///
/// Rows below `M`, one past the longest prefix, are checked point by point. Above
/// `M` every row is periodic, so one window of `lcm` of the periods involved is
/// enough, provided each chosen reply does not lose ground against the slope of its
/// successor row.
pub fn check_yes_certificate(set: &CertificateSet, spoiler: &Net, dup: &Net) -> Result<(), CheckFailure> {
    let (spoiler, dup) = unify_alphabets(spoiler, dup);
    for (&pair, s) in &set.rows {
        if !s.well_formed() || pair.0 >= spoiler.num_states() || pair.1 >= dup.num_states() {
            return Err(CheckFailure::Malformed(pair));
        }
    }
    if let Some((pair, n, n2)) = set.query {
        if !set.contains(pair, n, n2) {
            return Err(CheckFailure::MissingQuery);
        }
    }
    let ck = Checker { spoiler, dup, set };
    let max_drop = ck.spoiler.transitions().iter().filter_map(|t| t.effect.finite()).map(|d| (-d).max(0) as u64).max().unwrap_or(0);
    let m = set.rows.values().map(|s| s.prefix.len() as u64).max().unwrap_or(0) + max_drop + 1;
    for (&pair, s) in &set.rows {
        for n in 0..m {
            ck.check_point(pair, n, None)?;
        }
        if let Some((p, rise)) = s.period() {
            let mut l = p;
            for &ti in ck.spoiler.outgoing(pair.0) {
                let t = ck.spoiler.transition(ti);
                for &ri in ck.dup.outgoing(pair.1) {
                    let r = ck.dup.transition(ri);
                    if r.label == t.label {
                        if let Some((q, _)) = set.rows.get(&(t.dst, r.dst)).and_then(|s| s.period()) {
                            l = l.lcm(&q);
                        }
                    }
                }
            }
            for n in m..m + l {
                ck.check_point(pair, n, Some((p, rise)))?;
            }
        }
    }
    Ok(())
}

impl Checker<'_> {
    /// One-step condition at the minimal point of row `n`. With `rate`, replies must also
    /// lead to rows that grow no faster than this one.
    fn check_point(&self, pair: Pair, n: u64, rate: Option<(u64, u64)>) -> Result<(), CheckFailure> {
        let Ext::Fin(n2) = self.set.at(pair, n) else { return Ok(()) };
        for &ti in self.spoiler.outgoing(pair.0) {
            let t = self.spoiler.transition(ti);
            let Effect::Fin(d) = t.effect else { return Err(CheckFailure::Malformed(pair)) };
            let m = n as i128 + d as i128;
            if m < 0 || t.guard > n {
                continue;
            }
            let m = m as u64;
            let matched = self.dup.outgoing(pair.1).iter().any(|&ri| {
                let r = self.dup.transition(ri);
                let Effect::Fin(d2) = r.effect else { return false };
                if r.label != t.label || r.guard > n2 {
                    return false;
                }
                let m2 = n2 as i128 + d2 as i128;
                if m2 < 0 {
                    return false;
                }
                let next = (t.dst, r.dst);
                if !self.set.contains(next, m, m2 as u64) {
                    return false;
                }
                match rate {
                    None => true,
                    Some((p, rise)) => match self.set.rows.get(&next).and_then(|s| s.period()) {
                        Some((q, rise2)) => rise as u128 * q as u128 >= rise2 as u128 * p as u128,
                        None => false,
                    },
                }
            });
            if !matched {
                return Err(CheckFailure::Unmatched { pair, n, n2, action: self.spoiler.action_name(t.label).to_string() });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Staircase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.prefix.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", body.join(" "))?;
        match self.tail {
            Tail::Omega => write!(f, " then w"),
            Tail::Periodic { p, rise } => write!(f, " then +{rise} every {p}"),
        }
    }
}
