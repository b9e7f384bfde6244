//! The line-based net file format.
//!
//! ```text
//! # comment
//! net: ex2
//! type: ocn            # ocn | omega | guarded-omega
//! states: p            # optional, fixes the state order
//! alphabet: a tau      # optional, fixes the action order
//! p a -1 p
//! p tau +1 p
//! ```
//!
//! Deltas are `-1`, `0`, `+1` or `w` (ω, omega files only). Guarded ω-nets accept any
//! integer delta and an optional trailing `@g` guard.

use std::fmt::{self, Write};

use ocnsim::net::{Effect, Net, NetError, NetKind, Transition};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown header `{0}`")]
    UnknownHeader(String),
    #[error("header `{0}` given twice")]
    DuplicateHeader(String),
    #[error("header `{0}` after the first transition")]
    LateHeader(String),
    #[error("unknown net type `{0}`")]
    BadKind(String),
    #[error("header `net` takes exactly one name")]
    BadNetName,
    #[error("expected `src action delta dst`, found {0} fields")]
    FieldCount(usize),
    #[error("malformed delta `{0}`")]
    BadDelta(String),
    #[error("delta out of range: `{0}`")]
    DeltaOutOfRange(String),
    #[error("ω delta in a plain net")]
    OmegaInOcn,
    #[error("malformed guard `{0}`")]
    BadGuard(String),
    #[error("guards are only allowed in guarded-omega nets")]
    GuardNotAllowed,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("`{0}` uses the reserved symbol `$`")]
    Reserved(String),
    #[error("`{0}` is not a valid name")]
    BadName(String),
    #[error("`{0}` listed twice")]
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

/// A token and its 1-based column.
type Token<'a> = (usize, &'a str);

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(s, t)| (line[..s].chars().count() + 1, t)).collect()
}

fn check_name(name: &str) -> Result<(), ParseErrorKind> {
    if name.contains('$') {
        return Err(ParseErrorKind::Reserved(name.to_string()));
    }
    if name.is_empty() || name.contains([':', ',', '#', '@', '/']) {
        return Err(ParseErrorKind::BadName(name.to_string()));
    }
    Ok(())
}

fn parse_kind(s: &str) -> Result<NetKind, ParseErrorKind> {
    match s {
        "ocn" => Ok(NetKind::Ocn),
        "omega" => Ok(NetKind::Omega),
        "guarded-omega" => Ok(NetKind::GuardedOmega),
        _ => Err(ParseErrorKind::BadKind(s.to_string())),
    }
}

fn parse_delta(s: &str, kind: NetKind) -> Result<Effect, ParseErrorKind> {
    if s == "w" {
        return match kind {
            NetKind::Ocn => Err(ParseErrorKind::OmegaInOcn),
            _ => Ok(Effect::Omega),
        };
    }
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseErrorKind::BadDelta(s.to_string()));
    }
    let d: i64 = s.parse().map_err(|_| ParseErrorKind::DeltaOutOfRange(s.to_string()))?;
    if kind != NetKind::GuardedOmega && !(-1..=1).contains(&d) {
        return Err(ParseErrorKind::DeltaOutOfRange(s.to_string()));
    }
    Ok(Effect::Fin(d))
}

struct Parser {
    net: Net,
    seen: Vec<&'static str>,
    fixed_states: bool,
    fixed_actions: bool,
    started: bool,
}

impl Parser {
    fn header(&mut self, key: &str, values: &[Token<'_>]) -> Result<(), (usize, ParseErrorKind)> {
        let name: &'static str = match key {
            "net" => "net",
            "type" => "type",
            "states" => "states",
            "alphabet" => "alphabet",
            _ => return Err((1, ParseErrorKind::UnknownHeader(key.to_string()))),
        };
        if self.started {
            return Err((1, ParseErrorKind::LateHeader(name.to_string())));
        }
        if self.seen.contains(&name) {
            return Err((1, ParseErrorKind::DuplicateHeader(name.to_string())));
        }
        self.seen.push(name);
        match name {
            "net" => {
                let [(col, v)] = values else { return Err((1, ParseErrorKind::BadNetName)) };
                check_name(v).map_err(|e| (*col, e))?;
                self.net.set_name(*v);
            }
            "type" => {
                let [(col, v)] = values else { return Err((1, ParseErrorKind::BadKind(String::new()))) };
                let kind = parse_kind(v).map_err(|e| (*col, e))?;
                self.net.set_kind(kind).expect("no transitions yet");
            }
            "states" => {
                for &(col, v) in values {
                    check_name(v).map_err(|e| (col, e))?;
                    self.net.add_state(v).map_err(|_| (col, ParseErrorKind::Duplicate(v.to_string())))?;
                }
                self.fixed_states = true;
            }
            _ => {
                for &(col, v) in values {
                    check_name(v).map_err(|e| (col, e))?;
                    if self.net.action_id(v).is_some() {
                        return Err((col, ParseErrorKind::Duplicate(v.to_string())));
                    }
                    self.net.intern_action(v);
                }
                self.fixed_actions = true;
            }
        }
        Ok(())
    }

    fn state(&mut self, (col, name): Token<'_>) -> Result<usize, (usize, ParseErrorKind)> {
        check_name(name).map_err(|e| (col, e))?;
        match self.net.state_id(name) {
            Some(id) => Ok(id),
            None if self.fixed_states => Err((col, ParseErrorKind::UnknownState(name.to_string()))),
            None => Ok(self.net.intern_state(name)),
        }
    }

    fn transition(&mut self, fields: &[Token<'_>]) -> Result<(), (usize, ParseErrorKind)> {
        self.started = true;
        let (body, guard) = match fields {
            [b @ .., (col, g)] if fields.len() == 5 && g.starts_with('@') => (b, Some((*col, &g[1..]))),
            _ => (fields, None),
        };
        let [src, (acol, action), (dcol, delta), dst] = body else {
            return Err((1, ParseErrorKind::FieldCount(fields.len())));
        };
        let kind = self.net.kind();
        let src = self.state(*src)?;
        check_name(action).map_err(|e| (*acol, e))?;
        let label = match self.net.action_id(action) {
            Some(id) => id,
            None if self.fixed_actions => return Err((*acol, ParseErrorKind::UnknownAction(action.to_string()))),
            None => self.net.intern_action(action),
        };
        let effect = parse_delta(delta, kind).map_err(|e| (*dcol, e))?;
        let dst = self.state(*dst)?;
        let guard = match guard {
            None => 0,
            Some((col, _)) if kind != NetKind::GuardedOmega => return Err((col, ParseErrorKind::GuardNotAllowed)),
            Some((col, g)) => g.parse::<u64>().map_err(|_| (col, ParseErrorKind::BadGuard(g.to_string())))?,
        };
        self.net.add_transition(Transition { src, label, guard, effect, dst }).map_err(|e| match e {
            NetError::EffectNotAllowed { .. } => (*dcol, ParseErrorKind::DeltaOutOfRange(delta.to_string())),
            other => (1, ParseErrorKind::BadName(other.to_string())),
        })?;
        Ok(())
    }
}

/// Parses a net file. Every input yields a net or a located diagnostic.
pub fn parse_net(text: &str) -> Result<Net, ParseError> {
    let mut p = Parser { net: Net::new("net", NetKind::Ocn), seen: Vec::new(), fixed_states: false, fixed_actions: false, started: false };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(&(col, first)) = toks.first() else { continue };
        let res = match first.strip_suffix(':') {
            Some(key) => p.header(key, &toks[1..]),
            None => p.transition(&toks),
        };
        if let Err((c, kind)) = res {
            let column = if c == 1 { col } else { c };
            return Err(ParseError { line: i + 1, column, kind });
        }
    }
    Ok(p.net)
}

fn delta_text(e: Effect) -> String {
    match e {
        Effect::Omega => "w".into(),
        Effect::Fin(d) if d > 0 => format!("+{d}"),
        Effect::Fin(d) => d.to_string(),
    }
}

/// Writes a net in the file format, with explicit state and action orders.
pub fn serialize_net(net: &Net) -> String {
    let mut out = String::new();
    writeln!(out, "net: {}", net.name()).unwrap();
    writeln!(out, "type: {}", net.kind()).unwrap();
    writeln!(out, "states: {}", net.states().join(" ")).unwrap();
    writeln!(out, "alphabet: {}", net.actions().join(" ")).unwrap();
    for t in net.transitions() {
        write!(out, "{} {} {} {}", net.state_name(t.src), net.action_name(t.label), delta_text(t.effect), net.state_name(t.dst)).unwrap();
        if t.guard > 0 {
            write!(out, " @{}", t.guard).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Display adapter for [`serialize_net`].
pub struct NetText<'a>(pub &'a Net);

impl fmt::Display for NetText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_net(self.0))
    }
}
