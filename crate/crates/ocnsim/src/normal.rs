use crate::net::{Effect, Net, NetError, NetKind, Transition};

/// Action added as a zero-effect loop on every state.
pub const DOLLAR: &str = "$";
/// Sink state of the completed Duplicator net.
pub const SINK: &str = "$L";

/// Re-indexes both nets over the union of their alphabets, left actions first.
pub fn unify_alphabets(lhs: &Net, rhs: &Net) -> (Net, Net) {
    let mut alphabet: Vec<String> = lhs.actions().to_vec();
    for a in rhs.actions() {
        if !alphabet.contains(a) {
            alphabet.push(a.clone());
        }
    }
    let l = lhs.with_alphabet(&alphabet).expect("alphabet is a superset");
    let r = rhs.with_alphabet(&alphabet).expect("alphabet is a superset");
    (l, r)
}

/// Makes `lhs` non-blocking and `rhs` complete over a common alphabet.
pub fn normalize_pair(lhs: &Net, rhs: &Net) -> Result<(Net, Net), NetError> {
    for n in [lhs, rhs] {
        if n.kind() != NetKind::Ocn {
            return Err(NetError::NotPlain(n.name().to_string()));
        }
        if n.action_id(DOLLAR).is_some() {
            return Err(NetError::Reserved(DOLLAR.to_string()));
        }
    }
    if rhs.state_id(SINK).is_some() {
        return Err(NetError::Reserved(SINK.to_string()));
    }
    let (mut m, mut m2) = unify_alphabets(lhs, rhs);
    let d = m.intern_action(DOLLAR);
    m2.intern_action(DOLLAR);
    for p in 0..m.num_states() {
        m.add_transition(Transition { src: p, label: d, guard: 0, effect: Effect::Fin(0), dst: p })?;
    }
    let original = m2.num_states();
    for p in 0..original {
        m2.add_transition(Transition { src: p, label: d, guard: 0, effect: Effect::Fin(0), dst: p })?;
    }
    let sink = m2.add_state(SINK)?;
    let actions = m2.num_actions();
    for a in 0..actions {
        m2.add_transition(Transition { src: sink, label: a, guard: 0, effect: Effect::Fin(-1), dst: sink })?;
    }
    for p in 0..original {
        let mut present = vec![false; actions];
        for &t in m2.outgoing(p) {
            present[m2.transition(t).label] = true;
        }
        for (a, _) in present.iter().enumerate().filter(|(_, &x)| !x) {
            m2.add_transition(Transition { src: p, label: a, guard: 0, effect: Effect::Fin(0), dst: sink })?;
        }
    }
    m.set_name(format!("{}+nf", lhs.name()));
    m2.set_name(format!("{}+nf", rhs.name()));
    Ok((m, m2))
}

/// Every state has a transition that never needs counter.
pub fn is_non_blocking(net: &Net) -> bool {
    (0..net.num_states()).all(|p| {
        net.outgoing(p)
            .iter()
            .any(|&t| matches!(net.transition(t).effect, Effect::Fin(0) | Effect::Fin(1)) && net.transition(t).guard == 0)
    })
}

/// Every state has a transition for every action.
pub fn is_complete(net: &Net) -> bool {
    (0..net.num_states()).all(|p| {
        let mut seen = vec![false; net.num_actions()];
        for &t in net.outgoing(p) {
            seen[net.transition(t).label] = true;
        }
        seen.into_iter().all(|x| x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dollar_loops_and_sink() {
        let n = Net::ocn("ex2", &[("p", "a", -1, "p"), ("p", "tau", 1, "p")]).unwrap();
        let (m, m2) = normalize_pair(&n, &n).unwrap();
        let d = m.action_id(DOLLAR).unwrap();
        let p = m.state_id("p").unwrap();
        assert!(m.transitions().iter().any(|t| t.src == p && t.dst == p && t.label == d && t.effect == Effect::Fin(0)));
        assert!(is_non_blocking(&m));
        assert!(is_complete(&m2));
        let l = m2.state_id(SINK).unwrap();
        assert_eq!(m2.outgoing(l).len(), m2.num_actions());
    }

    #[test]
    fn empty_duplicator_gets_bridges() {
        let lhs = Net::ocn("l", &[("s", "a", 0, "s"), ("s", "b", 0, "s")]).unwrap();
        let mut rhs = Net::new("r", NetKind::Ocn);
        rhs.intern_state("q");
        let (_, m2) = normalize_pair(&lhs, &rhs).unwrap();
        let (q, l) = (m2.state_id("q").unwrap(), m2.state_id(SINK).unwrap());
        let bridges: Vec<_> = m2.outgoing(q).iter().map(|&t| m2.transition(t)).filter(|t| t.dst == l).collect();
        assert_eq!(bridges.len(), 2);
        assert!(bridges.iter().all(|t| t.effect == Effect::Fin(0)));
        let sink_loops: Vec<_> = m2.outgoing(l).iter().map(|&t| m2.transition(t)).collect();
        assert_eq!(sink_loops.len(), 3);
        assert!(sink_loops.iter().all(|t| t.effect == Effect::Fin(-1) && t.dst == l));
    }

    #[test]
    fn reserved_dollar_rejected() {
        let n = Net::ocn("bad", &[("p", "$", 0, "p")]).unwrap();
        assert_eq!(normalize_pair(&n, &n), Err(NetError::Reserved("$".into())));
    }
}
