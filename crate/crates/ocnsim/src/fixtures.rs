//! Small nets used throughout the tests, the CLI self-test and the examples in the README.

use crate::net::{Effect, Ext, Net, NetKind};

/// `p --a,-1--> p` and `p --tau,+1--> p`.
pub fn example_net() -> Net {
    Net::ocn("ex2", &[("p", "a", -1, "p"), ("p", "tau", 1, "p")]).expect("valid")
}

/// A single `a` loop on state `A`.
pub fn a_loop() -> Net {
    Net::ocn("aloop", &[("A", "a", 0, "A")]).expect("valid")
}

/// `B` pumps silently, moves to `C` on `a`, and `C` drains on `a`.
pub fn bc_net() -> Net {
    Net::ocn("bc", &[("B", "tau", 1, "B"), ("B", "a", 0, "C"), ("C", "a", -1, "C")]).expect("valid")
}

/// The ω-net `B --a,w--> C --a,-1--> C`.
pub fn bc_omega_net() -> Net {
    let mut n = Net::new("bc-omega", NetKind::Omega);
    n.connect("B", "a", Effect::Omega, "C").expect("valid");
    n.connect("C", "a", Effect::Fin(-1), "C").expect("valid");
    n
}

/// Ladder of `k + 1` pump/drain rungs; the top rung is `B{k}`.
pub fn ladder_net(k: usize) -> Net {
    let mut rows: Vec<(String, &str, i64, String)> = Vec::new();
    for i in 0..=k {
        rows.push((format!("C{i}"), "a", -1, format!("C{i}")));
        rows.push((format!("B{i}"), "tau", 0, format!("C{i}")));
        rows.push((format!("B{i}"), "tau", 1, format!("B{i}")));
        if i < k {
            rows.push((format!("C{}", i + 1), "tau", 0, format!("B{i}")));
        }
    }
    let rows: Vec<(&str, &str, i64, &str)> = rows.iter().map(|(s, a, d, t)| (s.as_str(), *a, *d, t.as_str())).collect();
    Net::ocn(&format!("ladder{k}"), &rows).expect("valid")
}

pub const CHAIN_E: &str = "e";
pub const CHAIN_F: &str = "f";

/// Test chain pair for `i`: Spoiler may play `f` only after `i` decrementing `e` steps.
/// Returns the Spoiler net (start state `t0`) and the Duplicator net (single state `u`).
pub fn test_chain(i: Ext) -> (Net, Net) {
    let mut t = Net::new(format!("chain{i}"), NetKind::Ocn);
    match i {
        Ext::Omega => {
            t.connect("t0", CHAIN_E, Effect::Fin(0), "t0").expect("valid");
        }
        Ext::Fin(i) => {
            t.intern_state("t0");
            for j in 0..i {
                t.connect(&format!("t{j}"), CHAIN_E, Effect::Fin(-1), &format!("t{}", j + 1)).expect("valid");
            }
            let last = format!("t{i}");
            t.connect(&last, CHAIN_F, Effect::Fin(0), &last).expect("valid");
            t.intern_action(CHAIN_E);
        }
    }
    t.intern_action(CHAIN_F);
    let mut u = Net::new(format!("chain{i}'"), NetKind::Ocn);
    u.connect("u", CHAIN_E, Effect::Fin(0), "u").expect("valid");
    u.intern_action(CHAIN_F);
    (t, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(example_net().transitions().len(), 2);
        assert_eq!(ladder_net(1).num_states(), 4);
        assert_eq!(ladder_net(3).transitions().len(), 4 * 3 + 3);
        let (t, u) = test_chain(Ext::Fin(2));
        assert_eq!(t.num_states(), 3);
        assert_eq!(u.num_states(), 1);
        assert!(bc_omega_net().has_omega());
    }
}
