use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::net::{Effect, Net, NetKind};

/// Shape of a randomly generated net.
#[derive(Debug, Clone, Copy)]
pub struct NetShape {
    pub max_states: usize,
    pub max_transitions: usize,
    pub actions: &'static [&'static str],
}

impl NetShape {
    pub const SMALL: NetShape = NetShape { max_states: 3, max_transitions: 6, actions: &["a", "b"] };
    pub const SMALL_WEAK: NetShape = NetShape { max_states: 3, max_transitions: 6, actions: &["a", "tau"] };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A plain net whose state names carry `prefix`; state `{prefix}0` always exists.
pub fn random_net(rng: &mut ChaCha8Rng, shape: NetShape, prefix: &str) -> Net {
    let states = rng.gen_range(1..=shape.max_states);
    let count = rng.gen_range(1..=shape.max_transitions);
    let mut net = Net::new(format!("rand-{prefix}"), NetKind::Ocn);
    for s in 0..states {
        net.intern_state(&format!("{prefix}{s}"));
    }
    for a in shape.actions {
        net.intern_action(a);
    }
    for _ in 0..count {
        let src = rng.gen_range(0..states);
        let dst = rng.gen_range(0..states);
        let a = shape.actions[rng.gen_range(0..shape.actions.len())];
        let d = rng.gen_range(-1..=1);
        net.connect(&format!("{prefix}{src}"), a, Effect::Fin(d), &format!("{prefix}{dst}")).expect("valid");
    }
    net
}

/// A pair of random nets over the same alphabet.
pub fn random_pair(rng: &mut ChaCha8Rng, shape: NetShape) -> (Net, Net) {
    let l = random_net(rng, shape, "p");
    let r = random_net(rng, shape, "q");
    (l, r)
}
