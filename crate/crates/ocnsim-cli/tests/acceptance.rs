use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ocnsim::approx::{build_sk, decide_weak, same_structure, ApproxProblem, WeakDecision};
use ocnsim::coloring::{check_yes_certificate, extrapolate, CertificateSet};
use ocnsim::fixtures::{a_loop, bc_net, example_net, ladder_net, test_chain};
use ocnsim::geometry::{Direction, SectorIndex};
use ocnsim::net::{enabled_steps, Config, Ext, Net};
use ocnsim::normal::normalize_pair;
use ocnsim::oracle::{solve_grid, weak_sandwich_decide, BoundaryMode};
use ocnsim::random::{random_net, random_pair, rng, NetShape};
use ocnsim::slope::{Player, SlopeSolver};
use ocnsim::strong::{compute_suff, decide_strong, Budget, Certificate, StrongSolver, Verdict};
use ocnsim::weak::{build_guarded_omega, reduce_weak, ExpansionParams, PAD};
use ocnsim_cli::run;
use rand::Rng;

const SEED: u64 = 20_241_015;

const EXAMPLE_MAX: u64 = 20;
const EXAMPLE_LIMIT: Duration = Duration::from_secs(5);
const CHAIN_VALUES: u64 = 6;
const CHAIN_SPOILER_MAX: u64 = 8;
const CHAIN_DUP_MAX: u64 = 10;
const CHAIN_LIMIT: Duration = Duration::from_secs(10);
const SLOPE_PAIRS: usize = 200;
const SLOPE_BUDGET: u64 = 5_000_000;
const BELT_ROUNDS: u32 = 25;
const BELT_GRID: u64 = 60;
const BELT_LIMIT: Duration = Duration::from_secs(300);
const MUTATION_RATE: f64 = 0.99;
const GUARDED_NETS: usize = 100;
const GUARDED_STATES: usize = 6;
const STEP_COUNTERS: u64 = 10;
const WEAK_EXAMPLE_MAX: u64 = 5;
const WEAK_LIMIT: Duration = Duration::from_secs(120);
const WEAK_INSTANCES: usize = 100;
const WEAK_COUNTERS: u64 = 4;
const WEAK_SCHEDULE: &[(u32, u64)] = &[(25, 24)];

/// A checked Simulated verdict: the nets and the certificate it carried.
struct Evidence {
    spoiler: Net,
    dup: Net,
    set: CertificateSet,
}

#[derive(Default)]
struct Context {
    evidence: Vec<Evidence>,
    /// Simulated verdicts whose certificate is not a checkable staircase.
    unchecked: Vec<String>,
    weak_runs: Vec<(Net, Net, WeakDecision)>,
}

impl Context {
    fn record(&mut self, spoiler: &Net, dup: &Net, v: &Verdict, what: &str) {
        match v {
            Verdict::Simulated(Certificate::Staircase(set)) => self.evidence.push(Evidence { spoiler: spoiler.clone(), dup: dup.clone(), set: set.clone() }),
            Verdict::Simulated(c) => self.unchecked.push(format!("{what}: {c:?}")),
            _ => {}
        }
    }
}

type Outcome = Result<String, String>;

fn timed(limit: Duration, started: Instant, summary: String) -> Outcome {
    let t = started.elapsed();
    if t > limit {
        Err(format!("{summary}; took {t:.1?}, limit {limit:?}"))
    } else {
        Ok(format!("{summary}; {t:.1?} (limit {limit:?})"))
    }
}

fn example_exactness(cx: &mut Context) -> Outcome {
    let started = Instant::now();
    let net = example_net();
    let mut wrong = Vec::new();
    for n in 0..=EXAMPLE_MAX {
        for m in 0..=EXAMPLE_MAX {
            let v = decide_strong(&net, Config::new(0, n), &net, Config::new(0, m), Budget::default()).map_err(|e| e.to_string())?;
            if v.holds() != Some(n <= m) {
                wrong.push(format!("({n},{m}) {}", v.label()));
            }
            cx.record(&net, &net, &v, &format!("example ({n},{m})"));
        }
    }
    if !wrong.is_empty() {
        return Err(format!("{} wrong verdicts, first {:?}", wrong.len(), &wrong[..wrong.len().min(5)]));
    }
    timed(EXAMPLE_LIMIT, started, format!("{} queries exact", (EXAMPLE_MAX + 1).pow(2)))
}

fn test_chains(cx: &mut Context) -> Outcome {
    let started = Instant::now();
    let mut wrong = Vec::new();
    for i in 0..=CHAIN_VALUES {
        let (t, u) = test_chain(Ext::Fin(i));
        let mut solver = StrongSolver::new(&t, &u, Budget::default()).map_err(|e| e.to_string())?;
        for m in 0..=CHAIN_SPOILER_MAX {
            for n in 0..=CHAIN_DUP_MAX {
                let v = solver.decide(Config::new(0, m), Config::new(0, n)).map_err(|e| e.to_string())?;
                if (v.holds() == Some(false)) != (m >= i) || v.holds().is_none() {
                    wrong.push(format!("chain {i} ({m},{n}) {}", v.label()));
                }
                cx.record(&t, &u, &v, &format!("chain {i} ({m},{n})"));
            }
        }
        let s = compute_suff(&t, &u, (0, 0), Budget::default()).map_err(|e| e.to_string())?;
        if s != Ext::Fin(i) {
            wrong.push(format!("suff of chain {i} is {s}"));
        }
    }
    if !wrong.is_empty() {
        return Err(format!("{} mismatches, first {:?}", wrong.len(), &wrong[..wrong.len().min(5)]));
    }
    timed(CHAIN_LIMIT, started, format!("{} chains exact, suff = i", CHAIN_VALUES + 1))
}

fn directions() -> Vec<Direction> {
    let mut dirs: Vec<Direction> = (0..=6).flat_map(|x| (0..=6).map(move |y| (x, y))).filter(|&(x, y)| x + y > 0).map(|(x, y)| Direction::new(x, y).unwrap()).collect();
    dirs.sort_by(|a, b| a.cmp_steepness(*b));
    dirs.dedup();
    dirs
}

fn slope_bounds() -> Outcome {
    let mut r = rng(SEED);
    let dirs = directions();
    let (mut games, mut violations) = (0usize, Vec::new());
    for idx in 0..SLOPE_PAIRS {
        let (l, rr) = random_pair(&mut r, NetShape::SMALL);
        let (m, m2) = normalize_pair(&l, &rr).map_err(|e| e.to_string())?;
        let k = m.num_states() * m2.num_states();
        let bound = (k + 1) * (k + 1);
        let mut probe = SlopeSolver::new(&m, &m2, SLOPE_BUDGET).map_err(|e| e.to_string())?;
        let mut lit = SlopeSolver::new(&m, &m2, SLOPE_BUDGET).map_err(|e| e.to_string())?.literal_slopes();
        let cands = lit.sectors().candidates().to_vec();
        for p in 0..m.num_states() {
            for q in 0..m2.num_states() {
                let start = (p, q);
                for s in 0..probe.sectors().num_probes() {
                    let d = probe.sectors().probe(SectorIndex(s));
                    games += 1;
                    match probe.solve(start, d) {
                        Ok(res) if res.phases <= bound => {}
                        Ok(res) => violations.push(format!("pair {idx} {start:?} at {d}: {} phases > {bound}", res.phases)),
                        Err(e) => violations.push(format!("pair {idx} {start:?} at {d}: {e}")),
                    }
                }
                let mut winners = Vec::new();
                for &d in &dirs {
                    games += 1;
                    match lit.solve(start, d) {
                        Ok(res) if res.phases <= bound => winners.push(res.winner),
                        Ok(res) => violations.push(format!("pair {idx} {start:?} at {d}: {} phases > {bound}", res.phases)),
                        Err(e) => violations.push(format!("pair {idx} {start:?} at {d}: {e}")),
                    }
                }
                if let Some(first) = winners.iter().position(|w| *w == Player::Spoiler) {
                    if winners[first..].contains(&Player::Duplicator) {
                        violations.push(format!("pair {idx} {start:?}: winners not monotone"));
                    }
                }
                for w in cands.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let inner: Vec<Direction> = [(1, 1), (2, 1), (1, 3)].iter().map(|&(i, j)| Direction::new(a.x * i + b.x * j, a.y * i + b.y * j).unwrap()).collect();
                    let sector = lit.sectors().sector_of(inner[0]);
                    if inner.iter().any(|&d| lit.sectors().sector_of(d) != sector || sector.is_candidate()) {
                        violations.push(format!("pair {idx}: interior of ({a}, {b}) leaves its sector"));
                        continue;
                    }
                    let ws: Vec<Option<Player>> = inner.iter().map(|&d| lit.solve(start, d).ok().map(|r| r.winner)).collect();
                    games += inner.len();
                    if ws.iter().any(|w| *w != ws[0]) || ws[0].is_none() {
                        violations.push(format!("pair {idx} {start:?}: sector ({a}, {b}) not invariant {ws:?}"));
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{SLOPE_PAIRS} pairs, {games} slope games, zero violations"))
    } else {
        Err(format!("{} violations, first {:?}", violations.len(), &violations[..violations.len().min(3)]))
    }
}

/// Independent bounded-game verdicts over the whole grid: pessimistic Spoiler wins
/// refute, and an extrapolated survivor relation that checks confirms.
struct Sandwich {
    wins: ocnsim::oracle::OracleTable,
    cert: Option<CertificateSet>,
}

impl Sandwich {
    fn new(l: &Net, r: &Net) -> Sandwich {
        let wins = solve_grid(l, r, BELT_ROUNDS, BELT_GRID, BoundaryMode::Pessimistic, false).expect("grid");
        let top = BELT_GRID - BELT_GRID / 4;
        let rows = wins.pairs().map(|pq| (pq, extrapolate(&(0..=top).map(|n| wins.survivor_threshold(pq, n)).collect::<Vec<_>>()))).collect();
        let set = CertificateSet { rows, query: None };
        let cert = check_yes_certificate(&set, l, r).is_ok().then_some(set);
        Sandwich { wins, cert }
    }

    fn decide(&self, pair: (usize, usize), n: u64, m: u64) -> Option<bool> {
        if self.wins.spoiler_wins(pair, n, m) {
            Some(false)
        } else if self.cert.as_ref().is_some_and(|c| c.contains(pair, n, m)) {
            Some(true)
        } else {
            None
        }
    }
}

fn belt_soundness(cx: &mut Context) -> Outcome {
    let started = Instant::now();
    let mut r = rng(SEED);
    let (mut agree, mut inconclusive, mut belts, mut engine_agree) = (0usize, 0usize, 0usize, 0usize);
    let mut wrong = Vec::new();
    for idx in 0..SLOPE_PAIRS {
        let (l, rr) = random_pair(&mut r, NetShape::SMALL);
        let oracle = Sandwich::new(&l, &rr);
        let mut solver = StrongSolver::new(&l, &rr, Budget::default()).map_err(|e| e.to_string())?;
        for p in 0..l.num_states() {
            for q in 0..rr.num_states() {
                let Some(b) = solver.belt((p, q)) else { continue };
                belts += 1;
                for n in 0..=BELT_GRID {
                    for m in 0..=BELT_GRID {
                        let Some(side) = b.classify((n, m)) else { continue };
                        match oracle.decide((p, q), n, m) {
                            Some(o) if o == side => agree += 1,
                            Some(o) => wrong.push(format!("pair {idx} ({p},{q}) at ({n},{m}): belt {side}, oracle {o}")),
                            None => inconclusive += 1,
                        }
                    }
                }
                for (n, m) in [(0, 0), (1, 3), (3, 1), (4, 4), (6, 2), (2, 7)] {
                    let v = solver.decide(Config::new(p, n), Config::new(q, m)).map_err(|e| e.to_string())?;
                    cx.record(&l, &rr, &v, &format!("random {idx} ({p},{q}) ({n},{m})"));
                    match (v.holds(), oracle.decide((p, q), n, m)) {
                        (Some(a), Some(o)) if a == o => engine_agree += 1,
                        (Some(a), Some(o)) => wrong.push(format!("pair {idx} ({p},{q}) at ({n},{m}): engine {a}, oracle {o}")),
                        _ => {}
                    }
                }
            }
        }
    }
    if !wrong.is_empty() {
        return Err(format!("{} contradictions, first {:?}", wrong.len(), &wrong[..wrong.len().min(3)]));
    }
    timed(
        BELT_LIMIT,
        started,
        format!("{belts} belts; {agree} classified points agree, {inconclusive} oracle-inconclusive; {engine_agree} engine verdicts agree"),
    )
}

fn certificate_soundness(cx: &mut Context) -> Outcome {
    if !cx.unchecked.is_empty() {
        return Err(format!("{} verdicts without a checkable certificate, first {}", cx.unchecked.len(), cx.unchecked[0]));
    }
    let mut r = rng(SEED ^ 5);
    let (mut mutations, mut flipped) = (0usize, 0usize);
    for e in &cx.evidence {
        if let Err(f) = check_yes_certificate(&e.set, &e.spoiler, &e.dup) {
            return Err(format!("certificate rejected: {f}"));
        }
        let points = e.set.points();
        for _ in 0..points.len().min(3) {
            let (pair, n, _) = points[r.gen_range(0..points.len())];
            mutations += 1;
            if check_yes_certificate(&e.set.without_point(pair, n), &e.spoiler, &e.dup).is_err() {
                flipped += 1;
            }
        }
    }
    let rate = flipped as f64 / mutations.max(1) as f64;
    // A deletion the checker still accepts leaves a verified simulation, so that point was redundant.
    let summary = format!(
        "{} certificates check; {flipped}/{mutations} mutations rejected ({:.2}%, need {:.0}%), the other {} leave a checked relation",
        cx.evidence.len(),
        100.0 * rate,
        100.0 * MUTATION_RATE,
        mutations - flipped
    );
    if mutations > 0 && rate >= MUTATION_RATE {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn steps_by_name(net: &Net, cfg: Config, action: &str, cap: u64) -> Vec<Config> {
    let Some(a) = net.action_id(action) else { return Vec::new() };
    enabled_steps(net, cfg, cap).expect("valid").steps.into_iter().filter(|(b, _)| *b == a).map(|(_, c)| c).collect()
}

fn padded(net: &Net, cfg: Config, action: &str, k: u64, cap: u64) -> Vec<Config> {
    let mut cur = steps_by_name(net, cfg, action, cap);
    for _ in 1..k {
        cur = cur.into_iter().flat_map(|c| steps_by_name(net, c, PAD, cap)).collect();
    }
    cur.sort_unstable();
    cur.dedup();
    cur
}

fn reduction_bounds() -> Outcome {
    let mut r = rng(SEED ^ 6);
    let shape = NetShape { max_states: GUARDED_STATES, max_transitions: 12, actions: &["a", "tau"] };
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for idx in 0..GUARDED_NETS {
        let net = random_net(&mut r, shape, "q");
        let g = build_guarded_omega(&net).map_err(|e| e.to_string())?;
        let q = net.num_states() as u64;
        let p = ExpansionParams::of(&g);
        if p.gamma_max > 3 * q + 1 || p.delta_max > 2 * q + 1 {
            violations.push(format!("net {idx}: guard {} effect {} with {q} states", p.gamma_max, p.delta_max));
        }
        let spoiler = random_net(&mut r, NetShape { max_states: 3, ..shape }, "p");
        let red = reduce_weak(&spoiler, &net).map_err(|e| e.to_string())?;
        let cap = 2 * STEP_COUNTERS + 2 * GUARDED_STATES as u64 + 2;
        for m in 0..=STEP_COUNTERS {
            for a in red.guarded.actions() {
                for s in 0..red.guarded.num_states() {
                    let mut want = steps_by_name(&red.guarded, Config::new(s, m), a, cap);
                    want.sort_unstable();
                    want.dedup();
                    let got: Vec<Config> = padded(&red.dup, Config::new(s, m), a, red.params.k, cap).into_iter().filter(|c| c.state < red.guarded.num_states()).collect();
                    checked += 1;
                    if want != got {
                        violations.push(format!("net {idx}: Duplicator ({s},{m}) --{a}-->"));
                    }
                }
                for s in 0..spoiler.num_states() {
                    let mut want = steps_by_name(&spoiler, Config::new(s, m), a, cap);
                    want.sort_unstable();
                    want.dedup();
                    checked += 1;
                    if want != padded(&red.spoiler, Config::new(s, m), a, red.params.k, cap) {
                        violations.push(format!("net {idx}: Spoiler ({s},{m}) --{a}-->"));
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{GUARDED_NETS} guarded nets within bounds; {checked} step sets correspond"))
    } else {
        Err(format!("{} violations, first {:?}", violations.len(), &violations[..violations.len().min(3)]))
    }
}

fn weak_examples(cx: &mut Context) -> Outcome {
    let started = Instant::now();
    let net = example_net();
    let mut wrong = Vec::new();
    for n in 0..=WEAK_EXAMPLE_MAX {
        for m in 0..=WEAK_EXAMPLE_MAX {
            let d = decide_weak(&net, &net, Config::new(0, n), Config::new(0, m), Budget::default()).map_err(|e| e.to_string())?;
            if d.verdict.holds() != Some(true) {
                wrong.push(format!("example ({n},{m}) {}", d.verdict.label()));
            }
            cx.weak_runs.push((net.clone(), net.clone(), d));
        }
    }
    let a = a_loop();
    let mut targets = vec![(bc_net(), "B".to_string())];
    targets.extend((1..=3).map(|k| (ladder_net(k), format!("B{k}"))));
    for (rhs, state) in targets {
        let q = rhs.state_id(&state).expect("fixture state");
        let d = decide_weak(&a, &rhs, Config::new(0, 0), Config::new(q, 0), Budget::default()).map_err(|e| e.to_string())?;
        if d.verdict.holds() != Some(false) {
            wrong.push(format!("(A0, {state}0) in {} {}", rhs.name(), d.verdict.label()));
        }
        cx.weak_runs.push((a.clone(), rhs.clone(), d));
    }
    if !wrong.is_empty() {
        return Err(format!("{} wrong, first {:?}", wrong.len(), &wrong[..wrong.len().min(5)]));
    }
    timed(WEAK_LIMIT, started, format!("{} example queries and 4 nonconvergence queries correct", (WEAK_EXAMPLE_MAX + 1).pow(2)))
}

fn weak_agreement(cx: &mut Context) -> Outcome {
    let mut r = rng(SEED ^ 9);
    let (mut agree, mut inconclusive) = (0usize, 0usize);
    let mut wrong = Vec::new();
    for idx in 0..WEAK_INSTANCES {
        let (l, rr) = random_pair(&mut r, NetShape::SMALL_WEAK);
        let lhs = Config::new(r.gen_range(0..l.num_states()), r.gen_range(0..=WEAK_COUNTERS));
        let rhs = Config::new(r.gen_range(0..rr.num_states()), r.gen_range(0..=WEAK_COUNTERS));
        let d = decide_weak(&l, &rr, lhs, rhs, Budget::default()).map_err(|e| format!("instance {idx}: {e}"))?;
        match (d.verdict.holds(), weak_sandwich_decide(&l, &rr, lhs, rhs, WEAK_SCHEDULE).holds()) {
            (Some(a), Some(o)) if a == o => agree += 1,
            (e, Some(o)) => wrong.push(format!("instance {idx}: engine {e:?}, oracle {o}")),
            (_, None) => inconclusive += 1,
        }
        cx.weak_runs.push((l, rr, d));
    }
    let summary = format!("{agree} agree, {} disagree, {inconclusive} oracle-inconclusive", wrong.len());
    if wrong.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; first {:?}", &wrong[..wrong.len().min(3)]))
    }
}

fn approximant_invariants(cx: &mut Context) -> Outcome {
    let mut violations = Vec::new();
    for (i, (l, r, d)) in cx.weak_runs.iter().enumerate() {
        let run = &d.run;
        if !run.history[0].values().all(|v| *v == Ext::Omega) {
            violations.push(format!("run {i}: initial table not all ω"));
        }
        for w in run.history.windows(2) {
            if w[1].iter().any(|(p, v)| *v > w[0][p]) {
                violations.push(format!("run {i}: sufficient values grew"));
            }
        }
        if run.stable > run.level_cap || run.history[run.stable] != run.history[run.stable - 1] {
            violations.push(format!("run {i}: stable level {} (cap {})", run.stable, run.level_cap));
        }
        let red = reduce_weak(l, r).map_err(|e| e.to_string())?;
        let originals: Vec<usize> = (0..l.num_states()).collect();
        let problem = ApproxProblem::new(&red.spoiler, &red.dup, &originals).map_err(|e| e.to_string())?;
        let first = build_sk(&problem, 1, &run.history[0]).map_err(|e| e.to_string())?;
        for k in 2..=run.stable {
            let nets = build_sk(&problem, k, &run.history[k - 1]).map_err(|e| e.to_string())?;
            if !same_structure(&nets.dup, &first.dup) {
                violations.push(format!("run {i}: Duplicator approximant changed at level {k}"));
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{} weak runs, zero assertion failures", cx.weak_runs.len()))
    } else {
        Err(format!("{} violations, first {:?}", violations.len(), &violations[..violations.len().min(3)]))
    }
}

fn cli(args: &[&str]) -> ocnsim_cli::commands::Outcome {
    run(std::iter::once("ocnsim").chain(args.iter().copied()))
}

fn determinism() -> Outcome {
    let nets = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../nets");
    let f = |n: &str| nets.join(n).to_string_lossy().into_owned();
    let seed = SEED.to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["selftest".into(), "--count".into(), "25".into()],
        vec!["strong".into(), f("ex2.net"), "p:7".into(), f("ex2.net"), "p:4".into()],
        vec!["weak".into(), f("aloop.net"), "A:0".into(), f("ladder2.net"), "B2:0".into()],
        vec!["belts".into(), f("ex2.net"), f("bc.net")],
        vec!["suff".into(), f("bc.net"), f("ex2.net")],
        vec!["oracle".into(), "weak".into(), f("ex2.net"), "p:3".into(), f("ex2.net"), "p:1".into()],
    ];
    for args in &runs {
        let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
        a.extend(["--json", "--seed", &seed]);
        let (x, y) = (cli(&a), cli(&a));
        if x.stdout != y.stdout || x.code != y.code {
            return Err(format!("`{}` differs between runs", args[0]));
        }
        if x.stdout.is_empty() {
            return Err(format!("`{}` printed nothing", args[0]));
        }
    }
    Ok(format!("{} commands byte-identical across runs with --seed {SEED}", runs.len()))
}

fn main() -> ExitCode {
    let mut cx = Context::default();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "example exactness", example_exactness(&mut cx)),
        (2, "test-chain family", test_chains(&mut cx)),
        (3, "slope-game bounds", slope_bounds()),
        (4, "belt soundness vs oracle", belt_soundness(&mut cx)),
        (5, "certificate soundness", certificate_soundness(&mut cx)),
        (6, "reduction bounds", reduction_bounds()),
        (7, "weak pipeline on examples", weak_examples(&mut cx)),
        (9, "weak oracle agreement", weak_agreement(&mut cx)),
        (8, "approximant invariants", approximant_invariants(&mut cx)),
        (10, "determinism", determinism()),
    ];
    let mut results = results;
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(s) => println!("PASS {id:>2} {name}: {s}"),
            Err(s) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {s}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
