use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use ocnsim::approx::{build_sk, decide_weak, ApproxProblem, SuffTable};
use ocnsim::belt::BeltSpec;
use ocnsim::geometry::Direction;
use ocnsim::net::{Config, Ext, Net, Pair};
use ocnsim::normal::normalize_pair;
use ocnsim::oracle::{sandwich_decide, solve_grid, weak_sandwich_decide, BoundaryMode};
use ocnsim::random::{random_pair, rng, NetShape};
use ocnsim::slope::SlopeSolver;
use ocnsim::strong::{Budget, StrongSolver, Verdict};
use ocnsim::weak::reduce_weak;
use serde_json::{json, Value};

use crate::plot::Image;
use crate::record::ResultRecord;
use crate::text::{parse_net, serialize_net};
use crate::{Cli, Command, Game, Mode, NetPair, Query};

/// Exit code and printed output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line `args`, whose first element is the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { Outcome { code, stdout: text, stderr: String::new() } } else { Outcome { code, stdout: String::new(), stderr: text } };
        }
    };
    let name = command_name(&cli.command);
    let (record, text) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            let msg = format!("{e:#}");
            (ResultRecord::error(name, msg.clone()), format!("error: {msg}\n"))
        }
    };
    let code = record.exit_code();
    let stdout = if cli.json { record.to_json() + "\n" } else if code == 3 { String::new() } else { text.clone() };
    let stderr = if code == 3 && !cli.json { text } else { String::new() };
    Outcome { code, stdout, stderr }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Strong(_) => "strong",
        Command::Weak { .. } => "weak",
        Command::Belts { .. } => "belts",
        Command::Suff { .. } => "suff",
        Command::Slope { .. } => "slope",
        Command::Oracle { .. } => "oracle",
        Command::ReduceWeak { .. } => "reduce-weak",
        Command::Normalize { .. } => "normalize",
        Command::Plot { .. } => "plot",
        Command::Selftest { .. } => "selftest",
    }
}

pub fn budget_of(grid: u64) -> Budget {
    let grid = grid.max(16);
    Budget { max_grid: grid, max_cap: grid.saturating_mul(32), ..Budget::default() }
}

fn load(path: &str) -> Result<Net> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
    parse_net(&text).with_context(|| path.to_string())
}

fn load_pair(p: &NetPair) -> Result<(Net, Net)> {
    Ok((load(&p.lhs)?, load(&p.rhs)?))
}

fn state(net: &Net, name: &str) -> Result<usize> {
    net.state_id(name).ok_or_else(|| anyhow!("unknown state `{name}` in net `{}`", net.name()))
}

/// Parses `state:counter`; counters go up to `2^63 - 1`.
pub fn parse_config(net: &Net, spec: &str) -> Result<Config> {
    let (s, n) = spec.rsplit_once(':').ok_or_else(|| anyhow!("expected `state:counter`, got `{spec}`"))?;
    let n: u64 = n.parse().with_context(|| format!("bad counter in `{spec}`"))?;
    if n > i64::MAX as u64 {
        bail!("counter {n} exceeds 2^63 - 1");
    }
    Ok(Config::new(state(net, s)?, n))
}

fn parse_pair(lhs: &Net, rhs: &Net, spec: &str) -> Result<Pair> {
    let (p, q) = spec.split_once(',').ok_or_else(|| anyhow!("expected `p,q`, got `{spec}`"))?;
    Ok((state(lhs, p)?, state(rhs, q)?))
}

fn parse_direction(spec: &str) -> Result<Direction> {
    let (x, y) = spec.split_once('/').ok_or_else(|| anyhow!("expected `x/y`, got `{spec}`"))?;
    let (x, y): (i64, i64) = (x.parse().context("slope x")?, y.parse().context("slope y")?);
    Direction::new(x, y).map_err(|e| anyhow!("slope {spec}: {e}"))
}

fn all_pairs(lhs: &Net, rhs: &Net, only: Option<&str>) -> Result<Vec<Pair>> {
    match only {
        Some(s) => Ok(vec![parse_pair(lhs, rhs, s)?]),
        None => Ok((0..lhs.num_states()).flat_map(|p| (0..rhs.num_states()).map(move |q| (p, q))).collect()),
    }
}

fn pair_names(lhs: &Net, rhs: &Net, (p, q): Pair) -> Value {
    json!([lhs.state_name(p), rhs.state_name(q)])
}

fn query_json(q: &Query, lhs: &Net, rhs: &Net, l: Config, r: Config) -> Value {
    json!({
        "lhs": { "file": q.lhs, "net": lhs.name(), "state": lhs.state_name(l.state), "counter": l.counter },
        "rhs": { "file": q.rhs, "net": rhs.name(), "state": rhs.state_name(r.state), "counter": r.counter },
    })
}

fn ext_json(v: Ext) -> Value {
    match v {
        Ext::Fin(n) => json!(n),
        Ext::Omega => json!("w"),
    }
}

fn table_json(problem: &ApproxProblem, t: &SuffTable) -> Value {
    let rows: Vec<Value> = t.iter().map(|(&p, &v)| json!({ "pair": pair_names(problem.spoiler(), problem.dup(), p), "suff": ext_json(v) })).collect();
    Value::Array(rows)
}

fn describe(v: &Verdict) -> String {
    match v {
        Verdict::Simulated(c) => format!("simulated ({})", serde_json::to_value(c).ok().and_then(|c| c["kind"].as_str().map(String::from)).unwrap_or_default()),
        Verdict::NotSimulated(w) => format!("not simulated ({})", serde_json::to_value(w).ok().and_then(|w| w["kind"].as_str().map(String::from)).unwrap_or_default()),
        Verdict::Unknown(r) => format!("unknown ({})", r.reason),
    }
}

fn execute(cli: &Cli) -> Result<(ResultRecord, String)> {
    let budget = budget_of(cli.budget);
    match &cli.command {
        Command::Strong(q) => strong(q, budget),
        Command::Weak { query, emit_approximants } => weak(query, emit_approximants.as_deref(), budget),
        Command::Belts { nets, pair } => belts(nets, pair.as_deref(), budget),
        Command::Suff { nets, pair } => suff(nets, pair.as_deref(), budget),
        Command::Slope { nets, pair, slope: dir } => slope(nets, pair, dir, budget),
        Command::Oracle { game, query, rounds, grid, mode } => oracle(*game, query, *rounds, *grid, *mode),
        Command::ReduceWeak { nets, out } => reduce(nets, out),
        Command::Normalize { nets, out } => normalize(nets, out.as_deref()),
        Command::Plot { nets, pair, max, out, belts } => plot(nets, pair, *max, out, *belts, budget),
        Command::Selftest { count } => selftest(cli.seed, *count, budget),
    }
}

fn strong(q: &Query, budget: Budget) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = (load(&q.lhs)?, load(&q.rhs)?);
    let (l, r) = (parse_config(&lhs, &q.lhs_cfg)?, parse_config(&rhs, &q.rhs_cfg)?);
    let mut solver = StrongSolver::new(&lhs, &rhs, budget)?;
    let v = solver.decide(l, r)?;
    let text = format!("{} ⪯ {}: {}\n", q.lhs_cfg, q.rhs_cfg, describe(&v));
    let rec = ResultRecord::new("strong", query_json(q, &lhs, &rhs, l, r), v.label(), serde_json::to_value(&v)?, serde_json::to_value(solver.stats())?);
    Ok((rec, text))
}

fn weak(q: &Query, emit: Option<&str>, budget: Budget) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = (load(&q.lhs)?, load(&q.rhs)?);
    let (l, r) = (parse_config(&lhs, &q.lhs_cfg)?, parse_config(&rhs, &q.rhs_cfg)?);
    let d = decide_weak(&lhs, &rhs, l, r, budget)?;
    let red = reduce_weak(&lhs, &rhs)?;
    let originals: Vec<usize> = (0..lhs.num_states()).collect();
    let problem = ApproxProblem::new(&red.spoiler, &red.dup, &originals)?;
    let history: Vec<Value> = d.run.history.iter().map(|t| table_json(&problem, t)).collect();
    if let Some(dir) = emit {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {dir}"))?;
        for k in 1..=d.run.stable {
            let nets = build_sk(&problem, k, &d.run.history[k - 1])?;
            write(&Path::new(dir).join(format!("S{k}.net")), &serialize_net(&nets.spoiler))?;
            write(&Path::new(dir).join(format!("S{k}-dup.net")), &serialize_net(&nets.dup))?;
        }
        write(&Path::new(dir).join("suff.json"), &serde_json::to_string_pretty(&history)?)?;
    }
    let mut text = format!("{} ⪯w {}: {}\n", q.lhs_cfg, q.rhs_cfg, describe(&d.verdict));
    writeln!(text, "rounds per step k = {}, stable at level {} (cap {})", d.params.k, d.run.stable, d.run.level_cap)?;
    let payload = json!({
        "result": serde_json::to_value(&d.verdict)?,
        "expansion": serde_json::to_value(d.params)?,
        "history": history,
    });
    let stats = json!({ "levels": d.run.stable, "level_cap": d.run.level_cap, "forcing_pairs": d.pairs.len() });
    Ok((ResultRecord::new("weak", query_json(q, &lhs, &rhs, l, r), d.verdict.label(), payload, stats), text))
}

fn write(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

fn belt_json(lhs: &Net, rhs: &Net, pair: Pair, b: Option<BeltSpec>) -> Value {
    match b {
        Some(b) => json!({
            "pair": pair_names(lhs, rhs, pair),
            "gamma": b.gamma.map(|d| d.to_string()),
            "beta": b.beta.map(|d| d.to_string()),
            "c": b.c,
            "kind": serde_json::to_value(b.kind()).unwrap_or(Value::Null),
        }),
        None => json!({ "pair": pair_names(lhs, rhs, pair), "belt": Value::Null }),
    }
}

fn belts(nets: &NetPair, only: Option<&str>, budget: Budget) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = load_pair(nets)?;
    let mut solver = StrongSolver::new(&lhs, &rhs, budget)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    for pair in all_pairs(&lhs, &rhs, only)? {
        let b = solver.belt(pair);
        let (p, q) = (lhs.state_name(pair.0), rhs.state_name(pair.1));
        match &b {
            Some(b) => {
                let show = |d: Option<Direction>| d.map_or("-".to_string(), |d| d.to_string());
                writeln!(text, "({p},{q}): gamma {} beta {} c {}", show(b.gamma), show(b.beta), b.c)?;
            }
            None => writeln!(text, "({p},{q}): no belt within budget")?,
        }
        rows.push(belt_json(&lhs, &rhs, pair, b));
    }
    let query = json!({ "lhs": nets.lhs, "rhs": nets.rhs });
    Ok((ResultRecord::new("belts", query, "ok", Value::Array(rows), serde_json::to_value(solver.stats())?), text))
}

fn suff(nets: &NetPair, only: Option<&str>, budget: Budget) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = load_pair(nets)?;
    let mut solver = StrongSolver::new(&lhs, &rhs, budget)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut complete = true;
    for pair in all_pairs(&lhs, &rhs, only)? {
        let v = solver.suff(pair);
        let (p, q) = (lhs.state_name(pair.0), rhs.state_name(pair.1));
        let value = match &v {
            Ok(v) => ext_json(*v),
            Err(_) => {
                complete = false;
                Value::Null
            }
        };
        match v {
            Ok(v) => writeln!(text, "suff({p},{q}) = {v}")?,
            Err(e) => writeln!(text, "suff({p},{q}) unknown: {e}")?,
        }
        rows.push(json!({ "pair": pair_names(&lhs, &rhs, pair), "suff": value }));
    }
    let verdict = if complete { "ok" } else { "unknown" };
    let query = json!({ "lhs": nets.lhs, "rhs": nets.rhs });
    Ok((ResultRecord::new("suff", query, verdict, Value::Array(rows), serde_json::to_value(solver.stats())?), text))
}

fn slope(nets: &NetPair, pair: &str, dir: &str, budget: Budget) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = load_pair(nets)?;
    let pair = parse_pair(&lhs, &rhs, pair)?;
    let d = parse_direction(dir)?;
    let (m, m2) = normalize_pair(&lhs, &rhs)?;
    let mut solver = SlopeSolver::new(&m, &m2, budget.slope_nodes)?;
    let r = solver.solve(pair, d)?;
    let text = format!("slope game at {d}: {:?} wins, {} phases (bound {})\n", r.winner, r.phases, solver.phase_bound());
    let query = json!({ "lhs": nets.lhs, "rhs": nets.rhs, "pair": pair_names(&lhs, &rhs, pair), "slope": d.to_string() });
    let payload = json!({ "winner": serde_json::to_value(r.winner)?, "phases": r.phases, "phase_bound": solver.phase_bound(), "c": solver.c() });
    Ok((ResultRecord::new("slope", query, "ok", payload, Value::Null), text))
}

fn oracle(game: Game, q: &Query, rounds: u32, grid: u64, mode: Mode) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = (load(&q.lhs)?, load(&q.rhs)?);
    let (l, r) = (parse_config(&lhs, &q.lhs_cfg)?, parse_config(&rhs, &q.rhs_cfg)?);
    if l.counter > grid || r.counter > grid {
        bail!("query lies outside the grid [0, {grid}]");
    }
    let boundary = match mode {
        Mode::Opt => BoundaryMode::Optimistic,
        Mode::Pess => BoundaryMode::Pessimistic,
    };
    let t = solve_grid(&lhs, &rhs, rounds, grid, boundary, game == Game::Weak)?;
    let wins = t.spoiler_wins((l.state, r.state), l.counter, r.counter);
    // A pessimistic Spoiler win is genuine; an optimistic fixpoint without one is a closed simulation.
    let verdict = match (mode, wins) {
        (Mode::Pess, true) => "not-simulated",
        (Mode::Opt, false) if t.converged => "simulated",
        _ => "unknown",
    };
    let text = format!("{}: Spoiler {} within {} rounds on [0, {grid}]; {verdict}\n", q.lhs_cfg, if wins { "wins" } else { "does not win" }, t.rounds);
    let payload = json!({ "spoiler_wins": wins, "rounds": t.rounds, "converged": t.converged, "grid": grid,
        "mode": if mode == Mode::Opt { "opt" } else { "pess" }, "game": if game == Game::Weak { "weak" } else { "strong" } });
    Ok((ResultRecord::new("oracle", query_json(q, &lhs, &rhs, l, r), verdict, payload, Value::Null), text))
}

fn reduce(nets: &NetPair, out: &str) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = load_pair(nets)?;
    let red = reduce_weak(&lhs, &rhs)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {out}"))?;
    let dir = Path::new(out);
    write(&dir.join("guarded.net"), &serialize_net(&red.guarded))?;
    write(&dir.join("spoiler.net"), &serialize_net(&red.spoiler))?;
    write(&dir.join("dup.net"), &serialize_net(&red.dup))?;
    let text = format!("wrote guarded.net, spoiler.net, dup.net to {out} (k = {})\n", red.params.k);
    let payload = json!({
        "expansion": serde_json::to_value(red.params)?,
        "guarded_transitions": red.guarded.transitions().len(),
        "spoiler_states": red.spoiler.num_states(),
        "dup_states": red.dup.num_states(),
    });
    Ok((ResultRecord::new("reduce-weak", json!({ "lhs": nets.lhs, "rhs": nets.rhs, "out": out }), "ok", payload, Value::Null), text))
}

fn normalize(nets: &NetPair, out: Option<&str>) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = load_pair(nets)?;
    let (m, m2) = normalize_pair(&lhs, &rhs)?;
    let (a, b) = (serialize_net(&m), serialize_net(&m2));
    let text = match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {dir}"))?;
            write(&Path::new(dir).join("lhs.net"), &a)?;
            write(&Path::new(dir).join("rhs.net"), &b)?;
            format!("wrote lhs.net and rhs.net to {dir}\n")
        }
        None => format!("{a}\n{b}"),
    };
    let payload = json!({ "lhs": a, "rhs": b });
    Ok((ResultRecord::new("normalize", json!({ "lhs": nets.lhs, "rhs": nets.rhs }), "ok", payload, Value::Null), text))
}

fn plot(nets: &NetPair, pair: &str, max: u64, out: &str, overlay: bool, budget: Budget) -> Result<(ResultRecord, String)> {
    let (lhs, rhs) = load_pair(nets)?;
    let pair = parse_pair(&lhs, &rhs, pair)?;
    let mut solver = StrongSolver::new(&lhs, &rhs, budget)?;
    let mut img = Image::render(max, max, |n, n2| solver.decide(Config::new(pair.0, n), Config::new(pair.1, n2)).ok().and_then(|v| v.holds()));
    if overlay {
        if let Some(b) = solver.belt(pair) {
            img.overlay(&b);
        }
    }
    write(Path::new(out), &img.to_pgm())?;
    let count = |v: u8| img.pixels.iter().flatten().filter(|&&p| p == v).count();
    let payload = json!({ "width": max + 1, "height": max + 1, "simulated": count(255), "not_simulated": count(0), "unknown": count(128) });
    let text = format!("wrote {out} ({0}x{0})\n", max + 1);
    let query = json!({ "lhs": nets.lhs, "rhs": nets.rhs, "pair": pair_names(&lhs, &rhs, pair), "max": max });
    Ok((ResultRecord::new("plot", query, "ok", payload, serde_json::to_value(solver.stats())?), text))
}

/// Counts of one engine-versus-oracle comparison.
#[derive(Debug, Default)]
struct Tally {
    agree: usize,
    disagree: usize,
    inconclusive: usize,
}

impl Tally {
    fn add(&mut self, engine: Option<bool>, oracle: Option<bool>) {
        match (engine, oracle) {
            (Some(a), Some(b)) if a == b => self.agree += 1,
            (Some(_), Some(_)) => self.disagree += 1,
            _ => self.inconclusive += 1,
        }
    }

    fn json(&self) -> Value {
        json!({ "agree": self.agree, "disagree": self.disagree, "inconclusive": self.inconclusive })
    }
}

fn selftest(seed: u64, count: usize, budget: Budget) -> Result<(ResultRecord, String)> {
    let mut r = rng(seed);
    let (mut strong, mut weak) = (Tally::default(), Tally::default());
    for _ in 0..count {
        let (lhs, rhs) = random_pair(&mut r, NetShape::SMALL);
        let mut solver = StrongSolver::new(&lhs, &rhs, budget)?;
        for (n, m) in [(0, 0), (1, 3), (3, 1), (4, 4)] {
            let (l, c) = (Config::new(0, n), Config::new(0, m));
            let engine = solver.decide(l, c).ok().and_then(|v| v.holds());
            strong.add(engine, sandwich_decide(&lhs, &rhs, l, c, &[(25, 24)]).holds());
        }
        let (lhs, rhs) = random_pair(&mut r, NetShape::SMALL_WEAK);
        for (n, m) in [(0, 0), (2, 1)] {
            let (l, c) = (Config::new(0, n), Config::new(0, m));
            let engine = decide_weak(&lhs, &rhs, l, c, budget).ok().and_then(|d| d.verdict.holds());
            weak.add(engine, weak_sandwich_decide(&lhs, &rhs, l, c, &[(25, 24)]).holds());
        }
    }
    let verdict = if strong.disagree + weak.disagree == 0 { "ok" } else { "failed" };
    let text = format!(
        "strong: {} agree, {} disagree, {} inconclusive\nweak: {} agree, {} disagree, {} inconclusive\n",
        strong.agree, strong.disagree, strong.inconclusive, weak.agree, weak.disagree, weak.inconclusive
    );
    let payload = json!({ "strong": strong.json(), "weak": weak.json() });
    Ok((ResultRecord::new("selftest", json!({ "seed": seed, "count": count }), verdict, payload, Value::Null), text))
}
