use std::fs;
use std::path::{Path, PathBuf};

use ocnsim::fixtures::test_chain;
use ocnsim::net::{Config, Ext};
use ocnsim::random::{random_pair, rng, NetShape};
use ocnsim::strong::StrongSolver;
use ocnsim_cli::commands::budget_of;
use ocnsim_cli::run;
use ocnsim_cli::text::{parse_net, serialize_net};
use proptest::prelude::*;
use serde_json::Value;

fn nets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../nets")
}

fn net(name: &str) -> String {
    nets().join(name).to_string_lossy().into_owned()
}

fn ocnsim(args: &[&str]) -> ocnsim_cli::commands::Outcome {
    run(std::iter::once("ocnsim").chain(args.iter().copied()))
}

fn read_pgm(path: &Path) -> (usize, usize, Vec<Vec<u8>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut it = text.split_whitespace();
    assert_eq!(it.next(), Some("P2"));
    let w: usize = it.next().unwrap().parse().unwrap();
    let h: usize = it.next().unwrap().parse().unwrap();
    assert_eq!(it.next(), Some("255"));
    let vals: Vec<u8> = it.map(|v| v.parse().unwrap()).collect();
    assert_eq!(vals.len(), w * h);
    (w, h, vals.chunks(w).map(|r| r.to_vec()).collect())
}

#[test]
fn documented_examples() {
    assert_eq!(ocnsim(&["strong", &net("ex2.net"), "p:3", &net("ex2.net"), "p:5"]).code, 0);
    assert_eq!(ocnsim(&["strong", &net("ex2.net"), "p:5", &net("ex2.net"), "p:3"]).code, 1);
    assert_eq!(ocnsim(&["weak", &net("aloop.net"), "A:0", &net("bc.net"), "B:0"]).code, 1);
    let bad = ocnsim(&["strong", &net("ex2.net"), "p:1", &net("ex2.net"), "q:0"]);
    assert_eq!(bad.code, 3);
    assert!(bad.stderr.contains("unknown state `q`"), "{}", bad.stderr);
    assert_eq!(ocnsim(&["strong", &net("missing.net"), "p:1", &net("ex2.net"), "p:0"]).code, 3);
    assert_eq!(ocnsim(&["frobnicate"]).code, 3);
    assert_eq!(ocnsim(&["--help"]).code, 0);
}

#[test]
fn exit_codes_match_json_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    let (ex2, aloop, bc, ladder) = (net("ex2.net"), net("aloop.net"), net("bc.net"), net("ladder2.net"));
    let cases: Vec<Vec<String>> = vec![
        vec!["strong".into(), ex2.clone(), "p:3".into(), ex2.clone(), "p:5".into()],
        vec!["strong".into(), ex2.clone(), "p:6".into(), ex2.clone(), "p:5".into()],
        vec!["strong".into(), ex2.clone(), "p:6".into(), ex2.clone(), "x:5".into()],
        vec!["weak".into(), aloop.clone(), "A:0".into(), bc.clone(), "B:0".into()],
        vec!["weak".into(), ex2.clone(), "p:2".into(), ex2.clone(), "p:0".into()],
        vec!["weak".into(), aloop.clone(), "A:0".into(), ladder.clone(), "B2:0".into()],
        vec!["belts".into(), ex2.clone(), ex2.clone()],
        vec!["suff".into(), ex2.clone(), ex2.clone()],
        vec!["slope".into(), ex2.clone(), ex2.clone(), "--pair".into(), "p,p".into(), "--slope".into(), "1/2".into()],
        vec!["slope".into(), ex2.clone(), ex2.clone(), "--pair".into(), "p,p".into(), "--slope".into(), "0/0".into()],
        vec!["oracle".into(), "strong".into(), ex2.clone(), "p:4".into(), ex2.clone(), "p:2".into()],
        vec!["oracle".into(), "strong".into(), ex2.clone(), "p:2".into(), ex2.clone(), "p:4".into(), "--mode".into(), "opt".into()],
        vec!["oracle".into(), "weak".into(), aloop.clone(), "A:0".into(), bc.clone(), "B:0".into(), "--rounds".into(), "3".into()],
        vec!["oracle".into(), "strong".into(), ex2.clone(), "p:99".into(), ex2.clone(), "p:4".into()],
        vec!["reduce-weak".into(), aloop.clone(), bc.clone(), "-o".into(), out("red")],
        vec!["normalize".into(), ex2.clone(), bc.clone()],
        vec!["plot".into(), ex2.clone(), ex2.clone(), "--pair".into(), "p,p".into(), "--max".into(), "4".into(), "-o".into(), out("p.pgm")],
        vec!["selftest".into(), "--count".into(), "2".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let text = ocnsim(&args);
        let mut with_json = args.clone();
        with_json.push("--json");
        let json = ocnsim(&with_json);
        assert_eq!(text.code, json.code, "{args:?}");
        let record: Value = serde_json::from_str(&json.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", json.stdout));
        let expected = match record["verdict"].as_str().unwrap() {
            "simulated" | "ok" => 0,
            "not-simulated" | "failed" => 1,
            "unknown" => 2,
            _ => 3,
        };
        assert_eq!(json.code, expected, "{args:?}");
        assert_eq!(record["tool"], "ocnsim");
        assert!(record.get("query").is_some() && record.get("payload").is_some() && record.get("stats").is_some());
    }
}

#[test]
fn plot_pixels_match_requeries() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ex2.pgm");
    let o = ocnsim(&["plot", &net("ex2.net"), &net("ex2.net"), "--pair", "p,p", "--max", "20", "-o", file.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let (w, h, px) = read_pgm(&file);
    assert_eq!((w, h), (21, 21));
    for (row, line) in px.iter().enumerate() {
        let n2 = 20 - row;
        for (n, &v) in line.iter().enumerate() {
            assert_eq!(v, if n <= n2 { 255 } else { 0 }, "pixel ({n}, {n2})");
        }
    }

    let single = dir.path().join("one.pgm");
    ocnsim(&["plot", &net("ex2.net"), &net("bc.net"), "--pair", "p,B", "--max", "0", "-o", single.to_str().unwrap()]);
    let (w, h, _) = read_pgm(&single);
    assert_eq!((w, h), (1, 1));
}

#[test]
fn test_chain_plots_split_vertically() {
    let dir = tempfile::tempdir().unwrap();
    for i in [0u64, 2, 5] {
        let (t, u) = test_chain(Ext::Fin(i));
        let (tf, uf) = (dir.path().join(format!("t{i}.net")), dir.path().join(format!("u{i}.net")));
        fs::write(&tf, serialize_net(&t)).unwrap();
        fs::write(&uf, serialize_net(&u)).unwrap();
        let img = dir.path().join(format!("c{i}.pgm"));
        let o = ocnsim(&["plot", tf.to_str().unwrap(), uf.to_str().unwrap(), "--pair", "t0,u", "--max", "10", "-o", img.to_str().unwrap()]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let (_, _, px) = read_pgm(&img);
        for line in &px {
            for (n, &v) in line.iter().enumerate() {
                assert_eq!(v, if (n as u64) < i { 255 } else { 0 }, "chain {i}, column {n}");
            }
        }
    }
}

#[test]
fn random_plots_match_requeries() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..6u64 {
        let (l, r) = random_pair(&mut rng(seed), NetShape::SMALL);
        let (lf, rf) = (dir.path().join(format!("l{seed}.net")), dir.path().join(format!("r{seed}.net")));
        fs::write(&lf, serialize_net(&l)).unwrap();
        fs::write(&rf, serialize_net(&r)).unwrap();
        let img = dir.path().join(format!("r{seed}.pgm"));
        let o = ocnsim(&["plot", lf.to_str().unwrap(), rf.to_str().unwrap(), "--pair", "p0,q0", "--max", "8", "-o", img.to_str().unwrap()]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let (_, _, px) = read_pgm(&img);
        let mut solver = StrongSolver::new(&l, &r, budget_of(512)).unwrap();
        for (row, line) in px.iter().enumerate() {
            for (n, &v) in line.iter().enumerate() {
                let holds = solver.decide(Config::new(0, n as u64), Config::new(0, 8 - row as u64)).unwrap().holds();
                let want = match holds {
                    Some(true) => 255,
                    Some(false) => 0,
                    None => 128,
                };
                assert_eq!(v, want, "seed {seed}, pixel ({n}, {})", 8 - row);
            }
        }
    }
}

#[test]
fn emitted_approximants_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("approx");
    let o = ocnsim(&["weak", &net("aloop.net"), "A:0", &net("bc.net"), "B:0", "--emit-approximants", out.to_str().unwrap()]);
    assert_eq!(o.code, 1);
    assert!(out.join("S1.net").exists() && out.join("S1-dup.net").exists());
    let history: Value = serde_json::from_str(&fs::read_to_string(out.join("suff.json")).unwrap()).unwrap();
    assert!(history[0].as_array().unwrap().iter().all(|row| row["suff"] == "w"));
}

#[test]
fn fixed_seed_output_is_byte_identical() {
    let a = ocnsim(&["selftest", "--count", "3", "--seed", "11", "--json"]);
    let b = ocnsim(&["selftest", "--count", "3", "--seed", "11", "--json"]);
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn parsing_is_total(text in "[a-z0-9:+@# \\-\\$w\n]{0,120}") {
        if let Err(e) = parse_net(&text) {
            prop_assert!(e.line >= 1 && e.line <= text.lines().count().max(1));
            prop_assert!(e.column >= 1);
        }
    }

    #[test]
    fn mangled_files_give_located_errors(seed in any::<u64>(), cut in 0usize..200, junk in "[ a-z0-9+\\-w@$#:]{0,6}") {
        let (l, _) = random_pair(&mut rng(seed), NetShape::SMALL_WEAK);
        let mut text = serialize_net(&l);
        let at = text.char_indices().map(|(i, _)| i).nth(cut % text.len().max(1)).unwrap_or(text.len());
        text.insert_str(at, &junk);
        if let Err(e) = parse_net(&text) {
            prop_assert!(e.line >= 1 && e.line <= text.lines().count().max(1));
        }
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let (l, r) = random_pair(&mut rng(seed), NetShape::SMALL_WEAK);
        for n in [l, r] {
            let text = serialize_net(&n);
            let back = parse_net(&text).unwrap();
            prop_assert_eq!(back.states(), n.states());
            prop_assert_eq!(back.actions(), n.actions());
            prop_assert_eq!(back.transitions(), n.transitions());
            prop_assert_eq!(serialize_net(&back), text);
        }
    }
}
