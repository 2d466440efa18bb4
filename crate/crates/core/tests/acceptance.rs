//! The acceptance criteria, one pass/fail line each. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::time::{Duration, Instant};

use common::{
    basic_independent, board_formula, board_propositional, board_system, family, laws, names,
    pairwise_independent, Model,
};
use epicomp::cli::{execute, ExitStatus};
use epicomp::composition::{
    check_independence, derive, IndependenceKind, Schema, SequentialSchema,
};
use epicomp::properties::{check_property, compile_property, PropertySpec};
use epicomp::scenarios::{
    exhaustive_sweep, mixer_chain, paper_system, random_sweep, ClaimBench, ClaimId, MixStage,
    PartitionPolicy, Shape, Universe,
};
use epicomp::sysfile::load_system;
use epicomp::{Action, AgentId, InterpretedSystem};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Runs one criterion and prints its line; `limit` bounds the wall time.
fn criterion(
    n: usize,
    name: &str,
    limit: Option<Duration>,
    body: impl FnOnce() -> Outcome,
) -> bool {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed < l);
    let pass = outcome.is_ok() && in_time;
    let limit_text = match limit {
        Some(l) => format!(", limit {} s", l.as_secs_f64()),
        None => String::new(),
    };
    let detail = match (&outcome, in_time) {
        (Ok(d), true) => d.clone(),
        (Ok(d), false) => format!("{d}; over time"),
        (Err(e), _) => e.clone(),
    };
    println!(
        "[{}] {n}. {name}: {detail} ({:.2} s{limit_text})",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn ids(v: &[String]) -> Vec<AgentId> {
    v.iter().map(AgentId::new).collect()
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.sys", env!("CARGO_MANIFEST_DIR"))
}

fn board_schema(sys: &InterpretedSystem) -> Schema {
    Schema::Sequential(SequentialSchema::bulletin_board(sys))
}

fn c3_1() -> Outcome {
    let sys = load_system(fixture("s12")).map_err(|e| e.to_string())?;
    let schema = board_schema(&sys);
    let j = AgentId::new("j");
    let report = ClaimBench::new(&sys, &schema, &j)
        .report(ClaimId::C3_1, &[])
        .map_err(|e| e.to_string())?;
    ensure(report.summary() == "confirmed (4/4 items)", || {
        report.summary()
    })?;

    let derived = derive(&sys, &schema).unwrap();
    let (ir, ip, c) = (names("i", 2), names("k", 2), names("c", 2));
    let m = Model::of(&sys);
    for i in &ir {
        for k in &ip {
            let spec = PropertySpec::anonymous_up_to(
                &AgentId::new(i),
                &Action::new("use", k),
                &ids(&ir),
                &j,
            );
            let lib = check_property(&sys, &spec).unwrap().holds;
            ensure(
                lib && m.anon_upto(i, &format!("use({k})"), &ir, "j"),
                || format!("{spec} fails"),
            )?;
        }
    }
    let posts = family("post", &c);
    let post_actions: Vec<Action> = c.iter().map(|x| Action::new("post", x)).collect();
    for k in &ip {
        for x in &c {
            let spec = PropertySpec::private_up_to(
                &AgentId::new(k),
                &Action::new("post", x),
                &post_actions,
                &j,
            );
            let lib = check_property(&sys, &spec).unwrap().holds;
            ensure(
                lib && m.priv_upto(k, &format!("post({x})"), &posts, "j"),
                || format!("{spec} fails"),
            )?;
        }
    }

    let dm = m.with_submits(&ir, &ip, &c);
    let anon =
        PropertySpec::anonymous_up_to(&"i1".into(), &Action::new("submit", "c1"), &ids(&ir), &j);
    let r = check_property(&derived, &anon).unwrap();
    let conj = r.counterexample.as_ref().map(|x| x.conjunct.as_str());
    ensure(
        conj == Some("i2") && !dm.anon_upto("i1", "submit(c1)", &ir, "j"),
        || format!("{anon}: failing conjunct {conj:?}"),
    )?;
    let submits: Vec<Action> = c.iter().map(|x| Action::new("submit", x)).collect();
    let privacy =
        PropertySpec::private_up_to(&"i2".into(), &Action::new("submit", "c2"), &submits, &j);
    let r = check_property(&derived, &privacy).unwrap();
    let conj = r.counterexample.as_ref().map(|x| x.conjunct.as_str());
    ensure(
        conj == Some("submit(c1)") && !dm.priv_upto("i2", "submit(c2)", &family("submit", &c), "j"),
        || format!("{privacy}: failing conjunct {conj:?}"),
    )?;
    Ok(
        "4/4 items; submit(c1) anonymity fails on i2, submit(c2) privacy fails on submit(c1)"
            .into(),
    )
}

fn independence_examples() -> Outcome {
    let start = Instant::now();
    let s125678 = paper_system("s125678").map_err(|e| e.to_string())?;
    let s129_12 = paper_system("s129-12").map_err(|e| e.to_string())?;
    let reconstruction = start.elapsed();
    ensure(reconstruction < Duration::from_secs(60), || {
        format!("reconstruction took {:.1} s", reconstruction.as_secs_f64())
    })?;

    let start = Instant::now();
    let j = AgentId::new("j");
    let s12 = paper_system("s12").unwrap();
    let s1234 = paper_system("s1234").unwrap();
    let expected = [
        (&s12, IndependenceKind::Basic, false),
        (&s1234, IndependenceKind::Basic, true),
        (&s1234, IndependenceKind::Pairwise, true),
        (&s125678, IndependenceKind::Pairwise, false),
        (&s129_12, IndependenceKind::Pairwise, false),
        (&s125678, IndependenceKind::Basic, true),
        (&s129_12, IndependenceKind::Basic, true),
    ];
    for (sys, kind, want) in expected {
        let got = check_independence(sys, &j, &board_schema(sys), kind)
            .unwrap()
            .holds;
        let m = Model::of(sys);
        let oracle = match kind {
            IndependenceKind::Basic => basic_independent(&m),
            _ => pairwise_independent(&m),
        };
        ensure(got == want && oracle == want, || {
            format!(
                "{} {} independence: got {got}, oracle {oracle}",
                sys.name(),
                kind.keyword()
            )
        })?;
    }
    let checks = start.elapsed();
    ensure(checks < Duration::from_secs(1), || {
        format!("checks took {:.2} s", checks.as_secs_f64())
    })?;
    Ok(format!(
        "7/7 independence verdicts exact; reconstruction {:.2} s (limit 60 s), checks {:.3} s (limit 1 s)",
        reconstruction.as_secs_f64(),
        checks.as_secs_f64()
    ))
}

fn sweep() -> Outcome {
    let theorems: Vec<ClaimId> = ClaimId::theorems().collect();
    let mut tally = exhaustive_sweep(&theorems, 2).map_err(|e| e.to_string())?;
    let exhaustive = tally.stats[&ClaimId::C3_2].systems;
    tally.merge(random_sweep(&theorems, 100_000, 3, 4, 20_240).map_err(|e| e.to_string())?);
    ensure(tally.total_refuted() == 0, || {
        let claims: Vec<String> = tally.refutations.keys().map(ToString::to_string).collect();
        format!("REFUTED: {}", claims.join(", "))
    })?;
    let (weakest, stats) = tally
        .stats
        .iter()
        .min_by_key(|(_, s)| s.confirmed)
        .expect("claims were swept");
    ensure(stats.confirmed >= 100, || {
        format!(
            "{weakest} has only {} non-vacuous confirmations",
            stats.confirmed
        )
    })?;
    let total: usize = tally.stats.values().map(|s| s.systems).sum();
    Ok(format!(
        "{} claims, 0 refuted, {total} claim checks ({exhaustive} exhaustive systems per shape + 10^5 random per shape), fewest confirmations {} ({weakest})",
        theorems.len(),
        stats.confirmed
    ))
}

fn run_cli(args: &[&str]) -> (ExitStatus, String) {
    execute(std::iter::once("epicomp").chain(args.iter().copied()))
}

fn machine_value(out: &str, key: &str) -> Option<String> {
    out.lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v.to_string())
}

fn necessity() -> Outcome {
    let mut slowest = Duration::ZERO;
    let mut found = Vec::new();
    let dir = std::env::temp_dir();
    for (claim, dropped) in [
        ("C3.2", "independence"),
        ("C4.2", "independence"),
        ("CA.1", "pairwise-independence"),
    ] {
        let path = dir.join(format!(
            "epicomp-acceptance-{}-{claim}.sys",
            std::process::id()
        ));
        let start = Instant::now();
        let (status, out) = run_cli(&[
            "--format",
            "machine",
            "search",
            claim,
            "--drop-hypothesis",
            dropped,
            "--budget",
            "10000",
            "-o",
            path.to_str().unwrap(),
        ]);
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        ensure(elapsed < Duration::from_secs(60), || {
            format!("{claim} search took {elapsed:?}")
        })?;
        ensure(
            status == ExitStatus::Fails
                && machine_value(&out, "verdict").as_deref() == Some("REFUTED"),
            || format!("{claim}: no counterexample\n{out}"),
        )?;
        let samples = machine_value(&out, "samples").unwrap_or_default();
        let sys = load_system(&path).map_err(|e| e.to_string())?;
        std::fs::remove_file(&path).ok();
        if claim == "C3.2" {
            let (ir, ip, c) = (names("i", 2), names("k", 2), names("c", 2));
            let m = Model::of(&sys);
            let d = m.with_submits(&ir, &ip, &c);
            let post_private = ip.iter().all(|k| {
                family("post", &c)
                    .iter()
                    .all(|a| m.priv_upto(k, a, &family("post", &c), "j"))
            });
            let submit_private = ir.iter().all(|i| {
                family("submit", &c)
                    .iter()
                    .all(|a| d.priv_upto(i, a, &family("submit", &c), "j"))
            });
            ensure(post_private && !submit_private, || {
                "C3.2 counterexample does not check out by brute force".into()
            })?;
        }
        found.push(format!("{claim} after {samples}"));
    }

    let start = Instant::now();
    let (status, out) = run_cli(&[
        "--format",
        "machine",
        "claims",
        "run",
        "CA.3",
        "--system",
        &fixture("s56"),
        "--drop-hypothesis",
        "exclusive-agent",
    ]);
    slowest = slowest.max(start.elapsed());
    ensure(
        status == ExitStatus::Fails && machine_value(&out, "verdict").as_deref() == Some("REFUTED"),
        || format!("CA.3 on s56 without agent exclusivity:\n{out}"),
    )?;
    let (_, out) = run_cli(&[
        "--format",
        "machine",
        "claims",
        "run",
        "CA.3",
        "--system",
        &fixture("s56"),
    ]);
    ensure(
        machine_value(&out, "verdict").as_deref() == Some("vacuous")
            && machine_value(&out, "hypothesis.4").as_deref() == Some("exclusive-agent:fails"),
        || format!("CA.3 on s56:\n{out}"),
    )?;
    found.push("CA.3 on s56".into());
    Ok(format!(
        "counterexamples for {}; slowest {:.2} s (limit 60 s each)",
        found.join(", "),
        slowest.as_secs_f64()
    ))
}

fn mixers() -> Outcome {
    let n = 3;
    let (ir, ip, c) = (names("i", n), names("k", n), names("c", n));
    let j = AgentId::new("j");
    let inverse = mixer_chain(
        n,
        &MixStage::All,
        &MixStage::InverseOfFirst,
        PartitionPolicy::SingleBlock,
    )
    .map_err(|e| e.to_string())?;
    let derived = derive(&inverse, &board_schema(&inverse)).unwrap();
    let m = Model::of(&inverse).with_submits(&ir, &ip, &c);
    ensure(Model::of(&derived).runs == m.runs, || {
        "derived facts differ from brute force".into()
    })?;
    let mut onymous = 0;
    for r in 0..m.runs.len() {
        for (i, a) in m.runs[r].iter().filter(|(_, a)| a.starts_with("submit")) {
            let action = Action::new(
                "submit",
                a.trim_start_matches("submit(").trim_end_matches(')'),
            );
            let lib = check_property(
                &derived,
                &PropertySpec::maximally_onymous(&AgentId::new(i), &action, &j),
            )
            .unwrap()
            .holds;
            ensure(lib && m.knows("j", r, |x| m.has(x, i, a)), || {
                format!("{i}:{a} not onymous")
            })?;
            onymous += 1;
        }
    }
    ensure(onymous == n * m.runs.len(), || {
        format!("{onymous} submit facts")
    })?;

    let all = mixer_chain(
        n,
        &MixStage::All,
        &MixStage::All,
        PartitionPolicy::SingleBlock,
    )
    .map_err(|e| e.to_string())?;
    let m = Model::of(&all).with_submits(&ir, &ip, &c);
    for i in &ir {
        for a in family("submit", &c) {
            ensure(m.anon_upto(i, &a, &ir, "j"), || {
                format!("{i}:{a} not anonymous up to I")
            })?;
            ensure((0..m.runs.len()).any(|r| m.has(r, i, &a)), || {
                format!("{i}:{a} never occurs")
            })?;
        }
    }
    Ok(format!(
        "inverse chain: {onymous} submit facts all maximally onymous; independent chain ({} runs): every submit anonymous up to {{i1,i2,i3}}",
        m.runs.len()
    ))
}

fn invariants() -> Outcome {
    fn run<S: Strategy>(
        cases: u32,
        strategy: S,
        test: impl Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
    ) -> Result<(), String> {
        let mut runner = TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        runner.run(&strategy, test).map_err(|e| e.to_string())
    }
    let pair = || (board_system(), board_formula());
    run(500, pair(), |(s, f)| laws::agrees_with_oracle(&s, &f))
        .map_err(|e| format!("oracle: {e}"))?;
    run(500, pair(), |(s, f)| laws::duality(&s, &f)).map_err(|e| format!("duality: {e}"))?;
    run(500, pair(), |(s, f)| laws::veridicality(&s, &f))
        .map_err(|e| format!("veridicality: {e}"))?;
    run(500, board_system(), |s| laws::kernel_partition(&s)).map_err(|e| format!("kernel: {e}"))?;
    run(500, (board_system(), board_propositional()), |(s, f)| {
        laws::coarsening(&s, &f)
    })
    .map_err(|e| format!("block merge: {e}"))?;
    run(1000, board_formula(), |f| laws::round_trip(&f)).map_err(|e| format!("round trip: {e}"))?;
    run(500, pair(), |(s, f)| laws::derivation_preserves(&s, &f))
        .map_err(|e| format!("derivation: {e}"))?;
    Ok("duality, veridicality, kernel laws, block merge, 1000 parse/render round trips, derivation preservation".into())
}

fn equivalence_pairs() -> Outcome {
    let j = AgentId::new("j");
    let mut specs = 0usize;
    for shape in [Shape::Sequential, Shape::Parallel] {
        let u = Universe::for_shape(shape, 2, 2, 2);
        for sys in u.exhaustive(2) {
            for agent in sys.agent_ids() {
                for a in sys.actions() {
                    let pairs = [
                        (
                            PropertySpec::minimally_private(agent, a, &j),
                            PropertySpec::minimally_anonymous(agent, a, &j),
                        ),
                        (
                            PropertySpec::maximally_identified(agent, a, &j),
                            PropertySpec::maximally_onymous(agent, a, &j),
                        ),
                    ];
                    for (x, y) in pairs {
                        let (fx, fy) = (
                            compile_property(&sys, &x).unwrap(),
                            compile_property(&sys, &y).unwrap(),
                        );
                        ensure(fx == fy, || format!("{x} and {y} differ on {}", sys.name()))?;
                        specs += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{specs} spec pairs compile to identical formulas"))
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "C3.1 on the bundled s12", Some(secs(1)), c3_1),
        criterion(
            2,
            "independence of s12, s1234, s125678, s129-12",
            None,
            independence_examples,
        ),
        criterion(3, "theorem sweep", Some(secs(600)), sweep),
        criterion(4, "necessity of dropped hypotheses", None, necessity),
        criterion(5, "mixer chains", Some(secs(5)), mixers),
        criterion(6, "semantic invariants", Some(secs(60)), invariants),
        criterion(
            7,
            "paired notions compile identically",
            None,
            equivalence_pairs,
        ),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    assert_eq!(passed, results.len());
}
