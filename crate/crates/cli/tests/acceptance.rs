//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the test harness so the lines always show. Every criterion
//! runs even if an earlier one fails; the process exits nonzero if any did.

use ltw::analysis::{same_ordered, Direction};
use ltw::corpus::{chain, mutate, periodic_run_pair, random_ltw, shuffle_calls, CorpusParams};
use ltw::equivalence::separates;
use ltw::format::{parse_ltw, print_ltw};
use ltw::normalize::{erase_order, make_state_earliest};
use ltw::oracle::{brute_equiv_jobs, enumerate_trees, BruteVerdict, EnumerationBudget, Exhaustion};
use ltw::word::{Length, SlpPool, WordRef};
use ltw::{decide_equiv, partial_normal_form, Ltw, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");

fn fixture(name: &str) -> PathBuf {
    Path::new(FIXTURES).join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn scratch() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ltw-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Runs the binary; returns its output and wall time.
fn ltw(args: &[&str]) -> (Output, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_ltw")).args(args).output().unwrap();
    (out, start.elapsed())
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn example_three() -> Outcome {
    let out = scratch().join("ex3.pnf.ltw");
    let (o, t) = ltw(&["normalize", path(&fixture("ex3.ltw")), "-o", path(&out)]);
    ensure(o.status.code() == Some(0), || format!("exit {:?}", o.status.code()))?;
    let got = std::fs::read_to_string(&out).unwrap();
    ensure(got == read("ex4.golden.ltw"), || format!("output differs:\n{got}"))?;
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("golden match in {t:?}"))
}

fn example_six() -> Outcome {
    let (o, t) = ltw(&["analyze", path(&fixture("ex6.ltw")), "--part", "r:h:1", "--show-tq"]);
    ensure(o.status.code() == Some(0), || format!("exit {:?}", o.status.code()))?;
    let text = stdout(&o);
    let (first, tq) = text.split_once('\n').unwrap_or((&text, ""));
    ensure(first == "part r h 1: quasi-periodic(left): handle=bc period=abc", || first.to_string())?;
    ensure(tq == read("ex6.tq.golden.ltw"), || format!("T^q differs:\n{tq}"))?;
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("handle=bc period=abc, test transducer matches, {t:?}"))
}

fn example_five_erase_order() -> Outcome {
    let m = parse_ltw(&read("ex5.ltw")).map_err(|e| e.to_string())?;
    let printed = print_ltw(&erase_order(&m));
    let line = "rule q0 f(x1,x2,x3,x4) = q2(x3) q4(x1) q1(x2) q1(x4)\n";
    ensure(printed.contains(line), || printed.clone())?;
    let expected = read("ex5a.ltw");
    let expected: String = expected.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    ensure(printed == expected, || printed.clone())?;
    Ok("q1(x4) q2(x3) q1(x2) q4(x1) becomes q2(x3) q4(x1) q1(x2) q1(x4)".into())
}

fn example_seven() -> Outcome {
    let out = scratch().join("ex7.pnf.ltw");
    let ex7 = fixture("ex7.ltw");
    let (o, _) = ltw(&["normalize", path(&ex7), "-o", path(&out)]);
    ensure(o.status.code() == Some(0), || format!("normalize exit {:?}", o.status.code()))?;
    let got = std::fs::read_to_string(&out).unwrap();
    for line in ["rule q h(x1,x2) = \"b\" q2(x1) q1__e(x2)\n", "rule q1__e f(x1) = \"cabcab\" q1__e(x1)\n"] {
        ensure(got.contains(line), || format!("missing {line:?} in\n{got}"))?;
    }
    let (o, _) = ltw(&["check", path(&ex7), path(&out)]);
    ensure(o.status.code() == Some(0), || format!("check exit {:?}: {}", o.status.code(), stdout(&o)))?;
    let (o, _) = ltw(&["oracle", path(&ex7), path(&out), "--depth", "4"]);
    ensure(o.status.code() == Some(0), || format!("oracle exit {:?}: {}", o.status.code(), stdout(&o)))?;
    let mutated = fixture("ex7_mutated.ltw");
    let (c, _) = ltw(&["check", path(&ex7), path(&mutated)]);
    let (b, _) = ltw(&["oracle", path(&ex7), path(&mutated), "--depth", "4"]);
    ensure(c.status.code() == Some(1) && b.status.code() == Some(1), || "mutation not separated".into())?;
    Ok("normal form as expected, check exit 0, oracle agrees at depth 4".into())
}

fn example_five_orders() -> Outcome {
    let (a, b) = (fixture("ex5a.ltw"), fixture("ex5b.ltw"));
    let (o, _) = ltw(&["check", path(&a), path(&b)]);
    ensure(o.status.code() == Some(0), || format!("check exit {:?}: {}", o.status.code(), stdout(&o)))?;
    let pa = partial_normal_form(&parse_ltw(&read("ex5a.ltw")).unwrap()).unwrap().0;
    let pb = partial_normal_form(&parse_ltw(&read("ex5b.ltw")).unwrap()).unwrap().0;
    same_ordered(&pa, &pb).map_err(|e| format!("{e:?}"))?;
    Ok("equivalent, normal forms same-ordered".into())
}

#[cfg(unix)]
fn children_peak_kb() -> i64 {
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    // SAFETY: getrusage fills the struct we own.
    unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage) };
    usage.ru_maxrss
}

fn compression_and_scaling() -> Outcome {
    let ex1 = fixture("ex1.ltw");
    let out = scratch().join("ex1.pnf.ltw");
    let start = Instant::now();
    let (n, _) = ltw(&["normalize", path(&ex1), "-o", path(&out)]);
    let (c, _) = ltw(&["check", path(&ex1), path(&out)]);
    let (r, _) = ltw(&["run", path(&ex1), "--tree", "g", "--max-len", "16"]);
    let elapsed = start.elapsed();
    for (what, o) in [("normalize", &n), ("check", &c), ("run", &r)] {
        ensure(o.status.code() == Some(0), || format!("{what} exit {:?}", o.status.code()))?;
    }
    let expected = format!("length: {}", Length::from(1u8) << 60usize);
    ensure(stdout(&r).lines().any(|l| l == expected), || stdout(&r))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    let peak = children_peak_kb();
    ensure(peak < 200 * 1024, || format!("peak {peak} KB"))?;

    let mut times = Vec::new();
    for k in [10, 20, 40, 80] {
        let m = chain(k);
        let best = (0..3)
            .map(|_| {
                let start = Instant::now();
                let (out, _) = partial_normal_form(&m).unwrap();
                (start.elapsed(), out)
            })
            .min_by_key(|(t, _)| *t)
            .unwrap();
        let bound = m.num_states() + m.call_sites();
        ensure(best.1.num_states() <= bound, || format!("k={k}: {} states > {bound}", best.1.num_states()))?;
        times.push(best.0);
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1].as_secs_f64() / w[0].as_secs_f64()).collect();
    ensure(ratios.iter().all(|&r| r <= 8.0), || format!("doubling ratios {ratios:.2?}"))?;
    Ok(format!(
        "example 1 in {elapsed:?}, peak {} MB, length 2^60; chain ratios {ratios:.2?}",
        peak / 1024
    ))
}

fn oracle_budget() -> EnumerationBudget {
    EnumerationBudget {
        depth: 5,
        max_trees: 2_000_000,
        max_word: 100_000,
    }
}

fn explicit(m: &Ltw, t: &Tree) -> Option<Vec<u8>> {
    m.domain_defined(t).then(|| m.evaluate_explicit(t, 1_000_000).unwrap())
}

/// Whether checker and oracle agree on a pair; deeper witnesses than the
/// oracle's bound must separate under explicit evaluation.
fn agrees(a: &Ltw, b: &Ltw, jobs: usize) -> Result<bool, String> {
    let verdict = decide_equiv(a, b).map_err(|e| e.to_string())?;
    if let Some(w) = verdict.witness() {
        if explicit(a, w) == explicit(b, w) || !separates(a, b, w).unwrap() {
            return Err(format!("witness {w} does not separate"));
        }
    }
    Ok(match brute_equiv_jobs(a, b, oracle_budget(), jobs).map_err(|e| e.to_string())? {
        BruteVerdict::NoDifference { stopped_by, .. } => {
            stopped_by != Exhaustion::Trees
                && (verdict.is_equivalent() || verdict.witness().is_some_and(|w| w.height() > 5))
        }
        BruteVerdict::Difference { .. } => !verdict.is_equivalent() && verdict.witness().is_some(),
    })
}

fn oracle_agreement() -> Outcome {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs: Vec<(&str, Ltw, Ltw)> = Vec::new();
    for i in 0..60 {
        let p = CorpusParams {
            output: [&b"a"[..], b"ab", b"abc"][i % 3],
            ..CorpusParams::default()
        };
        let m = random_ltw(&mut rng, &p);
        let (pnf, _) = partial_normal_form(&m).map_err(|e| e.to_string())?;
        pairs.push(("mutated", m.clone(), mutate(&mut rng, &m, &p)));
        pairs.push(("pnf", m.clone(), pnf.clone()));
        pairs.push(("mutated pnf", pnf.clone(), mutate(&mut rng, &pnf, &p)));
        if let Some(s) = shuffle_calls(&mut rng, &m) {
            pairs.push(("shuffled", m.clone(), s));
        }
        let (a, b) = periodic_run_pair(&mut rng, &p);
        pairs.push(("periodic run", a, b));
    }
    let (mut equivalent, mut failures) = (0, Vec::new());
    for (kind, a, b) in &pairs {
        match agrees(a, b, jobs) {
            Ok(true) => equivalent += usize::from(decide_equiv(a, b).unwrap().is_equivalent()),
            Ok(false) => failures.push(format!("{kind}:\n{}---\n{}", print_ltw(a), print_ltw(b))),
            Err(e) => failures.push(format!("{kind}: {e}")),
        }
    }
    // a few pairs through the binary as well
    let dir = scratch();
    for (i, (_, a, b)) in pairs.iter().take(12).enumerate() {
        let (pa, pb) = (dir.join(format!("a{i}.ltw")), dir.join(format!("b{i}.ltw")));
        std::fs::write(&pa, print_ltw(a)).unwrap();
        std::fs::write(&pb, print_ltw(b)).unwrap();
        let (c, _) = ltw(&["check", path(&pa), path(&pb)]);
        let (o, _) = ltw(&["oracle", path(&pa), path(&pb), "--depth", "5", "--max-trees", "2000000"]);
        if c.status.code() != o.status.code() {
            failures.push(format!("binary disagrees on pair {i}: {}{}", stdout(&c), stdout(&o)));
        }
    }
    ensure(pairs.len() >= 200, || format!("only {} pairs", pairs.len()))?;
    ensure(failures.is_empty(), || format!("{} disagreements, first:\n{}", failures.len(), failures[0]))?;
    Ok(format!("{} pairs agree ({equivalent} equivalent)", pairs.len()))
}

/// Random pool operations checked against explicit words.
fn word_differential(cases: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..cases {
        let mut pool = SlpPool::with_seed(rng.gen());
        if rng.gen_bool(0.5) {
            pool.set_cap(3);
        }
        let mut words: Vec<(WordRef, Vec<u8>)> = vec![(pool.empty(), Vec::new())];
        for _ in 0..rng.gen_range(1..16) {
            let (x, xs) = words[rng.gen_range(0..words.len())].clone();
            let (y, ys) = words[rng.gen_range(0..words.len())].clone();
            let k = rng.gen_range(0..=xs.len());
            let next = match rng.gen_range(0..7) {
                0 => {
                    let s: Vec<u8> = (0..rng.gen_range(0..5)).map(|_| b"ab"[rng.gen_range(0..2)]).collect();
                    (pool.literal(&s), s)
                }
                1 => (pool.concat(x, y), [xs, ys].concat()),
                2 => (pool.strip_prefix(x, &k.into()).unwrap(), xs[k..].to_vec()),
                3 => (pool.suffix(x, &k.into()).unwrap(), xs[xs.len() - k..].to_vec()),
                4 => {
                    let n = rng.gen_range(0..50usize);
                    let mut r = xs.clone();
                    if !r.is_empty() {
                        let len = r.len();
                        r.rotate_left(n % len);
                    }
                    (pool.rotate_left(x, &n.into()), r)
                }
                5 => (pool.reverse(x), xs.iter().rev().copied().collect()),
                _ => {
                    let n = rng.gen_range(0..4usize);
                    (pool.power(x, &n.into()), xs.repeat(n))
                }
            };
            words.push(next);
        }
        for (w, s) in &words {
            ensure(pool.symbols(*w).collect::<Vec<_>>() == *s, || format!("case {case}: expansion"))?;
            for (v, t) in &words {
                ensure(pool.equals(*w, *v) == (s == t), || format!("case {case}: equality"))?;
            }
            let root = pool.primitive_root(*w).unwrap();
            let n = s.len();
            let d = (1..=n.max(1)).find(|&d| n == 0 || (n % d == 0 && s.chunks(d).all(|c| c == &s[..d]))).unwrap();
            ensure(pool.symbols(root).collect::<Vec<_>>() == s[..d.min(n)], || format!("case {case}: root"))?;
        }
    }
    Ok(())
}

fn rotation_laws() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..500 {
        let mut pool = SlpPool::new();
        let base = pool.literal(&(0..rng.gen_range(1..5)).map(|_| b"abc"[rng.gen_range(0..3)]).collect::<Vec<_>>());
        let w = pool.power(base, &(Length::from(1u8) << rng.gen_range(0..50usize)));
        let (n, m) = (Length::from(rng.gen::<u64>()), Length::from(rng.gen::<u64>()));
        let twice = {
            let once = pool.rotate_left(w, &n);
            ensure(pool.len(once) == pool.len(w), || "rotation changed the length".into())?;
            pool.rotate_left(once, &m)
        };
        let sum = pool.rotate_left(w, &(&n + &m));
        ensure(pool.equals(twice, sum), || "rotations do not compose".into())?;
        let len = pool.len(w).clone();
        let full = pool.rotate_left(w, &len);
        ensure(pool.equals(full, w), || "full rotation is not the identity".into())?;
    }
    Ok(())
}

fn law_corpus() -> Vec<Ltw> {
    let mut out: Vec<Ltw> = ["ex3.ltw", "ex5.ltw", "ex5a.ltw", "ex6.ltw", "ex7.ltw", "ex7_mutated.ltw"]
        .iter()
        .map(|f| parse_ltw(&read(f)).unwrap())
        .collect();
    out.extend((1..=5).map(chain));
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..60 {
        let p = CorpusParams {
            output: [&b"a"[..], b"ab", b"abc"][i % 3],
            ..CorpusParams::default()
        };
        out.push(random_ltw(&mut rng, &p));
    }
    out
}

/// Handle, length and period laws on every earliest construction.
fn earliest_laws(corpus: &[Ltw]) -> Result<usize, String> {
    let budget = EnumerationBudget {
        depth: 5,
        max_trees: 200_000,
        max_word: 1_000_000,
    };
    let mut applications = 0;
    for m in corpus {
        let mut m = m.clone();
        let sw = ltw::analysis::ShortestWords::compute(&mut m);
        for q in m.states().collect::<Vec<_>>() {
            for dir in [Direction::Left, Direction::Right] {
                let Some(v) = ltw::analysis::quasi_periodicity(&mut m, q, dir).map_err(|e| e.to_string())? else { continue };
                if v.is_earliest(m.pool()) {
                    continue;
                }
                applications += 1;
                let out = make_state_earliest(&m, q, &v).map_err(|e| e.to_string())?;
                let handle = m.pool().expand(v.handle, 1_000_000).unwrap();
                let pi = m.pool().expand(v.period, 1_000_000).unwrap();
                let copy = out.state(&format!("{}__e", m.state_name(q))).ok_or("no copy of q")?;
                let shortest = sw.len(q).unwrap().to_string().parse::<usize>().unwrap();
                for t in &enumerate_trees(&m, q, budget).trees {
                    let old = m.evaluate_state_explicit(q, t, 1_000_000).unwrap();
                    let new = out.evaluate_state_explicit(copy, t, 1_000_000).unwrap();
                    let joined = match dir {
                        Direction::Left => [handle.as_slice(), &new].concat(),
                        Direction::Right => [new.as_slice(), &handle].concat(),
                    };
                    ensure(joined == old, || format!("handle law fails on {t}"))?;
                    ensure(new.len() + shortest == old.len(), || format!("length law fails on {t}"))?;
                    let in_period = pi.is_empty() && new.is_empty()
                        || !pi.is_empty() && new.len() % pi.len() == 0 && new.chunks(pi.len()).all(|c| c == pi);
                    ensure(in_period, || format!("period law fails on {t}"))?;
                }
            }
        }
    }
    Ok(applications)
}

fn stages_preserve(corpus: &[Ltw]) -> Result<(), String> {
    use ltw::normalize::{eliminate_quasi_periodic_states, make_rule_parts_earliest, merge_congruent, reorder_periodic_runs};
    for m in corpus {
        let s1 = eliminate_quasi_periodic_states(m).unwrap().0;
        let s2 = erase_order(&s1);
        let s3 = make_rule_parts_earliest(&s2).unwrap();
        let s4 = reorder_periodic_runs(&s3).unwrap();
        let s5 = merge_congruent(&s4).unwrap();
        for (stage, (a, b)) in [m, &s1, &s2, &s3, &s4].into_iter().zip([&s1, &s2, &s3, &s4, &s5]).enumerate() {
            if let BruteVerdict::Difference { witness, .. } = brute_equiv_jobs(a, b, oracle_budget(), 1).unwrap() {
                return Err(format!("stage {} changes the output on {witness}\n{}", stage + 1, print_ltw(m)));
            }
        }
    }
    Ok(())
}

fn invariant_suites() -> Outcome {
    word_differential(10_000)?;
    rotation_laws()?;
    let corpus = law_corpus();
    let applications = earliest_laws(&corpus)?;
    stages_preserve(&corpus)?;
    Ok(format!(
        "10000 word cases, 500 rotation cases, {applications} earliest constructions, {} transducers through every stage",
        corpus.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("example 3 to 4", example_three),
        ("example 6 rule part", example_six),
        ("example 5 erase order", example_five_erase_order),
        ("example 7 end to end", example_seven),
        ("order-different equivalence", example_five_orders),
        ("compression and scaling", compression_and_scaling),
        ("oracle agreement", oracle_agreement),
        ("invariant suites", invariant_suites),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    let _ = std::fs::remove_dir_all(scratch());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
