//! `decide_equiv` against brute-force enumeration on random pairs.

use ltw::corpus::{mutate, periodic_run_pair, random_ltw, shuffle_calls, CorpusParams};
use ltw::equivalence::separates;
use ltw::format::print_ltw;
use ltw::oracle::{brute_equiv_jobs, BruteVerdict, EnumerationBudget, Exhaustion};
use ltw::{decide_equiv, partial_normal_form, Ltw, Tree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn budget() -> EnumerationBudget {
    EnumerationBudget {
        depth: 5,
        max_trees: 2_000_000,
        max_word: 100_000,
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn explicit(m: &Ltw, t: &Tree) -> Option<Vec<u8>> {
    m.domain_defined(t).then(|| m.evaluate_explicit(t, 1_000_000).unwrap())
}

/// The checker's verdict must be consistent with the oracle at depth 5: a
/// difference found by the oracle must be reported, and a witness deeper than
/// the oracle's bound must separate under explicit evaluation.
fn agree(a: &Ltw, b: &Ltw) {
    let verdict = decide_equiv(a, b).unwrap();
    let context = || format!("{verdict:?}\n{}---\n{}", print_ltw(a), print_ltw(b));
    if let Some(w) = verdict.witness() {
        assert!(separates(a, b, w).unwrap(), "{}", context());
    }
    match brute_equiv_jobs(a, b, budget(), jobs()).unwrap() {
        BruteVerdict::NoDifference { stopped_by, .. } => {
            assert_ne!(stopped_by, Exhaustion::Trees);
            if !verdict.is_equivalent() {
                let w = verdict.witness().unwrap_or_else(|| panic!("no witness\n{}", context()));
                assert!(w.height() > budget().depth, "{}", context());
                assert_ne!(explicit(a, w), explicit(b, w), "{}", context());
            }
        }
        BruteVerdict::Difference { witness, .. } => {
            assert!(!verdict.is_equivalent(), "oracle separates on {witness}\n{}", context());
            assert!(verdict.witness().is_some(), "{}", context());
        }
    }
}

#[test]
fn random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let p = CorpusParams::default();
    for _ in 0..80 {
        let m = random_ltw(&mut rng, &p);
        let n = mutate(&mut rng, &m, &p);
        agree(&m, &n);
        let (pnf, _) = partial_normal_form(&m).unwrap();
        agree(&m, &pnf);
        agree(&pnf, &n);
        if let Some(s) = shuffle_calls(&mut rng, &m) {
            agree(&m, &s);
        }
    }
}

#[test]
fn periodic_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let p = CorpusParams::default();
    for _ in 0..40 {
        let (a, b) = periodic_run_pair(&mut rng, &p);
        agree(&a, &b);
    }
}
