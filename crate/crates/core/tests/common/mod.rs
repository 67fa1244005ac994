//! The transducer corpus shared by the law suites.

#![allow(dead_code)]

use ltw::corpus::{chain, periodic_run_pair, random_ltw, CorpusParams};
use ltw::format::parse_ltw;
use ltw::Ltw;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: [(&str, &str); 10] = [
    ("ex1", include_str!("../../fixtures/ex1.ltw")),
    ("ex3", include_str!("../../fixtures/ex3.ltw")),
    ("ex4", include_str!("../../fixtures/ex4.golden.ltw")),
    ("ex5", include_str!("../../fixtures/ex5.ltw")),
    ("ex5a", include_str!("../../fixtures/ex5a.ltw")),
    ("ex5b", include_str!("../../fixtures/ex5b.ltw")),
    ("ex6", include_str!("../../fixtures/ex6.ltw")),
    ("ex7", include_str!("../../fixtures/ex7.ltw")),
    ("ex7-golden", include_str!("../../fixtures/ex7.golden.ltw")),
    ("ex7-mutated", include_str!("../../fixtures/ex7_mutated.ltw")),
];

/// Fixtures, short chains, and random transducers. `explicit` drops the
/// fixtures whose outputs are too long to write out.
pub fn corpus(random: usize, explicit: bool) -> Vec<(String, Ltw)> {
    let mut out: Vec<(String, Ltw)> = FIXTURES
        .iter()
        .filter(|(name, _)| !explicit || *name != "ex1")
        .map(|(name, text)| (name.to_string(), parse_ltw(text).unwrap()))
        .collect();
    for k in 1..=4 {
        out.push((format!("chain{k}"), chain(k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (i, output) in [&b"a"[..], b"ab", b"abc"].into_iter().cycle().take(random).enumerate() {
        let p = CorpusParams {
            output,
            ..CorpusParams::default()
        };
        out.push((format!("random{i}"), random_ltw(&mut rng, &p)));
        if i % 4 == 0 {
            let (a, b) = periodic_run_pair(&mut rng, &p);
            out.push((format!("run{i}a"), a));
            out.push((format!("run{i}b"), b));
        }
    }
    out
}
