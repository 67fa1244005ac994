//! Random transducers for differential testing, and the scaling chain.

use crate::ltw::{Axiom, Call, Ltw, RankedAlphabet, Rule, StateId, SymbolId};
use crate::word::SlpPool;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Copy, Debug)]
pub struct CorpusParams {
    pub max_states: usize,
    /// 1 gives the alphabet `f:1 g:0`, 2 adds `h:2`.
    pub max_arity: usize,
    pub max_word: usize,
    pub output: &'static [u8],
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_states: 6,
            max_arity: 2,
            max_word: 4,
            output: b"ab",
        }
    }
}

fn alphabet(max_arity: usize) -> RankedAlphabet {
    let mut a = RankedAlphabet::new();
    if max_arity >= 2 {
        a.add("h", 2).expect("fresh alphabet");
    }
    a.add("f", 1).expect("fresh alphabet");
    a.add("g", 0).expect("fresh alphabet");
    a
}

fn random_word<R: Rng>(rng: &mut R, p: &CorpusParams, period: &[u8]) -> Vec<u8> {
    // Half of the words are drawn from powers of one period so that
    // quasi-periodic states and parts are common.
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(0..=p.max_word / period.len().max(1));
        period.repeat(n)
    } else {
        let n = rng.gen_range(0..=p.max_word);
        (0..n).map(|_| *p.output.choose(rng).expect("nonempty output alphabet")).collect()
    }
}

fn random_rule<R: Rng>(rng: &mut R, p: &CorpusParams, states: &[StateId], arity: usize, period: &[u8], pool: &mut SlpPool) -> Rule {
    let mut children: Vec<usize> = (0..arity).collect();
    children.shuffle(rng);
    let calls = children
        .into_iter()
        .map(|child| Call {
            state: *states.choose(rng).expect("at least one state"),
            child,
        })
        .collect();
    let words = (0..=arity).map(|_| pool.literal(&random_word(rng, p, period))).collect();
    Rule { words, calls }
}

/// A random trimmed transducer over `h:2 f:1 g:0` (or `f:1 g:0`) whose
/// states `q0, q1, ...` all have a leaf rule.
pub fn random_ltw<R: Rng>(rng: &mut R, p: &CorpusParams) -> Ltw {
    let periods: [&[u8]; 3] = [b"ab", b"a", b"aab"];
    let period = *periods.choose(rng).expect("nonempty");
    let n = rng.gen_range(1..=p.max_states);
    let mut m = Ltw::new(alphabet(p.max_arity), SlpPool::new(), "q0");
    let states: Vec<StateId> = std::iter::once(m.axiom().state)
        .chain((1..n).map(|i| m.add_state(&format!("q{i}")).expect("fresh name")))
        .collect();
    let symbols: Vec<SymbolId> = m.alphabet().symbols().collect();
    for &q in &states {
        for &f in &symbols {
            let arity = m.alphabet().arity(f);
            let keep = match arity {
                0 => true,
                1 => rng.gen_bool(0.75),
                _ => rng.gen_bool(0.4),
            };
            if keep {
                let rule = random_rule(rng, p, &states, arity, period, m.pool_mut());
                m.add_rule(q, f, rule).expect("fresh rule");
            }
        }
    }
    let ax = m.axiom();
    let before = m.pool_mut().literal(&random_word(rng, p, period));
    m.set_axiom(Axiom { before, ..ax });
    m.trim().expect("leaf rules make every state productive");
    m
}

/// A random small edit: one word replaced, two calls swapped, or one
/// callee redirected. The result may or may not be equivalent.
pub fn mutate<R: Rng>(rng: &mut R, m: &Ltw, p: &CorpusParams) -> Ltw {
    let mut out = m.clone();
    let keys: Vec<(StateId, SymbolId)> = out.rules().map(|(q, f, _)| (q, f)).collect();
    let states: Vec<StateId> = out.states().collect();
    for _ in 0..16 {
        let &(q, f) = keys.choose(rng).expect("trimmed transducers have rules");
        let mut rule = out.rule(q, f).expect("listed").clone();
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(0..rule.words.len());
                let word = random_word(rng, p, b"ab");
                rule.words[i] = out.pool_mut().literal(&word);
            }
            1 if rule.calls.len() >= 2 => rule.calls.swap(0, 1),
            2 if !rule.calls.is_empty() => {
                let i = rng.gen_range(0..rule.calls.len());
                rule.calls[i].state = *states.choose(rng).expect("nonempty");
            }
            _ => continue,
        }
        if out.rule(q, f) != Some(&rule) {
            out.put_rule(q, f, rule).expect("same shape");
            out.trim().expect("mutations keep leaf rules");
            return out;
        }
    }
    out
}

/// Swaps the calls of one binary rule, if there is one.
pub fn shuffle_calls<R: Rng>(rng: &mut R, m: &Ltw) -> Option<Ltw> {
    let keys: Vec<(StateId, SymbolId)> = m.rules().filter(|(_, _, r)| r.calls.len() >= 2).map(|(q, f, _)| (q, f)).collect();
    let &(q, f) = keys.choose(rng)?;
    let mut out = m.clone();
    let mut rule = out.rule(q, f).expect("listed").clone();
    rule.calls.swap(0, 1);
    out.put_rule(q, f, rule).expect("same shape");
    Some(out)
}

/// A pair differing only in the order of two calls to periodic states of
/// one period, so equivalent unless the surrounding words break the run.
pub fn periodic_run_pair<R: Rng>(rng: &mut R, p: &CorpusParams) -> (Ltw, Ltw) {
    let periods: [&[u8]; 3] = [b"ab", b"a", b"aba"];
    let period = *periods.choose(rng).expect("nonempty");
    let mut m = Ltw::new(alphabet(2), SlpPool::new(), "q0");
    let q0 = m.axiom().state;
    let left = m.add_state("q1").expect("fresh");
    let right = m.add_state("q2").expect("fresh");
    let h = m.alphabet().get("h").expect("binary symbol");
    let f = m.alphabet().get("f").expect("unary symbol");
    let g = m.alphabet().get("g").expect("leaf symbol");
    let power = |rng: &mut R, pool: &mut SlpPool| {
        let n = rng.gen_range(0..=p.max_word / period.len());
        pool.literal(&period.repeat(n))
    };
    for q in [left, right] {
        let before = power(rng, m.pool_mut());
        let after = power(rng, m.pool_mut());
        m.add_rule(q, f, Rule { words: vec![before, after], calls: vec![Call { state: q, child: 0 }] })
            .expect("fresh rule");
        let leaf = power(rng, m.pool_mut());
        m.add_rule(q, g, Rule::leaf(leaf)).expect("fresh rule");
    }
    let pool = m.pool_mut();
    let outer: Vec<_> = (0..2).map(|_| pool.literal(&random_word(rng, p, period))).collect();
    let middle = if rng.gen_bool(0.8) { pool.empty() } else { pool.literal(period) };
    let rule = Rule {
        words: vec![outer[0], middle, outer[1]],
        calls: vec![Call { state: left, child: 0 }, Call { state: right, child: 1 }],
    };
    m.add_rule(q0, h, rule.clone()).expect("fresh rule");
    let leaf = m.pool_mut().literal(b"");
    m.add_rule(q0, g, Rule::leaf(leaf)).expect("fresh rule");
    let mut swapped = m.clone();
    let mut other = rule;
    other.calls.swap(0, 1);
    swapped.put_rule(q0, h, other).expect("same shape");
    (m, swapped)
}

/// `k` chained left quasi-periodic states over `f:1 g:0`: state `q_i`
/// outputs `d^(k-1-i) (abc)^(n+1)` on `f^n(g)`, generalising a handle that
/// grows along the chain.
pub fn chain(k: usize) -> Ltw {
    assert!(k >= 1);
    let mut m = Ltw::new(alphabet(1), SlpPool::new(), "q0");
    let states: Vec<StateId> = std::iter::once(m.axiom().state)
        .chain((1..k).map(|i| m.add_state(&format!("q{i}")).expect("fresh name")))
        .collect();
    let f = m.alphabet().get("f").expect("unary symbol");
    let g = m.alphabet().get("g").expect("leaf symbol");
    let pool = m.pool_mut();
    let (d, abc, empty) = (pool.literal(b"d"), pool.literal(b"abc"), pool.empty());
    for i in 0..k {
        let (words, next) = if i + 1 < k { (vec![d, abc], states[i + 1]) } else { (vec![empty, abc], states[i]) };
        m.add_rule(states[i], f, Rule { words, calls: vec![Call { state: next, child: 0 }] })
            .expect("fresh rule");
    }
    let last = states[k - 1];
    m.add_rule(last, g, Rule::leaf(abc)).expect("fresh rule");
    m
}
