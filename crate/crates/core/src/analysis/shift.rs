//! Mock shifts and the quasi-periodicity test transducer `T^q`.

use super::shortest::ShortestWords;
use crate::error::{Error, Result};
use crate::ltw::{Axiom, Call, Ltw, Rule, StateId, TEST_SUFFIX};
use crate::word::Length;
use num_traits::Zero;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

/// `s'(q, p)` for every state `p` reachable from `q` through productive rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftTable {
    pub base: StateId,
    pub shifts: BTreeMap<StateId, Length>,
}

impl ShiftTable {
    pub fn get(&self, p: StateId) -> Option<&Length> {
        self.shifts.get(&p)
    }

    /// The table with every value reduced modulo `modulus` (unchanged for 0).
    pub fn reduced(&self, modulus: &Length) -> ShiftTable {
        if modulus.is_zero() {
            return self.clone();
        }
        ShiftTable {
            base: self.base,
            shifts: self.shifts.iter().map(|(&p, s)| (p, s % modulus)).collect(),
        }
    }
}

/// Call-graph edges `p -> q_i` weighted by `|u_i w_{q_{i+1}} ... w_{q_n} u_n|`.
fn weighted_edges(m: &Ltw, sw: &ShortestWords, p: StateId) -> Vec<(StateId, Length)> {
    let mut out = Vec::new();
    for (_, rule) in m.rules_of(p) {
        if rule.calls.iter().any(|c| sw.len(c.state).is_none()) {
            continue;
        }
        let mut suffix = m.pool().len(*rule.words.last().expect("n+1 words")).clone();
        for i in (0..rule.calls.len()).rev() {
            out.push((rule.calls[i].state, suffix.clone()));
            suffix += sw.len(rule.calls[i].state).expect("checked");
            suffix += m.pool().len(rule.words[i]);
        }
    }
    out
}

/// Smallest mock shifts from `q`, by Dijkstra over the weighted call graph.
pub fn mock_shift_table(m: &Ltw, sw: &ShortestWords, q: StateId) -> ShiftTable {
    let mut shifts: BTreeMap<StateId, Length> = BTreeMap::new();
    let mut heap = BinaryHeap::from([Reverse((Length::zero(), q))]);
    while let Some(Reverse((d, p))) = heap.pop() {
        if shifts.contains_key(&p) {
            continue;
        }
        for (r, w) in weighted_edges(m, sw, p) {
            if !shifts.contains_key(&r) {
                heap.push(Reverse((&d + w, r)));
            }
        }
        shifts.insert(p, d);
    }
    ShiftTable { base: q, shifts }
}

/// Builds `T^q`: a copy `p__T` of every state `p` accessible from `q`, each
/// rule rewritten to `ρ_{s'(q,p)}[|w_p|-suffix of u_0 w_1 u_1 ... w_n u_n]`
/// followed by the copied calls, and axiom `w_q q__T(x)`.
///
/// The result shares the alphabet and a clone of the pool of `m`.
pub fn build_tq(m: &mut Ltw, q: StateId) -> Result<Ltw> {
    let sw = ShortestWords::compute(m);
    build_tq_with(m, &sw, q)
}

pub(crate) fn build_tq_with(m: &Ltw, sw: &ShortestWords, q: StateId) -> Result<Ltw> {
    let wq = sw.word_or_err(m, q)?;
    let table = mock_shift_table(m, sw, q);
    let mut t = Ltw::new(
        m.alphabet().clone(),
        m.pool().clone(),
        &format!("{}{TEST_SUFFIX}", m.state_name(q)),
    );
    let mut copy: BTreeMap<StateId, StateId> = BTreeMap::from([(q, t.axiom().state)]);
    for &p in table.shifts.keys() {
        if p != q {
            let name = format!("{}{TEST_SUFFIX}", m.state_name(p));
            copy.insert(p, t.fresh_state(&name));
        }
    }
    let empty = t.pool().empty();
    for (&p, shift) in &table.shifts {
        let wp_len = sw.len(p).ok_or_else(|| Error::EmptyDomain(m.state_name(p).to_string()))?;
        for (f, rule) in m.rules_of(p) {
            if rule.calls.iter().any(|c| sw.word(c.state).is_none()) {
                continue;
            }
            let pool = t.pool_mut();
            let mut u = rule.words[0];
            for (i, c) in rule.calls.iter().enumerate() {
                u = pool.concat(u, sw.word(c.state).expect("checked"));
                u = pool.concat(u, rule.words[i + 1]);
            }
            let stripped = pool.strip_prefix(u, wp_len)?;
            let up = pool.rotate_left(stripped, shift);
            let mut words = vec![up];
            words.resize(rule.calls.len() + 1, empty);
            let calls = rule
                .calls
                .iter()
                .map(|c| Call {
                    state: copy[&c.state],
                    child: c.child,
                })
                .collect();
            t.add_rule(copy[&p], f, Rule { words, calls })?;
        }
    }
    let qt = copy[&q];
    t.set_axiom(Axiom {
        before: wq,
        state: qt,
        after: empty,
    });
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{parse_ltw, print_ltw};
    use crate::testing::EX3;

    #[test]
    fn example_three_shifts() {
        let mut m = parse_ltw(EX3).unwrap();
        let sw = ShortestWords::compute(&mut m);
        let id = |n: &str| m.state(n).unwrap();
        let t = mock_shift_table(&m, &sw, id("q"));
        assert_eq!(t.get(id("q")), Some(&Length::from(0u8)));
        assert_eq!(t.get(id("q1")), Some(&Length::from(1u8)));
        assert_eq!(t.get(id("q2")), Some(&Length::from(3u8)));
        let t1 = mock_shift_table(&m, &sw, id("q1"));
        assert_eq!(t1.get(id("q2")), Some(&Length::from(2u8)));
    }

    #[test]
    fn diamond_takes_the_smaller_path() {
        let mut m = parse_ltw(
            "input f:1 k:1 g:0\naxiom = q(x)\nrule q f(x1) = a(x1)\nrule q k(x1) = b(x1)\n\
             rule a f(x1) = d(x1) \"xx\"\nrule b f(x1) = d(x1) \"xxxxx\"\nrule d g = \"\"\n",
        )
        .unwrap();
        let sw = ShortestWords::compute(&mut m);
        let t = mock_shift_table(&m, &sw, m.state("q").unwrap());
        assert_eq!(t.get(m.state("d").unwrap()), Some(&Length::from(2u8)));
    }

    #[test]
    fn tq_of_example_three() {
        let mut m = parse_ltw(EX3).unwrap();
        let q = m.state("q").unwrap();
        let t = build_tq(&mut m, q).unwrap();
        assert_eq!(
            print_ltw(&t),
            "input f:1 g:0\naxiom = \"aaaabcabc\" q__T(x)\nrule q1__T f(x1) = q2__T(x1)\n\
             rule q2__T f(x1) = \"abc\" q2__T(x1)\nrule q2__T g = \"\"\nrule q__T f(x1) = q1__T(x1)\n"
        );
    }

    #[test]
    fn tq_of_erasing_state() {
        let mut m = parse_ltw("input f:1 g:0\naxiom = q(x)\nrule q f(x1) = q(x1)\nrule q g = \"\"\n").unwrap();
        let q = m.state("q").unwrap();
        let t = build_tq(&mut m, q).unwrap();
        assert_eq!(
            print_ltw(&t),
            "input f:1 g:0\naxiom = q__T(x)\nrule q__T f(x1) = q__T(x1)\nrule q__T g = \"\"\n"
        );
    }
}
