//! Minimum-length words and minimum-height trees of state languages.

use crate::error::{Error, Result};
use crate::ltw::{Ltw, StateId, SymbolId};
use crate::tree::Tree;
use crate::word::{Length, WordRef};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// A shortest word for every productive state.
///
/// Lengths come from Knuth's generalization of Dijkstra's algorithm to
/// superior functions; a state is finalized by the first rule reaching the
/// minimum, ties going to the lower state id and then to the symbol declared
/// first. Every chosen rule only calls states finalized earlier, so the words
/// are assembled bottom-up as SLPs without expansion.
#[derive(Clone, Debug)]
pub struct ShortestWords {
    lengths: Vec<Option<Length>>,
    choice: Vec<Option<SymbolId>>,
    words: Vec<Option<WordRef>>,
}

impl ShortestWords {
    pub fn compute(m: &mut Ltw) -> Self {
        let n = m.num_states();
        let mut lengths: Vec<Option<Length>> = vec![None; n];
        let mut choice = vec![None; n];
        let mut order = Vec::new();

        let rules: Vec<(StateId, SymbolId)> = m.rules().map(|(q, f, _)| (q, f)).collect();
        let mut acc: Vec<Length> = Vec::with_capacity(rules.len());
        let mut pending: Vec<usize> = Vec::with_capacity(rules.len());
        let mut occurrences: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut heap = BinaryHeap::new();
        for (i, &(q, f)) in rules.iter().enumerate() {
            let rule = m.rule(q, f).expect("listed");
            let base: Length = rule.words.iter().map(|&w| m.pool().len(w).clone()).sum();
            for c in &rule.calls {
                occurrences[c.state.index()].push(i);
            }
            if rule.calls.is_empty() {
                heap.push(Reverse((base.clone(), q, f)));
            }
            acc.push(base);
            pending.push(rule.calls.len());
        }
        while let Some(Reverse((len, q, f))) = heap.pop() {
            if lengths[q.index()].is_some() {
                continue;
            }
            for &i in &occurrences[q.index()] {
                acc[i] += &len;
                pending[i] -= 1;
                if pending[i] == 0 {
                    let (p, g) = rules[i];
                    if lengths[p.index()].is_none() {
                        heap.push(Reverse((acc[i].clone(), p, g)));
                    }
                }
            }
            lengths[q.index()] = Some(len);
            choice[q.index()] = Some(f);
            order.push(q);
        }

        let mut words = vec![None; n];
        for q in order {
            let f = choice[q.index()].expect("finalized");
            let rule = m.rule(q, f).expect("chosen").clone();
            let pool = m.pool_mut();
            let mut w = rule.words[0];
            for (i, c) in rule.calls.iter().enumerate() {
                w = pool.concat(w, words[c.state.index()].expect("finalized earlier"));
                w = pool.concat(w, rule.words[i + 1]);
            }
            words[q.index()] = Some(w);
        }
        ShortestWords { lengths, choice, words }
    }

    pub fn len(&self, q: StateId) -> Option<&Length> {
        self.lengths.get(q.index())?.as_ref()
    }

    pub fn word(&self, q: StateId) -> Option<WordRef> {
        *self.words.get(q.index())?
    }

    /// The rule used for the witness derivation of `q`.
    pub fn rule(&self, q: StateId) -> Option<SymbolId> {
        *self.choice.get(q.index())?
    }

    pub fn word_or_err(&self, m: &Ltw, q: StateId) -> Result<WordRef> {
        self.word(q)
            .ok_or_else(|| Error::EmptyDomain(m.state_name(q).to_string()))
    }
}

/// A minimum-length word of `L_q`.
pub fn shortest_word(m: &mut Ltw, q: StateId) -> Result<WordRef> {
    ShortestWords::compute(m).word_or_err(m, q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reason {
    Word,
    Call(usize),
}

/// Which states produce only ε, with a derivation of a nonempty word for the
/// others.
#[derive(Clone, Debug)]
pub struct ErasingInfo {
    productive: Vec<bool>,
    nonerasing: Vec<Option<(SymbolId, Reason)>>,
}

impl ErasingInfo {
    pub fn compute(m: &Ltw) -> Self {
        let productive = m.productive();
        let mut nonerasing: Vec<Option<(SymbolId, Reason)>> = vec![None; m.num_states()];
        loop {
            let mut changed = false;
            for (q, f, rule) in m.rules() {
                if nonerasing[q.index()].is_some() || !rule.calls.iter().all(|c| productive[c.state.index()]) {
                    continue;
                }
                let reason = if rule.words.iter().any(|&w| !m.pool().is_empty(w)) {
                    Some(Reason::Word)
                } else {
                    rule.calls
                        .iter()
                        .position(|c| nonerasing[c.state.index()].is_some())
                        .map(Reason::Call)
                };
                if let Some(r) = reason {
                    nonerasing[q.index()] = Some((f, r));
                    changed = true;
                }
            }
            if !changed {
                return ErasingInfo { productive, nonerasing };
            }
        }
    }

    pub fn is_productive(&self, q: StateId) -> bool {
        self.productive[q.index()]
    }

    pub fn is_erasing(&self, q: StateId) -> bool {
        self.productive[q.index()] && self.nonerasing[q.index()].is_none()
    }

    /// Some nonempty word of `L_q`, or `None` if `q` is erasing.
    pub fn nonempty_word(&self, m: &mut Ltw, shortest: &ShortestWords, q: StateId) -> Option<WordRef> {
        let (f, reason) = self.nonerasing[q.index()]?;
        let rule = m.rule(q, f).expect("recorded rule").clone();
        let mut parts = Vec::with_capacity(rule.words.len() * 2);
        parts.push(rule.words[0]);
        for (i, c) in rule.calls.iter().enumerate() {
            let w = if reason == Reason::Call(i) {
                self.nonempty_word(m, shortest, c.state).expect("callee non-erasing")
            } else {
                shortest.word(c.state).expect("productive callee")
            };
            parts.push(w);
            parts.push(rule.words[i + 1]);
        }
        Some(m.pool_mut().concat_all(parts))
    }
}

pub fn is_erasing(m: &Ltw, q: StateId) -> bool {
    ErasingInfo::compute(m).is_erasing(q)
}

/// A minimum-height tree in the domain of every productive state; among trees
/// of equal height, the root symbol declared first wins.
pub fn shortest_trees(m: &Ltw) -> Vec<Option<Tree>> {
    let n = m.num_states();
    let mut height: Vec<Option<usize>> = vec![None; n];
    let mut level = 1;
    loop {
        let mut newly = Vec::new();
        for q in m.states() {
            if height[q.index()].is_some() {
                continue;
            }
            let ready = m
                .rules_of(q)
                .any(|(_, r)| r.calls.iter().all(|c| height[c.state.index()].is_some_and(|h| h < level)));
            if ready {
                newly.push(q);
            }
        }
        if newly.is_empty() {
            break;
        }
        for q in newly {
            height[q.index()] = Some(level);
        }
        level += 1;
    }

    let mut trees: Vec<Option<Tree>> = vec![None; n];
    let mut by_height: Vec<StateId> = m.states().filter(|q| height[q.index()].is_some()).collect();
    by_height.sort_by_key(|q| height[q.index()]);
    for q in by_height {
        let h = height[q.index()].expect("filtered");
        let (f, rule) = m
            .rules_of(q)
            .find(|(_, r)| r.calls.iter().all(|c| height[c.state.index()].is_some_and(|k| k < h)))
            .expect("a rule realizes the height");
        let mut children = vec![None; rule.arity()];
        for c in &rule.calls {
            children[c.child] = trees[c.state.index()].clone();
        }
        trees[q.index()] = Some(Tree::new(
            m.alphabet().name(f),
            children.into_iter().map(|c| c.expect("built")).collect(),
        ));
    }
    trees
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_ltw;
    use crate::testing::EX3;

    fn text(m: &Ltw, w: WordRef) -> String {
        String::from_utf8(m.pool().expand(w, 1000).unwrap()).unwrap()
    }

    #[test]
    fn example_three_shortest_words() {
        let mut m = parse_ltw(EX3).unwrap();
        let sw = ShortestWords::compute(&mut m);
        let q = m.state("q").unwrap();
        let q2 = m.state("q2").unwrap();
        assert_eq!(text(&m, sw.word(q).unwrap()), "aaaabcabc");
        assert_eq!(text(&m, sw.word(q2).unwrap()), "abc");
        assert_eq!(sw.len(q).unwrap(), &Length::from(9u8));
    }

    #[test]
    fn erasing_states() {
        let m = parse_ltw(
            "input f:1 g:0\naxiom = q(x)\nrule q f(x1) = q1(x1)\nrule q g = \"\"\n\
             rule q1 f(x1) = q1(x1)\nrule q1 g = \"\"\nrule p g = \"\"\n",
        )
        .unwrap();
        let info = ErasingInfo::compute(&m);
        assert!(info.is_erasing(m.state("q").unwrap()));
        assert!(info.is_erasing(m.state("p").unwrap()));
        let ex3 = parse_ltw(EX3).unwrap();
        assert!(!is_erasing(&ex3, ex3.state("q2").unwrap()));
    }

    #[test]
    fn nonempty_witness() {
        let mut m = parse_ltw(
            "input f:1 g:0\naxiom = q(x)\nrule q f(x1) = p(x1)\nrule q g = \"\"\n\
             rule p f(x1) = p(x1)\nrule p g = \"ab\"\n",
        )
        .unwrap();
        let sw = ShortestWords::compute(&mut m);
        let info = ErasingInfo::compute(&m);
        let q = m.state("q").unwrap();
        assert_eq!(text(&m, sw.word(q).unwrap()), "");
        let w = info.nonempty_word(&mut m, &sw, q).unwrap();
        assert_eq!(text(&m, w), "ab");
    }

    #[test]
    fn minimum_height_trees() {
        let m = parse_ltw(EX3).unwrap();
        let trees = shortest_trees(&m);
        assert_eq!(trees[m.state("q").unwrap().index()].as_ref().unwrap().to_string(), "f(f(g))");
        assert_eq!(trees[m.state("q2").unwrap().index()].as_ref().unwrap().to_string(), "g");
    }
}
