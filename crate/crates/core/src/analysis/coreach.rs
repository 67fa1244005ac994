//! Pairs of states of two transducers that can read the same input node.
//!
//! Symbols are matched by name, so the two transducers may declare their
//! alphabets in different orders.

use super::shortest::shortest_trees;
use crate::ltw::{Ltw, StateId, SymbolId};
use crate::tree::Tree;
use std::collections::{BTreeSet, HashMap, VecDeque};

pub type StatePair = (StateId, StateId);

/// How a pair was first reached: parent pair, symbol (in the left
/// transducer's alphabet) and 0-based input child.
#[derive(Clone, Copy, Debug)]
struct Step {
    parent: StatePair,
    symbol: SymbolId,
    child: usize,
}

/// Breadth-first exploration of co-reachable pairs, symbols in declaration
/// order of the left transducer.
struct Explorer<'a> {
    m1: &'a Ltw,
    m2: &'a Ltw,
    order: Vec<StatePair>,
    parent: HashMap<StatePair, Option<Step>>,
}

impl<'a> Explorer<'a> {
    fn run(m1: &'a Ltw, m2: &'a Ltw) -> Self {
        let root = (m1.axiom().state, m2.axiom().state);
        let mut ex = Explorer {
            m1,
            m2,
            order: Vec::new(),
            parent: HashMap::from([(root, None)]),
        };
        let mut queue = VecDeque::from([root]);
        while let Some(pair) = queue.pop_front() {
            ex.order.push(pair);
            for (f, r1, r2) in ex.shared_rules(pair) {
                for c1 in &r1.calls {
                    let c2 = r2.calls.iter().find(|c| c.child == c1.child).expect("same arity");
                    let next = (c1.state, c2.state);
                    if !ex.parent.contains_key(&next) {
                        ex.parent.insert(
                            next,
                            Some(Step {
                                parent: pair,
                                symbol: f,
                                child: c1.child,
                            }),
                        );
                        queue.push_back(next);
                    }
                }
            }
        }
        ex
    }

    fn other_symbol(&self, f: SymbolId) -> Option<SymbolId> {
        self.m2.alphabet().get(self.m1.alphabet().name(f))
    }

    fn shared_rules(&self, (p1, p2): StatePair) -> Vec<(SymbolId, &'a crate::ltw::Rule, &'a crate::ltw::Rule)> {
        let (m1, m2) = (self.m1, self.m2);
        m1.rules_of(p1)
            .filter_map(|(f, r1)| {
                let g = self.other_symbol(f)?;
                m2.rule(p2, g).map(|r2| (f, r1, r2))
            })
            .collect()
    }

    fn path(&self, mut pair: StatePair) -> Vec<Step> {
        let mut steps = Vec::new();
        while let Some(step) = self.parent[&pair] {
            steps.push(step);
            pair = step.parent;
        }
        steps.reverse();
        steps
    }
}

pub fn co_reachable_pairs(m1: &Ltw, m2: &Ltw) -> BTreeSet<StatePair> {
    Explorer::run(m1, m2).order.into_iter().collect()
}

/// Co-reachable pairs in breadth-first discovery order.
pub fn co_reachable_order(m1: &Ltw, m2: &Ltw) -> Vec<StatePair> {
    Explorer::run(m1, m2).order
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderMismatch {
    pub pair: StatePair,
    /// Symbol in the left transducer's alphabet.
    pub symbol: SymbolId,
}

/// First co-reachable pair and shared symbol whose permutations differ.
pub fn same_ordered(m1: &Ltw, m2: &Ltw) -> Result<(), OrderMismatch> {
    let ex = Explorer::run(m1, m2);
    for &pair in &ex.order {
        for (f, r1, r2) in ex.shared_rules(pair) {
            if r1.sigma() != r2.sigma() {
                return Err(OrderMismatch { pair, symbol: f });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainMismatch {
    pub pair: StatePair,
    pub symbol: String,
    /// `true` if only the left transducer has the rule.
    pub left_defined: bool,
    pub witness: Tree,
}

/// Compares, at every co-reachable pair, the symbols that have rules.
///
/// On a mismatch at a pair reached along some path, the witness follows that
/// path; siblings along it and the subtree at the mismatch are minimum-height
/// trees of the transducer that has the rule, so that transducer accepts the
/// witness and the other one rejects it.
pub fn domains_equal(m1: &Ltw, m2: &Ltw) -> Result<(), DomainMismatch> {
    let ex = Explorer::run(m1, m2);
    for &(p1, p2) in &ex.order {
        let mut names: Vec<(usize, &str, bool)> = Vec::new();
        for (f, _) in m1.rules_of(p1) {
            let name = m1.alphabet().name(f);
            let other = m2.alphabet().get(name);
            if other.is_none_or(|g| m2.rule(p2, g).is_none()) {
                names.push((f.index(), name, true));
            }
        }
        for (g, _) in m2.rules_of(p2) {
            let name = m2.alphabet().name(g);
            let other = m1.alphabet().get(name);
            if other.is_none_or(|f| m1.rule(p1, f).is_none()) {
                let rank = other.map_or(m1.alphabet().len() + g.index(), |f| f.index());
                names.push((rank, name, false));
            }
        }
        names.sort();
        let Some(&(_, name, left_defined)) = names.first() else { continue };
        let witness = witness_tree(&ex, (p1, p2), name, left_defined);
        return Err(DomainMismatch {
            pair: (p1, p2),
            symbol: name.to_string(),
            left_defined,
            witness,
        });
    }
    Ok(())
}

fn witness_tree(ex: &Explorer, pair: StatePair, symbol: &str, left_defined: bool) -> Tree {
    let side = if left_defined { ex.m1 } else { ex.m2 };
    let pick = |(p1, p2): StatePair| if left_defined { p1 } else { p2 };
    let trees = shortest_trees(side);
    let tree = filled(side, &trees, pick(pair), symbol);
    plug(ex, side, &trees, pick, pair, tree)
}

/// `symbol` with the shortest tree of each callee of `q`'s rule below it.
fn filled(side: &Ltw, trees: &[Option<Tree>], q: StateId, symbol: &str) -> Tree {
    let f = side.alphabet().get(symbol).expect("symbol of the defining side");
    let rule = side.rule(q, f).expect("defining rule");
    let mut children = vec![None; rule.arity()];
    for c in &rule.calls {
        children[c.child] = trees[c.state.index()].clone();
    }
    Tree::new(symbol, children.into_iter().map(|c| c.expect("trimmed")).collect())
}

/// Places `tree` at the node where `pair` is first reached, along the
/// discovery path, with shortest trees as siblings.
fn plug(ex: &Explorer, side: &Ltw, trees: &[Option<Tree>], pick: impl Fn(StatePair) -> StateId, pair: StatePair, mut tree: Tree) -> Tree {
    for step in ex.path(pair).into_iter().rev() {
        let name = ex.m1.alphabet().name(step.symbol);
        let mut parent = filled(side, trees, pick(step.parent), name);
        parent.children[step.child] = tree;
        tree = parent;
    }
    tree
}

/// A tree of `dom(m1)` whose node at some position is read by the pair,
/// with `subtree` at that position. Siblings are shortest trees of `m1`.
pub fn plug_at_pair(m1: &Ltw, m2: &Ltw, pair: StatePair, subtree: Tree) -> Option<Tree> {
    let ex = Explorer::run(m1, m2);
    if !ex.parent.contains_key(&pair) {
        return None;
    }
    let trees = shortest_trees(m1);
    Some(plug(&ex, m1, &trees, |(p1, _)| p1, pair, subtree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_ltw;
    use crate::testing::{EX3, EX5A, EX5B};

    fn names(m1: &Ltw, m2: &Ltw, pairs: &BTreeSet<StatePair>) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|&(a, b)| (m1.state_name(a).to_string(), m2.state_name(b).to_string()))
            .collect()
    }

    #[test]
    fn self_product_is_diagonal() {
        let m = parse_ltw(EX3).unwrap();
        let pairs = co_reachable_pairs(&m, &m);
        assert_eq!(pairs.len(), 3);
        assert!(pairs.iter().all(|(a, b)| a == b));
        assert_eq!(same_ordered(&m, &m), Ok(()));
        assert_eq!(domains_equal(&m, &m), Ok(()));
    }

    #[test]
    fn example_five_pairs_and_order() {
        let a = parse_ltw(EX5A).unwrap();
        let b = parse_ltw(EX5B).unwrap();
        let got = names(&a, &b, &co_reachable_pairs(&a, &b));
        for s in ["q0", "q1", "q2", "q4"] {
            assert!(got.contains(&(s.to_string(), s.to_string())), "{s}");
        }
        assert_eq!(got.len(), 4);
        let err = same_ordered(&a, &b).unwrap_err();
        assert_eq!(a.state_name(err.pair.0), "q0");
        assert_eq!(a.alphabet().name(err.symbol), "f");
    }

    #[test]
    fn domain_witnesses() {
        let m = parse_ltw(EX3).unwrap();
        let wider = parse_ltw(&format!("{EX3}rule q1 g = \"\"\n")).unwrap();
        let err = domains_equal(&m, &wider).unwrap_err();
        assert_eq!(err.witness.to_string(), "f(g)");
        assert!(!err.left_defined);
        assert!(wider.domain_defined(&err.witness) && !m.domain_defined(&err.witness));

        let a = parse_ltw("input f:1 g:0\naxiom = q(x)\nrule q g = \"\"\n").unwrap();
        let b = parse_ltw("input g:0 h:0\naxiom = q(x)\nrule q h = \"\"\n").unwrap();
        let err = domains_equal(&a, &b).unwrap_err();
        assert_eq!(err.witness.to_string(), "g");
        assert_eq!(co_reachable_pairs(&a, &b).len(), 1);
    }
}
