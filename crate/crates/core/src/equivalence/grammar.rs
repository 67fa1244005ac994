//! The product grammar of aligned runs of two same-ordered transducers.

use crate::analysis::coreach::{co_reachable_order, domains_equal, same_ordered, StatePair};
use crate::error::{Error, Result};
use crate::ltw::{Ltw, RankedAlphabet, SymbolId};
use crate::tree::Tree;
use crate::word::{Length, SlpPool, WordRef};
use num_bigint::BigInt;
use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

/// Index of the start nonterminal.
pub const START: usize = 0;

/// `X -> u_0 X_1 u_1 ... X_n u_n` paired with `v_0 X_1 v_1 ... X_n v_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarRule {
    pub lhs: usize,
    /// Input symbol read by this step; `None` for the start rule.
    pub symbol: Option<SymbolId>,
    pub left: Vec<WordRef>,
    pub right: Vec<WordRef>,
    pub children: Vec<usize>,
    /// 0-based input child of each nonterminal occurrence.
    pub inputs: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ProductGrammar {
    /// Holds the words of both transducers.
    pub pool: SlpPool,
    pub alphabet: RankedAlphabet,
    /// `None` for the start symbol, then co-reachable pairs in discovery order.
    pub nonterminals: Vec<Option<StatePair>>,
    pub rules: Vec<GrammarRule>,
    by_lhs: Vec<Vec<usize>>,
}

/// A derivation tree of the product grammar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: usize,
    pub children: Vec<Rc<Derivation>>,
}

/// Builds the grammar. Both transducers must be trimmed, use the same
/// alphabet, have equal domains and be same-ordered.
pub fn build_product_grammar(m1: &Ltw, m2: &Ltw) -> Result<ProductGrammar> {
    for f in m1.alphabet().symbols() {
        let name = m1.alphabet().name(f);
        if m2.alphabet().get(name) != Some(f) || m2.alphabet().arity(f) != m1.alphabet().arity(f) {
            return Err(Error::AlphabetMismatch(name.to_string()));
        }
    }
    if let Err(e) = domains_equal(m1, m2) {
        return Err(Error::DomainMismatch {
            left: m1.state_name(e.pair.0).to_string(),
            right: m2.state_name(e.pair.1).to_string(),
            symbol: e.symbol,
        });
    }
    if let Err(e) = same_ordered(m1, m2) {
        return Err(Error::NotSameOrdered {
            left: m1.state_name(e.pair.0).to_string(),
            right: m2.state_name(e.pair.1).to_string(),
            symbol: m1.alphabet().name(e.symbol).to_string(),
        });
    }

    let mut pool = m1.pool().clone();
    let mut memo = HashMap::new();
    let mut import = |pool: &mut SlpPool, w: WordRef| pool.import(m2.pool(), w, &mut memo);

    let order = co_reachable_order(m1, m2);
    let index: HashMap<StatePair, usize> = order.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
    let mut nonterminals = vec![None];
    nonterminals.extend(order.iter().map(|&p| Some(p)));

    let (a1, a2) = (m1.axiom(), m2.axiom());
    let mut rules = vec![GrammarRule {
        lhs: START,
        symbol: None,
        left: vec![a1.before, a1.after],
        right: vec![import(&mut pool, a2.before), import(&mut pool, a2.after)],
        children: vec![index[&(a1.state, a2.state)]],
        inputs: vec![0],
    }];
    for (i, &(p1, p2)) in order.iter().enumerate() {
        for (f, r1) in m1.rules_of(p1) {
            let r2 = m2.rule(p2, f).expect("equal domains");
            let children = r1
                .calls
                .iter()
                .zip(&r2.calls)
                .map(|(c1, c2)| index[&(c1.state, c2.state)])
                .collect();
            rules.push(GrammarRule {
                lhs: i + 1,
                symbol: Some(f),
                left: r1.words.clone(),
                right: r2.words.iter().map(|&w| import(&mut pool, w)).collect(),
                children,
                inputs: r1.sigma(),
            });
        }
    }
    let mut by_lhs = vec![Vec::new(); nonterminals.len()];
    for (i, r) in rules.iter().enumerate() {
        by_lhs[r.lhs].push(i);
    }
    Ok(ProductGrammar {
        pool,
        alphabet: m1.alphabet().clone(),
        nonterminals,
        rules,
        by_lhs,
    })
}

impl ProductGrammar {
    pub fn num_nonterminals(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn rules_of(&self, x: usize) -> &[usize] {
        &self.by_lhs[x]
    }

    /// The two morphism images of a derivation.
    pub fn images(&mut self, d: &Derivation) -> (WordRef, WordRef) {
        let rule = self.rules[d.rule].clone();
        let (mut x, mut y) = (rule.left[0], rule.right[0]);
        for (i, c) in d.children.iter().enumerate() {
            let (cx, cy) = self.images(c);
            x = self.pool.concat_all([x, cx, rule.left[i + 1]]);
            y = self.pool.concat_all([y, cy, rule.right[i + 1]]);
        }
        (x, y)
    }

    /// The input tree read by a derivation.
    pub fn tree(&self, d: &Derivation) -> Tree {
        let rule = &self.rules[d.rule];
        let Some(f) = rule.symbol else {
            return self.tree(&d.children[0]);
        };
        let mut children: Vec<Option<Tree>> = vec![None; rule.children.len()];
        for (c, &i) in d.children.iter().zip(&rule.inputs) {
            children[i] = Some(self.tree(c));
        }
        Tree::new(
            self.alphabet.name(f),
            children.into_iter().map(|c| c.expect("permutation")).collect(),
        )
    }

    /// A minimum-height derivation for every nonterminal.
    pub fn shortest_derivations(&self) -> Vec<Rc<Derivation>> {
        let n = self.num_nonterminals();
        let mut best: Vec<Option<Rc<Derivation>>> = vec![None; n];
        loop {
            let mut newly = Vec::new();
            for x in 0..n {
                if best[x].is_some() {
                    continue;
                }
                let ready = self.by_lhs[x]
                    .iter()
                    .find(|&&r| self.rules[r].children.iter().all(|&c| best[c].is_some()));
                if let Some(&r) = ready {
                    let children = self.rules[r]
                        .children
                        .iter()
                        .map(|&c| best[c].clone().expect("ready"))
                        .collect();
                    newly.push((x, Rc::new(Derivation { rule: r, children })));
                }
            }
            if newly.is_empty() {
                break;
            }
            for (x, d) in newly {
                best[x] = Some(d);
            }
        }
        best.into_iter()
            .map(|d| d.expect("every nonterminal is productive"))
            .collect()
    }

    /// For every nonterminal other than the start, a rule and position where
    /// it occurs on a shortest path from the start.
    fn parents(&self) -> Vec<Option<(usize, usize)>> {
        let mut parent = vec![None; self.num_nonterminals()];
        let mut seen = vec![false; self.num_nonterminals()];
        seen[START] = true;
        let mut queue = VecDeque::from([START]);
        while let Some(x) = queue.pop_front() {
            for &r in &self.by_lhs[x] {
                for (i, &c) in self.rules[r].children.iter().enumerate() {
                    if !seen[c] {
                        seen[c] = true;
                        parent[c] = Some((r, i));
                        queue.push_back(c);
                    }
                }
            }
        }
        parent
    }

    /// Embeds a derivation of `x` into a derivation of the start symbol,
    /// completing the context with shortest derivations.
    pub fn in_context(&self, x: usize, d: Rc<Derivation>, shortest: &[Rc<Derivation>]) -> Rc<Derivation> {
        let parents = self.parents();
        let (mut x, mut d) = (x, d);
        while let Some((r, i)) = parents[x] {
            let mut children: Vec<Rc<Derivation>> =
                self.rules[r].children.iter().map(|&c| shortest[c].clone()).collect();
            children[i] = d;
            d = Rc::new(Derivation { rule: r, children });
            x = self.rules[r].lhs;
        }
        d
    }

    /// `|u_0 ... u_n| - |v_0 ... v_n|` of a rule, without its nonterminals.
    pub(crate) fn length_offset(&self, r: usize) -> BigInt {
        let rule = &self.rules[r];
        let sum = |ws: &[WordRef]| -> Length { ws.iter().map(|&w| self.pool.len(w)).sum() };
        BigInt::from(sum(&rule.left)) - BigInt::from(sum(&rule.right))
    }
}
