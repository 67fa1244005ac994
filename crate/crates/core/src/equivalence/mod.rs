//! Equivalence of same-ordered transducers through the product grammar, and
//! of arbitrary transducers through their partial normal forms.

pub mod grammar;
pub mod morphism;

pub use grammar::{build_product_grammar, Derivation, GrammarRule, ProductGrammar, START};
pub use morphism::{morphism_equivalence, morphism_equivalence_with, MorphismOptions, MorphismVerdict};

use crate::analysis::coreach::{domains_equal, plug_at_pair, same_ordered, OrderMismatch};
use crate::analysis::shortest::shortest_trees;
use crate::error::{Error, Result};
use crate::ltw::{align_alphabets, Ltw};
use crate::normalize::partial_normal_form;
use crate::oracle::{enumerate_trees, find_difference, EnumerationBudget};
use crate::tree::Tree;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mismatch {
    Domain,
    Order,
    Output,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mismatch::Domain => "domain mismatch",
            Mismatch::Order => "order mismatch",
            Mismatch::Output => "output mismatch",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivVerdict {
    Equivalent,
    NotEquivalent {
        reason: Mismatch,
        /// Verified by evaluating both transducers before it is returned.
        witness: Option<Tree>,
        detail: String,
    },
}

impl EquivVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivVerdict::Equivalent)
    }

    pub fn witness(&self) -> Option<&Tree> {
        match self {
            EquivVerdict::Equivalent => None,
            EquivVerdict::NotEquivalent { witness, .. } => witness.as_ref(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquivOptions {
    pub morphism: MorphismOptions,
    /// Search bound for a concrete tree when the normal forms are not
    /// same-ordered.
    pub order_witness: EnumerationBudget,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions {
            morphism: MorphismOptions::default(),
            order_witness: EnumerationBudget {
                depth: 6,
                ..EnumerationBudget::default()
            },
        }
    }
}

/// Whether `t` separates the two transducers, by definedness or output.
pub fn separates(m1: &Ltw, m2: &Ltw, t: &Tree) -> Result<bool> {
    let (d1, d2) = (m1.domain_defined(t), m2.domain_defined(t));
    if d1 != d2 {
        return Ok(true);
    }
    if !d1 {
        return Ok(false);
    }
    let (mut a, mut b) = (m1.clone(), m2.clone());
    let x = a.evaluate(t)?;
    let y = b.evaluate(t)?;
    let y = a.pool_mut().import(b.pool(), y, &mut HashMap::new());
    Ok(!a.pool().equals(x, y))
}

fn verified(m1: &Ltw, m2: &Ltw, reason: Mismatch, witness: Tree, detail: String) -> Result<EquivVerdict> {
    if !separates(m1, m2, &witness)? {
        return Err(Error::InvalidVerdict(format!("witness {witness} does not separate the transducers")));
    }
    Ok(EquivVerdict::NotEquivalent {
        reason,
        witness: Some(witness),
        detail,
    })
}

enum Prepared {
    Verdict(EquivVerdict),
    Pair(Ltw, Ltw),
}

/// Aligns alphabets, trims, and compares domains.
fn prepare(m1: &Ltw, m2: &Ltw) -> Result<Prepared> {
    let (a, b) = align_alphabets(m1, m2)?;
    let (ta, tb) = (a.trimmed(), b.trimmed());
    let (a, b) = match (ta, tb) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(Error::EmptyTransducer), Err(Error::EmptyTransducer)) => {
            return Ok(Prepared::Verdict(EquivVerdict::Equivalent))
        }
        (Err(Error::EmptyTransducer), Ok(other)) | (Ok(other), Err(Error::EmptyTransducer)) => {
            let t = shortest_trees(&other)[other.axiom().state.index()].clone().expect("trimmed");
            let side = if a.trimmed().is_ok() { "left" } else { "right" };
            return verified(&a, &b, Mismatch::Domain, t, format!("only the {side} transducer has a nonempty domain"))
                .map(Prepared::Verdict);
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    if let Err(e) = domains_equal(&a, &b) {
        let side = if e.left_defined { "left" } else { "right" };
        let detail = format!(
            "at ({}, {}) only the {side} transducer reads {}",
            a.state_name(e.pair.0),
            b.state_name(e.pair.1),
            e.symbol
        );
        return verified(&a, &b, Mismatch::Domain, e.witness, detail).map(Prepared::Verdict);
    }
    Ok(Prepared::Pair(a, b))
}

/// Decides equivalence of two same-ordered transducers.
pub fn decide_same_ordered_equiv(m1: &Ltw, m2: &Ltw) -> Result<EquivVerdict> {
    decide_same_ordered_equiv_with(m1, m2, MorphismOptions::default())
}

pub fn decide_same_ordered_equiv_with(m1: &Ltw, m2: &Ltw, opts: MorphismOptions) -> Result<EquivVerdict> {
    let (a, b) = match prepare(m1, m2)? {
        Prepared::Verdict(v) => return Ok(v),
        Prepared::Pair(a, b) => (a, b),
    };
    let mut g = build_product_grammar(&a, &b)?;
    match morphism_equivalence_with(&mut g, opts) {
        MorphismVerdict::Equal => Ok(EquivVerdict::Equivalent),
        MorphismVerdict::Unequal(d) => {
            let (x, y) = g.images(&d);
            let t = g.tree(&d);
            let detail = format!(
                "outputs differ: left {} vs right {}",
                g.pool.display(x, 40),
                g.pool.display(y, 40)
            );
            verified(&a, &b, Mismatch::Output, t, detail)
        }
    }
}

/// Decides equivalence of arbitrary transducers.
pub fn decide_equiv(m1: &Ltw, m2: &Ltw) -> Result<EquivVerdict> {
    decide_equiv_with(m1, m2, EquivOptions::default())
}

pub fn decide_equiv_with(m1: &Ltw, m2: &Ltw, opts: EquivOptions) -> Result<EquivVerdict> {
    let (a, b) = match prepare(m1, m2)? {
        Prepared::Verdict(v) => return Ok(v),
        Prepared::Pair(a, b) => (a, b),
    };
    let (na, _) = partial_normal_form(&a)?;
    let (nb, _) = partial_normal_form(&b)?;
    if let Err(e) = same_ordered(&na, &nb) {
        let detail = format!(
            "normal forms order children differently at ({}, {}) on {}",
            na.state_name(e.pair.0),
            nb.state_name(e.pair.1),
            na.alphabet().name(e.symbol)
        );
        let witness = match order_witness(&a, &b, &na, &nb, &e, opts.order_witness)? {
            Some(t) => Some(t),
            None => find_difference(&a, &b, opts.order_witness)?,
        };
        return match witness {
            Some(t) => verified(&a, &b, Mismatch::Order, t, detail),
            None => Ok(EquivVerdict::NotEquivalent {
                reason: Mismatch::Order,
                witness: None,
                detail,
            }),
        };
    }
    decide_same_ordered_equiv_with(&na, &nb, opts.morphism)
}

/// Most subtree combinations tried below a mismatching pair.
const ORDER_COMBINATIONS: usize = 4096;

/// Searches below the pair where the normal forms `na` and `nb` disagree on
/// the order: the context leading to the pair is fixed and the children of
/// the mismatching symbol range over small trees of their domains.
fn order_witness(
    a: &Ltw,
    b: &Ltw,
    na: &Ltw,
    nb: &Ltw,
    mismatch: &OrderMismatch,
    budget: EnumerationBudget,
) -> Result<Option<Tree>> {
    let (p1, _) = mismatch.pair;
    let rule = na.rule(p1, mismatch.symbol).expect("mismatching rule");
    let n = rule.arity();
    let per_child = (1..).take_while(|k: &usize| k.pow(n as u32) <= ORDER_COMBINATIONS).last().unwrap_or(1);
    let mut options = vec![Vec::new(); n];
    for c in &rule.calls {
        let mut trees = enumerate_trees(na, c.state, budget).trees;
        trees.truncate(per_child);
        options[c.child] = trees;
    }
    // combinations by increasing largest index, so small trees come first
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for o in &options {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                (0..o.len()).map(move |j| {
                    let mut c = c.clone();
                    c.push(j);
                    c
                })
            })
            .collect();
    }
    combos.sort_by_key(|c| (c.iter().max().copied(), c.iter().sum::<usize>()));
    let name = na.alphabet().name(mismatch.symbol);
    for combo in combos {
        let children = combo.iter().zip(&options).map(|(&j, o)| o[j].clone()).collect();
        let Some(t) = plug_at_pair(na, nb, mismatch.pair, Tree::new(name, children)) else {
            return Ok(None);
        };
        if separates(a, b, &t)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}
