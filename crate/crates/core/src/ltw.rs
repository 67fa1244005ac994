//! Deterministic linear tree-to-word transducers.

use crate::error::{Error, Result};
use crate::tree::Tree;
use crate::word::{SlpPool, WordRef};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Suffix of earliest copies built when a quasi-periodic state is replaced.
pub const EARLIEST_SUFFIX: &str = "__e";
/// Suffix of the auxiliary state standing for a rule part `q(x) u`.
pub const HAT_SUFFIX: &str = "__hat";
/// Suffix of the copies in the quasi-periodicity test transducer.
pub const TEST_SUFFIX: &str = "__T";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankedAlphabet {
    names: Vec<String>,
    arities: Vec<usize>,
    index: HashMap<String, SymbolId>,
}

impl RankedAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, arity: usize) -> Result<SymbolId> {
        if self.index.contains_key(name) {
            return Err(Error::DuplicateSymbol(name.to_string()));
        }
        let id = SymbolId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.arities.push(arity);
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn get(&self, name: &str) -> Option<SymbolId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, f: SymbolId) -> &str {
        &self.names[f.index()]
    }

    pub fn arity(&self, f: SymbolId) -> usize {
        self.arities[f.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Symbols in declaration order.
    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.names.len() as u32).map(SymbolId)
    }

    pub fn has_leaf(&self) -> bool {
        self.arities.contains(&0)
    }

    /// Extends `self` with the symbols of `other` it lacks.
    pub fn merge(&mut self, other: &RankedAlphabet) -> Result<()> {
        for f in other.symbols() {
            let (name, arity) = (other.name(f), other.arity(f));
            match self.get(name) {
                Some(g) if self.arity(g) != arity => return Err(Error::AlphabetMismatch(name.to_string())),
                Some(_) => {}
                None => {
                    self.add(name, arity)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A call `q(x_{child+1})` on the right-hand side of a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Call {
    pub state: StateId,
    /// 0-based input child index.
    pub child: usize,
}

/// Right-hand side `u_0 q_1(x_σ(1)) u_1 ... q_n(x_σ(n)) u_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub words: Vec<WordRef>,
    pub calls: Vec<Call>,
}

impl Rule {
    pub fn leaf(word: WordRef) -> Self {
        Rule {
            words: vec![word],
            calls: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.calls.len()
    }

    /// The permutation, as 0-based child indices in call order.
    pub fn sigma(&self) -> Vec<usize> {
        self.calls.iter().map(|c| c.child).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub before: WordRef,
    pub state: StateId,
    pub after: WordRef,
}

#[derive(Clone, Debug)]
pub struct Ltw {
    alphabet: RankedAlphabet,
    states: Vec<String>,
    state_index: HashMap<String, StateId>,
    axiom: Axiom,
    rules: BTreeMap<(StateId, SymbolId), Rule>,
    pool: SlpPool,
}

impl Ltw {
    /// A transducer with a single state `axiom_state` and axiom `ε q(x) ε`.
    pub fn new(alphabet: RankedAlphabet, pool: SlpPool, axiom_state: &str) -> Self {
        let empty = pool.empty();
        let mut m = Ltw {
            alphabet,
            states: Vec::new(),
            state_index: HashMap::new(),
            axiom: Axiom {
                before: empty,
                state: StateId(0),
                after: empty,
            },
            rules: BTreeMap::new(),
            pool,
        };
        let q = m.add_state(axiom_state).expect("fresh transducer");
        m.axiom.state = q;
        m
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn pool(&self) -> &SlpPool {
        &self.pool
    }

    pub fn pool_mut(&mut self) -> &mut SlpPool {
        &mut self.pool
    }

    pub fn axiom(&self) -> Axiom {
        self.axiom
    }

    pub fn set_axiom(&mut self, axiom: Axiom) {
        self.axiom = axiom;
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }

    pub fn state_or_err(&self, name: &str) -> Result<StateId> {
        self.state(name).ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn add_state(&mut self, name: &str) -> Result<StateId> {
        if self.state_index.contains_key(name) {
            return Err(Error::DuplicateState(name.to_string()));
        }
        let q = StateId(self.states.len() as u32);
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), q);
        Ok(q)
    }

    /// Adds a state named `base`, or `base2`, `base3`, ... if taken.
    pub fn fresh_state(&mut self, base: &str) -> StateId {
        if self.state(base).is_none() {
            return self.add_state(base).expect("name checked");
        }
        let mut k = 2;
        loop {
            let name = format!("{base}{k}");
            if self.state(&name).is_none() {
                return self.add_state(&name).expect("name checked");
            }
            k += 1;
        }
    }

    pub fn rule(&self, q: StateId, f: SymbolId) -> Option<&Rule> {
        self.rules.get(&(q, f))
    }

    /// All rules ordered by state id, then symbol declaration order.
    pub fn rules(&self) -> impl Iterator<Item = (StateId, SymbolId, &Rule)> {
        self.rules.iter().map(|(&(q, f), r)| (q, f, r))
    }

    pub fn rules_of(&self, q: StateId) -> impl Iterator<Item = (SymbolId, &Rule)> {
        self.rules
            .range((q, SymbolId(0))..=(q, SymbolId(u32::MAX)))
            .map(|(&(_, f), r)| (f, r))
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    /// Total number of calls over all rules.
    pub fn call_sites(&self) -> usize {
        self.rules.values().map(Rule::arity).sum()
    }

    fn validate(&self, q: StateId, f: SymbolId, rule: &Rule) -> Result<()> {
        let invalid = |reason: String| Error::InvalidRule {
            state: self.state_name(q).to_string(),
            symbol: self.alphabet.name(f).to_string(),
            reason,
        };
        let n = self.alphabet.arity(f);
        if rule.calls.len() != n || rule.words.len() != n + 1 {
            return Err(invalid(format!("expected {n} calls and {} words", n + 1)));
        }
        let mut seen = vec![false; n];
        for c in &rule.calls {
            if c.child >= n || std::mem::replace(&mut seen[c.child], true) {
                return Err(invalid("child variables do not form a permutation".into()));
            }
            if c.state.index() >= self.states.len() {
                return Err(invalid("call to an unknown state".into()));
            }
        }
        Ok(())
    }

    /// Adds a rule; fails if `(q, f)` already has one.
    pub fn add_rule(&mut self, q: StateId, f: SymbolId, rule: Rule) -> Result<()> {
        if self.rules.contains_key(&(q, f)) {
            return Err(Error::DuplicateRule {
                state: self.state_name(q).to_string(),
                symbol: self.alphabet.name(f).to_string(),
            });
        }
        self.put_rule(q, f, rule)
    }

    /// Adds or replaces a rule.
    pub fn put_rule(&mut self, q: StateId, f: SymbolId, rule: Rule) -> Result<()> {
        self.validate(q, f, &rule)?;
        self.rules.insert((q, f), rule);
        Ok(())
    }

    pub fn remove_rule(&mut self, q: StateId, f: SymbolId) -> Option<Rule> {
        self.rules.remove(&(q, f))
    }

    pub fn remove_rules_of(&mut self, q: StateId) {
        self.rules.retain(|&(p, _), _| p != q);
    }

    /// Mutable access to every rule, for rewrites that keep arities intact.
    pub(crate) fn rules_mut(&mut self) -> impl Iterator<Item = (StateId, SymbolId, &mut Rule)> {
        self.rules.iter_mut().map(|(&(q, f), r)| (q, f, r))
    }


    fn lookup(&self, q: StateId, t: &Tree, path: &[usize]) -> Result<(SymbolId, &Rule)> {
        let f = self
            .alphabet
            .get(&t.symbol)
            .ok_or_else(|| Error::UnknownSymbol(t.symbol.clone()))?;
        let expected = self.alphabet.arity(f);
        if expected != t.children.len() {
            return Err(Error::Arity {
                symbol: t.symbol.clone(),
                expected,
                found: t.children.len(),
            });
        }
        let rule = self.rule(q, f).ok_or_else(|| Error::UndefinedInput {
            path: path.to_vec(),
            state: self.state_name(q).to_string(),
            symbol: t.symbol.clone(),
        })?;
        Ok((f, rule))
    }

    /// `⟦M⟧(t)` as a compressed word.
    pub fn evaluate(&mut self, t: &Tree) -> Result<WordRef> {
        let ax = self.axiom;
        let mid = self.evaluate_state(ax.state, t)?;
        let w = self.pool.concat(ax.before, mid);
        Ok(self.pool.concat(w, ax.after))
    }

    /// `⟦M⟧_q(t)` as a compressed word.
    pub fn evaluate_state(&mut self, q: StateId, t: &Tree) -> Result<WordRef> {
        let mut path = Vec::new();
        self.eval_rec(q, t, &mut path)
    }

    fn eval_rec(&mut self, q: StateId, t: &Tree, path: &mut Vec<usize>) -> Result<WordRef> {
        let (_, rule) = self.lookup(q, t, path)?;
        let rule = rule.clone();
        let mut acc = rule.words[0];
        for (i, c) in rule.calls.iter().enumerate() {
            path.push(c.child + 1);
            let w = self.eval_rec(c.state, &t.children[c.child], path)?;
            path.pop();
            acc = self.pool.concat(acc, w);
            acc = self.pool.concat(acc, rule.words[i + 1]);
        }
        Ok(acc)
    }

    /// `⟦M⟧(t)` written out, failing with `CapExceeded` past `cap` symbols.
    pub fn evaluate_explicit(&self, t: &Tree, cap: usize) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.pool.expand_into(self.axiom.before, &mut out, cap)?;
        self.explicit_rec(self.axiom.state, t, &mut Vec::new(), &mut out, cap)?;
        self.pool.expand_into(self.axiom.after, &mut out, cap)?;
        Ok(out)
    }

    /// `⟦M⟧_q(t)` written out.
    pub fn evaluate_state_explicit(&self, q: StateId, t: &Tree, cap: usize) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.explicit_rec(q, t, &mut Vec::new(), &mut out, cap)?;
        Ok(out)
    }

    fn explicit_rec(
        &self,
        q: StateId,
        t: &Tree,
        path: &mut Vec<usize>,
        out: &mut Vec<u8>,
        cap: usize,
    ) -> Result<()> {
        let (_, rule) = self.lookup(q, t, path)?;
        self.pool.expand_into(rule.words[0], out, cap)?;
        for (i, c) in rule.calls.iter().enumerate() {
            path.push(c.child + 1);
            self.explicit_rec(c.state, &t.children[c.child], path, out, cap)?;
            path.pop();
            self.pool.expand_into(rule.words[i + 1], out, cap)?;
        }
        Ok(())
    }

    pub fn domain_defined(&self, t: &Tree) -> bool {
        self.state_defined(self.axiom.state, t)
    }

    pub fn state_defined(&self, q: StateId, t: &Tree) -> bool {
        match self.lookup(q, t, &[]) {
            Ok((_, rule)) => rule
                .calls
                .iter()
                .all(|c| self.state_defined(c.state, &t.children[c.child])),
            Err(_) => false,
        }
    }

    /// States with a nonempty domain.
    pub fn productive(&self) -> Vec<bool> {
        let mut productive = vec![false; self.states.len()];
        loop {
            let mut changed = false;
            for (&(q, _), rule) in &self.rules {
                if !productive[q.index()] && rule.calls.iter().all(|c| productive[c.state.index()]) {
                    productive[q.index()] = true;
                    changed = true;
                }
            }
            if !changed {
                return productive;
            }
        }
    }

    /// Reflexive-transitive closure of the call relation from `q`.
    pub fn accessible(&self, q: StateId) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([q]);
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            for (_, rule) in self.rules_of(p) {
                for c in &rule.calls {
                    if seen.insert(c.state) {
                        stack.push(c.state);
                    }
                }
            }
        }
        seen
    }

    /// Removes domainless states, rules calling them, and inaccessible states.
    /// Surviving states keep their relative order.
    pub fn trim(&mut self) -> Result<()> {
        let productive = self.productive();
        if !productive[self.axiom.state.index()] {
            return Err(Error::EmptyTransducer);
        }
        self.rules
            .retain(|_, r| r.calls.iter().all(|c| productive[c.state.index()]));
        let keep = self.accessible(self.axiom.state);
        self.compact(&keep);
        Ok(())
    }

    pub fn trimmed(&self) -> Result<Ltw> {
        let mut m = self.clone();
        m.trim()?;
        Ok(m)
    }

    fn compact(&mut self, keep: &BTreeSet<StateId>) {
        if keep.len() == self.states.len() {
            return;
        }
        let mut map = vec![None; self.states.len()];
        let mut states = Vec::with_capacity(keep.len());
        for &q in keep {
            map[q.index()] = Some(StateId(states.len() as u32));
            states.push(std::mem::take(&mut self.states[q.index()]));
        }
        let rules = std::mem::take(&mut self.rules);
        for ((q, f), mut rule) in rules {
            let Some(nq) = map[q.index()] else { continue };
            for c in &mut rule.calls {
                c.state = map[c.state.index()].expect("callee of an accessible state");
            }
            self.rules.insert((nq, f), rule);
        }
        self.axiom.state = map[self.axiom.state.index()].expect("axiom state kept");
        self.state_index = states
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), StateId(i as u32)))
            .collect();
        self.states = states;
    }

    /// The transducer producing reversed outputs.
    pub fn mirror(&self) -> Ltw {
        let mut m = self.clone();
        let ax = self.axiom;
        let (before, after) = (m.pool.reverse(ax.after), m.pool.reverse(ax.before));
        m.axiom = Axiom {
            before,
            state: ax.state,
            after,
        };
        for rule in m.rules.values_mut() {
            rule.calls.reverse();
            rule.words.reverse();
            for w in &mut rule.words {
                *w = m.pool.reverse(*w);
            }
        }
        m
    }

    /// The transducer with axiom `q(x)`, trimmed.
    pub fn restrict_to(&self, q: StateId) -> Result<Ltw> {
        let mut m = self.clone();
        let empty = m.pool.empty();
        m.axiom = Axiom {
            before: empty,
            state: q,
            after: empty,
        };
        m.trim()?;
        Ok(m)
    }

    /// Rebuilds `self` over a larger alphabet containing every current symbol.
    pub fn with_alphabet(&self, alphabet: &RankedAlphabet) -> Result<Ltw> {
        let mut map = Vec::with_capacity(self.alphabet.len());
        for f in self.alphabet.symbols() {
            let name = self.alphabet.name(f);
            match alphabet.get(name) {
                Some(g) if alphabet.arity(g) == self.alphabet.arity(f) => map.push(g),
                _ => return Err(Error::AlphabetMismatch(name.to_string())),
            }
        }
        let mut m = self.clone();
        m.alphabet = alphabet.clone();
        m.rules = self
            .rules
            .iter()
            .map(|(&(q, f), r)| ((q, map[f.index()]), r.clone()))
            .collect();
        Ok(m)
    }

    /// Number of generated-state suffixes in a state name.
    pub fn generated_depth(name: &str) -> usize {
        [EARLIEST_SUFFIX, HAT_SUFFIX, TEST_SUFFIX]
            .iter()
            .map(|s| name.matches(s).count())
            .sum()
    }
}

/// Brings two transducers onto one shared alphabet (symbols of `a` first).
pub fn align_alphabets(a: &Ltw, b: &Ltw) -> Result<(Ltw, Ltw)> {
    let mut alphabet = a.alphabet().clone();
    alphabet.merge(b.alphabet())?;
    Ok((a.with_alphabet(&alphabet)?, b.with_alphabet(&alphabet)?))
}
