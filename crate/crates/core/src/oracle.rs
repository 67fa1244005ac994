//! Brute-force ground truth: bounded tree enumeration, explicit evaluation
//! and sample-based quasi-periodicity.

use crate::analysis::quasi::Direction;
use crate::error::Result;
use crate::ltw::{align_alphabets, Ltw, StateId, SymbolId};
use crate::tree::Tree;
use crate::word::{primitive_root_explicit, WordError};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    /// Maximum tree height, a leaf having height 1.
    pub depth: usize,
    pub max_trees: usize,
    /// Maximum length of an explicitly evaluated word.
    pub max_word: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            depth: 5,
            max_trees: 20_000,
            max_word: 100_000,
        }
    }
}

impl EnumerationBudget {
    pub fn with_depth(depth: usize) -> Self {
        EnumerationBudget {
            depth,
            ..Self::default()
        }
    }
}

/// Which bound stopped an enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exhaustion {
    Complete,
    Depth,
    Trees,
}

impl fmt::Display for Exhaustion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exhaustion::Complete => "complete",
            Exhaustion::Depth => "depth bound reached",
            Exhaustion::Trees => "tree count bound reached",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub trees: Vec<Tree>,
    pub stopped_by: Exhaustion,
}

/// Hash-consed trees, so that a tree shared by several domains is built once
/// and equal trees have equal ids.
#[derive(Default)]
struct Arena {
    nodes: Vec<(SymbolId, Vec<u32>)>,
    height: Vec<usize>,
    index: HashMap<(SymbolId, Vec<u32>), u32>,
}

impl Arena {
    fn node(&mut self, f: SymbolId, children: Vec<u32>) -> u32 {
        if let Some(&id) = self.index.get(&(f, children.clone())) {
            return id;
        }
        let id = self.nodes.len() as u32;
        let h = 1 + children.iter().map(|&c| self.height[c as usize]).max().unwrap_or(0);
        self.height.push(h);
        self.nodes.push((f, children.clone()));
        self.index.insert((f, children), id);
        id
    }

    /// Position of every node in the order (height, symbol, children).
    fn ranks(&self) -> Vec<usize> {
        let mut ids: Vec<u32> = (0..self.nodes.len() as u32).collect();
        ids.sort_by_key(|&i| self.height[i as usize]);
        let mut rank = vec![0; self.nodes.len()];
        let mut start = 0;
        while start < ids.len() {
            let h = self.height[ids[start] as usize];
            let end = start + ids[start..].iter().take_while(|&&i| self.height[i as usize] == h).count();
            // children are lower, so their ranks are final
            ids[start..end].sort_by_cached_key(|&i| {
                let (f, children) = &self.nodes[i as usize];
                (f.index(), children.iter().map(|&c| rank[c as usize]).collect::<Vec<_>>())
            });
            for (k, &i) in ids[start..end].iter().enumerate() {
                rank[i as usize] = start + k;
            }
            start = end;
        }
        rank
    }

    fn tree(&self, m: &Ltw, id: u32) -> Tree {
        let (f, children) = &self.nodes[id as usize];
        Tree::new(m.alphabet().name(*f), children.iter().map(|&c| self.tree(m, c)).collect())
    }
}

struct Enumerator<'a> {
    m: &'a Ltw,
    states: Vec<StateId>,
    /// Trees of `dom(q)` by exact height, indexed `[q][h]`; height 0 is empty.
    exact: Vec<Vec<Vec<u32>>>,
}

impl<'a> Enumerator<'a> {
    fn new(m: &'a Ltw, q: StateId) -> Self {
        Enumerator {
            m,
            states: m.accessible(q).into_iter().collect(),
            exact: vec![vec![Vec::new()]; m.num_states()],
        }
    }

    /// Child choices for a rule at height `h`: the first child of height
    /// `h - 1` sits at position `tall`.
    fn child_options<'t>(exact: &'t [Vec<Vec<u32>>], states: &[StateId], h: usize, tall: usize) -> Vec<Vec<u32>> {
        let heights = |p: StateId, lo: usize, hi: usize| -> Vec<u32> {
            exact[p.index()].iter().take(hi + 1).skip(lo).flatten().copied().collect()
        };
        (0..states.len())
            .map(|i| match i.cmp(&tall) {
                Ordering::Less => heights(states[i], 1, h - 2),
                Ordering::Equal => heights(states[i], h - 1, h - 1),
                Ordering::Greater => heights(states[i], 1, h - 1),
            })
            .collect()
    }

    fn callee_states(rule: &crate::ltw::Rule) -> Vec<StateId> {
        let mut states = vec![StateId(0); rule.arity()];
        for c in &rule.calls {
            states[c.child] = c.state;
        }
        states
    }

    /// Fills height `h` for every state; false once `count` reaches `limit`.
    fn level(&mut self, arena: &mut Arena, h: usize, count: &mut usize, limit: usize) -> bool {
        let mut fresh: Vec<Vec<u32>> = vec![Vec::new(); self.m.num_states()];
        for &q in &self.states {
            for (f, rule) in self.m.rules_of(q) {
                if rule.arity() == 0 || h == 1 {
                    if rule.arity() == 0 && h == 1 {
                        if *count >= limit {
                            return false;
                        }
                        *count += 1;
                        fresh[q.index()].push(arena.node(f, Vec::new()));
                    }
                    continue;
                }
                let states = Self::callee_states(rule);
                for tall in 0..states.len() {
                    let options = Self::child_options(&self.exact, &states, h, tall);
                    if options.iter().any(|o| o.is_empty()) {
                        continue;
                    }
                    let mut idx = vec![0; options.len()];
                    loop {
                        if *count >= limit {
                            return false;
                        }
                        *count += 1;
                        let children = idx.iter().zip(&options).map(|(&j, o)| o[j]).collect();
                        fresh[q.index()].push(arena.node(f, children));
                        // odometer, last position fastest
                        let mut i = idx.len();
                        while i > 0 {
                            i -= 1;
                            idx[i] += 1;
                            if idx[i] < options[i].len() {
                                break;
                            }
                            idx[i] = 0;
                        }
                        if idx.iter().all(|&j| j == 0) {
                            break;
                        }
                    }
                }
            }
        }
        for (q, trees) in fresh.into_iter().enumerate() {
            self.exact[q].push(trees);
        }
        true
    }

    /// Whether `dom(q)` has a tree of height `h`, given all lower heights.
    fn has_height(&self, q: StateId, h: usize) -> bool {
        h > 1
            && self.m.rules_of(q).any(|(_, rule)| {
                let states = Self::callee_states(rule);
                (0..states.len()).any(|tall| {
                    Self::child_options(&self.exact, &states, h, tall).iter().all(|o| !o.is_empty())
                })
            })
    }

    /// Runs to the budget's depth and returns the ids of `dom(q)`.
    fn run(&mut self, arena: &mut Arena, q: StateId, budget: EnumerationBudget, count: &mut usize) -> (Vec<u32>, Exhaustion) {
        let mut stopped_by = Exhaustion::Complete;
        for h in 1..=budget.depth {
            if !self.level(arena, h, count, budget.max_trees) {
                stopped_by = Exhaustion::Trees;
                break;
            }
        }
        if stopped_by == Exhaustion::Complete && self.has_height(q, budget.depth + 1) {
            stopped_by = Exhaustion::Depth;
        }
        (self.exact[q.index()].iter().flatten().copied().collect(), stopped_by)
    }
}

fn sorted_ids(arena: &Arena, mut ids: Vec<u32>) -> Vec<u32> {
    let rank = arena.ranks();
    ids.sort_by_key(|&i| rank[i as usize]);
    ids.dedup();
    ids
}

/// Trees in `dom(q)` up to the budget's height, ordered by height, then
/// symbol declaration order, then children.
pub fn enumerate_trees(m: &Ltw, q: StateId, budget: EnumerationBudget) -> Enumeration {
    let mut arena = Arena::default();
    let (ids, stopped_by) = Enumerator::new(m, q).run(&mut arena, q, budget, &mut 0);
    Enumeration {
        trees: sorted_ids(&arena, ids).into_iter().map(|i| arena.tree(m, i)).collect(),
        stopped_by,
    }
}

/// Trees of the transducer's domain.
pub fn enumerate_domain(m: &Ltw, budget: EnumerationBudget) -> Enumeration {
    enumerate_trees(m, m.axiom().state, budget)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteVerdict {
    NoDifference { checked: usize, stopped_by: Exhaustion },
    Difference {
        witness: Tree,
        left: Option<Vec<u8>>,
        right: Option<Vec<u8>>,
    },
}

impl BruteVerdict {
    pub fn witness(&self) -> Option<&Tree> {
        match self {
            BruteVerdict::Difference { witness, .. } => Some(witness),
            BruteVerdict::NoDifference { .. } => None,
        }
    }
}

/// Explicit outputs over arena trees, memoised per state and subtree.
struct Evaluator<'a> {
    m: &'a Ltw,
    arena: &'a Arena,
    cap: usize,
    memo: HashMap<(StateId, u32), Option<Rc<[u8]>>>,
}

impl<'a> Evaluator<'a> {
    fn new(m: &'a Ltw, arena: &'a Arena, cap: usize) -> Self {
        Evaluator {
            m,
            arena,
            cap,
            memo: HashMap::new(),
        }
    }

    fn state(&mut self, q: StateId, id: u32) -> Result<Option<Rc<[u8]>>> {
        if let Some(w) = self.memo.get(&(q, id)) {
            return Ok(w.clone());
        }
        let (f, children) = &self.arena.nodes[id as usize];
        let out = match self.m.rule(q, *f) {
            None => None,
            Some(rule) => {
                let mut out = Vec::new();
                let pool = self.m.pool();
                pool.expand_into(rule.words[0], &mut out, self.cap)?;
                let mut defined = true;
                for (i, c) in rule.calls.iter().enumerate() {
                    match self.state(c.state, children[c.child])? {
                        Some(w) => out.extend_from_slice(&w),
                        None => {
                            defined = false;
                            break;
                        }
                    }
                    pool.expand_into(rule.words[i + 1], &mut out, self.cap)?;
                }
                if out.len() > self.cap {
                    return Err(WordError::CapExceeded(out.len().into()).into());
                }
                defined.then(|| out.into())
            }
        };
        self.memo.insert((q, id), out.clone());
        Ok(out)
    }

    fn output(&mut self, id: u32) -> Result<Option<Vec<u8>>> {
        let ax = self.m.axiom();
        let Some(mid) = self.state(ax.state, id)? else {
            return Ok(None);
        };
        let mut out = Vec::new();
        let pool = self.m.pool();
        pool.expand_into(ax.before, &mut out, self.cap)?;
        out.extend_from_slice(&mid);
        pool.expand_into(ax.after, &mut out, self.cap)?;
        if out.len() > self.cap {
            return Err(WordError::CapExceeded(out.len().into()).into());
        }
        Ok(Some(out))
    }
}

/// Compares definedness and explicit outputs on every budgeted tree of
/// either domain; returns the first difference in enumeration order.
pub fn brute_equiv(m1: &Ltw, m2: &Ltw, budget: EnumerationBudget) -> Result<BruteVerdict> {
    brute_equiv_jobs(m1, m2, budget, 1)
}

/// [`brute_equiv`] with the evaluations split over `jobs` threads.
pub fn brute_equiv_jobs(m1: &Ltw, m2: &Ltw, budget: EnumerationBudget, jobs: usize) -> Result<BruteVerdict> {
    let (a, b) = align_alphabets(m1, m2)?;
    let (arena, ids, stopped_by) = union_of_domains(&a, &b, budget);
    let chunk = ids.len().div_ceil(jobs.max(1)).max(1);
    let found: Vec<Result<Option<(u32, Option<Vec<u8>>, Option<Vec<u8>>)>>> = std::thread::scope(|s| {
        let handles: Vec<_> = ids
            .chunks(chunk)
            .map(|part| {
                let (a, b, arena) = (&a, &b, &arena);
                s.spawn(move || {
                    let mut left = Evaluator::new(a, arena, budget.max_word);
                    let mut right = Evaluator::new(b, arena, budget.max_word);
                    for &id in part {
                        let (l, r) = (left.output(id)?, right.output(id)?);
                        if l != r {
                            return Ok(Some((id, l, r)));
                        }
                    }
                    Ok(None)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    // chunks are in enumeration order, so the first hit is the minimal one
    for r in found {
        if let Some((id, left, right)) = r? {
            return Ok(BruteVerdict::Difference {
                witness: arena.tree(&a, id),
                left,
                right,
            });
        }
    }
    Ok(BruteVerdict::NoDifference {
        checked: ids.len(),
        stopped_by,
    })
}

/// Both domains in enumeration order; `a` and `b` share an alphabet. Each
/// side gets the full tree budget.
fn union_of_domains(a: &Ltw, b: &Ltw, budget: EnumerationBudget) -> (Arena, Vec<u32>, Exhaustion) {
    let mut arena = Arena::default();
    let (mut ids, sa) = Enumerator::new(a, a.axiom().state).run(&mut arena, a.axiom().state, budget, &mut 0);
    let (more, sb) = Enumerator::new(b, b.axiom().state).run(&mut arena, b.axiom().state, budget, &mut 0);
    ids.extend(more);
    let stopped_by = match (sa, sb) {
        (Exhaustion::Trees, _) | (_, Exhaustion::Trees) => Exhaustion::Trees,
        (Exhaustion::Depth, _) | (_, Exhaustion::Depth) => Exhaustion::Depth,
        _ => Exhaustion::Complete,
    };
    let ids = sorted_ids(&arena, ids);
    (arena, ids, stopped_by)
}

/// A separating tree within the budget, if one exists. Outputs are compared
/// as compressed words, so long outputs are not a problem.
pub fn find_difference(m1: &Ltw, m2: &Ltw, budget: EnumerationBudget) -> Result<Option<Tree>> {
    let (a, b) = align_alphabets(m1, m2)?;
    let (arena, ids, _) = union_of_domains(&a, &b, budget);
    for id in ids {
        let t = arena.tree(&a, id);
        if crate::equivalence::separates(&a, &b, &t)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Explicit outputs of a state on its budgeted domain trees.
pub fn sample_outputs(m: &Ltw, q: StateId, budget: EnumerationBudget) -> Result<Vec<Vec<u8>>> {
    enumerate_trees(m, q, budget)
        .trees
        .iter()
        .map(|t| m.evaluate_state_explicit(q, t, budget.max_word))
        .collect()
}

/// Checks `L ⊆ handle · period^*` (or the mirror) literally on a finite
/// sample. Success is only evidence.
pub fn brute_quasi_periodic(words: &[Vec<u8>], direction: Direction) -> Option<(Vec<u8>, Vec<u8>)> {
    if direction == Direction::Right {
        let rev: Vec<Vec<u8>> = words.iter().map(|w| w.iter().rev().copied().collect()).collect();
        let (h, p) = brute_quasi_periodic(&rev, Direction::Left)?;
        return Some((h.into_iter().rev().collect(), p.into_iter().rev().collect()));
    }
    let mut sorted: Vec<&Vec<u8>> = words.iter().collect();
    sorted.sort_by_key(|w| (w.len(), w.to_vec()));
    sorted.dedup();
    let handle = sorted.first()?.to_vec();
    if sorted.get(1).is_some_and(|w| w.len() == handle.len()) {
        return None;
    }
    if !sorted.iter().all(|w| w.starts_with(&handle)) {
        return None;
    }
    let period = match sorted.get(1) {
        Some(w) => primitive_root_explicit(&w[handle.len()..]).to_vec(),
        None => Vec::new(),
    };
    let fits = sorted.iter().all(|w| {
        let rest = &w[handle.len()..];
        if period.is_empty() {
            rest.is_empty()
        } else {
            rest.len() % period.len() == 0 && rest.chunks(period.len()).all(|c| c == period.as_slice())
        }
    });
    fits.then_some((handle, period))
}

/// Periodicity of a finite sample: `L ⊆ π^*` with `π` primitive.
pub fn brute_periodic(words: &[Vec<u8>]) -> Option<Vec<u8>> {
    let Some(w) = words.iter().find(|w| !w.is_empty()) else {
        return Some(Vec::new());
    };
    let pi = primitive_root_explicit(w).to_vec();
    words
        .iter()
        .all(|w| w.len() % pi.len() == 0 && w.chunks(pi.len()).all(|c| c == pi.as_slice()))
        .then_some(pi)
}
