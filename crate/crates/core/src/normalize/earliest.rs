//! Local earliest construction for quasi-periodic states, and step 1 of the
//! pipeline.

use super::{Action, NormalizationReport};
use crate::analysis::quasi::{quasi_periodicity, Direction, QuasiPeriodicity};
use crate::analysis::shift::mock_shift_table;
use crate::analysis::shortest::ShortestWords;
use crate::error::{Error, Result};
use crate::ltw::{Axiom, Call, Ltw, Rule, StateId, SymbolId, EARLIEST_SUFFIX, HAT_SUFFIX};
use crate::word::Length;
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

/// Earliest copies already built, keyed by original state name, direction,
/// period length and shift modulo that length.
#[derive(Clone, Debug, Default)]
pub struct EarliestCopies {
    names: HashMap<(String, Direction, Length, Length), String>,
}

impl EarliestCopies {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Replaces `q` by `handle · q^e` (left) or `q^e · handle` (right), where
/// `q^e` and the copies `p^e` it calls produce the outputs of the original
/// states with the shortest word removed and the shift rotated away.
pub fn make_state_earliest(m: &Ltw, q: StateId, verdict: &QuasiPeriodicity) -> Result<Ltw> {
    make_state_earliest_with(m, q, verdict, &mut EarliestCopies::default())
}

pub fn make_state_earliest_with(
    m: &Ltw,
    q: StateId,
    verdict: &QuasiPeriodicity,
    copies: &mut EarliestCopies,
) -> Result<Ltw> {
    match verdict.direction {
        Direction::Left => earliest_left(m, q, verdict, copies),
        Direction::Right => {
            let mut mirrored = m.mirror();
            let pool = mirrored.pool_mut();
            let v = QuasiPeriodicity {
                direction: Direction::Right,
                handle: pool.reverse(verdict.handle),
                period: pool.reverse(verdict.period),
            };
            Ok(earliest_left(&mirrored, q, &v, copies)?.mirror())
        }
    }
}

fn copy_name(name: &str) -> String {
    format!("{}{EARLIEST_SUFFIX}", name.strip_suffix(HAT_SUFFIX).unwrap_or(name))
}

fn earliest_left(m: &Ltw, q: StateId, verdict: &QuasiPeriodicity, copies: &mut EarliestCopies) -> Result<Ltw> {
    let mut out = m.clone();
    let sw = ShortestWords::compute(&mut out);
    let wq = sw.word_or_err(&out, q)?;
    if !out.pool().equals(wq, verdict.handle) {
        return Err(Error::InvalidVerdict(out.state_name(q).to_string()));
    }
    let ell = out.pool().len(verdict.period).clone();
    let table = mock_shift_table(&out, &sw, q);

    let mut copy: BTreeMap<StateId, StateId> = BTreeMap::new();
    let mut fresh = Vec::new();
    for (&p, s) in &table.shifts {
        let offset = if ell.is_zero() { Length::zero() } else { s % &ell };
        let key = (out.state_name(p).to_string(), verdict.direction, ell.clone(), offset);
        match copies.names.get(&key).and_then(|n| out.state(n)) {
            Some(c) => {
                copy.insert(p, c);
            }
            None => {
                let c = out.fresh_state(&copy_name(&key.0));
                let name = out.state_name(c).to_string();
                // a trimmed copy's name may have been handed out again
                copies.names.retain(|_, n| *n != name);
                copies.names.insert(key, name);
                copy.insert(p, c);
                fresh.push((p, s.clone()));
            }
        }
    }
    let created: HashSet<StateId> = fresh.iter().map(|(p, _)| copy[p]).collect();

    let empty = out.pool().empty();
    for (p, shift) in &fresh {
        let wp_len = sw.len(*p).expect("accessible states are productive").clone();
        let rules: Vec<(SymbolId, Rule)> = out.rules_of(*p).map(|(f, r)| (f, r.clone())).collect();
        for (f, rule) in rules {
            if rule.calls.iter().any(|c| sw.word(c.state).is_none()) {
                continue;
            }
            let pool = out.pool_mut();
            let mut u = rule.words[0];
            for (i, c) in rule.calls.iter().enumerate() {
                u = pool.concat_all([u, sw.word(c.state).expect("checked"), rule.words[i + 1]]);
            }
            let stripped = pool.strip_prefix(u, &wp_len)?;
            let mut words = vec![pool.rotate_left(stripped, shift)];
            words.resize(rule.calls.len() + 1, empty);
            let calls = rule
                .calls
                .iter()
                .map(|c| Call {
                    state: copy[&c.state],
                    child: c.child,
                })
                .collect();
            out.put_rule(copy[p], f, Rule { words, calls })?;
        }
    }

    let qe = copy[&q];
    let keys: Vec<(StateId, SymbolId)> = out
        .rules()
        .filter(|(r, _, rule)| *r != q && !created.contains(r) && rule.calls.iter().any(|c| c.state == q))
        .map(|(r, f, _)| (r, f))
        .collect();
    for (r, f) in keys {
        let mut rule = out.rule(r, f).expect("listed").clone();
        for j in 0..rule.calls.len() {
            if rule.calls[j].state == q {
                rule.calls[j].state = qe;
                rule.words[j] = out.pool_mut().concat(rule.words[j], wq);
            }
        }
        out.put_rule(r, f, rule)?;
    }
    let ax = out.axiom();
    if ax.state == q {
        let before = out.pool_mut().concat(ax.before, wq);
        out.set_axiom(Axiom {
            before,
            state: qe,
            after: ax.after,
        });
    }
    out.remove_rules_of(q);
    out.trim()?;
    Ok(out)
}

/// Strongly connected components in topological order from the axiom, each
/// listed in breadth-first discovery order.
pub(crate) fn processing_order(m: &Ltw) -> Vec<StateId> {
    let root = m.axiom().state;
    let mut bfs = Vec::new();
    let mut rank = vec![usize::MAX; m.num_states()];
    let mut queue = VecDeque::from([root]);
    rank[root.index()] = 0;
    while let Some(p) = queue.pop_front() {
        bfs.push(p);
        for (_, r) in m.rules_of(p) {
            for c in &r.calls {
                if rank[c.state.index()] == usize::MAX {
                    rank[c.state.index()] = bfs.len() + queue.len();
                    queue.push_back(c.state);
                }
            }
        }
    }
    let comp = tarjan(m, &bfs);
    let count = comp.iter().filter_map(|c| *c).max().map_or(0, |c| c + 1);
    // Tarjan numbers components in reverse topological order
    let mut order = bfs;
    order.sort_by_key(|p| (count - comp[p.index()].expect("visited"), rank[p.index()]));
    order
}

fn tarjan(m: &Ltw, states: &[StateId]) -> Vec<Option<usize>> {
    let n = m.num_states();
    let succ: Vec<Vec<StateId>> = (0..n)
        .map(|i| {
            m.rules_of(StateId(i as u32))
                .flat_map(|(_, r)| r.calls.iter().map(|c| c.state))
                .collect()
        })
        .collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![None; n];
    let mut next = 0;
    let mut count = 0;
    for &s in states {
        if index[s.index()] != usize::MAX {
            continue;
        }
        // iterative depth-first search with explicit successor positions
        let mut work: Vec<(usize, usize)> = vec![(s.index(), 0)];
        index[s.index()] = next;
        low[s.index()] = next;
        next += 1;
        stack.push(s.index());
        on_stack[s.index()] = true;
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos].index();
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(u, _)) = work.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("on stack");
                    on_stack[w] = false;
                    comp[w] = Some(count);
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    comp
}

/// Step 1: makes every quasi-periodic state earliest. States are taken in
/// topological order of the call graph's components, each tested left first
/// and right only when it is not left quasi-periodic.
pub fn eliminate_quasi_periodic_states(m: &Ltw) -> Result<(Ltw, NormalizationReport)> {
    let mut copies = EarliestCopies::default();
    let mut report = NormalizationReport::default();
    let m = eliminate_with(m, &mut copies, &mut report)?;
    Ok((m, report))
}

pub(crate) fn eliminate_with(
    m: &Ltw,
    copies: &mut EarliestCopies,
    report: &mut NormalizationReport,
) -> Result<Ltw> {
    let mut m = m.trimmed()?;
    let mut visited: HashSet<String> = HashSet::new();
    loop {
        let next = processing_order(&m)
            .into_iter()
            .find(|&q| !visited.contains(m.state_name(q)));
        let Some(q) = next else { break };
        let name = m.state_name(q).to_string();
        visited.insert(name.clone());
        let verdict = match quasi_periodicity(&mut m, q, Direction::Left)? {
            Some(v) => Some(v),
            None => quasi_periodicity(&mut m, q, Direction::Right)?,
        };
        let Some(v) = verdict else { continue };
        if v.is_earliest(m.pool()) {
            continue;
        }
        report.actions.push(Action::State {
            state: name,
            direction: v.direction,
            handle: m.pool().display(v.handle, super::REPORT_WORD_LIMIT),
            period: m.pool().display(v.period, super::REPORT_WORD_LIMIT),
        });
        let before: HashSet<String> = m.states().map(|p| m.state_name(p).to_string()).collect();
        m = make_state_earliest_with(&m, q, &v, copies)?;
        // fresh copies are earliest by construction
        visited.extend(m.states().map(|p| m.state_name(p).to_string()).filter(|n| !before.contains(n)));
    }
    Ok(m)
}
