//! Quasi-periodicity of states and of rule parts.

use super::periodic::periodic_with;
use super::shift::build_tq_with;
use super::shortest::{ErasingInfo, ShortestWords};
use crate::equivalence::{decide_same_ordered_equiv, EquivVerdict};
use crate::error::{Error, Result};
use crate::ltw::{Call, Ltw, Rule, StateId, SymbolId, HAT_SUFFIX};
use crate::word::{SlpPool, WordRef};
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "left",
            Direction::Right => "right",
        })
    }
}

/// `L ⊆ handle · period^*` (left) or `L ⊆ period^* · handle` (right).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuasiPeriodicity {
    pub direction: Direction,
    pub handle: WordRef,
    /// Primitive, or ε for erasing languages.
    pub period: WordRef,
}

impl QuasiPeriodicity {
    pub fn is_trivial(&self, pool: &SlpPool) -> bool {
        pool.is_empty(self.period)
    }

    pub fn is_earliest(&self, pool: &SlpPool) -> bool {
        pool.is_empty(self.handle)
    }

    pub fn describe(&self, pool: &SlpPool, max: usize) -> String {
        format!(
            "quasi-periodic({}): handle={} period={}",
            self.direction,
            pool.display(self.handle, max),
            pool.display(self.period, max)
        )
    }
}

/// Decides whether `q` is quasi-periodic in the given direction.
///
/// Left: build `T^q`, check that its root copy is periodic, then that
/// `⟦M⟧_q = ⟦T^q⟧`; the handle is the shortest word of `L_q`. Right runs the
/// same procedure on the mirror image. Handle and period live in `m`'s pool.
pub fn quasi_periodicity(m: &mut Ltw, q: StateId, direction: Direction) -> Result<Option<QuasiPeriodicity>> {
    match direction {
        Direction::Left => quasi_left(m, q),
        Direction::Right => {
            let mut mirrored = m.mirror();
            let Some(v) = quasi_left(&mut mirrored, q)? else {
                return Ok(None);
            };
            let handle = mirrored.pool_mut().reverse(v.handle);
            let period = mirrored.pool_mut().reverse(v.period);
            let mut memo = HashMap::new();
            let handle = m.pool_mut().import(mirrored.pool(), handle, &mut memo);
            let period = m.pool_mut().import(mirrored.pool(), period, &mut memo);
            Ok(Some(QuasiPeriodicity {
                direction,
                handle,
                period,
            }))
        }
    }
}

fn quasi_left(m: &mut Ltw, q: StateId) -> Result<Option<QuasiPeriodicity>> {
    let sw = ShortestWords::compute(m);
    let handle = sw.word_or_err(m, q)?;
    let mut tq = build_tq_with(m, &sw, q)?;
    let root = tq.axiom().state;
    let tq_sw = ShortestWords::compute(&mut tq);
    let tq_info = ErasingInfo::compute(&tq);
    let Some(period) = periodic_with(&mut tq, &tq_sw, &tq_info, root)? else {
        return Ok(None);
    };
    let restricted = m.restrict_to(q)?;
    match decide_same_ordered_equiv(&restricted, &tq)? {
        EquivVerdict::Equivalent => {}
        EquivVerdict::NotEquivalent { .. } => return Ok(None),
    }
    let mut memo = HashMap::new();
    let period = m.pool_mut().import(tq.pool(), period, &mut memo);
    Ok(Some(QuasiPeriodicity {
        direction: Direction::Left,
        handle,
        period,
    }))
}

/// The part `q_i(x) u_i` of the rule for `(state, symbol)`, with `index` the
/// 1-based call position `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartRef {
    pub state: StateId,
    pub symbol: SymbolId,
    pub index: usize,
}

impl PartRef {
    fn resolve(&self, m: &Ltw) -> Result<(StateId, WordRef)> {
        let invalid = |reason: &str| Error::InvalidRule {
            state: m.state_name(self.state).to_string(),
            symbol: m.alphabet().name(self.symbol).to_string(),
            reason: reason.to_string(),
        };
        let rule = m.rule(self.state, self.symbol).ok_or_else(|| invalid("no such rule"))?;
        if self.index == 0 || self.index > rule.arity() {
            return Err(invalid("part index out of range"));
        }
        Ok((rule.calls[self.index - 1].state, rule.words[self.index]))
    }
}

/// Adds the state `q̂` for the part `q(x) u`: every rule of `q` with `u`
/// appended. Then every occurrence of `q(x)` followed by a word starting with
/// `u`, including those inside the new rules, becomes `q̂(x)`.
pub fn add_part_state(m: &mut Ltw, part: PartRef) -> Result<StateId> {
    let (q, u) = part.resolve(m)?;
    let name = format!("{}{HAT_SUFFIX}", m.state_name(q));
    let hat = m.fresh_state(&name);
    let rules: Vec<(SymbolId, Rule)> = m.rules_of(q).map(|(f, r)| (f, r.clone())).collect();
    for (f, mut rule) in rules {
        let last = rule.words.last_mut().expect("n+1 words");
        *last = m.pool_mut().concat(*last, u);
        m.put_rule(hat, f, rule)?;
    }
    let u_len = m.pool().len(u).clone();
    let keys: Vec<(StateId, SymbolId)> = m.rules().map(|(p, f, _)| (p, f)).collect();
    for (p, f) in keys {
        let mut rule = m.rule(p, f).expect("listed").clone();
        let mut changed = false;
        for j in 0..rule.calls.len() {
            if rule.calls[j].state != q {
                continue;
            }
            let after = rule.words[j + 1];
            let pool = m.pool_mut();
            if pool.len(after) < &u_len {
                continue;
            }
            let head = pool.prefix(after, &u_len)?;
            if pool.equals(head, u) {
                rule.words[j + 1] = pool.strip_prefix(after, &u_len)?;
                rule.calls[j] = Call {
                    state: hat,
                    child: rule.calls[j].child,
                };
                changed = true;
            }
        }
        if changed {
            m.put_rule(p, f, rule)?;
        }
    }
    Ok(hat)
}

/// Tests `L_q u` for left quasi-periodicity on a scratch copy of `m`.
pub fn rule_part_quasi_periodicity(m: &mut Ltw, part: PartRef) -> Result<Option<QuasiPeriodicity>> {
    let mut scratch = m.clone();
    let hat = add_part_state(&mut scratch, part)?;
    let Some(v) = quasi_periodicity(&mut scratch, hat, Direction::Left)? else {
        return Ok(None);
    };
    let mut memo = HashMap::new();
    Ok(Some(QuasiPeriodicity {
        direction: Direction::Left,
        handle: m.pool_mut().import(scratch.pool(), v.handle, &mut memo),
        period: m.pool_mut().import(scratch.pool(), v.period, &mut memo),
    }))
}

/// The scratch transducer with `q̂`, and `T^q̂` built from it.
pub fn rule_part_tq(m: &Ltw, part: PartRef) -> Result<(Ltw, StateId, Ltw)> {
    let mut scratch = m.clone();
    let hat = add_part_state(&mut scratch, part)?;
    let sw = ShortestWords::compute(&mut scratch);
    let tq = build_tq_with(&scratch, &sw, hat)?;
    Ok((scratch, hat, tq))
}
