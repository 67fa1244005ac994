//! Periodicity of state languages.

use super::shortest::{ErasingInfo, ShortestWords};
use crate::error::{Error, Result};
use crate::ltw::{Ltw, StateId};
use crate::word::{Length, WordRef};
use num_integer::Integer;
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

/// The primitive period `π` with `L_q ⊆ π^*`, if there is one.
///
/// Erasing states get the empty period. Otherwise `π` is the primitive root of
/// some nonempty word of `L_q`, and the check walks every reachable pair
/// (state, phase): a state entered at phase `c` must emit words that are
/// factors of `π^ω` starting at offset `c`. The phase after a call advances by
/// the callee's output length modulo `|π|`, which must be the same for all its
/// rules. A state may be entered at several phases; that only happens for
/// states whose words are all shorter than `|π|`.
pub fn is_periodic_state(m: &mut Ltw, q: StateId) -> Result<Option<WordRef>> {
    let sw = ShortestWords::compute(m);
    let info = ErasingInfo::compute(m);
    periodic_with(m, &sw, &info, q)
}

pub(crate) fn periodic_with(
    m: &mut Ltw,
    sw: &ShortestWords,
    info: &ErasingInfo,
    q: StateId,
) -> Result<Option<WordRef>> {
    if !info.is_productive(q) {
        return Err(Error::EmptyDomain(m.state_name(q).to_string()));
    }
    if info.is_erasing(q) {
        return Ok(Some(m.pool().empty()));
    }
    let witness = info.nonempty_word(m, sw, q).expect("non-erasing");
    let pi = m.pool_mut().primitive_root(witness)?;
    let ell = m.pool().len(pi).clone();

    let reachable: Vec<StateId> = m
        .accessible(q)
        .into_iter()
        .filter(|&p| info.is_productive(p))
        .collect();
    let residue: BTreeMap<StateId, Length> = reachable
        .iter()
        .map(|&p| (p, sw.len(p).expect("productive") % &ell))
        .collect();
    if !residue[&q].is_zero() {
        return Ok(None);
    }
    let usable = |m: &Ltw, p: StateId| -> Vec<crate::ltw::Rule> {
        m.rules_of(p)
            .filter(|(_, r)| r.calls.iter().all(|c| info.is_productive(c.state)))
            .map(|(_, r)| r.clone())
            .collect()
    };
    for &p in &reachable {
        for rule in usable(m, p) {
            let mut total = Length::zero();
            for &w in &rule.words {
                total += m.pool().len(w);
            }
            for c in &rule.calls {
                total += &residue[&c.state];
            }
            if total % &ell != residue[&p] {
                return Ok(None);
            }
        }
    }

    let mut rotations: HashMap<Length, WordRef> = HashMap::new();
    let mut seen: HashSet<(StateId, Length)> = HashSet::new();
    let mut queue = VecDeque::from([(q, Length::zero())]);
    seen.insert((q, Length::zero()));
    while let Some((p, phase)) = queue.pop_front() {
        for rule in usable(m, p) {
            let mut c = phase.clone();
            if !matches_at(m, &mut rotations, pi, &ell, rule.words[0], &c) {
                return Ok(None);
            }
            c = (c + m.pool().len(rule.words[0])) % &ell;
            for (i, call) in rule.calls.iter().enumerate() {
                if seen.insert((call.state, c.clone())) {
                    queue.push_back((call.state, c.clone()));
                }
                c = (c + &residue[&call.state]) % &ell;
                let w = rule.words[i + 1];
                if !matches_at(m, &mut rotations, pi, &ell, w, &c) {
                    return Ok(None);
                }
                c = (c + m.pool().len(w)) % &ell;
            }
        }
    }
    Ok(Some(pi))
}

/// Whether `u` is the prefix of length `|u|` of `(ρ_phase[π])^ω`.
fn matches_at(
    m: &mut Ltw,
    rotations: &mut HashMap<Length, WordRef>,
    pi: WordRef,
    ell: &Length,
    u: WordRef,
    phase: &Length,
) -> bool {
    let pool = m.pool_mut();
    if pool.is_empty(u) {
        return true;
    }
    let rot = *rotations
        .entry(phase.clone())
        .or_insert_with(|| pool.rotate_left(pi, phase));
    let len = pool.len(u).clone();
    let k = len.div_ceil(ell);
    let pw = pool.power(rot, &k);
    let expected = pool.prefix(pw, &len).expect("power is long enough");
    pool.equals(u, expected)
}
