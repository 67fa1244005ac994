//! Merging of syntactically congruent states.

use super::{Action, NormalizationReport};
use crate::error::Result;
use crate::ltw::{Axiom, Ltw, StateId};
use crate::word::{SlpPool, WordRef, FINGERPRINTS};
use std::collections::HashMap;

/// Canonical ids for words, equal words sharing an id.
struct WordIds {
    buckets: HashMap<(String, [u64; FINGERPRINTS]), Vec<(WordRef, usize)>>,
    next: usize,
}

impl WordIds {
    fn id(&mut self, pool: &SlpPool, w: WordRef) -> usize {
        let mut key = [0; FINGERPRINTS];
        for (k, slot) in key.iter_mut().enumerate() {
            *slot = pool.fingerprint(w, k).hash;
        }
        let bucket = self.buckets.entry((pool.len(w).to_string(), key)).or_default();
        if let Some(&(_, id)) = bucket.iter().find(|(v, _)| pool.equals(*v, w)) {
            return id;
        }
        self.next += 1;
        bucket.push((w, self.next));
        self.next
    }
}

/// Merges states with identical rules up to the classes of their callees,
/// by partition refinement. Each class keeps the state with the fewest
/// generated suffixes, then the lowest id.
pub fn merge_congruent(m: &Ltw) -> Result<Ltw> {
    merge_with(m, &mut NormalizationReport::default())
}

pub(crate) fn merge_with(m: &Ltw, report: &mut NormalizationReport) -> Result<Ltw> {
    let n = m.num_states();
    let mut ids = WordIds {
        buckets: HashMap::new(),
        next: 0,
    };
    type Shape = Vec<(usize, Vec<usize>, Vec<usize>)>;
    let shapes: Vec<Shape> = m
        .states()
        .map(|q| {
            m.rules_of(q)
                .map(|(f, r)| {
                    let words = r.words.iter().map(|&w| ids.id(m.pool(), w)).collect();
                    (f.index(), words, r.sigma())
                })
                .collect()
        })
        .collect();
    let mut class = vec![0usize; n];
    let mut count = 0;
    loop {
        let mut seen: HashMap<(usize, &Shape, Vec<Vec<usize>>), usize> = HashMap::new();
        let mut next = vec![0; n];
        for q in m.states() {
            let callees = m
                .rules_of(q)
                .map(|(_, r)| r.calls.iter().map(|c| class[c.state.index()]).collect())
                .collect();
            let key = (class[q.index()], &shapes[q.index()], callees);
            let fresh = seen.len();
            next[q.index()] = *seen.entry(key).or_insert(fresh);
        }
        let refined = seen.len();
        class = next;
        if refined == count {
            break;
        }
        count = refined;
    }

    let mut rep: Vec<Option<StateId>> = vec![None; count];
    for q in m.states() {
        let slot = &mut rep[class[q.index()]];
        let better = slot.is_none_or(|r| {
            Ltw::generated_depth(m.state_name(q)) < Ltw::generated_depth(m.state_name(r))
        });
        if better {
            *slot = Some(q);
        }
    }
    let target = |q: StateId| rep[class[q.index()]].expect("every class has a member");
    if m.states().all(|q| target(q) == q) {
        return Ok(m.clone());
    }
    let mut out = m.clone();
    for q in m.states() {
        let r = target(q);
        if r != q {
            report.actions.push(Action::Merge {
                from: m.state_name(q).to_string(),
                into: m.state_name(r).to_string(),
            });
            out.remove_rules_of(q);
        }
    }
    for (_, _, rule) in out.rules_mut() {
        for c in &mut rule.calls {
            c.state = target(c.state);
        }
    }
    let ax = out.axiom();
    out.set_axiom(Axiom {
        state: target(ax.state),
        ..ax
    });
    out.trim()?;
    Ok(out)
}
