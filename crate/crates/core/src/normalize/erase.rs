//! Step 2: erase-ordering.

use super::{Action, NormalizationReport};
use crate::analysis::shortest::ErasingInfo;
use crate::error::Result;
use crate::ltw::{Call, Ltw, Rule, StateId, SymbolId};

/// Moves erasing calls to the end of every rule, sorted by input child, and
/// merges the words that followed them into the word on their left.
pub fn erase_order(m: &Ltw) -> Ltw {
    let mut report = NormalizationReport::default();
    erase_order_with(m, &mut report).expect("rules stay valid")
}

pub(crate) fn erase_order_with(m: &Ltw, report: &mut NormalizationReport) -> Result<Ltw> {
    let info = ErasingInfo::compute(m);
    let mut out = m.clone();
    let keys: Vec<(StateId, SymbolId)> = m.rules().map(|(q, f, _)| (q, f)).collect();
    for (q, f) in keys {
        let rule = m.rule(q, f).expect("listed");
        if let Some(new) = reorder_rule(&mut out, rule, |p| info.is_erasing(p)) {
            out.put_rule(q, f, new)?;
            report.actions.push(Action::EraseOrder {
                state: m.state_name(q).to_string(),
                symbol: m.alphabet().name(f).to_string(),
            });
        }
    }
    Ok(out)
}

fn reorder_rule(m: &mut Ltw, rule: &Rule, erasing: impl Fn(StateId) -> bool) -> Option<Rule> {
    let pool = m.pool_mut();
    let mut words = vec![rule.words[0]];
    let mut calls = Vec::new();
    let mut tail: Vec<Call> = Vec::new();
    for (i, &c) in rule.calls.iter().enumerate() {
        let after = rule.words[i + 1];
        if erasing(c.state) {
            tail.push(c);
            let last = words.last_mut().expect("nonempty");
            *last = pool.concat(*last, after);
        } else {
            calls.push(c);
            words.push(after);
        }
    }
    tail.sort_by_key(|c| c.child);
    let empty = pool.empty();
    for c in tail {
        calls.push(c);
        words.push(empty);
    }
    let new = Rule { words, calls };
    (new.calls != rule.calls || new.words != rule.words).then_some(new)
}
