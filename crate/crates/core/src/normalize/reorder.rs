//! Step 4: adjacent calls with a common period sorted by input child.

use super::{Action, NormalizationReport};
use crate::analysis::periodic::periodic_with;
use crate::analysis::shortest::{ErasingInfo, ShortestWords};
use crate::error::Result;
use crate::ltw::{Ltw, StateId, SymbolId};
use crate::word::WordRef;

/// Sorts every maximal run of calls that are separated by empty words and
/// whose states are periodic with one common nonempty period. Outputs in
/// `π^*` commute, so the transformation is unchanged.
pub fn reorder_periodic_runs(m: &Ltw) -> Result<Ltw> {
    reorder_with(m, &mut NormalizationReport::default())
}

pub(crate) fn reorder_with(m: &Ltw, report: &mut NormalizationReport) -> Result<Ltw> {
    let mut out = m.clone();
    let sw = ShortestWords::compute(&mut out);
    let info = ErasingInfo::compute(&out);
    let mut period: Vec<Option<WordRef>> = Vec::with_capacity(out.num_states());
    for q in out.states() {
        let p = if info.is_productive(q) {
            periodic_with(&mut out, &sw, &info, q)?.filter(|&w| !out.pool().is_empty(w))
        } else {
            None
        };
        period.push(p);
    }
    let keys: Vec<(StateId, SymbolId)> = out.rules().map(|(q, f, _)| (q, f)).collect();
    for (q, f) in keys {
        let mut rule = out.rule(q, f).expect("listed").clone();
        let same = |a: StateId, b: StateId| match (period[a.index()], period[b.index()]) {
            (Some(x), Some(y)) => out.pool().equals(x, y),
            _ => false,
        };
        let mut changed = false;
        let mut start = 0;
        while start < rule.calls.len() {
            let mut end = start + 1;
            while end < rule.calls.len()
                && out.pool().is_empty(rule.words[end])
                && same(rule.calls[start].state, rule.calls[end].state)
            {
                end += 1;
            }
            let run = &mut rule.calls[start..end];
            if run.windows(2).any(|w| w[0].child > w[1].child) {
                run.sort_by_key(|c| c.child);
                changed = true;
            }
            start = end;
        }
        if changed {
            report.actions.push(Action::Reorder {
                state: out.state_name(q).to_string(),
                symbol: out.alphabet().name(f).to_string(),
            });
            out.put_rule(q, f, rule)?;
        }
    }
    Ok(out)
}
