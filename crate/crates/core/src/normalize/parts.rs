//! Step 3: quasi-periodic rule parts made earliest.

use super::earliest::{make_state_earliest_with, EarliestCopies};
use super::{Action, NormalizationReport, REPORT_WORD_LIMIT};
use crate::analysis::quasi::{add_part_state, rule_part_quasi_periodicity, PartRef};
use crate::error::Result;
use crate::ltw::{Ltw, SymbolId};

/// Scans each rule right to left; a part `q_i(x) u_i` whose language
/// `L_{q_i} u_i` is left quasi-periodic with a nonempty handle becomes
/// `handle · q̂^e(x)`, the handle joining the word on its left. Passes repeat
/// until nothing changes.
pub fn make_rule_parts_earliest(m: &Ltw) -> Result<Ltw> {
    let mut report = NormalizationReport::default();
    make_rule_parts_earliest_with(m, &mut EarliestCopies::default(), &mut report)
}

pub(crate) fn make_rule_parts_earliest_with(
    m: &Ltw,
    copies: &mut EarliestCopies,
    report: &mut NormalizationReport,
) -> Result<Ltw> {
    let mut m = m.clone();
    // each success empties one word after a call, so this bound is never hit
    let max_passes = m.call_sites() + 1;
    for pass in 0..max_passes {
        let mut changed = false;
        let keys: Vec<(String, SymbolId)> = m
            .rules()
            .map(|(q, f, _)| (m.state_name(q).to_string(), f))
            .collect();
        for (name, f) in keys {
            let Some(arity) = m.state(&name).and_then(|q| m.rule(q, f)).map(|r| r.arity()) else {
                continue;
            };
            for index in (1..=arity).rev() {
                let Some(q) = m.state(&name) else { break };
                let Some(rule) = m.rule(q, f) else { break };
                if m.pool().is_empty(rule.words[index]) {
                    continue;
                }
                let part = PartRef { state: q, symbol: f, index };
                let Some(v) = rule_part_quasi_periodicity(&mut m, part)? else {
                    continue;
                };
                if v.is_earliest(m.pool()) {
                    continue;
                }
                report.actions.push(Action::Part {
                    state: name.clone(),
                    symbol: m.alphabet().name(f).to_string(),
                    index,
                    handle: m.pool().display(v.handle, REPORT_WORD_LIMIT),
                    period: m.pool().display(v.period, REPORT_WORD_LIMIT),
                });
                let mut scratch = m.clone();
                let hat = add_part_state(&mut scratch, part)?;
                m = make_state_earliest_with(&scratch, hat, &v, copies)?;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        if pass > 0 {
            report.actions.push(Action::ExtraPass { step: 3, pass: pass + 1 });
        }
    }
    Ok(m)
}
