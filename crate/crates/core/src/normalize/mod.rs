//! The partial normal form pipeline.
//!
//! 1. Quasi-periodic states are made earliest.
//! 2. Rules are erase-ordered.
//! 3. Quasi-periodic rule parts are made earliest.
//! 4. Adjacent calls with a common period are sorted by input child.
//!
//! A final pass merges congruent states, which keeps copies created by
//! different steps from multiplying.

pub mod earliest;
pub mod erase;
pub mod merge;
pub mod parts;
pub mod reorder;

pub use earliest::{eliminate_quasi_periodic_states, make_state_earliest, make_state_earliest_with, EarliestCopies};
pub use erase::erase_order;
pub use merge::merge_congruent;
pub use parts::make_rule_parts_earliest;
pub use reorder::reorder_periodic_runs;

use crate::analysis::quasi::Direction;
use crate::error::Result;
use crate::ltw::Ltw;
use std::fmt;
use std::time::{Duration, Instant};

/// Longest word printed literally in a report line.
pub const REPORT_WORD_LIMIT: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    State {
        state: String,
        direction: Direction,
        handle: String,
        period: String,
    },
    EraseOrder {
        state: String,
        symbol: String,
    },
    Part {
        state: String,
        symbol: String,
        index: usize,
        handle: String,
        period: String,
    },
    ExtraPass {
        step: usize,
        pass: usize,
    },
    Reorder {
        state: String,
        symbol: String,
    },
    Merge {
        from: String,
        into: String,
    },
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::State {
                state,
                direction,
                handle,
                period,
            } => write!(f, "state {state} {direction} handle={handle} period={period}"),
            Action::EraseOrder { state, symbol } => write!(f, "erase-order {state} {symbol}"),
            Action::Part {
                state,
                symbol,
                index,
                handle,
                period,
            } => write!(f, "part {state} {symbol} {index} handle={handle} period={period}"),
            Action::ExtraPass { step, pass } => write!(f, "pass step={step} number={pass}"),
            Action::Reorder { state, symbol } => write!(f, "reorder {state} {symbol}"),
            Action::Merge { from, into } => write!(f, "merge {from} into {into}"),
        }
    }
}

/// One line per action. Timings are kept apart so that reports of equal
/// runs compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalizationReport {
    pub actions: Vec<Action>,
    pub timings: Vec<(String, Duration)>,
}

impl NormalizationReport {
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// The report including `#`-prefixed timing lines.
    pub fn with_timings(&self) -> String {
        let mut s = self.to_string();
        for (step, d) in &self.timings {
            s.push_str(&format!("# {step} {:.3}ms\n", d.as_secs_f64() * 1000.0));
        }
        s
    }
}

impl fmt::Display for NormalizationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.actions {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

fn timed<T>(report: &mut NormalizationReport, name: &str, run: impl FnOnce(&mut NormalizationReport) -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = run(report)?;
    report.timings.push((name.to_string(), start.elapsed()));
    Ok(out)
}

/// Runs the four steps and the final merge on the trimmed transducer.
pub fn partial_normal_form(m: &Ltw) -> Result<(Ltw, NormalizationReport)> {
    let mut report = NormalizationReport::default();
    let mut copies = EarliestCopies::default();
    let m = timed(&mut report, "states", |r| earliest::eliminate_with(m, &mut copies, r))?;
    let m = timed(&mut report, "erase-order", |r| erase::erase_order_with(&m, r))?;
    let m = timed(&mut report, "parts", |r| parts::make_rule_parts_earliest_with(&m, &mut copies, r))?;
    let m = timed(&mut report, "reorder", |r| reorder::reorder_with(&m, r))?;
    let m = timed(&mut report, "merge", |r| merge::merge_with(&m, r))?;
    Ok((m, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::coreach::same_ordered;
    use crate::format::{parse_ltw, print_ltw};
    use crate::testing::{EX3, EX4_GOLDEN, EX5A, EX5B, EX7, EX7_GOLDEN};

    fn pnf(s: &str) -> (Ltw, NormalizationReport) {
        partial_normal_form(&parse_ltw(s).unwrap()).unwrap()
    }

    #[test]
    fn example_three() {
        let (out, report) = pnf(EX3);
        assert_eq!(print_ltw(&out), EX4_GOLDEN);
        assert_eq!(report.to_string(), "state q left handle=aaaabcabc period=abc\n");
        assert_eq!(report.timings.len(), 5);
    }

    #[test]
    fn example_seven() {
        let (out, report) = pnf(EX7);
        assert_eq!(print_ltw(&out), EX7_GOLDEN);
        assert_eq!(report.to_string(), "part q h 1 handle=b period=cab\nreorder q h\n");
    }

    #[test]
    fn example_five_orderings_agree() {
        let (a, _) = pnf(EX5A);
        let (b, _) = pnf(EX5B);
        assert_eq!(same_ordered(&a, &b), Ok(()));
    }

    #[test]
    fn idempotent() {
        for s in [EX3, EX5A, EX5B, EX7] {
            let (once, _) = pnf(s);
            let (twice, report) = partial_normal_form(&once).unwrap();
            assert!(report.is_empty(), "{report}");
            assert_eq!(print_ltw(&twice), print_ltw(&once));
        }
    }
}
