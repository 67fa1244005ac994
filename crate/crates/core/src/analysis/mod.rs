//! Static analyses of a single transducer or a pair of transducers.

pub mod coreach;
pub mod periodic;
pub mod quasi;
pub mod shift;
pub mod shortest;

pub use coreach::{co_reachable_order, co_reachable_pairs, domains_equal, plug_at_pair, same_ordered, DomainMismatch, OrderMismatch, StatePair};
pub use periodic::is_periodic_state;
pub use quasi::{add_part_state, quasi_periodicity, rule_part_quasi_periodicity, rule_part_tq, Direction, PartRef, QuasiPeriodicity};
pub use shift::{build_tq, mock_shift_table, ShiftTable};
pub use shortest::{is_erasing, shortest_trees, shortest_word, ErasingInfo, ShortestWords};
