//! Fixture texts shared by unit tests.

pub const EX3: &str = include_str!("../fixtures/ex3.ltw");
pub const EX4_GOLDEN: &str = include_str!("../fixtures/ex4.golden.ltw");
pub const EX5: &str = include_str!("../fixtures/ex5.ltw");
pub const EX5A: &str = include_str!("../fixtures/ex5a.ltw");
pub const EX5B: &str = include_str!("../fixtures/ex5b.ltw");
pub const EX6: &str = include_str!("../fixtures/ex6.ltw");
pub const EX7: &str = include_str!("../fixtures/ex7.ltw");
pub const EX7_GOLDEN: &str = include_str!("../fixtures/ex7.golden.ltw");
pub const EX7_MUTATED: &str = include_str!("../fixtures/ex7_mutated.ltw");
pub const EX6_TQ_GOLDEN: &str = include_str!("../fixtures/ex6.tq.golden.ltw");
