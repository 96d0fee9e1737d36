//! Bundled example models.

use crate::model::parse_model;
use crate::ta::TimedAutomaton;

pub const RUNNING_EXAMPLE: &str = include_str!("../models/running_example.ta");
pub const RUNNING_EXAMPLE_DISCRETE: &str = include_str!("../models/running_example_discrete.ta");
pub const DISCRETE_EXAMPLE: &str = include_str!("../models/discrete_example.ta");
pub const OERA: &str = include_str!("../models/oera.ta");
pub const OERA_OPEN: &str = include_str!("../models/oera_open.ta");
pub const TAU_EXAMPLE: &str = include_str!("../models/tau_example.ta");

pub const CORPUS: &[(&str, &str)] = &[
    ("running_example", RUNNING_EXAMPLE),
    ("running_example_discrete", RUNNING_EXAMPLE_DISCRETE),
    ("discrete_example", DISCRETE_EXAMPLE),
    ("oera", OERA),
    ("oera_open", OERA_OPEN),
    ("tau_example", TAU_EXAMPLE),
];

fn load(src: &str) -> TimedAutomaton {
    parse_model(src).expect("bundled model parses")
}

pub fn running_example() -> TimedAutomaton {
    load(RUNNING_EXAMPLE)
}

pub fn running_example_discrete() -> TimedAutomaton {
    load(RUNNING_EXAMPLE_DISCRETE)
}

pub fn discrete_example() -> TimedAutomaton {
    load(DISCRETE_EXAMPLE)
}

pub fn oera() -> TimedAutomaton {
    load(OERA)
}

pub fn oera_open() -> TimedAutomaton {
    load(OERA_OPEN)
}

pub fn tau_example() -> TimedAutomaton {
    load(TAU_EXAMPLE)
}

pub fn corpus() -> Vec<(&'static str, TimedAutomaton)> {
    CORPUS.iter().map(|(n, s)| (*n, load(s))).collect()
}
