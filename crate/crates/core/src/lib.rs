//! Opacity analysis for timed automata with private locations.

pub mod q;
pub mod ta;
pub mod model;
pub mod fixtures;
pub mod constructions;
pub mod regions;
pub mod words;
pub mod observers;
pub mod deciders;
pub mod oracle;
pub mod cli;

pub use q::Q;
pub use ta::{TimedAutomaton, TimedWord};
