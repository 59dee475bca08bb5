//! Oracles the toolchain is checked against: randomly generated blocks with
//! an explicitly state-expanded automaton, and a Monte-Carlo LRU model.

pub mod blocks;
pub mod expanded;
pub mod lru;
