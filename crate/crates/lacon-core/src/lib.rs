//! Graph decompositions driven by vertex orders: lacon, shrub and parity
//! decompositions, the conversions between them, generalized coloring
//! numbers, and the first-order machinery that builds lacons from
//! interpretations.
#![no_std]
extern crate alloc;

pub mod bitset;
pub mod coloring;
pub mod graph;
pub mod lacon;
pub mod logic;
pub mod parity;
pub mod pipeline;
pub mod report;
pub mod shrub;

pub use graph::{LabeledGraph, LinearOrder};
