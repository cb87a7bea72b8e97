//! File formats, report rendering and the seeded corpus runner for
//! `lacon-core`.

pub mod corpus;
pub mod formats;
pub mod render;
