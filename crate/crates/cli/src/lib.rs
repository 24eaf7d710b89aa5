//! Library side of the `enlarge` binary: report builders and the randomized
//! suites behind `selftest`.

pub mod analyze;
pub mod na1cmd;
pub mod output;
pub mod render;
pub mod selftest;
pub mod suites;
