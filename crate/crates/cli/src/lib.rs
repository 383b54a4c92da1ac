//! Experiment harness behind the `cur-kit` binary.

pub mod grid;
pub mod pipeline;
pub mod runner;
pub mod verify;
