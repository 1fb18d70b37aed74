//! Command-line surface and Monte-Carlo harness on top of `kboost-core`:
//! dataset/report IO, the simulation-study protocols, and the real-data
//! protocol.

#![forbid(unsafe_code)]

pub mod experiments;
pub mod io;
pub mod report;
