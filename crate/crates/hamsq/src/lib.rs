//! Search for the square of a Hamilton cycle in a dense host graph after a
//! few rounds of random edge boosting, plus the generators, exact oracles,
//! and the Monte Carlo harness used to measure it.

pub mod era;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod matching;
pub mod oracle;
pub mod testkit;
pub mod twopath;

pub use graph::{Graph, GraphBuilder, VertexId};
pub use matching::{Matching, PairId};
pub use oracle::SquareHamCycle;
pub use twopath::TwoPath;
