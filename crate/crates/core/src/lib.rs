//! Induced trees in sparse random graphs: exact log-space first-moment
//! quantities, the tree-pair counts behind the second moment, exact
//! induced-tree search on small graphs, and the Monte Carlo harness that
//! compares them.

pub mod combinatorics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod numerics;
pub mod threshold;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{sample_gnp, Graph, VertexSet};
pub use numerics::LogReal;
pub use threshold::{find_k0, ThresholdReport};

// The guide's code blocks run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/threshold.md")]
    mod threshold {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
