//! Local PageRank ranking toolkit.
//!
//! The crate covers the full pipeline for studying how much of a graph
//! must be explored to rank a handful of nodes by PageRank score:
//!
//! - [`graph`] / [`pagerank`] / [`ranking`]: arc-list graphs, exact
//!   scores and contributions in float or rational arithmetic, and
//!   separation-aware ranking semantics.
//! - [`explore`]: a query-metered oracle over a hidden graph, exposing
//!   neighborhood, random-child and random-node queries that bill one
//!   unit each.
//! - [`visit`] / [`rankgraph`]: partial-view machinery — compatibility,
//!   unions, kernel scores, the two-condition test deciding whether a
//!   view pins down a ranking, adversarial counterexamples, and
//!   brute-force minimization of certifying views.
//! - [`sampler`]: random-walk node sampling and the interval-based
//!   Monte Carlo ranking loop, plus the shortcut ranking algorithm for
//!   the two-star family.
//! - [`instances`]: generators for the adversarial graph families and
//!   the reductions from clique and dominating-set problems.
//! - [`sweep`]: the cost-scaling experiment harness behind the CLI.

pub mod error;
pub mod explore;
pub mod graph;
pub mod instances;
pub mod numeric;
pub mod pagerank;
pub mod rankgraph;
pub mod ranking;
pub mod sampler;
pub mod sweep;
pub mod visit;

pub use error::{Error, Result};
pub use graph::{parse_graph_file, write_graph_file, DirectedGraph, NodeId};
pub use pagerank::{contribution, contribution_vector, exact_pagerank, Mode, Score, ScoreVector};
pub use ranking::{epsilon_ranking, is_valid_ranking, RankingOutcome, RankingParams};
