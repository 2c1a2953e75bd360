//! Aggregate the CVSS v3.1 scores of a composite system into a single
//! severity value on the usual `[0, 10]` scale.
//!
//! A system is modeled as a dependency graph of assets with one entry
//! point ([`edg::Edg`]). Every vulnerability attached to an asset carries
//! a CVSS base vector and four correction factors: whether it disrupts
//! functionality, how deep its asset sits in the graph, whether its
//! attack vector is reachable in the actual deployment, and how mature
//! public exploits are. The product of the factors rescales each score,
//! the rescaled scores are combined with a saturating sum, and the final
//! value is damped by the mean of the original scores
//! ([`pipeline::assess`] runs the whole chain).
//!
//! The crate is organized along the stages of that pipeline:
//!
//! - [`cvss`] — base vector parsing, rendering, and base scores
//! - [`edg`] — dependency graph model and shortest-path depths
//! - [`factors`] — per-vulnerability correction factors
//! - [`aggregate`] — the saturating combination and final score
//! - [`pipeline`] — end-to-end assessment over a graph and context
//! - [`ingest`] — graph and deployment-context file loading
//! - [`report`] — JSON and text report rendering
//! - [`simlab`] — seeded randomized experiment harness
//!
//! Everything is a pure function over immutable values; all types are
//! safe to share across threads.

pub mod aggregate;
pub mod cvss;
pub mod edg;
pub mod factors;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod simlab;
