//! Markov chain samplers for graphs with a fixed degree sequence and for
//! integer-weighted graphs and contingency tables with fixed margins, with
//! arbitrary fixed edges, non-edges and structural cells.
//!
//! The main entry points:
//!
//! * [`compute_closure`] finds every pair whose status is implied by the
//!   design set and the degrees;
//! * [`UgsChain`] samples unweighted graphs, [`WgsChain`] weighted graphs
//!   and tables, [`DsChain`] is the classic 2x2 subtable chain;
//! * [`run_chain`] drives any of them and [`StatReport`] summarises the
//!   resulting statistic trace;
//! * [`oracle`] enumerates small state spaces for exact checks.

pub mod bench;
pub mod closure;
pub mod diagnostics;
pub mod ds;
pub mod error;
pub mod fixed;
pub mod graph;
mod indexset;
pub mod io;
pub mod oracle;
pub mod rng;
pub mod runner;
pub mod sampler;
pub mod stats;
pub mod ugs;
pub mod wgs;

pub use closure::{build_auxiliary, compute_closure, strongly_connected_components, AuxiliaryDigraph, SccPartition};
pub use diagnostics::{ess, mixing_rate, p_value, run_chain, ChainConfig, ChainRun, Method, StatReport, Tail};
pub use ds::{ds_step, DsChain};
pub use error::{Error, Result};
pub use fixed::FixedSet;
pub use graph::{apply_swap, degree_sequence, strength_sequence, DegreeSequence, Edge, Graph, Table};
pub use sampler::Sampler;
pub use stats::{chi_squared, compartmentalization, ipfp, likelihood_ratio, ExpectedCounts};
pub use ugs::{neighborhoods_unweighted, ugs_step, UgsChain, UgsWalk};
pub use wgs::{delta_bounds, delta_measure, walk_probability, wgs_select_walk, wgs_step, DeltaMeasure, Target, WgsChain, WgsWalk};
