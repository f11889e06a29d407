//! gatekit: an And-Inverter Graph toolkit that learns per-gate structural
//! and functional embeddings with a one-round levelized attention GNN,
//! supervised by pairwise truth-table distances, and applies them to SAT
//! sweeping and CDCL decision ordering.
//!
//! Pipeline: parse AIGER -> bit-parallel simulation -> labeled dataset ->
//! two-stage training -> evaluation / sweeping / solving. See the `cli`
//! module (and the `gatekit` binary) for the end-to-end commands.

pub mod aig;
pub mod dataset;
pub mod grad;
pub mod model;
pub mod rng;
pub mod sat;
pub mod sim;
pub mod sweep;
pub mod train;

pub mod cli;
