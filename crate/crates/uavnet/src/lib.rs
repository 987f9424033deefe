//! Joint UAV 3D placement and downlink user association.
//!
//! The crate models a fleet of UAV base stations serving ground users over
//! an air-to-ground channel and maximizes the network sum-rate with three
//! algorithms: binary log-linear learning on a potential game (`blll`), a
//! submodular greedy over configurations with an optional k-means search
//! space reduction (`greedy`), and a fast sequential heuristic
//! (`greedy::adapted_greedy`). An exhaustive solver (`oracle`) certifies
//! optimality on desk-scale instances, and `cli` drives experiments from
//! scenario JSON to CSV traces.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]

pub mod blll;
pub mod channel;
pub mod cli;
pub mod greedy;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod presets;
pub mod sampling;
pub mod trace;

#[cfg(test)]
pub(crate) mod testkit;
