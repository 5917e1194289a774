//! Fast-slow analysis of the pair-approximation SIRS model on `n`-regular networks.
//!
//! The crate covers the node/edge ODE system and its reduced form, the two
//! limit regimes (layer flow and slow flow on the critical manifold), the
//! entry-exit maps that chain them into singular orbits, a Hopf scan of the
//! endemic equilibrium, and exact stochastic simulation on random regular
//! graphs for cross-validation.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the companion `pairsirs` crate.
#![no_std]

extern crate alloc;

pub mod bifurcation;
pub mod error;
pub mod fastslow;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod netsim;
pub mod quad;
pub mod roots;
pub mod singular;

pub use error::{Error, Result};
pub use model::{EigenData, FullState, Params, ReducedState, SlowPoint};
