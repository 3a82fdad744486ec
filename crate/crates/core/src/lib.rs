//! Gauss diagrams of virtual Legendrian knots: moves, invariants,
//! realizations, resolution algebra and bounded equivalence search.

pub mod atlas;
pub mod cli;
pub mod diagram;
pub mod engine;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod moves;
pub mod realization;
pub mod vassiliev;
