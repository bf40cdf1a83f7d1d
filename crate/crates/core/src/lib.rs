//! Enumeration, Floquet certification and inheritance of oscillation in small
//! fully open chemical reaction networks.
//!
//! * [`model`]: networks, stoichiometric matrices, the text format.
//! * [`canon`]: Petri-net graphs, canonical keys, induced subnetworks.
//! * [`enumerate`]: all nonisomorphic (k,l) networks.
//! * [`kinetics`]: mass action and power-law rate functions.
//! * [`dynamics`]: integration, periodic orbits, Floquet multipliers, Hopf checks.
//! * [`inherit`]: the four enlargement transformations and closure.
//! * [`workbench`]: run records, table reproduction and verification suites.

pub mod canon;
pub mod catalog;
pub mod dynamics;
pub mod enumerate;
pub mod error;
pub mod inherit;
pub mod kinetics;
pub mod model;
pub mod workbench;

pub use error::{CrnError, Result};
pub use model::{Complex, Crn, Reaction};
