//! Exact computational engine for equivariant Deligne and Cheeger-Simons
//! cohomology, gerbe cocycles, transgression and surface transport on
//! triangulated global quotients `[M/G]` with `G` finite.
//!
//! Everything is computed in exact rational arithmetic; circle-valued data
//! lives in "cycle units" where a stored rational `x` means the phase
//! `exp(2*pi*i*x)`. All identities asserted by the engine are checked as
//! exact equalities (or exact equalities mod 1), never numerically.

pub mod error;
pub mod exec;
pub mod rat;

pub mod matrix;
pub mod snf;

pub mod complex;
pub mod double;
pub mod mixed;

pub mod cochain;
pub mod shapes;
pub mod simplicial;

pub mod action;
pub mod cycles;
pub mod group;
pub mod nerve;

pub mod deligne;
pub mod loops;
pub mod transport;
pub mod cs;
pub mod gerbe;
pub mod library;

pub use error::{Error, Result};
