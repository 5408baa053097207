//! Minimal initial stock for a single-wave vaccination campaign.
//!
//! Deliveries of equal lots arrive at random times drawn from a fitted
//! demand profile. The initial stock is chosen as the smallest quantity for
//! which the stock never falls short of cumulative demand with a prescribed
//! probability. The probability that an empirical distribution function
//! shifted up by `ε` majorizes the true one is distribution free, so the
//! sizing reduces to inverting a closed form in `ε`.
//!
//! Modules follow the pipeline:
//! [`ingest`] → [`demand`] → [`policy`] → [`simulate`], with [`contour`]
//! holding the probability computations.

pub mod contour;
pub mod demand;
mod error;
pub mod ingest;
pub mod optimize;
pub mod policy;
mod rng;
pub mod simulate;

pub use error::{Error, Result};
