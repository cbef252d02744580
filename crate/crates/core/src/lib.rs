//! Sizing of smoothing batteries for PV-diesel microgrids.
//!
//! The pipeline runs 1-minute irradiance through a PV model and a smoothing
//! law, simulates a kinetic battery under the resulting commands, and finds
//! the smallest capacity that can always supply the smoothing command. Daily results feed
//! empirical distributions and a linear estimator of capacity from the
//! solar irradiance variability index (SIVI).

pub mod battery;
pub mod data;
pub mod empirical;
pub mod error;
pub mod pv;
pub mod sizing;
pub mod smoothing;
pub mod solar;

pub use error::{DataError, NumericError};
