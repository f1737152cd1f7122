//! Deep Boltzmann machine toolkit for tactile patterns on a simulated
//! 3x6 artificial-skin patch.
//!
//! The crate covers the whole experiment chain:
//!
//! - [`patterns`]: skin geometry, acquisition from force frames, the
//!   triangle dataset, corruption and LED rendering
//! - [`connectivity`]: linear and circular column-restricted receptive fields
//! - [`boltzmann`]: RBM/DBM energies, exact enumeration, persistent
//!   contrastive divergence, greedy pretraining and DBM fine-tuning
//! - [`decoder`]: top-down readout of the deepest hidden layer
//! - [`homeostasis`]: baseline measurement and bias adaptation under blank input
//! - [`metrics`]: Dice coefficient, performance `Q` and correlation
//! - [`harness`]: multi-trial experiments, checkpoints and CSV output

pub mod boltzmann;
pub mod connectivity;
pub mod decoder;
pub mod error;
pub mod harness;
pub mod homeostasis;
pub mod metrics;
pub mod patterns;

pub use error::{Error, Result};
