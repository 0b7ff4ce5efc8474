//! Uncertainty-driven synopses dissemination for edge nodes.
//!
//! Each node keeps an incremental statistical synopsis of its local sensor
//! stream and must decide *when* to push the updated synopsis to its peers.
//! Pushing on every change floods the network; waiting for the forced
//! epoch boundary serves stale data. The policy implemented here watches the
//! update quantum (the L1 drift between the current synopsis and the last
//! one sent), forecasts its short-term future with a small LSTM, scores past
//! and forecast drift with an interval type-2 fuzzy system, fuses the two
//! scores with a geometric mean and disseminates once the fused score
//! crosses a threshold. A forced dissemination at staggered epoch
//! boundaries bounds staleness.
//!
//! The crate also ships the two comparison policies (disseminate-on-change
//! and a double-exponential-smoothing predictor), a deterministic lockstep
//! simulator, and the `phi` / `delta` / `psi` evaluation metrics.

pub mod baselines;
pub mod config;
pub mod decision;
mod error;
pub mod fuzzy;
pub mod ingest;
pub mod lstm;
pub mod metrics;
pub mod sim;
pub mod synopsis;
pub mod synth;

pub use error::{Error, Result};
pub use synopsis::{ContextVector, NormalizationCalibration, QuantaSeries, Synopsis, UpdateQuantum};
