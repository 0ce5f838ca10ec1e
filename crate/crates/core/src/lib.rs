//! Simulation and prediction toolkit for EV charging-station networks.
//!
//! The pipeline runs: [`lotgen`] lays out a lot, [`schedule_gen`] samples
//! arrivals, [`parking`] assigns vehicles to spots, [`charge`] schedules
//! charging and computes per-EVSE statistics, [`featurize`] encodes each
//! EVSE's neighbourhood, and [`mlp`] learns to predict the statistics from it.
//! [`pipeline`] ties the stages together into datasets and experiments.

pub mod charge;
pub mod error;
pub mod featurize;
pub mod layout;
pub mod lotgen;
pub mod lp;
pub mod mlp;
pub mod parking;
pub mod pipeline;
pub mod placement;
pub mod predict;
pub mod schedule;
pub mod schedule_gen;
pub mod seeds;
pub mod stats;

pub use error::{Error, Result};
pub use layout::{Cell, CellType, Layout};
