//! Capacity bounds and overhead optimization for beamforming with
//! estimated channels and quantized feedback.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod optimizer;
pub mod rvq;
pub mod sampling;

pub use bounds::{BoundKind, CapacityBounds, ChannelKind, EffectiveRate};
pub use channel::{Link, OverheadAllocation, SystemConfig};
pub use error::{Error, Result};
pub use montecarlo::{RateEstimate, SimulationSpec};
pub use optimizer::{optimize_allocation, OptimizationResult, RateModel};
