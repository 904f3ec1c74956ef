//! Design analysis and simulation for single-axis comb-drive capacitive MEMS
//! accelerometers.
//!
//! - [`device_model`]: closed-form lumped parameters from geometry and material
//! - [`dynamics_sim`]: time-domain step and forced response, step metrics
//! - [`freq_response`]: transfer-function evaluation, Bode grids, resonance
//! - [`sweep_engine`]: parameter sweeps, collision checks, inverse design
//! - [`io`]: config files, CSV output, reference reports
//! - [`cli`]: command-line entry points

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod device_model;
pub mod dynamics_sim;
pub mod freq_response;
pub mod io;
pub mod sweep_engine;

pub use device_model::{DerivedParams, DeviceGeometry, MaterialProps, ModelOverrides};
pub use dynamics_sim::SecondOrderModel;
