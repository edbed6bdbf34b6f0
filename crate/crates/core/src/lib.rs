//! Secrecy-rate simulation and optimization for RIS-aided indoor visible light
//! downlinks with an internal eavesdropper.
//!
//! The pipeline is: build a [`Scenario`] (room, RIS panel, users, Eve),
//! assemble reflected [`ChannelState`]s for a set of element tilts, turn them
//! into RSMA or NOMA secrecy rates, and search tilts, RIS association and
//! power split with the genetic algorithm in [`optimizer`].

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod experiments;
pub mod optimizer;
pub mod rates;
pub mod scenario;

pub use channel::{assemble_channels, ChannelModel, ChannelState, RisElementPose};
pub use error::{Error, Result};
pub use optimizer::{
    brute_force_oracle, run_ga, Chromosome, Evaluator, FitnessRecord, GaConfig, GaResult, GridSpec, ProblemId,
    ProblemSpec,
};
pub use rates::{AssociationMatrix, PowerConsumptionModel, RateReport, Scheme};
pub use scenario::{
    build_default_scenario, DeviceOrientation, Overrides, ParamValue, RoomLayout, Scenario, SystemParameters,
};
