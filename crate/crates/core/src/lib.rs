//! Simulation and analysis of temporal mode filtering for photon-subtracted
//! squeezed light.
//!
//! Numerical routines are generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix `f64`, which is what the
//! pipeline and the command-line tool use.

pub mod error;
pub mod homodyne_sampler;
pub mod linalg;
pub mod pipeline;
pub mod scalar;
pub mod state_model;
pub mod temporal_modes;
pub mod tomography;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mode = temporal_modes::ModeFunction<f64>;
pub type Filter = temporal_modes::CavityFilter<f64>;
pub type Grid = temporal_modes::TimeGrid<f64>;
pub type Density = state_model::FockDensityMatrix<f64>;
pub type Wigner = state_model::WignerGrid<f64>;
pub type Params = state_model::ModelParams<f64>;
