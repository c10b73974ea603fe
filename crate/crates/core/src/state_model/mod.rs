//! Truncated Fock-basis model of the heralded state: squeezing, photon
//! subtraction, loss, dark counts, and Wigner-function evaluation
//! (vacuum quadrature variance 1/2).

mod channels;
mod efficiency;
mod fock;
mod wigner;

pub use channels::{
    dark_count_mix, loss_channel, model_state, photon_subtracted_squeezed_vacuum, squeezed_single_photon,
    squeezed_vacuum, subtract_photon, DEFAULT_N_CUT, MAX_N_CUT, TRUNCATION_TAIL,
};
pub use efficiency::{budget_eta0, overall_efficiency, w00_closed_form, EfficiencyBudget, ExperimentConfig, ModelParams};
pub use fock::{DensityMatrixJson, FockDensityMatrix, DENSITY_SCHEMA};
pub use wigner::{
    wigner_grid, wigner_value, GridSource, GridSpec, Provenance, WignerGrid, WignerGridJson, GRID_NORM_TOLERANCE,
    WIGNER_SCHEMA,
};
