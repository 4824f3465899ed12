//! Channel estimation for RIS-assisted multi-user MISO downlinks via
//! PARAFAC decomposition of the received training tensor.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: Khatri-Rao products, mode unfoldings, pseudo-inverse.
//! - [`channel`]: the signal model (channels, RIS phases, pilots, noise).
//! - [`estimator`]: feasibility checks, the ALS estimator and genie-aided
//!   least-squares baselines.
//! - [`metrics`]: scaling-aligned NMSE.
//! - [`harness`]: Monte Carlo sweeps and result files.

pub mod channel;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod tensor;

pub use channel::{
    dft_phase, generate_channels, generate_pilots, remove_pilots, simulate_received,
    synthesize_received, ChannelPair, NoiseSpec, PhaseMatrix, PilotMatrix, ReceivedTensor,
    SystemDims,
};
pub use error::{Error, Result};
pub use estimator::{
    als_estimate, als_estimate_from, als_step_h1, als_step_h2, check_feasibility, genie_ls_h1,
    genie_ls_h2, init_h1, AlsConfig, EstimationResult, FeasibilityReport, Violation,
};
pub use metrics::{aligned_nmse, nmse, normalize_first_column, NmseRecord};
pub use tensor::{
    khatri_rao, pseudo_inverse, unfold_mode1, unfold_mode2, unfold_mode3, ComplexMatrix,
    PseudoInverse, C64,
};
