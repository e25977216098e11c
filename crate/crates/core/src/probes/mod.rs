//! Probing protocols: spectral density from the damping kernel and from
//! probe excitation, and the fidelity-based non-Markovianity witness.

mod kernel;
mod spectral;
mod witness;

pub use kernel::{
    damping_kernel, spectral_density_analytic, suggest_tmax, suggest_tmax_with, Kernel, TmaxRule,
    DEPHASING_CONSTANT,
};
pub use spectral::{
    bose_occupancy, initial_covariance, linear_grid, pearson, reference_occupancy,
    spectral_density_probe, spectral_sweep, CrossPathSummary, EnvironmentPrep, Method,
    ProbeEstimate, ProbeOptions, Sampling, SpectralDensityCurve,
};
pub use witness::{
    blp_witness, moving_average, negative_variation, qnm_trace, FidelityTrace, WitnessInterval,
    WitnessReport, DEFAULT_WINDOW,
};
