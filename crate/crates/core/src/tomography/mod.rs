//! Two-qubit polarization tomography of the photon pairs.
//!
//! States live in the `{HH, HV, VH, VV}` basis with the signal photon first.

mod counts;
mod optics;
mod reconstruct;
mod state;

pub use counts::{read_counts_csv, simulate_counts, write_counts_csv, CountRecord, SimulationParams};
pub use optics::{
    born_probability, conjugate_wavelength, minimal_settings, mub_settings, projector, retarder,
    setting_operator, Analyzer, ArmSetting, Basis, MeasurementSetting, Passband, PolarizerAxis,
    WaveplateOrder, WaveplateSpec,
};
pub use reconstruct::{
    linear_inversion, mle_reconstruct, settings_digest, uncertainty_mc, LinearEstimate,
    MetricUncertainty, MleDiagnostics, ReconstructionOptions, TomographyResult,
};
pub use state::{
    bell_hv, best_maximally_entangled_fidelity, concurrence, fidelity_to_pure, spin_flip,
    DensityMatrix, C64, EIGEN_FLOOR, HV, VH,
};
