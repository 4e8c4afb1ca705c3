//! Quasi-phase-matched SHG and SPDC in the poled fiber.
//!
//! Frequencies follow `ω_s = ω_p/2 − Δ`, `ω_i = ω_p/2 + Δ`, so positive
//! detuning puts the signal on the red side of degeneracy.

mod bandwidth;
mod calibration;
mod shg;
mod spectrum;
mod tuning;

pub use bandwidth::{fwhm_bandwidth, Bandwidth};
pub use calibration::{
    calibrate_birefringence, fit_geometry, qpm_pump_wavelength, GeometryTargets,
    BIREFRINGENCE_BRACKET,
};
pub use shg::{shg_spectrum, ShgSpectrum};
pub use spectrum::{
    pair_dispersion, spdc_spectral_density, taylor_spectral_density, DetuningGrid,
    SpdcConfig, SpectralDensity, SpectrumKind, SpectrumMeta,
};
pub use tuning::{tuning_curve, TuningCurve, TuningSlice};

use serde::{Deserialize, Serialize};

use crate::dispersion::{PolarizationAxis, StepIndexFiber, Waveguide};
use crate::Result;

/// The three poled-fiber processes. The pump is always on the slow (V) axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessType {
    /// V → V V
    Type0,
    /// V → H H
    TypeI,
    /// V → H V
    TypeII,
}

impl ProcessType {
    pub const ALL: [ProcessType; 3] = [ProcessType::Type0, ProcessType::TypeI, ProcessType::TypeII];

    /// `(pump, signal, idler)` axes.
    ///
    /// For type II the signal (`ω_s < ω_p/2`) is taken on V and the idler on H.
    /// With that assignment the second-order expansion of the mismatch is
    /// `−(MΔ + k₂Δ²)` with `M = β1(H) − β1(V)`.
    pub fn axes(self) -> (PolarizationAxis, PolarizationAxis, PolarizationAxis) {
        use PolarizationAxis::{H, V};
        match self {
            ProcessType::Type0 => (V, V, V),
            ProcessType::TypeI => (V, H, H),
            ProcessType::TypeII => (V, V, H),
        }
    }

    /// Relative SHG efficiency weight (type 0 : I : II = 9 : 1 : 4).
    pub fn shg_weight(self) -> f64 {
        match self {
            ProcessType::Type0 => 9.0,
            ProcessType::TypeI => 1.0,
            ProcessType::TypeII => 4.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProcessType::Type0 => "type0",
            ProcessType::TypeI => "typeI",
            ProcessType::TypeII => "typeII",
        }
    }
}

impl std::str::FromStr for ProcessType {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "type0" => Ok(ProcessType::Type0),
            "typei" | "type1" => Ok(ProcessType::TypeI),
            "typeii" | "type2" => Ok(ProcessType::TypeII),
            _ => Err(crate::Error::InvalidInput(format!("unknown process '{s}'"))),
        }
    }
}

/// `k_A(ω_s + ω_i) − k_B(ω_s) − k_C(ω_i) − 2π/Λ` in rad/m.
pub fn phase_mismatch(
    fiber: &StepIndexFiber,
    process: ProcessType,
    omega_s: f64,
    omega_i: f64,
) -> Result<f64> {
    let (pump_axis, _, _) = process.axes();
    let kp = fiber.wavenumber_at(omega_s + omega_i, pump_axis)?;
    mismatch_with_pump(fiber, process, kp, omega_s, omega_i)
}

/// Same as [`phase_mismatch`] with a precomputed pump wavenumber.
pub(crate) fn mismatch_with_pump(
    fiber: &StepIndexFiber,
    process: ProcessType,
    k_pump: f64,
    omega_s: f64,
    omega_i: f64,
) -> Result<f64> {
    let (_, b, c) = process.axes();
    let ks = fiber.wavenumber_at(omega_s, b)?;
    let ki = fiber.wavenumber_at(omega_i, c)?;
    Ok(k_pump - ks - ki - fiber.grating_wavevector())
}
