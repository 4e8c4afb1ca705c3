//! Material and modal dispersion of the poled fiber.

mod fiber;
mod modal;
mod sellmeier;

pub use fiber::{NumericalAperture, StepIndexFiber};

pub use modal::{
    dispersion_derivatives, group_velocity_mismatch, lp01_mode, lp01_neff, wavenumber,
    zero_dispersion_wavelength, Derivatives, Lp01Solution, ModalDispersion,
    DEFAULT_FD_STEP_RAD_PER_S,
};
pub use sellmeier::{SellmeierModel, SellmeierTerm};

use serde::{Deserialize, Serialize};

use crate::constants::wavelength_m_from_omega;
use crate::Result;

/// Principal polarization axes of the fiber. V is the slow axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolarizationAxis {
    H,
    V,
}

impl PolarizationAxis {
    pub const BOTH: [PolarizationAxis; 2] = [PolarizationAxis::H, PolarizationAxis::V];

    pub fn label(self) -> &'static str {
        match self {
            PolarizationAxis::H => "H",
            PolarizationAxis::V => "V",
        }
    }
}

/// Phase index split as `n = n_mat + n_guide`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexSplit {
    /// Material index and its first two ω-derivatives, known in closed form.
    pub material: [f64; 3],
    /// Waveguide correction, only available by sampling.
    pub guide: f64,
}

/// Anything with a propagation constant `k(ω)` per polarization axis.
pub trait Waveguide {
    /// Wavenumber (rad/m) at angular frequency `omega` (rad/s).
    fn wavenumber_at(&self, omega: f64, axis: PolarizationAxis) -> Result<f64>;

    /// Phase index decomposition used for derivatives. The small guide term
    /// keeps its own rounding error far below that of the full index.
    fn index_split(&self, omega: f64, axis: PolarizationAxis) -> Result<IndexSplit>;
}

impl Waveguide for StepIndexFiber {
    fn wavenumber_at(&self, omega: f64, axis: PolarizationAxis) -> Result<f64> {
        wavenumber(self, wavelength_m_from_omega(omega) * 1e6, axis)
    }

    fn index_split(&self, omega: f64, axis: PolarizationAxis) -> Result<IndexSplit> {
        let mut material = self.cladding.index_omega_derivatives(omega)?;
        if axis == PolarizationAxis::V {
            material[0] += self.birefringence_dn;
        }
        let mode = lp01_mode(self, wavelength_m_from_omega(omega) * 1e6, axis)?;
        Ok(IndexSplit {
            material,
            guide: mode.delta,
        })
    }
}

/// Bulk material: plane-wave wavenumber `n(λ)ω/c`, identical on both axes.
impl Waveguide for SellmeierModel {
    fn wavenumber_at(&self, omega: f64, _axis: PolarizationAxis) -> Result<f64> {
        let lambda_um = wavelength_m_from_omega(omega) * 1e6;
        Ok(omega * self.refractive_index(lambda_um)? / crate::constants::SPEED_OF_LIGHT)
    }

    fn index_split(&self, omega: f64, _axis: PolarizationAxis) -> Result<IndexSplit> {
        Ok(IndexSplit {
            material: self.index_omega_derivatives(omega)?,
            guide: 0.0,
        })
    }
}
