use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sellmeier::{SellmeierModel, SellmeierTerm};
use super::PolarizationAxis;
use crate::{Error, Result};

/// Numerical aperture quoted at a reference wavelength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericalAperture {
    pub value: f64,
    pub reference_wavelength_um: f64,
}

/// Weakly birefringent step-index fiber with a periodic nonlinearity grating.
///
/// The cladding follows a Sellmeier model; the core index is the cladding index
/// plus a wavelength-independent offset chosen so that
/// `sqrt(n_core² − n_clad²)` equals the numerical aperture at its reference
/// wavelength. The slow (V) axis sees both indices raised by
/// `birefringence_dn`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepIndexFiber {
    pub id: String,
    pub core_radius_um: f64,
    pub numerical_aperture: NumericalAperture,
    pub cladding: SellmeierModel,
    pub birefringence_dn: f64,
    pub length_m: f64,
    pub poling_period_um: f64,
}

impl StepIndexFiber {
    /// Checks the geometric and material invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.core_radius_um.is_finite() && self.core_radius_um > 0.0) {
            return bad(format!("core radius {} um must be > 0", self.core_radius_um));
        }
        let na = self.numerical_aperture;
        if !(na.value.is_finite() && na.value > 0.0 && na.value < 1.0) {
            return bad(format!("numerical aperture {} must be in (0, 1)", na.value));
        }
        if !self.cladding.contains(na.reference_wavelength_um) {
            return bad(format!(
                "NA reference wavelength {} um outside the cladding model range",
                na.reference_wavelength_um
            ));
        }
        if !(self.length_m.is_finite() && self.length_m > 0.0) {
            return bad(format!("fiber length {} m must be > 0", self.length_m));
        }
        // An infinite period is allowed: it switches the grating off.
        if !(self.poling_period_um > 0.0) {
            return bad(format!(
                "poling period {} um must be > 0",
                self.poling_period_um
            ));
        }
        let offset = self.core_index_offset()?;
        if !(self.birefringence_dn.is_finite() && self.birefringence_dn >= 0.0) {
            return bad(format!(
                "birefringence {} must be finite and >= 0",
                self.birefringence_dn
            ));
        }
        if self.birefringence_dn >= 0.1 * offset {
            return bad(format!(
                "birefringence {} is not small against the core-cladding step {offset}",
                self.birefringence_dn
            ));
        }
        Ok(())
    }

    /// Wavelength-independent core-cladding index step.
    pub fn core_index_offset(&self) -> Result<f64> {
        let na = self.numerical_aperture;
        let n_clad = self.cladding.refractive_index(na.reference_wavelength_um)?;
        Ok((n_clad * n_clad + na.value * na.value).sqrt() - n_clad)
    }

    /// Axis-resolved `(n_clad, n_core)` at `lambda_um`.
    pub fn indices(&self, lambda_um: f64, axis: PolarizationAxis) -> Result<(f64, f64)> {
        let shift = match axis {
            PolarizationAxis::H => 0.0,
            PolarizationAxis::V => self.birefringence_dn,
        };
        let n_clad = self.cladding.refractive_index(lambda_um)? + shift;
        Ok((n_clad, n_clad + self.core_index_offset()?))
    }

    /// Grating wavevector `2π/Λ` (rad/m); zero for an infinite period.
    pub fn grating_wavevector(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.poling_period_um * 1e-6)
    }

    pub fn with_birefringence(&self, dn: f64) -> Self {
        Self {
            birefringence_dn: dn,
            ..self.clone()
        }
    }

    /// Parses the fiber description format (TOML).
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let raw: FiberFile = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let fiber = raw.into_fiber()?;
        fiber.validate()?;
        Ok(fiber)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&FiberFile::from_fiber(self)).expect("fiber file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidInput(format!("cannot read fiber file {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }
}

/// On-disk layout of a fiber description.
///
/// ```toml
/// id = "ppsf"
/// length_m = 0.2
/// poling_period_um = 54.0
/// birefringence_dn = 0.0
///
/// [core]
/// radius_um = 3.1
/// numerical_aperture = 0.149
/// na_reference_wavelength_um = 1.55
///
/// [cladding]
/// preset = "fused_silica_v1"
/// ```
///
/// `[cladding]` may instead carry `terms = [[B, λ_um], ...]` and
/// `valid_range_um = [lo, hi]`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiberFile {
    id: String,
    length_m: f64,
    poling_period_um: f64,
    #[serde(default)]
    birefringence_dn: f64,
    core: CoreSection,
    cladding: CladdingSection,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoreSection {
    radius_um: f64,
    numerical_aperture: f64,
    na_reference_wavelength_um: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CladdingSection {
    Preset {
        preset: String,
    },
    Explicit {
        name: String,
        terms: Vec<[f64; 2]>,
        valid_range_um: [f64; 2],
    },
}

impl FiberFile {
    fn into_fiber(self) -> Result<StepIndexFiber> {
        let cladding = match self.cladding {
            CladdingSection::Preset { preset } => SellmeierModel::preset(&preset)?,
            CladdingSection::Explicit {
                name,
                terms,
                valid_range_um,
            } => SellmeierModel::new(
                name,
                terms
                    .into_iter()
                    .map(|[b, l]| SellmeierTerm {
                        strength: b,
                        resonance_um: l,
                    })
                    .collect(),
                (valid_range_um[0], valid_range_um[1]),
            )?,
        };
        Ok(StepIndexFiber {
            id: self.id,
            core_radius_um: self.core.radius_um,
            numerical_aperture: NumericalAperture {
                value: self.core.numerical_aperture,
                reference_wavelength_um: self.core.na_reference_wavelength_um,
            },
            cladding,
            birefringence_dn: self.birefringence_dn,
            length_m: self.length_m,
            poling_period_um: self.poling_period_um,
        })
    }

    fn from_fiber(f: &StepIndexFiber) -> Self {
        let cladding = match SellmeierModel::preset(&f.cladding.name) {
            Ok(p) if p == f.cladding => CladdingSection::Preset {
                preset: f.cladding.name.clone(),
            },
            _ => CladdingSection::Explicit {
                name: f.cladding.name.clone(),
                terms: f
                    .cladding
                    .terms
                    .iter()
                    .map(|t| [t.strength, t.resonance_um])
                    .collect(),
                valid_range_um: [f.cladding.valid_range_um.0, f.cladding.valid_range_um.1],
            },
        };
        FiberFile {
            id: f.id.clone(),
            length_m: f.length_m,
            poling_period_um: f.poling_period_um,
            birefringence_dn: f.birefringence_dn,
            core: CoreSection {
                radius_um: f.core_radius_um,
                numerical_aperture: f.numerical_aperture.value,
                na_reference_wavelength_um: f.numerical_aperture.reference_wavelength_um,
            },
            cladding,
        }
    }
}
