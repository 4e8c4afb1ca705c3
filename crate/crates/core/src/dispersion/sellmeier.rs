use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const PRESET_DATA: &str = include_str!("../../data/sellmeier.toml");

/// One resonance of a Sellmeier sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SellmeierTerm {
    /// Oscillator strength (dimensionless).
    pub strength: f64,
    /// Resonance wavelength (um).
    pub resonance_um: f64,
}

/// Material index model `n(λ)² = 1 + Σ B_i λ²/(λ² − λ_i²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SellmeierModel {
    pub name: String,
    pub terms: Vec<SellmeierTerm>,
    /// Inclusive validity window (um).
    pub valid_range_um: (f64, f64),
}

#[derive(Deserialize)]
struct PresetFile {
    schema_version: u32,
    material: Vec<PresetEntry>,
}

#[derive(Deserialize)]
struct PresetEntry {
    name: String,
    version: u32,
    valid_range_um: [f64; 2],
    terms: Vec<[f64; 2]>,
}

impl SellmeierModel {
    pub fn new(
        name: impl Into<String>,
        terms: Vec<SellmeierTerm>,
        valid_range_um: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = valid_range_um;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
            return Err(Error::InvalidInput(format!(
                "Sellmeier valid range [{lo}, {hi}] um is not a positive interval"
            )));
        }
        for t in &terms {
            if !(t.strength.is_finite() && t.strength >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "Sellmeier strength {} must be finite and >= 0",
                    t.strength
                )));
            }
            if !(t.resonance_um.is_finite() && t.resonance_um > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "Sellmeier resonance {} um must be > 0",
                    t.resonance_um
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            terms,
            valid_range_um,
        })
    }

    /// Looks up a shipped coefficient set by `"<name>_v<version>"`.
    pub fn preset(key: &str) -> Result<Self> {
        let file: PresetFile =
            toml::from_str(PRESET_DATA).map_err(|e| Error::Parse(e.to_string()))?;
        debug_assert_eq!(file.schema_version, 1);
        file.material
            .into_iter()
            .find(|m| format!("{}_v{}", m.name, m.version) == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown Sellmeier preset '{key}'")))
            .and_then(|m| {
                let terms = m
                    .terms
                    .iter()
                    .map(|&[b, l]| SellmeierTerm {
                        strength: b,
                        resonance_um: l,
                    })
                    .collect();
                Self::new(
                    format!("{}_v{}", m.name, m.version),
                    terms,
                    (m.valid_range_um[0], m.valid_range_um[1]),
                )
            })
    }

    /// Standard three-term fused silica.
    pub fn fused_silica() -> Self {
        Self::preset("fused_silica_v1").expect("shipped preset parses")
    }

    pub fn contains(&self, lambda_um: f64) -> bool {
        lambda_um >= self.valid_range_um.0 && lambda_um <= self.valid_range_um.1
    }

    /// `n(λ)²` without range checks.
    fn index_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        1.0 + self
            .terms
            .iter()
            .map(|t| t.strength * l2 / (l2 - t.resonance_um * t.resonance_um))
            .sum::<f64>()
    }

    /// Refractive index at `lambda_um`.
    pub fn refractive_index(&self, lambda_um: f64) -> Result<f64> {
        let (lo, hi) = self.valid_range_um;
        if !self.contains(lambda_um) {
            return Err(Error::OutOfRange {
                quantity: "wavelength (um)",
                value: lambda_um,
                min: lo,
                max: hi,
            });
        }
        if self
            .terms
            .iter()
            .any(|t| t.strength > 0.0 && ((lambda_um - t.resonance_um) / t.resonance_um).abs() < 1e-9)
        {
            return Err(Error::ResonancePole {
                wavelength_um: lambda_um,
            });
        }
        let n2 = self.index_squared(lambda_um);
        if !(n2 >= 1.0) {
            return Err(Error::Numerical(format!(
                "n^2 = {n2} < 1 at {lambda_um} um; resonance inside the valid range?"
            )));
        }
        Ok(n2.sqrt())
    }

    /// `(n, ∂n/∂ω, ∂²n/∂ω²)` at angular frequency `omega`, exact differentiation
    /// of the Sellmeier sum.
    pub fn index_omega_derivatives(&self, omega: f64) -> Result<[f64; 3]> {
        let l = crate::constants::wavelength_m_from_omega(omega) * 1e6;
        let n = self.refractive_index(l)?;
        let s = l * l;
        let (mut gs, mut gss) = (0.0, 0.0);
        for t in &self.terms {
            let a = t.resonance_um * t.resonance_um;
            let d = s - a;
            gs -= t.strength * a / (d * d);
            gss += 2.0 * t.strength * a / (d * d * d);
        }
        let gl = 2.0 * l * gs;
        let gll = 2.0 * gs + 4.0 * s * gss;
        let nl = gl / (2.0 * n);
        let nll = gll / (2.0 * n) - gl * gl / (4.0 * n * n * n);
        let r = l / omega;
        Ok([n, -nl * r, nll * r * r + nl * 2.0 * r / omega])
    }

    /// Checks `n² > 1` on a dense sample of the validity window.
    pub fn validate_physical(&self) -> Result<()> {
        let (lo, hi) = self.valid_range_um;
        for i in 0..=400 {
            let l = lo + (hi - lo) * i as f64 / 400.0;
            self.refractive_index(l)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Literal evaluation of the three-term sum, independent of the struct path.
    fn literal_silica(l: f64) -> f64 {
        let l2 = l * l;
        (1.0 + 0.6961663 * l2 / (l2 - 0.0684043f64.powi(2))
            + 0.4079426 * l2 / (l2 - 0.1162414f64.powi(2))
            + 0.8974794 * l2 / (l2 - 9.896161f64.powi(2)))
        .sqrt()
    }

    #[test]
    fn silica_reference_values() {
        let m = SellmeierModel::fused_silica();
        // Hand evaluation of the three-term sum.
        assert!((m.refractive_index(1.31).unwrap() - 1.446_804_3).abs() < 1e-6);
        assert!((m.refractive_index(0.6533).unwrap() - 1.456_445_9).abs() < 1e-6);
    }

    #[test]
    fn vacuum_model_is_exactly_one() {
        let m = SellmeierModel::new(
            "vacuum",
            vec![SellmeierTerm {
                strength: 0.0,
                resonance_um: 0.1,
            }],
            (0.2, 5.0),
        )
        .unwrap();
        assert_eq!(m.refractive_index(1.0).unwrap(), 1.0);
        assert_eq!(m.refractive_index(3.3).unwrap(), 1.0);
    }

    #[test]
    fn out_of_range_and_pole_errors() {
        let m = SellmeierModel::fused_silica();
        assert!(matches!(
            m.refractive_index(5.0),
            Err(Error::OutOfRange { .. })
        ));
        let pole = SellmeierModel::new(
            "pole",
            vec![SellmeierTerm {
                strength: 0.5,
                resonance_um: 1.0,
            }],
            (0.5, 2.0),
        )
        .unwrap();
        assert!(matches!(
            pole.refractive_index(1.0),
            Err(Error::ResonancePole { .. })
        ));
        assert!(pole.validate_physical().is_err());
    }

    #[test]
    fn rejects_negative_strength() {
        let r = SellmeierModel::new(
            "bad",
            vec![SellmeierTerm {
                strength: -0.1,
                resonance_um: 0.1,
            }],
            (0.2, 2.0),
        );
        assert!(r.is_err());
    }

    #[test]
    fn silica_is_physical_over_range() {
        SellmeierModel::fused_silica().validate_physical().unwrap();
    }

    proptest! {
        #[test]
        fn matches_literal_sum(l in 0.21f64..3.7) {
            let m = SellmeierModel::fused_silica();
            let n = m.refractive_index(l).unwrap();
            prop_assert!((n - literal_silica(l)).abs() <= 4.0 * f64::EPSILON);
        }
    }
}
