use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Matrix2, Matrix4, Vector2};
use serde::{Deserialize, Serialize};

use super::state::{DensityMatrix, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveplateOrder {
    Quarter,
    Half,
}

/// Zero-order waveplate whose retardance scales as `1/λ` from its design point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveplateSpec {
    pub order: WaveplateOrder,
    pub design_wavelength_nm: f64,
}

impl WaveplateSpec {
    pub fn quarter(design_wavelength_nm: f64) -> Self {
        Self {
            order: WaveplateOrder::Quarter,
            design_wavelength_nm,
        }
    }

    pub fn half(design_wavelength_nm: f64) -> Self {
        Self {
            order: WaveplateOrder::Half,
            design_wavelength_nm,
        }
    }

    /// Retardance (rad) at `lambda_nm`.
    pub fn retardance(&self, lambda_nm: f64) -> f64 {
        let nominal = match self.order {
            WaveplateOrder::Quarter => FRAC_PI_2,
            WaveplateOrder::Half => PI,
        };
        nominal * self.design_wavelength_nm / lambda_nm
    }

    /// Jones matrix with the fast axis at `angle` from H.
    pub fn jones(&self, angle: f64, lambda_nm: f64) -> Matrix2<C64> {
        retarder(angle, self.retardance(lambda_nm))
    }
}

/// `R(θ)·diag(e^{−iδ/2}, e^{iδ/2})·R(−θ)`.
pub fn retarder(angle: f64, retardance: f64) -> Matrix2<C64> {
    let (s, c) = angle.sin_cos();
    let r = Matrix2::new(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0));
    let d = Matrix2::new(
        C64::from_polar(1.0, -0.5 * retardance),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(1.0, 0.5 * retardance),
    );
    r * d * r.transpose()
}

/// The two waveplates of one polarization analyzer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analyzer {
    pub quarter: WaveplateSpec,
    pub half: WaveplateSpec,
}

impl Analyzer {
    /// Analyzer built for a single design wavelength.
    pub fn designed_for(lambda_nm: f64) -> Self {
        Self {
            quarter: WaveplateSpec::quarter(lambda_nm),
            half: WaveplateSpec::half(lambda_nm),
        }
    }
}

impl Default for Analyzer {
    /// Waveplates designed for the degenerate pair wavelength of the shipped
    /// fiber (1306.6 nm).
    fn default() -> Self {
        Self::designed_for(1306.6)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolarizerAxis {
    H,
    V,
}

impl PolarizerAxis {
    fn ket(self) -> Vector2<C64> {
        match self {
            PolarizerAxis::H => Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            PolarizerAxis::V => Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        }
    }
}

/// Analyzer settings of one arm. Light passes the quarter-wave plate, then the
/// half-wave plate, then the polarizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmSetting {
    pub qwp_rad: f64,
    pub hwp_rad: f64,
    pub polarizer: PolarizerAxis,
    pub wavelength_nm: f64,
}

impl ArmSetting {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("qwp", self.qwp_rad), ("hwp", self.hwp_rad)] {
            if !(0.0..PI).contains(&a) {
                return Err(Error::InvalidInput(format!("{name} angle {a} rad outside [0, pi)")));
            }
        }
        if !(self.wavelength_nm > 0.0 && self.wavelength_nm.is_finite()) {
            return Err(Error::InvalidInput(format!("wavelength {} nm must be > 0", self.wavelength_nm)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub id: String,
    pub signal: ArmSetting,
    pub idler: ArmSetting,
}

impl MeasurementSetting {
    pub fn validate(&self) -> Result<()> {
        self.signal.validate()?;
        self.idler.validate()
    }
}

/// Rank-1 projector `Q†H†|p⟩⟨p|HQ` of one arm.
pub fn projector(arm: &ArmSetting, analyzer: &Analyzer) -> Matrix2<C64> {
    let q = analyzer.quarter.jones(arm.qwp_rad, arm.wavelength_nm);
    let h = analyzer.half.jones(arm.hwp_rad, arm.wavelength_nm);
    let psi = q.adjoint() * h.adjoint() * arm.polarizer.ket();
    psi * psi.adjoint()
}

/// Two-photon projector `P_s ⊗ P_i`.
pub fn setting_operator(setting: &MeasurementSetting, analyzer: &Analyzer) -> Matrix4<C64> {
    projector(&setting.signal, analyzer).kronecker(&projector(&setting.idler, analyzer))
}

/// Born-rule probability `Tr[ρ (P_s ⊗ P_i)]`.
pub fn born_probability(rho: &DensityMatrix, setting: &MeasurementSetting, analyzer: &Analyzer) -> f64 {
    (rho.matrix() * setting_operator(setting, analyzer)).trace().re
}

/// Six single-qubit analysis states, realized with an H polarizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Basis {
    pub const ALL: [Basis; 6] = [Basis::H, Basis::V, Basis::D, Basis::A, Basis::R, Basis::L];

    pub fn label(self) -> char {
        match self {
            Basis::H => 'H',
            Basis::V => 'V',
            Basis::D => 'D',
            Basis::A => 'A',
            Basis::R => 'R',
            Basis::L => 'L',
        }
    }

    /// `(qwp, hwp)` angles selecting this state at the design wavelength.
    pub fn angles(self) -> (f64, f64) {
        let e = PI / 8.0;
        match self {
            Basis::H => (0.0, 0.0),
            Basis::V => (0.0, FRAC_PI_4),
            Basis::D => (FRAC_PI_4, e),
            Basis::A => (FRAC_PI_4, PI - e),
            Basis::R => (0.0, PI - e),
            Basis::L => (0.0, e),
        }
    }

    /// Ideal ket, `R = (H + iV)/√2`.
    pub fn ket(self) -> Vector2<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            Basis::H => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            Basis::V => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            Basis::D => (C64::new(s, 0.0), C64::new(s, 0.0)),
            Basis::A => (C64::new(s, 0.0), C64::new(-s, 0.0)),
            Basis::R => (C64::new(s, 0.0), C64::new(0.0, s)),
            Basis::L => (C64::new(s, 0.0), C64::new(0.0, -s)),
        };
        Vector2::new(a, b)
    }

    pub fn arm(self, wavelength_nm: f64) -> ArmSetting {
        let (q, h) = self.angles();
        ArmSetting {
            qwp_rad: q,
            hwp_rad: h,
            polarizer: PolarizerAxis::H,
            wavelength_nm,
        }
    }
}

fn pair(a: Basis, b: Basis, lambda_s: f64, lambda_i: f64) -> MeasurementSetting {
    MeasurementSetting {
        id: format!("{}{}", a.label(), b.label()),
        signal: a.arm(lambda_s),
        idler: b.arm(lambda_i),
    }
}

/// All 36 pairs of `{H, V, D, A, R, L}`.
pub fn mub_settings(lambda_s_nm: f64, lambda_i_nm: f64) -> Vec<MeasurementSetting> {
    let mut out = Vec::with_capacity(36);
    for a in Basis::ALL {
        for b in Basis::ALL {
            out.push(pair(a, b, lambda_s_nm, lambda_i_nm));
        }
    }
    out
}

/// The standard minimal 16-setting set.
pub fn minimal_settings(lambda_s_nm: f64, lambda_i_nm: f64) -> Vec<MeasurementSetting> {
    use Basis::*;
    [
        (H, H), (H, V), (V, V), (V, H), (R, H), (R, V), (D, V), (D, H),
        (D, R), (D, D), (R, D), (H, D), (V, D), (V, L), (H, L), (R, L),
    ]
    .iter()
    .map(|&(a, b)| pair(a, b, lambda_s_nm, lambda_i_nm))
    .collect()
}

/// Spectral filter in front of a detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Passband {
    /// Flat transmission over `center ± width/2`.
    TopHat { center_nm: f64, width_nm: f64 },
    /// Reflection port of a top-hat filter: everything outside its band.
    Complement { center_nm: f64, width_nm: f64 },
}

impl Passband {
    /// Coarse WDM channel with a 17 nm flat top.
    pub fn cwdm(center_nm: f64) -> Self {
        Passband::TopHat {
            center_nm,
            width_nm: 17.0,
        }
    }

    pub fn contains(&self, lambda_nm: f64) -> bool {
        match *self {
            Passband::TopHat { center_nm, width_nm } => (lambda_nm - center_nm).abs() <= 0.5 * width_nm,
            Passband::Complement { center_nm, width_nm } => (lambda_nm - center_nm).abs() > 0.5 * width_nm,
        }
    }
}

/// Energy-conjugate wavelength of `lambda_nm` for a pump at `pump_nm`.
pub fn conjugate_wavelength(pump_nm: f64, lambda_nm: f64) -> Result<f64> {
    let inv = 1.0 / pump_nm - 1.0 / lambda_nm;
    if !(inv > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{lambda_nm} nm has no conjugate for a {pump_nm} nm pump"
        )));
    }
    Ok(1.0 / inv)
}
