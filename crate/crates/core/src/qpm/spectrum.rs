use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mismatch_with_pump, ProcessType};
use crate::constants::{nm_from_omega, omega_from_nm};
use crate::dispersion::{
    dispersion_derivatives, PolarizationAxis, StepIndexFiber, Waveguide, DEFAULT_FD_STEP_RAD_PER_S,
};
use crate::numeric::{linspace, sinc};
use crate::{Error, Result};

/// Symmetric detuning grid `Δ ∈ [−span, span]` (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid {
    pub half_span_rad_per_s: f64,
    /// Odd, so that `Δ = 0` is sampled.
    pub points: usize,
}

impl Default for DetuningGrid {
    /// ±60 THz with 2¹² + 1 samples.
    fn default() -> Self {
        Self::from_thz(60.0, 4097)
    }
}

impl DetuningGrid {
    pub fn from_thz(half_span_thz: f64, points: usize) -> Self {
        Self {
            half_span_rad_per_s: 2.0 * std::f64::consts::PI * half_span_thz * 1e12,
            points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_span_rad_per_s.is_finite() && self.half_span_rad_per_s > 0.0) {
            return Err(Error::InvalidInput("detuning span must be > 0".into()));
        }
        if self.points < 3 || self.points % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "detuning grid needs an odd number (>= 3) of points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn samples(&self) -> Vec<f64> {
        let mut d = linspace(-self.half_span_rad_per_s, self.half_span_rad_per_s, self.points);
        // exact mirror symmetry and an exact zero
        let n = d.len();
        for i in 0..n / 2 {
            d[n - 1 - i] = -d[i];
        }
        d[n / 2] = 0.0;
        d
    }
}

/// Inputs of a cw-pumped SPDC spectrum.
#[derive(Clone, Debug)]
pub struct SpdcConfig {
    pub fiber: StepIndexFiber,
    pub process: ProcessType,
    pub pump_nm: f64,
    pub grid: DetuningGrid,
}

impl SpdcConfig {
    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        self.grid.validate()?;
        if !(self.pump_nm.is_finite() && self.pump_nm > 0.0) {
            return Err(Error::InvalidInput(format!("pump wavelength {} nm must be > 0", self.pump_nm)));
        }
        let w0 = 0.5 * omega_from_nm(self.pump_nm);
        if self.grid.half_span_rad_per_s >= w0 {
            return Err(Error::InvalidInput("detuning span exceeds the degenerate frequency".into()));
        }
        Ok(())
    }

    pub fn degenerate_omega(&self) -> f64 {
        0.5 * omega_from_nm(self.pump_nm)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// Full wavenumbers in the mismatch.
    Exact,
    /// Second-order expansion about degeneracy.
    Taylor,
    /// Anything else (user supplied, analytic test shapes).
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub fiber_id: String,
    pub process: ProcessType,
    pub pump_nm: f64,
    pub kind: SpectrumKind,
}

/// Peak-normalized biphoton intensity on a symmetric detuning grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub delta_rad_per_s: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl SpectralDensity {
    /// Builds a density from raw samples, normalizing the peak to 1.
    pub fn from_samples(delta_rad_per_s: Vec<f64>, values: Vec<f64>, meta: SpectrumMeta) -> Result<Self> {
        if delta_rad_per_s.len() != values.len() || values.len() < 3 {
            return Err(Error::InvalidInput("density needs >= 3 matching samples".into()));
        }
        if delta_rad_per_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("detuning grid must be strictly increasing".into()));
        }
        let n = delta_rad_per_s.len();
        let asym = (0..n / 2)
            .map(|i| (delta_rad_per_s[i] + delta_rad_per_s[n - 1 - i]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-9 * delta_rad_per_s[n - 1].abs() {
            return Err(Error::InvalidInput("detuning grid must be symmetric about 0".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("density values must be finite and >= 0".into()));
        }
        let peak = values.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::InvalidInput("density is identically zero".into()));
        }
        let values = values.into_iter().map(|v| v / peak).collect();
        Ok(Self {
            delta_rad_per_s,
            values,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn degenerate_omega(&self) -> f64 {
        0.5 * omega_from_nm(self.meta.pump_nm)
    }

    pub fn signal_nm(&self, i: usize) -> f64 {
        nm_from_omega(self.degenerate_omega() - self.delta_rad_per_s[i])
    }

    pub fn idler_nm(&self, i: usize) -> f64 {
        nm_from_omega(self.degenerate_omega() + self.delta_rad_per_s[i])
    }

    /// Largest `|I(Δ) − I(−Δ)|` over the grid.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    /// Index range of the lobe containing the maximum, bounded by the first
    /// local minima (or zeros) on either side.
    pub fn main_lobe(&self) -> std::ops::RangeInclusive<usize> {
        let v = &self.values;
        let peak = argmax(v);
        let mut lo = peak;
        while lo > 0 && v[lo - 1] <= v[lo] {
            lo -= 1;
        }
        let mut hi = peak;
        while hi + 1 < v.len() && v[hi + 1] <= v[hi] {
            hi += 1;
        }
        lo..=hi
    }

    /// Writes `delta_rad_per_s,signal_nm,idler_nm,intensity`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delta_rad_per_s", "signal_nm", "idler_nm", "intensity"])?;
        for i in 0..self.len() {
            w.write_record([
                format!("{:.10e}", self.delta_rad_per_s[i]),
                format!("{:.6}", self.signal_nm(i)),
                format!("{:.6}", self.idler_nm(i)),
                format!("{:.12e}", self.values[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON envelope with metadata and grid description.
    pub fn envelope_json(&self) -> serde_json::Value {
        let n = self.len();
        serde_json::json!({
            "fiber_id": self.meta.fiber_id,
            "process": self.meta.process.label(),
            "pump_nm": self.meta.pump_nm,
            "kind": self.meta.kind,
            "grid": {
                "points": n,
                "delta_min_rad_per_s": self.delta_rad_per_s[0],
                "delta_max_rad_per_s": self.delta_rad_per_s[n - 1],
            },
            "asymmetry": self.asymmetry(),
        })
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Raw (not normalized) `sinc²[(L/2)·Δk(Δ)]` on the grid.
pub(crate) fn raw_spdc_intensity(config: &SpdcConfig, deltas: &[f64]) -> Result<Vec<f64>> {
    let fiber = &config.fiber;
    let (pump_axis, _, _) = config.process.axes();
    let wp = omega_from_nm(config.pump_nm);
    let w0 = 0.5 * wp;
    let kp = fiber.wavenumber_at(wp, pump_axis)?;
    let half_l = 0.5 * fiber.length_m;
    deltas
        .par_iter()
        .map(|&d| {
            let dk = mismatch_with_pump(fiber, config.process, kp, w0 - d, w0 + d)?;
            Ok(sinc(half_l * dk).powi(2))
        })
        .collect()
}

/// Cw-pumped SPDC spectral density `sinc²[(L/2)(k_p − k_s − k_i − 2π/Λ)]`,
/// normalized to a unit peak.
pub fn spdc_spectral_density(config: &SpdcConfig) -> Result<SpectralDensity> {
    config.validate()?;
    let deltas = config.grid.samples();
    let values = raw_spdc_intensity(config, &deltas)?;
    SpectralDensity::from_samples(
        deltas,
        values,
        SpectrumMeta {
            fiber_id: config.fiber.id.clone(),
            process: config.process,
            pump_nm: config.pump_nm,
            kind: SpectrumKind::Exact,
        },
    )
}

/// Second-order model `sinc²(½ M L Δ + ½ k₂ L Δ²)`, normalized to a unit peak.
///
/// `m` is in s/m and `k2` in s²/m. An all-zero argument yields a flat spectrum.
pub fn taylor_spectral_density(config: &SpdcConfig, m: f64, k2: f64) -> Result<SpectralDensity> {
    config.grid.validate()?;
    let l = config.fiber.length_m;
    let deltas = config.grid.samples();
    let values = deltas
        .iter()
        .map(|&d| sinc(0.5 * m * l * d + 0.5 * k2 * l * d * d).powi(2))
        .collect();
    SpectralDensity::from_samples(
        deltas,
        values,
        SpectrumMeta {
            fiber_id: config.fiber.id.clone(),
            process: config.process,
            pump_nm: config.pump_nm,
            kind: SpectrumKind::Taylor,
        },
    )
}

/// `(M, k₂)` at the degenerate frequency of a pump at `pump_nm`:
/// `M = β1(H) − β1(V)` and `k₂` the mean of the two axes (s/m, s²/m).
pub fn pair_dispersion(fiber: &StepIndexFiber, pump_nm: f64) -> Result<(f64, f64)> {
    let l0 = 2.0 * pump_nm;
    let h = dispersion_derivatives(fiber, l0, PolarizationAxis::H, DEFAULT_FD_STEP_RAD_PER_S)?;
    let v = dispersion_derivatives(fiber, l0, PolarizationAxis::V, DEFAULT_FD_STEP_RAD_PER_S)?;
    Ok((h.beta1 - v.beta1, 0.5 * (h.k2 + v.k2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ps2_per_km_to_s2_per_m;

    fn config() -> SpdcConfig {
        let f = crate::presets::ppsf();
        let dn = super::super::calibrate_birefringence(&f, 653.3).unwrap();
        SpdcConfig {
            fiber: f.with_birefringence(dn),
            process: ProcessType::TypeII,
            pump_nm: 653.3,
            grid: DetuningGrid::from_thz(60.0, 1025),
        }
    }

    #[test]
    fn grid_is_exactly_symmetric_with_zero() {
        let d = DetuningGrid::default().samples();
        assert_eq!(d.len(), 4097);
        assert_eq!(d[2048], 0.0);
        for i in 0..d.len() {
            assert_eq!(d[i], -d[d.len() - 1 - i]);
        }
        assert!(DetuningGrid::from_thz(60.0, 4096).validate().is_err());
    }

    #[test]
    fn exact_qpm_peak_is_one() {
        let s = spdc_spectral_density(&config()).unwrap();
        let mid = s.len() / 2;
        assert_eq!(s.delta_rad_per_s[mid], 0.0);
        assert!((s.values[mid] - 1.0).abs() < 1e-12);
        assert_eq!(s.values.iter().cloned().fold(0.0, f64::max), 1.0);
        assert!(s.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn flat_taylor_when_coefficients_vanish() {
        let s = taylor_spectral_density(&config(), 0.0, 0.0).unwrap();
        assert!(s.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn taylor_first_zero_at_pi() {
        let cfg = config();
        let k2 = ps2_per_km_to_s2_per_m(2.0);
        let s = taylor_spectral_density(&cfg, 0.0, k2).unwrap();
        // ½ k2 L Δ² = π
        let dz = (2.0 * std::f64::consts::PI / (k2 * cfg.fiber.length_m)).sqrt();
        let i = s.delta_rad_per_s.iter().position(|&d| d >= dz).unwrap();
        let lobe = s.main_lobe();
        assert!(*lobe.end() == i || *lobe.end() + 1 == i, "lobe end {} vs {i}", lobe.end());
    }

    #[test]
    fn m_zero_is_mirror_symmetric() {
        let s = taylor_spectral_density(&config(), 0.0, ps2_per_km_to_s2_per_m(2.0)).unwrap();
        assert_eq!(s.asymmetry(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SpectralDensity::from_samples(
            vec![-1.0, 0.0, 2.0],
            vec![0.0, 1.0, 0.0],
            config_meta()
        )
        .is_err());
        assert!(SpectralDensity::from_samples(vec![-1.0, 0.0, 1.0], vec![0.0; 3], config_meta()).is_err());
        let mut c = config();
        c.pump_nm = -1.0;
        assert!(spdc_spectral_density(&c).is_err());
    }

    #[test]
    fn taylor_residual_is_the_quartic_term() {
        let cfg = config();
        let f = &cfg.fiber;
        let exact = spdc_spectral_density(&cfg).unwrap();
        let (m, k2) = pair_dispersion(f, cfg.pump_nm).unwrap();
        let taylor = taylor_spectral_density(&cfg, m, k2).unwrap();
        // fourth derivative of k on both axes, five-point stencil at 2 THz
        let w0 = cfg.degenerate_omega();
        let h = 2.0 * std::f64::consts::PI * 2e12;
        let k4 = |axis| {
            let k = |x: f64| f.wavenumber_at(w0 + x * h, axis).unwrap();
            (k(-2.0) - 4.0 * k(-1.0) + 6.0 * k(0.0) - 4.0 * k(1.0) + k(2.0)) / h.powi(4)
        };
        let k4 = 0.5 * (k4(PolarizationAxis::H) + k4(PolarizationAxis::V));
        let l = f.length_m;
        let lobe = exact.main_lobe();
        let (mut second, mut fourth) = (0.0f64, 0.0f64);
        for i in lobe {
            let d = exact.delta_rad_per_s[i];
            let quartic = sinc(0.5 * l * (m * d + k2 * d * d + k4 * d.powi(4) / 12.0)).powi(2);
            second = second.max((exact.values[i] - taylor.values[i]).abs());
            fourth = fourth.max((exact.values[i] - quartic).abs());
        }
        assert!(second > 1e-2, "{second}");
        assert!(fourth < 1e-3, "{fourth}");
    }

    fn config_meta() -> SpectrumMeta {
        SpectrumMeta {
            fiber_id: "x".into(),
            process: ProcessType::TypeII,
            pump_nm: 653.3,
            kind: SpectrumKind::Custom,
        }
    }
}
