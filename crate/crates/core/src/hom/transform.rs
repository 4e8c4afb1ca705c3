use serde::{Deserialize, Serialize};

use crate::constants::{nm_from_omega, omega_from_nm};
use crate::numeric::{brent, linspace, sinc, trapezoid_weights};
use crate::qpm::{fwhm_bandwidth, SpectralDensity};
use crate::{Error, Result};

/// `x` with `sinc²(x) = 1/2`.
pub(crate) const SINC2_HALF_MAX: f64 = 1.391_557_378_251_5;

/// Normalized cosine transform `F(τ) = ∫S(Δ)cos(2Δτ)dΔ / ∫S(Δ)dΔ` of a
/// sampled spectrum (τ in seconds).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTransform {
    delta: Vec<f64>,
    weights: Vec<f64>,
}

impl DensityTransform {
    pub fn new(density: &SpectralDensity) -> Result<Self> {
        Self::from_samples(&density.delta_rad_per_s, &density.values)
    }

    pub(crate) fn from_samples(delta: &[f64], values: &[f64]) -> Result<Self> {
        let w = trapezoid_weights(delta);
        let mut weights: Vec<f64> = w.iter().zip(values).map(|(a, b)| a * b).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("spectral density integrates to zero".into()));
        }
        weights.iter_mut().for_each(|x| *x /= total);
        Ok(Self {
            delta: delta.to_vec(),
            weights,
        })
    }

    pub fn value(&self, tau_s: f64) -> f64 {
        self.delta
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| w * (2.0 * d * tau_s).cos())
            .sum()
    }

    /// `dF/dτ` (1/s).
    pub fn derivative(&self, tau_s: f64) -> f64 {
        -self
            .delta
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| 2.0 * d * w * (2.0 * d * tau_s).sin())
            .sum::<f64>()
    }

    /// Full width (s) of the region around `τ = 0` where `F ≥ 1/2`.
    pub fn dip_fwhm_s(&self) -> Result<f64> {
        let rms = self
            .delta
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| w * d * d)
            .sum::<f64>()
            .sqrt();
        if !(rms > 0.0) {
            return Err(Error::Numerical("spectrum has zero width".into()));
        }
        let step = 0.02 / rms;
        let mut t = 0.0;
        for _ in 0..100_000 {
            let next = t + step;
            if self.value(next) < 0.5 {
                let half = brent(|x| Ok(self.value(x) - 0.5), t, next, 1e-14 * next)?;
                return Ok(2.0 * half);
            }
            t = next;
        }
        Err(Error::Numerical("dip never reaches half depth".into()))
    }
}

/// Spectral shape assumed when converting a dip width to a bandwidth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralFamily {
    Gaussian,
    /// Flat band with sharp edges, as cut by band-pass filters.
    TopHat,
    Triangle,
    /// `sinc²(aΔ²)`, the shape of a dispersion-limited phase-matching band.
    DispersionSinc2,
    /// The shape of a given spectrum, rescaled.
    Sampled(SpectralDensity),
}

impl SpectralFamily {
    pub const ANALYTIC: [SpectralFamily; 4] = [
        SpectralFamily::Gaussian,
        SpectralFamily::TopHat,
        SpectralFamily::Triangle,
        SpectralFamily::DispersionSinc2,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SpectralFamily::Gaussian => "gaussian",
            SpectralFamily::TopHat => "top_hat",
            SpectralFamily::Triangle => "triangle",
            SpectralFamily::DispersionSinc2 => "dispersion_sinc2",
            SpectralFamily::Sampled(_) => "sampled",
        }
    }

    /// Spectral FWHM (rad/s) × dip FWHM (s), a constant of each shape.
    pub fn width_product(&self) -> Result<f64> {
        // unit-FWHM shapes: find u with F(u) = 1/2, product = 2u
        let half = |f: &dyn Fn(f64) -> f64, hi: f64| brent(|u| Ok(f(u) - 0.5), 0.0, hi, 1e-15);
        match self {
            SpectralFamily::Gaussian => Ok(2.0 * half(&|u: f64| (-u * u / (4.0 * std::f64::consts::LN_2)).exp(), 5.0)?),
            SpectralFamily::TopHat => Ok(2.0 * half(&sinc, 3.0)?),
            SpectralFamily::Triangle => Ok(2.0 * half(&|u: f64| sinc(u).powi(2), 3.0)?),
            SpectralFamily::DispersionSinc2 => {
                let a = 4.0 * SINC2_HALF_MAX;
                let x = linspace(-30.0, 30.0, 600_001);
                let s: Vec<f64> = x.iter().map(|x| sinc(a * x * x).powi(2)).collect();
                Ok(DensityTransform::from_samples(&x, &s)?.dip_fwhm_s()?)
            }
            SpectralFamily::Sampled(d) => {
                let bw = fwhm_bandwidth(d)?;
                let omega = bw.delta_high_rad_per_s - bw.delta_low_rad_per_s;
                Ok(omega * DensityTransform::new(d)?.dip_fwhm_s()?)
            }
        }
    }
}

/// Bandwidth implied by a dip width for a transform-limited spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformLimit {
    pub family: String,
    pub spectral_fwhm_rad_per_s: f64,
    pub thz: f64,
    pub nm: f64,
}

/// Inverts the dip-width/bandwidth relation of `family` for a dip of
/// `dip_width_fs` centred on the degenerate wavelength `center_nm`.
pub fn transform_limited_bandwidth(
    dip_width_fs: f64,
    center_nm: f64,
    family: &SpectralFamily,
) -> Result<TransformLimit> {
    if !(dip_width_fs > 0.0 && dip_width_fs.is_finite()) {
        return Err(Error::InvalidInput(format!("dip width {dip_width_fs} fs must be > 0")));
    }
    if !(center_nm > 0.0) {
        return Err(Error::InvalidInput(format!("center wavelength {center_nm} nm must be > 0")));
    }
    let omega = family.width_product()? / (dip_width_fs * 1e-15);
    let w0 = omega_from_nm(center_nm);
    if 0.5 * omega >= w0 {
        return Err(Error::Numerical("bandwidth exceeds the center frequency".into()));
    }
    Ok(TransformLimit {
        family: family.label().to_string(),
        spectral_fwhm_rad_per_s: omega,
        thz: omega / (2.0 * std::f64::consts::PI * 1e12),
        nm: nm_from_omega(w0 - 0.5 * omega) - nm_from_omega(w0 + 0.5 * omega),
    })
}
