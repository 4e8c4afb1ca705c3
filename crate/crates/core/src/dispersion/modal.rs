use std::f64::consts::PI;
use std::io::Write;

use super::{PolarizationAxis, StepIndexFiber, Waveguide};
use crate::constants::{omega_from_nm, SPEED_OF_LIGHT};
use crate::numeric::{bisect, brent};
use crate::special::{bessel_j0, bessel_j1, bessel_k01, J0_FIRST_ZERO};
use crate::{Error, Result};

/// 2π × 10 GHz.
pub const DEFAULT_FD_STEP_RAD_PER_S: f64 = 2.0 * PI * 10e9;

/// LP01 eigenvalue solution at one wavelength.
#[derive(Clone, Copy, Debug)]
pub struct Lp01Solution {
    pub v_number: f64,
    /// Transverse core parameter.
    pub u: f64,
    /// Transverse cladding decay parameter.
    pub w: f64,
    pub n_eff: f64,
    /// `n_eff − n_clad`, evaluated without cancellation.
    pub delta: f64,
}

/// Solves the weakly guiding LP01 relation `u J1(u)/J0(u) = w K1(w)/K0(w)`,
/// `u² + w² = V²`, at `lambda_um` on the given axis.
pub fn lp01_mode(
    fiber: &StepIndexFiber,
    lambda_um: f64,
    axis: PolarizationAxis,
) -> Result<Lp01Solution> {
    let (n_clad, n_core) = fiber.indices(lambda_um, axis)?;
    let step = n_core - n_clad;
    // n_core² − n_clad² written to keep the small step exact
    let x = step * (2.0 * n_clad + step);
    let v = 2.0 * PI * fiber.core_radius_um / lambda_um * x.max(0.0).sqrt();
    if !(x > 0.0) || v < 1e-6 {
        return Err(Error::Cutoff {
            wavelength_um: lambda_um,
            v_number: v,
        });
    }
    // Cross-multiplied form has no poles on (0, min(V, j01)).
    let f = |u: f64| -> Result<f64> {
        let w = (v * v - u * u).max(0.0).sqrt();
        let (k0, k1) = bessel_k01(w);
        Ok(u * bessel_j1(u) * k0 - w * k1 * bessel_j0(u))
    };
    let hi = v.min(J0_FIRST_ZERO) * (1.0 - 1e-12);
    let lo = 1e-9 * v;
    let u = brent(f, lo, hi, 1e-15).map_err(|e| {
        Error::Numerical(format!(
            "LP01 bracket [{lo:.3e}, {hi:.6}] failed at {lambda_um} um (V = {v:.6}): {e}"
        ))
    })?;
    let w = (v * v - u * u).sqrt();
    let b = 1.0 - (u * u) / (v * v);
    // n_eff = n_clad + δ with δ(2 n_clad + δ) = b·x
    let bx = b * x;
    let delta = bx / (n_clad + (n_clad * n_clad + bx).sqrt());
    Ok(Lp01Solution {
        v_number: v,
        u,
        w,
        n_eff: n_clad + delta,
        delta,
    })
}

/// Effective index of the LP01 mode.
pub fn lp01_neff(fiber: &StepIndexFiber, lambda_um: f64, axis: PolarizationAxis) -> Result<f64> {
    lp01_mode(fiber, lambda_um, axis).map(|s| s.n_eff)
}

/// Modal wavenumber `k = 2π n_eff / λ` in rad/m.
pub fn wavenumber(fiber: &StepIndexFiber, lambda_um: f64, axis: PolarizationAxis) -> Result<f64> {
    Ok(2.0 * PI * lp01_neff(fiber, lambda_um, axis)? / (lambda_um * 1e-6))
}

/// First and second frequency derivatives of the wavenumber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivatives {
    /// Inverse group velocity `∂k/∂ω` (s/m).
    pub beta1: f64,
    /// Chromatic dispersion `∂²k/∂ω²` (s²/m).
    pub k2: f64,
}

/// Frequency derivatives of `k(ω)` around `lambda_nm`.
///
/// The material part of the index is differentiated exactly; the waveguide
/// part of the wavenumber, `ω n_guide/c`, by central differences with step
/// `step` (rad/s).
pub fn dispersion_derivatives<W: Waveguide + ?Sized>(
    guide: &W,
    lambda_nm: f64,
    axis: PolarizationAxis,
    step: f64,
) -> Result<Derivatives> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("finite-difference step {step} must be > 0")));
    }
    let omega = omega_from_nm(lambda_nm);
    let mid = guide.index_split(omega, axis)?;
    let gp = guide.index_split(omega + step, axis)?.guide;
    let gm = guide.index_split(omega - step, axis)?.guide;
    let g0 = mid.guide;
    let [n, n1, n2] = mid.material;
    // k₊ − 2k₀ + k₋ = [ω(g₊ − 2g₀ + g₋) + h(g₊ − g₋)]/c for k = ωg/c
    let dg1 = gp - gm;
    let dg2 = (gp - g0) + (gm - g0);
    let beta1 = (n + omega * n1) / SPEED_OF_LIGHT + (omega * dg1 / step + (gp + gm)) / (2.0 * SPEED_OF_LIGHT);
    let k2 = (2.0 * n1 + omega * n2) / SPEED_OF_LIGHT + (omega * dg2 + step * dg1) / (SPEED_OF_LIGHT * step * step);
    Ok(Derivatives { beta1, k2 })
}

/// `M = β1(H) − β1(V)` at `lambda_nm`, default step.
pub fn group_velocity_mismatch(fiber: &StepIndexFiber, lambda_nm: f64) -> Result<f64> {
    let h = dispersion_derivatives(fiber, lambda_nm, PolarizationAxis::H, DEFAULT_FD_STEP_RAD_PER_S)?;
    let v = dispersion_derivatives(fiber, lambda_nm, PolarizationAxis::V, DEFAULT_FD_STEP_RAD_PER_S)?;
    Ok(h.beta1 - v.beta1)
}

/// Wavelength (nm) where `k2` changes sign inside `bracket_nm`, to 0.01 nm.
pub fn zero_dispersion_wavelength<W: Waveguide + ?Sized>(
    guide: &W,
    axis: PolarizationAxis,
    bracket_nm: (f64, f64),
) -> Result<f64> {
    let k2 = |l: f64| -> Result<f64> {
        Ok(dispersion_derivatives(guide, l, axis, DEFAULT_FD_STEP_RAD_PER_S)?.k2)
    };
    bisect(k2, bracket_nm.0, bracket_nm.1, 0.01).map_err(|_| {
        Error::NotFound(format!(
            "k2 keeps its sign on [{}, {}] nm",
            bracket_nm.0, bracket_nm.1
        ))
    })
}

/// Sampled modal dispersion on a wavelength grid.
#[derive(Clone, Debug)]
pub struct ModalDispersion {
    pub axis: PolarizationAxis,
    pub wavelength_nm: Vec<f64>,
    pub n_eff: Vec<f64>,
    pub beta1_s_per_m: Vec<f64>,
    pub k2_s2_per_m: Vec<f64>,
}

impl ModalDispersion {
    pub fn sample(
        fiber: &StepIndexFiber,
        axis: PolarizationAxis,
        wavelength_nm: &[f64],
    ) -> Result<Self> {
        if wavelength_nm.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("wavelength grid must be strictly increasing".into()));
        }
        let mut out = Self {
            axis,
            wavelength_nm: wavelength_nm.to_vec(),
            n_eff: Vec::with_capacity(wavelength_nm.len()),
            beta1_s_per_m: Vec::with_capacity(wavelength_nm.len()),
            k2_s2_per_m: Vec::with_capacity(wavelength_nm.len()),
        };
        for &l in wavelength_nm {
            let d = dispersion_derivatives(fiber, l, axis, DEFAULT_FD_STEP_RAD_PER_S)?;
            out.n_eff.push(lp01_neff(fiber, l * 1e-3, axis)?);
            out.beta1_s_per_m.push(d.beta1);
            out.k2_s2_per_m.push(d.k2);
        }
        Ok(out)
    }

    /// Appends rows `lambda_nm,axis,n_eff,beta1_s_per_m,k2_s2_per_m`.
    pub fn write_csv_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for i in 0..self.wavelength_nm.len() {
            w.write_record([
                format!("{}", self.wavelength_nm[i]),
                self.axis.label().to_string(),
                format!("{:.15e}", self.n_eff[i]),
                format!("{:.15e}", self.beta1_s_per_m[i]),
                format!("{:.15e}", self.k2_s2_per_m[i]),
            ])?;
        }
        Ok(())
    }

    pub fn csv_header() -> [&'static str; 5] {
        ["lambda_nm", "axis", "n_eff", "beta1_s_per_m", "k2_s2_per_m"]
    }
}
