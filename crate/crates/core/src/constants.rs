//! Physical constants and unit helpers.

use std::f64::consts::PI;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda_m` (m).
#[inline]
pub fn omega_from_wavelength_m(lambda_m: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda_m
}

/// Vacuum wavelength (m) of light with angular frequency `omega` (rad/s).
#[inline]
pub fn wavelength_m_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

#[inline]
pub fn omega_from_nm(lambda_nm: f64) -> f64 {
    omega_from_wavelength_m(lambda_nm * 1e-9)
}

#[inline]
pub fn nm_from_omega(omega: f64) -> f64 {
    wavelength_m_from_omega(omega) * 1e9
}

/// Converts a chromatic dispersion value from s²/m to ps²/km.
#[inline]
pub fn s2_per_m_to_ps2_per_km(k2: f64) -> f64 {
    k2 * 1e24 * 1e3
}

#[inline]
pub fn ps2_per_km_to_s2_per_m(k2: f64) -> f64 {
    k2 * 1e-27
}
