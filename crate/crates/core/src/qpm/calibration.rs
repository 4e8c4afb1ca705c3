use super::{phase_mismatch, ProcessType};
use crate::constants::{omega_from_nm, ps2_per_km_to_s2_per_m};
use crate::dispersion::{dispersion_derivatives, PolarizationAxis, StepIndexFiber, DEFAULT_FD_STEP_RAD_PER_S};
use crate::numeric::brent;
use crate::{Error, Result};

/// Physical search window for the slow-axis index offset.
pub const BIREFRINGENCE_BRACKET: (f64, f64) = (0.0, 1e-3);

/// Mismatch treated as exact phase matching (rad/m).
const MISMATCH_TOL_RAD_PER_M: f64 = 1e-6;

/// Degenerate mismatch of `process` for a pump at `pump_nm`.
fn degenerate_mismatch(fiber: &StepIndexFiber, process: ProcessType, pump_nm: f64) -> Result<f64> {
    let half = 0.5 * omega_from_nm(pump_nm);
    phase_mismatch(fiber, process, half, half)
}

/// Finds the slow-axis offset `dn` that makes the degenerate type-II process
/// exactly phase matched for a pump at `target_pump_nm`.
pub fn calibrate_birefringence(fiber: &StepIndexFiber, target_pump_nm: f64) -> Result<f64> {
    let f = |dn: f64| degenerate_mismatch(&fiber.with_birefringence(dn), ProcessType::TypeII, target_pump_nm);
    let (lo, hi) = BIREFRINGENCE_BRACKET;
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo.abs() <= MISMATCH_TOL_RAD_PER_M {
        return Ok(0.0);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Calibration(format!(
            "type-II mismatch at {target_pump_nm} nm keeps its sign over dn in [{lo}, {hi}] \
             ({f_lo:.4e} .. {f_hi:.4e} rad/m); the dn = 0 type-0 phase matching must lie on the \
             blue side of the target"
        )));
    }
    brent(f, lo, hi, 1e-16)
}

/// Degenerate phase-matched pump wavelength (nm) of `process` inside `bracket_nm`.
pub fn qpm_pump_wavelength(
    fiber: &StepIndexFiber,
    process: ProcessType,
    bracket_nm: (f64, f64),
) -> Result<f64> {
    brent(
        |l| degenerate_mismatch(fiber, process, l),
        bracket_nm.0,
        bracket_nm.1,
        1e-9,
    )
    .map_err(|_| {
        Error::NotFound(format!(
            "{} phase matching not inside [{}, {}] nm",
            process.label(),
            bracket_nm.0,
            bracket_nm.1
        ))
    })
}

/// Targets for [`fit_geometry`].
#[derive(Clone, Copy, Debug)]
pub struct GeometryTargets {
    /// Chromatic dispersion at `dispersion_at_nm` (ps²/km, H axis).
    pub k2_ps2_per_km: f64,
    pub dispersion_at_nm: f64,
    /// Degenerate type-0 phase-matched pump wavelength at `dn = 0` (nm).
    pub type0_pump_nm: f64,
}

/// Adjusts core radius and numerical aperture so the fiber meets `targets`,
/// by Newton iteration with a finite-difference Jacobian.
///
/// The grating period and length are left untouched.
pub fn fit_geometry(fiber: &StepIndexFiber, targets: GeometryTargets) -> Result<StepIndexFiber> {
    let mut f = fiber.with_birefringence(0.0);
    let k2_target = ps2_per_km_to_s2_per_m(targets.k2_ps2_per_km);
    let residual = |f: &StepIndexFiber| -> Result<[f64; 2]> {
        let d = dispersion_derivatives(f, targets.dispersion_at_nm, PolarizationAxis::H, DEFAULT_FD_STEP_RAD_PER_S)?;
        Ok([
            d.k2 / k2_target - 1.0,
            degenerate_mismatch(f, ProcessType::Type0, targets.type0_pump_nm)? * f.length_m,
        ])
    };
    let (hr, hn) = (1e-4, 1e-5);
    for _ in 0..40 {
        let r = residual(&f)?;
        if r[0].abs() < 1e-6 && r[1].abs() < 1e-7 {
            return Ok(f);
        }
        let mut fr = f.clone();
        fr.core_radius_um += hr;
        let mut fna = f.clone();
        fna.numerical_aperture.value += hn;
        let (rr, rn) = (residual(&fr)?, residual(&fna)?);
        let j = [
            [(rr[0] - r[0]) / hr, (rn[0] - r[0]) / hn],
            [(rr[1] - r[1]) / hr, (rn[1] - r[1]) / hn],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numerical("singular geometry Jacobian".into()));
        }
        let dr = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dna = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        // damp large steps
        let scale = (0.3 / dr.abs()).min(0.01 / dna.abs()).min(1.0);
        f.core_radius_um -= scale * dr;
        f.numerical_aperture.value -= scale * dna;
    }
    Err(Error::Numerical("geometry fit did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fiber() -> StepIndexFiber {
        crate::presets::ppsf()
    }

    #[test]
    fn dn_zero_when_target_is_type0_point() {
        let f = fiber().with_birefringence(0.0);
        let target = qpm_pump_wavelength(&f, ProcessType::Type0, (640.0, 660.0)).unwrap();
        let dn = calibrate_birefringence(&f, target).unwrap();
        assert!(dn.abs() < 1e-12, "dn = {dn}");
    }

    #[test]
    fn calibrated_dn_round_trips() {
        let f = fiber();
        let dn = calibrate_birefringence(&f, 653.3).unwrap();
        let cal = f.with_birefringence(dn);
        let m = degenerate_mismatch(&cal, ProcessType::TypeII, 653.3).unwrap();
        assert!(m.abs() < 1e-6, "residual {m}");
    }

    #[test]
    fn calibrated_dn_is_small_and_positive() {
        let f = fiber();
        let dn = calibrate_birefringence(&f, 653.3).unwrap();
        let step = f.core_index_offset().unwrap();
        assert!(dn > 0.0 && dn < 0.01 * step, "dn = {dn}, step = {step}");
    }

    #[test]
    fn blue_side_target_is_unreachable() {
        let f = fiber().with_birefringence(0.0);
        let t0 = qpm_pump_wavelength(&f, ProcessType::Type0, (640.0, 660.0)).unwrap();
        // A target on the blue side of type 0 would need dn < 0.
        assert!(matches!(
            calibrate_birefringence(&f, t0 - 0.5),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn geometry_fit_recovers_shipped_fiber() {
        let mut start = fiber();
        start.core_radius_um = 3.3;
        start.numerical_aperture.value = 0.14;
        let targets = GeometryTargets {
            k2_ps2_per_km: 2.35,
            dispersion_at_nm: 1306.6,
            type0_pump_nm: 653.15,
        };
        let g = fit_geometry(&start, targets).unwrap();
        let d = dispersion_derivatives(&g, 1306.6, PolarizationAxis::H, DEFAULT_FD_STEP_RAD_PER_S).unwrap();
        assert!((crate::constants::s2_per_m_to_ps2_per_km(d.k2) - 2.35).abs() < 1e-5);
        let t0 = qpm_pump_wavelength(&g, ProcessType::Type0, (650.0, 656.0)).unwrap();
        assert!((t0 - 653.15).abs() < 1e-6);
        let shipped = fiber();
        assert!((g.core_radius_um - shipped.core_radius_um).abs() < 1e-5);
        assert!((g.numerical_aperture.value - shipped.numerical_aperture.value).abs() < 1e-6);
    }
}
