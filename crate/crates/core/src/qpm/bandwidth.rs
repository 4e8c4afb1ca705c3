use serde::{Deserialize, Serialize};

use super::spectrum::{argmax, SpectralDensity};
use crate::constants::nm_from_omega;
use crate::{Error, Result};

/// Full width at half maximum of a biphoton spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    /// Signal-idler span in frequency (THz).
    pub thz: f64,
    /// Span in wavelength between the two frequency edges (nm).
    pub nm: f64,
    /// Half-maximum crossings in detuning (rad/s).
    pub delta_low_rad_per_s: f64,
    pub delta_high_rad_per_s: f64,
}

/// FWHM by linear interpolation between grid points, walking outward from the
/// maximum to the first half-maximum crossing on each side.
pub fn fwhm_bandwidth(density: &SpectralDensity) -> Result<Bandwidth> {
    let d = &density.delta_rad_per_s;
    let v = &density.values;
    let peak = argmax(v);
    let half = 0.5 * v[peak];
    let cross = |i: usize, j: usize| {
        // v[i] >= half > v[j]
        d[i] + (d[j] - d[i]) * (v[i] - half) / (v[i] - v[j])
    };

    let mut lo = None;
    for i in (0..peak).rev() {
        if v[i] < half {
            lo = Some(cross(i + 1, i));
            break;
        }
    }
    let mut hi = None;
    for i in peak + 1..v.len() {
        if v[i] < half {
            hi = Some(cross(i - 1, i));
            break;
        }
    }
    let lo = lo.ok_or(Error::UnboundedBandwidth { side: "negative" })?;
    let hi = hi.ok_or(Error::UnboundedBandwidth { side: "positive" })?;

    let w0 = density.degenerate_omega();
    let nm = (nm_from_omega(w0 - hi) - nm_from_omega(w0 - lo)).abs();
    Ok(Bandwidth {
        thz: (hi - lo) / (2.0 * std::f64::consts::PI) / 1e12,
        nm,
        delta_low_rad_per_s: lo,
        delta_high_rad_per_s: hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ps2_per_km_to_s2_per_m;
    use crate::numeric::{linspace, sinc};
    use crate::qpm::{ProcessType, SpectrumKind, SpectrumMeta};

    fn meta() -> SpectrumMeta {
        SpectrumMeta {
            fiber_id: "test".into(),
            process: ProcessType::TypeII,
            pump_nm: 653.3,
            kind: SpectrumKind::Custom,
        }
    }

    fn density(f: impl Fn(f64) -> f64, span: f64, n: usize) -> SpectralDensity {
        let d = linspace(-span, span, n);
        let v = d.iter().map(|&x| f(x)).collect();
        SpectralDensity::from_samples(d, v, meta()).unwrap()
    }

    #[test]
    fn rectangle_width_is_recovered() {
        let w = 2.0 * std::f64::consts::PI * 10e12;
        // edges fall midway between samples
        let s = density(|x| if x.abs() < 0.5 * w { 1.0 } else { 0.0 }, w, 2000);
        let bw = fwhm_bandwidth(&s).unwrap();
        let step = s.delta_rad_per_s[1] - s.delta_rad_per_s[0];
        assert!((bw.thz * 2.0 * std::f64::consts::PI * 1e12 - w).abs() <= step);
    }

    #[test]
    fn quadratic_sinc2_matches_half_max_oracle() {
        // sinc²(x) = 1/2 at x = 1.3915573782515, so with x = ½ k2 L Δ²
        // Δ_half = sqrt(2 · 1.39155737825 / (k2 L))
        let k2l = ps2_per_km_to_s2_per_m(2.0) * 0.2;
        let s = density(|x| sinc(0.5 * k2l * x * x).powi(2), 2.0 * std::f64::consts::PI * 60e12, 4097);
        let bw = fwhm_bandwidth(&s).unwrap();
        let half = (2.0 * 1.391_557_378_251_5 / k2l).sqrt();
        assert!((half - 8.341e13).abs() < 0.001e13);
        assert!((bw.delta_high_rad_per_s - half).abs() / half < 1e-4);
        assert!((bw.thz - 26.55).abs() < 0.05, "{}", bw.thz);
        // about 150 nm at 1306.6 nm
        assert!(bw.nm > 140.0 && bw.nm < 160.0, "{}", bw.nm);
    }

    #[test]
    fn half_width_scales_as_inverse_sqrt_length() {
        let k2 = ps2_per_km_to_s2_per_m(2.0);
        let span = 2.0 * std::f64::consts::PI * 60e12;
        let w = |l: f64| {
            let s = density(|x| sinc(0.5 * k2 * l * x * x).powi(2), span, 8193);
            fwhm_bandwidth(&s).unwrap().delta_high_rad_per_s
        };
        let ratio = w(0.2) / w(0.4);
        assert!((ratio - 2f64.sqrt()).abs() / 2f64.sqrt() < 0.02);
    }

    #[test]
    fn unbounded_reports_the_open_side() {
        let s = density(|x| if x < 0.0 { 1.0 } else { (-x * x / 1e26).exp() }, 1e14, 101);
        match fwhm_bandwidth(&s) {
            Err(Error::UnboundedBandwidth { side }) => assert_eq!(side, "negative"),
            other => panic!("{other:?}"),
        }
    }
}
