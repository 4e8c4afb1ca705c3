use serde::{Deserialize, Serialize};

use super::spectrum::{raw_spdc_intensity, DetuningGrid, SpdcConfig};
use super::ProcessType;
use crate::constants::nm_from_omega;
use crate::dispersion::StepIndexFiber;
use crate::{Error, Result};

/// Phase-matched locus at one pump wavelength.
///
/// Each detuning `Δ` above threshold contributes its two photons; the shorter
/// wavelength goes to `short_nm` and the longer to `long_nm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningSlice {
    pub pump_nm: f64,
    pub short_nm: Vec<f64>,
    pub long_nm: Vec<f64>,
    /// Detunings of the strongest emission on `Δ < 0` and `Δ > 0` (rad/s),
    /// if above threshold.
    pub peak_delta_negative: Option<f64>,
    pub peak_delta_positive: Option<f64>,
}

impl TuningSlice {
    pub fn is_empty(&self) -> bool {
        self.short_nm.is_empty()
    }

    /// Frequency distance between the two emission maxima (THz); zero when only
    /// one side is above threshold.
    pub fn branch_separation_thz(&self) -> f64 {
        match (self.peak_delta_negative, self.peak_delta_positive) {
            (Some(a), Some(b)) => (b - a) / (2.0 * std::f64::consts::PI * 1e12),
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningCurve {
    pub fiber_id: String,
    pub process: ProcessType,
    pub threshold: f64,
    pub slices: Vec<TuningSlice>,
}

impl TuningCurve {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;

    /// Writes `pump_nm,branch,wavelength_nm`, one row per locus point.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pump_nm", "branch", "wavelength_nm"])?;
        for s in &self.slices {
            for (branch, pts) in [("short", &s.short_nm), ("long", &s.long_nm)] {
                for l in pts {
                    w.write_record([format!("{:.6}", s.pump_nm), branch.to_string(), format!("{l:.6}")])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Scans pump wavelengths and records where the absolute (not renormalized)
/// SPDC intensity reaches `threshold`.
pub fn tuning_curve(
    fiber: &StepIndexFiber,
    process: ProcessType,
    pump_nm: &[f64],
    grid: DetuningGrid,
    threshold: f64,
) -> Result<TuningCurve> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidInput(format!("threshold {threshold} must lie in (0, 1)")));
    }
    let deltas = grid.samples();
    let mut slices = Vec::with_capacity(pump_nm.len());
    for &p in pump_nm {
        let config = SpdcConfig {
            fiber: fiber.clone(),
            process,
            pump_nm: p,
            grid,
        };
        config.validate()?;
        let values = raw_spdc_intensity(&config, &deltas)?;
        let w0 = config.degenerate_omega();
        let mut short = Vec::new();
        let mut long = Vec::new();
        let mut best_neg: Option<(f64, f64)> = None;
        let mut best_pos: Option<(f64, f64)> = None;
        for (&d, &v) in deltas.iter().zip(&values) {
            if v < threshold {
                continue;
            }
            let (a, b) = (nm_from_omega(w0 - d), nm_from_omega(w0 + d));
            short.push(a.min(b));
            long.push(a.max(b));
            let slot = if d < 0.0 { &mut best_neg } else { &mut best_pos };
            if slot.is_none_or(|(_, bv)| v > bv) {
                *slot = Some((d, v));
            }
        }
        short.sort_by(f64::total_cmp);
        long.sort_by(f64::total_cmp);
        slices.push(TuningSlice {
            pump_nm: p,
            short_nm: short,
            long_nm: long,
            peak_delta_negative: best_neg.map(|x| x.0),
            peak_delta_positive: best_pos.map(|x| x.0),
        });
    }
    Ok(TuningCurve {
        fiber_id: fiber.id.clone(),
        process,
        threshold,
        slices,
    })
}
