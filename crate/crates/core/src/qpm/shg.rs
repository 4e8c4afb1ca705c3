use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibration::qpm_pump_wavelength;
use super::{phase_mismatch, ProcessType};
use crate::constants::omega_from_nm;
use crate::dispersion::StepIndexFiber;
use crate::numeric::sinc;
use crate::{Error, Result};

/// A single SHG resonance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShgPeak {
    pub process: ProcessType,
    pub fundamental_nm: f64,
    /// Second-harmonic wavelength, `fundamental_nm / 2`.
    pub harmonic_nm: f64,
    pub height: f64,
}

/// Weighted SHG tuning curves versus fundamental wavelength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShgSpectrum {
    pub fundamental_nm: Vec<f64>,
    /// One curve per entry of [`ProcessType::ALL`].
    pub curves: [Vec<f64>; 3],
    /// Phase-matched peaks; `None` where no resonance lies inside the grid.
    pub peaks: [Option<ShgPeak>; 3],
}

impl ShgSpectrum {
    pub fn curve(&self, process: ProcessType) -> &[f64] {
        &self.curves[index(process)]
    }

    pub fn peak(&self, process: ProcessType) -> Option<&ShgPeak> {
        self.peaks[index(process)].as_ref()
    }

    /// Sum of the three curves.
    pub fn total(&self) -> Vec<f64> {
        (0..self.fundamental_nm.len())
            .map(|i| self.curves.iter().map(|c| c[i]).sum())
            .collect()
    }

    /// Writes `fundamental_nm,harmonic_nm,type0,typeI,typeII,total`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fundamental_nm", "harmonic_nm", "type0", "typeI", "typeII", "total"])?;
        let total = self.total();
        for (i, l) in self.fundamental_nm.iter().enumerate() {
            w.write_record([
                format!("{l:.6}"),
                format!("{:.6}", 0.5 * l),
                format!("{:.10e}", self.curves[0][i]),
                format!("{:.10e}", self.curves[1][i]),
                format!("{:.10e}", self.curves[2][i]),
                format!("{:.10e}", total[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn index(p: ProcessType) -> usize {
    match p {
        ProcessType::Type0 => 0,
        ProcessType::TypeI => 1,
        ProcessType::TypeII => 2,
    }
}

fn weighted_sinc2(fiber: &StepIndexFiber, process: ProcessType, fundamental_nm: f64) -> Result<f64> {
    let w = omega_from_nm(fundamental_nm);
    let dk = phase_mismatch(fiber, process, w, w)?;
    Ok(process.shg_weight() * sinc(0.5 * fiber.length_m * dk).powi(2))
}

/// SHG curves `w·sinc²[(L/2)(k(2ω) − k_B(ω) − k_C(ω) − 2π/Λ)]` with weights
/// 9 : 1 : 4, sampled on `fundamental_nm`, plus the exact peak positions.
pub fn shg_spectrum(fiber: &StepIndexFiber, fundamental_nm: &[f64]) -> Result<ShgSpectrum> {
    if fundamental_nm.len() < 2 || fundamental_nm.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "fundamental grid must have >= 2 strictly increasing samples".into(),
        ));
    }
    fiber.validate()?;
    let mut curves: [Vec<f64>; 3] = Default::default();
    let mut peaks = [None; 3];
    let bracket = (
        0.5 * fundamental_nm[0],
        0.5 * fundamental_nm[fundamental_nm.len() - 1],
    );
    for p in ProcessType::ALL {
        curves[index(p)] = fundamental_nm
            .par_iter()
            .map(|&l| weighted_sinc2(fiber, p, l))
            .collect::<Result<_>>()?;
        peaks[index(p)] = match qpm_pump_wavelength(fiber, p, bracket) {
            Ok(sh) => Some(ShgPeak {
                process: p,
                fundamental_nm: 2.0 * sh,
                harmonic_nm: sh,
                height: weighted_sinc2(fiber, p, 2.0 * sh)?,
            }),
            Err(Error::NotFound(_)) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(ShgSpectrum {
        fundamental_nm: fundamental_nm.to_vec(),
        curves,
        peaks,
    })
}
