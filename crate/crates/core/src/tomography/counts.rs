use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::optics::{born_probability, Analyzer, ArmSetting, MeasurementSetting, PolarizerAxis};
use super::state::DensityMatrix;
use crate::{Error, Result};

/// Coincidences recorded for one measurement setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_id: String,
    pub coincidences: u64,
    /// Expected accidental coincidences in the window.
    pub accidentals: f64,
    pub integration_s: f64,
}

impl CountRecord {
    /// Accidentals above the recorded coincidences usually mean a bad estimate.
    pub fn accidentals_exceed_counts(&self) -> bool {
        self.accidentals > self.coincidences as f64
    }
}

/// Forward-model parameters for synthetic counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    /// Pairs reaching the analyzers per setting window.
    pub pairs_per_setting: f64,
    pub accidental_rate_hz: f64,
    pub integration_s: f64,
    /// Per-detector efficiency; coincidences scale with its square.
    pub efficiency: f64,
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pairs_per_setting > 0.0 && self.pairs_per_setting.is_finite()) {
            return Err(Error::InvalidInput("pairs per setting must be > 0".into()));
        }
        if !(self.accidental_rate_hz >= 0.0 && self.integration_s > 0.0) {
            return Err(Error::InvalidInput("accidental rate must be >= 0 and integration time > 0".into()));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::InvalidInput(format!("efficiency {} outside (0, 1]", self.efficiency)));
        }
        Ok(())
    }

    /// Mean coincidences for a setting of Born probability `p`.
    pub fn mean_counts(&self, p: f64) -> f64 {
        self.pairs_per_setting * self.efficiency * self.efficiency * p.max(0.0)
            + self.accidental_rate_hz * self.integration_s
    }
}

pub(crate) fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as u64)
}

/// Poisson coincidences for each setting, from one ChaCha8 stream seeded with
/// `seed` and consumed in setting order.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    analyzer: &Analyzer,
    params: &SimulationParams,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    settings
        .iter()
        .map(|s| {
            s.validate()?;
            let mean = params.mean_counts(born_probability(rho, s, analyzer));
            Ok(CountRecord {
                setting_id: s.id.clone(),
                coincidences: poisson(mean, &mut rng)?,
                accidentals: params.accidental_rate_hz * params.integration_s,
                integration_s: params.integration_s,
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct Row {
    setting_id: String,
    qwp_s_deg: f64,
    hwp_s_deg: f64,
    pol_s: PolarizerAxis,
    qwp_i_deg: f64,
    hwp_i_deg: f64,
    pol_i: PolarizerAxis,
    lambda_s_nm: f64,
    lambda_i_nm: f64,
    coincidences: u64,
    accidentals: f64,
    integration_s: f64,
}

/// Writes settings and counts side by side, angles in degrees.
pub fn write_counts_csv<W: Write>(settings: &[MeasurementSetting], records: &[CountRecord], out: W) -> Result<()> {
    if settings.len() != records.len() {
        return Err(Error::InvalidInput("settings and records differ in length".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    for (s, r) in settings.iter().zip(records) {
        w.serialize(Row {
            setting_id: s.id.clone(),
            qwp_s_deg: s.signal.qwp_rad.to_degrees(),
            hwp_s_deg: s.signal.hwp_rad.to_degrees(),
            pol_s: s.signal.polarizer,
            qwp_i_deg: s.idler.qwp_rad.to_degrees(),
            hwp_i_deg: s.idler.hwp_rad.to_degrees(),
            pol_i: s.idler.polarizer,
            lambda_s_nm: s.signal.wavelength_nm,
            lambda_i_nm: s.idler.wavelength_nm,
            coincidences: r.coincidences,
            accidentals: r.accidentals,
            integration_s: r.integration_s,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_counts_csv<R: Read>(input: R) -> Result<(Vec<MeasurementSetting>, Vec<CountRecord>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut settings = Vec::new();
    let mut records = Vec::new();
    for row in rdr.deserialize() {
        let r: Row = row?;
        let arm = |q: f64, h: f64, p, l| ArmSetting {
            qwp_rad: q.to_radians(),
            hwp_rad: h.to_radians(),
            polarizer: p,
            wavelength_nm: l,
        };
        let s = MeasurementSetting {
            id: r.setting_id.clone(),
            signal: arm(r.qwp_s_deg, r.hwp_s_deg, r.pol_s, r.lambda_s_nm),
            idler: arm(r.qwp_i_deg, r.hwp_i_deg, r.pol_i, r.lambda_i_nm),
        };
        s.validate()?;
        if !(r.accidentals >= 0.0 && r.integration_s > 0.0) {
            return Err(Error::InvalidInput(format!("setting {}: bad accidentals or integration time", r.setting_id)));
        }
        settings.push(s);
        records.push(CountRecord {
            setting_id: r.setting_id,
            coincidences: r.coincidences,
            accidentals: r.accidentals,
            integration_s: r.integration_s,
        });
    }
    Ok((settings, records))
}
