//! Hong-Ou-Mandel interference of the biphotons.
//!
//! Delays are in femtoseconds. The coincidence kernel is `e^{−i2Δτ}`, with `τ`
//! the relative delay between the two arms.

mod fit;
mod transform;

pub use fit::{fit_dip, fit_dip_with, DipFit, DipModel, DipUncertainties, FitOptions};
pub use transform::{
    transform_limited_bandwidth, DensityTransform, SpectralFamily, TransformLimit,
};

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qpm::SpectralDensity;
use crate::{Error, Result};

/// Coincidence rate versus delay, normalized to a unit plateau.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayScan {
    pub delays_fs: Vec<f64>,
    pub coincidence: Vec<f64>,
    /// Raw coincidence counts, when the scan is (simulated) data.
    pub counts: Option<Vec<f64>>,
    pub integration_s: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl DelayScan {
    pub fn len(&self) -> usize {
        self.delays_fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays_fs.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.delays_fs.len() != self.coincidence.len() {
            return Err(Error::InvalidInput("delay and coincidence lengths differ".into()));
        }
        if let Some(c) = &self.counts {
            if c.len() != self.len() || c.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidInput("counts must match the delays and be >= 0".into()));
            }
        }
        if self.delays_fs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("delays must be strictly increasing".into()));
        }
        if self.coincidence.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidInput("coincidence values must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// Writes `delay_fs,coincidence,counts,integration_s`; the last two
    /// columns are empty for noiseless scans.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delay_fs", "coincidence", "counts", "integration_s"])?;
        let t = self.integration_s.map(|t| t.to_string()).unwrap_or_default();
        for i in 0..self.len() {
            let c = self.counts.as_ref().map(|c| c[i].to_string()).unwrap_or_default();
            w.write_record([
                format!("{}", self.delays_fs[i]),
                format!("{:.12e}", self.coincidence[i]),
                c,
                t.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            delay_fs: f64,
            coincidence: f64,
            counts: Option<f64>,
            integration_s: Option<f64>,
        }
        let mut rdr = csv::Reader::from_reader(input);
        let rows: Vec<Row> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        let has_counts = rows.iter().all(|r| r.counts.is_some()) && !rows.is_empty();
        let scan = Self {
            delays_fs: rows.iter().map(|r| r.delay_fs).collect(),
            coincidence: rows.iter().map(|r| r.coincidence).collect(),
            counts: has_counts.then(|| rows.iter().map(|r| r.counts.unwrap()).collect()),
            integration_s: rows.first().and_then(|r| r.integration_s),
            warnings: Vec::new(),
        };
        scan.validate()?;
        Ok(scan)
    }
}

/// Noiseless coincidence curve
/// `p(τ) = 1 − V·Re[∫S(Δ)e^{−i2Δτ}dΔ / ∫S(Δ)dΔ]` by trapezoid quadrature on the
/// density's own grid.
pub fn hom_scan(density: &SpectralDensity, delays_fs: &[f64], visibility: f64) -> Result<DelayScan> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidInput(format!("visibility {visibility} must lie in [0, 1]")));
    }
    if delays_fs.windows(2).any(|w| w[1] <= w[0]) || delays_fs.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("delays must be finite and strictly increasing".into()));
    }
    let transform = DensityTransform::new(density)?;
    let coincidence = delays_fs
        .par_iter()
        .map(|&t| 1.0 - visibility * transform.value(t * 1e-15))
        .collect();
    let mut warnings = Vec::new();
    let asym = density.asymmetry();
    if asym > 1e-9 {
        warnings.push(format!(
            "spectral density is not symmetric in detuning (max |S(D) - S(-D)| = {asym:.3e}); \
             the dip shape is only the even part of the spectrum"
        ));
    }
    Ok(DelayScan {
        delays_fs: delays_fs.to_vec(),
        coincidence,
        counts: None,
        integration_s: None,
        warnings,
    })
}

/// Replaces a noiseless scan by Poisson counts with mean `plateau_counts·p(τ)`
/// per delay, drawn from a ChaCha8 stream seeded with `seed`.
pub fn poisson_scan(scan: &DelayScan, plateau_counts: f64, integration_s: f64, seed: u64) -> Result<DelayScan> {
    if !(plateau_counts > 0.0 && plateau_counts.is_finite()) {
        return Err(Error::InvalidInput("plateau counts must be > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(scan.len());
    for &p in &scan.coincidence {
        let mean = plateau_counts * p;
        let c = if mean > 0.0 {
            Poisson::new(mean)
                .map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?
                .sample(&mut rng)
        } else {
            0.0
        };
        counts.push(c);
    }
    Ok(DelayScan {
        delays_fs: scan.delays_fs.clone(),
        coincidence: counts.iter().map(|c| c / plateau_counts).collect(),
        counts: Some(counts),
        integration_s: Some(integration_s),
        warnings: scan.warnings.clone(),
    })
}
