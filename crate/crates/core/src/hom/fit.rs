use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::transform::{DensityTransform, SINC2_HALF_MAX};
use super::DelayScan;
use crate::numeric::sinc;
use crate::{Error, Result};

/// Dip shape used in the fit. Every shape is parametrized by its own FWHM.
#[derive(Clone, Debug)]
pub enum DipModel {
    /// Cosine transform of a simulated spectrum, stretched in delay.
    FourierOfDensity(DensityTransform),
    Gaussian,
    Sinc2,
}

impl DipModel {
    pub fn label(&self) -> &'static str {
        match self {
            DipModel::FourierOfDensity(_) => "fourier_of_density",
            DipModel::Gaussian => "gaussian",
            DipModel::Sinc2 => "sinc2",
        }
    }
}

/// Unit-width profile `g(x)` with `g(0) = 1`, `g(±1/2) = 1/2`, and `g'(x)`.
struct Profile<'a> {
    model: &'a DipModel,
    /// FWHM of the transform in seconds (density model only).
    scale_s: f64,
}

impl Profile<'_> {
    fn eval(&self, x: f64) -> (f64, f64) {
        match self.model {
            DipModel::Gaussian => {
                let c = 4.0 * std::f64::consts::LN_2;
                let g = (-c * x * x).exp();
                (g, -2.0 * c * x * g)
            }
            DipModel::Sinc2 => {
                let a = 2.0 * SINC2_HALF_MAX;
                let y = a * x;
                let s = sinc(y);
                let ds = if y.abs() < 1e-4 { -y / 3.0 } else { (y.cos() - s) / y };
                (s * s, 2.0 * s * ds * a)
            }
            DipModel::FourierOfDensity(t) => {
                let u = x * self.scale_s;
                (t.value(u), t.derivative(u) * self.scale_s)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipUncertainties {
    pub visibility: f64,
    pub width_fs: f64,
    pub center_fs: f64,
    pub plateau: f64,
}

/// Least-squares dip parameters. `plateau` is in the units of the fitted data
/// (counts for count scans, 1 for normalized ones).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipFit {
    pub model: String,
    pub visibility: f64,
    pub width_fs: f64,
    pub center_fs: f64,
    pub plateau: f64,
    pub uncertainties: DipUncertainties,
    pub residual_norm: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
}

impl DipFit {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative change of χ² treated as converged.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-12,
        }
    }
}

/// Fits `y = B·(1 − V·g((τ − τ₀)/W))` by Levenberg–Marquardt.
///
/// Count scans are fitted in counts with Poisson weights; normalized scans with
/// unit weights, and the covariance is then scaled by the reduced χ².
pub fn fit_dip(scan: &DelayScan, model: &DipModel) -> Result<DipFit> {
    fit_dip_with(scan, model, FitOptions::default())
}

pub fn fit_dip_with(scan: &DelayScan, model: &DipModel, options: FitOptions) -> Result<DipFit> {
    scan.validate()?;
    let n = scan.len();
    if n < 10 {
        return Err(Error::InvalidInput(format!("dip fit needs >= 10 points, got {n}")));
    }
    let (y, sigma, known_sigma): (Vec<f64>, Vec<f64>, bool) = match &scan.counts {
        Some(c) => (c.clone(), c.iter().map(|c| c.max(1.0).sqrt()).collect(), true),
        None => (scan.coincidence.clone(), vec![1.0; n], false),
    };
    let t = &scan.delays_fs;

    // plateau and noise from the outer fifth of the scan
    let edge = (n / 10).max(2);
    let outer: Vec<f64> = y[..edge].iter().chain(&y[n - edge..]).cloned().collect();
    let (plateau, spread) = crate::numeric::mean_std(&outer);
    let imin = (0..n).min_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
    let depth = 1.0 - y[imin] / plateau;
    let noise = if known_sigma { (plateau.max(1.0)).sqrt() / plateau } else { spread / plateau };
    if !(depth > 3.0 * noise) || !(plateau > 0.0) {
        return Err(Error::NoDip { depth, noise });
    }
    let half = plateau * (1.0 - 0.5 * depth);
    let mut lo = imin;
    while lo > 0 && y[lo] < half {
        lo -= 1;
    }
    let mut hi = imin;
    while hi + 1 < n && y[hi] < half {
        hi += 1;
    }
    let width0 = (t[hi] - t[lo]).max(t[1] - t[0]);

    let scale_s = match model {
        DipModel::FourierOfDensity(tr) => tr.dip_fwhm_s()?,
        _ => 1.0,
    };
    let profile = Profile { model, scale_s };

    // p = [B, V, τ0, W]
    let residuals = |p: &Vector4<f64>, jac: Option<&mut Vec<[f64; 4]>>| -> Vec<f64> {
        let mut r = Vec::with_capacity(n);
        let mut rows = Vec::new();
        for i in 0..n {
            let x = (t[i] - p[2]) / p[3];
            let (g, dg) = profile.eval(x);
            r.push((y[i] - p[0] * (1.0 - p[1] * g)) / sigma[i]);
            if jac.is_some() {
                let bv = p[0] * p[1];
                rows.push([
                    (1.0 - p[1] * g) / sigma[i],
                    -p[0] * g / sigma[i],
                    bv * dg / p[3] / sigma[i],
                    bv * dg * x / p[3] / sigma[i],
                ]);
            }
        }
        if let Some(j) = jac {
            *j = rows;
        }
        r
    };
    let chi2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let normal = |j: &[[f64; 4]], r: &[f64]| {
        let mut a = Matrix4::<f64>::zeros();
        let mut g = Vector4::<f64>::zeros();
        for (row, ri) in j.iter().zip(r) {
            for k in 0..4 {
                g[k] += row[k] * ri;
                for l in 0..4 {
                    a[(k, l)] += row[k] * row[l];
                }
            }
        }
        (a, g)
    };

    let mut p = Vector4::new(plateau, depth.clamp(0.0, 1.0), t[imin], width0);
    let mut jac = Vec::new();
    let mut r = residuals(&p, Some(&mut jac));
    let mut cost = chi2(&r);
    let mut lambda: f64 = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let (a, g) = normal(&jac, &r);
        let mut damped = a;
        for k in 0..4 {
            damped[(k, k)] += lambda * a[(k, k)].max(1e-300);
        }
        let step = damped.lu().solve(&g);
        let Some(step) = step else {
            lambda *= 10.0;
            continue;
        };
        let mut trial = p + step;
        trial[1] = trial[1].clamp(0.0, 1.0);
        if trial[3] <= 0.0 || trial.iter().any(|v| !v.is_finite()) {
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
            continue;
        }
        let r_trial = residuals(&trial, None);
        let c_trial = chi2(&r_trial);
        if c_trial <= cost {
            let rel = (cost - c_trial) / cost.max(f64::MIN_POSITIVE);
            p = trial;
            r = residuals(&p, Some(&mut jac));
            cost = c_trial;
            lambda = (lambda / 10.0).max(1e-12);
            let small_step = step.iter().zip(p.iter()).all(|(s, v)| s.abs() <= 1e-10 * v.abs().max(1e-12));
            if rel < options.tolerance || small_step || cost == 0.0 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                // no descent direction left: at a minimum to machine precision
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::FitDiverged {
            iterations,
            residual_norm: cost.sqrt(),
        });
    }

    let dof = (n - 4) as f64;
    let reduced = cost / dof;
    let (a, _) = normal(&jac, &r);
    let cov = a
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular dip-fit covariance".into()))?;
    let scale = if known_sigma { 1.0 } else { reduced };
    let err = |k: usize| (cov[(k, k)] * scale).max(0.0).sqrt();
    let rn = if known_sigma {
        r.iter().zip(&sigma).map(|(a, s)| (a * s).powi(2)).sum::<f64>().sqrt()
    } else {
        cost.sqrt()
    };
    Ok(DipFit {
        model: model.label().to_string(),
        visibility: p[1],
        width_fs: p[3],
        center_fs: p[2],
        plateau: p[0],
        uncertainties: DipUncertainties {
            visibility: err(1),
            width_fs: err(3),
            center_fs: err(2),
            plateau: err(0),
        },
        residual_norm: rn,
        reduced_chi2: reduced,
        iterations,
    })
}
