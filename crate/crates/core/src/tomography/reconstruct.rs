use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::{poisson, CountRecord};
use super::optics::{setting_operator, Analyzer, MeasurementSetting};
use super::state::{
    best_maximally_entangled_fidelity, bell_hv, concurrence, fidelity_to_pure, DensityMatrix, C64,
};
use crate::numeric::mean_std;
use crate::{Error, Result};

type Params = SVector<f64, 16>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOptions {
    /// Model the recorded accidentals explicitly instead of folding them into
    /// the state.
    pub subtract_accidentals: bool,
    pub max_evaluations: usize,
    /// Stop when the per-count log-likelihood improves by less than this.
    pub ll_tolerance: f64,
    pub step_tolerance: f64,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            subtract_accidentals: false,
            max_evaluations: 100_000,
            ll_tolerance: 1e-9,
            step_tolerance: 1e-8,
        }
    }
}

/// Linear-inversion estimate; may have negative eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEstimate {
    pub rho: DensityMatrix,
    pub min_eigenvalue: f64,
    pub physical: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleDiagnostics {
    pub evaluations: usize,
    pub iterations: usize,
    /// Poisson log-likelihood `Σ n ln μ − μ` (without the `ln n!` constant).
    pub log_likelihood: f64,
    pub linear_min_eigenvalue: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricUncertainty {
    pub concurrence: f64,
    pub fidelity: f64,
    pub fidelity_psi_plus: f64,
    pub resamples: usize,
    pub excluded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub rho: DensityMatrix,
    pub concurrence: f64,
    /// Best fidelity to `(|HV⟩ + e^{iφ}|VH⟩)/√2` over `φ`.
    pub fidelity: f64,
    pub fidelity_phase_rad: f64,
    /// Fidelity to `|Ψ⁺⟩ = (|HV⟩ + |VH⟩)/√2`.
    pub fidelity_psi_plus: f64,
    pub uncertainties: Option<MetricUncertainty>,
    pub diagnostics: MleDiagnostics,
}

impl TomographyResult {
    fn from_state(rho: DensityMatrix, diagnostics: MleDiagnostics) -> Result<Self> {
        let c = concurrence(&rho)?;
        let (f, phi) = best_maximally_entangled_fidelity(&rho);
        let fp = fidelity_to_pure(&rho, &bell_hv(0.0))?;
        Ok(Self {
            rho,
            concurrence: c,
            fidelity: f,
            fidelity_phase_rad: phi,
            fidelity_psi_plus: fp,
            uncertainties: None,
            diagnostics,
        })
    }

    /// JSON report including a digest of the settings it was computed from.
    pub fn to_json(&self, settings: &[MeasurementSetting]) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v["settings_digest"] = serde_json::json!({
            "count": settings.len(),
            "fnv1a": settings_digest(settings),
        });
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// FNV-1a hash of the setting ids, angles and wavelengths.
pub fn settings_digest(settings: &[MeasurementSetting]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for b in bytes {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for s in settings {
        eat(s.id.as_bytes());
        for arm in [&s.signal, &s.idler] {
            for x in [arm.qwp_rad, arm.hwp_rad, arm.wavelength_nm] {
                eat(&x.to_le_bytes());
            }
            eat(format!("{:?}", arm.polarizer).as_bytes());
        }
    }
    format!("{h:016x}")
}

fn pauli() -> [Matrix2<C64>; 4] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        Matrix2::new(o, z, z, o),
        Matrix2::new(z, o, o, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(o, z, z, -o),
    ]
}

/// Operators of the records' settings, checked for matching ids.
fn operators(
    settings: &[MeasurementSetting],
    records: &[CountRecord],
    analyzer: &Analyzer,
) -> Result<Vec<Matrix4<C64>>> {
    if settings.len() != records.len() || settings.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} settings but {} count records",
            settings.len(),
            records.len()
        )));
    }
    for (s, r) in settings.iter().zip(records) {
        s.validate()?;
        if s.id != r.setting_id {
            return Err(Error::InvalidInput(format!("record '{}' does not match setting '{}'", r.setting_id, s.id)));
        }
        if !(r.integration_s > 0.0) {
            return Err(Error::InvalidInput(format!("setting {}: integration time must be > 0", s.id)));
        }
    }
    Ok(settings.iter().map(|s| setting_operator(s, analyzer)).collect())
}

/// Least-squares inversion of `rate_k = N·Tr(ρ P_k)` in the two-qubit Pauli
/// basis (16 unknowns `N·s_j`). Fails if the settings do not span the space.
pub fn linear_inversion(
    settings: &[MeasurementSetting],
    records: &[CountRecord],
    analyzer: &Analyzer,
    subtract_accidentals: bool,
) -> Result<LinearEstimate> {
    let ops = operators(settings, records, analyzer)?;
    let p = pauli();
    let basis: Vec<Matrix4<C64>> = (0..16).map(|j| p[j / 4].kronecker(&p[j % 4])).collect();
    let n = ops.len();
    let a = DMatrix::from_fn(n, 16, |k, j| 0.25 * (basis[j] * ops[k]).trace().re);
    let y = DVector::from_fn(n, |k, _| {
        let r = &records[k];
        let c = r.coincidences as f64 - if subtract_accidentals { r.accidentals } else { 0.0 };
        c / r.integration_s
    });
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
    if rank < 16 {
        return Err(Error::IllPosed {
            rank,
            null_dim: 16 - rank,
        });
    }
    let x = svd
        .solve(&y, 1e-10 * smax)
        .map_err(|e| Error::Numerical(format!("least squares: {e}")))?;
    if !(x[0] > 0.0) {
        return Err(Error::Numerical("inverted state has non-positive trace".into()));
    }
    let mut m = Matrix4::zeros();
    for j in 0..16 {
        m += basis[j] * C64::new(0.25 * x[j] / x[0], 0.0);
    }
    let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let rho = DensityMatrix::new_unphysical(m)?;
    let min = rho.min_eigenvalue();
    Ok(LinearEstimate {
        physical: min >= -super::state::EIGEN_FLOOR,
        min_eigenvalue: min,
        rho,
    })
}

/// Lower-triangular `T` from 16 reals.
fn t_matrix(p: &Params) -> Matrix4<C64> {
    let mut t = Matrix4::zeros();
    let mut k = 4;
    for i in 0..4 {
        t[(i, i)] = C64::new(p[i], 0.0);
        for j in 0..i {
            t[(i, j)] = C64::new(p[k], p[k + 1]);
            k += 2;
        }
    }
    t
}

fn t_params(t: &Matrix4<C64>) -> Params {
    let mut p = Params::zeros();
    let mut k = 4;
    for i in 0..4 {
        p[i] = t[(i, i)].re;
        for j in 0..i {
            p[k] = t[(i, j)].re;
            p[k + 1] = t[(i, j)].im;
            k += 2;
        }
    }
    p
}

/// Lower-triangular `T` with `T†T = ρ`, from a Cholesky factor of the
/// index-reversed matrix.
fn reverse_cholesky(rho: &Matrix4<C64>) -> Result<Matrix4<C64>> {
    let j = Matrix4::from_fn(|r, c| if r + c == 3 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let l = (j * rho * j)
        .cholesky()
        .ok_or_else(|| Error::Numerical("seed state is not positive definite".into()))?
        .l();
    Ok((j * l * j).adjoint())
}

struct Likelihood<'a> {
    ops: &'a [Matrix4<C64>],
    counts: Vec<f64>,
    times: Vec<f64>,
    background: Vec<f64>,
    scale: f64,
    total: f64,
    evaluations: std::cell::Cell<usize>,
}

impl Likelihood<'_> {
    /// `Σ n ln μ − μ`.
    fn log_likelihood(&self, p: &Params) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        let t = t_matrix(p);
        let a = t.adjoint() * t;
        let mut ll = 0.0;
        for (k, op) in self.ops.iter().enumerate() {
            let mut tr = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    tr += (a[(i, j)] * op[(j, i)]).re;
                }
            }
            let mu = self.scale * self.times[k] * tr + self.background[k];
            let n = self.counts[k];
            ll += if n > 0.0 { n * mu.max(1e-300).ln() } else { 0.0 } - mu;
        }
        ll
    }

    /// Objective for minimization, per recorded count.
    fn cost(&self, p: &Params) -> f64 {
        -self.log_likelihood(p) / self.total
    }

    fn gradient(&self, p: &Params) -> Params {
        let h = 1e-6;
        let mut g = Params::zeros();
        for i in 0..16 {
            let mut a = *p;
            let mut b = *p;
            a[i] += h;
            b[i] -= h;
            g[i] = (self.cost(&a) - self.cost(&b)) / (2.0 * h);
        }
        g
    }
}

/// Maximum-likelihood state `ρ = T†T/Tr(T†T)` by BFGS on the 16 entries of
/// `T` with central-difference gradients and backtracking, seeded from the
/// regularized linear inversion.
pub fn mle_reconstruct(
    settings: &[MeasurementSetting],
    records: &[CountRecord],
    analyzer: &Analyzer,
    options: &ReconstructionOptions,
) -> Result<TomographyResult> {
    let ops = operators(settings, records, analyzer)?;
    let linear = linear_inversion(settings, records, analyzer, options.subtract_accidentals)?;
    let seed = linear.rho.regularized(1e-3);
    let background: Vec<f64> = records
        .iter()
        .map(|r| if options.subtract_accidentals { r.accidentals } else { 0.0 })
        .collect();
    let counts: Vec<f64> = records.iter().map(|r| r.coincidences as f64).collect();
    let times: Vec<f64> = records.iter().map(|r| r.integration_s).collect();
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("no coincidences recorded".into()));
    }
    let expected: f64 = ops
        .iter()
        .zip(&times)
        .map(|(op, t)| t * (seed.matrix() * op).trace().re)
        .sum();
    let signal = (total - background.iter().sum::<f64>()).max(1e-3 * total);
    let like = Likelihood {
        ops: &ops,
        counts,
        times,
        background,
        scale: signal / expected,
        total,
        evaluations: std::cell::Cell::new(0),
    };

    let mut p = t_params(&reverse_cholesky(seed.matrix())?);
    let mut f = like.cost(&p);
    let mut g = like.gradient(&p);
    let mut h_inv = SMatrix::<f64, 16, 16>::identity();
    let mut iterations = 0;
    let mut converged = false;
    while like.evaluations.get() < options.max_evaluations {
        iterations += 1;
        let mut dir = -(h_inv * g);
        if dir.dot(&g) >= 0.0 {
            h_inv = SMatrix::identity();
            dir = -g;
        }
        // backtracking (Armijo)
        let slope = dir.dot(&g);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = p + dir * alpha;
            let ft = like.cost(&trial);
            if ft.is_finite() && ft <= f + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((p_new, f_new)) = accepted else {
            if h_inv != SMatrix::<f64, 16, 16>::identity() {
                h_inv = SMatrix::identity();
                continue;
            }
            // no descent left along the gradient
            converged = true;
            break;
        };
        let step = p_new - p;
        let g_new = like.gradient(&p_new);
        let improvement = f - f_new;
        let y = g_new - g;
        let sy = step.dot(&y);
        if sy > 1e-16 {
            let rho = 1.0 / sy;
            let i = SMatrix::<f64, 16, 16>::identity();
            h_inv = (i - step * y.transpose() * rho) * h_inv * (i - y * step.transpose() * rho)
                + step * step.transpose() * rho;
        }
        p = p_new;
        f = f_new;
        g = g_new;
        if improvement < options.ll_tolerance || step.norm() < options.step_tolerance {
            converged = true;
            break;
        }
    }

    let t = t_matrix(&p);
    let a = t.adjoint() * t;
    let a = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let rho = DensityMatrix::new(a / a.trace())?;
    let diagnostics = MleDiagnostics {
        evaluations: like.evaluations.get(),
        iterations,
        log_likelihood: -f * like.total,
        linear_min_eigenvalue: linear.min_eigenvalue,
    };
    if !converged {
        return Err(Error::NonConvergence {
            evaluations: diagnostics.evaluations,
            log_likelihood: diagnostics.log_likelihood,
            best: Box::new(rho),
        });
    }
    TomographyResult::from_state(rho, diagnostics)
}

/// Sample standard deviations of the metrics over `n_resamples` Poisson
/// resamplings of the records (mean = observed count), each reconstructed by
/// [`mle_reconstruct`]. Resample `i` draws from stream `i` of a ChaCha8
/// generator seeded with `seed`, so results do not depend on thread count.
pub fn uncertainty_mc(
    settings: &[MeasurementSetting],
    records: &[CountRecord],
    analyzer: &Analyzer,
    options: &ReconstructionOptions,
    n_resamples: usize,
    seed: u64,
) -> Result<MetricUncertainty> {
    if n_resamples < 100 {
        return Err(Error::InvalidInput(format!("need >= 100 resamples, got {n_resamples}")));
    }
    let outcomes: Vec<Result<Option<[f64; 3]>>> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let resampled = records
                .iter()
                .map(|r| {
                    Ok(CountRecord {
                        coincidences: poisson(r.coincidences as f64, &mut rng)?,
                        ..r.clone()
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match mle_reconstruct(settings, &resampled, analyzer, options) {
                Ok(r) => Ok(Some([r.concurrence, r.fidelity, r.fidelity_psi_plus])),
                Err(Error::NonConvergence { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut values = Vec::with_capacity(n_resamples);
    for o in outcomes {
        if let Some(v) = o? {
            values.push(v);
        }
    }
    let excluded = n_resamples - values.len();
    if excluded as f64 > 0.05 * n_resamples as f64 {
        return Err(Error::Unreliable {
            excluded,
            total: n_resamples,
        });
    }
    let sd = |k: usize| mean_std(&values.iter().map(|v| v[k]).collect::<Vec<_>>()).1;
    Ok(MetricUncertainty {
        concurrence: sd(0),
        fidelity: sd(1),
        fidelity_psi_plus: sd(2),
        resamples: values.len(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomography::counts::{simulate_counts, SimulationParams};
    use crate::tomography::optics::{born_probability, minimal_settings, mub_settings};
    use crate::tomography::state::tests::random_state;

    fn exact_records(rho: &DensityMatrix, settings: &[MeasurementSetting], n: f64) -> Vec<CountRecord> {
        // noiseless "counts" carried at full precision through a unit window
        settings
            .iter()
            .map(|s| CountRecord {
                setting_id: s.id.clone(),
                coincidences: (n * born_probability(rho, s, &Analyzer::default())).round() as u64,
                accidentals: 0.0,
                integration_s: 1.0,
            })
            .collect()
    }

    fn params(pairs: f64) -> SimulationParams {
        SimulationParams {
            pairs_per_setting: pairs,
            accidental_rate_hz: 0.0,
            integration_s: 1.0,
            efficiency: 1.0,
        }
    }

    #[test]
    fn linear_inversion_is_exact_on_noiseless_data() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(9);
        let an = Analyzer::default();
        for settings in [mub_settings(1290.0, 1330.0), minimal_settings(1270.0, 1350.0)] {
            let rho = random_state(&mut rng);
            // real-valued rates: integration chosen so counts are exact probabilities
            let records: Vec<CountRecord> = settings
                .iter()
                .map(|s| CountRecord {
                    setting_id: s.id.clone(),
                    coincidences: 1,
                    accidentals: 0.0,
                    integration_s: 1.0 / born_probability(&rho, s, &an),
                })
                .collect();
            let est = linear_inversion(&settings, &records, &an, false).unwrap();
            assert!((est.rho.matrix() - rho.matrix()).norm() < 1e-8);
            assert!(est.physical);
        }
    }

    #[test]
    fn rank_deficient_settings_are_ill_posed() {
        let s = &minimal_settings(1290.0, 1330.0)[..15];
        let r = exact_records(&DensityMatrix::werner(0.5).unwrap(), s, 1e4);
        match linear_inversion(s, &r, &Analyzer::default(), false) {
            Err(Error::IllPosed { rank, null_dim }) => assert_eq!((rank, null_dim), (15, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn noisy_inversion_can_be_unphysical_but_mle_is_not() {
        let s = mub_settings(1290.0, 1330.0);
        let an = Analyzer::default();
        let psi = DensityMatrix::pure(&bell_hv(0.0)).unwrap();
        let mut flagged = 0;
        for seed in 0..10 {
            let r = simulate_counts(&psi, &s, &an, &params(200.0), seed).unwrap();
            let lin = linear_inversion(&s, &r, &an, false).unwrap();
            if !lin.physical {
                flagged += 1;
            }
            let m = mle_reconstruct(&s, &r, &an, &ReconstructionOptions::default()).unwrap();
            assert!(m.rho.min_eigenvalue() >= -1e-12);
        }
        assert!(flagged > 0);
    }

    #[test]
    fn reverse_cholesky_round_trip() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(4);
        let rho = random_state(&mut rng);
        let t = reverse_cholesky(rho.matrix()).unwrap();
        assert!((t.adjoint() * t - rho.matrix()).norm() < 1e-12);
        assert!((t_matrix(&t_params(&t)) - t).norm() == 0.0);
        for i in 0..4 {
            for j in i + 1..4 {
                assert_eq!(t[(i, j)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn mle_on_noiseless_bell_state() {
        let s = mub_settings(1290.0, 1330.0);
        let r = exact_records(&DensityMatrix::pure(&bell_hv(0.0)).unwrap(), &s, 1e8);
        let m = mle_reconstruct(&s, &r, &Analyzer::default(), &ReconstructionOptions::default()).unwrap();
        assert!(m.fidelity_psi_plus > 0.9999, "{}", m.fidelity_psi_plus);
    }

    #[test]
    fn mle_tolerates_zero_counts() {
        let s = mub_settings(1290.0, 1330.0);
        let mut r = exact_records(&DensityMatrix::werner(0.9).unwrap(), &s, 1e4);
        r[5].coincidences = 0;
        r[17].coincidences = 0;
        let m = mle_reconstruct(&s, &r, &Analyzer::default(), &ReconstructionOptions::default()).unwrap();
        assert!(m.diagnostics.log_likelihood.is_finite());
    }

    #[test]
    fn werner_concurrence_and_fidelity() {
        let s = mub_settings(1290.0, 1330.0);
        let an = Analyzer::default();
        let w = DensityMatrix::werner(0.95).unwrap();
        let r = simulate_counts(&w, &s, &an, &params(1e4), 1).unwrap();
        let m = mle_reconstruct(&s, &r, &an, &ReconstructionOptions::default()).unwrap();
        assert!((m.concurrence - 0.925).abs() < 0.02, "{}", m.concurrence);
        assert!((m.fidelity_psi_plus - 0.9625).abs() < 0.01);
    }

    #[test]
    fn evaluation_cap_returns_best_iterate() {
        let s = mub_settings(1290.0, 1330.0);
        let an = Analyzer::default();
        let r = simulate_counts(&DensityMatrix::werner(0.95).unwrap(), &s, &an, &params(1e4), 1).unwrap();
        let opts = ReconstructionOptions {
            max_evaluations: 50,
            ..Default::default()
        };
        match mle_reconstruct(&s, &r, &an, &opts) {
            Err(Error::NonConvergence { best, .. }) => assert!(best.is_physical()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn accidentals_model_recovers_purer_state() {
        let s = mub_settings(1290.0, 1330.0);
        let an = Analyzer::default();
        let p = SimulationParams {
            pairs_per_setting: 4e4,
            accidental_rate_hz: 200.0,
            integration_s: 1.0,
            efficiency: 1.0,
        };
        let psi = DensityMatrix::pure(&bell_hv(0.0)).unwrap();
        let r = simulate_counts(&psi, &s, &an, &p, 3).unwrap();
        let raw = mle_reconstruct(&s, &r, &an, &ReconstructionOptions::default()).unwrap();
        let sub = mle_reconstruct(&s, &r, &an, &ReconstructionOptions { subtract_accidentals: true, ..Default::default() }).unwrap();
        assert!(sub.concurrence > raw.concurrence + 0.005, "{} vs {}", sub.concurrence, raw.concurrence);
    }

    #[test]
    fn mc_uncertainty_is_deterministic_and_scales() {
        let s = mub_settings(1290.0, 1330.0);
        let an = Analyzer::default();
        let w = DensityMatrix::werner(0.95).unwrap();
        let opts = ReconstructionOptions::default();
        let lo = simulate_counts(&w, &s, &an, &params(1e3), 5).unwrap();
        let hi = simulate_counts(&w, &s, &an, &params(1e5), 5).unwrap();
        let a = uncertainty_mc(&s, &lo, &an, &opts, 100, 77).unwrap();
        let b = uncertainty_mc(&s, &lo, &an, &opts, 100, 77).unwrap();
        assert_eq!(a, b);
        let c = uncertainty_mc(&s, &hi, &an, &opts, 100, 77).unwrap();
        let ratio = a.fidelity_psi_plus / c.fidelity_psi_plus;
        assert!((ratio / 10.0 - 1.0).abs() < 0.3, "ratio {ratio}");
        assert!(c.concurrence < 0.005 && c.fidelity < 0.005);
        assert!(uncertainty_mc(&s, &lo, &an, &opts, 99, 77).is_err());
    }

    #[test]
    fn report_has_digest() {
        let s = mub_settings(1290.0, 1330.0);
        let r = exact_records(&DensityMatrix::werner(0.9).unwrap(), &s, 1e4);
        let m = mle_reconstruct(&s, &r, &Analyzer::default(), &ReconstructionOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json(&s).unwrap()).unwrap();
        assert_eq!(v["settings_digest"]["count"], 36);
        assert_eq!(v["rho"]["re"].as_array().unwrap().len(), 4);
        assert_ne!(settings_digest(&s), settings_digest(&s[..35]));
    }

    #[test]
    fn estimator_is_consistent() {
        let s = mub_settings(1290.0, 1330.0);
        let an = Analyzer::default();
        let ket = nalgebra::Vector4::new(
            C64::new(0.1, 0.2),
            C64::new(0.6, -0.1),
            C64::new(0.5, 0.4),
            C64::new(-0.2, 0.05),
        )
        .normalize();
        let truth = DensityMatrix::pure(&ket).unwrap();
        let median_infidelity = |pairs: f64| {
            let mut v: Vec<f64> = (0..9)
                .map(|seed| {
                    let r = simulate_counts(&truth, &s, &an, &params(pairs), seed).unwrap();
                    let m = mle_reconstruct(&s, &r, &an, &ReconstructionOptions::default()).unwrap();
                    1.0 - fidelity_to_pure(&m.rho, &ket).unwrap()
                })
                .collect();
            v.sort_by(f64::total_cmp);
            v[4]
        };
        let d: Vec<f64> = [1e3, 1e4, 1e5].map(median_infidelity).to_vec();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }
}
