//! Subcommand pipelines. Each one computes everything first and only then
//! writes its artifacts, so a failed run leaves no partial output.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use ppsf_core::constants::{omega_from_nm, s2_per_m_to_ps2_per_km};
use ppsf_core::dispersion::StepIndexFiber;
use ppsf_core::hom::{
    fit_dip, hom_scan, poisson_scan, transform_limited_bandwidth, DensityTransform, DipModel, SpectralFamily,
};
use ppsf_core::numeric::linspace;
use ppsf_core::qpm::{
    calibrate_birefringence, fwhm_bandwidth, pair_dispersion, phase_mismatch, shg_spectrum, spdc_spectral_density,
    taylor_spectral_density, tuning_curve, ProcessType, SpdcConfig, SpectralDensity,
};
use ppsf_core::tomography::{
    minimal_settings, mle_reconstruct, mub_settings, read_counts_csv, simulate_counts, uncertainty_mc,
    write_counts_csv, ReconstructionOptions,
};
use ppsf_core::Result;

use crate::config::{parametric_model, ExperimentConfig};

/// Files produced by a run, written only after all computation succeeded.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    /// Human-readable summary lines for stdout.
    pub summary: Vec<String>,
}

impl Artifacts {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn add_json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.add(name, s.into_bytes());
        Ok(())
    }

    fn say(&mut self, line: String) {
        self.summary.push(line);
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes)?;
            out.push(p);
        }
        Ok(out)
    }
}

/// The configured fiber, calibrated when the config asks for it.
fn fiber(cfg: &ExperimentConfig) -> Result<StepIndexFiber> {
    let f = cfg.fiber()?;
    match &cfg.calibration {
        Some(c) => Ok(f.with_birefringence(calibrate_birefringence(&f, c.type2_shg_nm)?)),
        None => Ok(f),
    }
}

fn spdc_config(cfg: &ExperimentConfig) -> Result<SpdcConfig> {
    let c = SpdcConfig {
        fiber: fiber(cfg)?,
        process: cfg.process()?,
        pump_nm: cfg.source.pump_nm,
        grid: cfg.grid(),
    };
    c.validate()?;
    Ok(c)
}

fn density_csv(d: &SpectralDensity) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    d.write_csv(&mut buf)?;
    Ok(buf)
}

pub fn calibrate(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let target = cfg.calibration()?.type2_shg_nm;
    let raw = cfg.fiber()?;
    let dn = calibrate_birefringence(&raw, target)?;
    let cal = raw.with_birefringence(dn);
    let w = omega_from_nm(2.0 * target);
    let residual = phase_mismatch(&cal, ProcessType::TypeII, w, w)?;
    let (m, k2) = pair_dispersion(&cal, target)?;
    let k2_ps = s2_per_m_to_ps2_per_km(k2);

    let mut a = Artifacts::default();
    a.add("fiber_calibrated.toml", cal.to_toml_string().into_bytes());
    a.add_json(
        "calibration.json",
        &json!({
            "fiber_id": cal.id,
            "type2_shg_nm": target,
            "degenerate_nm": 2.0 * target,
            "birefringence_dn": dn,
            "residual_mismatch_rad_per_m": residual,
            "k2_ps2_per_km": k2_ps,
            "group_velocity_mismatch_s_per_m": m,
        }),
    )?;
    a.say(format!("dn = {dn:.6e}"));
    a.say(format!("residual mismatch = {residual:.3e} rad/m"));
    a.say(format!("|k2| at {:.1} nm = {:.3} ps^2/km", 2.0 * target, k2_ps.abs()));
    a.say(format!("M at {:.1} nm = {m:.3e} s/m", 2.0 * target));
    Ok(a)
}

pub fn spectrum(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let c = spdc_config(cfg)?;
    let exact = spdc_spectral_density(&c)?;
    let (m, k2) = pair_dispersion(&c.fiber, c.pump_nm)?;
    let taylor = taylor_spectral_density(&c, m, k2)?;
    let bw = fwhm_bandwidth(&exact)?;
    let deviation = exact
        .main_lobe()
        .map(|i| (exact.values[i] - taylor.values[i]).abs())
        .fold(0.0, f64::max);

    let mut a = Artifacts::default();
    a.add("spectrum.csv", density_csv(&exact)?);
    a.add("spectrum_taylor.csv", density_csv(&taylor)?);
    a.add_json(
        "spectrum.json",
        &json!({
            "envelope": exact.envelope_json(),
            "bandwidth": bw,
            "k2_ps2_per_km": s2_per_m_to_ps2_per_km(k2),
            "group_velocity_mismatch_s_per_m": m,
            "taylor_max_deviation_central_lobe": deviation,
            "asymmetry": exact.asymmetry(),
            "birefringence_dn": c.fiber.birefringence_dn,
        }),
    )?;
    a.say(format!("FWHM = {:.3} THz = {:.1} nm", bw.thz, bw.nm));
    a.say(format!("Taylor deviation over central lobe = {deviation:.3e}"));
    Ok(a)
}

pub fn shg(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let s = cfg.shg()?;
    let f = fiber(cfg)?;
    let spec = shg_spectrum(&f, &linspace(s.start_nm, s.stop_nm, s.points))?;
    let mut buf = Vec::new();
    spec.write_csv(&mut buf)?;
    let mut a = Artifacts::default();
    a.add("shg.csv", buf);
    a.add_json(
        "shg.json",
        &json!({ "birefringence_dn": f.birefringence_dn, "peaks": spec.peaks }),
    )?;
    for p in spec.peaks.iter().flatten() {
        a.say(format!("{:?} peak at {:.4} nm (SH), height {:.3}", p.process, p.harmonic_nm, p.height));
    }
    Ok(a)
}

pub fn tuning(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let t = cfg.tuning()?;
    let f = fiber(cfg)?;
    let pumps = linspace(t.pump_start_nm, t.pump_stop_nm, t.pumps);
    let curve = tuning_curve(&f, cfg.process()?, &pumps, cfg.grid(), t.threshold)?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    let slices: Vec<_> = curve
        .slices
        .iter()
        .map(|s| {
            json!({
                "pump_nm": s.pump_nm,
                "points": s.short_nm.len(),
                "branch_separation_thz": s.branch_separation_thz(),
                "short_min_nm": s.short_nm.iter().copied().reduce(f64::min),
                "long_max_nm": s.long_nm.iter().copied().reduce(f64::max),
            })
        })
        .collect();
    let mut a = Artifacts::default();
    a.add("tuning.csv", buf);
    a.add_json(
        "tuning.json",
        &json!({
            "fiber_id": curve.fiber_id,
            "process": curve.process,
            "threshold": curve.threshold,
            "slices": slices,
        }),
    )?;
    let empty = curve.slices.iter().filter(|s| s.is_empty()).count();
    a.say(format!("{} pump wavelengths, {empty} without phase matching", curve.slices.len()));
    Ok(a)
}

pub fn hom(cfg: &ExperimentConfig, seed: u64) -> Result<Artifacts> {
    let h = cfg.hom()?;
    let c = spdc_config(cfg)?;
    let density = spdc_spectral_density(&c)?;
    let clean = hom_scan(&density, &linspace(h.delay_start_fs, h.delay_stop_fs, h.points), h.visibility)?;
    let scan = match h.plateau_counts {
        Some(n) => poisson_scan(&clean, n, h.integration_s, seed)?,
        None => clean,
    };
    let (model, family) = match parametric_model(&h.model) {
        Some(DipModel::Gaussian) => (DipModel::Gaussian, SpectralFamily::Gaussian),
        // sinc² dip ↔ triangular spectrum
        Some(m) => (m, SpectralFamily::Triangle),
        None => (
            DipModel::FourierOfDensity(DensityTransform::new(&density)?),
            SpectralFamily::Sampled(density.clone()),
        ),
    };
    let fit = fit_dip(&scan, &model)?;
    let center = h.center_nm.unwrap_or(2.0 * c.pump_nm);
    let limit = transform_limited_bandwidth(fit.width_fs, center, &family)?;
    let others = SpectralFamily::ANALYTIC
        .iter()
        .map(|f| transform_limited_bandwidth(fit.width_fs, center, f))
        .collect::<Result<Vec<_>>>()?;
    let spectral = fwhm_bandwidth(&density)?;

    let mut buf = Vec::new();
    scan.write_csv(&mut buf)?;
    let mut a = Artifacts::default();
    a.add("hom_scan.csv", buf);
    a.add_json(
        "hom_fit.json",
        &json!({
            "fit": fit,
            "transform_limit": limit,
            "transform_limit_by_family": others,
            "spectrum_fwhm": spectral,
            "scan_warnings": scan.warnings,
            "seed": seed,
        }),
    )?;
    a.say(format!(
        "V = {:.4} +- {:.4}, width = {:.2} +- {:.2} fs",
        fit.visibility, fit.uncertainties.visibility, fit.width_fs, fit.uncertainties.width_fs
    ));
    a.say(format!(
        "transform-limited bandwidth ({}) = {:.1} nm = {:.2} THz",
        limit.family, limit.nm, limit.thz
    ));
    Ok(a)
}

pub fn tomo(cfg: &ExperimentConfig, seed: u64) -> Result<Artifacts> {
    let t = cfg.tomo()?;
    let analyzer = cfg.analyzer()?;
    let (settings, records) = match cfg.counts_file() {
        Some(path) => read_counts_csv(fs::File::open(path)?)?,
        None => {
            let settings = if t.settings == "minimal16" {
                minimal_settings(t.signal_nm, t.idler_nm)
            } else {
                mub_settings(t.signal_nm, t.idler_nm)
            };
            let (state, noise) = match (&t.state, &t.noise) {
                (Some(s), Some(n)) => (s.density_matrix()?, n.params()),
                _ => unreachable!("validated"),
            };
            let records = simulate_counts(&state, &settings, &analyzer, &noise, seed)?;
            (settings, records)
        }
    };
    let opts = ReconstructionOptions {
        subtract_accidentals: t.subtract_accidentals,
        ..Default::default()
    };
    let mut result = mle_reconstruct(&settings, &records, &analyzer, &opts)?;
    if t.mc_resamples > 0 {
        // a separate stream from the count simulation
        let mc_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
        result.uncertainties = Some(uncertainty_mc(&settings, &records, &analyzer, &opts, t.mc_resamples, mc_seed)?);
    }

    let mut buf = Vec::new();
    write_counts_csv(&settings, &records, &mut buf)?;
    let mut a = Artifacts::default();
    a.add("tomo_counts.csv", buf);
    let mut report = result.to_json(&settings)?;
    report.push('\n');
    a.add("tomo_result.json", report.into_bytes());
    let pm = |s: Option<f64>| s.map_or(String::new(), |s| format!(" +- {s:.4}"));
    let u = result.uncertainties;
    a.say(format!("concurrence = {:.4}{}", result.concurrence, pm(u.map(|u| u.concurrence))));
    a.say(format!(
        "fidelity (best phase {:.3} rad) = {:.4}{}",
        result.fidelity_phase_rad,
        result.fidelity,
        pm(u.map(|u| u.fidelity))
    ));
    a.say(format!(
        "fidelity to Psi+ = {:.4}{}",
        result.fidelity_psi_plus,
        pm(u.map(|u| u.fidelity_psi_plus))
    ));
    Ok(a)
}
