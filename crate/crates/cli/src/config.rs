//! Experiment configuration files.
//!
//! One TOML file describes the fiber, the pump and whichever stages a
//! subcommand needs. Relative paths are resolved against the config file's
//! directory. Every section is validated before any computation starts.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ppsf_core::dispersion::StepIndexFiber;
use ppsf_core::hom::DipModel;
use ppsf_core::qpm::{DetuningGrid, ProcessType};
use ppsf_core::tomography::{Analyzer, DensityMatrix, SimulationParams};
use ppsf_core::{presets, Error, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub fiber: FiberSource,
    pub calibration: Option<CalibrationSpec>,
    #[serde(default)]
    pub source: SourceSpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub shg: Option<ShgSpec>,
    pub tuning: Option<TuningSpec>,
    pub hom: Option<HomSpec>,
    pub tomo: Option<TomoSpec>,
    #[serde(skip)]
    base_dir: PathBuf,
}

/// Either a fiber file or the name of a shipped fiber.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSource {
    pub file: Option<PathBuf>,
    pub preset: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    /// Observed type-II SHG peak (second-harmonic wavelength, nm).
    pub type2_shg_nm: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default = "default_process")]
    pub process: String,
    #[serde(default = "default_pump")]
    pub pump_nm: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            process: default_process(),
            pump_nm: default_pump(),
        }
    }
}

fn default_process() -> String {
    "typeII".into()
}

fn default_pump() -> f64 {
    653.3
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_span_thz: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        let g = DetuningGrid::default();
        Self {
            half_span_thz: g.half_span_rad_per_s / (2.0 * std::f64::consts::PI * 1e12),
            points: g.points,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShgSpec {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSpec {
    pub pump_start_nm: f64,
    pub pump_stop_nm: f64,
    pub pumps: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    ppsf_core::qpm::TuningCurve::DEFAULT_THRESHOLD
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSpec {
    pub delay_start_fs: f64,
    pub delay_stop_fs: f64,
    pub points: usize,
    pub visibility: f64,
    /// Mean plateau counts per point; omit for a noiseless scan.
    pub plateau_counts: Option<f64>,
    #[serde(default = "one")]
    pub integration_s: f64,
    /// `fourier_of_density`, `gaussian` or `sinc2`.
    #[serde(default = "default_model")]
    pub model: String,
    /// Wavelength used to express bandwidths in nm; defaults to twice the pump.
    pub center_nm: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_model() -> String {
    "fourier_of_density".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoSpec {
    pub signal_nm: f64,
    pub idler_nm: f64,
    /// `mub36` or `minimal16`.
    #[serde(default = "default_settings")]
    pub settings: String,
    pub analyzer_design_nm: Option<f64>,
    /// Existing counts file; when absent counts are simulated from `state`.
    pub counts_file: Option<PathBuf>,
    pub state: Option<StateSpec>,
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub subtract_accidentals: bool,
    #[serde(default = "default_resamples")]
    pub mc_resamples: usize,
}

fn default_settings() -> String {
    "mub36".into()
}

fn default_resamples() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Werner { p: f64 },
    DephasedPair { visibility: f64, phase_rad: f64 },
}

impl StateSpec {
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        match *self {
            StateSpec::Werner { p } => DensityMatrix::werner(p),
            StateSpec::DephasedPair { visibility, phase_rad } => DensityMatrix::dephased_pair(visibility, phase_rad),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub pairs_per_setting: f64,
    #[serde(default)]
    pub accidental_rate_hz: f64,
    #[serde(default = "one")]
    pub integration_s: f64,
    #[serde(default = "one")]
    pub efficiency: f64,
}

impl NoiseSpec {
    pub fn params(&self) -> SimulationParams {
        SimulationParams {
            pairs_per_setting: self.pairs_per_setting,
            accidental_rate_hz: self.accidental_rate_hz,
            integration_s: self.integration_s,
            efficiency: self.efficiency,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn missing(section: &str) -> Error {
    invalid(format!("config has no [{section}] section"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Uncalibrated fiber as described in the config.
    pub fn fiber(&self) -> Result<StepIndexFiber> {
        let f = match (&self.fiber.file, &self.fiber.preset) {
            (Some(file), None) => {
                let path = self.resolve(file);
                if !path.is_file() {
                    return Err(invalid(format!("fiber file {} does not exist", path.display())));
                }
                StepIndexFiber::load(path)?
            }
            (None, Some(name)) if name == "ppsf-54um" || name == "ppsf" => presets::ppsf(),
            (None, Some(name)) => return Err(invalid(format!("unknown fiber preset '{name}'"))),
            _ => return Err(invalid("[fiber] needs exactly one of `file` or `preset`")),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn process(&self) -> Result<ProcessType> {
        self.source.process.parse()
    }

    pub fn grid(&self) -> DetuningGrid {
        DetuningGrid::from_thz(self.grid.half_span_thz, self.grid.points)
    }

    pub fn calibration(&self) -> Result<&CalibrationSpec> {
        self.calibration.as_ref().ok_or_else(|| missing("calibration"))
    }

    pub fn shg(&self) -> Result<&ShgSpec> {
        self.shg.as_ref().ok_or_else(|| missing("shg"))
    }

    pub fn tuning(&self) -> Result<&TuningSpec> {
        self.tuning.as_ref().ok_or_else(|| missing("tuning"))
    }

    pub fn hom(&self) -> Result<&HomSpec> {
        self.hom.as_ref().ok_or_else(|| missing("hom"))
    }

    pub fn tomo(&self) -> Result<&TomoSpec> {
        self.tomo.as_ref().ok_or_else(|| missing("tomo"))
    }

    pub fn counts_file(&self) -> Option<PathBuf> {
        self.tomo.as_ref()?.counts_file.as_deref().map(|p| self.resolve(p))
    }

    fn validate_common(&self) -> Result<()> {
        self.fiber()?;
        self.process()?;
        if !(self.source.pump_nm > 0.0 && self.source.pump_nm.is_finite()) {
            return Err(invalid(format!("pump_nm {} must be > 0", self.source.pump_nm)));
        }
        if let Some(c) = &self.calibration {
            if !(c.type2_shg_nm > 0.0 && c.type2_shg_nm.is_finite()) {
                return Err(invalid("calibration.type2_shg_nm must be > 0"));
            }
        }
        self.grid().validate()
    }

    pub fn validate_for(&self, command: Command) -> Result<()> {
        self.validate_common()?;
        match command {
            Command::Calibrate => {
                self.calibration()?;
            }
            Command::Spectrum => {}
            Command::Shg => {
                let s = self.shg()?;
                if !(s.start_nm > 0.0 && s.stop_nm > s.start_nm && s.points >= 2) {
                    return Err(invalid("[shg] needs 0 < start_nm < stop_nm and points >= 2"));
                }
            }
            Command::Tuning => {
                let t = self.tuning()?;
                if !(t.pump_start_nm > 0.0 && t.pump_stop_nm >= t.pump_start_nm && t.pumps >= 1) {
                    return Err(invalid("[tuning] needs 0 < pump_start_nm <= pump_stop_nm and pumps >= 1"));
                }
                if !(t.threshold > 0.0 && t.threshold < 1.0) {
                    return Err(invalid("[tuning] threshold must lie in (0, 1)"));
                }
            }
            Command::Hom => {
                let h = self.hom()?;
                if !(h.delay_stop_fs > h.delay_start_fs && h.points >= 10) {
                    return Err(invalid("[hom] needs delay_start_fs < delay_stop_fs and points >= 10"));
                }
                if !(0.0..=1.0).contains(&h.visibility) {
                    return Err(invalid("[hom] visibility must lie in [0, 1]"));
                }
                if let Some(c) = h.plateau_counts {
                    if !(c > 0.0 && h.integration_s > 0.0) {
                        return Err(invalid("[hom] plateau_counts and integration_s must be > 0"));
                    }
                }
                if !["fourier_of_density", "gaussian", "sinc2"].contains(&h.model.as_str()) {
                    return Err(invalid(format!("[hom] unknown model '{}'", h.model)));
                }
            }
            Command::Tomo => {
                let t = self.tomo()?;
                self.analyzer()?;
                if !["mub36", "minimal16"].contains(&t.settings.as_str()) {
                    return Err(invalid(format!("[tomo] unknown settings '{}'", t.settings)));
                }
                if !(t.signal_nm > 0.0 && t.idler_nm > 0.0) {
                    return Err(invalid("[tomo] signal_nm and idler_nm must be > 0"));
                }
                if t.mc_resamples != 0 && t.mc_resamples < 100 {
                    return Err(invalid("[tomo] mc_resamples must be 0 (off) or >= 100"));
                }
                match (&t.counts_file, &t.state, &t.noise) {
                    (Some(_), None, None) => {
                        let p = self.counts_file().unwrap_or_default();
                        if !p.is_file() {
                            return Err(invalid(format!("counts file {} does not exist", p.display())));
                        }
                    }
                    (None, Some(s), Some(n)) => {
                        s.density_matrix()?;
                        n.params().validate()?;
                    }
                    _ => {
                        return Err(invalid(
                            "[tomo] needs either `counts_file` or both [tomo.state] and [tomo.noise]",
                        ))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn analyzer(&self) -> Result<Analyzer> {
        match self.tomo.as_ref().and_then(|t| t.analyzer_design_nm) {
            Some(l) if l > 0.0 && l.is_finite() => Ok(Analyzer::designed_for(l)),
            Some(l) => Err(invalid(format!("analyzer_design_nm {l} must be > 0"))),
            None => Ok(Analyzer::default()),
        }
    }
}

/// Parametric dip models by name; the Fourier model needs the spectrum and is
/// built by the caller.
pub fn parametric_model(name: &str) -> Option<DipModel> {
    match name {
        "gaussian" => Some(DipModel::Gaussian),
        "sinc2" => Some(DipModel::Sinc2),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Calibrate,
    Spectrum,
    Shg,
    Tuning,
    Hom,
    Tomo,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse("[fiber]\npreset = \"ppsf\"\n").unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.process().unwrap(), ProcessType::TypeII);
        assert_eq!(c.source.pump_nm, 653.3);
        assert_eq!(c.grid().points, 4097);
        c.validate_for(Command::Spectrum).unwrap();
        assert!(c.validate_for(Command::Calibrate).is_err());
        assert!(c.validate_for(Command::Hom).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse("[fiber]\npreset = \"ppsf\"\nradius = 3\n").is_err());
        assert!(parse("sed = 1\n[fiber]\npreset = \"ppsf\"\n").is_err());
    }

    #[test]
    fn fiber_source_must_be_unique_and_exist() {
        let both = parse("[fiber]\npreset = \"ppsf\"\nfile = \"x.toml\"\n").unwrap();
        assert!(both.fiber().unwrap_err().is_input_error());
        let gone = parse("[fiber]\nfile = \"/nonexistent/fiber.toml\"\n").unwrap();
        assert!(gone.fiber().unwrap_err().is_input_error());
        let odd = parse("[fiber]\npreset = \"smf28\"\n").unwrap();
        assert!(odd.fiber().is_err());
    }

    #[test]
    fn tomo_sources_are_exclusive() {
        let base = "[fiber]\npreset = \"ppsf\"\n[tomo]\nsignal_nm = 1290.0\nidler_nm = 1330.0\n";
        let c = parse(base).unwrap();
        assert!(c.validate_for(Command::Tomo).is_err());
        let sim = format!(
            "{base}[tomo.state]\nkind = \"werner\"\np = 0.9\n[tomo.noise]\npairs_per_setting = 1000.0\n"
        );
        parse(&sim).unwrap().validate_for(Command::Tomo).unwrap();
        let bad_state = sim.replace("p = 0.9", "p = 1.5");
        assert!(parse(&bad_state).unwrap().validate_for(Command::Tomo).is_err());
        let few = format!("{sim}");
        let few = few.replace("idler_nm = 1330.0\n", "idler_nm = 1330.0\nmc_resamples = 50\n");
        assert!(parse(&few).unwrap().validate_for(Command::Tomo).is_err());
    }

    #[test]
    fn hom_model_names() {
        let c = parse(
            "[fiber]\npreset = \"ppsf\"\n[hom]\ndelay_start_fs = -100.0\ndelay_stop_fs = 100.0\npoints = 101\nvisibility = 0.8\nmodel = \"lorentz\"\n",
        )
        .unwrap();
        assert!(c.validate_for(Command::Hom).is_err());
        assert!(parametric_model("gaussian").is_some());
        assert!(parametric_model("fourier_of_density").is_none());
    }
}
