//! Experiment configuration, loaded from TOML and overridable from the CLI.
//!
//! Every field has a default, so an empty file is a valid configuration:
//!
//! ```toml
//! schemes = ["hermitian", "ecrip", "ocrip"]
//! n_subcarriers = 64
//! cp_len = 8
//! order = 4
//! ebn0_db = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
//! max_frames = 100000
//! max_errors = 500
//! seed = 1
//! out_dir = "results"
//!
//! [[channels]]
//! kind = "exponential"
//! memory = 4
//! tau = 1.5
//!
//! [clipper]
//! v_th = 2.65
//! v_st = 3.15
//! v_dc = 2.9
//!
//! [degrade]
//! ebn0_db = 20.0
//! dc_shifts = [0.0, 0.05, 0.1]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelModel, ClipperConfig};
use crate::frames::{check_subcarriers, ModulationSpec};
use crate::modem::Waveform;
use crate::{Error, Result};

/// Where the channel taps come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelSpec {
    Identity,
    /// `h_m ∝ exp(−m/τ)`, `m = 0..=memory`, unit DC gain.
    Exponential { memory: usize, tau: f64 },
    Taps { values: Vec<f64> },
    /// One tap per line.
    File { path: PathBuf },
}

impl ChannelSpec {
    pub fn build(&self, n_subcarriers: usize) -> Result<ChannelModel> {
        match self {
            ChannelSpec::Identity => ChannelModel::identity(n_subcarriers),
            ChannelSpec::Exponential { memory, tau } => {
                ChannelModel::exponential(*memory, *tau, n_subcarriers)
            }
            ChannelSpec::Taps { values } => ChannelModel::new(values.clone(), n_subcarriers),
            ChannelSpec::File { path } => ChannelModel::from_tap_file(path, n_subcarriers),
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSpec::Identity => f.write_str("identity"),
            ChannelSpec::Exponential { memory, tau } => write!(f, "exp:{memory}:{tau}"),
            ChannelSpec::Taps { values } => {
                let v: Vec<String> = values.iter().map(|t| t.to_string()).collect();
                write!(f, "taps:{}", v.join(","))
            }
            ChannelSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

/// `identity`, `exp:<memory>:<tau>`, `taps:<h0>,<h1>,…` or `file:<path>`.
impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad channel {s:?}"));
        let s = s.trim();
        if s == "identity" {
            return Ok(ChannelSpec::Identity);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(ChannelSpec::File { path: path.into() });
        }
        if let Some(list) = s.strip_prefix("taps:") {
            let values = list
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            return Ok(ChannelSpec::Taps { values });
        }
        if let Some(rest) = s.strip_prefix("exp:") {
            let (memory, tau) = rest.split_once(':').ok_or_else(bad)?;
            return Ok(ChannelSpec::Exponential {
                memory: memory.parse().map_err(|_| bad())?,
                tau: tau.parse().map_err(|_| bad())?,
            });
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipNoiseSource {
    /// i.i.d. Gaussian drive samples.
    Gaussian,
    /// Real and imaginary IDFT outputs of random PAM frames.
    Frames,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClipNoiseConfig {
    /// Drive variance grid.
    pub sigma2: Vec<f64>,
    /// Samples per grid point (frames × N for the frame source).
    pub samples: u64,
    pub source: ClipNoiseSource,
}

impl Default for ClipNoiseConfig {
    fn default() -> Self {
        Self {
            sigma2: vec![0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0],
            samples: 10_000_000,
            source: ClipNoiseSource::Gaussian,
        }
    }
}

/// Operating point and grids for the DC-shift and gain degradation sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradeConfig {
    pub ebn0_db: f64,
    /// Drive RMS, in volts, at which `ebn0_db` fixes the absolute noise
    /// floor shared by every scheme and every sweep point.
    pub reference_rms: f64,
    /// Candidate drive RMS values for the optimum-gain search.
    pub gain_grid: Vec<f64>,
    /// Bias offsets in volts, added to `clipper.v_dc`.
    pub dc_shifts: Vec<f64>,
    /// Factors applied to each scheme's optimum gain.
    pub gain_multipliers: Vec<f64>,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        Self {
            ebn0_db: 20.0,
            reference_rms: 0.25 / 3.0,
            gain_grid: (4..=16).map(|i| f64::from(i) / 100.0).collect(),
            dc_shifts: vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12],
            gain_multipliers: vec![1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.75, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schemes: Vec<Waveform>,
    pub n_subcarriers: usize,
    pub cp_len: usize,
    /// Per-dimension depth `M`: `M`-PAM for CRIP, `M²`-QAM for Hermitian.
    pub order: u32,
    /// Per-scheme modulation overrides keyed by scheme name.
    pub modulation: BTreeMap<String, ModulationSpec>,
    /// BER is pooled over all listed channels, frames taken round-robin.
    pub channels: Vec<ChannelSpec>,
    pub ebn0_db: Vec<f64>,
    /// Frames per point before stopping.
    pub max_frames: u64,
    /// Bit errors per point before stopping early.
    pub max_errors: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub plot: bool,
    pub clipper: ClipperConfig,
    pub degrade: DegradeConfig,
    pub clipnoise: ClipNoiseConfig,
    pub complexity_n: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: vec![Waveform::HERMITIAN, Waveform::ecrip(true), Waveform::ocrip(true)],
            n_subcarriers: 64,
            cp_len: 8,
            order: 4,
            modulation: BTreeMap::new(),
            channels: vec![ChannelSpec::Identity],
            ebn0_db: (0..=7).map(|i| 2.0 * f64::from(i)).collect(),
            max_frames: 100_000,
            max_errors: 500,
            seed: 1,
            out_dir: PathBuf::from("results"),
            plot: true,
            clipper: ClipperConfig::xlamp_xbh(),
            degrade: DegradeConfig::default(),
            clipnoise: ClipNoiseConfig::default(),
            complexity_n: (3..=9).map(|p| 1usize << p).collect(),
        }
    }
}

/// Frame indices share 32 bits of the RNG stream key.
pub(crate) const MAX_FRAMES_LIMIT: u64 = 1 << 32;

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialise config: {e}")))
    }

    /// SHA-256 of the canonical TOML form, hex encoded. Where the outputs go
    /// and whether a plot script is written do not enter the hash.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        c.plot = true;
        Ok(hex::encode(Sha256::digest(c.to_toml()?.as_bytes())))
    }

    pub fn modulation_for(&self, waveform: Waveform) -> Result<ModulationSpec> {
        match self.modulation.get(&waveform.to_string()) {
            Some(spec) => ModulationSpec::new(spec.constellation, spec.order),
            None => waveform.default_modulation(self.order),
        }
    }

    pub fn build_channels(&self) -> Result<Vec<ChannelModel>> {
        self.channels
            .iter()
            .map(|c| c.build(self.n_subcarriers))
            .collect()
    }

    /// Checks everything that does not need a sweep-specific grid.
    pub fn validate(&self) -> Result<()> {
        check_subcarriers(self.n_subcarriers)?;
        if self.cp_len >= self.n_subcarriers {
            return Err(Error::Config(format!(
                "cyclic prefix {} must be shorter than the frame {}",
                self.cp_len, self.n_subcarriers
            )));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        if self.schemes.len() > 255 {
            return Err(Error::Config("at most 255 schemes per sweep".into()));
        }
        for key in self.modulation.keys() {
            let w: Waveform = key.parse()?;
            if !self.schemes.contains(&w) {
                return Err(Error::Config(format!(
                    "modulation override for {key}, which is not in the scheme set"
                )));
            }
        }
        for &w in &self.schemes {
            let spec = self.modulation_for(w)?;
            if !w.accepts(spec) {
                return Err(Error::Config(format!("{w} cannot carry {spec}")));
            }
        }
        if self.channels.is_empty() {
            return Err(Error::Config("no channels listed".into()));
        }
        if self.max_frames == 0 || self.max_frames >= MAX_FRAMES_LIMIT {
            return Err(Error::Config(format!(
                "max_frames must lie in 1..{MAX_FRAMES_LIMIT}, got {}",
                self.max_frames
            )));
        }
        if self.max_errors == 0 {
            return Err(Error::Config("max_errors must be at least 1".into()));
        }
        self.clipper.validate()?;
        Ok(())
    }

    pub fn validate_ber(&self) -> Result<()> {
        self.validate()?;
        nonempty("ebn0_db", &self.ebn0_db)?;
        if self.ebn0_db.len() > u16::MAX as usize {
            return Err(Error::Config("Eb/N0 grid too long".into()));
        }
        if let Some(v) = self.ebn0_db.iter().find(|v| v.is_nan() || **v == f64::NEG_INFINITY) {
            return Err(Error::Config(format!("bad Eb/N0 value {v}")));
        }
        Ok(())
    }

    pub fn validate_degrade(&self) -> Result<()> {
        self.validate()?;
        let d = &self.degrade;
        if !d.ebn0_db.is_finite() {
            return Err(Error::Config(format!("bad degradation Eb/N0 {}", d.ebn0_db)));
        }
        if !(d.reference_rms > 0.0) || !d.reference_rms.is_finite() {
            return Err(Error::Config("reference_rms must be positive".into()));
        }
        nonempty("degrade.gain_grid", &d.gain_grid)?;
        nonempty("degrade.dc_shifts", &d.dc_shifts)?;
        nonempty("degrade.gain_multipliers", &d.gain_multipliers)?;
        for &g in &d.gain_grid {
            self.clipper.with_gain(g)?;
        }
        for &m in &d.gain_multipliers {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Config(format!("gain multiplier must be positive, got {m}")));
            }
        }
        for &s in &d.dc_shifts {
            self.clipper.with_dc_shift(s)?;
        }
        Ok(())
    }

    pub fn validate_clipnoise(&self) -> Result<()> {
        self.clipper.validate()?;
        nonempty("clipnoise.sigma2", &self.clipnoise.sigma2)?;
        if let Some(v) = self.clipnoise.sigma2.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!("drive variance must be positive, got {v}")));
        }
        if self.clipnoise.samples < 2 {
            return Err(Error::Config("clipnoise.samples must be at least 2".into()));
        }
        if self.clipnoise.source == ClipNoiseSource::Frames {
            check_subcarriers(self.n_subcarriers)?;
            ModulationSpec::pam(self.order)?;
        }
        Ok(())
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{name} is empty")));
    }
    Ok(())
}
