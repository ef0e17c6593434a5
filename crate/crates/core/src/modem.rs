//! Transmit and receive chains for the Hermitian, E-CRIP and O-CRIP schemes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{
    add_awgn_in_place, channel_eigenvalues, clip_in_place, linear_convolve, ChannelModel,
    ClipperConfig, RngStream,
};
use crate::frames::{
    build_crip_frame, build_hermitian_frame, check_subcarriers, demap_symbols, map_bits,
    Constellation, FrameKind, FrequencyFrame, ModulationSpec, Symbols,
};
use crate::transforms::DftPlan;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Hermitian,
    /// Real and imaginary IDFT parts summed before the LED.
    ECrip,
    /// Real and imaginary IDFT parts drive separate LEDs and add in the air.
    OCrip,
}

impl Scheme {
    pub fn branch_count(self) -> usize {
        match self {
            Scheme::OCrip => 2,
            _ => 1,
        }
    }
}

/// A scheme together with whether the first CRIP subcarrier carries data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Waveform {
    pub scheme: Scheme,
    pub s0_loaded: bool,
}

impl Waveform {
    pub const HERMITIAN: Waveform = Waveform {
        scheme: Scheme::Hermitian,
        s0_loaded: false,
    };

    pub const fn ecrip(s0_loaded: bool) -> Self {
        Waveform {
            scheme: Scheme::ECrip,
            s0_loaded,
        }
    }

    pub const fn ocrip(s0_loaded: bool) -> Self {
        Waveform {
            scheme: Scheme::OCrip,
            s0_loaded,
        }
    }

    pub fn frame_kind(self) -> FrameKind {
        match self.scheme {
            Scheme::Hermitian => FrameKind::Hermitian,
            _ => FrameKind::Crip {
                s0_loaded: self.s0_loaded,
            },
        }
    }

    /// QAM for the Hermitian arrangement, PAM for CRIP.
    pub fn default_modulation(self, order: u32) -> Result<ModulationSpec> {
        match self.scheme {
            Scheme::Hermitian => ModulationSpec::qam(order),
            _ => ModulationSpec::pam(order),
        }
    }

    pub fn accepts(self, spec: ModulationSpec) -> bool {
        matches!(
            (self.scheme, spec.constellation),
            (Scheme::Hermitian, Constellation::Qam)
                | (Scheme::ECrip | Scheme::OCrip, Constellation::Pam)
        )
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match (self.scheme, self.s0_loaded) {
            (Scheme::Hermitian, _) => "hermitian",
            (Scheme::ECrip, true) => "ecrip",
            (Scheme::ECrip, false) => "ecrip-nos0",
            (Scheme::OCrip, true) => "ocrip",
            (Scheme::OCrip, false) => "ocrip-nos0",
        };
        f.write_str(s)
    }
}

impl FromStr for Waveform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hermitian" => Ok(Waveform::HERMITIAN),
            "ecrip" => Ok(Waveform::ecrip(true)),
            "ecrip-nos0" => Ok(Waveform::ecrip(false)),
            "ocrip" => Ok(Waveform::ocrip(true)),
            "ocrip-nos0" => Ok(Waveform::ocrip(false)),
            other => Err(Error::Config(format!(
                "unknown scheme {other:?} (expected hermitian, ecrip, ecrip-nos0, ocrip, ocrip-nos0)"
            ))),
        }
    }
}

impl TryFrom<String> for Waveform {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Waveform> for String {
    fn from(w: Waveform) -> String {
        w.to_string()
    }
}

/// Mean of the E-CRIP time signal (before cyclic prefix) when only `s0` is
/// nonzero, under the unitary transform: `s0 / sqrt(N)`.
///
/// With the `1/N` inverse-transform convention the same mean reads `s0 / N`.
pub fn dc_offset(s0: f64, n: usize) -> f64 {
    s0 / (n as f64).sqrt()
}

/// Real drive signals with cyclic prefix, one per LED branch.
#[derive(Debug, Clone, PartialEq)]
pub struct TxOutput {
    pub branches: Vec<Vec<f64>>,
    pub scheme: Scheme,
    pub n_subcarriers: usize,
    pub cp_len: usize,
    pub s0_loaded: bool,
}

impl TxOutput {
    /// Sample-wise sum of the branches, i.e. what a photodetector sees.
    pub fn combined(&self) -> Vec<f64> {
        let mut out = self.branches[0].clone();
        for b in &self.branches[1..] {
            out.iter_mut().zip(b).for_each(|(o, v)| *o += v);
        }
        out
    }
}

/// Post-equalizer frequency-domain values.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedFrame {
    pub values: Vec<Complex64>,
    pub kind: FrameKind,
}

impl EqualizedFrame {
    /// Hermitian: bins `1..N/2`. CRIP: `Re − Im` on the loaded bins.
    pub fn soft_symbols(&self) -> Symbols {
        let n = self.values.len();
        match self.kind {
            FrameKind::Hermitian => Symbols::Complex(self.values[1..n / 2].to_vec()),
            FrameKind::Crip { s0_loaded } => {
                let start = usize::from(!s0_loaded);
                Symbols::Real(self.values[start..].iter().map(|v| v.re - v.im).collect())
            }
        }
    }
}

/// Zero-forcing single-tap equalizer, `1/λ_k` per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroForcing {
    inverse: Vec<Complex64>,
}

impl ZeroForcing {
    pub fn new(ch: &ChannelModel) -> Result<Self> {
        let lambda = channel_eigenvalues(ch)?;
        Ok(Self {
            inverse: lambda.iter().map(|l| l.inv()).collect(),
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.inverse.len()
    }
}

/// Block size, cyclic prefix length and a transform plan.
#[derive(Debug, Clone)]
pub struct Modem {
    n: usize,
    cp: usize,
    plan: DftPlan,
}

impl Modem {
    pub fn new(n_subcarriers: usize, cp_len: usize) -> Result<Self> {
        check_subcarriers(n_subcarriers)?;
        if cp_len >= n_subcarriers {
            return Err(Error::Config(format!(
                "cyclic prefix {cp_len} must be shorter than the block {n_subcarriers}"
            )));
        }
        Ok(Self {
            n: n_subcarriers,
            cp: cp_len,
            plan: DftPlan::new(n_subcarriers)?,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n
    }

    pub fn cp_len(&self) -> usize {
        self.cp
    }

    pub fn plan(&self) -> &DftPlan {
        &self.plan
    }

    fn with_cp(&self, block: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n + self.cp);
        out.extend_from_slice(&block[self.n - self.cp..]);
        out.extend_from_slice(block);
        out
    }

    pub fn tx(&self, frame: &FrequencyFrame, scheme: Scheme) -> Result<TxOutput> {
        if frame.n_subcarriers() != self.n {
            return Err(Error::Sizing(format!(
                "frame has {} bins, modem expects {}",
                frame.n_subcarriers(),
                self.n
            )));
        }
        let (branches, s0_loaded) = match (scheme, frame.kind()) {
            (Scheme::Hermitian, FrameKind::Hermitian) => {
                let time = self.plan.idft(frame.bins())?;
                let re: Vec<f64> = time.iter().map(|v| v.re).collect();
                (vec![self.with_cp(&re)], false)
            }
            (Scheme::ECrip, FrameKind::Crip { s0_loaded }) => {
                let (re, im) = self.plan.split_even_odd_parts(frame.bins())?;
                let sum: Vec<f64> = re.iter().zip(&im).map(|(a, b)| a + b).collect();
                (vec![self.with_cp(&sum)], s0_loaded)
            }
            (Scheme::OCrip, FrameKind::Crip { s0_loaded }) => {
                let (re, im) = self.plan.split_even_odd_parts(frame.bins())?;
                (vec![self.with_cp(&re), self.with_cp(&im)], s0_loaded)
            }
            (scheme, kind) => {
                return Err(Error::Config(format!(
                    "{scheme:?} cannot transmit a {kind:?} frame"
                )))
            }
        };
        Ok(TxOutput {
            branches,
            scheme,
            n_subcarriers: self.n,
            cp_len: self.cp,
            s0_loaded,
        })
    }

    /// Drops the cyclic prefix, transforms and applies `1/λ_k`.
    pub fn equalize(
        &self,
        received: &[f64],
        eq: &ZeroForcing,
        kind: FrameKind,
    ) -> Result<EqualizedFrame> {
        if received.len() != self.n + self.cp {
            return Err(Error::Sizing(format!(
                "received {} samples, expected {}",
                received.len(),
                self.n + self.cp
            )));
        }
        if eq.n_subcarriers() != self.n {
            return Err(Error::Sizing(format!(
                "equalizer built for {} bins, modem expects {}",
                eq.n_subcarriers(),
                self.n
            )));
        }
        let mut values = self.plan.dft_real(&received[self.cp..])?;
        values
            .iter_mut()
            .zip(&eq.inverse)
            .for_each(|(v, inv)| *v *= inv);
        Ok(EqualizedFrame { values, kind })
    }

    pub fn rx(&self, received: &[f64], eq: &ZeroForcing, kind: FrameKind) -> Result<Symbols> {
        Ok(self.equalize(received, eq, kind)?.soft_symbols())
    }
}

/// Everything needed to push one frame of bits through a link.
#[derive(Debug, Clone)]
pub struct LinkConfig {
    waveform: Waveform,
    spec: ModulationSpec,
    modem: Modem,
    channel: ChannelModel,
    equalizer: ZeroForcing,
    clipper: Option<ClipperConfig>,
}

impl LinkConfig {
    pub fn new(
        waveform: Waveform,
        spec: ModulationSpec,
        n_subcarriers: usize,
        cp_len: usize,
        channel: ChannelModel,
        clipper: Option<ClipperConfig>,
    ) -> Result<Self> {
        if !waveform.accepts(spec) {
            return Err(Error::Config(format!("{waveform} cannot carry {spec} symbols")));
        }
        if channel.n_subcarriers() != n_subcarriers {
            return Err(Error::Sizing(format!(
                "channel built for {} bins, link uses {n_subcarriers}",
                channel.n_subcarriers()
            )));
        }
        if channel.memory() > cp_len {
            return Err(Error::Config(format!(
                "channel memory {} exceeds cyclic prefix {cp_len}",
                channel.memory()
            )));
        }
        if let Some(c) = &clipper {
            c.validate()?;
        }
        let modem = Modem::new(n_subcarriers, cp_len)?;
        let equalizer = ZeroForcing::new(&channel)?;
        Ok(Self {
            waveform,
            spec,
            modem,
            channel,
            equalizer,
            clipper,
        })
    }

    pub fn waveform(&self) -> Waveform {
        self.waveform
    }

    pub fn spec(&self) -> ModulationSpec {
        self.spec
    }

    pub fn modem(&self) -> &Modem {
        &self.modem
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn clipper(&self) -> Option<&ClipperConfig> {
        self.clipper.as_ref()
    }

    pub fn with_noise_power(mut self, noise_power: f64) -> Result<Self> {
        self.channel = self.channel.with_noise_power(noise_power)?;
        Ok(self)
    }

    pub fn with_clipper(mut self, clipper: Option<ClipperConfig>) -> Result<Self> {
        if let Some(c) = &clipper {
            c.validate()?;
        }
        self.clipper = clipper;
        Ok(self)
    }

    pub fn bits_per_frame(&self) -> usize {
        let n = self.modem.n_subcarriers();
        self.waveform.frame_kind().data_symbols(n) * self.spec.bits_per_symbol()
    }

    pub fn gain(&self) -> f64 {
        self.clipper.map_or(1.0, |c| c.gain)
    }

    /// Factor taking the unitary transmit signal to unit nominal per-sample
    /// variance, so every scheme reaches the front-end at the same power.
    pub fn drive_normalization(&self) -> f64 {
        let n = self.modem.n_subcarriers();
        (n as f64 / self.waveform.frame_kind().nominal_energy(n)).sqrt()
    }

    /// Nominal electrical energy per bit at the front-end input: drive
    /// variance (DC excluded) times `N` samples over the data bits, CP excluded.
    pub fn energy_per_bit(&self) -> f64 {
        let n = self.modem.n_subcarriers() as f64;
        self.gain().powi(2) * n / self.bits_per_frame() as f64
    }

    /// Per-sample noise variance `N0/2` giving the requested `Eb/N0`.
    pub fn noise_for_ebn0(&self, ebn0_db: f64) -> f64 {
        self.energy_per_bit() / (2.0 * 10f64.powf(ebn0_db / 10.0))
    }

    fn build_frame(&self, symbols: &Symbols) -> Result<FrequencyFrame> {
        let n = self.modem.n_subcarriers();
        match self.waveform.frame_kind() {
            FrameKind::Hermitian => {
                let x = symbols
                    .as_complex()
                    .ok_or_else(|| Error::Config("Hermitian frames carry complex symbols".into()))?;
                build_hermitian_frame(x, n)
            }
            FrameKind::Crip { s0_loaded } => build_crip_frame(symbols, n, s0_loaded),
        }
    }
}

/// Result of one frame through [`run_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub decoded: Vec<u8>,
    pub bit_errors: usize,
    /// Mean square of the summed drive after the front-end, CP included.
    pub tx_power: f64,
    /// Samples clamped by the clipper, counted over all branches.
    pub clip_events: usize,
}

/// map → frame → tx → gain/clip per branch → channel → noise → rx → demap.
///
/// O-CRIP branches are clipped independently and add after the channel; a
/// single noise vector is added to the photodetector signal.
pub fn run_frame(bits: &[u8], cfg: &LinkConfig, rng: &mut RngStream) -> Result<FrameOutcome> {
    if bits.len() != cfg.bits_per_frame() {
        return Err(Error::Sizing(format!(
            "{} frame takes {} bits, got {}",
            cfg.waveform,
            cfg.bits_per_frame(),
            bits.len()
        )));
    }
    let symbols = map_bits(bits, cfg.spec)?;
    let frame = cfg.build_frame(&symbols.values)?;
    let mut tx = cfg.modem.tx(&frame, cfg.waveform.scheme)?;

    let norm = cfg.drive_normalization();
    let mut clip_events = 0;
    for branch in tx.branches.iter_mut() {
        branch.iter_mut().for_each(|s| *s *= norm);
        if let Some(c) = &cfg.clipper {
            clip_events += clip_in_place(branch, c);
        }
    }
    let drive = tx.combined();
    let tx_power = drive.iter().map(|s| s * s).sum::<f64>() / drive.len() as f64;

    let mut received = vec![0.0; drive.len()];
    for branch in &tx.branches {
        let out = linear_convolve(branch, &cfg.channel);
        received.iter_mut().zip(out).for_each(|(r, v)| *r += v);
    }
    add_awgn_in_place(&mut received, cfg.channel.noise_power(), rng)?;
    let undo = 1.0 / (norm * cfg.gain());
    received.iter_mut().for_each(|r| *r *= undo);

    let soft = cfg
        .modem
        .rx(&received, &cfg.equalizer, cfg.waveform.frame_kind())?;
    let decoded = demap_symbols(&soft, cfg.spec);
    let bit_errors = decoded.iter().zip(bits).filter(|(a, b)| a != b).count();
    Ok(FrameOutcome {
        decoded,
        bit_errors,
        tx_power,
        clip_events,
    })
}
