//! Multipath intensity channel, additive noise and the LED front-end clipper.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Eigenvalues with magnitude below this make zero-forcing undefined.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Receiver noise averaged over a furnished office room at 100 MHz, in dBm.
pub const ROOM_AVERAGE_NOISE_DBM: f64 = -98.71;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Causal tap vector `h0..h_mu` acting on `N`-sample blocks, plus noise power.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    taps: Vec<f64>,
    noise_power: f64,
    n_subcarriers: usize,
}

impl ChannelModel {
    pub fn new(taps: Vec<f64>, n_subcarriers: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Config("channel needs at least one tap".into()));
        }
        if taps.len() > n_subcarriers {
            return Err(Error::Sizing(format!(
                "{} taps exceed block length {n_subcarriers}",
                taps.len()
            )));
        }
        if let Some(i) = taps.iter().position(|t| !t.is_finite()) {
            return Err(Error::Config(format!("tap {i} is not finite")));
        }
        if taps[0] == 0.0 {
            return Err(Error::Config("leading tap h0 must be nonzero".into()));
        }
        Ok(Self {
            taps,
            noise_power: 0.0,
            n_subcarriers,
        })
    }

    pub fn identity(n_subcarriers: usize) -> Result<Self> {
        Self::new(vec![1.0], n_subcarriers)
    }

    /// `h_m ∝ exp(−m/τ)` for `m = 0..=memory`, normalised to unit DC gain.
    pub fn exponential(memory: usize, tau: f64, n_subcarriers: usize) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::Config(format!("decay constant must be positive, got {tau}")));
        }
        let raw: Vec<f64> = (0..=memory).map(|m| (-(m as f64) / tau).exp()).collect();
        let total: f64 = raw.iter().sum();
        Self::new(raw.into_iter().map(|h| h / total).collect(), n_subcarriers)
    }

    /// Reads one tap per line; blank lines and `#` comments are skipped.
    pub fn from_tap_file(path: impl AsRef<Path>, n_subcarriers: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let taps = parse_taps(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        Self::new(taps, n_subcarriers)
    }

    pub fn with_noise_power(mut self, noise_power: f64) -> Result<Self> {
        if !(noise_power >= 0.0) || !noise_power.is_finite() {
            return Err(Error::Config(format!(
                "noise power must be finite and >= 0, got {noise_power}"
            )));
        }
        self.noise_power = noise_power;
        Ok(self)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Channel memory `mu` (number of taps minus one).
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    /// `λ_k = Σ_m h_m exp(−j2πkm/N)` without the singularity check.
    pub fn eigenvalues_unchecked(&self) -> Vec<Complex64> {
        let n = self.n_subcarriers;
        (0..n)
            .map(|k| {
                self.taps
                    .iter()
                    .enumerate()
                    .map(|(m, &h)| {
                        let angle = -2.0 * std::f64::consts::PI * ((k * m) % n) as f64 / n as f64;
                        h * Complex64::from_polar(1.0, angle)
                    })
                    .sum()
            })
            .collect()
    }
}

fn parse_taps(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(i, line)| {
            line.parse::<f64>()
                .map_err(|e| format!("line {}: {e} ({line:?})", i + 1))
        })
        .collect()
}

/// Eigenvalues of the circulant channel matrix (the unnormalised DFT of the
/// zero-padded taps), so that `H = F^H diag(λ) F` with unitary `F`.
pub fn channel_eigenvalues(ch: &ChannelModel) -> Result<Vec<Complex64>> {
    let lambda = ch.eigenvalues_unchecked();
    if let Some((index, l)) = lambda
        .iter()
        .enumerate()
        .find(|(_, l)| l.norm() < SINGULAR_THRESHOLD)
    {
        return Err(Error::SingularChannel {
            index,
            magnitude: l.norm(),
            threshold: SINGULAR_THRESHOLD,
        });
    }
    Ok(lambda)
}

/// `y[n] = Σ_m h_m s[(n − m) mod N]`: the channel after cyclic-prefix removal.
pub fn circular_convolve(signal: &[f64], ch: &ChannelModel) -> Result<Vec<f64>> {
    let n = signal.len();
    if ch.taps.len() > n {
        return Err(Error::Sizing(format!(
            "{} taps exceed signal length {n}",
            ch.taps.len()
        )));
    }
    Ok((0..n)
        .map(|i| {
            ch.taps
                .iter()
                .enumerate()
                .map(|(m, &h)| h * signal[(i + n - m) % n])
                .sum()
        })
        .collect())
}

/// Causal linear convolution truncated to the input length, starting from a
/// silent line (no previous block).
pub fn linear_convolve(signal: &[f64], ch: &ChannelModel) -> Vec<f64> {
    (0..signal.len())
        .map(|i| {
            ch.taps
                .iter()
                .take(i + 1)
                .enumerate()
                .map(|(m, &h)| h * signal[i - m])
                .sum()
        })
        .collect()
}

/// Seeded random stream; `(seed, stream)` fully determines its output.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn bits(&mut self, count: usize) -> Vec<u8> {
        (0..count).map(|_| u8::from(self.rng.random::<bool>())).collect()
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        self.rng.random_range(low..high)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Adds i.i.d. zero-mean Gaussian samples of the given variance.
pub fn add_awgn(signal: &[f64], variance: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    let mut out = signal.to_vec();
    add_awgn_in_place(&mut out, variance, rng)?;
    Ok(out)
}

pub fn add_awgn_in_place(signal: &mut [f64], variance: f64, rng: &mut RngStream) -> Result<()> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::Config(format!(
            "noise variance must be finite and >= 0, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(());
    }
    let sigma = variance.sqrt();
    signal
        .iter_mut()
        .for_each(|s| *s += sigma * rng.standard_normal());
    Ok(())
}

/// LED dynamic range, bias point and driver gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipperConfig {
    /// Bottom of the active region (turn-on), volts.
    pub v_th: f64,
    /// Top of the active region (saturation), volts.
    pub v_st: f64,
    /// Bias voltage.
    pub v_dc: f64,
    #[serde(default = "unit_gain")]
    pub gain: f64,
}

fn unit_gain() -> f64 {
    1.0
}

impl ClipperConfig {
    pub fn new(v_th: f64, v_st: f64, v_dc: f64, gain: f64) -> Result<Self> {
        let cfg = Self {
            v_th,
            v_st,
            v_dc,
            gain,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cree XLamp XB-H: 2.65 V to 3.15 V, biased mid-range (B = −0.25, T = 0.25).
    pub fn xlamp_xbh() -> Self {
        Self {
            v_th: 2.65,
            v_st: 3.15,
            v_dc: 2.9,
            gain: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.v_th, self.v_st, self.v_dc, self.gain]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.v_th < self.v_dc && self.v_dc < self.v_st) {
            return Err(Error::Config(format!(
                "clipper needs v_th < v_dc < v_st, got {} / {} / {}",
                self.v_th, self.v_dc, self.v_st
            )));
        }
        if !(self.gain > 0.0) {
            return Err(Error::Config(format!("gain must be positive, got {}", self.gain)));
        }
        Ok(())
    }

    /// `(B, T) = (v_th − v_dc, v_st − v_dc)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.v_th - self.v_dc, self.v_st - self.v_dc)
    }

    pub fn with_dc_shift(self, shift: f64) -> Result<Self> {
        Self::new(self.v_th, self.v_st, self.v_dc + shift, self.gain)
    }

    pub fn with_gain(self, gain: f64) -> Result<Self> {
        Self::new(self.v_th, self.v_st, self.v_dc, gain)
    }
}

/// Multiplies by the gain and clamps to `[B, T]` in bias-relative coordinates.
pub fn clip(signal: &[f64], cfg: &ClipperConfig) -> Vec<f64> {
    let mut out = signal.to_vec();
    clip_in_place(&mut out, cfg);
    out
}

/// In-place [`clip`]; returns the number of samples that left `[B, T]`.
pub fn clip_in_place(signal: &mut [f64], cfg: &ClipperConfig) -> usize {
    let (lo, hi) = cfg.bounds();
    let mut events = 0;
    for s in signal.iter_mut() {
        let v = *s * cfg.gain;
        *s = if v < lo {
            events += 1;
            lo
        } else if v > hi {
            events += 1;
            hi
        } else {
            v
        };
    }
    events
}
