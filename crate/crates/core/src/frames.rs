//! Gray-labelled PAM/QAM mapping and frequency-frame assembly.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::transforms::{check_power_of_two, MIN_SUBCARRIERS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    /// Real amplitudes `{±1, ±3, …, ±(M−1)}`.
    Pam,
    /// Cartesian product of two Gray PAM alphabets, `M²` points.
    Qam,
}

/// Modulation alphabet. `order` is the per-dimension depth `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub constellation: Constellation,
    pub order: u32,
}

impl ModulationSpec {
    pub fn new(constellation: Constellation, order: u32) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::Config(format!(
                "modulation order must be a power of two >= 2, got {order}"
            )));
        }
        Ok(Self {
            constellation,
            order,
        })
    }

    pub fn pam(order: u32) -> Result<Self> {
        Self::new(Constellation::Pam, order)
    }

    /// `order²`-point QAM, e.g. `qam(4)` is 16-QAM.
    pub fn qam(order: u32) -> Result<Self> {
        Self::new(Constellation::Qam, order)
    }

    pub fn bits_per_dimension(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    pub fn bits_per_symbol(&self) -> usize {
        match self.constellation {
            Constellation::Pam => self.bits_per_dimension(),
            Constellation::Qam => 2 * self.bits_per_dimension(),
        }
    }

    /// Scale applied to the odd integers so the mean symbol energy is one.
    pub fn amplitude_scale(&self) -> f64 {
        let m2 = f64::from(self.order).powi(2);
        match self.constellation {
            Constellation::Pam => (3.0 / (m2 - 1.0)).sqrt(),
            Constellation::Qam => (3.0 / (2.0 * (m2 - 1.0))).sqrt(),
        }
    }

    /// Normalised amplitude of per-dimension level `index` (0 is the most negative).
    fn level(&self, index: u32) -> f64 {
        (2.0 * f64::from(index) - f64::from(self.order - 1)) * self.amplitude_scale()
    }

    /// Nearest level index; a value exactly on a boundary goes to the lower level.
    fn decide_level(&self, value: f64) -> u32 {
        let u = value / self.amplitude_scale();
        let m = f64::from(self.order);
        let idx = ((u + m - 2.0) / 2.0).ceil();
        idx.clamp(0.0, m - 1.0) as u32
    }

    /// Every point of the alphabet in label order.
    pub fn points(&self) -> Symbols {
        let bps = self.bits_per_symbol();
        let bits: Vec<u8> = (0..1u32 << bps)
            .flat_map(|label| (0..bps).rev().map(move |b| ((label >> b) & 1) as u8))
            .collect();
        map_bits(&bits, *self)
            .expect("label enumeration is always well sized")
            .values
    }
}

impl fmt::Display for ModulationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constellation {
            Constellation::Pam => write!(f, "{}-PAM", self.order),
            Constellation::Qam => write!(f, "{}-QAM", self.order * self.order),
        }
    }
}

fn gray_to_binary(mut g: u32) -> u32 {
    let mut shift = g >> 1;
    while shift != 0 {
        g ^= shift;
        shift >>= 1;
    }
    g
}

fn binary_to_gray(b: u32) -> u32 {
    b ^ (b >> 1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Symbols {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Symbols {
    pub fn len(&self) -> usize {
        match self {
            Symbols::Real(v) => v.len(),
            Symbols::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Symbols::Real(v) => Some(v),
            Symbols::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match self {
            Symbols::Complex(v) => Some(v),
            Symbols::Real(_) => None,
        }
    }
}

/// Mapped data symbols together with the alphabet they were drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector {
    pub spec: ModulationSpec,
    pub values: Symbols,
}

impl SymbolVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies every symbol by `factor`. The result is no longer on the
    /// unit-energy alphabet; used to drive clipping experiments at a set power.
    pub fn scaled(&self, factor: f64) -> Symbols {
        match &self.values {
            Symbols::Real(v) => Symbols::Real(v.iter().map(|x| x * factor).collect()),
            Symbols::Complex(v) => Symbols::Complex(v.iter().map(|x| x * factor).collect()),
        }
    }
}

fn read_label(chunk: &[u8]) -> u32 {
    chunk.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b))
}

fn write_label(label: u32, width: usize, out: &mut Vec<u8>) {
    out.extend((0..width).rev().map(|b| ((label >> b) & 1) as u8));
}

/// Maps a bit sequence (one `0`/`1` per element, MSB first within a symbol)
/// onto Gray-labelled unit-energy symbols. QAM takes the in-phase label first.
pub fn map_bits(bits: &[u8], spec: ModulationSpec) -> Result<SymbolVector> {
    // re-validate: the fields are public
    let spec = ModulationSpec::new(spec.constellation, spec.order)?;
    let bps = spec.bits_per_symbol();
    if !bits.len().is_multiple_of(bps) {
        return Err(Error::Sizing(format!(
            "{} bits is not a multiple of {bps} bits per {spec} symbol",
            bits.len()
        )));
    }
    if let Some(pos) = bits.iter().position(|&b| b > 1) {
        return Err(Error::Config(format!("bit {pos} has value {}", bits[pos])));
    }
    let per_dim = spec.bits_per_dimension();
    let level = |chunk: &[u8]| spec.level(gray_to_binary(read_label(chunk)));
    let values = match spec.constellation {
        Constellation::Pam => Symbols::Real(bits.chunks(bps).map(level).collect()),
        Constellation::Qam => Symbols::Complex(
            bits.chunks(bps)
                .map(|c| Complex64::new(level(&c[..per_dim]), level(&c[per_dim..])))
                .collect(),
        ),
    };
    Ok(SymbolVector { spec, values })
}

/// Minimum-distance decision followed by inverse Gray labelling.
///
/// Real inputs to a QAM demapper are read as having zero quadrature part;
/// complex inputs to a PAM demapper are decided on their real part.
pub fn demap_symbols(observed: &Symbols, spec: ModulationSpec) -> Vec<u8> {
    let per_dim = spec.bits_per_dimension();
    let mut out = Vec::with_capacity(observed.len() * spec.bits_per_symbol());
    let push = |v: f64, out: &mut Vec<u8>| {
        write_label(binary_to_gray(spec.decide_level(v)), per_dim, out)
    };
    match (spec.constellation, observed) {
        (Constellation::Pam, Symbols::Real(v)) => v.iter().for_each(|&x| push(x, &mut out)),
        (Constellation::Pam, Symbols::Complex(v)) => {
            v.iter().for_each(|x| push(x.re, &mut out))
        }
        (Constellation::Qam, Symbols::Complex(v)) => v.iter().for_each(|x| {
            push(x.re, &mut out);
            push(x.im, &mut out);
        }),
        (Constellation::Qam, Symbols::Real(v)) => v.iter().for_each(|&x| {
            push(x, &mut out);
            push(0.0, &mut out);
        }),
    }
    out
}

/// Subcarrier arrangement of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameKind {
    Hermitian,
    Crip { s0_loaded: bool },
}

impl FrameKind {
    /// Number of data symbols carried by one frame of `n` subcarriers.
    pub fn data_symbols(self, n: usize) -> usize {
        match self {
            FrameKind::Hermitian => n / 2 - 1,
            FrameKind::Crip { s0_loaded: true } => n,
            FrameKind::Crip { s0_loaded: false } => n - 1,
        }
    }

    /// Sum of `|bin|²` over the frame when symbols have unit mean energy.
    pub fn nominal_energy(self, n: usize) -> f64 {
        match self {
            FrameKind::Hermitian => (n - 2) as f64,
            FrameKind::Crip { .. } => self.data_symbols(n) as f64,
        }
    }

    /// Data bits per frame for per-dimension depth `m`.
    pub fn bits_per_frame(self, n: usize, m: u32) -> usize {
        let log2m = m.trailing_zeros() as usize;
        match self {
            FrameKind::Hermitian => (n - 2) * log2m,
            FrameKind::Crip { .. } => self.data_symbols(n) * log2m,
        }
    }
}

/// Length-`N` subcarrier vector ready for the inverse transform.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFrame {
    bins: Vec<Complex64>,
    kind: FrameKind,
}

impl FrequencyFrame {
    /// Wraps raw bins after checking the structural invariant of `kind`.
    pub fn from_bins(bins: Vec<Complex64>, kind: FrameKind) -> Result<Self> {
        check_subcarriers(bins.len())?;
        let n = bins.len();
        match kind {
            FrameKind::Hermitian => {
                let zero = Complex64::new(0.0, 0.0);
                if bins[0] != zero || bins[n / 2] != zero {
                    return Err(Error::Config(
                        "Hermitian frame must have zero DC and Nyquist bins".into(),
                    ));
                }
                if let Some(k) = (1..n / 2).find(|&k| bins[k] != bins[n - k].conj()) {
                    return Err(Error::Config(format!(
                        "Hermitian symmetry violated at bin {k}"
                    )));
                }
            }
            FrameKind::Crip { s0_loaded } => {
                if let Some(k) = bins.iter().position(|b| b.im != 0.0) {
                    return Err(Error::Config(format!("CRIP bin {k} is not real")));
                }
                if !s0_loaded && bins[0].re != 0.0 {
                    return Err(Error::Config(
                        "CRIP frame without s0 must have a zero first bin".into(),
                    ));
                }
            }
        }
        Ok(Self { bins, kind })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn n_subcarriers(&self) -> usize {
        self.bins.len()
    }

    pub fn into_bins(self) -> Vec<Complex64> {
        self.bins
    }
}

pub(crate) fn check_subcarriers(n: usize) -> Result<()> {
    check_power_of_two(n, "subcarrier count")?;
    if n < MIN_SUBCARRIERS {
        return Err(Error::Sizing(format!(
            "subcarrier count must be >= {MIN_SUBCARRIERS}, got {n}"
        )));
    }
    Ok(())
}

/// `[0, x0, …, x_{N/2−2}, 0, x*_{N/2−2}, …, x*_0]`.
///
/// Accepts `N = 4` as well, the smallest arrangement that carries data.
pub fn build_hermitian_frame(x: &[Complex64], n: usize) -> Result<FrequencyFrame> {
    check_power_of_two(n, "subcarrier count")?;
    if n < 4 {
        return Err(Error::Sizing(format!("Hermitian frame needs N >= 4, got {n}")));
    }
    if x.len() != n / 2 - 1 {
        return Err(Error::Sizing(format!(
            "Hermitian frame of {n} bins takes {} symbols, got {}",
            n / 2 - 1,
            x.len()
        )));
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    for (k, &v) in x.iter().enumerate() {
        bins[k + 1] = v;
        bins[n - 1 - k] = v.conj();
    }
    Ok(FrequencyFrame {
        bins,
        kind: FrameKind::Hermitian,
    })
}

/// Places real symbols directly on the subcarriers, optionally leaving bin 0 empty.
pub fn build_crip_frame(x: &Symbols, n: usize, s0_loaded: bool) -> Result<FrequencyFrame> {
    check_power_of_two(n, "subcarrier count")?;
    if n < 4 {
        return Err(Error::Sizing(format!("CRIP frame needs N >= 4, got {n}")));
    }
    let real = x
        .as_real()
        .ok_or_else(|| Error::Config("CRIP frames carry real symbols only".into()))?;
    let kind = FrameKind::Crip { s0_loaded };
    let want = kind.data_symbols(n);
    if real.len() != want {
        return Err(Error::Sizing(format!(
            "CRIP frame of {n} bins (s0 loaded: {s0_loaded}) takes {want} symbols, got {}",
            real.len()
        )));
    }
    let offset = n - want;
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    for (b, &v) in bins[offset..].iter_mut().zip(real) {
        *b = Complex64::new(v, 0.0);
    }
    Ok(FrequencyFrame { bins, kind })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRate {
    pub bits_per_frame: u64,
    /// Bits per second at the given bandwidth, cyclic prefix excluded.
    pub bitrate: f64,
}

/// Peak error-free rate: `R·W/N` with `R` the bits per frame.
pub fn frame_rate(kind: FrameKind, n: usize, m: u32, bandwidth_hz: f64) -> Result<FrameRate> {
    check_power_of_two(n, "subcarrier count")?;
    ModulationSpec::pam(m)?;
    let bits = kind.bits_per_frame(n, m) as u64;
    Ok(FrameRate {
        bits_per_frame: bits,
        bitrate: bandwidth_hz * bits as f64 / n as f64,
    })
}
