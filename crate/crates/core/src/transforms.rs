//! Unitary DFT/IDFT and the transmitter operation-count model.
//!
//! Both directions carry a `1/sqrt(N)` factor, so `F F^H = I` and the squared
//! norm of a vector is preserved by either transform.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Smallest subcarrier count accepted by the frame builders and the op-count model.
pub const MIN_SUBCARRIERS: usize = 8;

pub(crate) fn check_power_of_two(n: usize, what: &str) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Sizing(format!("{what} must be a power of two, got {n}")));
    }
    Ok(())
}

/// Pre-planned unitary transform pair for a fixed length.
#[derive(Clone)]
pub struct DftPlan {
    len: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftPlan").field("len", &self.len).finish()
    }
}

impl DftPlan {
    pub fn new(len: usize) -> Result<Self> {
        check_power_of_two(len, "transform length")?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            scale: 1.0 / (len as f64).sqrt(),
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len {
            return Err(Error::Sizing(format!(
                "plan is for length {}, got {got}",
                self.len
            )));
        }
        Ok(())
    }

    /// In-place `F x` with `F[k][n] = exp(-j 2 pi k n / N) / sqrt(N)`.
    pub fn dft_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    /// In-place `F^H x`.
    pub fn idft_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    pub fn dft(&self, time: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut buf = time.to_vec();
        self.dft_in_place(&mut buf)?;
        Ok(buf)
    }

    pub fn idft(&self, freq: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut buf = freq.to_vec();
        self.idft_in_place(&mut buf)?;
        Ok(buf)
    }

    /// DFT of a real sequence.
    pub fn dft_real(&self, time: &[f64]) -> Result<Vec<Complex64>> {
        let mut buf: Vec<Complex64> = time.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.dft_in_place(&mut buf)?;
        Ok(buf)
    }

    /// Real and imaginary parts of the IDFT of a real-valued frame.
    pub fn split_even_odd_parts(&self, frame: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some(k) = frame.iter().position(|v| v.im != 0.0) {
            return Err(Error::Config(format!(
                "frame must be real-valued, bin {k} has imaginary part {}",
                frame[k].im
            )));
        }
        let time = self.idft(frame)?;
        Ok(time.iter().map(|v| (v.re, v.im)).unzip())
    }
}

/// Unitary forward transform. Plans on every call; use [`DftPlan`] in loops.
pub fn dft(time: &[Complex64]) -> Result<Vec<Complex64>> {
    DftPlan::new(time.len())?.dft(time)
}

/// Unitary inverse transform. Plans on every call; use [`DftPlan`] in loops.
pub fn idft(freq: &[Complex64]) -> Result<Vec<Complex64>> {
    DftPlan::new(freq.len())?.idft(freq)
}

/// Splits the IDFT of a real frame into its real part (even in `n`) and its
/// imaginary part (odd in `n`).
pub fn split_even_odd_parts(frame: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
    DftPlan::new(frame.len())?.split_even_odd_parts(frame)
}

/// Multiplication and addition counts of a transform stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct OpCount {
    pub multiplications: u64,
    pub additions: u64,
}

impl OpCount {
    pub const fn new(multiplications: u64, additions: u64) -> Self {
        Self {
            multiplications,
            additions,
        }
    }
}

/// Waveform construction methods compared by [`op_count`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    OCrip,
    ECrip,
    Hermitian,
    Dct,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::OCrip, Method::ECrip, Method::Hermitian, Method::Dct];

    pub fn label(self) -> &'static str {
        match self {
            Method::OCrip => "O-CRIP",
            Method::ECrip => "E-CRIP",
            Method::Hermitian => "Hermitian",
            Method::Dct => "DCT",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Transmitter-side operation count for an `n`-point frame.
///
/// With `C1 = (N/2)(log2 N - 3) + 2` and `C2 = (N/2)(3 log2 N - 5) + 4`:
///
/// | method    | multiplications | additions      |
/// |-----------|-----------------|----------------|
/// | O-CRIP    | C1              | C2             |
/// | E-CRIP    | C1              | C2 + N         |
/// | Hermitian | 2 C1            | 2 C2 + 2N - 4  |
/// | DCT       | C1 + 1.5N - 2   | C2 + 1.5N - 3  |
///
/// This is a closed-form model of a real-input split-radix transform, not a
/// count taken from the kernel used by [`DftPlan`].
pub fn op_count(method: Method, n: usize) -> Result<OpCount> {
    check_power_of_two(n, "subcarrier count")?;
    if n < MIN_SUBCARRIERS {
        return Err(Error::Sizing(format!(
            "op-count model needs N >= {MIN_SUBCARRIERS}, got {n}"
        )));
    }
    let n = n as u64;
    let log2n = u64::from(n.trailing_zeros());
    let half = n / 2;
    let c1 = half * (log2n - 3) + 2;
    let c2 = half * (3 * log2n - 5) + 4;
    let three_halves = 3 * n / 2;
    Ok(match method {
        Method::OCrip => OpCount::new(c1, c2),
        Method::ECrip => OpCount::new(c1, c2 + n),
        Method::Hermitian => OpCount::new(2 * c1, 2 * c2 + 2 * n - 4),
        Method::Dct => OpCount::new(c1 + three_halves - 2, c2 + three_halves - 3),
    })
}

/// Receiver-side extras not included in [`op_count`]: real subtractions for
/// CRIP and complex conjugations for the Hermitian arrangement.
pub fn receiver_extras(method: Method, n: usize) -> Option<(&'static str, u64)> {
    let n = n as u64;
    match method {
        Method::OCrip | Method::ECrip => Some(("subtractions", n)),
        Method::Hermitian => Some(("conjugations", (n - 2) / 2)),
        Method::Dct => None,
    }
}

/// Direct `F^H x` by matrix product, counting real operations as it goes.
///
/// Quadratic in `N`; for sanity checks only.
pub fn dense_idft_counted(freq: &[Complex64]) -> (Vec<Complex64>, OpCount) {
    let n = freq.len();
    let scale = 1.0 / (n as f64).sqrt();
    let mut ops = OpCount::default();
    let out = (0..n)
        .map(|row| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &x) in freq.iter().enumerate() {
                let angle = 2.0 * PI * ((row * k) % n) as f64 / n as f64;
                acc += x * Complex64::from_polar(1.0, angle);
                // complex multiply + accumulate
                ops.multiplications += 4;
                ops.additions += 4;
            }
            acc * scale
        })
        .collect();
    (out, ops)
}
