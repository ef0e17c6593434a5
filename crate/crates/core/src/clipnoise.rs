//! Clipping-noise power of a zero-mean Gaussian drive through a `[B, T]` clamp.
//!
//! The closed forms come from truncated-Gaussian moments. For the single-LED
//! schemes (Hermitian, E-CRIP) the whole drive of variance `σ²` is clipped
//! once. For O-CRIP each of the two branches, of variance `σ²/2`, is clipped
//! on its own and the two clip-noise terms add:
//!
//! `P_O = 2 P_X(σ²/2) + 2 E[clip(S)]²(σ²/2)`.
//!
//! Sampling estimators with the same interface live alongside for checking
//! the closed forms and for the clip-noise sweep.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;

use crate::channel::RngStream;
use crate::frames::{map_bits, ModulationSpec};
use crate::modem::Modem;
use crate::frames::build_crip_frame;
use crate::{Error, Result};

/// `(Q(x), φ(x), φ'(x))` for the standard normal.
///
/// `Q` goes through `erfc`, which keeps full relative precision in the upper
/// tail; `Q(−x)` is evaluated directly rather than as `1 − Q(x)`.
pub fn gauss_kernels(x: f64) -> (f64, f64, f64) {
    let phi = standard_normal_pdf(x);
    (q_function(x), phi, -x * phi)
}

pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn standard_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Input variance and clip bounds. `B < 0 < T`, `σ_x² > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipRegime {
    pub sigma_x2: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ClipRegime {
    pub fn new(sigma_x2: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(sigma_x2 > 0.0) || !sigma_x2.is_finite() {
            return Err(Error::Domain(format!("input variance must be positive, got {sigma_x2}")));
        }
        if !(lower < 0.0 && upper > 0.0) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::Domain(format!(
                "clip bounds must satisfy B < 0 < T, got B = {lower}, T = {upper}"
            )));
        }
        Ok(Self {
            sigma_x2,
            lower,
            upper,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_x2.sqrt()
    }

    fn normalized_bounds(&self) -> (f64, f64) {
        let s = self.sigma();
        (self.lower / s, self.upper / s)
    }

    /// Both bounds so far out that nothing is ever clipped.
    fn is_clip_free(&self) -> bool {
        let (b, t) = self.normalized_bounds();
        q_function(-b) < 1e-30 && q_function(t) < 1e-30
    }
}

/// Conditional moments and region probabilities of `S ~ N(0, σ_x²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMoments {
    /// `E[S | B ≤ S ≤ T]`
    pub middle_mean: f64,
    /// `E[S² | B ≤ S ≤ T]`
    pub middle_second_moment: f64,
    /// `E[S | S < B]`
    pub lower_mean: f64,
    /// `E[S | S > T]`
    pub upper_mean: f64,
    /// `Pr(B ≤ S ≤ T) = Q(B/σ) − Q(T/σ)`
    pub p_middle: f64,
    /// `Pr(S < B) = 1 − Q(B/σ)`
    pub p_lower: f64,
    /// `Pr(S > T) = Q(T/σ)`
    pub p_upper: f64,
}

/// Conditional mean of a tail beyond `x` (in σ units, `x > 0`), falling back
/// to the asymptotic Mills ratio once the tail probability underflows.
fn tail_mean(x: f64) -> f64 {
    let q = q_function(x);
    if q > 0.0 && q.is_normal() {
        standard_normal_pdf(x) / q
    } else {
        x + 1.0 / x
    }
}

pub fn truncated_moments(regime: &ClipRegime) -> Result<TruncatedMoments> {
    let sigma = regime.sigma();
    let (b, t) = regime.normalized_bounds();
    let (q_b, phi_b, dphi_b) = gauss_kernels(b);
    let (q_t, phi_t, dphi_t) = gauss_kernels(t);
    let p_middle = q_b - q_t;
    if !(p_middle > 1e-15) {
        return Err(Error::Domain(format!(
            "degenerate middle region: Pr(B <= S <= T) = {p_middle:e}"
        )));
    }
    let p_lower = q_function(-b);
    let p_upper = q_t;
    Ok(TruncatedMoments {
        middle_mean: -sigma * (phi_t - phi_b) / p_middle,
        middle_second_moment: regime.sigma_x2 + regime.sigma_x2 * (dphi_t - dphi_b) / p_middle,
        lower_mean: -sigma * tail_mean(-b),
        upper_mean: sigma * tail_mean(t),
        p_middle,
        p_lower,
        p_upper,
    })
}

/// `E[(S − clip(S))²]` for `S ~ N(0, σ_x²)`.
///
/// Evaluated as the sum of the two tail contributions
/// `(σ² + B²)Φ(B/σ) + Bσφ(B/σ) + (σ² + T²)Q(T/σ) − Tσφ(T/σ)`, which is the
/// three-term expansion `E[S²] + E[S_c²] − 2E[S S_c]` with the cancelling
/// middle-region terms removed.
pub fn clip_noise_power_single(regime: &ClipRegime) -> Result<f64> {
    if regime.is_clip_free() {
        return Ok(0.0);
    }
    let sigma = regime.sigma();
    let s2 = regime.sigma_x2;
    let (b, t) = regime.normalized_bounds();
    let (lo, hi) = (regime.lower, regime.upper);
    let lower_tail = (s2 + lo * lo) * q_function(-b) + lo * sigma * standard_normal_pdf(b);
    let upper_tail = (s2 + hi * hi) * q_function(t) - hi * sigma * standard_normal_pdf(t);
    Ok((lower_tail.max(0.0) + upper_tail.max(0.0)).max(0.0))
}

/// `E[clip(S)] = −σ(φ(T/σ) − φ(B/σ)) + B(1 − Q(B/σ)) + T Q(T/σ)`.
///
/// Equal to `−E[S − clip(S)]`; positive when `|B| < T`.
pub fn clipped_mean(regime: &ClipRegime) -> f64 {
    if regime.is_clip_free() {
        return 0.0;
    }
    let sigma = regime.sigma();
    let (b, t) = regime.normalized_bounds();
    -sigma * (standard_normal_pdf(t) - standard_normal_pdf(b))
        + regime.lower * q_function(-b)
        + regime.upper * q_function(t)
}

/// O-CRIP clip-noise power for a summed drive of variance `total_sigma2`.
pub fn clip_noise_power_ocrip(total_sigma2: f64, lower: f64, upper: f64) -> Result<f64> {
    let branch = ClipRegime::new(total_sigma2 / 2.0, lower, upper)?;
    let mean = clipped_mean(&branch);
    Ok(2.0 * clip_noise_power_single(&branch)? + 2.0 * mean * mean)
}

/// Sample mean of a clip-noise statistic with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Closed form next to a Monte-Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipNoiseReport {
    pub analytic: f64,
    pub monte_carlo: f64,
    pub samples: u64,
    /// `|mc − analytic| / analytic`, or the absolute gap when `analytic` is 0.
    pub relative_gap: f64,
}

impl ClipNoiseReport {
    pub fn new(analytic: f64, mc: McEstimate) -> Self {
        let gap = (mc.mean - analytic).abs();
        Self {
            analytic,
            monte_carlo: mc.mean,
            samples: mc.samples,
            relative_gap: if analytic > 0.0 { gap / analytic } else { gap },
        }
    }
}

/// Samples per independent RNG stream in the parallel estimators.
const CHUNK: u64 = 1 << 16;

#[derive(Default, Clone, Copy)]
struct Moments {
    sum: f64,
    sum_sq: f64,
    count: u64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
        self.count += 1;
    }

    fn merge(mut self, other: Moments) -> Moments {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.count += other.count;
        self
    }

    fn estimate(&self) -> McEstimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error: (var / n).sqrt(),
            samples: self.count,
        }
    }
}

/// Runs `per_chunk` over fixed-size chunks on disjoint streams and reduces in
/// chunk order, so the result does not depend on thread scheduling.
fn chunked<F>(samples: u64, seed: u64, per_chunk: F) -> McEstimate
where
    F: Fn(&mut RngStream, u64, &mut Moments) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut m = Moments::default();
            per_chunk(&mut rng, len, &mut m);
            m
        })
        .collect();
    parts
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate()
}

fn clamp_noise(s: f64, lower: f64, upper: f64) -> f64 {
    s - s.clamp(lower, upper)
}

/// `E[(S − clip(S))²]` by direct sampling of `N(0, σ_x²)`.
pub fn mc_clip_noise_single(regime: &ClipRegime, samples: u64, seed: u64) -> McEstimate {
    let sigma = regime.sigma();
    let (lo, hi) = (regime.lower, regime.upper);
    chunked(samples, seed, |rng, len, m| {
        for _ in 0..len {
            let n = clamp_noise(sigma * rng.standard_normal(), lo, hi);
            m.push(n * n);
        }
    })
}

/// `E[clip(S)]` by direct sampling.
pub fn mc_clipped_mean(regime: &ClipRegime, samples: u64, seed: u64) -> McEstimate {
    let sigma = regime.sigma();
    let (lo, hi) = (regime.lower, regime.upper);
    chunked(samples, seed, |rng, len, m| {
        for _ in 0..len {
            m.push((sigma * rng.standard_normal()).clamp(lo, hi));
        }
    })
}

/// Two independent branches of variance `σ²/2`, clipped separately; returns
/// the mean square of the summed clip noise.
pub fn mc_clip_noise_two_branch(
    total_sigma2: f64,
    lower: f64,
    upper: f64,
    samples: u64,
    seed: u64,
) -> McEstimate {
    let sigma = (total_sigma2 / 2.0).sqrt();
    chunked(samples, seed, |rng, len, m| {
        for _ in 0..len {
            let a = clamp_noise(sigma * rng.standard_normal(), lower, upper);
            let b = clamp_noise(sigma * rng.standard_normal(), lower, upper);
            m.push((a + b) * (a + b));
        }
    })
}

/// Clip-noise powers measured on actual IDFT outputs of random PAM frames
/// rather than on synthetic Gaussians, for measuring how far the Gaussian
/// and branch-independence assumptions are from a real `N`-point frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameClipNoise {
    /// Summed drive `S_FR + S_FI` clipped once (E-CRIP).
    pub single: McEstimate,
    /// `S_FR` and `S_FI` clipped separately and summed (O-CRIP).
    pub two_branch: McEstimate,
}

/// Frame-based estimate: symbols scaled so the summed drive has variance
/// `total_sigma2`; statistics are taken over all `N` samples of every frame.
pub fn mc_clip_noise_frames(
    total_sigma2: f64,
    lower: f64,
    upper: f64,
    n: usize,
    spec: ModulationSpec,
    frames: u64,
    seed: u64,
) -> Result<FrameClipNoise> {
    ClipRegime::new(total_sigma2, lower, upper)?;
    let modem = Modem::new(n, 0)?;
    let bits_per_frame = n * spec.bits_per_symbol();
    let scale = total_sigma2.sqrt();
    let frames_per_chunk = (CHUNK / n as u64).max(1);
    let chunks = frames.div_ceil(frames_per_chunk);
    let parts: Vec<Result<(Moments, Moments)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c);
            let count = frames_per_chunk.min(frames - c * frames_per_chunk);
            let (mut single, mut two) = (Moments::default(), Moments::default());
            for _ in 0..count {
                let bits = rng.bits(bits_per_frame);
                let sym = map_bits(&bits, spec)?.scaled(scale);
                let frame = build_crip_frame(&sym, n, true)?;
                let (re, im) = modem.plan().split_even_odd_parts(frame.bins())?;
                for (r, i) in re.iter().zip(&im) {
                    let e = clamp_noise(r + i, lower, upper);
                    single.push(e * e);
                    let o = clamp_noise(*r, lower, upper) + clamp_noise(*i, lower, upper);
                    two.push(o * o);
                }
            }
            Ok((single, two))
        })
        .collect();
    let (mut single, mut two) = (Moments::default(), Moments::default());
    for p in parts {
        let (s, t) = p?;
        single = single.merge(s);
        two = two.merge(t);
    }
    Ok(FrameClipNoise {
        single: single.estimate(),
        two_branch: two.estimate(),
    })
}
