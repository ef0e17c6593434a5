//! Seeded BER, clip-noise and front-end degradation sweeps.
//!
//! Each frame draws its bits and noise from its own [`RngStream`], keyed by
//! purpose, sweep point, scheme lane and frame index. Frames run in parallel
//! batches but are tallied strictly in index order, and the early-stop test
//! is applied per frame, so counts never depend on scheduling or batch size.

use rayon::prelude::*;

use crate::channel::{ChannelModel, ClipperConfig, RngStream};
use crate::clipnoise::{
    clip_noise_power_ocrip, clip_noise_power_single, mc_clip_noise_frames, mc_clip_noise_single,
    mc_clip_noise_two_branch, ClipRegime, McEstimate,
};
use crate::frames::{FrameKind, ModulationSpec};
use crate::modem::{run_frame, LinkConfig, Waveform};
use crate::{Error, Result};

use super::config::{ClipNoiseSource, ExperimentConfig};
use super::output::{
    version_string, BerRecord, ClipNoiseRecord, Metadata, Records, SweepResult, INTERVAL_METHOD,
};
use super::stats::{wilson_interval, Interval, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Ber = 0,
    Degrade = 1,
    GainSearch = 2,
}

/// Identifies the RNG streams of one (sweep point, scheme) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub purpose: Purpose,
    pub point: u16,
    pub lane: u8,
}

impl StreamKey {
    pub fn new(purpose: Purpose, point: usize, lane: usize) -> Result<Self> {
        let point = u16::try_from(point)
            .map_err(|_| Error::Config(format!("sweep point index {point} out of range")))?;
        let lane = u8::try_from(lane)
            .map_err(|_| Error::Config(format!("scheme lane {lane} out of range")))?;
        Ok(Self {
            purpose,
            point,
            lane,
        })
    }

    /// `purpose | point | lane | frame` packed 8/16/8/32 bits.
    pub fn stream(&self, frame: u64) -> u64 {
        ((self.purpose as u64) << 56)
            | (u64::from(self.point) << 40)
            | (u64::from(self.lane) << 32)
            | (frame & 0xffff_ffff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_frames: u64,
    pub max_errors: u64,
}

impl Budget {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            max_frames: cfg.max_frames,
            max_errors: cfg.max_errors,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorCount {
    pub errors: u64,
    pub bits: u64,
    pub frames: u64,
}

impl ErrorCount {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    pub fn interval(&self) -> Interval {
        wilson_interval(self.errors, self.bits, Z95)
    }
}

const FIRST_BATCH: u64 = 64;
const MAX_BATCH: u64 = 8192;

/// Runs frames until `max_errors` bit errors or `max_frames` frames.
///
/// With several links (one per channel) frame `f` uses link `f mod len`.
pub fn count_errors(
    links: &[LinkConfig],
    budget: Budget,
    seed: u64,
    key: StreamKey,
) -> Result<ErrorCount> {
    let Some(first) = links.first() else {
        return Err(Error::Config("no links to simulate".into()));
    };
    let bpf = first.bits_per_frame();
    if links.iter().any(|l| l.bits_per_frame() != bpf) {
        return Err(Error::Config("pooled links disagree on frame size".into()));
    }
    let mut acc = ErrorCount::default();
    let mut start = 0;
    let mut batch = FIRST_BATCH;
    while start < budget.max_frames {
        let end = (start + batch).min(budget.max_frames);
        let errors: Vec<u64> = (start..end)
            .into_par_iter()
            .map(|f| {
                let link = &links[(f % links.len() as u64) as usize];
                let mut rng = RngStream::new(seed, key.stream(f));
                let bits = rng.bits(bpf);
                run_frame(&bits, link, &mut rng).map(|o| o.bit_errors as u64)
            })
            .collect::<Result<_>>()?;
        for e in errors {
            acc.errors += e;
            acc.bits += bpf as u64;
            acc.frames += 1;
            if acc.errors >= budget.max_errors {
                return Ok(acc);
            }
        }
        start = end;
        batch = (batch * 2).min(MAX_BATCH);
    }
    Ok(acc)
}

/// One link per channel for `waveform`.
pub fn build_links(
    cfg: &ExperimentConfig,
    channels: &[ChannelModel],
    waveform: Waveform,
    clipper: Option<ClipperConfig>,
) -> Result<Vec<LinkConfig>> {
    let spec = cfg.modulation_for(waveform)?;
    channels
        .iter()
        .map(|ch| {
            LinkConfig::new(
                waveform,
                spec,
                cfg.n_subcarriers,
                cfg.cp_len,
                ch.clone(),
                clipper,
            )
        })
        .collect()
}

fn with_noise(links: &[LinkConfig], noise: f64) -> Result<Vec<LinkConfig>> {
    links
        .iter()
        .map(|l| l.clone().with_noise_power(noise))
        .collect()
}

fn record(scheme: Waveform, x: f64, count: ErrorCount, gain: f64) -> BerRecord {
    let ci = count.interval();
    BerRecord {
        scheme: scheme.to_string(),
        x,
        value: count.ber(),
        ci_low: ci.low,
        ci_high: ci.high,
        ci_half_width: ci.half_width(),
        errors: count.errors,
        trials: count.bits,
        frames: count.frames,
        gain,
    }
}

fn metadata(cfg: &ExperimentConfig, command: &str, x_label: &str, y_label: &str) -> Result<Metadata> {
    Ok(Metadata {
        command: command.into(),
        config_hash: cfg.hash()?,
        seed: cfg.seed,
        version: version_string(),
        interval_method: INTERVAL_METHOD.into(),
        max_frames: cfg.max_frames,
        max_errors: cfg.max_errors,
        x_label: x_label.into(),
        y_label: y_label.into(),
        notes: Vec::new(),
    })
}

fn channel_note(cfg: &ExperimentConfig) -> String {
    let names: Vec<String> = cfg.channels.iter().map(|c| c.to_string()).collect();
    format!(
        "channels pooled round-robin by frame index: {}",
        names.join(", ")
    )
}

/// BER against Eb/N0 with an ideal (unclipped) front end.
///
/// `Eb` is the electrical drive energy per data bit with the cyclic prefix
/// and any DC bias excluded; the noise variance per sample is `N0/2`.
pub fn ber_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate_ber()?;
    let channels = cfg.build_channels()?;
    let lanes = cfg
        .schemes
        .iter()
        .map(|&w| build_links(cfg, &channels, w, None))
        .collect::<Result<Vec<_>>>()?;
    let budget = Budget::of(cfg);
    let mut rows = Vec::new();
    for (lane, (&w, links)) in cfg.schemes.iter().zip(&lanes).enumerate() {
        for (point, &ebn0) in cfg.ebn0_db.iter().enumerate() {
            let noise = links[0].noise_for_ebn0(ebn0);
            let links = with_noise(links, noise)?;
            let key = StreamKey::new(Purpose::Ber, point, lane)?;
            let count = count_errors(&links, budget, cfg.seed, key)?;
            rows.push(record(w, ebn0, count, links[0].gain()));
        }
    }
    let mut meta = metadata(cfg, "ber", "Eb/N0 (dB)", "BER")?;
    meta.notes.push(channel_note(cfg));
    meta.notes.push(
        "Eb: electrical drive energy per data bit, cyclic prefix and DC bias excluded".into(),
    );
    Ok(SweepResult {
        records: Records::Ber(rows),
        meta,
    })
}

/// Absolute per-sample noise variance used by the degradation sweeps.
///
/// Fixed once from `degrade.ebn0_db` for an E-CRIP drive (first subcarrier
/// loaded) at RMS `degrade.reference_rms`, then shared by every scheme, gain
/// and bias point, as a physical receiver noise floor would be.
pub fn degradation_noise(cfg: &ExperimentConfig) -> f64 {
    let n = cfg.n_subcarriers;
    let bits = FrameKind::Crip { s0_loaded: true }.bits_per_frame(n, cfg.order) as f64;
    let eb = cfg.degrade.reference_rms.powi(2) * n as f64 / bits;
    eb / (2.0 * 10f64.powf(cfg.degrade.ebn0_db / 10.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSearch {
    pub gain: f64,
    pub count: ErrorCount,
    pub grid: Vec<(f64, ErrorCount)>,
}

/// Grid search for the drive RMS minimising measured BER through the
/// configured clipper at the degradation noise floor. Ties go to the smaller
/// gain.
pub fn optimum_gain_search(
    cfg: &ExperimentConfig,
    waveform: Waveform,
    lane: usize,
) -> Result<GainSearch> {
    if cfg.degrade.gain_grid.is_empty() {
        return Err(Error::Config("gain search grid is empty".into()));
    }
    let channels = cfg.build_channels()?;
    let noise = degradation_noise(cfg);
    let budget = Budget::of(cfg);
    let mut grid = Vec::with_capacity(cfg.degrade.gain_grid.len());
    for (point, &g) in cfg.degrade.gain_grid.iter().enumerate() {
        let clipper = cfg.clipper.with_gain(g)?;
        let links = with_noise(&build_links(cfg, &channels, waveform, Some(clipper))?, noise)?;
        let key = StreamKey::new(Purpose::GainSearch, point, lane)?;
        grid.push((g, count_errors(&links, budget, cfg.seed, key)?));
    }
    let &(gain, count) = grid
        .iter()
        .min_by(|(ga, a), (gb, b)| a.ber().total_cmp(&b.ber()).then(ga.total_cmp(gb)))
        .expect("grid is nonempty");
    Ok(GainSearch { gain, count, grid })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegradeKind {
    /// Sweep the bias offset at each scheme's optimum gain.
    DcShift,
    /// Sweep a multiplier on each scheme's optimum gain at nominal bias.
    Gain,
}

impl DegradeKind {
    pub fn command(self) -> &'static str {
        match self {
            DegradeKind::DcShift => "degrade-dc",
            DegradeKind::Gain => "degrade-gain",
        }
    }
}

/// BER per scheme as the front end moves away from its optimum.
pub fn degradation_sweep(kind: DegradeKind, cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate_degrade()?;
    let channels = cfg.build_channels()?;
    for &w in &cfg.schemes {
        build_links(cfg, &channels, w, Some(cfg.clipper))?;
    }
    let noise = degradation_noise(cfg);
    let budget = Budget::of(cfg);
    let grid = match kind {
        DegradeKind::DcShift => &cfg.degrade.dc_shifts,
        DegradeKind::Gain => &cfg.degrade.gain_multipliers,
    };
    let x_label = match kind {
        DegradeKind::DcShift => "DC bias shift (V)",
        DegradeKind::Gain => "gain / optimum gain",
    };
    let mut meta = metadata(cfg, kind.command(), x_label, "BER")?;
    meta.notes.push(channel_note(cfg));
    meta.notes.push(format!(
        "noise variance per sample {noise} (Eb/N0 {} dB at drive RMS {})",
        cfg.degrade.ebn0_db, cfg.degrade.reference_rms
    ));
    let mut rows = Vec::new();
    for (lane, &w) in cfg.schemes.iter().enumerate() {
        let opt = optimum_gain_search(cfg, w, lane)?;
        meta.notes.push(format!(
            "{w}: optimum gain {} (BER {} over {} bits)",
            opt.gain,
            opt.count.ber(),
            opt.count.bits
        ));
        for (point, &x) in grid.iter().enumerate() {
            let clipper = match kind {
                DegradeKind::DcShift => cfg.clipper.with_dc_shift(x)?.with_gain(opt.gain)?,
                DegradeKind::Gain => cfg.clipper.with_gain(opt.gain * x)?,
            };
            let links = with_noise(&build_links(cfg, &channels, w, Some(clipper))?, noise)?;
            let key = StreamKey::new(Purpose::Degrade, point, lane)?;
            let count = count_errors(&links, budget, cfg.seed, key)?;
            rows.push(record(w, x, count, clipper.gain));
        }
    }
    Ok(SweepResult {
        records: Records::Ber(rows),
        meta,
    })
}

/// SplitMix64 finaliser, for deriving independent sub-seeds.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index))
}

fn or_nan(v: Result<f64>, what: &str, s2: f64, notes: &mut Vec<String>) -> f64 {
    v.unwrap_or_else(|e| {
        notes.push(format!("sigma_x2 = {s2}: {what} undefined ({e})"));
        f64::NAN
    })
}

/// Clip-noise power against drive variance, closed forms next to sampling
/// estimates, for the clipper's `[B, T]` (its gain is ignored here).
pub fn clipnoise_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate_clipnoise()?;
    let (lo, hi) = cfg.clipper.bounds();
    let c = &cfg.clipnoise;
    let mut notes = vec![format!("clip bounds B = {lo}, T = {hi}")];
    let mut rows = Vec::with_capacity(c.sigma2.len());
    for (i, &s2) in c.sigma2.iter().enumerate() {
        let regime = ClipRegime::new(s2, lo, hi)?;
        let analytic_single =
            or_nan(clip_noise_power_single(&regime), "single-branch power", s2, &mut notes);
        let analytic_ocrip =
            or_nan(clip_noise_power_ocrip(s2, lo, hi), "O-CRIP power", s2, &mut notes);
        let (single, two): (McEstimate, McEstimate) = match c.source {
            ClipNoiseSource::Gaussian => (
                mc_clip_noise_single(&regime, c.samples, derive_seed(cfg.seed, 2 * i as u64)),
                mc_clip_noise_two_branch(s2, lo, hi, c.samples, derive_seed(cfg.seed, 2 * i as u64 + 1)),
            ),
            ClipNoiseSource::Frames => {
                let n = cfg.n_subcarriers;
                let frames = c.samples.div_ceil(n as u64);
                let f = mc_clip_noise_frames(
                    s2,
                    lo,
                    hi,
                    n,
                    ModulationSpec::pam(cfg.order)?,
                    frames,
                    derive_seed(cfg.seed, i as u64),
                )?;
                (f.single, f.two_branch)
            }
        };
        rows.push(ClipNoiseRecord {
            sigma_x2: s2,
            analytic_single,
            analytic_ocrip,
            mc_single: single.mean,
            mc_ocrip: two.mean,
            mc_stderr: single.std_error.max(two.std_error),
        });
    }
    notes.push(format!(
        "Monte-Carlo source: {}; mc_stderr is the larger of the two standard errors",
        match c.source {
            ClipNoiseSource::Gaussian => "i.i.d. Gaussian samples",
            ClipNoiseSource::Frames => "IDFT outputs of random PAM frames",
        }
    ));
    let mut meta = metadata(cfg, "clipnoise", "input signal power sigma_x^2", "clipping noise power")?;
    meta.max_frames = c.samples;
    meta.max_errors = 0;
    meta.notes = notes;
    Ok(SweepResult {
        records: Records::ClipNoise(rows),
        meta,
    })
}
