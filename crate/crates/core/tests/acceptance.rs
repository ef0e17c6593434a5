//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! `cargo test --release -p crip-core --test acceptance`

use std::process::ExitCode;
use std::time::{Duration, Instant};

use crip_core::channel::{linear_convolve, ChannelModel, RngStream};
use crip_core::clipnoise::{
    clip_noise_power_ocrip, clip_noise_power_single, mc_clip_noise_single,
    mc_clip_noise_two_branch, ClipRegime,
};
use crip_core::frames::{
    build_crip_frame, build_hermitian_frame, frame_rate, map_bits, FrameKind, ModulationSpec,
    Symbols,
};
use crip_core::harness::{
    ber_sweep, bpsk_ber, clipnoise_sweep, complexity_report, degradation_sweep, DegradeKind,
    ExperimentConfig, Interval, SweepResult,
};
use crip_core::modem::{dc_offset, Modem, Scheme, Waveform, ZeroForcing};
use crip_core::transforms::{dft, Method, OpCount};
use crip_core::Complex64;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Operation counts as printed in the published table, rows O-CRIP, E-CRIP,
/// Hermitian, DCT; columns N = 8..512.
const PUBLISHED: [[(u64, u64); 7]; 4] = [
    [(2, 20), (10, 60), (34, 164), (98, 420), (258, 1028), (642, 2436), (1538, 5636)],
    [(2, 28), (10, 76), (34, 196), (98, 484), (258, 1156), (642, 2692), (1538, 6148)],
    [(4, 52), (20, 148), (68, 388), (196, 964), (516, 2308), (1284, 5380), (3076, 12292)],
    [(12, 29), (32, 81), (80, 209), (192, 513), (448, 1217), (1024, 2817), (2304, 6401)],
];

fn complexity_table() -> Outcome {
    let ns: Vec<usize> = (3..=9).map(|p| 1 << p).collect();
    let table = complexity_report(&ns).map_err(e2s)?;
    let mut cells = 0;
    for (row, method) in PUBLISHED.iter().zip(Method::ALL) {
        for (&(mul, add), &n) in row.iter().zip(&ns) {
            let got = table.get(method, n).ok_or("missing cell")?;
            ensure(got == OpCount::new(mul, add), || {
                format!("{method} N={n}: got {got:?}, want ({mul}, {add})")
            })?;
            cells += 2;
        }
    }
    Ok(format!("{cells} cells match"))
}

fn random_symbols(rng: &mut RngStream, spec: ModulationSpec, count: usize) -> Symbols {
    let bits = rng.bits(count * spec.bits_per_symbol());
    map_bits(&bits, spec).unwrap().values
}

fn random_channel(rng: &mut RngStream, n: usize) -> (ChannelModel, ZeroForcing) {
    loop {
        let memory = (rng.uniform(0.0, 9.0) as usize).min(8);
        let taps: Vec<f64> = (0..=memory)
            .map(|m| if m == 0 { rng.uniform(0.2, 1.0) } else { rng.uniform(-1.0, 1.0) })
            .collect();
        let ch = ChannelModel::new(taps, n).unwrap();
        if let Ok(eq) = ZeroForcing::new(&ch) {
            return (ch, eq);
        }
    }
}

fn rms_gap(a: &Symbols, b: &Symbols) -> f64 {
    let sq: f64 = match (a, b) {
        (Symbols::Real(a), Symbols::Real(b)) => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum(),
        (Symbols::Complex(a), Symbols::Complex(b)) => {
            a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
        }
        _ => f64::INFINITY,
    };
    (sq / a.len() as f64).sqrt()
}

fn isi_elimination() -> Outcome {
    let (n, cp) = (64, 8);
    let modem = Modem::new(n, cp).map_err(e2s)?;
    let mut rng = RngStream::new(2024, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (ch, eq) = random_channel(&mut rng, n);
        for waveform in [Waveform::HERMITIAN, Waveform::ecrip(true), Waveform::ocrip(true)] {
            let (frame, sent) = match waveform.scheme {
                Scheme::Hermitian => {
                    let x = random_symbols(&mut rng, ModulationSpec::qam(4).unwrap(), n / 2 - 1);
                    let f = build_hermitian_frame(x.as_complex().unwrap(), n).map_err(e2s)?;
                    (f, x)
                }
                _ => {
                    let x = random_symbols(&mut rng, ModulationSpec::pam(4).unwrap(), n);
                    (build_crip_frame(&x, n, true).map_err(e2s)?, x)
                }
            };
            let tx = modem.tx(&frame, waveform.scheme).map_err(e2s)?;
            let mut rx = vec![0.0; n + cp];
            for b in &tx.branches {
                for (r, v) in rx.iter_mut().zip(linear_convolve(b, &ch)) {
                    *r += v;
                }
            }
            let soft = modem.rx(&rx, &eq, waveform.frame_kind()).map_err(e2s)?;
            let gap = rms_gap(&soft, &sent);
            ensure(gap < 1e-9, || format!("{waveform}: RMS error {gap:e} on taps {:?}", ch.taps()))?;
            worst = worst.max(gap);
        }
    }
    Ok(format!("100 channels x 3 schemes, worst RMS error {worst:.2e}"))
}

fn appendix_lemmas() -> Outcome {
    let n = 64;
    let modem = Modem::new(n, 0).map_err(e2s)?;
    let mut rng = RngStream::new(77, 0);
    let (mut im_fr, mut re_fi, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let bins: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.standard_normal(), 0.0)).collect();
        let (fr, fi) = modem.plan().split_even_odd_parts(&bins).map_err(e2s)?;
        let to_c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        let dfr = dft(&to_c(&fr)).map_err(e2s)?;
        let dfi = dft(&to_c(&fi)).map_err(e2s)?;
        im_fr = dfr.iter().fold(im_fr, |m, v| m.max(v.im.abs()));
        re_fi = dfi.iter().fold(re_fi, |m, v| m.max(v.re.abs()));
        for k in 0..n {
            let mirror = (n - k) % n;
            sym = sym.max((fr[k] - fr[mirror]).abs()).max((fi[k] + fi[mirror]).abs());
        }
    }
    ensure(im_fr < 1e-10, || format!("max |Im dft(S_FR)| = {im_fr:e}"))?;
    ensure(re_fi < 1e-10, || format!("max |Re dft(S_FI)| = {re_fi:e}"))?;
    ensure(sym < 1e-10, || format!("even/odd symmetry residue {sym:e}"))?;
    Ok(format!(
        "1000 frames: |Im dft(S_FR)| {im_fr:.1e}, |Re dft(S_FI)| {re_fi:.1e}, symmetry {sym:.1e}"
    ))
}

fn clip_closed_forms() -> Outcome {
    let (lo, hi) = (-0.25, 0.25);
    let samples = 10_000_000;
    let mut worst = 0.0f64;
    for (i, s2) in [0.05, 0.1, 0.25, 0.5, 1.0].into_iter().enumerate() {
        let regime = ClipRegime::new(s2, lo, hi).map_err(e2s)?;
        let single = clip_noise_power_single(&regime).map_err(e2s)?;
        let ocrip = clip_noise_power_ocrip(s2, lo, hi).map_err(e2s)?;
        let mc_s = mc_clip_noise_single(&regime, samples, 1000 + i as u64).mean;
        let mc_o = mc_clip_noise_two_branch(s2, lo, hi, samples, 2000 + i as u64).mean;
        for (name, a, m) in [("single", single, mc_s), ("O-CRIP", ocrip, mc_o)] {
            let rel = (m - a).abs() / a;
            ensure(rel < 0.01, || format!("sigma2 {s2} {name}: analytic {a:e} vs MC {m:e}"))?;
            worst = worst.max(rel);
        }
        ensure(ocrip < single, || format!("sigma2 {s2}: O-CRIP {ocrip:e} not below {single:e}"))?;
    }
    // the sweep entry point must show the same ordering
    let cfg = ExperimentConfig {
        clipnoise: crip_core::harness::ClipNoiseConfig {
            sigma2: vec![0.05, 0.1, 0.25, 0.5, 1.0],
            samples: 100_000,
            ..Default::default()
        },
        ..ExperimentConfig::default()
    };
    let res = clipnoise_sweep(&cfg).map_err(e2s)?;
    ensure(
        res.clipnoise_records().iter().all(|r| r.analytic_ocrip < r.analytic_single),
        || "sweep ordering violated".into(),
    )?;
    Ok(format!("10 closed forms within {:.3}% of 1e7-sample oracles, O-CRIP below single", 100.0 * worst))
}

fn intervals(res: &SweepResult) -> Vec<(String, Interval, f64, u64)> {
    res.ber_records()
        .iter()
        .map(|r| {
            (
                r.scheme.clone(),
                Interval { low: r.ci_low, high: r.ci_high },
                r.value,
                r.errors,
            )
        })
        .collect()
}

fn equal_ber() -> Outcome {
    let cfg = ExperimentConfig {
        schemes: vec![Waveform::HERMITIAN, Waveform::ecrip(true), Waveform::ocrip(true)],
        order: 4,
        ebn0_db: vec![12.0],
        max_frames: 1_000_000,
        max_errors: 500,
        seed: 12,
        ..ExperimentConfig::default()
    };
    let res = ber_sweep(&cfg).map_err(e2s)?;
    let rows = intervals(&res);
    for (name, _, _, errors) in &rows {
        ensure(*errors >= 500, || format!("{name}: only {errors} errors"))?;
    }
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            ensure(rows[i].1.overlaps(&rows[j].1), || {
                format!("{} {:?} vs {} {:?}", rows[i].0, rows[i].1, rows[j].0, rows[j].1)
            })?;
        }
    }
    let desc: Vec<String> = rows.iter().map(|(n, _, v, _)| format!("{n} {v:.3e}")).collect();
    Ok(format!("12 dB: {} (intervals overlap)", desc.join(", ")))
}

fn awgn_oracle() -> Outcome {
    let cfg = ExperimentConfig {
        schemes: vec![Waveform::ecrip(true), Waveform::ocrip(true)],
        order: 2,
        ebn0_db: vec![4.0, 6.0, 8.0],
        max_frames: 2_000_000,
        max_errors: 4000,
        seed: 6,
        ..ExperimentConfig::default()
    };
    let res = ber_sweep(&cfg).map_err(e2s)?;
    let mut worst = 0.0f64;
    for r in res.ber_records() {
        let expect = bpsk_ber(r.x);
        let rel = (r.value - expect).abs() / expect;
        ensure(r.errors >= 100, || format!("{} {} dB: {} errors", r.scheme, r.x, r.errors))?;
        ensure(rel < 0.1, || {
            format!("{} {} dB: BER {:e} vs {expect:e}", r.scheme, r.x, r.value)
        })?;
        worst = worst.max(rel);
    }
    Ok(format!("4/6/8 dB within {:.2}% of Q(sqrt(2Eb/N0))", 100.0 * worst))
}

fn degrade_cfg(schemes: Vec<Waveform>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        schemes,
        order: 8,
        max_frames: 200_000,
        max_errors: 500,
        seed: 20,
        ..ExperimentConfig::default()
    };
    cfg.degrade.dc_shifts = vec![0.0, 0.05, 0.1];
    cfg.degrade.gain_multipliers = vec![1.0, 1.25, 1.5];
    cfg
}

/// Nondecreasing along the sweep, a drop being tolerated only while the
/// intervals still overlap.
fn monotone(rows: &[(String, Interval, f64, u64)]) -> bool {
    rows.windows(2).all(|w| w[1].2 >= w[0].2 || w[1].1.overlaps(&w[0].1))
}

fn ordering_at(res: &SweepResult, x: f64) -> Result<String, String> {
    let at = |name: &str| {
        res.scheme(name)
            .into_iter()
            .find(|r| r.x == x)
            .map(|r| (r.value, Interval { low: r.ci_low, high: r.ci_high }))
            .ok_or_else(|| format!("no {name} point at {x}"))
    };
    let (o, oi) = at("ocrip")?;
    for other in ["ecrip", "hermitian"] {
        let (v, vi) = at(other)?;
        ensure(o < v && !oi.overlaps(&vi), || {
            format!("x={x}: ocrip {o:e} {oi:?} vs {other} {v:e} {vi:?}")
        })?;
    }
    Ok(format!("ocrip {o:.2e} < ecrip {:.2e}, hermitian {:.2e}", at("ecrip")?.0, at("hermitian")?.0))
}

fn clipping_ordering() -> Outcome {
    let cfg = degrade_cfg(vec![Waveform::HERMITIAN, Waveform::ecrip(true), Waveform::ocrip(true)]);
    let mut parts = Vec::new();
    for (kind, x) in [(DegradeKind::DcShift, 0.1), (DegradeKind::Gain, 1.5)] {
        let res = degradation_sweep(kind, &cfg).map_err(e2s)?;
        for name in ["hermitian", "ecrip", "ocrip"] {
            let rows: Vec<_> = intervals(&res).into_iter().filter(|r| r.0 == name).collect();
            ensure(monotone(&rows), || format!("{}: {name} not monotone", kind.command()))?;
        }
        parts.push(format!("{} {x}: {}", kind.command(), ordering_at(&res, x)?));
    }
    Ok(parts.join("; "))
}

fn rate_arithmetic() -> Outcome {
    let w = 100e6;
    let h = frame_rate(FrameKind::Hermitian, 64, 8, w).map_err(e2s)?.bitrate;
    let s0 = frame_rate(FrameKind::Crip { s0_loaded: true }, 64, 8, w).map_err(e2s)?.bitrate;
    let e0 = frame_rate(FrameKind::Crip { s0_loaded: false }, 64, 8, w).map_err(e2s)?.bitrate;
    ensure(h == 290.625e6, || format!("Hermitian {h}"))?;
    ensure(s0 - h == 9.375e6, || format!("s0 loaded gain {}", s0 - h))?;
    ensure(e0 - h == 4.6875e6, || format!("s0 empty gain {}", e0 - h))?;
    Ok(format!("{h} bps, +{} bps, +{} bps", s0 - h, e0 - h))
}

fn s0_neutrality() -> Outcome {
    // mean of the pre-CP E-CRIP signal over random real frames
    let n = 64;
    let modem = Modem::new(n, 8).map_err(e2s)?;
    let spec = ModulationSpec::pam(8).unwrap();
    let mut rng = RngStream::new(9, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = random_symbols(&mut rng, spec, n);
        let s0 = x.as_real().unwrap()[0];
        let frame = build_crip_frame(&x, n, true).map_err(e2s)?;
        let tx = modem.tx(&frame, Scheme::ECrip).map_err(e2s)?;
        let mean = tx.branches[0][8..].iter().sum::<f64>() / n as f64;
        worst = worst.max((mean - dc_offset(s0, n)).abs());
    }
    ensure(worst < 1e-12, || format!("mean shift off by {worst:e}"))?;

    // BER at 20 dB with Eb/N0 held per bit; 16-PAM keeps the rate measurable
    let cfg = ExperimentConfig {
        schemes: vec![
            Waveform::ecrip(true),
            Waveform::ecrip(false),
            Waveform::ocrip(true),
            Waveform::ocrip(false),
        ],
        order: 16,
        ebn0_db: vec![20.0],
        max_frames: 1_000_000,
        max_errors: 1000,
        seed: 21,
        ..ExperimentConfig::default()
    };
    let res = ber_sweep(&cfg).map_err(e2s)?;
    let mut compared = Vec::new();
    for (with, without) in [("ecrip", "ecrip-nos0"), ("ocrip", "ocrip-nos0")] {
        for (a, b) in res.scheme(with).into_iter().zip(res.scheme(without)) {
            let ia = Interval { low: a.ci_low, high: a.ci_high };
            let ib = Interval { low: b.ci_low, high: b.ci_high };
            ensure(a.errors >= 500 && b.errors >= 500, || format!("too few errors: {a:?} {b:?}"))?;
            ensure(ia.overlaps(&ib), || {
                format!("{with} vs {without}: {:e} {ia:?} vs {:e} {ib:?}", a.value, b.value)
            })?;
            compared.push(format!("{with} {:.3e} / {without} {:.3e}", a.value, b.value));
        }
    }
    Ok(format!(
        "mean = s0/sqrt(N) to {worst:.1e}; 20 dB {} (intervals overlap)",
        compared.join(", ")
    ))
}

fn reproducibility() -> Outcome {
    let mut cfg = ExperimentConfig {
        ebn0_db: vec![4.0, 8.0],
        max_frames: 3000,
        seed: 99,
        ..ExperimentConfig::default()
    };
    cfg.clipnoise.samples = 200_000;
    cfg.degrade.gain_grid = vec![0.06, 0.08];
    cfg.degrade.dc_shifts = vec![0.0, 0.1];
    let dirs = [tempfile::tempdir().map_err(e2s)?, tempfile::tempdir().map_err(e2s)?];
    for d in &dirs {
        ber_sweep(&cfg).map_err(e2s)?.write(d.path(), "ber", true).map_err(e2s)?;
        clipnoise_sweep(&cfg).map_err(e2s)?.write(d.path(), "clipnoise", true).map_err(e2s)?;
        degradation_sweep(DegradeKind::DcShift, &cfg)
            .map_err(e2s)?
            .write(d.path(), "degrade_dc", true)
            .map_err(e2s)?;
    }
    let mut files = 0;
    for stem in ["ber", "clipnoise", "degrade_dc"] {
        for ext in ["csv", "meta.toml", "gp"] {
            let name = format!("{stem}.{ext}");
            let a = std::fs::read(dirs[0].path().join(&name)).map_err(e2s)?;
            let b = std::fs::read(dirs[1].path().join(&name)).map_err(e2s)?;
            ensure(a == b, || format!("{name} differs between runs"))?;
            files += 1;
        }
    }
    Ok(format!("{files} files byte-identical across reruns"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "complexity table", limit: Duration::from_secs(1), run: complexity_table },
        Criterion { id: 2, name: "ISI elimination", limit: Duration::from_secs(10), run: isi_elimination },
        Criterion { id: 3, name: "even/odd lemmas", limit: Duration::from_secs(10), run: appendix_lemmas },
        Criterion { id: 4, name: "clipping-noise closed forms", limit: Duration::from_secs(120), run: clip_closed_forms },
        Criterion { id: 5, name: "equal BER across schemes", limit: Duration::from_secs(300), run: equal_ber },
        Criterion { id: 6, name: "AWGN antipodal oracle", limit: Duration::from_secs(120), run: awgn_oracle },
        Criterion { id: 7, name: "clipping robustness ordering", limit: Duration::from_secs(600), run: clipping_ordering },
        Criterion { id: 8, name: "rate arithmetic", limit: Duration::from_secs(1), run: rate_arithmetic },
        Criterion { id: 9, name: "s0 loading neutrality", limit: Duration::from_secs(600), run: s0_neutrality },
        Criterion { id: 10, name: "reproducibility", limit: Duration::from_secs(600), run: reproducibility },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > c.limit => Err(format!("{d}; took {elapsed:.1?}, limit {:?}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] AC{} {} ({elapsed:.2?}): {detail}", c.id, c.name),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] AC{} {} ({elapsed:.2?}): {detail}", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
