//! Quick end-to-end checks that the installed build behaves.

use crate::channel::{ChannelModel, RngStream};
use crate::clipnoise::{clip_noise_power_single, mc_clip_noise_single, ClipRegime};
use crate::frames::ModulationSpec;
use crate::modem::{run_frame, LinkConfig, Waveform};
use crate::transforms::{idft, op_count, Method, OpCount};
use crate::Complex64;

use super::config::ExperimentConfig;
use super::stats::bpsk_ber;
use super::sweep::ber_sweep;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn op_table() -> Result<String, String> {
    let got = op_count(Method::OCrip, 64).map_err(|e| e.to_string())?;
    let herm = op_count(Method::Hermitian, 512).map_err(|e| e.to_string())?;
    if got == OpCount::new(98, 420) && herm == OpCount::new(3076, 12292) {
        Ok("O-CRIP N=64 (98, 420), Hermitian N=512 (3076, 12292)".into())
    } else {
        Err(format!("got {got:?} and {herm:?}"))
    }
}

fn unitary() -> Result<String, String> {
    let mut rng = RngStream::new(11, 0);
    let x: Vec<Complex64> = (0..64)
        .map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal()))
        .collect();
    let y = idft(&x).map_err(|e| e.to_string())?;
    let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let rel = (ex - ey).abs() / ex;
    if rel < 1e-12 {
        Ok(format!("energy preserved to {rel:e}"))
    } else {
        Err(format!("energy ratio off by {rel:e}"))
    }
}

fn noiseless_links() -> Result<String, String> {
    let ch = ChannelModel::exponential(8, 2.0, 64).map_err(|e| e.to_string())?;
    for (w, spec) in [
        (Waveform::HERMITIAN, ModulationSpec::qam(8)),
        (Waveform::ecrip(true), ModulationSpec::pam(8)),
        (Waveform::ocrip(true), ModulationSpec::pam(8)),
    ] {
        let spec = spec.map_err(|e| e.to_string())?;
        let link = LinkConfig::new(w, spec, 64, 8, ch.clone(), None).map_err(|e| e.to_string())?;
        let mut rng = RngStream::new(3, 0);
        for _ in 0..20 {
            let bits = rng.bits(link.bits_per_frame());
            let out = run_frame(&bits, &link, &mut rng).map_err(|e| e.to_string())?;
            if out.bit_errors != 0 {
                return Err(format!("{w}: {} bit errors without noise", out.bit_errors));
            }
        }
    }
    Ok("hermitian, ecrip, ocrip error-free over a 9-tap channel".into())
}

fn clip_closed_form() -> Result<String, String> {
    let regime = ClipRegime::new(0.1, -0.25, 0.25).map_err(|e| e.to_string())?;
    let analytic = clip_noise_power_single(&regime).map_err(|e| e.to_string())?;
    let mc = mc_clip_noise_single(&regime, 1_000_000, 5);
    let rel = (mc.mean - analytic).abs() / analytic;
    if rel < 0.03 {
        Ok(format!("closed form {analytic:.6e}, sampled within {:.2}%", 100.0 * rel))
    } else {
        Err(format!("closed form {analytic:e} vs sampled {:e}", mc.mean))
    }
}

fn bpsk_point() -> Result<String, String> {
    let cfg = ExperimentConfig {
        schemes: vec![Waveform::ecrip(true)],
        order: 2,
        ebn0_db: vec![4.0],
        max_frames: 20_000,
        max_errors: 400,
        ..ExperimentConfig::default()
    };
    let res = ber_sweep(&cfg).map_err(|e| e.to_string())?;
    let r = &res.ber_records()[0];
    let expect = bpsk_ber(4.0);
    let rel = (r.value - expect).abs() / expect;
    if rel < 0.2 {
        Ok(format!("BER {:.4e} vs Q(sqrt(2Eb/N0)) {expect:.4e}", r.value))
    } else {
        Err(format!("BER {:e} vs {expect:e}", r.value))
    }
}

pub fn run_selftest() -> SelftestReport {
    SelftestReport {
        checks: vec![
            check("operation counts", op_table()),
            check("unitary transform", unitary()),
            check("noiseless multipath recovery", noiseless_links()),
            check("clipping noise closed form", clip_closed_form()),
            check("antipodal BER at 4 dB", bpsk_point()),
        ],
    }
}
