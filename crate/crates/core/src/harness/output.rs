//! Sweep results and the CSV, metadata and gnuplot files written for them.
//!
//! Floats are printed with `{}` (shortest round-trip form) and nothing
//! time-dependent is written, so a rerun with the same config and seed
//! produces byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Error, Result};

/// Version string recorded in every metadata file.
pub fn version_string() -> String {
    match option_env!("CRIP_GIT_DESCRIBE") {
        Some(rev) => format!("crip-core {} ({rev})", env!("CARGO_PKG_VERSION")),
        None => format!("crip-core {}", env!("CARGO_PKG_VERSION")),
    }
}

pub const INTERVAL_METHOD: &str = "wilson-95";

/// One BER (or other binomial rate) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scheme: String,
    pub x: f64,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_half_width: f64,
    pub errors: u64,
    /// Bits examined.
    pub trials: u64,
    pub frames: u64,
    /// Drive RMS at the front-end input.
    pub gain: f64,
}

impl BerRecord {
    pub const COLUMNS: [&'static str; 10] = [
        "scheme",
        "x",
        "value",
        "ci_low",
        "ci_high",
        "ci_half_width",
        "errors",
        "trials",
        "frames",
        "gain",
    ];
}

/// One clip-noise grid point. `mc_stderr` is the larger of the two
/// Monte-Carlo standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipNoiseRecord {
    pub sigma_x2: f64,
    pub analytic_single: f64,
    pub analytic_ocrip: f64,
    pub mc_single: f64,
    pub mc_ocrip: f64,
    pub mc_stderr: f64,
}

impl ClipNoiseRecord {
    pub const COLUMNS: [&'static str; 6] = [
        "sigma_x2",
        "analytic_single",
        "analytic_ocrip",
        "mc_single",
        "mc_ocrip",
        "mc_stderr",
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Ber(Vec<BerRecord>),
    ClipNoise(Vec<ClipNoiseRecord>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub interval_method: String,
    pub max_frames: u64,
    pub max_errors: u64,
    pub x_label: String,
    pub y_label: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Records,
    pub meta: Metadata,
}

impl SweepResult {
    pub fn ber_records(&self) -> &[BerRecord] {
        match &self.records {
            Records::Ber(r) => r,
            Records::ClipNoise(_) => &[],
        }
    }

    pub fn clipnoise_records(&self) -> &[ClipNoiseRecord] {
        match &self.records {
            Records::ClipNoise(r) => r,
            Records::Ber(_) => &[],
        }
    }

    /// Records of one scheme in sweep order.
    pub fn scheme(&self, name: &str) -> Vec<&BerRecord> {
        self.ber_records().iter().filter(|r| r.scheme == name).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.records {
            Records::Ber(rows) => {
                out.push_str(&BerRecord::COLUMNS.join(","));
                out.push('\n');
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.scheme,
                        r.x,
                        r.value,
                        r.ci_low,
                        r.ci_high,
                        r.ci_half_width,
                        r.errors,
                        r.trials,
                        r.frames,
                        r.gain
                    );
                }
            }
            Records::ClipNoise(rows) => {
                out.push_str(&ClipNoiseRecord::COLUMNS.join(","));
                out.push('\n');
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.sigma_x2,
                        r.analytic_single,
                        r.analytic_ocrip,
                        r.mc_single,
                        r.mc_ocrip,
                        r.mc_stderr
                    );
                }
            }
        }
        out
    }

    pub fn metadata_toml(&self) -> Result<String> {
        toml::to_string(&self.meta)
            .map_err(|e| Error::Config(format!("cannot serialise metadata: {e}")))
    }

    /// gnuplot script reading `csv_name` from the script's own directory.
    pub fn gnuplot_script(&self, csv_name: &str, image_name: &str) -> String {
        let m = &self.meta;
        let mut s = String::new();
        let _ = writeln!(s, "# {} sweep, seed {}", m.command, m.seed);
        s.push_str("set datafile separator ','\n");
        s.push_str("set terminal pngcairo size 900,600\n");
        let _ = writeln!(s, "set output '{image_name}'");
        let _ = writeln!(s, "set xlabel '{}'", m.x_label);
        let _ = writeln!(s, "set ylabel '{}'", m.y_label);
        s.push_str("set logscale y\nset grid\nset key outside right\n");
        match &self.records {
            Records::Ber(rows) => {
                let mut schemes: Vec<&str> = Vec::new();
                for r in rows {
                    if !schemes.contains(&r.scheme.as_str()) {
                        schemes.push(&r.scheme);
                    }
                }
                let plots: Vec<String> = schemes
                    .iter()
                    .map(|name| {
                        format!(
                            "'{csv_name}' skip 1 using 2:(strcol(1) eq '{name}' && $3 > 0 ? $3 : 1/0) \
                             with linespoints title '{name}'"
                        )
                    })
                    .collect();
                let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
            }
            Records::ClipNoise(_) => {
                s.push_str("set logscale x\n");
                let _ = writeln!(
                    s,
                    "plot '{csv_name}' skip 1 using 1:2 with lines title 'single (analytic)', \\\n     \
                     '{csv_name}' skip 1 using 1:3 with lines title 'O-CRIP (analytic)', \\\n     \
                     '{csv_name}' skip 1 using 1:4 with points title 'single (MC)', \\\n     \
                     '{csv_name}' skip 1 using 1:5 with points title 'O-CRIP (MC)'"
                );
            }
        }
        s
    }

    /// Writes `<stem>.csv`, `<stem>.meta.toml` and, if asked, `<stem>.gp`.
    pub fn write(&self, dir: &Path, stem: &str, plot: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_name = format!("{stem}.csv");
        let mut files = vec![
            (dir.join(&csv_name), self.to_csv()),
            (dir.join(format!("{stem}.meta.toml")), self.metadata_toml()?),
        ];
        if plot {
            let script = self.gnuplot_script(&csv_name, &format!("{stem}.png"));
            files.push((dir.join(format!("{stem}.gp")), script));
        }
        let mut written = Vec::with_capacity(files.len());
        for (path, body) in files {
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}
