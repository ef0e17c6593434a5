// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crip_core::harness::{
    ber_sweep, clipnoise_sweep, complexity_report, degradation_sweep, run_selftest, ChannelSpec,
    ClipNoiseSource, DegradeKind, ExperimentConfig, SweepResult,
};
use crip_core::{Error, Result};

mod grid;

#[derive(Parser)]
#[command(name = "crip", version, about = "Real-valued optical OFDM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER against Eb/N0 with an ideal front end.
    Ber {
        #[command(flatten)]
        common: Common,
        /// Eb/N0 points in dB: `a,b,c` or `start:step:stop`.
        #[arg(long)]
        ebn0: Option<String>,
    },
    /// Clipping-noise power against drive variance.
    Clipnoise {
        #[command(flatten)]
        common: Common,
        /// Drive variances: `a,b,c` or `start:step:stop`.
        #[arg(long)]
        sigma2: Option<String>,
        /// Samples per point.
        #[arg(long)]
        samples: Option<u64>,
        /// `gaussian` or `frames`.
        #[arg(long)]
        source: Option<String>,
    },
    /// BER against a DC bias shift at each scheme's optimum gain.
    DegradeDc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        degrade: DegradeArgs,
        /// Bias shifts in volts.
        #[arg(long)]
        shifts: Option<String>,
    },
    /// BER against a multiple of each scheme's optimum gain.
    DegradeGain {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        degrade: DegradeArgs,
        /// Gain multipliers.
        #[arg(long)]
        multipliers: Option<String>,
    },
    /// Transmitter operation counts.
    Complexity {
        #[command(flatten)]
        common: Common,
        /// Transform sizes, e.g. `8,16,32`.
        #[arg(long = "sizes")]
        sizes: Option<String>,
    },
    /// Quick consistency checks.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Frames per point.
    #[arg(long)]
    trials: Option<u64>,
    /// Bit errors per point before stopping early.
    #[arg(long)]
    max_errors: Option<u64>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Subcarriers per frame.
    #[arg(long)]
    n: Option<usize>,
    /// Cyclic prefix length.
    #[arg(long)]
    cp: Option<usize>,
    /// Per-dimension modulation depth.
    #[arg(long)]
    m: Option<u32>,
    /// `identity`, `exp:<memory>:<tau>`, `taps:<h0>,…` or `file:<path>`; repeatable.
    #[arg(long = "channel")]
    channels: Vec<String>,
    /// Skip the gnuplot script.
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args)]
struct DegradeArgs {
    /// Operating Eb/N0 in dB.
    #[arg(long)]
    ebn0: Option<f64>,
    /// Candidate gains for the optimum search.
    #[arg(long)]
    gain_grid: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out_dir {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.max_frames = v;
        }
        if let Some(v) = self.max_errors {
            cfg.max_errors = v;
        }
        if let Some(list) = &self.schemes {
            cfg.schemes = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = self.n {
            cfg.n_subcarriers = v;
        }
        if let Some(v) = self.cp {
            cfg.cp_len = v;
        }
        if let Some(v) = self.m {
            cfg.order = v;
        }
        if !self.channels.is_empty() {
            cfg.channels = self
                .channels
                .iter()
                .map(|s| s.parse::<ChannelSpec>())
                .collect::<Result<_>>()?;
        }
        if self.no_plot {
            cfg.plot = false;
        }
        Ok(cfg)
    }
}

impl DegradeArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(v) = self.ebn0 {
            cfg.degrade.ebn0_db = v;
        }
        if let Some(g) = &self.gain_grid {
            cfg.degrade.gain_grid = grid::parse(g)?;
        }
        Ok(())
    }
}

fn emit(res: &SweepResult, cfg: &ExperimentConfig, stem: &str) -> Result<()> {
    for path in res.write(&cfg.out_dir, stem, cfg.plot)? {
        println!("wrote {}", path.display());
    }
    for note in &res.meta.notes {
        println!("note: {note}");
    }
    Ok(())
}

fn print_ber(res: &SweepResult) {
    println!("{:<12} {:>10} {:>12} {:>12} {:>10} {:>12}", "scheme", "x", "BER", "+/-", "errors", "bits");
    for r in res.ber_records() {
        println!(
            "{:<12} {:>10} {:>12.4e} {:>12.2e} {:>10} {:>12}",
            r.scheme, r.x, r.value, r.ci_half_width, r.errors, r.trials
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ber { common, ebn0 } => {
            let mut cfg = common.resolve()?;
            if let Some(g) = ebn0 {
                cfg.ebn0_db = grid::parse(&g)?;
            }
            let res = ber_sweep(&cfg)?;
            print_ber(&res);
            emit(&res, &cfg, "ber")
        }
        Command::Clipnoise {
            common,
            sigma2,
            samples,
            source,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(g) = sigma2 {
                cfg.clipnoise.sigma2 = grid::parse(&g)?;
            }
            if let Some(s) = samples {
                cfg.clipnoise.samples = s;
            }
            if let Some(s) = source {
                cfg.clipnoise.source = match s.as_str() {
                    "gaussian" => ClipNoiseSource::Gaussian,
                    "frames" => ClipNoiseSource::Frames,
                    other => return Err(Error::Config(format!("unknown source {other:?}"))),
                };
            }
            let res = clipnoise_sweep(&cfg)?;
            println!(
                "{:>10} {:>14} {:>14} {:>14} {:>14}",
                "sigma_x2", "single", "ocrip", "mc single", "mc ocrip"
            );
            for r in res.clipnoise_records() {
                println!(
                    "{:>10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
                    r.sigma_x2, r.analytic_single, r.analytic_ocrip, r.mc_single, r.mc_ocrip
                );
            }
            emit(&res, &cfg, "clipnoise")
        }
        Command::DegradeDc {
            common,
            degrade,
            shifts,
        } => {
            let mut cfg = common.resolve()?;
            degrade.apply(&mut cfg)?;
            if let Some(g) = shifts {
                cfg.degrade.dc_shifts = grid::parse(&g)?;
            }
            let res = degradation_sweep(DegradeKind::DcShift, &cfg)?;
            print_ber(&res);
            emit(&res, &cfg, "degrade_dc")
        }
        Command::DegradeGain {
            common,
            degrade,
            multipliers,
        } => {
            let mut cfg = common.resolve()?;
            degrade.apply(&mut cfg)?;
            if let Some(g) = multipliers {
                cfg.degrade.gain_multipliers = grid::parse(&g)?;
            }
            let res = degradation_sweep(DegradeKind::Gain, &cfg)?;
            print_ber(&res);
            emit(&res, &cfg, "degrade_gain")
        }
        Command::Complexity { common, sizes } => {
            let mut cfg = common.resolve()?;
            if let Some(s) = sizes {
                cfg.complexity_n = grid::parse_sizes(&s)?;
            }
            let table = complexity_report(&cfg.complexity_n)?;
            print!("{}", table.render());
            std::fs::create_dir_all(&cfg.out_dir)
                .map_err(|e| Error::Io { path: cfg.out_dir.clone(), source: e })?;
            let path = cfg.out_dir.join("complexity.csv");
            std::fs::write(&path, table.to_csv())
                .map_err(|e| Error::Io { path: path.clone(), source: e })?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Selftest => {
            let report = run_selftest();
            for c in &report.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", c.name, c.detail);
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Error::Domain("selftest failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
