use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ris_parafac::harness::config::{parse_list, Overrides, Preset, SweepConfig};
use ris_parafac::harness::{emit_results, run_sweep, OutputFormat, SweepVariable};
use ris_parafac::Error;

#[derive(Parser)]
#[command(name = "ris-parafac", version, about = "Monte Carlo evaluation of PARAFAC channel estimation for RIS-assisted MISO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NMSE versus SNR, with genie-aided baselines.
    SweepSnr(RunArgs),
    /// NMSE versus SNR for several RIS sizes.
    SweepN(RunArgs),
    /// NMSE versus SNR for several training lengths.
    SweepP(RunArgs),
    /// One trial at one SNR.
    SingleTrial(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file read before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// BS antennas.
    #[arg(long)]
    m: Option<usize>,
    /// Users.
    #[arg(long)]
    k: Option<usize>,
    /// RIS elements; a list or start:stop:step for sweep-n.
    #[arg(long)]
    n: Option<String>,
    /// Phase configurations; a list or start:stop:step for sweep-p.
    #[arg(long)]
    p: Option<String>,
    /// Pilot length per phase configuration.
    #[arg(long)]
    t: Option<usize>,
    /// SNR values in dB, e.g. `0,10,20` or `0:30:5`.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// ALS stopping threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Run the genie-aided LS baselines; `--baselines` alone means true.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    baselines: Option<bool>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunArgs {
    fn overrides(&self) -> ris_parafac::Result<Overrides> {
        Ok(Overrides {
            m: self.m,
            k: self.k,
            n: self.n.as_deref().map(parse_list).transpose()?,
            p: self.p.as_deref().map(parse_list).transpose()?,
            t: self.t,
            snr: self.snr.as_deref().map(parse_list).transpose()?,
            trials: self.trials,
            seed: self.seed,
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            pinv_tol: None,
            baselines: self.baselines,
            out: self.out.clone(),
            format: self.format,
        })
    }
}

fn build_config(command: &Command) -> ris_parafac::Result<SweepConfig> {
    let (preset, args) = match command {
        Command::SweepSnr(a) => (Preset::Snr, a),
        Command::SweepN(a) => (Preset::Elements, a),
        Command::SweepP(a) => (Preset::Phases, a),
        Command::SingleTrial(a) => (Preset::Snr, a),
    };
    let mut cfg = SweepConfig::preset(preset);
    if let Command::SingleTrial(_) = command {
        cfg.trials = 1;
        cfg.snr_grid_db = vec![20.0];
    }
    if let Some(path) = &args.config {
        cfg.apply(&Overrides::from_file(path)?)?;
    }
    cfg.apply(&args.overrides()?)?;
    if let Command::SingleTrial(_) = command {
        if cfg.trials != 1 || cfg.snr_grid_db.len() != 1 || cfg.sweep != SweepVariable::Snr {
            return Err(Error::Config("single-trial takes one SNR value and one trial".into()));
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = build_config(&cli.command).and_then(|cfg| {
        let res = run_sweep(&cfg)?;
        emit_results(&res, cfg.output.path.as_deref(), cfg.output.format)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Preflight(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
