use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use framesync::channel::ChannelKind;
use framesync::complexity::complexity_table;
use framesync::frame_model::FrameProfile;
use framesync::harness::{emit_results, parse_methods, run_sweep, write_results, ExperimentConfig, SnrGrid};
use framesync::Error;

/// Monte-Carlo frame synchronization experiments.
#[derive(Parser, Debug)]
#[command(name = "framesync", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the SNR grid and write EFLR per method and point as CSV.
    Simulate(SimulateArgs),
    /// Print reference tables.
    Tables(TablesArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// TOML file with the same keys as the flags (snake_case); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    burst_bytes: Option<usize>,
    #[arg(long)]
    lmin: Option<usize>,
    #[arg(long)]
    lmax: Option<usize>,
    /// MIN:MAX:STEP in dB.
    #[arg(long)]
    snr: Option<String>,
    /// awgn or rayleigh.
    #[arg(long)]
    channel: Option<String>,
    /// Comma-separated subset of trellis, st, mu, hard.
    #[arg(long)]
    methods: Option<String>,
    /// Base window length of the sliding trellis.
    #[arg(long)]
    window_bytes: Option<usize>,
    /// Trials per SNR point.
    #[arg(long)]
    bursts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed noise variance at every point.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Count the padding frame in the EFLR.
    #[arg(long)]
    include_padding: bool,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TablesArgs {
    /// Node counts of the full and sliding trellises.
    #[arg(long)]
    complexity: bool,
    /// Comma-separated burst lengths in bytes.
    #[arg(long, default_value = "1800,8000,16000,24000")]
    burst_lens: String,
    #[arg(long, default_value_t = 480)]
    window_bytes: usize,
    /// Random bursts averaged for the sliding count.
    #[arg(long, default_value_t = 100)]
    bursts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn load_config(args: &SimulateArgs) -> Result<ExperimentConfig, Failure> {
    let mut c = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.burst_bytes {
        c.burst_bytes = v;
    }
    if let Some(v) = args.lmin {
        c.lmin = v;
    }
    if let Some(v) = args.lmax {
        c.lmax = v;
    }
    if let Some(v) = &args.snr {
        c.snr = v.parse::<SnrGrid>()?;
    }
    if let Some(v) = &args.channel {
        c.channel = v.parse::<ChannelKind>()?;
    }
    if let Some(v) = &args.methods {
        c.methods = parse_methods(v)?;
    }
    if let Some(v) = args.window_bytes {
        c.window_bytes = v;
    }
    if let Some(v) = args.bursts {
        c.bursts = v;
    }
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if args.sigma2.is_some() {
        c.sigma2 = args.sigma2;
    }
    if args.include_padding {
        c.include_padding = true;
    }
    if args.out.is_some() {
        c.out.clone_from(&args.out);
    }
    c.validate()?;
    Ok(c)
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let config = load_config(args)?;
    info!("{config:?}");
    let table = run_sweep(&config)?;
    match &config.out {
        Some(path) => emit_results(&table, path)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?,
        None => write_results(&table, std::io::stdout().lock())?,
    }
    Ok(())
}

fn tables(args: &TablesArgs) -> Result<(), Failure> {
    if !args.complexity {
        return Err(Failure::Config("nothing to print: pass --complexity".into()));
    }
    let lens = args
        .burst_lens
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Failure::Config(format!("bad burst length `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = complexity_table(&FrameProfile::wimax(), &lens, args.window_bytes, args.bursts, args.seed)?;
    let mut out = std::io::stdout().lock();
    let io = |e: std::io::Error| Failure::Io(e.to_string());
    writeln!(
        out,
        "{:>8} {:>12} {:>12} {:>12} {:>12} {:>8} {:>8}",
        "L", "full_form", "full_count", "st_form", "st_count", "gain_f", "gain_c"
    )
    .map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{:>8} {:>12.0} {:>12} {:>12.0} {:>12.0} {:>8.2} {:>8.2}",
            r.burst_len,
            r.trellis_formula,
            r.trellis_counted,
            r.sliding_formula,
            r.sliding_counted,
            r.gain_formula,
            r.gain_counted
        )
        .map_err(io)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Tables(args) => tables(args),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("framesync: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("framesync: {msg}");
            ExitCode::from(2)
        }
    }
}
