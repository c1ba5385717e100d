//! `b92link`: plan, interrupt, track, run and sweep commands over a TOML
//! scenario file.
//!
//! Exit status: 0 success, 1 runtime or model error, 2 configuration error.

mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use b92link::exec::Execution;
use b92link::sim::{analytic_sweep, run_scenario_with, sweep, AnalyticRow, SimResult};
use b92link::tracking::{closed_loop_sim, select_strategy};
use b92link::turbulence::{interruption_fraction, TurbulenceParams};
use clap::{Args, Parser, Subcommand};

use config::{Config, Overrides};
use output::{num, timestamp, Emit, Summary, Table, TrackSummary};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<b92link::Error> for CliError {
    fn from(e: b92link::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "b92link", version, about = "Free-space B92 link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compensation strategy and boundary distance per configured Cn².
    Plan(Common),
    /// Interruption fraction over the distance grid, one column per Cn².
    Interrupt(Common),
    /// Closed tracking loop on a synthetic wander series.
    Track(Common),
    /// One end-to-end scenario.
    Run(Common),
    /// Scenario repeated over `sweep.values` of `sweep.parameter`.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML). Defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// CSV destination; a `.manifest.toml` is written beside it.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo slot window, overriding the config.
    #[arg(long)]
    slots: Option<u64>,
    /// Closed-form quantities only; skips the Monte Carlo.
    #[arg(long)]
    analytic_only: bool,
}

impl Common {
    fn load(&self) -> Result<Config, CliError> {
        let o = Overrides {
            seed: self.seed,
            slots: self.slots,
        };
        match &self.config {
            Some(p) => Config::load(p, o),
            None => Config::parse("", o),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("b92link: {e}");
            ExitCode::from(match e {
                CliError::Config(_) => 2,
                CliError::Runtime(_) => 1,
            })
        }
    }
}

fn dispatch(cmd: &Command) -> Result<(), CliError> {
    let (name, args) = match cmd {
        Command::Plan(a) => ("plan", a),
        Command::Interrupt(a) => ("interrupt", a),
        Command::Track(a) => ("track", a),
        Command::Run(a) => ("run", a),
        Command::Sweep(a) => ("sweep", a),
    };
    let config = args.load()?;
    let emit = Emit {
        command: name,
        config: &config,
        started_utc: timestamp(),
        out: args.out.as_deref(),
    };
    match cmd {
        Command::Plan(_) => plan(&config, &emit),
        Command::Interrupt(_) => interrupt(&config, &emit),
        Command::Track(_) => track(&config, &emit),
        Command::Run(a) => run(&config, &emit, a.analytic_only),
        Command::Sweep(a) => run_sweep(&config, &emit, a.analytic_only),
    }
}

fn plan(c: &Config, emit: &Emit) -> Result<(), CliError> {
    let mut t = Table::new(["cn2", "range_m", "strategy", "aperture_ratio", "boundary_distance_m", "failed"]);
    for &cn2 in &c.plan.cn2 {
        let turb = TurbulenceParams { cn2 };
        let d = select_strategy(&turb, &c.link.tx_beam, &c.link)?;
        let boundary = d.boundary.map(|b| b.distance_m);
        let failed: Vec<String> = d.failed.iter().map(|f| format!("{f:?}")).collect();
        println!(
            "Cn2 {cn2:e} at {} m: {:?}, aperture ratio {:.4}, boundary {}{}",
            c.link.range_m,
            d.strategy,
            d.aperture_ratio,
            boundary.map_or("none".into(), |b| format!("{b:.1} m")),
            if failed.is_empty() { String::new() } else { format!(" [{}]", failed.join(", ")) }
        );
        t.push(vec![
            num(cn2),
            num(c.link.range_m),
            format!("{:?}", d.strategy),
            num(d.aperture_ratio),
            boundary.map(num).unwrap_or_default(),
            failed.join(";"),
        ]);
    }
    if emit.out.is_some() {
        emit.table(&t, &Summary::default())?;
    }
    Ok(())
}

fn interrupt(c: &Config, emit: &Emit) -> Result<(), CliError> {
    let s = &c.interrupt;
    let capture = s.capture_radius_m.unwrap_or_else(|| c.link.rx_aperture_radius());
    let mut t = Table::new(
        std::iter::once("distance_m".to_string()).chain(s.cn2.iter().map(|v| format!("cn2={}", num(*v)))),
    );
    for &l in &s.distances_m {
        let mut row = vec![num(l)];
        for &cn2 in &s.cn2 {
            row.push(num(interruption_fraction(&TurbulenceParams { cn2 }, &c.link.tx_beam, l, capture)?));
        }
        t.push(row);
    }
    emit.table(&t, &Summary::default())
}

fn track(c: &Config, emit: &Emit) -> Result<(), CliError> {
    let r = closed_loop_sim(&c.track_process(), &c.track_loop())?;
    let mut t = Table::new(["t", "wander_x", "wander_y", "residual_x", "residual_y"]);
    for k in 0..r.wander.len() {
        t.push(vec![
            num(r.wander.time(k)),
            num(r.wander.x[k]),
            num(r.wander.y[k]),
            num(r.residual_series.x[k]),
            num(r.residual_series.y[k]),
        ]);
    }
    let summary = TrackSummary {
        rms_residual: r.rms_residual,
        open_loop_rms: r.open_loop_rms,
        rejection_db: r.rejection_db,
        saturation_fraction: r.saturation_fraction,
        diverged: r.diverged,
    };
    eprintln!(
        "rms residual {:e} (open loop {:e}), rejection {:.3} dB, saturation {:.4}{}",
        summary.rms_residual,
        summary.open_loop_rms,
        summary.rejection_db,
        summary.saturation_fraction,
        if summary.diverged { ", DIVERGED" } else { "" }
    );
    emit.table(
        &t,
        &Summary {
            tracking: Some(summary),
            ..Summary::default()
        },
    )
}

const RUN_COLUMNS: [&str; 6] = [
    "qber",
    "sifted_rate_bps",
    "secret_key_rate_bps",
    "availability",
    "background_rate_hz",
    "abort",
];

const ANALYTIC_COLUMNS: [&str; 7] = [
    "rytov_var",
    "w_lt_m",
    "wander_var_m2",
    "aperture_ratio",
    "interruption_fraction",
    "strategy",
    "boundary_distance_m",
];

fn run_row(value: f64, r: &SimResult) -> Vec<String> {
    let s = &r.stats;
    vec![
        num(value),
        s.qber.map(num).unwrap_or_default(),
        num(s.sifted_rate_bps),
        num(s.secret_key_rate_bps),
        num(r.availability),
        num(s.background_rate_hz),
        s.abort.to_string(),
    ]
}

fn analytic_row(r: &AnalyticRow) -> Vec<String> {
    vec![
        num(r.value),
        num(r.turbulence.rytov_var),
        num(r.turbulence.w_lt),
        num(r.turbulence.wander_var),
        num(r.aperture_ratio),
        num(r.interruption_fraction),
        format!("{:?}", r.strategy),
        r.boundary_distance_m.map(num).unwrap_or_default(),
    ]
}

fn header(first: &str, rest: &[&str]) -> Table {
    Table::new(std::iter::once(first).chain(rest.iter().copied()))
}

fn run(c: &Config, emit: &Emit, analytic_only: bool) -> Result<(), CliError> {
    const PATH: &str = "link.range_m";
    let s = c.scenario();
    if analytic_only {
        let mut t = header(PATH, &ANALYTIC_COLUMNS);
        for r in analytic_sweep(&s, PATH, &[s.link.range_m])? {
            t.push(analytic_row(&r));
        }
        return emit.table(&t, &Summary::default());
    }
    let r = run_scenario_with(&s, Execution::default())?;
    eprintln!(
        "QBER {}, sifted {:.4e} bps, secret key {:.4e} bps, availability {:.4}{}",
        r.stats.qber.map_or("n/a".into(), |q| format!("{q:.5}")),
        r.stats.sifted_rate_bps,
        r.stats.secret_key_rate_bps,
        r.availability,
        if r.stats.abort { ", ABORT" } else { "" }
    );
    let mut t = header(PATH, &RUN_COLUMNS);
    t.push(run_row(s.link.range_m, &r));
    emit.table(
        &t,
        &Summary {
            assumption_flags: r.assumption_flags.clone(),
            tracking: None,
        },
    )
}

fn run_sweep(c: &Config, emit: &Emit, analytic_only: bool) -> Result<(), CliError> {
    let s = c.scenario();
    let path = c.sweep.parameter.as_str();
    if analytic_only {
        let mut t = header(path, &ANALYTIC_COLUMNS);
        for r in analytic_sweep(&s, path, &c.sweep.values)? {
            t.push(analytic_row(&r));
        }
        return emit.table(&t, &Summary::default());
    }
    let rows = sweep(&s, path, &c.sweep.values, Execution::default())?;
    let mut t = header(path, &RUN_COLUMNS);
    let mut flags = Vec::new();
    for r in &rows {
        for f in &r.result.assumption_flags {
            if !flags.contains(f) {
                flags.push(*f);
            }
        }
        t.push(run_row(r.value, &r.result));
    }
    emit.table(
        &t,
        &Summary {
            assumption_flags: flags,
            tracking: None,
        },
    )
}
