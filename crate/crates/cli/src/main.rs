mod config;
mod error;
mod output;
mod presets;
mod run;

use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leaky_staging::Execution;
use serde_json::{Map, Value};

use crate::config::{Overrides, PeakPolicy};
use crate::error::{CliError, Result};
use crate::output::{render_csv, render_json, Envelope, Format, Metadata};

#[derive(Parser, Debug)]
#[command(
    name = "leaky-staging",
    version,
    about = "Threshold-safe staging of a load into a leaky reservoir"
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Run configuration (TOML, or JSON for a `.json` extension).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Start from a shipped preset (see `presets`).
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Absolute tolerance for threshold comparisons.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Omit the generation timestamp from the metadata.
    #[arg(long, global = true)]
    no_meta_time: bool,

    /// Evaluate sweeps on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(flatten)]
    params: ParamFlags,
}

#[derive(Args, Debug, Default)]
struct ParamFlags {
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    rho: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-release exposure E(q).
    Exposure {
        /// Release sizes (comma separated or repeated).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        q: Vec<f64>,
    },
    /// Exposure-minimising split of a load under complete relaxation.
    Split {
        #[arg(long)]
        load: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Cost-optimal release count with a per-release overhead.
    Overhead {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        load: Option<f64>,
        #[arg(long)]
        overhead: Option<f64>,
    },
    /// Peak-minimising releases at a fixed carry-over.
    Peak {
        #[arg(long)]
        load: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        initial_level: Option<f64>,
        #[arg(long, value_enum)]
        policy: Option<PeakPolicy>,
    },
    /// Feasibility of a load within a fixed horizon.
    Horizon {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        load: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Release counts to tabulate (comma separated or repeated).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        n: Vec<u64>,
    },
    /// Envelope and full-system trajectories for an impulse schedule.
    Simulate {
        /// Impulse as `time:size` (comma separated or repeated).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        event: Vec<String>,
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long)]
        a0: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Phase-diagram tables.
    Phase {
        /// a, b, c or all.
        #[arg(long)]
        panel: Option<String>,
        #[arg(long)]
        resolve_integers: bool,
    },
    /// List the shipped presets.
    Presets,
}

fn set<T: Into<Value>>(map: &mut Map<String, Value>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        map.insert(key.to_string(), v.into());
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exposure { .. } => "exposure",
            Command::Split { .. } => "split",
            Command::Overhead { .. } => "overhead",
            Command::Peak { .. } => "peak",
            Command::Horizon { .. } => "horizon",
            Command::Simulate { .. } => "simulate",
            Command::Phase { .. } => "phase",
            Command::Presets => "presets",
        }
    }

    fn overrides(&self) -> Result<Map<String, Value>> {
        let mut m = Map::new();
        match self {
            Command::Exposure { q } => {
                if !q.is_empty() {
                    set(&mut m, "q", Some(q.clone()));
                }
            }
            Command::Split { load, n } => {
                set(&mut m, "load", *load);
                set(&mut m, "n", *n);
            }
            Command::Overhead {
                r,
                k,
                load,
                overhead,
            } => {
                set(&mut m, "r", *r);
                set(&mut m, "k", *k);
                set(&mut m, "load", *load);
                set(&mut m, "overhead", *overhead);
            }
            Command::Peak {
                load,
                n,
                lambda,
                spacing,
                initial_level,
                policy,
            } => {
                set(&mut m, "load", *load);
                set(&mut m, "n", *n);
                set(&mut m, "lambda", *lambda);
                set(&mut m, "spacing", *spacing);
                set(&mut m, "initial_level", *initial_level);
                set(
                    &mut m,
                    "policy",
                    policy.map(|p| serde_json::to_value(p).expect("policy")),
                );
            }
            Command::Horizon {
                r,
                load,
                h,
                horizon,
                n,
            } => {
                set(&mut m, "r", *r);
                set(&mut m, "load", *load);
                set(&mut m, "h", *h);
                set(&mut m, "horizon", *horizon);
                if !n.is_empty() {
                    set(&mut m, "n", Some(n.clone()));
                }
            }
            Command::Simulate {
                event,
                s0,
                a0,
                horizon,
                step,
            } => {
                if !event.is_empty() {
                    let pairs = event
                        .iter()
                        .map(|e| parse_event(e))
                        .collect::<Result<Vec<_>>>()?;
                    m.insert(
                        "schedule".into(),
                        serde_json::to_value(pairs).expect("pairs"),
                    );
                }
                set(&mut m, "s0", *s0);
                set(&mut m, "a0", *a0);
                set(&mut m, "horizon", *horizon);
                set(&mut m, "step", *step);
            }
            Command::Phase {
                panel,
                resolve_integers,
            } => {
                set(&mut m, "panel", panel.clone());
                if *resolve_integers {
                    set(&mut m, "resolve_integers", Some(true));
                }
            }
            Command::Presets => {}
        }
        Ok(m)
    }
}

fn parse_event(text: &str) -> Result<(f64, f64)> {
    let bad = || error::config_err(format!("--event expects `time:size`, got `{text}`"));
    let (t, q) = text.split_once(':').ok_or_else(bad)?;
    Ok((
        t.trim().parse().map_err(|_| bad())?,
        q.trim().parse().map_err(|_| bad())?,
    ))
}

fn execute(cli: &Cli) -> Result<u8> {
    if let Some(Command::Presets) = cli.command {
        let mut out = String::new();
        for p in presets::PRESETS {
            out.push_str(&format!("{:<18}{}\n", p.name, p.summary));
        }
        emit(cli, &out)?;
        return Ok(0);
    }

    let doc = match (&cli.config, &cli.preset) {
        (Some(path), _) => config::read_document(path)?,
        (None, Some(name)) => presets::load(name)?,
        (None, None) => Map::new(),
    };
    let mut overrides = Overrides {
        tol: cli.tol,
        ..Overrides::default()
    };
    set(&mut overrides.params, "beta", cli.params.beta);
    set(&mut overrides.params, "mu", cli.params.mu);
    set(&mut overrides.params, "delta", cli.params.delta);
    set(&mut overrides.params, "rho", cli.params.rho);
    if let Some(cmd) = &cli.command {
        overrides.command = cmd.overrides()?;
    }
    let resolved = config::resolve(doc, cli.command.as_ref().map(Command::name), overrides)?;

    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let report = run::run(&resolved, exec)?;
    let metadata = Metadata {
        tool: "leaky-staging",
        version: env!("CARGO_PKG_VERSION"),
        command: resolved.command.name(),
        config: resolved.to_json(),
        delta_c: resolved.model()?.map(|p| p.delta_c()),
        dimensionless: report.dimensionless.clone(),
        generated_at_unix: (!cli.no_meta_time).then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        }),
    };
    let envelope = Envelope {
        metadata,
        payload: report.payload,
        warnings: report.warnings,
    };
    let text = match cli.format {
        Format::Json => render_json(&envelope),
        Format::Csv => render_csv(&envelope, &report.table),
    };
    emit(cli, &text)?;
    Ok(if report.signal { 2 } else { 0 })
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let stderr = std::io::stderr();
            let color =
                stderr.is_terminal() && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty());
            let label = if color {
                "\x1b[31merror\x1b[0m"
            } else {
                "error"
            };
            let _ = writeln!(stderr.lock(), "{label}[{}]: {e}", e.code());
            ExitCode::from(1)
        }
    }
}
