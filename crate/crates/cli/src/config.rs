//! Run configuration: one structured document with a `[params]` table and
//! exactly one command table, optionally overridden by flags.
//!
//! Files are TOML, or JSON when the extension is `.json`. Unknown keys are
//! rejected at every level.

use std::path::Path;

use leaky_staging::phase::{Axis, Panel, PanelCSetup, PhaseGrid};
use leaky_staging::ModelParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{config_err, CliError, Result};

pub const COMMANDS: [&str; 7] = [
    "exposure", "split", "overhead", "peak", "horizon", "simulate", "phase",
];
const TOP_LEVEL: [&str; 2] = ["tol", "params"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub beta: f64,
    pub mu: f64,
    pub delta: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureBlock {
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitBlock {
    pub load: f64,
    pub n: usize,
}

/// Either `r` and `k` directly, or a load `load` and per-release cost `overhead`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverheadBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overhead: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PeakPolicy {
    /// Constant-peak plan (first release fills, later ones top up).
    #[default]
    Optimal,
    /// Equal release sizes.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakBlock {
    pub load: f64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Inter-release spacing; `lambda = exp(-rho * spacing)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default)]
    pub initial_level: f64,
    #[serde(default)]
    pub policy: PeakPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Release counts whose capacity `B_n(h)` is tabulated.
    #[serde(default)]
    pub n: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    /// `[time, size]` pairs, strictly increasing in time.
    pub schedule: Vec<(f64, f64)>,
    pub s0: f64,
    #[serde(default)]
    pub a0: f64,
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseBlock {
    #[serde(default = "default_panel")]
    pub panel: Panel,
    #[serde(default)]
    pub resolve_integers: bool,
    #[serde(default = "default_r_axis")]
    pub r: Axis,
    #[serde(default = "default_h_axis")]
    pub h: Axis,
    #[serde(default = "default_k_axis")]
    pub k: Axis,
    #[serde(default = "default_n_curves")]
    pub n_curves: Vec<u64>,
    #[serde(default)]
    pub panel_c: PanelCSetup,
}

fn default_panel() -> Panel {
    Panel::All
}
fn default_r_axis() -> Axis {
    PhaseGrid::default().r
}
fn default_h_axis() -> Axis {
    PhaseGrid::default().h
}
fn default_k_axis() -> Axis {
    PhaseGrid::default().k
}
fn default_n_curves() -> Vec<u64> {
    PhaseGrid::default().n_curves
}

impl PhaseBlock {
    pub fn grid(&self) -> PhaseGrid {
        PhaseGrid {
            r: self.r,
            h: self.h,
            k: self.k,
            n_curves: self.n_curves.clone(),
            resolve_integers: self.resolve_integers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandBlock {
    Exposure(ExposureBlock),
    Split(SplitBlock),
    Overhead(OverheadBlock),
    Peak(PeakBlock),
    Horizon(HorizonBlock),
    Simulate(SimulateBlock),
    Phase(PhaseBlock),
}

impl CommandBlock {
    pub fn name(&self) -> &'static str {
        match self {
            CommandBlock::Exposure(_) => "exposure",
            CommandBlock::Split(_) => "split",
            CommandBlock::Overhead(_) => "overhead",
            CommandBlock::Peak(_) => "peak",
            CommandBlock::Horizon(_) => "horizon",
            CommandBlock::Simulate(_) => "simulate",
            CommandBlock::Phase(_) => "phase",
        }
    }
}

/// Fully resolved configuration; its JSON form is echoed in the output metadata
/// and can be fed back with `--config file.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: Option<f64>,
    pub params: Option<ParamsBlock>,
    pub command: CommandBlock,
}

impl RunConfig {
    pub fn to_json(&self) -> Value {
        let mut doc = Map::new();
        if let Some(tol) = self.tol {
            doc.insert("tol".into(), tol.into());
        }
        if let Some(p) = self.params {
            doc.insert(
                "params".into(),
                serde_json::to_value(p).expect("params serialize"),
            );
        }
        let block = match serde_json::to_value(&self.command).expect("command serializes") {
            Value::Object(mut m) => m.remove(self.command.name()).expect("tagged block"),
            _ => unreachable!("externally tagged enum"),
        };
        doc.insert(self.command.name().into(), block);
        Value::Object(doc)
    }

    /// Validated model parameters, with the threshold tolerance applied.
    pub fn model(&self) -> Result<Option<ModelParams>> {
        self.params
            .map(|p| {
                let params = ModelParams::new(p.beta, p.mu, p.delta, p.rho)?;
                Ok(match self.tol {
                    Some(tol) => params.with_threshold_tol(tol)?,
                    None => params,
                })
            })
            .transpose()
    }

    pub fn require_model(&self) -> Result<ModelParams> {
        self.model()?.ok_or_else(|| {
            config_err(format!(
                "[params] is required for `{}` (fields beta, mu, delta, rho)",
                self.command.name()
            ))
        })
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
            .unwrap_or(leaky_staging::model::DEFAULT_THRESHOLD_TOL)
    }
}

/// Parses a document from text; `origin` names it in error messages.
pub fn parse_document(text: &str, json: bool, origin: &str) -> Result<Map<String, Value>> {
    let value: Value = if json {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?
    } else {
        toml::from_str(text).map_err(|e| CliError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?
    };
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::Parse {
            origin: origin.to_string(),
            message: "top level must be a table".into(),
        }),
    }
}

pub fn read_document(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    parse_document(&text, json, &path.display().to_string())
}

/// Key/value overrides collected from flags.
#[derive(Debug, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub params: Map<String, Value>,
    pub command: Map<String, Value>,
}

/// Merges `overrides` into `doc` and resolves the command block.
///
/// `command` is the subcommand given on the command line, if any; without it
/// the document must contain exactly one command table.
pub fn resolve(
    mut doc: Map<String, Value>,
    command: Option<&str>,
    overrides: Overrides,
) -> Result<RunConfig> {
    for key in doc.keys() {
        if !TOP_LEVEL.contains(&key.as_str()) && !COMMANDS.contains(&key.as_str()) {
            return Err(config_err(format!(
                "unknown top-level key `{key}`; expected `tol`, `params` or one of {}",
                COMMANDS.join(", ")
            )));
        }
    }
    let present: Vec<&str> = COMMANDS
        .iter()
        .copied()
        .filter(|c| doc.contains_key(*c))
        .collect();
    let name = match (command, present.as_slice()) {
        (Some(cmd), []) => cmd,
        (Some(cmd), [only]) if *only == cmd => cmd,
        (Some(cmd), [only]) => {
            return Err(config_err(format!(
                "config holds a [{only}] block but the command is `{cmd}`"
            )))
        }
        (None, [only]) => only,
        (None, []) => {
            return Err(config_err(
                "no command given and the config holds no command block",
            ))
        }
        (_, many) => {
            return Err(config_err(format!(
                "exactly one command block is allowed, found {}",
                many.join(", ")
            )))
        }
    };

    if let Some(tol) = overrides.tol {
        doc.insert("tol".into(), tol.into());
    }
    overlay(&mut doc, "params", overrides.params)?;
    overlay(&mut doc, name, overrides.command)?;

    let tol = doc
        .get("tol")
        .map(|v| {
            v.as_f64()
                .filter(|t| t.is_finite() && *t >= 0.0)
                .ok_or_else(|| config_err(format!("`tol` must be a finite number >= 0, got {v}")))
        })
        .transpose()?;
    let params = block::<ParamsBlock>(&doc, "params")?;
    let command = match name {
        "exposure" => CommandBlock::Exposure(required(&doc, name)?),
        "split" => CommandBlock::Split(required(&doc, name)?),
        "overhead" => CommandBlock::Overhead(required(&doc, name)?),
        "peak" => CommandBlock::Peak(required(&doc, name)?),
        "horizon" => CommandBlock::Horizon(required(&doc, name)?),
        "simulate" => CommandBlock::Simulate(required(&doc, name)?),
        "phase" => CommandBlock::Phase(required(&doc, name)?),
        other => return Err(config_err(format!("unknown command `{other}`"))),
    };
    let config = RunConfig {
        tol,
        params,
        command,
    };
    config.model()?;
    Ok(config)
}

fn overlay(doc: &mut Map<String, Value>, key: &str, values: Map<String, Value>) -> Result<()> {
    if values.is_empty() {
        return Ok(());
    }
    let entry = doc
        .entry(key.to_string())
        .or_insert_with(|| Value::Object(Map::new()));
    let Value::Object(table) = entry else {
        return Err(config_err(format!("`{key}` must be a table")));
    };
    table.extend(values);
    Ok(())
}

fn block<T: DeserializeOwned>(doc: &Map<String, Value>, key: &str) -> Result<Option<T>> {
    doc.get(key)
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| config_err(format!("[{key}] {e}"))))
        .transpose()
}

fn required<T: DeserializeOwned>(doc: &Map<String, Value>, key: &str) -> Result<T> {
    let value = doc
        .get(key)
        .cloned()
        .unwrap_or_else(|| Value::Object(Map::new()));
    serde_json::from_value(value).map_err(|e| config_err(format!("[{key}] {e}")))
}
