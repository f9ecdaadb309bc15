//! Reproduction presets shipped with the binary.

use serde_json::{Map, Value};

use crate::config::parse_document;
use crate::error::{CliError, Result};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    source: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig-envelope",
        summary: "envelope vs full system, reference impulse train",
        source: include_str!("../presets/fig-envelope.toml"),
    },
    Preset {
        name: "phase-a",
        summary: "horizon capacity curves and regime map",
        source: include_str!("../presets/phase-a.toml"),
    },
    Preset {
        name: "phase-b",
        summary: "overhead sawtooth frontier",
        source: include_str!("../presets/phase-b.toml"),
    },
    Preset {
        name: "phase-c",
        summary: "uniform vs front-loaded level paths",
        source: include_str!("../presets/phase-c.toml"),
    },
    Preset {
        name: "panel-c-peak",
        summary: "constant-peak plan, r = 2.1, n = 3, lambda = e^-1",
        source: include_str!("../presets/panel-c-peak.toml"),
    },
    Preset {
        name: "panel-c-uniform",
        summary: "uniform split, r = 2.1, n = 3, lambda = e^-1",
        source: include_str!("../presets/panel-c-uniform.toml"),
    },
    Preset {
        name: "panel-c-horizon",
        summary: "horizon capacity, r = 2.1, h = 2",
        source: include_str!("../presets/panel-c-horizon.toml"),
    },
];

pub fn load(name: &str) -> Result<Map<String, Value>> {
    let preset = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    parse_document(preset.source, false, &format!("preset {name}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, Overrides};

    #[test]
    fn every_preset_resolves() {
        for p in PRESETS {
            resolve(load(p.name).unwrap(), None, Overrides::default())
                .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }
}
