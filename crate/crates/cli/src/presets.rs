//! Named scenario presets: one per (deployment kind, ISD) cell of the
//! reference parameter table.

use dfdmimo::{ScenarioConfig, ScenarioKind};

/// ISDs with reference parameters.
pub const PRESET_ISDS: [f64; 2] = [200.0, 500.0];

pub fn preset_name(kind: ScenarioKind, isd: f64) -> String {
    format!("{}_isd{}", kind.name(), isd as u32)
}

/// Preset names in catalogue order.
pub fn preset_names() -> Vec<String> {
    ScenarioKind::ALL
        .iter()
        .flat_map(|&k| PRESET_ISDS.iter().map(move |&isd| preset_name(k, isd)))
        .collect()
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    for kind in ScenarioKind::ALL {
        for isd in PRESET_ISDS {
            if preset_name(kind, isd) == name {
                return ScenarioConfig::reference(kind, isd).ok();
            }
        }
    }
    None
}
