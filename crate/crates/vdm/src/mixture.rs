//! Mixture configuration: built-in presets and the JSON schema
//! `{"weights": [...], "means": [...], "variances": [...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vdm_core::MixtureDensity;

use crate::error::VdmError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureConfig {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl MixtureConfig {
    pub fn to_density(&self) -> Result<MixtureDensity, VdmError> {
        Ok(MixtureDensity::new(&self.weights, &self.means, &self.variances)?)
    }
}

impl From<&MixtureDensity> for MixtureConfig {
    fn from(d: &MixtureDensity) -> Self {
        let c = d.components();
        MixtureConfig {
            weights: c.iter().map(|c| c.weight).collect(),
            means: c.iter().map(|c| c.mean).collect(),
            variances: c.iter().map(|c| c.variance).collect(),
        }
    }
}

/// `(name, description)` of every preset.
pub const PRESETS: [(&str, &str); 2] = [
    ("paper-gmm", "0.33 N(-1, 0.0625) + 0.67 N(2, 2)"),
    ("gaussian", "N(2, 1.5^2)"),
];

pub fn preset(name: &str) -> Option<MixtureDensity> {
    match name {
        "paper-gmm" => Some(MixtureDensity::reference_mixture()),
        "gaussian" => Some(MixtureDensity::gaussian(2.0, 1.5).expect("valid preset")),
        _ => None,
    }
}

/// A preset name, or else a path to a JSON mixture file.
pub fn load(spec: &str) -> Result<MixtureDensity, VdmError> {
    if let Some(d) = preset(spec) {
        return Ok(d);
    }
    let path = Path::new(spec);
    if !path.exists() {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
        return Err(VdmError::Config(format!(
            "`{spec}` is neither a preset ({}) nor an existing file",
            names.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| VdmError::io(path, e))?;
    let cfg: MixtureConfig = serde_json::from_str(&text).map_err(|e| VdmError::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    cfg.to_density()
}
