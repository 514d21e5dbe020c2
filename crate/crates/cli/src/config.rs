//! TOML run configuration. Each subcommand reads its own table; keys mirror
//! the long flag names and explicit flags always win over file values.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    #[serde(default)]
    pub expand: ExpandFile,
    #[serde(default)]
    pub stencil: StencilFile,
    #[serde(default)]
    pub spectrum: SpectrumFile,
    #[serde(default)]
    pub simulate: SimulateFile,
    #[serde(default)]
    pub macro_eig: MacroEigFile,
    #[serde(default)]
    pub convergence: ConvergenceFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExpandFile {
    pub order: Option<usize>,
    pub r: Option<String>,
    pub sign: Option<String>,
    pub format: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct StencilFile {
    pub order: Option<usize>,
    pub r: Option<String>,
    pub sign: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpectrumFile {
    pub patches: Option<Vec<usize>>,
    pub npoints: Option<usize>,
    pub r: Option<String>,
    pub order: Option<usize>,
    pub dt: Option<f64>,
    pub model: Option<String>,
    pub c: Option<f64>,
    pub scheme: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateFile {
    pub model: Option<String>,
    pub length: Option<f64>,
    pub patches: Option<usize>,
    pub npoints: Option<usize>,
    pub r: Option<String>,
    pub order: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub scheme: Option<String>,
    pub ic: Option<String>,
    pub snapshots: Option<usize>,
    pub advection: Option<f64>,
    pub c: Option<f64>,
    pub allow_unstable: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MacroEigFile {
    pub order: Option<usize>,
    pub patches: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConvergenceFile {
    pub patches: Option<Vec<usize>>,
    pub npoints: Option<usize>,
    pub r: Option<String>,
    pub order: Option<usize>,
    pub dt: Option<f64>,
    pub scheme: Option<String>,
    pub probe_floor: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flag value, else file value, else default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag value, else file value.
pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
