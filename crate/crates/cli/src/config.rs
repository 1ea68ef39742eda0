//! Optional run configuration file.
//!
//! Values merge as command-line flag, then file, then built-in default.
//! Unknown keys are errors.
//!
//! ```toml
//! field = "mls"
//! knn = 4
//! normalize = true
//!
//! [ascent]
//! steps = 15
//! alpha = 0.9
//!
//! [noise]
//! kind = "gaussian"
//! level = 0.02
//! seed = 42
//!
//! [train]
//! epochs = 20
//! hidden = [64, 64]
//! ```

use std::path::Path;

use pcdenoise::noise::NoiseKind;
use pcdenoise::Error;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub field: Option<String>,
    pub knn: Option<usize>,
    pub normalize: Option<bool>,
    #[serde(default)]
    pub ascent: AscentFile,
    #[serde(default)]
    pub noise: NoiseFile,
    #[serde(default)]
    pub train: TrainFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AscentFile {
    pub steps: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    pub kind: Option<NoiseKind>,
    pub level: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub sigma_s: Option<f64>,
    pub samples_per_anchor: Option<usize>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub hidden: Option<Vec<usize>>,
    pub fit_k: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, Error> {
        toml::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("{}: {}", path.display(), e.message())))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, Error> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }
}
