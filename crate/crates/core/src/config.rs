//! TOML configuration for runs. Credentials are never read from the file,
//! only the name of the environment variable that holds them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RenderPalette;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// OpenAI-compatible chat completions over HTTP.
    Http,
    /// Canned transcript for every request.
    Mock,
    /// Gold answers with gold visualizations.
    #[default]
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub temperature: f64,
    pub top_p: f64,
    /// Allows decoding parameters other than temperature 0 and top-p 1.
    pub nonstandard: bool,
    pub max_tokens: Option<u32>,
    pub max_retries: u32,
    pub timeout_secs: u64,
    pub backoff_ms: u64,
    /// Response of the mock provider.
    pub mock_response: String,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKind::Oracle,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            temperature: 0.0,
            top_p: 1.0,
            nonstandard: false,
            max_tokens: None,
            max_retries: 5,
            timeout_secs: 120,
            backoff_ms: 500,
            mock_response: "The answer is: unknown".into(),
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.nonstandard && (self.temperature != 0.0 || self.top_p != 1.0) {
            return Err(Error::Config(
                "temperature must be 0 and top_p 1 unless `nonstandard = true`".into(),
            ));
        }
        if self.kind == ProviderKind::Http && self.endpoint.is_empty() {
            return Err(Error::Config("http provider needs an endpoint".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub workers: usize,
    /// Upper bound on request starts per minute across all workers; 0 = none.
    pub requests_per_minute: u32,
    pub cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            workers: 4,
            requests_per_minute: 0,
            cache: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub palette: String,
    pub provider: ProviderConfig,
    pub run: RunConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            palette: "ascii".into(),
            provider: ProviderConfig::default(),
            run: RunConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.provider.validate()?;
        self.palette()?;
        if self.run.workers == 0 {
            return Err(Error::Config("run.workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn palette(&self) -> Result<RenderPalette> {
        RenderPalette::by_id(&self.palette).map_err(|e| Error::Config(e.to_string()))
    }
}
