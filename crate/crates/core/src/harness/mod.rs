//! Prompt assembly, providers and batch runs.

pub mod oracle;
pub mod prompt;
pub mod provider;
pub mod runner;
pub mod store;

pub use oracle::{oracle_transcript, OracleProvider};
pub use prompt::{build_prompt, Message, PromptSetting};
pub use provider::{
    complete_with_retry, ChatPayload, HttpProvider, MockProvider, Provider, ProviderError,
    ResponseCache, RetryPolicy,
};
pub use runner::{run_suite, RunOptions, RunSummary};
pub use store::{Manifest, RunDir, RunRecord};

use crate::config::{ProviderConfig, ProviderKind};
use crate::error::Result;

/// Provider selected by the configuration.
pub fn provider_from_config(cfg: &ProviderConfig) -> Result<Box<dyn Provider>> {
    Ok(match cfg.kind {
        ProviderKind::Http => Box::new(HttpProvider::from_config(cfg)?),
        ProviderKind::Mock => Box::new(MockProvider::new(cfg.mock_response.clone())),
        ProviderKind::Oracle => Box::new(OracleProvider),
    })
}
