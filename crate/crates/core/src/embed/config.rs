//! Encoder architecture configuration.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Architecture {
    Gcn,
    Gat,
    Gin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Sum,
    Mean,
    Max,
}

/// Which objective shaped the model's parameters; decides which output
/// heads exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingRegime {
    TransductiveSiamese,
    InductiveVgae,
    InductiveGfa,
}

fn default_layers() -> usize {
    1
}
fn default_hidden_dim() -> usize {
    2048
}
fn default_heads() -> usize {
    8
}
fn default_epsilon() -> f64 {
    0.0
}
fn default_pooling() -> Pooling {
    Pooling::Sum
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub architecture: Architecture,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_hidden_dim")]
    pub hidden_dim: usize,
    /// Attention heads; only read by GAT.
    #[serde(default = "default_heads")]
    pub attention_heads: usize,
    /// Fixed, non-learnable self-weight offset; only read by GIN.
    #[serde(default = "default_epsilon")]
    pub gin_epsilon: f64,
    #[serde(default = "default_pooling")]
    pub pooling: Pooling,
    #[serde(default)]
    pub seed: u64,
}

impl EncoderConfig {
    pub fn new(architecture: Architecture) -> EncoderConfig {
        EncoderConfig {
            architecture,
            layers: default_layers(),
            hidden_dim: default_hidden_dim(),
            attention_heads: default_heads(),
            gin_epsilon: default_epsilon(),
            pooling: default_pooling(),
            seed: 0,
        }
    }

    /// A small-dimension variant, convenient for tests and demos.
    pub fn small(architecture: Architecture, hidden_dim: usize, seed: u64) -> EncoderConfig {
        EncoderConfig {
            hidden_dim,
            attention_heads: 2,
            seed,
            ..EncoderConfig::new(architecture)
        }
    }

    pub(crate) fn validate(&self) -> Result<(), super::EmbedError> {
        if self.layers == 0 {
            return Err(super::EmbedError::InvalidConfig {
                reason: "layers must be at least 1".to_string(),
            });
        }
        if self.hidden_dim == 0 {
            return Err(super::EmbedError::InvalidConfig {
                reason: "hidden dimension must be at least 1".to_string(),
            });
        }
        if self.architecture == Architecture::Gat {
            if self.attention_heads == 0 {
                return Err(super::EmbedError::InvalidConfig {
                    reason: "attention heads must be at least 1".to_string(),
                });
            }
            if !self.hidden_dim.is_multiple_of(self.attention_heads) {
                return Err(super::EmbedError::InvalidConfig {
                    reason: format!(
                        "hidden dimension {} not divisible by {} heads",
                        self.hidden_dim, self.attention_heads
                    ),
                });
            }
        }
        Ok(())
    }
}
