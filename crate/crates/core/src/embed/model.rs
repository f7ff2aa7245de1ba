//! The embedding model: configuration plus a flat, named parameter store.
//!
//! Parameters live in one contiguous `Vec<f64>` addressed by named slices,
//! which keeps the optimizer and the finite-difference checks trivial.
//! Checkpoints are JSON; serde emits shortest round-trip float literals, so
//! save -> load -> encode is bit-identical.

use super::config::{Architecture, EncoderConfig, TrainingRegime};
use super::EmbedError;
use ndarray::{ArrayView2, ArrayViewMut2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    rows: usize,
    cols: usize,
    offset: usize,
}

/// Named matrix slices over one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore {
    entries: Vec<ParamEntry>,
    data: Vec<f64>,
}

impl ParamStore {
    fn new() -> ParamStore {
        ParamStore {
            entries: Vec::new(),
            data: Vec::new(),
        }
    }

    fn register(&mut self, name: &str, rows: usize, cols: usize) {
        debug_assert!(self.entry(name).is_none(), "duplicate parameter {name}");
        self.entries.push(ParamEntry {
            name: name.to_string(),
            rows,
            cols,
            offset: self.data.len(),
        });
        self.data.resize(self.data.len() + rows * cols, 0.0);
    }

    fn entry(&self, name: &str) -> Option<&ParamEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn shape(&self, name: &str) -> Option<(usize, usize)> {
        self.entry(name).map(|e| (e.rows, e.cols))
    }

    /// Matrix view of a named slice. Panics on unknown names; parameter
    /// names are fixed by the architecture at init.
    pub fn view(&self, name: &str) -> ArrayView2<'_, f64> {
        let e = self.entry(name).unwrap_or_else(|| panic!("no parameter {name}"));
        ArrayView2::from_shape((e.rows, e.cols), &self.data[e.offset..e.offset + e.rows * e.cols])
            .expect("entry shape is consistent")
    }

    /// Matrix view into an external gradient buffer laid out like this
    /// store.
    pub fn grad_view_mut<'g>(&self, grads: &'g mut [f64], name: &str) -> ArrayViewMut2<'g, f64> {
        let e = self.entry(name).unwrap_or_else(|| panic!("no parameter {name}"));
        ArrayViewMut2::from_shape(
            (e.rows, e.cols),
            &mut grads[e.offset..e.offset + e.rows * e.cols],
        )
        .expect("entry shape is consistent")
    }

    pub fn set(&mut self, name: &str, values: &[f64]) -> Result<(), EmbedError> {
        let e = self
            .entry(name)
            .ok_or_else(|| EmbedError::UnknownParameter {
                name: name.to_string(),
            })?
            .clone();
        if values.len() != e.rows * e.cols {
            return Err(EmbedError::ShapeMismatch {
                name: name.to_string(),
                expected: e.rows * e.cols,
                got: values.len(),
            });
        }
        self.data[e.offset..e.offset + values.len()].copy_from_slice(values);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.entry(name)
            .map(|e| &self.data[e.offset..e.offset + e.rows * e.cols])
    }
}

/// A trained (or freshly initialized) graph encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub config: EncoderConfig,
    pub regime: TrainingRegime,
    pub input_dim: usize,
    pub(crate) params: ParamStore,
}

impl EmbeddingModel {
    /// Initialize with seeded Glorot-uniform weights. Registration order is
    /// fixed, so a seed fully determines every parameter.
    pub fn init(
        config: &EncoderConfig,
        regime: TrainingRegime,
        input_dim: usize,
    ) -> Result<EmbeddingModel, EmbedError> {
        config.validate()?;
        if input_dim == 0 {
            return Err(EmbedError::InvalidConfig {
                reason: "input dimension must be at least 1".to_string(),
            });
        }
        let mut params = ParamStore::new();
        let d = config.hidden_dim;
        for layer in 0..config.layers {
            let in_dim = if layer == 0 { input_dim } else { d };
            match config.architecture {
                Architecture::Gcn => {
                    params.register(&format!("layer{layer}.weight"), in_dim, d);
                }
                Architecture::Gin => {
                    params.register(&format!("layer{layer}.mlp1"), in_dim, d);
                    params.register(&format!("layer{layer}.mlp2"), d, d);
                }
                Architecture::Gat => {
                    let head_dim = d / config.attention_heads;
                    params.register(&format!("layer{layer}.weight"), in_dim, d);
                    params.register(
                        &format!("layer{layer}.att_src"),
                        config.attention_heads,
                        head_dim,
                    );
                    params.register(
                        &format!("layer{layer}.att_dst"),
                        config.attention_heads,
                        head_dim,
                    );
                }
            }
        }
        match regime {
            TrainingRegime::TransductiveSiamese => {}
            TrainingRegime::InductiveVgae => {
                params.register("head.mu", d, d);
                params.register("head.logvar", d, d);
            }
            TrainingRegime::InductiveGfa => {
                params.register("head.mu", d, d);
                params.register("head.logvar", d, d);
                params.register("head.feat", d, input_dim);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let entries: Vec<(String, usize, usize)> = params
            .entries
            .iter()
            .map(|e| (e.name.clone(), e.rows, e.cols))
            .collect();
        for (name, rows, cols) in entries {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let values: Vec<f64> = (0..rows * cols)
                .map(|_| rng.gen_range(-limit..limit))
                .collect();
            params.set(&name, &values).expect("registered above");
        }

        Ok(EmbeddingModel {
            config: config.clone(),
            regime,
            input_dim,
            params,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn parameter_names(&self) -> Vec<&str> {
        self.params.names()
    }

    pub fn set_parameter(&mut self, name: &str, values: &[f64]) -> Result<(), EmbedError> {
        self.params.set(name, values)
    }

    pub fn parameter(&self, name: &str) -> Option<&[f64]> {
        self.params.get(name)
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: 1,
            config: self.config.clone(),
            regime: self.regime,
            input_dim: self.input_dim,
            parameters: self
                .params
                .entries
                .iter()
                .map(|e| ParamRecord {
                    name: e.name.clone(),
                    rows: e.rows,
                    cols: e.cols,
                    values: self.params.get(&e.name).unwrap().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<EmbeddingModel, EmbedError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != 1 {
            return Err(EmbedError::InvalidConfig {
                reason: format!("unsupported checkpoint version {}", file.format_version),
            });
        }
        let mut params = ParamStore::new();
        for p in &file.parameters {
            params.register(&p.name, p.rows, p.cols);
            params.set(&p.name, &p.values)?;
        }
        Ok(EmbeddingModel {
            config: file.config,
            regime: file.regime,
            input_dim: file.input_dim,
            params,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EmbedError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EmbeddingModel, EmbedError> {
        let text = std::fs::read_to_string(path)?;
        EmbeddingModel::from_json(&text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    config: EncoderConfig,
    regime: TrainingRegime,
    input_dim: usize,
    parameters: Vec<ParamRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamRecord {
    name: String,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}
