//! Node featurization: concept id -> fixed-dimension real vector.
//!
//! Two providers: a word-vector table loaded from whitespace-delimited text
//! (`token v1 v2 ... vd` per line) and a seeded hash-to-unit-vector scheme
//! that needs no external files. The table falls back to the hashed vector
//! for out-of-vocabulary ids, so lookups are total and deterministic.

use super::EmbedError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone)]
pub enum NodeFeatureProvider {
    Hashed {
        dim: usize,
        seed: u64,
    },
    Table {
        dim: usize,
        vectors: HashMap<String, Vec<f64>>,
        fallback_seed: u64,
    },
}

impl NodeFeatureProvider {
    pub fn hashed(dim: usize, seed: u64) -> NodeFeatureProvider {
        assert!(dim >= 1);
        NodeFeatureProvider::Hashed { dim, seed }
    }

    /// Load `token v1 ... vd` lines; dimension is fixed by the first row.
    pub fn from_word_vector_file(path: impl AsRef<Path>) -> Result<NodeFeatureProvider, EmbedError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().expect("non-empty line has a token");
            let values: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| EmbedError::BadWordVectorFile {
                        path: path.display().to_string(),
                        line: idx as u32 + 1,
                        reason: format!("invalid number {f:?}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err(EmbedError::BadWordVectorFile {
                    path: path.display().to_string(),
                    line: idx as u32 + 1,
                    reason: "no vector components".to_string(),
                });
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(EmbedError::BadWordVectorFile {
                        path: path.display().to_string(),
                        line: idx as u32 + 1,
                        reason: format!("expected {d} components, found {}", values.len()),
                    })
                }
                _ => {}
            }
            vectors.insert(token.to_string(), values);
        }
        let dim = dim.ok_or_else(|| EmbedError::BadWordVectorFile {
            path: path.display().to_string(),
            line: 0,
            reason: "file holds no vectors".to_string(),
        })?;
        Ok(NodeFeatureProvider::Table {
            dim,
            vectors,
            fallback_seed: 0,
        })
    }

    pub fn dimension(&self) -> usize {
        match self {
            NodeFeatureProvider::Hashed { dim, .. } => *dim,
            NodeFeatureProvider::Table { dim, .. } => *dim,
        }
    }

    /// Feature vector for a concept id; the same id always yields the same
    /// vector.
    pub fn lookup(&self, id: &str) -> Vec<f64> {
        match self {
            NodeFeatureProvider::Hashed { dim, seed } => hashed_unit_vector(id, *dim, *seed),
            NodeFeatureProvider::Table {
                dim,
                vectors,
                fallback_seed,
            } => vectors
                .get(id)
                .cloned()
                .unwrap_or_else(|| hashed_unit_vector(id, *dim, *fallback_seed)),
        }
    }
}

/// FNV-1a, stable across platforms.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn hashed_unit_vector(id: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(id.as_bytes()) ^ seed);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn hashed_vectors_are_stable_unit_length() {
        let fp = NodeFeatureProvider::hashed(8, 3);
        let a = fp.lookup("cat");
        let b = fp.lookup("cat");
        assert_eq!(a, b);
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_ne!(a, fp.lookup("dog"));
    }

    #[test]
    fn word_vector_file_round_trip() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "cat 1.0 0.0 2.5").unwrap();
        writeln!(file, "dog 0.5 -1.0 0.0").unwrap();
        let fp = NodeFeatureProvider::from_word_vector_file(file.path()).unwrap();
        assert_eq!(fp.dimension(), 3);
        assert_eq!(fp.lookup("cat"), vec![1.0, 0.0, 2.5]);
        // Out-of-vocabulary falls back to the deterministic hashed vector.
        let oov1 = fp.lookup("unicorn");
        let oov2 = fp.lookup("unicorn");
        assert_eq!(oov1, oov2);
        assert_eq!(oov1.len(), 3);
    }

    #[test]
    fn inconsistent_dimensions_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "cat 1.0 2.0").unwrap();
        writeln!(file, "dog 1.0").unwrap();
        assert!(matches!(
            NodeFeatureProvider::from_word_vector_file(file.path()),
            Err(EmbedError::BadWordVectorFile { line: 2, .. })
        ));
    }
}
