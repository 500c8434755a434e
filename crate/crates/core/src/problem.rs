//! Problem files and the shipped corpus.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convexset::ConvexSet;
use crate::funcspace::VectorFunction;

/// Environment variable naming the default corpus directory.
pub const CORPUS_ENV: &str = "VECPROX_CORPUS";

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid problem {name}: {message}")]
    Invalid { name: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Convex,
    Pseudoconvex,
    Nonconvex,
    Lipschitz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownPoint {
    pub point: Vec<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub dimension: usize,
    pub objectives: VectorFunction,
    pub feasible_set: ConvexSet,
    pub tags: Vec<Tag>,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known_critical_points: Vec<KnownPoint>,
}

impl ProblemFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, ProblemError> {
        let p: ProblemFile = serde_json::from_str(text).map_err(|e| ProblemError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let invalid = |message: String| ProblemError::Invalid {
            name: self.name.clone(),
            message,
        };
        if self.objectives.dim() != self.dimension {
            return Err(invalid(format!(
                "objectives act on R^{} but dimension is {}",
                self.objectives.dim(),
                self.dimension
            )));
        }
        if self.feasible_set.dim() != self.dimension {
            return Err(invalid(format!("feasible set lives in R^{}", self.feasible_set.dim())));
        }
        if self.x0.len() != self.dimension {
            return Err(invalid(format!("x0 has {} entries", self.x0.len())));
        }
        if !self.feasible_set.contains(&self.x0, 1e-9) {
            return Err(invalid("x0 is infeasible".into()));
        }
        for kp in &self.known_critical_points {
            if kp.point.len() != self.dimension {
                return Err(invalid("known critical point has the wrong length".into()));
            }
        }
        Ok(())
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }
}

/// `$VECPROX_CORPUS`, falling back to `./corpus`.
pub fn default_corpus_dir() -> PathBuf {
    std::env::var_os(CORPUS_ENV).map_or_else(|| PathBuf::from("corpus"), PathBuf::from)
}

/// An existing path is taken as is; a bare name such as `P2` is looked up as
/// `<corpus>/P2.json`.
pub fn resolve(reference: &str, corpus: &Path) -> PathBuf {
    let direct = PathBuf::from(reference);
    if direct.exists() {
        return direct;
    }
    let named = corpus.join(format!("{reference}.json"));
    if named.exists() {
        named
    } else {
        direct
    }
}

/// All `*.json` problems of a directory, sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<(PathBuf, ProblemFile)>, ProblemError> {
    let entries = std::fs::read_dir(dir).map_err(|source| ProblemError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| ProblemFile::load(&p).map(|f| (p, f)))
        .collect()
}
