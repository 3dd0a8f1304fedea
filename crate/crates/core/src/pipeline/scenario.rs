use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::intmat::IntMatrix;
use crate::middle::{Ambient, ArcOrdering, PairPoints, SpherePair};
use crate::slides::CommutatorTarget;

/// Per-stage search budgets, counted in generated search states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub stage3: usize,
    pub stage5: usize,
    pub theorem1: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            stage3: 200_000,
            stage5: 200_000,
            theorem1: 200_000,
        }
    }
}

impl Budgets {
    pub fn uniform(budget: usize) -> Self {
        Budgets {
            stage3: budget,
            stage5: budget,
            theorem1: budget,
        }
    }
}

/// The 2-/3-handle data of an h-cobordism, as read from a scenario file.
///
/// `boundary3[i][j]` is the algebraic intersection of the lower sphere
/// `S_{0,i+1}` with the upper sphere `S_{1,j+1}`. Ambient relators refer to
/// the point numbering after normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CobordismScenario {
    pub n: usize,
    pub boundary3: IntMatrix,
    pub intersections: Vec<PairPoints>,
    pub ambient: Ambient,
    #[serde(default)]
    pub ordering: ArcOrdering,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<CommutatorTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Budgets>,
}

impl CobordismScenario {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Parse(e.to_string()))
    }

    pub fn sphere_pair(&self) -> Result<SpherePair, PipelineError> {
        Ok(SpherePair::new(self.n, self.intersections.clone())?)
    }

    pub fn budgets(&self) -> Budgets {
        self.budgets.unwrap_or_default()
    }

    /// SHA-256 of the canonical re-serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
