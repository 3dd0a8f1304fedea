//! Scenario in, cork certificate out.
//!
//! Stages run in the order normalize, build, kill generators, simply connect
//! the complement, assemble. Every search goes through an [`Oracle`], so the
//! verifier can rerun the same code with recorded answers instead of search.

mod certificate;
mod scenario;
mod stages;
mod verify;

use thiserror::Error;

use crate::grouppres::GroupError;
use crate::intmat::IntMatError;
use crate::middle::MiddleError;
use crate::slides::SlideError;

pub use certificate::{
    extract, run_pipeline, BallEvidence, CertificateBundle, CircleCancellation, ComplementFailure, HandleInventory,
    SearchRecord, Stage1Record, Stage3Record, Status, Theorem1Evidence, Theorem1Failure, Verdict, Verdicts,
    CERTIFICATE_FORMAT,
};
pub use scenario::{Budgets, CobordismScenario};
pub use stages::{
    apply_to_spheres, complement_handles, complement_presentation, double_cork, l1_digest, stage1_normalize,
    stage2_build, stage3_kill_generators, stage4_assemble, stage5_simply_connect, CorkDescription, DoubleCork,
    HandleSlideRecord, Oracle, PresentationRecord, SearchKey, SearchOracle, SearchOutcome, Stage1, Stage3, Stage5,
    Stage5Record, ThreeHandle,
};
pub use verify::{verify_certificate, ReplayOracle, VerifyReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario inconsistent: {0}")]
    ScenarioInconsistent(String),
    #[error(transparent)]
    Matrix(#[from] IntMatError),
    #[error(transparent)]
    Middle(#[from] MiddleError),
    #[error(transparent)]
    Slide(#[from] SlideError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("evidence mismatch at {step}: {detail}")]
    Evidence { step: String, detail: String },
    #[error("no ball certificate for B")]
    MissingBallCertificate,
}

impl PipelineError {
    /// True for errors caused by the input rather than by evidence.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, PipelineError::Evidence { .. })
    }
}
