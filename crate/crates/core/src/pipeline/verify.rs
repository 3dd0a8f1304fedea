use serde_json::Value;

use super::certificate::{cork_complex, run_pipeline, CertificateBundle, SearchRecord, Status, CERTIFICATE_FORMAT};
use super::scenario::CobordismScenario;
use super::stages::{Oracle, PresentationRecord, SearchKey, SearchOutcome};
use super::PipelineError;
use crate::grouppres::{AbelianWitness, Goal, GroupError, Presentation, SearchConfig, TriState};
use crate::intmat::homology_from_complex;
use crate::middle::killing_order;

/// Answers searches from a certificate's records, checking each one.
pub struct ReplayOracle {
    records: Vec<SearchRecord>,
}

impl ReplayOracle {
    pub fn new(records: Vec<SearchRecord>) -> Self {
        ReplayOracle { records }
    }
}

fn mismatch(step: impl Into<String>, detail: impl Into<String>) -> PipelineError {
    PipelineError::Evidence {
        step: step.into(),
        detail: detail.into(),
    }
}

fn replay_step(key: SearchKey, e: GroupError) -> PipelineError {
    match e {
        GroupError::Replay { step, reason } => mismatch(format!("searches.{}.moves[{step}]", key.name()), reason),
        other => mismatch(format!("searches.{}", key.name()), other.to_string()),
    }
}

impl Oracle for ReplayOracle {
    fn decide(&mut self, key: SearchKey, p: &Presentation, cfg: &SearchConfig) -> Result<SearchOutcome, PipelineError> {
        let step = format!("searches.{}", key.name());
        let pos = self
            .records
            .iter()
            .position(|r| r.key == key)
            .ok_or_else(|| mismatch(&step, "no recorded outcome"))?;
        let rec = self.records.remove(pos);
        if rec.presentation != PresentationRecord::of(p) {
            return Err(mismatch(
                format!("{step}.presentation"),
                "recorded presentation differs",
            ));
        }
        if rec.goal != cfg.goal {
            return Err(mismatch(format!("{step}.goal"), "recorded goal differs"));
        }
        match &rec.outcome {
            TriState::Yes { evidence } => {
                let end = p.rebased().replay(&evidence.moves).map_err(|e| replay_step(key, e))?;
                let reached = match cfg.goal {
                    Goal::Trivial => end.is_trivial(),
                    Goal::KillGenerators { count } => {
                        end.rank() == count && (0..count).all(|l| end.relator(l).reduced_signed() == vec![l as i32 + 1])
                    }
                };
                if !reached {
                    return Err(mismatch(
                        format!("{step}.moves[{}]", evidence.moves.len()),
                        "final presentation misses the goal",
                    ));
                }
            }
            TriState::No { witness } => {
                if AbelianWitness::find(p).as_ref() != Some(witness) {
                    return Err(mismatch(
                        format!("{step}.witness"),
                        "abelian witness does not recompute",
                    ));
                }
            }
            TriState::Unknown { .. } => {}
        }
        Ok(rec.outcome)
    }
}

/// Verdicts of a verified certificate, with the evidence checks performed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub statuses: Vec<(String, Status)>,
    pub checks: Vec<String>,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.statuses.iter().any(|(_, s)| *s == Status::No) {
            1
        } else if self.statuses.iter().any(|(_, s)| *s == Status::Unknown) {
            2
        } else {
            0
        }
    }
}

/// Path of the first place where `a` and `b` differ.
fn first_difference(a: &Value, b: &Value, path: &str) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, v) in x {
                let sub = format!("{path}.{k}");
                match y.get(k) {
                    Some(w) => {
                        if let Some(d) = first_difference(v, w, &sub) {
                            return Some(d);
                        }
                    }
                    None => return Some(sub),
                }
            }
            y.keys().find(|k| !x.contains_key(*k)).map(|k| format!("{path}.{k}"))
        }
        (Value::Array(x), Value::Array(y)) => {
            for (i, (v, w)) in x.iter().zip(y).enumerate() {
                if let Some(d) = first_difference(v, w, &format!("{path}[{i}]")) {
                    return Some(d);
                }
            }
            (x.len() != y.len()).then(|| format!("{path}[{}]", x.len().min(y.len())))
        }
        _ => (a != b).then(|| path.to_string()),
    }
}

/// Checks a certificate against its scenario without running any search.
///
/// The pipeline is rerun with recorded search outcomes; the rebuilt
/// certificate must equal the given one, and every yes verdict's evidence is
/// rechecked directly.
pub fn verify_certificate(sc: &CobordismScenario, cert: &CertificateBundle) -> Result<VerifyReport, PipelineError> {
    if cert.format != CERTIFICATE_FORMAT {
        return Err(mismatch("format", format!("unsupported format {:?}", cert.format)));
    }
    if cert.scenario_hash != sc.content_hash() {
        return Err(mismatch(
            "scenario_hash",
            "certificate was issued for a different scenario",
        ));
    }
    let mut oracle = ReplayOracle::new(cert.searches.clone());
    let rebuilt = run_pipeline(sc, cert.budgets, &mut oracle)?;
    if rebuilt != *cert {
        let a = serde_json::to_value(cert).expect("serializes");
        let b = serde_json::to_value(&rebuilt).expect("serializes");
        let step = first_difference(&a, &b, "certificate").unwrap_or_else(|| "certificate".to_string());
        return Err(mismatch(step, "recorded value differs from the replayed value"));
    }
    let checks = check_evidence(sc, cert)?;
    Ok(VerifyReport {
        statuses: cert
            .verdicts
            .statuses()
            .iter()
            .map(|(n, s)| (n.to_string(), *s))
            .collect(),
        checks,
    })
}

fn check_evidence(sc: &CobordismScenario, cert: &CertificateBundle) -> Result<Vec<String>, PipelineError> {
    let mut done = Vec::new();
    let v = &cert.verdicts;
    if let (Some(ev), Some(cork)) = (v.theorem1.state.yes(), &cert.cork) {
        let p = cork.a_half.to_presentation()?;
        ev.trivialization
            .verify(&p)
            .map_err(|e| mismatch("verdicts.theorem1.trivialization", e.to_string()))?;
        let h = homology_from_complex(&cork_complex(cork)?)?;
        if !h.is_point() || h != ev.homology {
            return Err(mismatch(
                "verdicts.theorem1.homology",
                "cork homology is not that of a point",
            ));
        }
        done.push("theorem1: A_1/2 trivializes and H_*(A) is that of a point".to_string());
    }
    if let Some(inv) = v.theorem2.state.yes() {
        if !inv.in_complement.is_empty() {
            return Err(mismatch("verdicts.theorem2", "handles left in the complement"));
        }
        done.push("theorem2: every 2- and 3-handle lies in the cork".to_string());
    }
    if let (Some(t), Some(s5)) = (v.a.state.yes(), &cert.stage5) {
        let p = s5.complement.to_presentation()?;
        t.verify(&p).map_err(|e| mismatch("verdicts.A", e.to_string()))?;
        done.push("A: complement dual relators normally generate".to_string());
    }
    if let (Some(ball), Some(cork)) = (v.b.state.yes(), &cert.cork) {
        if !sc.boundary3.replay(&ball.normalization)?.is_identity() {
            return Err(mismatch("verdicts.B.normalization", "does not reduce to the identity"));
        }
        let order = killing_order(&cork.b_half.relators, cork.b_half.rank)
            .ok_or_else(|| mismatch("verdicts.B.circle_cancellations", "relators do not cancel in sequence"))?;
        let claimed: Vec<(usize, u32)> = ball
            .circle_cancellations
            .iter()
            .map(|c| {
                let k = cork
                    .b_half_handles
                    .iter()
                    .position(|h| *h == c.handle)
                    .unwrap_or(usize::MAX);
                (k, c.generator)
            })
            .collect();
        if claimed != order {
            return Err(mismatch(
                "verdicts.B.circle_cancellations",
                "cancellation order differs",
            ));
        }
        done.push("B: 1-handles cancel against B_1/2 2-handles in sequence".to_string());
    }
    if let Some(sk) = v.c.state.yes() {
        for (side, sums) in sk.block_sums.iter().enumerate() {
            let n = sums.len();
            let identity = (0..n).all(|i| (0..n).all(|j| sums[i][j] == i64::from(i == j)));
            if !identity {
                return Err(mismatch(format!("verdicts.C.block_sums[{side}]"), "not the identity"));
            }
        }
        done.push("C: killing words have identity block sums on both sides".to_string());
    }
    if let Some(dc) = v.d.state.yes() {
        if !dc.swap_consistent() || v.b.status() != Status::Yes {
            return Err(mismatch("verdicts.D", "double does not swap the ends"));
        }
        done.push("D: A u A^-1 swaps A_0 u A_1 with A_1 u A_0".to_string());
    }
    Ok(done)
}
