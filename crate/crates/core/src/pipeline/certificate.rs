use serde::{Deserialize, Serialize};

use super::scenario::{Budgets, CobordismScenario};
use super::stages::{
    double_cork, stage1_normalize, stage2_build, stage3_kill_generators, stage4_assemble, stage5_simply_connect,
    CorkDescription, DoubleCork, HandleSlideRecord, Oracle, PresentationRecord, SearchKey, SearchOracle, SearchOutcome,
    Stage1, Stage5, Stage5Record, ThreeHandle,
};
use super::PipelineError;
use crate::grouppres::{
    AbelianWitness, Goal, Presentation, SearchConfig, TriState, Trivialization, UnknownReason, Word,
};
use crate::intmat::{homology_from_complex, ChainComplex, HomologyGroup, HomologyGroups, IntMatrix, RowColOp};
use crate::middle::{check_sequential_killing_with, killing_order, KillingFailure, SequentialKilling};
use crate::slides::{DualState, HandleId, PairedMove};

pub const CERTIFICATE_FORMAT: &str = "cork-certificate/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Yes,
    No,
    Unknown,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Yes => "yes",
            Status::No => "no",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict<Y, N> {
    #[serde(flatten)]
    pub state: TriState<Y, N>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl<Y, N> Verdict<Y, N> {
    pub fn new(state: TriState<Y, N>) -> Self {
        Verdict {
            state,
            diagnostics: Vec::new(),
        }
    }

    pub fn unknown(detail: impl Into<String>) -> Self {
        Self::new(TriState::unknown(detail))
    }

    pub fn with_diagnostics(mut self, d: impl IntoIterator<Item = String>) -> Self {
        self.diagnostics.extend(d);
        self
    }

    pub fn status(&self) -> Status {
        match self.state {
            TriState::Yes { .. } => Status::Yes,
            TriState::No { .. } => Status::No,
            TriState::Unknown { .. } => Status::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem1Evidence {
    pub homology: HomologyGroups,
    pub trivialization: Trivialization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Theorem1Failure {
    Abelian { witness: AbelianWitness },
    Homology { homology: HomologyGroups },
    Complex { detail: String },
}

/// Where the 2- and 3-handles of the cobordism ended up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandleInventory {
    pub two_handles_in_cork: Vec<usize>,
    pub three_handles_in_cork: Vec<usize>,
    pub in_complement: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComplementFailure {
    NotHomologyTrivial { first_homology: HomologyGroup },
    Abelian { witness: AbelianWitness },
}

/// Handle `handle` cancels generator `generator` once earlier generators
/// are deleted from `raw`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleCancellation {
    pub handle: HandleId,
    pub generator: u32,
    pub raw: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallEvidence {
    pub normalization: Vec<RowColOp>,
    pub circle_cancellations: Vec<CircleCancellation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub theorem1: Verdict<Theorem1Evidence, Theorem1Failure>,
    pub theorem2: Verdict<HandleInventory, HandleInventory>,
    #[serde(rename = "A")]
    pub a: Verdict<Trivialization, ComplementFailure>,
    #[serde(rename = "B")]
    pub b: Verdict<BallEvidence, String>,
    #[serde(rename = "C")]
    pub c: Verdict<SequentialKilling, KillingFailure>,
    #[serde(rename = "D")]
    pub d: Verdict<DoubleCork, String>,
}

impl Verdicts {
    pub fn statuses(&self) -> [(&'static str, Status); 6] {
        [
            ("theorem1", self.theorem1.status()),
            ("theorem2", self.theorem2.status()),
            ("A", self.a.status()),
            ("B", self.b.status()),
            ("C", self.c.status()),
            ("D", self.d.status()),
        ]
    }

    /// 0 when every verdict is yes, 1 if any is no, otherwise 2.
    pub fn exit_code(&self) -> i32 {
        let s = self.statuses();
        if s.iter().any(|(_, x)| *x == Status::No) {
            1
        } else if s.iter().any(|(_, x)| *x == Status::Unknown) {
            2
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub key: SearchKey,
    pub presentation: PresentationRecord,
    pub goal: Goal,
    pub budget: usize,
    pub outcome: SearchOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage1Record {
    pub ops: Vec<RowColOp>,
    pub slides: Vec<HandleSlideRecord>,
    pub algebraic_after: IntMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage3Record {
    pub killers_before: Vec<Word>,
    pub moves: Vec<PairedMove>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub killers_after: Option<Vec<Word>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub format: String,
    pub scenario_hash: String,
    pub budgets: Budgets,
    pub stage1: Stage1Record,
    pub stage3: Stage3Record,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage5: Option<Stage5Record>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cork: Option<CorkDescription>,
    pub searches: Vec<SearchRecord>,
    pub verdicts: Verdicts,
}

impl CertificateBundle {
    /// Pretty JSON with a trailing newline. Equal bundles give equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Parse(e.to_string()))
    }
}

/// Logs every decision of the wrapped oracle.
struct Recording<'a> {
    inner: &'a mut dyn Oracle,
    records: Vec<SearchRecord>,
}

impl Oracle for Recording<'_> {
    fn decide(&mut self, key: SearchKey, p: &Presentation, cfg: &SearchConfig) -> Result<SearchOutcome, PipelineError> {
        let outcome = self.inner.decide(key, p, cfg)?;
        self.records.push(SearchRecord {
            key,
            presentation: PresentationRecord::of(p),
            goal: cfg.goal,
            budget: cfg.budget,
            outcome: outcome.clone(),
        });
        Ok(outcome)
    }
}

/// Runs the pipeline with live search.
pub fn extract(sc: &CobordismScenario, budgets: Budgets) -> Result<CertificateBundle, PipelineError> {
    run_pipeline(sc, budgets, &mut SearchOracle)
}

pub fn run_pipeline(
    sc: &CobordismScenario,
    budgets: Budgets,
    oracle: &mut dyn Oracle,
) -> Result<CertificateBundle, PipelineError> {
    let mut rec = Recording {
        inner: oracle,
        records: Vec::new(),
    };
    let s1 = stage1_normalize(sc)?;
    let ml = stage2_build(sc, &s1)?;
    let r = ml.one_handle_count();
    let killers_before = DualState::from_middle(&ml).l1().relators()[..r].to_vec();
    let s3 = stage3_kill_generators(&ml, budgets.stage3, &mut rec)?;
    let stage1 = Stage1Record {
        ops: s1.ops.clone(),
        slides: s1.slides.clone(),
        algebraic_after: s1.sphere_pair.algebraic(),
    };
    let mut stage3 = Stage3Record {
        killers_before: killers_before.clone(),
        moves: s3.moves.clone(),
        killers_after: None,
    };
    let Some(ds3) = s3.state else {
        let why = match &s3.outcome {
            TriState::No { .. } => "the killer words cannot kill the 1-handles".to_string(),
            TriState::Unknown { reason } => format!("killing search inconclusive: {}", describe(reason)),
            TriState::Yes { .. } => unreachable!("stage 3 returns a state on success"),
        };
        let verdicts = Verdicts {
            theorem1: Verdict::unknown(why.clone()),
            theorem2: Verdict::unknown(why.clone()),
            a: Verdict::unknown(why.clone()),
            b: Verdict::unknown(why.clone()),
            c: Verdict::new(check_sequential_killing_with(&ml, &killers_before)),
            d: Verdict::unknown(why),
        };
        return Ok(CertificateBundle {
            format: CERTIFICATE_FORMAT.to_string(),
            scenario_hash: sc.content_hash(),
            budgets,
            stage1,
            stage3,
            stage5: None,
            cork: None,
            searches: rec.records,
            verdicts,
        });
    };
    let killers: Vec<Word> = ds3.l1().relators()[..r].to_vec();
    stage3.killers_after = Some(killers.clone());
    let s5 = stage5_simply_connect(sc, &ds3, r, budgets.stage5, &mut rec)?;
    let cork = stage4_assemble(&ml, &killers, &s5.state);

    let theorem1 = certify_theorem1(&cork, budgets.theorem1, &mut rec)?;
    let theorem2 = certify_theorem2(&cork, ml.n());
    let a = certify_a(sc, &s5);
    let b = certify_b(sc, &s1, &cork);
    let c = Verdict::new(check_sequential_killing_with(&ml, &killers));
    let d = certify_d(&cork, &b);
    Ok(CertificateBundle {
        format: CERTIFICATE_FORMAT.to_string(),
        scenario_hash: sc.content_hash(),
        budgets,
        stage1,
        stage3,
        stage5: Some(s5.record),
        cork: Some(cork),
        searches: rec.records,
        verdicts: Verdicts {
            theorem1,
            theorem2,
            a,
            b,
            c,
            d,
        },
    })
}

fn describe(reason: &UnknownReason) -> String {
    match reason {
        UnknownReason::BudgetExhausted { budget, generated } => {
            format!("budget {budget} exhausted after {generated} states")
        }
        UnknownReason::Inconclusive { detail } => detail.clone(),
    }
}

/// Cellular chain complex of the cork: one 0-cell, the lower 1-handles, the
/// 2-handles of `A_{1/2}`, and the `2n` 3-handles.
pub(crate) fn cork_complex(cork: &CorkDescription) -> Result<ChainComplex, PipelineError> {
    let p = cork.a_half.to_presentation()?;
    let rels = p.relators().len();
    let mut d3 = IntMatrix::zeros(rels, cork.three_handles.len());
    for (col, &ThreeHandle { k, i }) in cork.three_handles.iter().enumerate() {
        let row = cork
            .a_half_handles
            .iter()
            .position(|&h| h == HandleId::Sphere { k, i })
            .ok_or_else(|| PipelineError::ScenarioInconsistent(format!("no sphere handle for 3-handle ({k}, {i})")))?;
        d3.set(row, col, 1.into());
    }
    Ok(ChainComplex::new(vec![1, p.rank(), rels, cork.three_handles.len()])
        .with_boundary(2, p.abelianize().transpose())
        .with_boundary(3, d3))
}

fn certify_theorem1(
    cork: &CorkDescription,
    budget: usize,
    oracle: &mut dyn Oracle,
) -> Result<Verdict<Theorem1Evidence, Theorem1Failure>, PipelineError> {
    let homology = match homology_from_complex(&cork_complex(cork)?) {
        Ok(h) => h,
        Err(e) => {
            return Ok(Verdict::new(TriState::No {
                witness: Theorem1Failure::Complex { detail: e.to_string() },
            }))
        }
    };
    if !homology.is_point() {
        return Ok(Verdict::new(TriState::No {
            witness: Theorem1Failure::Homology { homology },
        }));
    }
    let p = cork.a_half.to_presentation()?;
    let outcome = oracle.decide(SearchKey::Theorem1, &p, &SearchConfig::with_budget(budget))?;
    Ok(Verdict::new(match outcome {
        TriState::Yes { evidence } => TriState::Yes {
            evidence: Theorem1Evidence {
                homology,
                trivialization: evidence,
            },
        },
        TriState::No { witness } => TriState::No {
            witness: Theorem1Failure::Abelian { witness },
        },
        TriState::Unknown { reason } => TriState::Unknown { reason },
    }))
}

fn certify_theorem2(cork: &CorkDescription, n: usize) -> Verdict<HandleInventory, HandleInventory> {
    let present = |k: u8, i: usize| {
        cork.three_handles.contains(&ThreeHandle { k, i }) && cork.a_half_handles.contains(&HandleId::Sphere { k, i })
    };
    let two: Vec<usize> = (1..=n).filter(|&i| present(0, i)).collect();
    let three: Vec<usize> = (1..=n).filter(|&i| present(1, i)).collect();
    let mut missing: Vec<String> = (1..=n)
        .filter(|&i| !present(0, i))
        .map(|i| format!("2-handle {i}"))
        .collect();
    missing.extend((1..=n).filter(|&i| !present(1, i)).map(|i| format!("3-handle {i}")));
    let inv = HandleInventory {
        two_handles_in_cork: two,
        three_handles_in_cork: three,
        in_complement: missing,
    };
    Verdict::new(if inv.in_complement.is_empty() {
        TriState::Yes { evidence: inv }
    } else {
        TriState::No { witness: inv }
    })
}

fn certify_a(sc: &CobordismScenario, s5: &Stage5) -> Verdict<Trivialization, ComplementFailure> {
    let record = &s5.record;
    if !record.first_homology.is_trivial() {
        return Verdict::new(TriState::No {
            witness: ComplementFailure::NotHomologyTrivial {
                first_homology: record.first_homology.clone(),
            },
        });
    }
    let mut diagnostics = record.diagnostics.clone();
    if record.l1_digest_before != record.l1_digest_after {
        diagnostics.push("lower relators changed outside the spare generators".to_string());
    }
    let state = match s5.outcome.clone() {
        Some(TriState::Yes { evidence }) => TriState::Yes { evidence },
        Some(TriState::No { witness }) => TriState::No {
            witness: ComplementFailure::Abelian { witness },
        },
        Some(TriState::Unknown { reason }) => {
            if sc.witnesses.is_empty() {
                diagnostics.push("no commutator witnesses supplied".to_string());
            }
            TriState::Unknown { reason }
        }
        None => TriState::unknown("complement search not run"),
    };
    Verdict::new(state).with_diagnostics(diagnostics)
}

fn certify_b(sc: &CobordismScenario, s1: &Stage1, cork: &CorkDescription) -> Verdict<BallEvidence, String> {
    match sc.boundary3.replay(&s1.ops) {
        Ok(m) if m.is_identity() => {}
        _ => return Verdict::unknown("normalization does not replay to the identity"),
    }
    let Some(order) = killing_order(&cork.b_half.relators, cork.b_half.rank) else {
        return Verdict::unknown("B_1/2 relators do not cancel the 1-handles in sequence");
    };
    let circle_cancellations = order
        .into_iter()
        .map(|(k, generator)| CircleCancellation {
            handle: cork.b_half_handles[k],
            generator,
            raw: cork.b_half.relators[k].clone(),
        })
        .collect();
    Verdict::new(TriState::Yes {
        evidence: BallEvidence {
            normalization: s1.ops.clone(),
            circle_cancellations,
        },
    })
}

fn certify_d(cork: &CorkDescription, b: &Verdict<BallEvidence, String>) -> Verdict<DoubleCork, String> {
    match double_cork(cork, b.state.yes()) {
        Ok(dc) if dc.swap_consistent() => Verdict::new(TriState::Yes { evidence: dc }),
        Ok(_) => Verdict::new(TriState::No {
            witness: "factor swap does not carry the bottom onto the top".to_string(),
        }),
        Err(e) => Verdict::unknown(e.to_string()),
    }
}
