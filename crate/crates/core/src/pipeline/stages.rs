use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scenario::CobordismScenario;
use super::PipelineError;
use crate::grouppres::{
    trivialize_search, AbelianWitness, Goal, Move, Presentation, SearchConfig, TriState, Trivialization, Word,
};
use crate::intmat::{unimodular_reduce, HomologyGroup, RowColOp};
use crate::middle::{build_middle, dot_side_with, MiddleLevel, SpherePair};
use crate::slides::{kill_commutators, ArcClass, DualState, HandleId, PairedMove};

pub type SearchOutcome = TriState<Trivialization, AbelianWitness>;

/// Which search a recorded outcome answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKey {
    Stage3,
    Stage5,
    Theorem1,
}

impl SearchKey {
    pub fn name(self) -> &'static str {
        match self {
            SearchKey::Stage3 => "stage3",
            SearchKey::Stage5 => "stage5",
            SearchKey::Theorem1 => "theorem1",
        }
    }
}

/// Source of answers to the pipeline's presentation searches.
pub trait Oracle {
    fn decide(&mut self, key: SearchKey, p: &Presentation, cfg: &SearchConfig) -> Result<SearchOutcome, PipelineError>;
}

/// Answers by running [`trivialize_search`].
pub struct SearchOracle;

impl Oracle for SearchOracle {
    fn decide(
        &mut self,
        _key: SearchKey,
        p: &Presentation,
        cfg: &SearchConfig,
    ) -> Result<SearchOutcome, PipelineError> {
        Ok(trivialize_search(p, cfg))
    }
}

/// Rank and relators without the move history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationRecord {
    pub rank: usize,
    pub relators: Vec<Word>,
}

impl PresentationRecord {
    pub fn of(p: &Presentation) -> Self {
        PresentationRecord {
            rank: p.rank(),
            relators: p.relators().to_vec(),
        }
    }

    pub fn to_presentation(&self) -> Result<Presentation, PipelineError> {
        Ok(Presentation::new(self.rank, self.relators.clone())?)
    }
}

/// One normalization step as a handle slide, relabeling or reorientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandleSlideRecord {
    /// 2 for row operations, 3 for column operations.
    pub dimension: u8,
    pub op: RowColOp,
    pub name: String,
}

impl HandleSlideRecord {
    fn of(op: &RowColOp) -> Self {
        let dimension = if op.is_row_op() { 2 } else { 3 };
        let name = match op {
            RowColOp::AddRow { target, source, factor } | RowColOp::AddCol { target, source, factor } => format!(
                "{dimension}-handle {} slides {} time(s) over {dimension}-handle {}",
                target + 1,
                factor,
                source + 1
            ),
            RowColOp::SwapRows(a, b) | RowColOp::SwapCols(a, b) => {
                format!("{dimension}-handles {} and {} swap labels", a + 1, b + 1)
            }
            RowColOp::NegateRow(a) | RowColOp::NegateCol(a) => {
                format!("{dimension}-handle {} reverses orientation", a + 1)
            }
        };
        HandleSlideRecord {
            dimension,
            op: op.clone(),
            name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage1 {
    pub sphere_pair: SpherePair,
    pub ops: Vec<RowColOp>,
    pub slides: Vec<HandleSlideRecord>,
}

/// Applies one boundary-matrix operation to the sphere data: row operations
/// move lower spheres, column operations move upper spheres.
pub fn apply_to_spheres(sp: &mut SpherePair, op: &RowColOp) -> Result<(), PipelineError> {
    let factor = |f: &num_bigint::BigInt| {
        f.to_i64()
            .ok_or_else(|| PipelineError::ScenarioInconsistent(format!("slide multiplicity {f} too large")))
    };
    match op {
        RowColOp::AddRow {
            target,
            source,
            factor: f,
        } => sp.add_copies(false, target + 1, source + 1, factor(f)?),
        RowColOp::AddCol {
            target,
            source,
            factor: f,
        } => sp.add_copies(true, target + 1, source + 1, factor(f)?),
        RowColOp::SwapRows(a, b) => sp.swap(false, a + 1, b + 1),
        RowColOp::SwapCols(a, b) => sp.swap(true, a + 1, b + 1),
        RowColOp::NegateRow(a) => sp.negate(false, a + 1),
        RowColOp::NegateCol(a) => sp.negate(true, a + 1),
    }
    Ok(())
}

/// Reduces the 3-to-2 boundary matrix to the identity and slides the
/// spheres along so their algebraic counts stay equal to it.
pub fn stage1_normalize(sc: &CobordismScenario) -> Result<Stage1, PipelineError> {
    let m = &sc.boundary3;
    if m.rows() != sc.n || m.cols() != sc.n {
        return Err(PipelineError::ScenarioInconsistent(format!(
            "boundary3 is {}x{}, expected {n}x{n}",
            m.rows(),
            m.cols(),
            n = sc.n
        )));
    }
    let mut sp = sc.sphere_pair()?;
    if sp.algebraic() != *m {
        return Err(PipelineError::ScenarioInconsistent(
            "boundary3 differs from the algebraic intersection counts".to_string(),
        ));
    }
    let reduction = unimodular_reduce(m)?;
    for op in &reduction.ops {
        apply_to_spheres(&mut sp, op)?;
    }
    debug_assert!(sp.algebraic().is_identity());
    let slides = reduction.ops.iter().map(HandleSlideRecord::of).collect();
    Ok(Stage1 {
        sphere_pair: sp,
        ops: reduction.ops,
        slides,
    })
}

pub fn stage2_build(sc: &CobordismScenario, s1: &Stage1) -> Result<MiddleLevel, PipelineError> {
    Ok(build_middle(s1.sphere_pair.clone(), sc.ambient.clone(), sc.ordering)?)
}

#[derive(Debug, Clone)]
pub struct Stage3 {
    pub outcome: SearchOutcome,
    pub moves: Vec<PairedMove>,
    /// Present when the killers reached `x_1, …, x_R`.
    pub state: Option<DualState>,
}

/// Translates a move of the killer sub-presentation into a paired move.
/// Relators past the killers are stabilizer handles appended to the state.
fn lift_killer_move(mv: &Move, killers: usize, handles: usize) -> Result<PairedMove, PipelineError> {
    let at = |k: usize| if k < killers { k } else { handles + (k - killers) };
    Ok(match mv {
        Move::Slide {
            target,
            over,
            arc,
            sign,
        } => PairedMove::Slide {
            alpha: at(*target),
            beta: at(*over),
            arc: ArcClass::new(arc.clone(), Word::empty()),
            sign: *sign,
        },
        Move::Conjugate { target, by } => PairedMove::Conjugate {
            handle: at(*target),
            by: ArcClass::new(by.clone(), Word::empty()),
        },
        Move::Invert { target } => PairedMove::Invert { handle: at(*target) },
        Move::AddTrivial => PairedMove::TwoThreePair,
        other => {
            return Err(PipelineError::Evidence {
                step: "stage3".to_string(),
                detail: format!("move {other:?} cannot act on killer handles"),
            })
        }
    })
}

/// Slides the killer handles (and added 2-3 pairs) until relator `l`
/// reduces to `x_{l+1}` for every 1-handle.
pub fn stage3_kill_generators(
    ml: &MiddleLevel,
    budget: usize,
    oracle: &mut dyn Oracle,
) -> Result<Stage3, PipelineError> {
    let ds = DualState::from_middle(ml);
    let r = ml.one_handle_count();
    let sub = Presentation::new(r, ds.l1().relators()[..r].to_vec())?;
    let cfg = SearchConfig {
        budget,
        goal: Goal::KillGenerators { count: r },
        ..SearchConfig::default()
    };
    let outcome = oracle.decide(SearchKey::Stage3, &sub, &cfg)?;
    let Some(found) = outcome.yes() else {
        return Ok(Stage3 {
            outcome,
            moves: Vec::new(),
            state: None,
        });
    };
    let base = ds.handles().len();
    let moves = found
        .moves
        .iter()
        .map(|m| lift_killer_move(m, r, base))
        .collect::<Result<Vec<_>, _>>()?;
    let state = ds.replay(&moves)?;
    for l in 0..r {
        if state.l1().relator(l).reduced_signed() != vec![l as i32 + 1] {
            return Err(PipelineError::Evidence {
                step: "stage3".to_string(),
                detail: format!("killer {l} does not reduce to x{}", l + 1),
            });
        }
    }
    Ok(Stage3 {
        outcome,
        moves,
        state: Some(state),
    })
}

/// Handles outside the cork: non-killing ambient handles and 2-3 pairs.
pub fn complement_handles(ds: &DualState, killers: usize) -> Vec<HandleId> {
    ds.handles()
        .iter()
        .copied()
        .filter(|h| matches!(h, HandleId::Ambient(l) if *l >= killers) || matches!(h, HandleId::Stabilizer(_)))
        .collect()
}

/// `⟨t | r'_h : h in the complement⟩`.
pub fn complement_presentation(ds: &DualState, handles: &[HandleId]) -> Result<Presentation, PipelineError> {
    let rels = handles
        .iter()
        .map(|&h| Ok(ds.l3().relator(ds.index_of(h)?).clone()))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(Presentation::new(ds.l3().rank(), rels)?)
}

/// SHA-256 of the reduced lower relators with spare letters deleted.
pub fn l1_digest(words: &[Word]) -> String {
    let v: Vec<Vec<i32>> = words.iter().map(Word::reduced_signed).collect();
    hex::encode(Sha256::digest(serde_json::to_vec(&v).expect("serializes")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage5Record {
    pub complement_handles: Vec<HandleId>,
    pub first_homology: HomologyGroup,
    pub witness_moves: Vec<PairedMove>,
    pub complement: PresentationRecord,
    pub spare_pairs: usize,
    pub l1_digest_before: String,
    pub l1_digest_after: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Stage5 {
    pub record: Stage5Record,
    pub outcome: Option<SearchOutcome>,
    pub state: DualState,
}

/// Checks `H₁` of the complement, absorbs the scenario's commutator
/// witnesses, then asks whether the complement's dual relators normally
/// generate the upper group.
pub fn stage5_simply_connect(
    sc: &CobordismScenario,
    ds: &DualState,
    killers: usize,
    budget: usize,
    oracle: &mut dyn Oracle,
) -> Result<Stage5, PipelineError> {
    let handles = complement_handles(ds, killers);
    let before = complement_presentation(ds, &handles)?;
    let first_homology = before.first_homology();
    let base = ds.l1_without_spares();
    let digest_before = l1_digest(&base);
    let mut record = Stage5Record {
        complement_handles: handles.clone(),
        first_homology: first_homology.clone(),
        witness_moves: Vec::new(),
        complement: PresentationRecord::of(&before),
        spare_pairs: 0,
        l1_digest_before: digest_before.clone(),
        l1_digest_after: digest_before,
        diagnostics: Vec::new(),
    };
    if !first_homology.is_trivial() {
        return Ok(Stage5 {
            record,
            outcome: None,
            state: ds.clone(),
        });
    }
    let state = match kill_commutators(ds, &sc.witnesses) {
        Ok(s) => s,
        Err(e) => {
            record.diagnostics.push(format!("commutator witnesses rejected: {e}"));
            ds.clone()
        }
    };
    record.witness_moves = state.log()[ds.log().len()..].to_vec();
    record.spare_pairs = state.spare_count() - ds.spare_count();
    record.l1_digest_after = l1_digest(&state.l1_without_spares()[..base.len()]);
    let after = complement_presentation(&state, &handles)?;
    record.complement = PresentationRecord::of(&after);
    let cfg = SearchConfig::with_budget(budget);
    let outcome = oracle.decide(SearchKey::Stage5, &after.rebased(), &cfg)?;
    Ok(Stage5 {
        record,
        outcome: Some(outcome),
        state,
    })
}

/// A 3-handle of the cork, attached along `S_{k,i}` (k = 0 below, 1 above).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeHandle {
    pub k: u8,
    pub i: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorkDescription {
    /// 0-handle, all 1-handles, the killers and the spare 1-2 pairs.
    pub b_half: PresentationRecord,
    pub b_half_handles: Vec<HandleId>,
    /// `B_{1/2}` plus the `2n` sphere handles.
    pub a_half: PresentationRecord,
    pub a_half_handles: Vec<HandleId>,
    /// `A_0` and `A_1`: generators `x_1..x_R, y_1..y_n`.
    pub dotted: [PresentationRecord; 2],
    pub three_handles: Vec<ThreeHandle>,
    pub spare_pairs: usize,
    pub stabilizer_pairs: usize,
    pub complement_handles: Vec<HandleId>,
}

/// Collects the cork from the final state. `killers` are the killer words
/// after stage 3, used for the dotted sides.
pub fn stage4_assemble(ml: &MiddleLevel, killers: &[Word], ds: &DualState) -> CorkDescription {
    let r = ml.one_handle_count();
    let n = ml.n();
    let b_half_handles: Vec<HandleId> = ds
        .handles()
        .iter()
        .copied()
        .filter(|h| matches!(h, HandleId::Ambient(l) if *l < r) || matches!(h, HandleId::Spare(_)))
        .collect();
    let spheres = (0..2u8).flat_map(|k| (1..=n).map(move |i| HandleId::Sphere { k, i }));
    let a_half_handles: Vec<HandleId> = b_half_handles.iter().copied().chain(spheres).collect();
    let words = |hs: &[HandleId]| -> Vec<Word> {
        hs.iter()
            .map(|&h| ds.l1().relator(ds.index_of(h).expect("handle present")).clone())
            .collect()
    };
    let rank = ds.l1().rank();
    let dotted = [0u8, 1].map(|side| PresentationRecord::of(&dot_side_with(ml, side, killers).full));
    CorkDescription {
        b_half: PresentationRecord {
            rank,
            relators: words(&b_half_handles),
        },
        a_half: PresentationRecord {
            rank,
            relators: words(&a_half_handles),
        },
        b_half_handles,
        a_half_handles,
        dotted,
        three_handles: (0..2u8)
            .flat_map(|k| (1..=n).map(move |i| ThreeHandle { k, i }))
            .collect(),
        spare_pairs: ds.spare_count(),
        stabilizer_pairs: ds.stabilizer_count(),
        complement_handles: complement_handles(ds, r),
    }
}

/// `A ∪ A⁻¹` recorded by its two ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleCork {
    pub factors: [String; 2],
    /// `A_0 ∪ A_1`: bottom of `A`, then bottom of `A⁻¹` (the top of `A`).
    pub bottom: [PresentationRecord; 2],
    /// `A_1 ∪ A_0`.
    pub top: [PresentationRecord; 2],
    pub identification: String,
}

impl DoubleCork {
    /// The factor swap carries the bottom record onto the top record.
    pub fn swap_consistent(&self) -> bool {
        self.bottom[0] == self.top[1] && self.bottom[1] == self.top[0]
    }
}

/// Doubles a cork whose ball certificate is present.
pub fn double_cork<B>(cork: &CorkDescription, ball: Option<&B>) -> Result<DoubleCork, PipelineError> {
    if ball.is_none() {
        return Err(PipelineError::MissingBallCertificate);
    }
    let [a0, a1] = cork.dotted.clone();
    Ok(DoubleCork {
        factors: ["A".to_string(), "A^-1".to_string()],
        bottom: [a0.clone(), a1.clone()],
        top: [a1, a0],
        identification: "A is B^5, so A u A^-1 is B^4 x I with ends B^4_0 = A_0 u A_1 and B^4_1 = A_1 u A_0"
            .to_string(),
    })
}
