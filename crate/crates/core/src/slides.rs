//! Paired handle slides in the lower and upper levels.
//!
//! Every 2-handle of the middle level has an attaching word in the free group
//! of the lower level `L1` and a cocore word in the free group of the upper
//! level `L3`. Sliding handle α over β in `L1` slides the cocore of β over the
//! cocore of α in `L3`, so each move here updates both presentations at once:
//!
//! ```text
//! L1: r_α  ← r_α  · λ · r_β^ε · λ̄
//! L3: r'_β ← r'_β · λ̄' · r'_α^ε · λ'
//! ```
//!
//! where `λ = arc.g1` and `λ' = arc.g3`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grouppres::{
    normally_generates, AbelianWitness, GroupError, Move, Presentation, SearchConfig, TriState, Trivialization, Word,
};
use crate::middle::MiddleLevel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlideError {
    #[error("handle {index} cannot slide over itself")]
    SameHandle { index: usize },
    #[error("no handle {handle:?} in the current state")]
    UnknownHandle { handle: HandleId },
    #[error("{l1} lower relators but {l3} upper relators")]
    CountMismatch { l1: usize, l3: usize },
    #[error("b expression evaluates to {found}, but the witness claims {claimed}")]
    MalformedWitness { claimed: Word, found: Word },
    #[error("no expression for the arc class within budget {budget}")]
    WitnessInsufficient { budget: usize },
    #[error("paired move {step} does not replay: {reason}")]
    Replay { step: usize, reason: String },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Name of a 2-handle, stable under slides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandleId {
    /// Ambient handle, 0-based.
    Ambient(usize),
    /// `H_{k,i}`, `i` 1-based.
    Sphere { k: u8, i: usize },
    /// 2-handle of the j-th added cancelling 2-3 pair.
    Stabilizer(usize),
    /// 2-handle of the j-th added cancelling 1-2 pair.
    Spare(usize),
}

/// An arc in the middle level, recorded by its images in both levels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArcClass {
    pub g1: Word,
    pub g3: Word,
}

impl ArcClass {
    pub fn new(g1: Word, g3: Word) -> Self {
        ArcClass { g1, g3 }
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn mul(&self, other: &ArcClass) -> ArcClass {
        ArcClass::new(self.g1.mul(&other.g1), self.g3.mul(&other.g3))
    }

    pub fn inv(&self) -> ArcClass {
        ArcClass::new(self.g1.inv(), self.g3.inv())
    }

    pub fn same_element(&self, other: &ArcClass) -> bool {
        self.g1.same_element(&other.g1) && self.g3.same_element(&other.g3)
    }
}

/// A move applied to both levels. Handle positions are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum PairedMove {
    Slide {
        alpha: usize,
        beta: usize,
        arc: ArcClass,
        sign: i32,
    },
    /// `Slide(λ, +1)` followed by `Slide(μ, -1)`.
    DoubleSlide {
        alpha: usize,
        beta: usize,
        lambda: ArcClass,
        mu: ArcClass,
    },
    Invert {
        handle: usize,
    },
    Conjugate {
        handle: usize,
        by: ArcClass,
    },
    /// A cancelling 2-3 pair: empty relator below, new generator above.
    TwoThreePair,
    /// A cancelling 1-2 pair: new generator below, empty relator above.
    OneTwoPair,
}

impl PairedMove {
    /// The lower and upper presentation moves this paired move performs.
    pub fn expand(&self) -> (Vec<Move>, Vec<Move>) {
        match self {
            PairedMove::Slide { alpha, beta, arc, sign } => (
                vec![Move::slide(*alpha, *beta, arc.g1.clone(), *sign)],
                vec![Move::slide(*beta, *alpha, arc.g3.inv(), *sign)],
            ),
            PairedMove::DoubleSlide {
                alpha,
                beta,
                lambda,
                mu,
            } => (
                vec![
                    Move::slide(*alpha, *beta, lambda.g1.clone(), 1),
                    Move::slide(*alpha, *beta, mu.g1.clone(), -1),
                ],
                vec![
                    Move::slide(*beta, *alpha, lambda.g3.inv(), 1),
                    Move::slide(*beta, *alpha, mu.g3.inv(), -1),
                ],
            ),
            PairedMove::Invert { handle } => (
                vec![Move::Invert { target: *handle }],
                vec![Move::Invert { target: *handle }],
            ),
            PairedMove::Conjugate { handle, by } => (
                vec![Move::Conjugate {
                    target: *handle,
                    by: by.g1.clone(),
                }],
                vec![Move::Conjugate {
                    target: *handle,
                    by: by.g3.clone(),
                }],
            ),
            PairedMove::TwoThreePair => (vec![Move::AddTrivial], vec![Move::Stabilize]),
            PairedMove::OneTwoPair => (vec![Move::Stabilize], vec![Move::AddTrivial]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Start {
    l1: Presentation,
    l3: Presentation,
    handles: Vec<HandleId>,
}

/// Both presentations of the middle level's 2-handles, kept in step.
///
/// Relator `k` of `l1` and relator `k` of `l3` belong to `handles[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualState {
    l1: Presentation,
    l3: Presentation,
    handles: Vec<HandleId>,
    log: Vec<PairedMove>,
    start: Arc<Start>,
}

impl DualState {
    pub fn new(l1: Presentation, l3: Presentation, handles: Vec<HandleId>) -> Result<Self, SlideError> {
        if l1.relators().len() != l3.relators().len() {
            return Err(SlideError::CountMismatch {
                l1: l1.relators().len(),
                l3: l3.relators().len(),
            });
        }
        assert_eq!(handles.len(), l1.relators().len(), "one name per handle");
        let (l1, l3) = (l1.rebased(), l3.rebased());
        let start = Arc::new(Start {
            l1: l1.clone(),
            l3: l3.clone(),
            handles: handles.clone(),
        });
        Ok(DualState {
            l1,
            l3,
            handles,
            log: Vec::new(),
            start,
        })
    }

    /// Ambient handles, then `H_{0,1..n}`, then `H_{1,1..n}`.
    pub fn from_middle(ml: &MiddleLevel) -> Self {
        let amb = ml.ambient();
        let n = ml.n();
        let mut handles: Vec<HandleId> = (0..amb.handles.len()).map(HandleId::Ambient).collect();
        let mut l1: Vec<Word> = amb.handles.iter().map(|h| h.relator_l1.clone()).collect();
        let mut l3: Vec<Word> = amb.handles.iter().map(|h| h.relator_l3.clone()).collect();
        for k in 0..2u8 {
            for i in 1..=n {
                handles.push(HandleId::Sphere { k, i });
                l1.push(if k == 0 { ml.h0_relator(i) } else { ml.h1_relator(i) });
                l3.push(ml.sphere_dual(k, i));
            }
        }
        let l1 = Presentation::new(ml.one_handle_count(), l1).expect("checked by build_middle");
        let l3 = Presentation::new(amb.t, l3).expect("checked by build_middle");
        Self::new(l1, l3, handles).expect("equal counts")
    }

    pub fn l1(&self) -> &Presentation {
        &self.l1
    }

    pub fn l3(&self) -> &Presentation {
        &self.l3
    }

    pub fn handles(&self) -> &[HandleId] {
        &self.handles
    }

    pub fn log(&self) -> &[PairedMove] {
        &self.log
    }

    pub fn index_of(&self, h: HandleId) -> Result<usize, SlideError> {
        self.handles
            .iter()
            .position(|&x| x == h)
            .ok_or(SlideError::UnknownHandle { handle: h })
    }

    pub fn spare_count(&self) -> usize {
        self.handles.iter().filter(|h| matches!(h, HandleId::Spare(_))).count()
    }

    pub fn stabilizer_count(&self) -> usize {
        self.handles
            .iter()
            .filter(|h| matches!(h, HandleId::Stabilizer(_)))
            .count()
    }

    /// Lower rank before any spare 1-handles were added.
    pub fn base_l1_rank(&self) -> usize {
        self.l1.rank() - self.spare_count()
    }

    /// Lower relators with the spare generators set to 1.
    pub fn l1_without_spares(&self) -> Vec<Word> {
        let base = self.base_l1_rank() as u32;
        self.l1
            .relators()
            .iter()
            .map(|w| w.map_letters(|l| (l.generator() <= base).then_some(l)).reduce())
            .collect()
    }

    pub fn apply(&mut self, mv: PairedMove) -> Result<(), SlideError> {
        match &mv {
            PairedMove::Slide { alpha, beta, .. } | PairedMove::DoubleSlide { alpha, beta, .. } if alpha == beta => {
                return Err(SlideError::SameHandle { index: *alpha });
            }
            _ => {}
        }
        let (m1, m3) = mv.expand();
        let mut l1 = self.l1.clone();
        let mut l3 = self.l3.clone();
        for m in m1 {
            l1.apply(m)?;
        }
        for m in m3 {
            l3.apply(m)?;
        }
        match mv {
            PairedMove::TwoThreePair => self.handles.push(HandleId::Stabilizer(self.stabilizer_count())),
            PairedMove::OneTwoPair => self.handles.push(HandleId::Spare(self.spare_count())),
            _ => {}
        }
        self.l1 = l1;
        self.l3 = l3;
        self.log.push(mv);
        Ok(())
    }

    pub fn with_move(&self, mv: PairedMove) -> Result<DualState, SlideError> {
        let mut s = self.clone();
        s.apply(mv)?;
        Ok(s)
    }

    pub fn paired_slide(&self, alpha: usize, beta: usize, arc: ArcClass, sign: i32) -> Result<DualState, SlideError> {
        self.with_move(PairedMove::Slide { alpha, beta, arc, sign })
    }

    /// The state the log starts from.
    pub fn initial(&self) -> DualState {
        DualState {
            l1: self.start.l1.clone(),
            l3: self.start.l3.clone(),
            handles: self.start.handles.clone(),
            log: Vec::new(),
            start: self.start.clone(),
        }
    }

    pub fn replay(&self, moves: &[PairedMove]) -> Result<DualState, SlideError> {
        let mut s = self.clone();
        for (step, mv) in moves.iter().enumerate() {
            s.apply(mv.clone()).map_err(|e| SlideError::Replay {
                step,
                reason: e.to_string(),
            })?;
        }
        Ok(s)
    }

    /// Replays the paired log from the start and compares both sides.
    pub fn verify_log(&self) -> Result<(), SlideError> {
        let again = self.initial().replay(&self.log)?;
        if again.l1.relators() == self.l1.relators()
            && again.l3.relators() == self.l3.relators()
            && again.handles == self.handles
        {
            self.l1.verify_log()?;
            self.l3.verify_log()?;
            Ok(())
        } else {
            Err(SlideError::Replay {
                step: self.log.len(),
                reason: "replayed state differs".to_string(),
            })
        }
    }
}

/// `r_α ← r_α [μ̄λ, r_β]^μ` below and `r'_β ← r'_β [μ'λ̄', r'_α]^{μ̄'}` above.
pub fn double_slide(
    s: &DualState,
    alpha: usize,
    beta: usize,
    lambda: ArcClass,
    mu: ArcClass,
) -> Result<DualState, SlideError> {
    s.with_move(PairedMove::DoubleSlide {
        alpha,
        beta,
        lambda,
        mu,
    })
}

/// Images of one loop on a handle's torus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopImage {
    pub l1: Word,
    pub l3: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusLoops {
    pub gamma1: LoopImage,
    pub gamma3: LoopImage,
}

/// Per 2-handle α, the loops `γ_{α,1}` and `γ_{α,3}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToriData {
    pub loops: Vec<TorusLoops>,
}

impl ToriData {
    /// `γ_{α,1}` is trivial below and reads `r'_α` above; `γ_{α,3}` reads
    /// `r_α` below and is trivial above.
    pub fn from_state(s: &DualState) -> Self {
        let loops = s
            .l1()
            .relators()
            .iter()
            .zip(s.l3().relators())
            .map(|(r1, r3)| TorusLoops {
                gamma1: LoopImage {
                    l1: Word::empty(),
                    l3: r3.reduce(),
                },
                gamma3: LoopImage {
                    l1: r1.reduce(),
                    l3: Word::empty(),
                },
            })
            .collect();
        ToriData { loops }
    }

    fn image(&self, handle: usize, torus_loop: u8) -> &LoopImage {
        let t = &self.loops[handle];
        if torus_loop == 1 {
            &t.gamma1
        } else {
            &t.gamma3
        }
    }

    /// Whether the `γ_{·,1}` normally generate the upper group and the
    /// `γ_{·,3}` the lower one.
    pub fn normal_generation(
        &self,
        l1_rank: usize,
        l3_rank: usize,
        cfg: &SearchConfig,
    ) -> Result<[TriState<Trivialization, AbelianWitness>; 2], GroupError> {
        let up: Vec<Word> = self.loops.iter().map(|t| t.gamma1.l3.clone()).collect();
        let down: Vec<Word> = self.loops.iter().map(|t| t.gamma3.l1.clone()).collect();
        Ok([
            normally_generates(&up, l3_rank, cfg)?,
            normally_generates(&down, l1_rank, cfg)?,
        ])
    }
}

/// One factor `u · γ^sign · ū` of an arc expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcFactor {
    pub handle: usize,
    /// 1 for `γ_{handle,1}`, 3 for `γ_{handle,3}`.
    pub torus_loop: u8,
    pub sign: i32,
    pub conjugator: ArcClass,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcExpression {
    pub factors: Vec<ArcFactor>,
}

impl ArcExpression {
    /// The arc class obtained by composing the factors left to right.
    pub fn evaluate(&self, tori: &ToriData) -> ArcClass {
        self.factors.iter().fold(ArcClass::trivial(), |acc, f| {
            let img = tori.image(f.handle, f.torus_loop);
            acc.mul(&ArcClass::new(
                img.l1.pow(f.sign).conj(&f.conjugator.g1),
                img.l3.pow(f.sign).conj(&f.conjugator.g3),
            ))
        })
    }
}

fn short_words(rank: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for g in 1..=rank as i32 {
        out.push(Word::of(&[g]));
        out.push(Word::of(&[-g]));
    }
    out
}

/// Finds a product of at most three conjugated torus loops whose images are
/// `target`. Conjugators have images of length at most one on each side.
/// Shorter products are preferred; ties go to the first in enumeration order.
pub fn realize_arc_class(
    target: &ArcClass,
    tori: &ToriData,
    l1_rank: usize,
    l3_rank: usize,
    budget: usize,
) -> Result<ArcExpression, SlideError> {
    if target.g1.is_trivial() && target.g3.is_trivial() {
        return Ok(ArcExpression::default());
    }
    let mut factors = Vec::new();
    for handle in 0..tori.loops.len() {
        for torus_loop in [1u8, 3] {
            for sign in [1, -1] {
                for u1 in short_words(l1_rank) {
                    for u3 in short_words(l3_rank) {
                        factors.push(ArcFactor {
                            handle,
                            torus_loop,
                            sign,
                            conjugator: ArcClass::new(u1.clone(), u3),
                        });
                    }
                }
            }
        }
    }
    let images: Vec<ArcClass> = factors
        .iter()
        .map(|f| {
            ArcExpression {
                factors: vec![f.clone()],
            }
            .evaluate(tori)
        })
        .collect();
    let mut spent = 0usize;
    let mut frontier: Vec<(Vec<usize>, ArcClass)> = vec![(Vec::new(), ArcClass::trivial())];
    for _ in 0..3 {
        let mut next = Vec::new();
        for (seq, img) in &frontier {
            for (k, f) in images.iter().enumerate() {
                spent += 1;
                if spent > budget {
                    return Err(SlideError::WitnessInsufficient { budget });
                }
                let prod = img.mul(f);
                let mut s = seq.clone();
                s.push(k);
                if prod.same_element(target) {
                    return Ok(ArcExpression {
                        factors: s.into_iter().map(|k| factors[k].clone()).collect(),
                    });
                }
                next.push((s, prod));
            }
        }
        frontier = next;
    }
    Err(SlideError::WitnessInsufficient { budget })
}

/// One conjugated dual relator in a `b` expression: `u · r'_h^sign · ū`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BFactor {
    pub handle: HandleId,
    pub sign: i32,
    #[serde(default)]
    pub conjugator: Word,
}

/// `b` as a product of conjugates of dual relators, with its claimed value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BExpression {
    pub word: Word,
    pub factors: Vec<BFactor>,
}

/// `[a, b]^c` to be appended to a dual relator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commutator {
    pub a: Word,
    pub b: BExpression,
    #[serde(default)]
    pub c: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutatorTarget {
    pub handle: HandleId,
    pub commutators: Vec<Commutator>,
}

/// Replaces `r'_l` by `r'_l ∏ [a, b]^c` for every target.
///
/// Each `b` costs one cancelling 1-2 pair σ. The factors of `b` are slid
/// onto σ's cocore, so `r'_σ = b`; a double slide of σ over `l` whose arcs
/// are trivial below then appends `[a, r'_σ]^c` to `r'_l`. Lower relators
/// change only by letters of the spare generators.
pub fn kill_commutators(s: &DualState, targets: &[CommutatorTarget]) -> Result<DualState, SlideError> {
    let mut s = s.clone();
    for target in targets {
        let l = s.index_of(target.handle)?;
        for comm in &target.commutators {
            s.apply(PairedMove::OneTwoPair)?;
            let sigma = s.handles.len() - 1;
            for f in &comm.b.factors {
                let h = s.index_of(f.handle)?;
                s.apply(PairedMove::Slide {
                    alpha: h,
                    beta: sigma,
                    arc: ArcClass::new(Word::empty(), f.conjugator.inv()),
                    sign: f.sign,
                })?;
            }
            let found = s.l3.relator(sigma).reduce();
            if !found.same_element(&comm.b.word) {
                return Err(SlideError::MalformedWitness {
                    claimed: comm.b.word.clone(),
                    found,
                });
            }
            let c_inv = comm.c.inv();
            s.apply(PairedMove::DoubleSlide {
                alpha: sigma,
                beta: l,
                lambda: ArcClass::new(Word::empty(), comm.a.inv().mul(&c_inv)),
                mu: ArcClass::new(Word::empty(), c_inv),
            })?;
        }
    }
    Ok(s)
}
