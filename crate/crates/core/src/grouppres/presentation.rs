use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::word::{Letter, Word};
use super::GroupError;
use crate::intmat::{cokernel, HomologyGroup, IntMatrix};

/// A replayable presentation move. Relator positions are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// `r_target ← r_target · arc · r_over^sign · arc̄`
    Slide {
        target: usize,
        over: usize,
        arc: Word,
        sign: i32,
    },
    /// `r_target ← by · r_target · by̅`
    Conjugate { target: usize, by: Word },
    /// `r_target ← r̄_target`
    Invert { target: usize },
    /// New generator x_{rank+1} with relator x_{rank+1}.
    Stabilize,
    /// Removes `generator` and the relator at `relator`, which must be that
    /// single letter. `reindex[g - 1]` is the new label of old generator `g`
    /// (0 for the removed one).
    Destabilize {
        generator: u32,
        relator: usize,
        reindex: Vec<u32>,
    },
    /// Appends the empty relator.
    AddTrivial,
    /// Removes a relator whose reduced form is empty.
    DropTrivial { relator: usize },
}

impl Move {
    /// Destabilization with its reindexing map filled in.
    pub fn destabilize(generator: u32, relator: usize, rank: usize) -> Move {
        let reindex = (1..=rank as u32)
            .map(|g| match g.cmp(&generator) {
                std::cmp::Ordering::Less => g,
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Greater => g - 1,
            })
            .collect();
        Move::Destabilize {
            generator,
            relator,
            reindex,
        }
    }

    pub fn slide(target: usize, over: usize, arc: Word, sign: i32) -> Move {
        Move::Slide {
            target,
            over,
            arc,
            sign,
        }
    }

    pub fn is_slide(&self) -> bool {
        matches!(self, Move::Slide { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Origin {
    rank: usize,
    relators: Vec<Word>,
}

/// A finite presentation `⟨x_1..x_rank | relators⟩` with its move history.
///
/// The presentation remembers where it started; replaying `log` from there
/// reproduces the current relators exactly, raw forms included.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Presentation {
    rank: usize,
    relators: Vec<Word>,
    origin: Arc<Origin>,
    log: Vec<Move>,
}

impl Presentation {
    pub fn new(rank: usize, relators: Vec<Word>) -> Result<Self, GroupError> {
        for r in &relators {
            r.check_rank(rank)?;
        }
        let origin = Arc::new(Origin {
            rank,
            relators: relators.clone(),
        });
        Ok(Presentation {
            rank,
            relators,
            origin,
            log: Vec::new(),
        })
    }

    /// Convenience constructor from signed label lists.
    pub fn from_signed(rank: usize, relators: &[&[i32]]) -> Result<Self, GroupError> {
        let words = relators
            .iter()
            .map(|r| Word::from_signed(r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rank, words)
    }

    /// The trivial presentation `⟨x_1..x_k | x_1, …, x_k⟩`.
    pub fn trivial(rank: usize) -> Self {
        let rels = (1..=rank as u32).map(Word::generator).collect();
        Self::new(rank, rels).expect("labels within rank")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn relator(&self, i: usize) -> &Word {
        &self.relators[i]
    }

    pub fn log(&self) -> &[Move] {
        &self.log
    }

    pub fn initial_rank(&self) -> usize {
        self.origin.rank
    }

    pub fn initial_relators(&self) -> &[Word] {
        &self.origin.relators
    }

    /// A presentation with the same relators and an empty history.
    pub fn rebased(&self) -> Presentation {
        Presentation::new(self.rank, self.relators.clone()).expect("already validated")
    }

    /// Relators in the form `x_{σ(1)}^{±1}, …` covering every generator once.
    pub fn is_trivial_up_to_order(&self) -> bool {
        if self.relators.len() != self.rank {
            return false;
        }
        let mut seen = vec![false; self.rank + 1];
        self.relators.iter().all(|r| match r.reduced() {
            [l] => !std::mem::replace(&mut seen[l.generator() as usize], true),
            _ => false,
        })
    }

    /// Exactly `⟨x_1..x_k | x_{σ(1)}, …, x_{σ(k)}⟩` with every letter positive.
    pub fn is_trivial(&self) -> bool {
        self.is_trivial_up_to_order()
            && self
                .relators
                .iter()
                .all(|r| r.reduced().iter().all(|l| l.is_positive()))
    }

    fn check_index(&self, index: usize) -> Result<(), GroupError> {
        if index < self.relators.len() {
            Ok(())
        } else {
            Err(GroupError::RelatorOutOfRange {
                index,
                count: self.relators.len(),
            })
        }
    }

    /// Applies a move in place and logs it.
    pub fn apply(&mut self, mv: Move) -> Result<(), GroupError> {
        match &mv {
            Move::Slide {
                target,
                over,
                arc,
                sign,
            } => {
                self.check_index(*target)?;
                self.check_index(*over)?;
                if target == over {
                    return Err(GroupError::SelfSlide { index: *target });
                }
                if sign.abs() != 1 {
                    return Err(GroupError::BadSign { sign: *sign });
                }
                arc.check_rank(self.rank)?;
                let moved = self.relators[*over].pow(*sign).conj(arc);
                self.relators[*target] = self.relators[*target].mul(&moved);
            }
            Move::Conjugate { target, by } => {
                self.check_index(*target)?;
                by.check_rank(self.rank)?;
                self.relators[*target] = self.relators[*target].conj(by);
            }
            Move::Invert { target } => {
                self.check_index(*target)?;
                self.relators[*target] = self.relators[*target].inv();
            }
            Move::Stabilize => {
                self.rank += 1;
                self.relators.push(Word::generator(self.rank as u32));
            }
            Move::AddTrivial => self.relators.push(Word::empty()),
            Move::DropTrivial { relator } => {
                self.check_index(*relator)?;
                if !self.relators[*relator].is_trivial() {
                    return Err(GroupError::NotTrivial { index: *relator });
                }
                self.relators.remove(*relator);
            }
            Move::Destabilize {
                generator,
                relator,
                reindex,
            } => {
                self.check_index(*relator)?;
                let g = *generator;
                let fail = |reason: &str| GroupError::Destabilize {
                    generator: g,
                    reason: reason.to_string(),
                };
                if g == 0 || g as usize > self.rank {
                    return Err(fail("generator out of range"));
                }
                match self.relators[*relator].reduced() {
                    [l] if l.generator() == g => {}
                    _ => return Err(fail("relator is not the single letter")),
                }
                let elsewhere = self
                    .relators
                    .iter()
                    .enumerate()
                    .any(|(i, r)| i != *relator && r.reduced().iter().any(|l| l.generator() == g));
                if elsewhere {
                    return Err(fail("generator occurs in another relator"));
                }
                let Move::Destabilize { reindex: expected, .. } = Move::destabilize(g, *relator, self.rank) else {
                    unreachable!()
                };
                if *reindex != expected {
                    return Err(fail("reindexing map does not match"));
                }
                self.relators.remove(*relator);
                for r in &mut self.relators {
                    *r = r.map_letters(|l| match reindex[l.generator() as usize - 1] {
                        0 => None,
                        new => Some(l.with_generator(new)),
                    });
                }
                self.rank -= 1;
            }
        }
        self.log.push(mv);
        Ok(())
    }

    /// Functional form of [`Presentation::apply`].
    pub fn with_move(&self, mv: Move) -> Result<Presentation, GroupError> {
        let mut p = self.clone();
        p.apply(mv)?;
        Ok(p)
    }

    pub fn tietze_slide(&self, l: usize, m: usize, arc: &Word, sign: i32) -> Result<Presentation, GroupError> {
        self.with_move(Move::slide(l, m, arc.clone(), sign))
    }

    pub fn stabilize(&self) -> Presentation {
        self.with_move(Move::Stabilize).expect("stabilize always applies")
    }

    /// Removes generator `g` together with its single-letter relator.
    pub fn destabilize(&self, g: u32) -> Result<Presentation, GroupError> {
        let relator = self
            .relators
            .iter()
            .position(|r| matches!(r.reduced(), [l] if l.generator() == g))
            .ok_or_else(|| GroupError::Destabilize {
                generator: g,
                reason: "no single-letter relator".to_string(),
            })?;
        self.with_move(Move::destabilize(g, relator, self.rank))
    }

    /// Applies moves in order, reporting the first one that fails.
    pub fn replay(&self, moves: &[Move]) -> Result<Presentation, GroupError> {
        let mut p = self.clone();
        for (step, mv) in moves.iter().enumerate() {
            p.apply(mv.clone()).map_err(|e| GroupError::Replay {
                step,
                reason: e.to_string(),
            })?;
        }
        Ok(p)
    }

    /// Replays the whole log from the origin and compares with `self`.
    pub fn verify_log(&self) -> Result<(), GroupError> {
        let start = Presentation::new(self.origin.rank, self.origin.relators.clone())?;
        let end = start.replay(&self.log)?;
        if end.rank == self.rank && end.relators == self.relators {
            Ok(())
        } else {
            Err(GroupError::Replay {
                step: self.log.len(),
                reason: "replayed relators differ from the current ones".to_string(),
            })
        }
    }

    pub fn abelianize(&self) -> IntMatrix {
        abelianize(self)
    }

    /// First homology of the presented group.
    pub fn first_homology(&self) -> HomologyGroup {
        cokernel(&self.abelianize().transpose())
    }
}

/// Relator-by-generator matrix of exponent sums.
pub fn abelianize(p: &Presentation) -> IntMatrix {
    let rows: Vec<Vec<i64>> = p
        .relators
        .iter()
        .map(|r| (1..=p.rank as u32).map(|g| r.exponent_sum(g)).collect())
        .collect();
    IntMatrix::from_rows(&rows, p.rank).expect("rows have rank entries")
}

/// Evidence that a presented group is nontrivial: its first homology is not zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianWitness {
    pub abelianization: IntMatrix,
    pub first_homology: HomologyGroup,
}

impl AbelianWitness {
    /// Some witness when H₁ of the presentation is nonzero.
    pub fn find(p: &Presentation) -> Option<AbelianWitness> {
        let h1 = p.first_homology();
        (!h1.is_trivial()).then(|| AbelianWitness {
            abelianization: p.abelianize(),
            first_homology: h1,
        })
    }

    /// Recomputes the abelianization and homology from scratch.
    pub fn verify(&self, p: &Presentation) -> bool {
        let m = p.abelianize();
        m == self.abelianization && cokernel(&m.transpose()) == self.first_homology && !self.first_homology.is_trivial()
    }
}

/// Text form: a `rank k` line, then one relator per line as signed labels.
/// `e` denotes the empty relator; `#` starts a comment.
impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {}", self.rank)?;
        for r in &self.relators {
            if r.reduced().is_empty() {
                writeln!(f, "e")?;
            } else {
                let parts: Vec<String> = r.reduced_signed().iter().map(ToString::to_string).collect();
                writeln!(f, "{}", parts.join(" "))?;
            }
        }
        Ok(())
    }
}

impl FromStr for Presentation {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rank = None;
        let mut relators = Vec::new();
        for (n, line) in s.lines().enumerate() {
            let line_no = n + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| GroupError::Parse { line: line_no, reason };
            if rank.is_none() {
                let rest = line
                    .strip_prefix("rank")
                    .ok_or_else(|| err("expected `rank <k>`".to_string()))?;
                rank = Some(
                    rest.trim()
                        .parse::<usize>()
                        .map_err(|e| err(format!("bad rank: {e}")))?,
                );
                continue;
            }
            if line == "e" {
                relators.push(Word::empty());
                continue;
            }
            let letters = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i32>()
                        .map_err(|e| err(format!("bad letter `{t}`: {e}")))
                        .and_then(|v| Letter::try_from(v).map_err(|e| err(e.to_string())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            relators.push(Word::new(letters));
        }
        let rank = rank.ok_or(GroupError::Parse {
            line: 0,
            reason: "missing `rank <k>` line".to_string(),
        })?;
        Presentation::new(rank, relators)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmat::smith_normal_form;

    fn p(rank: usize, rels: &[&[i32]]) -> Presentation {
        Presentation::from_signed(rank, rels).unwrap()
    }

    #[test]
    fn abelianize_examples() {
        assert_eq!(p(1, &[&[1, 1]]).abelianize(), IntMatrix::square(&[&[2]]));
        let comm = p(2, &[&[1, 2, -1, -2]]).abelianize();
        assert!(comm.is_zero());
        assert_eq!((comm.rows(), comm.cols()), (1, 2));
    }

    #[test]
    fn cancelling_slide() {
        let q = p(1, &[&[1], &[1]]).tietze_slide(1, 0, &Word::empty(), -1).unwrap();
        assert!(q.relator(1).is_trivial());
        assert_eq!(q.relator(1).raw_signed(), vec![1, -1]);
    }

    #[test]
    fn slide_with_arc() {
        let q = p(2, &[&[1], &[2]]).tietze_slide(0, 1, &Word::of(&[1]), 1).unwrap();
        assert_eq!(q.relator(0).reduced_signed(), vec![1, 1, 2, -1]);
    }

    #[test]
    fn slide_adds_rows_in_abelianization() {
        let a = p(3, &[&[1, 2, -3], &[2, 2, 1], &[3]]);
        let before = a.abelianize();
        let after = a.tietze_slide(0, 1, &Word::of(&[3, -1]), -1).unwrap().abelianize();
        for c in 0..3 {
            assert_eq!(after.get(0, c), &(before.get(0, c) - before.get(1, c)));
        }
    }

    #[test]
    fn self_slide_rejected() {
        assert_eq!(
            p(1, &[&[1]]).tietze_slide(0, 0, &Word::empty(), 1),
            Err(GroupError::SelfSlide { index: 0 })
        );
    }

    #[test]
    fn stabilize_round_trip() {
        let empty = Presentation::new(0, vec![]).unwrap();
        let s = empty.stabilize();
        assert_eq!(s.rank(), 1);
        assert_eq!(s.relators(), &[Word::generator(1)]);

        let base = p(2, &[&[1, 2], &[2, 1, 2]]);
        let back = base.stabilize().destabilize(3).unwrap();
        assert_eq!(back.rank(), base.rank());
        assert_eq!(back.relators(), base.relators());
    }

    #[test]
    fn destabilize_precondition() {
        let q = p(2, &[&[1], &[2, 1]]);
        assert!(matches!(q.destabilize(1), Err(GroupError::Destabilize { .. })));
    }

    #[test]
    fn destabilize_reindexes_higher_generators() {
        let q = p(3, &[&[2, 3], &[1], &[3, 3]]).destabilize(1).unwrap();
        assert_eq!(q.rank(), 2);
        assert_eq!(q.relator(0).reduced_signed(), vec![1, 2]);
        assert_eq!(q.relator(1).reduced_signed(), vec![2, 2]);
    }

    #[test]
    fn log_replays() {
        let mut q = p(2, &[&[1, 2], &[2]]);
        q.apply(Move::slide(0, 1, Word::empty(), -1)).unwrap();
        q.apply(Move::Conjugate {
            target: 1,
            by: Word::of(&[1]),
        })
        .unwrap();
        q.apply(Move::Invert { target: 0 }).unwrap();
        q.apply(Move::Stabilize).unwrap();
        q.apply(Move::AddTrivial).unwrap();
        q.apply(Move::DropTrivial { relator: 3 }).unwrap();
        q.verify_log().unwrap();
        assert_eq!(q.log().len(), 6);
    }

    #[test]
    fn tampered_destabilize_map_rejected() {
        let q = p(2, &[&[1], &[2]]);
        let bad = Move::Destabilize {
            generator: 1,
            relator: 0,
            reindex: vec![0, 2],
        };
        assert!(q.with_move(bad).is_err());
    }

    #[test]
    fn witness_for_nontrivial_h1() {
        let q = p(1, &[&[1, 1]]);
        let w = AbelianWitness::find(&q).unwrap();
        assert_eq!(w.abelianization, IntMatrix::square(&[&[2]]));
        assert!(w.verify(&q));
        assert!(AbelianWitness::find(&p(2, &[&[1, 2], &[2]])).is_none());
    }

    #[test]
    fn text_round_trip() {
        let q: Presentation = "# comment\nrank 2\n1 -2 1\ne\n2\n".parse().unwrap();
        assert_eq!(q.rank(), 2);
        assert_eq!(q.relators().len(), 3);
        assert!(q.relator(1).is_trivial());
        assert_eq!(q.to_string(), "rank 2\n1 -2 1\ne\n2\n");
        assert!("rank 1\n2\n".parse::<Presentation>().is_err());
        assert!("1 2\n".parse::<Presentation>().is_err());
    }

    #[test]
    fn move_json_shape() {
        let mv = Move::slide(1, 0, Word::of(&[-2]), -1);
        let json = serde_json::to_string(&mv).unwrap();
        assert_eq!(json, r#"{"move":"slide","target":1,"over":0,"arc":[-2],"sign":-1}"#);
        assert_eq!(serde_json::from_str::<Move>(&json).unwrap(), mv);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn relator() -> impl Strategy<Value = Vec<i32>> {
            prop::collection::vec(prop_oneof![1..=3i32, -3..=-1i32], 0..8)
        }

        proptest! {
            #[test]
            fn slides_preserve_smith_form(
                rels in prop::collection::vec(relator(), 2..5),
                picks in prop::collection::vec((0usize..16, 0usize..16, relator(), any::<bool>()), 1..6),
            ) {
                let words = rels.iter().map(|r| Word::of(r)).collect();
                let mut q = Presentation::new(3, words).unwrap();
                let snf = smith_normal_form(&q.abelianize()).diagonal_entries();
                let n = q.relators().len();
                for (l, m, arc, pos) in picks {
                    let (l, m) = (l % n, m % n);
                    if l == m { continue; }
                    q.apply(Move::slide(l, m, Word::of(&arc), if pos { 1 } else { -1 })).unwrap();
                }
                prop_assert_eq!(smith_normal_form(&q.abelianize()).diagonal_entries(), snf);
                prop_assert!(q.verify_log().is_ok());
            }
        }
    }
}
