//! Bounded, deterministic search for trivializing move sequences.
//!
//! Triviality of a presentation is only semidecidable, so the search returns
//! a three-valued answer. States are explored best-first by total relator
//! length; ties break on depth and then on generation order, and children are
//! generated in a fixed move order, so the result depends only on the input
//! and the configuration.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use super::presentation::{AbelianWitness, Move, Presentation};
use super::word::{invert_letters, reduce_into, Letter, Word};
use super::GroupError;

/// Yes / No / Unknown, where Yes and No carry checkable evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TriState<Y, N> {
    Yes { evidence: Y },
    No { witness: N },
    Unknown { reason: UnknownReason },
}

impl<Y, N> TriState<Y, N> {
    pub fn is_yes(&self) -> bool {
        matches!(self, TriState::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, TriState::No { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, TriState::Unknown { .. })
    }

    pub fn yes(&self) -> Option<&Y> {
        match self {
            TriState::Yes { evidence } => Some(evidence),
            _ => None,
        }
    }

    pub fn no(&self) -> Option<&N> {
        match self {
            TriState::No { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn unknown(detail: impl Into<String>) -> Self {
        TriState::Unknown {
            reason: UnknownReason::Inconclusive { detail: detail.into() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnknownReason {
    BudgetExhausted { budget: usize, generated: usize },
    Inconclusive { detail: String },
}

/// What the search is trying to reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    /// `⟨x_1..x_k | x_1, …, x_k⟩` for some k (relators in any order).
    Trivial,
    /// Relator `l` reduces to exactly `x_{l+1}` for every `l < count`.
    /// Relators are never removed; extra relators may be appended with
    /// [`Move::AddTrivial`] up to the stabilization cap.
    KillGenerators { count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Maximum number of generated search states.
    pub budget: usize,
    /// Longest free arc word tried in slides, besides positional arcs.
    pub max_arc_len: usize,
    /// Maximum number of stabilizations; `None` means rank + 4.
    pub stabilization_cap: Option<usize>,
    pub goal: Goal,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 200_000,
            max_arc_len: 1,
            stabilization_cap: None,
            goal: Goal::Trivial,
        }
    }
}

impl SearchConfig {
    pub fn with_budget(budget: usize) -> Self {
        SearchConfig {
            budget,
            ..Self::default()
        }
    }
}

/// A move sequence that takes the input presentation to the goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trivialization {
    pub moves: Vec<Move>,
    pub generated: usize,
}

impl Trivialization {
    /// Replays the moves on `p` and checks that the result is trivial.
    pub fn verify(&self, p: &Presentation) -> Result<Presentation, GroupError> {
        let end = p.rebased().replay(&self.moves)?;
        if end.is_trivial() {
            Ok(end)
        } else {
            Err(GroupError::Replay {
                step: self.moves.len(),
                reason: "final presentation is not trivial".to_string(),
            })
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    rank: u32,
    rels: Vec<Vec<Letter>>,
}

impl State {
    fn of(p: &Presentation) -> Self {
        State {
            rank: p.rank() as u32,
            rels: p.relators().iter().map(|r| r.reduced().to_vec()).collect(),
        }
    }

    fn score(&self) -> usize {
        self.rels.iter().map(Vec::len).sum::<usize>() + self.rels.len() + self.rank as usize
    }

    fn trivial_up_to_order(&self) -> bool {
        if self.rels.len() != self.rank as usize {
            return false;
        }
        let mut seen = vec![false; self.rank as usize + 1];
        self.rels.iter().all(|r| match r[..] {
            [l] => !std::mem::replace(&mut seen[l.generator() as usize], true),
            _ => false,
        })
    }

    fn kills(&self, count: usize) -> bool {
        (0..count).all(|l| matches!(self.rels[l][..], [x] if x.generator() as usize == l + 1))
    }

    fn reached(&self, goal: Goal) -> bool {
        match goal {
            Goal::Trivial => self.trivial_up_to_order(),
            Goal::KillGenerators { count } => self.kills(count),
        }
    }

    /// Inversions that turn a reached state into the exact goal form.
    fn finishing_moves(&self, goal: Goal) -> Vec<Move> {
        let range = match goal {
            Goal::Trivial => 0..self.rels.len(),
            Goal::KillGenerators { count } => 0..count,
        };
        range
            .filter(|&i| !self.rels[i][0].is_positive())
            .map(|target| Move::Invert { target })
            .collect()
    }
}

struct Node {
    parent: usize,
    mv: Option<Move>,
    depth: usize,
    state: Option<State>,
    stabilizations: usize,
}

/// All reduced words of length ≤ `max_len` over `rank` generators, shortest first.
fn short_words(rank: u32, max_len: usize) -> Vec<Vec<Letter>> {
    let letters: Vec<Letter> = (1..=rank).flat_map(|g| [Letter::pos(g), Letter::neg(g)]).collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if w.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut v: Vec<Letter> = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn arc_key(a: &[Letter]) -> (usize, Vec<i32>) {
    (a.len(), a.iter().map(|l| l.signed()).collect())
}

/// Children of `s` in the fixed enumeration order:
/// destabilize / drop, slides by ascending (target, over, |arc|), conjugations,
/// inversions, stabilization.
fn children(s: &State, goal: Goal, cfg: &SearchConfig, stabs_left: bool, mut emit: impl FnMut(Move, State)) {
    let n = s.rels.len();
    if goal == Goal::Trivial {
        for (i, r) in s.rels.iter().enumerate() {
            if let [l] = r[..] {
                let g = l.generator();
                let elsewhere = s
                    .rels
                    .iter()
                    .enumerate()
                    .any(|(j, o)| j != i && o.iter().any(|x| x.generator() == g));
                if !elsewhere {
                    let mut rels: Vec<Vec<Letter>> = Vec::with_capacity(n - 1);
                    for (j, o) in s.rels.iter().enumerate() {
                        if j != i {
                            rels.push(
                                o.iter()
                                    .map(|x| {
                                        if x.generator() > g {
                                            x.with_generator(x.generator() - 1)
                                        } else {
                                            *x
                                        }
                                    })
                                    .collect(),
                            );
                        }
                    }
                    emit(
                        Move::destabilize(g, i, s.rank as usize),
                        State { rank: s.rank - 1, rels },
                    );
                }
            }
            if r.is_empty() {
                let mut rels = s.rels.clone();
                rels.remove(i);
                emit(Move::DropTrivial { relator: i }, State { rank: s.rank, rels });
            }
        }
    }

    let free_arcs = short_words(s.rank, cfg.max_arc_len);
    for l in 0..n {
        let target = &s.rels[l];
        let mut arcs: Vec<Vec<Letter>> = free_arcs.clone();
        // Positional arcs: the inverse of each suffix inserts at that position.
        for cut in 0..target.len() {
            arcs.push(invert_letters(&target[cut..]));
        }
        arcs.sort_by_key(|a| arc_key(a));
        arcs.dedup();
        for m in 0..n {
            if m == l {
                continue;
            }
            let over = &s.rels[m];
            let over_inv = invert_letters(over);
            for arc in &arcs {
                let arc_inv = invert_letters(arc);
                for sign in [1, -1] {
                    let mut r = target.clone();
                    reduce_into(&mut r, arc);
                    reduce_into(&mut r, if sign == 1 { over } else { &over_inv });
                    reduce_into(&mut r, &arc_inv);
                    let mut rels = s.rels.clone();
                    rels[l] = r;
                    emit(
                        Move::slide(l, m, Word::from_reduced(arc.clone()), sign),
                        State { rank: s.rank, rels },
                    );
                }
            }
        }
    }

    for l in 0..n {
        for g in 1..=s.rank {
            for letter in [Letter::pos(g), Letter::neg(g)] {
                let mut r = vec![letter];
                reduce_into(&mut r, &s.rels[l]);
                reduce_into(&mut r, &[letter.inverse()]);
                let mut rels = s.rels.clone();
                rels[l] = r;
                emit(
                    Move::Conjugate {
                        target: l,
                        by: Word::from_reduced(vec![letter]),
                    },
                    State { rank: s.rank, rels },
                );
            }
        }
    }

    for l in 0..n {
        let mut rels = s.rels.clone();
        rels[l] = invert_letters(&s.rels[l]);
        emit(Move::Invert { target: l }, State { rank: s.rank, rels });
    }

    if stabs_left {
        match goal {
            Goal::Trivial => {
                let mut rels = s.rels.clone();
                rels.push(vec![Letter::pos(s.rank + 1)]);
                emit(Move::Stabilize, State { rank: s.rank + 1, rels });
            }
            Goal::KillGenerators { .. } => {
                let mut rels = s.rels.clone();
                rels.push(Vec::new());
                emit(Move::AddTrivial, State { rank: s.rank, rels });
            }
        }
    }
}

/// Searches for a move sequence taking `p` to the configured goal.
///
/// Returns No with an abelianization witness when H₁ ≠ 0 (no move sequence
/// can exist), Yes with a replayable sequence when the goal is reached, and
/// Unknown once the state budget is spent.
pub fn trivialize_search(p: &Presentation, cfg: &SearchConfig) -> TriState<Trivialization, AbelianWitness> {
    if let Some(witness) = AbelianWitness::find(p) {
        return TriState::No { witness };
    }
    if let Goal::KillGenerators { count } = cfg.goal {
        if count > p.relators().len() || count != p.rank() {
            return TriState::unknown(format!("killer goal needs {count} relators over {count} generators"));
        }
    }
    let cap = cfg.stabilization_cap.unwrap_or(p.rank() + 4);
    let root = State::of(p);

    let finish = |nodes: &[Node], leaf: usize, state: &State, generated: usize| {
        let mut moves = Vec::new();
        let mut at = leaf;
        while let Some(mv) = &nodes[at].mv {
            moves.push(mv.clone());
            at = nodes[at].parent;
        }
        moves.reverse();
        moves.extend(state.finishing_moves(cfg.goal));
        let found = Trivialization { moves, generated };
        debug_assert!(
            cfg.goal != Goal::Trivial || found.verify(p).is_ok(),
            "search produced a non-replayable sequence"
        );
        TriState::Yes { evidence: found }
    };

    let mut nodes = vec![Node {
        parent: 0,
        mv: None,
        depth: 0,
        state: None,
        stabilizations: 0,
    }];
    if root.reached(cfg.goal) {
        return finish(&nodes, 0, &root, 1);
    }
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(root.clone());
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((root.score(), 0usize, 0usize)));
    nodes[0].state = Some(root);
    let mut generated = 1usize;

    while let Some(Reverse((_, depth, idx))) = heap.pop() {
        let state = nodes[idx].state.take().expect("each node expands once");
        let stabs = nodes[idx].stabilizations;
        let mut found: Option<(usize, State)> = None;
        let mut exhausted = false;
        children(&state, cfg.goal, cfg, stabs < cap, |mv, child| {
            if found.is_some() || exhausted || seen.contains(&child) {
                return;
            }
            if generated >= cfg.budget {
                exhausted = true;
                return;
            }
            generated += 1;
            let grows = matches!(mv, Move::Stabilize | Move::AddTrivial);
            let child_idx = nodes.len();
            let reached = child.reached(cfg.goal);
            seen.insert(child.clone());
            if !reached {
                heap.push(Reverse((child.score(), depth + 1, child_idx)));
            }
            nodes.push(Node {
                parent: idx,
                mv: Some(mv),
                depth: depth + 1,
                state: if reached { None } else { Some(child.clone()) },
                stabilizations: stabs + usize::from(grows),
            });
            if reached {
                found = Some((child_idx, child));
            }
        });
        if let Some((leaf, child)) = found {
            return finish(&nodes, leaf, &child, generated);
        }
        if exhausted {
            break;
        }
    }
    debug_assert!(nodes.iter().all(|n| n.depth <= generated));
    TriState::Unknown {
        reason: UnknownReason::BudgetExhausted {
            budget: cfg.budget,
            generated,
        },
    }
}

/// Whether the normal closure of `relators` is the whole free group of `rank`.
pub fn normally_generates(
    relators: &[Word],
    rank: usize,
    cfg: &SearchConfig,
) -> Result<TriState<Trivialization, AbelianWitness>, GroupError> {
    let p = Presentation::new(rank, relators.to_vec())?;
    Ok(trivialize_search(&p, cfg))
}

#[cfg(test)]
mod tests {
    use super::super::word::free_reduce;
    use super::*;

    fn reduced_signed(v: &[i32]) -> Vec<i32> {
        let letters: Vec<Letter> = v.iter().map(|&x| Letter::try_from(x).unwrap()).collect();
        free_reduce(&letters).iter().map(|l| l.signed()).collect()
    }
    use std::collections::VecDeque;

    fn p(rank: usize, rels: &[&[i32]]) -> Presentation {
        Presentation::from_signed(rank, rels).unwrap()
    }

    /// Oracle: plain breadth-first search over slides (empty or one-letter
    /// arcs), conjugations by letters, inversions and destabilizations.
    fn bfs_depth(start: &Presentation, max_depth: usize) -> Option<usize> {
        let key = |q: &Presentation| {
            (
                q.rank(),
                q.relators().iter().map(Word::reduced_signed).collect::<Vec<_>>(),
            )
        };
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(key(start));
        queue.push_back((start.rebased(), 0));
        while let Some((q, d)) = queue.pop_front() {
            if q.is_trivial_up_to_order() {
                return Some(d);
            }
            if d == max_depth {
                continue;
            }
            let n = q.relators().len();
            let mut moves = Vec::new();
            for g in 1..=q.rank() as u32 {
                if let Ok(next) = q.destabilize(g) {
                    moves.push(next);
                }
            }
            let mut arcs = vec![Word::empty()];
            for g in 1..=q.rank() as i32 {
                arcs.push(Word::of(&[g]));
                arcs.push(Word::of(&[-g]));
            }
            for l in 0..n {
                for m in 0..n {
                    for arc in &arcs {
                        for sign in [1, -1] {
                            if let Ok(next) = q.tietze_slide(l, m, arc, sign) {
                                moves.push(next);
                            }
                        }
                    }
                }
                for arc in arcs.iter().skip(1) {
                    moves.push(
                        q.with_move(Move::Conjugate {
                            target: l,
                            by: arc.clone(),
                        })
                        .unwrap(),
                    );
                }
                moves.push(q.with_move(Move::Invert { target: l }).unwrap());
            }
            for next in moves {
                if seen.insert(key(&next)) {
                    queue.push_back((next, d + 1));
                }
            }
        }
        None
    }

    #[test]
    fn already_trivial() {
        let r = trivialize_search(&p(1, &[&[1]]), &SearchConfig::default());
        assert_eq!(r.yes().unwrap().moves, vec![]);
    }

    #[test]
    fn x_squared_is_no() {
        let r = trivialize_search(&p(1, &[&[1, 1]]), &SearchConfig::default());
        let w = r.no().unwrap();
        assert_eq!(w.abelianization, crate::intmat::IntMatrix::square(&[&[2]]));
    }

    #[test]
    fn xy_x_is_yes_and_oracle_agrees() {
        let q = p(2, &[&[1, 2], &[1]]);
        assert!(bfs_depth(&q, 3).is_some());
        let r = trivialize_search(&q, &SearchConfig::with_budget(10_000));
        let t = r.yes().unwrap();
        assert!(t.verify(&q).unwrap().is_trivial());
    }

    #[test]
    fn normally_generates_examples() {
        let cfg = SearchConfig::default();
        assert!(normally_generates(&[Word::of(&[1])], 1, &cfg).unwrap().is_yes());
        let comm = Word::of(&[1, 2, -1, -2]);
        assert!(normally_generates(&[comm], 2, &cfg).unwrap().is_no());
        let q = p(2, &[&[1, 2], &[2]]);
        assert!(bfs_depth(&q, 2).is_some());
        let r = normally_generates(q.relators(), 2, &cfg).unwrap();
        r.yes().unwrap().verify(&q).unwrap();
    }

    #[test]
    fn over_determined_input_drops_extra_relators() {
        let q = p(1, &[&[1], &[1, 1, 1]]);
        let r = trivialize_search(&q, &SearchConfig::default());
        let end = r.yes().unwrap().verify(&q).unwrap();
        assert_eq!(end.relators().len(), end.rank());
    }

    #[test]
    fn tiny_budget_is_unknown() {
        let q = p(2, &[&[1, 2, 1, -2, -1, -2], &[1, 1, 2, -1, -2, -2, -2]]);
        let r = trivialize_search(&q, &SearchConfig::with_budget(5));
        assert!(matches!(
            r,
            TriState::Unknown {
                reason: UnknownReason::BudgetExhausted { budget: 5, .. }
            }
        ));
    }

    #[test]
    fn kill_goal_finds_killers() {
        let q = p(2, &[&[1, 2], &[2]]);
        let cfg = SearchConfig {
            goal: Goal::KillGenerators { count: 2 },
            ..SearchConfig::default()
        };
        let r = trivialize_search(&q, &cfg);
        let moves = &r.yes().unwrap().moves;
        assert_eq!(moves.len(), 1);
        let end = q.rebased().replay(moves).unwrap();
        assert_eq!(end.relator(0).reduced_signed(), vec![1]);
        assert_eq!(end.relator(0).raw_signed(), vec![1, 2, -2]);
    }

    #[test]
    fn search_is_deterministic() {
        let q = p(2, &[&[1, 2, -1, 2, 2], &[2, 1, 1]]);
        let cfg = SearchConfig::with_budget(50_000);
        assert_eq!(trivialize_search(&q, &cfg), trivialize_search(&q, &cfg));
    }

    #[test]
    fn short_words_count() {
        // 1 + 2k + 2k(2k-1) for length <= 2.
        assert_eq!(short_words(2, 2).len(), 1 + 4 + 12);
        assert_eq!(reduced_signed(&[1, -1, 2]), vec![2]);
    }
}
