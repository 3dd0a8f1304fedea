//! The middle level between the 2-handles and the 3-handles.
//!
//! Lower spheres `S_{0,i}` (belt spheres of the 2-handles) meet upper spheres
//! `S_{1,j}` (attaching spheres of the 3-handles) in signed points. Each
//! geometric point becomes a 1-handle generator; arcs from the base points are
//! represented only by the order in which they reach the points.
//!
//! Sphere indices `i`, `j` are 1-based. Point generators are numbered
//! `x_1..x_P` in the order (i, j, position in the pair's list); the ambient
//! extra 1-handles follow as `x_{P+1}..x_{P+r}`.
//!
//! Sign convention: a point of sign `s` contributes the letter `x_p^s` when
//! traversed along either sphere.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grouppres::{GroupError, Letter, Presentation, TriState, Word};
use crate::intmat::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MiddleError {
    #[error("algebraic intersection of S_0,{i} and S_1,{j} is {sum}, expected {}", i32::from(i == j))]
    DeltaViolation { i: usize, j: usize, sum: i64 },
    #[error("sphere index ({i}, {j}) outside 1..={n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("intersection sign must be +1 or -1, got {sign}")]
    BadSign { sign: i32 },
    #[error("intersection pair ({i}, {j}) listed twice")]
    DuplicatePair { i: usize, j: usize },
    #[error("{found} ambient handles given, but {needed} are needed to kill the 1-handles")]
    TooFewHandles { needed: usize, found: usize },
    #[error("ambient relator: {0}")]
    Relator(#[from] GroupError),
}

/// Which order arcs from a base point reach the points of its sphere.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcOrdering {
    /// Round-robin across partner spheres.
    Natural,
    /// Grouped by partner sphere in ascending order.
    #[default]
    Careful,
}

/// Signed points of `S_{0,i} ∩ S_{1,j}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPoints {
    pub i: usize,
    pub j: usize,
    pub signs: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpherePair {
    n: usize,
    points: BTreeMap<(usize, usize), Vec<i32>>,
}

impl SpherePair {
    pub fn new(n: usize, lists: Vec<PairPoints>) -> Result<Self, MiddleError> {
        let mut points = BTreeMap::new();
        for PairPoints { i, j, signs } in lists {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(MiddleError::IndexOutOfRange { i, j, n });
            }
            if let Some(&sign) = signs.iter().find(|s| s.abs() != 1) {
                return Err(MiddleError::BadSign { sign });
            }
            if points.insert((i, j), signs).is_some() {
                return Err(MiddleError::DuplicatePair { i, j });
            }
        }
        points.retain(|_, v: &mut Vec<i32>| !v.is_empty());
        Ok(SpherePair { n, points })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signs(&self, i: usize, j: usize) -> &[i32] {
        self.points.get(&(i, j)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn lists(&self) -> Vec<PairPoints> {
        self.points
            .iter()
            .map(|(&(i, j), signs)| PairPoints {
                i,
                j,
                signs: signs.clone(),
            })
            .collect()
    }

    pub fn geometric_count(&self) -> usize {
        self.points.values().map(Vec::len).sum()
    }

    /// `n × n` matrix of signed counts, row `i-1`, column `j-1`.
    pub fn algebraic(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.n, self.n);
        for (&(i, j), signs) in &self.points {
            let sum: i64 = signs.iter().map(|&s| i64::from(s)).sum();
            m.set(i - 1, j - 1, sum.into());
        }
        m
    }

    /// Exchanges the two sphere families.
    pub fn swapped(&self) -> SpherePair {
        SpherePair {
            n: self.n,
            points: self.points.iter().map(|(&(i, j), s)| ((j, i), s.clone())).collect(),
        }
    }

    fn pairs_mut(&mut self, upper: bool, index: usize) -> Vec<((usize, usize), Vec<i32>)> {
        (1..=self.n)
            .map(|other| if upper { (other, index) } else { (index, other) })
            .map(|key| (key, self.points.get(&key).cloned().unwrap_or_default()))
            .collect()
    }

    /// Band-sums sphere `target` of one family with `|factor|` parallel copies
    /// of sphere `source`, oriented by the sign of `factor`. The new points are
    /// appended after the existing ones. `upper` selects the `S_1` family.
    pub fn add_copies(&mut self, upper: bool, target: usize, source: usize, factor: i64) {
        let sign = factor.signum() as i32;
        for (key, src) in self.pairs_mut(upper, source) {
            let dest = if upper { (key.0, target) } else { (target, key.1) };
            let entry = self.points.entry(dest).or_default();
            for _ in 0..factor.unsigned_abs() {
                entry.extend(src.iter().map(|s| s * sign));
            }
        }
        self.points.retain(|_, v| !v.is_empty());
    }

    pub fn swap(&mut self, upper: bool, a: usize, b: usize) {
        let pa = self.pairs_mut(upper, a);
        let pb = self.pairs_mut(upper, b);
        for ((ka, va), (kb, vb)) in pa.into_iter().zip(pb) {
            self.points.insert(ka, vb);
            self.points.insert(kb, va);
        }
        self.points.retain(|_, v| !v.is_empty());
    }

    pub fn negate(&mut self, upper: bool, index: usize) {
        for (key, _) in self.pairs_mut(upper, index) {
            if let Some(v) = self.points.get_mut(&key) {
                v.iter_mut().for_each(|s| *s = -*s);
            }
        }
    }
}

/// An ambient 2-handle: its attaching word in the lower level and the word
/// read by its cocore in the upper level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmbientHandle {
    #[serde(rename = "relator_L1")]
    pub relator_l1: Word,
    #[serde(rename = "relator_L3", default)]
    pub relator_l3: Word,
}

/// Upper-level word of the cocore of `H_{k,i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SphereDual {
    pub k: u8,
    pub i: usize,
    #[serde(rename = "relator_L3")]
    pub relator_l3: Word,
}

/// Handles of the middle level that do not come from the spheres.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ambient {
    /// Extra 1-handles beyond the point handles.
    pub r: usize,
    /// Rank of the free upper-level fundamental group.
    pub t: usize,
    /// The first `P + r` handles are the killers; the rest lie in the complement.
    pub handles: Vec<AmbientHandle>,
    #[serde(default)]
    pub sphere_duals: Vec<SphereDual>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub id: u32,
    pub i: usize,
    pub j: usize,
    pub sign: i32,
}

/// Arc order on one sphere: `family` 0 is `S_{0,index}`, 1 is `S_{1,index}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArcTree {
    pub family: u8,
    pub index: usize,
    pub order: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiddleLevel {
    sphere_pair: SpherePair,
    ordering: ArcOrdering,
    points: Vec<Point>,
    trees: [Vec<ArcTree>; 2],
    ambient: Ambient,
}

fn arrange(groups: Vec<Vec<u32>>, ordering: ArcOrdering) -> Vec<u32> {
    match ordering {
        ArcOrdering::Careful => groups.concat(),
        ArcOrdering::Natural => {
            let longest = groups.iter().map(Vec::len).max().unwrap_or(0);
            (0..longest)
                .flat_map(|k| groups.iter().filter_map(move |g| g.get(k).copied()))
                .collect()
        }
    }
}

/// Builds the handle structure of the middle level.
pub fn build_middle(sp: SpherePair, ambient: Ambient, ordering: ArcOrdering) -> Result<MiddleLevel, MiddleError> {
    let n = sp.n();
    let alg = sp.algebraic();
    for i in 1..=n {
        for j in 1..=n {
            let sum: i64 = sp.signs(i, j).iter().map(|&s| i64::from(s)).sum();
            if sum != i64::from(i == j) {
                debug_assert_eq!(alg.get(i - 1, j - 1), &sum.into());
                return Err(MiddleError::DeltaViolation { i, j, sum });
            }
        }
    }
    let mut points = Vec::with_capacity(sp.geometric_count());
    for (&(i, j), signs) in &sp.points {
        for &sign in signs {
            points.push(Point {
                id: points.len() as u32 + 1,
                i,
                j,
                sign,
            });
        }
    }
    let rank = points.len() + ambient.r;
    if ambient.handles.len() < rank {
        return Err(MiddleError::TooFewHandles {
            needed: rank,
            found: ambient.handles.len(),
        });
    }
    for h in &ambient.handles {
        h.relator_l1.check_rank(rank)?;
        h.relator_l3.check_rank(ambient.t)?;
    }
    for d in &ambient.sphere_duals {
        d.relator_l3.check_rank(ambient.t)?;
    }
    let tree = |family: u8, index: usize| {
        let groups = (1..=n)
            .map(|other| {
                points
                    .iter()
                    .filter(|p| {
                        if family == 0 {
                            p.i == index && p.j == other
                        } else {
                            p.j == index && p.i == other
                        }
                    })
                    .map(|p| p.id)
                    .collect()
            })
            .collect();
        ArcTree {
            family,
            index,
            order: arrange(groups, ordering),
        }
    };
    let trees = [
        (1..=n).map(|i| tree(0, i)).collect(),
        (1..=n).map(|j| tree(1, j)).collect(),
    ];
    Ok(MiddleLevel {
        sphere_pair: sp,
        ordering,
        points,
        trees,
        ambient,
    })
}

impl MiddleLevel {
    pub fn n(&self) -> usize {
        self.sphere_pair.n()
    }

    pub fn sphere_pair(&self) -> &SpherePair {
        &self.sphere_pair
    }

    pub fn ordering(&self) -> ArcOrdering {
        self.ordering
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, id: u32) -> &Point {
        &self.points[id as usize - 1]
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    /// Number of 1-handles: one per point plus the ambient ones.
    pub fn one_handle_count(&self) -> usize {
        self.points.len() + self.ambient.r
    }

    /// Attaching words of the killing handles, which come first among the ambient handles.
    pub fn killers(&self) -> Vec<Word> {
        self.ambient.handles[..self.one_handle_count()]
            .iter()
            .map(|h| h.relator_l1.clone())
            .collect()
    }

    pub fn arc_tree(&self, family: u8, index: usize) -> &ArcTree {
        &self.trees[family as usize][index - 1]
    }

    pub fn arc_trees(&self) -> impl Iterator<Item = &ArcTree> {
        self.trees.iter().flatten()
    }

    /// `H_{0,i}` misses every 1-handle.
    pub fn h0_relator(&self, _i: usize) -> Word {
        Word::empty()
    }

    /// `H_{1,j}` runs out to each point along its arc and back: `∏ x_p x̄_p`.
    pub fn h1_relator(&self, j: usize) -> Word {
        let raw = self
            .arc_tree(1, j)
            .order
            .iter()
            .flat_map(|&p| [Letter::pos(p), Letter::neg(p)])
            .collect();
        Word::new(raw)
    }

    /// `∏ x_p^{sign}` over the points of a sphere, in arc order.
    pub fn crossing_word(&self, family: u8, index: usize) -> Word {
        let raw = self
            .arc_tree(family, index)
            .order
            .iter()
            .map(|&p| Letter::new(p, self.point(p).sign > 0))
            .collect();
        Word::new(raw)
    }

    /// Upper-level word of the cocore of `H_{k,i}`; empty when not supplied.
    pub fn sphere_dual(&self, k: u8, i: usize) -> Word {
        self.ambient
            .sphere_duals
            .iter()
            .find(|d| d.k == k && d.i == i)
            .map(|d| d.relator_l3.clone())
            .unwrap_or_default()
    }

    /// Partner index of a point as seen from a sphere of `family`.
    fn partner(&self, family: u8, p: u32) -> usize {
        let pt = self.point(p);
        if family == 0 {
            pt.j
        } else {
            pt.i
        }
    }
}

/// The crossing words of the upper spheres, `H_{1,1}, …, H_{1,n}`.
pub fn extract_relators(ml: &MiddleLevel) -> Vec<Word> {
    (1..=ml.n()).map(|j| ml.crossing_word(1, j)).collect()
}

/// Presentation of `A_side`: `A_{1/2}` with the spheres of family `side` dotted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DottedSide {
    pub side: u8,
    /// Generators `x_1..x_R` then `y_1..y_n` (as `x_{R+1}..x_{R+n}`);
    /// relators are the killers followed by the undotted sphere words.
    pub full: Presentation,
    /// The undotted sphere words with every `x` set to 1, over `y_1..y_n`.
    pub y_part: Presentation,
}

/// Dots the spheres of family `side`. Each point on an undotted sphere
/// contributes `x_p y^{sign} x̄_p`, with `y` the dotted partner.
pub fn dot_side(ml: &MiddleLevel, side: u8) -> DottedSide {
    dot_side_with(ml, side, &ml.killers())
}

/// [`dot_side`] with replacement killer words.
pub fn dot_side_with(ml: &MiddleLevel, side: u8, killers: &[Word]) -> DottedSide {
    let n = ml.n();
    let rank = ml.one_handle_count();
    let other = 1 - side;
    let mut full = killers.to_vec();
    let mut y_words = Vec::with_capacity(n);
    for index in 1..=n {
        let order = &ml.arc_tree(other, index).order;
        let mut raw = Vec::with_capacity(3 * order.len());
        let mut y = Vec::with_capacity(order.len());
        for &p in order {
            let partner = ml.partner(other, p) as u32;
            let positive = ml.point(p).sign > 0;
            raw.push(Letter::pos(p));
            raw.push(Letter::new(rank as u32 + partner, positive));
            raw.push(Letter::neg(p));
            y.push(Letter::new(partner, positive));
        }
        full.push(Word::new(raw));
        y_words.push(Word::new(y));
    }
    DottedSide {
        side,
        full: Presentation::new(rank + n, full).expect("letters within rank"),
        y_part: Presentation::new(n, y_words).expect("letters within rank"),
    }
}

/// Evidence that the generators die in sequence: killers first, then the
/// undotted sphere words kill the `y`'s on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequentialKilling {
    /// `(killer index, generator)` in killing order.
    pub killer_order: Vec<(usize, u32)>,
    /// Per side, `block_sums[i][j]`: exponent sum of `y_{j+1}` in word `i+1`.
    pub block_sums: [Vec<Vec<i64>>; 2],
}

/// Why the killing check failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillingFailure {
    pub side: u8,
    pub word: usize,
    pub block_sums: Vec<Vec<i64>>,
}

/// Order in which the killers kill `x_1..x_R`: a killer applies once its
/// word, with the already killed generators deleted, reduces to one letter.
pub fn killing_order(killers: &[Word], rank: usize) -> Option<Vec<(usize, u32)>> {
    let mut dead = vec![false; rank + 1];
    let mut used = vec![false; killers.len()];
    let mut order = Vec::with_capacity(rank);
    while order.len() < rank {
        let next = killers.iter().enumerate().find_map(|(k, w)| {
            if used[k] {
                return None;
            }
            let rest = w.map_letters(|l| (!dead[l.generator() as usize]).then_some(l));
            match rest.reduced() {
                [l] => Some((k, l.generator())),
                _ => None,
            }
        })?;
        used[next.0] = true;
        dead[next.1 as usize] = true;
        order.push(next);
    }
    Some(order)
}

fn block_sums(y_part: &Presentation) -> Vec<Vec<i64>> {
    let n = y_part.rank();
    y_part
        .relators()
        .iter()
        .map(|w| (1..=n as u32).map(|g| w.exponent_sum(g)).collect())
        .collect()
}

/// Each `y` occurs in one contiguous block of the raw word.
fn contiguous_blocks(w: &Word) -> bool {
    let mut finished = std::collections::HashSet::new();
    let mut current = None;
    for l in w.raw() {
        if current != Some(l.generator()) {
            if let Some(c) = current {
                finished.insert(c);
            }
            if finished.contains(&l.generator()) {
                return false;
            }
            current = Some(l.generator());
        }
    }
    true
}

pub fn check_sequential_killing(ml: &MiddleLevel) -> TriState<SequentialKilling, KillingFailure> {
    check_sequential_killing_with(ml, &ml.killers())
}

/// Yes iff the killers kill `x_1..x_R` in some order and, on both dotted
/// sides, every undotted word is a product of one block per partner with
/// block-sum matrix the identity. Wrong block sums give No; interleaved
/// blocks or stuck killers give Unknown.
pub fn check_sequential_killing_with(
    ml: &MiddleLevel,
    killers: &[Word],
) -> TriState<SequentialKilling, KillingFailure> {
    let Some(killer_order) = killing_order(killers, ml.one_handle_count()) else {
        return TriState::unknown("killers do not kill the 1-handles in sequence");
    };
    let mut sums: [Vec<Vec<i64>>; 2] = Default::default();
    for side in 0..2u8 {
        let y_part = dot_side_with(ml, side, killers).y_part;
        let b = block_sums(&y_part);
        for (idx, row) in b.iter().enumerate() {
            if row.iter().enumerate().any(|(g, &s)| s != i64::from(g == idx)) {
                return TriState::No {
                    witness: KillingFailure {
                        side,
                        word: idx + 1,
                        block_sums: b.clone(),
                    },
                };
            }
        }
        if let Some(idx) = y_part.relators().iter().position(|w| !contiguous_blocks(w)) {
            return TriState::unknown(format!("side {side}: word {} interleaves its partner blocks", idx + 1));
        }
        debug_assert!(y_part
            .relators()
            .iter()
            .enumerate()
            .all(|(k, w)| w.reduced_signed() == vec![k as i32 + 1]));
        sums[side as usize] = b;
    }
    TriState::Yes {
        evidence: SequentialKilling {
            killer_order,
            block_sums: sums,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouppres::{trivialize_search, SearchConfig};
    use crate::intmat::smith_normal_form;

    fn handle(l1: &[i32]) -> AmbientHandle {
        AmbientHandle {
            relator_l1: Word::of(l1),
            relator_l3: Word::empty(),
        }
    }

    fn pair(n: usize, lists: &[(usize, usize, &[i32])]) -> SpherePair {
        SpherePair::new(
            n,
            lists
                .iter()
                .map(|&(i, j, s)| PairPoints {
                    i,
                    j,
                    signs: s.to_vec(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn killers_for(points: usize) -> Ambient {
        Ambient {
            r: 0,
            t: 0,
            handles: (1..=points as i32).map(|g| handle(&[g])).collect(),
            sphere_duals: vec![],
        }
    }

    fn akbulut(ordering: ArcOrdering) -> MiddleLevel {
        let amb = Ambient {
            r: 0,
            t: 0,
            handles: vec![handle(&[1, 2]), handle(&[2]), handle(&[3, -1])],
            sphere_duals: vec![],
        };
        build_middle(pair(1, &[(1, 1, &[1, 1, -1])]), amb, ordering).unwrap()
    }

    #[test]
    fn single_point() {
        let ml = build_middle(pair(1, &[(1, 1, &[1])]), killers_for(1), ArcOrdering::Careful).unwrap();
        assert_eq!(ml.one_handle_count(), 1);
        assert_eq!(extract_relators(&ml)[0].reduced_signed(), vec![1]);
        assert_eq!(extract_relators(&ml)[0].exponent_sum(1), 1);
        assert!(ml.h0_relator(1).is_empty());
        assert_eq!(ml.h1_relator(1).raw_signed(), vec![1, -1]);
        let d = dot_side(&ml, 0);
        assert_eq!(d.y_part.relators()[0].raw_signed(), vec![1]);
        let r = trivialize_search(&d.y_part, &SearchConfig::default());
        assert!(r.yes().unwrap().moves.is_empty());
        assert!(check_sequential_killing(&ml).is_yes());
    }

    #[test]
    fn akbulut_three_points() {
        let ml = akbulut(ArcOrdering::Careful);
        assert_eq!(ml.one_handle_count(), 3);
        let w = &extract_relators(&ml)[0];
        assert_eq!(w.raw_signed(), vec![1, 2, -3]);
        assert_eq!((1..=3).map(|g| w.exponent_sum(g)).sum::<i64>(), 1);
        assert_eq!(ml.h1_relator(1).raw_signed(), vec![1, -1, 2, -2, 3, -3]);
        assert!(ml.h1_relator(1).is_trivial());
        let d = dot_side(&ml, 0);
        assert_eq!(d.y_part.abelianize(), IntMatrix::square(&[&[1]]));
        assert_eq!(d.full.rank(), 4);
        assert_eq!(d.full.relators()[3].raw_signed(), vec![1, 4, -1, 2, 4, -2, 3, -4, -3]);
        let ev = check_sequential_killing(&ml);
        assert_eq!(ev.yes().unwrap().killer_order, vec![(1, 2), (0, 1), (2, 3)]);
    }

    #[test]
    fn delta_violation() {
        let sp = pair(2, &[(1, 1, &[1]), (2, 2, &[1]), (1, 2, &[1])]);
        assert_eq!(
            build_middle(sp, killers_for(3), ArcOrdering::Careful).unwrap_err(),
            MiddleError::DeltaViolation { i: 1, j: 2, sum: 1 }
        );
    }

    #[test]
    fn diagonal_points() {
        let ml = build_middle(
            pair(2, &[(1, 1, &[1]), (2, 2, &[1])]),
            killers_for(2),
            ArcOrdering::Careful,
        )
        .unwrap();
        let rels = extract_relators(&ml);
        assert_eq!(rels[0].reduced_signed(), vec![1]);
        assert_eq!(rels[1].reduced_signed(), vec![2]);
    }

    fn interleaved(ordering: ArcOrdering) -> MiddleLevel {
        let sp = pair(2, &[(1, 1, &[1, 1, -1]), (2, 1, &[1, -1]), (2, 2, &[1])]);
        build_middle(sp, killers_for(6), ordering).unwrap()
    }

    #[test]
    fn careful_blocks_are_contiguous() {
        let ml = interleaved(ArcOrdering::Careful);
        assert_eq!(ml.arc_tree(1, 1).order, vec![1, 2, 3, 4, 5]);
        let d = dot_side(&ml, 0);
        assert_eq!(d.y_part.relators()[0].raw_signed(), vec![1, 1, -1, 2, -2]);
        let ev = check_sequential_killing(&ml);
        let ev = ev.yes().unwrap();
        assert_eq!(ev.block_sums[0], vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(ev.block_sums[1], vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn natural_ordering_interleaves() {
        let ml = interleaved(ArcOrdering::Natural);
        assert_eq!(ml.arc_tree(1, 1).order, vec![1, 4, 2, 5, 3]);
        let d = dot_side(&ml, 0);
        assert_eq!(d.y_part.relators()[0].raw_signed(), vec![1, 2, 1, -2, -1]);
        assert!(check_sequential_killing(&ml).is_unknown());
    }

    #[test]
    fn symmetric_sides_agree() {
        let ml = akbulut(ArcOrdering::Careful);
        let a = smith_normal_form(&dot_side(&ml, 0).full.abelianize());
        let b = smith_normal_form(&dot_side(&ml, 1).full.abelianize());
        assert_eq!(a.diagonal_entries(), b.diagonal_entries());
        assert_eq!(dot_side(&ml, 0).y_part, dot_side(&ml, 1).y_part);
    }

    #[test]
    fn stuck_killers_are_unknown() {
        let amb = Ambient {
            r: 0,
            t: 0,
            handles: vec![handle(&[1, 1])],
            sphere_duals: vec![],
        };
        let ml = build_middle(pair(1, &[(1, 1, &[1])]), amb, ArcOrdering::Careful).unwrap();
        assert!(check_sequential_killing(&ml).is_unknown());
    }

    #[test]
    fn numbering_is_deterministic_and_complete() {
        let a = interleaved(ArcOrdering::Careful);
        let b = interleaved(ArcOrdering::Careful);
        assert_eq!(a, b);
        assert_eq!(a.points().len(), a.sphere_pair().geometric_count());
        for tree in a.arc_trees() {
            let mut ids = tree.order.clone();
            ids.sort();
            let expect: Vec<u32> = a
                .points()
                .iter()
                .filter(|p| {
                    if tree.family == 0 {
                        p.i == tree.index
                    } else {
                        p.j == tree.index
                    }
                })
                .map(|p| p.id)
                .collect();
            assert_eq!(ids, expect);
        }
    }

    #[test]
    fn column_copies_track_algebraic_counts() {
        let mut sp = pair(2, &[(1, 1, &[1]), (2, 2, &[1])]);
        sp.add_copies(true, 2, 1, -1);
        assert_eq!(sp.signs(1, 2), &[-1]);
        assert_eq!(sp.algebraic(), IntMatrix::square(&[&[1, -1], &[0, 1]]));
        sp.swap(false, 1, 2);
        assert_eq!(sp.algebraic(), IntMatrix::square(&[&[0, 1], &[1, -1]]));
        sp.negate(true, 1);
        assert_eq!(sp.algebraic(), IntMatrix::square(&[&[0, 1], &[-1, -1]]));
    }
}
