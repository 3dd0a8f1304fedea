use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GroupError;

/// A generator or its inverse: `Letter(g)` is x_g, `Letter(-g)` is x̄_g.
/// Generator labels start at 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: u32, positive: bool) -> Self {
        assert!(generator >= 1, "generator labels start at 1");
        let g = generator as i32;
        Letter(if positive { g } else { -g })
    }

    pub fn pos(generator: u32) -> Self {
        Self::new(generator, true)
    }

    pub fn neg(generator: u32) -> Self {
        Self::new(generator, false)
    }

    pub fn from_signed(v: i32) -> Result<Self, GroupError> {
        Letter::try_from(v)
    }

    pub fn generator(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn sign(self) -> i32 {
        self.0.signum()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    /// Same sign, relabelled generator.
    pub fn with_generator(self, generator: u32) -> Letter {
        Letter::new(generator, self.is_positive())
    }
}

impl TryFrom<i32> for Letter {
    type Error = GroupError;

    fn try_from(v: i32) -> Result<Self, Self::Error> {
        if v == 0 {
            Err(GroupError::ZeroLetter)
        } else {
            Ok(Letter(v))
        }
    }
}

impl From<Letter> for i32 {
    fn from(l: Letter) -> i32 {
        l.0
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.generator())
        } else {
            write!(f, "x{}^-1", self.generator())
        }
    }
}

/// Free reduction with a stack.
pub(crate) fn free_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Appends `tail` to an already reduced `head`, cancelling at the seam.
pub(crate) fn reduce_into(head: &mut Vec<Letter>, tail: &[Letter]) {
    for &l in tail {
        if head.last() == Some(&l.inverse()) {
            head.pop();
        } else {
            head.push(l);
        }
    }
}

pub(crate) fn invert_letters(letters: &[Letter]) -> Vec<Letter> {
    letters.iter().rev().map(|l| l.inverse()).collect()
}

/// A word in a free group.
///
/// `raw` is the letter sequence exactly as it was traversed or concatenated;
/// `reduced` is its free reduction. Equality compares both.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    raw: Vec<Letter>,
    reduced: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn new(raw: Vec<Letter>) -> Self {
        let reduced = free_reduce(&raw);
        Word { raw, reduced }
    }

    /// A word whose raw form is already reduced.
    pub(crate) fn from_reduced(reduced: Vec<Letter>) -> Self {
        debug_assert_eq!(free_reduce(&reduced), reduced);
        Word {
            raw: reduced.clone(),
            reduced,
        }
    }

    /// Parses signed generator labels: `[1, -2]` is x₁x̄₂.
    pub fn from_signed(letters: &[i32]) -> Result<Self, GroupError> {
        let raw = letters
            .iter()
            .map(|&v| Letter::try_from(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Word::new(raw))
    }

    /// Like [`Word::from_signed`] but panics on a zero entry; for literals.
    pub fn of(letters: &[i32]) -> Self {
        Self::from_signed(letters).expect("zero is not a letter")
    }

    pub fn generator(g: u32) -> Self {
        Word::from_reduced(vec![Letter::pos(g)])
    }

    pub fn raw(&self) -> &[Letter] {
        &self.raw
    }

    pub fn reduced(&self) -> &[Letter] {
        &self.reduced
    }

    pub fn reduced_signed(&self) -> Vec<i32> {
        self.reduced.iter().map(|l| l.signed()).collect()
    }

    pub fn raw_signed(&self) -> Vec<i32> {
        self.raw.iter().map(|l| l.signed()).collect()
    }

    /// Returns the word with `raw` replaced by its reduced form.
    pub fn reduce(&self) -> Word {
        Word::from_reduced(self.reduced.clone())
    }

    pub fn is_trivial(&self) -> bool {
        self.reduced.is_empty()
    }

    pub fn len(&self) -> usize {
        self.reduced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reduced.is_empty()
    }

    /// Same group element, regardless of raw traversal.
    pub fn same_element(&self, other: &Word) -> bool {
        self.reduced == other.reduced
    }

    pub fn max_generator(&self) -> u32 {
        self.raw.iter().map(|l| l.generator()).max().unwrap_or(0)
    }

    pub fn check_rank(&self, rank: usize) -> Result<(), GroupError> {
        match self.raw.iter().find(|l| l.generator() as usize > rank) {
            Some(&letter) => Err(GroupError::RankMismatch { letter, rank }),
            None => Ok(()),
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut raw = Vec::with_capacity(self.raw.len() + other.raw.len());
        raw.extend_from_slice(&self.raw);
        raw.extend_from_slice(&other.raw);
        let mut reduced = self.reduced.clone();
        reduce_into(&mut reduced, &other.reduced);
        Word { raw, reduced }
    }

    pub fn inv(&self) -> Word {
        Word {
            raw: invert_letters(&self.raw),
            reduced: invert_letters(&self.reduced),
        }
    }

    /// `g · self · ḡ`.
    pub fn conj(&self, g: &Word) -> Word {
        g.mul(self).mul(&g.inv())
    }

    /// `self · b · self̄ · b̄`.
    pub fn comm(&self, b: &Word) -> Word {
        self.mul(b).mul(&self.inv()).mul(&b.inv())
    }

    /// `self^n` for any integer n.
    pub fn pow(&self, n: i32) -> Word {
        let base = if n < 0 { self.inv() } else { self.clone() };
        (0..n.unsigned_abs()).fold(Word::empty(), |acc, _| acc.mul(&base))
    }

    /// Sum of the signs of the occurrences of generator `g` in the reduced form.
    pub fn exponent_sum(&self, g: u32) -> i64 {
        self.reduced
            .iter()
            .filter(|l| l.generator() == g)
            .map(|l| i64::from(l.sign()))
            .sum()
    }

    /// Applies a letter substitution to the raw form.
    pub fn map_letters(&self, mut f: impl FnMut(Letter) -> Option<Letter>) -> Word {
        Word::new(self.raw.iter().filter_map(|&l| f(l)).collect())
    }

    /// Concatenation of several words.
    pub fn product<'a>(words: impl IntoIterator<Item = &'a Word>) -> Word {
        words.into_iter().fold(Word::empty(), |acc, w| acc.mul(w))
    }
}

impl From<Vec<Letter>> for Word {
    fn from(raw: Vec<Letter>) -> Self {
        Word::new(raw)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.raw == self.reduced {
            write!(f, "Word({self})")
        } else {
            write!(f, "Word({self} raw={:?})", self.raw_signed())
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reduced.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self.reduced.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

// Serialized as the raw signed-label sequence; the reduced form is derived.
impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.raw_signed().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Vec::<i32>::deserialize(deserializer)?;
        Word::from_signed(&v).map_err(serde::de::Error::custom)
    }
}
