//! Integer matrices for handle chain complexes.
//!
//! Entries are arbitrary precision. Every reduction records the elementary
//! row/column operations it performs, so callers can translate them back into
//! handle slides and verifiers can replay them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntMatError {
    #[error("matrix is not unimodular (determinant {det})")]
    NonUnimodular { det: BigInt },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("boundary maps do not compose to zero at degree {degree}")]
    ComplexInvalid { degree: usize },
    #[error("boundary in degree {degree} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        degree: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("operation {op} out of range for a {rows}x{cols} matrix")]
    OpOutOfRange { op: String, rows: usize, cols: usize },
    #[error("matrix parse error: {0}")]
    Parse(String),
}

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows of machine integers. `cols` is needed for the
    /// 0-row case; otherwise it must match every row.
    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>], cols: usize) -> Result<Self, IntMatError> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(IntMatError::Parse(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            entries.extend(row.iter().map(|&v| v.into()));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    /// Square matrix from rows; panics on ragged input. Test and fixture helper.
    pub fn square(rows: &[&[i64]]) -> Self {
        let n = rows.len();
        let owned: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        let cols = owned.first().map_or(0, Vec::len);
        assert_eq!(cols, n, "not square");
        Self::from_rows(&owned, cols).expect("ragged rows")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    let v = self.get(r, c);
                    if r == c {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        if self.cols != other.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * out.cols + c;
                    out.entries[idx] += a * other.get(k, c);
                }
            }
        }
        Some(out)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt, IntMatError> {
        if !self.is_square() {
            return Err(IntMatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|r| self.row(r).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    /// Applies one elementary operation in place.
    pub fn apply(&mut self, op: &RowColOp) -> Result<(), IntMatError> {
        op.check(self.rows, self.cols)?;
        let cols = self.cols;
        match op {
            RowColOp::AddRow { target, source, factor } => {
                for c in 0..cols {
                    let v = factor * &self.entries[source * cols + c];
                    self.entries[target * cols + c] += v;
                }
            }
            RowColOp::AddCol { target, source, factor } => {
                for r in 0..self.rows {
                    let v = factor * &self.entries[r * cols + source];
                    self.entries[r * cols + target] += v;
                }
            }
            RowColOp::SwapRows(a, b) => {
                for c in 0..cols {
                    self.entries.swap(a * cols + c, b * cols + c);
                }
            }
            RowColOp::SwapCols(a, b) => {
                for r in 0..self.rows {
                    self.entries.swap(r * cols + a, r * cols + b);
                }
            }
            RowColOp::NegateRow(a) => {
                for c in 0..cols {
                    let v = -std::mem::take(&mut self.entries[a * cols + c]);
                    self.entries[a * cols + c] = v;
                }
            }
            RowColOp::NegateCol(a) => {
                for r in 0..self.rows {
                    let v = -std::mem::take(&mut self.entries[r * cols + a]);
                    self.entries[r * cols + a] = v;
                }
            }
        }
        Ok(())
    }

    /// Applies a sequence of operations, returning the transformed matrix.
    pub fn replay(&self, ops: &[RowColOp]) -> Result<IntMatrix, IntMatError> {
        let mut m = self.clone();
        for op in ops {
            m.apply(op)?;
        }
        Ok(m)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(ToString::to_string).collect())
            .collect();
        write!(f, "IntMatrix{rows:?}")
    }
}

/// Text format: `rows cols` on the first line, then one row per line.
impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for IntMatrix {
    type Err = IntMatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| IntMatError::Parse("missing `rows cols` header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| IntMatError::Parse(format!("bad header `{header}`: {e}")))?;
        let [rows, cols] = dims[..] else {
            return Err(IntMatError::Parse(format!("bad header `{header}`")));
        };
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| IntMatError::Parse(format!("missing row {r}")))?;
            let row: Vec<BigInt> = line
                .split_whitespace()
                .map(BigInt::from_str)
                .collect::<Result<_, _>>()
                .map_err(|e| IntMatError::Parse(format!("row {r}: {e}")))?;
            if row.len() != cols {
                return Err(IntMatError::Parse(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        if let Some(extra) = lines.next() {
            return Err(IntMatError::Parse(format!("trailing line `{extra}`")));
        }
        Ok(IntMatrix { rows, cols, entries })
    }
}

// JSON form: an array of rows. Entries that fit in i64 are numbers, larger
// ones are decimal strings.
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<JsonInt>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(JsonInt::from_big).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<JsonInt>> = Vec::deserialize(deserializer)?;
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(de::Error::custom("ragged matrix rows"));
            }
            for v in row {
                entries.push(v.to_big().map_err(de::Error::custom)?);
            }
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            entries,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonInt {
    Small(i64),
    Big(String),
}

impl JsonInt {
    fn from_big(v: &BigInt) -> Self {
        match v.to_i64() {
            Some(x) => JsonInt::Small(x),
            None => JsonInt::Big(v.to_string()),
        }
    }

    fn to_big(&self) -> Result<BigInt, String> {
        match self {
            JsonInt::Small(x) => Ok(BigInt::from(*x)),
            JsonInt::Big(s) => BigInt::from_str(s).map_err(|e| format!("bad integer `{s}`: {e}")),
        }
    }
}

mod bigint_json {
    use super::JsonInt;
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        JsonInt::from_big(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        JsonInt::deserialize(d)?.to_big().map_err(serde::de::Error::custom)
    }
}

/// An integer-invertible elementary operation. Indices are 0-based.
///
/// `AddRow { target, source, factor }` performs `row[target] += factor * row[source]`;
/// `AddCol` is the column analogue.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
pub enum RowColOp {
    AddRow {
        target: usize,
        source: usize,
        #[serde(with = "bigint_json")]
        factor: BigInt,
    },
    AddCol {
        target: usize,
        source: usize,
        #[serde(with = "bigint_json")]
        factor: BigInt,
    },
    SwapRows(usize, usize),
    SwapCols(usize, usize),
    NegateRow(usize),
    NegateCol(usize),
}

impl RowColOp {
    pub fn add_row(target: usize, source: usize, factor: impl Into<BigInt>) -> Self {
        RowColOp::AddRow {
            target,
            source,
            factor: factor.into(),
        }
    }

    pub fn add_col(target: usize, source: usize, factor: impl Into<BigInt>) -> Self {
        RowColOp::AddCol {
            target,
            source,
            factor: factor.into(),
        }
    }

    pub fn is_row_op(&self) -> bool {
        matches!(
            self,
            RowColOp::AddRow { .. } | RowColOp::SwapRows(..) | RowColOp::NegateRow(_)
        )
    }

    pub fn inverse(&self) -> RowColOp {
        match self {
            RowColOp::AddRow { target, source, factor } => RowColOp::AddRow {
                target: *target,
                source: *source,
                factor: -factor,
            },
            RowColOp::AddCol { target, source, factor } => RowColOp::AddCol {
                target: *target,
                source: *source,
                factor: -factor,
            },
            other => other.clone(),
        }
    }

    /// Determinant of the elementary matrix.
    pub fn det(&self) -> i32 {
        match self {
            RowColOp::AddRow { .. } | RowColOp::AddCol { .. } => 1,
            RowColOp::SwapRows(a, b) | RowColOp::SwapCols(a, b) => {
                if a == b {
                    1
                } else {
                    -1
                }
            }
            RowColOp::NegateRow(_) | RowColOp::NegateCol(_) => -1,
        }
    }

    fn check(&self, rows: usize, cols: usize) -> Result<(), IntMatError> {
        let ok = match self {
            RowColOp::AddRow { target, source, .. } => target != source && *target < rows && *source < rows,
            RowColOp::AddCol { target, source, .. } => target != source && *target < cols && *source < cols,
            RowColOp::SwapRows(a, b) => *a < rows && *b < rows,
            RowColOp::SwapCols(a, b) => *a < cols && *b < cols,
            RowColOp::NegateRow(a) => *a < rows,
            RowColOp::NegateCol(a) => *a < cols,
        };
        if ok {
            Ok(())
        } else {
            Err(IntMatError::OpOutOfRange {
                op: format!("{self:?}"),
                rows,
                cols,
            })
        }
    }
}

/// Result of [`unimodular_reduce`]: replaying `ops` on the input yields `result`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub ops: Vec<RowColOp>,
    pub result: IntMatrix,
}

/// Reduces a unimodular square matrix to the identity with recorded operations.
///
/// Column `k` is cleared below the diagonal by row operations, pivoting on
/// the entry of smallest absolute value. The unit upper-triangular remainder
/// is then cleared row by row with column operations.
pub fn unimodular_reduce(m: &IntMatrix) -> Result<Reduction, IntMatError> {
    if !m.is_square() {
        return Err(IntMatError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let det = m.det()?;
    if !det.abs().is_one() {
        return Err(IntMatError::NonUnimodular { det });
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut ops = Vec::new();
    let mut push = |a: &mut IntMatrix, op: RowColOp| {
        a.apply(&op).expect("reduction op in range");
        ops.push(op);
    };

    for k in 0..n {
        loop {
            let pivot = (k..n)
                .filter(|&i| !a.get(i, k).is_zero())
                .min_by(|&i, &j| a.get(i, k).abs().cmp(&a.get(j, k).abs()).then(i.cmp(&j)));
            let Some(p) = pivot else {
                unreachable!("unimodular matrix has a zero column below the diagonal");
            };
            if p != k {
                push(&mut a, RowColOp::SwapRows(k, p));
            }
            let mut done = true;
            for i in k + 1..n {
                if a.get(i, k).is_zero() {
                    continue;
                }
                let q = a.get(i, k) / a.get(k, k);
                if !q.is_zero() {
                    push(&mut a, RowColOp::add_row(i, k, -q));
                }
                if !a.get(i, k).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a.get(k, k).is_negative() {
            push(&mut a, RowColOp::NegateRow(k));
        }
    }

    for k in 0..n {
        for j in k + 1..n {
            let v = a.get(k, j).clone();
            if !v.is_zero() {
                push(&mut a, RowColOp::add_col(j, k, -v));
            }
        }
    }
    debug_assert!(a.is_identity());
    Ok(Reduction { ops, result: a })
}

/// Smith normal form with the operations that produce it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithForm {
    pub diagonal: IntMatrix,
    pub ops: Vec<RowColOp>,
}

impl SmithForm {
    /// Row operations in application order (left multiplier).
    pub fn left_ops(&self) -> Vec<RowColOp> {
        self.ops.iter().filter(|op| op.is_row_op()).cloned().collect()
    }

    /// Column operations in application order (right multiplier).
    pub fn right_ops(&self) -> Vec<RowColOp> {
        self.ops.iter().filter(|op| !op.is_row_op()).cloned().collect()
    }

    /// The diagonal entries d_1 | d_2 | ... (including zeros).
    pub fn diagonal_entries(&self) -> Vec<BigInt> {
        let k = self.diagonal.rows.min(self.diagonal.cols);
        (0..k).map(|i| self.diagonal.get(i, i).clone()).collect()
    }

    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.diagonal_entries().iter().filter(|d| !d.is_zero()).count()
    }

    /// Rebuilds the original matrix by undoing the recorded operations.
    pub fn reconstruct(&self) -> IntMatrix {
        let mut m = self.diagonal.clone();
        for op in self.ops.iter().rev() {
            m.apply(&op.inverse()).expect("recorded op in range");
        }
        m
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut ops = Vec::new();
    let mut push = |a: &mut IntMatrix, op: RowColOp| {
        a.apply(&op).expect("smith op in range");
        ops.push(op);
    };

    let mut k = 0;
    while k < rows.min(cols) {
        let pivot = (k..rows)
            .flat_map(|r| (k..cols).map(move |c| (r, c)))
            .filter(|&(r, c)| !a.get(r, c).is_zero())
            .min_by(|&x, &y| a.get(x.0, x.1).abs().cmp(&a.get(y.0, y.1).abs()).then(x.cmp(&y)));
        let Some((pr, pc)) = pivot else { break };
        if pr != k {
            push(&mut a, RowColOp::SwapRows(k, pr));
        }
        if pc != k {
            push(&mut a, RowColOp::SwapCols(k, pc));
        }

        let mut clean = true;
        for r in k + 1..rows {
            let q = a.get(r, k) / a.get(k, k);
            if !q.is_zero() {
                push(&mut a, RowColOp::add_row(r, k, -q));
            }
            clean &= a.get(r, k).is_zero();
        }
        for c in k + 1..cols {
            let q = a.get(k, c) / a.get(k, k);
            if !q.is_zero() {
                push(&mut a, RowColOp::add_col(c, k, -q));
            }
            clean &= a.get(k, c).is_zero();
        }
        if !clean {
            // A smaller remainder now exists; pick a new pivot.
            continue;
        }

        // Divisibility: fold an offending row into row k and retry.
        let offending = (k + 1..rows)
            .flat_map(|r| (k + 1..cols).map(move |c| (r, c)))
            .find(|&(r, c)| !a.get(r, c).is_multiple_of(a.get(k, k)));
        if let Some((r, _)) = offending {
            push(&mut a, RowColOp::add_row(k, r, 1));
            continue;
        }
        if a.get(k, k).is_negative() {
            push(&mut a, RowColOp::NegateRow(k));
        }
        k += 1;
    }
    SmithForm { diagonal: a, ops }
}

/// One homology group: `Z^free_rank ⊕ Z/t_1 ⊕ ... ⊕ Z/t_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub free_rank: usize,
    #[serde(with = "bigint_vec_json")]
    pub torsion: Vec<BigInt>,
}

mod bigint_vec_json {
    use super::JsonInt;
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(JsonInt::from_big).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<JsonInt>::deserialize(d)?
            .iter()
            .map(|j| j.to_big().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl HomologyGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        HomologyGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Torsion divisors are each > 1 and divide the next.
    pub fn divisibility_holds(&self) -> bool {
        self.torsion.iter().all(|t| t > &BigInt::one()) && self.torsion.windows(2).all(|w| w[1].is_multiple_of(&w[0]))
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        write!(f, "{}", parts.join(" + "))
    }
}

/// Homology indexed by degree, starting at degree 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HomologyGroups {
    pub groups: Vec<HomologyGroup>,
}

impl HomologyGroups {
    /// Group in degree `d`; degrees past the top of the complex are trivial.
    pub fn degree(&self, d: usize) -> HomologyGroup {
        self.groups.get(d).cloned().unwrap_or_default()
    }

    /// Homology of a point: Z in degree 0 and nothing else.
    pub fn is_point(&self) -> bool {
        self.degree(0) == HomologyGroup::free(1) && self.groups.iter().skip(1).all(HomologyGroup::is_trivial)
    }
}

/// A finitely generated chain complex `C_top -> ... -> C_1 -> C_0`.
///
/// `boundaries[d]` maps `C_d` to `C_{d-1}`, shaped `ranks[d-1] x ranks[d]`.
/// Index 0 is unused. Missing maps are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainComplex {
    pub ranks: Vec<usize>,
    pub boundaries: Vec<Option<IntMatrix>>,
}

impl ChainComplex {
    pub fn new(ranks: Vec<usize>) -> Self {
        let boundaries = vec![None; ranks.len()];
        ChainComplex { ranks, boundaries }
    }

    pub fn with_boundary(mut self, degree: usize, m: IntMatrix) -> Self {
        assert!(degree >= 1 && degree < self.ranks.len(), "degree out of range");
        self.boundaries[degree] = Some(m);
        self
    }

    fn boundary(&self, degree: usize) -> IntMatrix {
        let lower = if degree == 0 { 0 } else { self.ranks[degree - 1] };
        let upper = self.ranks.get(degree).copied().unwrap_or(0);
        self.boundaries
            .get(degree)
            .and_then(Clone::clone)
            .unwrap_or_else(|| IntMatrix::zeros(lower, upper))
    }
}

pub fn homology_from_complex(c: &ChainComplex) -> Result<HomologyGroups, IntMatError> {
    let top = c.ranks.len();
    for d in 1..top {
        if let Some(m) = &c.boundaries[d] {
            let (er, ec) = (c.ranks[d - 1], c.ranks[d]);
            if m.rows != er || m.cols != ec {
                return Err(IntMatError::ShapeMismatch {
                    degree: d,
                    rows: m.rows,
                    cols: m.cols,
                    expected_rows: er,
                    expected_cols: ec,
                });
            }
        }
    }
    for d in 2..top {
        let composed = c.boundary(d - 1).mul(&c.boundary(d)).expect("shapes checked");
        if !composed.is_zero() {
            return Err(IntMatError::ComplexInvalid { degree: d });
        }
    }

    let smith: Vec<Option<SmithForm>> = (0..=top)
        .map(|d| (d >= 1 && d < top).then(|| smith_normal_form(&c.boundary(d))))
        .collect();
    let rank_of = |d: usize| smith.get(d).and_then(Option::as_ref).map_or(0, SmithForm::rank);

    let groups = (0..top)
        .map(|d| {
            let free_rank = c.ranks[d] - rank_of(d) - rank_of(d + 1);
            let torsion = smith
                .get(d + 1)
                .and_then(Option::as_ref)
                .map(|s| {
                    s.diagonal_entries()
                        .into_iter()
                        .filter(|v| v > &BigInt::one())
                        .collect()
                })
                .unwrap_or_default();
            HomologyGroup { free_rank, torsion }
        })
        .collect();
    Ok(HomologyGroups { groups })
}

/// Cokernel of `m` viewed as a map `Z^cols -> Z^rows`.
pub fn cokernel(m: &IntMatrix) -> HomologyGroup {
    let s = smith_normal_form(m);
    let torsion: Vec<BigInt> = s
        .diagonal_entries()
        .into_iter()
        .filter(|v| v > &BigInt::one())
        .collect();
    HomologyGroup {
        free_rank: m.rows - s.rank(),
        torsion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        let owned: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        let cols = owned.first().map_or(0, Vec::len);
        IntMatrix::from_rows(&owned, cols).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn identity_reduces_with_no_ops() {
        let r = unimodular_reduce(&IntMatrix::identity(3)).unwrap();
        assert!(r.ops.is_empty());
        assert!(r.result.is_identity());
    }

    #[test]
    fn upper_unipotent_needs_one_column_op() {
        let r = unimodular_reduce(&m(&[&[1, 1], &[0, 1]])).unwrap();
        assert_eq!(r.ops, vec![RowColOp::add_col(1, 0, -1)]);
        assert!(r.result.is_identity());
    }

    #[test]
    fn non_unimodular_reports_determinant() {
        assert_eq!(
            unimodular_reduce(&m(&[&[2]])),
            Err(IntMatError::NonUnimodular { det: big(2) })
        );
        assert_eq!(
            unimodular_reduce(&m(&[&[1, 2], &[2, 4]])),
            Err(IntMatError::NonUnimodular { det: big(0) })
        );
    }

    #[test]
    fn empty_matrix_is_already_reduced() {
        let r = unimodular_reduce(&IntMatrix::zeros(0, 0)).unwrap();
        assert!(r.ops.is_empty());
        assert_eq!(r.result, IntMatrix::zeros(0, 0));
    }

    #[test]
    fn swap_matrix_reduces_and_replays() {
        let a = m(&[&[0, 1], &[1, 0]]);
        let r = unimodular_reduce(&a).unwrap();
        assert!(a.replay(&r.ops).unwrap().is_identity());
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            unimodular_reduce(&IntMatrix::zeros(2, 3)),
            Err(IntMatError::NotSquare { .. })
        ));
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det().unwrap(), big(-1));
        assert_eq!(m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]]).det().unwrap(), big(0));
        assert_eq!(m(&[&[2, 1, 0], &[1, 1, 0], &[0, 0, 1]]).det().unwrap(), big(1));
        assert_eq!(m(&[&[0, 1, 0], &[2, 1, 0], &[0, 0, 3]]).det().unwrap(), big(-6));
        assert_eq!(IntMatrix::zeros(0, 0).det().unwrap(), big(1));
    }

    #[test]
    fn smith_examples() {
        let s = smith_normal_form(&m(&[&[0, 1], &[1, 0]]));
        assert_eq!(s.diagonal_entries(), vec![big(1), big(1)]);
        let s = smith_normal_form(&m(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.diagonal_entries(), vec![big(1), big(6)]);
        let z = IntMatrix::zeros(2, 3);
        assert_eq!(smith_normal_form(&z).diagonal, z);
    }

    #[test]
    fn smith_ops_reconstruct_input() {
        let a = m(&[&[4, 6, 2], &[6, 9, 3], &[2, 1, 7]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.reconstruct(), a);
        assert_eq!(a.replay(&s.ops).unwrap(), s.diagonal);
        let split = a.replay(&s.left_ops()).unwrap().replay(&s.right_ops()).unwrap();
        assert_eq!(split, s.diagonal);
    }

    #[test]
    fn homology_of_contractible_pair() {
        let c = ChainComplex::new(vec![1, 1, 1]).with_boundary(2, m(&[&[1]]));
        let h = homology_from_complex(&c).unwrap();
        assert!(h.degree(1).is_trivial());
        assert!(h.degree(2).is_trivial());
        assert!(h.is_point());
    }

    #[test]
    fn homology_of_two_free_two_handles() {
        let c = ChainComplex::new(vec![0, 0, 2, 0]);
        let h = homology_from_complex(&c).unwrap();
        assert_eq!(h.degree(2), HomologyGroup::free(2));
        assert!(h.degree(1).is_trivial());
    }

    #[test]
    fn homology_detects_bad_complex() {
        let c = ChainComplex::new(vec![0, 1, 1, 1])
            .with_boundary(2, m(&[&[1]]))
            .with_boundary(3, m(&[&[1]]));
        assert_eq!(
            homology_from_complex(&c),
            Err(IntMatError::ComplexInvalid { degree: 3 })
        );
    }

    #[test]
    fn torsion_in_homology() {
        let c = ChainComplex::new(vec![1, 1, 1]).with_boundary(2, m(&[&[2]]));
        let h = homology_from_complex(&c).unwrap();
        assert_eq!(h.degree(1).torsion, vec![big(2)]);
        assert_eq!(h.degree(1).to_string(), "Z/2");
    }

    #[test]
    fn text_format_round_trips() {
        let a = m(&[&[1, -2, 3], &[0, 5, 7]]);
        let text = a.to_string();
        assert_eq!(text, "2 3\n1 -2 3\n0 5 7\n");
        assert_eq!(text.parse::<IntMatrix>().unwrap(), a);
        assert!("2 2\n1 0\n".parse::<IntMatrix>().is_err());
    }

    #[test]
    fn json_handles_large_entries() {
        let mut a = IntMatrix::zeros(1, 2);
        a.set(0, 0, BigInt::from(1u8) << 80);
        a.set(0, 1, big(-3));
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"[["1208925819614629174706176",-3]]"#);
        assert_eq!(serde_json::from_str::<IntMatrix>(&json).unwrap(), a);
    }
}
