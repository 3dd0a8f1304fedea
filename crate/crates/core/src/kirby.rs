//! Kirby diagrams at the level of linking data.
//!
//! A diagram is a list of unknotted-or-not components, each either dotted
//! (a 1-handle) or framed (a 2-handle), with a symmetric linking matrix whose
//! diagonal holds the framings (0 for dotted components). Linking numbers are
//! taken with the orientations fixed by the input; the Akbulut diagram uses +1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grouppres::TriState;
use crate::intmat::{cokernel, homology_from_complex, ChainComplex, HomologyGroup, HomologyGroups, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KirbyError {
    #[error("linking matrix must be {n}x{n}")]
    Shape { n: usize },
    #[error("linking matrix is not symmetric at ({a}, {b})")]
    NotSymmetric { a: usize, b: usize },
    #[error("component {component}: diagonal {diagonal} does not match its role")]
    FramingMismatch { component: usize, diagonal: i64 },
    #[error("dotted component {component} must be an unknot")]
    DottedNotUnknot { component: usize },
    #[error("component {component} is not a 0-framed unknot and cannot be traded")]
    TradeRequiresZeroFramedUnknot { component: usize },
    #[error("component {component} out of range ({count} components)")]
    ComponentOutOfRange { component: usize, count: usize },
    #[error("permutation is not an involution of 0..{n}")]
    PermNotInvolution { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Dotted,
    Framed(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ComponentRepr", into = "ComponentRepr")]
pub struct Component {
    pub role: Role,
    /// Asserted by the input; never computed.
    pub unknot: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RoleTag {
    Dotted,
    Framed,
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr {
    role: RoleTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    framing: Option<i64>,
    unknot: bool,
}

impl TryFrom<ComponentRepr> for Component {
    type Error = String;

    fn try_from(r: ComponentRepr) -> Result<Self, String> {
        let role = match (r.role, r.framing) {
            (RoleTag::Dotted, None) => Role::Dotted,
            (RoleTag::Dotted, Some(_)) => return Err("dotted components carry no framing".into()),
            (RoleTag::Framed, f) => Role::Framed(f.unwrap_or(0)),
        };
        Ok(Component { role, unknot: r.unknot })
    }
}

impl From<Component> for ComponentRepr {
    fn from(c: Component) -> Self {
        match c.role {
            Role::Dotted => ComponentRepr {
                role: RoleTag::Dotted,
                framing: None,
                unknot: c.unknot,
            },
            Role::Framed(f) => ComponentRepr {
                role: RoleTag::Framed,
                framing: Some(f),
                unknot: c.unknot,
            },
        }
    }
}

impl Component {
    pub fn dotted() -> Self {
        Component {
            role: Role::Dotted,
            unknot: true,
        }
    }

    pub fn framed(framing: i64, unknot: bool) -> Self {
        Component {
            role: Role::Framed(framing),
            unknot,
        }
    }

    fn diagonal(&self) -> i64 {
        match self.role {
            Role::Dotted => 0,
            Role::Framed(f) => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct KirbyDiagram {
    components: Vec<Component>,
    linking: Vec<Vec<i64>>,
    /// Statements about the diagram that no computation here checks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

#[derive(Deserialize)]
struct DiagramRepr {
    components: Vec<Component>,
    linking: Vec<Vec<i64>>,
    #[serde(default)]
    notes: Vec<String>,
}

impl<'de> Deserialize<'de> for KirbyDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = DiagramRepr::deserialize(d)?;
        let mut k = KirbyDiagram::new(r.components, r.linking).map_err(serde::de::Error::custom)?;
        k.notes = r.notes;
        Ok(k)
    }
}

/// Attached to the Akbulut diagram: the identity of the common boundary
/// of the two traded diagrams does not extend over them.
pub const AKBULUT_NON_EXTENSION: &str =
    "id: boundary(A0) -> boundary(A1) does not extend to a diffeomorphism A0 -> A1 (not checked)";

impl KirbyDiagram {
    pub fn new(components: Vec<Component>, linking: Vec<Vec<i64>>) -> Result<Self, KirbyError> {
        let n = components.len();
        if linking.len() != n || linking.iter().any(|r| r.len() != n) {
            return Err(KirbyError::Shape { n });
        }
        for a in 0..n {
            if let Some(b) = (a + 1..n).find(|&b| linking[a][b] != linking[b][a]) {
                return Err(KirbyError::NotSymmetric { a, b });
            }
            if linking[a][a] != components[a].diagonal() {
                return Err(KirbyError::FramingMismatch {
                    component: a,
                    diagonal: linking[a][a],
                });
            }
            if components[a].role == Role::Dotted && !components[a].unknot {
                return Err(KirbyError::DottedNotUnknot { component: a });
            }
        }
        Ok(KirbyDiagram {
            components,
            linking,
            notes: Vec::new(),
        })
    }

    pub fn empty() -> Self {
        KirbyDiagram::new(Vec::new(), Vec::new()).expect("empty diagram is valid")
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn linking(&self) -> &[Vec<i64>] {
        &self.linking
    }

    pub fn linking_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(&self.linking, self.components.len()).expect("square")
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    fn indices(&self, dotted: bool) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&c| (self.components[c].role == Role::Dotted) == dotted)
            .collect()
    }
}

/// Two 0-framed unknots linking once: the diagram of `A_{1/2}`.
pub fn akbulut_cork() -> KirbyDiagram {
    KirbyDiagram::new(
        vec![Component::framed(0, true), Component::framed(0, true)],
        vec![vec![0, 1], vec![1, 0]],
    )
    .expect("valid")
    .with_note(AKBULUT_NON_EXTENSION)
}

/// Toggles component `c` between a 0-framed unknot and a dotted circle.
pub fn trade_handle(d: &KirbyDiagram, c: usize) -> Result<KirbyDiagram, KirbyError> {
    let count = d.components.len();
    let comp = d
        .components
        .get(c)
        .ok_or(KirbyError::ComponentOutOfRange { component: c, count })?;
    let role = match comp.role {
        Role::Dotted => Role::Framed(0),
        Role::Framed(0) if comp.unknot => Role::Dotted,
        Role::Framed(_) => return Err(KirbyError::TradeRequiresZeroFramedUnknot { component: c }),
    };
    let mut out = d.clone();
    out.components[c].role = role;
    Ok(out)
}

/// Homology of the 4-manifold: one 0-cell, a 1-cell per dot, a 2-cell per
/// framed component, `∂₂` given by linking with the dots.
pub fn four_manifold_homology(d: &KirbyDiagram) -> HomologyGroups {
    let dots = d.indices(true);
    let framed = d.indices(false);
    let rows: Vec<Vec<i64>> = dots
        .iter()
        .map(|&a| framed.iter().map(|&b| d.linking[a][b]).collect())
        .collect();
    let boundary = IntMatrix::from_rows(&rows, framed.len()).expect("rectangular");
    let complex = ChainComplex::new(vec![1, dots.len(), framed.len()]).with_boundary(2, boundary);
    homology_from_complex(&complex).expect("two-term complex")
}

/// `H₁` of the boundary 3-manifold: every dot read as a 0-framed circle,
/// then the cokernel of the full matrix.
pub fn boundary_homology(d: &KirbyDiagram) -> HomologyGroup {
    cokernel(&d.linking_matrix())
}

/// Relabels components by `perm` (component `k` becomes `perm[k]`) and
/// reports whether the diagram is unchanged.
pub fn apply_involution(d: &KirbyDiagram, perm: &[usize]) -> Result<(KirbyDiagram, bool), KirbyError> {
    let n = d.components.len();
    if perm.len() != n || perm.iter().any(|&p| p >= n) || (0..n).any(|k| perm[perm[k]] != k) {
        return Err(KirbyError::PermNotInvolution { n });
    }
    let mut components = d.components.clone();
    let mut linking = vec![vec![0; n]; n];
    for a in 0..n {
        components[perm[a]] = d.components[a];
        for b in 0..n {
            linking[perm[a]][perm[b]] = d.linking[a][b];
        }
    }
    let mut out = KirbyDiagram::new(components, linking).expect("relabeling keeps validity");
    out.notes = d.notes.clone();
    let fixed = out == *d;
    Ok((out, fixed))
}

/// A named statement carried as metadata and never evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnevaluatedPredicate {
    pub name: String,
    pub statement: String,
}

/// Disks `D_{0,i}`, `D_{1,j}` in the boundary of a contractible `B_{1/2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizedCorkSpec {
    pub n: usize,
    /// `algebraic_intersections[i][j] = D_{0,i} · D_{1,j}`.
    pub algebraic_intersections: Vec<Vec<i64>>,
    pub lower_disjoint: bool,
    pub upper_disjoint: bool,
}

impl GeneralizedCorkSpec {
    pub fn new(matrix: Vec<Vec<i64>>) -> Self {
        GeneralizedCorkSpec {
            n: matrix.len(),
            algebraic_intersections: matrix,
            lower_disjoint: true,
            upper_disjoint: true,
        }
    }

    pub fn concordance_predicate(&self) -> UnevaluatedPredicate {
        UnevaluatedPredicate {
            name: "concordance".to_string(),
            statement: format!(
                "the {}-component link of disk boundaries is concordant in B_1/2 x I to the split link",
                2 * self.n
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "defect", rename_all = "snake_case")]
pub enum CorkDefect {
    /// Disks of one family meet.
    FamilyOverlap {
        family: u8,
    },
    /// An entry of the intersection matrix is not `δ_ij`.
    NotDelta {
        i: usize,
        j: usize,
        value: i64,
    },
    Shape,
}

/// `2n` 0-framed unknots, lower family first; the cross-family block of the
/// linking matrix is the intersection matrix.
pub fn build_generalized_cork(spec: &GeneralizedCorkSpec) -> (KirbyDiagram, TriState<IntMatrix, CorkDefect>) {
    let n = spec.n;
    let m = &spec.algebraic_intersections;
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return (
            KirbyDiagram::empty(),
            TriState::No {
                witness: CorkDefect::Shape,
            },
        );
    }
    let mut linking = vec![vec![0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            linking[i][n + j] = m[i][j];
            linking[n + j][i] = m[i][j];
        }
    }
    let diagram =
        KirbyDiagram::new(vec![Component::framed(0, true); 2 * n], linking).expect("symmetric by construction");
    let verdict = if !spec.lower_disjoint {
        TriState::No {
            witness: CorkDefect::FamilyOverlap { family: 0 },
        }
    } else if !spec.upper_disjoint {
        TriState::No {
            witness: CorkDefect::FamilyOverlap { family: 1 },
        }
    } else if let Some((i, j)) = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| m[i][j] != i64::from(i == j))
    {
        TriState::No {
            witness: CorkDefect::NotDelta {
                i: i + 1,
                j: j + 1,
                value: m[i][j],
            },
        }
    } else {
        TriState::Yes {
            evidence: IntMatrix::from_rows(m, n).expect("square"),
        }
    };
    (diagram, verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn akbulut_homology() {
        let a = akbulut_cork();
        assert_eq!(a.linking(), &[vec![0, 1], vec![1, 0]]);
        let h = four_manifold_homology(&a);
        assert!(h.degree(1).is_trivial());
        assert_eq!(h.degree(2), HomologyGroup::free(2));
        assert!(boundary_homology(&a).is_trivial());
        let a0 = trade_handle(&a, 0).unwrap();
        assert!(four_manifold_homology(&a0).is_point());
        assert!(boundary_homology(&a0).is_trivial());
    }

    #[test]
    fn single_unknot_trade() {
        let d = KirbyDiagram::new(vec![Component::framed(0, true)], vec![vec![0]]).unwrap();
        let t = trade_handle(&d, 0).unwrap();
        assert_eq!(t.components()[0].role, Role::Dotted);
        assert_eq!(boundary_homology(&d), HomologyGroup::free(1));
        assert_eq!(boundary_homology(&t), HomologyGroup::free(1));
        assert_eq!(four_manifold_homology(&t).degree(1), HomologyGroup::free(1));
        assert_eq!(trade_handle(&t, 0).unwrap(), d);
    }

    #[test]
    fn trade_preconditions() {
        let d = KirbyDiagram::new(vec![Component::framed(1, true)], vec![vec![1]]).unwrap();
        assert_eq!(
            trade_handle(&d, 0),
            Err(KirbyError::TradeRequiresZeroFramedUnknot { component: 0 })
        );
        let knotted = KirbyDiagram::new(vec![Component::framed(0, false)], vec![vec![0]]).unwrap();
        assert!(trade_handle(&knotted, 0).is_err());
        assert!(matches!(
            trade_handle(&d, 3),
            Err(KirbyError::ComponentOutOfRange { .. })
        ));
    }

    #[test]
    fn empty_diagram_is_a_point() {
        assert!(four_manifold_homology(&KirbyDiagram::empty()).is_point());
    }

    #[test]
    fn involutions() {
        let (_, sym) = apply_involution(&akbulut_cork(), &[1, 0]).unwrap();
        assert!(sym);
        let (_, sym) = apply_involution(&akbulut_cork(), &[0, 1]).unwrap();
        assert!(sym);
        let d = KirbyDiagram::new(
            vec![Component::framed(0, true), Component::framed(1, true)],
            vec![vec![0, 1], vec![1, 1]],
        )
        .unwrap();
        assert!(!apply_involution(&d, &[1, 0]).unwrap().1);
        let three = KirbyDiagram::new(vec![Component::dotted(); 3], vec![vec![0; 3]; 3]).unwrap();
        assert_eq!(
            apply_involution(&three, &[1, 2, 0]),
            Err(KirbyError::PermNotInvolution { n: 3 })
        );
    }

    #[test]
    fn validation() {
        assert!(matches!(
            KirbyDiagram::new(vec![Component::dotted(); 2], vec![vec![0, 1], vec![2, 0]]),
            Err(KirbyError::NotSymmetric { a: 0, b: 1 })
        ));
        assert!(matches!(
            KirbyDiagram::new(vec![Component::dotted()], vec![vec![3]]),
            Err(KirbyError::FramingMismatch { .. })
        ));
        let dot = Component {
            role: Role::Dotted,
            unknot: false,
        };
        assert!(KirbyDiagram::new(vec![dot], vec![vec![0]]).is_err());
    }

    #[test]
    fn generalized_corks() {
        let (d, v) = build_generalized_cork(&GeneralizedCorkSpec::new(vec![vec![1]]));
        assert_eq!(d.linking(), akbulut_cork().linking());
        assert!(v.is_yes());
        let (d, v) = build_generalized_cork(&GeneralizedCorkSpec::new(vec![vec![1, 0], vec![0, 1]]));
        assert_eq!(d.components().len(), 4);
        assert!(v.is_yes());
        let (_, v) = build_generalized_cork(&GeneralizedCorkSpec::new(vec![vec![1, 1], vec![0, 1]]));
        assert_eq!(v.no(), Some(&CorkDefect::NotDelta { i: 1, j: 2, value: 1 }));
        let mut spec = GeneralizedCorkSpec::new(vec![vec![1]]);
        spec.upper_disjoint = false;
        assert!(build_generalized_cork(&spec).1.is_no());
        assert_eq!(spec.concordance_predicate().name, "concordance");
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"components":[{"role":"framed","framing":0,"unknot":true},{"role":"dotted","unknot":true}],"linking":[[0,1],[1,0]]}"#;
        let d: KirbyDiagram = serde_json::from_str(text).unwrap();
        assert_eq!(serde_json::to_string(&d).unwrap(), text);
        let bad = r#"{"components":[{"role":"dotted","unknot":true}],"linking":[[1]]}"#;
        assert!(serde_json::from_str::<KirbyDiagram>(bad).is_err());
    }
}
