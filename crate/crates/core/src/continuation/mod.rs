//! Flow continuations between classical flow categories: the continuation
//! chain map, the merged category and its identification with the mapping
//! cone, and composition.

pub mod format;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::algebra::{
    homology, mapping_cone, verify_les_exactness, AlgebraError, ChainComplex, ChainMap, HomologySummary,
    IntegerMatrix, LesReport,
};
use crate::flowcat::{DSquaredViolation, FlowCatError, GradedFlowCategory};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContinuationError {
    #[error(transparent)]
    Category(#[from] FlowCatError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("cross count ({0}, {1}) refers to a missing point")]
    UnknownIndex(usize, usize),
    #[error("cross count {from} -> {to} spans grading gap {gap}, expected 1")]
    GradingGap { from: String, to: String, gap: i64 },
    #[error("merged category violates d² at {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
    MergedDSquared(Vec<MergedViolation>),
    #[error("middle categories differ: {0}")]
    MiddleMismatch(String),
}

/// A d² violation of the merged category, with point names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedViolation {
    pub from: String,
    pub to: String,
    pub sum: BigInt,
}

impl fmt::Display for MergedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) sums to {}", self.from, self.to, self.sum)
    }
}

/// Continuation from `source` (points `I`) to `target` (points `J`): signed
/// counts of flow lines from `i ∈ I` to `j ∈ J` with `μ(i) - μ(j) = 1`,
/// such that the merged category with `I` before `J` is a flow category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowContinuation {
    source: GradedFlowCategory,
    target: GradedFlowCategory,
    cross: BTreeMap<(usize, usize), i64>,
}

impl FlowContinuation {
    /// Checks that cross counts are between existing points with grading
    /// gap one. The merged d² condition is checked by the operations that
    /// need it (see [`FlowContinuation::check_merged_d_squared`]).
    pub fn new(
        source: GradedFlowCategory,
        target: GradedFlowCategory,
        cross: impl IntoIterator<Item = ((usize, usize), i64)>,
    ) -> Result<Self, ContinuationError> {
        let mut map = BTreeMap::new();
        for ((i, j), n) in cross {
            if i >= source.len() || j >= target.len() {
                return Err(ContinuationError::UnknownIndex(i, j));
            }
            let gap = source.mu(i) - target.mu(j);
            if gap != 1 {
                return Err(ContinuationError::GradingGap {
                    from: source.name(i).to_string(),
                    to: target.name(j).to_string(),
                    gap,
                });
            }
            map.insert((i, j), n);
        }
        Ok(FlowContinuation {
            source,
            target,
            cross: map,
        })
    }

    pub fn source(&self) -> &GradedFlowCategory {
        &self.source
    }

    pub fn target(&self) -> &GradedFlowCategory {
        &self.target
    }

    pub fn cross(&self, i: usize, j: usize) -> i64 {
        self.cross.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn cross_counts(&self) -> impl Iterator<Item = ((usize, usize), i64)> + '_ {
        self.cross.iter().map(|(&k, &v)| (k, v))
    }

    /// Cross counts as a `|I| x |J|` matrix.
    pub fn cross_matrix(&self) -> IntegerMatrix {
        let mut m = IntegerMatrix::zeros(self.source.len(), self.target.len());
        for (&(i, j), &n) in &self.cross {
            m[(i, j)] = BigInt::from(n);
        }
        m
    }

    /// Target point names as they appear in the merged category: a name
    /// already used by a source point gets trailing primes.
    fn merged_target_names(&self) -> Vec<String> {
        let mut used: HashSet<String> = self.source.names().iter().cloned().collect();
        self.target
            .names()
            .iter()
            .map(|n| {
                let mut name = n.clone();
                while used.contains(&name) {
                    name.push('\'');
                }
                used.insert(name.clone());
                name
            })
            .collect()
    }

    fn merged_unchecked(&self) -> GradedFlowCategory {
        let offset = self.source.len();
        let points = self
            .source
            .names()
            .iter()
            .cloned()
            .zip(self.source.grading().iter().copied())
            .chain(self.merged_target_names().into_iter().zip(self.target.grading().iter().copied()))
            .collect();
        let counts = self
            .source
            .counts()
            .chain(self.target.counts().map(|((i, j), n)| ((i + offset, j + offset), n)))
            .chain(self.cross_counts().map(|((i, j), n)| ((i, j + offset), n)))
            .collect::<Vec<_>>();
        GradedFlowCategory::new(points, counts).expect("merged points and counts are valid by construction")
    }

    /// d² violations of the merged category, covering the two constituent
    /// categories and the mixed condition.
    pub fn check_merged_d_squared(&self) -> Vec<MergedViolation> {
        let merged = self.merged_unchecked();
        merged
            .check_d_squared()
            .into_iter()
            .map(|DSquaredViolation { source, target, sum }| MergedViolation {
                from: merged.name(source).to_string(),
                to: merged.name(target).to_string(),
                sum,
            })
            .collect()
    }

    fn require_d_squared(&self) -> Result<(), ContinuationError> {
        let v = self.check_merged_d_squared();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ContinuationError::MergedDSquared(v))
        }
    }

    /// The merged category on `I ⊔ J` with every point of `I` before every
    /// point of `J`.
    pub fn merged_category(&self) -> Result<GradedFlowCategory, ContinuationError> {
        self.require_d_squared()?;
        Ok(self.merged_unchecked())
    }

    /// Degree `-1` chain map between the Morse complexes,
    /// `f(p_i) = (-1)^{μ(i)+1} Σ_j cross(i, j) p_j`.
    ///
    /// Cross counts anticommute with the differentials (that is the merged
    /// d² condition), and the alternating sign turns them into a chain map
    /// whose mapping cone is the merged complex.
    pub fn continuation_chain_map(&self) -> Result<ChainMap, ContinuationError> {
        self.require_d_squared()?;
        let s = self.source.morse_complex()?;
        let t = self.target.morse_complex()?;
        let s_pos = positions(&self.source);
        let t_pos = positions(&self.target);
        let matrices = s
            .degrees()
            .map(|k| {
                let mut m = IntegerMatrix::zeros(t.rank(k - 1), s.rank(k));
                for (&(i, j), &n) in &self.cross {
                    if self.source.mu(i) == k {
                        m[(t_pos[j], s_pos[i])] = BigInt::from(sign(k) * n);
                    }
                }
                m
            })
            .collect();
        let f = ChainMap::new(s, t, -1, matrices)?;
        let defects = f.commutation_defects();
        if !defects.is_empty() {
            return Err(AlgebraError::NotAChainMap(defects).into());
        }
        Ok(f)
    }

    /// Compares the merged complex with the mapping cone of the continuation
    /// map and checks exactness of the long exact sequence.
    pub fn exact_triangle_report(&self) -> Result<TriangleReport, ContinuationError> {
        let f = self.continuation_chain_map()?;
        let merged_cat = self.merged_category()?;
        let merged = merged_cat.morse_complex()?;
        let cone = mapping_cone(&f)?;
        let identification = self.cone_identification(&merged_cat, &merged, &cone);
        let mut defects = Vec::new();
        let mut ranks_agree = merged.degrees().eq(cone.degrees());
        if ranks_agree {
            for k in merged.degrees() {
                if merged.rank(k) != cone.rank(k) {
                    ranks_agree = false;
                }
            }
        }
        if ranks_agree {
            for k in merged.degrees().skip(1) {
                let lhs = &identification[&(k - 1)] * &merged.differential(k);
                let rhs = &cone.differential(k) * &identification[&k];
                if lhs != rhs {
                    defects.push(k);
                }
            }
        }
        let les = verify_les_exactness(&f)?;
        Ok(TriangleReport {
            merged_homology: homology(&merged)?,
            cone_homology: homology(&cone)?,
            isomorphic: ranks_agree && defects.is_empty(),
            defects,
            les,
            merged,
            cone,
        })
    }

    /// Signed permutation `merged_k -> cone_k`: target points map to the
    /// target block, source points in degree `k` to the source block with
    /// sign `(-1)^{k+1}`.
    fn cone_identification(
        &self,
        merged_cat: &GradedFlowCategory,
        merged: &ChainComplex,
        cone: &ChainComplex,
    ) -> BTreeMap<i64, IntegerMatrix> {
        let offset = self.source.len();
        let m_pos = positions(merged_cat);
        let s_pos = positions(&self.source);
        let t_pos = positions(&self.target);
        let t_rank = |k: i64| self.target.grading().iter().filter(|&&mu| mu == k).count();
        merged
            .degrees()
            .map(|k| {
                let mut phi = IntegerMatrix::zeros(cone.rank(k), merged.rank(k));
                for p in 0..merged_cat.len() {
                    if merged_cat.mu(p) != k {
                        continue;
                    }
                    if p < offset {
                        phi[(t_rank(k) + s_pos[p], m_pos[p])] = BigInt::from(sign(k));
                    } else {
                        phi[(t_pos[p - offset], m_pos[p])] = BigInt::from(1);
                    }
                }
                (k, phi)
            })
            .collect()
    }
}

/// `(-1)^{k+1}`
fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 1 {
        1
    } else {
        -1
    }
}

/// Position of each point among the points of its grading.
fn positions(cat: &GradedFlowCategory) -> Vec<usize> {
    cat.degree_layout(|i| cat.mu(i)).2
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleReport {
    pub merged: ChainComplex,
    pub cone: ChainComplex,
    /// Whether the signed identification intertwines the two differentials.
    pub isomorphic: bool,
    /// Degrees where it does not.
    pub defects: Vec<i64>,
    pub les: LesReport,
    pub merged_homology: HomologySummary,
    pub cone_homology: HomologySummary,
}

impl TriangleReport {
    pub fn holds(&self) -> bool {
        self.isomorphic && self.les.is_exact() && self.merged_homology == self.cone_homology
    }
}

impl fmt::Display for TriangleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "yes" } else { "NO" };
        writeln!(f, "merged complex equals mapping cone: {}", verdict(self.isomorphic))?;
        if !self.defects.is_empty() {
            writeln!(f, "  differential mismatch in degrees {:?}", self.defects)?;
        }
        writeln!(
            f,
            "homology agrees: {}",
            verdict(self.merged_homology == self.cone_homology)
        )?;
        write!(f, "{}", self.les)?;
        write!(f, "long exact sequence exact: {}", verdict(self.les.is_exact()))
    }
}

/// Composite of `first : I -> J` and `second : J' -> K`, where `J'` equals
/// `J` up to a uniform grading shift `δ`. The composite runs from `I` with
/// grading `μ_I - 1 + δ` to `K`, with
/// `cross(i, k) = (-1)^{μ_I(i)+1} Σ_j cross₁(i, j) cross₂(j, k)`.
///
/// With this sign the composite's chain map is the product of the two
/// constituent chain maps, and composition is associative.
pub fn compose_continuations(
    first: &FlowContinuation,
    second: &FlowContinuation,
) -> Result<FlowContinuation, ContinuationError> {
    let mid_a = first.target();
    let mid_b = second.source();
    if mid_a.len() != mid_b.len() {
        return Err(ContinuationError::MiddleMismatch(format!(
            "{} points vs {}",
            mid_a.len(),
            mid_b.len()
        )));
    }
    let delta = match (mid_a.grading().first(), mid_b.grading().first()) {
        (Some(a), Some(b)) => b - a,
        _ => 0,
    };
    if !mid_a.same_structure(&mid_b.shifted(-delta)) {
        return Err(ContinuationError::MiddleMismatch(
            "gradings or counts differ beyond a uniform shift".into(),
        ));
    }
    let product = &first.cross_matrix() * &second.cross_matrix();
    let source = first.source().shifted(delta - 1);
    let mut cross = Vec::new();
    for i in 0..product.rows() {
        for k in 0..product.cols() {
            let v = &product[(i, k)];
            if *v != BigInt::from(0) {
                let n: i64 = v.try_into().expect("composite count fits in i64");
                cross.push(((i, k), sign(first.source().mu(i)) * n));
            }
        }
    }
    FlowContinuation::new(source, second.target().clone(), cross)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(name: &str, mu: i64) -> GradedFlowCategory {
        GradedFlowCategory::new(vec![(name.into(), mu)], []).unwrap()
    }

    #[test]
    fn one_generator_identity() {
        let fc = FlowContinuation::new(point("a", 1), point("a", 0), [((0, 0), 1)]).unwrap();
        let f = fc.continuation_chain_map().unwrap();
        assert_eq!(f.matrix(1), IntegerMatrix::identity(1));
        let merged = fc.merged_category().unwrap();
        assert_eq!(merged.names(), &["a".to_string(), "a'".to_string()]);
        assert_eq!(merged.count(0, 1), 1);
        let report = fc.exact_triangle_report().unwrap();
        assert!(report.holds(), "{report}");
        assert!(report.merged_homology.is_zero());
    }

    #[test]
    fn zero_continuation_splits() {
        let s2 = GradedFlowCategory::from_gradings(&[2, 0], []).unwrap();
        let s2_up = s2.shifted(1);
        let fc = FlowContinuation::new(s2_up.clone(), s2.clone(), []).unwrap();
        let f = fc.continuation_chain_map().unwrap();
        assert!(f.source().degrees().all(|k| f.matrix(k).is_zero()));
        let report = fc.exact_triangle_report().unwrap();
        assert!(report.holds());
        let expected = homology(&s2.morse_complex().unwrap())
            .unwrap()
            .direct_sum(&homology(&s2_up.morse_complex().unwrap()).unwrap());
        assert_eq!(report.merged_homology, expected);
    }

    #[test]
    fn identity_between_sphere_copies() {
        let s2 = GradedFlowCategory::from_gradings(&[2, 0], []).unwrap();
        let fc = FlowContinuation::new(s2.shifted(1), s2, [((0, 0), 1), ((1, 1), 1)]).unwrap();
        let report = fc.exact_triangle_report().unwrap();
        assert!(report.holds(), "{report}");
        assert!(report.cone_homology.is_zero());
    }

    #[test]
    fn merged_violation_is_rejected() {
        // a -> b -> c' with a single path and no cancellation
        let src = GradedFlowCategory::from_gradings(&[2, 1], [((0, 1), 1)]).unwrap();
        let fc = FlowContinuation::new(src, point("c", 0), [((1, 0), 1)]).unwrap();
        let v = fc.check_merged_d_squared();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].from.as_str(), v[0].to.as_str()), ("p0", "c"));
        assert!(matches!(fc.continuation_chain_map(), Err(ContinuationError::MergedDSquared(_))));
    }

    #[test]
    fn gap_is_checked() {
        assert!(matches!(
            FlowContinuation::new(point("a", 2), point("b", 0), [((0, 0), 1)]),
            Err(ContinuationError::GradingGap { gap: 2, .. })
        ));
    }

    #[test]
    fn composite_of_single_points() {
        let fc1 = FlowContinuation::new(point("a", 3), point("b", 2), [((0, 0), 2)]).unwrap();
        let fc2 = FlowContinuation::new(point("b", 2), point("c", 1), [((0, 0), 3)]).unwrap();
        let c = compose_continuations(&fc1, &fc2).unwrap();
        assert_eq!(c.cross(0, 0), 6);
        assert_eq!(c.source().grading(), &[2]);
        let f1 = fc1.continuation_chain_map().unwrap();
        let f2 = fc2.continuation_chain_map().unwrap();
        // the degree-2 map carries sign (-1)^{2+1}, the product picks up one from f2
        let product = f1.then(&f2).unwrap().matrix(3);
        assert_eq!(product, IntegerMatrix::from_rows(&[[-6]]));
        assert_eq!(c.continuation_chain_map().unwrap().matrix(2), product);

        let zero = FlowContinuation::new(point("b", 2), point("c", 1), []).unwrap();
        assert_eq!(compose_continuations(&fc1, &zero).unwrap().cross_counts().count(), 0);
    }

    #[test]
    fn mismatched_middles_are_rejected() {
        let fc1 = FlowContinuation::new(point("a", 1), point("b", 0), []).unwrap();
        let two = GradedFlowCategory::from_gradings(&[0, 0], []).unwrap();
        let fc2 = FlowContinuation::new(two, point("c", -1), []).unwrap();
        assert!(matches!(
            compose_continuations(&fc1, &fc2),
            Err(ContinuationError::MiddleMismatch(_))
        ));
    }
}
