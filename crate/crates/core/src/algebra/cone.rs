use std::fmt;

use num_bigint::BigInt;

use super::{smith_normal_form, AlgebraError, ChainComplex, IntegerMatrix};

/// Degree-`shift` map between chain complexes, one matrix per source degree.
///
/// A chain map satisfies `d_target ∘ f_k = f_{k-1} ∘ d_source` with no sign
/// twist; for `shift = -1` this is exactly what makes the cone differential
/// `[[d_target, f], [0, -d_source]]` square to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    source: ChainComplex,
    target: ChainComplex,
    shift: i64,
    matrices: Vec<IntegerMatrix>,
}

impl ChainMap {
    /// `matrices[idx]` maps source degree `source.k_min() + idx` into target
    /// degree `source.k_min() + idx + shift`. Shapes are checked; commutation
    /// is not (see [`ChainMap::commutation_defects`]).
    pub fn new(
        source: ChainComplex,
        target: ChainComplex,
        shift: i64,
        matrices: Vec<IntegerMatrix>,
    ) -> Result<Self, AlgebraError> {
        if matrices.len() != source.ranks().len() {
            return Err(AlgebraError::Shape {
                degree: source.k_min(),
                detail: format!(
                    "{} map matrices for {} source degrees",
                    matrices.len(),
                    source.ranks().len()
                ),
            });
        }
        for (k, m) in source.degrees().zip(&matrices) {
            let want = (target.rank(k + shift), source.rank(k));
            if m.shape() != want {
                return Err(AlgebraError::Shape {
                    degree: k,
                    detail: format!(
                        "map matrix is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        want.0,
                        want.1
                    ),
                });
            }
        }
        Ok(ChainMap {
            source,
            target,
            shift,
            matrices,
        })
    }

    pub fn zero(source: ChainComplex, target: ChainComplex, shift: i64) -> Self {
        let matrices = source
            .degrees()
            .map(|k| IntegerMatrix::zeros(target.rank(k + shift), source.rank(k)))
            .collect();
        ChainMap {
            source,
            target,
            shift,
            matrices,
        }
    }

    pub fn source(&self) -> &ChainComplex {
        &self.source
    }

    pub fn target(&self) -> &ChainComplex {
        &self.target
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Matrix on source degree `k` (a zero matrix outside the source range).
    pub fn matrix(&self, k: i64) -> IntegerMatrix {
        if k >= self.source.k_min() && k <= self.source.k_max() {
            self.matrices[(k - self.source.k_min()) as usize].clone()
        } else {
            IntegerMatrix::zeros(self.target.rank(k + self.shift), self.source.rank(k))
        }
    }

    /// Source degrees where `d_T ∘ f_k ≠ f_{k-1} ∘ d_S`.
    pub fn commutation_defects(&self) -> Vec<i64> {
        self.source
            .degrees()
            .filter(|&k| {
                let lhs = &self.target.differential(k + self.shift) * &self.matrix(k);
                let rhs = &self.matrix(k - 1) * &self.source.differential(k);
                lhs != rhs
            })
            .collect()
    }

    pub fn is_chain_map(&self) -> bool {
        self.commutation_defects().is_empty()
    }

    /// `self` followed by `next`; `None` when `next` does not start where
    /// `self` lands or shapes disagree.
    pub fn then(&self, next: &ChainMap) -> Option<ChainMap> {
        if next.source != self.target {
            return None;
        }
        let matrices = self
            .source
            .degrees()
            .map(|k| next.matrix(k + self.shift).checked_mul(&self.matrix(k)))
            .collect::<Option<Vec<_>>>()?;
        ChainMap::new(
            self.source.clone(),
            next.target.clone(),
            self.shift + next.shift,
            matrices,
        )
        .ok()
    }
}

/// Mapping cone of a degree `-1` chain map `f : S -> T`.
///
/// `Cone_k = T_k ⊕ S_k` (target generators first) with differential
/// `[[d_T, f_k], [0, -d_S]]`.
pub fn mapping_cone(f: &ChainMap) -> Result<ChainComplex, AlgebraError> {
    if f.shift != -1 {
        return Err(AlgebraError::WrongShift(f.shift));
    }
    let defects = f.commutation_defects();
    if !defects.is_empty() {
        return Err(AlgebraError::NotAChainMap(defects));
    }
    let (s, t) = (&f.source, &f.target);
    if s.is_empty() && t.is_empty() {
        return Ok(ChainComplex::empty());
    }
    let lo = lower_bound(s, t);
    let hi = upper_bound(s, t);
    let rank = |k: i64| t.rank(k) + s.rank(k);
    let ranks: Vec<usize> = (lo..=hi).map(rank).collect();
    let mut diffs = Vec::with_capacity(ranks.len());
    for k in lo..=hi {
        let mut d = IntegerMatrix::zeros(if k == lo { 0 } else { rank(k - 1) }, rank(k));
        if k > lo {
            d.set_block(0, 0, &t.differential(k));
            d.set_block(0, t.rank(k), &f.matrix(k));
            d.set_block(t.rank(k - 1), t.rank(k), &s.differential(k).neg());
        }
        diffs.push(d);
    }
    let cone = ChainComplex::new(lo, ranks, diffs)?;
    debug_assert!(cone.verify().is_empty());
    Ok(cone)
}

fn lower_bound(a: &ChainComplex, b: &ChainComplex) -> i64 {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.k_min(),
        (_, true) => a.k_min(),
        _ => a.k_min().min(b.k_min()),
    }
}

fn upper_bound(a: &ChainComplex, b: &ChainComplex) -> i64 {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.k_max(),
        (_, true) => a.k_max(),
        _ => a.k_max().max(b.k_max()),
    }
}

/// Rational rank bookkeeping for one degree of the long exact sequence
/// `H_k(T) -i-> H_k(C) -p-> H_k(S) -f-> H_{k-1}(T)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesDegree {
    pub degree: i64,
    pub dim_target: usize,
    pub dim_cone: usize,
    pub dim_source: usize,
    pub rank_inclusion: usize,
    pub rank_projection: usize,
    /// Rank of `f_* : H_k(S) -> H_{k-1}(T)`.
    pub rank_connecting: usize,
    pub exact_at_target: bool,
    pub exact_at_cone: bool,
    pub exact_at_source: bool,
}

impl LesDegree {
    pub fn is_exact(&self) -> bool {
        self.exact_at_target && self.exact_at_cone && self.exact_at_source
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesReport {
    pub degrees: Vec<LesDegree>,
}

impl LesReport {
    pub fn is_exact(&self) -> bool {
        self.degrees.iter().all(LesDegree::is_exact)
    }
}

impl fmt::Display for LesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "degree  dimH(T)  dimH(C)  dimH(S)  rk i  rk p  rk f  exact")?;
        for d in &self.degrees {
            writeln!(
                f,
                "{:>6}  {:>7}  {:>7}  {:>7}  {:>4}  {:>4}  {:>4}  {}",
                d.degree,
                d.dim_target,
                d.dim_cone,
                d.dim_source,
                d.rank_inclusion,
                d.rank_projection,
                d.rank_connecting,
                if d.is_exact() { "yes" } else { "NO" }
            )?;
        }
        Ok(())
    }
}

/// Cycles and boundaries of one degree, as integer column bases.
struct DegreeData {
    cycles: IntegerMatrix,
    boundaries: IntegerMatrix,
    boundary_rank: usize,
}

impl DegreeData {
    fn of(c: &ChainComplex, k: i64) -> Self {
        let cycles = smith_normal_form(&c.differential(k)).kernel_basis();
        let boundaries = c.differential(k + 1);
        let boundary_rank = boundaries.rank();
        DegreeData {
            cycles,
            boundaries,
            boundary_rank,
        }
    }

    fn dim(&self) -> usize {
        self.cycles.cols() - self.boundary_rank
    }
}

/// Rank over `Q` of the map induced on homology by `m : A_k -> B_j`.
fn induced_rank(m: &IntegerMatrix, a: &DegreeData, b: &DegreeData) -> usize {
    let images = m * &a.cycles;
    let stacked = images.hstack(&b.boundaries).expect("row counts agree");
    stacked.rank() - b.boundary_rank
}

/// Checks rank-exactness over `Q` of the long exact sequence of the cone of a
/// degree `-1` chain map, in every degree of the cone's range.
pub fn verify_les_exactness(f: &ChainMap) -> Result<LesReport, AlgebraError> {
    let cone = mapping_cone(f)?;
    let (s, t) = (&f.source, &f.target);
    if cone.is_empty() {
        return Ok(LesReport { degrees: Vec::new() });
    }
    let lo = cone.k_min() - 1;
    let hi = cone.k_max() + 1;
    let neg_s = negated(s);

    let sdata: Vec<DegreeData> = (lo..=hi).map(|k| DegreeData::of(&neg_s, k)).collect();
    let tdata: Vec<DegreeData> = (lo..=hi).map(|k| DegreeData::of(t, k)).collect();
    let cdata: Vec<DegreeData> = (lo..=hi).map(|k| DegreeData::of(&cone, k)).collect();
    let idx = |k: i64| (k - lo) as usize;

    let inclusion = |k: i64| -> IntegerMatrix {
        let mut m = IntegerMatrix::zeros(cone.rank(k), t.rank(k));
        for i in 0..t.rank(k) {
            m[(i, i)] = BigInt::from(1);
        }
        m
    };
    let projection = |k: i64| -> IntegerMatrix {
        let mut m = IntegerMatrix::zeros(s.rank(k), cone.rank(k));
        for i in 0..s.rank(k) {
            m[(i, t.rank(k) + i)] = BigInt::from(1);
        }
        m
    };
    let rank_i = |k: i64| induced_rank(&inclusion(k), &tdata[idx(k)], &cdata[idx(k)]);
    let rank_p = |k: i64| induced_rank(&projection(k), &cdata[idx(k)], &sdata[idx(k)]);
    let rank_f = |k: i64| induced_rank(&f.matrix(k), &sdata[idx(k)], &tdata[idx(k - 1)]);

    let mut degrees = Vec::new();
    for k in cone.k_min()..=cone.k_max() {
        let (ri, rp, rf) = (rank_i(k), rank_p(k), rank_f(k));
        let rf_above = rank_f(k + 1);
        let dt = tdata[idx(k)].dim();
        let dc = cdata[idx(k)].dim();
        let ds = sdata[idx(k)].dim();
        degrees.push(LesDegree {
            degree: k,
            dim_target: dt,
            dim_cone: dc,
            dim_source: ds,
            rank_inclusion: ri,
            rank_projection: rp,
            rank_connecting: rf,
            exact_at_target: dt == rf_above + ri,
            exact_at_cone: dc == ri + rp,
            exact_at_source: ds == rp + rf,
        });
    }
    Ok(LesReport { degrees })
}

fn negated(c: &ChainComplex) -> ChainComplex {
    ChainComplex::new(
        c.k_min(),
        c.ranks().to_vec(),
        c.degrees().map(|k| c.differential(k).neg()).collect(),
    )
    .expect("same shapes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{homology, HomologySummary};

    fn point(k: i64) -> ChainComplex {
        ChainComplex::zero(k, vec![1])
    }

    #[test]
    fn cone_of_isomorphism_is_acyclic() {
        let f = ChainMap::new(point(2), point(1), -1, vec![IntegerMatrix::identity(1)]).unwrap();
        let cone = mapping_cone(&f).unwrap();
        assert!(cone.verify().is_empty());
        assert!(homology(&cone).unwrap().is_zero());
        let les = verify_les_exactness(&f).unwrap();
        assert!(les.is_exact(), "{les}");
    }

    #[test]
    fn cone_of_zero_splits() {
        let s = ChainComplex::zero(0, vec![1, 0, 1]);
        let t = ChainComplex::zero(0, vec![1, 2, 1]);
        let f = ChainMap::zero(s.clone(), t.clone(), -1);
        let cone = mapping_cone(&f).unwrap();
        let expected = homology(&t).unwrap().direct_sum(&homology(&s).unwrap());
        assert_eq!(homology(&cone).unwrap(), expected);
        assert!(verify_les_exactness(&f).unwrap().is_exact());
    }

    #[test]
    fn times_two_gives_z2() {
        let f = ChainMap::new(
            point(2),
            point(1),
            -1,
            vec![IntegerMatrix::from_rows(&[[2]])],
        )
        .unwrap();
        let h = homology(&mapping_cone(&f).unwrap()).unwrap();
        let mut expected = HomologySummary::default();
        expected = expected.direct_sum(&HomologySummary::from_groups([(
            1,
            crate::algebra::HomologyGroup {
                betti: 0,
                torsion: vec![BigInt::from(2)],
            },
        )]));
        assert_eq!(h, expected);
        assert!(verify_les_exactness(&f).unwrap().is_exact());
    }

    #[test]
    fn rejects_non_chain_map_and_wrong_shift() {
        let t = ChainComplex::new(
            0,
            vec![1, 1],
            vec![IntegerMatrix::zeros(0, 1), IntegerMatrix::from_rows(&[[1]])],
        )
        .unwrap();
        let f = ChainMap::new(point(2), t.clone(), -1, vec![IntegerMatrix::from_rows(&[[1]])]).unwrap();
        assert_eq!(f.commutation_defects(), vec![2]);
        assert!(matches!(mapping_cone(&f), Err(AlgebraError::NotAChainMap(d)) if d == vec![2]));
        let g = ChainMap::zero(point(1), t, 0);
        assert!(matches!(mapping_cone(&g), Err(AlgebraError::WrongShift(0))));
    }

    #[test]
    fn composition_multiplies_matrices() {
        let f = ChainMap::new(point(2), point(1), -1, vec![IntegerMatrix::from_rows(&[[2]])]).unwrap();
        let g = ChainMap::new(point(1), point(0), -1, vec![IntegerMatrix::from_rows(&[[3]])]).unwrap();
        let h = f.then(&g).unwrap();
        assert_eq!(h.shift(), -2);
        assert_eq!(h.matrix(2), IntegerMatrix::from_rows(&[[6]]));
    }
}
