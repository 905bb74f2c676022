use std::collections::BTreeMap;

use crate::algebra::ChainComplex;

use super::{FlowCatError, GradedFlowCategory};

/// Dimension bookkeeping of a framed flow category: the Euclidean spaces
/// `E_{i,j}` the moduli embed in, the framing spaces `V_{i,j}`, and the ranks
/// of the bundles `ξ_i` over the critical loci.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingDimensions {
    points: usize,
    dim_e: BTreeMap<(usize, usize), i64>,
    dim_v: BTreeMap<(usize, usize), i64>,
    xi_rank: Vec<i64>,
}

impl EmbeddingDimensions {
    /// Raw constructor; nothing is checked (see [`EmbeddingDimensions::validate`]).
    pub fn new(
        points: usize,
        dim_e: BTreeMap<(usize, usize), i64>,
        dim_v: BTreeMap<(usize, usize), i64>,
        xi_rank: Vec<i64>,
    ) -> Self {
        EmbeddingDimensions {
            points,
            dim_e,
            dim_v,
            xi_rank,
        }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dim_e(&self, i: usize, j: usize) -> i64 {
        self.dim_e.get(&(i, j)).copied().unwrap_or(0)
    }

    /// `dim V_{i,j}`; zero on the diagonal.
    pub fn dim_v(&self, i: usize, j: usize) -> i64 {
        if i == j {
            0
        } else {
            self.dim_v.get(&(i, j)).copied().unwrap_or(0)
        }
    }

    /// `dim E_{i,j} + 1` for `i < j`, zero for `i = j`.
    pub fn dim_f(&self, i: usize, j: usize) -> i64 {
        if i == j {
            0
        } else {
            self.dim_e(i, j) + 1
        }
    }

    pub fn xi_rank(&self, i: usize) -> i64 {
        self.xi_rank.get(i).copied().unwrap_or(0)
    }

    /// Checks nonnegativity, additivity of `E` (with the corner direction)
    /// and of `V`, and the rank balance
    /// `ξ_i + dim E_{i,j} - (μ(i) - μ(j) - 1) = dim V_{i,j} + ξ_j`.
    pub fn validate(&self, cat: &GradedFlowCategory) -> Result<(), FlowCatError> {
        let n = cat.len();
        let bad = |msg: String| Err(FlowCatError::Dimensions(msg));
        if self.points != n || self.xi_rank.len() != n {
            return bad(format!("dimensions cover {} points, category has {n}", self.points));
        }
        for i in 0..n {
            if self.xi_rank[i] < 0 {
                return bad(format!("rank of ξ at {} is negative", cat.name(i)));
            }
            for j in i + 1..n {
                if !self.dim_e.contains_key(&(i, j)) || !self.dim_v.contains_key(&(i, j)) {
                    return bad(format!("missing dimensions for ({}, {})", cat.name(i), cat.name(j)));
                }
                if self.dim_e(i, j) < 0 || self.dim_v(i, j) < 0 {
                    return bad(format!("negative dimension at ({}, {})", cat.name(i), cat.name(j)));
                }
                let lhs = self.xi_rank(i) + self.dim_e(i, j) - (cat.mu(i) - cat.mu(j) - 1);
                let rhs = self.dim_v(i, j) + self.xi_rank(j);
                if lhs != rhs {
                    return bad(format!(
                        "rank balance fails at ({}, {}): {lhs} != {rhs}",
                        cat.name(i),
                        cat.name(j)
                    ));
                }
                for u in i + 1..j {
                    if self.dim_e(i, j) != self.dim_e(i, u) + 1 + self.dim_e(u, j) {
                        return bad(format!(
                            "E additivity fails at ({}, {}, {})",
                            cat.name(i),
                            cat.name(u),
                            cat.name(j)
                        ));
                    }
                    if self.dim_v(i, j) != self.dim_v(i, u) + self.dim_v(u, j) {
                        return bad(format!(
                            "V additivity fails at ({}, {}, {})",
                            cat.name(i),
                            cat.name(u),
                            cat.name(j)
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Stabilized dimensions with trivial `ξ`. Each consecutive pair of points
/// with grading drop `g` contributes `max(K·g, 1)` to a running length `D`;
/// then `dim E_{i,j} = D(i,j) - 1` and `dim V_{i,j} = D(i,j) - (μ(i) - μ(j))`.
/// For strictly decreasing gradings this is `dim E = K(μ(i) - μ(j)) - 1`,
/// `dim V = (K - 1)(μ(i) - μ(j))`.
pub fn synthesize_embedding_dimensions(
    cat: &GradedFlowCategory,
    stabilization: i64,
) -> Result<EmbeddingDimensions, FlowCatError> {
    if stabilization < 2 {
        return Err(FlowCatError::Stabilization(stabilization));
    }
    let n = cat.len();
    // prefix[i] = D(0, i)
    let mut prefix = vec![0i64; n];
    for i in 1..n {
        let gap = cat.mu(i - 1) - cat.mu(i);
        prefix[i] = prefix[i - 1] + (stabilization * gap).max(1);
    }
    let mut dim_e = BTreeMap::new();
    let mut dim_v = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = prefix[j] - prefix[i];
            dim_e.insert((i, j), d - 1);
            dim_v.insert((i, j), d - (cat.mu(i) - cat.mu(j)));
        }
    }
    let dims = EmbeddingDimensions::new(n, dim_e, dim_v, vec![0; n]);
    dims.validate(cat)?;
    Ok(dims)
}

/// Unstable cell dimension of the cell attached for point `i`:
/// `dim V(min, i) + rk ξ_i + dim F(i, max)`.
pub fn cell_dimension(dims: &EmbeddingDimensions, i: usize) -> i64 {
    let last = dims.points() - 1;
    dims.dim_v(0, i) + dims.xi_rank(i) + dims.dim_f(i, last)
}

/// Formal desuspension applied to the unstable complex:
/// `dim V(min, max) - μ(max) + rk ξ_max`.
pub fn desuspension(cat: &GradedFlowCategory, dims: &EmbeddingDimensions) -> i64 {
    let last = cat.len() - 1;
    dims.dim_v(0, last) - cat.mu(last) + dims.xi_rank(last)
}

/// Cellular chain complex of the unstable CJS construction, desuspended.
/// Each point contributes one cell; attaching degrees are the flow-line
/// counts. Fails if some cell does not land in the grading of its point.
pub fn cjs_cellular_complex(
    cat: &GradedFlowCategory,
    dims: &EmbeddingDimensions,
) -> Result<ChainComplex, FlowCatError> {
    if cat.is_empty() {
        return Ok(ChainComplex::empty());
    }
    if dims.points() != cat.len() {
        return Err(FlowCatError::Dimensions(format!(
            "dimensions cover {} points, category has {}",
            dims.points(),
            cat.len()
        )));
    }
    let shift = desuspension(cat, dims);
    for i in 0..cat.len() {
        let cell = cell_dimension(dims, i);
        if cell - shift != cat.mu(i) {
            return Err(FlowCatError::CellDimension {
                point: cat.name(i).to_string(),
                degree: cell - shift,
                grading: cat.mu(i),
            });
        }
    }
    let violations = cat.check_d_squared();
    if !violations.is_empty() {
        return Err(FlowCatError::DSquared(violations));
    }
    cat.complex_in_degrees(|i| cell_dimension(dims, i) - shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_one_pair() {
        let c = GradedFlowCategory::from_gradings(&[1, 0], []).unwrap();
        let d = synthesize_embedding_dimensions(&c, 2).unwrap();
        assert_eq!((d.dim_e(0, 1), d.dim_v(0, 1)), (1, 1));
    }

    #[test]
    fn three_points_additivity() {
        let c = GradedFlowCategory::from_gradings(&[2, 1, 0], []).unwrap();
        let d = synthesize_embedding_dimensions(&c, 3).unwrap();
        assert_eq!(d.dim_e(0, 2), 5);
        assert_eq!(d.dim_e(0, 2), d.dim_e(0, 1) + 1 + d.dim_e(1, 2));
        assert_eq!(d.dim_v(0, 2), 4);
    }

    #[test]
    fn equal_gradings_get_positive_dimensions() {
        let c = GradedFlowCategory::from_gradings(&[1, 1, 0, 2, 0], []).unwrap();
        for k in [2, 3, 5] {
            let d = synthesize_embedding_dimensions(&c, k).unwrap();
            assert_eq!(d.dim_e(0, 1), 0);
            d.validate(&c).unwrap();
        }
    }

    #[test]
    fn small_stabilization_is_rejected() {
        let c = GradedFlowCategory::from_gradings(&[1, 0], []).unwrap();
        assert_eq!(synthesize_embedding_dimensions(&c, 1), Err(FlowCatError::Stabilization(1)));
    }

    #[test]
    fn sphere_cells() {
        let c = GradedFlowCategory::from_gradings(&[2, 0], []).unwrap();
        let d = synthesize_embedding_dimensions(&c, 2).unwrap();
        // cells of dimension 4 and 2, desuspended by 2
        assert_eq!((cell_dimension(&d, 0), cell_dimension(&d, 1)), (4, 2));
        assert_eq!(desuspension(&c, &d), 2);
        assert_eq!(cjs_cellular_complex(&c, &d).unwrap(), c.morse_complex().unwrap());
    }

    #[test]
    fn single_point_lands_in_its_grading() {
        for mu in [-2, 0, 3] {
            let c = GradedFlowCategory::from_gradings(&[mu], []).unwrap();
            let d = synthesize_embedding_dimensions(&c, 2).unwrap();
            let cx = cjs_cellular_complex(&c, &d).unwrap();
            assert_eq!((cx.k_min(), cx.ranks()), (mu, &[1usize][..]));
        }
    }

    #[test]
    fn broken_dimensions_are_rejected() {
        let c = GradedFlowCategory::from_gradings(&[2, 1, 0], [((0, 1), 2)]).unwrap();
        let mut d = synthesize_embedding_dimensions(&c, 3).unwrap();
        d.dim_v.insert((0, 1), 7);
        assert!(d.validate(&c).is_err());
        assert!(matches!(
            cjs_cellular_complex(&c, &d),
            Err(FlowCatError::CellDimension { .. })
        ));
    }
}
