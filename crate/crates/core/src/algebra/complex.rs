use std::fmt;

use super::{AlgebraError, IntegerMatrix};

/// Bounded chain complex of free abelian groups over a contiguous degree
/// range `[k_min, k_max]` (empty when `k_max < k_min`).
///
/// The differential stored for degree `k` maps `C_k -> C_{k-1}` and has
/// shape `rank(k-1) x rank(k)`; ranks outside the range are zero, so the
/// differential at `k_min` always has zero rows.
#[derive(Clone, PartialEq, Eq)]
pub struct ChainComplex {
    k_min: i64,
    ranks: Vec<usize>,
    labels: Option<Vec<Vec<String>>>,
    differentials: Vec<IntegerMatrix>,
}

/// A degree where `d_{k-1} ∘ d_k` is nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeViolation {
    pub degree: i64,
    /// First nonzero entry of the composite as `(row, col, value)`.
    pub entry: (usize, usize, String),
}

impl fmt::Display for DegreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d_{}∘d_{} has entry ({}, {}) = {}",
            self.degree - 1,
            self.degree,
            self.entry.0,
            self.entry.1,
            self.entry.2
        )
    }
}

impl ChainComplex {
    /// Complex with the given ranks starting at `k_min` and zero differentials.
    pub fn zero(k_min: i64, ranks: Vec<usize>) -> Self {
        let differentials = (0..ranks.len())
            .map(|idx| {
                let below = if idx == 0 { 0 } else { ranks[idx - 1] };
                IntegerMatrix::zeros(below, ranks[idx])
            })
            .collect();
        ChainComplex {
            k_min,
            ranks,
            labels: None,
            differentials,
        }
    }

    pub fn empty() -> Self {
        Self::zero(0, Vec::new())
    }

    /// Builds a complex from ranks and a differential per degree.
    ///
    /// `differentials[idx]` is `d_{k_min + idx}`. Shapes are checked; `d² = 0`
    /// is not (see [`ChainComplex::verify`]).
    pub fn new(
        k_min: i64,
        ranks: Vec<usize>,
        differentials: Vec<IntegerMatrix>,
    ) -> Result<Self, AlgebraError> {
        if differentials.len() != ranks.len() {
            return Err(AlgebraError::Shape {
                degree: k_min + differentials.len().min(ranks.len()) as i64,
                detail: format!(
                    "{} differentials supplied for {} degrees",
                    differentials.len(),
                    ranks.len()
                ),
            });
        }
        for (idx, d) in differentials.iter().enumerate() {
            let below = if idx == 0 { 0 } else { ranks[idx - 1] };
            if d.shape() != (below, ranks[idx]) {
                return Err(AlgebraError::Shape {
                    degree: k_min + idx as i64,
                    detail: format!(
                        "differential is {}x{}, expected {}x{}",
                        d.rows(),
                        d.cols(),
                        below,
                        ranks[idx]
                    ),
                });
            }
        }
        Ok(ChainComplex {
            k_min,
            ranks,
            labels: None,
            differentials,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Self, AlgebraError> {
        if labels.len() != self.ranks.len() {
            return Err(AlgebraError::Shape {
                degree: self.k_min,
                detail: "label list does not cover the degree range".into(),
            });
        }
        for (idx, l) in labels.iter().enumerate() {
            if l.len() != self.ranks[idx] {
                return Err(AlgebraError::Shape {
                    degree: self.k_min + idx as i64,
                    detail: format!("{} labels for rank {}", l.len(), self.ranks[idx]),
                });
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    /// Last degree of the range; `k_min - 1` for an empty complex.
    pub fn k_max(&self) -> i64 {
        self.k_min + self.ranks.len() as i64 - 1
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.k_min..=self.k_max()
    }

    fn slot(&self, k: i64) -> Option<usize> {
        (k >= self.k_min && k <= self.k_max()).then(|| (k - self.k_min) as usize)
    }

    pub fn rank(&self, k: i64) -> usize {
        self.slot(k).map_or(0, |i| self.ranks[i])
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn labels(&self, k: i64) -> Option<&[String]> {
        let i = self.slot(k)?;
        self.labels.as_ref().map(|l| l[i].as_slice())
    }

    /// `d_k : C_k -> C_{k-1}`; a correctly shaped zero matrix outside the range.
    pub fn differential(&self, k: i64) -> IntegerMatrix {
        match self.slot(k) {
            Some(i) => self.differentials[i].clone(),
            None => IntegerMatrix::zeros(self.rank(k - 1), self.rank(k)),
        }
    }

    pub fn differential_ref(&self, k: i64) -> Option<&IntegerMatrix> {
        self.slot(k).map(|i| &self.differentials[i])
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees()
            .map(|k| if k.rem_euclid(2) == 0 { 1 } else { -1 } * self.rank(k) as i64)
            .sum()
    }

    /// Lists every degree where `d_{k-1} ∘ d_k ≠ 0`.
    pub fn verify(&self) -> Vec<DegreeViolation> {
        let mut out = Vec::new();
        for k in self.degrees() {
            if k - 1 < self.k_min {
                continue;
            }
            let lower = &self.differentials[(k - 1 - self.k_min) as usize];
            let upper = &self.differentials[(k - self.k_min) as usize];
            let comp = lower * upper;
            let bad = (0..comp.rows())
                .flat_map(|i| (0..comp.cols()).map(move |j| (i, j)))
                .find(|&(i, j)| comp[(i, j)] != 0.into());
            if let Some((i, j)) = bad {
                out.push(DegreeViolation {
                    degree: k,
                    entry: (i, j, comp[(i, j)].to_string()),
                });
            }
        }
        out
    }

    /// Same complex re-indexed so that old degree `k` becomes `k + by`.
    pub fn shifted(&self, by: i64) -> ChainComplex {
        ChainComplex {
            k_min: self.k_min + by,
            ..self.clone()
        }
    }
}

impl fmt::Debug for ChainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ChainComplex [{}, {}]", self.k_min, self.k_max())?;
        for k in self.degrees() {
            writeln!(f, "  C_{k}: rank {}  d = {:?}", self.rank(k), self.differential(k))?;
        }
        Ok(())
    }
}

/// Lists degree violations of `d² = 0`; empty iff the complex is valid.
pub fn verify_complex(c: &ChainComplex) -> Vec<DegreeViolation> {
    c.verify()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp2() -> ChainComplex {
        ChainComplex::new(
            0,
            vec![1, 1, 1],
            vec![
                IntegerMatrix::zeros(0, 1),
                IntegerMatrix::from_rows(&[[0]]),
                IntegerMatrix::from_rows(&[[2]]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_differentials_verify() {
        assert!(ChainComplex::zero(0, vec![1, 0, 1]).verify().is_empty());
        assert!(ChainComplex::empty().verify().is_empty());
    }

    #[test]
    fn rp2_verifies() {
        assert!(rp2().verify().is_empty());
    }

    #[test]
    fn nonzero_composite_is_reported() {
        let c = ChainComplex::new(
            0,
            vec![1, 1, 1],
            vec![
                IntegerMatrix::zeros(0, 1),
                IntegerMatrix::from_rows(&[[1]]),
                IntegerMatrix::from_rows(&[[1]]),
            ],
        )
        .unwrap();
        let v = c.verify();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].degree, 2);
        assert_eq!(v[0].entry, (0, 0, "1".into()));
    }

    #[test]
    fn bad_shape_names_degree() {
        let err = ChainComplex::new(
            3,
            vec![1, 2],
            vec![IntegerMatrix::zeros(0, 1), IntegerMatrix::zeros(1, 1)],
        )
        .unwrap_err();
        assert!(matches!(err, AlgebraError::Shape { degree: 4, .. }));
    }

    #[test]
    fn out_of_range_queries() {
        let c = rp2();
        assert_eq!(c.rank(-1), 0);
        assert_eq!(c.rank(3), 0);
        assert_eq!(c.differential(3).shape(), (1, 0));
        assert_eq!(c.euler_characteristic(), 1);
    }
}
