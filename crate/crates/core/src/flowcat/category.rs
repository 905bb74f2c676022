use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::algebra::{ChainComplex, IntegerMatrix};

use super::FlowCatError;

/// Classical graded flow category: finitely many critical points in a total
/// order, an integer grading, and signed counts of flow lines between points
/// whose gradings differ by one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedFlowCategory {
    names: Vec<String>,
    grading: Vec<i64>,
    counts: BTreeMap<(usize, usize), i64>,
    cardinalities: BTreeMap<(usize, usize), u64>,
}

/// Pair `(i, k)` with grading gap two whose composite count is nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSquaredViolation {
    pub source: usize,
    pub target: usize,
    pub sum: BigInt,
}

impl fmt::Display for DSquaredViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) sums to {}", self.source, self.target, self.sum)
    }
}

impl GradedFlowCategory {
    /// Points are given in their total order. Counts are keyed by point
    /// positions and must satisfy `i < j` and `μ(i) - μ(j) = 1`.
    pub fn new(
        points: Vec<(String, i64)>,
        counts: impl IntoIterator<Item = ((usize, usize), i64)>,
    ) -> Result<Self, FlowCatError> {
        let mut seen = HashSet::new();
        for (name, _) in &points {
            if !seen.insert(name.as_str()) {
                return Err(FlowCatError::DuplicateName(name.clone()));
            }
        }
        let (names, grading): (Vec<String>, Vec<i64>) = points.into_iter().unzip();
        let mut cat = GradedFlowCategory {
            names,
            grading,
            counts: BTreeMap::new(),
            cardinalities: BTreeMap::new(),
        };
        for ((i, j), n) in counts {
            cat.check_pair(i, j)?;
            cat.counts.insert((i, j), n);
        }
        Ok(cat)
    }

    /// Category without any flow lines.
    pub fn discrete(points: Vec<(String, i64)>) -> Result<Self, FlowCatError> {
        Self::new(points, std::iter::empty())
    }

    /// Convenience constructor naming the points by their position.
    pub fn from_gradings(
        grading: &[i64],
        counts: impl IntoIterator<Item = ((usize, usize), i64)>,
    ) -> Result<Self, FlowCatError> {
        let points = grading.iter().enumerate().map(|(i, &mu)| (format!("p{i}"), mu)).collect();
        Self::new(points, counts)
    }

    /// Attaches unsigned flow-line cardinalities, checking that every signed
    /// count is bounded by and has the parity of its cardinality.
    pub fn with_cardinalities(
        mut self,
        cardinalities: impl IntoIterator<Item = ((usize, usize), u64)>,
    ) -> Result<Self, FlowCatError> {
        for ((i, j), c) in cardinalities {
            self.check_pair(i, j)?;
            self.cardinalities.insert((i, j), c);
        }
        for (&(i, j), &c) in &self.cardinalities {
            let n = self.count(i, j);
            if n.unsigned_abs() > c || (n.unsigned_abs() + c) % 2 != 0 {
                return Err(FlowCatError::Cardinality {
                    from: self.names[i].clone(),
                    to: self.names[j].clone(),
                    count: n,
                    cardinality: c,
                });
            }
        }
        for (&(i, j), &n) in &self.counts {
            if n != 0 && !self.cardinalities.is_empty() && !self.cardinalities.contains_key(&(i, j)) {
                return Err(FlowCatError::Cardinality {
                    from: self.names[i].clone(),
                    to: self.names[j].clone(),
                    count: n,
                    cardinality: 0,
                });
            }
        }
        Ok(self)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(), FlowCatError> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(FlowCatError::UnknownIndex(i.max(j)));
        }
        if i >= j {
            return Err(FlowCatError::NotOrdered {
                from: self.names[i].clone(),
                to: self.names[j].clone(),
            });
        }
        let gap = self.grading[i] - self.grading[j];
        if gap != 1 {
            return Err(FlowCatError::GradingGap {
                from: self.names[i].clone(),
                to: self.names[j].clone(),
                gap,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn grading(&self) -> &[i64] {
        &self.grading
    }

    pub fn mu(&self, i: usize) -> i64 {
        self.grading[i]
    }

    /// Signed count of flow lines from `i` to `j`; zero when none recorded.
    pub fn count(&self, i: usize, j: usize) -> i64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Recorded counts, including explicit zeros, in lexicographic order.
    pub fn counts(&self) -> impl Iterator<Item = ((usize, usize), i64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn cardinalities(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.cardinalities.iter().map(|(&k, &v)| (k, v))
    }

    /// Every pair `(i, k)` with `μ(i) - μ(k) = 2` whose sum over intermediate
    /// points of `count(i, u) · count(u, k)` is nonzero.
    pub fn check_d_squared(&self) -> Vec<DSquaredViolation> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for k in i + 1..n {
                if self.grading[i] - self.grading[k] != 2 {
                    continue;
                }
                let mut sum = BigInt::zero();
                for u in i + 1..k {
                    if self.grading[u] == self.grading[i] - 1 {
                        sum += BigInt::from(self.count(i, u)) * BigInt::from(self.count(u, k));
                    }
                }
                if !sum.is_zero() {
                    out.push(DSquaredViolation {
                        source: i,
                        target: k,
                        sum,
                    });
                }
            }
        }
        out
    }

    /// Points sorted into degrees, keeping the total order within a degree.
    /// Returns `(k_min, generators per degree, position of each point)`.
    pub(crate) fn degree_layout(&self, degree_of: impl Fn(usize) -> i64) -> (i64, Vec<Vec<usize>>, Vec<usize>) {
        if self.is_empty() {
            return (0, Vec::new(), Vec::new());
        }
        let degrees: Vec<i64> = (0..self.len()).map(&degree_of).collect();
        let lo = *degrees.iter().min().unwrap();
        let hi = *degrees.iter().max().unwrap();
        let mut gens = vec![Vec::new(); (hi - lo + 1) as usize];
        let mut pos = vec![0; self.len()];
        for (i, &d) in degrees.iter().enumerate() {
            let slot = &mut gens[(d - lo) as usize];
            pos[i] = slot.len();
            slot.push(i);
        }
        (lo, gens, pos)
    }

    /// Complex with one generator per point in degree `degree_of(point)` and
    /// differential entry `(j, i) = count(i, j)`.
    pub(crate) fn complex_in_degrees(&self, degree_of: impl Fn(usize) -> i64) -> Result<ChainComplex, FlowCatError> {
        let (lo, gens, pos) = self.degree_layout(&degree_of);
        if gens.is_empty() {
            return Ok(ChainComplex::empty());
        }
        let ranks: Vec<usize> = gens.iter().map(Vec::len).collect();
        let mut diffs: Vec<IntegerMatrix> = (0..ranks.len())
            .map(|idx| IntegerMatrix::zeros(if idx == 0 { 0 } else { ranks[idx - 1] }, ranks[idx]))
            .collect();
        for (&(i, j), &n) in &self.counts {
            let (di, dj) = (degree_of(i), degree_of(j));
            if di - dj != 1 {
                return Err(FlowCatError::GradingGap {
                    from: self.names[i].clone(),
                    to: self.names[j].clone(),
                    gap: di - dj,
                });
            }
            diffs[(di - lo) as usize][(pos[j], pos[i])] = BigInt::from(n);
        }
        let labels = gens
            .iter()
            .map(|g| g.iter().map(|&i| self.names[i].clone()).collect())
            .collect();
        let complex = ChainComplex::new(lo, ranks, diffs)
            .and_then(|c| c.with_labels(labels))
            .expect("layout produces consistent shapes");
        Ok(complex)
    }

    /// The Morse complex: one generator per critical point in its grading,
    /// `d(p_i) = Σ count(i, j) p_j`.
    pub fn morse_complex(&self) -> Result<ChainComplex, FlowCatError> {
        let violations = self.check_d_squared();
        if !violations.is_empty() {
            return Err(FlowCatError::DSquared(violations));
        }
        self.complex_in_degrees(|i| self.grading[i])
    }

    /// Same category with every grading moved by `by`.
    pub fn shifted(&self, by: i64) -> Self {
        let mut out = self.clone();
        for mu in &mut out.grading {
            *mu += by;
        }
        out
    }

    /// Same category with points renamed.
    pub fn renamed(&self, rename: impl Fn(&str) -> String) -> Result<Self, FlowCatError> {
        let points = self.names.iter().zip(&self.grading).map(|(n, &mu)| (rename(n), mu)).collect();
        let mut out = Self::new(points, self.counts())?;
        out.cardinalities = self.cardinalities.clone();
        Ok(out)
    }

    /// Whether `other` has the same points, gradings, and nonzero counts,
    /// ignoring names and explicit zero counts.
    pub fn same_structure(&self, other: &Self) -> bool {
        let nonzero = |c: &Self| -> Vec<((usize, usize), i64)> { c.counts().filter(|&(_, n)| n != 0).collect() };
        self.grading == other.grading && nonzero(self) == nonzero(other)
    }
}
