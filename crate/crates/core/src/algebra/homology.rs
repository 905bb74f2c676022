use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use super::{smith_normal_form, AlgebraError, ChainComplex};

/// `Z^betti ⊕ Z/t_1 ⊕ ... ⊕ Z/t_m` with `t_1 | t_2 | ... | t_m`, all `t_i ≥ 2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HomologyGroup {
    pub betti: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }

    pub fn free(betti: usize) -> Self {
        HomologyGroup { betti, torsion: Vec::new() }
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Integral homology by degree. Only nontrivial degrees are stored, so two
/// summaries compare equal regardless of the degree ranges they came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HomologySummary {
    groups: BTreeMap<i64, HomologyGroup>,
}

impl HomologySummary {
    pub fn from_groups(groups: impl IntoIterator<Item = (i64, HomologyGroup)>) -> Self {
        HomologySummary {
            groups: groups.into_iter().filter(|(_, g)| !g.is_trivial()).collect(),
        }
    }

    /// Summary with free groups of the given ranks starting at degree `k_min`.
    pub fn free(k_min: i64, bettis: &[usize]) -> Self {
        Self::from_groups(
            bettis
                .iter()
                .enumerate()
                .map(|(i, &b)| (k_min + i as i64, HomologyGroup::free(b))),
        )
    }

    pub fn group(&self, k: i64) -> HomologyGroup {
        self.groups.get(&k).cloned().unwrap_or_default()
    }

    pub fn betti(&self, k: i64) -> usize {
        self.groups.get(&k).map_or(0, |g| g.betti)
    }

    pub fn torsion(&self, k: i64) -> &[BigInt] {
        self.groups.get(&k).map_or(&[], |g| g.torsion.as_slice())
    }

    pub fn nontrivial_degrees(&self) -> impl Iterator<Item = (i64, &HomologyGroup)> {
        self.groups.iter().map(|(k, g)| (*k, g))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.groups
            .iter()
            .map(|(k, g)| if k.rem_euclid(2) == 0 { 1 } else { -1 } * g.betti as i64)
            .sum()
    }

    /// Degree-wise direct sum.
    pub fn direct_sum(&self, other: &HomologySummary) -> HomologySummary {
        let mut groups = self.groups.clone();
        for (k, g) in &other.groups {
            let e = groups.entry(*k).or_default();
            e.betti += g.betti;
            e.torsion.extend(g.torsion.iter().cloned());
            e.torsion = normalize_torsion(&e.torsion);
        }
        HomologySummary { groups }
    }

    /// Re-index so that degree `k` becomes `k + by`.
    pub fn shifted(&self, by: i64) -> HomologySummary {
        HomologySummary {
            groups: self.groups.iter().map(|(k, g)| (k + by, g.clone())).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.groups.is_empty()
    }

    /// One line per degree in `[lo, hi]`: degree, Betti number, torsion, group.
    pub fn table(&self, lo: i64, hi: i64) -> String {
        let mut out = String::from("degree  betti  torsion  group\n");
        for k in lo..=hi {
            let g = self.group(k);
            let tors = if g.torsion.is_empty() {
                "-".to_string()
            } else {
                g.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
            };
            out.push_str(&format!("{k:>6}  {:>5}  {tors:>7}  {g}\n", g.betti));
        }
        out
    }
}

/// Rewrites an arbitrary list of cyclic orders as invariant factors
/// (divisibility chain, entries ≥ 2).
pub fn normalize_torsion(orders: &[BigInt]) -> Vec<BigInt> {
    let n = orders.len();
    let d = super::IntegerMatrix::diagonal(n, n, orders);
    smith_normal_form(&d)
        .invariant_factors()
        .into_iter()
        .filter(|t| !t.is_one())
        .collect()
}

/// Integral homology from Smith normal forms of adjacent differentials.
pub fn homology(c: &ChainComplex) -> Result<HomologySummary, AlgebraError> {
    let violations = c.verify();
    if !violations.is_empty() {
        return Err(AlgebraError::NotAComplex(violations));
    }
    let mut rank_of = BTreeMap::new();
    let mut factors_of = BTreeMap::new();
    for k in c.degrees() {
        let snf = smith_normal_form(c.differential_ref(k).expect("in range"));
        let f = snf.invariant_factors();
        rank_of.insert(k, f.len());
        factors_of.insert(k, f);
    }
    let mut groups = Vec::new();
    for k in c.degrees() {
        let out_rank = rank_of[&k];
        let (in_rank, torsion) = match factors_of.get(&(k + 1)) {
            Some(f) => (f.len(), f.iter().filter(|t| !t.is_one()).cloned().collect()),
            None => (0, Vec::new()),
        };
        let betti = c.rank(k) - out_rank - in_rank;
        groups.push((k, HomologyGroup { betti, torsion }));
    }
    Ok(HomologySummary::from_groups(groups))
}

impl fmt::Display for HomologySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.groups.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.groups.iter().map(|(k, g)| format!("H_{k} = {g}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::IntegerMatrix;

    #[test]
    fn sphere() {
        let h = homology(&ChainComplex::zero(0, vec![1, 0, 1])).unwrap();
        assert_eq!(h, HomologySummary::free(0, &[1, 0, 1]));
    }

    #[test]
    fn torus() {
        let h = homology(&ChainComplex::zero(0, vec![1, 2, 1])).unwrap();
        assert_eq!(h, HomologySummary::free(0, &[1, 2, 1]));
        assert_eq!(h.euler_characteristic(), 0);
    }

    #[test]
    fn projective_plane() {
        let c = ChainComplex::new(
            0,
            vec![1, 1, 1],
            vec![
                IntegerMatrix::zeros(0, 1),
                IntegerMatrix::from_rows(&[[0]]),
                IntegerMatrix::from_rows(&[[2]]),
            ],
        )
        .unwrap();
        let h = homology(&c).unwrap();
        assert_eq!(h.betti(0), 1);
        assert_eq!(h.betti(1), 0);
        assert_eq!(h.torsion(1), &[BigInt::from(2)]);
        assert!(h.group(2).is_trivial());
        assert_eq!(h.group(1).to_string(), "Z/2");
    }

    #[test]
    fn rejects_non_complex() {
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
        assert!(matches!(homology(&c), Err(AlgebraError::NotAComplex(v)) if v[0].degree == 2));
    }

    #[test]
    fn torsion_normalization() {
        let t = normalize_torsion(&[BigInt::from(2), BigInt::from(3), BigInt::from(4)]);
        assert_eq!(t, vec![BigInt::from(2), BigInt::from(12)]);
    }

    #[test]
    fn empty_complex_has_zero_homology() {
        assert!(homology(&ChainComplex::empty()).unwrap().is_zero());
    }
}
