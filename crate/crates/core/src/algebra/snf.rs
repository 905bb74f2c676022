use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntegerMatrix;

/// Smith normal form `U * A * V = D` with unimodular `U`, `V`.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
}

impl SmithDecomposition {
    /// Nonzero diagonal entries `d_1 | d_2 | ... | d_r`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let r = self.d.rows().min(self.d.cols());
        (0..r)
            .map(|i| self.d[(i, i)].clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }

    /// Columns of `V` spanning the integer kernel of `A`.
    pub fn kernel_basis(&self) -> IntegerMatrix {
        let r = self.rank();
        let cols: Vec<usize> = (r..self.v.cols()).collect();
        self.v.select_columns(&cols)
    }
}

/// Computes the Smith normal form of an arbitrary integer matrix.
///
/// Total on all inputs, including empty and zero matrices.
pub fn smith_normal_form(a: &IntegerMatrix) -> SmithDecomposition {
    let (m, n) = a.shape();
    let mut d = a.clone();
    let mut u = IntegerMatrix::identity(m);
    let mut v = IntegerMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            // smallest nonzero |entry| in the trailing block becomes the pivot
            let Some((pi, pj)) = min_abs_position(&d, t) else {
                break;
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..m {
                let q = nearest_quotient(&d[(i, t)], &d[(t, t)]);
                if !q.is_zero() {
                    d.add_row_multiple(i, t, &-&q);
                    u.add_row_multiple(i, t, &-&q);
                }
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = nearest_quotient(&d[(t, j)], &d[(t, t)]);
                if !q.is_zero() {
                    d.add_col_multiple(j, t, &-&q);
                    v.add_col_multiple(j, t, &-&q);
                }
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                // a nonzero remainder is smaller than the pivot and wins the next pick
                continue;
            }

            // pivot must divide the whole trailing block
            let offender = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !d[(i, j)].is_multiple_of(&d[(t, t)]));
            match offender {
                Some((i, _)) => {
                    let one = BigInt::from(1);
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }

        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }

    SmithDecomposition { u, d, v }
}

/// `a / b` rounded to the nearest integer, so that `|a - q b| ≤ |b| / 2`.
fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() {
        return BigInt::zero();
    }
    let (q, r) = a.div_mod_floor(b);
    if (&r + &r).abs() > b.abs() {
        q + 1
    } else {
        q
    }
}

fn min_abs_position(d: &IntegerMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let x = &d[(i, j)];
            if x.is_zero() {
                continue;
            }
            let ax = x.abs();
            if best.as_ref().is_none_or(|(_, b)| ax < *b) {
                best = Some(((i, j), ax));
            }
        }
    }
    best.map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: &IntegerMatrix) -> SmithDecomposition {
        let s = smith_normal_form(a);
        assert_eq!(&(&s.u * a) * &s.v, s.d, "U A V != D for {a:?}");
        assert!(s.u.is_unimodular());
        assert!(s.v.is_unimodular());
        assert!(s.d.is_smith_diagonal(), "{:?}", s.d);
        s
    }

    #[test]
    fn identity_is_fixed() {
        let s = check(&IntegerMatrix::identity(3));
        assert_eq!(s.d, IntegerMatrix::identity(3));
    }

    #[test]
    fn coprime_diagonal_merges() {
        // gcd(2,3) = 1 and 2*3 = 6 give diag(1, 6)
        let s = check(&IntegerMatrix::from_rows(&[[2, 0], [0, 3]]));
        assert_eq!(s.d, IntegerMatrix::from_rows(&[[1, 0], [0, 6]]));
    }

    #[test]
    fn zero_and_empty() {
        let s = check(&IntegerMatrix::zeros(2, 2));
        assert!(s.d.is_zero());
        check(&IntegerMatrix::zeros(0, 3));
        check(&IntegerMatrix::zeros(4, 0));
        check(&IntegerMatrix::zeros(0, 0));
    }

    #[test]
    fn rectangular_with_torsion() {
        let a = IntegerMatrix::from_rows(&[[2, 4, 4], [-6, 6, 12], [10, -4, -16]]);
        let s = check(&a);
        assert_eq!(
            s.invariant_factors(),
            vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]
        );
        let k = check(&IntegerMatrix::from_rows(&[[1, 2, 3], [4, 5, 6]]));
        let kernel = k.kernel_basis();
        assert_eq!(kernel.cols(), 1);
        assert!((&IntegerMatrix::from_rows(&[[1, 2, 3], [4, 5, 6]]) * &kernel).is_zero());
    }
}
