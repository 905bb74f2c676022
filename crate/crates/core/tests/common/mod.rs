//! Reference computations used to cross-check the library: linear algebra
//! over the rationals, determinants, and determinantal divisors.
#![allow(dead_code)]

use std::collections::BTreeMap;

use morse_cjs::algebra::{ChainComplex, ChainMap, HomologySummary, IntegerMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rows = Vec<Vec<BigInt>>;

pub fn rows_of(m: &IntegerMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn multiply(a: &Rows, b: &Rows, inner: usize, cols: usize) -> Rows {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

fn rational_rows(rows: &Rows) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<BigRational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in 0..cols {
                    let delta = &factor * &m[r][j];
                    m[i][j] = &m[i][j] - delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rational_rank(rows: &Rows, cols: usize) -> usize {
    let mut m = rational_rows(rows);
    rref(&mut m, cols).len()
}

/// Determinant by fraction-exact elimination.
pub fn determinant(rows: &Rows) -> BigInt {
    let n = rows.len();
    let mut m = rational_rows(rows);
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return BigInt::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det = &det * &m[c][c];
        for i in c + 1..n {
            let factor = &m[i][c] / &m[c][c];
            for j in c..n {
                let delta = &factor * &m[c][j];
                m[i][j] = &m[i][j] - delta;
            }
        }
    }
    assert!(det.is_integer());
    det.to_integer()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// `d_k` = gcd of all `k × k` minors, for `k = 1, 2, ...` while nonzero.
pub fn determinantal_divisors(rows: &Rows, cols: usize) -> Vec<BigInt> {
    let n = rows.len();
    let mut out = Vec::new();
    for k in 1..=n.min(cols) {
        let mut g = BigInt::zero();
        for rs in subsets(n, k) {
            for cs in subsets(cols, k) {
                let minor: Rows = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j].clone()).collect()).collect();
                g = g.gcd(&determinant(&minor));
            }
        }
        if g.is_zero() {
            break;
        }
        out.push(g);
    }
    out
}

/// Nonzero invariant factors as quotients of consecutive determinantal
/// divisors.
pub fn invariant_factors(rows: &Rows, cols: usize) -> Vec<BigInt> {
    let d = determinantal_divisors(rows, cols);
    let mut prev = BigInt::one();
    d.iter()
        .map(|x| {
            let s = x / &prev;
            prev = x.clone();
            s
        })
        .collect()
}

/// Betti numbers from rational ranks and torsion from the invariant
/// factors of the incoming differential, keyed by degree.
pub fn homology_oracle(c: &ChainComplex) -> BTreeMap<i64, (usize, Vec<BigInt>)> {
    let mut out = BTreeMap::new();
    for k in c.degrees() {
        let d_out = c.differential(k);
        let d_in = c.differential(k + 1);
        let rank_out = rational_rank(&rows_of(&d_out), d_out.cols());
        let rank_in = rational_rank(&rows_of(&d_in), d_in.cols());
        let betti = c.rank(k) - rank_out - rank_in;
        let mut torsion: Vec<BigInt> = invariant_factors(&rows_of(&d_in), d_in.cols())
            .into_iter()
            .map(|x| x.abs())
            .filter(|x| *x > BigInt::one())
            .collect();
        torsion.sort();
        if betti > 0 || !torsion.is_empty() {
            out.insert(k, (betti, torsion));
        }
    }
    out
}

pub fn summary_matches(oracle: &BTreeMap<i64, (usize, Vec<BigInt>)>, summary: &HomologySummary) -> bool {
    let lib: BTreeMap<i64, (usize, Vec<BigInt>)> = summary
        .nontrivial_degrees()
        .map(|(k, g)| {
            let mut t = g.torsion.clone();
            t.sort();
            (k, (g.betti, t))
        })
        .collect();
    &lib == oracle
}

/// Basis of the rational kernel, as columns.
fn rational_kernel(rows: &Rows, cols: usize) -> Vec<Vec<BigRational>> {
    let mut m = rational_rows(rows);
    let pivots = rref(&mut m, cols);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); cols];
            v[free] = BigRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][free].clone();
            }
            v
        })
        .collect()
}

fn rank_of_columns(columns: &[Vec<BigRational>], len: usize) -> usize {
    // transpose so that the columns become rows
    let mut m: Vec<Vec<BigRational>> = columns.to_vec();
    rref(&mut m, len).len()
}

fn betti(c: &ChainComplex, k: i64) -> usize {
    let d_out = c.differential(k);
    let d_in = c.differential(k + 1);
    c.rank(k) - rational_rank(&rows_of(&d_out), d_out.cols()) - rational_rank(&rows_of(&d_in), d_in.cols())
}

/// Rank of `f_* : H_k(S; Q) -> H_{k+s}(T; Q)`.
fn induced_rank(f: &ChainMap, k: i64) -> usize {
    let (s, t) = (f.source(), f.target());
    let tk = k + f.shift();
    let len = t.rank(tk);
    let boundaries = t.differential(tk + 1);
    let mut columns: Vec<Vec<BigRational>> = (0..boundaries.cols())
        .map(|j| boundaries.column(j).into_iter().map(BigRational::from_integer).collect())
        .collect();
    let base = rank_of_columns(&columns, len);
    let fk = rows_of(&f.matrix(k));
    for z in rational_kernel(&rows_of(&s.differential(k)), s.rank(k)) {
        let image: Vec<BigRational> = fk
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&z)
                    .fold(BigRational::zero(), |acc, (a, b)| acc + BigRational::from_integer(a.clone()) * b)
            })
            .collect();
        columns.push(image);
    }
    rank_of_columns(&columns, len) - base
}

/// Rational Betti numbers of the cone `T_n ⊕ S_{n-s-1}` built here from
/// the block differential `[[d_T, f], [0, -d_S]]`.
pub fn cone_bettis(f: &ChainMap) -> BTreeMap<i64, usize> {
    let (s, t, shift) = (f.source(), f.target(), f.shift());
    let lo = t.k_min().min(s.k_min() + shift + 1) - 1;
    let hi = t.k_max().max(s.k_max() + shift + 1) + 1;
    let rank = |n: i64| t.rank(n) + s.rank(n - shift - 1);
    let block = |n: i64| -> Rows {
        // C_n -> C_{n-1}
        let (dt, ds, fm) = (t.differential(n), s.differential(n - shift - 1), f.matrix(n - shift - 1));
        let mut rows = vec![vec![BigInt::zero(); rank(n)]; rank(n - 1)];
        let (tn, tn1) = (t.rank(n), t.rank(n - 1));
        for i in 0..tn1 {
            for j in 0..tn {
                rows[i][j] = dt[(i, j)].clone();
            }
            for j in 0..s.rank(n - shift - 1) {
                rows[i][tn + j] = fm[(i, j)].clone();
            }
        }
        for i in 0..s.rank(n - shift - 2) {
            for j in 0..s.rank(n - shift - 1) {
                rows[tn1 + i][tn + j] = -ds[(i, j)].clone();
            }
        }
        rows
    };
    (lo..=hi)
        .map(|n| {
            let r_out = rational_rank(&block(n), rank(n));
            let r_in = rational_rank(&block(n + 1), rank(n + 1));
            (n, rank(n) - r_out - r_in)
        })
        .collect()
}

/// Checks `dim H_n(C) = dim coker(f_* into H_n(T)) + dim ker(f_* out of
/// H_{n-s-1}(S))` in every degree, which is exactness of the long exact
/// sequence over the rationals.
pub fn les_oracle(f: &ChainMap) -> Result<(), String> {
    let (s, t, shift) = (f.source(), f.target(), f.shift());
    for (n, cone) in cone_bettis(f) {
        let m = n - shift - 1;
        let coker = betti(t, n) - induced_rank(f, n - shift);
        let ker = betti(s, m) - induced_rank(f, m);
        if cone != coker + ker {
            return Err(format!("degree {n}: cone Betti {cone}, sequence predicts {coker} + {ker}"));
        }
    }
    Ok(())
}
