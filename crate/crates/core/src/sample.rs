//! Seeded random instances for property suites: integer matrices, flow
//! categories and continuations with counts repaired to satisfy `d² = 0`,
//! composable chains of continuations, and blow-up chart points.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{smith_normal_form, IntegerMatrix};
use crate::continuation::FlowContinuation;
use crate::flowcat::GradedFlowCategory;
use crate::localmodel::{BlowupChartPoint, ModelPoint};
use crate::Scalar;

/// Attempts at drawing a small kernel combination before giving up on a
/// column.
const REPAIR_ATTEMPTS: usize = 16;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with `1..=max_rows` rows, `1..=max_cols` columns and entries in
/// `[-bound, bound]`.
pub fn random_matrix(rng: &mut impl Rng, max_rows: usize, max_cols: usize, bound: i64) -> IntegerMatrix {
    let rows = rng.gen_range(1..=max_rows);
    let cols = rng.gen_range(1..=max_cols);
    let entries = (0..rows * cols).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect();
    IntegerMatrix::from_entries(rows, cols, entries).unwrap()
}

/// Product of random elementary operations; determinant `±1`.
pub fn random_unimodular(rng: &mut impl Rng, n: usize) -> IntegerMatrix {
    random_unimodular_pair(rng, n).0
}

/// Random unimodular `M` together with `M⁻¹`, tracked operation by operation.
pub fn random_unimodular_pair(rng: &mut impl Rng, n: usize) -> (IntegerMatrix, IntegerMatrix) {
    let mut m = IntegerMatrix::identity(n);
    let mut inv = IntegerMatrix::identity(n);
    if n == 0 {
        return (m, inv);
    }
    for _ in 0..2 * n + 2 {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        match rng.gen_range(0..3) {
            0 if a != b => {
                let f = BigInt::from(rng.gen_range(-2..=2));
                m.add_row_multiple(a, b, &f);
                inv.add_col_multiple(b, a, &-f);
            }
            1 => {
                m.swap_rows(a, b);
                inv.swap_cols(a, b);
            }
            _ => {
                m.negate_row(a);
                inv.negate_col(a);
            }
        }
    }
    (m, inv)
}

fn random_vector(rng: &mut impl Rng, len: usize, bound: i64) -> Vec<BigInt> {
    (0..len).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect()
}

fn mul_vec(a: &IntegerMatrix, v: &[BigInt]) -> Vec<BigInt> {
    (0..a.rows())
        .map(|i| a.row(i).iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn within(v: &[BigInt], bound: i64) -> bool {
    v.iter().all(|x| x.abs() <= BigInt::from(bound))
}

/// Vector `v` with entries in `[-bound, bound]` and `a v = 0`: a random
/// vector if it happens to qualify, otherwise a small random combination of
/// an integer kernel basis, otherwise zero.
fn repaired_kernel_vector(rng: &mut impl Rng, a: &IntegerMatrix, bound: i64) -> Vec<BigInt> {
    let n = a.cols();
    let v = random_vector(rng, n, bound);
    if a.rows() == 0 || mul_vec(a, &v).iter().all(Zero::is_zero) {
        return v;
    }
    let kernel = smith_normal_form(a).kernel_basis();
    if kernel.cols() > 0 {
        for _ in 0..REPAIR_ATTEMPTS {
            let c = random_vector(rng, kernel.cols(), 1);
            let w = mul_vec(&kernel, &c);
            if within(&w, bound) && !w.iter().all(Zero::is_zero) {
                return w;
            }
        }
    }
    vec![BigInt::zero(); n]
}

fn small(x: &BigInt) -> i64 {
    x.to_i64().expect("repaired entries are bounded")
}

/// Classical flow category with `1..=max_points` points, gradings drawn from
/// `mu` and ordered decreasingly, and counts in `[-bound, bound]`. Counts
/// are filled degree by degree from the bottom; each column of a differential
/// is repaired into the kernel of the one below, so `d² = 0` holds exactly.
pub fn random_category(
    rng: &mut impl Rng,
    max_points: usize,
    mu: RangeInclusive<i64>,
    bound: i64,
) -> GradedFlowCategory {
    let n = rng.gen_range(1..=max_points);
    let mut grading: Vec<i64> = (0..n).map(|_| rng.gen_range(mu.clone())).collect();
    grading.sort_unstable_by(|a, b| b.cmp(a));
    let at = |k: i64| -> Vec<usize> { (0..n).filter(|&i| grading[i] == k).collect() };

    let (lo, hi) = (grading[n - 1], grading[0]);
    let mut counts = Vec::new();
    // d_{k-1} as a matrix, rows indexed by degree k-2 points and columns by degree k-1 points
    let mut below = IntegerMatrix::zeros(0, at(lo).len());
    for k in lo + 1..=hi {
        let (src, dst) = (at(k), at(k - 1));
        let mut d = IntegerMatrix::zeros(dst.len(), src.len());
        for (c, &s) in src.iter().enumerate() {
            let col = repaired_kernel_vector(rng, &below, bound);
            for (r, &t) in dst.iter().enumerate() {
                if !col[r].is_zero() {
                    counts.push(((s, t), small(&col[r])));
                }
                d[(r, c)] = col[r].clone();
            }
        }
        below = d;
    }
    GradedFlowCategory::from_gradings(&grading, counts).unwrap()
}

/// Solves for cross counts from `source` to `target` making the merged
/// category a flow category, drawing a bounded solution as in
/// [`random_category`].
pub fn random_cross(rng: &mut impl Rng, source: &GradedFlowCategory, target: &GradedFlowCategory, bound: i64) -> FlowContinuation {
    let unknowns: Vec<(usize, usize)> = (0..source.len())
        .flat_map(|i| (0..target.len()).map(move |k| (i, k)))
        .filter(|&(i, k)| source.mu(i) - target.mu(k) == 1)
        .collect();
    let equations: Vec<(usize, usize)> = (0..source.len())
        .flat_map(|i| (0..target.len()).map(move |k| (i, k)))
        .filter(|&(i, k)| source.mu(i) - target.mu(k) == 2)
        .collect();
    // sum_u counts_I(i,u) x(u,k) + sum_u x(i,u) counts_J(u,k) = 0
    let mut a = IntegerMatrix::zeros(equations.len(), unknowns.len());
    for (e, &(i, k)) in equations.iter().enumerate() {
        for (x, &(u, v)) in unknowns.iter().enumerate() {
            let mut coef = 0;
            if v == k {
                coef += source.count(i, u);
            }
            if u == i {
                coef += target.count(v, k);
            }
            a[(e, x)] = BigInt::from(coef);
        }
    }
    let x = repaired_kernel_vector(rng, &a, bound);
    let cross = unknowns
        .iter()
        .zip(&x)
        .filter(|(_, n)| !n.is_zero())
        .map(|(&p, n)| (p, small(n)));
    FlowContinuation::new(source.clone(), target.clone(), cross).unwrap()
}

/// Continuation between random categories of at most `max_points` points
/// each, source gradings in `1..=5` and target gradings in `0..=4`.
pub fn random_continuation(rng: &mut impl Rng, max_points: usize, bound: i64) -> FlowContinuation {
    let source = random_category(rng, max_points, 1..=5, bound);
    let target = random_category(rng, max_points, 0..=4, bound);
    random_cross(rng, &source, &target, bound)
}

/// `len` continuations `C_0 -> C_1 -> ... -> C_len`, where each middle
/// category appears as the source of the next continuation shifted by a
/// random `δ ∈ {-1, 0, 1}`.
pub fn random_composable(rng: &mut impl Rng, len: usize, max_points: usize, bound: i64) -> Vec<FlowContinuation> {
    let mut range = (1, 5);
    let mut source = random_category(rng, max_points, range.0..=range.1, bound);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        range = (range.0 - 1, range.1 - 1);
        let target = random_category(rng, max_points, range.0..=range.1, bound);
        out.push(random_cross(rng, &source, &target, bound));
        let delta = rng.gen_range(-1..=1);
        range = (range.0 + delta, range.1 + delta);
        source = target.shifted(delta);
    }
    out
}

fn random_unit<T: Scalar>(rng: &mut impl Rng, dim: usize) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.iter().map(|x| T::lit(x / norm)).collect();
        }
    }
}

/// Chart point with ranks drawn from `ranks` and `t` in `t_range`.
pub fn random_chart_point<T: Scalar>(
    rng: &mut impl Rng,
    ranks: RangeInclusive<usize>,
    t_range: RangeInclusive<f64>,
) -> BlowupChartPoint<T> {
    let a = rng.gen_range(ranks.clone());
    let b = rng.gen_range(ranks);
    let t = rng.gen_range(t_range);
    BlowupChartPoint::new(T::lit(t), random_unit(rng, a), random_unit(rng, b)).unwrap()
}

/// Point of the local model with ranks from `ranks`, both components nonzero
/// with entries in `[-scale, scale]`.
pub fn random_model_point<T: Scalar>(rng: &mut impl Rng, ranks: RangeInclusive<usize>, scale: f64) -> ModelPoint<T> {
    let a = rng.gen_range(ranks.clone());
    let b = rng.gen_range(ranks);
    let mut part = |n: usize| -> Vec<T> {
        let r = rng.gen_range(0.05..=1.0) * scale;
        random_unit::<T>(rng, n).into_iter().map(|x| x * T::lit(r)).collect()
    };
    let (xm, xp) = (part(a), part(b));
    ModelPoint::centered(xm, xp)
}
