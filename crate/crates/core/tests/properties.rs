mod common;

use morse_cjs::algebra::{homology, smith_normal_form, verify_les_exactness, IntegerMatrix};
use morse_cjs::continuation::{compose_continuations, format as cont_format};
use morse_cjs::flowcat::{cjs_cellular_complex, format as cat_format, synthesize_embedding_dimensions};
use morse_cjs::localmodel::{
    anosov_cross_time, anosov_flow, backward_flow_extension, blowdown_minus, blowdown_plus, model_f,
    BlowupChartPoint, ModelPoint,
};
use morse_cjs::sample;
use morse_cjs::suites::{composite_is_product, conjugated};
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

use common::{homology_oracle, invariant_factors, les_oracle, rows_of, summary_matches};

fn small_matrix() -> impl Strategy<Value = IntegerMatrix> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| {
        proptest::collection::vec(-20i64..=20, m * n).prop_map(move |v| {
            let rows: Vec<Vec<i64>> = v.chunks(n).map(|c| c.to_vec()).collect();
            IntegerMatrix::from_rows(&rows)
        })
    })
}

fn unit(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, dim)
        .prop_filter("not too short", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.01)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
}

fn chart_point() -> impl Strategy<Value = BlowupChartPoint<f64>> {
    (1usize..=4, 1usize..=4, 0.01f64..5.0).prop_flat_map(|(a, b, t)| {
        (unit(a), unit(b)).prop_map(move |(m, p)| BlowupChartPoint::new(t, m, p).unwrap())
    })
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = b.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smith_form_matches_determinantal_divisors(a in small_matrix()) {
        let snf = smith_normal_form(&a);
        let expected: Vec<BigInt> = invariant_factors(&rows_of(&a), a.cols()).into_iter().map(|x| x.abs()).collect();
        prop_assert_eq!(snf.invariant_factors(), expected);
        prop_assert_eq!(&(&snf.u * &a) * &snf.v, snf.d.clone());
        prop_assert!(snf.u.is_unimodular() && snf.v.is_unimodular());
    }

    #[test]
    fn homology_invariant_under_basis_change(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let cat = sample::random_category(&mut rng, 7, 0..=4, 3);
        let c = cat.morse_complex().unwrap();
        let twisted = conjugated(&c, &mut rng);
        prop_assert!(twisted.verify().is_empty());
        prop_assert_eq!(homology(&c).unwrap(), homology(&twisted).unwrap());
    }

    #[test]
    fn homology_matches_reference(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let c = sample::random_category(&mut rng, 7, 0..=3, 3).morse_complex().unwrap();
        prop_assert!(summary_matches(&homology_oracle(&c), &homology(&c).unwrap()));
    }

    #[test]
    fn repaired_categories_square_to_zero(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let cat = sample::random_category(&mut rng, 8, 0..=3, 3);
        prop_assert!(cat.check_d_squared().is_empty());
        let c = cat.morse_complex().unwrap();
        for k in c.degrees() {
            prop_assert!((&c.differential(k - 1) * &c.differential(k)).is_zero());
        }
    }

    #[test]
    fn cellular_equals_morse(seed in any::<u64>(), k in prop::sample::select(vec![2i64, 3, 5])) {
        let mut rng = sample::rng(seed);
        let cat = sample::random_category(&mut rng, 8, 0..=5, 3);
        let dims = synthesize_embedding_dimensions(&cat, k).unwrap();
        prop_assert_eq!(cjs_cellular_complex(&cat, &dims).unwrap(), cat.morse_complex().unwrap());
    }

    #[test]
    fn relabeling_keeps_the_complex(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let cat = sample::random_category(&mut rng, 6, 0..=3, 3);
        let renamed = cat.renamed(|n| format!("{n}_x")).unwrap();
        prop_assert!(cat.same_structure(&renamed));
        let (a, b) = (cat.morse_complex().unwrap(), renamed.morse_complex().unwrap());
        for k in a.degrees() {
            prop_assert_eq!(a.differential(k), b.differential(k));
        }
        prop_assert_eq!(homology(&a).unwrap(), homology(&b).unwrap());
    }

    #[test]
    fn category_text_roundtrip(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let cat = sample::random_category(&mut rng, 6, 0..=4, 3);
        let back = cat_format::parse_category(&cat_format::write_category(&cat)).unwrap();
        prop_assert!(cat.same_structure(&back));
    }

    #[test]
    fn les_exact_over_rationals(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let fc = sample::random_continuation(&mut rng, 5, 3);
        let f = fc.continuation_chain_map().unwrap();
        prop_assert!(verify_les_exactness(&f).unwrap().is_exact());
        prop_assert_eq!(les_oracle(&f), Ok(()));
    }

    #[test]
    fn euler_characteristic_of_merged(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let fc = sample::random_continuation(&mut rng, 5, 3);
        let merged = fc.merged_category().unwrap().morse_complex().unwrap();
        let target = fc.target().morse_complex().unwrap();
        let desuspended = fc.source().shifted(-1).morse_complex().unwrap();
        prop_assert_eq!(
            merged.euler_characteristic(),
            target.euler_characteristic() - desuspended.euler_characteristic()
        );
    }

    #[test]
    fn continuation_text_roundtrip(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let fc = sample::random_continuation(&mut rng, 5, 3);
        let back = cont_format::parse_continuation(&cont_format::write_continuation(&fc)).unwrap();
        prop_assert_eq!(back.cross_counts().collect::<Vec<_>>(), fc.cross_counts().collect::<Vec<_>>());
        prop_assert!(back.source().same_structure(fc.source()));
    }

    #[test]
    fn composition_is_product_and_associative(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let chain = sample::random_composable(&mut rng, 3, 5, 3);
        let ab = compose_continuations(&chain[0], &chain[1]).unwrap();
        prop_assert_eq!(composite_is_product(&chain[0], &chain[1], &ab), Ok(()));
        let left = compose_continuations(&ab, &chain[2]).unwrap();
        let right = compose_continuations(&chain[0], &compose_continuations(&chain[1], &chain[2]).unwrap()).unwrap();
        prop_assert_eq!(left.source().grading(), right.source().grading());
        prop_assert_eq!(left.cross_counts().collect::<Vec<_>>(), right.cross_counts().collect::<Vec<_>>());
    }

    #[test]
    fn blowdowns_related_by_flow(c in chart_point()) {
        let up = blowdown_plus(&c);
        let down = blowdown_minus(&c);
        prop_assert!((model_f(&up) - 1.0).abs() < 1e-12);
        prop_assert!((model_f(&down) + 1.0).abs() < 1e-12);
        let flowed = anosov_flow(&up, anosov_cross_time(&up).unwrap());
        prop_assert!(close(&flowed.x_minus, &down.x_minus, 1e-9));
        prop_assert!(close(&flowed.x_plus, &down.x_plus, 1e-9));
    }

    #[test]
    fn anosov_flow_is_a_group_action(
        xm in unit(3), xp in unit(2), s in -3.0f64..3.0, t in -3.0f64..3.0,
    ) {
        let p = ModelPoint::centered(xm, xp);
        let once = anosov_flow(&p, s + t);
        let twice = anosov_flow(&anosov_flow(&p, s), t);
        prop_assert!(close(&once.x_minus, &twice.x_minus, 1e-12));
        prop_assert!(close(&once.x_plus, &twice.x_plus, 1e-12));
    }

    #[test]
    fn backward_extension_lands_on_upper_level(xm in unit(2), xp in unit(3), scale in 0.1f64..3.0, r in 0.0f64..2.0) {
        let x_minus: Vec<f64> = xm.iter().map(|x| x * scale).collect();
        let p = backward_flow_extension(r, &x_minus, &xp);
        prop_assert!((model_f(&p) - 1.0).abs() < 1e-12);
        // flowing forward again returns to (x₋, r x̂₊) on level |x₊|² - |x₋|² = r² - |x₋|²
        if r > 0.0 {
            let start = ModelPoint::centered(x_minus.clone(), xp.iter().map(|x| x * r).collect());
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let ratio = norm(&p.x_minus) / norm(&x_minus);
            let back = anosov_flow(&p, -ratio.ln());
            prop_assert!(close(&back.x_minus, &start.x_minus, 1e-9));
            prop_assert!(close(&back.x_plus, &start.x_plus, 1e-9));
        }
    }
}

#[test]
fn single_precision_blowdowns_agree_loosely() {
    let mut rng = sample::rng(7);
    for _ in 0..200 {
        let c: BlowupChartPoint<f32> = sample::random_chart_point(&mut rng, 1..=4, 0.05..=3.0);
        let up = blowdown_plus(&c);
        let flowed = anosov_flow(&up, anosov_cross_time(&up).unwrap());
        let down = blowdown_minus(&c);
        for (a, b) in flowed.x_minus.iter().chain(&flowed.x_plus).zip(down.x_minus.iter().chain(&down.x_plus)) {
            assert!((a - b).abs() < 1e-4 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}
