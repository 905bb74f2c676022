//! Seeded invariant suites, one per layer, each a list of named properties
//! reported as PASS or FAIL with the first counterexample.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::algebra::{homology, smith_normal_form, ChainComplex, HomologyGroup, HomologySummary};
use crate::continuation::format::{parse_continuation, write_continuation};
use crate::continuation::compose_continuations;
use crate::flowcat::format::{parse_category, write_category};
use crate::flowcat::{cell_dimension, cjs_cellular_complex, desuspension, synthesize_embedding_dimensions};
use crate::localmodel::{
    anosov_cross_time, anosov_flow, blowdown_minus, blowdown_plus, verify_smoothness, BlowupChartPoint, ChartTransition,
    ModelPoint,
};
use crate::morseflow::{
    compute_flow_category, count_table, ManifoldModel, MorseFlowOptions, MorsePipeline, BUILTIN_NAMES,
};
use crate::sample;
use crate::scalar::relative_error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    FlowCat,
    Continuation,
    LocalModel,
    MorseFlow,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["algebra", "flowcat", "continuation", "localmodel", "morseflow", "all"];

    fn layers(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Algebra,
                Suite::FlowCat,
                Suite::Continuation,
                Suite::LocalModel,
                Suite::MorseFlow,
            ],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::FlowCat => "flowcat",
            Suite::Continuation => "continuation",
            Suite::LocalModel => "localmodel",
            Suite::MorseFlow => "morseflow",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "flowcat" => Ok(Suite::FlowCat),
            "continuation" => Ok(Suite::Continuation),
            "localmodel" => Ok(Suite::LocalModel),
            "morseflow" => Ok(Suite::MorseFlow),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite {other:?} (expected one of {})", Suite::NAMES.join(", "))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Stabilization constants for the cellular comparison.
    pub stabilizations: Vec<i64>,
    /// Integrator tolerance for shooting; `None` keeps the default.
    pub tolerance: Option<f64>,
    /// Certify the broken `|t|` chart as if it were a real chart transition.
    pub broken_chart: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            stabilizations: vec![2, 3, 5],
            tolerance: None,
            broken_chart: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub cases: usize,
    pub counterexample: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        for r in &self.results {
            let verdict = if r.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{verdict}  {:<13} {:<28} {:>5} cases", r.suite, r.name, r.cases)?;
            if let Some(c) = &r.counterexample {
                for line in c.lines() {
                    writeln!(f, "      {line}")?;
                }
            }
        }
        let failed = self.results.iter().filter(|r| !r.passed()).count();
        write!(
            f,
            "{} properties, {} failed: {}",
            self.results.len(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        )
    }
}

/// Runs `check` on cases `0..cases`, stopping at the first counterexample.
fn property(
    suite: &'static str,
    name: &'static str,
    cases: usize,
    mut check: impl FnMut(usize) -> Result<(), String>,
) -> PropertyResult {
    let counterexample = (0..cases).find_map(|c| check(c).err().map(|e| format!("case {c}: {e}")));
    PropertyResult {
        suite,
        name,
        cases,
        counterexample,
    }
}

/// Independent stream per property so that adding a property does not
/// change the instances of the others.
fn stream(seed: u64, salt: u64) -> rand_chacha::ChaCha8Rng {
    sample::rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> SuiteReport {
    let mut results = Vec::new();
    for layer in suite.layers() {
        results.extend(match layer {
            Suite::Algebra => algebra_suite(config),
            Suite::FlowCat => flowcat_suite(config),
            Suite::Continuation => continuation_suite(config),
            Suite::LocalModel => localmodel_suite(config),
            Suite::MorseFlow => morseflow_suite(config),
            Suite::All => unreachable!(),
        });
    }
    SuiteReport {
        seed: config.seed,
        results,
    }
}

/// `P_{k-1} d_k P_k⁻¹` for random unimodular `P_k`.
pub fn conjugated(c: &ChainComplex, rng: &mut impl Rng) -> ChainComplex {
    let pairs: Vec<_> = c.degrees().map(|k| sample::random_unimodular_pair(rng, c.rank(k))).collect();
    let diffs = c
        .degrees()
        .enumerate()
        .map(|(idx, k)| {
            if idx == 0 {
                c.differential(k)
            } else {
                &(&pairs[idx - 1].0 * &c.differential(k)) * &pairs[idx].1
            }
        })
        .collect();
    ChainComplex::new(c.k_min(), c.ranks().to_vec(), diffs).unwrap()
}

fn algebra_suite(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let s = "algebra";
    let mut rng = stream(cfg.seed, 1);
    let snf = property(s, "smith-normal-form", 1000, |_| {
        let a = sample::random_matrix(&mut rng, 8, 8, 20);
        let dec = smith_normal_form(&a);
        if &(&dec.u * &a) * &dec.v != dec.d {
            return Err(format!("U A V != D for A = {a:?}"));
        }
        if !dec.u.is_unimodular() || !dec.v.is_unimodular() {
            return Err(format!("transforms not unimodular for A = {a:?}"));
        }
        if !dec.d.is_smith_diagonal() {
            return Err(format!("D = {:?} is not a divisibility chain", dec.d));
        }
        Ok(())
    });
    let mut rng = stream(cfg.seed, 2);
    let invariance = property(s, "homology-basis-invariance", 300, |_| {
        let c = sample::random_category(&mut rng, 8, 0..=4, 3).morse_complex().map_err(|e| e.to_string())?;
        let d = conjugated(&c, &mut rng);
        let (hc, hd) = (homology(&c).map_err(|e| e.to_string())?, homology(&d).map_err(|e| e.to_string())?);
        if hc != hd {
            return Err(format!("H = {hc} before and {hd} after a change of basis"));
        }
        Ok(())
    });
    let mut rng = stream(cfg.seed, 3);
    let les = property(s, "long-exact-sequence", 300, |_| {
        let fc = sample::random_continuation(&mut rng, 4, 3);
        let f = fc.continuation_chain_map().map_err(|e| e.to_string())?;
        let report = crate::algebra::verify_les_exactness(&f).map_err(|e| e.to_string())?;
        if !report.is_exact() {
            return Err(format!("{}\n{report}", write_continuation(&fc)));
        }
        Ok(())
    });
    vec![snf, invariance, les]
}

fn flowcat_suite(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let s = "flowcat";
    let mut rng = stream(cfg.seed, 11);
    let d2 = property(s, "d-squared", 1000, |_| {
        let cat = sample::random_category(&mut rng, 8, 0..=4, 3);
        let v = cat.check_d_squared();
        if !v.is_empty() {
            return Err(format!("{v:?}\n{}", write_category(&cat)));
        }
        let c = cat.morse_complex().map_err(|e| e.to_string())?;
        if !c.verify().is_empty() {
            return Err(format!("Morse complex fails d² = 0\n{}", write_category(&cat)));
        }
        Ok(())
    });
    let mut rng = stream(cfg.seed, 12);
    let ks = cfg.stabilizations.clone();
    let cellular = property(s, "cellular-equals-morse", 500, |case| {
        let k = ks[case % ks.len().max(1)];
        let cat = sample::random_category(&mut rng, 8, 0..=4, 3);
        let dims = synthesize_embedding_dimensions(&cat, k).map_err(|e| e.to_string())?;
        dims.validate(&cat).map_err(|e| e.to_string())?;
        let cjs = cjs_cellular_complex(&cat, &dims).map_err(|e| e.to_string())?;
        let morse = cat.morse_complex().map_err(|e| e.to_string())?;
        if cjs != morse {
            return Err(format!("K = {k}: complexes differ\n{}", write_category(&cat)));
        }
        let shift = desuspension(&cat, &dims);
        for i in 0..cat.len() {
            if cell_dimension(&dims, i) - shift != cat.mu(i) {
                return Err(format!("K = {k}: cell dimension of {} is off", cat.name(i)));
            }
        }
        Ok(())
    });
    let mut rng = stream(cfg.seed, 13);
    let roundtrip = property(s, "text-roundtrip", 200, |_| {
        let cat = sample::random_category(&mut rng, 8, 0..=4, 3);
        let text = write_category(&cat);
        match parse_category(&text) {
            Ok(back) if back == cat => Ok(()),
            Ok(_) => Err(format!("roundtrip changed\n{text}")),
            Err(e) => Err(format!("{e}\n{text}")),
        }
    });
    vec![d2, cellular, roundtrip]
}

fn continuation_suite(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let s = "continuation";
    let mut rng = stream(cfg.seed, 21);
    let triangle = property(s, "exact-triangle", 500, |_| {
        let fc = sample::random_continuation(&mut rng, 5, 3);
        let report = fc.exact_triangle_report().map_err(|e| e.to_string())?;
        if !report.holds() {
            return Err(format!("{}\n{report}", write_continuation(&fc)));
        }
        Ok(())
    });
    let mut rng = stream(cfg.seed, 22);
    let composition = property(s, "composite-is-product", 500, |_| {
        let chain = sample::random_composable(&mut rng, 2, 5, 3);
        let composite = compose_continuations(&chain[0], &chain[1]).map_err(|e| e.to_string())?;
        composite_is_product(&chain[0], &chain[1], &composite).map_err(|e| {
            format!("{e}\n{}\n{}", write_continuation(&chain[0]), write_continuation(&chain[1]))
        })
    });
    let mut rng = stream(cfg.seed, 23);
    let associativity = property(s, "associativity", 300, |_| {
        let c = sample::random_composable(&mut rng, 3, 4, 3);
        let err = |e: crate::continuation::ContinuationError| e.to_string();
        let left = compose_continuations(&compose_continuations(&c[0], &c[1]).map_err(err)?, &c[2]).map_err(err)?;
        let right = compose_continuations(&c[0], &compose_continuations(&c[1], &c[2]).map_err(err)?).map_err(err)?;
        if left != right {
            return Err(format!("\n{}\n{}", write_continuation(&left), write_continuation(&right)));
        }
        Ok(())
    });
    let mut rng = stream(cfg.seed, 24);
    let roundtrip = property(s, "text-roundtrip", 200, |_| {
        let fc = sample::random_continuation(&mut rng, 5, 3);
        let text = write_continuation(&fc);
        match parse_continuation(&text) {
            Ok(back) if back == fc => Ok(()),
            Ok(_) => Err(format!("roundtrip changed\n{text}")),
            Err(e) => Err(format!("{e}\n{text}")),
        }
    });
    vec![triangle, composition, associativity, roundtrip]
}

/// Checks `g_{k+δ-1} = f₂_{k-1+δ} ∘ f₁_k` on every source degree `k` of
/// `first`, where `δ` is the grading shift between the two middle categories.
pub fn composite_is_product(
    first: &crate::continuation::FlowContinuation,
    second: &crate::continuation::FlowContinuation,
    composite: &crate::continuation::FlowContinuation,
) -> Result<(), String> {
    let delta = match (first.target().grading().first(), second.source().grading().first()) {
        (Some(a), Some(b)) => b - a,
        _ => 0,
    };
    let f1 = first.continuation_chain_map().map_err(|e| e.to_string())?;
    let f2 = second.continuation_chain_map().map_err(|e| e.to_string())?;
    let g = composite.continuation_chain_map().map_err(|e| e.to_string())?;
    for k in f1.source().degrees() {
        let product = &f2.matrix(k - 1 + delta) * &f1.matrix(k);
        if g.matrix(k + delta - 1) != product {
            return Err(format!("degree {k}: composite {:?}, product {product:?}", g.matrix(k + delta - 1)));
        }
    }
    Ok(())
}

fn model_parts(p: &ModelPoint<f64>) -> [&[f64]; 2] {
    [&p.x_minus, &p.x_plus]
}

fn localmodel_suite(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let s = "localmodel";
    let mut rng = stream(cfg.seed, 31);
    let consistency = property(s, "blowdowns-related-by-flow", 1000, |_| {
        let c: BlowupChartPoint<f64> = sample::random_chart_point(&mut rng, 1..=4, 0.01..=5.0);
        let up = blowdown_plus(&c);
        let t = anosov_cross_time(&up).map_err(|e| e.to_string())?;
        let flowed = anosov_flow(&up, t);
        let down = blowdown_minus(&c);
        let [a1, a2] = model_parts(&flowed);
        let [b1, b2] = model_parts(&down);
        let err = relative_error(&[(a1, b1), (a2, b2)], f64::MIN_POSITIVE);
        if err > 1e-9 {
            return Err(format!("relative error {err:e} at {c:?}"));
        }
        Ok(())
    });
    let mut rng = stream(cfg.seed, 32);
    let product = property(s, "flow-preserves-product", 1000, |_| {
        let p: ModelPoint<f64> = sample::random_model_point(&mut rng, 1..=4, 2.0);
        let t = rng.gen_range(-5.0..=5.0);
        let q = anosov_flow(&p, t);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let before = norm(&p.x_minus) * norm(&p.x_plus);
        let after = norm(&q.x_minus) * norm(&q.x_plus);
        let err = (after - before).abs() / before;
        if err > 1e-12 {
            return Err(format!("relative change {err:e} at {p:?}, t = {t}"));
        }
        Ok(())
    });
    let mut maps = vec![
        ChartTransition::BlowdownPlus,
        ChartTransition::BlowdownMinus,
        ChartTransition::BackwardExtension,
    ];
    if cfg.broken_chart {
        maps.push(ChartTransition::BrokenBlowdownPlus);
    }
    let mut rng = stream(cfg.seed, 33);
    let bases: Vec<(Vec<f64>, Vec<f64>)> = (0..8)
        .map(|_| {
            let c: BlowupChartPoint<f64> = sample::random_chart_point(&mut rng, 1..=4, 0.0..=0.0);
            let p: ModelPoint<f64> = sample::random_model_point(&mut rng, 1..=1, 2.0);
            // backward extension takes a general x₋, the blow-downs a unit x̂₋
            let first = if rng.gen_bool(0.5) { c.xhat_minus().to_vec() } else { p.x_minus };
            (first, c.xhat_plus().to_vec())
        })
        .collect();
    let smooth = property(s, "smooth-across-divisor", maps.len() * bases.len(), |case| {
        let map = maps[case / bases.len()];
        let (first, xhat) = &bases[case % bases.len()];
        let report = verify_smoothness(map, first, xhat, 2, 1e-3, 4);
        if !report.pass {
            return Err(format!("{}\n{report}", map.name()));
        }
        Ok(())
    });
    let mut results = vec![consistency, product, smooth];
    if !cfg.broken_chart {
        results.push(property(s, "broken-chart-rejected", bases.len(), |case| {
            let (first, xhat) = &bases[case];
            let report = verify_smoothness(ChartTransition::BrokenBlowdownPlus, first, xhat, 2, 1e-3, 4);
            if report.pass {
                return Err(format!("the |t| chart was certified smooth\n{report}"));
            }
            Ok(())
        }));
    }
    results
}

/// Integral homology of the built-in surfaces.
pub fn known_homology(model: &str) -> Option<HomologySummary> {
    match model {
        "s2" => Some(HomologySummary::free(0, &[1, 0, 1])),
        "torus" => Some(HomologySummary::free(0, &[1, 2, 1])),
        "rp2" => Some(HomologySummary::from_groups([
            (0, HomologyGroup::free(1)),
            (
                1,
                HomologyGroup {
                    betti: 0,
                    torsion: vec![2.into()],
                },
            ),
        ])),
        _ => None,
    }
}

/// Option sets under which flow-line counts must not change: three
/// intermediate levels, half the launch radius, and a ten times tighter
/// integrator tolerance.
pub fn robustness_variants(base: &MorseFlowOptions) -> Vec<(String, MorseFlowOptions)> {
    let mut out = Vec::new();
    for fraction in [0.25, 0.5, 0.75] {
        let mut o = *base;
        o.shooting.level_fraction = fraction;
        out.push((format!("level fraction {fraction}"), o));
    }
    let mut o = *base;
    o.shooting.launch_radius /= 2.0;
    out.push(("launch radius / 2".into(), o));
    let mut o = *base;
    o.shooting.tolerance /= 10.0;
    out.push(("tolerance / 10".into(), o));
    out
}

fn pipeline(name: &str, opts: &MorseFlowOptions) -> Result<MorsePipeline, String> {
    let model = ManifoldModel::builtin(name).map_err(|e| e.to_string())?;
    compute_flow_category(&model, opts).map_err(|e| format!("{name}: {e}"))
}

fn morseflow_suite(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let s = "morseflow";
    let mut base = MorseFlowOptions::default();
    if let Some(tol) = cfg.tolerance {
        base.shooting.tolerance = tol;
    }
    let recovered = property(s, "homology-recovered", BUILTIN_NAMES.len(), |case| {
        let name = BUILTIN_NAMES[case];
        let p = pipeline(name, &base)?;
        let h = homology(&p.category.morse_complex().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let expected = known_homology(name).unwrap();
        if h != expected {
            return Err(format!("{name}: H = {h}, expected {expected}"));
        }
        Ok(())
    });
    let robust_models = ["torus", "rp2"];
    let robust = property(s, "counts-robust", robust_models.len(), |case| {
        let name = robust_models[case];
        let reference = pipeline(name, &base)?;
        let table = count_table(&reference.data, &reference.lines);
        for (label, opts) in robustness_variants(&base) {
            let p = pipeline(name, &opts)?;
            let t = count_table(&p.data, &p.lines);
            if t != table {
                return Err(format!("{name}: counts change under {label}: {table:?} vs {t:?}"));
            }
        }
        Ok(())
    });
    vec![recovered, robust]
}
