use std::fmt;

use crate::scalar::{norm_sq, scale, Scalar};

/// Chart maps whose smoothness across the exceptional divisor is checked.
/// `BrokenBlowdownPlus` scales `x̂₊` by `1 + |t|` and is not smooth at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChartTransition {
    BlowdownPlus,
    BlowdownMinus,
    BackwardExtension,
    BrokenBlowdownPlus,
}

impl ChartTransition {
    pub const ALL: [ChartTransition; 4] = [
        ChartTransition::BlowdownPlus,
        ChartTransition::BlowdownMinus,
        ChartTransition::BackwardExtension,
        ChartTransition::BrokenBlowdownPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChartTransition::BlowdownPlus => "blowdown_plus",
            ChartTransition::BlowdownMinus => "blowdown_minus",
            ChartTransition::BackwardExtension => "backward_flow_extension",
            ChartTransition::BrokenBlowdownPlus => "broken_blowdown_plus",
        }
    }
}

/// The map as a curve in the blow-up parameter, concatenating the `x₋` and
/// `x₊` outputs. The formulas are evaluated for negative parameters too, so
/// that one-sided derivatives from both sides can be compared.
///
/// `first` is `x̂₋` for the blow-downs and `x₋` for the backward extension.
pub fn transition_curve<T: Scalar>(map: ChartTransition, first: &[T], xhat_plus: &[T], tau: T) -> Vec<T> {
    let one = T::one();
    let (a, b) = match map {
        ChartTransition::BlowdownPlus => (scale(first, tau), scale(xhat_plus, (one + tau * tau).sqrt())),
        ChartTransition::BlowdownMinus => (scale(first, (one + tau * tau).sqrt()), scale(xhat_plus, tau)),
        ChartTransition::BackwardExtension => {
            let s = super::extension_scale(tau, norm_sq(first));
            (scale(first, tau / s), scale(xhat_plus, s))
        }
        ChartTransition::BrokenBlowdownPlus => (scale(first, tau), scale(xhat_plus, one + tau.abs())),
    };
    let mut out = a;
    out.extend(b);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessRow<T> {
    pub step: T,
    /// One-sided forward difference quotient, per output component.
    pub forward: Vec<T>,
    /// Largest `|D⁺ - D⁻|` over components.
    pub jump: T,
    /// Largest one-sided second difference quotient (zero when order < 2).
    pub second: T,
    /// Largest ratio of successive forward-estimate changes; `None` on the
    /// first row or when the changes are at rounding level.
    pub ratio: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport<T> {
    pub map: ChartTransition,
    pub rows: Vec<SmoothnessRow<T>>,
    /// Smallest observed convergence order of the forward estimates.
    pub observed_order: Option<T>,
    /// Smallest observed order at which the two one-sided estimates merge.
    pub jump_order: Option<T>,
    pub pass: bool,
    pub failure: Option<String>,
}

/// Orders may fall short of the ideal by this much to absorb higher-order
/// terms in the difference quotients.
const ORDER_SLACK: f64 = 0.05;
const BOUND: f64 = 1e6;

/// Estimates derivatives of `map` along the blow-up parameter at zero with
/// steps `h, h/2, ...` (`levels` of them). Passes iff the forward first
/// derivative estimates converge with observed order at least one, the
/// forward and backward estimates merge at order at least one, and all
/// estimates stay bounded.
pub fn verify_smoothness<T: Scalar>(
    map: ChartTransition,
    first: &[T],
    xhat_plus: &[T],
    order: usize,
    h: T,
    levels: usize,
) -> SmoothnessReport<T> {
    let f = |tau: T| transition_curve(map, first, xhat_plus, tau);
    let f0 = f(T::zero());
    let n = f0.len();
    let two = T::lit(2.0);
    let steps: Vec<T> = (0..levels.max(2)).map(|k| h / two.powi(k as i32)).collect();
    let h_min = *steps.last().unwrap();
    let f0_max = f0.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = T::lit(1000.0) * T::epsilon() * (T::one() + f0_max) / h_min;

    let mut forward = Vec::new();
    let mut backward = Vec::new();
    let mut seconds = Vec::new();
    for &s in &steps {
        let fp = f(s);
        let fm = f(-s);
        forward.push((0..n).map(|c| (fp[c] - f0[c]) / s).collect::<Vec<T>>());
        backward.push((0..n).map(|c| (f0[c] - fm[c]) / s).collect::<Vec<T>>());
        let second = if order >= 2 {
            let f2 = f(two * s);
            (0..n).fold(T::zero(), |m, c| m.max(((f2[c] - two * fp[c] + f0[c]) / (s * s)).abs()))
        } else {
            T::zero()
        };
        seconds.push(second);
    }

    let mut failure: Option<String> = None;
    let mut fail = |msg: String| {
        if failure.is_none() {
            failure = Some(msg);
        }
    };

    // change of the forward estimate between consecutive steps
    let changes: Vec<Vec<T>> = (1..steps.len())
        .map(|k| (0..n).map(|c| (forward[k][c] - forward[k - 1][c]).abs()).collect())
        .collect();
    let mut ratios: Vec<Option<T>> = vec![None; steps.len()];
    let mut observed: Option<T> = None;
    for k in 1..changes.len() {
        let mut worst: Option<T> = None;
        for c in 0..n {
            let (prev, cur) = (changes[k - 1][c], changes[k][c]);
            if prev <= floor && cur <= floor {
                continue;
            }
            let ratio = if cur == T::zero() { T::infinity() } else { prev / cur };
            worst = Some(worst.map_or(ratio, |w: T| w.min(ratio)));
        }
        if let Some(r) = worst {
            ratios[k + 1] = Some(r);
            let p = r.log2();
            observed = Some(observed.map_or(p, |o: T| o.min(p)));
        }
    }
    if let Some(p) = observed {
        if p < T::one() - T::lit(ORDER_SLACK) {
            fail(format!("first-derivative estimates converge with order {p:.3}"));
        }
    }

    let jumps: Vec<Vec<T>> = (0..steps.len())
        .map(|k| (0..n).map(|c| (forward[k][c] - backward[k][c]).abs()).collect())
        .collect();
    let mut jump_order: Option<T> = None;
    for k in 1..steps.len() {
        for c in 0..n {
            let (prev, cur) = (jumps[k - 1][c], jumps[k][c]);
            if prev <= floor && cur <= floor {
                continue;
            }
            let p = if cur == T::zero() { T::infinity() } else { (prev / cur).log2() };
            jump_order = Some(jump_order.map_or(p, |o: T| o.min(p)));
        }
    }
    if let Some(p) = jump_order {
        if p < T::one() - T::lit(ORDER_SLACK) {
            let last = jumps.last().unwrap().iter().fold(T::zero(), |m, &v| m.max(v));
            fail(format!("one-sided derivatives disagree by {last:.3e} and merge with order {p:.3}"));
        }
    }

    let bound = T::lit(BOUND);
    let biggest = forward
        .iter()
        .chain(&backward)
        .flatten()
        .chain(&seconds)
        .fold(T::zero(), |m, v| m.max(v.abs()));
    if !(biggest <= bound) {
        fail(format!("derivative estimates unbounded ({biggest:.3e})"));
    }

    let rows = steps
        .iter()
        .enumerate()
        .map(|(k, &step)| SmoothnessRow {
            step,
            forward: forward[k].clone(),
            jump: jumps[k].iter().fold(T::zero(), |m, &v| m.max(v)),
            second: seconds[k],
            ratio: ratios[k],
        })
        .collect();
    SmoothnessReport {
        map,
        rows,
        observed_order: observed,
        jump_order,
        pass: failure.is_none(),
        failure,
    }
}

impl<T: Scalar> fmt::Display for SmoothnessReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "map {}", self.map.name())?;
        writeln!(f, "{:>12} {:>14} {:>12} {:>12} {:>8}", "step", "|estimate|", "jump", "second", "ratio")?;
        for row in &self.rows {
            let est = norm_sq(&row.forward).sqrt();
            let ratio = row.ratio.map_or("-".to_string(), |r| {
                if r.is_finite() {
                    format!("{:.4}", r)
                } else {
                    "inf".to_string()
                }
            });
            writeln!(
                f,
                "{:>12.4e} {:>14.10} {:>12.4e} {:>12.4e} {:>8}",
                row.step, est, row.jump, row.second, ratio
            )?;
        }
        let order = |o: Option<T>| o.map_or("exact".to_string(), |p| format!("{:.4}", p));
        writeln!(
            f,
            "observed order {}, jump order {}",
            order(self.observed_order),
            order(self.jump_order)
        )?;
        match &self.failure {
            None => write!(f, "PASS"),
            Some(msg) => write!(f, "FAIL: {msg}"),
        }
    }
}
