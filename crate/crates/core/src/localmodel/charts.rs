use crate::ode::{DormandPrince, OdeError};
use crate::scalar::{norm, norm_sq, scale, Scalar};

use super::LocalModelError;

/// Point `(x₋, x₊)` of the normal-form neighborhood of a critical point with
/// critical value `r`, where `f = r + |x₊|² - |x₋|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint<T> {
    pub x_minus: Vec<T>,
    pub x_plus: Vec<T>,
    pub critical_value: T,
}

impl<T: Scalar> ModelPoint<T> {
    pub fn new(x_minus: Vec<T>, x_plus: Vec<T>, critical_value: T) -> Self {
        ModelPoint {
            x_minus,
            x_plus,
            critical_value,
        }
    }

    /// Point with critical value zero, the normalization used by level sets
    /// `f = ±1`.
    pub fn centered(x_minus: Vec<T>, x_plus: Vec<T>) -> Self {
        Self::new(x_minus, x_plus, T::zero())
    }

    pub fn ranks(&self) -> (usize, usize) {
        (self.x_minus.len(), self.x_plus.len())
    }

    pub fn is_critical(&self) -> bool {
        self.x_minus.iter().chain(&self.x_plus).all(|v| v.is_zero())
    }
}

/// Coordinates `(t, x̂₋, x̂₊)` on the common blow-up of two adjacent level
/// sets; `t = 0` is the exceptional divisor of broken flow lines.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupChartPoint<T> {
    t: T,
    xhat_minus: Vec<T>,
    xhat_plus: Vec<T>,
}

/// Absolute tolerance on the unit-norm invariant of chart directions.
pub fn unit_tolerance<T: Scalar>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

impl<T: Scalar> BlowupChartPoint<T> {
    pub fn new(t: T, xhat_minus: Vec<T>, xhat_plus: Vec<T>) -> Result<Self, LocalModelError> {
        if !(t >= T::zero()) {
            return Err(LocalModelError::NegativeParameter(t.to_f64().unwrap_or(f64::NAN)));
        }
        let tol = unit_tolerance::<T>();
        for (name, v) in [("x̂₋", &xhat_minus), ("x̂₊", &xhat_plus)] {
            let n = norm(v);
            if (n - T::one()).abs() > tol {
                return Err(LocalModelError::NotUnit {
                    which: name,
                    norm: n.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(BlowupChartPoint {
            t,
            xhat_minus,
            xhat_plus,
        })
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn xhat_minus(&self) -> &[T] {
        &self.xhat_minus
    }

    pub fn xhat_plus(&self) -> &[T] {
        &self.xhat_plus
    }

    pub fn on_exceptional_divisor(&self) -> bool {
        self.t == T::zero()
    }
}

/// `r + |x₊|² - |x₋|²`
pub fn model_f<T: Scalar>(p: &ModelPoint<T>) -> T {
    p.critical_value + norm_sq(&p.x_plus) - norm_sq(&p.x_minus)
}

/// The linear flow `(x₋, x₊) ↦ (eᵗ x₋, e⁻ᵗ x₊)` of `X = -½∇f`.
pub fn anosov_flow<T: Scalar>(p: &ModelPoint<T>, t: T) -> ModelPoint<T> {
    let grow = t.exp();
    let shrink = (-t).exp();
    ModelPoint {
        x_minus: scale(&p.x_minus, grow),
        x_plus: scale(&p.x_plus, shrink),
        critical_value: p.critical_value,
    }
}

/// Tubular neighborhood of `S⁺` in the upper level set `f = 1`:
/// `(x₋, x̂₊) ↦ (x₋, √(1 + |x₋|²) x̂₊)`.
pub fn tubular_upper<T: Scalar>(x_minus: &[T], xhat_plus: &[T]) -> ModelPoint<T> {
    let s = (T::one() + norm_sq(x_minus)).sqrt();
    ModelPoint::centered(x_minus.to_vec(), scale(xhat_plus, s))
}

/// Tubular neighborhood of `S⁻` in the lower level set `f = -1`:
/// `(x̂₋, x₊) ↦ (√(1 + |x₊|²) x̂₋, x₊)`.
pub fn tubular_lower<T: Scalar>(xhat_minus: &[T], x_plus: &[T]) -> ModelPoint<T> {
    let s = (T::one() + norm_sq(x_plus)).sqrt();
    ModelPoint::centered(scale(xhat_minus, s), x_plus.to_vec())
}

/// `π⁺(t, x̂₋, x̂₊) = (t x̂₋, √(1 + t²) x̂₊)`, landing on `f = +1`.
pub fn blowdown_plus<T: Scalar>(c: &BlowupChartPoint<T>) -> ModelPoint<T> {
    tubular_upper(&scale(&c.xhat_minus, c.t), &c.xhat_plus)
}

/// `π⁻(t, x̂₋, x̂₊) = (√(1 + t²) x̂₋, t x̂₊)`, landing on `f = -1`.
pub fn blowdown_minus<T: Scalar>(c: &BlowupChartPoint<T>) -> ModelPoint<T> {
    tubular_lower(&c.xhat_minus, &scale(&c.xhat_plus, c.t))
}

/// Flow time from a point of `f = +1` to the level `f = -1`:
/// `e^{2t} = (1 + √(1 + 4|x₋|²|x₊|²)) / (2|x₋|²)`.
///
/// Points with `x₋ = 0` lie on the stable sphere and never cross.
pub fn anosov_cross_time<T: Scalar>(p: &ModelPoint<T>) -> Result<T, LocalModelError> {
    let a = norm_sq(&p.x_minus);
    if a == T::zero() {
        return Err(LocalModelError::NonCrossing);
    }
    let b = norm_sq(&p.x_plus);
    let two = T::lit(2.0);
    let u = (T::one() + (T::one() + T::lit(4.0) * a * b).sqrt()) / (two * a);
    Ok(u.ln() / two)
}

/// `s(r, |x₋|) = √((1 + √(1 + 4r²|x₋|²)) / 2)`, equal to `√(1 + t²)` for the
/// exit parameter `t` of the backward flow.
pub fn extension_scale<T: Scalar>(r: T, x_minus_norm_sq: T) -> T {
    let two = T::lit(2.0);
    ((T::one() + (T::one() + T::lit(4.0) * r * r * x_minus_norm_sq).sqrt()) / two).sqrt()
}

/// Extension across `r = 0` of the backward flow from the point
/// `(x₋, r x̂₊)` to the upper level set: `((r/s) x₋, s x̂₊)`.
pub fn backward_flow_extension<T: Scalar>(r: T, x_minus: &[T], xhat_plus: &[T]) -> ModelPoint<T> {
    let s = extension_scale(r, norm_sq(x_minus));
    ModelPoint::centered(scale(x_minus, r / s), scale(xhat_plus, s))
}

/// Integrates the Anosov vector field `(x₋, -x₊)` (or its reverse) from `p`
/// until `f` reaches `level`. Returns the flow time and the end point.
pub fn integrate_to_level<T: Scalar>(
    p: &ModelPoint<T>,
    level: T,
    backward: bool,
    tol: T,
) -> Result<(T, ModelPoint<T>), OdeError> {
    let m = p.x_minus.len();
    let sign = if backward { -T::one() } else { T::one() };
    let mut y = p.x_minus.clone();
    y.extend_from_slice(&p.x_plus);
    let r = p.critical_value;
    let f_of = move |y: &[T]| r + norm_sq(&y[m..]) - norm_sq(&y[..m]);
    // event crosses zero in the direction of travel
    let event = move |y: &[T]| {
        let g = f_of(y) - level;
        if backward {
            -g
        } else {
            g
        }
    };
    let dp = DormandPrince::new(tol);
    let sol = dp.integrate(
        move |y: &[T], dy: &mut [T]| {
            for i in 0..y.len() {
                dy[i] = if i < m { sign * y[i] } else { -sign * y[i] };
            }
        },
        &y,
        T::lit(200.0),
        Some(event),
        |_| {},
    )?;
    let end = sol.last();
    Ok((
        sol.final_time(),
        ModelPoint::new(end[..m].to_vec(), end[m..].to_vec(), r),
    ))
}

/// Unit directions of the two blocks, `None` for a zero block.
pub fn directions<T: Scalar>(p: &ModelPoint<T>) -> (Option<Vec<T>>, Option<Vec<T>>) {
    let unit = |v: &[T]| {
        let n = norm(v);
        (n > T::zero()).then(|| scale(v, T::one() / n))
    };
    (unit(&p.x_minus), unit(&p.x_plus))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn normal_form_values() {
        assert_eq!(model_f(&ModelPoint::new(vec![0.0], vec![0.0], 3.5)), 3.5);
        assert_eq!(model_f(&ModelPoint::centered(vec![0.0], vec![1.0])), 1.0);
        assert_eq!(model_f(&ModelPoint::centered(vec![3.0, 4.0], vec![])), -25.0);
    }

    #[test]
    fn anosov_examples() {
        let p = ModelPoint::centered(vec![1.0], vec![2.0]);
        assert_eq!(anosov_flow(&p, 0.0), p);
        let q = anosov_flow(&p, 2f64.ln());
        assert!(close(q.x_minus[0], 2.0, 1e-15) && close(q.x_plus[0], 1.0, 1e-15));
    }

    #[test]
    fn blowdown_examples() {
        let c0 = BlowupChartPoint::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let up = blowdown_plus(&c0);
        assert_eq!(up.x_minus, vec![0.0, 0.0]);
        assert_eq!(up.x_plus, vec![0.0, 1.0]);
        let down = blowdown_minus(&c0);
        assert_eq!(down.x_minus, vec![1.0, 0.0]);
        assert_eq!(down.x_plus, vec![0.0, 0.0]);

        let c1 = BlowupChartPoint::new(1.0, vec![1.0], vec![1.0]).unwrap();
        let up = blowdown_plus(&c1);
        assert_eq!(up.x_minus, vec![1.0]);
        assert!(close(up.x_plus[0], 2f64.sqrt(), 1e-15));
        let down = blowdown_minus(&c1);
        assert!(close(down.x_minus[0], 2f64.sqrt(), 1e-15));
        assert_eq!(down.x_plus, vec![1.0]);
        assert!(close(model_f(&up), 1.0, 1e-15));
        assert!(close(model_f(&down), -1.0, 1e-15));
    }

    #[test]
    fn chart_validation() {
        assert!(matches!(
            BlowupChartPoint::new(-0.1, vec![1.0], vec![1.0]),
            Err(LocalModelError::NegativeParameter(_))
        ));
        assert!(matches!(
            BlowupChartPoint::new(0.1, vec![1.0, 1.0], vec![1.0]),
            Err(LocalModelError::NotUnit { which: "x̂₋", .. })
        ));
    }

    #[test]
    fn cross_time_closed_form() {
        // |x₋|² = 1, |x₊|² = 2 -> e^{2t} = 2
        let p = ModelPoint::centered(vec![1.0], vec![2f64.sqrt()]);
        let t = anosov_cross_time(&p).unwrap();
        assert!(close(t, 0.5 * 2f64.ln(), 1e-15));
        let stuck = ModelPoint::centered(vec![0.0], vec![1.0]);
        assert_eq!(anosov_cross_time(&stuck), Err(LocalModelError::NonCrossing));
    }

    #[test]
    fn cross_time_matches_integration() {
        let p = ModelPoint::centered(vec![1.0], vec![2f64.sqrt()]);
        let (t, end) = integrate_to_level(&p, -1.0, false, 1e-11).unwrap();
        assert!(close(t, 0.5 * 2f64.ln(), 1e-9), "{t}");
        assert!(close(model_f(&end), -1.0, 1e-10));
    }

    #[test]
    fn cross_time_shrinks_for_large_unstable_part() {
        let mut last = f64::INFINITY;
        for &a in &[0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0] {
            let b = (1.0 + a * a as f64).sqrt();
            let p = ModelPoint::centered(vec![a], vec![b]);
            let t = anosov_cross_time(&p).unwrap();
            assert!(t > 0.0 && t < last);
            let (ti, _) = integrate_to_level(&p, -1.0, false, 1e-11).unwrap();
            assert!(close(t, ti, 1e-8), "a={a}: {t} vs {ti}");
            last = t;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn backward_extension_examples() {
        let x_minus = vec![0.6, 0.8];
        let xhat_plus = vec![1.0];
        let at_zero = backward_flow_extension(0.0, &x_minus, &xhat_plus);
        assert_eq!(at_zero.x_minus, vec![0.0, 0.0]);
        assert_eq!(at_zero.x_plus, vec![1.0]);
        let on_stable = backward_flow_extension(3.0, &[0.0, 0.0], &xhat_plus);
        assert_eq!(on_stable.x_minus, vec![0.0, 0.0]);
        assert_eq!(on_stable.x_plus, vec![1.0]);

        let s = ((1.0 + 5f64.sqrt()) / 2.0).sqrt();
        let p = backward_flow_extension(1.0, &x_minus, &xhat_plus);
        assert!(close(p.x_minus[0], 0.6 / s, 1e-15));
        assert!(close(p.x_plus[0], s, 1e-15));

        let start = ModelPoint::centered(x_minus.clone(), vec![1.0]);
        let (_, q) = integrate_to_level(&start, 1.0, true, 1e-11).unwrap();
        let err = crate::scalar::relative_error(&[(&q.x_minus, &p.x_minus), (&q.x_plus, &p.x_plus)], 1e-300);
        assert!(err < 1e-8, "{err}");
    }
}
