//! Adaptive Dormand–Prince 5(4) integrator for autonomous systems, with
//! optional per-step projection (for flows constrained to a submanifold) and
//! zero-crossing event location.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("time budget exhausted at t = {t} after {steps} steps")]
    Budget { t: f64, steps: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DormandPrince<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: T,
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Scalar> DormandPrince<T> {
    pub fn new(tol: T) -> Self {
        DormandPrince {
            rtol: tol,
            atol: tol,
            h_init: T::lit(1e-3),
            h_max: T::lit(0.5),
            max_steps: 2_000_000,
        }
    }
}

/// Accepted steps of an integration. `event` is set when the run stopped on
/// the event function reaching zero.
#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub event: bool,
}

impl<T: Scalar> Solution<T> {
    pub fn last(&self) -> &[T] {
        self.states.last().expect("solution holds the initial state")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("solution holds the initial time")
    }
}

// Dormand–Prince tableau (autonomous systems need no nodes)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl<T: Scalar> DormandPrince<T> {
    /// One trial step of size `h`; returns the 5th-order state and the scaled
    /// error norm.
    fn trial<F>(&self, rhs: &F, y: &[T], h: T) -> (Vec<T>, T)
    where
        F: Fn(&[T], &mut [T]),
    {
        let n = y.len();
        let mut k = vec![vec![T::zero(); n]; 7];
        let mut tmp = vec![T::zero(); n];
        rhs(y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += T::lit(A[s][j]) * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            rhs(&tmp, &mut k[s]);
        }
        let mut y5 = vec![T::zero(); n];
        let mut err = T::zero();
        for i in 0..n {
            let mut s5 = T::zero();
            let mut e = T::zero();
            for s in 0..7 {
                s5 += T::lit(B5[s]) * k[s][i];
                e += T::lit(B5[s] - B4[s]) * k[s][i];
            }
            y5[i] = y[i] + h * s5;
            let scale = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
            let r = h * e / scale;
            err += r * r;
        }
        (y5, (err / T::lit(n.max(1) as f64)).sqrt())
    }

    /// Integrates `y' = rhs(y)` from `y0` until `t_max`, or until `event(y)`
    /// first reaches zero from positive values. `project` is applied to every
    /// accepted state (identity for unconstrained systems).
    pub fn integrate<F, E, P>(
        &self,
        rhs: F,
        y0: &[T],
        t_max: T,
        event: Option<E>,
        project: P,
    ) -> Result<Solution<T>, OdeError>
    where
        F: Fn(&[T], &mut [T]),
        E: Fn(&[T]) -> T,
        P: Fn(&mut [T]),
    {
        let mut y = y0.to_vec();
        let mut t = T::zero();
        let mut h = self.h_init.min(t_max);
        let mut sol = Solution {
            times: vec![t],
            states: vec![y.clone()],
            event: false,
        };
        if let Some(g) = &event {
            if g(&y) <= T::zero() {
                sol.event = true;
                return Ok(sol);
            }
        }
        let h_min = T::lit(1e-14);
        let mut steps = 0usize;
        while t < t_max {
            if steps >= self.max_steps {
                return Err(OdeError::Budget { t: t.to_f64().unwrap_or(f64::NAN), steps });
            }
            steps += 1;
            let h_try = h.min(t_max - t);
            let (mut y_new, err) = self.trial(&rhs, &y, h_try);
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                h = h_try * T::lit(0.25);
                if h < h_min {
                    return Err(OdeError::NonFinite { t: t.to_f64().unwrap_or(f64::NAN) });
                }
                continue;
            }
            if err > T::one() {
                let factor = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
                h = h_try * factor;
                if h < h_min {
                    return Err(OdeError::StepUnderflow { t: t.to_f64().unwrap_or(f64::NAN) });
                }
                continue;
            }
            project(&mut y_new);

            if let Some(g) = &event {
                if g(&y_new) <= T::zero() {
                    let (dt, y_hit) = self.locate(&rhs, g, &project, &y, h_try);
                    sol.times.push(t + dt);
                    sol.states.push(y_hit);
                    sol.event = true;
                    return Ok(sol);
                }
            }

            t += h_try;
            y = y_new;
            sol.times.push(t);
            sol.states.push(y.clone());

            let grow = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
            };
            h = (h_try * grow).min(self.h_max);
        }
        Ok(sol)
    }

    /// Bisects the step length in `(0, h]` for the zero of `g` along single
    /// steps from `y`.
    fn locate<F, E, P>(&self, rhs: &F, g: &E, project: &P, y: &[T], h: T) -> (T, Vec<T>)
    where
        F: Fn(&[T], &mut [T]),
        E: Fn(&[T]) -> T,
        P: Fn(&mut [T]),
    {
        let step = |dt: T| {
            let (mut z, _) = self.trial(rhs, y, dt);
            project(&mut z);
            z
        };
        let (mut lo, mut hi) = (T::zero(), h);
        let mut g_lo = g(y);
        let mut y_hi = step(hi);
        let mut g_hi = g(&y_hi);
        for _ in 0..200 {
            if hi - lo <= T::epsilon() * (T::one() + hi) {
                break;
            }
            // secant guess, safeguarded toward bisection
            let mut mid = lo + (hi - lo) * g_lo / (g_lo - g_hi);
            let span = hi - lo;
            if !(mid > lo + span * T::lit(0.05) && mid < hi - span * T::lit(0.05)) {
                mid = lo + span * T::lit(0.5);
            }
            let y_mid = step(mid);
            let g_mid = g(&y_mid);
            if g_mid <= T::zero() {
                hi = mid;
                y_hi = y_mid;
                g_hi = g_mid;
                if g_mid == T::zero() {
                    break;
                }
            } else {
                lo = mid;
                g_lo = g_mid;
            }
            if g_hi.abs() <= T::epsilon() * T::lit(16.0) {
                break;
            }
        }
        (hi, y_hi)
    }
}
