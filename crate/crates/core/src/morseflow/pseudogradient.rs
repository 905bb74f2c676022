use nalgebra::Vector3;

use super::critical::MorseData;
use super::model::ManifoldModel;
use super::MorseFlowError;

/// The negative Riemannian gradient `X = -P∇F`, used as the pseudo-gradient
/// everywhere on the surface.
#[derive(Clone, Debug)]
pub struct Pseudogradient {
    model: ManifoldModel,
}

/// Outcome of validating the pseudo-gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudogradientReport {
    /// Number of samples outside all normal-form neighborhoods.
    pub samples: usize,
    /// Largest `dF(X)` over those samples (negative on success).
    pub max_descent_rate: f64,
    /// Largest relative deviation of the linearized flow from the diagonal
    /// expanding/contracting model at a critical point.
    pub max_linearization_error: f64,
}

impl Pseudogradient {
    pub fn new(model: &ManifoldModel) -> Self {
        Pseudogradient { model: model.clone() }
    }

    pub fn eval(&self, x: &Vector3<f64>) -> Vector3<f64> {
        -self.model.gradient(x)
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }
}

/// Builds the pseudo-gradient and checks that `dF(X) < 0` on a sample away
/// from the critical points, and that near each critical point its
/// linearization expands `T⁻` and contracts `T⁺` at the Hessian rates.
pub fn build_pseudogradient(md: &MorseData, sample_grid: usize) -> Result<(Pseudogradient, PseudogradientReport), MorseFlowError> {
    let model = &md.model;
    let x_field = Pseudogradient::new(model);
    let mut samples = 0;
    let mut max_rate = f64::NEG_INFINITY;
    for x in model.constraint.sample(sample_grid) {
        let near = md
            .points
            .iter()
            .any(|p| p.lifts.iter().any(|l| (l.position - x).norm() < p.radius));
        if near {
            continue;
        }
        samples += 1;
        let rate = model.function.gradient(&x).dot(&x_field.eval(&x));
        max_rate = max_rate.max(rate);
        if !(rate < 0.0) {
            return Err(MorseFlowError::PseudoGradient { position: x, rate });
        }
    }

    let eps = 1e-5;
    let mut max_lin = 0.0f64;
    for p in &md.points {
        for lift in &p.lifts {
            let dirs = lift.unstable.iter().chain(&lift.stable);
            for (v, &ev) in dirs.zip(&lift.eigenvalues) {
                let plus = x_field.eval(&model.project(&(lift.position + eps * v)));
                let minus = x_field.eval(&model.project(&(lift.position - eps * v)));
                let dxv = (plus - minus) / (2.0 * eps);
                // X = -grad F expands T⁻ (ev < 0) and contracts T⁺ at rate |ev|
                let err = (dxv + ev * v).norm() / ev.abs();
                max_lin = max_lin.max(err);
                if err > 1e-4 {
                    return Err(MorseFlowError::Linearization {
                        point: p.name.clone(),
                        error: err,
                    });
                }
            }
        }
    }
    Ok((
        x_field,
        PseudogradientReport {
            samples,
            max_descent_rate: max_rate,
            max_linearization_error: max_lin,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morseflow::critical::{find_critical_points, CriticalOptions};
    use crate::morseflow::model::TORUS_TILT;

    #[test]
    fn vanishes_at_critical_points_and_descends_elsewhere() {
        for model in [ManifoldModel::sphere(), ManifoldModel::torus(TORUS_TILT), ManifoldModel::projective_plane()] {
            let md = find_critical_points(&model, &CriticalOptions::default()).unwrap();
            let (x, report) = build_pseudogradient(&md, 32).unwrap();
            for p in &md.points {
                assert!(x.eval(&p.position()).norm() < 1e-10);
            }
            assert!(report.samples > 500);
            assert!(report.max_descent_rate < 0.0);
            assert!(report.max_linearization_error < 1e-4);
        }
    }

    #[test]
    fn north_pole_linearization_contracts_nothing() {
        // at the maximum of the height on S² both tangent directions expand
        let md = find_critical_points(&ManifoldModel::sphere(), &CriticalOptions::default()).unwrap();
        let top = &md.points[0].lifts[0];
        assert_eq!(top.unstable.len(), 2);
        assert!(top.eigenvalues.iter().all(|&e| e < 0.0));
    }
}
