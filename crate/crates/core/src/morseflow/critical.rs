use nalgebra::{Matrix2, Matrix4, Vector3, Vector4};

use super::model::ManifoldModel;
use super::MorseFlowError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalOptions {
    /// Parameter grid size for Newton seeds (`n x n` samples).
    pub seed_grid: usize,
    /// Required bound on the Riemannian gradient at a critical point.
    pub residual: f64,
    /// A tangent Hessian eigenvalue below this fraction of the largest one
    /// is treated as zero.
    pub degeneracy: f64,
    /// Radius of the normal-form neighborhood around each critical point.
    pub neighborhood_radius: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions {
            seed_grid: 24,
            residual: 1e-10,
            degeneracy: 1e-6,
            neighborhood_radius: 0.05,
        }
    }
}

/// One lift of a critical point to the covering surface (the point itself
/// when the model has no symmetry).
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    pub position: Vector3<f64>,
    /// Lagrange multiplier: `∇F = λ ∇g` at the point.
    pub multiplier: f64,
    /// Oriented basis of the negative eigenspace `T⁻` of the tangent Hessian.
    pub unstable: Vec<Vector3<f64>>,
    /// Basis of the positive eigenspace `T⁺`.
    pub stable: Vec<Vector3<f64>>,
    /// Tangent Hessian eigenvalues matching `unstable` then `stable`.
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub name: String,
    pub value: f64,
    pub index: usize,
    /// The first lift is the representative used for launching flow lines.
    pub lifts: Vec<Lift>,
    pub radius: f64,
}

impl CriticalPoint {
    pub fn position(&self) -> Vector3<f64> {
        self.lifts[0].position
    }

    pub fn unstable_dim(&self) -> usize {
        self.index
    }
}

/// Critical points sorted by decreasing value, with regular values between
/// consecutive distinct critical values.
#[derive(Clone, Debug, PartialEq)]
pub struct MorseData {
    pub model: ManifoldModel,
    pub points: Vec<CriticalPoint>,
    pub level_values: Vec<f64>,
}

impl MorseData {
    /// Smallest critical value strictly above `value`, if any.
    pub fn next_value_above(&self, value: f64) -> Option<f64> {
        self.points
            .iter()
            .map(|p| p.value)
            .filter(|&v| v > value + 1e-12 * (1.0 + value.abs()))
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
    }

    /// Reverses the orientation of the unstable manifold of point `i`.
    pub fn flip_orientation(&mut self, i: usize) {
        for lift in &mut self.points[i].lifts {
            if let Some(last) = lift.unstable.last_mut() {
                *last = -*last;
            }
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.index).collect()
    }
}

/// Newton iteration on the Lagrange system `∇F - λ∇g = 0`, `g = 0`.
fn newton(model: &ManifoldModel, seed: &Vector3<f64>) -> Option<(Vector3<f64>, f64)> {
    let mut x = model.project(seed);
    let dg = model.constraint.gradient(&x);
    let mut lambda = model.function.gradient(&x).dot(&dg) / dg.norm_squared();
    for _ in 0..60 {
        let dg = model.constraint.gradient(&x);
        let residual = model.function.gradient(&x) - lambda * dg;
        let g = model.constraint.value(&x);
        let rhs = Vector4::new(-residual[0], -residual[1], -residual[2], -g);
        let h = model.function.hessian(&x) - lambda * model.constraint.hessian(&x);
        let mut jac = Matrix4::zeros();
        jac.fixed_view_mut::<3, 3>(0, 0).copy_from(&h);
        for i in 0..3 {
            jac[(i, 3)] = -dg[i];
            jac[(3, i)] = dg[i];
        }
        let step = jac.lu().solve(&rhs)?;
        let mut dx = Vector3::new(step[0], step[1], step[2]);
        let mut dl = step[3];
        let len = dx.norm();
        if len > 0.5 {
            dx *= 0.5 / len;
            dl *= 0.5 / len;
        }
        x += dx;
        lambda += dl;
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        if len < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    x = model.project(&x);
    Some((x, lambda))
}

/// Tangent Hessian eigen-decomposition at a critical point: eigenvalues
/// ascending with unit eigenvectors in `R³`.
fn tangent_hessian(model: &ManifoldModel, x: &Vector3<f64>, lambda: f64) -> [(f64, Vector3<f64>); 2] {
    let h = model.function.hessian(x) - lambda * model.constraint.hessian(x);
    let (t1, t2) = model.tangent_frame(x);
    let b = Matrix2::new(
        t1.dot(&(h * t1)),
        t1.dot(&(h * t2)),
        t2.dot(&(h * t1)),
        t2.dot(&(h * t2)),
    );
    let eig = b.symmetric_eigen();
    let mut pairs: Vec<(f64, Vector3<f64>)> = (0..2)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], (v[0] * t1 + v[1] * t2).normalize())
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    [pairs[0], pairs[1]]
}

/// Fixes the sign of a vector: its largest-magnitude component is positive.
fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    let k = v.iamax();
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

fn lexicographic(a: &Vector3<f64>, b: &Vector3<f64>) -> std::cmp::Ordering {
    (0..3)
        .map(|i| a[i].total_cmp(&b[i]))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Locates all critical points by constrained Newton iteration from a
/// dense seed grid, classifies them by the tangent Hessian, and groups lifts
/// under the model's symmetry.
pub fn find_critical_points(model: &ManifoldModel, opts: &CriticalOptions) -> Result<MorseData, MorseFlowError> {
    let seeds = model.constraint.sample(opts.seed_grid);
    let mut found: Vec<(Vector3<f64>, f64)> = Vec::new();
    for seed in &seeds {
        let Some((x, lambda)) = newton(model, seed) else { continue };
        if model.gradient(&x).norm() >= opts.residual || model.constraint.value(&x).abs() > 1e-12 {
            continue;
        }
        if found.iter().all(|(y, _)| (y - x).norm() > 1e-6) {
            found.push((x, lambda));
        }
    }
    if found.is_empty() {
        return Err(MorseFlowError::NoCriticalPoints(model.name.clone()));
    }
    found.sort_by(|a, b| lexicographic(&a.0, &b.0));

    let mut lifts_of: Vec<Vec<Lift>> = Vec::new();
    let mut used = vec![false; found.len()];
    for a in 0..found.len() {
        if used[a] {
            continue;
        }
        let mut group = vec![a];
        used[a] = true;
        if !model.symmetry.is_trivial() {
            let image = model.symmetry.apply(&found[a].0);
            match (0..found.len()).find(|&b| !used[b] && (found[b].0 - image).norm() < 1e-6) {
                Some(b) => {
                    used[b] = true;
                    group.push(b);
                }
                None => return Err(MorseFlowError::UnpairedLift(found[a].0)),
            }
        }
        // representative: the lift whose largest coordinate is positive
        group.sort_by_key(|&g| {
            let p = found[g].0;
            p[p.iamax()] < 0.0
        });
        let (x0, lambda0) = found[group[0]];
        let spectrum = tangent_hessian(model, &x0, lambda0);
        let scale = spectrum[0].0.abs().max(spectrum[1].0.abs());
        for &(ev, _) in &spectrum {
            if scale == 0.0 || ev.abs() < opts.degeneracy * scale {
                return Err(MorseFlowError::Degenerate {
                    position: x0,
                    eigenvalue: ev,
                });
            }
        }
        let mut unstable: Vec<Vector3<f64>> = spectrum.iter().filter(|p| p.0 < 0.0).map(|p| p.1).collect();
        let stable: Vec<Vector3<f64>> = spectrum.iter().filter(|p| p.0 > 0.0).map(|p| canonical_sign(p.1)).collect();
        match unstable.len() {
            1 => unstable[0] = canonical_sign(unstable[0]),
            2 => {
                // orient by the outward normal
                unstable[0] = canonical_sign(unstable[0]);
                if unstable[0].cross(&unstable[1]).dot(&model.unit_normal(&x0)) < 0.0 {
                    unstable[1] = -unstable[1];
                }
            }
            _ => {}
        }
        let eigenvalues: Vec<f64> = spectrum.iter().map(|p| p.0).collect();
        let mut lifts = vec![Lift {
            position: x0,
            multiplier: lambda0,
            unstable: unstable.clone(),
            stable: stable.clone(),
            eigenvalues: eigenvalues.clone(),
        }];
        for &g in &group[1..] {
            // frames pushed forward by the symmetry
            lifts.push(Lift {
                position: found[g].0,
                multiplier: found[g].1,
                unstable: unstable.iter().map(|v| model.symmetry.push(v)).collect(),
                stable: stable.iter().map(|v| model.symmetry.push(v)).collect(),
                eigenvalues: eigenvalues.clone(),
            });
        }
        lifts_of.push(lifts);
    }

    let mut points: Vec<CriticalPoint> = lifts_of
        .into_iter()
        .map(|lifts| {
            let value = model.f(&lifts[0].position);
            let index = lifts[0].unstable.len();
            CriticalPoint {
                name: String::new(),
                value,
                index,
                lifts,
                radius: opts.neighborhood_radius,
            }
        })
        .collect();
    points.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| lexicographic(&a.position(), &b.position())));
    for (k, p) in points.iter_mut().enumerate() {
        p.name = format!("c{k}");
    }
    let mut level_values = Vec::new();
    for w in points.windows(2) {
        if w[0].value - w[1].value > 1e-12 * (1.0 + w[0].value.abs()) {
            level_values.push(0.5 * (w[0].value + w[1].value));
        }
    }
    Ok(MorseData {
        model: model.clone(),
        points,
        level_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morseflow::model::TORUS_TILT;

    #[test]
    fn sphere_poles() {
        let md = find_critical_points(&ManifoldModel::sphere(), &CriticalOptions::default()).unwrap();
        assert_eq!(md.indices(), vec![2, 0]);
        assert!((md.points[0].value - 1.0).abs() < 1e-12);
        assert!((md.points[1].value + 1.0).abs() < 1e-12);
        assert_eq!(md.level_values, vec![0.0]);
    }

    #[test]
    fn tilted_torus_has_four_points() {
        let md = find_critical_points(&ManifoldModel::torus(TORUS_TILT), &CriticalOptions::default()).unwrap();
        assert_eq!(md.indices(), vec![2, 1, 1, 0]);
        let (s, c) = TORUS_TILT.sin_cos();
        let _ = c;
        let expected = [2.0 * s + 1.0, 1.0 - 2.0 * s, 2.0 * s - 1.0, -2.0 * s - 1.0];
        for (p, e) in md.points.iter().zip(expected) {
            assert!((p.value - e).abs() < 1e-10, "{} vs {e}", p.value);
            assert!(md.model.gradient(&p.position()).norm() < 1e-10);
        }
    }

    #[test]
    fn projective_plane_pairs_lifts() {
        let md = find_critical_points(&ManifoldModel::projective_plane(), &CriticalOptions::default()).unwrap();
        assert_eq!(md.indices(), vec![2, 1, 0]);
        for (p, v) in md.points.iter().zip([3.0, 2.0, 1.0]) {
            assert_eq!(p.lifts.len(), 2);
            assert!((p.value - v).abs() < 1e-12);
            assert!((p.lifts[0].position + p.lifts[1].position).norm() < 1e-9);
        }
    }

    #[test]
    fn upright_torus_is_degenerate() {
        let r = find_critical_points(&ManifoldModel::torus(0.0), &CriticalOptions::default());
        assert!(matches!(r, Err(MorseFlowError::Degenerate { .. })), "{r:?}");
    }

    #[test]
    fn eigenvectors_split_tangent_plane() {
        let md = find_critical_points(&ManifoldModel::projective_plane(), &CriticalOptions::default()).unwrap();
        let saddle = &md.points[1].lifts[0];
        // at ±e₂ the function decreases along e₁ and increases along e₃
        assert!((saddle.unstable[0].x.abs() - 1.0).abs() < 1e-9);
        assert!((saddle.stable[0].z.abs() - 1.0).abs() < 1e-9);
        assert!((saddle.eigenvalues[0] + 2.0).abs() < 1e-9 && (saddle.eigenvalues[1] - 2.0).abs() < 1e-9);
    }
}
