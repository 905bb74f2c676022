use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::MorseFlowError;

/// Surface in `R³` cut out as the regular zero set of a function.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    /// `|x|² - radius²`
    Sphere { radius: f64 },
    /// Torus of revolution about the unit `axis` through the origin:
    /// `(|x|² + R² - r²)² - 4R²(|x|² - (x·a)²)`.
    Torus { major: f64, minor: f64, axis: Vector3<f64> },
}

impl Constraint {
    pub fn value(&self, x: &Vector3<f64>) -> f64 {
        match self {
            Constraint::Sphere { radius } => x.norm_squared() - radius * radius,
            Constraint::Torus { major, minor, axis } => {
                let s = x.norm_squared();
                let w = x.dot(axis);
                let c = s + major * major - minor * minor;
                c * c - 4.0 * major * major * (s - w * w)
            }
        }
    }

    pub fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Constraint::Sphere { .. } => 2.0 * x,
            Constraint::Torus { major, minor, axis } => {
                let s = x.norm_squared();
                let w = x.dot(axis);
                let c = s + major * major - minor * minor;
                4.0 * c * x - 8.0 * major * major * (x - w * axis)
            }
        }
    }

    pub fn hessian(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        match self {
            Constraint::Sphere { .. } => Matrix3::identity() * 2.0,
            Constraint::Torus { major, minor, axis } => {
                let s = x.norm_squared();
                let c = s + major * major - minor * minor;
                Matrix3::identity() * (4.0 * c) + 8.0 * x * x.transpose()
                    - 8.0 * major * major * (Matrix3::identity() - axis * axis.transpose())
            }
        }
    }

    /// Points on the surface from a regular `n x n` parameter grid, offset
    /// by half a cell so that no sample sits on a coordinate pole.
    pub fn sample(&self, n: usize) -> Vec<Vector3<f64>> {
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let s = (a as f64 + 0.5) / n as f64;
                let t = (b as f64 + 0.5) / n as f64;
                out.push(match self {
                    Constraint::Sphere { radius } => {
                        let theta = PI * s;
                        let phi = 2.0 * PI * t;
                        *radius * Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
                    }
                    Constraint::Torus { major, minor, axis } => {
                        let (b1, b2) = orthonormal_complement(axis);
                        let u = 2.0 * PI * s;
                        let v = 2.0 * PI * t;
                        (major + minor * v.cos()) * (u.cos() * b1 + u.sin() * b2) + minor * v.sin() * axis
                    }
                });
            }
        }
        out
    }
}

/// Orthonormal `(b1, b2)` with `b1 × b2 = a` for a unit vector `a`.
pub(crate) fn orthonormal_complement(a: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let k = (0..3)
        .min_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs()))
        .unwrap();
    let mut e = Vector3::zeros();
    e[k] = 1.0;
    let b1 = (e - a.dot(&e) * a).normalize();
    let b2 = a.cross(&b1);
    (b1, b2)
}

/// Morse function on the ambient space, restricted to the surface.
#[derive(Clone, Debug, PartialEq)]
pub enum MorseFunction {
    /// `⟨d, x⟩`
    Linear { direction: Vector3<f64> },
    /// `Σ c_k x_k²`
    Quadratic { coefficients: Vector3<f64> },
}

impl MorseFunction {
    pub fn value(&self, x: &Vector3<f64>) -> f64 {
        match self {
            MorseFunction::Linear { direction } => direction.dot(x),
            MorseFunction::Quadratic { coefficients } => coefficients.dot(&x.component_mul(x)),
        }
    }

    pub fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        match self {
            MorseFunction::Linear { direction } => *direction,
            MorseFunction::Quadratic { coefficients } => 2.0 * coefficients.component_mul(x),
        }
    }

    pub fn hessian(&self, _x: &Vector3<f64>) -> Matrix3<f64> {
        match self {
            MorseFunction::Linear { .. } => Matrix3::zeros(),
            MorseFunction::Quadratic { coefficients } => Matrix3::from_diagonal(&(2.0 * coefficients)),
        }
    }
}

/// Free involution of the covering surface; the model is the quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Antipodal,
}

impl Symmetry {
    pub fn apply(self, x: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Symmetry::None => *x,
            Symmetry::Antipodal => -x,
        }
    }

    /// Derivative of the involution, applied to a tangent vector.
    pub fn push(self, v: &Vector3<f64>) -> Vector3<f64> {
        self.apply(v)
    }

    pub fn is_trivial(self) -> bool {
        self == Symmetry::None
    }
}

/// Closed surface with a Morse function, the metric induced from `R³`.
/// With a nontrivial symmetry the surface is a double cover and the model
/// is its quotient.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldModel {
    pub name: String,
    pub constraint: Constraint,
    pub function: MorseFunction,
    pub symmetry: Symmetry,
}

pub const BUILTIN_NAMES: [&str; 3] = ["s2", "torus", "rp2"];

/// Tilt of the torus axis away from the height direction.
pub const TORUS_TILT: f64 = 0.3;

impl ManifoldModel {
    /// Round unit sphere with the height function.
    pub fn sphere() -> Self {
        ManifoldModel {
            name: "s2".into(),
            constraint: Constraint::Sphere { radius: 1.0 },
            function: MorseFunction::Linear {
                direction: Vector3::z(),
            },
            symmetry: Symmetry::None,
        }
    }

    /// Torus of revolution with `R = 2`, `r = 1` and the height function,
    /// its axis tilted by `tilt` radians about the x-axis.
    pub fn torus(tilt: f64) -> Self {
        ManifoldModel {
            name: if tilt == 0.0 { "upright-torus".into() } else { "torus".into() },
            constraint: Constraint::Torus {
                major: 2.0,
                minor: 1.0,
                axis: Vector3::new(0.0, tilt.sin(), tilt.cos()),
            },
            function: MorseFunction::Linear {
                direction: Vector3::z(),
            },
            symmetry: Symmetry::None,
        }
    }

    /// Projective plane as the unit sphere modulo the antipodal map, with
    /// `x² + 2y² + 3z²`.
    pub fn projective_plane() -> Self {
        ManifoldModel {
            name: "rp2".into(),
            constraint: Constraint::Sphere { radius: 1.0 },
            function: MorseFunction::Quadratic {
                coefficients: Vector3::new(1.0, 2.0, 3.0),
            },
            symmetry: Symmetry::Antipodal,
        }
    }

    pub fn builtin(name: &str) -> Result<Self, MorseFlowError> {
        match name {
            "s2" => Ok(Self::sphere()),
            "torus" => Ok(Self::torus(TORUS_TILT)),
            "rp2" => Ok(Self::projective_plane()),
            other => Err(MorseFlowError::UnknownModel(other.to_string())),
        }
    }

    pub fn ambient_dimension(&self) -> usize {
        3
    }

    pub fn f(&self, x: &Vector3<f64>) -> f64 {
        self.function.value(x)
    }

    pub fn unit_normal(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.constraint.gradient(x).normalize()
    }

    /// Orthogonal projection onto the tangent plane at `x`.
    pub fn tangent_projection(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let n = self.unit_normal(x);
        Matrix3::identity() - n * n.transpose()
    }

    /// Riemannian gradient `P ∇F`.
    pub fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let n = self.unit_normal(x);
        let g = self.function.gradient(x);
        g - g.dot(&n) * n
    }

    /// Newton projection along the constraint gradient onto the surface.
    pub fn project(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let mut y = *x;
        for _ in 0..50 {
            let g = self.constraint.value(&y);
            let dg = self.constraint.gradient(&y);
            let step = g / dg.norm_squared() * dg;
            y -= step;
            if step.norm() <= 1e-15 * (1.0 + y.norm()) {
                break;
            }
        }
        y
    }

    /// Orthonormal basis `(t1, t2)` of the tangent plane at `x` with
    /// `t1 × t2` the unit normal.
    pub fn tangent_frame(&self, x: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
        orthonormal_complement(&self.unit_normal(x))
    }

    /// Smallest `|∇g| / (1 + |x|³)` over a sample of the surface; positive
    /// for a regular level set.
    pub fn regularity(&self, n: usize) -> f64 {
        self.constraint
            .sample(n)
            .iter()
            .map(|x| self.constraint.gradient(x).norm() / (1.0 + x.norm().powi(3)))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(f: impl Fn(&Vector3<f64>) -> f64, x: &Vector3<f64>) -> Vector3<f64> {
        let h = 1e-6;
        Vector3::from_fn(|i, _| {
            let mut e = Vector3::zeros();
            e[i] = h;
            (f(&(x + e)) - f(&(x - e))) / (2.0 * h)
        })
    }

    #[test]
    fn samples_lie_on_surfaces() {
        for m in [ManifoldModel::sphere(), ManifoldModel::torus(TORUS_TILT), ManifoldModel::projective_plane()] {
            for x in m.constraint.sample(8) {
                assert!(m.constraint.value(&x).abs() < 1e-12, "{}", m.name);
            }
            assert!(m.regularity(16) > 0.1);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let x = Vector3::new(0.3, -1.2, 0.7);
        for c in [ManifoldModel::sphere().constraint, ManifoldModel::torus(TORUS_TILT).constraint] {
            let g = c.gradient(&x);
            assert!((g - fd_gradient(|y| c.value(y), &x)).norm() < 1e-6 * (1.0 + g.norm()));
            for i in 0..3 {
                let col = fd_gradient(|y| c.gradient(y)[i], &x);
                assert!((c.hessian(&x).row(i).transpose() - col).norm() < 1e-5 * (1.0 + col.norm()));
            }
        }
        let f = ManifoldModel::projective_plane().function;
        assert!((f.gradient(&x) - fd_gradient(|y| f.value(y), &x)).norm() < 1e-6);
    }

    #[test]
    fn projection_and_tangent_frame() {
        let m = ManifoldModel::torus(TORUS_TILT);
        let x = m.project(&Vector3::new(2.5, 0.4, 0.9));
        assert!(m.constraint.value(&x).abs() < 1e-12);
        let (t1, t2) = m.tangent_frame(&x);
        let n = m.unit_normal(&x);
        assert!((t1.cross(&t2) - n).norm() < 1e-12);
        assert!(m.gradient(&x).dot(&n).abs() < 1e-12);
    }

    #[test]
    fn antipodal_symmetry_preserves_function() {
        let m = ManifoldModel::projective_plane();
        let x = Vector3::new(0.48, 0.6, 0.64);
        assert_eq!(m.f(&x), m.f(&m.symmetry.apply(&x)));
        assert!(matches!(ManifoldModel::builtin("klein"), Err(MorseFlowError::UnknownModel(_))));
    }
}
