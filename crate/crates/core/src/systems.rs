//! Benchmark dynamical systems, evaluable over real, interval, and dual
//! scalars through one generic code path. Systems are code-registered;
//! there is no expression parser.

use crate::autodiff::VectorField;
use crate::interval::IntervalVector;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Additive disturbance channel `C w` with `w` confined to a box.
#[derive(Clone, Debug)]
pub struct Disturbance {
    pub gain: Matrix,
    pub bounds: IntervalVector,
}

#[derive(Clone, Debug)]
enum SystemKind {
    VanDerPol { mu: f64 },
    RobotArm(RobotArmParams),
    Linear { a: Matrix },
}

/// Two-link robot arm constants (PD-controlled, one prismatic joint).
#[derive(Clone, Copy, Debug)]
pub struct RobotArmParams {
    pub u1: f64,
    pub u2: f64,
    pub m: f64,
    pub big_m: f64,
    pub l: f64,
    pub kp1: f64,
    pub kp2: f64,
    pub kd1: f64,
    pub kd2: f64,
}

impl Default for RobotArmParams {
    fn default() -> Self {
        RobotArmParams {
            u1: 2.0,
            u2: 1.0,
            m: 1.0,
            big_m: 1.0,
            l: 3.0_f64.sqrt(),
            kp1: 2.0,
            kp2: 1.0,
            kd1: 2.0,
            kd2: 1.0,
        }
    }
}

/// A vector field `ẋ = f(x) + C w`, with `f` evaluable over any scalar.
#[derive(Clone, Debug)]
pub struct DynamicalSystem {
    kind: SystemKind,
    disturbance: Option<Disturbance>,
}

impl DynamicalSystem {
    /// Van der Pol oscillator: `ẋ₁ = x₂`, `ẋ₂ = -x₁ + μ(1 - x₁²)x₂`.
    pub fn vanderpol(mu: f64) -> DynamicalSystem {
        assert!(mu.is_finite(), "mu must be finite");
        DynamicalSystem {
            kind: SystemKind::VanDerPol { mu },
            disturbance: None,
        }
    }

    /// Four-state robot arm with state `(q₁, q₂, z₁, z₂)`:
    ///
    /// ```text
    /// q̇₁ = z₁
    /// q̇₂ = z₂
    /// ż₁ = (−2 m q₂ z₁ z₂ − k_d1 z₁ + k_p1 (u₁ − q₁)) / (m q₂² + M L²/3)
    /// ż₂ = q₂ z₁² + (−k_d2 z₂ + k_p2 (u₂ − q₂)) / m
    /// ```
    pub fn robot_arm() -> DynamicalSystem {
        DynamicalSystem {
            kind: SystemKind::RobotArm(RobotArmParams::default()),
            disturbance: None,
        }
    }

    /// Linear system `ẋ = A x`.
    pub fn linear(a: Matrix) -> DynamicalSystem {
        assert!(a.is_square(), "linear system matrix must be square");
        DynamicalSystem {
            kind: SystemKind::Linear { a },
            disturbance: None,
        }
    }

    /// Attach a disturbance channel `+ C w`, `w ∈ bounds`.
    pub fn with_disturbance(mut self, gain: Matrix, bounds: IntervalVector) -> DynamicalSystem {
        assert_eq!(gain.rows(), self.dim(), "disturbance gain row mismatch");
        assert_eq!(gain.cols(), bounds.len(), "disturbance gain column mismatch");
        self.disturbance = Some(Disturbance { gain, bounds });
        self
    }

    pub fn disturbance(&self) -> Option<&Disturbance> {
        self.disturbance.as_ref()
    }

    /// Midpoint of the disturbance box, the nominal input for the
    /// center trajectory. `None` when the system is undisturbed.
    pub fn nominal_disturbance(&self) -> Option<Vec<f64>> {
        self.disturbance.as_ref().map(|d| d.bounds.midpoint())
    }

    /// The system matrix when the autonomous part is linear; enables an
    /// exact cancellation fast path in the facet bounds.
    pub fn linear_matrix(&self) -> Option<&Matrix> {
        match &self.kind {
            SystemKind::Linear { a } => Some(a),
            _ => None,
        }
    }

    pub fn robot_arm_params(&self) -> Option<&RobotArmParams> {
        match &self.kind {
            SystemKind::RobotArm(p) => Some(p),
            _ => None,
        }
    }

    /// Autonomous part `f(x)` over plain floats.
    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.eval::<f64>(x)
    }

    /// Full right-hand side `f(x) + C w` over plain floats.
    pub fn drift(&self, x: &[f64], w: Option<&[f64]>) -> Vec<f64> {
        let mut dx = self.eval_f64(x);
        if let (Some(d), Some(w)) = (&self.disturbance, w) {
            let cw = d.gain.matvec(w);
            for (a, b) in dx.iter_mut().zip(cw) {
                *a += b;
            }
        }
        dx
    }
}

impl VectorField for DynamicalSystem {
    fn dim(&self) -> usize {
        match &self.kind {
            SystemKind::VanDerPol { .. } => 2,
            SystemKind::RobotArm(_) => 4,
            SystemKind::Linear { a } => a.rows(),
        }
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.dim(), "state dimension mismatch");
        match &self.kind {
            SystemKind::VanDerPol { mu } => {
                let x1 = &x[0];
                let x2 = &x[1];
                let dx1 = x2.clone();
                let dx2 = -x1.clone()
                    + S::from_f64(*mu) * (S::from_f64(1.0) - x1.sqr()) * x2.clone();
                vec![dx1, dx2]
            }
            SystemKind::RobotArm(p) => {
                let q1 = &x[0];
                let q2 = &x[1];
                let z1 = &x[2];
                let z2 = &x[3];
                let inertia =
                    S::from_f64(p.m) * q2.sqr() + S::from_f64(p.big_m * p.l * p.l / 3.0);
                let dz1 = inertia.recip()
                    * (S::from_f64(-2.0 * p.m) * q2.clone() * z1.clone() * z2.clone()
                        - S::from_f64(p.kd1) * z1.clone()
                        + S::from_f64(p.kp1) * (S::from_f64(p.u1) - q1.clone()));
                let dz2 = q2.clone() * z1.sqr()
                    + S::from_f64(1.0 / p.m)
                        * (-(S::from_f64(p.kd2) * z2.clone())
                            + S::from_f64(p.kp2) * (S::from_f64(p.u2) - q2.clone()));
                vec![z1.clone(), z2.clone(), dz1, dz2]
            }
            SystemKind::Linear { a } => (0..a.rows())
                .map(|r| {
                    let mut acc = S::from_f64(0.0);
                    for c in 0..a.cols() {
                        let coeff = a.get(r, c);
                        if coeff != 0.0 {
                            acc = acc + S::from_f64(coeff) * x[c].clone();
                        }
                    }
                    acc
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn vanderpol_values() {
        let sys = DynamicalSystem::vanderpol(0.25);
        assert_vec_close(&sys.eval_f64(&[-2.0, 0.0]), &[0.0, 2.0], 0.0);
        assert_vec_close(&sys.eval_f64(&[0.0, 0.0]), &[0.0, 0.0], 0.0);
        assert_vec_close(&sys.eval_f64(&[1.0, 1.0]), &[1.0, -1.0], 0.0);
    }

    #[test]
    fn robot_arm_equilibrium_and_origin() {
        let sys = DynamicalSystem::robot_arm();
        assert_vec_close(
            &sys.eval_f64(&[2.0, 1.0, 0.0, 0.0]),
            &[0.0, 0.0, 0.0, 0.0],
            1e-12,
        );
        assert_vec_close(
            &sys.eval_f64(&[0.0, 0.0, 0.0, 0.0]),
            &[0.0, 0.0, 4.0, 1.0],
            1e-9,
        );
    }

    #[test]
    fn robot_arm_inertia_at_unit_extension() {
        let p = RobotArmParams::default();
        let inertia = p.m * 1.0 + p.big_m * p.l * p.l / 3.0;
        assert!((inertia - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linear_rotation_value() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let sys = DynamicalSystem::linear(a);
        assert_vec_close(&sys.eval_f64(&[1.0, 0.0]), &[0.0, -1.0], 0.0);
    }

    #[test]
    fn zero_matrix_gives_constant_field() {
        let sys = DynamicalSystem::linear(Matrix::zeros(2, 2));
        assert_vec_close(&sys.eval_f64(&[3.0, -4.0]), &[0.0, 0.0], 0.0);
    }

    #[test]
    fn disturbed_drift_adds_gain_times_input() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let w = IntervalVector::from_bounds(&[-0.1, -0.1], &[0.1, 0.1]);
        let sys = DynamicalSystem::linear(a).with_disturbance(Matrix::identity(2), w);
        let dx = sys.drift(&[1.0, 0.0], Some(&[0.05, -0.05]));
        assert_vec_close(&dx, &[0.05, -1.05], 1e-15);
        assert_eq!(sys.nominal_disturbance().unwrap(), vec![0.0, 0.0]);
    }
}
