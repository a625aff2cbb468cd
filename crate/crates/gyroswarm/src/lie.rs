//! SO(3)/SE(3) kernel: hat map, group composition and inverse, the adjoint
//! action on twists, a closed-form exponential, and the elementary rotation
//! factors used by the equilibrium decomposition.
//!
//! Rotations are stored as plain 3x3 matrices. Every formula downstream of
//! this module is matrix-valued, so a matrix representation avoids
//! quaternion conversions entirely.

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::error::{Error, Result};

/// 3-vector over f64.
pub type Vec3 = Vector3<f64>;
/// 3x3 matrix over f64.
pub type Mat3 = Matrix3<f64>;

/// Tolerance for algebraic identities (composition, adjoint, exponential).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for rotation/frame validity (orthonormality, determinant).
pub const FRAME_TOL: f64 = 1e-9;

/// Skew-symmetric matrix of a 3-vector: `hat(g) * v == g x v`.
pub fn hat(g: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -g.z, g.y, //
        g.z, 0.0, -g.x, //
        -g.y, g.x, 0.0,
    )
}

/// Rotation about e1 by `psi` (the normal-plane phase factor).
pub fn rot_x(psi: f64) -> Mat3 {
    let (s, c) = psi.sin_cos();
    Mat3::new(
        1.0, 0.0, 0.0, //
        0.0, c, -s, //
        0.0, s, c,
    )
}

/// Rotation factor about e2 with entries (1,3) = -sin, (3,1) = +sin.
///
/// This is the transpose of the usual y-axis rotation (equivalently, a
/// rotation by -phi in the standard convention). The equilibrium
/// decomposition depends on this exact sign layout, so it is reproduced
/// literally rather than normalized.
pub fn rot_y_neg(phi: f64) -> Mat3 {
    let (s, c) = phi.sin_cos();
    Mat3::new(
        c, 0.0, -s, //
        0.0, 1.0, 0.0, //
        s, 0.0, c,
    )
}

/// Rotation about e3 by `theta` (fixes e3).
pub fn rot_z(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    Mat3::new(
        c, -s, 0.0, //
        s, c, 0.0, //
        0.0, 0.0, 1.0,
    )
}

/// Rigid motion in three dimensions, acting on points as `p -> R p + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SE3 {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl SE3 {
    pub fn identity() -> Self {
        SE3 {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Builds an element and checks the rotation block is orthonormal with
    /// determinant one (within [`FRAME_TOL`]).
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        let g = SE3 {
            rotation,
            translation,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let defect = self.rotation_defect();
        if !defect.is_finite() || defect > FRAME_TOL {
            return Err(Error::InvalidFrame(format!(
                "rotation defect {defect:.3e} exceeds {FRAME_TOL:.0e}"
            )));
        }
        if !self.translation.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidFrame("non-finite translation".into()));
        }
        Ok(())
    }

    /// Max of |R^T R - I| (entrywise) and |det R - 1|.
    pub fn rotation_defect(&self) -> f64 {
        let gram = self.rotation.transpose() * self.rotation - Mat3::identity();
        let ortho = gram.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        ortho.max((self.rotation.determinant() - 1.0).abs())
    }

    /// Group product: `(R1, t1) * (R2, t2) = (R1 R2, R1 t2 + t1)`.
    pub fn compose(&self, other: &SE3) -> SE3 {
        SE3 {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Group inverse: `(R^T, -R^T t)`.
    pub fn inverse(&self) -> SE3 {
        let rt = self.rotation.transpose();
        SE3 {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Adjoint action on a twist: `omega -> R omega`,
    /// `linear -> R linear + t x (R omega)`.
    pub fn adjoint(&self, xi: &Twist) -> Twist {
        let omega = self.rotation * xi.omega;
        Twist {
            omega,
            linear: self.rotation * xi.linear + self.translation.cross(&omega),
        }
    }

    /// 4x4 homogeneous form `[[R, t], [0, 1]]`.
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn from_homogeneous(m: &Matrix4<f64>) -> SE3 {
        SE3 {
            rotation: m.fixed_view::<3, 3>(0, 0).into_owned(),
            translation: m.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }

    /// Entrywise max-norm distance between homogeneous forms.
    pub fn distance(&self, other: &SE3) -> f64 {
        let dr = self.rotation - other.rotation;
        let dt = self.translation - other.translation;
        dr.iter()
            .chain(dt.iter())
            .fold(0.0f64, |m, e| m.max(e.abs()))
    }
}

/// Lie-algebra element of SE(3): body angular velocity plus body linear
/// velocity. For the particle dynamics the linear part is always e1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub omega: Vec3,
    pub linear: Vec3,
}

impl Twist {
    pub fn new(omega: Vec3, linear: Vec3) -> Self {
        Twist { omega, linear }
    }

    pub fn zero() -> Self {
        Twist {
            omega: Vec3::zeros(),
            linear: Vec3::zeros(),
        }
    }

    /// 4x4 homogeneous algebra element `[[hat(omega), linear], [0, 0]]`.
    pub fn hat(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat(&self.omega));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.linear);
        m
    }

    /// Closed-form screw motion `exp(t * hat(xi))`.
    ///
    /// Rodrigues form with the translation integral; the Taylor branch for
    /// |t*omega| < 1e-6 avoids the 0/0 in the coefficients.
    pub fn exp(&self, t: f64) -> SE3 {
        let w = self.omega * t;
        let v = self.linear * t;
        let theta2 = w.norm_squared();
        let (c1, c2, c3) = if theta2 < 1e-12 {
            (
                1.0 - theta2 / 6.0,
                0.5 - theta2 / 24.0,
                1.0 / 6.0 - theta2 / 120.0,
            )
        } else {
            let theta = theta2.sqrt();
            let (s, c) = theta.sin_cos();
            (
                s / theta,
                (1.0 - c) / theta2,
                (theta - s) / (theta2 * theta),
            )
        };
        let k = hat(&w);
        let k2 = k * k;
        SE3 {
            rotation: Mat3::identity() + k * c1 + k2 * c2,
            translation: (Mat3::identity() + k * c2 + k2 * c3) * v,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.omega.norm_squared() + self.linear.norm_squared()).sqrt()
    }
}

impl std::ops::Sub for Twist {
    type Output = Twist;

    fn sub(self, rhs: Twist) -> Twist {
        Twist {
            omega: self.omega - rhs.omega,
            linear: self.linear - rhs.linear,
        }
    }
}

/// Gram-Schmidt on the columns in order, preserving handedness of
/// near-orthonormal input. Errors if any column collapses (near-parallel
/// columns signal corrupted state, not roundoff).
pub fn orthonormalize(frame: &Mat3) -> Result<Mat3> {
    let cols: Vec<Vec3> = (0..3).map(|i| frame.column(i).into_owned()).collect();
    let mut ortho: Vec<Vec3> = Vec::with_capacity(3);
    for col in cols {
        let mut residual = col;
        for e in &ortho {
            residual -= e * e.dot(&col);
        }
        let norm = residual.norm();
        if norm < 1e-6 {
            return Err(Error::DegenerateFrame);
        }
        ortho.push(residual / norm);
    }
    Ok(Mat3::from_columns(&ortho))
}
