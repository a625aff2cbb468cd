//! Shape-space reduction and the relative-equilibrium family.
//!
//! The relative pose g = g1^-1 g2 of a vehicle pair evolves by
//! `gdot = g xi` with `xi = xi2 - Ad_{g^-1} xi1`; a shape equilibrium is a
//! pose where this vanishes, equivalently `g hat(xi2) = hat(xi1) g` on
//! homogeneous matrices. With both angular velocities written in polar form
//! (common twist rate w, common curvature magnitude a, per-vehicle phases
//! psi), every equilibrium pose factors into five rigid motions built from
//! the elementary rotations, with two free parameters: a rotation angle
//! about e3 and an axial offset. The degenerate w = a = 0 branch instead
//! leaves the full translation free.

use crate::error::{Error, Result};
use crate::lie::{rot_x, rot_y_neg, rot_z, Mat3, Twist, Vec3, SE3};

/// Tolerance for the zero-tests in [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-12;

/// Parameters of the equilibrium family: shared twist rate `w` and curvature
/// magnitude `a`, normal-plane phases `psi1`/`psi2`, and the two free
/// parameters `theta` (rotation about e3) and `b3` (axial offset).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSpec {
    pub w: f64,
    pub a: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub theta: f64,
    pub b3: f64,
}

/// Steady formation implied by (w, a).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormationClass {
    /// w = a = 0: parallel straight lines, arbitrary offsets.
    Rectilinear,
    /// w = 0, a != 0: circles of common radius about a common axis.
    Circling,
    /// w != 0, a = 0: a common straight line.
    Collinear,
    /// both nonzero: congruent circular helices about a common axis.
    Helical,
}

/// Velocity of the relative pose: `xi = xi2 - Ad_{g^-1} xi1`.
pub fn shape_velocity(g: &SE3, xi1: &Twist, xi2: &Twist) -> Twist {
    *xi2 - g.inverse().adjoint(xi1)
}

/// Tests `g hat(xi2) = hat(xi1) g`; returns the decision and the Frobenius
/// residual on homogeneous matrices.
pub fn is_shape_equilibrium(g: &SE3, xi1: &Twist, xi2: &Twist, tol: f64) -> (bool, f64) {
    let gh = g.to_homogeneous();
    let residual = (gh * xi2.hat() - xi1.hat() * gh).norm();
    (residual <= tol, residual)
}

/// Angular velocity in polar form: `(w, a sin psi, a cos psi)`.
pub fn omega_from_polar(w: f64, a: f64, psi: f64) -> Vec3 {
    Vec3::new(w, a * psi.sin(), a * psi.cos())
}

/// The corresponding body twist with unit forward velocity.
pub fn twist_from_polar(w: f64, a: f64, psi: f64) -> Twist {
    Twist::new(omega_from_polar(w, a, psi), Vec3::x())
}

/// Equilibrium pose for the degenerate branch (w = a = 0): any rotation
/// fixing e1 composed with an arbitrary offset.
pub fn rectilinear_equilibrium(theta: f64, offset: &Vec3) -> SE3 {
    SE3 {
        rotation: rot_x(theta),
        translation: *offset,
    }
}

/// Builds the equilibrium pose as the five-factor product
/// `(R_psi1^T | 0) (R_phi^T | 0) (R_theta | b) (R_phi | 0) (R_psi2 | 0)`,
/// where `cos phi = a / sqrt(a^2 + w^2)`, `sin phi = w / sqrt(a^2 + w^2)`
/// and the middle translation is
/// `b = ( a sin(theta), a (1 - cos(theta)), 0 ) / (a^2 + w^2) + (0, 0, b3)`.
///
/// Requires `a^2 + w^2 != 0`; use [`rectilinear_equilibrium`] for the
/// degenerate branch, which has a different free-parameter count.
pub fn equilibrium_family(spec: &EquilibriumSpec) -> Result<SE3> {
    let s2 = spec.a * spec.a + spec.w * spec.w;
    if s2 == 0.0 {
        return Err(Error::InvalidParams(
            "w = a = 0 is the degenerate branch; use rectilinear_equilibrium".into(),
        ));
    }
    if spec.a < 0.0 {
        return Err(Error::InvalidParams(
            "curvature magnitude a must be >= 0".into(),
        ));
    }
    let s = s2.sqrt();
    let phi = (spec.w / s).atan2(spec.a / s);

    let coeff = spec.a / s2;
    let b_mid = Vec3::new(
        coeff * spec.theta.sin(),
        coeff * (1.0 - spec.theta.cos()),
        spec.b3,
    );

    let factor = |rotation: Mat3, translation: Vec3| SE3 {
        rotation,
        translation,
    };
    let g = factor(rot_x(spec.psi1).transpose(), Vec3::zeros())
        .compose(&factor(rot_y_neg(phi).transpose(), Vec3::zeros()))
        .compose(&factor(rot_z(spec.theta), b_mid))
        .compose(&factor(rot_y_neg(phi), Vec3::zeros()))
        .compose(&factor(rot_x(spec.psi2), Vec3::zeros()));
    Ok(g)
}

/// Formation class of the (w, a) pair; zero-tests at [`CLASSIFY_TOL`].
pub fn classify(w: f64, a: f64) -> FormationClass {
    let w_zero = w.abs() <= CLASSIFY_TOL;
    let a_zero = a.abs() <= CLASSIFY_TOL;
    match (w_zero, a_zero) {
        (true, true) => FormationClass::Rectilinear,
        (true, false) => FormationClass::Circling,
        (false, true) => FormationClass::Collinear,
        (false, false) => FormationClass::Helical,
    }
}

/// Geometry of the screw motion generated by a constant polar-form twist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelixGeometry {
    /// Distance from the screw axis: `a / (a^2 + w^2)`.
    pub radius: f64,
    /// Axial advance per unit arc length: `w / sqrt(a^2 + w^2)`.
    pub pitch_rate: f64,
    /// Axis direction in body coordinates (the normalized angular velocity).
    pub axis_body: Vec3,
}

/// Radius, pitch rate, and body-frame axis of the trajectory with constant
/// controls of magnitude (w, a), at the psi = 0 phase representative.
/// Undefined for w = a = 0.
pub fn helix_geometry(w: f64, a: f64) -> Result<HelixGeometry> {
    let s2 = a * a + w * w;
    if s2 == 0.0 {
        return Err(Error::Domain(
            "helix geometry is undefined for w = a = 0 (rectilinear motion)".into(),
        ));
    }
    let s = s2.sqrt();
    let phi = (w / s).atan2(a / s);
    Ok(HelixGeometry {
        radius: a / s2,
        pitch_rate: w / s,
        axis_body: rot_y_neg(phi).transpose() * Vec3::z(),
    })
}

/// Shape variables of an n-vehicle group: `g1^-1 gj` for j = 2..n.
pub fn reduce_shapes(groups: &[SE3]) -> Result<Vec<SE3>> {
    if groups.len() < 2 {
        return Err(Error::InvalidParams(
            "shape reduction needs at least two vehicles".into(),
        ));
    }
    let inv = groups[0].inverse();
    Ok(groups[1..].iter().map(|g| inv.compose(g)).collect())
}

/// The psi-parameterized family of equilibria sharing one interpretable
/// representative: `(R_psi1^T | 0) g (R_psi2 | 0)`. Members differ only in
/// the orientation of the normal vectors, never in the position trajectories.
pub fn gauge_family(g_tilde: &SE3, psi1: f64, psi2: f64) -> SE3 {
    let left = SE3 {
        rotation: rot_x(psi1).transpose(),
        translation: Vec3::zeros(),
    };
    let right = SE3 {
        rotation: rot_x(psi2),
        translation: Vec3::zeros(),
    };
    left.compose(g_tilde).compose(&right)
}
