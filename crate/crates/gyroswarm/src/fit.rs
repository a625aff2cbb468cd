//! Least-squares geometry fitting for trajectory post-processing: plane,
//! circle, and screw-axis fits used to verify formation geometry.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::lie::Vec3;

/// A circle in 3D: center, unit plane normal, radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedCircle {
    pub center: Vec3,
    pub normal: Vec3,
    pub radius: f64,
}

/// A line in 3D with a radius estimate for points coiling around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedAxis {
    pub direction: Vec3,
    pub point: Vec3,
    pub radius: f64,
}

/// Unit normal of the best-fit plane through the centroid (smallest
/// principal direction of the scatter).
pub fn fit_plane_normal(points: &[Vec3]) -> Result<Vec3> {
    if points.len() < 3 {
        return Err(Error::InvalidParams("plane fit needs >= 3 points".into()));
    }
    let centroid = centroid(points);
    let mut scatter = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        scatter += d * d.transpose();
    }
    let eigen = scatter.symmetric_eigen();
    let mut best = 0;
    for i in 1..3 {
        if eigen.eigenvalues[i] < eigen.eigenvalues[best] {
            best = i;
        }
    }
    Ok(eigen.eigenvectors.column(best).normalize())
}

/// Least-squares circle through points that lie near a common plane: plane
/// fit, then an algebraic (Kasa) center fit in-plane.
pub fn fit_circle(points: &[Vec3]) -> Result<FittedCircle> {
    if points.len() < 3 {
        return Err(Error::InvalidParams("circle fit needs >= 3 points".into()));
    }
    let normal = fit_plane_normal(points)?;
    let c0 = centroid(points);
    let (p_axis, q_axis) = plane_basis(&normal);

    // Kasa fit: |p|^2 = 2 c . p + (R^2 - |c|^2), linear in the unknowns.
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for p in points {
        let d = p - c0;
        let (x, y) = (d.dot(&p_axis), d.dot(&q_axis));
        let row = Vector3::new(2.0 * x, 2.0 * y, 1.0);
        ata += row * row.transpose();
        atb += row * (x * x + y * y);
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::Domain("degenerate circle fit".into()))?;
    let center = c0 + p_axis * sol.x + q_axis * sol.y;
    let radius = (sol.z + sol.x * sol.x + sol.y * sol.y).max(0.0).sqrt();
    Ok(FittedCircle {
        center,
        normal,
        radius,
    })
}

/// 3D distance from each point to the circle curve: in-plane radial error
/// combined with out-of-plane offset.
pub fn circle_distances(circle: &FittedCircle, points: &[Vec3]) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            let d = p - circle.center;
            let out_of_plane = d.dot(&circle.normal);
            let in_plane = (d - circle.normal * out_of_plane).norm();
            (in_plane - circle.radius).hypot(out_of_plane)
        })
        .collect()
}

/// Axis of a sampled helix. `period` is the sample stride covering exactly
/// one angular turn; chords over whole turns point along the axis. Needs a
/// nonzero pitch (use [`fit_circle`] for planar orbits).
pub fn fit_helix_axis(points: &[Vec3], period: usize) -> Result<FittedAxis> {
    if period == 0 || points.len() < period + 2 {
        return Err(Error::InvalidParams(
            "helix fit needs more than one full turn of samples".into(),
        ));
    }
    let mut direction = Vec3::zeros();
    for i in 0..points.len() - period {
        direction += points[i + period] - points[i];
    }
    let norm = direction.norm();
    if norm < 1e-9 {
        return Err(Error::Domain(
            "no axial advance; the orbit is planar".into(),
        ));
    }
    let direction = direction / norm;

    // Project onto a plane perpendicular to the axis; the projections lie on
    // a circle centered at the axis.
    let (p_axis, q_axis) = plane_basis(&direction);
    let c0 = centroid(points);
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for p in points {
        let d = p - c0;
        let (x, y) = (d.dot(&p_axis), d.dot(&q_axis));
        let row = Vector3::new(2.0 * x, 2.0 * y, 1.0);
        ata += row * row.transpose();
        atb += row * (x * x + y * y);
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::Domain("degenerate axis fit".into()))?;
    let point = c0 + p_axis * sol.x + q_axis * sol.y;
    let radius = (sol.z + sol.x * sol.x + sol.y * sol.y).max(0.0).sqrt();
    Ok(FittedAxis {
        direction,
        point,
        radius,
    })
}

/// Distance from each point to the fitted axis line.
pub fn axis_distances(axis: &FittedAxis, points: &[Vec3]) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            let d = p - axis.point;
            (d - axis.direction * d.dot(&axis.direction)).norm()
        })
        .collect()
}

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().sum::<Vec3>() / points.len() as f64
}

/// Deterministic orthonormal basis of the plane perpendicular to `normal`.
fn plane_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let seed = if normal.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let p = (seed - normal * normal.dot(&seed)).normalize();
    (p, normal.cross(&p))
}
