//! Lyapunov functions for the two-vehicle laws, the analytic decay rate of
//! the rectilinear one, and the inequality kernels behind the nonpositivity
//! arguments, exposed for sampled verification.
//!
//! Both potentials are defined on the reduced shape (baseline vector plus
//! the two headings); states on the boundary of their domains signal
//! [`Error::Boundary`] so monitoring code can map them to +inf.

use crate::error::{Error, Result};
use crate::frame::FramedState;
use crate::laws::{align_rect_raw, h_potential, LawKind, LawParams};
use crate::lie::{Vec3, SE3};

/// Reduced two-vehicle shape: relative position and both headings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeTriple {
    /// Baseline vector from vehicle 1 to vehicle 2 (m).
    pub baseline: Vec3,
    /// Unit heading of vehicle 1.
    pub heading1: Vec3,
    /// Unit heading of vehicle 2.
    pub heading2: Vec3,
}

impl ShapeTriple {
    pub fn new(baseline: Vec3, heading1: Vec3, heading2: Vec3) -> Result<Self> {
        let s = ShapeTriple {
            baseline,
            heading1,
            heading2,
        };
        if s.separation() <= 0.0 {
            return Err(Error::InvalidParams("baseline must be nonzero".into()));
        }
        for (name, h) in [("heading1", &heading1), ("heading2", &heading2)] {
            if (h.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParams(format!("{name} must be unit length")));
            }
        }
        Ok(s)
    }

    pub fn from_states(s1: &FramedState, s2: &FramedState) -> Self {
        ShapeTriple {
            baseline: s2.position - s1.position,
            heading1: s1.tangent,
            heading2: s2.tangent,
        }
    }

    pub fn separation(&self) -> f64 {
        self.baseline.norm()
    }

    pub fn baseline_unit(&self) -> Vec3 {
        self.baseline / self.separation()
    }
}

/// Rectilinear Lyapunov function: `-ln(1 + x2.x1) + h(|r|)`.
pub fn v_rect(s: &ShapeTriple, p: &LawParams) -> Result<f64> {
    let sep = s.separation();
    if !(sep > 0.0) {
        return Err(Error::Boundary("coincident vehicles".into()));
    }
    let align = 1.0 + s.heading1.dot(&s.heading2);
    if align <= 0.0 {
        return Err(Error::Boundary("antipodal headings".into()));
    }
    Ok(-align.ln() + h_potential(sep, p, LawKind::Rectilinear)?)
}

/// Argument of the circling log term:
/// `1 - x2.x1 + 2 (r.x2)(r.x1)`; provably nonnegative for unit inputs.
pub fn circ_log_argument(s: &ShapeTriple) -> f64 {
    let r = s.baseline_unit();
    1.0 - s.heading1.dot(&s.heading2) + 2.0 * r.dot(&s.heading2) * r.dot(&s.heading1)
}

/// Circling Lyapunov function:
/// `-ln[1 - x2.x1 + 2 (r.x2)(r.x1)] + h_circ(|r|)`.
pub fn v_circ(s: &ShapeTriple, p: &LawParams) -> Result<f64> {
    let sep = s.separation();
    if !(sep > 0.0) {
        return Err(Error::Boundary("coincident vehicles".into()));
    }
    let arg = circ_log_argument(s);
    if arg <= 0.0 {
        return Err(Error::Boundary(format!("log argument {arg:.3e}")));
    }
    Ok(-arg.ln() + h_potential(sep, p, LawKind::Circling)?)
}

/// Rectilinear Lyapunov function from the relative pose g = g1^-1 g2 alone:
/// `-ln(1 + g11) + h(r)` with r the length of the translation column.
pub fn v_rect_group(g: &SE3, p: &LawParams) -> Result<f64> {
    let sep = g.translation.norm();
    if !(sep > 0.0) {
        return Err(Error::Boundary("coincident vehicles".into()));
    }
    let align = 1.0 + g.rotation[(0, 0)];
    if align <= 0.0 {
        return Err(Error::Boundary("antipodal headings".into()));
    }
    Ok(-align.ln() + h_potential(sep, p, LawKind::Rectilinear)?)
}

/// Circling Lyapunov function from the relative pose:
/// `-ln(1 - g11 - 2 g14 g^14 / r^2) + h_circ(r)`, where g^14 is the first
/// translation entry of the inverse pose.
pub fn v_circ_group(g: &SE3, p: &LawParams) -> Result<f64> {
    let sep = g.translation.norm();
    if !(sep > 0.0) {
        return Err(Error::Boundary("coincident vehicles".into()));
    }
    let g14 = g.translation.x;
    let g14_inv = g.inverse().translation.x;
    let arg = 1.0 - g.rotation[(0, 0)] - 2.0 * g14 * g14_inv / (sep * sep);
    if arg <= 0.0 {
        return Err(Error::Boundary(format!("log argument {arg:.3e}")));
    }
    Ok(-arg.ln() + h_potential(sep, p, LawKind::Circling)?)
}

/// Analytic time derivative of [`v_rect`] along the closed-loop flow of the
/// rectilinear law. The radial terms cancel exactly, leaving only the
/// alignment couplings:
///
/// `-[ sum over (vehicle, normal) of (x_other.n) F(...) ] / (1 + x2.x1)`.
///
/// Nonpositive whenever mu > eta/2 > 0.
pub fn vdot_rect_analytic(s1: &FramedState, s2: &FramedState, p: &LawParams) -> Result<f64> {
    let d = s2.position - s1.position;
    let dist = d.norm();
    if !(dist > 0.0) {
        return Err(Error::Boundary("coincident vehicles".into()));
    }
    let r_unit = d / dist;
    let denom = 1.0 + s1.tangent.dot(&s2.tangent);
    if denom <= 0.0 {
        return Err(Error::Boundary("antipodal headings".into()));
    }

    // Vehicle 2's couplings use +r, vehicle 1's use -r.
    let mut bracket = 0.0;
    for n2 in [&s2.normal1, &s2.normal2] {
        bracket += s1.tangent.dot(n2) * align_rect_raw(&r_unit, &s2.tangent, n2, &s1.tangent, p);
    }
    let neg = -r_unit;
    for n1 in [&s1.normal1, &s1.normal2] {
        bracket += s2.tangent.dot(n1) * align_rect_raw(&neg, &s1.tangent, n1, &s2.tangent, p);
    }
    Ok(-bracket / denom)
}

/// Frame form of the rectilinear nonpositivity kernel:
/// `sum (x_other.n)[ (x_other.n)/2 - sign (r.x_self)(r.n) ]`.
pub fn rect_inequality_frames(s1: &FramedState, s2: &FramedState, sign: f64) -> f64 {
    let r = (s2.position - s1.position).normalize();
    let mut acc = 0.0;
    for n2 in [&s2.normal1, &s2.normal2] {
        let dot = s1.tangent.dot(n2);
        acc += dot * (0.5 * dot - sign * r.dot(&s2.tangent) * r.dot(n2));
    }
    for n1 in [&s1.normal1, &s1.normal2] {
        let dot = s2.tangent.dot(n1);
        acc += dot * (0.5 * dot - sign * r.dot(&s1.tangent) * r.dot(n1));
    }
    acc
}

/// Normal-free form of the same kernel:
/// `[1 - (x1.x2)^2] + sign { (x1.x2)[(r.x1)^2 + (r.x2)^2] - 2 (r.x1)(r.x2) }`.
pub fn rect_inequality_vector(s: &ShapeTriple, sign: f64) -> f64 {
    let r = s.baseline_unit();
    let c = s.heading1.dot(&s.heading2);
    let a = r.dot(&s.heading1);
    let b = r.dot(&s.heading2);
    (1.0 - c * c) + sign * (c * (a * a + b * b) - 2.0 * a * b)
}

/// Planar angle form of the kernel:
/// `sin(phi2 - phi1)[ sin(phi2 - phi1) + sign (sin 2 phi2 - sin 2 phi1)/2 ]`.
pub fn rect_inequality(phi1: f64, phi2: f64, sign: f64) -> f64 {
    let d = (phi2 - phi1).sin();
    d * (d + sign * 0.5 * ((2.0 * phi2).sin() - (2.0 * phi1).sin()))
}

/// Circling nonpositivity kernel:
/// `1 - K^2 + sign { x2.x1 + K [1 - (r.x1)^2 - (r.x2)^2] }` with
/// `K = -x2.x1 + 2 (r.x1)(r.x2)`.
pub fn circ_inequality_vector(s: &ShapeTriple, sign: f64) -> f64 {
    let r = s.baseline_unit();
    let c = s.heading1.dot(&s.heading2);
    let a = r.dot(&s.heading1);
    let b = r.dot(&s.heading2);
    let k = -c + 2.0 * a * b;
    1.0 - k * k + sign * (c + k * (1.0 - a * a - b * b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{group_to_state, state_to_group, step, Controls};
    use crate::laws::two_vehicle_controls;
    use crate::lie::{rot_x, Twist};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, LN_2, TAU};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 {
                return v / n;
            }
        }
    }

    fn random_shape(rng: &mut ChaCha8Rng) -> ShapeTriple {
        ShapeTriple {
            baseline: unit(rng) * rng.gen_range(0.2..5.0),
            heading1: unit(rng),
            heading2: unit(rng),
        }
    }

    fn random_state_pair(rng: &mut ChaCha8Rng) -> (FramedState, FramedState) {
        loop {
            let p1 = Vec3::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let p2 = Vec3::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            if (p1 - p2).norm() < 0.1 {
                continue;
            }
            let s1 = FramedState::from_heading_with_normal(p1, unit(rng), unit(rng))
                .or_else(|_| FramedState::from_heading(p1, unit(rng)));
            let s2 = FramedState::from_heading_with_normal(p2, unit(rng), unit(rng))
                .or_else(|_| FramedState::from_heading(p2, unit(rng)));
            if let (Ok(s1), Ok(s2)) = (s1, s2) {
                if 1.0 + s1.tangent.dot(&s2.tangent) > 1e-3 {
                    return (s1, s2);
                }
            }
        }
    }

    fn rect_params() -> LawParams {
        LawParams::rectilinear(1.0, 1.0, 0.5, 0.4).unwrap()
    }

    fn circ_params() -> LawParams {
        LawParams::circling(1.0, 1.0, 0.5, 0.4).unwrap()
    }

    #[test]
    fn v_rect_at_aligned_rest_separation() {
        let s = ShapeTriple::new(Vec3::new(0.0, 1.0, 0.0), Vec3::x(), Vec3::x()).unwrap();
        let v = v_rect(&s, &rect_params()).unwrap();
        assert!((v + LN_2).abs() < 1e-15);
    }

    #[test]
    fn v_rect_diverges_near_antipodal_headings() {
        let p = rect_params();
        let mut prev = f64::NEG_INFINITY;
        for eps in [1e-2, 1e-4, 1e-6] {
            let heading2 = (-Vec3::x() + Vec3::y() * eps).normalize();
            let s = ShapeTriple::new(Vec3::new(0.0, 1.0, 0.0), Vec3::x(), heading2).unwrap();
            let v = v_rect(&s, &p).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(prev > 20.0);
        let exact = ShapeTriple::new(Vec3::new(0.0, 1.0, 0.0), Vec3::x(), -Vec3::x()).unwrap();
        assert!(matches!(v_rect(&exact, &p), Err(Error::Boundary(_))));
    }

    #[test]
    fn v_rect_is_radially_unbounded() {
        // Any bound is exceeded once the separation leaves a wide enough
        // band or the headings approach antipodal; the converse sublevel
        // containment is what keeps trajectories away from collision.
        let p = rect_params();
        let bound = 50.0;
        let heading = Vec3::x();
        for sep in [1e-3, 1e3] {
            let s = ShapeTriple::new(Vec3::new(0.0, sep, 0.0), heading, heading).unwrap();
            assert!(v_rect(&s, &p).unwrap() > bound, "sep {sep}");
        }
        // Inside the band with aligned headings, V stays near its minimum.
        let s = ShapeTriple::new(Vec3::new(0.0, p.r0, 0.0), heading, heading).unwrap();
        assert!(v_rect(&s, &p).unwrap() < 0.0);
    }

    #[test]
    fn v_rect_matches_independent_recomputation() {
        let mut r = rng(40);
        let p = rect_params();
        for _ in 0..500 {
            let s = random_shape(&mut r);
            if 1.0 + s.heading1.dot(&s.heading2) < 1e-6 {
                continue;
            }
            let direct = -(1.0 + s.heading2.dot(&s.heading1)).ln()
                + p.alpha * (s.separation() + p.r0 * p.r0 / s.separation() - 2.0 * p.r0);
            assert!((v_rect(&s, &p).unwrap() - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn v_circ_at_antipodal_perpendicular_configuration() {
        // x1 = -x2, both perpendicular to the baseline: log term is -ln 2.
        let p = circ_params();
        let s = ShapeTriple::new(Vec3::new(0.0, 2.0, 0.0), Vec3::x(), -Vec3::x()).unwrap();
        let h = h_potential(2.0, &p, LawKind::Circling).unwrap();
        assert!((v_circ(&s, &p).unwrap() - (-LN_2 + h)).abs() < 1e-14);
    }

    #[test]
    fn v_circ_boundary_at_aligned_perpendicular_configuration() {
        let s = ShapeTriple::new(Vec3::new(0.0, 2.0, 0.0), Vec3::x(), Vec3::x()).unwrap();
        assert_eq!(circ_log_argument(&s), 0.0);
        assert!(matches!(
            v_circ(&s, &circ_params()),
            Err(Error::Boundary(_))
        ));
    }

    #[test]
    fn circ_log_argument_is_nonnegative_sampled() {
        let mut r = rng(41);
        let mut min = f64::INFINITY;
        for _ in 0..200_000 {
            min = min.min(circ_log_argument(&random_shape(&mut r)));
        }
        assert!(min >= -1e-12, "min log argument {min}");
    }

    #[test]
    fn vdot_rect_zero_for_equal_headings() {
        let mut r = rng(42);
        let p = rect_params();
        for _ in 0..50 {
            let (s1, mut s2) = random_state_pair(&mut r);
            // Rebuild vehicle 2 with vehicle 1's heading but its own gauge.
            s2 =
                FramedState::from_heading_with_normal(s2.position, s1.tangent, s2.normal1).unwrap();
            let v = vdot_rect_analytic(&s1, &s2, &p).unwrap();
            assert!(v.abs() < 1e-14, "vdot {v}");
        }
    }

    #[test]
    fn vdot_rect_is_nonpositive_sampled() {
        let mut r = rng(43);
        for p in [
            rect_params(),
            LawParams::new(LawKind::Rectilinear, 1.0, 1.0, 0.5, 0.4, 1.0).unwrap(),
        ] {
            let mut max = f64::NEG_INFINITY;
            for _ in 0..20_000 {
                let (s1, s2) = random_state_pair(&mut r);
                max = max.max(vdot_rect_analytic(&s1, &s2, &p).unwrap());
            }
            assert!(max <= 1e-12, "max vdot {max} for sign {}", p.sign);
        }
    }

    #[test]
    fn vdot_rect_matches_centered_finite_difference() {
        // Oracle: centered finite difference of v_rect across one frozen-
        // control screw step in each direction.
        let mut r = rng(44);
        let p = rect_params();
        let dt = 1e-4;
        for _ in 0..100 {
            let (s1, s2) = random_state_pair(&mut r);
            let (c1, c2) = two_vehicle_controls(&s1, &s2, &p).unwrap();
            let shift = |s: &FramedState, c: &Controls, t: f64| {
                let g = state_to_group(s).unwrap();
                group_to_state(&g.compose(&c.to_twist().exp(t)))
            };
            let fwd = ShapeTriple::from_states(&shift(&s1, &c1, dt), &shift(&s2, &c2, dt));
            let bwd = ShapeTriple::from_states(&shift(&s1, &c1, -dt), &shift(&s2, &c2, -dt));
            let fd = (v_rect(&fwd, &p).unwrap() - v_rect(&bwd, &p).unwrap()) / (2.0 * dt);
            let analytic = vdot_rect_analytic(&s1, &s2, &p).unwrap();
            assert!(
                (analytic - fd).abs() < 1e-6,
                "analytic {analytic} vs fd {fd}"
            );
        }
    }

    #[test]
    fn rect_inequality_trivial_values() {
        for sign in [1.0, -1.0] {
            assert_eq!(rect_inequality(0.7, 0.7, sign), 0.0);
            let v = rect_inequality(0.0, FRAC_PI_2, sign);
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rect_inequality_nonnegative_sampled() {
        let mut r = rng(45);
        for sign in [1.0, -1.0] {
            let mut min = f64::INFINITY;
            for _ in 0..200_000 {
                let phi1 = r.gen_range(0.0..TAU);
                let phi2 = r.gen_range(0.0..TAU);
                min = min.min(rect_inequality(phi1, phi2, sign));
            }
            assert!(min >= -1e-12, "sign {sign}: min {min}");
        }
    }

    #[test]
    fn rect_inequality_vector_equality_for_parallel_headings() {
        let mut r = rng(46);
        for _ in 0..100 {
            let x = unit(&mut r);
            let baseline = unit(&mut r) * r.gen_range(0.5..3.0);
            for x2 in [x, -x] {
                let s = ShapeTriple::new(baseline, x, x2).unwrap();
                for sign in [1.0, -1.0] {
                    assert!(rect_inequality_vector(&s, sign).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rect_inequality_vector_ignores_out_of_plane_baseline() {
        let mut r = rng(47);
        for _ in 0..100 {
            let x1 = unit(&mut r);
            let x2 = unit(&mut r);
            let normal = x1.cross(&x2);
            if normal.norm() < 1e-3 {
                continue;
            }
            let s = ShapeTriple::new(normal.normalize() * 2.0, x1, x2).unwrap();
            let c = x1.dot(&x2);
            for sign in [1.0, -1.0] {
                let v = rect_inequality_vector(&s, sign);
                assert!((v - (1.0 - c * c)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rect_inequality_vector_nonnegative_sampled() {
        let mut r = rng(48);
        for sign in [1.0, -1.0] {
            let mut min = f64::INFINITY;
            for _ in 0..200_000 {
                min = min.min(rect_inequality_vector(&random_shape(&mut r), sign));
            }
            assert!(min >= -1e-12, "sign {sign}: min {min}");
        }
    }

    #[test]
    fn vector_form_reduces_to_angle_form_in_plane() {
        // Build shapes from chosen angles: in the plane spanned by (p, q)
        // take r = q and x_i = cos(phi_i) p + sin(phi_i) q.
        let mut r = rng(49);
        for _ in 0..500 {
            let p_axis = unit(&mut r);
            let q_axis = {
                let v = unit(&mut r);
                let o = v - p_axis * p_axis.dot(&v);
                if o.norm() < 1e-3 {
                    continue;
                }
                o.normalize()
            };
            let phi1 = r.gen_range(0.0..TAU);
            let phi2 = r.gen_range(0.0..TAU);
            let x1 = p_axis * phi1.cos() + q_axis * phi1.sin();
            let x2 = p_axis * phi2.cos() + q_axis * phi2.sin();
            let s = ShapeTriple::new(q_axis * r.gen_range(0.5..4.0), x1, x2).unwrap();
            for sign in [1.0, -1.0] {
                let vec_form = rect_inequality_vector(&s, sign);
                let angle_form = rect_inequality(phi1, phi2, sign);
                assert!(
                    (vec_form - angle_form).abs() < 1e-12,
                    "{vec_form} vs {angle_form}"
                );
            }
        }
    }

    #[test]
    fn frame_form_equals_vector_form() {
        let mut r = rng(50);
        for _ in 0..500 {
            let (s1, s2) = random_state_pair(&mut r);
            let shape = ShapeTriple::from_states(&s1, &s2);
            for sign in [1.0, -1.0] {
                let frames = rect_inequality_frames(&s1, &s2, sign);
                let vector = rect_inequality_vector(&shape, sign);
                assert!((frames - vector).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circ_inequality_equality_cases() {
        // Antipodal perpendicular configuration.
        let s = ShapeTriple::new(Vec3::new(0.0, 2.0, 0.0), Vec3::x(), -Vec3::x()).unwrap();
        for sign in [1.0, -1.0] {
            assert!(circ_inequality_vector(&s, sign).abs() < 1e-15);
        }
        // Aligned perpendicular configuration.
        let s = ShapeTriple::new(Vec3::new(0.0, 2.0, 0.0), Vec3::x(), Vec3::x()).unwrap();
        for sign in [1.0, -1.0] {
            assert!(circ_inequality_vector(&s, sign).abs() < 1e-15);
        }
    }

    #[test]
    fn circ_inequality_nonnegative_sampled() {
        let mut r = rng(51);
        for sign in [1.0, -1.0] {
            let mut min = f64::INFINITY;
            for _ in 0..200_000 {
                min = min.min(circ_inequality_vector(&random_shape(&mut r), sign));
            }
            assert!(min >= -1e-12, "sign {sign}: min {min}");
        }
    }

    #[test]
    fn group_forms_match_frame_forms() {
        let mut r = rng(52);
        let pr = rect_params();
        let pc = circ_params();
        for _ in 0..300 {
            let (s1, s2) = random_state_pair(&mut r);
            let shape = ShapeTriple::from_states(&s1, &s2);
            let g = state_to_group(&s1)
                .unwrap()
                .inverse()
                .compose(&state_to_group(&s2).unwrap());
            let (fr, gr) = (v_rect(&shape, &pr), v_rect_group(&g, &pr));
            match (fr, gr) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() < 1e-12),
                (a, b) => panic!("domain mismatch: {a:?} vs {b:?}"),
            }
            let (fc, gc) = (v_circ(&shape, &pc), v_circ_group(&g, &pc));
            match (fc, gc) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() < 1e-12, "{a} vs {b}"),
                (Err(_), Err(_)) => {}
                (a, b) => panic!("domain mismatch: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn v_rect_group_at_identity_rotation_offset_r0() {
        let p = rect_params();
        let g = SE3 {
            rotation: crate::lie::Mat3::identity(),
            translation: Vec3::new(0.0, p.r0, 0.0),
        };
        assert!((v_rect_group(&g, &p).unwrap() + LN_2).abs() < 1e-15);
    }

    #[test]
    fn v_circ_group_sign_at_circling_equilibrium() {
        // The printed group form must agree with the frame form at the
        // circling configuration, fixing the sign of the g14 g^14 term.
        let p = circ_params();
        let d = 1.0 + 2.0f64.sqrt();
        let s1 = FramedState::new(Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()).unwrap();
        let s2 =
            FramedState::new(Vec3::new(0.0, d, 0.0), -Vec3::x(), Vec3::y(), -Vec3::z()).unwrap();
        let g = state_to_group(&s1)
            .unwrap()
            .inverse()
            .compose(&state_to_group(&s2).unwrap());
        let frame = v_circ(&ShapeTriple::from_states(&s1, &s2), &p).unwrap();
        let group = v_circ_group(&g, &p).unwrap();
        assert!((frame - group).abs() < 1e-14);
        assert!((frame + LN_2).abs() < 1e-12);
    }

    #[test]
    fn v_rect_is_invariant_under_common_rigid_motion() {
        let mut r = rng(53);
        let p = rect_params();
        for _ in 0..200 {
            let (s1, s2) = random_state_pair(&mut r);
            let motion = Twist::new(unit(&mut r) * 2.0, unit(&mut r) * 3.0).exp(1.0);
            let moved =
                |s: &FramedState| group_to_state(&motion.compose(&state_to_group(s).unwrap()));
            let a = v_rect(&ShapeTriple::from_states(&s1, &s2), &p).unwrap();
            let b = v_rect(&ShapeTriple::from_states(&moved(&s1), &moved(&s2)), &p).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn v_rect_decreases_along_closed_loop_flow() {
        let mut r = rng(54);
        let p = LawParams::rectilinear(1.0, 2.0, 0.5, 0.4).unwrap();
        let (mut s1, mut s2) = random_state_pair(&mut r);
        s2.position = s1.position + unit(&mut r) * 3.0;
        let dt = 1e-3;
        let mut prev = v_rect(&ShapeTriple::from_states(&s1, &s2), &p).unwrap();
        let mut max_increase = f64::NEG_INFINITY;
        for _ in 0..20_000 {
            let (c1, c2) = two_vehicle_controls(&s1, &s2, &p).unwrap();
            s1 = step(&s1, &c1, dt);
            s2 = step(&s2, &c2, dt);
            let v = v_rect(&ShapeTriple::from_states(&s1, &s2), &p).unwrap();
            max_increase = max_increase.max(v - prev);
            prev = v;
        }
        assert!(max_increase <= 1e-8, "max per-step increase {max_increase}");
    }

    #[test]
    fn gauge_rotation_leaves_vdot_unchanged() {
        let mut r = rng(55);
        let p = rect_params();
        for _ in 0..100 {
            let (s1, s2) = random_state_pair(&mut r);
            let g1 = state_to_group(&s1).unwrap();
            let angle = r.gen_range(0.0..TAU);
            let gauged = group_to_state(&SE3 {
                rotation: g1.rotation * rot_x(angle),
                translation: g1.translation,
            });
            let a = vdot_rect_analytic(&s1, &s2, &p).unwrap();
            let b = vdot_rect_analytic(&gauged, &s2, &p).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
