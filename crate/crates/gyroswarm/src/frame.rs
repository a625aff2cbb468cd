//! Particle state as position plus natural frame, and the exponential
//! integrator that drives it.
//!
//! A particle moving at unit speed carries a right-handed orthonormal frame
//! (tangent, normal1, normal2). The two curvature controls steer the tangent
//! toward each normal; an optional third control twists the normal plane
//! about the tangent. Each integration step applies the closed-form screw
//! motion of the frozen controls, so frame orthonormality is preserved by
//! construction rather than by renormalization.

use crate::error::{Error, Result};
use crate::lie::{Mat3, Twist, Vec3, FRAME_TOL, SE3};

/// Position plus natural Frenet frame of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct FramedState {
    /// Position (m).
    pub position: Vec3,
    /// Unit heading (direction of motion).
    pub tangent: Vec3,
    /// First unit normal.
    pub normal1: Vec3,
    /// Second unit normal; equals tangent x normal1 for a valid state.
    pub normal2: Vec3,
}

impl FramedState {
    pub fn new(position: Vec3, tangent: Vec3, normal1: Vec3, normal2: Vec3) -> Result<Self> {
        let s = FramedState {
            position,
            tangent,
            normal1,
            normal2,
        };
        s.validate()?;
        Ok(s)
    }

    /// Completes the frame from a heading alone: the first normal comes from
    /// projecting out the smallest-index basis vector not parallel to the
    /// heading, so the completion is deterministic.
    pub fn from_heading(position: Vec3, heading: Vec3) -> Result<Self> {
        let norm = heading.norm();
        if !(norm.is_finite() && norm > 1e-12) {
            return Err(Error::InvalidFrame(
                "heading must be a nonzero vector".into(),
            ));
        }
        let x = heading / norm;
        let mut basis = None;
        for candidate in [Vec3::x(), Vec3::y(), Vec3::z()] {
            if x.dot(&candidate).abs() < 1.0 - 1e-6 {
                basis = Some(candidate);
                break;
            }
        }
        let e = basis.ok_or(Error::DegenerateFrame)?;
        let y = (e - x * x.dot(&e)).normalize();
        Ok(FramedState {
            position,
            tangent: x,
            normal1: y,
            normal2: x.cross(&y),
        })
    }

    /// Completes the frame with an explicit first-normal override.
    pub fn from_heading_with_normal(position: Vec3, heading: Vec3, normal: Vec3) -> Result<Self> {
        let x = heading
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidFrame("heading must be a nonzero vector".into()))?;
        let y = (normal - x * x.dot(&normal))
            .try_normalize(1e-6)
            .ok_or(Error::DegenerateFrame)?;
        Ok(FramedState {
            position,
            tangent: x,
            normal1: y,
            normal2: x.cross(&y),
        })
    }

    pub fn validate(&self) -> Result<()> {
        for v in [&self.position, &self.tangent, &self.normal1, &self.normal2] {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidFrame("non-finite component".into()));
            }
        }
        let defect = self.frame_defect();
        if defect > FRAME_TOL {
            return Err(Error::InvalidFrame(format!(
                "frame defect {defect:.3e} exceeds {FRAME_TOL:.0e}"
            )));
        }
        Ok(())
    }

    /// Worst violation of unit length, orthogonality, and right-handedness.
    pub fn frame_defect(&self) -> f64 {
        let (x, y, z) = (&self.tangent, &self.normal1, &self.normal2);
        let mut d: f64 = 0.0;
        for v in [x, y, z] {
            d = d.max((v.norm() - 1.0).abs());
        }
        d = d.max(x.dot(y).abs());
        d = d.max(x.dot(z).abs());
        d = d.max(y.dot(z).abs());
        d.max((x.cross(y) - z).norm())
    }

    /// Frame as a matrix with columns (tangent, normal1, normal2).
    pub fn frame(&self) -> Mat3 {
        Mat3::from_columns(&[self.tangent, self.normal1, self.normal2])
    }
}

/// Steering inputs for one vehicle, in units of curvature (1/m).
///
/// `u` turns the tangent toward normal1, `v` toward normal2, and `w` twists
/// the frame about the tangent (zero in natural-frame mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl Controls {
    pub fn zero() -> Self {
        Controls {
            u: 0.0,
            v: 0.0,
            w: 0.0,
        }
    }

    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Controls { u, v, w }
    }

    /// Body twist realizing these controls: angular part (w, -v, u) with unit
    /// forward velocity.
    pub fn to_twist(&self) -> Twist {
        Twist::new(Vec3::new(self.w, -self.v, self.u), Vec3::x())
    }

    /// Magnitude of the natural curvature vector, sqrt(u^2 + v^2).
    pub fn curvature_magnitude(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.w.is_finite()
    }
}

/// Assembles the SE(3) element with the frame as rotation columns and the
/// position as translation. Errors if the frame invariants are violated.
pub fn state_to_group(s: &FramedState) -> Result<SE3> {
    s.validate()?;
    Ok(SE3 {
        rotation: s.frame(),
        translation: s.position,
    })
}

/// Inverse of [`state_to_group`].
pub fn group_to_state(g: &SE3) -> FramedState {
    FramedState {
        position: g.translation,
        tangent: g.rotation.column(0).into_owned(),
        normal1: g.rotation.column(1).into_owned(),
        normal2: g.rotation.column(2).into_owned(),
    }
}

/// One exponential step: the controls are frozen over the interval and the
/// exact screw motion is applied. Exact for constant controls; first order in
/// the variation of feedback controls.
pub fn step(s: &FramedState, c: &Controls, dt: f64) -> FramedState {
    let g = SE3 {
        rotation: s.frame(),
        translation: s.position,
    };
    group_to_state(&g.compose(&c.to_twist().exp(dt)))
}

/// One recorded instant of a multi-vehicle run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub states: Vec<FramedState>,
    /// Controls evaluated at these states.
    pub controls: Vec<Controls>,
}

/// Fixed-step trajectory record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub sample_every: usize,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn vehicle_count(&self) -> usize {
        self.samples.first().map_or(0, |s| s.states.len())
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Feedback law: maps the full state list to one control triple per vehicle.
pub type FeedbackLaw<'a> = dyn Fn(&[FramedState]) -> Result<Vec<Controls>> + 'a;

/// Closed-loop fixed-step integration with simultaneous (Jacobi-style)
/// updates: controls for every vehicle are evaluated at the start of the
/// tick, then all vehicles step together. Every `sample_every`-th tick is
/// recorded, plus the final state.
pub fn integrate(
    initial: &[FramedState],
    law: &FeedbackLaw,
    dt: f64,
    t_final: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if initial.is_empty() {
        return Err(Error::InvalidParams("need at least one vehicle".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParams("dt must be positive".into()));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParams("t_final must be nonnegative".into()));
    }
    let sample_every = sample_every.max(1);

    let ticks = (t_final / dt).round() as usize;
    let mut states = initial.to_vec();
    let mut samples = Vec::with_capacity(ticks / sample_every + 2);

    for tick in 0..ticks {
        let controls = eval_law(law, &states, tick)?;
        if tick % sample_every == 0 {
            samples.push(Sample {
                time: tick as f64 * dt,
                states: states.clone(),
                controls: controls.clone(),
            });
        }
        states = states
            .iter()
            .zip(&controls)
            .map(|(s, c)| step(s, c, dt))
            .collect();
    }

    let controls = eval_law(law, &states, ticks)?;
    samples.push(Sample {
        time: ticks as f64 * dt,
        states,
        controls,
    });

    Ok(Trajectory {
        dt,
        sample_every,
        samples,
    })
}

fn eval_law(law: &FeedbackLaw, states: &[FramedState], tick: usize) -> Result<Vec<Controls>> {
    let controls = law(states).map_err(|e| Error::LawFailure {
        tick,
        source: Box::new(e),
    })?;
    if controls.len() != states.len() {
        return Err(Error::InvalidParams(format!(
            "law returned {} control triples for {} vehicles",
            controls.len(),
            states.len()
        )));
    }
    for (vehicle, c) in controls.iter().enumerate() {
        if !c.is_finite() {
            return Err(Error::NonFiniteControl { tick, vehicle });
        }
    }
    Ok(controls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn random_state(rng: &mut ChaCha8Rng) -> FramedState {
        let dir = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let pos = Vec3::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        FramedState::from_heading(pos, dir).unwrap()
    }

    #[test]
    fn state_to_group_standard_basis_is_identity() {
        let s = FramedState::new(Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()).unwrap();
        let g = state_to_group(&s).unwrap();
        assert!(g.distance(&SE3::identity()) < 1e-15);
    }

    #[test]
    fn group_state_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..100 {
            let s = random_state(&mut rng);
            let back = group_to_state(&state_to_group(&s).unwrap());
            assert!((back.position - s.position).norm() < 1e-15);
            assert!((back.tangent - s.tangent).norm() < 1e-15);
            assert!((back.normal1 - s.normal1).norm() < 1e-15);
            assert!((back.normal2 - s.normal2).norm() < 1e-15);
        }
    }

    #[test]
    fn state_to_group_output_is_valid_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let g = state_to_group(&random_state(&mut rng)).unwrap();
            assert!(g.validate().is_ok());
        }
    }

    #[test]
    fn state_to_group_rejects_broken_frame() {
        let s = FramedState {
            position: Vec3::zeros(),
            tangent: Vec3::x() * 1.1,
            normal1: Vec3::y(),
            normal2: Vec3::z(),
        };
        assert!(state_to_group(&s).is_err());
    }

    #[test]
    fn from_heading_completion_is_deterministic() {
        // Heading along e1 picks e2 (the projection of e2 survives), heading
        // along e2 picks e1.
        let a = FramedState::from_heading(Vec3::zeros(), Vec3::x()).unwrap();
        assert!((a.normal1 - Vec3::y()).norm() < 1e-15);
        let b = FramedState::from_heading(Vec3::zeros(), Vec3::y()).unwrap();
        assert!((b.normal1 - Vec3::x()).norm() < 1e-15);
    }

    #[test]
    fn zero_controls_give_straight_line() {
        let s = FramedState::from_heading(Vec3::zeros(), Vec3::x()).unwrap();
        let out = step(&s, &Controls::zero(), 0.25);
        assert!((out.position - Vec3::new(0.25, 0.0, 0.0)).norm() < 1e-15);
        assert!((out.tangent - s.tangent).norm() < 1e-15);
        assert!((out.normal1 - s.normal1).norm() < 1e-15);
    }

    #[test]
    fn constant_curvature_closes_a_circle() {
        // u = a traces a circle of radius 1/a; after arc length 2*pi/a the
        // position returns to the start.
        let a = 0.8;
        let s0 = FramedState::from_heading(Vec3::new(1.0, 2.0, 3.0), Vec3::x()).unwrap();
        let c = Controls::new(a, 0.0, 0.0);
        let steps = 4000;
        let dt = TAU / a / steps as f64;
        let mut s = s0.clone();
        let mut max_radius_err = 0.0f64;
        let center = s0.position + s0.normal1 / a;
        for _ in 0..steps {
            s = step(&s, &c, dt);
            max_radius_err = max_radius_err.max(((s.position - center).norm() - 1.0 / a).abs());
        }
        assert!((s.position - s0.position).norm() < 1e-6);
        assert!(max_radius_err < 1e-9, "radius drift {max_radius_err}");
    }

    #[test]
    fn step_matches_screw_motion_exactly_for_constant_controls() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let s0 = random_state(&mut rng);
        let c = Controls::new(0.4, -0.3, 0.2);
        let dt = 0.05;
        let mut s = s0.clone();
        for _ in 0..40 {
            s = step(&s, &c, dt);
        }
        let expected = state_to_group(&s0)
            .unwrap()
            .compose(&c.to_twist().exp(40.0 * dt));
        let got = state_to_group(&s).unwrap();
        assert!(got.distance(&expected) < 1e-12);
    }

    #[test]
    fn feedback_integration_error_shrinks_linearly_with_dt() {
        // Simple smooth state-dependent feedback; compare against a fine
        // reference and check first-order convergence via dt-halving.
        let law = |states: &[FramedState]| -> crate::error::Result<Vec<Controls>> {
            Ok(states
                .iter()
                .map(|s| Controls::new(s.position.y.sin() * 0.5, s.position.x.cos() * 0.5, 0.0))
                .collect())
        };
        let s0 = vec![FramedState::from_heading(Vec3::zeros(), Vec3::x()).unwrap()];
        let t_final = 1.0;
        let reference = integrate(&s0, &law, 1.25e-4, t_final, usize::MAX).unwrap();
        let rf = &reference.last().unwrap().states[0];

        let mut errs = Vec::new();
        for dt in [2e-3, 1e-3] {
            let traj = integrate(&s0, &law, dt, t_final, usize::MAX).unwrap();
            let f = &traj.last().unwrap().states[0];
            errs.push((f.position - rf.position).norm());
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (1.5..3.0).contains(&ratio),
            "expected ~2x error reduction, got {ratio} ({errs:?})"
        );
    }

    #[test]
    fn integrate_zero_law_unit_time() {
        let s0 = vec![FramedState::from_heading(Vec3::zeros(), Vec3::x()).unwrap()];
        let law = |states: &[FramedState]| Ok(vec![Controls::zero(); states.len()]);
        let traj = integrate(&s0, &law, 1e-3, 1.0, 10).unwrap();
        let f = &traj.last().unwrap().states[0];
        assert!((f.position - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(traj.samples.first().unwrap().time, 0.0);
    }

    #[test]
    fn integrate_reports_non_finite_law_with_tick() {
        let s0 = vec![FramedState::from_heading(Vec3::zeros(), Vec3::x()).unwrap()];
        let law = |states: &[FramedState]| {
            let bad = states[0].position.x > 0.005;
            Ok(vec![Controls::new(
                if bad { f64::NAN } else { 0.0 },
                0.0,
                0.0,
            )])
        };
        let err = integrate(&s0, &law, 1e-3, 1.0, 10).unwrap_err();
        match err {
            Error::NonFiniteControl { tick, vehicle } => {
                assert_eq!(vehicle, 0);
                assert!(tick > 0, "failure should occur after the start");
            }
            other => panic!("expected NonFiniteControl, got {other}"),
        }
    }

    #[test]
    fn integrate_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let s0: Vec<_> = (0..3).map(|_| random_state(&mut rng)).collect();
        let law = |states: &[FramedState]| -> crate::error::Result<Vec<Controls>> {
            Ok(states
                .iter()
                .map(|s| Controls::new(0.1 * s.tangent.y, -0.2 * s.tangent.z, 0.0))
                .collect())
        };
        let a = integrate(&s0, &law, 1e-2, 5.0, 10).unwrap();
        let b = integrate(&s0, &law, 1e-2, 5.0, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frame_orthonormality_is_preserved_over_long_runs() {
        // 10^4-step smoke version of the acceptance criterion.
        let law = |states: &[FramedState]| -> crate::error::Result<Vec<Controls>> {
            Ok(states
                .iter()
                .map(|s| Controls::new((2.0 * s.position.y).sin(), (3.0 * s.position.z).cos(), 0.0))
                .collect())
        };
        let s0 = vec![FramedState::from_heading(Vec3::zeros(), Vec3::new(1.0, 0.2, -0.1)).unwrap()];
        let traj = integrate(&s0, &law, 1e-2, 100.0, 100).unwrap();
        let worst = traj
            .samples
            .iter()
            .map(|s| s.states[0].frame_defect())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-11, "frame defect {worst}");
    }

    #[test]
    fn chord_speed_approaches_unity() {
        // |r(t+dt) - r(t)|/dt -> 1 as dt -> 0; for constant controls the
        // chord equals the screw-motion chord exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let s = random_state(&mut rng);
        let c = Controls::new(0.8, -0.5, 0.3);
        let mut prev_gap = f64::INFINITY;
        for dt in [0.4, 0.2, 0.1, 0.05] {
            let chord = (step(&s, &c, dt).position - s.position).norm();
            let screw_chord = c.to_twist().exp(dt).translation.norm();
            assert!((chord - screw_chord).abs() < 1e-15);
            let gap = (chord / dt - 1.0).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-3);
    }

    #[test]
    fn curvature_magnitude_values() {
        assert_eq!(Controls::new(0.0, 0.0, 5.0).curvature_magnitude(), 0.0);
        assert_eq!(Controls::new(3.0, 4.0, 0.0).curvature_magnitude(), 5.0);
    }

    #[test]
    fn curvature_magnitude_constant_along_constant_twist_run() {
        let c = Controls::new(0.7, -0.2, 0.9);
        let s0 = vec![FramedState::from_heading(Vec3::zeros(), Vec3::x()).unwrap()];
        let law = move |_: &[FramedState]| Ok(vec![c]);
        let traj = integrate(&s0, &law, 1e-2, 10.0, 10).unwrap();
        let kappa0 = c.curvature_magnitude();
        for s in &traj.samples {
            assert!((s.controls[0].curvature_magnitude() - kappa0).abs() < 1e-12);
        }
    }
}
