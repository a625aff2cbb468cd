//! Feedback steering laws: the radial interaction `f` and its potentials,
//! the heading-alignment couplings for the rectilinear and circling laws,
//! the two-vehicle law, its n-vehicle average, and the equivalent
//! group-variable form.
//!
//! All laws depend only on the shape of the formation (relative positions
//! and headings), never on absolute pose; the unit tests pin that invariance
//! down.

use crate::error::{Error, Result};
use crate::frame::{Controls, FramedState};
use crate::lie::{Vec3, SE3};

/// Separations below this are treated as coincident vehicles.
pub const COLLISION_EPS: f64 = 1e-9;

/// Which steering law is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    /// Align headings; stabilizes rectilinear formations.
    Rectilinear,
    /// Anti-align headings across the baseline; stabilizes circling.
    Circling,
    /// No steering (free straight-line flight).
    None,
}

/// Gains and geometry of the interaction law.
///
/// `sign` selects the open +/- branch of the baseline-coupling term; both
/// branches keep the Lyapunov rate nonpositive, but they favor different
/// elements of the invariant set. Measured over random starts: under the
/// rectilinear law, -1 settles into leader-follower motion and +1 into the
/// perpendicular-baseline formation; under the circling law, -1 settles
/// onto the circling diameter while +1 sends most runs to leader-follower
/// motion. The default is -1 for both laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawParams {
    pub kind: LawKind,
    /// Radial gain (must be positive).
    pub alpha: f64,
    /// Preferred separation scale in meters (must be positive).
    pub r0: f64,
    /// Heading-alignment gain.
    pub mu: f64,
    /// Baseline-coupling gain; requires mu > eta/2 > 0.
    pub eta: f64,
    /// +1 or -1, the branch of the baseline-coupling term.
    pub sign: f64,
}

impl LawParams {
    pub fn new(kind: LawKind, alpha: f64, r0: f64, mu: f64, eta: f64, sign: f64) -> Result<Self> {
        let p = LawParams {
            kind,
            alpha,
            r0,
            mu,
            eta,
            sign,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn rectilinear(alpha: f64, r0: f64, mu: f64, eta: f64) -> Result<Self> {
        Self::new(LawKind::Rectilinear, alpha, r0, mu, eta, -1.0)
    }

    pub fn circling(alpha: f64, r0: f64, mu: f64, eta: f64) -> Result<Self> {
        Self::new(LawKind::Circling, alpha, r0, mu, eta, -1.0)
    }

    /// Placeholder parameters for uncontrolled runs.
    pub fn none() -> Self {
        LawParams {
            kind: LawKind::None,
            alpha: 1.0,
            r0: 1.0,
            mu: 0.5,
            eta: 0.4,
            sign: -1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("r0", self.r0),
            ("mu", self.mu),
            ("eta", self.eta),
            ("sign", self.sign),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.kind == LawKind::None {
            return Ok(());
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParams("alpha must be positive".into()));
        }
        if self.r0 <= 0.0 {
            return Err(Error::InvalidParams("r0 must be positive".into()));
        }
        if !(self.mu > 0.5 * self.eta && 0.5 * self.eta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "A4 violated: need mu > eta/2 > 0, got mu = {}, eta = {}",
                self.mu, self.eta
            )));
        }
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(Error::InvalidParams("sign must be +1 or -1".into()));
        }
        Ok(())
    }
}

/// Radial interaction `f(rho) = alpha (1 - (r0/rho)^2)`: negative below r0
/// (steers the vehicles apart), zero at r0, approaching alpha from below at
/// large separations.
pub fn f_interaction(rho: f64, p: &LawParams) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!(
            "f is defined on (0, inf); got rho = {rho}"
        )));
    }
    let q = p.r0 / rho;
    Ok(p.alpha * (1.0 - q * q))
}

/// Separation at which the circling balance `f(rho) = 2/rho` holds; the
/// circling potential attains its minimum here.
fn circling_rest_separation(alpha: f64, r0: f64) -> f64 {
    (1.0 + (1.0 + alpha * alpha * r0 * r0).sqrt()) / alpha
}

/// Separation potential for the requested law kind, normalized so its
/// minimum value is zero.
///
/// Rectilinear: the antiderivative of `f`, `alpha (rho + r0^2/rho - 2 r0)`,
/// which vanishes at rho = r0. Circling: the antiderivative of `f - 2/rho`,
/// shifted so it vanishes at its minimizer (the circling rest separation).
/// Both blow up as rho -> 0 and rho -> inf.
pub fn h_potential(rho: f64, p: &LawParams, kind: LawKind) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!(
            "h is defined on (0, inf); got rho = {rho}"
        )));
    }
    match kind {
        LawKind::Rectilinear | LawKind::None => {
            Ok(p.alpha * (rho + p.r0 * p.r0 / rho - 2.0 * p.r0))
        }
        LawKind::Circling => {
            let raw = |x: f64| p.alpha * (x + p.r0 * p.r0 / x) - 2.0 * x.ln();
            let rho_min = circling_rest_separation(p.alpha, p.r0);
            Ok(raw(rho) - raw(rho_min))
        }
    }
}

fn check_unit(name: &str, v: &Vec3) -> Result<()> {
    if (v.norm_squared() - 1.0).abs() > 2e-6 {
        return Err(Error::InvalidParams(format!(
            "{name} must be a unit vector (|v| = {})",
            v.norm()
        )));
    }
    Ok(())
}

/// Rectilinear alignment coupling:
/// `sign * (-eta) (r.x_self)(r.n_self) + mu (x_other . n_self)`,
/// where `r` is the unit vector from the other vehicle to this one and
/// `n_self` is one of this vehicle's normals.
pub fn align_rect(
    r_unit: &Vec3,
    x_self: &Vec3,
    n_self: &Vec3,
    x_other: &Vec3,
    p: &LawParams,
) -> Result<f64> {
    check_unit("r_unit", r_unit)?;
    check_unit("x_self", x_self)?;
    check_unit("n_self", n_self)?;
    check_unit("x_other", x_other)?;
    Ok(align_rect_raw(r_unit, x_self, n_self, x_other, p))
}

#[inline]
pub(crate) fn align_rect_raw(
    r_unit: &Vec3,
    x_self: &Vec3,
    n_self: &Vec3,
    x_other: &Vec3,
    p: &LawParams,
) -> f64 {
    p.sign * (-p.eta) * r_unit.dot(x_self) * r_unit.dot(n_self) + p.mu * x_other.dot(n_self)
}

/// Circling alignment coupling:
/// `sign * eta (r.x_self)(r.n_self)
///  + mu [ -(x_other . n_self) + 2 (r.x_other)(r.n_self) ]`.
pub fn align_circ(
    r_unit: &Vec3,
    x_self: &Vec3,
    n_self: &Vec3,
    x_other: &Vec3,
    p: &LawParams,
) -> Result<f64> {
    check_unit("r_unit", r_unit)?;
    check_unit("x_self", x_self)?;
    check_unit("n_self", n_self)?;
    check_unit("x_other", x_other)?;
    Ok(align_circ_raw(r_unit, x_self, n_self, x_other, p))
}

#[inline]
pub(crate) fn align_circ_raw(
    r_unit: &Vec3,
    x_self: &Vec3,
    n_self: &Vec3,
    x_other: &Vec3,
    p: &LawParams,
) -> f64 {
    p.sign * p.eta * r_unit.dot(x_self) * r_unit.dot(n_self)
        + p.mu * (-x_other.dot(n_self) + 2.0 * r_unit.dot(x_other) * r_unit.dot(n_self))
}

/// Steering controls one vehicle applies due to one neighbor. `r_unit` must
/// point from the neighbor toward this vehicle and `dist` is the separation.
fn pairwise_controls(
    me: &FramedState,
    other: &FramedState,
    r_unit: &Vec3,
    dist: f64,
    p: &LawParams,
) -> Result<Controls> {
    if p.kind == LawKind::None {
        return Ok(Controls::zero());
    }
    let f = f_interaction(dist, p)?;
    let (au, av) = match p.kind {
        LawKind::Rectilinear => (
            align_rect_raw(r_unit, &me.tangent, &me.normal1, &other.tangent, p),
            align_rect_raw(r_unit, &me.tangent, &me.normal2, &other.tangent, p),
        ),
        LawKind::Circling => (
            align_circ_raw(r_unit, &me.tangent, &me.normal1, &other.tangent, p),
            align_circ_raw(r_unit, &me.tangent, &me.normal2, &other.tangent, p),
        ),
        LawKind::None => unreachable!(),
    };
    Ok(Controls::new(
        au - f * r_unit.dot(&me.normal1),
        av - f * r_unit.dot(&me.normal2),
        0.0,
    ))
}

/// The two-vehicle steering law. Returns the control triples for both
/// vehicles; the twist components are zero (natural-frame mode).
pub fn two_vehicle_controls(
    s1: &FramedState,
    s2: &FramedState,
    p: &LawParams,
) -> Result<(Controls, Controls)> {
    let d = s1.position - s2.position;
    let dist = d.norm();
    if dist < COLLISION_EPS {
        return Err(Error::Collision {
            i: 0,
            j: 1,
            sep: dist,
        });
    }
    let to_first = d / dist;
    let c1 = pairwise_controls(s1, s2, &to_first, dist, p)?;
    let c2 = pairwise_controls(s2, s1, &(-to_first), dist, p)?;
    Ok((c1, c2))
}

/// The n-vehicle law: each vehicle applies the average (1/n prefactor) of
/// its pairwise interaction terms with every other vehicle.
pub fn n_vehicle_controls(states: &[FramedState], p: &LawParams) -> Result<Vec<Controls>> {
    let n = states.len();
    if n < 2 {
        return Err(Error::InvalidParams(
            "the multi-vehicle law needs at least two vehicles".into(),
        ));
    }
    let scale = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n);
    for (j, me) in states.iter().enumerate() {
        let mut u = 0.0;
        let mut v = 0.0;
        for (k, other) in states.iter().enumerate() {
            if k == j {
                continue;
            }
            let d = me.position - other.position;
            let dist = d.norm();
            if dist < COLLISION_EPS {
                return Err(Error::Collision {
                    i: j.min(k),
                    j: j.max(k),
                    sep: dist,
                });
            }
            let c = pairwise_controls(me, other, &(d / dist), dist, p)?;
            u += c.u;
            v += c.v;
        }
        out.push(Controls::new(scale * u, scale * v, 0.0));
    }
    Ok(out)
}

/// The two-vehicle law evaluated from the group elements alone, using the
/// entries of the relative pose g = g1^-1 g2 and of its inverse. Must agree
/// with [`two_vehicle_controls`] on the corresponding framed states.
pub fn group_form_controls(g1: &SE3, g2: &SE3, p: &LawParams) -> Result<(Controls, Controls)> {
    if p.kind == LawKind::None {
        return Ok((Controls::zero(), Controls::zero()));
    }
    let g = g1.inverse().compose(g2);
    let ginv = g.inverse();
    let r = g.translation.norm();
    if r < COLLISION_EPS {
        return Err(Error::Collision { i: 0, j: 1, sep: r });
    }
    let f = f_interaction(r, p)?;

    // One vehicle's (u, v) from the entries of the relative pose seen from
    // its own frame: translation column b, heading column Q e1. In that frame
    // the unit vector from the neighbor to this vehicle is -b/r.
    let from_entries = |q: &SE3| -> Controls {
        let b = q.translation;
        let (b1, b2, b3) = (b.x / r, b.y / r, b.z / r);
        let (u, v) = match p.kind {
            LawKind::Rectilinear => (
                p.sign * (-p.eta) * b1 * b2 + p.mu * q.rotation[(1, 0)] + f * b2,
                p.sign * (-p.eta) * b1 * b3 + p.mu * q.rotation[(2, 0)] + f * b3,
            ),
            LawKind::Circling => {
                let other_heading = q.rotation.column(0).into_owned();
                let along = -b.dot(&other_heading) / r;
                (
                    p.sign * p.eta * b1 * b2
                        + p.mu * (-q.rotation[(1, 0)] + 2.0 * along * (-b2))
                        + f * b2,
                    p.sign * p.eta * b1 * b3
                        + p.mu * (-q.rotation[(2, 0)] + 2.0 * along * (-b3))
                        + f * b3,
                )
            }
            LawKind::None => unreachable!(),
        };
        Controls::new(u, v, 0.0)
    };

    Ok((from_entries(&g), from_entries(&ginv)))
}
