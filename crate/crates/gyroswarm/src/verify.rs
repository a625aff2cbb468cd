//! Sampled verification suites: the inequality kernels, the algebraic
//! identities of the geometry kernel, the representation-equivalence checks,
//! and the symmetry properties of the laws, each evaluated over seeded
//! random draws with a worst-case statistic.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::UnitSphere;

use crate::equilibria::{
    equilibrium_family, gauge_family, is_shape_equilibrium, twist_from_polar, EquilibriumSpec,
};
use crate::frame::{group_to_state, state_to_group, FramedState};
use crate::laws::{group_form_controls, two_vehicle_controls, LawKind, LawParams};
use crate::lie::{hat, rot_x, Twist, Vec3, SE3};
use crate::lyapunov::{
    circ_inequality_vector, circ_log_argument, rect_inequality, rect_inequality_frames,
    rect_inequality_vector, v_circ, v_circ_group, v_rect, v_rect_group, vdot_rect_analytic,
    ShapeTriple,
};

/// Result of one sampled property check. `worst` is oriented so that values
/// at or below `threshold` pass (violations are positive).
#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub name: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl PropertyReport {
    fn new(name: &'static str, samples: usize, worst: f64, threshold: f64) -> Self {
        PropertyReport {
            name,
            samples,
            worst,
            threshold,
            pass: worst <= threshold,
        }
    }
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let v: [f64; 3] = UnitSphere.sample(rng);
    Vec3::new(v[0], v[1], v[2])
}

fn random_shape(rng: &mut ChaCha8Rng) -> ShapeTriple {
    ShapeTriple {
        baseline: unit(rng) * rng.gen_range(0.2..5.0),
        heading1: unit(rng),
        heading2: unit(rng),
    }
}

fn random_state(rng: &mut ChaCha8Rng, box_side: f64) -> FramedState {
    let position = Vec3::new(
        rng.gen_range(-box_side..box_side),
        rng.gen_range(-box_side..box_side),
        rng.gen_range(-box_side..box_side),
    );
    FramedState::from_heading_with_normal(position, unit(rng), unit(rng))
        .unwrap_or_else(|_| FramedState::from_heading(position, unit(rng)).unwrap())
}

/// Pairs sampled in the well-conditioned interior: separations at least
/// 0.25 r0 (r0 = 1 in the suite laws) so the radial term stays O(10).
/// Identities involving the log potentials additionally require the log
/// argument to be at least 1e-2; the potentials are unbounded at their
/// domain boundary, where absolute comparisons measure conditioning rather
/// than correctness.
const POTENTIAL_MARGIN: f64 = 1e-2;

fn random_pair(rng: &mut ChaCha8Rng) -> (FramedState, FramedState) {
    loop {
        let a = random_state(rng, 3.0);
        let b = random_state(rng, 3.0);
        if (a.position - b.position).norm() > 0.25 {
            return (a, b);
        }
    }
}

fn rect_laws() -> [LawParams; 2] {
    [
        LawParams::new(LawKind::Rectilinear, 1.0, 1.0, 0.5, 0.4, -1.0).unwrap(),
        LawParams::new(LawKind::Rectilinear, 1.0, 1.0, 0.5, 0.4, 1.0).unwrap(),
    ]
}

fn circ_laws() -> [LawParams; 2] {
    [
        LawParams::new(LawKind::Circling, 1.0, 1.0, 0.5, 0.4, 1.0).unwrap(),
        LawParams::new(LawKind::Circling, 1.0, 1.0, 0.5, 0.4, -1.0).unwrap(),
    ]
}

/// Rectilinear suite: planar and vector inequality kernels for both signs,
/// the frame/vector-form identity, and nonpositivity of the analytic decay
/// rate.
pub fn rect_suite(seed: u64, samples: usize) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Angle-form kernel, both signs: worst = -min(LHS).
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let phi1 = rng.gen_range(0.0..std::f64::consts::TAU);
        let phi2 = rng.gen_range(0.0..std::f64::consts::TAU);
        for sign in [1.0, -1.0] {
            worst = worst.max(-rect_inequality(phi1, phi2, sign));
        }
    }
    out.push(PropertyReport::new(
        "rect-inequality-angle-form",
        samples,
        worst,
        1e-12,
    ));

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let s = random_shape(&mut rng);
        for sign in [1.0, -1.0] {
            worst = worst.max(-rect_inequality_vector(&s, sign));
        }
    }
    out.push(PropertyReport::new(
        "rect-inequality-vector-form",
        samples,
        worst,
        1e-12,
    ));

    // Frame form vs vector form on full random frames.
    let n = (samples / 10).max(1);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let (a, b) = random_pair(&mut rng);
        let shape = ShapeTriple::from_states(&a, &b);
        for sign in [1.0, -1.0] {
            worst = worst.max(
                (rect_inequality_frames(&a, &b, sign) - rect_inequality_vector(&shape, sign)).abs(),
            );
        }
    }
    out.push(PropertyReport::new(
        "rect-frame-form-equals-vector-form",
        n,
        worst,
        1e-12,
    ));

    // Analytic decay rate nonpositive for both signs.
    let n = (samples / 10).max(1);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..n {
        let (a, b) = random_pair(&mut rng);
        if 1.0 + a.tangent.dot(&b.tangent) < 1e-3 {
            continue;
        }
        for p in rect_laws() {
            worst = worst.max(vdot_rect_analytic(&a, &b, &p).unwrap());
        }
    }
    out.push(PropertyReport::new(
        "rect-vdot-nonpositive",
        n,
        worst,
        1e-12,
    ));

    out
}

/// Circling suite: log-argument nonnegativity and the circling inequality
/// kernel for both signs.
pub fn circ_suite(seed: u64, samples: usize) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        worst = worst.max(-circ_log_argument(&random_shape(&mut rng)));
    }
    out.push(PropertyReport::new(
        "circ-log-argument-nonnegative",
        samples,
        worst,
        1e-12,
    ));

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let s = random_shape(&mut rng);
        for sign in [1.0, -1.0] {
            worst = worst.max(-circ_inequality_vector(&s, sign));
        }
    }
    out.push(PropertyReport::new(
        "circ-inequality-vector-form",
        samples,
        worst,
        1e-12,
    ));

    out
}

/// Algebra suite: kernel identities, equilibrium-family residuals, the
/// group/frame representation equivalences, and the law symmetries.
pub fn algebra_suite(seed: u64, samples: usize) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let random_twist = |rng: &mut ChaCha8Rng| {
        Twist::new(
            Vec3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ),
            Vec3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ),
        )
    };

    // hat is skew and realizes the cross product.
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let g = unit(&mut rng) * rng.gen_range(0.0..5.0);
        let v = unit(&mut rng) * rng.gen_range(0.0..5.0);
        let m = hat(&g);
        worst = worst.max((m + m.transpose()).norm());
        worst = worst.max((m * v - g.cross(&v)).norm());
    }
    out.push(PropertyReport::new("hat-skew-cross", samples, worst, 1e-13));

    // One-parameter subgroup property of the exponential.
    let n = (samples / 10).max(1);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let xi = random_twist(&mut rng);
        let (s, t) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        worst = worst.max(xi.exp(s + t).distance(&xi.exp(s).compose(&xi.exp(t))));
    }
    out.push(PropertyReport::new(
        "exp-one-parameter-subgroup",
        n,
        worst,
        1e-12,
    ));

    // Adjoint of a composition.
    let mut worst = 0.0f64;
    for _ in 0..n {
        let a = random_twist(&mut rng).exp(1.0);
        let b = random_twist(&mut rng).exp(1.0);
        let xi = random_twist(&mut rng);
        let lhs = a.compose(&b).adjoint(&xi);
        let rhs = a.adjoint(&b.adjoint(&xi));
        worst = worst.max((lhs.omega - rhs.omega).norm() + (lhs.linear - rhs.linear).norm());
    }
    out.push(PropertyReport::new("adjoint-composition", n, worst, 1e-12));

    // Equilibrium family: construction residual and block identities.
    let n = 1000;
    let mut worst_res = 0.0f64;
    let mut worst_ident = 0.0f64;
    for _ in 0..n {
        let spec = loop {
            let s = EquilibriumSpec {
                w: rng.gen_range(-2.0..2.0),
                a: rng.gen_range(0.0..2.0),
                psi1: rng.gen_range(0.0..std::f64::consts::TAU),
                psi2: rng.gen_range(0.0..std::f64::consts::TAU),
                theta: rng.gen_range(0.0..std::f64::consts::TAU),
                b3: rng.gen_range(-3.0..3.0),
            };
            if s.a * s.a + s.w * s.w > 0.1 {
                break s;
            }
        };
        let g = equilibrium_family(&spec).unwrap();
        let xi1 = twist_from_polar(spec.w, spec.a, spec.psi1);
        let xi2 = twist_from_polar(spec.w, spec.a, spec.psi2);
        let (_, res) = is_shape_equilibrium(&g, &xi1, &xi2, 1e-12);
        worst_res = worst_res.max(res);
        worst_ident = worst_ident.max((xi1.omega - g.rotation * xi2.omega).norm());
        worst_ident = worst_ident
            .max((g.rotation * Vec3::x() - (hat(&xi1.omega) * g.translation + Vec3::x())).norm());
        // Gauge family reproduces the full factorization.
        let g_tilde = equilibrium_family(&EquilibriumSpec {
            psi1: 0.0,
            psi2: 0.0,
            ..spec
        })
        .unwrap();
        worst_ident = worst_ident.max(gauge_family(&g_tilde, spec.psi1, spec.psi2).distance(&g));
    }
    out.push(PropertyReport::new(
        "equilibrium-family-residual",
        n,
        worst_res,
        1e-12,
    ));
    out.push(PropertyReport::new(
        "equilibrium-block-identities",
        n,
        worst_ident,
        1e-12,
    ));

    // Group-form controls match frame-form controls; group-form potentials
    // match frame-form potentials.
    let n = (samples / 10).max(1);
    let mut worst_ctrl = 0.0f64;
    let mut worst_pot = 0.0f64;
    for _ in 0..n {
        let (a, b) = random_pair(&mut rng);
        let g1 = state_to_group(&a).unwrap();
        let g2 = state_to_group(&b).unwrap();
        let g = g1.inverse().compose(&g2);
        let shape = ShapeTriple::from_states(&a, &b);
        for p in rect_laws().iter().chain(circ_laws().iter()) {
            let (c1, c2) = two_vehicle_controls(&a, &b, p).unwrap();
            let (d1, d2) = group_form_controls(&g1, &g2, p).unwrap();
            worst_ctrl = worst_ctrl
                .max((c1.u - d1.u).abs())
                .max((c1.v - d1.v).abs())
                .max((c2.u - d2.u).abs())
                .max((c2.v - d2.v).abs());
        }
        if 1.0 + shape.heading1.dot(&shape.heading2) > POTENTIAL_MARGIN {
            let vf = v_rect(&shape, &rect_laws()[0]).unwrap();
            let vg = v_rect_group(&g, &rect_laws()[0]).unwrap();
            worst_pot = worst_pot.max((vf - vg).abs());
        }
        if circ_log_argument(&shape) > POTENTIAL_MARGIN {
            let vf = v_circ(&shape, &circ_laws()[0]).unwrap();
            let vg = v_circ_group(&g, &circ_laws()[0]).unwrap();
            worst_pot = worst_pot.max((vf - vg).abs());
        }
    }
    out.push(PropertyReport::new(
        "group-form-controls-equivalence",
        n,
        worst_ctrl,
        1e-12,
    ));
    out.push(PropertyReport::new(
        "group-form-potentials-equivalence",
        n,
        worst_pot,
        1e-12,
    ));

    // Symmetries: relabeling, normal-pair rotation covariance, common rigid
    // motion invariance of controls and potentials.
    let mut worst_sym = 0.0f64;
    for _ in 0..n {
        let (a, b) = random_pair(&mut rng);
        for p in rect_laws().iter().chain(circ_laws().iter()) {
            let (c1, c2) = two_vehicle_controls(&a, &b, p).unwrap();
            let (d2, d1) = two_vehicle_controls(&b, &a, p).unwrap();
            worst_sym = worst_sym
                .max((c1.u - d1.u).abs())
                .max((c1.v - d1.v).abs())
                .max((c2.u - d2.u).abs())
                .max((c2.v - d2.v).abs());

            // v-law is the u-law of the rotated normal pair.
            let rotated = FramedState::new(a.position, a.tangent, a.normal2, -a.normal1).unwrap();
            let (c1r, _) = two_vehicle_controls(&rotated, &b, p).unwrap();
            worst_sym = worst_sym
                .max((c1r.u - c1.v).abs())
                .max((c1r.v + c1.u).abs());

            // Common rigid motion.
            let motion = Twist::new(unit(&mut rng) * 2.0, unit(&mut rng) * 3.0).exp(1.0);
            let moved =
                |s: &FramedState| group_to_state(&motion.compose(&state_to_group(s).unwrap()));
            let (m1, m2) = two_vehicle_controls(&moved(&a), &moved(&b), p).unwrap();
            worst_sym = worst_sym
                .max((c1.u - m1.u).abs())
                .max((c1.v - m1.v).abs())
                .max((c2.u - m2.u).abs())
                .max((c2.v - m2.v).abs());

            // Gauge covariance: the steering vector is gauge-invariant.
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let g1 = state_to_group(&a).unwrap();
            let gauged = group_to_state(&SE3 {
                rotation: g1.rotation * rot_x(angle),
                translation: g1.translation,
            });
            let (c1g, _) = two_vehicle_controls(&gauged, &b, p).unwrap();
            let steer = a.normal1 * c1.u + a.normal2 * c1.v;
            let steer_gauged = gauged.normal1 * c1g.u + gauged.normal2 * c1g.v;
            worst_sym = worst_sym.max((steer - steer_gauged).norm());
        }

        // Lyapunov invariance under common rigid motion (interior samples).
        let motion = Twist::new(unit(&mut rng) * 2.0, unit(&mut rng) * 3.0).exp(1.0);
        let moved = |s: &FramedState| group_to_state(&motion.compose(&state_to_group(s).unwrap()));
        let before = ShapeTriple::from_states(&a, &b);
        let after = ShapeTriple::from_states(&moved(&a), &moved(&b));
        if 1.0 + before.heading1.dot(&before.heading2) > POTENTIAL_MARGIN {
            let x = v_rect(&before, &rect_laws()[0]).unwrap();
            let y = v_rect(&after, &rect_laws()[0]).unwrap();
            worst_sym = worst_sym.max((x - y).abs());
        }
        if circ_log_argument(&before).min(circ_log_argument(&after)) > POTENTIAL_MARGIN {
            let x = v_circ(&before, &circ_laws()[0]).unwrap();
            let y = v_circ(&after, &circ_laws()[0]).unwrap();
            worst_sym = worst_sym.max((x - y).abs());
        }
    }
    out.push(PropertyReport::new(
        "law-and-potential-symmetries",
        n,
        worst_sym,
        1e-12,
    ));

    out
}

/// Every suite, concatenated: rect, circ, algebra.
pub fn all_suites(seed: u64, samples: usize) -> Vec<PropertyReport> {
    let mut out = rect_suite(seed, samples);
    out.extend(circ_suite(seed.wrapping_add(1), samples));
    out.extend(algebra_suite(seed.wrapping_add(2), samples));
    out
}
