//! Gyroscopically steered unit-speed particles in three dimensions.
//!
//! Vehicles are modeled as unit-speed points carrying a natural frame;
//! steering laws act through curvature controls that can change heading but
//! never speed. The crate provides:
//!
//! - [`lie`]: the SO(3)/SE(3) kernel (hat map, composition, adjoint,
//!   closed-form exponential, elementary rotation factors);
//! - [`frame`]: framed particle states and an exponential integrator that
//!   preserves frame orthonormality by construction;
//! - [`laws`]: the two-vehicle rectilinear and circling steering laws, their
//!   n-vehicle average, and the equivalent group-variable form;
//! - [`lyapunov`]: the alignment potentials, the analytic decay rate of the
//!   rectilinear law, and the inequality kernels behind nonpositivity;
//! - [`equilibria`]: shape-space reduction, the closed-form relative
//!   equilibrium family, formation classification, and helix geometry;
//! - [`harness`]: scenario orchestration with Lyapunov/separation monitors,
//!   terminal classification, and parameter sweeps;
//! - [`fit`]: circle and screw-axis fitting for trajectory verification;
//! - [`verify`]: seeded sampled property suites;
//! - [`config`]/[`output`]: the TOML scenario format and CSV/JSON/SVG
//!   writers.

pub mod config;
pub mod equilibria;
pub mod error;
pub mod fit;
pub mod frame;
pub mod harness;
pub mod laws;
pub mod lie;
pub mod lyapunov;
pub mod output;
pub mod verify;

pub use error::{Error, Result};
pub use lie::{Mat3, Vec3};
