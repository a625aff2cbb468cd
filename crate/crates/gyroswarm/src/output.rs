//! Trajectory and report serialization: CSV, JSON, and SVG projection
//! plots. All outputs are deterministic byte-for-byte for a fixed run.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::Plane;
use crate::error::{Error, Result};
use crate::frame::Trajectory;
use crate::harness::RunReport;
use crate::lie::Vec3;

/// Lossless float formatting: 17 significant decimal digits.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one row per vehicle per sample with the schema
/// `t,id,rx,ry,rz,xx,xy,xz,yx,yy,yz,zx,zy,zz,u,v,w`.
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut text = String::new();
    text.push_str("t,id,rx,ry,rz,xx,xy,xz,yx,yy,yz,zx,zy,zz,u,v,w\n");
    for sample in &traj.samples {
        for (id, (state, controls)) in sample.states.iter().zip(&sample.controls).enumerate() {
            let mut fields = Vec::with_capacity(17);
            fields.push(fmt_f64(sample.time));
            fields.push(id.to_string());
            for v in [
                &state.position,
                &state.tangent,
                &state.normal1,
                &state.normal2,
            ] {
                fields.push(fmt_f64(v.x));
                fields.push(fmt_f64(v.y));
                fields.push(fmt_f64(v.z));
            }
            fields.push(fmt_f64(controls.u));
            fields.push(fmt_f64(controls.v));
            fields.push(fmt_f64(controls.w));
            text.push_str(&fields.join(","));
            text.push('\n');
        }
    }
    write_file(path, text.as_bytes())
}

/// Writes the report as a flat JSON object with the field order of
/// [`RunReport`].
pub fn write_report_json(report: &RunReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Reads a report back; inverse of [`write_report_json`].
pub fn read_report_json(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("report parse failed: {e}")))
}

const CANVAS: f64 = 800.0;
const MARGIN_FRACTION: f64 = 0.05;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Orthographic projection plot: one polyline per vehicle with an arrowhead
/// at the final position pointing along the projected final heading. The
/// view is the plane perpendicular to the chosen normal; the canvas is
/// 800x800 with computed bounds plus a 5% margin, uniform scale.
pub fn plot_svg(traj: &Trajectory, plane: &Plane, path: &Path) -> Result<()> {
    if traj.samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let (p_axis, q_axis) = view_basis(plane)?;
    let project = |v: &Vec3| (v.dot(&p_axis), v.dot(&q_axis));

    let n = traj.vehicle_count();
    let mut tracks: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(traj.samples.len()); n];
    for sample in &traj.samples {
        for (id, state) in sample.states.iter().enumerate() {
            tracks[id].push(project(&state.position));
        }
    }

    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for track in &tracks {
        for &(x, y) in track {
            min.0 = min.0.min(x);
            min.1 = min.1.min(y);
            max.0 = max.0.max(x);
            max.1 = max.1.max(y);
        }
    }
    let span = (max.0 - min.0).max(max.1 - min.1).max(1e-9);
    let margin = span * MARGIN_FRACTION;
    let scale = CANVAS / (span + 2.0 * margin);
    let center = ((min.0 + max.0) / 2.0, (min.1 + max.1) / 2.0);
    // Center the data, flip y so the vertical axis points up.
    let to_screen = |(x, y): (f64, f64)| {
        (
            CANVAS / 2.0 + (x - center.0) * scale,
            CANVAS / 2.0 - (y - center.1) * scale,
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CANVAS}\" height=\"{CANVAS}\" viewBox=\"0 0 {CANVAS} {CANVAS}\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{CANVAS}\" height=\"{CANVAS}\" fill=\"white\"/>"
    );

    for (id, track) in tracks.iter().enumerate() {
        let color = PALETTE[id % PALETTE.len()];
        let mut points = String::new();
        for &p in track {
            let (sx, sy) = to_screen(p);
            let _ = write!(points, "{sx:.3},{sy:.3} ");
        }
        let _ = writeln!(
            svg,
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.trim_end()
        );
    }

    // Final-heading arrowheads.
    let last = traj.samples.last().expect("checked nonempty");
    for (id, state) in last.states.iter().enumerate() {
        let color = PALETTE[id % PALETTE.len()];
        let tip2d = project(&state.tangent);
        let len = (tip2d.0 * tip2d.0 + tip2d.1 * tip2d.1).sqrt();
        if len < 1e-9 {
            continue; // heading perpendicular to the view plane
        }
        let dir = (tip2d.0 / len, -tip2d.1 / len); // screen coordinates
        let (px, py) = to_screen(project(&state.position));
        let size = 12.0;
        let tip = (px + dir.0 * size, py + dir.1 * size);
        let left = (px - dir.1 * size * 0.35, py + dir.0 * size * 0.35);
        let right = (px + dir.1 * size * 0.35, py - dir.0 * size * 0.35);
        let _ = writeln!(
            svg,
            "  <polygon fill=\"{color}\" points=\"{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}\"/>",
            tip.0, tip.1, left.0, left.1, right.0, right.1
        );
    }

    svg.push_str("</svg>\n");
    write_file(path, svg.as_bytes())
}

/// Orthonormal in-plane axes for a view normal, deterministic in the input.
fn view_basis(plane: &Plane) -> Result<(Vec3, Vec3)> {
    match plane {
        Plane::Xy => Ok((Vec3::x(), Vec3::y())),
        Plane::Xz => Ok((Vec3::x(), Vec3::z())),
        Plane::Yz => Ok((Vec3::y(), Vec3::z())),
        Plane::Normal(n) => {
            let normal = n
                .try_normalize(1e-9)
                .ok_or_else(|| Error::InvalidParams("view normal must be nonzero".into()))?;
            let seed = if normal.x.abs() < 0.9 {
                Vec3::x()
            } else {
                Vec3::y()
            };
            let p = (seed - normal * normal.dot(&seed)).normalize();
            Ok((p, normal.cross(&p)))
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
