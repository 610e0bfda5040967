//! Hand-written SVG: the Pareto scatter and per-waypoint mechanism/torque views.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use wirearr::geometry::Point3;
use wirearr::mechanism::{
    anchor_world_positions, link_segments, moving_disc_point, muscle_jacobian, DesignParams, JointAngles, JointAxis,
};
use wirearr::moo::Sample;
use wirearr::objectives::Evaluation;
use wirearr::torque_space::{build_hull, inscribed_radius, inscribed_radius_about, project_to_torque, tension_vertices};

use crate::config::ExperimentConfig;

const PANEL: f64 = 300.0;
const MARGIN: f64 = 30.0;
const RIM_STEPS: usize = 72;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Maps a world-space box onto a square pixel panel with `y` pointing up.
#[derive(Debug, Clone, Copy)]
struct Frame {
    left: f64,
    top: f64,
    center: [f64; 2],
    scale: f64,
}

impl Frame {
    fn fit(left: f64, top: f64, lo: [f64; 2], hi: [f64; 2]) -> Self {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        Self {
            left,
            top,
            center: [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0],
            scale: (PANEL - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (
            self.left + PANEL / 2.0 + (p[0] - self.center[0]) * self.scale,
            self.top + PANEL / 2.0 - (p[1] - self.center[1]) * self.scale,
        )
    }
}

fn bounds(points: impl IntoIterator<Item = [f64; 2]>) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if !lo[0].is_finite() {
        return ([-1.0; 2], [1.0; 2]);
    }
    (lo, hi)
}

fn header(out: &mut String, width: f64, height: f64) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
}

fn text(out: &mut String, x: f64, y: f64, size: f64, body: &str) {
    writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="{size:.0}">{body}</text>"#).unwrap();
}

fn polyline(out: &mut String, frame: &Frame, pts: &[[f64; 2]], style: &str, closed: bool) {
    let coords: Vec<String> = pts
        .iter()
        .map(|&p| {
            let (x, y) = frame.map(p);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let tag = if closed { "polygon" } else { "polyline" };
    writeln!(out, r#"<{tag} points="{}" {style}/>"#, coords.join(" ")).unwrap();
}

fn dot(out: &mut String, frame: &Frame, p: [f64; 2], r: f64, fill: &str) {
    let (x, y) = frame.map(p);
    writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r:.1}" fill="{fill}"/>"#).unwrap();
}

fn panel_box(out: &mut String, left: f64, top: f64, title: &str) {
    writeln!(
        out,
        r##"<rect x="{left:.0}" y="{top:.0}" width="{PANEL:.0}" height="{PANEL:.0}" fill="none" stroke="#bbbbbb"/>"##
    )
    .unwrap();
    text(out, left + 6.0, top + 16.0, 12.0, title);
}

/// `E_cross` against `log E_torque` for every sample, shaded light to dark by
/// generation, with archive entries outlined.
pub fn pareto_scatter(samples: &[Sample<Evaluation>], archive: &[Sample<Evaluation>], generations: usize) -> String {
    let (w, h) = (640.0, 480.0);
    let (x0, x1, y0, y1) = (70.0, w - 20.0, 30.0, h - 50.0);
    let xs = samples.iter().map(|s| s.payload.log_e_torque);
    let (lx, hx) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let ymax = samples.iter().map(|s| s.payload.e_cross).max().unwrap_or(0) as f64;
    let (lx, hx) = if lx.is_finite() && hx > lx { (lx, hx) } else { (lx.min(0.0) - 1.0, hx.max(0.0) + 1.0) };
    let ymax = ymax.max(1.0);
    let px = |v: f64| x0 + (v - lx) / (hx - lx) * (x1 - x0);
    let py = |v: f64| y1 - v / ymax * (y1 - y0);

    let mut out = String::new();
    header(&mut out, w, h);
    writeln!(
        out,
        r#"<rect x="{x0:.0}" y="{y0:.0}" width="{:.0}" height="{:.0}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    )
    .unwrap();
    text(&mut out, (x0 + x1) / 2.0 - 40.0, h - 12.0, 14.0, "log E_torque");
    writeln!(
        out,
        r#"<text x="0" y="0" transform="translate(24 {:.1}) rotate(-90)" font-family="sans-serif" font-size="14">E_cross</text>"#,
        (y0 + y1) / 2.0 + 24.0
    )
    .unwrap();
    text(&mut out, x0 - 4.0, y1 + 18.0, 11.0, &format!("{lx:.2}"));
    text(&mut out, x1 - 40.0, y1 + 18.0, 11.0, &format!("{hx:.2}"));
    text(&mut out, x0 - 30.0, y0 + 4.0, 11.0, &format!("{ymax:.0}"));
    text(&mut out, x0 - 16.0, y1 + 4.0, 11.0, "0");

    let last = generations.max(2) - 1;
    for s in samples {
        let t = (s.generation.saturating_sub(1)) as f64 / last as f64;
        let shade = (220.0 - 200.0 * t.clamp(0.0, 1.0)).round() as u8;
        writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="rgb({shade},{shade},255)"/>"#,
            px(s.payload.log_e_torque),
            py(s.payload.e_cross as f64)
        )
        .unwrap();
    }
    for s in archive {
        writeln!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="5" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
            px(s.payload.log_e_torque),
            py(s.payload.e_cross as f64)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Inscribed circle drawn in a torque panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Draws the torque panel body (hull outline, projected vertices, inscribed circle)
/// into `out` at the given panel origin.
fn torque_panel(out: &mut String, left: f64, top: f64, title: &str, points: &[[f64; 2]], hull: &[[f64; 2]], circle: Option<Circle>) {
    panel_box(out, left, top, title);
    let mut extent: Vec<[f64; 2]> = points.to_vec();
    extent.push([0.0, 0.0]);
    if let Some(c) = circle {
        extent.push([c.center[0] - c.radius, c.center[1] - c.radius]);
        extent.push([c.center[0] + c.radius, c.center[1] + c.radius]);
    }
    let (lo, hi) = bounds(extent);
    let frame = Frame::fit(left, top, lo, hi);

    let (ax0, ay) = frame.map([lo[0], 0.0]);
    let (ax1, _) = frame.map([hi[0], 0.0]);
    let (ax, ay0) = frame.map([0.0, lo[1]]);
    let (_, ay1) = frame.map([0.0, hi[1]]);
    writeln!(out, r##"<line x1="{ax0:.3}" y1="{ay:.3}" x2="{ax1:.3}" y2="{ay:.3}" stroke="#999999"/>"##).unwrap();
    writeln!(out, r##"<line x1="{ax:.3}" y1="{ay0:.3}" x2="{ax:.3}" y2="{ay1:.3}" stroke="#999999"/>"##).unwrap();

    if hull.len() >= 2 {
        polyline(out, &frame, hull, r##"fill="#1f77b4" fill-opacity="0.15" stroke="#1f77b4" stroke-width="1.5""##, true);
    }
    for &p in points {
        dot(out, &frame, p, 1.5, "#1f77b4");
    }
    if let Some(c) = circle {
        let (cx, cy) = frame.map(c.center);
        writeln!(
            out,
            r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
            c.radius * frame.scale
        )
        .unwrap();
    }
}

/// 2D convex hull, counter-clockwise, by monotone chain.
fn hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Standalone torque polygon: hull of `points` plus an optional inscribed circle.
pub fn torque_polygon_svg(points: &[[f64; 2]], circle: Option<Circle>) -> String {
    let mut out = String::new();
    header(&mut out, PANEL, PANEL);
    torque_panel(&mut out, 0.0, 0.0, "torque", points, &hull_2d(points), circle);
    out.push_str("</svg>\n");
    out
}

fn rim(point_at: impl Fn(f64) -> Point3) -> Vec<Point3> {
    (0..=RIM_STEPS)
        .map(|i| point_at(i as f64 / RIM_STEPS as f64 * std::f64::consts::TAU))
        .collect()
}

type Projection = fn(Point3) -> [f64; 2];

/// Side (x-z) and top (x-y) projections of the wires and links at `q`, next to the
/// torque polygon. For three joints the torque panel shows roll against yaw.
pub fn waypoint_view(cfg: &ExperimentConfig, design: &DesignParams, q: &JointAngles, number: usize) -> Result<String> {
    let mech = &cfg.mechanism;
    design.check(mech).context("design does not match the mechanism")?;
    let r = mech.disc_radius;
    let paths = anchor_world_positions(mech, design, q);
    let links = link_segments(mech, q);
    let base_rim = rim(|t| Point3::new(r * t.cos(), r * t.sin(), 0.0));
    let moving_rim = rim(|t| moving_disc_point(mech, q, [r * t.cos(), r * t.sin()]));

    let g = muscle_jacobian(mech, design, q);
    let tau: Vec<Vec<f64>> = tension_vertices(mech.wire_count, cfg.settings.bounds)?
        .iter()
        .map(|f| project_to_torque(&g, f))
        .collect();
    let hull = build_hull(&tau);
    let score = match (&hull, &cfg.settings.sphere_center) {
        (Ok(h), Some(c)) if c.len() == h.dimension => inscribed_radius_about(h, c, cfg.settings.r_min),
        _ => inscribed_radius(&hull, cfg.settings.r_min),
    };
    let axes: Vec<usize> = match mech.joints.len() {
        2 => vec![0, 1],
        _ => {
            let roll = mech.joints.iter().position(|&a| a == JointAxis::Roll).unwrap_or(0);
            let yaw = mech.joints.iter().position(|&a| a == JointAxis::Yaw).unwrap_or(mech.joints.len() - 1);
            vec![roll, yaw]
        }
    };
    let projected: Vec<[f64; 2]> = tau.iter().map(|t| [t[axes[0]], t[axes[1]]]).collect();
    let center = cfg
        .settings
        .sphere_center
        .as_ref()
        .filter(|c| c.len() == tau.first().map_or(0, Vec::len))
        .map_or([0.0, 0.0], |c| [c[axes[0]], c[axes[1]]]);
    let circle = score.origin_interior.then_some(Circle {
        center,
        radius: score.radius,
    });

    let mut out = String::new();
    header(&mut out, 3.0 * PANEL, PANEL + 40.0);
    let deg: Vec<String> = q.0.iter().map(|a| format!("{:.1}", a.to_degrees())).collect();
    text(
        &mut out,
        8.0,
        PANEL + 28.0,
        13.0,
        &format!("waypoint {number}: q = ({}) deg, R_B = {:.6}", deg.join(", "), score.radius),
    );

    let all: Vec<Point3> = paths
        .iter()
        .flat_map(|p| p.anchors.iter().copied())
        .chain(base_rim.iter().copied())
        .chain(moving_rim.iter().copied())
        .chain([links[0].start, links[0].end, links[1].end])
        .collect();
    let views: [(&str, Projection); 2] = [("side (x-z)", |p| [p.x, p.z]), ("top (x-y)", |p| [p.x, p.y])];
    for (i, (title, project)) in views.into_iter().enumerate() {
        let left = i as f64 * PANEL;
        panel_box(&mut out, left, 0.0, title);
        let (lo, hi) = bounds(all.iter().map(|&p| project(p)));
        let frame = Frame::fit(left, 0.0, lo, hi);
        for rim in [&base_rim, &moving_rim] {
            let pts: Vec<[f64; 2]> = rim.iter().map(|&p| project(p)).collect();
            polyline(&mut out, &frame, &pts, r##"fill="none" stroke="#7f7f7f""##, false);
        }
        let axis: Vec<[f64; 2]> = [links[0].start, links[0].end, links[1].end].iter().map(|&p| project(p)).collect();
        polyline(&mut out, &frame, &axis, r#"fill="none" stroke="black" stroke-width="2""#, false);
        dot(&mut out, &frame, project(links[0].end), 3.0, "black");
        for path in &paths {
            let color = PALETTE[path.wire_index % PALETTE.len()];
            let pts: Vec<[f64; 2]> = path.anchors.iter().map(|&p| project(p)).collect();
            polyline(&mut out, &frame, &pts, &format!(r#"fill="none" stroke="{color}" stroke-width="1.5""#), false);
            for &p in &pts {
                dot(&mut out, &frame, p, 2.5, color);
            }
        }
    }
    let title = if mech.joints.len() == 2 {
        "torque (roll, yaw)"
    } else {
        "torque (roll, yaw), pitch not shown"
    };
    torque_panel(&mut out, 2.0 * PANEL, 0.0, title, &projected, &hull_2d(&projected), circle);
    out.push_str("</svg>\n");
    Ok(out)
}
