//! Feasible joint-torque polytope and its origin-centred inscribed ball.
//!
//! Every vertex of the tension box `[f_min, f_max]^M` is mapped through `tau = -G^T f`;
//! the convex hull of the images is the feasible torque set. The score of a posture is
//! the distance from the origin to the nearest hull facet when the origin is strictly
//! inside, and a fixed fallback radius otherwise.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point3;
use crate::mechanism::{ConfigError, MuscleJacobian};

/// Largest wire count for which the `2^M` tension vertices are enumerated.
pub const MAX_WIRES: usize = 12;
/// Point sets whose best simplex has a smaller area/volume are rejected as flat.
pub const DEGENERATE_VOLUME: f64 = 1e-10;
/// The origin counts as interior only if every facet is farther than this.
pub const ON_FACET_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("torque points are affinely dependent (best simplex measure {0:e})")]
    Degenerate(f64),
    #[error("hull needs at least {needed} points in dimension {dimension}, got {got}")]
    TooFewPoints {
        dimension: usize,
        needed: usize,
        got: usize,
    },
    #[error("unsupported torque-space dimension {0}")]
    Dimension(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensionBounds {
    pub f_min: f64,
    pub f_max: f64,
}

impl TensionBounds {
    pub fn new(f_min: f64, f_max: f64) -> Result<Self, ConfigError> {
        if !(0.0 <= f_min && f_min < f_max && f_max.is_finite()) {
            return Err(ConfigError::TensionBounds { f_min, f_max });
        }
        Ok(Self { f_min, f_max })
    }
}

/// All `2^M` corners of the tension box. Vertex `v` takes `f_max` in coordinate `i`
/// when bit `M - 1 - i` of `v` is set, so the last wire toggles fastest.
pub fn tension_vertices(wires: usize, bounds: TensionBounds) -> Result<Vec<Vec<f64>>, ConfigError> {
    if wires > MAX_WIRES {
        return Err(ConfigError::TooManyWires(wires));
    }
    if wires == 0 {
        return Err(ConfigError::NoWires);
    }
    Ok((0..1usize << wires)
        .map(|v| {
            (0..wires)
                .map(|i| {
                    if v >> (wires - 1 - i) & 1 == 1 {
                        bounds.f_max
                    } else {
                        bounds.f_min
                    }
                })
                .collect()
        })
        .collect())
}

/// `tau = -G^T f`.
pub fn project_to_torque(g: &MuscleJacobian, f: &[f64]) -> Vec<f64> {
    assert_eq!(g.wires(), f.len(), "tension vector length");
    let mut tau = vec![0.0; g.dofs()];
    for (i, &fi) in f.iter().enumerate() {
        for (t, gij) in tau.iter_mut().zip(g.row(i)) {
            *t -= gij * fi;
        }
    }
    tau
}

/// Supporting half-space `normal . x <= offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Facet {
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorquePolytope {
    pub dimension: usize,
    /// Hull vertices; counter-clockwise for `dimension == 2`.
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorqueScore {
    pub origin_interior: bool,
    /// Inscribed radius when the origin is interior, the fallback radius otherwise.
    pub radius: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Convex hull of 2- or 3-dimensional points.
pub fn build_hull(points: &[Vec<f64>]) -> Result<TorquePolytope, HullError> {
    let dimension = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != dimension) || !matches!(dimension, 2 | 3) {
        return Err(HullError::Dimension(dimension));
    }
    if points.len() < dimension + 1 {
        return Err(HullError::TooFewPoints {
            dimension,
            needed: dimension + 1,
            got: points.len(),
        });
    }
    let mut hull = if dimension == 2 {
        hull_2d(points)?
    } else {
        hull_3d(points)?
    };
    // Offsets are taken over every input so containment holds without tolerance.
    for facet in &mut hull.facets {
        facet.offset = points
            .iter()
            .map(|p| dot(&facet.normal, p))
            .fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(hull)
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn hull_2d(points: &[Vec<f64>]) -> Result<TorquePolytope, HullError> {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();

    // Degeneracy: largest triangle on the farthest pair.
    let a = pts[0];
    let b = *pts
        .iter()
        .max_by(|p, q| dist2(a, **p).total_cmp(&dist2(a, **q)))
        .expect("non-empty");
    let c = *pts
        .iter()
        .max_by(|p, q| dist2(b, **p).total_cmp(&dist2(b, **q)))
        .expect("non-empty");
    let area = pts
        .iter()
        .map(|p| 0.5 * cross2(b, c, *p).abs())
        .fold(0.0, f64::max);
    if area < DEGENERATE_VOLUME {
        return Err(HullError::Degenerate(area));
    }

    pts.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    pts.dedup();
    let mut lower: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross2(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let ring = lower;

    let facets = ring
        .iter()
        .zip(ring.iter().cycle().skip(1))
        .map(|(p, q)| {
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = dx.hypot(dy);
            let normal = vec![dy / len, -dx / len];
            Facet {
                offset: normal[0] * p[0] + normal[1] * p[1],
                normal,
            }
        })
        .collect();
    Ok(TorquePolytope {
        dimension: 2,
        vertices: ring.iter().map(|p| p.to_vec()).collect(),
        facets,
    })
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

struct Face {
    v: [usize; 3],
    normal: Point3,
    offset: f64,
    outside: Vec<usize>,
}

impl Face {
    fn new(pts: &[Point3], v: [usize; 3]) -> Self {
        let n = (pts[v[1]] - pts[v[0]]).cross(pts[v[2]] - pts[v[0]]);
        let normal = n * (1.0 / n.norm());
        Self {
            v,
            normal,
            offset: normal.dot(pts[v[0]]),
            outside: Vec::new(),
        }
    }

    fn height(&self, p: Point3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.v;
        [(a, b), (b, c), (c, a)]
    }
}

/// Incremental quickhull with triangular facets; coplanar facets are left split.
fn hull_3d(points: &[Vec<f64>]) -> Result<TorquePolytope, HullError> {
    let pts: Vec<Point3> = points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
    let scale = pts
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs(), p.z.abs()])
        .fold(0.0, f64::max);
    let tol = 1e-10 * scale;

    // Initial simplex.
    let i0 = (0..pts.len())
        .min_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x))
        .expect("non-empty");
    let farthest = |key: &dyn Fn(Point3) -> f64| {
        (0..pts.len())
            .max_by(|&a, &b| key(pts[a]).total_cmp(&key(pts[b])))
            .expect("non-empty")
    };
    let i1 = farthest(&|p| (p - pts[i0]).norm_squared());
    let axis = pts[i1] - pts[i0];
    let i2 = farthest(&|p| axis.cross(p - pts[i0]).norm_squared());
    let plane = axis.cross(pts[i2] - pts[i0]);
    let i3 = farthest(&|p| plane.dot(p - pts[i0]).abs());
    let volume = plane.dot(pts[i3] - pts[i0]).abs() / 6.0;
    if !(volume >= DEGENERATE_VOLUME) {
        return Err(HullError::Degenerate(volume));
    }

    let inside = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) * 0.25;
    let mut faces: Vec<Option<Face>> = Vec::new();
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    let simplex = [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]];
    for tri in simplex {
        let mut face = Face::new(&pts, tri);
        if face.height(inside) > 0.0 {
            face = Face::new(&pts, [tri[0], tri[2], tri[1]]);
        }
        add_face(&mut faces, &mut edge_owner, face);
    }

    let corners = [i0, i1, i2, i3];
    let candidates: Vec<usize> = (0..pts.len()).filter(|i| !corners.contains(i)).collect();
    assign_outside(&pts, &mut faces, &(0..4).collect::<Vec<_>>(), candidates, tol);

    while let Some(fi) = faces
        .iter()
        .position(|f| f.as_ref().is_some_and(|f| !f.outside.is_empty()))
    {
        let face = faces[fi].as_ref().expect("live face");
        let eye = *face
            .outside
            .iter()
            .max_by(|&&a, &&b| face.height(pts[a]).total_cmp(&face.height(pts[b])))
            .expect("non-empty outside set");
        let eye_p = pts[eye];

        // Flood the visible region from the seed face.
        let mut visible = vec![fi];
        let mut seen = vec![false; faces.len()];
        seen[fi] = true;
        let mut cursor = 0;
        while cursor < visible.len() {
            let f = faces[visible[cursor]].as_ref().expect("live face");
            cursor += 1;
            for (a, b) in f.edges() {
                if let Some(&nb) = edge_owner.get(&(b, a)) {
                    if !seen[nb] {
                        seen[nb] = true;
                        if faces[nb].as_ref().expect("live face").height(eye_p) > tol {
                            visible.push(nb);
                        }
                    }
                }
            }
        }
        let is_visible = |idx: usize| visible.contains(&idx);

        let mut horizon = Vec::new();
        for &vf in &visible {
            for (a, b) in faces[vf].as_ref().expect("live face").edges() {
                if !edge_owner.get(&(b, a)).is_some_and(|&nb| is_visible(nb)) {
                    horizon.push((a, b));
                }
            }
        }

        let mut orphans = Vec::new();
        for &vf in &visible {
            let face = faces[vf].take().expect("live face");
            for e in face.edges() {
                edge_owner.remove(&e);
            }
            orphans.extend(face.outside.into_iter().filter(|&p| p != eye));
        }
        let mut created = Vec::with_capacity(horizon.len());
        for (a, b) in horizon {
            created.push(add_face(&mut faces, &mut edge_owner, Face::new(&pts, [a, b, eye])));
        }
        assign_outside(&pts, &mut faces, &created, orphans, tol);
    }

    let live: Vec<&Face> = faces.iter().flatten().collect();
    debug_assert!(live.iter().all(|f| f.height(inside) < 0.0), "inward-facing facet");
    let mut vertex_ids: Vec<usize> = live.iter().flat_map(|f| f.v).collect();
    vertex_ids.sort_unstable();
    vertex_ids.dedup();
    Ok(TorquePolytope {
        dimension: 3,
        vertices: vertex_ids.iter().map(|&i| points[i].clone()).collect(),
        facets: live
            .iter()
            .map(|f| Facet {
                normal: vec![f.normal.x, f.normal.y, f.normal.z],
                offset: f.offset,
            })
            .collect(),
    })
}

fn add_face(faces: &mut Vec<Option<Face>>, edge_owner: &mut HashMap<(usize, usize), usize>, face: Face) -> usize {
    let idx = faces.len();
    for e in face.edges() {
        edge_owner.insert(e, idx);
    }
    faces.push(Some(face));
    idx
}

fn assign_outside(pts: &[Point3], faces: &mut [Option<Face>], targets: &[usize], candidates: Vec<usize>, tol: f64) {
    for p in candidates {
        let best = targets
            .iter()
            .map(|&f| (f, faces[f].as_ref().expect("live face").height(pts[p])))
            .filter(|&(_, h)| h > tol)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((f, _)) = best {
            faces[f].as_mut().expect("live face").outside.push(p);
        }
    }
}

/// Radius of the largest origin-centred ball inside the hull, or `r_min` when the origin
/// is on or outside the boundary or the hull is degenerate.
pub fn inscribed_radius(hull: &Result<TorquePolytope, HullError>, r_min: f64) -> TorqueScore {
    match hull {
        Ok(h) => {
            let center = vec![0.0; h.dimension];
            inscribed_radius_about(h, &center, r_min)
        }
        Err(_) => TorqueScore {
            origin_interior: false,
            radius: r_min,
        },
    }
}

/// Same as [`inscribed_radius`] for a ball centred at `center` (for example a gravity
/// compensation torque).
pub fn inscribed_radius_about(hull: &TorquePolytope, center: &[f64], r_min: f64) -> TorqueScore {
    let distances: Vec<f64> = hull.facets.iter().map(|f| f.signed_distance(center)).collect();
    let worst = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if worst >= -ON_FACET_TOL {
        return TorqueScore {
            origin_interior: false,
            radius: r_min,
        };
    }
    TorqueScore {
        origin_interior: true,
        radius: distances.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min),
    }
}

/// Scores the torque space reachable through `g` from the given tension vertices.
pub fn torque_score(g: &MuscleJacobian, vertices: &[Vec<f64>], r_min: f64) -> TorqueScore {
    let projected: Vec<Vec<f64>> = vertices.iter().map(|f| project_to_torque(g, f)).collect();
    inscribed_radius(&build_hull(&projected), r_min)
}
