//! Trajectory-level objectives: wire crossings between waypoints and the product of
//! inscribed torque radii at the waypoints.

use serde::Serialize;

use crate::geometry::{crossing_during_motion, MotionPair, Segment};
use crate::mechanism::{
    anchor_world_positions, decode_genome, link_segments, muscle_jacobian, ConfigError, DesignParams, Genome,
    JointAngles, MechanismConfig, WirePath,
};
use crate::torque_space::{build_hull, inscribed_radius, inscribed_radius_about, tension_vertices, project_to_torque, TensionBounds};

/// Default crossing threshold and fallback radius.
pub const DEFAULT_EPSILON: f64 = 1.0e-4;
pub const DEFAULT_R_MIN: f64 = 1.0e-3;

/// Endpoints closer than this are treated as the same anchor.
const SHARED_ANCHOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub waypoints: Vec<JointAngles>,
    pub close_loop: bool,
}

impl Trajectory {
    pub fn new(waypoints: Vec<JointAngles>, close_loop: bool) -> Result<Self, TrajectoryError> {
        if waypoints.len() < 2 {
            return Err(TrajectoryError::TooShort(waypoints.len()));
        }
        let dofs = waypoints[0].0.len();
        for (i, w) in waypoints.iter().enumerate() {
            if w.0.len() != dofs {
                return Err(TrajectoryError::Ragged { index: i });
            }
            if w.0.iter().any(|a| !a.is_finite()) {
                return Err(TrajectoryError::NonFinite { index: i });
            }
        }
        Ok(Self { waypoints, close_loop })
    }

    /// `(from, to)` waypoint indices of every motion segment, in order.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let n = self.waypoints.len();
        let mut segs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.close_loop {
            segs.push((n - 1, 0));
        }
        segs
    }

    pub fn reversed(&self) -> Trajectory {
        Trajectory {
            waypoints: self.waypoints.iter().rev().cloned().collect(),
            close_loop: self.close_loop,
        }
    }

    pub fn dofs(&self) -> usize {
        self.waypoints[0].0.len()
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("a trajectory needs at least two waypoints, got {0}")]
    TooShort(usize),
    #[error("waypoint {index} has a different number of joints than waypoint 0")]
    Ragged { index: usize },
    #[error("waypoint {index} contains a non-finite angle")]
    NonFinite { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Base,
    Moving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum SegmentRef {
    Wire { wire: usize, segment: usize },
    Link { link: Link },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// Crossing when the closest distance drops below the pair threshold.
    Proximity,
    /// The two strands of a foldback wire. They always meet at the relay anchor, so each
    /// free end is checked against the other strand instead.
    Foldback,
    /// A wire anchored on a link axis endpoint while a link clearance is configured;
    /// counted as a crossing on every motion segment.
    Contact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckPair {
    pub a: SegmentRef,
    pub b: SegmentRef,
    pub kind: PairKind,
}

fn shares_endpoint(a: &Segment, b: &Segment) -> bool {
    [a.start, a.end]
        .iter()
        .any(|p| [b.start, b.end].iter().any(|q| p.distance(*q) < SHARED_ANCHOR_TOL))
}

/// Every segment pair that must stay apart: wire segments of distinct wires, the two
/// strands of each foldback wire, and every wire segment against both link axes.
/// Pairs sharing an anchor are dropped, except wire-link contacts when a link clearance
/// is configured.
pub fn collect_check_pairs(cfg: &MechanismConfig, paths: &[WirePath], links: &[Segment; 2]) -> Vec<CheckPair> {
    let mut pairs = Vec::new();

    for (i, wi) in paths.iter().enumerate() {
        for wj in &paths[i + 1..] {
            for (si, a) in wi.segments.iter().enumerate() {
                for (sj, b) in wj.segments.iter().enumerate() {
                    if !shares_endpoint(a, b) {
                        pairs.push(CheckPair {
                            a: SegmentRef::Wire { wire: wi.wire_index, segment: si },
                            b: SegmentRef::Wire { wire: wj.wire_index, segment: sj },
                            kind: PairKind::Proximity,
                        });
                    }
                }
            }
        }
    }

    for w in paths {
        if w.segments.len() == 2 {
            // An exact fold doubles the strand onto itself; there is nothing to cross.
            let exact_fold = w.anchors[0].distance(w.anchors[2]) < SHARED_ANCHOR_TOL;
            if !exact_fold {
                pairs.push(CheckPair {
                    a: SegmentRef::Wire { wire: w.wire_index, segment: 0 },
                    b: SegmentRef::Wire { wire: w.wire_index, segment: 1 },
                    kind: PairKind::Foldback,
                });
            }
        }
    }

    for w in paths {
        for (s, seg) in w.segments.iter().enumerate() {
            for (link, axis) in [Link::Base, Link::Moving].into_iter().zip(links) {
                let kind = if !shares_endpoint(seg, axis) {
                    PairKind::Proximity
                } else if cfg.link_clearance > 0.0 {
                    PairKind::Contact
                } else {
                    continue;
                };
                pairs.push(CheckPair {
                    a: SegmentRef::Wire { wire: w.wire_index, segment: s },
                    b: SegmentRef::Link { link },
                    kind,
                });
            }
        }
    }
    pairs
}

/// A check pair resolved into concrete motions between two waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMotion {
    pub pair: CheckPair,
    pub threshold: f64,
    pub motions: Vec<MotionPair>,
}

impl PairMotion {
    pub fn crossed(&self) -> bool {
        match self.pair.kind {
            PairKind::Contact => true,
            _ => self
                .motions
                .iter()
                .any(|m| crossing_during_motion(m, self.threshold).crossed),
        }
    }
}

struct Pose {
    paths: Vec<WirePath>,
    links: [Segment; 2],
}

impl Pose {
    fn new(cfg: &MechanismConfig, design: &DesignParams, q: &JointAngles) -> Self {
        Self {
            paths: anchor_world_positions(cfg, design, q),
            links: link_segments(cfg, q),
        }
    }

    fn segment(&self, r: SegmentRef) -> Segment {
        match r {
            SegmentRef::Wire { wire, segment } => self.paths[wire].segments[segment],
            SegmentRef::Link { link: Link::Base } => self.links[0],
            SegmentRef::Link { link: Link::Moving } => self.links[1],
        }
    }
}

/// Resolves every check pair of `design` into motions from `q_a` (`k = 0`) to `q_b`.
pub fn pair_motions(
    cfg: &MechanismConfig,
    design: &DesignParams,
    q_a: &JointAngles,
    q_b: &JointAngles,
    epsilon: f64,
) -> Vec<PairMotion> {
    let from = Pose::new(cfg, design, q_a);
    let to = Pose::new(cfg, design, q_b);
    let link_threshold = epsilon.max(cfg.link_clearance);

    collect_check_pairs(cfg, &from.paths, &from.links)
        .into_iter()
        .map(|pair| {
            let threshold = match pair.b {
                SegmentRef::Link { .. } => link_threshold,
                SegmentRef::Wire { .. } => epsilon,
            };
            let motions = match pair.kind {
                PairKind::Contact => Vec::new(),
                PairKind::Proximity => vec![MotionPair::new(
                    from.segment(pair.a),
                    to.segment(pair.a),
                    from.segment(pair.b),
                    to.segment(pair.b),
                )],
                PairKind::Foldback => {
                    let (a0, a1) = (from.segment(pair.a), to.segment(pair.a));
                    let (b0, b1) = (from.segment(pair.b), to.segment(pair.b));
                    vec![
                        MotionPair::new(a0, a1, Segment::point(b0.end), Segment::point(b1.end)),
                        MotionPair::new(b0, b1, Segment::point(a0.start), Segment::point(a1.start)),
                    ]
                }
            };
            PairMotion { pair, threshold, motions }
        })
        .collect()
}

/// Number of check pairs that cross while moving from `q_a` to `q_b`; each pair counts
/// at most once.
pub fn count_crossings_segment(
    cfg: &MechanismConfig,
    design: &DesignParams,
    q_a: &JointAngles,
    q_b: &JointAngles,
    epsilon: f64,
) -> usize {
    pair_motions(cfg, design, q_a, q_b, epsilon)
        .iter()
        .filter(|p| p.crossed())
        .count()
}

/// Anchors lying on a link axis endpoint (disc centre), reported as `(wire, point)`.
pub fn link_contacts(cfg: &MechanismConfig, design: &DesignParams) -> Vec<(usize, usize)> {
    let reach = cfg.link_clearance.max(SHARED_ANCHOR_TOL);
    design
        .points
        .iter()
        .enumerate()
        .flat_map(|(i, w)| {
            w.iter()
                .enumerate()
                .filter(move |(_, p)| p[0].hypot(p[1]) < reach)
                .map(move |(j, _)| (i, j))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationSettings {
    pub bounds: TensionBounds,
    pub epsilon: f64,
    pub r_min: f64,
    /// Centre of the inscribed ball; `None` is the origin.
    pub sphere_center: Option<Vec<f64>>,
}

impl EvaluationSettings {
    pub fn new(bounds: TensionBounds) -> Self {
        Self {
            bounds,
            epsilon: DEFAULT_EPSILON,
            r_min: DEFAULT_R_MIN,
            sphere_center: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub e_cross: usize,
    /// Natural log of the product of per-waypoint radii.
    pub log_e_torque: f64,
    /// Crossings on each motion segment, in [`Trajectory::segments`] order.
    pub per_segment_crossings: Vec<usize>,
    pub per_waypoint_radius: Vec<f64>,
}

impl Evaluation {
    /// `E_torque` itself, when it is representable as a normal float.
    pub fn e_torque(&self) -> Option<f64> {
        let e = self.log_e_torque.exp();
        (e.is_normal()).then_some(e)
    }
}

/// Precomputed evaluation context for one mechanism, trajectory and settings.
#[derive(Debug, Clone)]
pub struct Evaluator {
    cfg: MechanismConfig,
    trajectory: Trajectory,
    settings: EvaluationSettings,
    vertices: Vec<Vec<f64>>,
}

impl Evaluator {
    pub fn new(cfg: MechanismConfig, trajectory: Trajectory, settings: EvaluationSettings) -> Result<Self, ConfigError> {
        cfg.validate()?;
        if trajectory.dofs() != cfg.dof_count() {
            return Err(ConfigError::JointCount {
                expected: cfg.dof_count(),
                actual: trajectory.dofs(),
            });
        }
        let vertices = tension_vertices(cfg.wire_count, settings.bounds)?;
        Ok(Self {
            cfg,
            trajectory,
            settings,
            vertices,
        })
    }

    pub fn config(&self) -> &MechanismConfig {
        &self.cfg
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn settings(&self) -> &EvaluationSettings {
        &self.settings
    }

    pub fn waypoint_radius(&self, design: &DesignParams, q: &JointAngles) -> f64 {
        let g = muscle_jacobian(&self.cfg, design, q);
        let projected: Vec<Vec<f64>> = self.vertices.iter().map(|f| project_to_torque(&g, f)).collect();
        let hull = build_hull(&projected);
        let score = match (&hull, &self.settings.sphere_center) {
            (Ok(h), Some(c)) => inscribed_radius_about(h, c, self.settings.r_min),
            _ => inscribed_radius(&hull, self.settings.r_min),
        };
        score.radius
    }

    pub fn evaluate(&self, design: &DesignParams) -> Evaluation {
        let traj = &self.trajectory;
        let per_segment_crossings: Vec<usize> = traj
            .segments()
            .into_iter()
            .map(|(a, b)| {
                count_crossings_segment(&self.cfg, design, &traj.waypoints[a], &traj.waypoints[b], self.settings.epsilon)
            })
            .collect();
        let per_waypoint_radius: Vec<f64> = traj
            .waypoints
            .iter()
            .map(|q| self.waypoint_radius(design, q))
            .collect();
        Evaluation {
            e_cross: per_segment_crossings.iter().sum(),
            log_e_torque: per_waypoint_radius.iter().map(|r| r.ln()).sum(),
            per_segment_crossings,
            per_waypoint_radius,
        }
    }

    pub fn evaluate_genome(&self, genome: &Genome) -> Result<(DesignParams, Evaluation), ConfigError> {
        let design = decode_genome(genome, &self.cfg)?;
        let eval = self.evaluate(&design);
        Ok((design, eval))
    }
}

/// One-shot evaluation of a design over a trajectory.
pub fn evaluate(
    cfg: &MechanismConfig,
    design: &DesignParams,
    trajectory: &Trajectory,
    settings: &EvaluationSettings,
) -> Result<Evaluation, ConfigError> {
    design.check(cfg)?;
    let evaluator = Evaluator::new(cfg.clone(), trajectory.clone(), settings.clone())?;
    Ok(evaluator.evaluate(design))
}
