//! Two-link mechanism model: disc anchors, forward kinematics, wire lengths and the
//! muscle Jacobian.
//!
//! Frame convention: the base disc lies in the plane `z = 0` centred on the origin, the
//! base link runs along `+z` to the joint centre `(0, 0, L)`, and at zero joint angles
//! the moving disc sits at height `2L`. All joint axes pass through the joint centre;
//! the moving link is rotated by `Rz(yaw) * Ry(pitch) * Rx(roll)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point3, Segment};

/// Squared segment length below which a wire segment contributes nothing to the Jacobian.
const DEGENERATE_SEGMENT_SQ: f64 = 1e-24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("disc radius must be positive, got {0}")]
    DiscRadius(f64),
    #[error("link length must be positive, got {0}")]
    LinkLength(f64),
    #[error("link clearance must be non-negative, got {0}")]
    LinkClearance(f64),
    #[error("at least one wire is required")]
    NoWires,
    #[error("points per wire must be 2 or 3, got {0}")]
    PointsPerWire(usize),
    #[error("expected 2 or 3 joints ordered as roll, pitch, yaw; got {0:?}")]
    Joints(Vec<JointAxis>),
    #[error("genome length {actual} does not match 2 * N * M = {expected}")]
    GenomeLength { expected: usize, actual: usize },
    #[error("genome entry {index} = {value} is outside [-1, 1]")]
    GenomeRange { index: usize, value: f64 },
    #[error("design has {actual_wires} wires of {actual_points} points, expected {wires} x {points}")]
    DesignShape {
        wires: usize,
        points: usize,
        actual_wires: usize,
        actual_points: usize,
    },
    #[error("anchor ({x}, {y}) of wire {wire} lies outside the disc of radius {radius}")]
    OffDisc {
        wire: usize,
        x: f64,
        y: f64,
        radius: f64,
    },
    #[error("joint angle vector has {actual} entries, mechanism has {expected} joints")]
    JointCount { expected: usize, actual: usize },
    #[error("tension bounds require 0 <= f_min < f_max, got [{f_min}, {f_max}]")]
    TensionBounds { f_min: f64, f_max: f64 },
    #[error("{0} wires would need 2^{0} tension vertices; at most 12 are supported")]
    TooManyWires(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointAxis {
    Roll,
    Pitch,
    Yaw,
}

impl JointAxis {
    pub fn unit(self) -> Point3 {
        match self {
            JointAxis::Roll => Point3::new(1.0, 0.0, 0.0),
            JointAxis::Pitch => Point3::new(0.0, 1.0, 0.0),
            JointAxis::Yaw => Point3::new(0.0, 0.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JointAxis::Roll => "roll",
            JointAxis::Pitch => "pitch",
            JointAxis::Yaw => "yaw",
        }
    }
}

/// Which disc an anchor is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disc {
    Base,
    Moving,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub disc_radius: f64,
    pub link_length: f64,
    pub joints: Vec<JointAxis>,
    pub wire_count: usize,
    pub points_per_wire: usize,
    #[serde(default)]
    pub link_clearance: f64,
}

impl MechanismConfig {
    pub fn new(
        disc_radius: f64,
        link_length: f64,
        joints: Vec<JointAxis>,
        wire_count: usize,
        points_per_wire: usize,
        link_clearance: f64,
    ) -> Result<Self, ConfigError> {
        let cfg = Self {
            disc_radius,
            link_length,
            joints,
            wire_count,
            points_per_wire,
            link_clearance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Roll-yaw (`dofs == 2`) or roll-pitch-yaw (`dofs == 3`) joint.
    pub fn standard_joints(dofs: usize) -> Vec<JointAxis> {
        match dofs {
            2 => vec![JointAxis::Roll, JointAxis::Yaw],
            3 => vec![JointAxis::Roll, JointAxis::Pitch, JointAxis::Yaw],
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.disc_radius > 0.0 && self.disc_radius.is_finite()) {
            return Err(ConfigError::DiscRadius(self.disc_radius));
        }
        if !(self.link_length > 0.0 && self.link_length.is_finite()) {
            return Err(ConfigError::LinkLength(self.link_length));
        }
        if !(self.link_clearance >= 0.0 && self.link_clearance.is_finite()) {
            return Err(ConfigError::LinkClearance(self.link_clearance));
        }
        if self.wire_count == 0 {
            return Err(ConfigError::NoWires);
        }
        if !matches!(self.points_per_wire, 2 | 3) {
            return Err(ConfigError::PointsPerWire(self.points_per_wire));
        }
        let ordered = self.joints.windows(2).all(|w| w[0] < w[1]);
        if !matches!(self.joints.len(), 2 | 3) || !ordered {
            return Err(ConfigError::Joints(self.joints.clone()));
        }
        Ok(())
    }

    pub fn dof_count(&self) -> usize {
        self.joints.len()
    }

    pub fn genome_length(&self) -> usize {
        2 * self.points_per_wire * self.wire_count
    }

    pub fn segments_per_wire(&self) -> usize {
        self.points_per_wire - 1
    }

    /// Anchor `j` of a wire alternates base, moving, base.
    pub fn anchor_disc(&self, j: usize) -> Disc {
        if j.is_multiple_of(2) {
            Disc::Base
        } else {
            Disc::Moving
        }
    }

    pub fn joint_center(&self) -> Point3 {
        Point3::new(0.0, 0.0, self.link_length)
    }
}

/// Box-bounded optimizer genome: consecutive `(u, v)` pairs in `[-1, 1]`, wire-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome(pub Vec<f64>);

impl Genome {
    pub fn check(&self, cfg: &MechanismConfig) -> Result<(), ConfigError> {
        let expected = cfg.genome_length();
        if self.0.len() != expected {
            return Err(ConfigError::GenomeLength {
                expected,
                actual: self.0.len(),
            });
        }
        if let Some((index, &value)) = self
            .0
            .iter()
            .enumerate()
            .find(|(_, g)| !(-1.0..=1.0).contains(*g))
        {
            return Err(ConfigError::GenomeRange { index, value });
        }
        Ok(())
    }
}

/// Anchor coordinates `(p_x, p_y)` on the discs, indexed `[wire][point]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub points: Vec<Vec<[f64; 2]>>,
}

impl DesignParams {
    /// Validates shape and the disc constraint (with a `1e-9` relative allowance for
    /// coordinates written by hand or through text round trips).
    pub fn new(points: Vec<Vec<[f64; 2]>>, cfg: &MechanismConfig) -> Result<Self, ConfigError> {
        let design = Self { points };
        design.check(cfg)?;
        Ok(design)
    }

    pub fn check(&self, cfg: &MechanismConfig) -> Result<(), ConfigError> {
        let wrong_shape = self.points.len() != cfg.wire_count
            || self.points.iter().any(|w| w.len() != cfg.points_per_wire);
        if wrong_shape {
            return Err(ConfigError::DesignShape {
                wires: cfg.wire_count,
                points: cfg.points_per_wire,
                actual_wires: self.points.len(),
                actual_points: self.points.first().map_or(0, Vec::len),
            });
        }
        let r2 = cfg.disc_radius * cfg.disc_radius;
        for (wire, anchors) in self.points.iter().enumerate() {
            for &[x, y] in anchors {
                if !(x.is_finite() && y.is_finite()) || x * x + y * y > r2 * (1.0 + 1e-9) {
                    return Err(ConfigError::OffDisc {
                        wire,
                        x,
                        y,
                        radius: cfg.disc_radius,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn wire_count(&self) -> usize {
        self.points.len()
    }

    /// Foldback version of a two-point design: every wire returns to its own start
    /// point, so each wire runs base -> moving -> base along the same chord.
    pub fn fold_back(&self) -> DesignParams {
        DesignParams {
            points: self
                .points
                .iter()
                .map(|w| {
                    let mut folded = w.clone();
                    folded.push(w[0]);
                    folded
                })
                .collect(),
        }
    }

    /// Same design with wires reordered so that wire `i` of the result is wire `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> DesignParams {
        DesignParams {
            points: perm.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }
}

/// Maps a genome onto the discs: `p_x = u R`, `p_y = v sqrt(R^2 - p_x^2)`.
pub fn decode_genome(genome: &Genome, cfg: &MechanismConfig) -> Result<DesignParams, ConfigError> {
    genome.check(cfg)?;
    let r = cfg.disc_radius;
    let r2 = r * r;
    let points = genome
        .0
        .chunks_exact(2 * cfg.points_per_wire)
        .map(|wire| {
            wire.chunks_exact(2)
                .map(|uv| {
                    let px = uv[0] * r;
                    let mut py = uv[1] * (r2 - px * px).max(0.0).sqrt();
                    // Rounding in the square root can push the point one ulp off the disc.
                    while px * px + py * py > r2 {
                        py = if py > 0.0 { py.next_down() } else { py.next_up() };
                    }
                    [px, py]
                })
                .collect()
        })
        .collect();
    Ok(DesignParams { points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointAngles(pub Vec<f64>);

impl JointAngles {
    pub fn zeros(dofs: usize) -> Self {
        Self(vec![0.0; dofs])
    }

    pub fn from_degrees(deg: &[f64]) -> Self {
        Self(deg.iter().map(|d| d.to_radians()).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WirePath {
    pub wire_index: usize,
    pub anchors: Vec<Point3>,
    pub segments: Vec<Segment>,
}

/// Row-major `M x D` matrix of length derivatives, `G[i][j] = d l_i / d theta_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuscleJacobian {
    wires: usize,
    dofs: usize,
    data: Vec<f64>,
}

impl MuscleJacobian {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dofs = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == dofs), "ragged Jacobian rows");
        Self {
            wires: rows.len(),
            dofs,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn zeros(wires: usize, dofs: usize) -> Self {
        Self {
            wires,
            dofs,
            data: vec![0.0; wires * dofs],
        }
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn get(&self, wire: usize, joint: usize) -> f64 {
        self.data[wire * self.dofs + joint]
    }

    pub fn row(&self, wire: usize) -> &[f64] {
        &self.data[wire * self.dofs..(wire + 1) * self.dofs]
    }

    fn row_mut(&mut self, wire: usize) -> &mut [f64] {
        &mut self.data[wire * self.dofs..(wire + 1) * self.dofs]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            wires: self.wires,
            dofs: self.dofs,
            data: self.data.iter().map(|g| g * c).collect(),
        }
    }
}

type Mat3 = [[f64; 3]; 3];

const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn axis_rotation(axis: JointAxis, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    match axis {
        JointAxis::Roll => [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        JointAxis::Pitch => [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        JointAxis::Yaw => [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
    }
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat_vec(m: &Mat3, v: Point3) -> Point3 {
    Point3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

/// Moving-link pose at one joint configuration.
struct LinkPose {
    rotation: Mat3,
    /// World-frame rotation axis of each joint, in joint order.
    axes: Vec<Point3>,
}

impl LinkPose {
    fn new(cfg: &MechanismConfig, q: &JointAngles) -> Self {
        assert_eq!(q.0.len(), cfg.dof_count(), "joint angle vector length");
        // R = A_{D-1} ... A_1 A_0, each A_i a rotation about the fixed unit axis of joint i.
        let mut rotation = IDENTITY;
        let mut axes = vec![Point3::ORIGIN; cfg.dof_count()];
        for (j, (&axis, &angle)) in cfg.joints.iter().zip(&q.0).enumerate().rev() {
            axes[j] = mat_vec(&rotation, axis.unit());
            rotation = mat_mul(&rotation, &axis_rotation(axis, angle));
        }
        Self { rotation, axes }
    }
}

fn world_anchor(cfg: &MechanismConfig, pose: &LinkPose, disc: Disc, [x, y]: [f64; 2]) -> Point3 {
    match disc {
        Disc::Base => Point3::new(x, y, 0.0),
        Disc::Moving => {
            let local = Point3::new(x, y, cfg.link_length);
            cfg.joint_center() + mat_vec(&pose.rotation, local)
        }
    }
}

fn paths_for_pose(cfg: &MechanismConfig, design: &DesignParams, pose: &LinkPose) -> Vec<WirePath> {
    design
        .points
        .iter()
        .enumerate()
        .map(|(wire_index, pts)| {
            let anchors: Vec<Point3> = pts
                .iter()
                .enumerate()
                .map(|(j, &p)| world_anchor(cfg, pose, cfg.anchor_disc(j), p))
                .collect();
            let segments = anchors.windows(2).map(|w| Segment::new(w[0], w[1])).collect();
            WirePath {
                wire_index,
                anchors,
                segments,
            }
        })
        .collect()
}

/// World-space wire polylines at joint angles `q`.
pub fn anchor_world_positions(cfg: &MechanismConfig, design: &DesignParams, q: &JointAngles) -> Vec<WirePath> {
    paths_for_pose(cfg, design, &LinkPose::new(cfg, q))
}

/// Base link (origin to joint centre) and moving link (joint centre to moving disc
/// centre) axis segments.
pub fn link_segments(cfg: &MechanismConfig, q: &JointAngles) -> [Segment; 2] {
    let pose = LinkPose::new(cfg, q);
    let j = cfg.joint_center();
    let tip = world_anchor(cfg, &pose, Disc::Moving, [0.0, 0.0]);
    [Segment::new(Point3::ORIGIN, j), Segment::new(j, tip)]
}

/// World position of disc coordinates `p` on the moving disc at joint angles `q`.
pub fn moving_disc_point(cfg: &MechanismConfig, q: &JointAngles, p: [f64; 2]) -> Point3 {
    world_anchor(cfg, &LinkPose::new(cfg, q), Disc::Moving, p)
}

pub fn wire_lengths(cfg: &MechanismConfig, design: &DesignParams, q: &JointAngles) -> Vec<f64> {
    anchor_world_positions(cfg, design, q)
        .iter()
        .map(|p| p.segments.iter().map(Segment::length).sum())
        .collect()
}

/// Analytic muscle Jacobian: each segment contributes its unit direction dotted with the
/// relative velocity of its endpoints under a unit rate of each joint.
pub fn muscle_jacobian(cfg: &MechanismConfig, design: &DesignParams, q: &JointAngles) -> MuscleJacobian {
    let pose = LinkPose::new(cfg, q);
    let center = cfg.joint_center();
    let dofs = cfg.dof_count();
    let mut g = MuscleJacobian::zeros(design.wire_count(), dofs);
    let paths = paths_for_pose(cfg, design, &pose);

    for path in &paths {
        let row = g.row_mut(path.wire_index);
        for (j, seg) in path.segments.iter().enumerate() {
            let delta = seg.direction();
            let len_sq = delta.norm_squared();
            if len_sq < DEGENERATE_SEGMENT_SQ {
                continue;
            }
            let dir = delta * (1.0 / len_sq.sqrt());
            let (start_disc, end_disc) = (cfg.anchor_disc(j), cfg.anchor_disc(j + 1));
            for (k, axis) in pose.axes.iter().enumerate() {
                let velocity = |disc: Disc, p: Point3| match disc {
                    Disc::Base => Point3::ORIGIN,
                    Disc::Moving => axis.cross(p - center),
                };
                let rel = velocity(end_disc, seg.end) - velocity(start_disc, seg.start);
                row[k] += dir.dot(rel);
            }
        }
    }
    g
}
