//! Dense-grid brute force over the motion parameter, compared with the crossing detector.

use serde::Serialize;
use wirearr::geometry::{crossing_during_motion, distance_at};
use wirearr::mechanism::{DesignParams, MechanismConfig};
use wirearr::objectives::{pair_motions, CheckPair, PairKind, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOracle {
    pub pair: CheckPair,
    pub threshold: f64,
    /// Smallest distance over the grid; absent for contact pairs, which have no motion.
    pub oracle_min: Option<f64>,
    pub detector_crossed: bool,
    pub detector_min: Option<f64>,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentOracle {
    /// 1-based waypoint numbers.
    pub from: usize,
    pub to: usize,
    pub pairs: Vec<PairOracle>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub samples: usize,
    pub segments: Vec<SegmentOracle>,
    pub violations: usize,
}

/// A disagreement outside the guard band: the grid dips below half the threshold while
/// the detector reports no crossing, or stays above twice the threshold while it does.
pub fn is_violation(oracle_min: f64, threshold: f64, crossed: bool) -> bool {
    (oracle_min < threshold / 2.0 && !crossed) || (oracle_min > 2.0 * threshold && crossed)
}

/// Minimum of `f` over `samples` equally spaced values of `k` in `[0, 1]`.
pub fn grid_min(samples: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    assert!(samples >= 2);
    let last = (samples - 1) as f64;
    (0..samples).map(|i| f(i as f64 / last)).fold(f64::INFINITY, f64::min)
}

pub fn oracle_report(
    cfg: &MechanismConfig,
    design: &DesignParams,
    trajectory: &Trajectory,
    epsilon: f64,
    samples: usize,
) -> OracleReport {
    let mut violations = 0;
    let segments = trajectory
        .segments()
        .into_iter()
        .map(|(a, b)| {
            let pairs = pair_motions(cfg, design, &trajectory.waypoints[a], &trajectory.waypoints[b], epsilon)
                .into_iter()
                .map(|pm| {
                    let detector_crossed = pm.crossed();
                    if pm.pair.kind == PairKind::Contact {
                        return PairOracle {
                            pair: pm.pair,
                            threshold: pm.threshold,
                            oracle_min: None,
                            detector_crossed,
                            detector_min: None,
                            violation: false,
                        };
                    }
                    let oracle_min = pm
                        .motions
                        .iter()
                        .map(|m| grid_min(samples, |k| distance_at(m, k).expect("k in range").distance))
                        .fold(f64::INFINITY, f64::min);
                    let detector_min = pm
                        .motions
                        .iter()
                        .map(|m| crossing_during_motion(m, pm.threshold).d_min)
                        .fold(f64::INFINITY, f64::min);
                    let violation = is_violation(oracle_min, pm.threshold, detector_crossed);
                    violations += usize::from(violation);
                    PairOracle {
                        pair: pm.pair,
                        threshold: pm.threshold,
                        oracle_min: Some(oracle_min),
                        detector_crossed,
                        detector_min: Some(detector_min),
                        violation,
                    }
                })
                .collect();
            SegmentOracle {
                from: a + 1,
                to: b + 1,
                pairs,
            }
        })
        .collect();
    OracleReport {
        samples,
        segments,
        violations,
    }
}
