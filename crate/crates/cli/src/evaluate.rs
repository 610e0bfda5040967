//! Printed evaluation of a single design.

use serde::Serialize;
use wirearr::mechanism::DesignParams;
use wirearr::objectives::{link_contacts, Evaluation, Evaluator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentCrossings {
    /// 1-based waypoint numbers.
    pub from: usize,
    pub to: usize,
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkContact {
    pub wire: usize,
    pub point: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub e_cross: usize,
    pub log_e_torque: f64,
    pub e_torque: Option<f64>,
    pub per_segment_crossings: Vec<SegmentCrossings>,
    pub per_waypoint_radius: Vec<f64>,
    /// Anchors sitting on a link axis end (disc centre), 0-based.
    pub link_contacts: Vec<LinkContact>,
}

impl EvaluationReport {
    pub fn new(evaluator: &Evaluator, design: &DesignParams, evaluation: &Evaluation) -> Self {
        let per_segment_crossings = evaluator
            .trajectory()
            .segments()
            .into_iter()
            .zip(&evaluation.per_segment_crossings)
            .map(|((a, b), &crossings)| SegmentCrossings {
                from: a + 1,
                to: b + 1,
                crossings,
            })
            .collect();
        Self {
            e_cross: evaluation.e_cross,
            log_e_torque: evaluation.log_e_torque,
            e_torque: evaluation.e_torque(),
            per_segment_crossings,
            per_waypoint_radius: evaluation.per_waypoint_radius.clone(),
            link_contacts: link_contacts(evaluator.config(), design)
                .into_iter()
                .map(|(wire, point)| LinkContact { wire, point })
                .collect(),
        }
    }
}
