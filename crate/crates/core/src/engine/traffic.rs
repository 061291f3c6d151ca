//! Synthetic control-traffic estimate for a deployment plan.
//!
//! Every subscription sends periodic reports from its data source to the
//! app's host, plus one subscription handshake. Bytes are counted on every
//! tree edge the stream crosses; the E2 figure keeps only edges incident to
//! a near-RT RIC.

use super::plan::DeploymentPlan;
use crate::netmodel::{NodeKind, Topology};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficParams {
    /// Observation window.
    pub period_s: f64,
    pub report_interval_s: f64,
    pub overhead_bytes_per_msg: u64,
    pub handshake_bytes: u64,
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            period_s: 60.0,
            report_interval_s: 0.25,
            overhead_bytes_per_msg: 150,
            handshake_bytes: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("report interval must be positive")]
    InvalidInterval,
    #[error("observation period must be non-negative")]
    InvalidPeriod,
    #[error("unknown node `{0}` in plan")]
    UnknownNode(String),
    #[error("source `{source_node}` cannot reach host `{host}`")]
    Unreachable { source_node: String, host: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrafficEstimate {
    /// Bytes crossing edges incident to a near-RT RIC.
    pub e2_bytes: u64,
    /// Bytes summed over every edge crossed.
    pub all_edges_bytes: u64,
}

pub fn estimate_control_traffic(
    plan: &DeploymentPlan,
    t: &Topology,
    params: &TrafficParams,
) -> Result<TrafficEstimate, TrafficError> {
    if !(params.report_interval_s > 0.0) {
        return Err(TrafficError::InvalidInterval);
    }
    if !(params.period_s >= 0.0) {
        return Err(TrafficError::InvalidPeriod);
    }
    let messages = (params.period_s / params.report_interval_s + 1e-9).floor() as u64;
    let lookup = |id: &str| t.get(id).ok_or_else(|| TrafficError::UnknownNode(id.to_string()));
    let mut est = TrafficEstimate::default();
    for app in &plan.apps {
        let host = lookup(&app.host)?;
        for sub in &app.subscriptions {
            let source = lookup(&sub.source)?;
            let path = t.path_links(source, host).ok_or_else(|| TrafficError::Unreachable {
                source_node: sub.source.clone(),
                host: app.host.clone(),
            })?;
            let bytes = messages * (sub.size_bytes + params.overhead_bytes_per_msg) + params.handshake_bytes;
            for child in path {
                let parent = t.parent(child).expect("a link has a parent end");
                est.all_edges_bytes += bytes;
                if t.kind(child) == NodeKind::NearRtRic || t.kind(parent) == NodeKind::NearRtRic {
                    est.e2_bytes += bytes;
                }
            }
        }
    }
    Ok(est)
}
