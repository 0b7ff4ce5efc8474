//! Evaluation metrics over dissemination runs.
//!
//! `phi` is the mean normalized decision time (first stop position within
//! its epoch divided by the epoch length), `delta` the mean synopsis drift
//! magnitude at stop time, and `psi` the epoch length divided by the
//! number of stops in the epoch (large psi = infrequent messages).

use crate::decision::{Decision, DecisionTrace, EpochClock};
use crate::error::{Error, Result};

/// Mean normalized decision time across experiments: each experiment
/// contributes the mean of `t*/T` over its stop list.
pub fn compute_phi(stops_per_experiment: &[Vec<f64>], epoch_length: u64, e: usize) -> Result<f64> {
    if stops_per_experiment.is_empty() || e == 0 {
        return Err(Error::EmptyInput("stop lists"));
    }
    if stops_per_experiment.len() != e {
        return Err(Error::InvalidArgument(format!(
            "expected {e} experiments, got {}",
            stops_per_experiment.len()
        )));
    }
    let t = epoch_length as f64;
    let mut sum = 0.0;
    for stops in stops_per_experiment {
        if stops.is_empty() {
            return Err(Error::EmptyInput("experiment stop list"));
        }
        for &s in stops {
            if !(1.0 <= s && s <= t) {
                return Err(Error::InvalidArgument(format!(
                    "stop time {s} outside [1, {t}]"
                )));
            }
        }
        sum += stops.iter().map(|s| s / t).sum::<f64>() / stops.len() as f64;
    }
    Ok(sum / e as f64)
}

/// Mean L1 distance between the synopsis at decision time and the last
/// disseminated synopsis.
pub fn compute_delta(pairs: &[(Vec<f64>, Vec<f64>)], e: usize) -> Result<f64> {
    if pairs.is_empty() || e == 0 {
        return Err(Error::EmptyInput("synopsis pairs"));
    }
    if pairs.len() != e {
        return Err(Error::InvalidArgument(format!(
            "expected {e} pairs, got {}",
            pairs.len()
        )));
    }
    let mut sum = 0.0;
    for (a, b) in pairs {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        sum += a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    }
    Ok(sum / e as f64)
}

/// Inverse stop frequency scaled by the epoch length.
pub fn compute_psi(epoch_length: u64, stop_count: u64) -> Result<f64> {
    if stop_count == 0 {
        return Err(Error::EmptyInput("stops in window"));
    }
    Ok(epoch_length as f64 / stop_count as f64)
}

/// Per-epoch bookkeeping of one node, restricted to complete epochs
/// inside the evaluation split.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochDetail {
    pub node_id: usize,
    /// Window as (start_exclusive, end_inclusive].
    pub epoch_start: u64,
    pub epoch_end: u64,
    /// First stop position relative to the window start, in [1, T].
    pub t_star: u64,
    pub stops: u64,
    pub voluntary: u64,
    pub forced: u64,
    /// Mean synopsis drift over the epoch's stops.
    pub delta_mean: f64,
}

/// Aggregated report of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub phi: f64,
    pub delta: f64,
    pub psi: f64,
    pub epochs: Vec<EpochDetail>,
}

impl MetricsReport {
    /// Aggregates per-epoch rows of a single run: `phi` and `psi` average
    /// over epochs, `delta` averages the per-epoch mean drift.
    pub fn from_epochs(epochs: Vec<EpochDetail>, epoch_length: u64) -> Result<Self> {
        if epochs.is_empty() {
            return Err(Error::EmptyInput("epoch rows"));
        }
        let t = epoch_length as f64;
        let n = epochs.len() as f64;
        let phi = epochs.iter().map(|e| e.t_star as f64 / t).sum::<f64>() / n;
        let delta = epochs.iter().map(|e| e.delta_mean).sum::<f64>() / n;
        let mut psi = 0.0;
        for e in &epochs {
            psi += compute_psi(epoch_length, e.stops)?;
        }
        psi /= n;
        Ok(Self {
            phi,
            delta,
            psi,
            epochs,
        })
    }

    /// Independent double-entry recomputation: re-scans a decision trace,
    /// regroups stops onto each node's epoch grid and rebuilds the report
    /// without touching the simulator's own accounting.
    pub fn from_trace_rescan(
        traces: &[DecisionTrace],
        clocks: &[(usize, EpochClock)],
        eval_start: &[(usize, u64)],
        epoch_length: u64,
    ) -> Result<Self> {
        let mut epochs: Vec<EpochDetail> = Vec::new();
        for (node_id, clock) in clocks {
            let start = eval_start
                .iter()
                .find(|(n, _)| n == node_id)
                .map(|(_, s)| *s)
                .ok_or(Error::EmptyInput("evaluation start for node"))?;
            let mut rows: Vec<(u64, u64, Vec<&DecisionTrace>)> = Vec::new();
            for tr in traces.iter().filter(|t| t.node_id == *node_id) {
                let (ws, we) = clock.epoch_window(tr.step);
                if we - ws != epoch_length || ws + 1 < start {
                    continue;
                }
                match rows.last_mut() {
                    Some((s, _, list)) if *s == ws => list.push(tr),
                    _ => rows.push((ws, we, vec![tr])),
                }
            }
            for (ws, we, list) in rows {
                // Only complete epochs: every step of the window was traced.
                if list.len() as u64 != epoch_length {
                    continue;
                }
                let stops: Vec<&&DecisionTrace> =
                    list.iter().filter(|t| t.decision.is_stop()).collect();
                if stops.is_empty() {
                    continue;
                }
                let first = stops.iter().map(|t| t.step).min().unwrap();
                // In the default quantum mode the raw quantum at a stop step
                // is exactly the drift against the last delivered synopsis.
                let delta_sum: f64 = stops.iter().map(|t| t.e_raw).sum();
                epochs.push(EpochDetail {
                    node_id: *node_id,
                    epoch_start: ws,
                    epoch_end: we,
                    t_star: first - ws,
                    stops: stops.len() as u64,
                    voluntary: stops
                        .iter()
                        .filter(|t| t.decision == Decision::Disseminate)
                        .count() as u64,
                    forced: stops
                        .iter()
                        .filter(|t| t.decision == Decision::Forced)
                        .count() as u64,
                    delta_mean: delta_sum / stops.len() as f64,
                });
            }
        }
        epochs.sort_by_key(|e| (e.node_id, e.epoch_start));
        Self::from_epochs(epochs, epoch_length)
    }
}
