//! Incremental per-node synopses and update quanta.
//!
//! A synopsis summarises every vector a node has seen so far as the
//! per-dimension running mean followed by the per-dimension population
//! standard deviation, so a `d`-dimensional stream yields a `2d`-entry
//! synopsis. The update quantum is the L1 distance between the current
//! synopsis and the last one delivered to peers.

use crate::error::{Error, Result};

/// One multivariate sensor reading.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextVector {
    components: Vec<f64>,
}

impl ContextVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "context vector component",
            });
        }
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }
}

/// Running summary of a node's dataset: `d` means followed by `d`
/// population standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct Synopsis {
    values: Vec<f64>,
    dim: usize,
    step: u64,
    count: u64,
}

impl Synopsis {
    /// Empty synopsis over a `d`-dimensional stream (all entries zero).
    pub fn empty(dim: usize) -> Self {
        Self {
            values: vec![0.0; 2 * dim],
            dim,
            step: 0,
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Full value vector: means then standard deviations (`l = 2d`).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn means(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn std_devs(&self) -> &[f64] {
        &self.values[self.dim..]
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Folds one vector into the summary with the single-pass mean/variance
    /// recurrence (Welford). The stored standard deviation is converted back
    /// to the running sum of squared deviations before the update, so the
    /// synopsis stays a plain value vector.
    pub fn observe(&mut self, x: &ContextVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let n = self.count as f64;
        let n1 = n + 1.0;
        for (j, &xj) in x.components().iter().enumerate() {
            let mean = self.values[j];
            let std = self.values[self.dim + j];
            let m2 = std * std * n;
            let delta = xj - mean;
            let mean_new = mean + delta / n1;
            let m2_new = m2 + delta * (xj - mean_new);
            self.values[j] = mean_new;
            self.values[self.dim + j] = (m2_new.max(0.0) / n1).sqrt();
        }
        self.count += 1;
        self.step += 1;
        Ok(())
    }

    /// L1 distance to another synopsis of the same length.
    pub fn l1_distance(&self, other: &Synopsis) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Serialises the synopsis as the message-log CSV row
    /// `node_id,step,count,v1,...,vl`.
    pub fn to_csv_row(&self, node_id: usize) -> String {
        let mut row = format!("{},{},{}", node_id, self.step, self.count);
        for v in &self.values {
            row.push(',');
            row.push_str(&format!("{v}"));
        }
        row
    }
}

/// Magnitude of synopsis change since the last dissemination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateQuantum {
    pub value: f64,
    pub step: u64,
}

/// Computes the update quantum of `current` relative to the last
/// disseminated synopsis.
pub fn update_quantum(current: &Synopsis, last_sent: &Synopsis) -> Result<UpdateQuantum> {
    Ok(UpdateQuantum {
        value: current.l1_distance(last_sent)?,
        step: current.step(),
    })
}

/// Min/max scaling learned from a node's training quanta; maps raw quanta
/// onto the shared [0, 1] universe used by the fuzzy system and the
/// prediction baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationCalibration {
    min: f64,
    max: f64,
}

impl NormalizationCalibration {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidCalibration { min, max });
        }
        Ok(Self { min, max })
    }

    /// Calibrates on the observed raw quanta. `tail_fraction` restricts the
    /// scan to the trailing part of the series (1.0 scans everything): the
    /// cold-start transient of a cumulative synopsis dwarfs steady-state
    /// drift and would freeze the unit scale otherwise.
    pub fn from_series(raw: &[f64], tail_fraction: f64) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput("calibration series"));
        }
        let keep = ((raw.len() as f64) * tail_fraction.clamp(0.0, 1.0)).ceil() as usize;
        let tail = &raw[raw.len() - keep.clamp(1, raw.len())..];
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in tail {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "calibration quantum",
                });
            }
            min = min.min(v);
            max = max.max(v);
        }
        if min >= max {
            // Degenerate (constant) series: widen so normalisation is defined.
            max = min + 1.0;
        }
        Self::new(min, max)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Clamped min-max normalisation onto [0, 1].
    pub fn normalize(&self, e: &UpdateQuantum) -> Result<f64> {
        if !e.value.is_finite() {
            return Err(Error::NonFinite {
                context: "update quantum",
            });
        }
        Ok(((e.value - self.min) / (self.max - self.min)).clamp(0.0, 1.0))
    }
}

/// Update quanta accumulated since the last dissemination, oldest first.
#[derive(Debug, Clone, Default)]
pub struct QuantaSeries {
    quanta: Vec<UpdateQuantum>,
}

impl QuantaSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a quantum; steps must be strictly increasing.
    pub fn push(&mut self, e: UpdateQuantum) -> Result<()> {
        if let Some(last) = self.quanta.last() {
            if e.step <= last.step {
                return Err(Error::InvalidArgument(format!(
                    "quantum step {} not after {}",
                    e.step, last.step
                )));
            }
        }
        self.quanta.push(e);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.quanta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quanta.is_empty()
    }

    /// Cleared on dissemination.
    pub fn clear(&mut self) {
        self.quanta.clear();
    }

    pub fn quanta(&self) -> &[UpdateQuantum] {
        &self.quanta
    }

    /// Last three raw quantum values, oldest first.
    pub fn last_three(&self) -> Option<[f64; 3]> {
        let n = self.quanta.len();
        if n < 3 {
            return None;
        }
        Some([
            self.quanta[n - 3].value,
            self.quanta[n - 2].value,
            self.quanta[n - 1].value,
        ])
    }
}
