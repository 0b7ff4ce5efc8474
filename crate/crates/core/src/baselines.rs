//! Comparison policies: disseminate-on-any-change (BM) and the
//! prediction-based model (PM) built on double exponential smoothing.

use crate::decision::Verdict;
use crate::synopsis::UpdateQuantum;

/// BM: any observed change triggers dissemination.
pub fn bm_decide(e: &UpdateQuantum) -> Verdict {
    if e.value > 0.0 {
        Verdict::Disseminate
    } else {
        Verdict::Hold
    }
}

/// Double-exponential-smoothing state over the normalized quanta series.
///
/// The first observation seeds the level, the second seeds the trend as
/// the difference to the first; afterwards the usual recurrence applies:
/// `level' = a*e + (1-a)*(level + trend)`,
/// `trend' = b*(level' - level) + (1-b)*trend`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoltState {
    pub level: f64,
    pub trend: f64,
    pub alpha: f64,
    pub beta: f64,
    pub observations_seen: u64,
}

impl HoltState {
    pub fn new(alpha: f64, beta: f64) -> Self {
        debug_assert!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0);
        Self {
            level: 0.0,
            trend: 0.0,
            alpha,
            beta,
            observations_seen: 0,
        }
    }

    pub fn update(&mut self, e_norm: f64) {
        match self.observations_seen {
            0 => self.level = e_norm,
            1 => self.trend = e_norm - self.level,
            _ => {
                let level_prev = self.level;
                self.level = self.alpha * e_norm + (1.0 - self.alpha) * (self.level + self.trend);
                self.trend =
                    self.beta * (self.level - level_prev) + (1.0 - self.beta) * self.trend;
            }
        }
        self.observations_seen += 1;
    }

    /// One-step-ahead forecast; meaningful once two observations arrived.
    pub fn forecast(&self) -> f64 {
        self.level + self.trend
    }

    /// Forgets everything; used when the smoothed series itself restarts.
    pub fn reset(&mut self) {
        self.level = 0.0;
        self.trend = 0.0;
        self.observations_seen = 0;
    }
}

/// PM: disseminate when the smoothed one-step forecast of the normalized
/// quanta exceeds the threshold, after a warm-up of `warmup` observations.
pub fn pm_decide(state: &HoltState, theta: f64, warmup: u64) -> Verdict {
    if state.observations_seen < warmup {
        return Verdict::Hold;
    }
    if state.forecast() > theta {
        Verdict::Disseminate
    } else {
        Verdict::Hold
    }
}
