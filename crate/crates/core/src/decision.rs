//! Per-node dissemination policy: fuzzy scores over the past and forecast
//! quanta triples, geometric-mean fusion, threshold gate, and the forced
//! dissemination clock at staggered epoch boundaries.

use crate::error::Result;
use crate::fuzzy::{infer_dod, RuleBase, TermSets};
use crate::lstm::{forecast3, LstmCell};
use crate::synopsis::{NormalizationCalibration, QuantaSeries};

/// Voluntary verdict of a policy, before the forced-epoch rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Disseminate,
    Hold,
}

/// Final per-step outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Disseminate,
    Hold,
    Forced,
}

impl Decision {
    pub fn name(self) -> &'static str {
        match self {
            Decision::Disseminate => "disseminate",
            Decision::Hold => "hold",
            Decision::Forced => "forced",
        }
    }

    pub fn is_stop(self) -> bool {
        !matches!(self, Decision::Hold)
    }
}

/// Geometric mean of the two degrees of distribution. Strict by
/// construction: one silent side zeroes the outcome.
pub fn fuse(dod_p: f64, dod_f: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&dod_p) && (0.0..=1.0).contains(&dod_f));
    (dod_p * dod_f).sqrt()
}

/// Threshold and epoch grid of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionPolicy {
    pub theta: f64,
    pub epoch_length: u64,
    pub phase_offset: u64,
}

impl DecisionPolicy {
    /// Deterministic stagger realizing per-node epoch grids:
    /// node `i` of `n` gets offset `floor(i * T / n)`.
    pub fn staggered(theta: f64, epoch_length: u64, node_id: usize, n_nodes: usize) -> Self {
        Self {
            theta,
            epoch_length,
            phase_offset: (node_id as u64 * epoch_length) / n_nodes as u64,
        }
    }
}

/// Tracks the node's epoch grid, whether the running epoch already saw a
/// dissemination (which suppresses the forced message at its boundary),
/// and the gap deadline.
///
/// A boundary dissemination alone would not bound staleness: a voluntary
/// stop early in an epoch suppresses that boundary, and the next stop may
/// come only at the end of the following epoch, a gap of almost two
/// epochs. The clock therefore also forces a dissemination exactly one
/// epoch length after the previous one.
#[derive(Debug, Clone)]
pub struct EpochClock {
    epoch_length: u64,
    phase_offset: u64,
    disseminated_this_epoch: bool,
    last_dissemination: u64,
}

impl EpochClock {
    pub fn new(epoch_length: u64, phase_offset: u64) -> Self {
        assert!(epoch_length > 0);
        assert!(phase_offset < epoch_length);
        Self {
            epoch_length,
            phase_offset,
            disseminated_this_epoch: false,
            last_dissemination: 0,
        }
    }

    pub fn epoch_length(&self) -> u64 {
        self.epoch_length
    }

    pub fn is_boundary(&self, step: u64) -> bool {
        step >= self.phase_offset
            && step > 0
            && (step - self.phase_offset) % self.epoch_length == 0
    }

    /// True when a forced message is owed: an unserved epoch boundary, or
    /// the gap since the last dissemination reaching the epoch length.
    pub fn forced_due(&self, step: u64) -> bool {
        (self.is_boundary(step) && !self.disseminated_this_epoch)
            || step - self.last_dissemination >= self.epoch_length
    }

    pub fn note_dissemination(&mut self, step: u64) {
        self.disseminated_this_epoch = true;
        self.last_dissemination = step;
    }

    /// Call after a step is fully processed; a boundary closes the epoch.
    pub fn finish_step(&mut self, step: u64) {
        if self.is_boundary(step) {
            self.disseminated_this_epoch = false;
        }
    }

    /// Epoch window containing `step` as `(start_exclusive, end_inclusive)`.
    /// Steps at or before the phase offset fall into a stub window
    /// `(0, phase_offset]` shorter than a full epoch.
    pub fn epoch_window(&self, step: u64) -> (u64, u64) {
        if step <= self.phase_offset {
            return (0, self.phase_offset);
        }
        let pos = step - self.phase_offset;
        let idx = pos.div_ceil(self.epoch_length);
        let end = self.phase_offset + idx * self.epoch_length;
        (end - self.epoch_length, end)
    }
}

/// Gate diagnostics of one evaluated step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDetail {
    pub past: [f64; 3],
    pub forecast: [f64; 3],
    pub dod_p: f64,
    pub dod_f: f64,
    pub fused: f64,
}

/// Outcome of the voluntary gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOutcome {
    pub verdict: Verdict,
    /// Absent during warm-up (fewer than three quanta since the last
    /// dissemination), when the triples are undefined.
    pub detail: Option<GateDetail>,
}

/// The full uncertainty-driven gate of one node: trained forecaster, fuzzy
/// knowledge base and the node's normalization scale.
#[derive(Debug, Clone)]
pub struct UdsdmEngine {
    theta: f64,
    lstm: LstmCell,
    rulebase: RuleBase,
    sets: TermSets,
    cal: NormalizationCalibration,
}

impl UdsdmEngine {
    pub fn new(
        theta: f64,
        lstm: LstmCell,
        rulebase: RuleBase,
        sets: TermSets,
        cal: NormalizationCalibration,
    ) -> Self {
        Self {
            theta,
            lstm,
            rulebase,
            sets,
            cal,
        }
    }

    pub fn calibration(&self) -> &NormalizationCalibration {
        &self.cal
    }

    /// Scores the past triple and its three-step forecast, fuses both, and
    /// fires strictly above theta. Fewer than three accumulated quanta hold.
    pub fn decide(&self, quanta: &QuantaSeries) -> Result<GateOutcome> {
        let Some(raw) = quanta.last_three() else {
            return Ok(GateOutcome {
                verdict: Verdict::Hold,
                detail: None,
            });
        };
        let mut past = [0.0; 3];
        for (out, v) in past.iter_mut().zip(raw) {
            *out = self.cal.normalize(&crate::synopsis::UpdateQuantum {
                value: v,
                step: 0,
            })?;
        }
        let forecast = forecast3(&self.lstm, past)?;
        let dod_p = infer_dod(&self.rulebase, &self.sets, past)?;
        let dod_f = infer_dod(&self.rulebase, &self.sets, forecast)?;
        let fused = fuse(dod_p, dod_f);
        let verdict = if fused > self.theta {
            Verdict::Disseminate
        } else {
            Verdict::Hold
        };
        Ok(GateOutcome {
            verdict,
            detail: Some(GateDetail {
                past,
                forecast,
                dod_p,
                dod_f,
                fused,
            }),
        })
    }
}

/// One row of the per-step decision trace. Gate fields stay empty for the
/// baselines and during warm-up.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTrace {
    pub node_id: usize,
    pub step: u64,
    pub e_raw: f64,
    pub e_norm: f64,
    pub past: Option<[f64; 3]>,
    pub forecast: Option<[f64; 3]>,
    pub dod_p: Option<f64>,
    pub dod_f: Option<f64>,
    pub fused: Option<f64>,
    pub decision: Decision,
}

impl DecisionTrace {
    /// CSV row matching the header
    /// `node_id,step,e_raw,e_norm,dod_p,dod_f,G,decision`.
    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.node_id,
            self.step,
            self.e_raw,
            self.e_norm,
            opt(self.dod_p),
            opt(self.dod_f),
            opt(self.fused),
            self.decision.name()
        )
    }

    /// Internal consistency of one trace row against its policy.
    /// `last_stop_before` is the node's previous dissemination step (0 at
    /// the start), needed to validate gap-deadline forced messages.
    pub fn is_consistent(&self, theta: f64, clock: &EpochClock, last_stop_before: u64) -> bool {
        if let (Some(p), Some(f), Some(g)) = (self.dod_p, self.dod_f, self.fused) {
            if (g - fuse(p, f)).abs() > 1e-12 {
                return false;
            }
            if self.decision == Decision::Disseminate && g <= theta {
                return false;
            }
        } else if self.decision == Decision::Disseminate {
            return false;
        }
        if self.decision == Decision::Forced
            && !clock.is_boundary(self.step)
            && self.step - last_stop_before < clock.epoch_length()
        {
            return false;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::CandidateActivation;
    use crate::synopsis::UpdateQuantum;

    #[test]
    fn fusion_examples() {
        assert_eq!(fuse(0.0, 0.9), 0.0);
        for a in [0.0, 0.25, 0.5, 0.77, 1.0] {
            assert!((fuse(a, a) - a).abs() < 1e-12);
        }
        assert!((fuse(0.64, 0.81) - 0.72).abs() < 1e-12);
    }

    #[test]
    fn fusion_lies_between_min_and_max() {
        for i in 0..=20 {
            for j in 0..=20 {
                let a = i as f64 / 20.0;
                let b = j as f64 / 20.0;
                let g = fuse(a, b);
                assert!(g >= a.min(b) - 1e-12);
                assert!(g <= a.max(b) + 1e-12);
            }
        }
    }

    #[test]
    fn gate_threshold_arithmetic() {
        let g = fuse(0.9, 0.7);
        assert!((g - 0.793725).abs() < 1e-6);
        assert!(g > 0.75);
        assert_eq!(fuse(0.9, 0.0), 0.0);
    }

    #[test]
    fn staggered_offsets() {
        let t = 100;
        let n = 2;
        assert_eq!(DecisionPolicy::staggered(0.6, t, 0, n).phase_offset, 0);
        assert_eq!(DecisionPolicy::staggered(0.6, t, 1, n).phase_offset, 50);
        let offsets: Vec<u64> = (0..6)
            .map(|i| DecisionPolicy::staggered(0.6, 100, i, 6).phase_offset)
            .collect();
        assert_eq!(offsets, vec![0, 16, 33, 50, 66, 83]);
    }

    #[test]
    fn clock_forces_once_per_epoch() {
        let mut clock = EpochClock::new(10, 0);
        let mut forced = Vec::new();
        for step in 1..=30 {
            if clock.forced_due(step) {
                forced.push(step);
                clock.note_dissemination(step);
            }
            clock.finish_step(step);
        }
        assert_eq!(forced, vec![10, 20, 30]);
    }

    #[test]
    fn voluntary_dissemination_suppresses_forced_until_gap_deadline() {
        let mut clock = EpochClock::new(10, 0);
        let mut forced = Vec::new();
        for step in 1..=24 {
            if step == 4 {
                clock.note_dissemination(step);
            } else if clock.forced_due(step) {
                forced.push(step);
                clock.note_dissemination(step);
            }
            clock.finish_step(step);
        }
        // The stop at 4 satisfies epoch (0, 10]; the next forced message
        // comes one full epoch length after it, then the grid realigns.
        assert_eq!(forced, vec![14, 24]);
    }

    #[test]
    fn gap_between_disseminations_never_exceeds_epoch_length() {
        let t = 10;
        for voluntary in [3u64, 7, 9, 11, 15] {
            let mut clock = EpochClock::new(t, 0);
            let mut last = 0u64;
            for step in 1..=60 {
                let stop = step == voluntary || clock.forced_due(step);
                if stop {
                    assert!(step - last <= t, "gap {} at {step}", step - last);
                    last = step;
                    clock.note_dissemination(step);
                }
                clock.finish_step(step);
            }
        }
    }

    #[test]
    fn epoch_windows_follow_the_offset_grid() {
        let clock = EpochClock::new(100, 50);
        assert_eq!(clock.epoch_window(30), (0, 50));
        assert_eq!(clock.epoch_window(50), (0, 50));
        assert_eq!(clock.epoch_window(51), (50, 150));
        assert_eq!(clock.epoch_window(150), (50, 150));
        assert_eq!(clock.epoch_window(151), (150, 250));

        let aligned = EpochClock::new(100, 0);
        assert_eq!(aligned.epoch_window(1), (0, 100));
        assert_eq!(aligned.epoch_window(100), (0, 100));
        assert_eq!(aligned.epoch_window(101), (100, 200));
    }

    fn engine_with_constant_forecast(theta: f64) -> UdsdmEngine {
        // Zero LSTM with a high readout bias forecasts saturated quanta.
        let h = 4;
        let mut params = vec![0.0; LstmCell::param_count(h)];
        let n = params.len();
        params[n - 1] = 1.0;
        let lstm = LstmCell::from_flat(h, CandidateActivation::Logistic, params).unwrap();
        UdsdmEngine::new(
            theta,
            lstm,
            RuleBase::standard(),
            TermSets::standard(),
            NormalizationCalibration::new(0.0, 1.0).unwrap(),
        )
    }

    fn series(values: &[f64]) -> QuantaSeries {
        let mut qs = QuantaSeries::new();
        for (i, &v) in values.iter().enumerate() {
            qs.push(UpdateQuantum {
                value: v,
                step: (i + 1) as u64,
            })
            .unwrap();
        }
        qs
    }

    #[test]
    fn warmup_holds_without_detail() {
        let engine = engine_with_constant_forecast(0.1);
        let out = engine.decide(&series(&[0.9, 0.9])).unwrap();
        assert_eq!(out.verdict, Verdict::Hold);
        assert!(out.detail.is_none());
    }

    #[test]
    fn saturated_quanta_fire_the_gate() {
        let engine = engine_with_constant_forecast(0.6);
        let out = engine.decide(&series(&[0.2, 1.0, 1.0, 1.0])).unwrap();
        let detail = out.detail.unwrap();
        assert!(detail.dod_p > 0.75, "dod_p {}", detail.dod_p);
        assert!(detail.fused > 0.6, "fused {}", detail.fused);
        assert_eq!(out.verdict, Verdict::Disseminate);
    }

    #[test]
    fn quiet_quanta_hold_the_gate() {
        let engine = engine_with_constant_forecast(0.6);
        let out = engine.decide(&series(&[0.0, 0.0, 0.0])).unwrap();
        let detail = out.detail.unwrap();
        // Forecast side is saturated, past side is silent: the strict
        // multiplicative fusion stays low.
        assert!(detail.dod_p <= 0.25);
        assert!((detail.fused - fuse(detail.dod_p, detail.dod_f)).abs() < 1e-12);
        assert_eq!(out.verdict, Verdict::Hold);
    }

    #[test]
    fn trace_rows_validate_their_invariants() {
        let clock = EpochClock::new(100, 0);
        let good = DecisionTrace {
            node_id: 0,
            step: 42,
            e_raw: 1.5,
            e_norm: 0.8,
            past: Some([0.7, 0.75, 0.8]),
            forecast: Some([0.85, 0.9, 0.9]),
            dod_p: Some(0.8),
            dod_f: Some(0.9),
            fused: Some(fuse(0.8, 0.9)),
            decision: Decision::Disseminate,
        };
        assert!(good.is_consistent(0.6, &clock, 0));

        let bad_gate = DecisionTrace {
            fused: Some(0.5),
            ..good.clone()
        };
        assert!(!bad_gate.is_consistent(0.6, &clock, 0));

        let bad_forced = DecisionTrace {
            decision: Decision::Forced,
            ..good.clone()
        };
        // Step 42 is neither a boundary nor one epoch after the last stop.
        assert!(!bad_forced.is_consistent(0.6, &clock, 10));
        // One epoch after a stop at 42 - 100 would be legitimate, as is a
        // boundary step.
        let gap_forced = DecisionTrace {
            step: 110,
            decision: Decision::Forced,
            ..good.clone()
        };
        assert!(gap_forced.is_consistent(0.6, &clock, 10));
    }
}
