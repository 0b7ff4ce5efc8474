//! Runtime parameter file: line-oriented `key = value` pairs overriding
//! the fuzzy, forecaster and smoothing defaults. Parse errors name the
//! offending line.

use crate::error::{Error, Result};
use crate::fuzzy::{IT2Set, Interval, RuleBase, Term, TermSets, Triangular};
use crate::lstm::{CandidateActivation, TrainConfig};
use std::path::Path;

/// Which reference the update quantum is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumBaseline {
    /// Distance to the last disseminated synopsis (default).
    LastSent,
    /// Distance to the previous step's synopsis, for sensitivity runs.
    PreviousStep,
}

/// Per-term fuzzy shape overrides.
#[derive(Debug, Clone, Copy)]
pub struct FuzzyTermSpec {
    pub upper: Triangular,
    pub lower_scale: f64,
    pub centroid: Interval,
}

/// Everything the pipeline can be tuned with at run time.
#[derive(Debug, Clone)]
pub struct RuntimeParams {
    pub fuzzy_low: FuzzyTermSpec,
    pub fuzzy_medium: FuzzyTermSpec,
    pub fuzzy_high: FuzzyTermSpec,
    pub lstm: TrainConfig,
    pub holt_alpha: f64,
    pub holt_beta: f64,
    /// Warm-up observations before the prediction baseline may stop.
    pub pm_warmup: u64,
    pub quantum_baseline: QuantumBaseline,
    /// Trailing fraction of the training quanta used for min-max
    /// calibration; the cold-start transient is excluded.
    pub calibration_tail: f64,
}

impl Default for RuntimeParams {
    fn default() -> Self {
        Self {
            fuzzy_low: FuzzyTermSpec {
                upper: Triangular::new(0.0, 0.0, 0.5).unwrap(),
                lower_scale: 0.8,
                centroid: Interval::new(0.05, 0.15).unwrap(),
            },
            fuzzy_medium: FuzzyTermSpec {
                upper: Triangular::new(0.1, 0.5, 0.9).unwrap(),
                lower_scale: 0.8,
                centroid: Interval::new(0.45, 0.55).unwrap(),
            },
            fuzzy_high: FuzzyTermSpec {
                upper: Triangular::new(0.5, 1.0, 1.0).unwrap(),
                lower_scale: 0.8,
                centroid: Interval::new(0.85, 0.95).unwrap(),
            },
            lstm: TrainConfig::default(),
            // Window-W exponential smoothing constant: 2 / (W + 1).
            holt_alpha: 2.0 / 11.0,
            holt_beta: 2.0 / 11.0,
            pm_warmup: 10,
            quantum_baseline: QuantumBaseline::LastSent,
            calibration_tail: 0.1,
        }
    }
}

impl RuntimeParams {
    pub fn term_sets(&self) -> Result<TermSets> {
        Ok(TermSets {
            low: IT2Set::new(Term::Low, self.fuzzy_low.upper, self.fuzzy_low.lower_scale)?,
            medium: IT2Set::new(
                Term::Medium,
                self.fuzzy_medium.upper,
                self.fuzzy_medium.lower_scale,
            )?,
            high: IT2Set::new(Term::High, self.fuzzy_high.upper, self.fuzzy_high.lower_scale)?,
        })
    }

    pub fn rule_base(&self) -> RuleBase {
        RuleBase::monotone([
            self.fuzzy_low.centroid,
            self.fuzzy_medium.centroid,
            self.fuzzy_high.centroid,
        ])
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut params = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ConfigLine {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            params.apply(key.trim(), value.trim(), line_no)?;
        }
        params.validate()?;
        Ok(params)
    }

    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let bad = |message: String| Error::ConfigLine { line, message };
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| bad(format!("`{v}` is not a number")))
        };
        let parse_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| bad(format!("`{v}` is not a non-negative integer")))
        };
        let parse_triple = |v: &str| -> Result<Triangular> {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad(format!("`{v}` is not `left, apex, right`")));
            }
            Triangular::new(parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?)
                .map_err(|e| bad(e.to_string()))
        };
        let parse_interval = |v: &str| -> Result<Interval> {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(bad(format!("`{v}` is not `lower, upper`")));
            }
            Interval::new(parse_f64(parts[0])?, parse_f64(parts[1])?)
                .map_err(|e| bad(e.to_string()))
        };

        match key {
            "fuzzy.low.upper" => self.fuzzy_low.upper = parse_triple(value)?,
            "fuzzy.medium.upper" => self.fuzzy_medium.upper = parse_triple(value)?,
            "fuzzy.high.upper" => self.fuzzy_high.upper = parse_triple(value)?,
            "fuzzy.low.lower_scale" => self.fuzzy_low.lower_scale = parse_f64(value)?,
            "fuzzy.medium.lower_scale" => self.fuzzy_medium.lower_scale = parse_f64(value)?,
            "fuzzy.high.lower_scale" => self.fuzzy_high.lower_scale = parse_f64(value)?,
            "fuzzy.low.centroid" => self.fuzzy_low.centroid = parse_interval(value)?,
            "fuzzy.medium.centroid" => self.fuzzy_medium.centroid = parse_interval(value)?,
            "fuzzy.high.centroid" => self.fuzzy_high.centroid = parse_interval(value)?,
            "lstm.hidden" => self.lstm.hidden_size = parse_usize(value)?,
            "lstm.learning_rate" => self.lstm.learning_rate = parse_f64(value)?,
            "lstm.epochs" => self.lstm.epochs = parse_usize(value)?,
            "lstm.window" => self.lstm.window_length = parse_usize(value)?,
            "lstm.max_windows" => {
                let v = parse_usize(value)?;
                self.lstm.max_windows = if v == 0 { None } else { Some(v) };
            }
            "lstm.activation" => {
                self.lstm.candidate_activation = CandidateActivation::from_name(value)
                    .ok_or_else(|| bad(format!("`{value}` is not `sigmoid` or `tanh`")))?;
            }
            "holt.alpha" => self.holt_alpha = parse_f64(value)?,
            "holt.beta" => self.holt_beta = parse_f64(value)?,
            "pm.warmup" => self.pm_warmup = parse_usize(value)? as u64,
            "quantum.baseline" => {
                self.quantum_baseline = match value {
                    "last-sent" => QuantumBaseline::LastSent,
                    "previous-step" => QuantumBaseline::PreviousStep,
                    _ => {
                        return Err(bad(format!(
                            "`{value}` is not `last-sent` or `previous-step`"
                        )))
                    }
                };
            }
            "calibration.tail" => self.calibration_tail = parse_f64(value)?,
            _ => return Err(bad(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("holt.alpha", self.holt_alpha), ("holt.beta", self.holt_beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} must be in (0, 1)"
                )));
            }
        }
        if !(self.calibration_tail > 0.0 && self.calibration_tail <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "calibration.tail = {} must be in (0, 1]",
                self.calibration_tail
            )));
        }
        self.term_sets()?;
        Ok(())
    }
}
