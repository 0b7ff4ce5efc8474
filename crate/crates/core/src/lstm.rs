//! Scalar-input LSTM for short-horizon forecasting of update quanta.
//!
//! One recurrent cell with forget, external-input and output gates, a cell
//! candidate, and a linear readout that emits the one-step-ahead
//! prediction. The candidate nonlinearity defaults to the logistic
//! function; a config switch selects the conventional tanh candidate.
//! Training is plain full-batch gradient descent with gradient-norm
//! clipping, backpropagating through time over sliding windows.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;

/// Nonlinearity applied to the cell candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateActivation {
    /// Logistic candidate, matching the printed state-update equation.
    Logistic,
    /// Conventional tanh candidate.
    Tanh,
}

impl CandidateActivation {
    pub fn name(self) -> &'static str {
        match self {
            CandidateActivation::Logistic => "sigmoid",
            CandidateActivation::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sigmoid" => Some(CandidateActivation::Logistic),
            "tanh" => Some(CandidateActivation::Tanh),
            _ => None,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            CandidateActivation::Logistic => logistic(x),
            CandidateActivation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation value.
    fn derivative_from_value(self, y: f64) -> f64 {
        match self {
            CandidateActivation::Logistic => y * (1.0 - y),
            CandidateActivation::Tanh => 1.0 - y * y,
        }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

const GATE_COUNT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Forget = 0,
    Input = 1,
    Output = 2,
    Candidate = 3,
}

const GATES: [Gate; GATE_COUNT] = [Gate::Forget, Gate::Input, Gate::Output, Gate::Candidate];

/// Hidden and cell state of the recurrent cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            hidden: vec![0.0; hidden_size],
            cell: vec![0.0; hidden_size],
        }
    }
}

/// All trainable parameters of one cell, stored flat.
///
/// Layout: for each gate in order forget, external-input, output,
/// candidate: bias (H), input weights U (H), recurrent weights Z (H*H,
/// row-major); then the readout weights (H) and the readout bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell {
    hidden: usize,
    activation: CandidateActivation,
    params: Vec<f64>,
}

impl LstmCell {
    fn gate_block(hidden: usize) -> usize {
        hidden * (hidden + 2)
    }

    pub fn param_count(hidden: usize) -> usize {
        GATE_COUNT * Self::gate_block(hidden) + hidden + 1
    }

    pub fn zeros(hidden: usize, activation: CandidateActivation) -> Self {
        Self {
            hidden,
            activation,
            params: vec![0.0; Self::param_count(hidden)],
        }
    }

    /// Parameters drawn uniformly from [-0.1, 0.1] with the given generator.
    pub fn init(hidden: usize, activation: CandidateActivation, rng: &mut ChaCha8Rng) -> Self {
        let mut cell = Self::zeros(hidden, activation);
        for p in cell.params.iter_mut() {
            *p = rng.gen_range(-0.1..0.1);
        }
        cell
    }

    pub fn from_flat(
        hidden: usize,
        activation: CandidateActivation,
        params: Vec<f64>,
    ) -> Result<Self> {
        if params.len() != Self::param_count(hidden) {
            return Err(Error::ModelFormat(format!(
                "expected {} parameters for hidden size {hidden}, got {}",
                Self::param_count(hidden),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                context: "lstm parameter",
            });
        }
        Ok(Self {
            hidden,
            activation,
            params,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn activation(&self) -> CandidateActivation {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn bias(&self, gate: Gate) -> &[f64] {
        let base = gate as usize * Self::gate_block(self.hidden);
        &self.params[base..base + self.hidden]
    }

    fn input_weights(&self, gate: Gate) -> &[f64] {
        let base = gate as usize * Self::gate_block(self.hidden) + self.hidden;
        &self.params[base..base + self.hidden]
    }

    fn recurrent_weights(&self, gate: Gate) -> &[f64] {
        let base = gate as usize * Self::gate_block(self.hidden) + 2 * self.hidden;
        &self.params[base..base + self.hidden * self.hidden]
    }

    fn readout_weights(&self) -> &[f64] {
        let base = GATE_COUNT * Self::gate_block(self.hidden);
        &self.params[base..base + self.hidden]
    }

    pub fn readout_bias(&self) -> f64 {
        self.params[GATE_COUNT * Self::gate_block(self.hidden) + self.hidden]
    }

    /// Pre-activation of one gate: b + U * x + Z * h.
    fn pre_activation(&self, gate: Gate, x: f64, h: &[f64], out: &mut [f64]) {
        let bias = self.bias(gate);
        let u = self.input_weights(gate);
        let z = self.recurrent_weights(gate);
        for r in 0..self.hidden {
            let row = &z[r * self.hidden..(r + 1) * self.hidden];
            let rec: f64 = row.iter().zip(h).map(|(w, hj)| w * hj).sum();
            out[r] = bias[r] + u[r] * x + rec;
        }
    }

    /// Linear readout of a hidden state.
    pub fn readout(&self, hidden: &[f64]) -> f64 {
        self.readout_weights()
            .iter()
            .zip(hidden)
            .map(|(w, h)| w * h)
            .sum::<f64>()
            + self.readout_bias()
    }
}

/// Per-step tape entry kept for backpropagation.
struct StepTape {
    input: f64,
    h_prev: Vec<f64>,
    cell_prev: Vec<f64>,
    forget: Vec<f64>,
    input_gate: Vec<f64>,
    output_gate: Vec<f64>,
    candidate: Vec<f64>,
    tanh_cell: Vec<f64>,
    h_new: Vec<f64>,
    prediction: f64,
}

fn step_with_tape(cell: &LstmCell, state: &LstmState, x: f64) -> (LstmState, StepTape) {
    let h = cell.hidden;
    let mut a = vec![0.0; h];
    let mut forget = vec![0.0; h];
    let mut input_gate = vec![0.0; h];
    let mut output_gate = vec![0.0; h];
    let mut candidate = vec![0.0; h];

    cell.pre_activation(Gate::Forget, x, &state.hidden, &mut a);
    for r in 0..h {
        forget[r] = logistic(a[r]);
    }
    cell.pre_activation(Gate::Input, x, &state.hidden, &mut a);
    for r in 0..h {
        input_gate[r] = logistic(a[r]);
    }
    cell.pre_activation(Gate::Output, x, &state.hidden, &mut a);
    for r in 0..h {
        output_gate[r] = logistic(a[r]);
    }
    cell.pre_activation(Gate::Candidate, x, &state.hidden, &mut a);
    for r in 0..h {
        candidate[r] = cell.activation.apply(a[r]);
    }

    let mut cell_new = vec![0.0; h];
    let mut tanh_cell = vec![0.0; h];
    let mut h_new = vec![0.0; h];
    for r in 0..h {
        cell_new[r] = forget[r] * state.cell[r] + input_gate[r] * candidate[r];
        tanh_cell[r] = cell_new[r].tanh();
        h_new[r] = tanh_cell[r] * output_gate[r];
    }
    let prediction = cell.readout(&h_new);

    let tape = StepTape {
        input: x,
        h_prev: state.hidden.clone(),
        cell_prev: state.cell.clone(),
        forget,
        input_gate,
        output_gate,
        candidate,
        tanh_cell,
        h_new: h_new.clone(),
        prediction,
    };
    (
        LstmState {
            hidden: h_new,
            cell: cell_new,
        },
        tape,
    )
}

/// Advances the cell by one input.
pub fn lstm_step(cell: &LstmCell, state: &LstmState, e_in: f64) -> Result<LstmState> {
    if !e_in.is_finite() {
        return Err(Error::NonFinite {
            context: "lstm input",
        });
    }
    let (next, _) = step_with_tape(cell, state, e_in);
    if next.hidden.iter().chain(next.cell.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "lstm state",
        });
    }
    Ok(next)
}

/// Three-step-ahead forecast. The cell consumes the three most recent
/// normalized quanta from a zero state, reads out the first prediction and
/// feeds each clamped prediction back as the next input.
pub fn forecast3(cell: &LstmCell, recent: [f64; 3]) -> Result<[f64; 3]> {
    for &v in &recent {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutsideUnitInterval { value: v });
        }
    }
    let mut state = LstmState::zeros(cell.hidden_size());
    for &v in &recent {
        state = lstm_step(cell, &state, v)?;
    }
    let mut out = [0.0; 3];
    out[0] = cell.readout(&state.hidden).clamp(0.0, 1.0);
    for k in 1..3 {
        state = lstm_step(cell, &state, out[k - 1])?;
        out[k] = cell.readout(&state.hidden).clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Mean squared one-step-ahead prediction error over one window, with the
/// cell run teacher-forced from a zero state.
pub fn window_loss(cell: &LstmCell, window: &[f64]) -> f64 {
    let mut state = LstmState::zeros(cell.hidden_size());
    let preds = window.len() - 1;
    let mut loss = 0.0;
    for t in 0..preds {
        let (next, tape) = step_with_tape(cell, &state, window[t]);
        let err = tape.prediction - window[t + 1];
        loss += err * err;
        state = next;
    }
    loss / preds as f64
}

/// Accumulates the gradient of the summed squared errors of one window
/// into `grad` (flat layout identical to the cell's) and returns the sum
/// of squared errors and the number of prediction terms.
fn accumulate_window_gradient(cell: &LstmCell, window: &[f64], grad: &mut [f64]) -> (f64, usize) {
    let h = cell.hidden;
    let preds = window.len() - 1;

    let mut state = LstmState::zeros(h);
    let mut tapes = Vec::with_capacity(preds);
    let mut sq_sum = 0.0;
    for t in 0..preds {
        let (next, tape) = step_with_tape(cell, &state, window[t]);
        let err = tape.prediction - window[t + 1];
        sq_sum += err * err;
        tapes.push(tape);
        state = next;
    }

    let gbs = LstmCell::gate_block(h);
    let readout_base = GATE_COUNT * gbs;
    let mut dh_next = vec![0.0; h];
    let mut dcell_next = vec![0.0; h];
    let mut d_pre = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];

    for t in (0..preds).rev() {
        let tape = &tapes[t];
        let dpred = 2.0 * (tape.prediction - window[t + 1]);

        // Readout.
        grad[readout_base + h] += dpred;
        let w_out = cell.readout_weights();
        let mut dh = vec![0.0; h];
        for r in 0..h {
            grad[readout_base + r] += dpred * tape.h_new[r];
            dh[r] = dpred * w_out[r] + dh_next[r];
        }

        // Through the output composition h = tanh(s) * g_out.
        let mut dcell = vec![0.0; h];
        for r in 0..h {
            let d_out = dh[r] * tape.tanh_cell[r];
            let d_tanh = dh[r] * tape.output_gate[r];
            dcell[r] = d_tanh * (1.0 - tape.tanh_cell[r] * tape.tanh_cell[r]) + dcell_next[r];

            let o = tape.output_gate[r];
            d_pre[Gate::Output as usize][r] = d_out * o * (1.0 - o);

            let f = tape.forget[r];
            d_pre[Gate::Forget as usize][r] = dcell[r] * tape.cell_prev[r] * f * (1.0 - f);

            let i = tape.input_gate[r];
            d_pre[Gate::Input as usize][r] = dcell[r] * tape.candidate[r] * i * (1.0 - i);

            let g = tape.candidate[r];
            d_pre[Gate::Candidate as usize][r] =
                dcell[r] * i * cell.activation.derivative_from_value(g);
        }

        for r in 0..h {
            dcell_next[r] = dcell[r] * tape.forget[r];
            dh_next[r] = 0.0;
        }

        for gate in GATES {
            let gi = gate as usize;
            let base = gi * gbs;
            let z = cell.recurrent_weights(gate);
            for r in 0..h {
                let d = d_pre[gi][r];
                grad[base + r] += d;
                grad[base + h + r] += d * tape.input;
                let row = r * h;
                for c in 0..h {
                    grad[base + 2 * h + row + c] += d * tape.h_prev[c];
                    dh_next[c] += z[row + c] * d;
                }
            }
        }
    }
    (sq_sum, preds)
}

/// Training settings. The hidden size and window cap are artifact knobs;
/// the rest mirrors the decision record: plain gradient descent,
/// learning rate 0.01, 100 epochs, clipping at norm 5.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub window_length: usize,
    pub seed: u64,
    pub candidate_activation: CandidateActivation,
    /// Cap on the number of (evenly spaced) sliding windows per epoch.
    pub max_windows: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        // Small cell, large step count: full-batch descent needs on the
        // order of a thousand updates before the readout stops acting as a
        // constant predictor and the cell tracks its input.
        Self {
            hidden_size: 8,
            learning_rate: 0.3,
            epochs: 800,
            window_length: 4,
            seed: 0,
            candidate_activation: CandidateActivation::Logistic,
            max_windows: Some(128),
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.window_length < 4 {
            return Err(Error::InvalidArgument(format!(
                "window_length {} must be at least 4",
                self.window_length
            )));
        }
        if self.hidden_size == 0 || self.epochs == 0 || self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument(
                "hidden_size, epochs and learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Loss trajectory summary returned next to the trained cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epochs: usize,
}

const GRAD_CLIP_NORM: f64 = 5.0;

/// Trains a cell on a normalized quanta series. Deterministic for a fixed
/// seed; the best-loss parameter snapshot is returned, so the final loss
/// never exceeds the initial one.
pub fn train(series: &[f64], cfg: &TrainConfig) -> Result<(LstmCell, TrainReport)> {
    cfg.validate()?;
    if series.len() < cfg.window_length {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            window: cfg.window_length,
        });
    }
    for &v in series {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutsideUnitInterval { value: v });
        }
    }

    let window_count = series.len() - cfg.window_length + 1;
    let starts: Vec<usize> = match cfg.max_windows {
        Some(cap) if cap > 0 && cap < window_count => (0..cap)
            .map(|i| i * (window_count - 1) / (cap - 1).max(1))
            .collect(),
        _ => (0..window_count).collect(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cell = LstmCell::init(cfg.hidden_size, cfg.candidate_activation, &mut rng);
    let mut grad = vec![0.0; cell.params.len()];

    let epoch_loss_and_grad = |cell: &LstmCell, grad: &mut Vec<f64>| -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut sq_sum = 0.0;
        let mut terms = 0usize;
        for &s in &starts {
            let (sq, n) = accumulate_window_gradient(cell, &series[s..s + cfg.window_length], grad);
            sq_sum += sq;
            terms += n;
        }
        let scale = 1.0 / terms as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        sq_sum * scale
    };

    let mut best_loss = f64::INFINITY;
    let mut best_params = cell.params.clone();
    let mut initial_loss = 0.0;

    for epoch in 0..cfg.epochs {
        let loss = epoch_loss_and_grad(&cell, &mut grad);
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        if epoch == 0 {
            initial_loss = loss;
        }
        if loss < best_loss {
            best_loss = loss;
            best_params.copy_from_slice(&cell.params);
        }

        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let step_scale = if norm > GRAD_CLIP_NORM {
            cfg.learning_rate * GRAD_CLIP_NORM / norm
        } else {
            cfg.learning_rate
        };
        for (p, g) in cell.params.iter_mut().zip(grad.iter()) {
            *p -= step_scale * g;
        }
    }

    // The last update is only kept if it actually improved.
    let mut final_loss = 0.0;
    let mut terms = 0usize;
    for &s in &starts {
        let w = &series[s..s + cfg.window_length];
        final_loss += window_loss(&cell, w) * (w.len() - 1) as f64;
        terms += w.len() - 1;
    }
    final_loss /= terms as f64;
    if !final_loss.is_finite() {
        return Err(Error::TrainingDiverged { epoch: cfg.epochs });
    }
    if final_loss < best_loss {
        best_loss = final_loss;
        best_params.copy_from_slice(&cell.params);
    }
    cell.params = best_params;

    Ok((
        cell,
        TrainReport {
            initial_loss,
            final_loss: best_loss,
            epochs: cfg.epochs,
        },
    ))
}

/// Compares analytic window-loss gradients against central finite
/// differences (step 1e-5) and returns the worst per-parameter error:
/// relative where the gradients are meaningfully sized, absolute below
/// 1e-8 magnitude.
pub fn gradient_check(cell: &LstmCell, window: &[f64]) -> Result<f64> {
    if window.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: window.len(),
            window: 2,
        });
    }
    if window.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "gradient check window",
        });
    }

    let mut analytic = vec![0.0; cell.params.len()];
    let (_, terms) = accumulate_window_gradient(cell, window, &mut analytic);
    let scale = 1.0 / terms as f64;
    analytic.iter_mut().for_each(|g| *g *= scale);

    const EPS: f64 = 1e-5;
    let mut probe = cell.clone();
    let mut worst: f64 = 0.0;
    for k in 0..probe.params.len() {
        let orig = probe.params[k];
        probe.params[k] = orig + EPS;
        let plus = window_loss(&probe, window);
        probe.params[k] = orig - EPS;
        let minus = window_loss(&probe, window);
        probe.params[k] = orig;
        let fd = (plus - minus) / (2.0 * EPS);

        let denom = analytic[k].abs().max(fd.abs());
        let err = if denom < 1e-8 {
            (analytic[k] - fd).abs()
        } else {
            (analytic[k] - fd).abs() / denom
        };
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Writes a cell as a text file: header line `LSTM1,H,activation`, then
/// one parameter per line in the flat layout order.
pub fn save_model(cell: &LstmCell, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "LSTM1,{},{}", cell.hidden_size(), cell.activation().name()).unwrap();
    for p in cell.params() {
        writeln!(out, "{p}").unwrap();
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_model(path: &Path) -> Result<LstmCell> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ModelFormat("empty model file".into()))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 3 || fields[0] != "LSTM1" {
        return Err(Error::ModelFormat(format!("bad header: {header}")));
    }
    let hidden: usize = fields[1]
        .parse()
        .map_err(|_| Error::ModelFormat(format!("bad hidden size: {}", fields[1])))?;
    let activation = CandidateActivation::from_name(fields[2])
        .ok_or_else(|| Error::ModelFormat(format!("unknown activation: {}", fields[2])))?;
    let params = lines
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| Error::ModelFormat(format!("bad parameter line: {l}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    LstmCell::from_flat(hidden, activation, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameter_step_matches_hand_evaluation() {
        let cell = LstmCell::zeros(3, CandidateActivation::Logistic);
        let state = LstmState::zeros(3);
        let next = lstm_step(&cell, &state, 0.7).unwrap();
        // All gates are logistic(0) = 0.5, the candidate is 0.5, so the
        // cell becomes 0.25 and the output tanh(0.25) * 0.5.
        let expected_h = 0.25f64.tanh() * 0.5;
        for r in 0..3 {
            assert!((next.cell[r] - 0.25).abs() < 1e-12);
            assert!((next.hidden[r] - expected_h).abs() < 1e-12);
            assert!((expected_h - 0.122459).abs() < 1e-6);
        }
    }

    #[test]
    fn saturated_gates_preserve_cell_state() {
        let h = 2;
        let mut params = vec![0.0; LstmCell::param_count(h)];
        // Forget bias strongly positive, input-gate bias strongly negative.
        params[0] = 40.0;
        params[1] = 40.0;
        let block = LstmCell::gate_block(h);
        params[block] = -40.0;
        params[block + 1] = -40.0;
        let cell = LstmCell::from_flat(h, CandidateActivation::Logistic, params).unwrap();

        let state = LstmState {
            hidden: vec![0.0; h],
            cell: vec![0.6, -0.4],
        };
        let next = lstm_step(&cell, &state, 0.3).unwrap();
        assert!((next.cell[0] - 0.6).abs() < 1e-9);
        assert!((next.cell[1] + 0.4).abs() < 1e-9);
    }

    #[test]
    fn nan_input_is_rejected() {
        let cell = LstmCell::zeros(2, CandidateActivation::Logistic);
        let state = LstmState::zeros(2);
        assert!(lstm_step(&cell, &state, f64::NAN).is_err());
    }

    #[test]
    fn gates_and_hidden_stay_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cell = LstmCell::init(6, CandidateActivation::Logistic, &mut rng);
        let mut state = LstmState::zeros(6);
        for k in 0..200 {
            let x = ((k as f64) * 0.37).sin().abs();
            state = lstm_step(&cell, &state, x).unwrap();
            for &hv in &state.hidden {
                assert!(hv.abs() < 1.0);
            }
        }
    }

    #[test]
    fn zero_parameter_forecast_is_clamped_readout_bias() {
        let h = 4;
        let mut params = vec![0.0; LstmCell::param_count(h)];
        let n = params.len();
        params[n - 1] = 0.3;
        let cell = LstmCell::from_flat(h, CandidateActivation::Logistic, params).unwrap();
        let out = forecast3(&cell, [0.1, 0.5, 0.9]).unwrap();
        for v in out {
            assert!((v - 0.3).abs() < 1e-12);
        }

        let mut params = vec![0.0; LstmCell::param_count(h)];
        params[n - 1] = -2.0;
        let cell = LstmCell::from_flat(h, CandidateActivation::Logistic, params).unwrap();
        assert_eq!(forecast3(&cell, [0.0, 0.0, 0.0]).unwrap(), [0.0; 3]);
    }

    #[test]
    fn forecast_rejects_out_of_range_input() {
        let cell = LstmCell::zeros(2, CandidateActivation::Logistic);
        assert!(forecast3(&cell, [0.2, 1.2, 0.1]).is_err());
    }

    #[test]
    fn constant_series_is_learned_by_descent() {
        let series = vec![0.5; 64];
        let cfg = TrainConfig {
            hidden_size: 4,
            epochs: 200,
            seed: 11,
            ..TrainConfig::default()
        };
        let (_, report) = train(&series, &cfg).unwrap();
        assert!(report.final_loss < 1e-3, "loss {}", report.final_loss);
        assert!(report.final_loss <= report.initial_loss);
    }

    #[test]
    fn converged_constant_cell_forecasts_the_constant() {
        let series = vec![0.2; 64];
        let cfg = TrainConfig {
            hidden_size: 8,
            epochs: 400,
            seed: 3,
            ..TrainConfig::default()
        };
        let (cell, _) = train(&series, &cfg).unwrap();
        let out = forecast3(&cell, [0.2, 0.2, 0.2]).unwrap();
        for v in out {
            assert!((v - 0.2).abs() < 0.05, "forecast {v}");
        }
    }

    #[test]
    fn short_series_is_rejected() {
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(&[0.1, 0.2, 0.3], &cfg),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn training_is_seed_deterministic() {
        let series: Vec<f64> = (0..80).map(|i| ((i as f64) * 0.21).sin().abs()).collect();
        let cfg = TrainConfig {
            hidden_size: 6,
            epochs: 30,
            seed: 42,
            ..TrainConfig::default()
        };
        let (a, _) = train(&series, &cfg).unwrap();
        let (b, _) = train(&series, &cfg).unwrap();
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn bptt_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for &h in &[1usize, 4] {
            let cell = LstmCell::init(h, CandidateActivation::Logistic, &mut rng);
            let window: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..1.0)).collect();
            let err = gradient_check(&cell, &window).unwrap();
            assert!(err < 1e-4, "H={h}: max error {err}");
        }
    }

    #[test]
    fn gradient_check_covers_tanh_candidate() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cell = LstmCell::init(3, CandidateActivation::Tanh, &mut rng);
        let window: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
        let err = gradient_check(&cell, &window).unwrap();
        assert!(err < 1e-4, "max error {err}");
    }

    #[test]
    fn model_roundtrips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cell.lstm");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cell = LstmCell::init(5, CandidateActivation::Tanh, &mut rng);
        save_model(&cell, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(cell, loaded);
    }

    #[test]
    fn malformed_model_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.lstm");
        std::fs::write(&path, "NOPE,3,sigmoid\n0.5\n").unwrap();
        assert!(load_model(&path).is_err());
        std::fs::write(&path, "LSTM1,3,sigmoid\n0.5\n").unwrap();
        assert!(load_model(&path).is_err());
    }
}
