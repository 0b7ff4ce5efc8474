//! Deterministic lockstep replay of N nodes over their streams.
//!
//! One global step lets every node consume at most one vector, refresh its
//! synopsis, compute its update quantum and apply its policy. The first
//! half of each node's stream is the training phase: only forced
//! boundary disseminations happen while the quanta series is collected,
//! the normalization scale is calibrated on its tail, and (for the
//! uncertainty-driven policy) the forecaster is trained. Evaluation
//! statistics cover only complete epochs inside the second half.

use crate::baselines::{bm_decide, pm_decide, HoltState};
use crate::config::{QuantumBaseline, RuntimeParams};
use crate::decision::{
    Decision, DecisionPolicy, DecisionTrace, EpochClock, UdsdmEngine, Verdict,
};
use crate::error::{Error, Result};
use crate::ingest::{self, NodeStream, SensorRecord};
use crate::lstm::{self, LstmCell, TrainReport};
use crate::metrics::{EpochDetail, MetricsReport};
use crate::synopsis::{NormalizationCalibration, QuantaSeries, Synopsis, UpdateQuantum};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::PathBuf;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PolicyKind {
    Bm,
    Pm,
    Udsdm,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Bm => "bm",
            PolicyKind::Pm => "pm",
            PolicyKind::Udsdm => "udsdm",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "bm" => Some(PolicyKind::Bm),
            "pm" => Some(PolicyKind::Pm),
            "udsdm" => Some(PolicyKind::Udsdm),
            _ => None,
        }
    }
}

/// Everything one simulation run depends on.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_nodes: usize,
    pub epoch_length: u64,
    pub theta: f64,
    pub policy: PolicyKind,
    pub seed: u64,
    pub train_split: f64,
    pub dataset: PathBuf,
    pub max_steps: Option<u64>,
    pub max_records: Option<usize>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::InvalidArgument("n_nodes must be at least 1".into()));
        }
        if self.epoch_length == 0 {
            return Err(Error::InvalidArgument("epoch length must be positive".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "theta {} must be in (0, 1]",
                self.theta
            )));
        }
        if !(self.train_split > 0.0 && self.train_split < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train_split {} must be in (0, 1)",
                self.train_split
            )));
        }
        Ok(())
    }
}

/// One accounted dissemination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageEntry {
    pub node_id: usize,
    pub step: u64,
    pub payload_len: usize,
    pub kind: Decision,
}

/// Result of one simulation run.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub config: SimConfig,
    pub messages: Vec<MessageEntry>,
    /// Per-step decision trace over the evaluation phase.
    pub traces: Vec<DecisionTrace>,
    /// Complete evaluation epochs, per node.
    pub epochs: Vec<EpochDetail>,
    /// First evaluation step of each node.
    pub eval_start: Vec<(usize, u64)>,
    pub clocks: Vec<(usize, EpochClock)>,
    /// Trained forecasters, in node order (uncertainty policy only).
    pub models: Vec<Option<LstmCell>>,
    pub train_reports: Vec<Option<TrainReport>>,
    pub wall: Duration,
}

impl ExperimentRun {
    pub fn metrics(&self) -> Result<MetricsReport> {
        MetricsReport::from_epochs(self.epochs.clone(), self.config.epoch_length)
    }

    /// FNV-1a over the message log; determinism checks compare this.
    pub fn message_hash(&self) -> u64 {
        let mut hash: u64 = 0xcbf29ce484222325;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        };
        for m in &self.messages {
            eat(m.node_id as u64);
            eat(m.step);
            eat(m.payload_len as u64);
            eat(m.kind as u64);
        }
        hash
    }
}

struct EpochAccum {
    start: u64,
    end: u64,
    first_stop: Option<u64>,
    stops: u64,
    voluntary: u64,
    forced: u64,
    delta_sum: f64,
}

enum EvalPolicy {
    Udsdm(UdsdmEngine),
    Bm,
    Pm { holt: HoltState, warmup: u64, theta: f64 },
}

enum Phase {
    Training,
    Eval(EvalPolicy),
}

struct NodeRuntime {
    node_id: usize,
    vectors: Vec<crate::synopsis::ContextVector>,
    pos: usize,
    split_pos: usize,
    synopsis: Synopsis,
    last_sent: Option<Synopsis>,
    prev: Option<Synopsis>,
    quanta: QuantaSeries,
    clock: EpochClock,
    phase: Phase,
    cal: Option<NormalizationCalibration>,
    train_quanta: Vec<f64>,
    eval_start_step: Option<u64>,
    accum: Option<EpochAccum>,
    epochs: Vec<EpochDetail>,
    model: Option<LstmCell>,
    train_report: Option<TrainReport>,
}

impl NodeRuntime {
    fn stop_bookkeeping(&mut self, step: u64, e_raw: f64, decision: Decision) {
        let Some(eval_start) = self.eval_start_step else {
            return;
        };
        let (ws, we) = self.clock.epoch_window(step);
        if we - ws != self.clock.epoch_length() || ws + 1 < eval_start {
            return;
        }
        let accum = match &mut self.accum {
            Some(a) if a.start == ws => a,
            _ => {
                self.accum = Some(EpochAccum {
                    start: ws,
                    end: we,
                    first_stop: None,
                    stops: 0,
                    voluntary: 0,
                    forced: 0,
                    delta_sum: 0.0,
                });
                self.accum.as_mut().unwrap()
            }
        };
        accum.stops += 1;
        accum.first_stop.get_or_insert(step);
        match decision {
            Decision::Disseminate => accum.voluntary += 1,
            Decision::Forced => accum.forced += 1,
            Decision::Hold => {}
        }
        accum.delta_sum += e_raw;
    }

    fn finalize_epoch(&mut self, boundary_step: u64) {
        if let Some(accum) = self.accum.take() {
            if accum.end == boundary_step && accum.stops > 0 {
                self.epochs.push(EpochDetail {
                    node_id: self.node_id,
                    epoch_start: accum.start,
                    epoch_end: accum.end,
                    t_star: accum.first_stop.expect("stops > 0") - accum.start,
                    stops: accum.stops,
                    voluntary: accum.voluntary,
                    forced: accum.forced,
                    delta_mean: accum.delta_sum / accum.stops as f64,
                });
            } else if accum.end != boundary_step {
                self.accum = Some(accum);
            }
        }
    }
}

fn node_train_seed(run_seed: u64, node_id: usize) -> u64 {
    run_seed ^ (node_id as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15)
}

/// Runs one experiment over prepared streams. `preloaded_models` lets a
/// comparison reuse forecasters across thresholds, since training does not
/// depend on theta.
pub fn run_on_streams(
    config: &SimConfig,
    params: &RuntimeParams,
    streams: Vec<NodeStream>,
    preloaded_models: Option<&[Option<LstmCell>]>,
) -> Result<ExperimentRun> {
    config.validate()?;
    if streams.len() != config.n_nodes {
        return Err(Error::InvalidArgument(format!(
            "expected {} streams, got {}",
            config.n_nodes,
            streams.len()
        )));
    }
    for s in &streams {
        if s.vectors.is_empty() {
            return Err(Error::EmptyInput("node stream"));
        }
    }
    let dim = streams[0].vectors[0].dim();
    for s in &streams {
        for v in &s.vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
        }
    }

    let start = Instant::now();
    let rulebase = params.rule_base();
    let sets = params.term_sets()?;

    let mut nodes: Vec<NodeRuntime> = streams
        .into_iter()
        .map(|s| {
            let len = s.vectors.len();
            let policy = DecisionPolicy::staggered(
                config.theta,
                config.epoch_length,
                s.node_id,
                config.n_nodes,
            );
            NodeRuntime {
                node_id: s.node_id,
                vectors: s.vectors,
                pos: 0,
                split_pos: ((len as f64) * config.train_split).floor() as usize,
                synopsis: Synopsis::empty(dim),
                last_sent: None,
                prev: None,
                quanta: QuantaSeries::new(),
                clock: EpochClock::new(policy.epoch_length, policy.phase_offset),
                phase: Phase::Training,
                cal: None,
                train_quanta: Vec::new(),
                eval_start_step: None,
                accum: None,
                epochs: Vec::new(),
                model: None,
                train_report: None,
            }
        })
        .collect();

    let mut messages: Vec<MessageEntry> = Vec::new();
    let mut traces: Vec<DecisionTrace> = Vec::new();

    let longest = nodes.iter().map(|n| n.vectors.len()).max().unwrap() as u64;
    let total_steps = config.max_steps.map_or(longest, |cap| cap.min(longest));

    for step in 1..=total_steps {
        for node in nodes.iter_mut() {
            if node.pos < node.vectors.len() {
                let x = node.vectors[node.pos].clone();
                node.synopsis.observe(&x)?;
                node.pos += 1;
                if node.last_sent.is_none() {
                    // The starting synopsis is the reference peers are
                    // assumed to hold; it is not an accounted message.
                    node.last_sent = Some(node.synopsis.clone());
                    node.prev = Some(node.synopsis.clone());
                }
            }
            let last_sent = node.last_sent.as_ref().expect("non-empty stream primed");
            let baseline = match params.quantum_baseline {
                QuantumBaseline::LastSent => last_sent,
                QuantumBaseline::PreviousStep => node.prev.as_ref().unwrap_or(last_sent),
            };
            let e_raw = node.synopsis.l1_distance(baseline)?;
            let quantum = UpdateQuantum {
                value: e_raw,
                step,
            };
            node.quanta.push(quantum)?;

            let mut gate_detail = None;
            let mut e_norm = None;
            let verdict = match &mut node.phase {
                Phase::Training => {
                    node.train_quanta.push(e_raw);
                    Verdict::Hold
                }
                Phase::Eval(policy) => {
                    let cal = node.cal.as_ref().expect("calibrated at split");
                    let norm = cal.normalize(&quantum)?;
                    e_norm = Some(norm);
                    match policy {
                        EvalPolicy::Udsdm(engine) => {
                            let out = engine.decide(&node.quanta)?;
                            gate_detail = out.detail;
                            out.verdict
                        }
                        EvalPolicy::Bm => bm_decide(&quantum),
                        EvalPolicy::Pm {
                            holt,
                            warmup,
                            theta,
                        } => {
                            holt.update(norm);
                            pm_decide(holt, *theta, *warmup)
                        }
                    }
                }
            };

            let decision = if verdict == Verdict::Disseminate {
                Decision::Disseminate
            } else if node.clock.forced_due(step) {
                Decision::Forced
            } else {
                Decision::Hold
            };

            if decision.is_stop() {
                messages.push(MessageEntry {
                    node_id: node.node_id,
                    step,
                    payload_len: 2 * dim,
                    kind: decision,
                });
                node.stop_bookkeeping(step, e_raw, decision);
                node.last_sent = Some(node.synopsis.clone());
                node.quanta.clear();
                node.clock.note_dissemination(step);
                if let Phase::Eval(EvalPolicy::Pm { holt, .. }) = &mut node.phase {
                    holt.reset();
                }
            }

            if let Some(norm) = e_norm {
                traces.push(DecisionTrace {
                    node_id: node.node_id,
                    step,
                    e_raw,
                    e_norm: norm,
                    past: gate_detail.map(|d| d.past),
                    forecast: gate_detail.map(|d| d.forecast),
                    dod_p: gate_detail.map(|d| d.dod_p),
                    dod_f: gate_detail.map(|d| d.dod_f),
                    fused: gate_detail.map(|d| d.fused),
                    decision,
                });
            }

            node.prev = Some(node.synopsis.clone());
            if node.clock.is_boundary(step) {
                node.finalize_epoch(step);
            }
            node.clock.finish_step(step);

            // Training ends once the node consumed its split share.
            if matches!(node.phase, Phase::Training) && node.pos >= node.split_pos {
                let cal = NormalizationCalibration::from_series(
                    &node.train_quanta,
                    params.calibration_tail,
                )?;
                let policy = match config.policy {
                    PolicyKind::Bm => EvalPolicy::Bm,
                    PolicyKind::Pm => EvalPolicy::Pm {
                        holt: HoltState::new(params.holt_alpha, params.holt_beta),
                        warmup: params.pm_warmup,
                        theta: config.theta,
                    },
                    PolicyKind::Udsdm => {
                        let preloaded = preloaded_models
                            .and_then(|m| m.get(node.node_id))
                            .and_then(|m| m.as_ref());
                        let cell = match preloaded {
                            Some(cell) => cell.clone(),
                            None => {
                                // Train on the same trailing slice the
                                // calibration saw: it is the freshest data
                                // and the only part on the evaluation
                                // scale; the cold-start transient would
                                // saturate to 1 and teach a constant.
                                let len = node.train_quanta.len();
                                let keep = ((len as f64) * params.calibration_tail).ceil()
                                    as usize;
                                let tail = &node.train_quanta[len - keep.clamp(1, len)..];
                                let normalized: Vec<f64> = tail
                                    .iter()
                                    .map(|&v| {
                                        cal.normalize(&UpdateQuantum { value: v, step: 0 })
                                    })
                                    .collect::<Result<_>>()?;
                                let mut train_cfg = params.lstm.clone();
                                train_cfg.seed = node_train_seed(config.seed, node.node_id);
                                let (cell, report) = lstm::train(&normalized, &train_cfg)?;
                                node.train_report = Some(report);
                                cell
                            }
                        };
                        node.model = Some(cell.clone());
                        EvalPolicy::Udsdm(UdsdmEngine::new(
                            config.theta,
                            cell,
                            rulebase.clone(),
                            sets,
                            cal,
                        ))
                    }
                };
                node.cal = Some(cal);
                node.eval_start_step = Some(step + 1);
                node.phase = Phase::Eval(policy);
            }
        }
    }

    let mut runs = ExperimentRun {
        config: config.clone(),
        messages,
        traces,
        epochs: Vec::new(),
        eval_start: Vec::new(),
        clocks: Vec::new(),
        models: Vec::new(),
        train_reports: Vec::new(),
        wall: start.elapsed(),
    };
    for node in nodes {
        runs.epochs.extend(node.epochs);
        runs.eval_start
            .push((node.node_id, node.eval_start_step.unwrap_or(u64::MAX)));
        runs.clocks.push((node.node_id, node.clock.clone()));
        runs.models.push(node.model);
        runs.train_reports.push(node.train_report);
    }
    runs.epochs.sort_by_key(|e| (e.node_id, e.epoch_start));
    Ok(runs)
}

/// Parses the configured dataset and replays it with the default
/// round-robin mote assignment.
pub fn run(config: &SimConfig, params: &RuntimeParams) -> Result<ExperimentRun> {
    let (records, _) = ingest::parse_dataset(&config.dataset, config.max_records)?;
    let streams = ingest::build_streams(&records, config.n_nodes)?;
    run_on_streams(config, params, streams, None)
}

/// Streams for experiment `k`: motes are reshuffled across nodes with a
/// seeded permutation, so every experiment sees distinct node subsets.
pub fn build_experiment_streams(
    records: &[SensorRecord],
    n_nodes: usize,
    seed: u64,
    experiment: usize,
) -> Result<Vec<NodeStream>> {
    let mut motes: Vec<u8> = records
        .iter()
        .map(|r| r.mote_id)
        .collect::<std::collections::BTreeSet<u8>>()
        .into_iter()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed ^ (experiment as u64 + 1).wrapping_mul(0xd1b54a32d192ed03),
    );
    motes.shuffle(&mut rng);
    let rank: std::collections::HashMap<u8, usize> = motes
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, i))
        .collect();
    ingest::build_streams_assigned(records, n_nodes, |mote| rank[&mote] % n_nodes)
}

/// Mean degrees of distribution observed in a run's trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DodStats {
    pub mean_dod_p: f64,
    pub mean_dod_f: f64,
}

/// One aggregated comparison row.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub policy: PolicyKind,
    pub theta: f64,
    pub epoch_length: u64,
    pub phi: f64,
    pub delta: f64,
    pub psi: f64,
    pub messages_voluntary: f64,
    pub messages_forced: f64,
    pub dod_stats: Option<DodStats>,
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub experiments: usize,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("policy,theta,T,phi,delta,psi,messages_voluntary,messages_forced\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.2},{},{:.6},{:.6},{:.6},{:.2},{:.2}\n",
                r.policy.name(),
                r.theta,
                r.epoch_length,
                r.phi,
                r.delta,
                r.psi,
                r.messages_voluntary,
                r.messages_forced
            ));
        }
        out
    }

    /// Plot series for one metric: `series,x,y` rows with x = T.
    pub fn plot_csv(&self, metric: &str) -> String {
        let mut out = String::from("series,x,y\n");
        for r in &self.rows {
            let y = match metric {
                "phi" => r.phi,
                "delta" => r.delta,
                "psi" => r.psi,
                _ => continue,
            };
            out.push_str(&format!(
                "{}-theta{:.2},{},{:.6}\n",
                r.policy.name(),
                r.theta,
                r.epoch_length,
                y
            ));
        }
        out
    }
}

struct RunSummary {
    phi: f64,
    delta: f64,
    psi: f64,
    voluntary: f64,
    forced: f64,
    dod: Option<DodStats>,
}

fn summarize(run: &ExperimentRun) -> Result<RunSummary> {
    let report = run.metrics()?;
    let voluntary: u64 = run.epochs.iter().map(|e| e.voluntary).sum();
    let forced: u64 = run.epochs.iter().map(|e| e.forced).sum();
    let dod = if run.config.policy == PolicyKind::Udsdm {
        let scored: Vec<&DecisionTrace> =
            run.traces.iter().filter(|t| t.dod_p.is_some()).collect();
        if scored.is_empty() {
            Some(DodStats {
                mean_dod_p: 0.0,
                mean_dod_f: 0.0,
            })
        } else {
            let n = scored.len() as f64;
            Some(DodStats {
                mean_dod_p: scored.iter().map(|t| t.dod_p.unwrap()).sum::<f64>() / n,
                mean_dod_f: scored.iter().map(|t| t.dod_f.unwrap()).sum::<f64>() / n,
            })
        }
    } else {
        None
    };
    Ok(RunSummary {
        phi: report.phi,
        delta: report.delta,
        psi: report.psi,
        voluntary: voluntary as f64,
        forced: forced as f64,
        dod,
    })
}

/// Runs every config `experiments` times over reshuffled node subsets and
/// seeds, and aggregates per-config means. Configs must share everything
/// but policy, theta and epoch length. Rows come out ordered by
/// (policy, theta, T).
pub fn compare(
    configs: &[SimConfig],
    params: &RuntimeParams,
    experiments: usize,
) -> Result<ComparisonTable> {
    if configs.is_empty() {
        return Ok(ComparisonTable {
            rows: Vec::new(),
            experiments,
        });
    }
    if experiments == 0 {
        return Err(Error::InvalidArgument("experiments must be at least 1".into()));
    }
    let head = &configs[0];
    for c in configs {
        c.validate()?;
        if c.dataset != head.dataset
            || c.n_nodes != head.n_nodes
            || c.seed != head.seed
            || c.train_split != head.train_split
            || c.max_records != head.max_records
            || c.max_steps != head.max_steps
        {
            return Err(Error::InvalidArgument(
                "comparison configs may differ only in policy, theta and epoch length".into(),
            ));
        }
    }

    let (records, _) = ingest::parse_dataset(&head.dataset, head.max_records)?;
    compare_on_records(configs, params, experiments, &records)
}

/// `compare` over already-parsed records; comparisons and tests share this.
pub fn compare_on_records(
    configs: &[SimConfig],
    params: &RuntimeParams,
    experiments: usize,
    records: &[SensorRecord],
) -> Result<ComparisonTable> {
    if configs.is_empty() {
        return Ok(ComparisonTable {
            rows: Vec::new(),
            experiments,
        });
    }
    let head = &configs[0];

    let mut t_values: Vec<u64> = configs.iter().map(|c| c.epoch_length).collect();
    t_values.sort_unstable();
    t_values.dedup();

    // Work units: one per (T, experiment). Within a unit the policies and
    // thresholds share streams, and the trained forecasters are reused
    // across thresholds (training is theta-independent).
    let units: Vec<(u64, usize)> = t_values
        .iter()
        .flat_map(|&t| (0..experiments).map(move |k| (t, k)))
        .collect();

    let unit_results: Result<Vec<Vec<(usize, RunSummary)>>> = units
        .par_iter()
        .map(|&(t, k)| {
            let streams = build_experiment_streams(records, head.n_nodes, head.seed, k)?;
            let run_seed = head.seed.wrapping_add(k as u64);
            let mut summaries: Vec<(usize, RunSummary)> = Vec::new();

            let member_ids: Vec<usize> = configs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.epoch_length == t)
                .map(|(i, _)| i)
                .collect();

            // BM ignores theta: run it once and reuse the summary.
            let mut bm_summary: Option<RunSummary> = None;
            // Forecasters trained on this unit's streams, harvested from
            // the first uncertainty-policy run.
            let mut harvested: Option<Vec<Option<LstmCell>>> = None;

            for &idx in &member_ids {
                let mut cfg = configs[idx].clone();
                cfg.seed = run_seed;
                match cfg.policy {
                    PolicyKind::Bm => {
                        if bm_summary.is_none() {
                            let run =
                                run_on_streams(&cfg, params, streams.clone(), None)?;
                            bm_summary = Some(summarize(&run)?);
                        }
                        let s = bm_summary.as_ref().unwrap();
                        summaries.push((
                            idx,
                            RunSummary {
                                phi: s.phi,
                                delta: s.delta,
                                psi: s.psi,
                                voluntary: s.voluntary,
                                forced: s.forced,
                                dod: s.dod,
                            },
                        ));
                    }
                    PolicyKind::Pm => {
                        let run = run_on_streams(&cfg, params, streams.clone(), None)?;
                        summaries.push((idx, summarize(&run)?));
                    }
                    PolicyKind::Udsdm => {
                        let run = run_on_streams(
                            &cfg,
                            params,
                            streams.clone(),
                            harvested.as_deref(),
                        )?;
                        if harvested.is_none() {
                            harvested = Some(run.models.clone());
                        }
                        summaries.push((idx, summarize(&run)?));
                    }
                }
            }
            Ok(summaries)
        })
        .collect();

    let mut per_config: Vec<Vec<RunSummary>> = (0..configs.len()).map(|_| Vec::new()).collect();
    for unit in unit_results? {
        for (idx, summary) in unit {
            per_config[idx].push(summary);
        }
    }

    let mut rows: Vec<ComparisonRow> = Vec::new();
    for (idx, cfg) in configs.iter().enumerate() {
        let runs = &per_config[idx];
        let n = runs.len() as f64;
        let mean = |f: &dyn Fn(&RunSummary) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
        let dod = if cfg.policy == PolicyKind::Udsdm {
            Some(DodStats {
                mean_dod_p: mean(&|r| r.dod.map(|d| d.mean_dod_p).unwrap_or(0.0)),
                mean_dod_f: mean(&|r| r.dod.map(|d| d.mean_dod_f).unwrap_or(0.0)),
            })
        } else {
            None
        };
        rows.push(ComparisonRow {
            policy: cfg.policy,
            theta: cfg.theta,
            epoch_length: cfg.epoch_length,
            phi: mean(&|r| r.phi),
            delta: mean(&|r| r.delta),
            psi: mean(&|r| r.psi),
            messages_voluntary: mean(&|r| r.voluntary),
            messages_forced: mean(&|r| r.forced),
            dod_stats: dod,
        });
    }
    rows.sort_by(|a, b| {
        (a.policy, a.theta, a.epoch_length)
            .partial_cmp(&(b.policy, b.theta, b.epoch_length))
            .unwrap()
    });
    Ok(ComparisonTable { rows, experiments })
}
