use std::time::Instant;
use udsdm_core::config::RuntimeParams;
use udsdm_core::sim::*;
use udsdm_core::{ingest, synth};

fn main() {
    let text = synth::generate_string(&synth::SynthConfig {
        target_lines: 115_000,
        ..Default::default()
    })
    .unwrap();
    let (records, _) = ingest::parse_dataset_text(&text, Some(100_000));
    let params = RuntimeParams::default();
    let base = SimConfig {
        n_nodes: 6,
        epoch_length: 100,
        theta: 0.6,
        policy: PolicyKind::Udsdm,
        seed: 42,
        train_split: 0.5,
        dataset: Default::default(),
        max_steps: None,
        max_records: Some(100_000),
    };
    let t1 = Instant::now();
    let streams = build_experiment_streams(&records, 6, 42, 0).unwrap();
    let run = run_on_streams(&base, &params, streams, None).unwrap();
    let m = run.metrics().unwrap();
    let traces = &run.traces;
    let n = traces.len() as f64;
    let mean_norm: f64 = traces.iter().map(|t| t.e_norm).sum::<f64>() / n;
    let frac_hi = traces.iter().filter(|t| t.e_norm > 0.6).count() as f64 / n;
    let frac_sat = traces.iter().filter(|t| t.e_norm >= 1.0).count() as f64 / n;
    let gmax = traces.iter().filter_map(|t| t.fused).fold(0.0f64, f64::max);
    let vol = run.epochs.iter().map(|e| e.voluntary).sum::<u64>();
    println!(
        "udsdm single ({:?}): phi {:.3} e_norm mean {:.3} >0.6 {:.3} sat {:.3} Gmax {:.3} vol {vol}",
        t1.elapsed(), m.phi, mean_norm, frac_hi, frac_sat, gmax
    );

    let mut configs = Vec::new();
    for policy in [PolicyKind::Bm, PolicyKind::Pm, PolicyKind::Udsdm] {
        for theta in [0.6, 0.75] {
            for t in [100u64, 500, 1000] {
                let mut c = base.clone();
                c.policy = policy;
                c.theta = theta;
                c.epoch_length = t;
                configs.push(c);
            }
        }
    }
    let t2 = Instant::now();
    let table = compare_on_records(&configs, &params, 2, &records).unwrap();
    println!("compare E=2: {:?}", t2.elapsed());
    print!("{}", table.to_csv());
}
