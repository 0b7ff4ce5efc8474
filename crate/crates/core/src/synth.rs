//! Deterministic surrogate sensor stream in the lab deployment format.
//!
//! Produces whitespace-separated `date time epoch mote temperature
//! humidity light voltage` lines with the dynamics that drive the
//! dissemination policies: diurnal cycles, per-mote offsets, lamp on/off
//! level shifts in the light channel, occasional setpoint shifts in
//! temperature, sensor noise, and a sprinkle of malformed lines to
//! exercise the cleaning path. Output is a pure function of the config.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub motes: u8,
    /// Approximate number of data lines to emit (malformed lines included).
    pub target_lines: usize,
    pub seed: u64,
    /// Malformed lines per thousand.
    pub malformed_per_mille: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            motes: 54,
            target_lines: 120_000,
            seed: 1,
            malformed_per_mille: 5,
        }
    }
}

const EPOCH_SECONDS: f64 = 31.0;
const DAY_SECONDS: f64 = 86_400.0;

struct MoteState {
    temp_base: f64,
    setpoint: f64,
    setpoint_target: f64,
    lamp_on: bool,
    lamp_lux: f64,
    humidity_wander: f64,
    time_jitter: f64,
    /// Remaining epochs of a battery-wear reading glitch.
    anomaly_left: u32,
    anomaly_kind: u8,
}

pub fn generate_string(cfg: &SynthConfig) -> Result<String> {
    if cfg.motes == 0 || cfg.motes > 54 {
        return Err(Error::InvalidArgument(format!(
            "motes {} must be in 1..=54",
            cfg.motes
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut motes: Vec<MoteState> = (0..cfg.motes)
        .map(|_| MoteState {
            temp_base: 18.0 + rng.gen_range(0.0..4.0),
            setpoint: 0.0,
            setpoint_target: 0.0,
            lamp_on: false,
            lamp_lux: 0.0,
            humidity_wander: 0.0,
            time_jitter: rng.gen_range(0.0..3.0),
            anomaly_left: 0,
            anomaly_kind: 0,
        })
        .collect();

    let mut out = String::with_capacity(cfg.target_lines * 64);
    let mut lines = 0usize;
    let mut epoch: u64 = 0;
    // Start a few minutes before the first midnight-relative epoch.
    let base_day = 0u64;

    while lines < cfg.target_lines {
        epoch += 1;
        let t_sec = epoch as f64 * EPOCH_SECONDS;
        let day_phase = (t_sec % DAY_SECONDS) / DAY_SECONDS;
        // Smooth day/night factor peaking mid-day.
        let daylight = (((day_phase - 0.5) * std::f64::consts::PI * 2.0).cos() + 1.0) * 0.5;

        for (idx, mote) in motes.iter_mut().enumerate() {
            // Occasional drop-out, as in real deployments.
            if rng.gen_range(0.0..1.0) < 0.05 {
                continue;
            }
            if lines >= cfg.target_lines {
                break;
            }

            // Setpoint shifts ramp in over a few epochs.
            if rng.gen_range(0.0..1.0) < 0.0015 {
                mote.setpoint_target = rng.gen_range(-3.0..3.0);
            }
            mote.setpoint += (mote.setpoint_target - mote.setpoint) * 0.05;

            // Lamp toggles produce persistent level shifts in light.
            if rng.gen_range(0.0..1.0) < 0.010 {
                mote.lamp_on = !mote.lamp_on;
                if mote.lamp_on {
                    mote.lamp_lux = if rng.gen_range(0.0..1.0) < 0.2 {
                        rng.gen_range(800.0..1500.0)
                    } else {
                        rng.gen_range(200.0..600.0)
                    };
                }
            }
            mote.humidity_wander += rng.gen_range(-0.05..0.05);
            mote.humidity_wander = mote.humidity_wander.clamp(-4.0, 4.0);

            // Battery-wear reading glitches get more likely as the trace
            // ages, mirroring failing sensors in long deployments.
            let progress = (lines as f64) / (cfg.target_lines as f64);
            if mote.anomaly_left == 0 && rng.gen_range(0.0..1.0) < 0.004 * progress {
                mote.anomaly_left = rng.gen_range(2..=5);
                mote.anomaly_kind = rng.gen_range(0..2);
            }

            let mut temperature = mote.temp_base
                + mote.setpoint
                + 2.5 * daylight
                + rng.gen_range(-0.15..0.15);
            let mut light = (daylight * 120.0
                + if mote.lamp_on { mote.lamp_lux } else { 0.0 }
                + rng.gen_range(0.0..4.0))
            .max(0.0);
            if mote.anomaly_left > 0 {
                mote.anomaly_left -= 1;
                match mote.anomaly_kind {
                    0 => temperature += rng.gen_range(50.0..90.0),
                    _ => light += rng.gen_range(1200.0..2400.0),
                }
            }
            let humidity = (65.0 - 0.8 * (temperature - 20.0) + mote.humidity_wander
                + rng.gen_range(-0.5..0.5))
            .clamp(1.0, 99.0);
            let voltage = 2.78 - epoch as f64 * 2.0e-7 + rng.gen_range(-0.005..0.005);

            let stamp = t_sec + mote.time_jitter + idx as f64 * 0.11;
            let day = base_day + (stamp / DAY_SECONDS) as u64;
            let secs_in_day = stamp % DAY_SECONDS;
            let hh = (secs_in_day / 3600.0) as u32;
            let mm = ((secs_in_day % 3600.0) / 60.0) as u32;
            let ss = secs_in_day % 60.0;
            let date = chrono::NaiveDate::from_ymd_opt(2004, 2, 28).unwrap()
                + chrono::Days::new(day);

            if cfg.malformed_per_mille > 0
                && rng.gen_range(0..1000) < cfg.malformed_per_mille
            {
                match rng.gen_range(0..4) {
                    0 => writeln!(out, "{date} {hh:02}:{mm:02}:{ss:08.5} {epoch} {}", idx + 1),
                    1 => writeln!(
                        out,
                        "{date} {hh:02}:{mm:02}:{ss:08.5} {epoch} 77 {temperature:.4} {humidity:.4} {light:.2} {voltage:.5}"
                    ),
                    2 => writeln!(
                        out,
                        "{date} {hh:02}:{mm:02}:{ss:08.5} {epoch} {} NaN {humidity:.4} {light:.2} {voltage:.5}",
                        idx + 1
                    ),
                    _ => writeln!(
                        out,
                        "{date} {hh:02}:{mm:02}:{ss:08.5} {epoch} {} x{temperature:.4} {humidity:.4} {light:.2} {voltage:.5}",
                        idx + 1
                    ),
                }
                .unwrap();
            } else {
                writeln!(
                    out,
                    "{date} {hh:02}:{mm:02}:{ss:08.5} {epoch} {} {temperature:.4} {humidity:.4} {light:.2} {voltage:.5}",
                    idx + 1
                )
                .unwrap();
            }
            lines += 1;
        }
    }
    Ok(out)
}

pub fn generate(path: &Path, cfg: &SynthConfig) -> Result<()> {
    let text = generate_string(cfg)?;
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
