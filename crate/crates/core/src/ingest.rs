//! Sensor-file parsing, cleaning and replay-stream construction.
//!
//! The native input is the lab deployment format: whitespace-separated
//! lines of `date time epoch mote_id temperature humidity light voltage`.
//! Malformed lines are rejected and counted, never repaired. A generic
//! `node_id,v1,...,vd` CSV path exists as plumbing for other sources.

use crate::error::{Error, Result};
use crate::synopsis::ContextVector;
use chrono::{NaiveDate, NaiveTime};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

pub const MOTE_MIN: u8 = 1;
pub const MOTE_MAX: u8 = 54;

/// One accepted line of the sensor file.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorRecord {
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub epoch: u64,
    pub mote_id: u8,
    pub temperature: f64,
    pub humidity: f64,
    pub light: f64,
    pub voltage: f64,
}

impl SensorRecord {
    pub fn context_vector(&self) -> ContextVector {
        ContextVector::new(vec![self.temperature, self.humidity, self.light, self.voltage])
            .expect("accepted records are finite")
    }

    fn sort_key(&self) -> (u64, NaiveDate, NaiveTime) {
        (self.epoch, self.date, self.time)
    }
}

/// Why lines were dropped, by count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RejectStats {
    pub short_line: u64,
    pub unparseable: u64,
    pub mote_out_of_range: u64,
    pub non_finite: u64,
    pub lines_read: u64,
}

impl RejectStats {
    pub fn total(&self) -> u64 {
        self.short_line + self.unparseable + self.mote_out_of_range + self.non_finite
    }
}

enum LineOutcome {
    Accept(Box<SensorRecord>),
    ShortLine,
    Unparseable,
    MoteOutOfRange,
    NonFinite,
}

fn parse_line(line: &str) -> LineOutcome {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 8 {
        return LineOutcome::ShortLine;
    }
    let Ok(date) = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d") else {
        return LineOutcome::Unparseable;
    };
    let Ok(time) = NaiveTime::parse_from_str(fields[1], "%H:%M:%S%.f") else {
        return LineOutcome::Unparseable;
    };
    let Ok(epoch) = fields[2].parse::<u64>() else {
        return LineOutcome::Unparseable;
    };
    let Ok(mote_id) = fields[3].parse::<i64>() else {
        return LineOutcome::Unparseable;
    };
    if !(MOTE_MIN as i64..=MOTE_MAX as i64).contains(&mote_id) {
        return LineOutcome::MoteOutOfRange;
    }
    let mut values = [0.0f64; 4];
    for (slot, field) in values.iter_mut().zip(&fields[4..8]) {
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => *slot = v,
            Ok(_) => return LineOutcome::NonFinite,
            Err(_) => return LineOutcome::Unparseable,
        }
    }
    LineOutcome::Accept(Box::new(SensorRecord {
        date,
        time,
        epoch,
        mote_id: mote_id as u8,
        temperature: values[0],
        humidity: values[1],
        light: values[2],
        voltage: values[3],
    }))
}

/// Parses the sensor file, keeping accepted records in file order.
/// `max_records` caps the number of accepted records.
pub fn parse_dataset(
    path: &Path,
    max_records: Option<usize>,
) -> Result<(Vec<SensorRecord>, RejectStats)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(parse_dataset_text(&text, max_records))
}

pub fn parse_dataset_text(text: &str, max_records: Option<usize>) -> (Vec<SensorRecord>, RejectStats) {
    let mut records = Vec::new();
    let mut stats = RejectStats::default();
    for line in text.lines() {
        if let Some(cap) = max_records {
            if records.len() >= cap {
                break;
            }
        }
        stats.lines_read += 1;
        match parse_line(line) {
            LineOutcome::Accept(rec) => records.push(*rec),
            LineOutcome::ShortLine => stats.short_line += 1,
            LineOutcome::Unparseable => stats.unparseable += 1,
            LineOutcome::MoteOutOfRange => stats.mote_out_of_range += 1,
            LineOutcome::NonFinite => stats.non_finite += 1,
        }
    }
    (records, stats)
}

/// Ordered per-node replay stream.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStream {
    pub node_id: usize,
    pub vectors: Vec<ContextVector>,
    pub source_motes: BTreeSet<u8>,
}

/// Groups records into `n_nodes` streams with the round-robin assignment
/// mote `m` -> node `(m - 1) mod n_nodes`, each stream ordered by
/// (epoch, date, time).
pub fn build_streams(records: &[SensorRecord], n_nodes: usize) -> Result<Vec<NodeStream>> {
    build_streams_assigned(records, n_nodes, |mote| (mote as usize - 1) % n_nodes)
}

/// Stream construction with a caller-chosen mote-to-node assignment;
/// the round-robin default and seeded reassignments share this path.
pub fn build_streams_assigned(
    records: &[SensorRecord],
    n_nodes: usize,
    assign: impl Fn(u8) -> usize,
) -> Result<Vec<NodeStream>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("sensor records"));
    }
    if n_nodes == 0 {
        return Err(Error::InvalidArgument("n_nodes must be at least 1".into()));
    }
    let motes: BTreeSet<u8> = records.iter().map(|r| r.mote_id).collect();
    if n_nodes > motes.len() {
        return Err(Error::MoreNodesThanMotes {
            nodes: n_nodes,
            motes: motes.len(),
        });
    }

    let mut grouped: BTreeMap<usize, (Vec<&SensorRecord>, BTreeSet<u8>)> = BTreeMap::new();
    for node in 0..n_nodes {
        grouped.insert(node, (Vec::new(), BTreeSet::new()));
    }
    for rec in records {
        let node = assign(rec.mote_id);
        debug_assert!(node < n_nodes);
        let entry = grouped.get_mut(&node).expect("node bucket exists");
        entry.0.push(rec);
        entry.1.insert(rec.mote_id);
    }

    let mut streams = Vec::with_capacity(n_nodes);
    for (node_id, (mut recs, source_motes)) in grouped {
        // Stable by construction: ties keep file order.
        recs.sort_by_key(|r| r.sort_key());
        streams.push(NodeStream {
            node_id,
            vectors: recs.iter().map(|r| r.context_vector()).collect(),
            source_motes,
        });
    }
    Ok(streams)
}

/// Writes the cleaned streams as
/// `node_id,seq,temperature,humidity,light,voltage`.
pub fn write_clean_csv(streams: &[NodeStream], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "node_id,seq,temperature,humidity,light,voltage")?;
    for stream in streams {
        for (seq, vec) in stream.vectors.iter().enumerate() {
            let c = vec.components();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                stream.node_id, seq, c[0], c[1], c[2], c[3]
            )?;
        }
    }
    Ok(())
}

/// Generic CSV replay source: `node_id,v1,...,vd` per line, vectors kept
/// in file order per node. A leading header line is skipped.
pub fn parse_csv_streams(path: &Path) -> Result<(Vec<NodeStream>, RejectStats)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_csv_streams_text(&text)
}

pub fn parse_csv_streams_text(text: &str) -> Result<(Vec<NodeStream>, RejectStats)> {
    let mut stats = RejectStats::default();
    let mut dim: Option<usize> = None;
    let mut by_node: BTreeMap<usize, Vec<ContextVector>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        stats.lines_read += 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            stats.short_line += 1;
            continue;
        }
        let Ok(node_id) = fields[0].parse::<usize>() else {
            if i == 0 {
                // Header line.
                stats.lines_read -= 1;
                continue;
            }
            stats.unparseable += 1;
            continue;
        };
        let d = *dim.get_or_insert(fields.len() - 1);
        if fields.len() - 1 != d {
            stats.short_line += 1;
            continue;
        }
        let mut values = Vec::with_capacity(d);
        let mut bad = None;
        for f in &fields[1..] {
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(_) => {
                    bad = Some(LineOutcome::NonFinite);
                    break;
                }
                Err(_) => {
                    bad = Some(LineOutcome::Unparseable);
                    break;
                }
            }
        }
        match bad {
            Some(LineOutcome::NonFinite) => stats.non_finite += 1,
            Some(_) => stats.unparseable += 1,
            None => by_node
                .entry(node_id)
                .or_default()
                .push(ContextVector::new(values).expect("finite checked")),
        }
    }
    if by_node.is_empty() {
        return Err(Error::EmptyInput("csv stream records"));
    }
    Ok((
        by_node
            .into_iter()
            .map(|(node_id, vectors)| NodeStream {
                node_id,
                vectors,
                source_motes: BTreeSet::new(),
            })
            .collect(),
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "2004-02-28 00:59:16.02785 3 1 19.9884 37.0933 45.08 2.69964";

    #[test]
    fn parses_the_documented_line_layout() {
        let (records, stats) = parse_dataset_text(SAMPLE, None);
        assert_eq!(stats.lines_read, 1);
        assert_eq!(stats.total(), 0);
        let r = &records[0];
        assert_eq!(r.epoch, 3);
        assert_eq!(r.mote_id, 1);
        assert_eq!(r.temperature, 19.9884);
        assert_eq!(r.humidity, 37.0933);
        assert_eq!(r.light, 45.08);
        assert_eq!(r.voltage, 2.69964);
        assert_eq!(r.date, NaiveDate::from_ymd_opt(2004, 2, 28).unwrap());
    }

    #[test]
    fn rejects_are_counted_by_reason() {
        let text = "\
2004-02-28 00:59:16.02785 3 1 19.9884 37.0933 45.08 2.69964
2004-02-28 00:59:16.02785 3 1 19.9884 37.0933
2004-02-28 00:59:16.02785 3 77 19.9884 37.0933 45.08 2.69964
2004-02-28 00:59:16.02785 3 1 NaN 37.0933 45.08 2.69964
2004-02-28 00:59:16.02785 3 1 abc 37.0933 45.08 2.69964
not a line at all";
        let (records, stats) = parse_dataset_text(text, None);
        assert_eq!(records.len(), 1);
        assert_eq!(stats.short_line, 2);
        assert_eq!(stats.mote_out_of_range, 1);
        assert_eq!(stats.non_finite, 1);
        assert_eq!(stats.unparseable, 1);
        assert_eq!(records.len() as u64 + stats.total(), stats.lines_read);
    }

    #[test]
    fn max_records_caps_accepted_lines() {
        let text = format!("{SAMPLE}\n{SAMPLE}\n{SAMPLE}");
        let (records, _) = parse_dataset_text(&text, Some(2));
        assert_eq!(records.len(), 2);
    }

    fn record(mote: u8, epoch: u64, temp: f64) -> SensorRecord {
        SensorRecord {
            date: NaiveDate::from_ymd_opt(2004, 3, 1).unwrap(),
            time: NaiveTime::from_hms_micro_opt(1, 2, 3, (temp * 1000.0) as u32 % 1_000_000)
                .unwrap(),
            epoch,
            mote_id: mote,
            temperature: temp,
            humidity: 40.0,
            light: 100.0,
            voltage: 2.7,
        }
    }

    #[test]
    fn round_robin_assigns_motes() {
        let records = vec![record(1, 1, 20.0), record(2, 1, 21.0), record(3, 1, 22.0)];
        let streams = build_streams(&records, 2).unwrap();
        assert_eq!(streams[0].source_motes, BTreeSet::from([1, 3]));
        assert_eq!(streams[1].source_motes, BTreeSet::from([2]));
    }

    #[test]
    fn fiftyfour_nodes_get_one_mote_each() {
        let records: Vec<SensorRecord> =
            (MOTE_MIN..=MOTE_MAX).map(|m| record(m, 1, 20.0)).collect();
        let streams = build_streams(&records, 54).unwrap();
        assert_eq!(streams.len(), 54);
        for (i, s) in streams.iter().enumerate() {
            assert_eq!(s.source_motes.len(), 1);
            assert!(s.source_motes.contains(&((i + 1) as u8)));
        }
    }

    #[test]
    fn degenerate_stream_inputs_error() {
        assert!(matches!(
            build_streams(&[], 2),
            Err(Error::EmptyInput(_))
        ));
        let records = vec![record(1, 1, 20.0), record(2, 1, 21.0)];
        assert!(matches!(
            build_streams(&records, 3),
            Err(Error::MoreNodesThanMotes { nodes: 3, motes: 2 })
        ));
    }

    #[test]
    fn streams_are_ordered_by_epoch_then_time() {
        let records = vec![
            record(1, 5, 22.0),
            record(1, 2, 21.0),
            record(1, 2, 20.0),
            record(1, 9, 23.0),
        ];
        let streams = build_streams(&records, 1).unwrap();
        let temps: Vec<f64> = streams[0]
            .vectors
            .iter()
            .map(|v| v.components()[0])
            .collect();
        // Epochs 2, 2, 5, 9; the tie keeps time order.
        assert_eq!(temps, vec![20.0, 21.0, 22.0, 23.0]);
    }

    #[test]
    fn replay_is_deterministic() {
        let text = format!("{SAMPLE}\n2004-02-28 01:01:06.02 4 2 20.1 36.0 40.0 2.68\n{SAMPLE}");
        let (a, sa) = parse_dataset_text(&text, None);
        let (b, sb) = parse_dataset_text(&text, None);
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        let streams_a = build_streams(&a, 2).unwrap();
        let streams_b = build_streams(&b, 2).unwrap();
        assert_eq!(streams_a, streams_b);
    }

    #[test]
    fn partition_preserves_every_record_once() {
        let mut records = Vec::new();
        for epoch in 1..=10u64 {
            for mote in 1..=7u8 {
                records.push(record(mote, epoch, 20.0 + mote as f64));
            }
        }
        let streams = build_streams(&records, 3).unwrap();
        let total: usize = streams.iter().map(|s| s.vectors.len()).sum();
        assert_eq!(total, records.len());
    }

    #[test]
    fn clean_csv_has_documented_header() {
        let records = vec![record(1, 1, 20.0), record(1, 2, 21.0)];
        let streams = build_streams(&records, 1).unwrap();
        let mut buf = Vec::new();
        write_clean_csv(&streams, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "node_id,seq,temperature,humidity,light,voltage"
        );
        assert_eq!(lines.next().unwrap(), "0,0,20,40,100,2.7");
    }

    #[test]
    fn generic_csv_mode_reads_node_vectors() {
        let text = "node_id,v1,v2\n0,1.5,2.5\n1,3.0,4.0\n0,5.0,6.0\nbad,1,2\n0,7.0\n";
        let (streams, stats) = parse_csv_streams_text(text).unwrap();
        assert_eq!(streams.len(), 2);
        assert_eq!(streams[0].vectors.len(), 2);
        assert_eq!(streams[0].vectors[1].components(), &[5.0, 6.0]);
        assert_eq!(stats.unparseable, 1);
        assert_eq!(stats.short_line, 1);
    }
}
