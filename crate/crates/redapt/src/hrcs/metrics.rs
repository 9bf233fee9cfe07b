use std::collections::BTreeMap;

use serde::Serialize;

use super::config::ScenarioConfig;
use super::sim::{Direction, SimTrace, VehicleRecord};
use super::utility::eval_utilities;
use crate::spec::{Instance, State, Trace, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub p_north: f64,
    pub p_south: f64,
    pub p: f64,
    pub n_peak: u64,
    /// Vehicles entering per minute at each entrance.
    pub mean_f_north: f64,
    pub mean_f_south: f64,
    pub entered: u64,
    pub completed: u64,
}

/// Share of completed trips from `dir` shorter than `threshold` seconds;
/// 1 when none has completed.
pub fn p_of(vehicles: &[VehicleRecord], dir: Direction, threshold: f64) -> f64 {
    let (fast, done) = vehicles
        .iter()
        .filter(|v| v.direction == dir)
        .filter_map(VehicleRecord::driving_time)
        .fold((0u64, 0u64), |(fast, done), d| {
            (fast + u64::from(d < threshold), done + 1)
        });
    if done == 0 {
        1.0
    } else {
        fast as f64 / done as f64
    }
}

/// Largest number of vehicles on the highway at any instant.
pub fn n_peak(vehicles: &[VehicleRecord]) -> u64 {
    let mut edges: Vec<(f64, i64)> = Vec::with_capacity(2 * vehicles.len());
    for v in vehicles {
        edges.push((v.entry_time, 1));
        if let Some(x) = v.exit_time {
            edges.push((x, -1));
        }
    }
    // Exits before entries at equal times.
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (mut cur, mut peak) = (0i64, 0i64);
    for (_, d) in edges {
        cur += d;
        peak = peak.max(cur);
    }
    peak as u64
}

pub fn compute_metrics(trace: &SimTrace, cfg: &ScenarioConfig) -> Metrics {
    let vs = &trace.vehicles;
    let p_north = p_of(vs, Direction::North, cfg.p_time_threshold);
    let p_south = p_of(vs, Direction::South, cfg.p_time_threshold);
    let count = |d| vs.iter().filter(|v| v.direction == d).count() as f64;
    Metrics {
        p_north,
        p_south,
        p: p_north.min(p_south),
        n_peak: n_peak(vs),
        mean_f_north: count(Direction::North) / cfg.duration,
        mean_f_south: count(Direction::South) / cfg.duration,
        entered: vs.len() as u64,
        completed: vs.iter().filter(|v| v.exit_time.is_some()).count() as u64,
    }
}

/// `(p_north, p_south)` over the trips completed by each row's time.
pub fn cumulative_p(trace: &SimTrace, threshold: f64) -> Vec<(f64, f64)> {
    let mut exits: Vec<(f64, Direction, bool)> = trace
        .vehicles
        .iter()
        .filter_map(|v| {
            let d = v.driving_time()?;
            Some((v.exit_time?, v.direction, d < threshold))
        })
        .collect();
    exits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut fast = [0u64; 2];
    let mut done = [0u64; 2];
    let mut i = 0;
    let ratio = |f: u64, d: u64| if d == 0 { 1.0 } else { f as f64 / d as f64 };
    trace
        .rows
        .iter()
        .map(|row| {
            while i < exits.len() && exits[i].0 <= row.time {
                let k = usize::from(exits[i].1 == Direction::South);
                done[k] += 1;
                fast[k] += u64::from(exits[i].2);
                i += 1;
            }
            (ratio(fast[0], done[0]), ratio(fast[1], done[1]))
        })
        .collect()
}

/// The run as a trace of specification states, one per row. Each state
/// binds `time`, `E`, `n`, `gate`, the flow slots, the gate parameters,
/// `p`, `p_north`, `p_south`, `U_safety` and `U_pass`, and holds one
/// `I_sensor` instance per flow slot whose `value` field is its reading.
pub fn spec_trace(trace: &SimTrace, p_threshold: f64) -> Trace {
    let ps = cumulative_p(trace, p_threshold);
    let mut states = Vec::with_capacity(trace.rows.len());
    for (row, (pn, psouth)) in trace.rows.iter().zip(ps) {
        let mut vars = BTreeMap::new();
        vars.insert("time".to_string(), Value::Number(row.time));
        vars.insert("E".into(), Value::Number(row.e));
        vars.insert("n".into(), Value::Number(row.n as f64));
        vars.insert("gate".into(), Value::Text(row.gate.as_str().into()));
        vars.insert("t_dispatch".into(), Value::Number(row.t_dispatch));
        vars.insert("t_close".into(), Value::Number(row.t_close));
        vars.insert("t_open".into(), Value::Number(row.t_open));
        vars.insert("p_north".into(), Value::Number(pn));
        vars.insert("p_south".into(), Value::Number(psouth));
        vars.insert("p".into(), Value::Number(pn.min(psouth)));
        let (us, up) = match eval_utilities(row.t_close, row.t_open, row.e) {
            Ok(u) => (Value::Number(u.u_safety), Value::Number(u.u_pass)),
            Err(_) => (Value::Absent, Value::Absent),
        };
        vars.insert("U_safety".into(), us);
        vars.insert("U_pass".into(), up);
        let mut instances = BTreeMap::new();
        for (slot, v) in trace.slots.iter().zip(&row.f) {
            vars.insert(slot.clone(), Value::from(*v));
            instances.insert(
                slot.clone(),
                Instance {
                    class: super::sensors::FLOW_CLASS.to_string(),
                    fields: BTreeMap::from([("value".to_string(), Value::from(*v))]),
                },
            );
        }
        states.push(State {
            time: row.time,
            vars,
            instances,
        });
    }
    Trace::new(states).expect("rows are strictly increasing in time")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(dir: Direction, entry: f64, exit: Option<f64>) -> VehicleRecord {
        VehicleRecord {
            id: 0,
            direction: dir,
            entry_time: entry,
            exit_time: exit,
        }
    }

    #[test]
    fn peak_counts_overlap() {
        let vs = [
            v(Direction::North, 0.0, Some(10.0)),
            v(Direction::South, 5.0, Some(15.0)),
            v(Direction::North, 10.0, Some(20.0)),
            v(Direction::North, 12.0, None),
        ];
        assert_eq!(n_peak(&vs), 3);
        assert_eq!(n_peak(&[]), 0);
    }

    #[test]
    fn share_of_fast_trips() {
        let vs = [
            v(Direction::North, 0.0, Some(200.0)),
            v(Direction::North, 0.0, Some(400.0)),
            v(Direction::North, 0.0, None),
        ];
        assert_eq!(p_of(&vs, Direction::North, 400.0), 0.5);
        assert_eq!(p_of(&vs, Direction::South, 400.0), 1.0);
    }
}
