//! Run artifacts: `trace.csv`, `vehicles.json`, `utility.csv` and
//! `histogram.csv`.

use std::io::{Read, Write};

use thiserror::Error;

use super::sim::{GateState, SimTrace, TraceRow, VehicleRecord};
use super::utility::eval_utilities;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed trace: {0}")]
    Format(String),
}

/// `x` rounded to nine significant digits.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

pub fn fmt_num(x: f64) -> String {
    format!("{}", round9(x))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

const FIXED_HEAD: [&str; 4] = ["time", "E", "n", "gate"];
const FIXED_TAIL: [&str; 3] = ["t_dispatch", "t_close", "t_open"];

pub fn write_trace_csv<W: Write>(out: W, trace: &SimTrace) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = FIXED_HEAD
        .iter()
        .copied()
        .chain(trace.slots.iter().map(String::as_str))
        .chain(FIXED_TAIL)
        .collect();
    w.write_record(&header)?;
    for r in &trace.rows {
        let mut rec = vec![
            fmt_num(r.time),
            fmt_num(r.e),
            r.n.to_string(),
            r.gate.as_str().to_string(),
        ];
        rec.extend(r.f.iter().map(|v| fmt_opt(*v)));
        rec.extend([fmt_num(r.t_dispatch), fmt_num(r.t_close), fmt_num(r.t_open)]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_num(field: &str, column: &str, line: usize) -> Result<f64, ExportError> {
    field
        .trim()
        .parse()
        .map_err(|_| ExportError::Format(format!("row {line}: `{column}` is not a number: `{field}`")))
}

/// Reads a trace written by [`write_trace_csv`]; vehicles are left empty.
pub fn read_trace_csv<R: Read>(input: R) -> Result<SimTrace, ExportError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let n = header.len();
    let ok = n >= FIXED_HEAD.len() + FIXED_TAIL.len()
        && header[..4] == FIXED_HEAD
        && header[n - 3..] == FIXED_TAIL;
    if !ok {
        return Err(ExportError::Format(format!(
            "expected columns time,E,n,gate,<slots>,t_dispatch,t_close,t_open, got {}",
            header.join(",")
        )));
    }
    let slots: Vec<String> = header[4..n - 3].to_vec();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| parse_num(&rec[k], &header[k], line);
        let gate = match rec[3].trim() {
            "open" => GateState::Open,
            "closed" => GateState::Closed,
            other => return Err(ExportError::Format(format!("row {line}: unknown gate state `{other}`"))),
        };
        let mut f = Vec::with_capacity(slots.len());
        for k in 4..n - 3 {
            f.push(if rec[k].trim().is_empty() { None } else { Some(num(k)?) });
        }
        let count = num(2)?;
        if count < 0.0 || count.fract() != 0.0 {
            return Err(ExportError::Format(format!("row {line}: `n` must be a count")));
        }
        let row = TraceRow {
            time: num(0)?,
            e: num(1)?,
            n: count as u64,
            gate,
            f,
            t_dispatch: num(n - 3)?,
            t_close: num(n - 2)?,
            t_open: num(n - 1)?,
        };
        if rows.last().is_some_and(|p: &TraceRow| p.time >= row.time) {
            return Err(ExportError::Format(format!("row {line}: time does not increase")));
        }
        rows.push(row);
    }
    Ok(SimTrace {
        slots,
        rows,
        vehicles: Vec::new(),
    })
}

pub fn write_vehicles_json<W: Write>(out: W, vehicles: &[VehicleRecord]) -> Result<(), ExportError> {
    let rounded: Vec<VehicleRecord> = vehicles
        .iter()
        .map(|v| VehicleRecord {
            entry_time: round9(v.entry_time),
            exit_time: v.exit_time.map(round9),
            ..v.clone()
        })
        .collect();
    serde_json::to_writer(out, &rounded)?;
    Ok(())
}

pub fn read_vehicles_json<R: Read>(input: R) -> Result<Vec<VehicleRecord>, ExportError> {
    Ok(serde_json::from_reader(input)?)
}

/// Per row: `time,E,t_close,t_open,U_safety,U_pass`; utilities are empty
/// where the timing is inadmissible.
pub fn write_utility_csv<W: Write>(out: W, trace: &SimTrace) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "E", "t_close", "t_open", "U_safety", "U_pass"])?;
    for r in &trace.rows {
        let u = eval_utilities(r.t_close, r.t_open, r.e).ok();
        w.write_record([
            fmt_num(r.time),
            fmt_num(r.e),
            fmt_num(r.t_close),
            fmt_num(r.t_open),
            fmt_opt(u.map(|u| u.u_safety)),
            fmt_opt(u.map(|u| u.u_pass)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Width of a driving-time histogram bin, seconds.
pub const HISTOGRAM_BIN: f64 = 20.0;

/// Share of completed trips per driving-time bin and entrance.
pub fn write_histogram_csv<W: Write>(out: W, vehicles: &[VehicleRecord]) -> Result<(), ExportError> {
    use super::sim::Direction;
    let mut counts: std::collections::BTreeMap<u64, [u64; 2]> = Default::default();
    let mut totals = [0u64; 2];
    for v in vehicles {
        let Some(d) = v.driving_time() else { continue };
        let k = usize::from(v.direction == Direction::South);
        counts.entry((d / HISTOGRAM_BIN).floor() as u64).or_default()[k] += 1;
        totals[k] += 1;
    }
    let share = |c: u64, t: u64| if t == 0 { 0.0 } else { c as f64 / t as f64 };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_start", "bin_end", "north", "south"])?;
    for (bin, c) in counts {
        let lo = bin as f64 * HISTOGRAM_BIN;
        w.write_record([
            fmt_num(lo),
            fmt_num(lo + HISTOGRAM_BIN),
            fmt_num(share(c[0], totals[0])),
            fmt_num(share(c[1], totals[1])),
        ])?;
    }
    w.flush()?;
    Ok(())
}
